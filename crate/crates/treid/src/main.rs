fn main() {
    std::process::exit(treid::cli::run(std::env::args_os()));
}
