// Tour of the 3-order tensor type: canonical layout, unfoldings, mode
// products, and per-person slices.
//
// Run with `cargo run --example tensor_algebra`.

use treid::{vectorize, Dims, Matrix, Mode, Tensor3};

pub fn run() -> treid::Result<()> {
    // Parts x features x persons = 2 x 2 x 2, data 1..8 in canonical layout:
    // element (i, j, k) sits at i + j*2 + k*4.
    let t = Tensor3::from_vec(Dims::new(2, 2, 2), (1..=8).map(f64::from).collect())?;
    println!("dims: {:?}", t.dims());

    for mode in [Mode::Parts, Mode::Features, Mode::Persons] {
        let unfolded = t.unfold(mode);
        println!("unfold({mode:?}) = {}", unfolded);
        let back = Tensor3::fold(&unfolded, mode, t.dims())?;
        assert_eq!(back.data(), t.data(), "fold inverts unfold bitwise");
    }

    // Persons stay put; parts and features can be projected.
    let pick_first_part = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
    let reduced = t.mode_product(&pick_first_part, Mode::Parts)?;
    println!(
        "after projecting parts onto its first axis: dims {:?}, data {:?}",
        reduced.dims(),
        reduced.data()
    );

    for k in 0..t.dims().persons {
        let slice = t.person_slice(k)?;
        println!(
            "person {k}: slice = {} vec = {:?}",
            slice,
            vectorize(&slice).as_slice()
        );
    }
    Ok(())
}

fn main() {
    run().expect("tensor algebra example");
}
