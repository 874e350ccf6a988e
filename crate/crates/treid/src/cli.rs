//! The `treid` command line: `synth`, `ingest`, `train`, `evaluate`, `match`.
//!
//! Every command is deterministic given its configuration and seed, writes
//! outputs atomically, and maps failures to exit codes: 0 success, 1 bad
//! configuration or unreadable inputs, 2 numerical failure (with the failing
//! fold named on stderr).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::{config_hash, RunConfig, SynthRunConfig};
use crate::dataset::{
    self, assemble_tensors, fit_fold_standardizers, FeatureSet, FileFormat, StandardizationStats,
    View,
};
use crate::error::{Error, Result};
use crate::evaluation::{format_table, ExperimentReport};
use crate::matching::rank_gallery;
use crate::synth::generate_crossview;
use crate::txqda::{load_model_file, save_model_file, txqda_train};
use crate::util::write_atomic;
use crate::Vector;

const CONFIG_HELP: &str = "\
Run config (JSON), with defaults:
  {
    \"descriptors\": [
      {\"name\": \"cnn\", \"view_a\": \"cnn_a.csv\", \"view_b\": \"cnn_b.csv\", \"format\": \"csv\"}
    ],
    \"fuse\": [\"cnn\", \"lomo\"],        // optional; default: all descriptors, listed order
    \"part_width\": 15,                // w: vectors split into ceil(D/w) parts of width w
    \"standardize\": true,             // default true; z-score fitted on training rows
    \"p_out\": 4,                      // parts-mode output dimension
    \"d_out\": 10,                     // features-mode output dimension; a list sweeps it
    \"max_iters\": 5,                  // default 5
    \"conv_tol\": 1e-6,                // default 1e-6
    \"reg_eps\": 1e-3,                 // default 1e-3
    \"folds\": 10,                     // default 10
    \"train_fraction\": 0.5,           // default 0.5
    \"seed\": 0,                       // default 0
    \"direction\": \"a_to_b\",           // a_to_b | b_to_a | mean; default a_to_b
    \"out_dir\": \"runs\"                // optional; default current directory
  }";

const SYNTH_CONFIG_HELP: &str = "\
Synth config (JSON), with defaults:
  {
    \"n_persons\": 100,
    \"latent_dim\": 8,
    \"feature_dim\": 60,
    \"noise_sigma\": 0.2,              // default 0.2
    \"view_transform_seed\": 0,        // default 0
    \"sample_seed\": 0,                // default 0
    \"name\": \"synth\",                 // default \"synth\"
    \"format\": \"csv\",                 // csv | bin; default csv
    \"out_dir\": \"data\"                // optional; default current directory
  }";

#[derive(Parser)]
#[command(
    name = "treid",
    version,
    about = "Cross-view person re-identification: tensor feature fusion, multilinear discriminant learning, CMC evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cross-view descriptor dataset.
    #[command(after_help = SYNTH_CONFIG_HELP)]
    Synth {
        /// Synth config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format: csv or bin (overrides the config).
        #[arg(long)]
        format: Option<FileFormat>,
        /// Sample seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate a descriptor file and rewrite it in a chosen format.
    Ingest {
        /// Input file; the format is sniffed from its magic bytes.
        #[arg(long)]
        input: PathBuf,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        /// Output format: csv or bin.
        #[arg(long, default_value = "csv")]
        format: FileFormat,
        /// View label, required for binary inputs (they carry none).
        #[arg(long)]
        view: Option<View>,
        /// Descriptor name; defaults to the input file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Train a model on all configured identities and save it.
    #[command(after_help = CONFIG_HELP)]
    Train {
        /// Run config JSON; d_out must be a single value here.
        #[arg(long)]
        config: PathBuf,
        /// Model output path; defaults to <out_dir>/model.txqd.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the seeded k-fold protocol and write JSON and CSV reports.
    #[command(after_help = CONFIG_HELP)]
    Evaluate {
        /// Run config JSON; a d_out list sweeps the features-mode dimension.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rank probe persons against a gallery with a trained model.
    Match {
        /// Model file written by `treid train`.
        #[arg(long)]
        model: PathBuf,
        /// Probe feature file, one per fused descriptor, in fusion order.
        #[arg(long, required = true)]
        probes: Vec<PathBuf>,
        /// Gallery feature file, one per fused descriptor, in fusion order.
        #[arg(long, required = true)]
        gallery: Vec<PathBuf>,
        /// Ranked output CSV.
        #[arg(long, default_value = "matches.csv")]
        out: PathBuf,
    },
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; they are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            config,
            out,
            format,
            seed,
        } => cmd_synth(&config, out, format, seed),
        Command::Ingest {
            input,
            out,
            format,
            view,
            name,
        } => cmd_ingest(&input, &out, format, view, name),
        Command::Train { config, out, seed } => cmd_train(&config, out, seed),
        Command::Evaluate { config, out, seed } => cmd_evaluate(&config, out, seed),
        Command::Match {
            model,
            probes,
            gallery,
            out,
        } => cmd_match(&model, &probes, &gallery, &out),
    }
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn cmd_synth(
    config: &Path,
    out: Option<PathBuf>,
    format: Option<FileFormat>,
    seed: Option<u64>,
) -> Result<()> {
    let mut cfg = SynthRunConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.sample_seed = seed;
    }
    if let Some(format) = format {
        cfg.format = format;
    }
    if let Some(out) = out {
        cfg.out_dir = Some(out);
    }
    let (a, b) = generate_crossview(&cfg.synth_config());
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let ext = match cfg.format {
        FileFormat::Csv => "csv",
        FileFormat::Bin => "tfv",
    };
    let path_a = dir.join(format!("{}_view_a.{ext}", cfg.name));
    let path_b = dir.join(format!("{}_view_b.{ext}", cfg.name));
    dataset::save_feature_set(&path_a, cfg.format, &a)?;
    dataset::save_feature_set(&path_b, cfg.format, &b)?;
    println!("{}", path_a.display());
    println!("{}", path_b.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

fn load_sniffed(path: &Path, name: &str, bin_view: Option<View>) -> Result<FeatureSet> {
    match dataset::sniff_format(path)? {
        FileFormat::Csv => dataset::read_csv_feature_set(path, name),
        FileFormat::Bin => {
            let view = bin_view.ok_or_else(|| {
                Error::Config(format!(
                    "{} is binary and carries no view; pass --view",
                    path.display()
                ))
            })?;
            dataset::read_tfv1_feature_set(path, name, view)
        }
    }
}

fn cmd_ingest(
    input: &Path,
    out: &Path,
    format: FileFormat,
    view: Option<View>,
    name: Option<String>,
) -> Result<()> {
    let name = name.unwrap_or_else(|| {
        input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "features".into())
    });
    let fs = load_sniffed(input, &name, view)?;
    dataset::save_feature_set(out, format, &fs)?;
    println!(
        "{} persons x {} dims ({} view {}) -> {}",
        fs.len(),
        fs.dim(),
        fs.descriptor_name,
        fs.view,
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

/// Preprocessing recorded next to a model so `match` can reproduce it.
#[derive(Serialize, Deserialize)]
struct PipelineMetadata {
    part_width: usize,
    standardize: bool,
    descriptors: Vec<String>,
    standardizers: Option<Vec<StandardizationStats>>,
}

fn single_d_out(cfg: &RunConfig) -> Result<usize> {
    let dims = cfg.d_out.list();
    match dims.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::Config(
            "train needs a single d_out; sweeps are for evaluate".into(),
        )),
    }
}

fn cmd_train(config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let d_out = single_d_out(&cfg)?;
    let descriptors = cfg.load_descriptors()?;
    let ids = descriptors[0].person_ids().to_vec();

    let stats = if cfg.standardize {
        Some(fit_fold_standardizers(&descriptors, &ids)?)
    } else {
        None
    };
    let (tensor_a, tensor_b) =
        assemble_tensors(&descriptors, cfg.part_width, stats.as_deref(), &ids)?;
    let model = txqda_train(&tensor_a, &tensor_b, &ids, &cfg.txqda_config(d_out))?;
    if model.truncated() {
        eprintln!(
            "warning: kept {}x{} directions of the requested {}x{} (not enough positive eigenvalues)",
            model.u1.ncols(),
            model.u2.ncols(),
            cfg.p_out,
            d_out
        );
    }

    let pipeline = PipelineMetadata {
        part_width: cfg.part_width,
        standardize: cfg.standardize,
        descriptors: descriptors
            .iter()
            .map(|d| d.view_a.descriptor_name.clone())
            .collect(),
        standardizers: stats,
    };
    let extra = serde_json::json!({ "pipeline": pipeline });

    let out = out.unwrap_or_else(|| {
        cfg.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
            .join("model.txqd")
    });
    save_model_file(&out, &model, &extra)?;
    println!(
        "trained on {} persons ({} parts x width {}), {} iterations -> {}",
        ids.len(),
        tensor_a.dims().parts,
        tensor_a.dims().features,
        model.iterations_run,
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

/// On-disk shape of the evaluate JSON report.
#[derive(Serialize, Deserialize)]
pub struct EvaluateOutput {
    pub config_hash: String,
    pub seed: u64,
    pub runs: Vec<ExperimentReport>,
}

fn cmd_evaluate(config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.out_dir = Some(out);
    }
    let descriptors = cfg.load_descriptors()?;

    let mut runs = Vec::new();
    for d_out in cfg.d_out.list() {
        let report = crate::evaluation::run_protocol(&descriptors, &cfg.protocol_options(d_out))?;
        eprintln!(
            "d_out {}: {} folds in {:.2}s",
            d_out,
            report.folds.len(),
            report.runtimes.total_secs
        );
        runs.push((d_out, report));
    }

    let gallery_size = runs[0].1.mean_cmc.len();
    let ranks: Vec<usize> = [1usize, 5, 10, 20]
        .into_iter()
        .filter(|&r| r <= gallery_size)
        .collect();
    let rows: Vec<(usize, &crate::evaluation::CmcCurve)> =
        runs.iter().map(|(d, r)| (*d, &r.mean_cmc)).collect();
    let table = format_table(&rows, &ranks)?;
    print!("{}", table.text);

    let hash = config_hash(&cfg);
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let json_path = dir.join(format!("evaluate_{hash}_s{}.json", cfg.seed));
    let csv_path = dir.join(format!("evaluate_{hash}_s{}.csv", cfg.seed));
    let output = EvaluateOutput {
        config_hash: hash,
        seed: cfg.seed,
        runs: runs.into_iter().map(|(_, r)| r).collect(),
    };
    let mut json = serde_json::to_vec_pretty(&output)?;
    json.push(b'\n');
    write_atomic(&json_path, &json)?;
    write_atomic(&csv_path, table.csv.as_bytes())?;
    println!("{}", json_path.display());
    println!("{}", csv_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// match
// ---------------------------------------------------------------------------

/// Loads one side (probes or gallery) across descriptors and restricts every
/// descriptor to the sorted ids they share.
fn load_side(
    paths: &[PathBuf],
    pipeline: &PipelineMetadata,
    bin_view: View,
) -> Result<Vec<FeatureSet>> {
    let mut sets = Vec::new();
    for (path, name) in paths.iter().zip(&pipeline.descriptors) {
        sets.push(load_sniffed(path, name, Some(bin_view))?);
    }
    let mut shared: Vec<u64> = sets[0].person_ids.clone();
    shared.sort_unstable();
    for s in &sets[1..] {
        let ids: std::collections::BTreeSet<u64> = s.person_ids.iter().copied().collect();
        shared.retain(|id| ids.contains(id));
    }
    if shared.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    sets.iter().map(|s| s.subset(&shared)).collect()
}

fn side_tensor(sets: &[FeatureSet], pipeline: &PipelineMetadata) -> Result<crate::tensor::Tensor3> {
    let mut parts = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let set = match &pipeline.standardizers {
            Some(stats) => dataset::apply_standardizer(&stats[i], set)?,
            None => set.clone(),
        };
        parts.push(dataset::tensorize(&set, pipeline.part_width)?);
    }
    dataset::fuse_all(&parts)
}

fn cmd_match(model_path: &Path, probes: &[PathBuf], gallery: &[PathBuf], out: &Path) -> Result<()> {
    let (model, extra) = load_model_file(model_path)?;
    let pipeline: PipelineMetadata = serde_json::from_value(
        extra
            .get("pipeline")
            .cloned()
            .ok_or_else(|| Error::ModelFormat("model carries no pipeline metadata".into()))?,
    )
    .map_err(|e| Error::ModelFormat(format!("pipeline metadata: {e}")))?;

    let n_desc = pipeline.descriptors.len();
    if probes.len() != n_desc || gallery.len() != n_desc {
        return Err(Error::Config(format!(
            "model fuses {n_desc} descriptor(s); pass --probes and --gallery once per descriptor"
        )));
    }
    if let Some(stats) = &pipeline.standardizers {
        if stats.len() != n_desc {
            return Err(Error::ModelFormat(
                "pipeline metadata has a standardizer count mismatch".into(),
            ));
        }
    }
    if pipeline.part_width != model.input_dims().1 {
        return Err(Error::ModelFormat(
            "pipeline part width disagrees with the model's".into(),
        ));
    }

    let probe_sets = load_side(probes, &pipeline, View::A)?;
    let gallery_sets = load_side(gallery, &pipeline, View::B)?;
    let probe_tensor = side_tensor(&probe_sets, &pipeline)?;
    let gallery_tensor = side_tensor(&gallery_sets, &pipeline)?;

    let projected_probes = model.project(&probe_tensor)?;
    let projected_gallery = model.project(&gallery_tensor)?;
    let probe_ids = &probe_sets[0].person_ids;
    let gallery_ids = &gallery_sets[0].person_ids;

    let mut csv = String::from("probe_id,rank,gallery_id,distance,similarity\n");
    for (i, &probe_id) in probe_ids.iter().enumerate() {
        let probe = Vector::from_fn(projected_probes.ncols(), |c, _| projected_probes[(i, c)]);
        let ranked = rank_gallery(&probe, &projected_gallery, &model.metric)?;
        for (rank, ((&g, &d), &s)) in ranked
            .order
            .iter()
            .zip(&ranked.distances)
            .zip(&ranked.similarities)
            .enumerate()
        {
            csv.push_str(&format!(
                "{probe_id},{},{},{d},{s}\n",
                rank + 1,
                gallery_ids[g]
            ));
        }
    }
    write_atomic(out, csv.as_bytes())?;
    println!(
        "ranked {} probes against {} gallery entries -> {}",
        probe_ids.len(),
        gallery_ids.len(),
        out.display()
    );
    Ok(())
}
