// Full offline/online split: tensorize two descriptor views, train the
// multilinear model, persist it, reload it, and rank probes.
//
// Run with `cargo run --example train_and_match`.

use treid::dataset::{fuse, tensorize};
use treid::matching::rank_gallery;
use treid::synth::{generate_crossview, SynthConfig};
use treid::txqda::{load_model_file, save_model_file, txqda_train, TxqdaConfig};
use treid::Vector;

pub fn run() -> treid::Result<()> {
    // Two synthetic descriptors of different dimensionality, sharing persons.
    let deep = SynthConfig {
        n_persons: 40,
        latent_dim: 6,
        feature_dim: 24,
        noise_sigma: 0.15,
        view_transform_seed: 21,
        sample_seed: 22,
    };
    let local = SynthConfig {
        feature_dim: 36,
        view_transform_seed: 23,
        sample_seed: 24,
        ..deep.clone()
    };
    let (deep_a, deep_b) = generate_crossview(&deep);
    let (local_a, local_b) = generate_crossview(&local);

    // Split every vector into width-6 parts, then stack the descriptors'
    // parts into one tensor per view.
    let width = 6;
    let tensor_a = fuse(&tensorize(&deep_a, width)?, &tensorize(&local_a, width)?)?;
    let tensor_b = fuse(&tensorize(&deep_b, width)?, &tensorize(&local_b, width)?)?;
    println!(
        "fused tensors: {} parts x width {} x {} persons",
        tensor_a.dims().parts,
        tensor_a.dims().features,
        tensor_a.dims().persons
    );

    let mut config = TxqdaConfig::new(5, 4);
    config.max_iters = 5;
    let model = txqda_train(&tensor_a, &tensor_b, &deep_a.person_ids, &config)?;
    println!(
        "trained in {} iterations, projector deltas {:?}",
        model.iterations_run,
        model
            .convergence_trace
            .iter()
            .map(|d| format!("{d:.2e}"))
            .collect::<Vec<_>>()
    );

    // Persist and reload; the bytes carry the bases, the metric, and config.
    let dir = tempfile::tempdir().map_err(treid::Error::Io)?;
    let path = dir.path().join("model.txqd");
    save_model_file(&path, &model, &serde_json::json!({"note": "example"}))?;
    let (model, extra) = load_model_file(&path)?;
    println!(
        "reloaded {} ({} bytes, extra metadata {extra})",
        path.display(),
        std::fs::metadata(&path)?.len()
    );

    // Project and rank: each probe should retrieve itself from the gallery.
    let probes = model.project(&tensor_a)?;
    let gallery = model.project(&tensor_b)?;
    let mut rank1_hits = 0;
    for i in 0..probes.nrows() {
        let probe = Vector::from_fn(probes.ncols(), |c, _| probes[(i, c)]);
        let ranked = rank_gallery(&probe, &gallery, &model.metric)?;
        if ranked.order[0] == i {
            rank1_hits += 1;
        }
    }
    println!("self-match rank-1: {rank1_hits}/{}", probes.nrows());
    Ok(())
}

fn main() {
    run().expect("train and match example");
}
