// The vector-space discriminant core on its own: cross-view difference
// moments, the generalized eigenproblem, and Mahalanobis ranking.
//
// Run with `cargo run --example xqda_vectors`.

use treid::matching::rank_gallery;
use treid::synth::{generate_crossview, SynthConfig};
use treid::xqda::{difference_moments, regularize, solve_gen_eig, xqda_train, XqdaConfig};
use treid::Vector;

pub fn run() -> treid::Result<()> {
    let cfg = SynthConfig {
        n_persons: 40,
        latent_dim: 6,
        feature_dim: 16,
        noise_sigma: 0.2,
        view_transform_seed: 3,
        sample_seed: 4,
    };
    let (view_a, view_b) = generate_crossview(&cfg);

    let scatter = difference_moments(
        &view_a.features,
        &view_a.person_ids,
        &view_b.features,
        &view_b.person_ids,
    )?;
    println!("intra pairs: {}, extra pairs: {}", scatter.n_i, scatter.n_e);

    let spectrum = solve_gen_eig(&scatter.sigma_e, &regularize(&scatter.sigma_i, 1e-3))?;
    println!(
        "top eigenvalues (extra/intra variance ratios): {:?}",
        &spectrum.eigenvalues[..spectrum.len().min(5)]
    );

    let model = xqda_train(
        &view_a.features,
        &view_a.person_ids,
        &view_b.features,
        &view_b.person_ids,
        &XqdaConfig::new(6),
    )?;
    println!(
        "kept {} of {} requested directions, {} eigenvalues above 1",
        model.dim(),
        model.requested_dim,
        model.lambda_above_one
    );

    // Rank person 0 of view A against the full view-B gallery.
    let probes = model.project_rows(&view_a.features)?;
    let gallery = model.project_rows(&view_b.features)?;
    let probe = Vector::from_fn(probes.ncols(), |c, _| probes[(0, c)]);
    let ranked = rank_gallery(&probe, &gallery, &model.metric)?;
    println!("probe person 0, top five gallery entries:");
    for i in 0..5 {
        println!(
            "  rank {}: person {} (distance {:+.4}, similarity {:.4})",
            i + 1,
            view_b.person_ids[ranked.order[i]],
            ranked.distances[i],
            ranked.similarities[i]
        );
    }
    assert_eq!(ranked.order[0], 0, "the true match ranks first");
    Ok(())
}

fn main() {
    run().expect("xqda vectors example");
}
