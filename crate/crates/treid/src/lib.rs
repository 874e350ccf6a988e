//! Cross-view person re-identification with tensor feature fusion and
//! multilinear discriminant learning.
//!
//! The pipeline: precomputed per-view descriptor vectors are standardized,
//! split into parts to form 3-order tensors (parts × features × persons),
//! optionally fused across descriptors along the parts mode, and projected
//! into a discriminant subspace learned by alternating cross-view
//! eigenproblems on modes 1 and 2. Matching ranks probe persons against a
//! gallery by a Mahalanobis form learned in the vectorized subspace, and a
//! seeded k-fold protocol reports CMC curves.
//!
//! Entry points by task:
//!
//! * [`tensor`]: dense 3-order tensors, unfoldings, mode products;
//! * [`dataset`]: CSV/TFV1 descriptor files, standardization, tensor assembly;
//! * [`xqda`]: vector-space cross-view discriminant core;
//! * [`txqda`]: the multilinear learner and its model format;
//! * [`matching`]: distances, gallery ranking, score normalization;
//! * [`evaluation`]: fold plans, CMC curves, the full protocol, tables;
//! * [`synth`]: seeded synthetic cross-view data for experiments and tests;
//! * [`cli`]: the `treid` command line.
//!
//! The `examples/` directory has one runnable walkthrough per capability;
//! start with `cargo run --example full_protocol`.
//!
//! ```
//! use treid::dataset::align_views;
//! use treid::evaluation::{run_protocol, Direction, ProtocolOptions};
//! use treid::synth::{generate_crossview, SynthConfig};
//! use treid::txqda::TxqdaConfig;
//!
//! let (a, b) = generate_crossview(&SynthConfig {
//!     n_persons: 12, latent_dim: 4, feature_dim: 16,
//!     noise_sigma: 0.2, view_transform_seed: 1, sample_seed: 2,
//! });
//! let paired = align_views(&a, &b)?;
//! let report = run_protocol(&[paired], &ProtocolOptions {
//!     part_width: 4,
//!     standardize: true,
//!     txqda: TxqdaConfig::new(2, 3),
//!     n_folds: 2,
//!     train_fraction: 0.5,
//!     seed: 3,
//!     direction: Direction::AToB,
//! })?;
//! assert!(report.mean_cmc.is_valid());
//! println!("mean rank-1: {:.4}", report.mean_cmc.values[0]);
//! # Ok::<(), treid::Error>(())
//! ```

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod matching;
pub mod rng;
pub mod synth;
pub mod tensor;
pub mod txqda;
pub mod xqda;

mod util;

/// Dense column-major matrix of 64-bit reals.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense vector of 64-bit reals.
pub type Vector = nalgebra::DVector<f64>;

pub use error::{Error, Result};
pub use tensor::{vectorize, Dims, Mode, Tensor3};
