//! JSON run configurations for the command line.
//!
//! A [`RunConfig`] names the descriptor files per view, the tensor layout,
//! the learner knobs (with `d_out` either a single value or a sweep list),
//! and the protocol settings. A [`SynthRunConfig`] describes a synthetic
//! dataset to emit. Unknown keys are rejected so typos fail loudly.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{align_views, load_feature_set, FileFormat, PairedViews, View};
use crate::error::{Error, Result};
use crate::evaluation::{Direction, ProtocolOptions};
use crate::synth::SynthConfig;
use crate::txqda::TxqdaConfig;

fn default_true() -> bool {
    true
}

fn default_csv() -> FileFormat {
    FileFormat::Csv
}

fn default_max_iters() -> usize {
    5
}

fn default_conv_tol() -> f64 {
    1e-6
}

fn default_reg_eps() -> f64 {
    crate::xqda::DEFAULT_REG_EPS
}

fn default_folds() -> usize {
    10
}

fn default_train_fraction() -> f64 {
    0.5
}

/// One descriptor's pair of view files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorConfig {
    pub name: String,
    pub view_a: PathBuf,
    pub view_b: PathBuf,
    #[serde(default = "default_csv")]
    pub format: FileFormat,
}

/// A single output dimension or a sweep list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimSpec {
    Single(usize),
    Sweep(Vec<usize>),
}

impl DimSpec {
    pub fn list(&self) -> Vec<usize> {
        match self {
            DimSpec::Single(d) => vec![*d],
            DimSpec::Sweep(v) => v.clone(),
        }
    }
}

/// Configuration for `train` and `evaluate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub descriptors: Vec<DescriptorConfig>,
    /// Which descriptors to fuse, in stacking order; defaults to all of them
    /// in listed order.
    #[serde(default)]
    pub fuse: Option<Vec<String>>,
    pub part_width: usize,
    #[serde(default = "default_true")]
    pub standardize: bool,
    pub p_out: usize,
    pub d_out: DimSpec,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_conv_tol")]
    pub conv_tol: f64,
    #[serde(default = "default_reg_eps")]
    pub reg_eps: f64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.descriptors.is_empty() {
            return Err(Error::Config("descriptors must not be empty".into()));
        }
        if self.d_out.list().is_empty() {
            return Err(Error::Config("d_out sweep must not be empty".into()));
        }
        let names: BTreeSet<&str> = self.descriptors.iter().map(|d| d.name.as_str()).collect();
        if names.len() != self.descriptors.len() {
            return Err(Error::Config("descriptor names must be distinct".into()));
        }
        if let Some(fuse) = &self.fuse {
            if fuse.is_empty() {
                return Err(Error::Config("fuse list must not be empty".into()));
            }
            for name in fuse {
                if !names.contains(name.as_str()) {
                    return Err(Error::Config(format!(
                        "fuse entry {name:?} names no configured descriptor"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The descriptors to use, in fusion order.
    pub fn fused_descriptor_configs(&self) -> Vec<&DescriptorConfig> {
        match &self.fuse {
            None => self.descriptors.iter().collect(),
            Some(order) => order
                .iter()
                .map(|name| {
                    self.descriptors
                        .iter()
                        .find(|d| &d.name == name)
                        .expect("validated")
                })
                .collect(),
        }
    }

    /// Loads every configured descriptor pair, aligns the views, and
    /// restricts all descriptors to the person ids they share.
    pub fn load_descriptors(&self) -> Result<Vec<PairedViews>> {
        let mut pairs = Vec::new();
        for d in self.fused_descriptor_configs() {
            let a = load_feature_set(&d.view_a, d.format, &d.name, Some(View::A))?;
            let b = load_feature_set(&d.view_b, d.format, &d.name, Some(View::B))?;
            pairs.push(align_views(&a, &b)?);
        }
        // Descriptors may cover different persons; keep the common core.
        let mut shared: BTreeSet<u64> = pairs[0].person_ids().iter().copied().collect();
        for p in &pairs[1..] {
            let ids: BTreeSet<u64> = p.person_ids().iter().copied().collect();
            shared = shared.intersection(&ids).copied().collect();
        }
        if shared.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        let shared: Vec<u64> = shared.into_iter().collect();
        pairs
            .into_iter()
            .map(|p| {
                Ok(PairedViews {
                    view_a: p.view_a.subset(&shared)?,
                    view_b: p.view_b.subset(&shared)?,
                })
            })
            .collect()
    }

    pub fn txqda_config(&self, d_out: usize) -> TxqdaConfig {
        TxqdaConfig {
            p_out: self.p_out,
            d_out,
            max_iters: self.max_iters,
            conv_tol: self.conv_tol,
            reg_eps: self.reg_eps,
        }
    }

    pub fn protocol_options(&self, d_out: usize) -> ProtocolOptions {
        ProtocolOptions {
            part_width: self.part_width,
            standardize: self.standardize,
            txqda: self.txqda_config(d_out),
            n_folds: self.folds,
            train_fraction: self.train_fraction,
            seed: self.seed,
            direction: self.direction,
        }
    }
}

fn default_noise() -> f64 {
    0.2
}

fn default_synth_name() -> String {
    "synth".into()
}

/// Configuration for `synth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthRunConfig {
    pub n_persons: usize,
    pub latent_dim: usize,
    pub feature_dim: usize,
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub view_transform_seed: u64,
    #[serde(default)]
    pub sample_seed: u64,
    #[serde(default = "default_synth_name")]
    pub name: String,
    #[serde(default = "default_csv")]
    pub format: FileFormat,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl SynthRunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            n_persons: self.n_persons,
            latent_dim: self.latent_dim,
            feature_dim: self.feature_dim,
            noise_sigma: self.noise_sigma,
            view_transform_seed: self.view_transform_seed,
            sample_seed: self.sample_seed,
        }
    }
}

/// FNV-1a over the canonical JSON of a config, used to stamp output files.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("{hash:016x}")
}
