//! Multilinear cross-view discriminant learning on 3-order tensors.
//!
//! Training alternates between the parts mode and the features mode: each
//! step projects every person slice through the other mode's current basis,
//! accumulates cross-view intra/extra scatter there, and replaces the basis
//! with the top generalized eigenvectors. Convergence is measured on the
//! projectors `U Uᵀ`, which ignore eigenvector sign and rotation. The persons
//! mode always keeps its extent.
//!
//! After the alternation the training slices are projected to `U1ᵀ A U2`,
//! vectorized, and a Mahalanobis form `(Σ'_I)⁻¹ − (Σ'_E)⁻¹` is fitted on the
//! vectorized subspace; matching happens entirely in that space.
//!
//! With a single part and `p_out = 1`, one iteration collapses the whole
//! procedure to the vector-space learner in [`crate::xqda`]; the unit and
//! acceptance suites pin that equivalence.

use std::io::{Cursor, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{vectorize, Dims, Mode, Tensor3};
use crate::util::write_atomic;
use crate::xqda::{
    cross_view_scatter, difference_moments, regularize, solve_gen_eig, subspace_metric, GramSide,
    ScatterPair, Spectrum,
};
use crate::{Matrix, Vector};

/// Magic bytes opening a persisted model.
pub const TXQD_MAGIC: [u8; 4] = *b"TXQD";
/// Current model format version.
pub const TXQD_VERSION: u32 = 1;

/// Training knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TxqdaConfig {
    /// Parts-mode output dimension.
    pub p_out: usize,
    /// Features-mode output dimension.
    pub d_out: usize,
    /// Alternation cap; running out is not an error.
    pub max_iters: usize,
    /// Stop once the largest per-mode projector delta drops below this.
    pub conv_tol: f64,
    /// Ridge fraction for the per-mode intra-personal scatter.
    pub reg_eps: f64,
}

impl TxqdaConfig {
    pub fn new(p_out: usize, d_out: usize) -> Self {
        TxqdaConfig {
            p_out,
            d_out,
            max_iters: 5,
            conv_tol: 1e-6,
            reg_eps: crate::xqda::DEFAULT_REG_EPS,
        }
    }

    fn validate(&self, dims: Dims) -> Result<()> {
        if self.p_out == 0 || self.p_out > dims.parts {
            return Err(Error::Config(format!(
                "p_out must lie in 1..={}, got {}",
                dims.parts, self.p_out
            )));
        }
        if self.d_out == 0 || self.d_out > dims.features {
            return Err(Error::Config(format!(
                "d_out must lie in 1..={}, got {}",
                dims.features, self.d_out
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.conv_tol.is_nan() || self.conv_tol < 0.0 {
            return Err(Error::Config("conv_tol must be non-negative".into()));
        }
        if self.reg_eps.is_nan() || self.reg_eps <= 0.0 {
            return Err(Error::Config("reg_eps must be positive".into()));
        }
        Ok(())
    }
}

/// How many generalized eigenvalues exceeded 1 in the last alternation step
/// of each mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaCounts {
    pub mode1: usize,
    pub mode2: usize,
}

/// Learned mode bases plus the vectorized-subspace Mahalanobis form.
#[derive(Clone, Debug)]
pub struct TxqdaModel {
    /// Parts-mode basis, `P × p_out` (columns may be fewer on truncation).
    pub u1: Matrix,
    /// Features-mode basis, `w × d_out`.
    pub u2: Matrix,
    /// Symmetric form on the vectorized subspace, `(p_out·d_out)²`.
    pub metric: Matrix,
    pub config: TxqdaConfig,
    /// Completed alternation iterations.
    pub iterations_run: usize,
    /// Per-iteration max projector delta, one entry per iteration.
    pub convergence_trace: Vec<f64>,
    pub lambda_above_one: LambdaCounts,
}

impl TxqdaModel {
    /// Expected input extents (parts, part width).
    pub fn input_dims(&self) -> (usize, usize) {
        (self.u1.nrows(), self.u2.nrows())
    }

    /// Dimension of the vectorized subspace.
    pub fn subspace_dim(&self) -> usize {
        self.u1.ncols() * self.u2.ncols()
    }

    /// True when a mode kept fewer directions than requested.
    pub fn truncated(&self) -> bool {
        self.u1.ncols() < self.config.p_out || self.u2.ncols() < self.config.d_out
    }

    /// Projects every person of `t`: row k is `vec(U1ᵀ · A_k · U2)`.
    pub fn project(&self, t: &Tensor3) -> Result<Matrix> {
        let dims = t.dims();
        if dims.parts != self.u1.nrows() || dims.features != self.u2.nrows() {
            return Err(Error::Shape(format!(
                "tensor is {}x{}x{} but the model expects parts {} and width {}",
                dims.parts,
                dims.features,
                dims.persons,
                self.u1.nrows(),
                self.u2.nrows()
            )));
        }
        let mut rows = Matrix::zeros(dims.persons, self.subspace_dim());
        for k in 0..dims.persons {
            let slice = t.person_slice(k)?;
            let projected = self.u1.tr_mul(&slice) * &self.u2;
            let v = vectorize(&projected);
            for c in 0..v.len() {
                rows[(k, c)] = v[c];
            }
        }
        Ok(rows)
    }

    /// Squared Mahalanobis distance between two already-projected rows.
    pub fn distance(&self, x: &Vector, y: &Vector) -> Result<f64> {
        crate::matching::mahalanobis(&self.metric, x, y)
    }
}

/// Per-mode cross-view scatter: slices are projected through the other
/// mode's basis, then differences contribute `ΔΔᵀ` (parts mode) or `ΔᵀΔ`
/// (features mode), averaged over `pair count × other-mode width`.
pub fn mode_scatter(
    slices_a: &[Matrix],
    labels_a: &[u64],
    slices_b: &[Matrix],
    labels_b: &[u64],
    u_other: &Matrix,
    mode: Mode,
) -> Result<ScatterPair> {
    let shape = slices_a
        .first()
        .or(slices_b.first())
        .map(Matrix::shape)
        .ok_or_else(|| Error::Shape("scatter needs samples in both views".into()))?;
    let (projected_a, projected_b, side): (Vec<Matrix>, Vec<Matrix>, GramSide) = match mode {
        Mode::Parts => {
            if u_other.nrows() != shape.1 {
                return Err(Error::Shape(format!(
                    "features basis has {} rows but slices are {} wide",
                    u_other.nrows(),
                    shape.1
                )));
            }
            (
                slices_a.iter().map(|s| s * u_other).collect(),
                slices_b.iter().map(|s| s * u_other).collect(),
                GramSide::Outer,
            )
        }
        Mode::Features => {
            if u_other.nrows() != shape.0 {
                return Err(Error::Shape(format!(
                    "parts basis has {} rows but slices have {} parts",
                    u_other.nrows(),
                    shape.0
                )));
            }
            (
                slices_a.iter().map(|s| u_other.tr_mul(s)).collect(),
                slices_b.iter().map(|s| u_other.tr_mul(s)).collect(),
                GramSide::Inner,
            )
        }
        Mode::Persons => return Err(Error::Shape("the persons mode has no scatter step".into())),
    };
    cross_view_scatter(
        &projected_a,
        labels_a,
        &projected_b,
        labels_b,
        side,
        u_other.ncols(),
    )
}

fn mode_basis(scatter: &ScatterPair, reg_eps: f64, dim: usize) -> Result<(Matrix, Spectrum)> {
    let spectrum = solve_gen_eig(&scatter.sigma_e, &regularize(&scatter.sigma_i, reg_eps))?;
    if spectrum.is_empty() {
        return Err(Error::NoPositiveEigenvalues);
    }
    Ok((spectrum.leading(dim), spectrum))
}

/// Trains the multilinear model on two person-aligned tensors.
pub fn txqda_train(
    tensor_a: &Tensor3,
    tensor_b: &Tensor3,
    labels: &[u64],
    config: &TxqdaConfig,
) -> Result<TxqdaModel> {
    let dims = tensor_a.dims();
    if tensor_b.dims() != dims {
        return Err(Error::Shape(format!(
            "view tensors disagree: {:?} vs {:?}",
            dims,
            tensor_b.dims()
        )));
    }
    if labels.len() != dims.persons {
        return Err(Error::Shape(format!(
            "{} labels for {} persons",
            labels.len(),
            dims.persons
        )));
    }
    config.validate(dims)?;

    let slices_a = tensor_a.person_slices();
    let slices_b = tensor_b.person_slices();

    // Deterministic start: the leading identity columns of the features mode.
    let mut u2 = Matrix::identity(dims.features, config.d_out);
    let mut u1 = Matrix::zeros(dims.parts, 0);
    let mut prev_proj1: Option<Matrix> = None;
    let mut prev_proj2 = &u2 * u2.transpose();
    let mut trace = Vec::with_capacity(config.max_iters);
    let mut lambda = LambdaCounts::default();

    for _ in 0..config.max_iters {
        let sp1 = mode_scatter(&slices_a, labels, &slices_b, labels, &u2, Mode::Parts)?;
        let (new_u1, spec1) = mode_basis(&sp1, config.reg_eps, config.p_out)?;
        lambda.mode1 = spec1.count_above_one();

        let sp2 = mode_scatter(
            &slices_a,
            labels,
            &slices_b,
            labels,
            &new_u1,
            Mode::Features,
        )?;
        let (new_u2, spec2) = mode_basis(&sp2, config.reg_eps, config.d_out)?;
        lambda.mode2 = spec2.count_above_one();

        let proj1 = &new_u1 * new_u1.transpose();
        let proj2 = &new_u2 * new_u2.transpose();
        let delta1 = match &prev_proj1 {
            Some(prev) => (&proj1 - prev).norm(),
            None => proj1.norm(),
        } / dims.parts as f64;
        let delta2 = (&proj2 - &prev_proj2).norm() / dims.features as f64;
        let delta = delta1.max(delta2);
        trace.push(delta);

        u1 = new_u1;
        u2 = new_u2;
        prev_proj1 = Some(proj1);
        prev_proj2 = proj2;
        if delta < config.conv_tol {
            break;
        }
    }

    // Final metric in the vectorized projected subspace.
    let subspace = u1.ncols() * u2.ncols();
    let project_all = |slices: &[Matrix]| -> Matrix {
        let mut rows = Matrix::zeros(slices.len(), subspace);
        for (k, slice) in slices.iter().enumerate() {
            let v = vectorize(&(u1.tr_mul(slice) * &u2));
            for c in 0..subspace {
                rows[(k, c)] = v[c];
            }
        }
        rows
    };
    let pa = project_all(&slices_a);
    let pb = project_all(&slices_b);
    let moments = difference_moments(&pa, labels, &pb, labels)?;
    let metric = subspace_metric(&moments.sigma_i, &moments.sigma_e)?;

    Ok(TxqdaModel {
        u1,
        u2,
        metric,
        config: *config,
        iterations_run: trace.len(),
        convergence_trace: trace,
        lambda_above_one: lambda,
    })
}

// ---------------------------------------------------------------------------
// Model persistence
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelMetadata {
    config: TxqdaConfig,
    iterations_run: usize,
    convergence_trace: Vec<f64>,
    lambda_above_one: LambdaCounts,
    #[serde(default)]
    extra: serde_json::Value,
}

fn push_matrix(out: &mut Vec<u8>, m: &Matrix) {
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Serializes a model: magic, version, `u32` dims (parts, width, p_out,
/// d_out), then `U1`, `U2`, `M` as little-endian column-major `f64` blocks,
/// then a length-prefixed JSON metadata blob. `extra` rides along for
/// callers that must reproduce preprocessing at match time.
pub fn model_to_bytes(model: &TxqdaModel, extra: &serde_json::Value) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(&TXQD_MAGIC);
    out.extend_from_slice(&TXQD_VERSION.to_le_bytes());
    for dim in [
        model.u1.nrows(),
        model.u2.nrows(),
        model.u1.ncols(),
        model.u2.ncols(),
    ] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    push_matrix(&mut out, &model.u1);
    push_matrix(&mut out, &model.u2);
    push_matrix(&mut out, &model.metric);
    let meta = ModelMetadata {
        config: model.config,
        iterations_run: model.iterations_run,
        convergence_trace: model.convergence_trace.clone(),
        lambda_above_one: model.lambda_above_one,
        extra: extra.clone(),
    };
    let blob = serde_json::to_vec(&meta)?;
    out.extend_from_slice(&(blob.len() as u32).to_le_bytes());
    out.extend_from_slice(&blob);
    Ok(out)
}

/// Parses a model produced by [`model_to_bytes`], returning it with the
/// caller's `extra` metadata.
pub fn model_from_bytes(bytes: &[u8]) -> Result<(TxqdaModel, serde_json::Value)> {
    let mut cur = Cursor::new(bytes);
    let bad = |msg: &str| Error::ModelFormat(msg.to_string());

    let mut magic = [0u8; 4];
    cur.read_exact(&mut magic)
        .map_err(|_| bad("file too short for magic"))?;
    if magic != TXQD_MAGIC {
        return Err(bad("bad magic, expected TXQD"));
    }
    let mut u32_buf = [0u8; 4];
    let mut read_u32 = |cur: &mut Cursor<&[u8]>, what: &str| -> Result<u32> {
        cur.read_exact(&mut u32_buf)
            .map_err(|_| Error::ModelFormat(format!("file too short for {what}")))?;
        Ok(u32::from_le_bytes(u32_buf))
    };
    let version = read_u32(&mut cur, "version")?;
    if version != TXQD_VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let parts = read_u32(&mut cur, "parts")? as usize;
    let width = read_u32(&mut cur, "width")? as usize;
    let p_out = read_u32(&mut cur, "p_out")? as usize;
    let d_out = read_u32(&mut cur, "d_out")? as usize;
    if parts == 0 || width == 0 || p_out == 0 || d_out == 0 || p_out > parts || d_out > width {
        return Err(Error::ModelFormat(format!(
            "inconsistent dims {parts}x{width} -> {p_out}x{d_out}"
        )));
    }

    let read_matrix =
        |cur: &mut Cursor<&[u8]>, rows: usize, cols: usize, what: &str| -> Result<Matrix> {
            let mut buf = vec![0u8; rows * cols * 8];
            cur.read_exact(&mut buf)
                .map_err(|_| Error::ModelFormat(format!("file too short for {what}")))?;
            let values: Vec<f64> = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if !values.iter().all(|v| v.is_finite()) {
                return Err(Error::ModelFormat(format!("non-finite value in {what}")));
            }
            Ok(Matrix::from_column_slice(rows, cols, &values))
        };
    let u1 = read_matrix(&mut cur, parts, p_out, "U1")?;
    let u2 = read_matrix(&mut cur, width, d_out, "U2")?;
    let sub = p_out * d_out;
    let metric = read_matrix(&mut cur, sub, sub, "metric")?;

    let mut len_buf = [0u8; 4];
    cur.read_exact(&mut len_buf)
        .map_err(|_| bad("file too short for metadata length"))?;
    let meta_len = u32::from_le_bytes(len_buf) as usize;
    let mut blob = vec![0u8; meta_len];
    cur.read_exact(&mut blob)
        .map_err(|_| bad("file too short for metadata"))?;
    if cur.position() != bytes.len() as u64 {
        return Err(bad("trailing bytes after metadata"));
    }
    let meta: ModelMetadata =
        serde_json::from_slice(&blob).map_err(|e| Error::ModelFormat(format!("metadata: {e}")))?;

    Ok((
        TxqdaModel {
            u1,
            u2,
            metric,
            config: meta.config,
            iterations_run: meta.iterations_run,
            convergence_trace: meta.convergence_trace,
            lambda_above_one: meta.lambda_above_one,
        },
        meta.extra,
    ))
}

/// Writes a model file atomically.
pub fn save_model_file(path: &Path, model: &TxqdaModel, extra: &serde_json::Value) -> Result<()> {
    write_atomic(path, &model_to_bytes(model, extra)?)
}

/// Reads a model file written by [`save_model_file`].
pub fn load_model_file(path: &Path) -> Result<(TxqdaModel, serde_json::Value)> {
    model_from_bytes(&std::fs::read(path)?)
}

/// Streams a model to any writer (same bytes as the file form).
pub fn write_model<W: Write>(
    mut w: W,
    model: &TxqdaModel,
    extra: &serde_json::Value,
) -> Result<()> {
    w.write_all(&model_to_bytes(model, extra)?)?;
    Ok(())
}
