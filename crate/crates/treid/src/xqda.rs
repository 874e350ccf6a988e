//! Vector-space cross-view discriminant core.
//!
//! From two views of labeled samples it accumulates the intra-personal and
//! extra-personal second moments of cross-view differences, solves the
//! generalized eigenproblem `Σ_E w = λ Σ_I w` by Cholesky reduction, and
//! builds a Mahalanobis form `(Σ'_I)⁻¹ − (Σ'_E)⁻¹` in the projected
//! subspace. The multilinear learner reuses every piece of this module per
//! tensor mode and for its final metric.
//!
//! The extra-personal moment is never accumulated pair by pair: the sum over
//! all cross pairs has the closed form
//! `N_b·Σ x xᵀ + N_a·Σ z zᵀ − (Σx)(Σz)ᵀ − (Σz)(Σx)ᵀ`, from which the
//! same-label sum is subtracted. The pair loop survives only as a test
//! oracle.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matching;
use crate::{Matrix, Vector};

/// Default ridge fraction for the raw-space intra-personal moment.
pub const DEFAULT_REG_EPS: f64 = 1e-3;

/// Ridge fraction applied to the projected-subspace moments before inversion.
pub const SUBSPACE_REG_EPS: f64 = 1e-6;

/// Intra-personal and extra-personal second moments with their pair counts.
#[derive(Clone, Debug)]
pub struct ScatterPair {
    pub sigma_i: Matrix,
    pub sigma_e: Matrix,
    pub n_i: usize,
    pub n_e: usize,
}

/// Which Gram product a per-sample matrix contributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum GramSide {
    /// `Δ·Δᵀ`: rows of the sample matrices index the output.
    Outer,
    /// `Δᵀ·Δ`: columns of the sample matrices index the output.
    Inner,
}

fn gram(m: &Matrix, side: GramSide) -> Matrix {
    match side {
        GramSide::Outer => m * m.transpose(),
        GramSide::Inner => m.tr_mul(m),
    }
}

fn cross(x: &Matrix, y: &Matrix, side: GramSide) -> Matrix {
    match side {
        GramSide::Outer => x * y.transpose(),
        GramSide::Inner => x.tr_mul(y),
    }
}

/// Cross-view scatter over per-sample matrices. Same-label pairs feed the
/// intra-personal sum; the extra-personal sum comes from the all-pairs closed
/// form minus the intra part. Both moments are divided by `pair count ×
/// divisor`.
pub(crate) fn cross_view_scatter(
    mats_a: &[Matrix],
    labels_a: &[u64],
    mats_b: &[Matrix],
    labels_b: &[u64],
    side: GramSide,
    divisor: usize,
) -> Result<ScatterPair> {
    let (n_a, n_b) = (mats_a.len(), mats_b.len());
    if n_a == 0 || n_b == 0 {
        return Err(Error::Shape("scatter needs samples in both views".into()));
    }
    if labels_a.len() != n_a || labels_b.len() != n_b {
        return Err(Error::Shape(
            "label count does not match sample count".into(),
        ));
    }
    let shape = mats_a[0].shape();
    if mats_a.iter().chain(mats_b).any(|m| m.shape() != shape) {
        return Err(Error::Shape("scatter samples disagree on shape".into()));
    }
    for labels in [labels_a, labels_b] {
        let mut distinct = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(Error::SingleLabel);
        }
    }

    let out_dim = match side {
        GramSide::Outer => shape.0,
        GramSide::Inner => shape.1,
    };

    let mut gram_a = Matrix::zeros(out_dim, out_dim);
    let mut sum_a = Matrix::zeros(shape.0, shape.1);
    for m in mats_a {
        gram_a += gram(m, side);
        sum_a += m;
    }
    let mut gram_b = Matrix::zeros(out_dim, out_dim);
    let mut sum_b = Matrix::zeros(shape.0, shape.1);
    for m in mats_b {
        gram_b += gram(m, side);
        sum_b += m;
    }

    // Same-label pairs, iterated deterministically in index order.
    let mut by_label: HashMap<u64, Vec<usize>> = HashMap::new();
    for (j, &label) in labels_b.iter().enumerate() {
        by_label.entry(label).or_default().push(j);
    }
    let mut sum_intra = Matrix::zeros(out_dim, out_dim);
    let mut n_i = 0usize;
    for (i, &label) in labels_a.iter().enumerate() {
        if let Some(matches) = by_label.get(&label) {
            for &j in matches {
                let delta = &mats_a[i] - &mats_b[j];
                sum_intra += gram(&delta, side);
                n_i += 1;
            }
        }
    }
    if n_i == 0 {
        return Err(Error::NoPositivePairs);
    }
    let n_e = n_a * n_b - n_i;
    if n_e == 0 {
        return Err(Error::SingleLabel);
    }

    let sum_all = gram_a * n_b as f64 + gram_b * n_a as f64
        - cross(&sum_a, &sum_b, side)
        - cross(&sum_b, &sum_a, side);
    let sum_extra = sum_all - &sum_intra;

    let scale_i = 1.0 / (n_i * divisor) as f64;
    let scale_e = 1.0 / (n_e * divisor) as f64;
    Ok(ScatterPair {
        sigma_i: sum_intra * scale_i,
        sigma_e: sum_extra * scale_e,
        n_i,
        n_e,
    })
}

/// Intra/extra-personal second moments of cross-view vector differences.
/// Rows of `xa`/`xb` are samples; labels pair them across views.
pub fn difference_moments(
    xa: &Matrix,
    labels_a: &[u64],
    xb: &Matrix,
    labels_b: &[u64],
) -> Result<ScatterPair> {
    if xa.ncols() != xb.ncols() {
        return Err(Error::Shape(format!(
            "views disagree on dimension: {} vs {}",
            xa.ncols(),
            xb.ncols()
        )));
    }
    let rows = |m: &Matrix| -> Vec<Matrix> {
        (0..m.nrows())
            .map(|r| Matrix::from_fn(1, m.ncols(), |_, c| m[(r, c)]))
            .collect()
    };
    cross_view_scatter(&rows(xa), labels_a, &rows(xb), labels_b, GramSide::Inner, 1)
}

/// Trace-scaled ridge: `s + eps·(trace(s)/d)·I`, falling back to `s + eps·I`
/// when the trace is zero.
pub fn regularize(s: &Matrix, eps: f64) -> Matrix {
    let d = s.nrows();
    let ridge = if s.trace() == 0.0 {
        eps
    } else {
        eps * s.trace() / d as f64
    };
    let mut out = s.clone();
    for i in 0..d {
        out[(i, i)] += ridge;
    }
    out
}

/// Positive generalized eigenpairs of `Σ_E w = λ Σ_I w`, descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Eigenvalues `λ_1 ≥ … ≥ λ_r > 0`.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors as unit-norm columns, first nonzero component
    /// positive.
    pub vectors: Matrix,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// The first `r` eigenvector columns.
    pub fn leading(&self, r: usize) -> Matrix {
        self.vectors.columns(0, r.min(self.len())).into_owned()
    }

    /// How many eigenvalues exceed 1 (extra-personal variance dominating).
    pub fn count_above_one(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > 1.0).count()
    }
}

/// Solves `Σ_E w = λ Σ_I w` for symmetric `Σ_E` and positive-definite `Σ_I`
/// by Cholesky reduction `Σ_I = LLᵀ`, a symmetric eigendecomposition of
/// `L⁻¹ Σ_E L⁻ᵀ`, and the back-map `w = L⁻ᵀ v`.
pub fn solve_gen_eig(sigma_e: &Matrix, sigma_i: &Matrix) -> Result<Spectrum> {
    let d = sigma_i.nrows();
    if !sigma_i.is_square() || !sigma_e.is_square() || sigma_e.nrows() != d {
        return Err(Error::Shape(format!(
            "eigenproblem needs two square matrices of equal size, got {}x{} and {}x{}",
            sigma_e.nrows(),
            sigma_e.ncols(),
            d,
            sigma_i.ncols()
        )));
    }
    let chol = sigma_i
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(sigma_e)
        .ok_or(Error::NotPositiveDefinite)?;
    let z = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::NotPositiveDefinite)?;
    // z = L⁻¹ (L⁻¹ Σ_E)ᵀ, so zᵀ is the whitened matrix; symmetrize rounding away.
    let whitened = (z.transpose() + z) * 0.5;
    let eig = whitened.symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let lt = l.transpose();
    let mut eigenvalues = Vec::new();
    let mut columns: Vec<Vector> = Vec::new();
    for &idx in &order {
        let lambda = eig.eigenvalues[idx];
        if lambda <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(idx).into_owned();
        let mut w = lt
            .solve_upper_triangular(&v)
            .ok_or(Error::NotPositiveDefinite)?;
        w /= w.norm();
        if let Some(first) = w.iter().find(|c| **c != 0.0) {
            if *first < 0.0 {
                w = -w;
            }
        }
        eigenvalues.push(lambda);
        columns.push(w);
    }
    let vectors = Matrix::from_fn(d, columns.len(), |r, c| columns[c][r]);
    Ok(Spectrum {
        eigenvalues,
        vectors,
    })
}

/// Knobs for [`xqda_train`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct XqdaConfig {
    /// Output subspace dimension r.
    pub output_dim: usize,
    /// Ridge fraction for the intra-personal moment.
    pub reg_eps: f64,
}

impl XqdaConfig {
    pub fn new(output_dim: usize) -> Self {
        XqdaConfig {
            output_dim,
            reg_eps: DEFAULT_REG_EPS,
        }
    }
}

/// Learned projection plus subspace Mahalanobis form.
#[derive(Clone, Debug)]
pub struct XqdaModel {
    /// d×r projection, columns are generalized eigenvectors.
    pub projection: Matrix,
    /// r×r symmetric form `(Σ'_I)⁻¹ − (Σ'_E)⁻¹` (possibly indefinite).
    pub metric: Matrix,
    pub reg_eps: f64,
    /// The dimension that was asked for; fewer columns mean truncation.
    pub requested_dim: usize,
    /// Count of generalized eigenvalues above 1.
    pub lambda_above_one: usize,
}

impl XqdaModel {
    pub fn dim(&self) -> usize {
        self.projection.ncols()
    }

    /// True when fewer positive eigenvalues existed than requested.
    pub fn truncated(&self) -> bool {
        self.dim() < self.requested_dim
    }

    /// Projects row-vector samples into the subspace.
    pub fn project_rows(&self, rows: &Matrix) -> Result<Matrix> {
        if rows.ncols() != self.projection.nrows() {
            return Err(Error::Shape(format!(
                "samples have {} dims, projection expects {}",
                rows.ncols(),
                self.projection.nrows()
            )));
        }
        Ok(rows * &self.projection)
    }

    /// Squared Mahalanobis distance between two raw vectors.
    pub fn distance(&self, x: &Vector, y: &Vector) -> Result<f64> {
        if x.len() != self.projection.nrows() || y.len() != self.projection.nrows() {
            return Err(Error::Shape(
                "vector dimension does not match projection".into(),
            ));
        }
        let px = self.projection.tr_mul(x);
        let py = self.projection.tr_mul(y);
        matching::mahalanobis(&self.metric, &px, &py)
    }
}

/// Inverts a symmetric positive-definite matrix via Cholesky.
pub(crate) fn spd_inverse(m: &Matrix) -> Result<Matrix> {
    Ok(m.clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .inverse())
}

/// Builds `(reg(Σ'_I))⁻¹ − (reg(Σ'_E))⁻¹`, symmetrized.
pub(crate) fn subspace_metric(sigma_i: &Matrix, sigma_e: &Matrix) -> Result<Matrix> {
    let inv_i = spd_inverse(&regularize(sigma_i, SUBSPACE_REG_EPS))?;
    let inv_e = spd_inverse(&regularize(sigma_e, SUBSPACE_REG_EPS))?;
    let m = inv_i - inv_e;
    Ok((&m + m.transpose()) * 0.5)
}

/// Learns an XQDA model: top-r generalized eigenvectors of the cross-view
/// moments, then the Mahalanobis form of the projected moments. When fewer
/// than r positive eigenvalues exist the projection is truncated and the
/// model records it.
pub fn xqda_train(
    xa: &Matrix,
    labels_a: &[u64],
    xb: &Matrix,
    labels_b: &[u64],
    config: &XqdaConfig,
) -> Result<XqdaModel> {
    let d = xa.ncols();
    if config.output_dim == 0 {
        return Err(Error::Config("output_dim must be at least 1".into()));
    }
    if config.output_dim > d {
        return Err(Error::Config(format!(
            "output_dim {} exceeds feature dimension {}",
            config.output_dim, d
        )));
    }
    if config.reg_eps <= 0.0 {
        return Err(Error::Config("reg_eps must be positive".into()));
    }
    let scatter = difference_moments(xa, labels_a, xb, labels_b)?;
    let spectrum = solve_gen_eig(
        &scatter.sigma_e,
        &regularize(&scatter.sigma_i, config.reg_eps),
    )?;
    if spectrum.is_empty() {
        return Err(Error::NoPositiveEigenvalues);
    }
    let projection = spectrum.leading(config.output_dim);
    let sigma_i_sub = projection.tr_mul(&(&scatter.sigma_i * &projection));
    let sigma_e_sub = projection.tr_mul(&(&scatter.sigma_e * &projection));
    let metric = subspace_metric(&sigma_i_sub, &sigma_e_sub)?;
    Ok(XqdaModel {
        projection,
        metric,
        reg_eps: config.reg_eps,
        requested_dim: config.output_dim,
        lambda_above_one: spectrum.count_above_one(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Pair-loop oracle for both moments; deliberately ignores the closed form.
    fn naive_moments(
        xa: &Matrix,
        labels_a: &[u64],
        xb: &Matrix,
        labels_b: &[u64],
    ) -> (Matrix, Matrix, usize, usize) {
        let d = xa.ncols();
        let mut si = Matrix::zeros(d, d);
        let mut se = Matrix::zeros(d, d);
        let (mut n_i, mut n_e) = (0usize, 0usize);
        for i in 0..xa.nrows() {
            for j in 0..xb.nrows() {
                let delta: Vector = Vector::from_fn(d, |k, _| xa[(i, k)] - xb[(j, k)]);
                let outer = &delta * delta.transpose();
                if labels_a[i] == labels_b[j] {
                    si += outer;
                    n_i += 1;
                } else {
                    se += outer;
                    n_e += 1;
                }
            }
        }
        (si / n_i as f64, se / n_e as f64, n_i, n_e)
    }

    fn random_view(rng: &mut SplitMix64, n: usize, d: usize) -> (Matrix, Vec<u64>) {
        let m = Matrix::from_fn(n, d, |_, _| rng.next_normal());
        let labels = (0..n as u64).map(|i| i % (n as u64 / 2).max(2)).collect();
        (m, labels)
    }

    #[test]
    fn moments_hand_fixture() {
        let x = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let labels = [10u64, 20u64];
        let sp = difference_moments(&x, &labels, &x, &labels).unwrap();
        assert_eq!(sp.n_i, 2);
        assert_eq!(sp.n_e, 2);
        assert!(sp.sigma_i.amax() == 0.0);
        let expect = Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((sp.sigma_e.clone() - expect).amax() < 1e-15);
    }

    #[test]
    fn moments_error_cases() {
        let x = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        // Two distinct labels per view but none shared.
        let err = difference_moments(&x, &[1, 2], &x, &[3, 4]).unwrap_err();
        assert!(matches!(err, Error::NoPositivePairs));
        // One label in a view.
        let err = difference_moments(&x, &[1, 1], &x, &[1, 2]).unwrap_err();
        assert!(matches!(err, Error::SingleLabel));
    }

    #[test]
    fn closed_form_matches_naive_loop() {
        let mut rng = SplitMix64::new(99);
        let (xa, la) = random_view(&mut rng, 15, 6);
        let (xb, lb) = random_view(&mut rng, 15, 6);
        let sp = difference_moments(&xa, &la, &xb, &lb).unwrap();
        let (si, se, n_i, n_e) = naive_moments(&xa, &la, &xb, &lb);
        assert_eq!((sp.n_i, sp.n_e), (n_i, n_e));
        assert!((sp.sigma_i.clone() - &si).norm() <= 1e-10 * si.norm().max(1.0));
        assert!((sp.sigma_e.clone() - &se).norm() <= 1e-10 * se.norm().max(1.0));
    }

    #[test]
    fn moments_symmetric_and_near_psd() {
        let mut rng = SplitMix64::new(5);
        let (xa, la) = random_view(&mut rng, 12, 5);
        let (xb, lb) = random_view(&mut rng, 14, 5);
        let sp = difference_moments(&xa, &la, &xb, &lb).unwrap();
        for s in [&sp.sigma_i, &sp.sigma_e] {
            assert!((s - s.transpose()).amax() <= 1e-12);
            let min_eig = s
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig >= -1e-9, "min eigenvalue {min_eig}");
        }
    }

    #[test]
    fn swapping_views_leaves_moments_unchanged() {
        let mut rng = SplitMix64::new(31);
        let (xa, la) = random_view(&mut rng, 9, 4);
        let (xb, lb) = random_view(&mut rng, 11, 4);
        let ab = difference_moments(&xa, &la, &xb, &lb).unwrap();
        let ba = difference_moments(&xb, &lb, &xa, &la).unwrap();
        assert!((ab.sigma_i - ba.sigma_i).amax() <= 1e-12);
        assert!((ab.sigma_e - ba.sigma_e).amax() <= 1e-12);
    }

    #[test]
    fn regularize_fixtures() {
        let id = Matrix::identity(2, 2);
        let r = regularize(&id, 0.001);
        assert!((r - Matrix::from_diagonal(&Vector::from_vec(vec![1.001, 1.001]))).amax() < 1e-15);

        let zero = Matrix::zeros(3, 3);
        let r = regularize(&zero, 0.001);
        assert!((r - Matrix::identity(3, 3) * 0.001).amax() < 1e-18);

        let d = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 1.0]));
        let r = regularize(&d, 0.5);
        assert!((r - Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 2.0]))).amax() < 1e-15);
    }

    #[test]
    fn gen_eig_diagonal_case() {
        let se = Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 1.0]));
        let si = Matrix::identity(2, 2);
        let sp = solve_gen_eig(&se, &si).unwrap();
        assert_eq!(sp.eigenvalues.len(), 2);
        assert!((sp.eigenvalues[0] - 4.0).abs() < 1e-12);
        assert!((sp.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((sp.vectors.column(0) - Vector::from_vec(vec![1.0, 0.0])).amax() < 1e-12);
        assert!((sp.vectors.column(1) - Vector::from_vec(vec![0.0, 1.0])).amax() < 1e-12);
    }

    #[test]
    fn gen_eig_hand_case() {
        let se = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let si = Matrix::identity(2, 2);
        let sp = solve_gen_eig(&se, &si).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((sp.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((sp.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((sp.vectors.column(0) - Vector::from_vec(vec![s, s])).amax() < 1e-12);
        assert!((sp.vectors.column(1) - Vector::from_vec(vec![s, -s])).amax() < 1e-12);
    }

    #[test]
    fn gen_eig_matches_inverse_multiply_oracle() {
        let mut rng = SplitMix64::new(77);
        let d = 8;
        let a = Matrix::from_fn(d, d, |_, _| rng.next_normal());
        let sigma_i = &a * a.transpose() + Matrix::identity(d, d) * 0.5;
        let b = Matrix::from_fn(d, 4, |_, _| rng.next_normal());
        let sigma_e = &b * b.transpose();

        let sp = solve_gen_eig(&sigma_e, &sigma_i).unwrap();
        // Residual bound per pair.
        let fro = sigma_e.norm();
        for (k, &lambda) in sp.eigenvalues.iter().enumerate() {
            let w = sp.vectors.column(k).into_owned();
            let resid = (&sigma_e * &w - &sigma_i * &w * lambda).norm();
            assert!(resid <= 1e-8 * fro, "pair {k}: residual {resid}");
        }
        // Brute force: eigenvalues of Σ_I⁻¹ Σ_E via the unsymmetric solver.
        // Σ_E has rank 4 here, so compare the significant eigenvalues of both
        // routes and only bound the tails.
        let inv = sigma_i.clone().try_inverse().unwrap();
        let product = inv * &sigma_e;
        let mut brute: Vec<f64> = product
            .complex_eigenvalues()
            .iter()
            .map(|c| {
                assert!(c.im.abs() < 1e-8, "unexpected complex eigenvalue {c}");
                c.re
            })
            .collect();
        brute.sort_by(|a, b| b.total_cmp(a));
        let lead = sp.eigenvalues[0];
        let significant = |v: &[f64]| {
            v.iter()
                .copied()
                .take_while(|l| *l > 1e-10 * lead)
                .collect::<Vec<_>>()
        };
        let ours = significant(&sp.eigenvalues);
        let theirs = significant(&brute);
        assert_eq!(ours.len(), theirs.len());
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        for tail in &sp.eigenvalues[ours.len()..] {
            assert!(*tail <= 1e-10 * lead);
        }
    }

    #[test]
    fn gen_eig_rejects_indefinite_sigma_i() {
        let si = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]));
        let se = Matrix::identity(2, 2);
        assert!(matches!(
            solve_gen_eig(&se, &si).unwrap_err(),
            Error::NotPositiveDefinite
        ));
    }

    #[test]
    fn feature_scaling_leaves_spectrum_invariant() {
        let mut rng = SplitMix64::new(13);
        let (xa, la) = random_view(&mut rng, 16, 6);
        let (xb, lb) = random_view(&mut rng, 16, 6);
        let solve = |scale: f64| {
            let sp = difference_moments(&(&xa * scale), &la, &(&xb * scale), &lb).unwrap();
            solve_gen_eig(&sp.sigma_e, &regularize(&sp.sigma_i, DEFAULT_REG_EPS)).unwrap()
        };
        let base = solve(1.0);
        let scaled = solve(3.0);
        assert_eq!(base.len(), scaled.len());
        for k in 0..base.len() {
            assert!(
                (base.eigenvalues[k] - scaled.eigenvalues[k]).abs()
                    <= 1e-8 * base.eigenvalues[k].max(1.0)
            );
            let cosine = base.vectors.column(k).dot(&scaled.vectors.column(k)).abs();
            assert!(cosine >= 1.0 - 1e-8, "direction {k} drifted: cos {cosine}");
        }
    }

    #[test]
    fn train_separates_synthetic_identities() {
        let cfg = crate::synth::SynthConfig {
            n_persons: 30,
            latent_dim: 6,
            feature_dim: 12,
            noise_sigma: 0.05,
            view_transform_seed: 2,
            sample_seed: 3,
        };
        let (a, b) = crate::synth::generate_crossview(&cfg);
        let model = xqda_train(
            &a.features,
            &a.person_ids,
            &b.features,
            &b.person_ids,
            &XqdaConfig::new(6),
        )
        .unwrap();
        assert_eq!(model.dim(), 6);
        // Every probe should rank its own identity first.
        let pa = model.project_rows(&a.features).unwrap();
        let pb = model.project_rows(&b.features).unwrap();
        for i in 0..pa.nrows() {
            let pi = Vector::from_fn(pa.ncols(), |c, _| pa[(i, c)]);
            let mut best = (f64::INFINITY, usize::MAX);
            for j in 0..pb.nrows() {
                let pj = Vector::from_fn(pb.ncols(), |c, _| pb[(j, c)]);
                let d = matching::mahalanobis(&model.metric, &pi, &pj).unwrap();
                if d < best.0 {
                    best = (d, j);
                }
            }
            assert_eq!(best.1, i, "probe {i} did not match itself");
        }
    }

    #[test]
    fn train_rejects_degenerate_dims() {
        let x = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let labels = [1u64, 2];
        assert!(matches!(
            xqda_train(&x, &labels, &x, &labels, &XqdaConfig::new(0)).unwrap_err(),
            Error::Config(_)
        ));
        assert!(matches!(
            xqda_train(&x, &labels, &x, &labels, &XqdaConfig::new(3)).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn distances_match_naive_triple_loop() {
        let mut rng = SplitMix64::new(21);
        let (xa, la) = random_view(&mut rng, 20, 7);
        let (xb, lb) = random_view(&mut rng, 20, 7);
        let model = xqda_train(&xa, &la, &xb, &lb, &XqdaConfig::new(4)).unwrap();

        // Explicit G = W M Wᵀ by hand loops, then the quadratic form.
        let d = xa.ncols();
        let r = model.dim();
        let mut g = vec![vec![0.0; d]; d];
        #[allow(clippy::needless_range_loop)]
        for a in 0..d {
            for b in 0..d {
                let mut acc = 0.0;
                for p in 0..r {
                    for q in 0..r {
                        acc += model.projection[(a, p)]
                            * model.metric[(p, q)]
                            * model.projection[(b, q)];
                    }
                }
                g[a][b] = acc;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let x = Vector::from_fn(d, |k, _| xa[(i, k)]);
                let z = Vector::from_fn(d, |k, _| xb[(j, k)]);
                let mut expect = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        expect += (x[a] - z[a]) * g[a][b] * (x[b] - z[b]);
                    }
                }
                let got = model.distance(&x, &z).unwrap();
                assert!((got - expect).abs() <= 1e-10 * expect.abs().max(1.0));
            }
        }
    }
}
