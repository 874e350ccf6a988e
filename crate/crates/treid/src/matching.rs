//! Distances, gallery ranking, and score normalization.
//!
//! Distances are quadratic forms `(x−y)ᵀ M (x−y)` where `M` may be
//! indefinite, so negative values are legal; ranking only compares them.
//! Normalized similarities are the per-probe min–max inversion of the
//! distances, which preserves the ranking and lands in `[0, 1]`.

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Gallery entries ordered best-first for one probe.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    /// Gallery indices, ascending distance, ties broken by ascending index.
    pub order: Vec<usize>,
    /// Distances along `order` (ascending).
    pub distances: Vec<f64>,
    /// Similarities along `order` (descending, in `[0, 1]`).
    pub similarities: Vec<f64>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// `(x−y)ᵀ M (x−y)` for a symmetric form `M`.
pub fn mahalanobis(form: &Matrix, x: &Vector, y: &Vector) -> Result<f64> {
    let d = form.nrows();
    if form.ncols() != d || x.len() != d || y.len() != d {
        return Err(Error::Shape(format!(
            "form is {}x{} but vectors have {} and {} entries",
            d,
            form.ncols(),
            x.len(),
            y.len()
        )));
    }
    let delta = x - y;
    Ok(delta.dot(&(form * &delta)))
}

/// Ranks gallery rows by ascending distance to the probe under `form`,
/// breaking ties by gallery index.
pub fn rank_gallery(probe: &Vector, gallery: &Matrix, form: &Matrix) -> Result<RankedList> {
    if gallery.nrows() == 0 {
        return Err(Error::Shape("gallery is empty".into()));
    }
    if gallery.ncols() != probe.len() {
        return Err(Error::Shape(format!(
            "probe has {} dims, gallery rows have {}",
            probe.len(),
            gallery.ncols()
        )));
    }
    let n = gallery.nrows();
    let mut distances = Vec::with_capacity(n);
    for j in 0..n {
        let row = Vector::from_fn(gallery.ncols(), |c, _| gallery[(j, c)]);
        distances.push(mahalanobis(form, probe, &row)?);
    }
    let similarities = normalize_scores(&distances);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    Ok(RankedList {
        distances: order.iter().map(|&i| distances[i]).collect(),
        similarities: order.iter().map(|&i| similarities[i]).collect(),
        order,
    })
}

/// Min–max inversion of distances into `[0, 1]` similarities:
/// `s = (d_max − d) / (d_max − d_min)`, all ones when the range is empty.
pub fn normalize_scores(distances: &[f64]) -> Vec<f64> {
    let min = distances.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = distances.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return vec![1.0; distances.len()];
    }
    distances.iter().map(|d| (max - d) / (max - min)).collect()
}
