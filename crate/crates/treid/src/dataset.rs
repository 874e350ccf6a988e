//! Descriptor ingestion and tensor assembly.
//!
//! Feature vectors arrive precomputed, one row per person per camera view,
//! either as CSV (`person_id,view,f0,...`) or as the little-endian binary
//! container `TFV1`. Loaded sets are standardized, aligned across the two
//! views by person id, split into fixed-width parts to form 3-order tensors,
//! and optionally fused across descriptors by stacking parts.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Dims, Tensor3};
use crate::util::write_atomic;
use crate::Matrix;

/// Floor applied to fitted standard deviations so constant columns map to 0.
pub const STD_FLOOR: f64 = 1e-12;

/// Magic bytes opening a TFV1 file.
pub const TFV1_MAGIC: [u8; 4] = *b"TFV1";

/// Camera view label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum View {
    A,
    B,
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            View::A => "A",
            View::B => "B",
        })
    }
}

impl FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" | "a" => Ok(View::A),
            "B" | "b" => Ok(View::B),
            other => Err(format!("view must be A or B, got {other:?}")),
        }
    }
}

/// On-disk representation of a feature set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Bin,
}

impl FromStr for FileFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(FileFormat::Csv),
            "bin" => Ok(FileFormat::Bin),
            other => Err(format!("format must be csv or bin, got {other:?}")),
        }
    }
}

/// Per-view table of person ids and raw descriptor vectors (one row each).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub descriptor_name: String,
    pub view: View,
    pub person_ids: Vec<u64>,
    pub features: Matrix,
}

impl FeatureSet {
    pub fn new(
        descriptor_name: impl Into<String>,
        view: View,
        person_ids: Vec<u64>,
        features: Matrix,
    ) -> Result<Self> {
        let descriptor_name = descriptor_name.into();
        if person_ids.is_empty() || features.ncols() == 0 {
            return Err(Error::Shape(format!(
                "feature set {descriptor_name}/{view} needs at least one row and one dimension"
            )));
        }
        if person_ids.len() != features.nrows() {
            return Err(Error::Shape(format!(
                "{} person ids but {} feature rows",
                person_ids.len(),
                features.nrows()
            )));
        }
        let mut seen = HashSet::with_capacity(person_ids.len());
        for &id in &person_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateId {
                    id,
                    context: format!("{descriptor_name}/{view}"),
                });
            }
        }
        if !features.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "features of {descriptor_name}/{view}"
            )));
        }
        Ok(FeatureSet {
            descriptor_name,
            view,
            person_ids,
            features,
        })
    }

    /// Number of persons.
    pub fn len(&self) -> usize {
        self.person_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.person_ids.is_empty()
    }

    /// Raw descriptor dimension.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Restricts the set to `ids`, reordering rows to match.
    pub fn subset(&self, ids: &[u64]) -> Result<FeatureSet> {
        let index: HashMap<u64, usize> = self
            .person_ids
            .iter()
            .enumerate()
            .map(|(row, &id)| (id, row))
            .collect();
        let mut features = Matrix::zeros(ids.len(), self.dim());
        for (out_row, &id) in ids.iter().enumerate() {
            let &row = index.get(&id).ok_or_else(|| {
                Error::Shape(format!(
                    "person id {id} not present in {}/{}",
                    self.descriptor_name, self.view
                ))
            })?;
            features.set_row(out_row, &self.features.row(row));
        }
        FeatureSet::new(
            self.descriptor_name.clone(),
            self.view,
            ids.to_vec(),
            features,
        )
    }
}

/// Two views of one descriptor restricted to a shared, identically ordered
/// person id sequence.
#[derive(Clone, Debug)]
pub struct PairedViews {
    pub view_a: FeatureSet,
    pub view_b: FeatureSet,
}

impl PairedViews {
    pub fn person_ids(&self) -> &[u64] {
        &self.view_a.person_ids
    }
}

/// Pairs two views on the sorted intersection of their person ids.
pub fn align_views(a: &FeatureSet, b: &FeatureSet) -> Result<PairedViews> {
    let ids_a: BTreeSet<u64> = a.person_ids.iter().copied().collect();
    let ids_b: BTreeSet<u64> = b.person_ids.iter().copied().collect();
    let shared: Vec<u64> = ids_a.intersection(&ids_b).copied().collect();
    if shared.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(PairedViews {
        view_a: a.subset(&shared)?,
        view_b: b.subset(&shared)?,
    })
}

/// Per-dimension mean and (floored) population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Fits a z-score standardizer on the pooled rows of all given sets.
pub fn fit_standardizer(sets: &[&FeatureSet]) -> Result<StandardizationStats> {
    let dim = sets
        .first()
        .map(|s| s.dim())
        .ok_or_else(|| Error::Shape("cannot fit a standardizer on zero feature sets".into()))?;
    if sets.iter().any(|s| s.dim() != dim) {
        return Err(Error::Shape("feature sets disagree on dimension".into()));
    }
    let rows: usize = sets.iter().map(|s| s.len()).sum();
    if rows < 2 {
        return Err(Error::Shape(
            "standardizer needs at least two pooled rows".into(),
        ));
    }
    let mut mean = vec![0.0; dim];
    for s in sets {
        for r in 0..s.len() {
            for (c, m) in mean.iter_mut().enumerate() {
                *m += s.features[(r, c)];
            }
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }
    let mut var = vec![0.0; dim];
    for s in sets {
        for r in 0..s.len() {
            for (c, v) in var.iter_mut().enumerate() {
                let d = s.features[(r, c)] - mean[c];
                *v += d * d;
            }
        }
    }
    let std = var
        .iter()
        .map(|v| (v / rows as f64).sqrt().max(STD_FLOOR))
        .collect();
    Ok(StandardizationStats { mean, std })
}

/// Maps every row to `(x - mean) / std`.
pub fn apply_standardizer(stats: &StandardizationStats, fs: &FeatureSet) -> Result<FeatureSet> {
    if stats.mean.len() != fs.dim() {
        return Err(Error::Shape(format!(
            "standardizer has {} dims, features have {}",
            stats.mean.len(),
            fs.dim()
        )));
    }
    let features = Matrix::from_fn(fs.len(), fs.dim(), |r, c| {
        (fs.features[(r, c)] - stats.mean[c]) / stats.std[c]
    });
    FeatureSet::new(
        fs.descriptor_name.clone(),
        fs.view,
        fs.person_ids.clone(),
        features,
    )
}

/// Splits each person's vector into `part_width`-wide parts, zero-padding the
/// last part, and stacks persons on mode 3.
pub fn tensorize(fs: &FeatureSet, part_width: usize) -> Result<Tensor3> {
    if part_width == 0 {
        return Err(Error::Config("part width must be at least 1".into()));
    }
    let dim = fs.dim();
    let parts = dim.div_ceil(part_width);
    Tensor3::from_fn(Dims::new(parts, part_width, fs.len()), |i, j, k| {
        let col = j + i * part_width;
        if col < dim {
            fs.features[(k, col)]
        } else {
            0.0
        }
    })
}

/// Concatenates two tensors along the parts mode. Both must share the part
/// width and the person count (same persons in the same order).
pub fn fuse(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (da, db) = (a.dims(), b.dims());
    if da.features != db.features {
        return Err(Error::Shape(format!(
            "cannot fuse part widths {} and {}",
            da.features, db.features
        )));
    }
    if da.persons != db.persons {
        return Err(Error::Shape(format!(
            "cannot fuse person counts {} and {}",
            da.persons, db.persons
        )));
    }
    Tensor3::from_fn(
        Dims::new(da.parts + db.parts, da.features, da.persons),
        |i, j, k| {
            if i < da.parts {
                a.at(i, j, k)
            } else {
                b.at(i - da.parts, j, k)
            }
        },
    )
}

/// Left-to-right [`fuse`] over a non-empty list.
pub fn fuse_all(tensors: &[Tensor3]) -> Result<Tensor3> {
    let (first, rest) = tensors
        .split_first()
        .ok_or_else(|| Error::Shape("nothing to fuse".into()))?;
    rest.iter().try_fold(first.clone(), |acc, t| fuse(&acc, t))
}

/// Fits one standardizer per descriptor on the rows of `fit_ids`, pooling
/// both views.
pub fn fit_fold_standardizers(
    descriptors: &[PairedViews],
    fit_ids: &[u64],
) -> Result<Vec<StandardizationStats>> {
    descriptors
        .iter()
        .map(|pv| {
            let a = pv.view_a.subset(fit_ids)?;
            let b = pv.view_b.subset(fit_ids)?;
            fit_standardizer(&[&a, &b])
        })
        .collect()
}

/// Builds the per-view tensors for `use_ids`: per descriptor, optionally
/// standardize, restrict to the ids, tensorize at `part_width`, then fuse
/// descriptors in list order.
pub fn assemble_tensors(
    descriptors: &[PairedViews],
    part_width: usize,
    stats: Option<&[StandardizationStats]>,
    use_ids: &[u64],
) -> Result<(Tensor3, Tensor3)> {
    if descriptors.is_empty() {
        return Err(Error::Config("at least one descriptor is required".into()));
    }
    if let Some(stats) = stats {
        if stats.len() != descriptors.len() {
            return Err(Error::Shape(format!(
                "{} standardizers for {} descriptors",
                stats.len(),
                descriptors.len()
            )));
        }
    }
    let mut parts_a = Vec::with_capacity(descriptors.len());
    let mut parts_b = Vec::with_capacity(descriptors.len());
    for (d, pv) in descriptors.iter().enumerate() {
        let mut a = pv.view_a.subset(use_ids)?;
        let mut b = pv.view_b.subset(use_ids)?;
        if let Some(stats) = stats {
            a = apply_standardizer(&stats[d], &a)?;
            b = apply_standardizer(&stats[d], &b)?;
        }
        parts_a.push(tensorize(&a, part_width)?);
        parts_b.push(tensorize(&b, part_width)?);
    }
    Ok((fuse_all(&parts_a)?, fuse_all(&parts_b)?))
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Loads a feature set. For CSV the view is read from the file (and checked
/// against `view` when given); for TFV1 the view must be supplied because the
/// container stores only ids and values.
pub fn load_feature_set(
    path: &Path,
    format: FileFormat,
    descriptor_name: &str,
    view: Option<View>,
) -> Result<FeatureSet> {
    match format {
        FileFormat::Csv => {
            let fs = read_csv_feature_set(path, descriptor_name)?;
            if let Some(v) = view {
                if v != fs.view {
                    return Err(Error::Config(format!(
                        "{} holds view {} but view {} was requested",
                        path.display(),
                        fs.view,
                        v
                    )));
                }
            }
            Ok(fs)
        }
        FileFormat::Bin => {
            let view = view.ok_or_else(|| {
                Error::Config("binary feature files need an explicit view".into())
            })?;
            read_tfv1_feature_set(path, descriptor_name, view)
        }
    }
}

/// Writes a feature set in the requested format (atomically).
pub fn save_feature_set(path: &Path, format: FileFormat, fs: &FeatureSet) -> Result<()> {
    let bytes = match format {
        FileFormat::Csv => csv_bytes(fs),
        FileFormat::Bin => tfv1_bytes(fs),
    };
    write_atomic(path, &bytes)
}

fn open_err(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("cannot read {}: {e}", path.display()))
}

/// Reads the CSV layout `person_id,view,f0,...,f{D-1}` (LF or CRLF).
pub fn read_csv_feature_set(path: &Path, descriptor_name: &str) -> Result<FeatureSet> {
    let file = fs::File::open(path).map_err(|e| open_err(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let header = header?;
    let header = header.trim_end_matches('\r');
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "person_id" || cols[1] != "view" {
        return Err(parse_err(
            1,
            "header must start with person_id,view,f0".into(),
        ));
    }
    let dim = cols.len() - 2;
    for (i, c) in cols[2..].iter().enumerate() {
        if *c != format!("f{i}") {
            return Err(parse_err(1, format!("expected column f{i}, got {c:?}")));
        }
    }

    let mut ids = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    let mut view: Option<View> = None;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, got {}", dim + 2, fields.len()),
            ));
        }
        let id: u64 = fields[0]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad person_id {:?}: {e}", fields[0])))?;
        let row_view: View = fields[1]
            .parse()
            .map_err(|e: String| parse_err(line_no, e))?;
        match view {
            None => view = Some(row_view),
            Some(v) if v != row_view => {
                return Err(parse_err(
                    line_no,
                    format!("mixed views in one file: {v} then {row_view}"),
                ))
            }
            _ => {}
        }
        if ids.contains(&id) {
            return Err(Error::DuplicateId {
                id,
                context: format!("{}:{line_no}", path.display()),
            });
        }
        for (i, f) in fields[2..].iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|e| parse_err(line_no, format!("bad value for f{i}: {e}")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value for f{i}")));
            }
            rows.push(v);
        }
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }
    let features = Matrix::from_row_slice(ids.len(), dim, &rows);
    FeatureSet::new(
        descriptor_name,
        view.expect("at least one row"),
        ids,
        features,
    )
}

fn csv_bytes(fs: &FeatureSet) -> Vec<u8> {
    let mut out = String::from("person_id,view");
    for i in 0..fs.dim() {
        out.push_str(&format!(",f{i}"));
    }
    out.push('\n');
    for r in 0..fs.len() {
        out.push_str(&format!("{},{}", fs.person_ids[r], fs.view));
        for c in 0..fs.dim() {
            // `{}` prints the shortest representation that reparses bitwise.
            out.push_str(&format!(",{}", fs.features[(r, c)]));
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Reads the TFV1 container: magic `TFV1`, u32-le N, u32-le D, N·D f64-le
/// values row-major, then N u64-le person ids.
pub fn read_tfv1_feature_set(path: &Path, descriptor_name: &str, view: View) -> Result<FeatureSet> {
    let bytes = fs::read(path).map_err(|e| open_err(path, e))?;
    let bin_err = |offset: usize, msg: String| Error::Binary {
        path: path.to_path_buf(),
        offset: offset as u64,
        msg,
    };
    if bytes.len() < 12 {
        return Err(bin_err(0, "file shorter than the TFV1 header".into()));
    }
    if bytes[..4] != TFV1_MAGIC {
        return Err(bin_err(0, "bad magic, expected TFV1".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if n == 0 || dim == 0 {
        return Err(bin_err(4, format!("degenerate dims {n}x{dim}")));
    }
    let need = 12 + n * dim * 8 + n * 8;
    if bytes.len() != need {
        return Err(bin_err(
            bytes.len().min(need),
            format!(
                "expected {need} bytes for {n}x{dim}, file has {}",
                bytes.len()
            ),
        ));
    }
    let mut values = Vec::with_capacity(n * dim);
    let mut off = 12;
    for _ in 0..n * dim {
        let v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        if !v.is_finite() {
            return Err(bin_err(off, "non-finite feature value".into()));
        }
        values.push(v);
        off += 8;
    }
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        ids.push(u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
        off += 8;
    }
    let features = Matrix::from_row_slice(n, dim, &values);
    FeatureSet::new(descriptor_name, view, ids, features)
}

fn tfv1_bytes(fs: &FeatureSet) -> Vec<u8> {
    let n = fs.len();
    let dim = fs.dim();
    let mut out = Vec::with_capacity(12 + n * dim * 8 + n * 8);
    out.extend_from_slice(&TFV1_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for r in 0..n {
        for c in 0..dim {
            out.extend_from_slice(&fs.features[(r, c)].to_le_bytes());
        }
    }
    for &id in &fs.person_ids {
        out.extend_from_slice(&id.to_le_bytes());
    }
    out
}

/// Sniffs a feature file's format from its opening bytes.
pub fn sniff_format(path: &Path) -> Result<FileFormat> {
    let mut magic = [0u8; 4];
    use std::io::Read;
    let n = fs::File::open(path)
        .map_err(|e| open_err(path, e))?
        .read(&mut magic)?;
    Ok(if n == 4 && magic == TFV1_MAGIC {
        FileFormat::Bin
    } else {
        FileFormat::Csv
    })
}
