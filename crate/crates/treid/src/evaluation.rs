//! Seeded k-fold evaluation protocol with CMC reporting.
//!
//! Each fold independently shuffles the person ids with a sub-seeded PRNG
//! and splits them into train and test identities. A model is trained per
//! fold on the training identities of both views; the test identities of one
//! view are then ranked against the other view's gallery, single shot, and
//! the cumulative matching characteristic curve is computed per fold and
//! averaged. Reports serialize without wall-clock timings so identical
//! inputs and seeds reproduce byte-identical files.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{assemble_tensors, fit_fold_standardizers, PairedViews};
use crate::error::{Error, Result};
use crate::matching::{rank_gallery, RankedList};
use crate::rng::SplitMix64;
use crate::tensor::Tensor3;
use crate::txqda::{txqda_train, TxqdaConfig, TxqdaModel};
use crate::{Matrix, Vector};

/// Ranks reported in experiment summaries.
pub const SUMMARY_RANKS: [usize; 5] = [1, 5, 10, 15, 20];

/// One train/test identity split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
}

/// All folds of one protocol run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub folds: Vec<Fold>,
}

/// Splits `person_ids` into `n_folds` independent train/test partitions.
/// Fold `f` shuffles with sub-seed `seed + f` and takes the first
/// `floor(N·train_fraction)` ids as training identities.
pub fn make_folds(
    person_ids: &[u64],
    n_folds: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<FoldPlan> {
    let n = person_ids.len();
    if n < 4 {
        return Err(Error::TooFewPersons(format!(
            "need at least 4 persons, got {n}"
        )));
    }
    if n_folds == 0 {
        return Err(Error::Config("n_folds must be at least 1".into()));
    }
    if train_fraction.is_nan() || train_fraction <= 0.0 || train_fraction >= 1.0 {
        return Err(Error::Config(format!(
            "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::TooFewPersons(format!(
            "train_fraction {train_fraction} leaves an empty split for {n} persons"
        )));
    }
    let mut folds = Vec::with_capacity(n_folds);
    for f in 0..n_folds {
        let mut rng = SplitMix64::new(seed.wrapping_add(f as u64));
        let mut ids = person_ids.to_vec();
        rng.shuffle(&mut ids);
        let mut train_ids: Vec<u64> = ids[..n_train].to_vec();
        let mut test_ids: Vec<u64> = ids[n_train..].to_vec();
        train_ids.sort_unstable();
        test_ids.sort_unstable();
        folds.push(Fold {
            train_ids,
            test_ids,
        });
    }
    Ok(FoldPlan { seed, folds })
}

/// Identification rates at ranks `1..=G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CmcCurve {
    pub values: Vec<f64>,
}

impl CmcCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at a 1-based rank.
    pub fn at_rank(&self, rank: usize) -> Option<f64> {
        if rank == 0 {
            return None;
        }
        self.values.get(rank - 1).copied()
    }

    /// Non-decreasing with every value in `[0, 1]`.
    pub fn is_valid(&self) -> bool {
        self.values.iter().all(|v| (0.0..=1.0).contains(v))
            && self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

/// CMC over single-shot probes: a probe's rank is one plus the number of
/// gallery entries ordered strictly before its true match.
pub fn compute_cmc(ranked: &[RankedList], true_indices: &[usize]) -> Result<CmcCurve> {
    if ranked.is_empty() {
        return Err(Error::Shape("no probes to score".into()));
    }
    if ranked.len() != true_indices.len() {
        return Err(Error::Shape(format!(
            "{} ranked lists but {} true indices",
            ranked.len(),
            true_indices.len()
        )));
    }
    let gallery_size = ranked[0].len();
    if ranked.iter().any(|r| r.len() != gallery_size) {
        return Err(Error::Shape("ranked lists disagree on gallery size".into()));
    }
    let mut hits_at = vec![0usize; gallery_size];
    for (list, &truth) in ranked.iter().zip(true_indices) {
        let position = list.order.iter().position(|&g| g == truth).ok_or_else(|| {
            Error::Shape(format!(
                "true index {truth} out of range for gallery of {gallery_size}"
            ))
        })?;
        hits_at[position] += 1;
    }
    let n = ranked.len() as f64;
    let mut cumulative = 0usize;
    let values = hits_at
        .iter()
        .map(|h| {
            cumulative += h;
            cumulative as f64 / n
        })
        .collect();
    Ok(CmcCurve { values })
}

/// Elementwise mean of equally long curves.
pub fn aggregate_cmc(curves: &[CmcCurve]) -> Result<CmcCurve> {
    let first = curves
        .first()
        .ok_or_else(|| Error::Shape("no curves to aggregate".into()))?;
    if curves.iter().any(|c| c.len() != first.len()) {
        return Err(Error::Shape("curves disagree on length".into()));
    }
    let n = curves.len() as f64;
    let values = (0..first.len())
        .map(|i| curves.iter().map(|c| c.values[i]).sum::<f64>() / n)
        .collect();
    Ok(CmcCurve { values })
}

/// Which view supplies probes and which the gallery.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// View A probes ranked against the view B gallery.
    #[default]
    AToB,
    BToA,
    /// Both directions, fold curves averaged.
    Mean,
}

/// Everything a protocol run needs beyond the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOptions {
    pub part_width: usize,
    pub standardize: bool,
    pub txqda: TxqdaConfig,
    pub n_folds: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub direction: Direction,
}

/// One value of the mean curve at a summary rank.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankPoint {
    pub rank: usize,
    pub value: f64,
}

/// Per-fold result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub cmc: CmcCurve,
}

/// Wall-clock timings. Kept out of the serialized report so that report
/// files depend only on inputs, configuration, and seed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Runtimes {
    pub per_fold_secs: Vec<f64>,
    pub total_secs: f64,
}

/// Configuration echo stored inside a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSnapshot {
    pub descriptors: Vec<String>,
    pub n_persons: usize,
    pub fused_parts: usize,
    pub options: ProtocolOptions,
}

/// Full outcome of one protocol run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ProtocolSnapshot,
    pub folds: Vec<FoldOutcome>,
    pub mean_cmc: CmcCurve,
    pub summary: Vec<RankPoint>,
    #[serde(skip)]
    pub runtimes: Runtimes,
}

fn row_vector(m: &Matrix, r: usize) -> Vector {
    Vector::from_fn(m.ncols(), |c, _| m[(r, c)])
}

/// Ranks every probe row against the gallery rows (true match = same row
/// index) and computes the fold CMC.
fn cmc_one_direction(probes: &Matrix, gallery: &Matrix, model: &TxqdaModel) -> Result<CmcCurve> {
    let mut ranked = Vec::with_capacity(probes.nrows());
    for i in 0..probes.nrows() {
        ranked.push(rank_gallery(
            &row_vector(probes, i),
            gallery,
            &model.metric,
        )?);
    }
    let truth: Vec<usize> = (0..probes.nrows()).collect();
    compute_cmc(&ranked, &truth)
}

fn run_fold(
    descriptors: &[PairedViews],
    opts: &ProtocolOptions,
    fold: &Fold,
) -> Result<(CmcCurve, TxqdaModel)> {
    let stats = if opts.standardize {
        Some(fit_fold_standardizers(descriptors, &fold.train_ids)?)
    } else {
        None
    };
    let stats = stats.as_deref();
    let (train_a, train_b) =
        assemble_tensors(descriptors, opts.part_width, stats, &fold.train_ids)?;
    let (test_a, test_b) = assemble_tensors(descriptors, opts.part_width, stats, &fold.test_ids)?;
    let model = txqda_train(&train_a, &train_b, &fold.train_ids, &opts.txqda)?;
    let projected_a = model.project(&test_a)?;
    let projected_b = model.project(&test_b)?;
    let cmc = match opts.direction {
        Direction::AToB => cmc_one_direction(&projected_a, &projected_b, &model)?,
        Direction::BToA => cmc_one_direction(&projected_b, &projected_a, &model)?,
        Direction::Mean => aggregate_cmc(&[
            cmc_one_direction(&projected_a, &projected_b, &model)?,
            cmc_one_direction(&projected_b, &projected_a, &model)?,
        ])?,
    };
    Ok((cmc, model))
}

/// Runs the whole protocol: fold plan, per-fold training and ranking, CMC
/// aggregation, and the summary ranks. A failing fold aborts the run with
/// its index attached.
pub fn run_protocol(
    descriptors: &[PairedViews],
    opts: &ProtocolOptions,
) -> Result<ExperimentReport> {
    let first = descriptors
        .first()
        .ok_or_else(|| Error::Config("at least one descriptor is required".into()))?;
    for d in descriptors {
        if d.person_ids() != first.person_ids() {
            return Err(Error::Shape(
                "descriptors disagree on the aligned person id sequence".into(),
            ));
        }
    }
    let ids = first.person_ids().to_vec();
    let plan = make_folds(&ids, opts.n_folds, opts.train_fraction, opts.seed)?;

    let total_start = Instant::now();
    let mut outcomes = Vec::with_capacity(plan.folds.len());
    let mut per_fold_secs = Vec::with_capacity(plan.folds.len());
    let mut fused_parts = 0;
    for (f, fold) in plan.folds.iter().enumerate() {
        let fold_start = Instant::now();
        let (cmc, model) = run_fold(descriptors, opts, fold).map_err(|e| Error::Fold {
            fold: f,
            source: Box::new(e),
        })?;
        fused_parts = model.input_dims().0;
        per_fold_secs.push(fold_start.elapsed().as_secs_f64());
        outcomes.push(FoldOutcome {
            fold: f,
            n_train: fold.train_ids.len(),
            n_test: fold.test_ids.len(),
            cmc,
        });
    }

    let mean_cmc = aggregate_cmc(&outcomes.iter().map(|o| o.cmc.clone()).collect::<Vec<_>>())?;
    let summary = SUMMARY_RANKS
        .iter()
        .filter(|&&r| r <= mean_cmc.len())
        .map(|&rank| RankPoint {
            rank,
            value: mean_cmc.at_rank(rank).expect("rank within curve"),
        })
        .collect();

    Ok(ExperimentReport {
        config: ProtocolSnapshot {
            descriptors: descriptors
                .iter()
                .map(|d| d.view_a.descriptor_name.clone())
                .collect(),
            n_persons: ids.len(),
            fused_parts,
            options: opts.clone(),
        },
        folds: outcomes,
        mean_cmc,
        summary,
        runtimes: Runtimes {
            per_fold_secs,
            total_secs: total_start.elapsed().as_secs_f64(),
        },
    })
}

/// Convenience entry for callers that already hold aligned tensors: no
/// standardization, no file handling, otherwise the same per-fold loop.
pub fn run_protocol_on_tensors(
    tensor_a: &Tensor3,
    tensor_b: &Tensor3,
    person_ids: &[u64],
    opts: &ProtocolOptions,
) -> Result<ExperimentReport> {
    let dims = tensor_a.dims();
    if tensor_b.dims() != dims {
        return Err(Error::Shape("view tensors disagree on dims".into()));
    }
    if person_ids.len() != dims.persons {
        return Err(Error::Shape(
            "person id count does not match tensors".into(),
        ));
    }
    // Tensors already carry their part structure; flattening each slice
    // row-major and re-splitting at the part width reproduces it exactly,
    // so the fold loop can be shared with the feature pipeline.
    let flatten = |t: &Tensor3, view| {
        let width = dims.parts * dims.features;
        let features = Matrix::from_fn(dims.persons, width, |k, col| {
            t.at(col / dims.features, col % dims.features, k)
        });
        crate::dataset::FeatureSet::new("tensor", view, person_ids.to_vec(), features)
    };
    let paired = PairedViews {
        view_a: flatten(tensor_a, crate::dataset::View::A)?,
        view_b: flatten(tensor_b, crate::dataset::View::B)?,
    };
    let mut opts = opts.clone();
    opts.part_width = dims.features;
    opts.standardize = false;
    run_protocol(&[paired], &opts)
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// Rendered summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub text: String,
    pub csv: String,
}

/// Formats one table row: the dimension label followed by percentages with
/// two decimals, pipe-separated.
pub fn format_row(dim: usize, values: &[f64]) -> String {
    let mut cells = vec![dim.to_string()];
    cells.extend(values.iter().map(|v| format!("{:.2}", v * 100.0)));
    cells.join(" | ")
}

/// Formats per-dimension mean curves into the text and CSV summary tables.
pub fn format_table(rows: &[(usize, &CmcCurve)], ranks: &[usize]) -> Result<Table> {
    if ranks.is_empty() {
        return Err(Error::Config("no ranks requested".into()));
    }
    for &(dim, curve) in rows {
        for &r in ranks {
            if r == 0 || r > curve.len() {
                return Err(Error::Config(format!(
                    "rank {r} out of range for gallery of {} (dim {dim})",
                    curve.len()
                )));
            }
        }
    }
    let header: Vec<String> = std::iter::once("Dim".to_string())
        .chain(ranks.iter().map(|r| format!("Rank-{r}")))
        .collect();
    let mut text = header.join(" | ");
    text.push('\n');
    let mut csv = std::iter::once("dim".to_string())
        .chain(ranks.iter().map(|r| format!("rank-{r}")))
        .collect::<Vec<_>>()
        .join(",");
    csv.push('\n');
    for &(dim, curve) in rows {
        let values: Vec<f64> = ranks
            .iter()
            .map(|&r| curve.at_rank(r).expect("validated above"))
            .collect();
        text.push_str(&format_row(dim, &values));
        text.push('\n');
        let mut cells = vec![dim.to_string()];
        cells.extend(values.iter().map(|v| format!("{:.2}", v * 100.0)));
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    Ok(Table { text, csv })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranked_with_truth_at(position: usize, gallery: usize) -> RankedList {
        // Truth index 0 placed at `position` in the order.
        let mut order: Vec<usize> = (1..gallery).collect();
        order.insert(position, 0);
        let distances: Vec<f64> = (0..gallery).map(|i| i as f64).collect();
        RankedList {
            similarities: crate::matching::normalize_scores(&distances),
            distances,
            order,
        }
    }

    #[test]
    fn folds_are_disjoint_and_sized() {
        let ids: Vec<u64> = (0..10).collect();
        let plan = make_folds(&ids, 10, 0.5, 7).unwrap();
        assert_eq!(plan.folds.len(), 10);
        for fold in &plan.folds {
            assert_eq!(fold.train_ids.len(), 5);
            assert_eq!(fold.test_ids.len(), 5);
            let mut all: Vec<u64> = fold
                .train_ids
                .iter()
                .chain(&fold.test_ids)
                .copied()
                .collect();
            all.sort_unstable();
            assert_eq!(all, ids);
        }
    }

    #[test]
    fn folds_are_deterministic() {
        let ids: Vec<u64> = (0..20).collect();
        let a = make_folds(&ids, 10, 0.5, 42).unwrap();
        let b = make_folds(&ids, 10, 0.5, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adjacent_seeds_usually_differ() {
        let ids: Vec<u64> = (0..20).collect();
        let mut differing = 0;
        for s in 0..100u64 {
            let a = make_folds(&ids, 1, 0.5, s).unwrap();
            let b = make_folds(&ids, 1, 0.5, s + 1).unwrap();
            if a.folds[0] != b.folds[0] {
                differing += 1;
            }
        }
        assert!(
            differing >= 95,
            "only {differing} of 100 seed pairs differed"
        );
    }

    #[test]
    fn fold_errors() {
        let ids: Vec<u64> = (0..3).collect();
        assert!(matches!(
            make_folds(&ids, 2, 0.5, 0).unwrap_err(),
            Error::TooFewPersons(_)
        ));
        let ids: Vec<u64> = (0..10).collect();
        assert!(make_folds(&ids, 2, 0.0, 0).is_err());
        assert!(make_folds(&ids, 2, 1.0, 0).is_err());
        assert!(matches!(
            make_folds(&ids, 2, 0.05, 0).unwrap_err(),
            Error::TooFewPersons(_)
        ));
    }

    #[test]
    fn cmc_direct_count() {
        // Probe ranks 1, 2, 3 over a gallery of 3.
        let ranked = vec![
            ranked_with_truth_at(0, 3),
            ranked_with_truth_at(1, 3),
            ranked_with_truth_at(2, 3),
        ];
        let cmc = compute_cmc(&ranked, &[0, 0, 0]).unwrap();
        assert_eq!(cmc.values, vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert!(cmc.is_valid());
    }

    #[test]
    fn cmc_perfect_and_worst() {
        let ranked = vec![ranked_with_truth_at(0, 4); 3];
        let cmc = compute_cmc(&ranked, &[0, 0, 0]).unwrap();
        assert_eq!(cmc.values, vec![1.0; 4]);

        let ranked = vec![ranked_with_truth_at(3, 4)];
        let cmc = compute_cmc(&ranked, &[0]).unwrap();
        assert_eq!(cmc.values, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn cmc_rejects_out_of_range_truth() {
        let ranked = vec![ranked_with_truth_at(0, 3)];
        assert!(compute_cmc(&ranked, &[9]).is_err());
    }

    #[test]
    fn aggregate_fixtures() {
        let a = CmcCurve {
            values: vec![0.0, 1.0],
        };
        let b = CmcCurve {
            values: vec![1.0, 1.0],
        };
        assert_eq!(aggregate_cmc(&[a.clone(), a.clone()]).unwrap(), a);
        assert_eq!(
            aggregate_cmc(&[a.clone(), b]).unwrap().values,
            vec![0.5, 1.0]
        );
        let short = CmcCurve { values: vec![1.0] };
        assert!(aggregate_cmc(&[a, short]).is_err());
    }

    #[test]
    fn mean_of_valid_curves_is_valid() {
        let mut rng = crate::rng::SplitMix64::new(3);
        let curves: Vec<CmcCurve> = (0..10)
            .map(|_| {
                let mut values: Vec<f64> = (0..8).map(|_| rng.next_f64()).collect();
                values.sort_by(f64::total_cmp);
                CmcCurve { values }
            })
            .collect();
        assert!(aggregate_cmc(&curves).unwrap().is_valid());
    }

    #[test]
    fn table_fixture_rows() {
        assert_eq!(
            format_row(200, &[0.7040, 0.9364, 0.9644, 0.9876]),
            "200 | 70.40 | 93.64 | 96.44 | 98.76"
        );
        assert_eq!(format_row(250, &[0.5316, 0.9582]), "250 | 53.16 | 95.82");
        assert_eq!(
            format_row(50, &[1.0, 1.0, 1.0, 1.0]),
            "50 | 100.00 | 100.00 | 100.00 | 100.00"
        );
    }

    #[test]
    fn table_samples_curves_at_ranks() {
        // Step curve hitting the fixture row values at ranks 1, 5, 10, 20.
        let mut values = vec![0.7040];
        values.extend(vec![0.9364; 4]);
        values.extend(vec![0.9644; 5]);
        values.extend(vec![0.9876; 10]);
        let curve = CmcCurve { values };
        assert!(curve.is_valid());
        let table = format_table(&[(200, &curve)], &[1, 5, 10, 20]).unwrap();
        assert_eq!(
            table.text,
            "Dim | Rank-1 | Rank-5 | Rank-10 | Rank-20\n200 | 70.40 | 93.64 | 96.44 | 98.76\n"
        );
        assert_eq!(
            table.csv,
            "dim,rank-1,rank-5,rank-10,rank-20\n200,70.40,93.64,96.44,98.76\n"
        );
    }

    #[test]
    fn table_rejects_out_of_range_rank() {
        let curve = CmcCurve {
            values: vec![0.5, 1.0],
        };
        assert!(format_table(&[(10, &curve)], &[1, 5]).is_err());
        assert!(format_table(&[(10, &curve)], &[0]).is_err());
    }

    fn tiny_descriptors(n: usize, seed: u64) -> Vec<PairedViews> {
        let cfg = crate::synth::SynthConfig {
            n_persons: n,
            latent_dim: 3,
            feature_dim: 8,
            noise_sigma: 0.2,
            view_transform_seed: seed,
            sample_seed: seed + 1,
        };
        let (a, b) = crate::synth::generate_crossview(&cfg);
        vec![crate::dataset::align_views(&a, &b).unwrap()]
    }

    fn tiny_options() -> ProtocolOptions {
        ProtocolOptions {
            part_width: 4,
            standardize: true,
            txqda: TxqdaConfig::new(2, 2),
            n_folds: 2,
            train_fraction: 0.5,
            seed: 9,
            direction: Direction::AToB,
        }
    }

    #[test]
    fn smallest_legal_protocol_run() {
        let descriptors = tiny_descriptors(4, 30);
        let report = run_protocol(&descriptors, &tiny_options()).unwrap();
        assert_eq!(report.folds.len(), 2);
        for fold in &report.folds {
            assert_eq!(fold.cmc.len(), 2);
            assert!(fold.cmc.is_valid());
            assert_eq!(*fold.cmc.values.last().unwrap(), 1.0);
        }
        assert_eq!(report.summary.len(), 1);
        assert_eq!(report.summary[0].rank, 1);
        assert_eq!(report.summary[0].value, report.mean_cmc.values[0]);
        assert_eq!(report.runtimes.per_fold_secs.len(), 2);
    }

    #[test]
    fn protocol_is_deterministic_in_memory() {
        let descriptors = tiny_descriptors(8, 31);
        let opts = tiny_options();
        let a = run_protocol(&descriptors, &opts).unwrap();
        let b = run_protocol(&descriptors, &opts).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn protocol_direction_mean_aggregates_both() {
        let descriptors = tiny_descriptors(8, 32);
        let mut opts = tiny_options();
        opts.direction = Direction::Mean;
        let mean = run_protocol(&descriptors, &opts).unwrap();
        opts.direction = Direction::AToB;
        let ab = run_protocol(&descriptors, &opts).unwrap();
        opts.direction = Direction::BToA;
        let ba = run_protocol(&descriptors, &opts).unwrap();
        for f in 0..2 {
            let expect =
                aggregate_cmc(&[ab.folds[f].cmc.clone(), ba.folds[f].cmc.clone()]).unwrap();
            assert_eq!(mean.folds[f].cmc, expect);
        }
    }

    #[test]
    fn tensor_entry_matches_feature_pipeline() {
        let descriptors = tiny_descriptors(8, 33);
        let mut opts = tiny_options();
        opts.standardize = false;
        let via_features = run_protocol(&descriptors, &opts).unwrap();

        let pv = &descriptors[0];
        let ta = crate::dataset::tensorize(&pv.view_a, opts.part_width).unwrap();
        let tb = crate::dataset::tensorize(&pv.view_b, opts.part_width).unwrap();
        let via_tensors = run_protocol_on_tensors(&ta, &tb, pv.person_ids(), &opts).unwrap();
        for f in 0..2 {
            for (x, y) in via_features.folds[f]
                .cmc
                .values
                .iter()
                .zip(&via_tensors.folds[f].cmc.values)
            {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
