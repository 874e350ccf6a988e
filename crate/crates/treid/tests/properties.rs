//! Property tests for the algebraic invariants.

use proptest::prelude::*;

use treid::dataset::{
    apply_standardizer, fit_standardizer, fuse, tensorize, FeatureSet, View, STD_FLOOR,
};
use treid::evaluation::{aggregate_cmc, compute_cmc};
use treid::matching::{mahalanobis, normalize_scores, rank_gallery};
use treid::tensor::{Dims, Mode, Tensor3};
use treid::xqda::difference_moments;
use treid::{Matrix, Vector};

fn dims_strategy() -> impl Strategy<Value = Dims> {
    (1usize..=7, 1usize..=11, 1usize..=5).prop_map(|(p, f, n)| Dims::new(p, f, n))
}

fn tensor_strategy() -> impl Strategy<Value = Tensor3> {
    dims_strategy().prop_flat_map(|dims| {
        proptest::collection::vec(-100.0f64..100.0, dims.len())
            .prop_map(move |data| Tensor3::from_vec(dims, data).unwrap())
    })
}

proptest! {
    #[test]
    fn fold_unfold_roundtrips_bitwise(t in tensor_strategy()) {
        for mode in [Mode::Parts, Mode::Features, Mode::Persons] {
            let back = Tensor3::fold(&t.unfold(mode), mode, t.dims()).unwrap();
            prop_assert_eq!(back.data(), t.data());
        }
    }

    // Entries range over ±100 here, so the identities that involve two
    // products hold to 1e-12 relative to the result magnitude (at unit scale
    // the acceptance suite pins the same identities at 1e-12 absolute).
    #[test]
    fn mode_product_matches_unfolding(t in tensor_strategy(), r in 1usize..4) {
        let dims = t.dims();
        for mode in [Mode::Parts, Mode::Features] {
            let u = Matrix::from_fn(dims.dim(mode), r, |i, j| ((i * 3 + j * 7) % 5) as f64 - 2.0);
            let product = t.mode_product(&u, mode).unwrap();
            let expect = u.tr_mul(&t.unfold(mode));
            let residual = (product.unfold(mode) - &expect).amax();
            prop_assert!(residual <= 1e-12 * (1.0 + expect.amax()));
        }
    }

    #[test]
    fn mode_products_commute(t in tensor_strategy(), r1 in 1usize..3, r2 in 1usize..3) {
        let dims = t.dims();
        let u1 = Matrix::from_fn(dims.parts, r1, |i, j| ((i + 2 * j) % 7) as f64 - 3.0);
        let u2 = Matrix::from_fn(dims.features, r2, |i, j| ((2 * i + j) % 5) as f64 - 2.0);
        let ab = t.mode_product(&u1, Mode::Parts).unwrap().mode_product(&u2, Mode::Features).unwrap();
        let ba = t.mode_product(&u2, Mode::Features).unwrap().mode_product(&u1, Mode::Parts).unwrap();
        let worst = ab.data().iter().zip(ba.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let scale = ab.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(worst <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn slicing_commutes_with_parts_projection(t in tensor_strategy(), r in 1usize..3) {
        let dims = t.dims();
        let u = Matrix::from_fn(dims.parts, r, |i, j| ((i * 5 + j) % 9) as f64 - 4.0);
        let projected = t.mode_product(&u, Mode::Parts).unwrap();
        for k in 0..dims.persons {
            let direct = u.tr_mul(&t.person_slice(k).unwrap());
            let via = projected.person_slice(k).unwrap();
            prop_assert!((&direct - via).amax() <= 1e-12 * (1.0 + direct.amax()));
        }
    }

    #[test]
    fn tensorize_slices_recover_padded_rows(
        n in 1usize..5,
        d in 1usize..24,
        w in 1usize..9,
        seed in 0u64..1000,
    ) {
        let mut rng = treid::rng::SplitMix64::new(seed);
        let features = Matrix::from_fn(n, d, |_, _| rng.next_normal());
        let ids: Vec<u64> = (0..n as u64).collect();
        let fs = FeatureSet::new("p", View::A, ids, features.clone()).unwrap();
        let t = tensorize(&fs, w).unwrap();
        let parts = d.div_ceil(w);
        prop_assert_eq!(t.dims(), Dims::new(parts, w, n));
        for k in 0..n {
            let slice = t.person_slice(k).unwrap();
            let mut recovered = Vec::with_capacity(parts * w);
            for i in 0..parts {
                for j in 0..w {
                    recovered.push(slice[(i, j)]);
                }
            }
            let mut padded: Vec<f64> = (0..d).map(|c| features[(k, c)]).collect();
            padded.resize(parts * w, 0.0);
            prop_assert_eq!(recovered, padded);
        }
    }

    #[test]
    fn fusion_preserves_person_order(n in 1usize..5, seed in 0u64..1000) {
        let mut rng = treid::rng::SplitMix64::new(seed);
        let ids: Vec<u64> = (0..n as u64).map(|i| i * 3 + 1).collect();
        let fa = FeatureSet::new("a", View::A, ids.clone(), Matrix::from_fn(n, 6, |_, _| rng.next_normal())).unwrap();
        let fb = FeatureSet::new("b", View::A, ids, Matrix::from_fn(n, 9, |_, _| rng.next_normal())).unwrap();
        let (ta, tb) = (tensorize(&fa, 3).unwrap(), tensorize(&fb, 3).unwrap());
        let fused = fuse(&ta, &tb).unwrap();
        prop_assert_eq!(fused.dims().parts, ta.dims().parts + tb.dims().parts);
        for k in 0..n {
            let top = ta.person_slice(k).unwrap();
            let bottom = tb.person_slice(k).unwrap();
            let stacked = fused.person_slice(k).unwrap();
            prop_assert_eq!(stacked.rows(0, top.nrows()).into_owned(), top);
            prop_assert_eq!(stacked.rows(ta.dims().parts, bottom.nrows()).into_owned(), bottom);
        }
    }

    #[test]
    fn standardizer_centers_and_scales(n in 2usize..12, d in 1usize..9, seed in 0u64..1000) {
        let mut rng = treid::rng::SplitMix64::new(seed);
        let features = Matrix::from_fn(n, d, |_, _| rng.next_normal() * 3.0 + 1.5);
        let ids: Vec<u64> = (0..n as u64).collect();
        let fs = FeatureSet::new("s", View::B, ids, features).unwrap();
        let stats = fit_standardizer(&[&fs]).unwrap();
        let z = apply_standardizer(&stats, &fs).unwrap();
        for c in 0..d {
            let mean: f64 = (0..n).map(|r| z.features[(r, c)]).sum::<f64>() / n as f64;
            prop_assert!(mean.abs() <= 1e-9, "column {} mean {}", c, mean);
            if stats.std[c] > STD_FLOOR {
                let var: f64 = (0..n).map(|r| {
                    let v = z.features[(r, c)] - mean;
                    v * v
                }).sum::<f64>() / n as f64;
                prop_assert!((var.sqrt() - 1.0).abs() <= 1e-9, "column {} std {}", c, var.sqrt());
            }
        }
    }

    #[test]
    fn moments_are_invariant_under_view_swap(
        n_a in 2usize..10,
        n_b in 2usize..10,
        d in 1usize..6,
        seed in 0u64..1000,
    ) {
        let mut rng = treid::rng::SplitMix64::new(seed);
        let xa = Matrix::from_fn(n_a, d, |_, _| rng.next_normal());
        let xb = Matrix::from_fn(n_b, d, |_, _| rng.next_normal());
        let la: Vec<u64> = (0..n_a as u64).map(|i| i % 3).collect();
        let lb: Vec<u64> = (0..n_b as u64).map(|i| i % 3).collect();
        let ab = difference_moments(&xa, &la, &xb, &lb).unwrap();
        let ba = difference_moments(&xb, &lb, &xa, &la).unwrap();
        prop_assert!((ab.sigma_i - ba.sigma_i).amax() <= 1e-12);
        prop_assert!((ab.sigma_e - ba.sigma_e).amax() <= 1e-12);
    }

    #[test]
    fn distances_are_symmetric_and_zero_on_self(
        d in 1usize..8,
        seed in 0u64..1000,
    ) {
        let mut rng = treid::rng::SplitMix64::new(seed);
        let a = Matrix::from_fn(d, d, |_, _| rng.next_normal());
        // Symmetric but possibly indefinite form.
        let form = (&a + a.transpose()) * 0.5;
        let x = Vector::from_fn(d, |_, _| rng.next_normal());
        let y = Vector::from_fn(d, |_, _| rng.next_normal());
        prop_assert_eq!(mahalanobis(&form, &x, &x).unwrap(), 0.0);
        let xy = mahalanobis(&form, &x, &y).unwrap();
        let yx = mahalanobis(&form, &y, &x).unwrap();
        prop_assert!((xy - yx).abs() <= 1e-12 * (1.0 + xy.abs()));
    }

    #[test]
    fn normalization_is_bounded_and_order_preserving(
        distances in proptest::collection::vec(-1e6f64..1e6, 1..64),
    ) {
        let s = normalize_scores(&distances);
        prop_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        let n = distances.len();
        let mut by_d: Vec<usize> = (0..n).collect();
        by_d.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
        let mut by_s: Vec<usize> = (0..n).collect();
        by_s.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
        prop_assert_eq!(by_d, by_s);
    }

    #[test]
    fn appending_gallery_rows_keeps_relative_order(
        n in 2usize..10,
        d in 1usize..5,
        seed in 0u64..1000,
    ) {
        let mut rng = treid::rng::SplitMix64::new(seed);
        let probe = Vector::from_fn(d, |_, _| rng.next_normal());
        let form = Matrix::identity(d, d);
        let gallery = Matrix::from_fn(n, d, |_, _| rng.next_normal());
        let base = rank_gallery(&probe, &gallery, &form).unwrap();
        let extended = Matrix::from_fn(n + 1, d, |r, c| {
            if r < n { gallery[(r, c)] } else { rng.next_f64() }
        });
        let more = rank_gallery(&probe, &extended, &form).unwrap();
        let kept: Vec<usize> = more.order.iter().copied().filter(|&i| i < n).collect();
        prop_assert_eq!(kept, base.order);
    }

    #[test]
    fn cmc_is_monotone_and_complete(
        gallery in 2usize..12,
        n_probes in 1usize..12,
        seed in 0u64..1000,
    ) {
        let mut rng = treid::rng::SplitMix64::new(seed);
        let ranked: Vec<_> = (0..n_probes)
            .map(|_| {
                let mut order: Vec<usize> = (0..gallery).collect();
                rng.shuffle(&mut order);
                let distances: Vec<f64> = (0..gallery).map(|i| i as f64).collect();
                treid::matching::RankedList {
                    similarities: normalize_scores(&distances),
                    distances,
                    order,
                }
            })
            .collect();
        let truth: Vec<usize> = (0..n_probes).map(|_| (rng.next_u64() % gallery as u64) as usize).collect();
        let cmc = compute_cmc(&ranked, &truth).unwrap();
        prop_assert!(cmc.is_valid());
        prop_assert_eq!(*cmc.values.last().unwrap(), 1.0);
    }

    #[test]
    fn mean_curve_stays_valid(
        n_curves in 1usize..8,
        len in 1usize..10,
        seed in 0u64..1000,
    ) {
        let mut rng = treid::rng::SplitMix64::new(seed);
        let curves: Vec<_> = (0..n_curves)
            .map(|_| {
                let mut values: Vec<f64> = (0..len).map(|_| rng.next_f64()).collect();
                values.sort_by(f64::total_cmp);
                treid::evaluation::CmcCurve { values }
            })
            .collect();
        prop_assert!(aggregate_cmc(&curves).unwrap().is_valid());
    }
}
