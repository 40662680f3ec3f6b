use proptest::prelude::*;

use scorecard_core::calibration::{apply_cutoff, distance_d, fit_ols, shift_scores};
use scorecard_core::dataset::{cleanse, normalize_text, CleansingPolicy};
use scorecard_core::evaluation::{auc, degradation, psi, stratified_folds};
use scorecard_core::synthgen::{generate_population, PopulationSpec};

fn labelled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    prop::collection::vec((0.001f64..0.999, any::<bool>()), 4..200)
        .prop_filter("both classes", |v| v.iter().any(|x| x.1) && v.iter().any(|x| !x.1))
        .prop_map(|v| v.into_iter().unzip())
}

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("positive mass", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
    })
}

fn twelve_rates() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.9, 12)
}

proptest! {
    #[test]
    fn auc_invariant_under_increasing_maps((scores, labels) in labelled_scores()) {
        let base = auc(&scores, &labels).unwrap().auc;
        let cubed: Vec<f64> = scores.iter().map(|s| s * s * s).collect();
        let logits: Vec<f64> = scores.iter().map(|s| (s / (1.0 - s)).ln()).collect();
        prop_assert_eq!(auc(&cubed, &labels).unwrap().auc, base);
        prop_assert_eq!(auc(&logits, &labels).unwrap().auc, base);
        let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auc(&flipped, &labels).unwrap().auc - (1.0 - base)).abs() < 1e-12);
    }

    #[test]
    fn shift_preserves_order_and_hits_target((scores, labels) in labelled_scores(), target in 0.01f64..0.99) {
        let (shift, adjusted) = shift_scores(&scores, target).unwrap();
        let mean = adjusted.iter().sum::<f64>() / adjusted.len() as f64;
        prop_assert!((mean - target).abs() <= 1e-9);
        prop_assert!(shift.max_error() <= 1e-9);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if scores[i] < scores[j] {
                    prop_assert!(adjusted[i] <= adjusted[j]);
                }
            }
        }
        prop_assert_eq!(auc(&adjusted, &labels).unwrap().auc, auc(&scores, &labels).unwrap().auc);
    }

    #[test]
    fn psi_symmetric_and_nonnegative(p in distribution(7), q in distribution(7)) {
        let a = psi(&p, &q, 1e-4).unwrap();
        let b = psi(&q, &p, 1e-4).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a, b);
        prop_assert_eq!(psi(&p, &p, 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn distance_d_permutation_invariant(est in twelve_rates(), obs in twelve_rates(), rot in 0usize..12) {
        let d = distance_d(&est, &obs).unwrap();
        let mut e2 = est.clone();
        let mut o2 = obs.clone();
        e2.rotate_left(rot);
        o2.rotate_left(rot);
        e2.reverse();
        o2.reverse();
        let d2 = distance_d(&e2, &o2).unwrap();
        prop_assert!((d.d - d2.d).abs() <= 1e-12 * (1.0 + d.d));
        prop_assert!(d.d >= 0.0);
        prop_assert_eq!(distance_d(&obs, &obs).unwrap().d, 0.0);
    }

    #[test]
    fn ols_residuals_orthogonal(pts in prop::collection::vec((-10.0f64..10.0, -1.0f64..1.0), 3..60)) {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Some(fit) = fit_ols("x", &xs, &ys) {
            let res: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - fit.predict(*x)).collect();
            let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>() + 1.0;
            prop_assert!(res.iter().sum::<f64>().abs() <= 1e-9 * scale);
            prop_assert!(res.iter().zip(&xs).map(|(r, x)| r * x).sum::<f64>().abs() <= 1e-9 * scale * 10.0);
            prop_assert!(fit.r.abs() <= 1.0);
        }
    }

    #[test]
    fn cutoff_monotone(scores in prop::collection::vec(0.001f64..0.999, 1..100), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if let (Ok(r_lo), Ok(r_hi)) = (apply_cutoff(&scores, lo), apply_cutoff(&scores, hi)) {
            prop_assert!(r_lo.approved.iter().all(|i| r_hi.approved.contains(i)));
            prop_assert!(r_lo.expected_rate <= r_hi.expected_rate + 1e-12);
            prop_assert!(r_hi.expected_rate < hi);
        }
    }

    #[test]
    fn folds_are_stratified(labels in prop::collection::vec(any::<bool>(), 10..300), k in 2usize..10, seed in any::<u64>()) {
        let folds = stratified_folds(&labels, k, seed).unwrap();
        for class in [true, false] {
            let counts: Vec<usize> = (0..k)
                .map(|f| (0..labels.len()).filter(|&i| folds[i] == f && labels[i] == class).count())
                .collect();
            let (mn, mx) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(mx - mn <= 1);
        }
    }

    #[test]
    fn degradation_antisymmetric(a in 0.5f64..1.0, b in 0.5f64..1.0) {
        prop_assert_eq!(degradation(a, b), -degradation(b, a));
        prop_assert_eq!(degradation(a, a), 0.0);
    }

    #[test]
    fn normalization_idempotent(s in "[ a-zA-Z|]{0,20}") {
        let once = normalize_text(&s);
        prop_assert_eq!(normalize_text(&once), once.clone());
        prop_assert!(!once.contains('|'));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cleansing_idempotent(seed in 0u64..1000) {
        let spec = PopulationSpec { n_records: 1500, ..Default::default() };
        let pop = generate_population(&spec, seed).unwrap();
        let policy = CleansingPolicy { rare_class_threshold: 20, ..Default::default() };
        let (once, _) = cleanse(&pop.records, &policy);
        let (twice, report) = cleanse(&once, &policy);
        prop_assert_eq!(&twice, &once);
        // geography is rebuilt from its components on every pass, so only source variables are checked
        let busy: Vec<_> = report
            .variables
            .iter()
            .filter(|(v, c)| v.as_str() != "geography" && (c.merged_to_other != 0 || c.normalized != 0))
            .collect();
        prop_assert!(busy.is_empty(), "{busy:?}");
    }
}
