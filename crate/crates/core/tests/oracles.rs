//! Independent reimplementations checked against the library.

use proptest::prelude::*;

use scorecard_core::binning::{compute_iv, compute_woe, finalize_bins, Bin, BinKind};
use scorecard_core::calibration::{fit_ols, shift_scores};
use scorecard_core::evaluation::auc;
use scorecard_core::linalg::Matrix;
use scorecard_core::models::{train_adaboost, train_logistic, AdaBoostConfig, LogisticConfig};

fn brute_woe(g: u64, b: u64, gt: u64, bt: u64) -> f64 {
    (g as f64).ln() - (gt as f64).ln() - (b as f64).ln() + (bt as f64).ln()
}

/// Pair-by-pair count of (bad, good) pairs with the bad scored higher; ties count half.
fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut twice = 0u64;
    let mut pairs = 0u64;
    for i in 0..scores.len() {
        if !labels[i] {
            continue;
        }
        for j in 0..scores.len() {
            if labels[j] {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                twice += 2;
            } else if scores[i] == scores[j] {
                twice += 1;
            }
        }
    }
    twice as f64 / (2 * pairs) as f64
}

fn counts_strategy() -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((0u64..=50, 0u64..=50), 1..=6)
        .prop_filter("both classes", |c| c.iter().any(|x| x.0 > 0) && c.iter().any(|x| x.1 > 0))
}

proptest! {
    #[test]
    fn woe_and_iv_match_brute_force(counts in counts_strategy()) {
        let mut bins: Vec<Bin> = counts.iter().map(|&(g, b)| Bin::new(BinKind::Missing, g, b)).collect();
        let (average, iv) = finalize_bins(&mut bins).unwrap();
        let gt: u64 = counts.iter().map(|c| c.0).sum();
        let bt: u64 = counts.iter().map(|c| c.1).sum();

        let defined: Vec<(u64, u64)> = counts.iter().copied().filter(|&(g, b)| g > 0 && b > 0).collect();
        let n_def: u64 = defined.iter().map(|(g, b)| g + b).sum();
        let avg = if n_def == 0 {
            0.0
        } else {
            defined.iter().map(|&(g, b)| (g + b) as f64 * brute_woe(g, b, gt, bt)).sum::<f64>() / n_def as f64
        };
        let brute_iv: f64 = defined
            .iter()
            .map(|&(g, b)| (g as f64 / gt as f64 - b as f64 / bt as f64) * brute_woe(g, b, gt, bt))
            .sum();

        prop_assert!((average - avg).abs() <= 1e-12);
        prop_assert!((iv - brute_iv).abs() <= 1e-12);
        prop_assert!((compute_iv(&bins) - brute_iv).abs() <= 1e-12);
        for (bin, &(g, b)) in bins.iter().zip(&counts) {
            let expected = if g > 0 && b > 0 { brute_woe(g, b, gt, bt) } else { avg };
            prop_assert!((bin.woe - expected).abs() <= 1e-12);
            prop_assert!((compute_woe(g, b, gt, bt, avg).unwrap() - expected).abs() <= 1e-12);
        }
        prop_assert!(iv >= -1e-12);
    }

    #[test]
    fn auc_equals_pair_count(data in prop::collection::vec((0u8..12, any::<bool>()), 2..300)) {
        let scores: Vec<f64> = data.iter().map(|d| d.0 as f64 / 4.0).collect();
        let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
        prop_assume!(labels.iter().any(|&b| b) && labels.iter().any(|&b| !b));
        let r = auc(&scores, &labels).unwrap();
        prop_assert_eq!(r.auc, brute_auc(&scores, &labels));
        prop_assert_eq!(r.n_pos + r.n_neg, labels.len() as u64);
    }

    #[test]
    fn ols_matches_normal_equations(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40)) {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let n = xs.len() as f64;
        let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let det = n * sxx - sx * sx;
        prop_assume!(det.abs() > 1e-6 * n * sxx.max(1.0));
        let fit = fit_ols("x", &xs, &ys).unwrap();
        let slope = (n * sxy - sx * sy) / det;
        let intercept = (sy - slope * sx) / n;
        prop_assert!((fit.slope - slope).abs() <= 1e-8 * (1.0 + slope.abs()));
        prop_assert!((fit.intercept - intercept).abs() <= 1e-8 * (1.0 + intercept.abs()));
    }
}

#[test]
fn saturated_logistic_matches_group_logits() {
    // three groups, dummy-coded; the MLE reproduces each group's empirical log-odds
    let groups = [(0.0, 0.0, 40u32, 200u32), (1.0, 0.0, 90, 300), (0.0, 1.0, 15, 120)];
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for &(a, b, bad, n) in &groups {
        for i in 0..n {
            rows.push(vec![a, b]);
            y.push(i < bad);
        }
    }
    let x = Matrix::from_rows(&rows).unwrap();
    let m = train_logistic(&x, &y, &LogisticConfig { ridge: 0.0, ..Default::default() }).unwrap();
    let logit = |k: usize| {
        let p = groups[k].2 as f64 / groups[k].3 as f64;
        (p / (1.0 - p)).ln()
    };
    assert!((m.intercept - logit(0)).abs() < 1e-9);
    assert!((m.weights[0] - (logit(1) - logit(0))).abs() < 1e-9);
    assert!((m.weights[1] - (logit(2) - logit(0))).abs() < 1e-9);
    assert!(m.diagnostics.gradient_norm <= 1e-8);
    assert!(!m.diagnostics.separation_detected);
}

#[test]
fn separable_data_falls_back_to_ridge() {
    let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
    let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let m = train_logistic(&x, &y, &LogisticConfig { ridge: 0.0, ..Default::default() }).unwrap();
    assert!(m.diagnostics.separation_detected);
    assert!(m.diagnostics.ridge > 0.0);
    assert!(m.weights[0] > 0.0);
}

#[test]
fn boosting_training_error_obeys_exponential_bound() {
    let mut rng = scorecard_core::rng::SeededRng::new(11);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..600 {
        let a = rng.normal();
        let b = rng.normal();
        rows.push(vec![a, b]);
        y.push(rng.uniform() < 1.0 / (1.0 + (-(1.5 * a - b)).exp()));
    }
    let x = Matrix::from_rows(&rows).unwrap();
    let m = train_adaboost(&x, &y, &AdaBoostConfig { rounds: 30 }).unwrap();
    let mut bound = 1.0;
    for s in &m.stumps {
        let e = s.weighted_error;
        bound *= 2.0 * (e * (1.0 - e)).sqrt();
        assert!(s.training_error <= bound + 1e-12, "error {} above bound {bound}", s.training_error);
    }
    for w in &m.weight_sums {
        assert!((w - 1.0).abs() < 1e-9);
    }
}

#[test]
fn shift_to_own_mean_is_identity() {
    let scores = [0.25, 0.5, 0.75, 0.5];
    let (shift, adjusted) = shift_scores(&scores, 0.5).unwrap();
    assert_eq!(shift.offsets[0].delta, 0.0);
    assert_eq!(adjusted, scores);
}
