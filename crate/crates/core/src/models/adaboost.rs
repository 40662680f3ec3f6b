//! Discrete AdaBoost over decision stumps on WoE columns.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math::{clamp_prob, ln, sigmoid};

/// Weighted errors are floored here so a perfect stump gets a finite vote.
const MIN_ERROR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaBoostConfig {
    pub rounds: usize,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        Self { rounds: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Votes bad when the value is below the threshold.
    BadBelow,
    /// Votes bad when the value is at or above the threshold.
    BadAtOrAbove,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: Polarity,
    pub alpha: f64,
    /// Weighted error when the stump was chosen.
    pub weighted_error: f64,
    /// Training error of the ensemble up to and including this round.
    pub training_error: f64,
}

impl Stump {
    /// +1 for bad, -1 for good.
    #[inline]
    pub fn vote(&self, x: &[f64]) -> f64 {
        let below = x[self.feature] < self.threshold;
        let bad = match self.polarity {
            Polarity::BadBelow => below,
            Polarity::BadAtOrAbove => !below,
        };
        if bad {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StumpEnsemble {
    pub features: Vec<String>,
    pub stumps: Vec<Stump>,
    /// Sum of the sample weights after each round's renormalisation.
    #[serde(skip)]
    pub weight_sums: Vec<f64>,
}

impl StumpEnsemble {
    /// Weighted vote `F(x) = sum alpha_t h_t(x)`.
    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.features.len() {
            return Err(Error::DimensionMismatch { expected: self.features.len(), got: x.len() });
        }
        Ok(self.stumps.iter().map(|s| s.alpha * s.vote(x)).sum())
    }

    /// `sigmoid(2 F(x))`, kept strictly inside (0, 1).
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(clamp_prob(sigmoid(2.0 * self.margin(x)?)))
    }
}

/// Standard discrete boosting. Each round picks the stump (feature,
/// threshold, polarity) of least weighted error `e`, gives it the vote
/// `alpha = ln((1 - e) / e) / 2`, reweights the sample and renormalises.
/// Stops early once no stump beats 0.5 or a stump classifies perfectly.
pub fn train_adaboost(x: &Matrix, y: &[bool], config: &AdaBoostConfig) -> Result<StumpEnsemble> {
    let n = x.rows();
    if n != y.len() {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if config.rounds == 0 {
        return Err(Error::InvalidConfig("rounds must be at least 1".into()));
    }
    if !y.iter().any(|&v| v) || y.iter().all(|&v| v) {
        return Err(Error::SingleClass("train_adaboost".into()));
    }
    let sign: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
    let orders: Vec<Vec<usize>> = (0..x.cols())
        .map(|j| {
            let mut o: Vec<usize> = (0..n).collect();
            o.sort_by(|&a, &b| x.get(a, j).total_cmp(&x.get(b, j)));
            o
        })
        .collect();

    let mut w = vec![1.0 / n as f64; n];
    let mut margin = vec![0.0; n];
    let mut stumps: Vec<Stump> = Vec::new();
    let mut weight_sums = Vec::new();

    for round in 0..config.rounds {
        let (feature, threshold, polarity, err) = match best_stump(x, y, &w, &orders) {
            Some(s) if s.3 < 0.5 => s,
            _ if round == 0 => return Err(Error::NoWeakLearner),
            _ => break,
        };
        let e = err.max(MIN_ERROR);
        let alpha = 0.5 * ln((1.0 - e) / e);
        let mut stump = Stump { feature, threshold, polarity, alpha, weighted_error: err, training_error: 0.0 };

        let mut total = 0.0;
        let mut wrong = 0usize;
        for i in 0..n {
            let h = stump.vote(x.row(i));
            margin[i] += alpha * h;
            if margin[i] * sign[i] <= 0.0 {
                wrong += 1;
            }
            w[i] *= crate::math::exp(-alpha * sign[i] * h);
            total += w[i];
        }
        w.iter_mut().for_each(|v| *v /= total);
        weight_sums.push(w.iter().sum());
        stump.training_error = wrong as f64 / n as f64;
        stumps.push(stump);
        if err == 0.0 {
            break;
        }
    }
    Ok(StumpEnsemble { features: x.names().to_vec(), stumps, weight_sums })
}

/// Least-error stump; thresholds are the distinct values above each column's minimum.
fn best_stump(x: &Matrix, y: &[bool], w: &[f64], orders: &[Vec<usize>]) -> Option<(usize, f64, Polarity, f64)> {
    let total_bad: f64 = y.iter().zip(w).filter(|(b, _)| **b).map(|(_, w)| w).sum();
    let mut best: Option<(usize, f64, Polarity, f64)> = None;
    for (j, order) in orders.iter().enumerate() {
        // BadBelow error at threshold t: goods below t plus bads at/above t
        let mut good_below = 0.0;
        let mut bad_below = 0.0;
        let mut k = 0;
        while k < order.len() {
            let v = x.get(order[k], j);
            if k > 0 {
                let err_below = good_below + (total_bad - bad_below);
                let err_above = 1.0 - err_below;
                for (pol, err) in [(Polarity::BadBelow, err_below), (Polarity::BadAtOrAbove, err_above)] {
                    if best.is_none_or(|b| err < b.3) {
                        best = Some((j, v, pol, err.max(0.0)));
                    }
                }
            }
            while k < order.len() && x.get(order[k], j) == v {
                let i = order[k];
                if y[i] {
                    bad_below += w[i]
                } else {
                    good_below += w[i]
                }
                k += 1;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_round_perfect_split() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 3) as f64, i as f64]).collect();
        let y: Vec<bool> = (0..20).map(|i| i < 8).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = train_adaboost(&x, &y, &AdaBoostConfig { rounds: 1 }).unwrap();
        assert_eq!(m.stumps.len(), 1);
        let s = &m.stumps[0];
        assert_eq!((s.feature, s.threshold, s.polarity), (1, 8.0, Polarity::BadBelow));
        assert_eq!(s.training_error, 0.0);
        assert!(s.alpha.is_finite());
        for (i, &bad) in y.iter().enumerate() {
            assert_eq!(m.predict(x.row(i)).unwrap() > 0.5, bad);
        }
    }

    #[test]
    fn weights_stay_normalised() {
        let rows: Vec<Vec<f64>> = (0..300).map(|i| vec![((i * 37) % 11) as f64, ((i * 13) % 7) as f64]).collect();
        let y: Vec<bool> = (0..300).map(|i| ((i * 37) % 11 + (i * 13) % 7 + i % 4) > 10).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = train_adaboost(&x, &y, &AdaBoostConfig { rounds: 25 }).unwrap();
        assert!(!m.weight_sums.is_empty());
        for s in &m.weight_sums {
            assert!((s - 1.0).abs() <= 1e-12);
        }
        assert!(m.stumps.iter().all(|s| s.weighted_error < 0.5 && s.alpha.is_finite()));
    }

    #[test]
    fn useless_features_fail() {
        let x = Matrix::from_rows(&vec![vec![1.0]; 10]).unwrap();
        let y: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        assert_eq!(train_adaboost(&x, &y, &AdaBoostConfig::default()), Err(Error::NoWeakLearner));
    }
}
