//! Discrimination, stability and degradation metrics.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::binning::{Characteristic, UnfamiliarCodes};
use crate::dataset::Application;
use crate::error::{Error, Result};
use crate::math::ln;
use crate::rng::SeededRng;

/// Default floor applied to empty bins before the PSI logarithm.
pub const PSI_EPSILON: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieHandling {
    /// Tied (bad, good) pairs count one half (Mann-Whitney convention).
    HalfCredit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocResult {
    pub auc: f64,
    pub n_pos: u64,
    pub n_neg: u64,
    pub ties: TieHandling,
}

impl RocResult {
    pub fn gini(&self) -> f64 {
        2.0 * self.auc - 1.0
    }
}

/// Area under the ROC curve for `scores` where higher means more likely bad
/// (`labels[i] == true`).
///
/// Computed from the Mann-Whitney statistic with half credit for ties. The
/// pair counts are accumulated as integers, so the result equals the ratio
/// of the brute-force pair count to `n_pos * n_neg` exactly.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<RocResult> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), got: labels.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("auc".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the Mann-Whitney U: 2 * concordant + tied pairs
    let mut twice_u: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut pos, mut neg) = (0u128, 0u128);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                pos += 1
            } else {
                neg += 1
            }
            i += 1;
        }
        twice_u += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
    }
    let denom = 2 * n_pos as u128 * n_neg as u128;
    Ok(RocResult { auc: twice_u as f64 / denom as f64, n_pos, n_neg, ties: TieHandling::HalfCredit })
}

/// Assigns each record a fold in `0..k`, stratified by label.
///
/// Each class is shuffled with its own seeded stream and dealt round-robin,
/// the negatives continuing where the positives stopped, so every fold's
/// class counts differ by at most one from any other fold's.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > labels.len() {
        return Err(Error::InvalidConfig(alloc::format!("k = {k} folds for {} records", labels.len())));
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    SeededRng::with_stream(seed, 1).shuffle(&mut pos);
    SeededRng::with_stream(seed, 2).shuffle(&mut neg);
    let mut fold = vec![0; labels.len()];
    for (j, &i) in pos.iter().chain(neg.iter()).enumerate() {
        fold[i] = j % k;
    }
    Ok(fold)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub k: usize,
    pub seed: u64,
    pub fold_auc: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

/// Stratified k-fold cross-validation.
///
/// `fit_and_score(train, validation)` must fit everything it needs
/// (binning included) on the `train` indices only and return one score per
/// `validation` index.
pub fn kfold_cv<F>(labels: &[bool], k: usize, seed: u64, mut fit_and_score: F) -> Result<CvResult>
where
    F: FnMut(&[usize], &[usize]) -> Result<Vec<f64>>,
{
    let n_pos = labels.iter().filter(|&&y| y).count();
    let min_class = n_pos.min(labels.len() - n_pos);
    if k > min_class {
        return Err(Error::TooManyFolds { k, min_class });
    }
    let fold = stratified_folds(labels, k, seed)?;
    let mut fold_auc = Vec::with_capacity(k);
    for f in 0..k {
        let (valid, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| fold[i] == f);
        let scores = fit_and_score(&train, &valid)?;
        if scores.len() != valid.len() {
            return Err(Error::DimensionMismatch { expected: valid.len(), got: scores.len() });
        }
        let ys: Vec<bool> = valid.iter().map(|&i| labels[i]).collect();
        fold_auc.push(auc(&scores, &ys)?.auc);
    }
    Ok(CvResult { k, seed, mean: crate::math::mean(&fold_auc), std_dev: crate::math::std_dev(&fold_auc), fold_auc })
}

/// Population stability index `sum (p - q) (ln p - ln q)` between two binned
/// distributions; shares below `epsilon` are floored before the logarithm.
pub fn psi(baseline: &[f64], comparison: &[f64], epsilon: f64) -> Result<f64> {
    if baseline.len() != comparison.len() {
        return Err(Error::BinMismatch(baseline.len(), comparison.len()));
    }
    for d in [baseline, comparison] {
        let s: f64 = d.iter().sum();
        if (s - 1.0).abs() > 1e-6 || d.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidInput(alloc::format!("proportions sum to {s}")));
        }
    }
    Ok(baseline
        .iter()
        .zip(comparison)
        .map(|(&p, &q)| {
            let (p, q) = (p.max(epsilon), q.max(epsilon));
            (p - q) * (ln(p) - ln(q))
        })
        .sum())
}

/// Share of `records` per bin of `characteristic`, with one trailing slot
/// for records that fall in no bin (flagged values, unfamiliar codes).
pub fn bin_proportions(characteristic: &Characteristic, records: &[&Application]) -> Vec<f64> {
    let mut counts = vec![0u64; characteristic.bins.len() + 1];
    for r in records {
        let slot = characteristic.bin_index(r, UnfamiliarCodes::AverageWoe).unwrap_or(characteristic.bins.len());
        counts[slot] += 1;
    }
    let n = records.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiEntry {
    pub characteristic: String,
    pub psi: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    pub entries: Vec<PsiEntry>,
}

pub fn psi_report(
    characteristics: &[Characteristic],
    baseline: &[&Application],
    comparison: &[&Application],
    epsilon: f64,
) -> Result<PsiReport> {
    let mut entries = Vec::with_capacity(characteristics.len());
    for c in characteristics {
        let p = bin_proportions(c, baseline);
        let q = bin_proportions(c, comparison);
        entries.push(PsiEntry { characteristic: c.name.clone(), psi: psi(&p, &q, epsilon)? });
    }
    Ok(PsiReport { entries })
}

/// AUC drop from the test period to the holdout, in percentage points.
/// Rounded to 10 decimals so that decimal inputs give decimal outputs.
pub fn degradation(auc_test: f64, auc_holdout: f64) -> f64 {
    libm::round((auc_test - auc_holdout) * 100.0 * 1e10) / 1e10
}
