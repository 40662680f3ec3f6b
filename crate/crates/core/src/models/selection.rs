//! Greedy forward selection of characteristics by cross-validated AUC.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evaluation::kfold_cv;
use crate::linalg::Matrix;
use crate::models::Trainer;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    /// Standalone information value, used to break AUC ties.
    pub iv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub k: usize,
    pub seed: u64,
    /// A candidate is added only if it raises mean CV AUC by more than this.
    pub epsilon: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { k: 10, seed: 2013, epsilon: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub added: String,
    pub mean_auc: f64,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Column indices in the order they were added.
    pub selected: Vec<usize>,
    pub trace: Vec<SelectionStep>,
    /// Mean CV AUC of the final selection (0.5 for the intercept-only model).
    pub mean_auc: f64,
}

/// Adds, one at a time, the column of `x` (described by `candidates`) that
/// most improves mean k-fold CV AUC, until no candidate improves it by more
/// than `epsilon`. Ties go to the higher standalone IV, then the smaller
/// name. Candidates whose column duplicates a selected one, or for which
/// the trainer fails, are not eligible.
pub fn forward_select(
    candidates: &[Candidate],
    x: &Matrix,
    y: &[bool],
    trainer: &Trainer,
    config: &SelectionConfig,
) -> Result<Selection> {
    let mut selected: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut current = 0.5;
    if candidates.is_empty() {
        return Ok(Selection { selected, trace, mean_auc: current });
    }
    let columns: Vec<Vec<f64>> = (0..x.cols()).map(|j| x.column(j)).collect();

    loop {
        let mut best: Option<(usize, f64)> = None;
        for (j, cand) in candidates.iter().enumerate() {
            if selected.contains(&j) || selected.iter().any(|&s| columns[s] == columns[j]) {
                continue;
            }
            let mut cols = selected.clone();
            cols.push(j);
            let sub = x.select_columns(&cols);
            let cv = kfold_cv(y, config.k, config.seed, |train, valid| {
                let ys: Vec<bool> = train.iter().map(|&i| y[i]).collect();
                let model = trainer.train(&sub.select_rows(train), &ys)?;
                valid.iter().map(|&i| model.predict(sub.row(i))).collect()
            });
            let Ok(cv) = cv else { continue };
            let better = match best {
                None => true,
                Some((b, auc)) => {
                    cv.mean > auc
                        || (cv.mean == auc
                            && (cand.iv > candidates[b].iv
                                || (cand.iv == candidates[b].iv && cand.name < candidates[b].name)))
                }
            };
            if better {
                best = Some((j, cv.mean));
            }
        }
        match best {
            Some((j, auc)) if auc - current > config.epsilon => {
                trace.push(SelectionStep { added: candidates[j].name.clone(), mean_auc: auc, gain: auc - current });
                selected.push(j);
                current = auc;
            }
            _ => break,
        }
    }
    Ok(Selection { selected, trace, mean_auc: current })
}
