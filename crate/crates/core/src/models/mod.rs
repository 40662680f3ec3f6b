//! Stage-one classifiers over WoE-encoded characteristics and the four
//! training strategies: full window, through-the-door window, a month-of-year
//! ensemble and noise cleaning.

pub mod adaboost;
pub mod logistic;
pub mod selection;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use adaboost::{train_adaboost, AdaBoostConfig, Polarity, Stump, StumpEnsemble};
pub use logistic::{standard_errors, train_logistic, FitDiagnostics, LogisticConfig, LogisticModel, MIN_RIDGE};
pub use selection::{forward_select, Candidate, Selection, SelectionConfig, SelectionStep};

use crate::dataset::Window;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Logistic(LogisticModel),
    Stumps(StumpEnsemble),
}

impl Model {
    /// Probability of bad, strictly inside (0, 1).
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Logistic(m) => m.predict(x),
            Model::Stumps(m) => m.predict(x),
        }
    }

    pub fn features(&self) -> &[String] {
        match self {
            Model::Logistic(m) => &m.features,
            Model::Stumps(m) => &m.features,
        }
    }

    pub fn predict_all(&self, x: &Matrix) -> Result<Vec<f64>> {
        (0..x.rows()).map(|i| self.predict(x.row(i))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Trainer {
    Logistic(LogisticConfig),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostConfig),
}

impl Default for Trainer {
    fn default() -> Self {
        Trainer::Logistic(LogisticConfig::default())
    }
}

impl Trainer {
    pub fn train(&self, x: &Matrix, y: &[bool]) -> Result<Model> {
        match self {
            Trainer::Logistic(c) => train_logistic(x, y, c).map(Model::Logistic),
            Trainer::AdaBoost(c) => train_adaboost(x, y, c).map(Model::Stumps),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrainingStrategy {
    /// All modelling data.
    #[default]
    FullWindow,
    /// Only applications inside a recent window.
    ThroughTheDoor { window: Window },
    /// One model per calendar month, trained on that month across years.
    MonthlyEnsemble,
    /// Train, drop strongly misclassified records, retrain.
    NoiseCleaning { posterior_threshold: f64 },
}

impl TrainingStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            TrainingStrategy::ThroughTheDoor { window } => window.validate(),
            TrainingStrategy::NoiseCleaning { posterior_threshold: t } if !(*t > 0.0 && *t < 0.5) => {
                Err(Error::InvalidConfig(alloc::format!("posterior threshold {t} outside (0, 0.5)")))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TrainingStrategy::FullWindow => "full-window",
            TrainingStrategy::ThroughTheDoor { .. } => "through-the-door",
            TrainingStrategy::MonthlyEnsemble => "monthly-ensemble",
            TrainingStrategy::NoiseCleaning { .. } => "noise-cleaning",
        }
    }
}

/// How a monthly ensemble turns twelve models into one score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combine {
    /// Score each record with its application month's model.
    #[default]
    Route,
    /// Average the twelve predictions.
    Average,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelBundle {
    Single(Model),
    /// Exactly twelve models; index 0 is January.
    Monthly {
        models: Vec<Model>,
        combine: Combine,
    },
}

impl ModelBundle {
    pub fn predict(&self, x: &[f64], month: u8) -> Result<f64> {
        match self {
            ModelBundle::Single(m) => m.predict(x),
            ModelBundle::Monthly { models, combine: Combine::Route } => {
                if !(1..=12).contains(&month) {
                    return Err(Error::InvalidInput(alloc::format!("month {month}")));
                }
                models[month as usize - 1].predict(x)
            }
            ModelBundle::Monthly { models, combine: Combine::Average } => {
                let mut s = 0.0;
                for m in models {
                    s += m.predict(x)?;
                }
                Ok(s / models.len() as f64)
            }
        }
    }

    pub fn models(&self) -> Vec<&Model> {
        match self {
            ModelBundle::Single(m) => alloc::vec![m],
            ModelBundle::Monthly { models, .. } => models.iter().collect(),
        }
    }

    pub fn features(&self) -> &[String] {
        match self {
            ModelBundle::Single(m) => m.features(),
            ModelBundle::Monthly { models, .. } => models[0].features(),
        }
    }
}

/// Model posterior of each record's true class.
pub fn true_class_posteriors(model: &Model, x: &Matrix, y: &[bool]) -> Result<Vec<f64>> {
    (0..x.rows()).map(|i| model.predict(x.row(i)).map(|p| if y[i] { p } else { 1.0 - p })).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CleaningOutcome {
    pub model: Model,
    /// Row indices dropped before retraining, ascending.
    pub removed: Vec<usize>,
    /// Cleaning would have emptied a class; `model` is the first-pass model.
    pub aborted: bool,
}

/// Trains, removes the records whose posterior of their true class is below
/// `threshold`, and retrains on the rest. With nothing to remove the
/// first-pass model is returned unchanged.
pub fn clean_and_retrain(trainer: &Trainer, x: &Matrix, y: &[bool], threshold: f64) -> Result<CleaningOutcome> {
    if !(0.0..0.5).contains(&threshold) {
        return Err(Error::InvalidConfig(alloc::format!("posterior threshold {threshold} outside [0, 0.5)")));
    }
    let first = trainer.train(x, y)?;
    let post = true_class_posteriors(&first, x, y)?;
    let removed: Vec<usize> = (0..x.rows()).filter(|&i| post[i] < threshold).collect();
    if removed.is_empty() {
        return Ok(CleaningOutcome { model: first, removed, aborted: false });
    }
    let keep: Vec<usize> = (0..x.rows()).filter(|&i| post[i] >= threshold).collect();
    let ys: Vec<bool> = keep.iter().map(|&i| y[i]).collect();
    if !ys.iter().any(|&b| b) || ys.iter().all(|&b| b) {
        return Ok(CleaningOutcome { model: first, removed: Vec::new(), aborted: true });
    }
    let model = trainer.train(&x.select_rows(&keep), &ys)?;
    Ok(CleaningOutcome { model, removed, aborted: false })
}

/// Twelve models, one per application month (1-12) pooled across years.
pub fn monthly_ensemble(
    trainer: &Trainer,
    x: &Matrix,
    y: &[bool],
    months: &[u8],
    combine: Combine,
) -> Result<ModelBundle> {
    if months.len() != x.rows() || y.len() != x.rows() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: months.len().min(y.len()) });
    }
    let mut models = Vec::with_capacity(12);
    for m in 1..=12u8 {
        let rows: Vec<usize> = (0..x.rows()).filter(|&i| months[i] == m).collect();
        let ys: Vec<bool> = rows.iter().map(|&i| y[i]).collect();
        if !ys.iter().any(|&b| b) || ys.iter().all(|&b| b) {
            return Err(Error::MonthMissingClass(m));
        }
        models.push(trainer.train(&x.select_rows(&rows), &ys)?);
    }
    Ok(ModelBundle::Monthly { models, combine })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn toy() -> (Matrix, Vec<bool>, Vec<u8>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut months = Vec::new();
        for m in 1..=12u8 {
            for i in 0..40 {
                let x = (i % 8) as f64 / 4.0 - 1.0;
                rows.push(vec![x]);
                y.push((i * 5 + 3) % 8 < 2 + (i % 8) / 3);
                months.push(m);
            }
        }
        (Matrix::from_rows(&rows).unwrap(), y, months)
    }

    #[test]
    fn identical_months_give_identical_models() {
        let (x, y, months) = toy();
        let b = monthly_ensemble(&Trainer::default(), &x, &y, &months, Combine::Route).unwrap();
        let ms = b.models();
        assert_eq!(ms.len(), 12);
        assert!(ms.iter().all(|m| *m == ms[0]));
    }

    #[test]
    fn routing_uses_the_application_month() {
        let (x, y, months) = toy();
        let mut y2 = y.clone();
        // make March different
        for i in 0..x.rows() {
            if months[i] == 3 {
                y2[i] = x.get(i, 0) > 0.0 && i % 2 == 0 || i % 7 == 0;
            }
        }
        let b = monthly_ensemble(&Trainer::default(), &x, &y2, &months, Combine::Route).unwrap();
        let ModelBundle::Monthly { models, .. } = &b else { unreachable!() };
        let row = [0.5];
        assert_eq!(b.predict(&row, 3).unwrap(), models[2].predict(&row).unwrap());
        assert_ne!(b.predict(&row, 3).unwrap(), b.predict(&row, 4).unwrap());
    }

    #[test]
    fn missing_class_month_is_named() {
        let (x, mut y, months) = toy();
        for i in 0..y.len() {
            if months[i] == 7 {
                y[i] = false;
            }
        }
        assert_eq!(
            monthly_ensemble(&Trainer::default(), &x, &y, &months, Combine::Route),
            Err(Error::MonthMissingClass(7))
        );
    }

    #[test]
    fn cleaning_with_zero_threshold_is_plain_training() {
        let (x, y, _) = toy();
        let plain = Trainer::default().train(&x, &y).unwrap();
        let out = clean_and_retrain(&Trainer::default(), &x, &y, 0.0).unwrap();
        assert_eq!(out.model, plain);
        assert!(out.removed.is_empty());
    }

    #[test]
    fn strategy_thresholds() {
        assert!(TrainingStrategy::NoiseCleaning { posterior_threshold: 0.05 }.validate().is_ok());
        assert!(TrainingStrategy::NoiseCleaning { posterior_threshold: 0.5 }.validate().is_err());
        assert!(TrainingStrategy::NoiseCleaning { posterior_threshold: 0.0 }.validate().is_err());
    }
}
