//! Both stages end to end on in-memory records.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::binning::{build_interaction, encode, BinningConfig, Characteristic, UnfamiliarCodes};
use crate::calibration::{
    distance_d, forecast_default, rank_predictors, repair_abnormal, shift_scores, shift_scores_by_month,
    CalibrationShift, DefaultSeries, DistanceD, MacroSeries, MonthlyForecast, Ranking, Scenario,
};
use crate::dataset::{adjust_income, attr, Application, Cleanser, CleansingPolicy, CleansingReport, Window};
use crate::date::Quarter;
use crate::error::{Error, Result};
use crate::evaluation::{auc, degradation, kfold_cv, psi_report, CvResult, PsiReport, RocResult, PSI_EPSILON};
use crate::linalg::Matrix;
use crate::models::{
    clean_and_retrain, forward_select, monthly_ensemble, Candidate, Combine, ModelBundle, SelectionConfig,
    SelectionStep, Trainer, TrainingStrategy,
};

/// How characteristics become model features.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FeatureSelection {
    /// Every characteristic whose IV reaches `min_iv`.
    #[default]
    All,
    /// Greedy forward selection by cross-validated AUC.
    Forward { k: usize, epsilon: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelingConfig {
    pub binning: BinningConfig,
    pub numeric: Vec<String>,
    pub nominal: Vec<String>,
    pub binary: Vec<String>,
    /// Each entry names two or three of the variables above.
    pub interactions: Vec<Vec<String>>,
    pub min_iv: f64,
    pub selection: FeatureSelection,
    /// Explicit feature list; bypasses `min_iv` and `selection`.
    pub features: Option<Vec<String>>,
    pub trainer: Trainer,
    pub strategy: TrainingStrategy,
    pub unfamiliar: UnfamiliarCodes,
    pub combine: Combine,
}

impl Default for ModelingConfig {
    fn default() -> Self {
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect();
        Self {
            binning: BinningConfig::default(),
            numeric: s(&[
                attr::AGE,
                attr::INCOME_ADJUSTED,
                attr::TIME_AT_ADDRESS,
                attr::TIME_AT_EMPLOYER,
                attr::N_DEPENDENTS,
                attr::N_ACCOUNTS,
            ]),
            nominal: s(&[
                attr::GEOGRAPHY,
                attr::MARITAL_STATUS,
                attr::OCCUPATION,
                attr::INCOME_PROOF,
                attr::DUE_DAY,
                attr::HOME_TYPE,
                attr::BRANCH,
            ]),
            binary: s(&[attr::PREVIOUS_CREDIT, attr::SAME_STATE, attr::HAS_PHONE, attr::GENDER]),
            interactions: Vec::new(),
            min_iv: 0.02,
            selection: FeatureSelection::All,
            features: None,
            trainer: Trainer::default(),
            strategy: TrainingStrategy::FullWindow,
            unfamiliar: UnfamiliarCodes::AverageWoe,
            combine: Combine::Route,
        }
    }
}

impl ModelingConfig {
    pub fn validate(&self) -> Result<()> {
        self.binning.validate()?;
        self.strategy.validate()?;
        if let Some(bad) = self.interactions.iter().find(|i| !(2..=3).contains(&i.len())) {
            return Err(Error::InvalidConfig(format!("interaction {bad:?} needs 2 or 3 variables")));
        }
        if let FeatureSelection::Forward { k, .. } = self.selection {
            if k < 2 {
                return Err(Error::InvalidConfig("forward selection needs k >= 2".into()));
            }
        }
        if !(self.min_iv >= 0.0) {
            return Err(Error::InvalidConfig("min_iv must be >= 0".into()));
        }
        Ok(())
    }

    /// The same model with the feature list pinned to `features`.
    pub fn pinned(&self, features: &[String]) -> Self {
        Self { features: Some(features.to_vec()), ..self.clone() }
    }
}

/// A fitted scorecard: characteristics in feature order and the models.
#[derive(Clone, Debug, PartialEq)]
pub struct Scorecard {
    pub characteristics: Vec<Characteristic>,
    pub bundle: ModelBundle,
    pub unfamiliar: UnfamiliarCodes,
    pub strategy: TrainingStrategy,
}

impl Scorecard {
    pub fn encode(&self, record: &Application) -> Vec<f64> {
        encode(record, &self.characteristics, self.unfamiliar)
    }

    /// Probability of bad.
    pub fn score(&self, record: &Application) -> Result<f64> {
        self.bundle.predict(&self.encode(record), record.date.month())
    }

    pub fn score_all(&self, records: &[&Application]) -> Result<Vec<f64>> {
        records.iter().map(|r| self.score(r)).collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.characteristics.iter().map(|c| c.name.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    /// Every fitted characteristic with its IV, in fitting order.
    pub ivs: Vec<(String, f64)>,
    /// Variables that could not be binned, with the reason.
    pub skipped: Vec<(String, String)>,
    pub selection_trace: Vec<SelectionStep>,
    /// Ids of training records removed by noise cleaning.
    pub removed: Vec<String>,
    pub training_records: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fitted {
    pub scorecard: Scorecard,
    pub report: FitReport,
}

fn fit_characteristics(
    records: &[&Application],
    labels: &[bool],
    config: &ModelingConfig,
    wanted: Option<&BTreeSet<String>>,
    skipped: &mut Vec<(String, String)>,
) -> Vec<Characteristic> {
    let needed = |name: &str| match wanted {
        None => true,
        Some(w) => w.iter().any(|f| f.split('*').any(|part| part == name)),
    };
    let mut out: Vec<Characteristic> = Vec::new();
    let mut push = |name: &str, r: Result<Characteristic>, out: &mut Vec<Characteristic>| match r {
        Ok(c) => out.push(c),
        Err(e) => skipped.push((name.to_string(), e.to_string())),
    };
    for v in config.numeric.iter().filter(|v| needed(v)) {
        push(v, Characteristic::fit_numeric(v, records, labels, &config.binning), &mut out);
    }
    for v in config.nominal.iter().filter(|v| needed(v)) {
        push(v, Characteristic::fit_nominal(v, records, labels), &mut out);
    }
    for v in config.binary.iter().filter(|v| needed(v)) {
        push(v, Characteristic::fit_binary(v, records, labels), &mut out);
    }
    for parts in &config.interactions {
        let name = parts.join("*");
        if wanted.is_some_and(|w| !w.contains(&name)) {
            continue;
        }
        let comps: Option<Vec<&Characteristic>> = parts.iter().map(|p| out.iter().find(|c| &c.name == p)).collect();
        let r = match comps {
            Some(c) => build_interaction(&c, records, labels, config.binning.min_bin_fraction),
            None => Err(Error::InvalidConfig(format!("interaction `{name}` refers to an unfitted variable"))),
        };
        push(&name, r, &mut out);
    }
    out
}

/// Variables left out of a fit, with the reason.
pub type Skipped = Vec<(String, String)>;

/// Fits every configured variable and interaction on labelled `records`.
/// Variables that cannot be binned are returned with the reason.
pub fn fit_candidates(records: &[&Application], config: &ModelingConfig) -> Result<(Vec<Characteristic>, Skipped)> {
    config.validate()?;
    let labels: Vec<bool> = records
        .iter()
        .map(|r| r.is_bad().ok_or_else(|| Error::InvalidInput(format!("record `{}` has no label", r.id))))
        .collect::<Result<_>>()?;
    let mut skipped = Vec::new();
    let chars = fit_characteristics(records, &labels, config, None, &mut skipped);
    Ok((chars, skipped))
}

fn encode_matrix(records: &[&Application], chars: &[Characteristic], unfamiliar: UnfamiliarCodes) -> Result<Matrix> {
    let mut data = Vec::with_capacity(records.len() * chars.len());
    for r in records {
        data.extend(encode(r, chars, unfamiliar));
    }
    Matrix::new(records.len(), chars.iter().map(|c| c.name.clone()).collect(), data)
}

/// Fits characteristics, chooses features and trains under the configured
/// strategy. `seed` drives the folds of forward selection.
pub fn fit_scorecard(records: &[&Application], config: &ModelingConfig, seed: u64) -> Result<Fitted> {
    config.validate()?;
    let records: Vec<&Application> = match &config.strategy {
        TrainingStrategy::ThroughTheDoor { window } => {
            records.iter().copied().filter(|r| window.contains(r.date)).collect()
        }
        _ => records.to_vec(),
    };
    let labels: Vec<bool> = records
        .iter()
        .map(|r| r.is_bad().ok_or_else(|| Error::InvalidInput(format!("record `{}` has no label", r.id))))
        .collect::<Result<_>>()?;
    if !labels.iter().any(|&y| y) || labels.iter().all(|&y| y) {
        return Err(Error::SingleClass("training sample".into()));
    }

    let wanted: Option<BTreeSet<String>> = config.features.as_ref().map(|f| f.iter().cloned().collect());
    let mut skipped = Vec::new();
    let fitted = fit_characteristics(&records, &labels, config, wanted.as_ref(), &mut skipped);
    let ivs = fitted.iter().map(|c| (c.name.clone(), c.iv)).collect();

    let (chars, trace) = match &config.features {
        Some(names) => {
            let mut chosen = Vec::with_capacity(names.len());
            for n in names {
                let c = fitted
                    .iter()
                    .find(|c| &c.name == n)
                    .ok_or_else(|| Error::InvalidConfig(format!("feature `{n}` could not be fitted")))?;
                chosen.push(c.clone());
            }
            (chosen, Vec::new())
        }
        None => {
            let pool: Vec<Characteristic> = fitted.into_iter().filter(|c| c.iv >= config.min_iv).collect();
            match config.selection {
                FeatureSelection::All => (pool, Vec::new()),
                FeatureSelection::Forward { k, epsilon } => {
                    let x = encode_matrix(&records, &pool, config.unfamiliar)?;
                    let cands: Vec<Candidate> =
                        pool.iter().map(|c| Candidate { name: c.name.clone(), iv: c.iv }).collect();
                    let sel =
                        forward_select(&cands, &x, &labels, &config.trainer, &SelectionConfig { k, seed, epsilon })?;
                    (sel.selected.iter().map(|&j| pool[j].clone()).collect(), sel.trace)
                }
            }
        }
    };

    let x = encode_matrix(&records, &chars, config.unfamiliar)?;
    let mut removed = Vec::new();
    let bundle = match &config.strategy {
        TrainingStrategy::FullWindow | TrainingStrategy::ThroughTheDoor { .. } => {
            ModelBundle::Single(config.trainer.train(&x, &labels)?)
        }
        TrainingStrategy::MonthlyEnsemble => {
            let months: Vec<u8> = records.iter().map(|r| r.date.month()).collect();
            monthly_ensemble(&config.trainer, &x, &labels, &months, config.combine)?
        }
        TrainingStrategy::NoiseCleaning { posterior_threshold } => {
            let out = clean_and_retrain(&config.trainer, &x, &labels, *posterior_threshold)?;
            removed = out.removed.iter().map(|&i| records[i].id.clone()).collect();
            ModelBundle::Single(out.model)
        }
    };
    Ok(Fitted {
        scorecard: Scorecard {
            characteristics: chars,
            bundle,
            unfamiliar: config.unfamiliar,
            strategy: config.strategy.clone(),
        },
        report: FitReport { ivs, skipped, selection_trace: trace, removed, training_records: records.len() },
    })
}

/// Modelling and holdout partitions after cleansing.
#[derive(Clone, Debug, PartialEq)]
pub struct Prepared {
    pub modeling: Vec<Application>,
    pub holdout: Vec<Application>,
    pub report: CleansingReport,
}

/// Splits off the holdout window, fits cleansing on the modelling part
/// only, applies it to both, and adds deflated income when factors are
/// given.
pub fn prepare(
    records: &[Application],
    holdout: &Window,
    policy: &CleansingPolicy,
    income_factors: Option<&BTreeMap<i32, f64>>,
) -> Result<Prepared> {
    policy.validate()?;
    holdout.validate()?;
    let (hold, model): (Vec<Application>, Vec<Application>) =
        records.iter().cloned().partition(|r| holdout.contains(r.date));
    let cleanser = Cleanser::fit(&model, policy);
    let (mut modeling, mut report) = cleanser.apply(&model);
    let (mut holdout, hold_report) = cleanser.apply(&hold);
    report.merge(&hold_report);
    if let Some(f) = income_factors {
        modeling = adjust_income(&modeling, f)?;
        holdout = adjust_income(&holdout, f)?;
    }
    Ok(Prepared { modeling, holdout, report })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageOneReport {
    pub fitted: Fitted,
    /// Cross-validation with binning refitted inside every fold on the
    /// final feature list.
    pub cv: CvResult,
    pub holdout: Option<RocResult>,
    /// `cv.mean - holdout AUC` in percentage points.
    pub degradation: Option<f64>,
    pub psi: Option<PsiReport>,
    pub holdout_scores: Vec<f64>,
}

/// Cross-validates `config` pinned to `features`, refitting the binning on
/// each training fold.
pub fn cross_validate(
    records: &[&Application],
    config: &ModelingConfig,
    features: &[String],
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    let pinned = config.pinned(features);
    let labels: Vec<bool> = records
        .iter()
        .map(|r| r.is_bad().ok_or_else(|| Error::InvalidInput(format!("record `{}` has no label", r.id))))
        .collect::<Result<_>>()?;
    kfold_cv(&labels, k, seed, |train, valid| {
        let sub: Vec<&Application> = train.iter().map(|&i| records[i]).collect();
        let fitted = fit_scorecard(&sub, &pinned, seed)?;
        valid.iter().map(|&i| fitted.scorecard.score(records[i])).collect()
    })
}

/// Stage-one metrics of an already fitted scorecard.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub cv: CvResult,
    pub holdout: Option<RocResult>,
    pub degradation: Option<f64>,
    pub psi: Option<PsiReport>,
    pub holdout_scores: Vec<f64>,
}

/// Cross-validates the scorecard's feature list on `modeling` (restricted
/// to the strategy's window) and scores the holdout with the scorecard.
/// Holdout AUC and degradation need labelled holdout records.
pub fn evaluate_scorecard(
    scorecard: &Scorecard,
    modeling: &[Application],
    holdout: &[Application],
    config: &ModelingConfig,
    cv_k: usize,
    seed: u64,
) -> Result<Evaluation> {
    let model_refs: Vec<&Application> = modeling.iter().collect();
    let features = scorecard.feature_names();
    let cv_records: Vec<&Application> = match &config.strategy {
        TrainingStrategy::ThroughTheDoor { window } => {
            model_refs.iter().copied().filter(|r| window.contains(r.date)).collect()
        }
        _ => model_refs.clone(),
    };
    let cv = cross_validate(&cv_records, config, &features, cv_k, seed)?;

    let hold_refs: Vec<&Application> = holdout.iter().collect();
    let holdout_scores = scorecard.score_all(&hold_refs)?;
    let labelled: Vec<usize> = (0..holdout.len()).filter(|&i| holdout[i].label.is_some()).collect();
    let holdout_auc = if labelled.is_empty() {
        None
    } else {
        let s: Vec<f64> = labelled.iter().map(|&i| holdout_scores[i]).collect();
        let y: Vec<bool> = labelled.iter().map(|&i| holdout[i].is_bad() == Some(true)).collect();
        Some(auc(&s, &y)?)
    };
    let psi = if holdout.is_empty() {
        None
    } else {
        Some(psi_report(&scorecard.characteristics, &model_refs, &hold_refs, PSI_EPSILON)?)
    };
    Ok(Evaluation {
        degradation: holdout_auc.as_ref().map(|h| degradation(cv.mean, h.auc)),
        holdout: holdout_auc,
        cv,
        psi,
        holdout_scores,
    })
}

/// Fits on `modeling`, cross-validates, and scores the holdout.
pub fn run_stage_one(
    modeling: &[Application],
    holdout: &[Application],
    config: &ModelingConfig,
    cv_k: usize,
    seed: u64,
) -> Result<StageOneReport> {
    let model_refs: Vec<&Application> = modeling.iter().collect();
    let fitted = fit_scorecard(&model_refs, config, seed)?;
    let e = evaluate_scorecard(&fitted.scorecard, modeling, holdout, config, cv_k, seed)?;
    Ok(StageOneReport {
        fitted,
        cv: e.cv,
        holdout: e.holdout,
        degradation: e.degradation,
        psi: e.psi,
        holdout_scores: e.holdout_scores,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageTwoConfig {
    pub scenario: Scenario,
    /// Inclusive quarter range for correlating predictors; all quarters of
    /// the history when unset.
    pub fit_window: Option<(Quarter, Quarter)>,
    /// Solve one offset per application month instead of one global offset.
    /// Scenario 2 forecasts are flat, so either choice gives the same mean.
    pub per_month: bool,
}

impl Default for StageTwoConfig {
    fn default() -> Self {
        Self { scenario: Scenario::default(), fit_window: None, per_month: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageTwoReport {
    pub ranking: Ranking,
    pub forecast: MonthlyForecast,
    pub shift: CalibrationShift,
    pub adjusted: Vec<f64>,
    pub distance: Option<DistanceD>,
}

/// Picks the best-correlated (repaired) macro series, forecasts next year's
/// monthly default and shifts `scores` (with application `months`) onto it.
pub fn run_stage_two(
    history: &DefaultSeries,
    candidates: &[MacroSeries],
    scores: &[f64],
    months: &[u8],
    config: &StageTwoConfig,
    observed: Option<&[f64]>,
) -> Result<StageTwoReport> {
    let repaired: Vec<MacroSeries> = candidates
        .iter()
        .map(|c| repair_abnormal(c, &c.abnormal().iter().copied().collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let quarters = history.quarterly();
    let window = match config.fit_window {
        Some(w) => w,
        None => match (quarters.first(), quarters.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => return Err(Error::Series("default history covers no full quarter".into())),
        },
    };
    let ranking = rank_predictors(history, &repaired, window);
    let best = ranking.fits.first().ok_or_else(|| Error::Series("no usable predictor series".into()))?;
    let series = repaired.iter().find(|s| s.name == best.predictor).expect("ranked series exists");
    let forecast = forecast_default(&config.scenario, best, series, history)?;
    let (shift, adjusted) = if config.per_month {
        shift_scores_by_month(scores, months, &forecast.target_by_month())?
    } else {
        shift_scores(scores, forecast.mean())?
    };
    let distance = observed.map(|o| distance_d(&forecast.rates, o)).transpose()?;
    Ok(StageTwoReport { ranking, forecast, shift, adjusted, distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate_population, PopulationSpec};

    fn population() -> Vec<Application> {
        generate_population(&PopulationSpec { n_records: 6000, months: 24, ..Default::default() }, 11).unwrap().records
    }

    fn holdout_year() -> Window {
        Window::Range { start: "2010-07-01".parse().unwrap(), end: "2010-12-31".parse().unwrap() }
    }

    #[test]
    fn stage_one_runs_and_is_deterministic() {
        let recs = population();
        let prep = prepare(&recs, &holdout_year(), &CleansingPolicy::default(), None).unwrap();
        assert_eq!(prep.modeling.len() + prep.holdout.len(), recs.len());
        let config = ModelingConfig {
            numeric: alloc::vec![attr::AGE.into(), attr::MONTHLY_INCOME.into()],
            nominal: alloc::vec![attr::OCCUPATION.into(), attr::BRANCH.into()],
            binary: alloc::vec![attr::HAS_PHONE.into()],
            interactions: alloc::vec![alloc::vec![attr::AGE.into(), attr::HAS_PHONE.into()]],
            ..Default::default()
        };
        let a = run_stage_one(&prep.modeling, &prep.holdout, &config, 5, 3).unwrap();
        let b = run_stage_one(&prep.modeling, &prep.holdout, &config, 5, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.cv.mean > 0.6, "cv {}", a.cv.mean);
        assert!(a.holdout.as_ref().unwrap().auc > 0.6);
        assert_eq!(a.holdout_scores.len(), prep.holdout.len());
    }

    #[test]
    fn strategies_train() {
        let recs = population();
        let refs: Vec<&Application> = recs.iter().collect();
        let base = ModelingConfig {
            numeric: alloc::vec![attr::AGE.into(), attr::MONTHLY_INCOME.into()],
            nominal: alloc::vec![attr::INCOME_PROOF.into()],
            binary: Vec::new(),
            ..Default::default()
        };
        for strategy in [
            TrainingStrategy::MonthlyEnsemble,
            TrainingStrategy::NoiseCleaning { posterior_threshold: 0.05 },
            TrainingStrategy::ThroughTheDoor { window: holdout_year() },
        ] {
            let f = fit_scorecard(&refs, &ModelingConfig { strategy: strategy.clone(), ..base.clone() }, 1).unwrap();
            let s = f.scorecard.score(&recs[0]).unwrap();
            assert!(s > 0.0 && s < 1.0, "{}", strategy.label());
        }
        let fwd = ModelingConfig { selection: FeatureSelection::Forward { k: 3, epsilon: 0.0 }, ..base };
        let f = fit_scorecard(&refs, &fwd, 1).unwrap();
        assert_eq!(f.report.selection_trace.len(), f.scorecard.characteristics.len());
    }

    #[test]
    fn unknown_feature_is_an_error() {
        let recs = population();
        let refs: Vec<&Application> = recs.iter().collect();
        let c = ModelingConfig::default().pinned(&[String::from("nope")]);
        assert!(matches!(fit_scorecard(&refs, &c, 1), Err(Error::InvalidConfig(_))));
    }
}
