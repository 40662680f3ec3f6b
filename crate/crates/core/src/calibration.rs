//! Stage two: relate the internal default series to an exogenous quarterly
//! series, forecast next year's monthly default under one of three
//! scenarios, and move stage-one scores onto that central tendency.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Application;
use crate::date::{Quarter, YearMonth};
use crate::error::{Error, Result};
use crate::math::{logit, mean, sigmoid, sqrt};

/// Tolerance on `|mean(adjusted) - target|` for [`shift_scores`].
pub const SHIFT_TOLERANCE: f64 = 1e-9;

/// A gap-free quarterly series with optional abnormal-observation flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroSeries {
    pub name: String,
    points: Vec<(Quarter, f64)>,
    abnormal: BTreeSet<Quarter>,
}

impl MacroSeries {
    pub fn new(name: impl Into<String>, points: Vec<(Quarter, f64)>) -> Result<Self> {
        let name = name.into();
        for w in points.windows(2) {
            if w[1].0 != w[0].0.next() {
                return Err(Error::Series(format!("`{name}`: {} does not follow {}", w[1].0, w[0].0)));
            }
        }
        if points.iter().any(|p| !p.1.is_finite()) {
            return Err(Error::Series(format!("`{name}`: non-finite value")));
        }
        Ok(Self { name, points, abnormal: BTreeSet::new() })
    }

    pub fn with_abnormal(mut self, quarters: impl IntoIterator<Item = Quarter>) -> Self {
        self.abnormal.extend(quarters);
        self
    }

    pub fn points(&self) -> &[(Quarter, f64)] {
        &self.points
    }

    pub fn abnormal(&self) -> &BTreeSet<Quarter> {
        &self.abnormal
    }

    pub fn value(&self, q: Quarter) -> Option<f64> {
        let first = self.points.first()?.0;
        let idx = (q.year - first.year) as i64 * 4 + q.quarter as i64 - first.quarter as i64;
        usize::try_from(idx).ok().and_then(|i| self.points.get(i)).map(|p| p.1)
    }
}

/// Monthly internal default rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultSeries {
    monthly: Vec<(YearMonth, f64)>,
}

impl DefaultSeries {
    pub fn new(monthly: Vec<(YearMonth, f64)>) -> Result<Self> {
        if monthly.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Series("default series months must increase".into()));
        }
        if monthly.iter().any(|m| !(0.0..=1.0).contains(&m.1)) {
            return Err(Error::Series("default rates must lie in [0, 1]".into()));
        }
        Ok(Self { monthly })
    }

    /// Realised bad rate per application month of labelled records.
    pub fn from_records(records: &[Application]) -> Result<Self> {
        let mut acc: BTreeMap<YearMonth, (u64, u64)> = BTreeMap::new();
        for r in records {
            if let Some(bad) = r.is_bad() {
                let e = acc.entry(r.date.year_month()).or_default();
                e.0 += bad as u64;
                e.1 += 1;
            }
        }
        Self::new(acc.into_iter().map(|(m, (b, n))| (m, b as f64 / n as f64)).collect())
    }

    pub fn monthly(&self) -> &[(YearMonth, f64)] {
        &self.monthly
    }

    pub fn last_month(&self) -> Option<YearMonth> {
        self.monthly.last().map(|m| m.0)
    }

    /// Unweighted mean of the three months of every fully covered quarter.
    pub fn quarterly(&self) -> Vec<(Quarter, f64)> {
        let by_month: BTreeMap<YearMonth, f64> = self.monthly.iter().copied().collect();
        let quarters: BTreeSet<Quarter> = self.monthly.iter().map(|m| m.0.quarter()).collect();
        quarters
            .into_iter()
            .filter_map(|q| {
                let ms = q.months();
                let vals: Option<Vec<f64>> = ms.iter().map(|m| by_month.get(m).copied()).collect();
                vals.map(|v| (q, (v[0] + v[1] + v[2]) / 3.0))
            })
            .collect()
    }
}

/// Single-predictor least-squares fit of default on a macro series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub predictor: String,
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
    pub r_square: f64,
    pub n_points: usize,
}

impl RegressionFit {
    /// A fit that ignores its predictor and always returns `level`.
    pub fn constant(predictor: impl Into<String>, level: f64) -> Self {
        Self { predictor: predictor.into(), slope: 0.0, intercept: level, r: 0.0, r_square: 0.0, n_points: 0 }
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// OLS of `ys` on `xs`; `None` when either side is constant.
pub fn fit_ols(predictor: &str, xs: &[f64], ys: &[f64]) -> Option<RegressionFit> {
    let n = xs.len();
    if n != ys.len() || n < 3 {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r = (sxy / sqrt(sxx * syy)).clamp(-1.0, 1.0);
    Some(RegressionFit {
        predictor: predictor.into(),
        slope,
        intercept: my - slope * mx,
        r,
        r_square: r * r,
        n_points: n,
    })
}

/// Replaces each flagged quarter by the mean of its unflagged neighbours.
pub fn repair_abnormal(series: &MacroSeries, flagged: &[Quarter]) -> Result<MacroSeries> {
    let flags: BTreeSet<Quarter> = flagged.iter().copied().collect();
    let mut points = series.points.clone();
    for p in points.iter_mut() {
        if !flags.contains(&p.0) {
            continue;
        }
        let neighbours: Vec<f64> =
            [p.0.prev(), p.0.next()].iter().filter(|q| !flags.contains(q)).filter_map(|&q| series.value(q)).collect();
        if neighbours.is_empty() {
            return Err(Error::NoNeighbours(p.0));
        }
        p.1 = mean(&neighbours);
    }
    if let Some(q) = flags.iter().find(|q| series.value(**q).is_none()) {
        return Err(Error::Series(format!("flagged quarter {q} not in `{}`", series.name)));
    }
    Ok(MacroSeries {
        name: series.name.clone(),
        points,
        abnormal: series.abnormal.difference(&flags).copied().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Fits ordered by decreasing |r|, then by name.
    pub fits: Vec<RegressionFit>,
    /// Candidates left out, with the reason.
    pub excluded: Vec<(String, String)>,
}

/// Correlates each candidate with the quarterly default series over the
/// quarters of `window` (inclusive) where both are observed.
pub fn rank_predictors(default: &DefaultSeries, candidates: &[MacroSeries], window: (Quarter, Quarter)) -> Ranking {
    let quarterly: Vec<(Quarter, f64)> =
        default.quarterly().into_iter().filter(|(q, _)| *q >= window.0 && *q <= window.1).collect();
    let mut fits = Vec::new();
    let mut excluded = Vec::new();
    for c in candidates {
        let (xs, ys): (Vec<f64>, Vec<f64>) = quarterly.iter().filter_map(|(q, d)| c.value(*q).map(|x| (x, *d))).unzip();
        if xs.len() < 3 {
            excluded.push((c.name.clone(), format!("{} overlapping quarters", xs.len())));
            continue;
        }
        match fit_ols(&c.name, &xs, &ys) {
            Some(f) => fits.push(f),
            None => excluded.push((c.name.clone(), "constant series: correlation undefined".into())),
        }
    }
    fits.sort_by(|a, b| b.r.abs().total_cmp(&a.r.abs()).then_with(|| a.predictor.cmp(&b.predictor)));
    Ranking { fits, excluded }
}

/// Forecast scenario. Variant 1 submits each quarter's estimate, variant 2
/// the mean of the estimates, variant 3 that mean with the final
/// `uplift_months` multiplied by `uplift_factor`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub variant: u8,
    pub uplift_factor: f64,
    pub uplift_months: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::average()
    }
}

impl Scenario {
    pub fn quarterly() -> Self {
        Self { variant: 1, uplift_factor: 1.01, uplift_months: 2 }
    }

    pub fn average() -> Self {
        Self { variant: 2, ..Self::quarterly() }
    }

    pub fn average_with_uplift(factor: f64, months: usize) -> Self {
        Self { variant: 3, uplift_factor: factor, uplift_months: months }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.variant) {
            return Err(Error::InvalidConfig(format!("scenario variant {} (expected 1, 2 or 3)", self.variant)));
        }
        if !(self.uplift_factor > 0.0) || self.uplift_months > 12 {
            return Err(Error::InvalidConfig("uplift factor must be > 0 and window at most 12 months".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonthlyForecast {
    pub scenario: Scenario,
    pub quarterly: Vec<(Quarter, f64)>,
    pub months: Vec<YearMonth>,
    pub rates: Vec<f64>,
}

impl MonthlyForecast {
    pub fn mean(&self) -> f64 {
        mean(&self.rates)
    }

    pub fn target_by_month(&self) -> BTreeMap<u8, f64> {
        self.months.iter().zip(&self.rates).map(|(m, r)| (m.month, *r)).collect()
    }
}

/// Twelve monthly default estimates for the calendar year after `history`.
///
/// Quarter `q` is estimated from the predictor's value in quarter `q - 1`
/// through `fit`; the slope and intercept are not refitted.
pub fn forecast_default(
    scenario: &Scenario,
    fit: &RegressionFit,
    predictor: &MacroSeries,
    history: &DefaultSeries,
) -> Result<MonthlyForecast> {
    scenario.validate()?;
    let last = history.last_month().ok_or_else(|| Error::Series("empty default history".into()))?;
    let year = last.year + 1;
    let mut quarterly = Vec::with_capacity(4);
    for q in 1..=4 {
        let quarter = Quarter::new(year, q)?;
        let x = predictor.value(quarter.prev()).ok_or(Error::MissingPredictor(quarter.prev()))?;
        let est = fit.predict(x);
        if !(est > 0.0 && est < 1.0) {
            return Err(Error::Series(format!("estimate {est} for {quarter} outside (0, 1)")));
        }
        quarterly.push((quarter, est));
    }
    expand_quarterly(scenario, quarterly)
}

/// Spreads four consecutive quarterly estimates over their twelve months
/// according to `scenario`.
pub fn expand_quarterly(scenario: &Scenario, quarterly: Vec<(Quarter, f64)>) -> Result<MonthlyForecast> {
    scenario.validate()?;
    if quarterly.len() != 4 || quarterly.windows(2).any(|w| w[1].0 != w[0].0.next()) {
        return Err(Error::Series("need four consecutive quarterly estimates".into()));
    }
    if let Some((q, e)) = quarterly.iter().find(|(_, e)| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Series(format!("estimate {e} for {q} outside (0, 1)")));
    }
    let months: Vec<YearMonth> = quarterly.iter().flat_map(|(q, _)| q.months()).collect();
    let per_quarter: Vec<f64> = quarterly.iter().flat_map(|(_, e)| [*e; 3]).collect();
    let average = mean(&per_quarter);
    let rates: Vec<f64> = match scenario.variant {
        1 => per_quarter,
        2 => alloc::vec![average; 12],
        _ => {
            let cut = 12 - scenario.uplift_months;
            (0..12).map(|m| if m < cut { average } else { average * scenario.uplift_factor }).collect()
        }
    };
    Ok(MonthlyForecast { scenario: scenario.clone(), quarterly, months, rates })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftOffset {
    /// Application month the offset applies to; `None` for a global offset.
    pub month: Option<u8>,
    pub delta: f64,
    pub target: f64,
    pub achieved: f64,
}

/// Log-odds offsets applied to raw scores.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationShift {
    pub offsets: Vec<ShiftOffset>,
}

impl CalibrationShift {
    pub fn max_error(&self) -> f64 {
        self.offsets.iter().map(|o| (o.achieved - o.target).abs()).fold(0.0, f64::max)
    }
}

fn mean_shifted(logits: &[f64], delta: f64) -> f64 {
    logits.iter().map(|l| sigmoid(l + delta)).sum::<f64>() / logits.len() as f64
}

/// The unique `delta` with `mean(sigmoid(logit + delta)) = target`, by
/// safeguarded Newton iteration inside an expanding bracket.
pub fn solve_offset(logits: &[f64], target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::TargetOutOfRange(target));
    }
    if logits.is_empty() {
        return Err(Error::InvalidInput("no scores to shift".into()));
    }
    let f = |d: f64| mean_shifted(logits, d) - target;
    let mut delta = 0.0;
    let mut fd = f(delta);
    if fd.abs() <= 1e-15 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = if fd > 0.0 { (-1.0, 0.0) } else { (0.0, 1.0) };
    while f(lo) > 0.0 {
        lo *= 2.0;
        if lo < -1e4 {
            return Err(Error::RootNotFound { lo, hi, residual: fd });
        }
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::RootNotFound { lo, hi, residual: fd });
        }
    }
    for _ in 0..200 {
        if fd.abs() <= 1e-13 || hi - lo <= 1e-15 * (1.0 + delta.abs()) {
            break;
        }
        let slope = logits.iter().map(|l| {
            let s = sigmoid(l + delta);
            s * (1.0 - s)
        });
        let slope = slope.sum::<f64>() / logits.len() as f64;
        let newton = delta - fd / slope;
        delta = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        fd = f(delta);
        if fd > 0.0 {
            hi = delta;
        } else {
            lo = delta;
        }
    }
    if fd.abs() > SHIFT_TOLERANCE {
        return Err(Error::RootNotFound { lo, hi, residual: fd });
    }
    Ok(delta)
}

fn shift(scores: &[f64], delta: f64) -> Vec<f64> {
    if delta == 0.0 {
        return scores.to_vec();
    }
    scores.iter().map(|&s| sigmoid(logit(s) + delta)).collect()
}

fn check_scores(scores: &[f64]) -> Result<()> {
    if let Some(s) = scores.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
        return Err(Error::InvalidInput(format!("score {s} outside (0, 1)")));
    }
    Ok(())
}

/// Shifts all scores by one log-odds offset so their mean equals `target`.
/// The map is strictly increasing, so ranking (and AUC) is unchanged.
pub fn shift_scores(scores: &[f64], target: f64) -> Result<(CalibrationShift, Vec<f64>)> {
    check_scores(scores)?;
    let logits: Vec<f64> = scores.iter().map(|&s| logit(s)).collect();
    let delta = solve_offset(&logits, target)?;
    let adjusted = shift(scores, delta);
    let achieved = mean(&adjusted);
    Ok((CalibrationShift { offsets: alloc::vec![ShiftOffset { month: None, delta, target, achieved }] }, adjusted))
}

/// Solves one offset per application month so that each month's mean
/// adjusted score hits that month's target.
pub fn shift_scores_by_month(
    scores: &[f64],
    months: &[u8],
    targets: &BTreeMap<u8, f64>,
) -> Result<(CalibrationShift, Vec<f64>)> {
    check_scores(scores)?;
    if scores.len() != months.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), got: months.len() });
    }
    let mut adjusted = alloc::vec![0.0; scores.len()];
    let mut offsets = Vec::new();
    let present: BTreeSet<u8> = months.iter().copied().collect();
    for m in present {
        let target = *targets.get(&m).ok_or_else(|| Error::InvalidInput(format!("no target for month {m}")))?;
        let idx: Vec<usize> = (0..scores.len()).filter(|&i| months[i] == m).collect();
        let sub: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let logits: Vec<f64> = sub.iter().map(|&s| logit(s)).collect();
        let delta = solve_offset(&logits, target)?;
        let shifted = shift(&sub, delta);
        for (k, &i) in idx.iter().enumerate() {
            adjusted[i] = shifted[k];
        }
        offsets.push(ShiftOffset { month: Some(m), delta, target, achieved: mean(&shifted) });
    }
    Ok((CalibrationShift { offsets }, adjusted))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceD {
    pub d: f64,
    /// Mean estimate lies within half and double of the mean observed rate.
    pub valid: bool,
    pub mean_estimate: f64,
    pub mean_observed: f64,
}

/// `D = sum_m (est_m - obs_m)^2 / obs_m` over twelve months.
pub fn distance_d(estimates: &[f64], observed: &[f64]) -> Result<DistanceD> {
    if estimates.len() != 12 || observed.len() != 12 {
        return Err(Error::DimensionMismatch { expected: 12, got: estimates.len().min(observed.len()) });
    }
    if let Some(m) = observed.iter().position(|&o| !(o > 0.0)) {
        return Err(Error::ZeroObserved(m + 1));
    }
    let d = estimates.iter().zip(observed).map(|(e, o)| (e - o) * (e - o) / o).sum();
    let (me, mo) = (mean(estimates), mean(observed));
    Ok(DistanceD { d, valid: me >= 0.5 * mo && me <= 2.0 * mo, mean_estimate: me, mean_observed: mo })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffResult {
    /// Indices of applications scoring strictly below the cut-off.
    pub approved: Vec<usize>,
    /// Mean adjusted score over the approved applications.
    pub expected_rate: f64,
}

pub fn apply_cutoff(adjusted: &[f64], cutoff: f64) -> Result<CutoffResult> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::InvalidInput(format!("cut-off {cutoff} outside (0, 1)")));
    }
    let approved: Vec<usize> = (0..adjusted.len()).filter(|&i| adjusted[i] < cutoff).collect();
    if approved.is_empty() {
        return Err(Error::EmptyApproval(cutoff));
    }
    let expected_rate = approved.iter().map(|&i| adjusted[i]).sum::<f64>() / approved.len() as f64;
    Ok(CutoffResult { approved, expected_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn q(y: i32, n: u8) -> Quarter {
        Quarter::new(y, n).unwrap()
    }

    fn series(vals: &[f64]) -> MacroSeries {
        let mut qq = q(2010, 1);
        let mut pts = Vec::new();
        for &v in vals {
            pts.push((qq, v));
            qq = qq.next();
        }
        MacroSeries::new("s", pts).unwrap()
    }

    #[test]
    fn repair_examples() {
        let s = series(&[2.0, 100.0, 4.0, 7.0]);
        let r = repair_abnormal(&s, &[q(2010, 2)]).unwrap();
        assert_eq!(r.value(q(2010, 2)), Some(3.0));
        assert_eq!(r.value(q(2010, 4)), Some(7.0));
        let first = repair_abnormal(&series(&[-1.0, 5.0, 6.0]), &[q(2010, 1)]).unwrap();
        assert_eq!(first.value(q(2010, 1)), Some(5.0));
        assert_eq!(repair_abnormal(&s, &[]).unwrap().points(), s.points());
        assert_eq!(repair_abnormal(&series(&[1.0]), &[q(2010, 1)]), Err(Error::NoNeighbours(q(2010, 1))));
    }

    #[test]
    fn gaps_are_rejected() {
        assert!(MacroSeries::new("g", vec![(q(2010, 1), 1.0), (q(2010, 3), 2.0)]).is_err());
    }

    #[test]
    fn quarterly_aggregation_is_mean_of_months() {
        let months: Vec<(YearMonth, f64)> =
            (1..=7).map(|m| (YearMonth::new(2010, m).unwrap(), m as f64 / 100.0)).collect();
        let d = DefaultSeries::new(months).unwrap();
        let qs = d.quarterly();
        assert_eq!(qs.len(), 2);
        assert!((qs[0].1 - 0.02).abs() < 1e-15);
        assert!((qs[1].1 - 0.05).abs() < 1e-15);
    }

    fn history() -> DefaultSeries {
        let mut m = YearMonth::new(2009, 1).unwrap();
        let mut pts = Vec::new();
        for i in 0..24 {
            pts.push((m, 0.25 + 0.001 * (i % 5) as f64));
            m = m.next();
        }
        DefaultSeries::new(pts).unwrap()
    }

    #[test]
    fn constant_fit_forecasts() {
        let fit = RegressionFit::constant("x", 0.293);
        let pred =
            MacroSeries::new("x", vec![(q(2010, 4), 1.0), (q(2011, 1), 2.0), (q(2011, 2), 3.0), (q(2011, 3), 4.0)])
                .unwrap();
        for sc in [Scenario::quarterly(), Scenario::average()] {
            let f = forecast_default(&sc, &fit, &pred, &history()).unwrap();
            assert!(f.rates.iter().all(|&r| (r - 0.293).abs() < 1e-15));
        }
        let f3 = forecast_default(&Scenario::average_with_uplift(1.01, 2), &fit, &pred, &history()).unwrap();
        assert!(f3.rates[..10].iter().all(|&r| (r - 0.293).abs() < 1e-15));
        assert!((f3.rates[10] - 0.29593).abs() < 1e-12);
        assert!((f3.rates[11] - 0.29593).abs() < 1e-12);
        assert_eq!(f3.months[0].to_string(), "2011-01");
    }

    #[test]
    fn missing_predictor_quarter() {
        let fit =
            RegressionFit { predictor: "x".into(), slope: 0.01, intercept: 0.2, r: 0.9, r_square: 0.81, n_points: 8 };
        let pred = MacroSeries::new("x", vec![(q(2010, 4), 1.0), (q(2011, 1), 2.0)]).unwrap();
        assert_eq!(
            forecast_default(&Scenario::quarterly(), &fit, &pred, &history()),
            Err(Error::MissingPredictor(q(2011, 2)))
        );
    }

    #[test]
    fn shift_identity_and_constant() {
        let scores = vec![0.1, 0.2, 0.3, 0.6];
        let target = mean(&scores);
        let (s, adj) = shift_scores(&scores, target).unwrap();
        assert!(s.offsets[0].delta.abs() < 1e-12);
        assert!(adj.iter().zip(&scores).all(|(a, b)| (a - b).abs() < 1e-12));

        let (_, adj) = shift_scores(&[0.273; 10], 0.293).unwrap();
        assert!(adj.iter().all(|&a| (a - 0.293).abs() < 1e-9));
        assert_eq!(shift_scores(&scores, 1.0), Err(Error::TargetOutOfRange(1.0)));
        assert!(shift_scores(&[0.0, 0.5], 0.3).is_err());
    }

    #[test]
    fn per_month_shift_hits_each_target() {
        let scores: Vec<f64> = (0..120).map(|i| 0.05 + 0.9 * ((i * 37) % 120) as f64 / 120.0).collect();
        let months: Vec<u8> = (0..120).map(|i| (i % 12) as u8 + 1).collect();
        let targets: BTreeMap<u8, f64> = (1..=12).map(|m| (m, 0.2 + 0.01 * m as f64)).collect();
        let (shift, adj) = shift_scores_by_month(&scores, &months, &targets).unwrap();
        assert_eq!(shift.offsets.len(), 12);
        assert!(shift.max_error() <= SHIFT_TOLERANCE);
        for m in 1..=12u8 {
            let v: Vec<f64> = (0..120).filter(|&i| months[i] == m).map(|i| adj[i]).collect();
            assert!((mean(&v) - targets[&m]).abs() <= SHIFT_TOLERANCE);
        }
    }

    #[test]
    fn distance_examples() {
        let x = [0.25; 12];
        let same = distance_d(&x, &x).unwrap();
        assert_eq!(same.d, 0.0);
        assert!(same.valid);
        let r = distance_d(&[0.30; 12], &[0.25; 12]).unwrap();
        assert!((r.d - 0.12).abs() < 1e-12);
        assert!(r.valid);
        assert!(!distance_d(&[0.6; 12], &[0.25; 12]).unwrap().valid);
        assert!(distance_d(&[0.5; 12], &[0.25; 12]).unwrap().valid);
        assert!(distance_d(&[0.125; 12], &[0.25; 12]).unwrap().valid);
        let mut zero = [0.25; 12];
        zero[4] = 0.0;
        assert_eq!(distance_d(&x, &zero), Err(Error::ZeroObserved(5)));
    }

    #[test]
    fn cutoff_examples() {
        let scores = [0.1, 0.2, 0.4, 0.8];
        let all = apply_cutoff(&scores, 0.999).unwrap();
        assert_eq!(all.approved.len(), 4);
        assert!((all.expected_rate - mean(&scores)).abs() < 1e-15);
        assert_eq!(apply_cutoff(&scores, 0.1), Err(Error::EmptyApproval(0.1)));
        assert_eq!(apply_cutoff(&scores, 0.3).unwrap().approved, vec![0, 1]);
    }

    #[test]
    fn ranking_orders_by_absolute_correlation() {
        let d = history();
        let dq = d.quarterly();
        let mut pts_a = Vec::new();
        let mut pts_c = Vec::new();
        for (qq, v) in &dq {
            pts_a.push((*qq, 3.0 * v - 1.0));
            pts_c.push((*qq, 5.0));
        }
        let noise: Vec<(Quarter, f64)> =
            dq.iter().enumerate().map(|(i, (qq, _))| (*qq, [0.3, -1.2, 0.8, 2.0, -0.1, 0.5, 1.1, -0.7][i])).collect();
        let cands = vec![
            MacroSeries::new("noise", noise).unwrap(),
            MacroSeries::new("affine", pts_a).unwrap(),
            MacroSeries::new("flat", pts_c).unwrap(),
        ];
        let rk = rank_predictors(&d, &cands, (q(2009, 1), q(2010, 4)));
        assert_eq!(rk.fits[0].predictor, "affine");
        assert!((rk.fits[0].r - 1.0).abs() < 1e-12);
        assert!((rk.fits[0].r_square - 1.0).abs() < 1e-12);
        assert_eq!(rk.excluded.len(), 1);
        for f in &rk.fits {
            assert_eq!(f.r_square, f.r * f.r);
        }
    }
}
