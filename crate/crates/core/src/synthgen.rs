//! Deterministic synthetic credit applications, macro series and default
//! paths.
//!
//! Every record `i` draws from its own ChaCha8 stream `RECORD_STREAM + i`
//! under the master seed, and the per-code effect tables come from stream
//! 0, so a population can be generated in any number of index-range shards
//! and concatenated without changing a single value. Labels come from a
//! logistic model whose intercept is solved so the expected bad rate over
//! the generated covariates equals `base_rate`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::calibration::{solve_offset, DefaultSeries, MacroSeries};
use crate::dataset::{attr, Application, Label};
use crate::date::{Date, Quarter, YearMonth};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math::{exp, ln, mean, sigmoid, sqrt};
use crate::rng::SeededRng;

const WORLD_STREAM: u64 = 0;
const RECORD_STREAM: u64 = 1 << 32;
const MACRO_STREAM: u64 = 1;
const PATH_STREAM: u64 = 2;
const SAMPLE_STREAM: u64 = 3;

const STATES: [(&str, &str); 6] = [("sp", "11"), ("rj", "21"), ("mg", "31"), ("rs", "51"), ("pr", "41"), ("ba", "71")];
const STATE_WEIGHTS: [f64; 6] = [0.35, 0.2, 0.15, 0.12, 0.1, 0.08];
const MARITAL: [(&str, f64); 4] = [("single", 0.2), ("married", -0.15), ("divorced", 0.1), ("widowed", 0.0)];
const MARITAL_WEIGHTS: [f64; 4] = [0.4, 0.42, 0.12, 0.06];
const INCOME_PROOF: [(&str, f64); 3] = [("payslip", -0.2), ("tax return", 0.0), ("none", 0.35)];
const INCOME_PROOF_WEIGHTS: [f64; 3] = [0.55, 0.25, 0.2];
const HOME: [(&str, f64); 4] = [("owned", -0.2), ("rented", 0.15), ("family", 0.05), ("other", 0.1)];
const HOME_WEIGHTS: [f64; 4] = [0.45, 0.3, 0.2, 0.05];
const DUE_DAYS: [(&str, f64); 6] = [("1", 0.05), ("5", -0.05), ("10", -0.1), ("15", 0.0), ("20", 0.05), ("25", 0.1)];
const DEPENDENT_WEIGHTS: [f64; 6] = [0.35, 0.25, 0.2, 0.1, 0.06, 0.04];

/// True log-odds effects. Continuous effects are per standard deviation of
/// the (log) variable; `*_spread` is the standard deviation of per-code
/// effects; `rare_tail_effect` is added to codes whose share is below
/// `tail_share`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Effects {
    pub age: f64,
    pub income: f64,
    /// Extra log-odds for real income below `low_income_z` standard
    /// deviations from the median.
    pub low_income: f64,
    pub low_income_z: f64,
    pub time_at_address: f64,
    pub time_at_employer: f64,
    pub per_dependent: f64,
    pub per_account: f64,
    pub previous_credit: f64,
    pub has_phone: f64,
    pub works_other_state: f64,
    pub categorical: f64,
    pub occupation_spread: f64,
    pub neighborhood_spread: f64,
    pub branch_spread: f64,
    pub rare_tail_effect: f64,
    pub tail_share: f64,
}

impl Default for Effects {
    fn default() -> Self {
        Self {
            age: -0.3,
            income: -0.3,
            low_income: 1.0,
            low_income_z: -0.5,
            time_at_address: -0.2,
            time_at_employer: -0.25,
            per_dependent: 0.08,
            per_account: -0.08,
            previous_credit: -0.3,
            has_phone: -0.25,
            works_other_state: 0.15,
            categorical: 1.0,
            occupation_spread: 0.35,
            neighborhood_spread: 0.3,
            branch_spread: 0.35,
            rare_tail_effect: 1.2,
            tail_share: 0.0015,
        }
    }
}

impl Effects {
    /// No covariate carries any effect.
    pub fn none() -> Self {
        Self {
            age: 0.0,
            income: 0.0,
            low_income: 0.0,
            low_income_z: 0.0,
            time_at_address: 0.0,
            time_at_employer: 0.0,
            per_dependent: 0.0,
            per_account: 0.0,
            previous_credit: 0.0,
            has_phone: 0.0,
            works_other_state: 0.0,
            categorical: 0.0,
            occupation_spread: 0.0,
            neighborhood_spread: 0.0,
            branch_spread: 0.0,
            rare_tail_effect: 0.0,
            tail_share: 0.0,
        }
    }
}

/// Numbers of distinct codes and their Zipf exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cardinality {
    pub occupations: usize,
    pub cities_per_state: usize,
    pub neighborhoods: usize,
    pub branches: usize,
    pub zipf_exponent: f64,
}

impl Default for Cardinality {
    fn default() -> Self {
        Self { occupations: 40, cities_per_state: 4, neighborhoods: 250, branches: 120, zipf_exponent: 1.1 }
    }
}

/// Changes over time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Drift {
    /// Nominal income multiplier per elapsed year; real income, which
    /// drives risk, is unaffected.
    pub income_inflation: f64,
    /// Share of records from `new_code_start` on whose branch and
    /// neighbourhood codes never occur earlier.
    pub new_code_rate: f64,
    pub new_code_start: Option<YearMonth>,
    /// Mean age change per elapsed year.
    pub age_shift_per_year: f64,
    /// Log-odds amplitude and period of a slow default cycle.
    pub cycle_amplitude: f64,
    pub cycle_period_months: u32,
}

impl Default for Drift {
    fn default() -> Self {
        Self {
            income_inflation: 1.0,
            new_code_rate: 0.0,
            new_code_start: None,
            age_shift_per_year: 0.0,
            cycle_amplitude: 0.0,
            cycle_period_months: 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSpec {
    pub n_records: usize,
    pub start: YearMonth,
    pub months: u32,
    pub base_rate: f64,
    pub income_median: f64,
    pub income_log_sd: f64,
    pub effects: Effects,
    pub cardinality: Cardinality,
    /// Additive log-odds offset per calendar month, January first.
    pub seasonal: Vec<f64>,
    pub drift: Drift,
    /// Per-field chance of a missing cell.
    pub missing_rate: f64,
    /// Chance of an impossible age or due day.
    pub invalid_rate: f64,
    /// Chance of a raw text token with stray case and spacing.
    pub messy_text_rate: f64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            n_records: 20_000,
            start: YearMonth { year: 2009, month: 1 },
            months: 36,
            base_rate: 0.273,
            income_median: 1500.0,
            income_log_sd: 0.6,
            effects: Effects::default(),
            cardinality: Cardinality::default(),
            seasonal: vec![0.0, -0.02, -0.02, 0.0, 0.0, 0.0, 0.03, 0.05, 0.07, 0.09, 0.11, 0.13],
            drift: Drift::default(),
            missing_rate: 0.01,
            invalid_rate: 0.003,
            messy_text_rate: 0.05,
        }
    }
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.base_rate > 0.0 && self.base_rate < 1.0) {
            return bad("base rate must lie in (0, 1)");
        }
        if !(0.0..1.0).contains(&self.drift.new_code_rate) {
            return bad("new-code rate must lie in [0, 1)");
        }
        if self.n_records == 0 || self.months == 0 {
            return bad("population needs records and months");
        }
        if self.seasonal.len() != 12 {
            return bad("seasonal offsets need twelve entries");
        }
        for r in [self.missing_rate, self.invalid_rate, self.messy_text_rate] {
            if !(0.0..1.0).contains(&r) {
                return bad("rates must lie in [0, 1)");
            }
        }
        let c = &self.cardinality;
        if c.occupations == 0 || c.cities_per_state == 0 || c.neighborhoods == 0 || c.branches == 0 {
            return bad("code cardinalities must be positive");
        }
        if !(self.income_median > 0.0 && self.income_log_sd > 0.0 && self.drift.income_inflation > 0.0) {
            return bad("income parameters must be positive");
        }
        if self.drift.cycle_period_months == 0 {
            return bad("cycle period must be positive");
        }
        Ok(())
    }

    pub fn end(&self) -> YearMonth {
        let mut m = self.start;
        for _ in 1..self.months {
            m = m.next();
        }
        m
    }

    /// Multiplicative factors that undo the configured income inflation,
    /// keyed by application year.
    pub fn deflators(&self) -> BTreeMap<i32, f64> {
        (self.start.year..=self.end().year)
            .map(|y| (y, 1.0 / libm::pow(self.drift.income_inflation, (y - self.start.year) as f64)))
            .collect()
    }
}

/// Code names with Zipf shares and centred log-odds effects.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeTable {
    pub names: Vec<String>,
    pub shares: Vec<f64>,
    pub effects: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CodeTable {
    fn zipf(names: Vec<String>, exponent: f64, spread: f64, effects: &Effects, rng: &mut SeededRng) -> Self {
        let raw: Vec<f64> = (0..names.len()).map(|k| 1.0 / libm::pow(k as f64 + 1.0, exponent)).collect();
        let total: f64 = raw.iter().sum();
        let shares: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mut effect: Vec<f64> = shares
            .iter()
            .map(|&p| spread * rng.normal() + if p < effects.tail_share { effects.rare_tail_effect } else { 0.0 })
            .collect();
        let centre: f64 = effect.iter().zip(&shares).map(|(e, p)| e * p).sum();
        for e in effect.iter_mut() {
            *e -= centre;
        }
        Self::new(names, shares, effect)
    }

    fn fixed(items: &[(&str, f64)], weights: &[f64], scale: f64) -> Self {
        let total: f64 = weights.iter().sum();
        Self::new(
            items.iter().map(|i| i.0.to_string()).collect(),
            weights.iter().map(|w| w / total).collect(),
            items.iter().map(|i| i.1 * scale).collect(),
        )
    }

    fn new(names: Vec<String>, shares: Vec<f64>, effects: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = shares.iter().map(|s| {
            acc += s;
            acc
        });
        Self { cumulative: cumulative.collect(), names, shares, effects }
    }

    fn draw(&self, rng: &mut SeededRng) -> usize {
        rng.categorical(&self.cumulative)
    }
}

/// Code tables shared by every record of a population.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub occupations: CodeTable,
    pub neighborhoods: CodeTable,
    pub branches: CodeTable,
    pub marital: CodeTable,
    pub income_proof: CodeTable,
    pub home: CodeTable,
    pub due_days: CodeTable,
    pub states: CodeTable,
}

impl World {
    pub fn new(spec: &PopulationSpec, seed: u64) -> Self {
        let mut rng = SeededRng::with_stream(seed, WORLD_STREAM);
        let c = &spec.cardinality;
        let e = &spec.effects;
        let occupations = (1..=c.occupations).map(|k| format!("{:04}", 1000 + 7 * k)).collect();
        let neighborhoods = (1..=c.neighborhoods).map(|k| format!("bairro {k}")).collect();
        let branches = (1..=c.branches).map(|k| format!("B{k:03}")).collect();
        Self {
            occupations: CodeTable::zipf(occupations, c.zipf_exponent, e.occupation_spread, e, &mut rng),
            neighborhoods: CodeTable::zipf(neighborhoods, c.zipf_exponent, e.neighborhood_spread, e, &mut rng),
            branches: CodeTable::zipf(branches, c.zipf_exponent, e.branch_spread, e, &mut rng),
            marital: CodeTable::fixed(&MARITAL, &MARITAL_WEIGHTS, e.categorical),
            income_proof: CodeTable::fixed(&INCOME_PROOF, &INCOME_PROOF_WEIGHTS, e.categorical),
            home: CodeTable::fixed(&HOME, &HOME_WEIGHTS, e.categorical),
            due_days: CodeTable::fixed(&DUE_DAYS, &[1.0; 6], e.categorical),
            states: CodeTable::fixed(&STATES.map(|s| (s.0, 0.0)), &STATE_WEIGHTS, 0.0),
        }
    }
}

/// An unlabelled record with its covariate log-odds and label uniform.
#[derive(Clone, Debug, PartialEq)]
pub struct Draft {
    pub record: Application,
    pub log_odds: f64,
    pub uniform: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub records: Vec<Application>,
    /// True log-odds of default per record, intercept included.
    pub true_log_odds: Vec<f64>,
    pub intercept: f64,
}

fn messy(token: &str, rng: &mut SeededRng, rate: f64) -> String {
    if rng.bernoulli(rate) {
        format!("  {}  ", token.to_uppercase().replace(' ', "   "))
    } else {
        token.to_string()
    }
}

fn month_at(start: YearMonth, offset: u32) -> YearMonth {
    let mut m = start;
    for _ in 0..offset {
        m = m.next();
    }
    m
}

/// Generates the unlabelled drafts for record indices `range`.
pub fn draft_shard(spec: &PopulationSpec, world: &World, seed: u64, range: Range<usize>) -> Vec<Draft> {
    let e = &spec.effects;
    let d = &spec.drift;
    range
        .map(|i| {
            let mut rng = SeededRng::with_stream(seed, RECORD_STREAM + i as u64);
            let offset = ((i as u64 * spec.months as u64) / spec.n_records as u64) as u32;
            let ym = month_at(spec.start, offset);
            let years = (ym.year - spec.start.year) as f64;
            let date = Date::new(ym.year, ym.month, 1 + rng.below(28) as u8).expect("day 1..=28 is valid");
            let mut r = Application::new(format!("A{:07}", i + 1), date);
            let mut eta = spec.seasonal[ym.month as usize - 1];
            if d.cycle_amplitude != 0.0 {
                let phase = 2.0 * core::f64::consts::PI * offset as f64 / d.cycle_period_months as f64;
                eta += d.cycle_amplitude * libm::sin(phase);
            }

            let age_z = rng.normal();
            let age = libm::round(38.0 + d.age_shift_per_year * years + 11.0 * age_z).clamp(18.0, 85.0);
            eta += e.age * (age - 38.0) / 11.0;
            let income_z = rng.normal();
            let real_income = exp(ln(spec.income_median) + spec.income_log_sd * income_z);
            eta += e.income * income_z;
            if income_z < e.low_income_z {
                eta += e.low_income;
            }
            let nominal_income = libm::round(real_income * libm::pow(d.income_inflation, years) * 100.0) / 100.0;
            let addr_z = rng.normal();
            eta += e.time_at_address * addr_z;
            let employer_z = rng.normal();
            eta += e.time_at_employer * employer_z;
            let dependents = rng.categorical(&cumulative(&DEPENDENT_WEIGHTS)) as f64;
            eta += e.per_dependent * dependents;
            let accounts = rng.below(6) as f64;
            eta += e.per_account * accounts;

            let pick = |table: &CodeTable, eta: &mut f64, rng: &mut SeededRng| {
                let k = table.draw(rng);
                *eta += table.effects[k];
                k
            };
            let occupation = pick(&world.occupations, &mut eta, &mut rng);
            let marital = pick(&world.marital, &mut eta, &mut rng);
            let proof = pick(&world.income_proof, &mut eta, &mut rng);
            let home = pick(&world.home, &mut eta, &mut rng);
            let due = pick(&world.due_days, &mut eta, &mut rng);
            let state = pick(&world.states, &mut eta, &mut rng);
            let city = rng.below(spec.cardinality.cities_per_state as u64);
            let neighborhood_k = pick(&world.neighborhoods, &mut eta, &mut rng);
            let branch_k = pick(&world.branches, &mut eta, &mut rng);
            let injected = d.new_code_start.is_some_and(|s| ym >= s) && rng.bernoulli(d.new_code_rate);
            let (neighborhood, branch) = if injected {
                // Fresh codes carry the population-average (zero) effect.
                eta -= world.neighborhoods.effects[neighborhood_k] + world.branches.effects[branch_k];
                (format!("bairro novo {}", rng.below(20)), format!("N{:03}", rng.below(20)))
            } else {
                (world.neighborhoods.names[neighborhood_k].clone(), world.branches.names[branch_k].clone())
            };

            let previous_credit = rng.bernoulli(0.4);
            eta += if previous_credit { e.previous_credit } else { 0.0 };
            let same_state = rng.bernoulli(0.9);
            eta += if same_state { 0.0 } else { e.works_other_state };
            let has_phone = rng.bernoulli(0.8);
            eta += if has_phone { e.has_phone } else { 0.0 };
            let gender = rng.bernoulli(0.5);

            let invalid_age = rng.bernoulli(spec.invalid_rate);
            let invalid_due = rng.bernoulli(spec.invalid_rate);
            let mut miss = || rng.bernoulli(spec.missing_rate);
            let (m_income, m_employer, m_home, m_phone) = (miss(), miss(), miss(), miss());

            let num = |v: f64, missing: bool| if missing { None } else { Some(v) };
            r.numeric.insert(attr::AGE.into(), Some(if invalid_age { 988.0 } else { age }));
            r.numeric.insert(attr::MONTHLY_INCOME.into(), num(nominal_income, m_income));
            r.numeric.insert(attr::TIME_AT_ADDRESS.into(), Some(libm::round(exp(3.5 + 0.9 * addr_z)).min(600.0)));
            r.numeric.insert(
                attr::TIME_AT_EMPLOYER.into(),
                num(libm::round(exp(3.2 + 0.9 * employer_z)).min(480.0), m_employer),
            );
            r.numeric.insert(attr::N_DEPENDENTS.into(), Some(dependents));
            r.numeric.insert(attr::N_ACCOUNTS.into(), Some(accounts));

            let (state_code, dialing) = STATES[state];
            let zip = format!("{:03}{:02}", 100 + (i * 7919 + city as usize * 31) % 800, rng.below(100));
            let rate = spec.messy_text_rate;
            let mut nominal = |k: &str, v: Option<String>| {
                r.nominal.insert(k.into(), v);
            };
            nominal(attr::ZIP_CODE, Some(zip));
            nominal(attr::STATE, Some(messy(state_code, &mut rng, rate)));
            nominal(attr::CITY, Some(messy(&format!("cidade {state_code} {}", city + 1), &mut rng, rate)));
            nominal(attr::NEIGHBORHOOD, Some(messy(&neighborhood, &mut rng, rate)));
            nominal(attr::MARITAL_STATUS, Some(world.marital.names[marital].clone()));
            nominal(attr::OCCUPATION, Some(world.occupations.names[occupation].clone()));
            nominal(attr::INCOME_PROOF, Some(world.income_proof.names[proof].clone()));
            nominal(attr::DUE_DAY, Some(if invalid_due { "35".into() } else { world.due_days.names[due].clone() }));
            nominal(attr::HOME_TYPE, if m_home { None } else { Some(world.home.names[home].clone()) });
            nominal(attr::DIALING_CODE, Some(dialing.into()));
            nominal(attr::BRANCH, Some(branch));

            r.binary.insert(attr::PREVIOUS_CREDIT.into(), Some(previous_credit));
            r.binary.insert(attr::SAME_STATE.into(), Some(same_state));
            r.binary.insert(attr::HAS_PHONE.into(), if m_phone { None } else { Some(has_phone) });
            r.binary.insert(attr::GENDER.into(), Some(gender));

            Draft { record: r, log_odds: eta, uniform: rng.uniform() }
        })
        .collect()
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Solves the intercept for `base_rate` and draws every label.
pub fn label_drafts(drafts: Vec<Draft>, base_rate: f64) -> Result<Population> {
    let eta: Vec<f64> = drafts.iter().map(|d| d.log_odds).collect();
    let intercept = solve_offset(&eta, base_rate)?;
    let mut records = Vec::with_capacity(drafts.len());
    let mut true_log_odds = Vec::with_capacity(drafts.len());
    for d in drafts {
        let z = d.log_odds + intercept;
        let mut r = d.record;
        r.label = Some(Label::from_bad(d.uniform < sigmoid(z)));
        records.push(r);
        true_log_odds.push(z);
    }
    Ok(Population { records, true_log_odds, intercept })
}

pub fn generate_population(spec: &PopulationSpec, seed: u64) -> Result<Population> {
    spec.validate()?;
    let world = World::new(spec, seed);
    label_drafts(draft_shard(spec, &world, seed, 0..spec.n_records), spec.base_rate)
}

/// `n` rows of independent standard-normal features with labels drawn
/// from `sigmoid(intercept + x . coefficients)`.
pub fn generate_logistic_sample(
    n: usize,
    coefficients: &[f64],
    intercept: f64,
    seed: u64,
) -> Result<(Matrix, Vec<bool>)> {
    let mut rng = SeededRng::with_stream(seed, SAMPLE_STREAM);
    let p = coefficients.len();
    let mut data = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut z = intercept;
        for c in coefficients {
            let v = rng.normal();
            z += c * v;
            data.push(v);
        }
        y.push(rng.uniform() < sigmoid(z));
    }
    Ok((Matrix::new(n, (0..p).map(|j| format!("x{j}")).collect(), data)?, y))
}

/// How an exogenous series tracks the quarterly default series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroSpec {
    pub name: String,
    pub offset: f64,
    pub loading: f64,
    /// Standard deviation of added noise when no correlation is targeted.
    pub noise_scale: f64,
    /// When set, the noise is rescaled so the sample correlation with the
    /// default series equals this value exactly (sign taken with `loading`).
    pub target_correlation: Option<f64>,
}

impl Default for MacroSpec {
    fn default() -> Self {
        Self {
            name: "card_default".into(),
            offset: 2.0,
            loading: 20.0,
            noise_scale: 0.0,
            target_correlation: Some(0.8),
        }
    }
}

/// Exogenous series over the quarters of `default`.
pub fn generate_macro(spec: &MacroSpec, default: &[(Quarter, f64)], seed: u64) -> Result<MacroSeries> {
    let infeasible = |m: &str| Err(Error::InfeasibleMacro(m.to_string()));
    let n = default.len();
    if n < 3 {
        return infeasible("need at least three quarters");
    }
    if spec.loading == 0.0 && (spec.noise_scale == 0.0 || spec.target_correlation.is_some()) {
        return infeasible("zero loading gives a series unrelated to default");
    }
    let d: Vec<f64> = default.iter().map(|p| p.1).collect();
    let md = mean(&d);
    let centred: Vec<f64> = d.iter().map(|v| v - md).collect();
    let norm = sqrt(centred.iter().map(|v| v * v).sum());
    let mut rng = SeededRng::with_stream(seed, MACRO_STREAM);
    let noise: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let values: Vec<f64> = match spec.target_correlation {
        None => {
            if spec.noise_scale < 0.0 {
                return infeasible("negative noise scale");
            }
            d.iter().zip(&noise).map(|(v, z)| spec.offset + spec.loading * v + spec.noise_scale * z).collect()
        }
        Some(r) => {
            if !(-1.0..=1.0).contains(&r) {
                return infeasible("target correlation outside [-1, 1]");
            }
            if norm == 0.0 {
                return infeasible("constant default series");
            }
            let u: Vec<f64> = centred.iter().map(|v| v / norm).collect();
            let mz = mean(&noise);
            let mut e: Vec<f64> = noise.iter().map(|z| z - mz).collect();
            let proj: f64 = e.iter().zip(&u).map(|(a, b)| a * b).sum();
            for (ei, ui) in e.iter_mut().zip(&u) {
                *ei -= proj * ui;
            }
            let en = sqrt(e.iter().map(|v| v * v).sum());
            if en == 0.0 && r.abs() < 1.0 {
                return infeasible("noise collinear with the default series");
            }
            let s = r.signum() * spec.loading.signum();
            let k = sqrt(1.0 - r * r);
            (0..n)
                .map(|i| {
                    let noise_part = if en == 0.0 { 0.0 } else { k * e[i] / en };
                    spec.offset + spec.loading.abs() * norm * (s * r.abs() * u[i] + noise_part)
                })
                .collect()
        }
    };
    MacroSeries::new(spec.name.clone(), default.iter().map(|p| p.0).zip(values).collect())
}

/// A default path with a flat level plus quarter-level and month-level
/// noise, and an optional genuine uplift in November and December.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefaultPathSpec {
    pub start_year: i32,
    pub history_years: u32,
    pub level: f64,
    pub quarterly_noise: f64,
    pub monthly_noise: f64,
    pub year_end_uplift: f64,
}

impl Default for DefaultPathSpec {
    fn default() -> Self {
        Self {
            start_year: 2009,
            history_years: 3,
            level: 0.273,
            quarterly_noise: 0.012,
            monthly_noise: 0.004,
            year_end_uplift: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefaultPath {
    pub history: DefaultSeries,
    /// The twelve realised months of the year after the history.
    pub future: Vec<f64>,
    /// Quarterly means over history and future, for macro generation.
    pub quarterly: Vec<(Quarter, f64)>,
}

pub fn generate_default_path(spec: &DefaultPathSpec, seed: u64) -> Result<DefaultPath> {
    if spec.history_years == 0 || !(spec.level > 0.0 && spec.level < 1.0) || !(spec.year_end_uplift > 0.0) {
        return Err(Error::InvalidConfig("default path needs history and a level in (0, 1)".into()));
    }
    let mut rng = SeededRng::with_stream(seed, PATH_STREAM);
    let mut months = Vec::new();
    for y in 0..=spec.history_years as i32 {
        for q in 0..4u8 {
            let shock = spec.quarterly_noise * rng.normal();
            for k in 1..=3u8 {
                let month = q * 3 + k;
                let uplift = if month >= 11 { spec.year_end_uplift } else { 1.0 };
                let v = (spec.level + shock + spec.monthly_noise * rng.normal()) * uplift;
                months.push((YearMonth::new(spec.start_year + y, month)?, v.clamp(1e-4, 1.0 - 1e-4)));
            }
        }
    }
    let split = 12 * spec.history_years as usize;
    let full = DefaultSeries::new(months.clone())?;
    let future = months[split..].iter().map(|m| m.1).collect();
    Ok(DefaultPath { history: DefaultSeries::new(months[..split].to_vec())?, future, quarterly: full.quarterly() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PopulationSpec {
        PopulationSpec { n_records: 3000, ..Default::default() }
    }

    #[test]
    fn same_seed_same_population() {
        let a = generate_population(&small(), 7).unwrap();
        let b = generate_population(&small(), 7).unwrap();
        assert_eq!(a, b);
        let c = generate_population(&small(), 8).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn shards_concatenate_to_the_whole() {
        let spec = small();
        let world = World::new(&spec, 3);
        let whole = draft_shard(&spec, &world, 3, 0..spec.n_records);
        let mut parts = draft_shard(&spec, &world, 3, 0..1234);
        parts.extend(draft_shard(&spec, &world, 3, 1234..2000));
        parts.extend(draft_shard(&spec, &world, 3, 2000..spec.n_records));
        assert_eq!(whole, parts);
    }

    #[test]
    fn records_conform_to_schema() {
        let schema = crate::dataset::Schema::credit_applications();
        let p = generate_population(&small(), 1).unwrap();
        assert!(p.records.iter().all(|r| r.conforms_to(&schema)));
        assert_eq!(p.records.last().unwrap().date.year_month(), small().end());
    }

    #[test]
    fn deflators_invert_inflation() {
        let mut spec = small();
        spec.drift.income_inflation = 1.25;
        let d = spec.deflators();
        assert_eq!(d.len(), 3);
        assert_eq!(d[&2009], 1.0);
        assert!((d[&2011] - 0.64).abs() < 1e-15);
    }

    #[test]
    fn macro_without_noise_is_affine() {
        let q0 = Quarter::new(2009, 1).unwrap();
        let mut q = q0;
        let mut pts = Vec::new();
        for v in [0.2, 0.25, 0.22, 0.3, 0.27, 0.24, 0.26, 0.29] {
            pts.push((q, v));
            q = q.next();
        }
        let spec = MacroSpec { noise_scale: 0.0, target_correlation: None, ..Default::default() };
        let m = generate_macro(&spec, &pts, 1).unwrap();
        for (p, d) in m.points().iter().zip(&pts) {
            assert!((p.1 - (2.0 + 20.0 * d.1)).abs() < 1e-12);
        }
        let exact =
            generate_macro(&MacroSpec { target_correlation: Some(0.8), ..Default::default() }, &pts, 5).unwrap();
        let xs: Vec<f64> = exact.points().iter().map(|p| p.1).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let fit = crate::calibration::fit_ols("m", &xs, &ys).unwrap();
        assert!((fit.r - 0.8).abs() < 1e-9);
        assert!(generate_macro(&MacroSpec { target_correlation: Some(1.5), ..Default::default() }, &pts, 1).is_err());
        assert!(generate_macro(&spec, &pts[..2], 1).is_err());
    }

    #[test]
    fn default_path_shape() {
        let p = generate_default_path(&DefaultPathSpec::default(), 4).unwrap();
        assert_eq!(p.history.monthly().len(), 36);
        assert_eq!(p.future.len(), 12);
        assert_eq!(p.quarterly.len(), 16);
    }
}
