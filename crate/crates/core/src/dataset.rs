//! Credit applications, cleansing, income adjustment and temporal windows.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::date::Date;
use crate::error::{Error, Result};

/// Attribute names used by the default schema and by the cleansing rules.
pub mod attr {
    pub const AGE: &str = "age";
    pub const MONTHLY_INCOME: &str = "monthly_income";
    pub const INCOME_ADJUSTED: &str = "income_adjusted";
    pub const TIME_AT_ADDRESS: &str = "time_at_address";
    pub const TIME_AT_EMPLOYER: &str = "time_at_employer";
    pub const N_DEPENDENTS: &str = "n_dependents";
    pub const N_ACCOUNTS: &str = "n_accounts";

    pub const ZIP_CODE: &str = "zip_code";
    pub const STATE: &str = "state";
    pub const CITY: &str = "city";
    pub const NEIGHBORHOOD: &str = "neighborhood";
    pub const GEOGRAPHY: &str = "geography";
    pub const MARITAL_STATUS: &str = "marital_status";
    pub const OCCUPATION: &str = "occupation_code";
    pub const INCOME_PROOF: &str = "income_proof_type";
    pub const DUE_DAY: &str = "due_day";
    pub const HOME_TYPE: &str = "home_type";
    pub const DIALING_CODE: &str = "dialing_code";
    pub const BRANCH: &str = "branch_code";

    pub const PREVIOUS_CREDIT: &str = "previous_credit";
    pub const SAME_STATE: &str = "lives_works_same_state";
    pub const HAS_PHONE: &str = "has_phone";
    pub const GENDER: &str = "gender";
}

/// Class that rare nominal values are merged into.
pub const OTHER: &str = "Other";
/// Separator of the concatenated geography characteristic; stripped from raw tokens.
pub const GEO_SEPARATOR: char = '|';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Good,
    Bad,
}

impl Label {
    pub fn is_bad(self) -> bool {
        matches!(self, Label::Bad)
    }

    pub fn from_bad(bad: bool) -> Self {
        if bad {
            Label::Bad
        } else {
            Label::Good
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttrKind {
    Numeric,
    Nominal,
    Binary,
}

/// Attribute names of a dataset, by kind. Column order on disk is
/// `id, application_date, numeric.., nominal.., binary.., label`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub numeric: Vec<String>,
    pub nominal: Vec<String>,
    pub binary: Vec<String>,
}

impl Schema {
    pub const ID: &'static str = "id";
    pub const DATE: &'static str = "application_date";
    pub const LABEL: &'static str = "label";

    /// The application layout produced by the synthetic generator.
    pub fn credit_applications() -> Self {
        use attr::*;
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect();
        Schema {
            numeric: s(&[AGE, MONTHLY_INCOME, TIME_AT_ADDRESS, TIME_AT_EMPLOYER, N_DEPENDENTS, N_ACCOUNTS]),
            nominal: s(&[
                ZIP_CODE,
                STATE,
                CITY,
                NEIGHBORHOOD,
                MARITAL_STATUS,
                OCCUPATION,
                INCOME_PROOF,
                DUE_DAY,
                HOME_TYPE,
                DIALING_CODE,
                BRANCH,
            ]),
            binary: s(&[PREVIOUS_CREDIT, SAME_STATE, HAS_PHONE, GENDER]),
        }
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols = Vec::with_capacity(3 + self.numeric.len() + self.nominal.len() + self.binary.len());
        cols.push(Self::ID.to_string());
        cols.push(Self::DATE.to_string());
        cols.extend(self.numeric.iter().cloned());
        cols.extend(self.nominal.iter().cloned());
        cols.extend(self.binary.iter().cloned());
        cols.push(Self::LABEL.to_string());
        cols
    }

    pub fn kind_of(&self, name: &str) -> Option<AttrKind> {
        if self.numeric.iter().any(|n| n == name) {
            Some(AttrKind::Numeric)
        } else if self.nominal.iter().any(|n| n == name) {
            Some(AttrKind::Nominal)
        } else if self.binary.iter().any(|n| n == name) {
            Some(AttrKind::Binary)
        } else {
            None
        }
    }

    pub fn add_numeric(&mut self, name: &str) {
        if self.kind_of(name).is_none() {
            self.numeric.push(name.to_string());
        }
    }

    pub fn add_nominal(&mut self, name: &str) {
        if self.kind_of(name).is_none() {
            self.nominal.push(name.to_string());
        }
    }
}

/// One credit application.
///
/// `flagged` holds the attributes whose raw value failed a validity range
/// during cleansing; their value is stored as missing and they are encoded
/// with the characteristic's average WoE rather than a missing bucket.
#[derive(Clone, Debug, PartialEq)]
pub struct Application {
    pub id: String,
    pub date: Date,
    pub numeric: BTreeMap<String, Option<f64>>,
    pub nominal: BTreeMap<String, Option<String>>,
    pub binary: BTreeMap<String, Option<bool>>,
    pub label: Option<Label>,
    pub flagged: BTreeSet<String>,
}

impl Application {
    pub fn new(id: impl Into<String>, date: Date) -> Self {
        Self {
            id: id.into(),
            date,
            numeric: BTreeMap::new(),
            nominal: BTreeMap::new(),
            binary: BTreeMap::new(),
            label: None,
            flagged: BTreeSet::new(),
        }
    }

    pub fn numeric(&self, name: &str) -> Option<f64> {
        self.numeric.get(name).copied().flatten()
    }

    pub fn nominal(&self, name: &str) -> Option<&str> {
        self.nominal.get(name).and_then(|v| v.as_deref())
    }

    pub fn binary(&self, name: &str) -> Option<bool> {
        self.binary.get(name).copied().flatten()
    }

    pub fn is_flagged(&self, name: &str) -> bool {
        self.flagged.contains(name)
    }

    pub fn is_bad(&self) -> Option<bool> {
        self.label.map(Label::is_bad)
    }

    /// Checks that the attribute names match `schema` exactly.
    pub fn conforms_to(&self, schema: &Schema) -> bool {
        self.numeric.keys().eq(sorted(&schema.numeric).iter().copied())
            && self.nominal.keys().eq(sorted(&schema.nominal).iter().copied())
            && self.binary.keys().eq(sorted(&schema.binary).iter().copied())
    }
}

fn sorted(names: &[String]) -> Vec<&String> {
    let mut v: Vec<&String> = names.iter().collect();
    v.sort();
    v.dedup();
    v
}

/// Labels of a fully labelled record set (`true` = bad).
pub fn labels(records: &[Application]) -> Result<Vec<bool>> {
    records
        .iter()
        .map(|r| r.is_bad().ok_or_else(|| Error::InvalidInput(alloc::format!("record `{}` has no label", r.id))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleansingPolicy {
    /// Inclusive valid age range in years.
    pub age_valid_range: (f64, f64),
    /// Inclusive valid credit-card bill due day.
    pub due_day_valid_range: (u32, u32),
    /// Inclusive valid monthly income.
    pub income_valid_range: (f64, f64),
    /// Nominal classes with this many records or fewer become [`OTHER`].
    pub rare_class_threshold: usize,
    pub text_normalization: bool,
    /// Concatenate state, city and neighbourhood into `geography`.
    pub concatenate_geography: bool,
}

impl Default for CleansingPolicy {
    fn default() -> Self {
        Self {
            age_valid_range: (18.0, 99.0),
            due_day_valid_range: (1, 31),
            income_valid_range: (0.0, 1.0e6),
            rare_class_threshold: 100,
            text_normalization: true,
            concatenate_geography: true,
        }
    }
}

impl CleansingPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = self.age_valid_range.0 <= self.age_valid_range.1
            && self.due_day_valid_range.0 <= self.due_day_valid_range.1
            && self.income_valid_range.0 <= self.income_valid_range.1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("cleansing ranges must be non-empty".to_string()))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispositionCounts {
    pub missing: u64,
    pub out_of_range: u64,
    pub merged_to_other: u64,
    pub normalized: u64,
}

impl DispositionCounts {
    pub fn total(&self) -> u64 {
        self.missing + self.out_of_range + self.merged_to_other + self.normalized
    }
}

/// Per-variable cleansing outcome. Each value lands in at most one
/// disposition, with precedence out-of-range, missing, merged, normalised.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleansingReport {
    pub records: u64,
    pub variables: BTreeMap<String, DispositionCounts>,
}

impl CleansingReport {
    fn entry(&mut self, var: &str) -> &mut DispositionCounts {
        if !self.variables.contains_key(var) {
            self.variables.insert(var.to_string(), DispositionCounts::default());
        }
        self.variables.get_mut(var).expect("inserted")
    }

    /// Adds the counts of `other` (report of a disjoint shard).
    pub fn merge(&mut self, other: &CleansingReport) {
        self.records += other.records;
        for (k, v) in &other.variables {
            let e = self.entry(k);
            e.missing += v.missing;
            e.out_of_range += v.out_of_range;
            e.merged_to_other += v.merged_to_other;
            e.normalized += v.normalized;
        }
    }

    /// `(variable, disposition, count)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&str, &'static str, u64)> {
        let mut out = Vec::new();
        for (k, v) in &self.variables {
            out.push((k.as_str(), "missing", v.missing));
            out.push((k.as_str(), "out_of_range", v.out_of_range));
            out.push((k.as_str(), "merged_to_other", v.merged_to_other));
            out.push((k.as_str(), "normalized", v.normalized));
        }
        out
    }
}

/// Case-folds, trims, collapses internal whitespace and strips the geography
/// separator. The merge class [`OTHER`] passes through untouched.
pub fn normalize_text(raw: &str) -> String {
    if raw == OTHER {
        return raw.to_string();
    }
    let lowered: String = raw.to_lowercase().chars().filter(|&c| c != GEO_SEPARATOR).collect();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Cleansing rules fitted on a modelling sample. Rare classes are decided on
/// the fitting sample only; applying the cleanser to other records (a
/// holdout) reuses those decisions, and tokens never seen while fitting are
/// left alone so that encoding can treat them as unfamiliar codes.
#[derive(Clone, Debug, PartialEq)]
pub struct Cleanser {
    policy: CleansingPolicy,
    rare: BTreeMap<String, BTreeSet<String>>,
}

impl Cleanser {
    pub fn fit(records: &[Application], policy: &CleansingPolicy) -> Self {
        let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        let shell = Cleanser { policy: policy.clone(), rare: BTreeMap::new() };
        let normalized: Vec<Application> = records.iter().map(|r| shell.normalize_and_range(r, None)).collect();
        for r in &normalized {
            for (var, val) in &r.nominal {
                if let Some(tok) = val {
                    *counts.entry(var.clone()).or_default().entry(tok.clone()).or_default() += 1;
                }
            }
        }
        let rare_of = |c: &BTreeMap<String, usize>| -> BTreeSet<String> {
            c.iter()
                .filter(|(tok, &n)| n <= policy.rare_class_threshold && tok.as_str() != OTHER)
                .map(|(tok, _)| tok.clone())
                .collect()
        };
        let mut rare: BTreeMap<String, BTreeSet<String>> = counts
            .iter()
            .filter(|(var, _)| var.as_str() != attr::GEOGRAPHY)
            .map(|(var, c)| (var.clone(), rare_of(c)))
            .collect();

        if policy.concatenate_geography {
            let partial = Cleanser { policy: policy.clone(), rare: rare.clone() };
            let mut geo: BTreeMap<String, usize> = BTreeMap::new();
            for r in &normalized {
                if let Some(g) = partial.geography_of(r) {
                    *geo.entry(g).or_default() += 1;
                }
            }
            rare.insert(attr::GEOGRAPHY.to_string(), rare_of(&geo));
        }
        Cleanser { policy: policy.clone(), rare }
    }

    pub fn policy(&self) -> &CleansingPolicy {
        &self.policy
    }

    /// Classes merged into [`OTHER`] for `variable`.
    pub fn rare_classes(&self, variable: &str) -> Option<&BTreeSet<String>> {
        self.rare.get(variable)
    }

    pub fn apply(&self, records: &[Application]) -> (Vec<Application>, CleansingReport) {
        let mut report = CleansingReport::default();
        let out = records.iter().map(|r| self.apply_one(r, &mut report)).collect();
        (out, report)
    }

    pub fn apply_one(&self, record: &Application, report: &mut CleansingReport) -> Application {
        report.records += 1;
        let mut r = self.normalize_and_range(record, Some(report));
        for (var, val) in r.nominal.iter_mut() {
            if var == attr::GEOGRAPHY {
                continue;
            }
            if let Some(tok) = val {
                if self.rare.get(var).is_some_and(|s| s.contains(tok.as_str())) {
                    *tok = OTHER.to_string();
                    report.entry(var).merged_to_other += 1;
                    continue;
                }
            }
            let e = report.entry(var);
            if val.is_none() && !r.flagged.contains(var) {
                e.missing += 1;
            }
        }
        // normalisation counts were provisional; values merged above must not count twice
        for (var, val) in &r.nominal {
            let raw = record.nominal(var);
            if let (Some(tok), Some(raw)) = (val.as_deref(), raw) {
                if tok != OTHER && tok != raw && var != attr::GEOGRAPHY {
                    report.entry(var).normalized += 1;
                }
            }
        }
        for (var, val) in &r.numeric {
            if val.is_none() && !r.flagged.contains(var) {
                report.entry(var).missing += 1;
            }
        }
        for (var, val) in &r.binary {
            if val.is_none() {
                report.entry(var).missing += 1;
            }
        }

        if self.policy.concatenate_geography {
            let geo = self.geography_of(&r).map(|g| {
                if self.rare.get(attr::GEOGRAPHY).is_some_and(|s| s.contains(&g)) {
                    report.entry(attr::GEOGRAPHY).merged_to_other += 1;
                    OTHER.to_string()
                } else {
                    g
                }
            });
            if geo.is_none() {
                report.entry(attr::GEOGRAPHY).missing += 1;
            }
            r.nominal.insert(attr::GEOGRAPHY.to_string(), geo);
        }
        r
    }

    fn geography_of(&self, r: &Application) -> Option<String> {
        let part = |var: &str| -> Option<String> {
            let tok = r.nominal(var)?;
            if self.rare.get(var).is_some_and(|s| s.contains(tok)) {
                Some(OTHER.to_string())
            } else {
                Some(tok.to_string())
            }
        };
        let (s, c, n) = (part(attr::STATE)?, part(attr::CITY)?, part(attr::NEIGHBORHOOD)?);
        let mut g = s;
        g.push(GEO_SEPARATOR);
        g.push_str(&c);
        g.push(GEO_SEPARATOR);
        g.push_str(&n);
        Some(g)
    }

    /// Text normalisation and range flagging; counts out-of-range values.
    fn normalize_and_range(&self, record: &Application, mut report: Option<&mut CleansingReport>) -> Application {
        let p = &self.policy;
        let mut r = record.clone();
        let mut flag = |r: &mut Application, var: &str| {
            r.flagged.insert(var.to_string());
            if let Some(rep) = report.as_deref_mut() {
                rep.entry(var).out_of_range += 1;
            }
        };

        for (var, range) in [(attr::AGE, p.age_valid_range), (attr::MONTHLY_INCOME, p.income_valid_range)] {
            if let Some(v) = r.numeric(var) {
                if !(v >= range.0 && v <= range.1) {
                    r.numeric.insert(var.to_string(), None);
                    flag(&mut r, var);
                }
            }
        }

        if p.text_normalization {
            for (var, val) in r.nominal.iter_mut() {
                if var == attr::GEOGRAPHY {
                    continue;
                }
                if let Some(tok) = val {
                    let n = normalize_text(tok);
                    *val = if n.is_empty() { None } else { Some(n) };
                }
            }
        }

        if let Some(tok) = r.nominal(attr::DUE_DAY) {
            let (lo, hi) = p.due_day_valid_range;
            let valid = tok.trim().parse::<u32>().is_ok_and(|d| d >= lo && d <= hi);
            if !valid {
                r.nominal.insert(attr::DUE_DAY.to_string(), None);
                flag(&mut r, attr::DUE_DAY);
            }
        }
        r
    }
}

/// Fits a [`Cleanser`] on `records` and applies it to them.
pub fn cleanse(records: &[Application], policy: &CleansingPolicy) -> (Vec<Application>, CleansingReport) {
    Cleanser::fit(records, policy).apply(records)
}

/// Adds `income_adjusted = monthly_income * factor[year]`. The table holds
/// explicit multiplicative factors per application year.
pub fn adjust_income(records: &[Application], factor_by_year: &BTreeMap<i32, f64>) -> Result<Vec<Application>> {
    if let Some(y) = records.iter().map(|r| r.date.year()).find(|y| !factor_by_year.contains_key(y)) {
        let first_missing =
            records.iter().map(|r| r.date.year()).filter(|y| !factor_by_year.contains_key(y)).min().unwrap_or(y);
        return Err(Error::MissingInflationYear(first_missing));
    }
    Ok(records
        .iter()
        .map(|r| {
            let mut out = r.clone();
            let factor = factor_by_year[&r.date.year()];
            let adjusted = r.numeric(attr::MONTHLY_INCOME).map(|v| v * factor);
            out.numeric.insert(attr::INCOME_ADJUSTED.to_string(), adjusted);
            if r.is_flagged(attr::MONTHLY_INCOME) {
                out.flagged.insert(attr::INCOME_ADJUSTED.to_string());
            }
            out
        })
        .collect())
}

/// Selection of application dates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Window {
    All,
    /// Inclusive date range.
    Range {
        start: Date,
        end: Date,
    },
    /// One calendar month in every year.
    MonthOfYear {
        month: u8,
    },
}

impl Window {
    pub fn validate(&self) -> Result<()> {
        match self {
            Window::All => Ok(()),
            Window::Range { start, end } if start <= end => Ok(()),
            Window::Range { .. } => Err(Error::InvalidConfig("window start after end".to_string())),
            Window::MonthOfYear { month } if (1..=12).contains(month) => Ok(()),
            Window::MonthOfYear { month } => Err(Error::InvalidConfig(alloc::format!("month {month} not in 1..=12"))),
        }
    }

    pub fn contains(&self, date: Date) -> bool {
        match self {
            Window::All => true,
            Window::Range { start, end } => *start <= date && date <= *end,
            Window::MonthOfYear { month } => date.month() == *month,
        }
    }
}

/// Indices of records inside and outside a window.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    pub selected: Vec<usize>,
    pub rest: Vec<usize>,
}

impl Partition {
    /// An empty selection is legal but usually worth a warning.
    pub fn is_empty_selection(&self) -> bool {
        self.selected.is_empty()
    }
}

pub fn temporal_split(records: &[Application], window: &Window) -> Result<Partition> {
    window.validate()?;
    let mut p = Partition::default();
    for (i, r) in records.iter().enumerate() {
        if window.contains(r.date) {
            p.selected.push(i);
        } else {
            p.rest.push(i);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn app(i: usize, date: &str) -> Application {
        let mut a = Application::new(format!("a{i}"), date.parse().unwrap());
        a.numeric.insert(attr::AGE.into(), Some(35.0));
        a.numeric.insert(attr::MONTHLY_INCOME.into(), Some(1000.0));
        a.nominal.insert(attr::STATE.into(), Some("SP".into()));
        a.nominal.insert(attr::CITY.into(), Some("Campinas".into()));
        a.nominal.insert(attr::NEIGHBORHOOD.into(), Some("centro".into()));
        a.nominal.insert(attr::DUE_DAY.into(), Some("10".into()));
        a.label = Some(Label::Good);
        a
    }

    #[test]
    fn absurd_age_is_flagged_missing() {
        let mut a = app(0, "2009-01-05");
        a.numeric.insert(attr::AGE.into(), Some(988.0));
        let (out, rep) = cleanse(&[a], &CleansingPolicy::default());
        assert_eq!(out[0].numeric(attr::AGE), None);
        assert!(out[0].is_flagged(attr::AGE));
        assert_eq!(rep.variables[attr::AGE].out_of_range, 1);
        assert_eq!(rep.variables[attr::AGE].missing, 0);
    }

    #[test]
    fn due_day_above_31_is_flagged() {
        let mut a = app(0, "2009-01-05");
        a.nominal.insert(attr::DUE_DAY.into(), Some("35".into()));
        let (out, _) = cleanse(&[a], &CleansingPolicy { rare_class_threshold: 0, ..Default::default() });
        assert!(out[0].is_flagged(attr::DUE_DAY));
        assert_eq!(out[0].nominal(attr::DUE_DAY), None);
    }

    #[test]
    fn rare_class_boundary() {
        let mut recs = Vec::new();
        for i in 0..100 {
            let mut a = app(i, "2009-03-01");
            a.nominal.insert(attr::NEIGHBORHOOD.into(), Some("small".into()));
            recs.push(a);
        }
        for i in 100..201 {
            let mut a = app(i, "2009-03-01");
            a.nominal.insert(attr::NEIGHBORHOOD.into(), Some("large".into()));
            recs.push(a);
        }
        let (out, rep) = cleanse(&recs, &CleansingPolicy::default());
        assert_eq!(out[0].nominal(attr::NEIGHBORHOOD), Some(OTHER));
        assert_eq!(out[150].nominal(attr::NEIGHBORHOOD), Some("large"));
        assert_eq!(rep.variables[attr::NEIGHBORHOOD].merged_to_other, 100);
        assert_eq!(out[0].nominal(attr::GEOGRAPHY), Some(OTHER));
        assert_eq!(out[150].nominal(attr::GEOGRAPHY), Some("sp|campinas|large"));
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_text("  São   PAULO "), "são paulo");
        assert_eq!(normalize_text("a|b"), "ab");
        assert_eq!(normalize_text(OTHER), OTHER);
        assert_eq!(normalize_text(&normalize_text(" X  y ")), normalize_text(" X  y "));
    }

    #[test]
    fn holdout_keeps_unseen_tokens() {
        let recs: Vec<Application> = (0..5).map(|i| app(i, "2009-01-01")).collect();
        let cleanser = Cleanser::fit(&recs, &CleansingPolicy { rare_class_threshold: 2, ..Default::default() });
        let mut new = app(9, "2011-01-01");
        new.nominal.insert(attr::CITY.into(), Some("Brand New".into()));
        let out = cleanser.apply_one(&new, &mut CleansingReport::default());
        assert_eq!(out.nominal(attr::CITY), Some("brand new"));
    }

    #[test]
    fn income_adjustment() {
        let mut a = app(0, "2010-06-01");
        let mut b = app(1, "2009-06-01");
        b.numeric.insert(attr::MONTHLY_INCOME.into(), None);
        let mut factors = BTreeMap::new();
        factors.insert(2010, 1.06);
        factors.insert(2009, 1.0);
        let out = adjust_income(&[a.clone(), b.clone()], &factors).unwrap();
        assert!((out[0].numeric(attr::INCOME_ADJUSTED).unwrap() - 1060.0).abs() < 1e-9);
        assert_eq!(out[0].numeric(attr::MONTHLY_INCOME), Some(1000.0));
        assert_eq!(out[1].numeric(attr::INCOME_ADJUSTED), None);
        factors.remove(&2009);
        assert_eq!(adjust_income(&[a.clone(), b], &factors), Err(Error::MissingInflationYear(2009)));
        a.date = "2010-01-01".parse().unwrap();
        factors.insert(2010, 1.0);
        assert_eq!(adjust_income(&[a], &factors).unwrap()[0].numeric(attr::INCOME_ADJUSTED), Some(1000.0));
    }

    #[test]
    fn windows() {
        let recs: Vec<Application> = ["2009-01-15", "2009-03-02", "2010-03-30", "2010-10-01", "2010-12-31"]
            .iter()
            .enumerate()
            .map(|(i, d)| app(i, d))
            .collect();
        let all = temporal_split(&recs, &Window::All).unwrap();
        assert_eq!(all.selected.len(), 5);
        let q4 = Window::Range { start: "2010-10-01".parse().unwrap(), end: "2010-12-31".parse().unwrap() };
        assert_eq!(temporal_split(&recs, &q4).unwrap().selected, vec![3, 4]);
        let march = temporal_split(&recs, &Window::MonthOfYear { month: 3 }).unwrap();
        assert_eq!(march.selected, vec![1, 2]);
        assert_eq!(march.rest, vec![0, 3, 4]);
        let none = Window::MonthOfYear { month: 7 };
        assert!(temporal_split(&recs, &none).unwrap().is_empty_selection());
        assert!(temporal_split(&recs, &Window::MonthOfYear { month: 13 }).is_err());
    }
}
