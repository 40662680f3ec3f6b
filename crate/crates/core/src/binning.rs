//! Supervised binning, weight of evidence, information value and
//! interaction characteristics.
//!
//! For an attribute with `g` goods and `b` bads out of `G` goods and `B`
//! bads, `WoE = ln((g/G) / (b/B))` and a characteristic's information value is
//! `IV = sum (g/G - b/B) * WoE` over its bins. Bins where one class has no
//! examples get the characteristic's count-weighted average WoE and are left
//! out of the IV sum.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Application, OTHER};
use crate::error::{Error, Result};
use crate::math::ln;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinningConfig {
    /// Number of quantile pre-bins before merging.
    pub max_pre_bins: usize,
    /// Every numeric bin must hold at least this share of the sample.
    pub min_bin_fraction: f64,
    /// Adjacent bins whose 2x2 chi-square falls below this are merged
    /// (3.841 is the 5% critical value at one degree of freedom).
    pub chi_square_threshold: f64,
    /// Keep merging until WoE is monotone in bin order.
    pub monotonic_woe: bool,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self { max_pre_bins: 20, min_bin_fraction: 0.02, chi_square_threshold: 3.841, monotonic_woe: true }
    }
}

impl BinningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_pre_bins < 2 {
            return Err(Error::InvalidConfig("max_pre_bins must be at least 2".into()));
        }
        if !(self.min_bin_fraction > 0.0 && self.min_bin_fraction < 1.0) {
            return Err(Error::InvalidConfig("min_bin_fraction must lie in (0, 1)".into()));
        }
        if !(self.chi_square_threshold >= 0.0) {
            return Err(Error::InvalidConfig("chi_square_threshold must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BinKind {
    /// Half-open numeric interval `[lo, hi)`; the outer bins extend to infinity.
    Interval { lo: f64, hi: f64 },
    /// A set of nominal tokens.
    Classes(Vec<String>),
    /// Records with no value.
    Missing,
    /// Interaction cells, each a tuple of component bin indices.
    Cells(Vec<Vec<u32>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub kind: BinKind,
    pub good: u64,
    pub bad: u64,
    pub woe: f64,
}

impl Bin {
    pub fn new(kind: BinKind, good: u64, bad: u64) -> Self {
        Self { kind, good, bad, woe: 0.0 }
    }

    pub fn count(&self) -> u64 {
        self.good + self.bad
    }

    /// WoE is defined only when both classes are present.
    pub fn has_defined_woe(&self) -> bool {
        self.good > 0 && self.bad > 0
    }
}

/// `ln((g/G)/(b/B))`, or `fallback` when the attribute lacks one of the classes.
pub fn compute_woe(good: u64, bad: u64, total_good: u64, total_bad: u64, fallback: f64) -> Result<f64> {
    if total_good == 0 || total_bad == 0 {
        return Err(Error::DegenerateSample(format!("totals G = {total_good}, B = {total_bad}")));
    }
    if good == 0 || bad == 0 {
        return Ok(fallback);
    }
    Ok(ln((good as f64 / total_good as f64) / (bad as f64 / total_bad as f64)))
}

/// Information value over the bins with a defined WoE.
pub fn compute_iv(bins: &[Bin]) -> f64 {
    let g_tot: u64 = bins.iter().map(|b| b.good).sum();
    let b_tot: u64 = bins.iter().map(|b| b.bad).sum();
    if g_tot == 0 || b_tot == 0 {
        return 0.0;
    }
    bins.iter()
        .filter(|b| b.has_defined_woe())
        .map(|b| (b.good as f64 / g_tot as f64 - b.bad as f64 / b_tot as f64) * b.woe)
        .sum()
}

/// Fills in per-bin WoE and returns `(average_woe, iv)`.
///
/// The average is the count-weighted mean of the defined WoEs; bins without
/// a defined WoE receive it.
pub fn finalize_bins(bins: &mut [Bin]) -> Result<(f64, f64)> {
    let g_tot: u64 = bins.iter().map(|b| b.good).sum();
    let b_tot: u64 = bins.iter().map(|b| b.bad).sum();
    if g_tot == 0 || b_tot == 0 {
        return Err(Error::SingleClass(format!("binning sample has G = {g_tot}, B = {b_tot}")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for b in bins.iter_mut() {
        if b.has_defined_woe() {
            b.woe = compute_woe(b.good, b.bad, g_tot, b_tot, 0.0)?;
            num += b.count() as f64 * b.woe;
            den += b.count() as f64;
        }
    }
    let average = if den > 0.0 { num / den } else { 0.0 };
    for b in bins.iter_mut() {
        if !b.has_defined_woe() {
            b.woe = average;
        }
    }
    Ok((average, compute_iv(bins)))
}

/// Pearson chi-square of the 2x2 table formed by two adjacent bins.
fn pair_chi_square(a: (u64, u64), b: (u64, u64)) -> f64 {
    let rows = [(a.0 as f64, a.1 as f64), (b.0 as f64, b.1 as f64)];
    let n = rows.iter().map(|r| r.0 + r.1).sum::<f64>();
    let col_g = rows[0].0 + rows[1].0;
    let col_b = rows[0].1 + rows[1].1;
    let mut chi = 0.0;
    for r in rows {
        let rt = r.0 + r.1;
        for (obs, ct) in [(r.0, col_g), (r.1, col_b)] {
            let e = rt * ct / n;
            if e > 0.0 {
                chi += (obs - e) * (obs - e) / e;
            }
        }
    }
    chi
}

/// WoE with infinities for single-class bins, for ordering checks.
fn raw_woe(good: u64, bad: u64, g_tot: u64, b_tot: u64) -> f64 {
    match (good, bad) {
        (0, _) => f64::NEG_INFINITY,
        (_, 0) => f64::INFINITY,
        _ => ln((good as f64 / g_tot as f64) / (bad as f64 / b_tot as f64)),
    }
}

fn is_monotone(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] <= w[1]) || xs.windows(2).all(|w| w[0] >= w[1])
}

struct Interval {
    lo: f64,
    hi: f64,
    good: u64,
    bad: u64,
}

/// Bins a numeric variable against binary labels (`true` = bad).
///
/// Quantile pre-binning into at most `max_pre_bins` intervals, then greedy
/// merging of adjacent intervals by smallest chi-square: first any interval
/// under `min_bin_fraction` (merged toward its closer neighbour), then, if
/// requested, until WoE is monotone, then while the smallest chi-square is
/// below the threshold. Missing values get their own bucket.
pub fn supervised_bin(values: &[Option<f64>], labels: &[bool], config: &BinningConfig) -> Result<Vec<Bin>> {
    config.validate()?;
    if values.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: values.len(), got: labels.len() });
    }
    let total_bad = labels.iter().filter(|&&y| y).count() as u64;
    let total_good = labels.len() as u64 - total_bad;
    if total_bad == 0 || total_good == 0 {
        return Err(Error::SingleClass("supervised_bin".into()));
    }

    let mut present: Vec<(f64, bool)> = Vec::with_capacity(values.len());
    let (mut miss_g, mut miss_b) = (0u64, 0u64);
    for (v, &y) in values.iter().zip(labels) {
        match v {
            Some(x) if !x.is_nan() => present.push((*x, y)),
            _ if y => miss_b += 1,
            _ => miss_g += 1,
        }
    }
    present.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut intervals: Vec<Interval> = Vec::new();
    if !present.is_empty() {
        let m = present.len();
        let mut cuts: Vec<f64> = Vec::new();
        for i in 1..config.max_pre_bins {
            let c = present[i * m / config.max_pre_bins].0;
            if c > present[0].0 && cuts.last().is_none_or(|&last| c > last) {
                cuts.push(c);
            }
        }
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(cuts);
        edges.push(f64::INFINITY);
        let mut k = 0;
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (mut g, mut b) = (0, 0);
            while k < m && present[k].0 < hi {
                if present[k].1 {
                    b += 1
                } else {
                    g += 1
                }
                k += 1;
            }
            intervals.push(Interval { lo, hi, good: g, bad: b });
        }
    }

    let min_count = config.min_bin_fraction * values.len() as f64;
    let merge = |ivs: &mut Vec<Interval>, i: usize| {
        let right = ivs.remove(i + 1);
        let left = &mut ivs[i];
        left.hi = right.hi;
        left.good += right.good;
        left.bad += right.bad;
    };
    while intervals.len() > 1 {
        let chi: Vec<f64> =
            intervals.windows(2).map(|w| pair_chi_square((w[0].good, w[0].bad), (w[1].good, w[1].bad))).collect();

        let smallest = intervals
            .iter()
            .enumerate()
            .filter(|(_, iv)| ((iv.good + iv.bad) as f64) < min_count)
            .min_by_key(|(_, iv)| iv.good + iv.bad)
            .map(|(i, _)| i);
        if let Some(i) = smallest {
            let pair = if i == 0 {
                0
            } else if i == intervals.len() - 1 || chi[i - 1] <= chi[i] {
                i - 1
            } else {
                i
            };
            merge(&mut intervals, pair);
            continue;
        }

        let (argmin, min_chi) =
            chi.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &c)| if c < acc.1 { (i, c) } else { acc });
        if config.monotonic_woe {
            let woes: Vec<f64> = intervals.iter().map(|iv| raw_woe(iv.good, iv.bad, total_good, total_bad)).collect();
            if !is_monotone(&woes) {
                merge(&mut intervals, argmin);
                continue;
            }
        }
        if min_chi < config.chi_square_threshold {
            merge(&mut intervals, argmin);
            continue;
        }
        break;
    }

    let mut bins: Vec<Bin> =
        intervals.into_iter().map(|iv| Bin::new(BinKind::Interval { lo: iv.lo, hi: iv.hi }, iv.good, iv.bad)).collect();
    if miss_g + miss_b > 0 {
        bins.push(Bin::new(BinKind::Missing, miss_g, miss_b));
    }
    finalize_bins(&mut bins)?;
    Ok(bins)
}

/// One bin per nominal class (sorted by token) plus a missing bucket.
pub fn nominal_bins(tokens: &[Option<&str>], labels: &[bool]) -> Result<Vec<Bin>> {
    if tokens.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: tokens.len(), got: labels.len() });
    }
    let mut classes: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    let mut missing = (0u64, 0u64);
    for (t, &y) in tokens.iter().zip(labels) {
        let slot = match t {
            Some(tok) => classes.entry(tok).or_default(),
            None => &mut missing,
        };
        if y {
            slot.1 += 1
        } else {
            slot.0 += 1
        }
    }
    let mut bins: Vec<Bin> =
        classes.into_iter().map(|(tok, (g, b))| Bin::new(BinKind::Classes(vec![tok.to_string()]), g, b)).collect();
    if missing.0 + missing.1 > 0 {
        bins.push(Bin::new(BinKind::Missing, missing.0, missing.1));
    }
    finalize_bins(&mut bins)?;
    Ok(bins)
}

/// What a characteristic is computed from.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Numeric(String),
    Nominal(String),
    Binary(String),
    Interaction(Vec<Characteristic>),
}

impl Source {
    /// Raw variables the characteristic reads.
    pub fn variables(&self) -> Vec<String> {
        match self {
            Source::Numeric(v) | Source::Nominal(v) | Source::Binary(v) => vec![v.clone()],
            Source::Interaction(parts) => parts.iter().flat_map(|p| p.source.variables()).collect(),
        }
    }
}

/// Treatment of nominal tokens that were never seen while fitting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnfamiliarCodes {
    /// Use the characteristic's average partial score.
    #[default]
    AverageWoe,
    /// Treat the token like any other rare class and use the `Other` bin
    /// (falls back to the average when there is no such bin).
    MergeToOther,
}

#[derive(Clone, Debug, PartialEq)]
enum Lookup {
    Intervals,
    Classes(BTreeMap<String, usize>),
    Cells(BTreeMap<Vec<u32>, usize>),
}

/// A binned variable with per-bin WoE.
#[derive(Clone, Debug, PartialEq)]
pub struct Characteristic {
    pub name: String,
    pub source: Source,
    pub bins: Vec<Bin>,
    pub iv: f64,
    pub average_woe: f64,
    lookup: Box<Lookup>,
    missing_bin: Option<usize>,
}

impl Characteristic {
    /// Assembles a characteristic from already-computed bins (for example
    /// when reading one back from disk). WoE, IV and average are taken as given.
    pub fn from_parts(
        name: impl Into<String>,
        source: Source,
        bins: Vec<Bin>,
        iv: f64,
        average_woe: f64,
    ) -> Result<Self> {
        let name = name.into();
        let mut missing_bin = None;
        let lookup = match &source {
            Source::Numeric(_) => {
                let mut prev = f64::NEG_INFINITY;
                for (i, b) in bins.iter().enumerate() {
                    match &b.kind {
                        BinKind::Interval { lo, hi } => {
                            if !(lo < hi) || *lo < prev {
                                return Err(Error::InvalidInput(format!(
                                    "`{name}`: intervals overlap or are unordered"
                                )));
                            }
                            prev = *hi;
                        }
                        BinKind::Missing => missing_bin = Some(i),
                        _ => return Err(Error::InvalidInput(format!("`{name}`: numeric bins must be intervals"))),
                    }
                }
                Lookup::Intervals
            }
            Source::Nominal(_) | Source::Binary(_) => {
                let mut map = BTreeMap::new();
                for (i, b) in bins.iter().enumerate() {
                    match &b.kind {
                        BinKind::Classes(toks) => {
                            for t in toks {
                                if map.insert(t.clone(), i).is_some() {
                                    return Err(Error::InvalidInput(format!("`{name}`: token `{t}` in two bins")));
                                }
                            }
                        }
                        BinKind::Missing => missing_bin = Some(i),
                        _ => return Err(Error::InvalidInput(format!("`{name}`: nominal bins must be class sets"))),
                    }
                }
                Lookup::Classes(map)
            }
            Source::Interaction(parts) => {
                if !(2..=3).contains(&parts.len()) {
                    return Err(Error::InvalidInput(format!("`{name}`: interactions take 2 or 3 components")));
                }
                let mut map = BTreeMap::new();
                for (i, b) in bins.iter().enumerate() {
                    match &b.kind {
                        BinKind::Cells(cells) => {
                            for c in cells {
                                if c.len() != parts.len() || map.insert(c.clone(), i).is_some() {
                                    return Err(Error::InvalidInput(format!("`{name}`: malformed cell {c:?}")));
                                }
                            }
                        }
                        _ => return Err(Error::InvalidInput(format!("`{name}`: interaction bins must be cells"))),
                    }
                }
                Lookup::Cells(map)
            }
        };
        Ok(Self { name, source, bins, iv, average_woe, lookup: Box::new(lookup), missing_bin })
    }

    fn from_bins(name: String, source: Source, mut bins: Vec<Bin>) -> Result<Self> {
        let (average, iv) = finalize_bins(&mut bins)?;
        Self::from_parts(name, source, bins, iv, average)
    }

    /// Fits a numeric characteristic. Records flagged invalid for the
    /// variable are left out of the fitting sample.
    pub fn fit_numeric(
        variable: &str,
        records: &[&Application],
        labels: &[bool],
        config: &BinningConfig,
    ) -> Result<Self> {
        let (vals, ys): (Vec<Option<f64>>, Vec<bool>) = records
            .iter()
            .zip(labels)
            .filter(|(r, _)| !r.is_flagged(variable))
            .map(|(r, &y)| (r.numeric(variable), y))
            .unzip();
        let bins = supervised_bin(&vals, &ys, config)?;
        Self::from_bins(variable.to_string(), Source::Numeric(variable.to_string()), bins)
    }

    pub fn fit_nominal(variable: &str, records: &[&Application], labels: &[bool]) -> Result<Self> {
        let (toks, ys): (Vec<Option<&str>>, Vec<bool>) = records
            .iter()
            .zip(labels)
            .filter(|(r, _)| !r.is_flagged(variable))
            .map(|(r, &y)| (r.nominal(variable), y))
            .unzip();
        let bins = nominal_bins(&toks, &ys)?;
        Self::from_bins(variable.to_string(), Source::Nominal(variable.to_string()), bins)
    }

    pub fn fit_binary(variable: &str, records: &[&Application], labels: &[bool]) -> Result<Self> {
        let (toks, ys): (Vec<Option<&str>>, Vec<bool>) =
            records.iter().zip(labels).map(|(r, &y)| (r.binary(variable).map(binary_token), y)).unzip();
        let bins = nominal_bins(&toks, &ys)?;
        Self::from_bins(variable.to_string(), Source::Binary(variable.to_string()), bins)
    }

    pub fn total_good(&self) -> u64 {
        self.bins.iter().map(|b| b.good).sum()
    }

    pub fn total_bad(&self) -> u64 {
        self.bins.iter().map(|b| b.bad).sum()
    }

    /// Component characteristics of an interaction (empty otherwise).
    pub fn components(&self) -> &[Characteristic] {
        match &self.source {
            Source::Interaction(parts) => parts,
            _ => &[],
        }
    }

    /// Bin the record falls into, if any. `None` means the record is encoded
    /// with the average WoE: flagged or non-numeric values, missing values
    /// without a missing bucket, unfamiliar tokens, unpopulated cells.
    pub fn bin_index(&self, record: &Application, unfamiliar: UnfamiliarCodes) -> Option<usize> {
        match (&self.source, self.lookup.as_ref()) {
            (Source::Numeric(var), Lookup::Intervals) => {
                if record.is_flagged(var) {
                    return None;
                }
                match record.numeric(var) {
                    None => self.missing_bin,
                    Some(x) if x.is_nan() => None,
                    Some(x) => self.interval_of(x),
                }
            }
            (Source::Nominal(var), Lookup::Classes(map)) => {
                if record.is_flagged(var) {
                    return None;
                }
                match record.nominal(var) {
                    None => self.missing_bin,
                    Some(tok) => self.class_of(map, tok, unfamiliar),
                }
            }
            (Source::Binary(var), Lookup::Classes(map)) => match record.binary(var) {
                None => self.missing_bin,
                Some(v) => self.class_of(map, binary_token(v), unfamiliar),
            },
            (Source::Interaction(parts), Lookup::Cells(map)) => {
                let mut key = Vec::with_capacity(parts.len());
                for p in parts {
                    key.push(p.bin_index(record, unfamiliar)? as u32);
                }
                map.get(&key).copied()
            }
            _ => None,
        }
    }

    fn interval_of(&self, x: f64) -> Option<usize> {
        let n_iv = if self.missing_bin.is_some() { self.bins.len() - 1 } else { self.bins.len() };
        let ivs = &self.bins[..n_iv];
        let i = ivs.partition_point(|b| matches!(b.kind, BinKind::Interval { hi, .. } if hi <= x));
        match ivs.get(i).map(|b| &b.kind) {
            Some(BinKind::Interval { lo, hi }) if *lo <= x && x < *hi => Some(i),
            _ => None,
        }
    }

    fn class_of(&self, map: &BTreeMap<String, usize>, tok: &str, unfamiliar: UnfamiliarCodes) -> Option<usize> {
        match map.get(tok) {
            Some(&i) => Some(i),
            None => match unfamiliar {
                UnfamiliarCodes::AverageWoe => None,
                UnfamiliarCodes::MergeToOther => map.get(OTHER).copied(),
            },
        }
    }

    /// The record's partial score (WoE), defaulting to the average WoE.
    pub fn woe_for(&self, record: &Application, unfamiliar: UnfamiliarCodes) -> f64 {
        self.bin_index(record, unfamiliar).map_or(self.average_woe, |i| self.bins[i].woe)
    }
}

fn binary_token(v: bool) -> &'static str {
    if v {
        "1"
    } else {
        "0"
    }
}

/// Crosses two or three fitted characteristics on `records`.
///
/// Cells holding less than `min_bin_fraction` of the resolved records are
/// pooled into one catch-all bin (placed last). Records that any component
/// cannot place are left out of the fit.
pub fn build_interaction(
    components: &[&Characteristic],
    records: &[&Application],
    labels: &[bool],
    min_bin_fraction: f64,
) -> Result<Characteristic> {
    if !(2..=3).contains(&components.len()) {
        return Err(Error::InvalidInput("interactions take 2 or 3 components".into()));
    }
    let name = components.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join("*");
    let mut cells: BTreeMap<Vec<u32>, (u64, u64)> = BTreeMap::new();
    let mut resolved = 0u64;
    'rec: for (r, &y) in records.iter().zip(labels) {
        let mut key = Vec::with_capacity(components.len());
        for c in components {
            match c.bin_index(r, UnfamiliarCodes::AverageWoe) {
                Some(i) => key.push(i as u32),
                None => continue 'rec,
            }
        }
        let e = cells.entry(key).or_default();
        if y {
            e.1 += 1
        } else {
            e.0 += 1
        }
        resolved += 1;
    }
    let min_count = min_bin_fraction * resolved as f64;
    let mut bins = Vec::new();
    let mut pooled = Bin::new(BinKind::Cells(Vec::new()), 0, 0);
    for (key, (g, b)) in cells {
        if ((g + b) as f64) < min_count {
            if let BinKind::Cells(v) = &mut pooled.kind {
                v.push(key);
            }
            pooled.good += g;
            pooled.bad += b;
        } else {
            bins.push(Bin::new(BinKind::Cells(vec![key]), g, b));
        }
    }
    if pooled.count() > 0 {
        bins.push(pooled);
    }
    if bins.len() < 2 {
        return Err(Error::DegenerateInteraction(name));
    }
    let parts = components.iter().map(|c| (*c).clone()).collect();
    Characteristic::from_bins(name, Source::Interaction(parts), bins)
}

/// One WoE per characteristic, in order.
pub fn encode(record: &Application, characteristics: &[Characteristic], unfamiliar: UnfamiliarCodes) -> Vec<f64> {
    characteristics.iter().map(|c| c.woe_for(record, unfamiliar)).collect()
}
