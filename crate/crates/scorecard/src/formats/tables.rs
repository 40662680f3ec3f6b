//! Delimited report tables.
//!
//! Numbers are written in shortest round-trip form. Forecast and
//! calibration tables have one row per forecast month and end with a
//! summary comment `# mean=.. d=.. valid=..` (`na` when no observed series
//! was given).

use std::io;

use scorecard_core::calibration::{CalibrationShift, DistanceD, MonthlyForecast, RegressionFit};
use scorecard_core::date::Date;
use scorecard_core::pipeline::Evaluation;

fn summary(mean: f64, distance: Option<&DistanceD>) -> String {
    match distance {
        Some(d) => format!("# mean={mean} d={} valid={}\n", d.d, d.valid),
        None => format!("# mean={mean} d=na valid=na\n"),
    }
}

/// Columns: `month,quarter,quarterly_estimate,forecast`.
pub fn forecast_table(f: &MonthlyForecast, fit: &RegressionFit, distance: Option<&DistanceD>, delimiter: u8) -> String {
    let d = delimiter as char;
    let mut s = format!(
        "# scenario={} predictor={} slope={} intercept={} r={}\n",
        f.scenario.variant, fit.predictor, fit.slope, fit.intercept, fit.r
    );
    s.push_str(&format!("month{d}quarter{d}quarterly_estimate{d}forecast\n"));
    for (m, rate) in f.months.iter().zip(&f.rates) {
        let q = m.quarter();
        let est = f.quarterly.iter().find(|(qq, _)| *qq == q).map(|x| x.1).unwrap_or(f64::NAN);
        s.push_str(&format!("{m}{d}{q}{d}{est}{d}{rate}\n"));
    }
    s.push_str(&summary(f.mean(), distance));
    s
}

/// Columns: `month,target,delta,records,mean_raw,mean_adjusted`; the last
/// four are empty for months without scored records.
pub fn calibration_table(
    f: &MonthlyForecast,
    shift: &CalibrationShift,
    months: &[u8],
    raw: &[f64],
    adjusted: &[f64],
    distance: Option<&DistanceD>,
    delimiter: u8,
) -> String {
    let d = delimiter as char;
    let mut s = format!("month{d}target{d}delta{d}records{d}mean_raw{d}mean_adjusted\n");
    for (ym, target) in f.months.iter().zip(&f.rates) {
        let idx: Vec<usize> = (0..months.len()).filter(|&i| months[i] == ym.month).collect();
        let delta = shift.offsets.iter().find(|o| o.month.is_none() || o.month == Some(ym.month)).map(|o| o.delta);
        if idx.is_empty() {
            s.push_str(&format!("{ym}{d}{target}{d}{d}{d}{d}\n"));
            continue;
        }
        let n = idx.len() as f64;
        let mr = idx.iter().map(|&i| raw[i]).sum::<f64>() / n;
        let ma = idx.iter().map(|&i| adjusted[i]).sum::<f64>() / n;
        let delta = delta.map(|x| x.to_string()).unwrap_or_default();
        s.push_str(&format!("{ym}{d}{target}{d}{delta}{d}{}{d}{mr}{d}{ma}\n", idx.len()));
    }
    let mean_adj = if adjusted.is_empty() { f64::NAN } else { adjusted.iter().sum::<f64>() / adjusted.len() as f64 };
    s.push_str(&format!("# mean_adjusted={mean_adj} max_shift_error={}\n", shift.max_error()));
    s.push_str(&summary(f.mean(), distance));
    s
}

/// `section,name,value` rows: `cv` (k, seed, fold_i, mean, std_dev),
/// `test` and `holdout` (auc, gini), `degradation` (points) and `psi`
/// (one row per characteristic).
pub fn metrics_rows(e: &Evaluation) -> Vec<(String, String, f64)> {
    let mut rows = Vec::new();
    let mut push = |a: &str, b: &str, v: f64| rows.push((a.to_string(), b.to_string(), v));
    push("cv", "k", e.cv.k as f64);
    push("cv", "seed", e.cv.seed as f64);
    for (i, a) in e.cv.fold_auc.iter().enumerate() {
        push("cv", &format!("fold_{}", i + 1), *a);
    }
    push("cv", "mean", e.cv.mean);
    push("cv", "std_dev", e.cv.std_dev);
    push("test", "auc", e.cv.mean);
    push("test", "gini", 2.0 * e.cv.mean - 1.0);
    if let Some(h) = &e.holdout {
        push("holdout", "auc", h.auc);
        push("holdout", "gini", h.gini());
        push("holdout", "bad", h.n_pos as f64);
        push("holdout", "good", h.n_neg as f64);
    }
    if let Some(d) = e.degradation {
        push("degradation", "points", d);
    }
    if let Some(p) = &e.psi {
        for entry in &p.entries {
            push("psi", &entry.characteristic, entry.psi);
        }
    }
    rows
}

pub fn rows_table(rows: &[(String, String, f64)], delimiter: u8) -> String {
    let d = delimiter as char;
    let mut s = format!("section{d}name{d}value\n");
    for (a, b, v) in rows {
        s.push_str(&format!("{a}{d}{b}{d}{v}\n"));
    }
    s
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
}

pub fn read_rows_table<R: io::Read>(src: R, delimiter: u8) -> Result<Vec<(String, String, f64)>, TableError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).comment(Some(b'#')).from_reader(src);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let v = rec[2].parse().map_err(|_| TableError::Line { line, message: format!("bad value `{}`", &rec[2]) })?;
        out.push((rec[0].to_string(), rec[1].to_string(), v));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRow {
    pub id: String,
    pub date: Date,
    pub label: Option<bool>,
    pub score: f64,
}

/// Columns: `id,application_date,label,score`.
pub fn scores_table(rows: &[ScoreRow], delimiter: u8) -> String {
    let d = delimiter as char;
    let mut s = format!("id{d}application_date{d}label{d}score\n");
    for r in rows {
        let label = match r.label {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        s.push_str(&format!("{}{d}{}{d}{label}{d}{}\n", r.id, r.date, r.score));
    }
    s
}

pub fn read_scores<R: io::Read>(src: R, delimiter: u8) -> Result<Vec<ScoreRow>, TableError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(src);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["id", "application_date", "label", "score"] {
        return Err(TableError::Line { line: 1, message: "header must be `id,application_date,label,score`".into() });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |m: String| TableError::Line { line, message: m };
        let date = rec[1].parse().map_err(|_| err(format!("bad date `{}`", &rec[1])))?;
        let label = match &rec[2] {
            "" => None,
            "1" => Some(true),
            "0" => Some(false),
            other => return Err(err(format!("bad label `{other}`"))),
        };
        let score: f64 = rec[3].parse().map_err(|_| err(format!("bad score `{}`", &rec[3])))?;
        if !(score > 0.0 && score < 1.0) {
            return Err(err(format!("score {score} outside (0, 1)")));
        }
        out.push(ScoreRow { id: rec[0].to_string(), date, label, score });
    }
    Ok(out)
}

/// Columns: `id,application_date,score,adjusted`.
pub fn calibrated_scores_table(rows: &[ScoreRow], adjusted: &[f64], delimiter: u8) -> String {
    let d = delimiter as char;
    let mut s = format!("id{d}application_date{d}score{d}adjusted\n");
    for (r, a) in rows.iter().zip(adjusted) {
        s.push_str(&format!("{}{d}{}{d}{}{d}{a}\n", r.id, r.date, r.score));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use scorecard_core::calibration::{expand_quarterly, Scenario};

    #[test]
    fn scores_round_trip() {
        let rows = vec![
            ScoreRow { id: "a".into(), date: "2011-01-05".parse().unwrap(), label: Some(true), score: 0.1 + 0.2 },
            ScoreRow { id: "b".into(), date: "2011-02-05".parse().unwrap(), label: None, score: 1.0 / 3.0 },
        ];
        assert_eq!(read_scores(scores_table(&rows, b',').as_bytes(), b',').unwrap(), rows);
        assert!(read_scores("id,application_date,label,score\na,2011-01-01,,1.5\n".as_bytes(), b',').is_err());
    }

    #[test]
    fn forecast_table_has_twelve_rows_and_summary() {
        let q: scorecard_core::date::Quarter = "2012-Q1".parse().unwrap();
        let quarters = vec![(q, 0.25), (q.next(), 0.3), (q.next().next(), 0.28), (q.next().next().next(), 0.31)];
        let f = expand_quarterly(&Scenario::average_with_uplift(1.01, 2), quarters).unwrap();
        let t = forecast_table(&f, &RegressionFit::constant("c", 0.3), None, b',');
        let body: Vec<&str> = t.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body.len(), 13);
        assert!(t.ends_with("d=na valid=na\n"));
        assert!(body[12].starts_with("2012-12,2012-Q4,0.31,"));
    }

    #[test]
    fn rows_round_trip() {
        let rows = vec![("cv".to_string(), "fold_1".to_string(), 0.7123), ("psi".into(), "age".into(), 1e-5)];
        assert_eq!(read_rows_table(rows_table(&rows, b'\t').as_bytes(), b'\t').unwrap(), rows);
    }
}
