//! Two-column series files: `period,value`.
//!
//! Macro series use quarterly periods (`2010-Q3`); monthly periods are
//! averaged over complete quarters. An optional third column `abnormal`
//! marks quarters to repair. The value column's header names the series
//! (`value` means "use the file name"). Default series are monthly
//! (`2010-07`).

use std::collections::BTreeMap;
use std::io;

use scorecard_core::calibration::{DefaultSeries, MacroSeries};
use scorecard_core::date::{Quarter, YearMonth};

#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error(transparent)]
    Series(#[from] scorecard_core::Error),
}

fn bad(line: u64, message: impl Into<String>) -> SeriesError {
    SeriesError::Line { line, message: message.into() }
}

enum Period {
    Quarter(Quarter),
    Month(YearMonth),
}

fn parse_period(s: &str, line: u64) -> Result<Period, SeriesError> {
    if s.contains('Q') || s.contains('q') {
        s.to_ascii_uppercase().parse().map(Period::Quarter).map_err(|_| bad(line, format!("bad quarter `{s}`")))
    } else {
        s.parse().map(Period::Month).map_err(|_| bad(line, format!("bad period `{s}`")))
    }
}

type Rows = (Vec<String>, Vec<(u64, Period, f64, bool)>);

fn read_rows<R: io::Read>(src: R, delimiter: u8) -> Result<Rows, SeriesError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).flexible(true).from_reader(src);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.len() < 2 || header.len() > 3 || header[0] != "period" {
        return Err(bad(1, "header must be `period,<value>[,abnormal]`"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() < 2 || rec.len() > header.len() {
            return Err(bad(line, format!("expected {} fields", header.len())));
        }
        let period = parse_period(rec[0].trim(), line)?;
        let v: f64 = rec[1].trim().parse().map_err(|_| bad(line, format!("bad value `{}`", &rec[1])))?;
        if !v.is_finite() {
            return Err(bad(line, "value must be finite"));
        }
        let flag = match rec.get(2).map(|f| f.trim().to_ascii_lowercase()) {
            None => false,
            Some(f) => match f.as_str() {
                "" | "0" | "false" | "no" => false,
                "1" | "true" | "yes" | "abnormal" => true,
                other => return Err(bad(line, format!("bad abnormal flag `{other}`"))),
            },
        };
        rows.push((line, period, v, flag));
    }
    Ok((header, rows))
}

pub fn read_macro<R: io::Read>(src: R, delimiter: u8, fallback_name: &str) -> Result<MacroSeries, SeriesError> {
    let (header, rows) = read_rows(src, delimiter)?;
    let name = if header[1] == "value" || header[1].is_empty() { fallback_name.to_string() } else { header[1].clone() };
    let mut quarterly: BTreeMap<Quarter, (u64, f64)> = BTreeMap::new();
    let mut monthly: BTreeMap<YearMonth, f64> = BTreeMap::new();
    let mut abnormal = Vec::new();
    for (line, p, v, flag) in rows {
        match p {
            Period::Quarter(q) => {
                if quarterly.insert(q, (line, v)).is_some() {
                    return Err(bad(line, format!("duplicate period {q}")));
                }
                if flag {
                    abnormal.push(q);
                }
            }
            Period::Month(m) => {
                if monthly.insert(m, v).is_some() {
                    return Err(bad(line, format!("duplicate period {m}")));
                }
                if flag {
                    abnormal.push(m.quarter());
                }
            }
        }
    }
    if !quarterly.is_empty() && !monthly.is_empty() {
        return Err(bad(1, "mixed monthly and quarterly periods"));
    }
    let points: Vec<(Quarter, f64)> = if monthly.is_empty() {
        quarterly.into_iter().map(|(q, (_, v))| (q, v)).collect()
    } else {
        let quarters: std::collections::BTreeSet<Quarter> = monthly.keys().map(|m| m.quarter()).collect();
        quarters
            .into_iter()
            .filter_map(|q| {
                let v: Option<Vec<f64>> = q.months().iter().map(|m| monthly.get(m).copied()).collect();
                v.map(|v| (q, (v[0] + v[1] + v[2]) / 3.0))
            })
            .collect()
    };
    Ok(MacroSeries::new(name, points)?.with_abnormal(abnormal))
}

pub fn read_default<R: io::Read>(src: R, delimiter: u8) -> Result<DefaultSeries, SeriesError> {
    let (_, rows) = read_rows(src, delimiter)?;
    let mut monthly: BTreeMap<YearMonth, f64> = BTreeMap::new();
    for (line, p, v, _) in rows {
        match p {
            Period::Month(m) => {
                if monthly.insert(m, v).is_some() {
                    return Err(bad(line, format!("duplicate month {m}")));
                }
            }
            Period::Quarter(_) => return Err(bad(line, "default series must be monthly")),
        }
    }
    Ok(DefaultSeries::new(monthly.into_iter().collect())?)
}

fn sep(delimiter: u8) -> char {
    delimiter as char
}

pub fn write_macro(series: &MacroSeries, delimiter: u8) -> String {
    let d = sep(delimiter);
    let mut s = format!("period{d}{}{d}abnormal\n", series.name);
    for (q, v) in series.points() {
        let flag = if series.abnormal().contains(q) { "1" } else { "" };
        s.push_str(&format!("{q}{d}{v}{d}{flag}\n"));
    }
    s
}

pub fn write_default(series: &DefaultSeries, delimiter: u8) -> String {
    let d = sep(delimiter);
    let mut s = format!("period{d}default_rate\n");
    for (m, v) in series.monthly() {
        s.push_str(&format!("{m}{d}{v}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn macro_round_trip() {
        let q: Quarter = "2009-Q1".parse().unwrap();
        let pts = vec![(q, 1.25), (q.next(), -0.1), (q.next().next(), 3.0)];
        let m = MacroSeries::new("gdp", pts).unwrap().with_abnormal([q.next()]);
        let text = write_macro(&m, b',');
        assert_eq!(read_macro(text.as_bytes(), b',', "x").unwrap(), m);
        let tsv = write_macro(&m, b'\t');
        assert_eq!(read_macro(tsv.as_bytes(), b'\t', "x").unwrap(), m);
    }

    #[test]
    fn monthly_macro_is_averaged() {
        let text = "period,value\n2010-01,1\n2010-02,2\n2010-03,6\n2010-04,1\n";
        let m = read_macro(text.as_bytes(), b',', "rate").unwrap();
        assert_eq!(m.name, "rate");
        assert_eq!(m.points(), &[("2010-Q1".parse().unwrap(), 3.0)]);
    }

    #[test]
    fn default_round_trip_and_errors() {
        let d =
            DefaultSeries::new(vec![("2010-01".parse().unwrap(), 0.27), ("2010-02".parse().unwrap(), 0.3)]).unwrap();
        assert_eq!(read_default(write_default(&d, b',').as_bytes(), b',').unwrap(), d);
        assert!(read_default("period,v\n2010-Q1,0.2\n".as_bytes(), b',').is_err());
        assert!(read_default("period,v\n2010-01,abc\n".as_bytes(), b',').is_err());
        assert!(read_default("when,v\n".as_bytes(), b',').is_err());
        assert!(read_default("period,v\n2010-01,1.5\n".as_bytes(), b',').is_err());
    }
}
