//! Characteristic files.
//!
//! ```text
//! [characteristic]
//! name = age
//! source = numeric age
//! iv = 1.2000000000000000e-1
//! average_woe = 0.0000000000000000e0
//! bin = interval -inf 2.5000000000000000e1 120 30 <woe>
//! bin = missing - 3 4 <woe>
//! ```
//!
//! Each bin line is `kind payload.. good bad woe`. Payloads: `interval lo hi`,
//! `classes tok,tok..` (percent-escaped), `missing -`, `cells i:j,k:l..`.
//! An interaction's source lists its components, which appear earlier in
//! the file: `source = interaction age has_phone`.

use std::collections::BTreeMap;

use scorecard_core::binning::{Bin, BinKind, Characteristic, Source};

use super::{
    escape_token, fmt_f64, parse_f64, parse_sections, parse_u64, unescape_token, FormatError, FormatResult, Section,
};

fn check_name(name: &str) -> FormatResult<()> {
    if name.is_empty() || name.contains(char::is_whitespace) || name.contains(['=', '#', '[']) {
        return Err(FormatError::new(0, format!("characteristic name `{name}` cannot be written")));
    }
    Ok(())
}

fn bin_line(bin: &Bin) -> FormatResult<String> {
    let payload = match &bin.kind {
        BinKind::Interval { lo, hi } => format!("interval {} {}", fmt_f64(*lo), fmt_f64(*hi)),
        BinKind::Missing => "missing -".to_string(),
        BinKind::Classes(toks) => {
            if toks.is_empty() || toks.iter().any(|t| t.is_empty()) {
                return Err(FormatError::new(0, "empty class token"));
            }
            format!("classes {}", toks.iter().map(|t| escape_token(t)).collect::<Vec<_>>().join(","))
        }
        BinKind::Cells(cells) => {
            let cs: Vec<String> =
                cells.iter().map(|c| c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(":")).collect();
            format!("cells {}", cs.join(","))
        }
    };
    Ok(format!("bin = {payload} {} {} {}", bin.good, bin.bad, fmt_f64(bin.woe)))
}

fn write_one(c: &Characteristic, out: &mut String, written: &mut BTreeMap<String, Characteristic>) -> FormatResult<()> {
    if let Some(prev) = written.get(&c.name) {
        if prev != c {
            return Err(FormatError::new(0, format!("two different characteristics named `{}`", c.name)));
        }
        return Ok(());
    }
    check_name(&c.name)?;
    let source = match &c.source {
        Source::Numeric(v) => format!("numeric {v}"),
        Source::Nominal(v) => format!("nominal {v}"),
        Source::Binary(v) => format!("binary {v}"),
        Source::Interaction(parts) => {
            for p in parts {
                write_one(p, out, written)?;
            }
            format!("interaction {}", parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(" "))
        }
    };
    for v in c.source.variables() {
        check_name(&v)?;
    }
    out.push_str("\n[characteristic]\n");
    out.push_str(&format!("name = {}\nsource = {source}\n", c.name));
    out.push_str(&format!("iv = {}\naverage_woe = {}\n", fmt_f64(c.iv), fmt_f64(c.average_woe)));
    for b in &c.bins {
        out.push_str(&bin_line(b)?);
        out.push('\n');
    }
    written.insert(c.name.clone(), c.clone());
    Ok(())
}

/// Serialises `chars` together with any interaction components they need.
pub fn write_characteristics(chars: &[Characteristic]) -> FormatResult<String> {
    let mut out = String::from("# characteristics\n# bin = kind payload good bad woe\n");
    let mut written = BTreeMap::new();
    for c in chars {
        write_one(c, &mut out, &mut written)?;
    }
    Ok(out)
}

fn parse_bin(value: &str, line: usize) -> FormatResult<Bin> {
    let f: Vec<&str> = value.split_whitespace().collect();
    if f.len() < 5 {
        return Err(FormatError::new(line, "bin needs kind, payload, good, bad and woe"));
    }
    let n = f.len();
    let good = parse_u64(f[n - 3], line)?;
    let bad = parse_u64(f[n - 2], line)?;
    let woe = parse_f64(f[n - 1], line)?;
    let payload = &f[1..n - 3];
    let kind = match (f[0], payload) {
        ("interval", [lo, hi]) => BinKind::Interval { lo: parse_f64(lo, line)?, hi: parse_f64(hi, line)? },
        ("missing", ["-"]) => BinKind::Missing,
        ("classes", [toks]) => {
            BinKind::Classes(toks.split(',').map(|t| unescape_token(t, line)).collect::<FormatResult<_>>()?)
        }
        ("cells", [cells]) => BinKind::Cells(
            cells
                .split(',')
                .map(|c| {
                    c.split(':')
                        .map(|i| i.parse::<u32>().map_err(|_| FormatError::new(line, format!("bad cell `{c}`"))))
                        .collect()
                })
                .collect::<FormatResult<_>>()?,
        ),
        (k, _) => return Err(FormatError::new(line, format!("malformed `{k}` bin"))),
    };
    Ok(Bin { kind, good, bad, woe })
}

fn parse_one(sec: &Section, known: &BTreeMap<String, Characteristic>) -> FormatResult<Characteristic> {
    let name = sec.get("name")?.value.clone();
    let src = sec.get("source")?;
    let parts: Vec<&str> = src.value.split_whitespace().collect();
    let source = match parts.as_slice() {
        ["numeric", v] => Source::Numeric(v.to_string()),
        ["nominal", v] => Source::Nominal(v.to_string()),
        ["binary", v] => Source::Binary(v.to_string()),
        ["interaction", comps @ ..] => Source::Interaction(
            comps
                .iter()
                .map(|c| {
                    known.get(*c).cloned().ok_or_else(|| FormatError::new(src.line, format!("unknown component `{c}`")))
                })
                .collect::<FormatResult<_>>()?,
        ),
        _ => return Err(FormatError::new(src.line, format!("bad source `{}`", src.value))),
    };
    let iv = sec.get("iv").and_then(|e| parse_f64(&e.value, e.line))?;
    let avg = sec.get("average_woe").and_then(|e| parse_f64(&e.value, e.line))?;
    let bins: Vec<Bin> = sec.all("bin").map(|e| parse_bin(&e.value, e.line)).collect::<FormatResult<_>>()?;
    Characteristic::from_parts(name, source, bins, iv, avg).map_err(|e| FormatError::new(sec.line, e))
}

/// Every characteristic in the file, in file order.
pub fn read_characteristics(text: &str) -> FormatResult<Vec<Characteristic>> {
    let mut known = BTreeMap::new();
    let mut out = Vec::new();
    for sec in parse_sections(text)? {
        match sec.name.as_str() {
            "" if sec.entries.is_empty() => {}
            "characteristic" => {
                let c = parse_one(&sec, &known)?;
                if known.insert(c.name.clone(), c.clone()).is_some() {
                    return Err(FormatError::new(sec.line, format!("duplicate characteristic `{}`", c.name)));
                }
                out.push(c);
            }
            other => return Err(FormatError::new(sec.line, format!("unexpected section `[{other}]`"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scorecard_core::binning::{build_interaction, BinningConfig};
    use scorecard_core::dataset::{attr, Application};
    use scorecard_core::synthgen::{generate_population, PopulationSpec};

    #[test]
    fn fitted_characteristics_round_trip_exactly() {
        let pop = generate_population(&PopulationSpec { n_records: 3000, ..Default::default() }, 5).unwrap();
        let recs: Vec<&Application> = pop.records.iter().filter(|r| r.label.is_some()).collect();
        let y: Vec<bool> = recs.iter().map(|r| r.is_bad().unwrap()).collect();
        let age = Characteristic::fit_numeric(attr::AGE, &recs, &y, &BinningConfig::default()).unwrap();
        let city = Characteristic::fit_nominal(attr::CITY, &recs, &y).unwrap();
        let phone = Characteristic::fit_binary(attr::HAS_PHONE, &recs, &y).unwrap();
        let inter = build_interaction(&[&age, &phone], &recs, &y, 0.05).unwrap();
        let chars = vec![inter.clone(), city.clone(), age.clone()];
        let text = write_characteristics(&chars).unwrap();
        let back = read_characteristics(&text).unwrap();
        let names: Vec<&str> = back.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["age", "has_phone", inter.name.as_str(), "city"]);
        assert_eq!(back[2], inter);
        assert_eq!(back[3], city);
        assert_eq!(back[0], age);
        assert_eq!(write_characteristics(&back).unwrap(), text);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_characteristics(
            "[characteristic]\nname = a\nsource = interaction b c\niv = 0\naverage_woe = 0\n"
        )
        .is_err());
        let e = read_characteristics(
            "[characteristic]\nname = a\nsource = numeric a\niv = 0\naverage_woe = 0\nbin = interval 1\n",
        )
        .unwrap_err();
        assert_eq!(e.line, 6);
        assert!(read_characteristics("[weird]\n").is_err());
    }
}
