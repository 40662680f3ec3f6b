//! Model files.
//!
//! The header names the training strategy (as JSON), the unfamiliar-code
//! policy, the characteristics file and the feature order. Each `[model]`
//! section holds one logistic model (intercept and one `weight` line per
//! feature) or one stump ensemble (one `stump` line per round). A monthly
//! bundle has twelve sections, January first.

use serde::de::DeserializeOwned;
use serde::Serialize;

use scorecard_core::binning::UnfamiliarCodes;
use scorecard_core::models::{
    Combine, FitDiagnostics, LogisticModel, Model, ModelBundle, Polarity, Stump, StumpEnsemble, TrainingStrategy,
};
use scorecard_core::pipeline::Scorecard;

use super::characteristics::read_characteristics;
use super::{fmt_f64, parse_f64, parse_sections, parse_u64, Entry, FormatError, FormatResult, Section};

fn word<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("unit enum").trim_matches('"').to_string()
}

fn from_word<T: DeserializeOwned>(e: &Entry) -> FormatResult<T> {
    serde_json::from_str(&format!("\"{}\"", e.value))
        .map_err(|_| FormatError::new(e.line, format!("unknown value `{}`", e.value)))
}

fn floats(xs: &[f64]) -> String {
    xs.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" ")
}

fn parse_floats(e: &Entry) -> FormatResult<Vec<f64>> {
    e.value.split_whitespace().map(|v| parse_f64(v, e.line)).collect()
}

fn write_section(m: &Model, month: Option<usize>, out: &mut String) {
    out.push_str("\n[model]\n");
    if let Some(m) = month {
        out.push_str(&format!("month = {m}\n"));
    }
    match m {
        Model::Logistic(l) => {
            out.push_str("kind = logistic\n");
            out.push_str(&format!("intercept = {}\n", fmt_f64(l.intercept)));
            for (f, w) in l.features.iter().zip(&l.weights) {
                out.push_str(&format!("weight = {f} {}\n", fmt_f64(*w)));
            }
            let d = &l.diagnostics;
            out.push_str(&format!("iterations = {}\n", d.iterations));
            out.push_str(&format!("gradient_norm = {}\n", fmt_f64(d.gradient_norm)));
            out.push_str(&format!("ridge = {}\n", fmt_f64(d.ridge)));
            out.push_str(&format!("separation_detected = {}\n", d.separation_detected));
            out.push_str(&format!("log_likelihood_trace = {}\n", floats(&d.log_likelihood_trace)));
        }
        Model::Stumps(s) => {
            out.push_str("kind = stumps\n");
            out.push_str(&format!("features = {}\n", s.features.join(" ")));
            out.push_str("# stump = feature threshold polarity alpha weighted_error training_error\n");
            for st in &s.stumps {
                out.push_str(&format!(
                    "stump = {} {} {} {} {} {}\n",
                    st.feature,
                    fmt_f64(st.threshold),
                    word(&st.polarity),
                    fmt_f64(st.alpha),
                    fmt_f64(st.weighted_error),
                    fmt_f64(st.training_error)
                ));
            }
            out.push_str(&format!("weight_sums = {}\n", floats(&s.weight_sums)));
        }
    }
}

/// Model file text for `sc`; its characteristics go to `characteristics_file`.
pub fn write_model(sc: &Scorecard, characteristics_file: &str) -> FormatResult<String> {
    let mut out = String::from("# scorecard model\n");
    let strategy = serde_json::to_string(&sc.strategy).map_err(|e| FormatError::new(0, e))?;
    out.push_str(&format!("strategy = {strategy}\n"));
    out.push_str(&format!("unfamiliar = {}\n", word(&sc.unfamiliar)));
    out.push_str(&format!("characteristics = {characteristics_file}\n"));
    out.push_str(&format!("features = {}\n", sc.feature_names().join(" ")));
    match &sc.bundle {
        ModelBundle::Single(m) => {
            out.push_str("bundle = single\n");
            write_section(m, None, &mut out);
        }
        ModelBundle::Monthly { models, combine } => {
            out.push_str(&format!("bundle = monthly\ncombine = {}\n", word(combine)));
            for (i, m) in models.iter().enumerate() {
                write_section(m, Some(i + 1), &mut out);
            }
        }
    }
    Ok(out)
}

fn read_section(sec: &Section) -> FormatResult<Model> {
    let kind = sec.get("kind")?;
    match kind.value.as_str() {
        "logistic" => {
            let mut features = Vec::new();
            let mut weights = Vec::new();
            for e in sec.all("weight") {
                let (f, w) = e
                    .value
                    .split_once(' ')
                    .ok_or_else(|| FormatError::new(e.line, "weight needs a feature and a value"))?;
                features.push(f.to_string());
                weights.push(parse_f64(w.trim(), e.line)?);
            }
            let sep = sec.get("separation_detected")?;
            let diagnostics = FitDiagnostics {
                iterations: sec.get("iterations").and_then(|e| parse_u64(&e.value, e.line))? as usize,
                gradient_norm: sec.get("gradient_norm").and_then(|e| parse_f64(&e.value, e.line))?,
                ridge: sec.get("ridge").and_then(|e| parse_f64(&e.value, e.line))?,
                separation_detected: sep
                    .value
                    .parse()
                    .map_err(|_| FormatError::new(sep.line, "expected true or false"))?,
                log_likelihood_trace: parse_floats(sec.get("log_likelihood_trace")?)?,
            };
            Ok(Model::Logistic(LogisticModel {
                intercept: sec.get("intercept").and_then(|e| parse_f64(&e.value, e.line))?,
                features,
                weights,
                diagnostics,
            }))
        }
        "stumps" => {
            let features: Vec<String> = sec.get("features")?.value.split_whitespace().map(str::to_string).collect();
            let mut stumps = Vec::new();
            for e in sec.all("stump") {
                let f: Vec<&str> = e.value.split_whitespace().collect();
                if f.len() != 6 {
                    return Err(FormatError::new(e.line, "stump needs six fields"));
                }
                let feature = parse_u64(f[0], e.line)? as usize;
                if feature >= features.len() {
                    return Err(FormatError::new(e.line, format!("stump feature {feature} out of range")));
                }
                let polarity: Polarity =
                    from_word(&Entry { line: e.line, key: String::new(), value: f[2].to_string() })?;
                stumps.push(Stump {
                    feature,
                    threshold: parse_f64(f[1], e.line)?,
                    polarity,
                    alpha: parse_f64(f[3], e.line)?,
                    weighted_error: parse_f64(f[4], e.line)?,
                    training_error: parse_f64(f[5], e.line)?,
                });
            }
            let weight_sums = parse_floats(sec.get("weight_sums")?)?;
            Ok(Model::Stumps(StumpEnsemble { features, stumps, weight_sums }))
        }
        other => Err(FormatError::new(kind.line, format!("unknown model kind `{other}`"))),
    }
}

/// Name of the characteristics file a model file refers to.
pub fn characteristics_file(text: &str) -> FormatResult<String> {
    let sections = parse_sections(text)?;
    Ok(sections[0].get("characteristics")?.value.clone())
}

/// Reads a model file; `characteristics_text` is the content of the file it
/// names.
pub fn read_model(text: &str, characteristics_text: &str) -> FormatResult<Scorecard> {
    let sections = parse_sections(text)?;
    let head = &sections[0];
    let st = head.get("strategy")?;
    let strategy: TrainingStrategy =
        serde_json::from_str(&st.value).map_err(|e| FormatError::new(st.line, format!("strategy: {e}")))?;
    let unfamiliar: UnfamiliarCodes = from_word(head.get("unfamiliar")?)?;
    let feats = head.get("features")?;
    let features: Vec<&str> = feats.value.split_whitespace().collect();

    let all = read_characteristics(characteristics_text)?;
    let characteristics = features
        .iter()
        .map(|f| {
            all.iter().find(|c| c.name == *f).cloned().ok_or_else(|| {
                FormatError::new(feats.line, format!("feature `{f}` missing from the characteristics file"))
            })
        })
        .collect::<FormatResult<Vec<_>>>()?;

    let models: Vec<(usize, Model)> = sections[1..]
        .iter()
        .map(|s| {
            if s.name != "model" {
                return Err(FormatError::new(s.line, format!("unexpected section `[{}]`", s.name)));
            }
            Ok((s.line, read_section(s)?))
        })
        .collect::<FormatResult<_>>()?;
    for (line, m) in &models {
        if m.features().iter().map(String::as_str).ne(features.iter().copied()) {
            return Err(FormatError::new(*line, "model features differ from the header's feature list"));
        }
    }
    let b = head.get("bundle")?;
    let bundle = match (b.value.as_str(), models.len()) {
        ("single", 1) => ModelBundle::Single(models.into_iter().next().expect("one").1),
        ("monthly", 12) => {
            let combine: Combine = from_word(head.get("combine")?)?;
            ModelBundle::Monthly { models: models.into_iter().map(|m| m.1).collect(), combine }
        }
        (kind, n) => return Err(FormatError::new(b.line, format!("`{kind}` bundle with {n} model sections"))),
    };
    Ok(Scorecard { characteristics, bundle, unfamiliar, strategy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::characteristics::write_characteristics;
    use scorecard_core::dataset::{attr, Application, Window};
    use scorecard_core::models::{AdaBoostConfig, Trainer};
    use scorecard_core::pipeline::{fit_scorecard, ModelingConfig};
    use scorecard_core::synthgen::{generate_population, PopulationSpec};

    fn config() -> ModelingConfig {
        ModelingConfig {
            numeric: vec![attr::AGE.into(), attr::MONTHLY_INCOME.into()],
            nominal: vec![attr::OCCUPATION.into()],
            binary: vec![attr::HAS_PHONE.into()],
            interactions: vec![vec![attr::AGE.into(), attr::HAS_PHONE.into()]],
            ..Default::default()
        }
    }

    fn round_trip(cfg: &ModelingConfig) {
        let pop =
            generate_population(&PopulationSpec { n_records: 4000, months: 24, ..Default::default() }, 3).unwrap();
        let recs: Vec<&Application> = pop.records.iter().collect();
        let sc = fit_scorecard(&recs, cfg, 1).unwrap().scorecard;
        let m = write_model(&sc, "characteristics.txt").unwrap();
        let c = write_characteristics(&sc.characteristics).unwrap();
        assert_eq!(characteristics_file(&m).unwrap(), "characteristics.txt");
        let back = read_model(&m, &c).unwrap();
        assert_eq!(back, sc);
        for r in recs.iter().take(200) {
            assert_eq!(back.score(r).unwrap().to_bits(), sc.score(r).unwrap().to_bits());
        }
    }

    #[test]
    fn logistic_round_trip() {
        round_trip(&config());
    }

    #[test]
    fn stumps_monthly_round_trip() {
        let cfg = ModelingConfig {
            trainer: Trainer::AdaBoost(AdaBoostConfig { rounds: 15 }),
            strategy: TrainingStrategy::MonthlyEnsemble,
            ..config()
        };
        round_trip(&cfg);
    }

    #[test]
    fn through_the_door_round_trip() {
        let cfg = ModelingConfig {
            strategy: TrainingStrategy::ThroughTheDoor {
                window: Window::Range { start: "2010-01-01".parse().unwrap(), end: "2010-12-31".parse().unwrap() },
            },
            unfamiliar: UnfamiliarCodes::MergeToOther,
            ..config()
        };
        round_trip(&cfg);
    }
}
