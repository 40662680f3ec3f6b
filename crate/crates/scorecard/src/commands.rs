//! The pipeline stages. Each reads its inputs (flag, then config path,
//! then the previous stage's output under `output_dir`), writes its outputs
//! atomically and returns a summary object.
//!
//! Layout under `output_dir`:
//!
//! | stage     | files |
//! |-----------|-------|
//! | synth     | applications.csv, default_series.csv, macro_<name>.csv |
//! | ingest    | modeling.csv, holdout.csv, default_series.csv, cleansing_report.csv, diagnostics.txt |
//! | bin       | characteristics.txt, iv.csv |
//! | train     | model.txt, characteristics.txt, fit_report.csv |
//! | evaluate  | metrics.csv, scores.csv |
//! | calibrate | ranking.csv, forecast.csv, calibration.csv, calibrated_scores.csv, summary.csv |
//! | forecast  | forecast.csv |
//! | report    | metrics.csv, scorecard.csv, report.json |

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context as _};
use serde_json::{json, Map, Value};

use scorecard_core::binning::{BinKind, Characteristic, Source};
use scorecard_core::calibration::{
    distance_d, expand_quarterly, forecast_default, rank_predictors, shift_scores, shift_scores_by_month,
    DefaultSeries, DistanceD, MacroSeries, MonthlyForecast, Ranking, RegressionFit,
};
use scorecard_core::dataset::{Application, Schema};
use scorecard_core::date::{Quarter, YearMonth};
use scorecard_core::evaluation::degradation;
use scorecard_core::models::{Model, ModelBundle};
use scorecard_core::pipeline::{evaluate_scorecard, fit_candidates, fit_scorecard, prepare, run_stage_two, Scorecard};
use scorecard_core::synthgen::{generate_macro, generate_population};

use crate::config::{PipelineConfig, ReportFormat};
use crate::dataset_io::{
    cleansing_report_to_string, dataset_to_string, parse_dataset, read_header, schema_for_header, schema_for_records,
    Diagnostic,
};
use crate::formats::characteristics::write_characteristics;
use crate::formats::model::{characteristics_file, read_model, write_model};
use crate::formats::series::{read_default, read_macro, write_default, write_macro};
use crate::formats::tables::{
    calibrated_scores_table, calibration_table, forecast_table, metrics_rows, read_rows_table, read_scores, rows_table,
    scores_table, ScoreRow,
};
use crate::fsio::write_atomic_str;

pub struct Context {
    pub cfg: PipelineConfig,
    pub delimiter: u8,
}

impl Context {
    pub fn new(cfg: PipelineConfig) -> anyhow::Result<Self> {
        cfg.validate()?;
        let delimiter = cfg.delimiter_byte()?;
        Ok(Self { cfg, delimiter })
    }

    pub fn path(&self, stage: &str, file: &str) -> PathBuf {
        self.cfg.output_dir.join(stage).join(file)
    }

    fn seed(&self) -> u64 {
        self.cfg.seed
    }
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    write_atomic_str(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn input(path: PathBuf, hint: &str) -> anyhow::Result<PathBuf> {
    ensure!(path.exists(), "input {} not found ({hint})", path.display());
    Ok(path)
}

struct Loaded {
    records: Vec<Application>,
    schema: Schema,
    diagnostics: Vec<Diagnostic>,
}

fn load_dataset(path: &Path, delimiter: u8) -> anyhow::Result<Loaded> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let header = read_header(&bytes[..], delimiter).with_context(|| format!("parsing {}", path.display()))?;
    let schema = schema_for_header(&header);
    let parsed =
        parse_dataset(&bytes[..], &schema, delimiter).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Loaded { records: parsed.records, schema, diagnostics: parsed.diagnostics })
}

fn csv_string(rows: &[Vec<String>], delimiter: u8) -> anyhow::Result<String> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn synth(ctx: &Context) -> anyhow::Result<Value> {
    let spec = &ctx.cfg.synth.population;
    let pop = generate_population(spec, ctx.seed())?;
    let schema = Schema::credit_applications();
    write(&ctx.path("synth", "applications.csv"), &dataset_to_string(&pop.records, &schema, ctx.delimiter)?)?;
    let series = DefaultSeries::from_records(&pop.records)?;
    write(&ctx.path("synth", "default_series.csv"), &write_default(&series, ctx.delimiter))?;
    let quarterly = series.quarterly();
    let mut names = Vec::new();
    for (i, m) in ctx.cfg.synth.macro_series.iter().enumerate() {
        ensure!(
            !m.name.is_empty() && m.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'),
            "macro series name `{}` must be alphanumeric",
            m.name
        );
        let s = generate_macro(m, &quarterly, ctx.seed().wrapping_add(1 + i as u64))?;
        write(&ctx.path("synth", &format!("macro_{}.csv", m.name)), &write_macro(&s, ctx.delimiter))?;
        names.push(m.name.clone());
    }
    let bad = pop.records.iter().filter(|r| r.is_bad() == Some(true)).count();
    Ok(json!({
        "records": pop.records.len(),
        "bad_rate": bad as f64 / pop.records.len() as f64,
        "macro_series": names,
        "output": ctx.cfg.output_dir.join("synth"),
    }))
}

pub fn ingest(ctx: &Context, data: Option<PathBuf>) -> anyhow::Result<Value> {
    let path = match data.or_else(|| ctx.cfg.paths.data.clone()) {
        Some(p) => input(p, "check --data or paths.data")?,
        None => input(ctx.path("synth", "applications.csv"), "run `synth` first or set paths.data")?,
    };
    let loaded = load_dataset(&path, ctx.delimiter)?;
    let factors = ctx.cfg.income_factors()?;
    let prep = prepare(&loaded.records, &ctx.cfg.split.holdout, &ctx.cfg.cleansing, factors.as_ref())?;
    ensure!(!prep.modeling.is_empty(), "the holdout window covers every record; nothing left to model");
    let schema = schema_for_records(&loaded.schema, &prep.modeling);
    write(&ctx.path("ingest", "modeling.csv"), &dataset_to_string(&prep.modeling, &schema, ctx.delimiter)?)?;
    write(&ctx.path("ingest", "holdout.csv"), &dataset_to_string(&prep.holdout, &schema, ctx.delimiter)?)?;
    write(&ctx.path("ingest", "cleansing_report.csv"), &cleansing_report_to_string(&prep.report))?;
    let series = DefaultSeries::from_records(&loaded.records)?;
    write(&ctx.path("ingest", "default_series.csv"), &write_default(&series, ctx.delimiter))?;
    let diag: String = loaded.diagnostics.iter().map(|d| format!("{d}\n")).collect();
    write(&ctx.path("ingest", "diagnostics.txt"), &diag)?;
    Ok(json!({
        "input": path,
        "records": loaded.records.len(),
        "modeling": prep.modeling.len(),
        "holdout": prep.holdout.len(),
        "diagnostics": loaded.diagnostics.len(),
        "income_adjusted": factors.is_some(),
    }))
}

fn modeling_set(ctx: &Context, data: Option<PathBuf>) -> anyhow::Result<(PathBuf, Loaded)> {
    let path = match data {
        Some(p) => input(p, "check --data")?,
        None => input(ctx.path("ingest", "modeling.csv"), "run `ingest` first")?,
    };
    let loaded = load_dataset(&path, ctx.delimiter)?;
    Ok((path, loaded))
}

fn source_label(c: &Characteristic) -> String {
    match &c.source {
        Source::Numeric(_) => "numeric".into(),
        Source::Nominal(_) => "nominal".into(),
        Source::Binary(_) => "binary".into(),
        Source::Interaction(_) => "interaction".into(),
    }
}

pub fn bin(ctx: &Context, data: Option<PathBuf>) -> anyhow::Result<Value> {
    let (path, loaded) = modeling_set(ctx, data)?;
    let refs: Vec<&Application> = loaded.records.iter().collect();
    let (chars, skipped) = fit_candidates(&refs, &ctx.cfg.modeling)?;
    write(&ctx.path("bin", "characteristics.txt"), &write_characteristics(&chars)?)?;
    let mut rows = vec![vec!["characteristic".to_string(), "source".into(), "bins".into(), "iv".into(), "note".into()]];
    for c in &chars {
        rows.push(vec![c.name.clone(), source_label(c), c.bins.len().to_string(), c.iv.to_string(), String::new()]);
    }
    for (name, why) in &skipped {
        rows.push(vec![name.clone(), String::new(), String::new(), String::new(), why.clone()]);
    }
    write(&ctx.path("bin", "iv.csv"), &csv_string(&rows, ctx.delimiter)?)?;
    Ok(json!({ "input": path, "characteristics": chars.len(), "skipped": skipped.len() }))
}

pub fn train(ctx: &Context, data: Option<PathBuf>) -> anyhow::Result<Value> {
    let (path, loaded) = modeling_set(ctx, data)?;
    let refs: Vec<&Application> = loaded.records.iter().collect();
    let fitted = fit_scorecard(&refs, &ctx.cfg.modeling, ctx.seed())?;
    let sc = &fitted.scorecard;
    write(&ctx.path("train", "model.txt"), &write_model(sc, "characteristics.txt")?)?;
    write(&ctx.path("train", "characteristics.txt"), &write_characteristics(&sc.characteristics)?)?;

    let r = &fitted.report;
    let mut rows = vec![vec!["item".to_string(), "name".into(), "value".into()]];
    let mut push = |a: &str, b: &str, c: String| rows.push(vec![a.to_string(), b.to_string(), c]);
    push("training", "records", r.training_records.to_string());
    push("training", "strategy", sc.strategy.label().to_string());
    push("cleaning", "removed", r.removed.len().to_string());
    for (n, iv) in &r.ivs {
        push("iv", n, iv.to_string());
    }
    for s in &r.selection_trace {
        push("selection", &s.added, s.mean_auc.to_string());
    }
    for (i, f) in sc.feature_names().iter().enumerate() {
        push("feature", f, i.to_string());
    }
    for (n, why) in &r.skipped {
        push("skipped", n, why.clone());
    }
    for id in &r.removed {
        push("removed", id, String::new());
    }
    write(&ctx.path("train", "fit_report.csv"), &csv_string(&rows, ctx.delimiter)?)?;
    Ok(json!({
        "input": path,
        "training_records": r.training_records,
        "features": sc.feature_names(),
        "strategy": sc.strategy.label(),
        "removed": r.removed.len(),
    }))
}

pub fn load_scorecard(model: &Path) -> anyhow::Result<Scorecard> {
    let text = read(model)?;
    let chars_name = characteristics_file(&text).with_context(|| format!("parsing {}", model.display()))?;
    let chars_path = model.parent().unwrap_or(Path::new(".")).join(chars_name);
    let chars = read(&chars_path)?;
    read_model(&text, &chars).with_context(|| format!("loading {}", model.display()))
}

pub struct EvaluateArgs {
    pub test_auc: Option<f64>,
    pub holdout_auc: Option<f64>,
    pub model: Option<PathBuf>,
    pub modeling: Option<PathBuf>,
    pub holdout: Option<PathBuf>,
}

pub fn evaluate(ctx: &Context, args: EvaluateArgs) -> anyhow::Result<Value> {
    if let (Some(t), Some(h)) = (args.test_auc, args.holdout_auc) {
        ensure!((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&h), "AUC values must lie in [0, 1]");
        return Ok(json!({ "test_auc": t, "holdout_auc": h, "degradation": degradation(t, h) }));
    }
    let model = input(args.model.unwrap_or_else(|| ctx.path("train", "model.txt")), "run `train` first")?;
    let sc = load_scorecard(&model)?;
    let modeling = load_dataset(
        &input(args.modeling.unwrap_or_else(|| ctx.path("ingest", "modeling.csv")), "run `ingest` first")?,
        ctx.delimiter,
    )?;
    let holdout = load_dataset(
        &input(args.holdout.unwrap_or_else(|| ctx.path("ingest", "holdout.csv")), "run `ingest` first")?,
        ctx.delimiter,
    )?;
    let e = evaluate_scorecard(
        &sc,
        &modeling.records,
        &holdout.records,
        &ctx.cfg.modeling,
        ctx.cfg.evaluation.cv_k,
        ctx.seed(),
    )?;
    write(&ctx.path("evaluate", "metrics.csv"), &rows_table(&metrics_rows(&e), ctx.delimiter))?;
    let rows: Vec<ScoreRow> = holdout
        .records
        .iter()
        .zip(&e.holdout_scores)
        .map(|(r, s)| ScoreRow { id: r.id.clone(), date: r.date, label: r.is_bad(), score: *s })
        .collect();
    write(&ctx.path("evaluate", "scores.csv"), &scores_table(&rows, ctx.delimiter))?;
    Ok(json!({
        "cv_mean_auc": e.cv.mean,
        "cv_std_dev": e.cv.std_dev,
        "holdout_auc": e.holdout.map(|h| h.auc),
        "degradation": e.degradation,
        "max_psi": e.psi.as_ref().and_then(|p| p.entries.iter().map(|x| x.psi).reduce(f64::max)),
        "scored": rows.len(),
    }))
}

fn default_series(ctx: &Context) -> anyhow::Result<DefaultSeries> {
    let path = match &ctx.cfg.paths.default_series {
        Some(p) => p.clone(),
        None => input(ctx.path("ingest", "default_series.csv"), "set paths.default_series or run `ingest`")?,
    };
    read_default(read(&path)?.as_bytes(), ctx.delimiter).with_context(|| format!("parsing {}", path.display()))
}

fn macro_series(ctx: &Context) -> anyhow::Result<Vec<MacroSeries>> {
    let mut paths = ctx.cfg.paths.macro_series.clone();
    if paths.is_empty() {
        let dir = ctx.cfg.output_dir.join("synth");
        if dir.is_dir() {
            for e in fs::read_dir(&dir)? {
                let p = e?.path();
                let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
                if name.starts_with("macro_") && name.ends_with(".csv") {
                    paths.push(p);
                }
            }
        }
        paths.sort();
    }
    ensure!(!paths.is_empty(), "no macro series: set paths.macro_series, run `synth`, or set calibration.target_level");
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
            let fallback = stem.strip_prefix("macro_").unwrap_or(stem);
            read_macro(read(p)?.as_bytes(), ctx.delimiter, fallback).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

fn truncate(series: &DefaultSeries, end: YearMonth) -> anyhow::Result<DefaultSeries> {
    let h = DefaultSeries::new(series.monthly().iter().copied().filter(|(m, _)| *m <= end).collect())?;
    ensure!(h.last_month().is_some(), "default series has no month up to {end}");
    Ok(h)
}

/// Realised rates of the twelve months of `year`, when all are present.
fn observed_year(series: &DefaultSeries, year: i32) -> Option<Vec<f64>> {
    let v: Vec<f64> = series.monthly().iter().filter(|(m, _)| m.year == year).map(|x| x.1).collect();
    (v.len() == 12).then_some(v)
}

fn constant_forecast(ctx: &Context, level: f64, year: i32) -> anyhow::Result<(RegressionFit, MonthlyForecast)> {
    let quarters = (1..=4).map(|q| Ok((Quarter::new(year, q)?, level))).collect::<scorecard_core::Result<Vec<_>>>()?;
    let f = expand_quarterly(&ctx.cfg.calibration.scenario, quarters)?;
    Ok((RegressionFit::constant("target_level", level), f))
}

fn ranking_table(r: &Ranking, delimiter: u8) -> anyhow::Result<String> {
    let mut rows = vec![vec![
        "predictor".to_string(),
        "r".into(),
        "r_square".into(),
        "slope".into(),
        "intercept".into(),
        "quarters".into(),
        "note".into(),
    ]];
    for f in &r.fits {
        rows.push(vec![
            f.predictor.clone(),
            f.r.to_string(),
            f.r_square.to_string(),
            f.slope.to_string(),
            f.intercept.to_string(),
            f.n_points.to_string(),
            String::new(),
        ]);
    }
    for (n, why) in &r.excluded {
        rows.push(vec![
            n.clone(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            why.clone(),
        ]);
    }
    csv_string(&rows, delimiter)
}

fn distance_json(d: Option<&DistanceD>) -> (Value, Value) {
    match d {
        Some(d) => (json!(d.d), json!(d.valid)),
        None => (Value::Null, Value::Null),
    }
}

pub fn calibrate(ctx: &Context, scores: Option<PathBuf>) -> anyhow::Result<Value> {
    let path = input(scores.unwrap_or_else(|| ctx.path("evaluate", "scores.csv")), "run `evaluate` first")?;
    let rows =
        read_scores(read(&path)?.as_bytes(), ctx.delimiter).with_context(|| format!("parsing {}", path.display()))?;
    ensure!(!rows.is_empty(), "no scored applications in {}", path.display());
    let full = default_series(ctx)?;
    let end = match ctx.cfg.calibration.history_end {
        Some(e) => e,
        None => {
            let first = rows.iter().map(|r| r.date.year()).min().expect("non-empty");
            YearMonth::new(first - 1, 12)?
        }
    };
    let history = truncate(&full, end)?;
    let year = history.last_month().expect("non-empty").year + 1;
    let observed = observed_year(&full, year);
    let raw: Vec<f64> = rows.iter().map(|r| r.score).collect();
    let months: Vec<u8> = rows.iter().map(|r| r.date.month()).collect();
    let cal = &ctx.cfg.calibration;

    let (fit, forecast, shift, adjusted, distance, ranking) = match cal.target_level {
        Some(level) => {
            let (fit, f) = constant_forecast(ctx, level, year)?;
            let (shift, adjusted) = if cal.per_month {
                shift_scores_by_month(&raw, &months, &f.target_by_month())?
            } else {
                shift_scores(&raw, f.mean())?
            };
            let distance = observed.as_deref().map(|o| distance_d(&f.rates, o)).transpose()?;
            (fit, f, shift, adjusted, distance, None)
        }
        None => {
            let candidates = macro_series(ctx)?;
            let rep = run_stage_two(&history, &candidates, &raw, &months, &cal.stage_two(), observed.as_deref())?;
            let fit = rep.ranking.fits[0].clone();
            (fit, rep.forecast, rep.shift, rep.adjusted, rep.distance, Some(rep.ranking))
        }
    };

    if let Some(r) = &ranking {
        write(&ctx.path("calibrate", "ranking.csv"), &ranking_table(r, ctx.delimiter)?)?;
    }
    write(&ctx.path("calibrate", "forecast.csv"), &forecast_table(&forecast, &fit, distance.as_ref(), ctx.delimiter))?;
    write(
        &ctx.path("calibrate", "calibration.csv"),
        &calibration_table(&forecast, &shift, &months, &raw, &adjusted, distance.as_ref(), ctx.delimiter),
    )?;
    write(&ctx.path("calibrate", "calibrated_scores.csv"), &calibrated_scores_table(&rows, &adjusted, ctx.delimiter))?;
    let mean_adjusted = adjusted.iter().sum::<f64>() / adjusted.len() as f64;
    let mut summary = vec![
        ("calibration".to_string(), "scenario".to_string(), forecast.scenario.variant as f64),
        ("calibration".into(), "forecast_mean".into(), forecast.mean()),
        ("calibration".into(), "mean_raw".into(), raw.iter().sum::<f64>() / raw.len() as f64),
        ("calibration".into(), "mean_adjusted".into(), mean_adjusted),
        ("calibration".into(), "max_shift_error".into(), shift.max_error()),
        ("calibration".into(), "predictor_r".into(), fit.r),
    ];
    if let Some(d) = &distance {
        summary.push(("calibration".into(), "distance_d".into(), d.d));
        summary.push(("calibration".into(), "distance_valid".into(), if d.valid { 1.0 } else { 0.0 }));
    }
    write(&ctx.path("calibrate", "summary.csv"), &rows_table(&summary, ctx.delimiter))?;
    let (d, valid) = distance_json(distance.as_ref());
    Ok(json!({
        "predictor": fit.predictor,
        "forecast_year": year,
        "scenario": forecast.scenario.variant,
        "forecast_mean": forecast.mean(),
        "mean_adjusted": mean_adjusted,
        "distance_d": d,
        "valid": valid,
    }))
}

pub fn forecast(ctx: &Context, constant: Option<f64>, year: Option<i32>) -> anyhow::Result<Value> {
    let level = constant.or(ctx.cfg.calibration.target_level);
    let series = match (&ctx.cfg.paths.default_series, level) {
        (None, Some(_)) if !ctx.path("ingest", "default_series.csv").exists() => None,
        _ => Some(default_series(ctx)?),
    };
    let history = match (&series, ctx.cfg.calibration.history_end) {
        (Some(s), Some(end)) => Some(truncate(s, end)?),
        (Some(s), None) => Some(s.clone()),
        (None, _) => None,
    };
    let (fit, f) = match level {
        Some(level) => {
            ensure!(level > 0.0 && level < 1.0, "constant level must lie in (0, 1)");
            let y = match (year, &history) {
                (Some(y), _) => y,
                (None, Some(h)) => h.last_month().expect("non-empty").year + 1,
                (None, None) => ctx.cfg.synth.population.end().year + 1,
            };
            constant_forecast(ctx, level, y)?
        }
        None => {
            let history = history.expect("series loaded");
            if let Some(y) = year {
                ensure!(
                    y == history.last_month().expect("non-empty").year + 1,
                    "--year must follow the default history"
                );
            }
            let candidates = macro_series(ctx)?;
            let repaired: Vec<MacroSeries> = candidates
                .iter()
                .map(|c| {
                    scorecard_core::calibration::repair_abnormal(c, &c.abnormal().iter().copied().collect::<Vec<_>>())
                })
                .collect::<scorecard_core::Result<_>>()?;
            let q = history.quarterly();
            let window = match (ctx.cfg.calibration.fit_window, q.first(), q.last()) {
                (Some(w), _, _) => w,
                (None, Some(a), Some(b)) => (a.0, b.0),
                _ => bail!("default history covers no full quarter"),
            };
            let ranking = rank_predictors(&history, &repaired, window);
            let best = ranking.fits.first().context("no usable predictor series")?.clone();
            let series = repaired.iter().find(|s| s.name == best.predictor).expect("ranked");
            let f = forecast_default(&ctx.cfg.calibration.scenario, &best, series, &history)?;
            (best, f)
        }
    };
    let year = f.months[0].year;
    let distance =
        series.as_ref().and_then(|s| observed_year(s, year)).map(|o| distance_d(&f.rates, &o)).transpose()?;
    write(&ctx.path("forecast", "forecast.csv"), &forecast_table(&f, &fit, distance.as_ref(), ctx.delimiter))?;
    let (d, valid) = distance_json(distance.as_ref());
    Ok(json!({
        "predictor": fit.predictor,
        "year": year,
        "scenario": f.scenario.variant,
        "rates": f.rates,
        "mean": f.mean(),
        "distance_d": d,
        "valid": valid,
    }))
}

fn bin_label(kind: &BinKind) -> String {
    match kind {
        BinKind::Interval { lo, hi } => format!("[{lo}, {hi})"),
        BinKind::Classes(t) => t.join(" "),
        BinKind::Missing => "missing".into(),
        BinKind::Cells(c) => {
            let cells: Vec<String> =
                c.iter().map(|x| x.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(":")).collect();
            format!("cells {}", cells.join(" "))
        }
    }
}

/// Points table: one row per bin with its WoE and, for a single logistic
/// model, the weight and partial score `weight * woe`.
fn scorecard_table(sc: &Scorecard, delimiter: u8) -> anyhow::Result<String> {
    let weights = match &sc.bundle {
        ModelBundle::Single(Model::Logistic(m)) => Some(&m.weights),
        _ => None,
    };
    let mut rows = vec![vec![
        "characteristic".to_string(),
        "bin".into(),
        "good".into(),
        "bad".into(),
        "woe".into(),
        "weight".into(),
        "partial_score".into(),
    ]];
    for (j, c) in sc.characteristics.iter().enumerate() {
        for b in &c.bins {
            let (w, p) = match weights {
                Some(w) => (w[j].to_string(), (w[j] * b.woe).to_string()),
                None => (String::new(), String::new()),
            };
            rows.push(vec![
                c.name.clone(),
                bin_label(&b.kind),
                b.good.to_string(),
                b.bad.to_string(),
                b.woe.to_string(),
                w,
                p,
            ]);
        }
    }
    csv_string(&rows, delimiter)
}

pub fn report(ctx: &Context) -> anyhow::Result<Value> {
    let metrics_path = input(ctx.path("evaluate", "metrics.csv"), "run `evaluate` first")?;
    let mut rows = read_rows_table(read(&metrics_path)?.as_bytes(), ctx.delimiter)?;
    let cal = ctx.path("calibrate", "summary.csv");
    let calibrated = cal.exists();
    if calibrated {
        rows.extend(read_rows_table(read(&cal)?.as_bytes(), ctx.delimiter)?);
    }
    let sc = load_scorecard(&input(ctx.path("train", "model.txt"), "run `train` first")?)?;
    let mut written = Vec::new();
    for fmt in &ctx.cfg.report.formats {
        match fmt {
            ReportFormat::Csv => {
                write(&ctx.path("report", "metrics.csv"), &rows_table(&rows, ctx.delimiter))?;
                write(&ctx.path("report", "scorecard.csv"), &scorecard_table(&sc, ctx.delimiter)?)?;
                written.extend(["metrics.csv", "scorecard.csv"]);
            }
            ReportFormat::Json => {
                let metrics: Vec<Value> =
                    rows.iter().map(|(s, n, v)| json!({ "section": s, "name": n, "value": v })).collect();
                let doc = json!({
                    "metrics": metrics,
                    "features": sc.feature_names(),
                    "strategy": sc.strategy.label(),
                });
                write(&ctx.path("report", "report.json"), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
                written.push("report.json");
            }
        }
    }
    let get = |s: &str, n: &str| rows.iter().find(|r| r.0 == s && r.1 == n).map(|r| r.2);
    Ok(json!({
        "files": written,
        "test_auc": get("test", "auc"),
        "holdout_auc": get("holdout", "auc"),
        "degradation": get("degradation", "points"),
        "distance_d": get("calibration", "distance_d"),
        "calibrated": calibrated,
    }))
}

/// Every stage in order; `synth` only when no dataset is configured.
pub fn pipeline(ctx: &Context) -> anyhow::Result<Value> {
    let mut stages = Map::new();
    if ctx.cfg.paths.data.is_none() {
        stages.insert("synth".into(), synth(ctx)?);
    }
    stages.insert("ingest".into(), ingest(ctx, None)?);
    stages.insert("bin".into(), bin(ctx, None)?);
    stages.insert("train".into(), train(ctx, None)?);
    stages.insert(
        "evaluate".into(),
        evaluate(ctx, EvaluateArgs { test_auc: None, holdout_auc: None, model: None, modeling: None, holdout: None })?,
    );
    stages.insert("calibrate".into(), calibrate(ctx, None)?);
    stages.insert("report".into(), report(ctx)?);
    Ok(json!({ "output": ctx.cfg.output_dir, "stages": stages }))
}
