//! Command-line interface. Precedence: flags > config file > defaults.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::commands::{self, Context, EvaluateArgs};
use crate::config::PipelineConfig;

#[derive(Parser, Debug)]
#[command(
    name = "scorecard",
    version,
    about = "Weight-of-evidence credit scorecards with forecast-based calibration",
    long_about = "Builds WoE scorecards (stage one) and calibrates their scores to a \
                  forecast default rate derived from macroeconomic series (stage two).\n\n\
                  Every command prints one JSON summary line on success. On failure it \
                  prints one JSON error line to stderr and exits with status 1; usage \
                  errors exit with status 2."
)]
pub struct Cli {
    /// Pipeline config (TOML); built-in defaults when omitted.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Artifact directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,

    /// Field delimiter for every delimited file: "," or "tab" (overrides `delimiter`).
    #[arg(long, global = true)]
    pub delimiter: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Default, Clone)]
pub struct ScenarioArgs {
    /// Forecast scenario: 1 quarterly, 2 yearly average, 3 average with year-end uplift.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub scenario: Option<u8>,

    /// Multiplier applied to the uplift months of scenario 3.
    #[arg(long)]
    pub uplift_factor: Option<f64>,

    /// Number of final months uplifted in scenario 3.
    #[arg(long)]
    pub uplift_months: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate synthetic applications, the monthly default series and macro series.
    Synth,

    /// Parse a dataset, split off the holdout window, cleanse and adjust income.
    Ingest {
        /// Dataset to ingest (default: `paths.data`, else the synthetic one).
        #[arg(long)]
        data: Option<PathBuf>,
    },

    /// Fit and export every configured characteristic with its IV.
    Bin {
        /// Modelling dataset (default: ingest output).
        #[arg(long)]
        data: Option<PathBuf>,
    },

    /// Fit the scorecard under the configured strategy and trainer.
    Train {
        /// Modelling dataset (default: ingest output).
        #[arg(long)]
        data: Option<PathBuf>,
    },

    /// Cross-validate, score the holdout, and report degradation and PSI.
    ///
    /// With --test-auc and --holdout-auc, only computes the degradation in
    /// percentage points.
    Evaluate {
        #[arg(long, requires = "holdout_auc")]
        test_auc: Option<f64>,
        #[arg(long, requires = "test_auc")]
        holdout_auc: Option<f64>,
        /// Model file (default: train output).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Modelling dataset (default: ingest output).
        #[arg(long)]
        modeling: Option<PathBuf>,
        /// Holdout dataset (default: ingest output).
        #[arg(long)]
        holdout: Option<PathBuf>,
    },

    /// Forecast next year's default from the best macro series and shift scores onto it.
    Calibrate {
        /// Scores to calibrate (default: evaluate output).
        #[arg(long)]
        scores: Option<PathBuf>,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },

    /// Forecast twelve monthly default rates.
    Forecast {
        /// Use a constant quarterly default level instead of the macro regression.
        #[arg(long)]
        constant: Option<f64>,
        /// Forecast year (default: the year after the default history).
        #[arg(long)]
        year: Option<i32>,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },

    /// Collect metrics, calibration summary and the scorecard points table.
    Report,

    /// Run synth (when no dataset is configured), ingest, bin, train, evaluate, calibrate and report.
    Pipeline,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Ingest { .. } => "ingest",
            Command::Bin { .. } => "bin",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Calibrate { .. } => "calibrate",
            Command::Forecast { .. } => "forecast",
            Command::Report => "report",
            Command::Pipeline => "pipeline",
        }
    }
}

fn apply_scenario(cfg: &mut PipelineConfig, s: &ScenarioArgs) {
    let sc = &mut cfg.calibration.scenario;
    if let Some(v) = s.scenario {
        sc.variant = v;
    }
    if let Some(f) = s.uplift_factor {
        sc.uplift_factor = f;
    }
    if let Some(m) = s.uplift_months {
        sc.uplift_months = m;
    }
}

/// Loads the config, applies flag overrides and runs the command.
pub fn run(cli: Cli) -> anyhow::Result<Value> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.output_dir {
        cfg.output_dir = o;
    }
    if let Some(d) = cli.delimiter {
        cfg.delimiter = d;
    }
    match &cli.command {
        Command::Calibrate { scenario, .. } | Command::Forecast { scenario, .. } => apply_scenario(&mut cfg, scenario),
        _ => {}
    }
    let ctx = Context::new(cfg)?;
    match cli.command {
        Command::Synth => commands::synth(&ctx),
        Command::Ingest { data } => commands::ingest(&ctx, data),
        Command::Bin { data } => commands::bin(&ctx, data),
        Command::Train { data } => commands::train(&ctx, data),
        Command::Evaluate { test_auc, holdout_auc, model, modeling, holdout } => {
            commands::evaluate(&ctx, EvaluateArgs { test_auc, holdout_auc, model, modeling, holdout })
        }
        Command::Calibrate { scores, .. } => commands::calibrate(&ctx, scores),
        Command::Forecast { constant, year, .. } => commands::forecast(&ctx, constant, year),
        Command::Report => commands::report(&ctx),
        Command::Pipeline => commands::pipeline(&ctx),
    }
}

/// The summary line printed on success.
pub fn summary_line(command: &str, body: Value) -> String {
    let mut obj = serde_json::Map::new();
    obj.insert("command".into(), Value::from(command));
    obj.insert("status".into(), Value::from("ok"));
    if let Value::Object(m) = body {
        obj.extend(m);
    }
    Value::Object(obj).to_string()
}

/// The error line printed on failure.
pub fn error_line(command: &str, err: &anyhow::Error) -> String {
    let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
    serde_json::json!({ "command": command, "status": "error", "error": chain.join(": ") }).to_string()
}
