//! Pipeline configuration (TOML).
//!
//! Every field has a default, so an empty file (or no file) runs the
//! bundled synthetic experiment. Relative paths are resolved against the
//! directory of the config file. Command-line flags override the file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use scorecard_core::calibration::Scenario;
use scorecard_core::dataset::{CleansingPolicy, Window};
use scorecard_core::date::{Quarter, YearMonth};
use scorecard_core::pipeline::{ModelingConfig, StageTwoConfig};
use scorecard_core::synthgen::{MacroSpec, PopulationSpec};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Application dataset; the synthetic one when unset.
    pub data: Option<PathBuf>,
    /// Monthly internal default series; the synthetic one when unset.
    pub default_series: Option<PathBuf>,
    /// Candidate macroeconomic series; the synthetic ones when empty.
    pub macro_series: Vec<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub population: PopulationSpec,
    pub macro_series: Vec<MacroSpec>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            population: PopulationSpec::default(),
            macro_series: vec![
                MacroSpec::default(),
                MacroSpec {
                    name: "unemployment".into(),
                    offset: 8.0,
                    loading: -10.0,
                    noise_scale: 0.0,
                    target_correlation: Some(0.4),
                },
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InflationMode {
    /// No `income_adjusted` column.
    #[default]
    None,
    /// Factors from `inflation.factors`.
    Table,
    /// Factors undoing the synthetic generator's configured inflation.
    SynthDeflators,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InflationConfig {
    pub mode: InflationMode,
    /// Year (as a string key) to multiplicative income factor.
    pub factors: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Applications held out of modelling.
    pub holdout: Window,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            holdout: Window::Range {
                start: "2011-01-01".parse().expect("valid date"),
                end: "2011-12-31".parse().expect("valid date"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub cv_k: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { cv_k: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub scenario: Scenario,
    /// Quarter range for correlating predictors; the whole history when unset.
    pub fit_window: Option<(Quarter, Quarter)>,
    /// One offset per application month (otherwise one global offset).
    pub per_month: bool,
    /// Last month of the default history. When unset, the history ends
    /// before the year of the earliest scored application.
    pub history_end: Option<YearMonth>,
    /// Fixed quarterly default level; replaces the macro regression.
    pub target_level: Option<f64>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let s = StageTwoConfig::default();
        Self {
            scenario: s.scenario,
            fit_window: s.fit_window,
            per_month: s.per_month,
            history_end: None,
            target_level: None,
        }
    }
}

impl CalibrationConfig {
    pub fn stage_two(&self) -> StageTwoConfig {
        StageTwoConfig { scenario: self.scenario.clone(), fit_window: self.fit_window, per_month: self.per_month }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub formats: Vec<ReportFormat>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { formats: vec![ReportFormat::Csv, ReportFormat::Json] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// `","` or `"\t"` (also accepted: `"tab"`).
    pub delimiter: String,
    pub output_dir: PathBuf,
    pub paths: Paths,
    pub synth: SynthConfig,
    pub cleansing: CleansingPolicy,
    pub inflation: InflationConfig,
    pub split: SplitConfig,
    pub modeling: ModelingConfig,
    pub evaluation: EvaluationConfig,
    pub calibration: CalibrationConfig,
    pub report: ReportConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            delimiter: ",".into(),
            output_dir: PathBuf::from("out"),
            paths: Paths::default(),
            synth: SynthConfig::default(),
            cleansing: CleansingPolicy::default(),
            inflation: InflationConfig::default(),
            split: SplitConfig::default(),
            modeling: ModelingConfig::default(),
            evaluation: EvaluationConfig::default(),
            calibration: CalibrationConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path` and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.output_dir);
        if let Some(p) = cfg.paths.data.as_mut() {
            resolve(base, p);
        }
        if let Some(p) = cfg.paths.default_series.as_mut() {
            resolve(base, p);
        }
        for p in &mut cfg.paths.macro_series {
            resolve(base, p);
        }
        Ok(cfg)
    }

    pub fn delimiter_byte(&self) -> anyhow::Result<u8> {
        match self.delimiter.as_str() {
            "," => Ok(b','),
            "\t" | "tab" => Ok(b'\t'),
            other => bail!("delimiter must be \",\" or \"\\t\", got {other:?}"),
        }
    }

    pub fn income_factors(&self) -> anyhow::Result<Option<BTreeMap<i32, f64>>> {
        match self.inflation.mode {
            InflationMode::None => Ok(None),
            InflationMode::SynthDeflators => Ok(Some(self.synth.population.deflators())),
            InflationMode::Table => {
                let mut out = BTreeMap::new();
                for (k, v) in &self.inflation.factors {
                    let y: i32 = k.parse().with_context(|| format!("inflation factor key `{k}` is not a year"))?;
                    if !(v.is_finite() && *v > 0.0) {
                        bail!("inflation factor for {y} must be positive");
                    }
                    out.insert(y, *v);
                }
                Ok(Some(out))
            }
        }
    }

    /// Checks values and that every configured input path exists.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.delimiter_byte()?;
        self.synth.population.validate()?;
        self.cleansing.validate()?;
        self.split.holdout.validate()?;
        self.modeling.validate()?;
        self.calibration.scenario.validate()?;
        self.income_factors()?;
        if self.evaluation.cv_k < 2 {
            bail!("evaluation.cv_k must be at least 2");
        }
        if let Some(l) = self.calibration.target_level {
            if !(l > 0.0 && l < 1.0) {
                bail!("calibration.target_level must lie in (0, 1)");
            }
        }
        let paths =
            self.paths.data.iter().chain(self.paths.default_series.iter()).chain(self.paths.macro_series.iter());
        for p in paths {
            if !p.exists() {
                bail!("configured path {} does not exist", p.display());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scorecard_core::binning::UnfamiliarCodes;

    #[test]
    fn empty_config_is_defaults() {
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn sections_parse() {
        let text = r#"
seed = 9
delimiter = "tab"
[synth.population]
n_records = 500
[synth.population.drift]
income_inflation = 1.25
[inflation]
mode = "table"
factors = { "2009" = 1.0, "2010" = 0.8 }
[split.holdout]
kind = "month-of-year"
month = 12
[modeling]
unfamiliar = "merge-to-other"
[modeling.strategy]
kind = "noise-cleaning"
posterior_threshold = 0.05
[modeling.trainer]
kind = "adaboost"
rounds = 20
[calibration]
fit_window = ["2009-Q1", "2010-Q4"]
[calibration.scenario]
variant = 3
"#;
        let c = PipelineConfig::from_toml(text).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.delimiter_byte().unwrap(), b'\t');
        assert_eq!(c.synth.population.n_records, 500);
        assert_eq!(c.synth.population.drift.income_inflation, 1.25);
        assert_eq!(c.income_factors().unwrap().unwrap()[&2010], 0.8);
        assert_eq!(c.split.holdout, Window::MonthOfYear { month: 12 });
        assert_eq!(c.modeling.unfamiliar, UnfamiliarCodes::MergeToOther);
        assert_eq!(c.calibration.scenario.variant, 3);
        assert_eq!(c.calibration.scenario.uplift_factor, 1.01);
        assert_eq!(c.calibration.fit_window.unwrap().1, "2010-Q4".parse().unwrap());
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(PipelineConfig::from_toml("sed = 1").is_err());
        assert!(PipelineConfig::from_toml("[paths]\ndta = \"x\"").is_err());
        assert!(PipelineConfig::from_toml("[modeling.binning]\nmax_bins = 3").is_err());
        assert!(PipelineConfig::from_toml("[modeling.trainer]\nkind = \"logistic\"\nrounds = 3").is_err());
        assert!(PipelineConfig::from_toml("[synth.population.drift]\ninflation = 1.1").is_err());
        let c = PipelineConfig::from_toml("[paths]\ndata = \"/nonexistent/file.csv\"").unwrap();
        assert!(c.validate().is_err());
        let c = PipelineConfig::from_toml("delimiter = \";\"").unwrap();
        assert!(c.validate().is_err());
    }
}
