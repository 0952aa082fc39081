//! Run configuration: one JSON document, overridden by command-line flags.
//!
//! Every section keeps the keys it does not recognise so a config with typos
//! is rejected with the complete list instead of the first offender.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use trafficcast::evaluation::{ModelKind, PredictorSpec};
use trafficcast::sarimax::{ModelOrder, SeasonalOrder};

use crate::error::CliError;

type Extra = BTreeMap<String, Value>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Raw telemetry for `ingest`.
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Canonical series read by the modelling commands; defaults to
    /// `<output_dir>/series.csv`.
    pub series: Option<PathBuf>,
    pub interval_seconds: u32,
    pub trim_incomplete_days: bool,
    pub split: SplitConfig,
    pub seasonal: SeasonalConfig,
    pub features: FeatureConfig,
    pub grid: GridConfig,
    pub models: Vec<ModelConfig>,
    pub fit: FitConfig,
    pub forecast: ForecastConfig,
    pub diagnose: DiagnoseConfig,
    pub refit_interval: usize,
    pub filter_only: bool,
    pub seed: u64,
    /// Worker threads; `0` uses every core.
    pub jobs: usize,
    pub top: usize,
    pub synth: SynthConfig,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_days: usize,
    pub test_days: usize,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SeasonalConfig {
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "S")]
    pub period: usize,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

impl SeasonalConfig {
    pub fn order(&self) -> Result<SeasonalOrder, CliError> {
        SeasonalOrder::new(self.p, self.d, self.q, self.period).map_err(|e| CliError::Config(format!("seasonal: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub day_parts: bool,
    pub weekend: bool,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

/// A list of values, or an inclusive `{"from": a, "to": b}` range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueSet {
    List(Vec<usize>),
    Range { from: usize, to: usize },
}

impl ValueSet {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Self::List(v) => v.clone(),
            Self::Range { from, to } => (*from..=*to).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub p: ValueSet,
    pub d: usize,
    pub q: ValueSet,
    /// Fit candidates with the top-level seasonal order.
    pub seasonal: bool,
    /// Fit candidates with calendar features.
    pub exog: bool,
    pub timeout_seconds: f64,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    pub kind: ModelKind,
    #[serde(default)]
    pub order: Option<[usize; 3]>,
    /// Defaults to the top-level seasonal order for sarima and sarimax.
    #[serde(default)]
    pub seasonal: Option<SeasonalConfig>,
    #[serde(default)]
    pub include_mean: Option<bool>,
    /// Holt-Winters period; defaults to one day of samples.
    #[serde(default)]
    pub period: Option<usize>,
    /// Calendar features; defaults to on for sarimax.
    #[serde(default)]
    pub exog: Option<bool>,
    #[serde(default)]
    pub max_evals: Option<usize>,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Name of the model (from `models`) fitted by `fit` and used by `forecast`.
    pub model: Option<String>,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastConfig {
    /// Defaults to the test length.
    pub horizon: Option<usize>,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnoseConfig {
    pub max_lags: usize,
    /// Decomposition period; defaults to one day of samples.
    pub period: Option<usize>,
    /// Fixed ADF lag; the lag is chosen by AIC when unset.
    pub adf_lag: Option<usize>,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub days: usize,
    pub start: String,
    pub base_gbps: f64,
    pub daily_amplitude_gbps: f64,
    /// Multiplier applied on Saturdays and Sundays.
    pub weekend_factor: f64,
    pub noise: NoiseConfig,
    pub level_shift: Option<LevelShiftConfig>,
    pub missing_fraction: f64,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    pub period: usize,
    pub sigma_gbps: f64,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelShiftConfig {
    /// Position of the shift as a fraction of the series.
    pub at_fraction: f64,
    pub factor: f64,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            output_dir: PathBuf::from("run"),
            series: None,
            interval_seconds: 300,
            trim_incomplete_days: true,
            split: SplitConfig::default(),
            seasonal: SeasonalConfig::default(),
            features: FeatureConfig::default(),
            grid: GridConfig::default(),
            models: default_models(),
            fit: FitConfig::default(),
            forecast: ForecastConfig::default(),
            diagnose: DiagnoseConfig::default(),
            refit_interval: 1,
            filter_only: false,
            seed: 0,
            jobs: 0,
            top: 10,
            synth: SynthConfig::default(),
            extra: Extra::new(),
        }
    }
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_days: 21,
            test_days: 8,
            extra: Extra::new(),
        }
    }
}

impl Default for SeasonalConfig {
    fn default() -> Self {
        Self {
            p: 1,
            d: 0,
            q: 1,
            period: 24,
            extra: Extra::new(),
        }
    }
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            day_parts: true,
            weekend: true,
            extra: Extra::new(),
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            p: ValueSet::Range { from: 0, to: 24 },
            d: 1,
            q: ValueSet::Range { from: 0, to: 24 },
            seasonal: false,
            exog: false,
            timeout_seconds: 60.0,
            extra: Extra::new(),
        }
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            model: None,
            extra: Extra::new(),
        }
    }
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            horizon: None,
            extra: Extra::new(),
        }
    }
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self {
            max_lags: 48,
            period: None,
            adf_lag: None,
            extra: Extra::new(),
        }
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            days: 29,
            start: "2021-03-01T00:00:00Z".into(),
            base_gbps: 40.0,
            daily_amplitude_gbps: 15.0,
            weekend_factor: 0.85,
            noise: NoiseConfig::default(),
            level_shift: None,
            missing_fraction: 0.001,
            extra: Extra::new(),
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            ar: vec![0.8],
            ma: vec![],
            seasonal_ar: vec![],
            seasonal_ma: vec![],
            period: 0,
            sigma_gbps: 0.8,
            extra: Extra::new(),
        }
    }
}

fn model(name: &str, kind: ModelKind, order: Option<[usize; 3]>) -> ModelConfig {
    ModelConfig {
        name: name.into(),
        kind,
        order,
        seasonal: None,
        include_mean: None,
        period: None,
        exog: None,
        max_evals: None,
        extra: Extra::new(),
    }
}

/// ARIMA, SARIMA and SARIMAX at (13,1,16) plus Holt-Winters.
pub fn default_models() -> Vec<ModelConfig> {
    vec![
        model("arima", ModelKind::Arima, Some([13, 1, 16])),
        model("sarima", ModelKind::Sarima, Some([13, 1, 16])),
        model("sarimax", ModelKind::Sarimax, Some([13, 1, 16])),
        model("holt_winters", ModelKind::HoltWinters, None),
    ]
}

fn collect(prefix: &str, extra: &Extra, out: &mut Vec<String>) {
    out.extend(extra.keys().map(|k| format!("{prefix}{k}")));
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub top: Option<usize>,
    pub refit_interval: Option<usize>,
    pub filter_only: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let unknown = cfg.unknown_keys();
        if !unknown.is_empty() {
            return Err(CliError::Config(format!("unknown config keys: {}", unknown.join(", "))));
        }
        Ok(cfg)
    }

    pub fn unknown_keys(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect("", &self.extra, &mut out);
        collect("split.", &self.split.extra, &mut out);
        collect("seasonal.", &self.seasonal.extra, &mut out);
        collect("features.", &self.features.extra, &mut out);
        collect("grid.", &self.grid.extra, &mut out);
        collect("fit.", &self.fit.extra, &mut out);
        collect("forecast.", &self.forecast.extra, &mut out);
        collect("diagnose.", &self.diagnose.extra, &mut out);
        collect("synth.", &self.synth.extra, &mut out);
        collect("synth.noise.", &self.synth.noise.extra, &mut out);
        if let Some(ls) = &self.synth.level_shift {
            collect("synth.level_shift.", &ls.extra, &mut out);
        }
        for (i, m) in self.models.iter().enumerate() {
            collect(&format!("models[{i}]."), &m.extra, &mut out);
            if let Some(s) = &m.seasonal {
                collect(&format!("models[{i}].seasonal."), &s.extra, &mut out);
            }
        }
        out
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.input {
            self.input = Some(v.clone());
        }
        if let Some(v) = &o.out {
            self.output_dir = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.jobs {
            self.jobs = v;
        }
        if let Some(v) = o.top {
            self.top = v;
        }
        if let Some(v) = o.refit_interval {
            self.refit_interval = v;
        }
        if o.filter_only {
            self.filter_only = true;
        }
    }

    pub fn series_path(&self) -> PathBuf {
        self.series.clone().unwrap_or_else(|| self.output_dir.join("series.csv"))
    }

    pub fn samples_per_day(&self) -> usize {
        (86_400 / self.interval_seconds.max(1)) as usize
    }

    pub fn model(&self, name: &str) -> Result<&ModelConfig, CliError> {
        self.models
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| CliError::Config(format!("no model named `{name}` in `models`")))
    }

    /// Model selected for `fit` and `forecast`.
    pub fn fit_model(&self) -> Result<&ModelConfig, CliError> {
        match &self.fit.model {
            Some(name) => self.model(name),
            None => self.models.first().ok_or_else(|| CliError::Config("`models` is empty".into())),
        }
    }

    pub fn predictor(&self, m: &ModelConfig) -> Result<PredictorSpec, CliError> {
        let bad = |msg: String| CliError::Config(format!("models.{}: {msg}", m.name));
        if m.name.is_empty() || !m.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(bad("names may only contain letters, digits, `_` and `-`".into()));
        }
        let order = match (m.kind, m.order) {
            (ModelKind::HoltWinters, _) => ModelOrder { p: 0, d: 0, q: 0 },
            (_, Some([p, d, q])) => ModelOrder::new(p, d, q).map_err(|e| bad(e.to_string()))?,
            (_, None) => return Err(bad("`order` is required".into())),
        };
        let seasonal = match (m.kind, &m.seasonal) {
            (ModelKind::Arima | ModelKind::HoltWinters, _) => SeasonalOrder::none(),
            (_, Some(s)) => s.order()?,
            (_, None) => self.seasonal.order()?,
        };
        let spec = PredictorSpec {
            name: m.name.clone(),
            kind: m.kind,
            order,
            seasonal,
            include_mean: m.include_mean,
            period: m.period.unwrap_or_else(|| self.samples_per_day()),
            exog: m.exog.unwrap_or(m.kind == ModelKind::Sarimax),
            refit_interval: self.refit_interval,
            filter_only: self.filter_only,
            seed: self.seed,
            max_evals: m.max_evals,
        };
        spec.validate().map_err(|e| bad(e.to_string()))?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.refit_interval == 0 {
            return Err(CliError::Config("refit_interval must be at least 1".into()));
        }
        if self.interval_seconds == 0 || 86_400 % self.interval_seconds != 0 {
            return Err(CliError::Config("interval_seconds must divide a day".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for m in &self.models {
            if !names.insert(&m.name) {
                return Err(CliError::Config(format!("duplicate model name `{}`", m.name)));
            }
            self.predictor(m)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_set() {
        let c = RunConfig::default();
        assert_eq!(c.models.len(), 4);
        assert_eq!(c.models[0].order, Some([13, 1, 16]));
        assert_eq!(c.seasonal.order().unwrap(), SeasonalOrder::new(1, 0, 1, 24).unwrap());
        assert_eq!(c.grid.p.values().len(), 25);
        assert_eq!(c.top, 10);
        assert!(c.validate().is_ok());
        let hw = c.predictor(&c.models[3]).unwrap();
        assert_eq!(hw.period, 288);
        assert!(c.predictor(&c.models[2]).unwrap().exog);
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let err = RunConfig::from_json(r#"{"sede": 1, "grid": {"pp": [1]}, "models": [{"name": "a", "kind": "arima", "order": [1,0,0], "colour": 1}]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("sede") && err.contains("grid.pp") && err.contains("models[0].colour"), "{err}");
    }

    #[test]
    fn ranges_and_lists() {
        let c = RunConfig::from_json(r#"{"grid": {"p": [0, 2], "q": {"from": 1, "to": 3}}}"#).unwrap();
        assert_eq!(c.grid.p.values(), vec![0, 2]);
        assert_eq!(c.grid.q.values(), vec![1, 2, 3]);
    }

    #[test]
    fn flags_override_file() {
        let mut c = RunConfig::from_json(r#"{"seed": 3, "jobs": 2}"#).unwrap();
        c.apply(&Overrides {
            seed: Some(9),
            filter_only: true,
            ..Default::default()
        });
        assert_eq!((c.seed, c.jobs, c.filter_only), (9, 2, true));
    }

    #[test]
    fn bad_model_names_rejected() {
        let c = RunConfig::from_json(r#"{"models": [{"name": "../x", "kind": "arima", "order": [1,0,0]}]}"#).unwrap();
        assert!(c.validate().is_err());
    }
}
