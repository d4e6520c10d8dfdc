//! Run configuration: one JSON document drives every experiment. Parsing
//! validates all fields and reports every violation, not just the first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MaterialLaw;
use crate::stepper::{Scheme, StepperConfig};

pub const EXPERIMENT_NAMES: [&str; 8] = [
    "simulate",
    "sweep",
    "verify-operators",
    "example42",
    "limit-convergence",
    "acoustic-decay",
    "validate-model",
    "linearized-probe",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            d: 2,
            n: 64,
            length: std::f64::consts::TAU,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Coefficient-set selector; `perfect-gas` is the only built-in preset.
    pub preset: String,
    pub r_gas: f64,
    pub c_v: f64,
    pub alpha: f64,
    pub conductivity: MaterialLaw,
    pub shear_viscosity: MaterialLaw,
    pub bulk_viscosity: MaterialLaw,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            preset: "perfect-gas".to_string(),
            r_gas: 1.0,
            c_v: 1.5,
            alpha: 1.0,
            conductivity: MaterialLaw::constant(1.0),
            shear_viscosity: MaterialLaw::constant(1.0),
            bulk_viscosity: MaterialLaw::constant(0.0),
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<crate::model::CoefficientSet> {
        match self.preset.as_str() {
            "perfect-gas" => crate::model::perfect_gas(
                self.r_gas,
                self.c_v,
                self.conductivity,
                self.shear_viscosity,
                self.bulk_viscosity,
                self.alpha,
            ),
            other => Err(Error::InvalidParameter(format!(
                "unknown coefficient preset `{other}`; available: perfect-gas"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamsConfig {
    pub eps: Vec<f64>,
    pub mu: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            eps: vec![0.5, 0.25, 0.125, 0.0625],
            mu: vec![0.0, 1.0],
            kappa: vec![0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub seed: u64,
    /// Max wavenumber of the generated data (must not exceed n/3).
    pub band: usize,
    /// Target initial-data norm.
    pub target_norm: f64,
    /// Sobolev order of the monitors.
    pub sobolev_order: f64,
    /// Enforce the limit constraint on the initial data.
    pub well_prepared: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            seed: 1,
            band: 4,
            target_norm: 1.0,
            sobolev_order: 4.0,
            well_prepared: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: "out".to_string(),
            formats: vec!["csv".into(), "json".into(), "svg".into()],
        }
    }
}

fn default_stepper() -> StepperConfig {
    StepperConfig {
        scheme: Scheme::Erk4Exponential,
        dt: None,
        dt_max: 5e-3,
        safety: 0.4,
        t_end: 0.25,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default = "default_stepper")]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: "sweep".to_string(),
            grid: GridConfig::default(),
            model: ModelConfig::default(),
            params: ParamsConfig::default(),
            stepper: default_stepper(),
            data: DataConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Parses and validates a JSON config. Syntax errors carry line/column;
/// semantic errors are collected with their key paths and reported together.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        errors: vec![format!(
            "syntax/shape error at line {}, column {}: {e}",
            e.line(),
            e.column()
        )],
    })?;
    validate_config(&cfg)?;
    Ok(cfg)
}

/// Validates every field boundary, collecting all errors.
pub fn validate_config(cfg: &RunConfig) -> Result<()> {
    let mut errors = Vec::new();
    if !EXPERIMENT_NAMES.contains(&cfg.experiment.as_str()) {
        errors.push(format!(
            "experiment: unknown name `{}`; available: {}",
            cfg.experiment,
            EXPERIMENT_NAMES.join(", ")
        ));
    }
    if !(1..=3).contains(&cfg.grid.d) {
        errors.push(format!("grid.d: must be 1, 2 or 3, got {}", cfg.grid.d));
    }
    if cfg.grid.n < 8 || cfg.grid.n % 2 != 0 {
        errors.push(format!(
            "grid.n: must be even and at least 8, got {}",
            cfg.grid.n
        ));
    }
    if !(cfg.grid.length > 0.0) {
        errors.push(format!(
            "grid.length: must be positive, got {}",
            cfg.grid.length
        ));
    }
    if cfg.params.eps.is_empty() {
        errors.push("params.eps: must not be empty".to_string());
    }
    for (i, &e) in cfg.params.eps.iter().enumerate() {
        if !(e > 0.0 && e <= 1.0) {
            errors.push(format!("params.eps[{i}]: must lie in (0,1], got {e}"));
        }
    }
    for (name, list) in [("mu", &cfg.params.mu), ("kappa", &cfg.params.kappa)] {
        if list.is_empty() {
            errors.push(format!("params.{name}: must not be empty"));
        }
        for (i, &v) in list.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                errors.push(format!("params.{name}[{i}]: must lie in [0,1], got {v}"));
            }
        }
    }
    if let Some(dt) = cfg.stepper.dt {
        if !(dt > 0.0) {
            errors.push(format!("stepper.dt: must be positive, got {dt}"));
        }
    }
    if !(cfg.stepper.dt_max > 0.0) {
        errors.push(format!(
            "stepper.dt_max: must be positive, got {}",
            cfg.stepper.dt_max
        ));
    }
    if !(cfg.stepper.safety > 0.0 && cfg.stepper.safety <= 1.0) {
        errors.push(format!(
            "stepper.safety: must lie in (0,1], got {}",
            cfg.stepper.safety
        ));
    }
    if cfg.stepper.t_end < 0.0 {
        errors.push(format!(
            "stepper.t_end: must be nonnegative, got {}",
            cfg.stepper.t_end
        ));
    }
    if cfg.data.band > cfg.grid.n / 3 {
        errors.push(format!(
            "data.band: {} exceeds the dealias limit n/3 = {}",
            cfg.data.band,
            cfg.grid.n / 3
        ));
    }
    if cfg.data.band == 0 {
        errors.push("data.band: must be at least 1".to_string());
    }
    if !(cfg.data.target_norm >= 0.0) {
        errors.push(format!(
            "data.target_norm: must be nonnegative, got {}",
            cfg.data.target_norm
        ));
    }
    if !(cfg.model.r_gas > 0.0) {
        errors.push(format!(
            "model.r_gas: must be positive, got {}",
            cfg.model.r_gas
        ));
    }
    if !(cfg.model.c_v > 0.0) {
        errors.push(format!("model.c_v: must be positive, got {}", cfg.model.c_v));
    }
    if cfg.model.alpha < 0.0 {
        errors.push(format!(
            "model.alpha: must be nonnegative, got {}",
            cfg.model.alpha
        ));
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Config { errors })
    }
}

/// Applies a `section.key=value` override to a config (the CLI `--set` form).
pub fn apply_override(cfg: &mut RunConfig, spec: &str) -> Result<()> {
    let (path, value) = spec.split_once('=').ok_or_else(|| {
        Error::InvalidParameter(format!("override `{spec}` is not of the form key=value"))
    })?;
    let mut doc = serde_json::to_value(&*cfg)?;
    let (parent_path, key) = match path.rsplit_once('.') {
        Some((p, k)) => (format!("/{}", p.replace('.', "/")), k),
        None => (String::new(), path),
    };
    let parent = doc.pointer_mut(&parent_path).ok_or_else(|| {
        Error::InvalidParameter(format!("override path `{path}` does not address an object"))
    })?;
    let obj = parent.as_object_mut().ok_or_else(|| {
        Error::InvalidParameter(format!("override path `{path}` does not address an object"))
    })?;
    let parsed: serde_json::Value = serde_json::from_str(value)
        .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
    obj.insert(key.to_string(), parsed);
    *cfg = serde_json::from_value(doc)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_populates_defaults() {
        let cfg = parse_config(r#"{"experiment": "sweep"}"#).unwrap();
        assert_eq!(cfg.grid.n, 64);
        assert_eq!(cfg.params.eps.len(), 4);
        assert_eq!(cfg.data.seed, 1);
    }

    #[test]
    fn eps_zero_rejected_with_key_path() {
        let err =
            parse_config(r#"{"experiment": "sweep", "params": {"eps": [0.5, 0.0]}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("params.eps[1]"), "{msg}");
    }

    #[test]
    fn unknown_experiment_lists_available() {
        let err = parse_config(r#"{"experiment": "warp-drive"}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("warp-drive") && msg.contains("verify-operators"));
    }

    #[test]
    fn all_errors_reported_together() {
        let err = parse_config(
            r#"{"experiment": "bogus", "grid": {"n": 7}, "params": {"eps": [2.0]}}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("grid.n") && msg.contains("params.eps[0]"));
    }

    #[test]
    fn syntax_error_has_location() {
        let err = parse_config("{not json").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let cfg2 = parse_config(&text).unwrap();
        let text2 = serde_json::to_string_pretty(&cfg2).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn override_sets_nested_key() {
        let mut cfg = RunConfig::default();
        apply_override(&mut cfg, "grid.n=128").unwrap();
        assert_eq!(cfg.grid.n, 128);
        apply_override(&mut cfg, "params.eps=[0.5,0.25]").unwrap();
        assert_eq!(cfg.params.eps, vec![0.5, 0.25]);
        apply_override(&mut cfg, "output.dir=\"elsewhere\"").unwrap();
        assert_eq!(cfg.output.dir, "elsewhere");
        apply_override(&mut cfg, "output.dir=plain").unwrap();
        assert_eq!(cfg.output.dir, "plain");
    }
}
