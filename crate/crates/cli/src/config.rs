//! Configuration file handling.
//!
//! One TOML file drives every command. Unknown keys are rejected, all
//! module-level invariants are re-validated at load time, and a loaded
//! config can be dumped back out (`effective_toml`) such that reloading the
//! dump yields an equivalent config.

use crate::error::{CliError, ErrorKind};
use hierpop::ratedsl::{parse_expr, Var};
use hierpop::{DelayGrid, RateSet, SizeGrid};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub gamma: String,
    pub mu: String,
    pub beta: String,
    pub w: String,
    pub alpha: f64,
    pub theta: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub ns: usize,
    pub ntau: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_lambda_lo")]
    pub lambda_lo: f64,
    #[serde(default = "default_lambda_hi")]
    pub lambda_hi: f64,
    #[serde(default = "default_lambda_samples")]
    pub lambda_samples: usize,
    /// Upper bound of the equilibrium search; derived from the rates when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub t_end: f64,
    pub history_init: String,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_outdir")]
    pub directory: PathBuf,
}

fn default_cfl() -> f64 {
    0.9
}
fn default_lambda_lo() -> f64 {
    hierpop::spectrum::DEFAULT_LAMBDA_RANGE.0
}
fn default_lambda_hi() -> f64 {
    hierpop::spectrum::DEFAULT_LAMBDA_RANGE.1
}
fn default_lambda_samples() -> usize {
    hierpop::spectrum::DEFAULT_LAMBDA_SAMPLES
}
fn default_stride() -> usize {
    1
}
fn default_outdir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            lambda_lo: default_lambda_lo(),
            lambda_hi: default_lambda_hi(),
            lambda_samples: default_lambda_samples(),
            p_max: None,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: default_outdir(),
        }
    }
}

impl ToolConfig {
    pub fn from_toml(text: &str) -> Result<ToolConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::new(ErrorKind::Config, e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<ToolConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(
                ErrorKind::Config,
                format!("cannot read config {}: {e}", path.display()),
            )
        })?;
        ToolConfig::from_toml(&text).map_err(|e| e.with_context(&format!("in {}", path.display())))
    }

    /// Dump with every default filled in; reloading reproduces this config.
    pub fn effective_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }
}

/// A validated configuration: parsed rates, grids, effective settings.
#[derive(Debug)]
pub struct Validated {
    pub config: ToolConfig,
    pub rates: RateSet,
    pub grid: SizeGrid,
    pub dgrid: DelayGrid,
    pub warnings: Vec<String>,
}

/// Re-validate every module-level invariant and compile the rate set.
pub fn validate(config: ToolConfig) -> Result<Validated, CliError> {
    let m = &config.model;
    let rates = RateSet::from_strs(&m.gamma, &m.mu, &m.beta, &m.w, m.alpha, m.theta, m.m)
        .map_err(CliError::from_rate)?;

    let grid = SizeGrid::new(config.grid.ns, m.m)
        .map_err(|e| CliError::new(ErrorKind::Config, format!("grid.ns: {e}")))?;
    let dgrid = DelayGrid::new(config.grid.ntau, m.theta)
        .map_err(|e| CliError::new(ErrorKind::Config, format!("grid.ntau: {e}")))?;
    if !(config.grid.cfl > 0.0 && config.grid.cfl <= 1.0) {
        return Err(CliError::new(
            ErrorKind::Config,
            format!("grid.cfl must lie in (0, 1], got {}", config.grid.cfl),
        ));
    }

    let a = &config.analysis;
    if !(a.lambda_lo < a.lambda_hi) {
        return Err(CliError::new(
            ErrorKind::Config,
            format!(
                "analysis.lambda_lo ({}) must be below analysis.lambda_hi ({})",
                a.lambda_lo, a.lambda_hi
            ),
        ));
    }
    if a.lambda_samples < 2 {
        return Err(CliError::new(
            ErrorKind::Config,
            "analysis.lambda_samples must be at least 2".into(),
        ));
    }
    if let Some(p_max) = a.p_max {
        if !(p_max > 0.0) {
            return Err(CliError::new(
                ErrorKind::Config,
                format!("analysis.p_max must be positive, got {p_max}"),
            ));
        }
    }

    if let Some(sim) = &config.sim {
        if !(sim.t_end > 0.0) {
            return Err(CliError::new(
                ErrorKind::Config,
                format!("sim.t_end must be positive, got {}", sim.t_end),
            ));
        }
        if sim.stride == 0 {
            return Err(CliError::new(
                ErrorKind::Config,
                "sim.stride must be at least 1".into(),
            ));
        }
        let history = parse_expr(&sim.history_init)
            .map_err(|e| CliError::new(ErrorKind::Dsl, format!("sim.history_init: {e}")))?;
        for v in [Var::Population, Var::Hierarchy, Var::Tau] {
            if history.references(v) {
                return Err(CliError::new(
                    ErrorKind::Config,
                    format!("sim.history_init may reference only s and delta, found {v}"),
                ));
            }
        }
        for &t in &sim.snapshot_times {
            if !t.is_finite() || t < 0.0 {
                return Err(CliError::new(
                    ErrorKind::Config,
                    format!("sim.snapshot_times entries must be non-negative, got {t}"),
                ));
            }
        }
    }

    // sign sampling over the grid; probe a couple of population sizes
    let warnings = rates
        .validate_on_grid(&grid, &dgrid, &[0.0, 1.0])
        .map_err(CliError::from_rate)?;

    Ok(Validated {
        config,
        rates,
        grid,
        dgrid,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
gamma = "1"
mu = "0.5"
beta = "0.5*exp(tau)*(0.7+sin(2*s)^2)*max(0,1-Q)"
w = "1"
alpha = 0.5
theta = 1.5
m = 8.0

[grid]
ns = 101
ntau = 21
"#;

    #[test]
    fn minimal_config_loads_with_defaults() {
        let cfg = ToolConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.grid.cfl, 0.9);
        assert_eq!(cfg.analysis.lambda_samples, 2000);
        assert!(cfg.sim.is_none());
        let v = validate(cfg).unwrap();
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\n[extra]\nfoo = 1\n");
        assert!(ToolConfig::from_toml(&text).is_err());
        let text = MINIMAL.replace("ns = 101", "ns = 101\nnx = 5");
        assert!(ToolConfig::from_toml(&text).is_err());
    }

    #[test]
    fn effective_dump_round_trips() {
        let mut cfg = ToolConfig::from_toml(MINIMAL).unwrap();
        cfg.sim = Some(SimSection {
            t_end: 10.0,
            history_init: "12*sin(s)^2*(8-s)^2".into(),
            stride: 5,
            snapshot_times: vec![0.0, 5.0],
        });
        let dumped = cfg.effective_toml();
        let reloaded = ToolConfig::from_toml(&dumped).unwrap();
        assert_eq!(cfg, reloaded);
    }

    #[test]
    fn expression_errors_are_dsl_errors() {
        let text = MINIMAL.replace("\"1\"\nmu", "\"1+\"\nmu");
        let cfg = ToolConfig::from_toml(&text).unwrap();
        let err = validate(cfg).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Dsl);
    }

    #[test]
    fn scalar_range_errors_are_config_errors() {
        let text = MINIMAL.replace("alpha = 0.5", "alpha = 1.0");
        let cfg = ToolConfig::from_toml(&text).unwrap();
        let err = validate(cfg).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Config);
    }

    #[test]
    fn history_variable_restriction() {
        let mut cfg = ToolConfig::from_toml(MINIMAL).unwrap();
        cfg.sim = Some(SimSection {
            t_end: 1.0,
            history_init: "P".into(),
            stride: 1,
            snapshot_times: vec![],
        });
        let err = validate(cfg).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Config);
    }
}
