//! Command-line front end: configuration loading, command dispatch, CSV
//! artifact output.

// validations use the `!(x > 0.0)` form so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

use error::{CliError, ErrorKind};
use std::path::Path;

/// Load and validate a config from a file path or a named preset.
pub fn load(
    config_path: Option<&Path>,
    preset: Option<&str>,
) -> Result<config::Validated, CliError> {
    let cfg = match (config_path, preset) {
        (Some(path), None) => config::ToolConfig::from_file(path)?,
        (None, Some(name)) => {
            let text = presets::lookup(name).ok_or_else(|| {
                CliError::new(
                    ErrorKind::Config,
                    format!(
                        "unknown preset '{name}'; available: {}",
                        presets::names().join(", ")
                    ),
                )
            })?;
            config::ToolConfig::from_toml(text)?
        }
        (Some(_), Some(_)) => {
            return Err(CliError::new(
                ErrorKind::Config,
                "--config and --seed-preset are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::new(
                ErrorKind::Config,
                "either --config <path> or --seed-preset <name> is required".into(),
            ))
        }
    };
    let validated = config::validate(cfg)?;
    for w in &validated.warnings {
        eprintln!("warning: {w}");
    }
    Ok(validated)
}
