//! Run configuration in TOML. Every field has a default; a config file only
//! overrides what it names. `EDRLAB_CONFIG` supplies the path when no
//! `--config` flag is given.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_ENV_VAR: &str = "EDRLAB_CONFIG";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub hbar: f64,
    pub seed: u64,
    pub grid: GridConfig,
    pub sweep: SweepSettings,
    pub tolerances: Tolerances,
    pub counts: Counts,
    pub models: BTreeMap<String, String>,
    pub states: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub span_sigmas: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub theta_magnitudes: Vec<f64>,
    pub width_divisors: Vec<f64>,
    pub eps_eig: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub determinant: f64,
    pub regime_gap: f64,
    pub closed_form: f64,
    pub oracle_rel: f64,
    pub marginal: f64,
    pub gain_independence: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Counts {
    pub symplectic: usize,
    pub regime_boundary: usize,
    pub error_free_gains: usize,
    pub error_free_states: usize,
    pub sharp_bound: usize,
    pub oracle_pairs: usize,
    pub sandwich: usize,
    pub families: usize,
    pub povm_pairs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut models = BTreeMap::new();
        models.insert("von-neumann".into(), "von-neumann".into());
        models.insert("error-free".into(), "error-free:a=1".into());
        models.insert("hyperbolic".into(), "coupling:alpha=0,beta=1,gamma=1".into());
        let mut states = BTreeMap::new();
        states.insert("ground".into(), "ground".into());
        states.insert("contractive".into(), "contractive:r=0.3".into());
        states.insert("squeezed".into(), "squeezed:r=0.5".into());
        Self {
            hbar: 1.0,
            seed: 0x0ED12AB,
            grid: GridConfig::default(),
            sweep: SweepSettings::default(),
            tolerances: Tolerances::default(),
            counts: Counts::default(),
            models,
            states,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 4096,
            span_sigmas: 12.0,
        }
    }
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            theta_magnitudes: vec![1.0, 10.0, 100.0, 1000.0],
            width_divisors: vec![1.0, 4.0, 16.0],
            eps_eig: 0.01,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            determinant: 1e-12,
            regime_gap: 1e-8,
            closed_form: 1e-9,
            oracle_rel: 1e-6,
            marginal: 1e-9,
            gain_independence: 1e-12,
        }
    }
}

impl Default for Counts {
    fn default() -> Self {
        Self {
            symplectic: 10_000,
            regime_boundary: 100,
            error_free_gains: 50,
            error_free_states: 20,
            sharp_bound: 5_000,
            oracle_pairs: 100,
            sandwich: 1_000,
            families: 20,
            povm_pairs: 10,
        }
    }
}

impl RunConfig {
    pub fn core_sweep(&self) -> edr_core::SweepConfig {
        edr_core::SweepConfig {
            theta_magnitudes: self.sweep.theta_magnitudes.clone(),
            width_divisors: self.sweep.width_divisors.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(CliError::Usage(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !self.grid.n.is_power_of_two() || self.grid.n < 16 {
            return Err(CliError::Usage(format!(
                "grid.n must be a power of two of at least 16, got {}",
                self.grid.n
            )));
        }
        if !(self.sweep.eps_eig > 0.0) {
            return Err(CliError::Usage("sweep.eps_eig must be positive".into()));
        }
        let t = &self.tolerances;
        for (name, value) in [
            ("determinant", t.determinant),
            ("regime_gap", t.regime_gap),
            ("closed_form", t.closed_form),
            ("oracle_rel", t.oracle_rel),
            ("marginal", t.marginal),
            ("gain_independence", t.gain_independence),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CliError::Usage(format!(
                    "tolerances.{name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Loads configuration: explicit path, else `EDRLAB_CONFIG`, else defaults.
pub fn load(explicit: Option<&Path>) -> Result<RunConfig, CliError> {
    let path = match explicit {
        Some(path) => Some(path.to_path_buf()),
        None => std::env::var_os(CONFIG_ENV_VAR).map(Into::into),
    };
    let config = match path {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    config.validate()?;
    Ok(config)
}
