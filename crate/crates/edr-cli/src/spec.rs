//! Textual model and state specifications.
//!
//! Models: `von-neumann`, `error-free:a=<x>`, or
//! `coupling:alpha=<x>,beta=<y>,gamma=<z>`.
//! States: `ground`, `squeezed:r=<x>`, `displaced:q=<x>,p=<y>`,
//! `contractive:r=<x>`, `hermite:n=<k>`, `cat:d=<x>`, or
//! `raw:mq=..,mp=..,vq=..,vp=..[,cqp=..]`.

use std::collections::BTreeMap;
use std::str::FromStr;

use edr_core::{
    cat_moments, hermite_moments, CouplingParams, GaussianState, GridWavefunction, ModelInfo,
    TransferMatrix,
};

use crate::error::CliError;

fn parse_args(spec: &str) -> Result<(String, BTreeMap<String, f64>), CliError> {
    let mut parts = spec.splitn(2, ':');
    let name = parts.next().unwrap_or("").trim().to_lowercase();
    let mut args = BTreeMap::new();
    if let Some(rest) = parts.next() {
        for pair in rest.split(',') {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected key=value, got '{pair}'")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("bad numeric value in '{pair}': {e}")))?;
            args.insert(key.trim().to_lowercase(), value);
        }
    }
    Ok((name, args))
}

fn require(args: &BTreeMap<String, f64>, key: &str, spec: &str) -> Result<f64, CliError> {
    args.get(key)
        .copied()
        .ok_or_else(|| CliError::Usage(format!("spec '{spec}' is missing '{key}='")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    VonNeumann,
    ErrorFree { a: f64 },
    Coupling { alpha: f64, beta: f64, gamma: f64 },
}

impl FromStr for ModelSpec {
    type Err = CliError;

    fn from_str(spec: &str) -> Result<Self, CliError> {
        let (name, args) = parse_args(spec)?;
        match name.as_str() {
            "von-neumann" | "von_neumann" => Ok(ModelSpec::VonNeumann),
            "error-free" | "error_free" => Ok(ModelSpec::ErrorFree {
                a: require(&args, "a", spec)?,
            }),
            "coupling" => Ok(ModelSpec::Coupling {
                alpha: require(&args, "alpha", spec)?,
                beta: require(&args, "beta", spec)?,
                gamma: require(&args, "gamma", spec)?,
            }),
            other => Err(CliError::Usage(format!("unknown model preset '{other}'"))),
        }
    }
}

impl ModelSpec {
    /// Resolves the spec into a labeled model and the matrix to analyze. The
    /// error-free preset uses the exact constraint matrix; solved couplings
    /// reproduce it only to ~1e−15 and would smear identically-zero results.
    pub fn build(&self, hbar: f64) -> Result<(ModelInfo, TransferMatrix), CliError> {
        match *self {
            ModelSpec::VonNeumann => {
                let params = CouplingParams::new(0.0, 0.0, 1.0)
                    .map_err(|e| CliError::Usage(e.to_string()))?
                    .with_hbar(hbar)?;
                let (info, matrix) =
                    ModelInfo::from_params(Some("von-neumann".to_string()), params);
                Ok((info, matrix))
            }
            ModelSpec::ErrorFree { a } => Ok(ModelInfo::error_free(a, hbar)?),
            ModelSpec::Coupling { alpha, beta, gamma } => {
                let params = CouplingParams::new(alpha, beta, gamma)
                    .map_err(|e| CliError::Usage(e.to_string()))?
                    .with_hbar(hbar)?;
                Ok(ModelInfo::from_params(None, params))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Ground,
    Squeezed { r: f64 },
    Displaced { q: f64, p: f64 },
    Contractive { r: f64 },
    Hermite { n: usize },
    Cat { d: f64 },
    Raw {
        mq: f64,
        mp: f64,
        vq: f64,
        vp: f64,
        cqp: f64,
    },
}

impl FromStr for StateSpec {
    type Err = CliError;

    fn from_str(spec: &str) -> Result<Self, CliError> {
        let (name, args) = parse_args(spec)?;
        match name.as_str() {
            "ground" => Ok(StateSpec::Ground),
            "squeezed" => Ok(StateSpec::Squeezed {
                r: require(&args, "r", spec)?,
            }),
            "displaced" => Ok(StateSpec::Displaced {
                q: require(&args, "q", spec)?,
                p: require(&args, "p", spec)?,
            }),
            "contractive" => Ok(StateSpec::Contractive {
                r: require(&args, "r", spec)?,
            }),
            "hermite" => {
                let n = require(&args, "n", spec)?;
                if n < 0.0 || n.fract() != 0.0 || n > 30.0 {
                    return Err(CliError::Usage(format!(
                        "hermite index must be an integer in 0..=30, got {n}"
                    )));
                }
                Ok(StateSpec::Hermite { n: n as usize })
            }
            "cat" => Ok(StateSpec::Cat {
                d: require(&args, "d", spec)?,
            }),
            "raw" => Ok(StateSpec::Raw {
                mq: require(&args, "mq", spec)?,
                mp: require(&args, "mp", spec)?,
                vq: require(&args, "vq", spec)?,
                vp: require(&args, "vp", spec)?,
                cqp: args.get("cqp").copied().unwrap_or(0.0),
            }),
            other => Err(CliError::Usage(format!("unknown state preset '{other}'"))),
        }
    }
}

impl StateSpec {
    /// Moment summary used by the closed forms. Exact for every preset,
    /// including the non-Gaussian ones.
    pub fn moments(&self, hbar: f64) -> Result<GaussianState, CliError> {
        Ok(match *self {
            StateSpec::Ground => GaussianState::ground(hbar),
            StateSpec::Squeezed { r } => GaussianState::squeezed(r, hbar)?,
            StateSpec::Displaced { q, p } => GaussianState::displaced(q, p, hbar)?,
            StateSpec::Contractive { r } => GaussianState::contractive(r, hbar)?,
            StateSpec::Hermite { n } => hermite_moments(n, hbar),
            StateSpec::Cat { d } => cat_moments(d, hbar),
            StateSpec::Raw {
                mq,
                mp,
                vq,
                vp,
                cqp,
            } => GaussianState::new(mq, mp, vq, vp, cqp, hbar)?,
        })
    }

    /// Sampled wavefunction for the oracle path.
    pub fn grid(&self, hbar: f64, n: usize, span: f64) -> Result<GridWavefunction, CliError> {
        Ok(match *self {
            StateSpec::Hermite { n: k } => GridWavefunction::hermite(k, hbar, n, span)?,
            StateSpec::Cat { d } => GridWavefunction::cat(d, hbar, n, span)?,
            _ => GridWavefunction::from_gaussian(&self.moments(hbar)?, hbar, n, span)?,
        })
    }
}
