//! Supremum-based error and disturbance measures.
//!
//! The state-uniform quantities are suprema of the RMS error and disturbance
//! over all input states. For linear models they have a closed case analysis:
//! finite exactly when the relevant coefficient pins the formula to the probe
//! slot, infinite otherwise. The analytic split is authoritative here; the
//! numeric sweeps corroborate it but only ever report "diverging" — a finite
//! sweep cannot certify infinity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moments::{rms_disturbance, rms_error, GaussianState};
use crate::symplectic::TransferMatrix;

/// Coefficient tolerance for the finite/infinite case split.
const CASE_TOLERANCE: f64 = 1e-12;

/// Finite values at or below this are treated as exact zeros when combining
/// verdicts; solved matrices carry ulp-level coefficient residue.
const ZERO_TOLERANCE: f64 = 1e-12;

/// Value of a supremum over all input states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtendedValue {
    Finite(f64),
    Infinite,
}

impl ExtendedValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedValue::Finite(_))
    }

    fn is_zero(&self) -> bool {
        matches!(self, ExtendedValue::Finite(v) if v.abs() <= ZERO_TOLERANCE)
    }
}

/// Product of two extended values; `Indeterminate` is the 0·∞ case and is
/// never coerced to either factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ProductVerdict {
    Finite(f64),
    Infinite,
    Indeterminate,
}

/// A product verdict plus, when finite, whether it clears `ℏ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub verdict: ProductVerdict,
    pub meets_bound: Option<bool>,
}

/// Uniform RMS error `sup_ψ ε(Q, ψ)`: finite `|d|·‖Q̄ξ‖` when `c = 1`,
/// infinite otherwise (the `(c−1)Q` term grows without bound).
pub fn uniform_error(m: &TransferMatrix, xi: &GaussianState) -> ExtendedValue {
    if (m.c() - 1.0).abs() <= CASE_TOLERANCE {
        ExtendedValue::Finite(m.d().abs() * xi.q_moments().second_moment.sqrt())
    } else {
        ExtendedValue::Infinite
    }
}

/// Uniform RMS disturbance `sup_ψ η(P, ψ)`: finite `|c|·‖P̄ξ‖` when `d = 1`,
/// infinite otherwise.
pub fn uniform_disturbance(m: &TransferMatrix, xi: &GaussianState) -> ExtendedValue {
    if (m.d() - 1.0).abs() <= CASE_TOLERANCE {
        ExtendedValue::Finite(m.c().abs() * xi.p_moments().second_moment.sqrt())
    } else {
        ExtendedValue::Infinite
    }
}

fn combine(error: ExtendedValue, disturbance: ExtendedValue, hbar: f64) -> VerdictReport {
    let verdict = match (error, disturbance) {
        (ExtendedValue::Finite(e), ExtendedValue::Finite(d)) => ProductVerdict::Finite(e * d),
        (a @ ExtendedValue::Finite(_), ExtendedValue::Infinite) if a.is_zero() => {
            ProductVerdict::Indeterminate
        }
        (ExtendedValue::Infinite, b @ ExtendedValue::Finite(_)) if b.is_zero() => {
            ProductVerdict::Indeterminate
        }
        _ => ProductVerdict::Infinite,
    };
    let meets_bound = match verdict {
        ProductVerdict::Finite(v) => Some(v >= hbar / 2.0 - 1e-12),
        _ => None,
    };
    VerdictReport {
        verdict,
        meets_bound,
    }
}

/// Product of the uniform error and disturbance for a fixed probe state.
pub fn appleby_product(m: &TransferMatrix, xi: &GaussianState, hbar: f64) -> VerdictReport {
    combine(uniform_error(m, xi), uniform_disturbance(m, xi), hbar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Error,
    Disturbance,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WitnessError {
    /// The requested quantity is state-independent for this matrix, so no
    /// input state can push it past an arbitrary target.
    #[error("the {0:?} closed form does not depend on the object state for this matrix")]
    NotDivergent(Quantity),
}

/// Constructs an admissible displaced state pushing the requested RMS
/// quantity past `target` — a finite certificate that the supremum over
/// states is unbounded.
pub fn divergence_witness(
    m: &TransferMatrix,
    xi: &GaussianState,
    target: f64,
    which: Quantity,
    hbar: f64,
) -> Result<GaussianState, WitnessError> {
    assert!(target > 0.0, "witness target must be positive");
    let reach = target + 1.0;
    match which {
        Quantity::Error => {
            let gain = m.c() - 1.0;
            if gain.abs() <= CASE_TOLERANCE {
                return Err(WitnessError::NotDivergent(Quantity::Error));
            }
            // ε ≥ |⟨(c−1)Q + dQ̄⟩|; aim the mean at `reach`.
            let mean_q = (reach - m.d() * xi.mean_q()) / gain;
            Ok(GaussianState::displaced(mean_q, 0.0, hbar).expect("displaced ground state"))
        }
        Quantity::Disturbance => {
            let gain = m.d() - 1.0;
            if gain.abs() <= CASE_TOLERANCE {
                return Err(WitnessError::NotDivergent(Quantity::Disturbance));
            }
            // η ≥ |⟨(d−1)P − cP̄⟩|
            let mean_p = (reach + m.c() * xi.mean_p()) / gain;
            Ok(GaussianState::displaced(0.0, mean_p, hbar).expect("displaced ground state"))
        }
    }
}

/// `[max ε over the family]·[max η over the family]` — what a finite set of
/// probe runs can actually certify.
pub fn finite_family_sup(
    m: &TransferMatrix,
    xi: &GaussianState,
    family: &[GaussianState],
) -> f64 {
    assert!(!family.is_empty(), "state family must be nonempty");
    let max_error = family
        .iter()
        .map(|psi| rms_error(m, psi, xi))
        .fold(0.0f64, f64::max);
    let max_disturbance = family
        .iter()
        .map(|psi| rms_disturbance(m, psi, xi))
        .fold(0.0f64, f64::max);
    max_error * max_disturbance
}

/// RMS deviation of the outcome distribution from the reference point θ:
/// `D² = ⟨(cQ + dQ̄ − θ)²⟩` over the product state.
pub fn blw_deviation(
    m: &TransferMatrix,
    psi: &GaussianState,
    xi: &GaussianState,
    theta: f64,
) -> f64 {
    let c = m.c();
    let d = m.d();
    // variance-plus-offset form of the raw second moment; avoids the
    // catastrophic cancellation of expanding around zero for large θ
    let offset = c * psi.mean_q() + d * xi.mean_q() - theta;
    let sq = c * c * psi.var_q() + d * d * xi.var_q() + offset * offset;
    sq.max(0.0).sqrt()
}

/// Momentum-sector analog of [`blw_deviation`]: the outcome operator is
/// `dP − cP̄`.
pub fn blw_momentum_deviation(
    m: &TransferMatrix,
    psi: &GaussianState,
    xi: &GaussianState,
    theta: f64,
) -> f64 {
    let d = m.d();
    let c = m.c();
    let offset = d * psi.mean_p() - c * xi.mean_p() - theta;
    let sq = d * d * psi.var_p() + c * c * xi.var_p() + offset * offset;
    sq.max(0.0).sqrt()
}

/// Reference points swept when estimating the constrained suprema: signed
/// multiples of the probe scale, with a ladder of eigenstate widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub theta_magnitudes: Vec<f64>,
    pub width_divisors: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            theta_magnitudes: vec![1.0, 10.0, 100.0, 1000.0],
            width_divisors: vec![1.0, 4.0, 16.0],
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.theta_magnitudes.is_empty() || self.width_divisors.is_empty() {
            return Err(ConfigError::EmptySweep);
        }
        if self
            .theta_magnitudes
            .iter()
            .chain(&self.width_divisors)
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(ConfigError::InvalidEntry);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("sweep configuration must contain at least one magnitude and one width")]
    EmptySweep,
    #[error("sweep entries must be positive and finite")]
    InvalidEntry,
    #[error("approximate-eigenstate width must be positive, got {0}")]
    InvalidEpsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Converged,
    Diverging,
}

/// Largest deviation found by the sweep plus a growth verdict. `Diverging`
/// means the per-magnitude maxima kept growing through the final decades;
/// it never claims an infinite value outright.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupremumEstimate {
    pub value: f64,
    pub sweep_max: f64,
    pub trend: Trend,
}

fn sweep_estimate(
    scale: f64,
    eps_eig: f64,
    sweep: &SweepConfig,
    mut deviation_at: impl FnMut(f64, f64) -> f64,
) -> SupremumEstimate {
    let mut decade_maxima = Vec::with_capacity(sweep.theta_magnitudes.len());
    for &magnitude in &sweep.theta_magnitudes {
        let mut decade_max = f64::NEG_INFINITY;
        for sign in [-1.0, 1.0] {
            let theta = sign * magnitude * scale;
            for &divisor in &sweep.width_divisors {
                let width = eps_eig / divisor;
                decade_max = decade_max.max(deviation_at(theta, width));
            }
        }
        decade_maxima.push(decade_max);
    }

    let value = decade_maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = &decade_maxima[decade_maxima.len().saturating_sub(4)..];
    let growing = tail.len() >= 2
        && tail
            .windows(2)
            .all(|pair| pair[1] > pair[0] * (1.0 + 1e-9) + 1e-300);
    SupremumEstimate {
        value,
        sweep_max: scale
            * sweep
                .theta_magnitudes
                .iter()
                .copied()
                .fold(0.0f64, f64::max),
        trend: if growing {
            Trend::Diverging
        } else {
            Trend::Converged
        },
    }
}

/// Estimates the constrained supremum `sup{D(ψ; θ)}` over approximate
/// position eigenstates: Gaussians centered at θ with `‖(Q−θ)ψ‖ = √var_q ≤
/// eps_eig` exactly, swept over a geometric θ range.
pub fn blw_delta_c_estimate(
    m: &TransferMatrix,
    xi: &GaussianState,
    eps_eig: f64,
    sweep: &SweepConfig,
    hbar: f64,
) -> Result<SupremumEstimate, ConfigError> {
    sweep.validate()?;
    if !(eps_eig > 0.0 && eps_eig.is_finite()) {
        return Err(ConfigError::InvalidEpsilon(eps_eig));
    }
    let scale = xi.q_moments().second_moment.sqrt().max(1.0);
    Ok(sweep_estimate(scale, eps_eig, sweep, |theta, width| {
        let psi = GaussianState::min_uncertainty(width * width, 0.0, hbar)
            .expect("narrow Gaussian is admissible")
            .with_means(theta, 0.0);
        blw_deviation(m, &psi, xi, theta)
    }))
}

/// Momentum analog: approximate momentum eigenstates with `√var_p ≤ eps_eig`.
pub fn blw_delta_c_disturbance_estimate(
    m: &TransferMatrix,
    xi: &GaussianState,
    eps_eig: f64,
    sweep: &SweepConfig,
    hbar: f64,
) -> Result<SupremumEstimate, ConfigError> {
    sweep.validate()?;
    if !(eps_eig > 0.0 && eps_eig.is_finite()) {
        return Err(ConfigError::InvalidEpsilon(eps_eig));
    }
    let scale = xi.p_moments().second_moment.sqrt().max(1.0);
    Ok(sweep_estimate(scale, eps_eig, sweep, |theta, width| {
        // var_p = width² with the position width following from saturation
        let var_q = hbar * hbar / (4.0 * width * width);
        let psi = GaussianState::min_uncertainty(var_q, 0.0, hbar)
            .expect("narrow momentum Gaussian is admissible")
            .with_means(0.0, theta);
        blw_momentum_deviation(m, &psi, xi, theta)
    }))
}

/// Combined verdict through the analytic equivalence with the uniform
/// quantities: the constrained suprema equal the uniform error and
/// disturbance for every linear model.
pub fn blw_product_verdict(m: &TransferMatrix, xi: &GaussianState, hbar: f64) -> VerdictReport {
    combine(uniform_error(m, xi), uniform_disturbance(m, xi), hbar)
}
