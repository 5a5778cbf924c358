//! Closed-form quadrature-moment calculus for the solved dynamics.
//!
//! The RMS error and disturbance of a linear measurement depend on the input
//! states only through first and second quadrature moments, so everything in
//! this module works on a five-number moment summary per mode. Object and
//! probe are always in a product state; correlated initial states are not
//! representable here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symplectic::TransferMatrix;

/// Slack used when checking admissibility and bound saturation, to absorb
/// ulp-level rounding in moment products.
const MOMENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StateError {
    #[error("state moments must be finite")]
    NonFinite,
    #[error("variances must be positive, got var_q = {var_q}, var_p = {var_p}")]
    NonPositiveVariance { var_q: f64, var_p: f64 },
    #[error("uncertainty product {product} is below the admissible bound {bound}")]
    Inadmissible { product: f64, bound: f64 },
}

/// First and second moments of a single mode: means, variances, and the
/// symmetrized position-momentum covariance `⟨{Q−⟨Q⟩, P−⟨P⟩}⟩/2`.
///
/// For non-Gaussian states this acts as a plain moment summary; every closed
/// form in this module is exact for any state with the given moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    mean_q: f64,
    mean_p: f64,
    var_q: f64,
    var_p: f64,
    cov_qp: f64,
}

impl GaussianState {
    /// Validates positivity and the admissibility condition
    /// `var_q·var_p − cov_qp² ≥ ℏ²/4`.
    pub fn new(
        mean_q: f64,
        mean_p: f64,
        var_q: f64,
        var_p: f64,
        cov_qp: f64,
        hbar: f64,
    ) -> Result<Self, StateError> {
        let fields = [mean_q, mean_p, var_q, var_p, cov_qp, hbar];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(StateError::NonFinite);
        }
        if var_q <= 0.0 || var_p <= 0.0 {
            return Err(StateError::NonPositiveVariance { var_q, var_p });
        }
        let product = var_q * var_p - cov_qp * cov_qp;
        let bound = hbar * hbar / 4.0;
        if product < bound - MOMENT_SLACK * (1.0 + bound) {
            return Err(StateError::Inadmissible { product, bound });
        }
        Ok(Self {
            mean_q,
            mean_p,
            var_q,
            var_p,
            cov_qp,
        })
    }

    /// Minimum-uncertainty state with `var_q = var_p = ℏ/2` and zero means.
    pub fn ground(hbar: f64) -> Self {
        Self::new(0.0, 0.0, hbar / 2.0, hbar / 2.0, 0.0, hbar).expect("ground state is admissible")
    }

    /// Ground state displaced to `(mean_q, mean_p)`.
    pub fn displaced(mean_q: f64, mean_p: f64, hbar: f64) -> Result<Self, StateError> {
        Self::new(mean_q, mean_p, hbar / 2.0, hbar / 2.0, 0.0, hbar)
    }

    /// Squeezed vacuum: `var_q = (ℏ/2)e^{−2r}`, `var_p = (ℏ/2)e^{2r}`.
    pub fn squeezed(r: f64, hbar: f64) -> Result<Self, StateError> {
        let vq = hbar / 2.0 * (-2.0 * r).exp();
        let vp = hbar / 2.0 * (2.0 * r).exp();
        Self::new(0.0, 0.0, vq, vp, 0.0, hbar)
    }

    /// Minimum-uncertainty state with negative position-momentum correlation
    /// `cov_qp = −r` at `var_q = ℏ/2`; its position spread shrinks under free
    /// evolution, which is what makes the error-free model useful.
    pub fn contractive(r: f64, hbar: f64) -> Result<Self, StateError> {
        let var_q = hbar / 2.0;
        let cov = -r.abs();
        let var_p = (hbar * hbar / 4.0 + cov * cov) / var_q;
        Self::new(0.0, 0.0, var_q, var_p, cov, hbar)
    }

    /// Minimum-uncertainty state with the given position variance and
    /// covariance; the momentum variance follows from saturation.
    pub fn min_uncertainty(var_q: f64, cov_qp: f64, hbar: f64) -> Result<Self, StateError> {
        if !(var_q > 0.0) {
            return Err(StateError::NonPositiveVariance { var_q, var_p: 0.0 });
        }
        let var_p = (hbar * hbar / 4.0 + cov_qp * cov_qp) / var_q;
        Self::new(0.0, 0.0, var_q, var_p, cov_qp, hbar)
    }

    /// Same second moments, displaced means.
    pub fn with_means(mut self, mean_q: f64, mean_p: f64) -> Self {
        self.mean_q = mean_q;
        self.mean_p = mean_p;
        self
    }

    pub fn mean_q(&self) -> f64 {
        self.mean_q
    }

    pub fn mean_p(&self) -> f64 {
        self.mean_p
    }

    pub fn var_q(&self) -> f64 {
        self.var_q
    }

    pub fn var_p(&self) -> f64 {
        self.var_p
    }

    pub fn cov_qp(&self) -> f64 {
        self.cov_qp
    }

    /// `var_q·var_p − cov_qp²`, the quantity bounded below by ℏ²/4.
    pub fn uncertainty_product(&self) -> f64 {
        self.var_q * self.var_p - self.cov_qp * self.cov_qp
    }

    pub fn q_moments(&self) -> Moments {
        Moments::from_mean_var(self.mean_q, self.var_q)
    }

    pub fn p_moments(&self) -> Moments {
        Moments::from_mean_var(self.mean_p, self.var_p)
    }
}

/// Mean and raw second moment of a single quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
}

impl Moments {
    pub fn from_mean_var(mean: f64, var: f64) -> Self {
        Self {
            mean,
            second_moment: var + mean * mean,
        }
    }
}

/// RMS error of the meter readout for the object position:
/// `ε² = ⟨[(c−1)Q + dQ̄]²⟩` over the product state.
pub fn rms_error(m: &TransferMatrix, psi: &GaussianState, xi: &GaussianState) -> f64 {
    let q = psi.q_moments();
    let q_bar = xi.q_moments();
    let cm1 = m.c() - 1.0;
    let d = m.d();
    let sq = cm1 * cm1 * q.second_moment
        + 2.0 * cm1 * d * q.mean * q_bar.mean
        + d * d * q_bar.second_moment;
    sq.max(0.0).sqrt()
}

/// RMS momentum disturbance across the interaction:
/// `η² = ⟨[(d−1)P − cP̄]²⟩` over the product state.
pub fn rms_disturbance(m: &TransferMatrix, psi: &GaussianState, xi: &GaussianState) -> f64 {
    let p = psi.p_moments();
    let p_bar = xi.p_moments();
    let dm1 = m.d() - 1.0;
    let c = m.c();
    let sq = dm1 * dm1 * p.second_moment - 2.0 * dm1 * c * p.mean * p_bar.mean
        + c * c * p_bar.second_moment;
    sq.max(0.0).sqrt()
}

/// Disturbance of the error-free family,
/// `η = √[σ(P)² + σ(P̄)² + (⟨P⟩ + ⟨P̄⟩)²]`; independent of the meter gain.
pub fn error_free_disturbance(psi: &GaussianState, xi: &GaussianState) -> f64 {
    let shift = psi.mean_p + xi.mean_p;
    (psi.var_p + xi.var_p + shift * shift).sqrt()
}

/// Kennard check `σ(Q)·σ(P) ≥ ℏ/2` on a single state. Admissible states
/// always pass; exposed as a guard.
pub fn kennard_check(s: &GaussianState, hbar: f64) -> bool {
    s.var_q.sqrt() * s.var_p.sqrt() >= hbar / 2.0 - 1e-12
}

/// Error, disturbance, their product, and how the product compares with the
/// sharp bound `|1−c−d|ℏ/2` and with ℏ/2 itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdrCheck {
    pub epsilon: f64,
    pub eta: f64,
    pub product: f64,
    pub sharp_bound: f64,
    pub satisfies_sharp: bool,
    pub satisfies_heisenberg: bool,
    pub violates_heisenberg: bool,
}

pub fn edr_check(
    m: &TransferMatrix,
    psi: &GaussianState,
    xi: &GaussianState,
    hbar: f64,
) -> EdrCheck {
    let epsilon = rms_error(m, psi, xi);
    let eta = rms_disturbance(m, psi, xi);
    let product = epsilon * eta;
    let sharp_bound = m.sharp_bound(hbar).bound;
    // ulp-level slack keeps saturating cases from flapping
    let scale = MOMENT_SLACK * (1.0 + product.abs());
    let satisfies_heisenberg = product >= hbar / 2.0 - scale;
    EdrCheck {
        epsilon,
        eta,
        product,
        sharp_bound,
        satisfies_sharp: product >= sharp_bound - scale,
        satisfies_heisenberg,
        violates_heisenberg: !satisfies_heisenberg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::CouplingParams;

    fn von_neumann() -> TransferMatrix {
        CouplingParams::new(0.0, 0.0, 1.0).unwrap().solve_dynamics()
    }

    #[test]
    fn error_free_model_has_zero_error_for_any_state() {
        let m = TransferMatrix::error_free(1.7);
        let psi = GaussianState::displaced(2.0, -3.0, 1.0).unwrap();
        let xi = GaussianState::squeezed(0.4, 1.0).unwrap();
        assert_eq!(rms_error(&m, &psi, &xi), 0.0);
    }

    #[test]
    fn von_neumann_error_is_probe_position_spread() {
        let m = von_neumann();
        let psi = GaussianState::displaced(1.3, 0.2, 1.0).unwrap();
        let xi = GaussianState::ground(1.0);
        assert!((rms_error(&m, &psi, &xi) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identity_model_error_adds_object_and_probe_spreads() {
        let m = TransferMatrix::identity();
        let psi = GaussianState::ground(1.0);
        let xi = GaussianState::ground(1.0);
        assert!((rms_error(&m, &psi, &xi) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_model_never_disturbs() {
        let m = TransferMatrix::identity();
        let psi = GaussianState::displaced(0.5, 2.5, 1.0).unwrap();
        let xi = GaussianState::squeezed(-0.7, 1.0).unwrap();
        assert_eq!(rms_disturbance(&m, &psi, &xi), 0.0);
    }

    #[test]
    fn error_free_disturbance_of_ground_pair_is_one() {
        let m = TransferMatrix::error_free(1.0);
        let psi = GaussianState::ground(1.0);
        let xi = GaussianState::ground(1.0);
        assert!((rms_disturbance(&m, &psi, &xi) - 1.0).abs() < 1e-15);
        assert!((error_free_disturbance(&psi, &xi) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn von_neumann_disturbance_is_probe_momentum_spread() {
        let m = von_neumann();
        let psi = GaussianState::displaced(0.0, 4.0, 1.0).unwrap();
        let xi = GaussianState::ground(1.0);
        assert!((rms_disturbance(&m, &psi, &xi) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn error_free_disturbance_displacements_can_cancel() {
        let psi = GaussianState::displaced(0.0, 3.0, 1.0).unwrap();
        let xi = GaussianState::displaced(0.0, -3.0, 1.0).unwrap();
        assert!((error_free_disturbance(&psi, &xi) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn error_free_disturbance_grows_with_momentum_displacement() {
        let xi = GaussianState::ground(1.0);
        for mean_p in [10.0, 100.0, 1000.0] {
            let psi = GaussianState::displaced(0.0, mean_p, 1.0).unwrap();
            let eta = error_free_disturbance(&psi, &xi);
            assert!(eta >= mean_p);
            assert!((eta - (1.0 + mean_p * mean_p).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn error_free_disturbance_matches_general_formula_for_every_gain() {
        let psi = GaussianState::displaced(1.0, 0.7, 1.0).unwrap();
        let xi = GaussianState::contractive(0.3, 1.0).unwrap();
        let reference = error_free_disturbance(&psi, &xi);
        for a in [-1.9, 0.0, 1.0, 2.0, 5.0] {
            let m = TransferMatrix::error_free(a);
            assert!((rms_disturbance(&m, &psi, &xi) - reference).abs() <= 1e-12);
        }
    }

    #[test]
    fn edr_check_error_free_violates_heisenberg() {
        let m = TransferMatrix::error_free(1.0);
        let psi = GaussianState::ground(1.0);
        let xi = GaussianState::ground(1.0);
        let check = edr_check(&m, &psi, &xi, 1.0);
        assert_eq!(check.product, 0.0);
        assert!(check.violates_heisenberg);
        assert!(check.satisfies_sharp);
    }

    #[test]
    fn edr_check_von_neumann_saturates_heisenberg() {
        let check = edr_check(
            &von_neumann(),
            &GaussianState::ground(1.0),
            &GaussianState::ground(1.0),
            1.0,
        );
        assert!((check.product - 0.5).abs() <= 1e-15);
        assert!(check.satisfies_heisenberg);
        assert!(!check.violates_heisenberg);
        assert!(check.satisfies_sharp);
    }

    #[test]
    fn kennard_cases() {
        assert!(kennard_check(&GaussianState::ground(1.0), 1.0));
        let wide = GaussianState::new(0.0, 0.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(kennard_check(&wide, 1.0));
        // Too-narrow moments never construct in the first place.
        assert!(matches!(
            GaussianState::new(0.0, 0.0, 0.1, 0.1, 0.0, 1.0),
            Err(StateError::Inadmissible { .. })
        ));
    }

    #[test]
    fn contractive_state_example_moments() {
        let s = GaussianState::contractive(0.3, 1.0).unwrap();
        assert!((s.var_q() - 0.5).abs() < 1e-15);
        assert!((s.var_p() - 0.68).abs() < 1e-15);
        assert!((s.cov_qp() + 0.3).abs() < 1e-15);
        assert!((s.uncertainty_product() - 0.25).abs() < 1e-15);
    }
}
