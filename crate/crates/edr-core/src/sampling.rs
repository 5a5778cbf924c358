//! Deterministic random generators shared by the test suites, the
//! reproduction command, and the benchmarks.

use rand::Rng;

use crate::moments::GaussianState;
use crate::symplectic::{CouplingParams, TransferMatrix};

/// Coupling triple uniform in `[−half_width, half_width]³`.
pub fn random_coupling<R: Rng>(rng: &mut R, half_width: f64) -> CouplingParams {
    CouplingParams::new(
        rng.gen_range(-half_width..=half_width),
        rng.gen_range(-half_width..=half_width),
        rng.gen_range(-half_width..=half_width),
    )
    .expect("finite samples")
}

/// Determinant-one matrix obtained by solving a random coupling triple.
pub fn random_matrix<R: Rng>(rng: &mut R, half_width: f64) -> TransferMatrix {
    random_coupling(rng, half_width).solve_dynamics()
}

/// Admissible moment summary: squeezed variances, a correlation keeping the
/// uncertainty product at or above ℏ²/4, and bounded displacements.
pub fn random_state<R: Rng>(rng: &mut R, hbar: f64) -> GaussianState {
    let var_q = hbar / 2.0 * (2.0 * rng.gen_range(-0.8_f64..=0.8)).exp();
    let cov = hbar / 2.0 * rng.gen_range(-1.0..=1.0);
    let excess: f64 = rng.gen_range(1.0..=2.5);
    let var_p = excess * (hbar * hbar / 4.0 + cov * cov) / var_q;
    GaussianState::new(
        rng.gen_range(-2.0..=2.0),
        rng.gen_range(-2.0..=2.0),
        var_q,
        var_p,
        cov,
        hbar,
    )
    .expect("sampled moments are admissible by construction")
}

/// Minimum-uncertainty (pure Gaussian) moment summary, the family the grid
/// oracle can represent exactly.
pub fn random_pure_state<R: Rng>(rng: &mut R, hbar: f64) -> GaussianState {
    let var_q = hbar / 2.0 * (2.0 * rng.gen_range(-0.6_f64..=0.6)).exp();
    let cov = hbar / 2.0 * rng.gen_range(-0.8..=0.8);
    GaussianState::min_uncertainty(var_q, cov, hbar)
        .expect("minimum-uncertainty moments are admissible")
        .with_means(rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0))
}
