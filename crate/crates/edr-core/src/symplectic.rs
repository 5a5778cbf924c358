//! Exact solution of the linear measurement dynamics.
//!
//! A measurement interaction couples the object quadratures `(Q, P)` to the
//! probe quadratures `(Q̄, P̄)` through a bilinear Hamiltonian parametrized by
//! a coupling triple `(α, β, γ)`. Because the generator is traceless, the
//! Heisenberg-picture evolution over the interaction window is a 2×2
//! determinant-one linear map on each conjugate pair; this module computes
//! that transfer matrix in closed form, classifies the oscillatory /
//! exponential / degenerate regimes, and constructs the one-parameter family
//! of couplings whose meter reads out the object position exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discriminant band treated as the degenerate (nilpotent-generator) regime.
pub const REGIME_TOLERANCE: f64 = 1e-12;

/// Determinant residual allowed by [`TransferMatrix::new`].
pub const DETERMINANT_TOLERANCE: f64 = 1e-12;

/// Below this discriminant magnitude the trigonometric/hyperbolic
/// coefficients are evaluated by series to sidestep the removable 0/0.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Residuals already at this level are left untouched by the determinant
/// projection in [`CouplingParams::solve_dynamics`].
const PROJECTION_SKIP: f64 = 1e-13;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DomainError {
    /// The error-free family only has a Hamiltonian realization for a > -2.
    #[error("error-free model parameter a = {0} is outside the realizable range a > -2")]
    ErrorFreeParameter(f64),
    #[error("coupling parameters must be finite")]
    NonFinite,
    #[error("hbar must be positive and finite, got {0}")]
    InvalidHbar(f64),
}

/// The interaction triple `(α, β, γ)` together with the action scale ℏ.
///
/// The interaction window and coupling strength are fixed by the convention
/// `K·Δt = 1`, so neither appears anywhere else in the crate: the transfer
/// matrix depends on the triple alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    hbar: f64,
}

impl CouplingParams {
    /// Couplings with the default action scale ℏ = 1.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, DomainError> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(DomainError::NonFinite);
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            hbar: 1.0,
        })
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self, DomainError> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(DomainError::InvalidHbar(hbar));
        }
        self.hbar = hbar;
        Ok(self)
    }

    /// The coupling triple realizing the error-free measurement with meter
    /// gain `a`: `(α, β, γ) = Ω(a)·(a/2, −1, 1)`, valid for `a > −2`.
    pub fn error_free(a: f64) -> Result<Self, DomainError> {
        let scale = error_free_scale(a)?;
        Self::new(scale * (a / 2.0), -scale, scale)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `α² + βγ`, the discriminant of the traceless generator.
    pub fn discriminant(&self) -> f64 {
        self.alpha * self.alpha + self.beta * self.gamma
    }

    /// Classifies the dynamics by the sign of the discriminant, with a
    /// tolerance band of [`REGIME_TOLERANCE`] mapped to the nilpotent case.
    pub fn regime(&self) -> Regime {
        let discriminant = self.discriminant();
        let kind = if discriminant.abs() <= REGIME_TOLERANCE {
            RegimeKind::Nilpotent
        } else if discriminant < 0.0 {
            RegimeKind::Elliptic
        } else {
            RegimeKind::Hyperbolic
        };
        Regime { kind, discriminant }
    }

    /// Solves the Heisenberg equations of motion over the interaction window.
    ///
    /// With generator `G = [[α, β], [γ, −α]]` and `t = α² + βγ` the solution
    /// is `φ₀(t)·I + φ₁(t)·G`, where `φ₀ = cos √−t` / `cosh √t` and
    /// `φ₁ = sin √−t / √−t` / `sinh √t / √t` in the elliptic / hyperbolic
    /// regimes, both evaluated by series near `t = 0`. The closed form has
    /// unit determinant exactly; the floating-point coefficients are nudged
    /// within a few ulps onto the determinant-one manifold before returning.
    pub fn solve_dynamics(&self) -> TransferMatrix {
        let t = self.discriminant();
        let (phi0, phi1) = propagator_coefficients(t);
        let a = phi1.mul_add(self.alpha, phi0);
        let b = phi1 * self.beta;
        let c = phi1 * self.gamma;
        let d = phi1.mul_add(-self.alpha, phi0);
        let (a, b, c, d) = project_to_unit_determinant(a, b, c, d);
        TransferMatrix { a, b, c, d }
    }
}

/// `φ₀` and `φ₁` such that `exp(G) = φ₀ I + φ₁ G` for a traceless `G` with
/// `G² = t·I`.
fn propagator_coefficients(t: f64) -> (f64, f64) {
    if t.abs() <= SERIES_THRESHOLD {
        // cosh √t and sinh √t / √t as series in t; valid for either sign.
        let phi0 = 1.0 + t * (1.0 / 2.0 + t * (1.0 / 24.0 + t * (1.0 / 720.0 + t / 40_320.0)));
        let phi1 = 1.0 + t * (1.0 / 6.0 + t * (1.0 / 120.0 + t * (1.0 / 5_040.0 + t / 362_880.0)));
        (phi0, phi1)
    } else if t < 0.0 {
        let frequency = (-t).sqrt();
        (frequency.cos(), frequency.sin() / frequency)
    } else {
        let rate = t.sqrt();
        (rate.cosh(), rate.sinh() / rate)
    }
}

/// Overall interaction strength making the error-free model with meter gain
/// `a` come out of the dynamics exactly; defined for `a > −2` and continuous
/// through `a = 2`.
pub fn error_free_scale(a: f64) -> Result<f64, DomainError> {
    if !(a > -2.0) || !a.is_finite() {
        return Err(DomainError::ErrorFreeParameter(a));
    }
    let x = a / 2.0;
    let u = x - 1.0;
    if u.abs() <= 1e-6 {
        // Both branches share the expansion 1 − u/3 + 2u²/15 around a = 2.
        Ok(1.0 - u / 3.0 + 2.0 * u * u / 15.0)
    } else if a < 2.0 {
        Ok(x.acos() / (1.0 - x * x).sqrt())
    } else {
        // log form fixes the principal branch of the inverse hyperbolic cosine
        let root = (x * x - 1.0).sqrt();
        Ok((x + root).ln() / root)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Nilpotent,
    Elliptic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub discriminant: f64,
}

/// Coefficients `(a, b, c, d)` of the solved linear dynamics:
/// `Q(Δt) = aQ + bQ̄`, `Q̄(Δt) = cQ + dQ̄`, `P(Δt) = dP − cP̄`,
/// `P̄(Δt) = −bP + aP̄`, with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TransferMatrix {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, SymplecticError> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(SymplecticError::NonFinite);
        }
        let matrix = Self { a, b, c, d };
        let residual = matrix.det_residual();
        if residual.abs() > DETERMINANT_TOLERANCE {
            return Err(SymplecticError::NotSymplectic { residual });
        }
        Ok(matrix)
    }

    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// The error-free constraint matrix `(a, −1, 1, 0)`; its determinant is
    /// `a·0 − (−1)·1 = 1` for every meter gain `a`.
    pub fn error_free(a: f64) -> Self {
        Self {
            a,
            b: -1.0,
            c: 1.0,
            d: 0.0,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `ad − bc − 1` evaluated with compensated products, so the result is
    /// accurate to roughly one ulp of the residual itself.
    pub fn det_residual(&self) -> f64 {
        det_residual(self.a, self.b, self.c, self.d)
    }

    /// Lower bound `|1 − c − d|·ℏ/2` on the error-disturbance product,
    /// together with the flag marking the region `c + d ≤ 0` or `c + d ≥ 2`
    /// where the bound is at least ℏ/2.
    pub fn sharp_bound(&self, hbar: f64) -> SharpBound {
        let trace_like = self.c + self.d;
        SharpBound {
            bound: (1.0 - trace_like).abs() * hbar / 2.0,
            full_heisenberg: trace_like <= 0.0 || trace_like >= 2.0,
        }
    }

    /// True when the coefficients satisfy the error-free constraint
    /// `b = −1, c = 1, d = 0` within `tol` (the meter gain `a` is free).
    pub fn is_error_free(&self, tol: f64) -> bool {
        (self.b + 1.0).abs() <= tol && (self.c - 1.0).abs() <= tol && self.d.abs() <= tol
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SymplecticError {
    #[error("matrix coefficients must be finite")]
    NonFinite,
    #[error("determinant residual {residual:e} exceeds tolerance")]
    NotSymplectic { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpBound {
    pub bound: f64,
    pub full_heisenberg: bool,
}

const SPLIT: f64 = 134_217_729.0; // 2^27 + 1, Veltkamp splitting constant

/// Dekker's exact product: returns `(fl(x·y), x·y − fl(x·y))`.
fn two_product(x: f64, y: f64) -> (f64, f64) {
    let p = x * y;
    let xs = SPLIT * x;
    let x_hi = xs - (xs - x);
    let x_lo = x - x_hi;
    let ys = SPLIT * y;
    let y_hi = ys - (ys - y);
    let y_lo = y - y_hi;
    let err = ((x_hi * y_hi - p) + x_hi * y_lo + x_lo * y_hi) + x_lo * y_lo;
    (p, err)
}

fn det_residual(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let (p, pe) = two_product(a, d);
    let (q, qe) = two_product(b, c);
    ((p - q) - 1.0) + (pe - qe)
}

/// Moves `x` by `ulps` representable steps. Callers keep `|ulps|` far below
/// the mantissa range and never cross zero.
fn offset_ulps(x: f64, ulps: i64) -> f64 {
    debug_assert!(x != 0.0 && x.is_finite());
    let bits = x.to_bits() as i64;
    // For negative floats the bit pattern grows as the value decreases.
    let moved = if bits >= 0 { bits + ulps } else { bits - ulps };
    f64::from_bits(moved as u64)
}

/// Nudges the coefficients within a few ulps so their exact determinant is
/// as close to one as the representation permits.
///
/// Rounding the closed-form coefficients perturbs the determinant by roughly
/// `(|ad| + |bc|)·2⁻⁵³`, which for strong couplings is far above 1e−12. A
/// coarse sweep on one coefficient combined with a fine correction on its
/// partner reaches the target without moving any entry by more than ~1e−13
/// relative.
fn project_to_unit_determinant(a: f64, b: f64, c: f64, d: f64) -> (f64, f64, f64, f64) {
    let r0 = det_residual(a, b, c, d);
    if !r0.is_finite() || r0.abs() <= PROJECTION_SKIP {
        return (a, b, c, d);
    }

    let mut best = [a, b, c, d];
    let mut best_r = r0.abs();
    // Sweep order puts the usually-coarsest coefficients first; the
    // determinant gradient with respect to (a, b, c, d) is (d, −c, −b, a).
    for sweep in [3usize, 2, 0, 1] {
        let entries = best;
        if let Some((candidate, r)) = sweep_entry(entries, sweep) {
            if r < best_r {
                best = candidate;
                best_r = r;
            }
        }
        if best_r <= 1.2e-13 {
            break;
        }
    }
    (best[0], best[1], best[2], best[3])
}

fn det_gradient(entries: &[f64; 4], index: usize) -> f64 {
    match index {
        0 => entries[3],
        1 => -entries[2],
        2 => -entries[1],
        _ => entries[0],
    }
}

fn residual_of(entries: &[f64; 4]) -> f64 {
    det_residual(entries[0], entries[1], entries[2], entries[3])
}

fn sweep_entry(entries: [f64; 4], sweep: usize) -> Option<([f64; 4], f64)> {
    const RANGE: i64 = 160;
    const CLAMP: f64 = 1.0e9;

    let value = entries[sweep];
    if value == 0.0 || !value.is_finite() {
        return None;
    }
    let step = offset_ulps(value, 1) - value;
    let coarse_gain = det_gradient(&entries, sweep) * step;
    if coarse_gain == 0.0 || !coarse_gain.is_finite() {
        return None;
    }

    let r0 = residual_of(&entries);
    let center = (-r0 / coarse_gain).round().clamp(-CLAMP, CLAMP) as i64;

    let mut best: Option<([f64; 4], f64)> = None;
    let mut consider = |candidate: [f64; 4]| {
        let r = residual_of(&candidate).abs();
        if best.map_or(true, |(_, current)| r < current) {
            best = Some((candidate, r));
        }
    };

    for m in (center - RANGE)..=(center + RANGE) {
        let mut candidate = entries;
        candidate[sweep] = offset_ulps(value, m);
        consider(candidate);
        let r_m = residual_of(&candidate);

        // fine correction on each other coefficient; differing ulp scales
        // give several incommensurate lattices to land on
        for correct in 0..4 {
            if correct == sweep {
                continue;
            }
            let partner = candidate[correct];
            if partner == 0.0 || !partner.is_finite() {
                continue;
            }
            let fine_step = offset_ulps(partner, 1) - partner;
            let fine_gain = det_gradient(&candidate, correct) * fine_step;
            if fine_gain == 0.0 || !fine_gain.is_finite() {
                continue;
            }
            let k = (-r_m / fine_gain).round().clamp(-CLAMP, CLAMP) as i64;
            if k != 0 {
                let mut corrected = candidate;
                corrected[correct] = offset_ulps(partner, k);
                consider(corrected);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(alpha: f64, beta: f64, gamma: f64) -> CouplingParams {
        CouplingParams::new(alpha, beta, gamma).unwrap()
    }

    #[test]
    fn regime_of_position_meter_coupling_is_nilpotent() {
        let regime = params(0.0, 0.0, 1.0).regime();
        assert_eq!(regime.kind, RegimeKind::Nilpotent);
        assert_eq!(regime.discriminant, 0.0);
    }

    #[test]
    fn regime_sign_checks() {
        assert_eq!(params(0.0, 1.0, 1.0).regime().kind, RegimeKind::Hyperbolic);
        assert_eq!(params(0.0, 1.0, 1.0).regime().discriminant, 1.0);
        assert_eq!(params(0.0, -1.0, 1.0).regime().kind, RegimeKind::Elliptic);
        assert_eq!(params(0.0, -1.0, 1.0).regime().discriminant, -1.0);
    }

    #[test]
    fn solve_position_meter_coupling() {
        let m = params(0.0, 0.0, 1.0).solve_dynamics();
        assert_eq!((m.a(), m.b(), m.c(), m.d()), (1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn solve_zero_coupling_is_identity() {
        let m = params(0.0, 0.0, 0.0).solve_dynamics();
        assert_eq!((m.a(), m.b(), m.c(), m.d()), (1.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn solve_elliptic_matches_trigonometric_form() {
        let m = params(0.0, -1.0, 1.0).solve_dynamics();
        assert!((m.a() - 1.0f64.cos()).abs() < 1e-12);
        assert!((m.b() + 1.0f64.sin()).abs() < 1e-12);
        assert!((m.c() - 1.0f64.sin()).abs() < 1e-12);
        assert!((m.d() - 1.0f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn error_free_couplings_solve_to_constraint_matrix() {
        let m = CouplingParams::error_free(1.0).unwrap().solve_dynamics();
        assert!((m.a() - 1.0).abs() < 1e-9);
        assert!((m.b() + 1.0).abs() < 1e-9);
        assert!((m.c() - 1.0).abs() < 1e-9);
        assert!(m.d().abs() < 1e-9);
    }

    #[test]
    fn error_free_scale_branch_values() {
        assert_eq!(error_free_scale(2.0).unwrap(), 1.0);
        assert!((error_free_scale(0.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let expected = 2.0 * std::f64::consts::PI / (3.0 * 3.0f64.sqrt());
        assert!((error_free_scale(1.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn error_free_scale_is_continuous_at_gain_two() {
        for a in [2.0 - 1e-6, 2.0 + 1e-6] {
            assert!((error_free_scale(a).unwrap() - 1.0).abs() <= 1e-5);
        }
        // Series/direct handover stays smooth on both sides.
        for a in [2.0 - 2e-6, 2.0 - 1e-7, 2.0 + 1e-7, 2.0 + 2e-6] {
            let direct = error_free_scale(a).unwrap();
            let u = a / 2.0 - 1.0;
            let series = 1.0 - u / 3.0 + 2.0 * u * u / 15.0;
            assert!((direct - series).abs() < 1e-10);
        }
    }

    #[test]
    fn error_free_rejects_gain_at_or_below_minus_two() {
        assert!(matches!(
            error_free_scale(-2.0),
            Err(DomainError::ErrorFreeParameter(_))
        ));
        assert!(CouplingParams::error_free(-2.5).is_err());
    }

    #[test]
    fn error_free_triple_at_gain_two() {
        let p = CouplingParams::error_free(2.0).unwrap();
        assert!((p.alpha() - 1.0).abs() < 1e-15);
        assert!((p.beta() + 1.0).abs() < 1e-15);
        assert!((p.gamma() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn error_free_triple_at_gain_zero() {
        let p = CouplingParams::error_free(0.0).unwrap();
        assert!(p.alpha().abs() < 1e-15);
        assert!((p.beta() + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((p.gamma() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn sharp_bound_cases() {
        let von_neumann = params(0.0, 0.0, 1.0).solve_dynamics();
        let bound = von_neumann.sharp_bound(1.0);
        assert_eq!(bound.bound, 0.5);
        assert!(bound.full_heisenberg);

        let error_free = TransferMatrix::error_free(1.0);
        let bound = error_free.sharp_bound(1.0);
        assert_eq!(bound.bound, 0.0);
        assert!(!bound.full_heisenberg);

        let identity = TransferMatrix::identity();
        assert_eq!(identity.sharp_bound(1.0).bound, 0.0);
    }

    #[test]
    fn error_free_predicate() {
        assert!(TransferMatrix::error_free(1.0).is_error_free(1e-12));
        let von_neumann = params(0.0, 0.0, 1.0).solve_dynamics();
        assert!(!von_neumann.is_error_free(1e-12));
        assert!(!TransferMatrix::identity().is_error_free(1e-12));
    }

    #[test]
    fn constructor_rejects_non_symplectic_coefficients() {
        assert!(matches!(
            TransferMatrix::new(1.0, 0.0, 0.0, 2.0),
            Err(SymplecticError::NotSymplectic { .. })
        ));
        assert!(TransferMatrix::new(2.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn determinant_residual_stays_tiny_across_strong_couplings() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let mut worst: f64 = 0.0;
        for _ in 0..50_000 {
            let p = params(
                rng.gen_range(-5.0..=5.0),
                rng.gen_range(-5.0..=5.0),
                rng.gen_range(-5.0..=5.0),
            );
            let m = p.solve_dynamics();
            worst = worst.max(m.det_residual().abs());
        }
        assert!(worst <= 1e-12, "worst residual {worst:e}");
    }

    #[test]
    fn projection_leaves_coefficients_essentially_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2_000 {
            let alpha: f64 = rng.gen_range(-5.0..=5.0);
            let beta: f64 = rng.gen_range(-5.0..=5.0);
            let gamma: f64 = rng.gen_range(-5.0..=5.0);
            let t = alpha * alpha + beta * gamma;
            let (phi0, phi1) = propagator_coefficients(t);
            let raw = [
                phi0 + phi1 * alpha,
                phi1 * beta,
                phi1 * gamma,
                phi0 - phi1 * alpha,
            ];
            let m = params(alpha, beta, gamma).solve_dynamics();
            for (raw_entry, entry) in raw.iter().zip([m.a(), m.b(), m.c(), m.d()]) {
                let scale = raw_entry.abs().max(1.0);
                assert!((raw_entry - entry).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn regime_boundary_formulas_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let alpha: f64 = rng.gen_range(-5.0..=5.0);
            let beta: f64 = rng.gen_range(0.1..=5.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let offset: f64 = rng.gen_range(-1e-10..=1e-10);
            let gamma = (offset - alpha * alpha) / beta;
            let p = params(alpha, beta, gamma);
            if p.discriminant().abs() > 1e-10 {
                continue;
            }
            let m = p.solve_dynamics();
            let gap = (m.a() - (1.0 + alpha))
                .abs()
                .max((m.b() - beta).abs())
                .max((m.c() - gamma).abs())
                .max((m.d() - (1.0 - alpha)).abs());
            assert!(gap <= 1e-8, "gap {gap:e} at discriminant {}", p.discriminant());
        }
    }
}
