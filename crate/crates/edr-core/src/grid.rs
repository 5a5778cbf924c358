//! Sampled-wavefunction oracle for the closed-form moment calculus.
//!
//! States live on a uniform position grid; the momentum side comes from a
//! unitary FFT with kernel `e^{−ipq/ℏ}/√(2πℏ)`. Every observable needed here
//! is diagonal in position at `t = 0` together with the meter position at
//! `t = Δt` (and likewise in momentum for the disturbance pair), so the error
//! and disturbance definitions reduce to separable two-index quadratures over
//! the sampled densities — no time stepping is involved.
//!
//! # Index conventions
//!
//! Position nodes are `q_j = x_min + j·dx` for `j = 0..n`. The conjugate grid
//! is `p_k = (k − n/2)·dp` with `dp = 2πℏ/(n·dx)`, stored in ascending order:
//! the transform multiplies amplitudes by `(−1)^j` before the FFT, which is
//! exactly an index-space centering (fftshift), and then applies the
//! continuum phase `e^{−ip_k·x_min/ℏ}`. DFT bins are n-periodic, so the
//! reflection `p ↦ −p` used by the joint-observable density is the exact bin
//! permutation `k ↦ (n − k) mod n`.

use std::io::{BufRead, Write};

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moments::GaussianState;
use crate::symplectic::TransferMatrix;

/// Minimum half-width, in standard deviations, of a grid constructed from a
/// moment summary.
pub const MIN_SPAN_SIGMAS: f64 = 8.0;

/// Grid mass must be this close to one before renormalization.
const MASS_TOLERANCE: f64 = 1e-3;

/// How precisely the requested moments must saturate the uncertainty bound
/// for a pure Gaussian wave packet to exist (relative to ℏ²/4).
const PURITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid size {0} must be a power of two of at least 16")]
    InvalidSize(usize),
    #[error("span of {0} standard deviations is below the minimum of {MIN_SPAN_SIGMAS}")]
    SpanTooSmall(f64),
    #[error("grid captures probability mass {0}, too far from 1 for the requested span")]
    MassOutsideTolerance(f64),
    #[error(
        "moments with uncertainty product {product} (bound {bound}) are not realizable by a \
         pure Gaussian wave packet"
    )]
    NotMinimumUncertainty { product: f64, bound: f64 },
    #[error(
        "momentum content |{mean_p}| + {MIN_SPAN_SIGMAS}·{sigma_p} exceeds the conjugate window \
         ±{window}; increase the grid size"
    )]
    MomentumWindowExceeded {
        mean_p: f64,
        sigma_p: f64,
        window: f64,
    },
    #[error("wavefunction record is malformed: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Complex amplitudes sampled on a uniform position grid, normalized so that
/// `Σ|ψ|²·dx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    amplitudes: Vec<Complex64>,
    x_min: f64,
    dx: f64,
}

impl GridWavefunction {
    /// Builds a wavefunction from raw samples, checking the size and
    /// normalization invariants. Mass within [`MASS_TOLERANCE`] of one is
    /// renormalized exactly.
    pub fn from_samples(
        amplitudes: Vec<Complex64>,
        x_min: f64,
        dx: f64,
    ) -> Result<Self, GridError> {
        let n = amplitudes.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(GridError::InvalidSize(n));
        }
        if !(dx > 0.0) || !dx.is_finite() || !x_min.is_finite() {
            return Err(GridError::Format("grid spacing must be positive".into()));
        }
        let mut wf = Self {
            amplitudes,
            x_min,
            dx,
        };
        let mass = wf.mass();
        if !(mass.is_finite()) || (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(GridError::MassOutsideTolerance(mass));
        }
        wf.renormalize();
        Ok(wf)
    }

    /// Samples the pure Gaussian wave packet with the given moment summary.
    ///
    /// A pure Gaussian exists exactly when the moments saturate
    /// `var_q·var_p − cov_qp² = ℏ²/4`; anything above that bound has no
    /// Gaussian wavefunction and is rejected. The packet is
    /// `exp[−(q−q₀)²/(4σ_q²)·(1 + i·2cov/ℏ·…)]` in the standard
    /// parametrization: real width from `var_q`, imaginary chirp from
    /// `cov_qp`, plane-wave factor from `mean_p`.
    pub fn from_gaussian(
        state: &GaussianState,
        hbar: f64,
        n: usize,
        span_sigmas: f64,
    ) -> Result<Self, GridError> {
        let bound = hbar * hbar / 4.0;
        let product = state.uncertainty_product();
        if (product - bound).abs() > PURITY_TOLERANCE * bound {
            return Err(GridError::NotMinimumUncertainty { product, bound });
        }
        let sigma_q = state.var_q().sqrt();
        let re_width = 1.0 / (4.0 * state.var_q());
        let im_chirp = -state.cov_qp() / (2.0 * hbar * state.var_q());
        let q0 = state.mean_q();
        let p0 = state.mean_p();
        let envelope = move |q: f64| {
            let dq = q - q0;
            let exponent = Complex64::new(-re_width * dq * dq, -im_chirp * dq * dq + p0 * dq / hbar);
            exponent.exp()
        };
        Self::sampled(envelope, q0, sigma_q, state.var_p().sqrt(), p0, hbar, n, span_sigmas)
    }

    /// Harmonic-oscillator eigenstate `k` (unit mass and frequency), whose
    /// position and momentum variances are both `(2k+1)ℏ/2`.
    pub fn hermite(k: usize, hbar: f64, n: usize, span_sigmas: f64) -> Result<Self, GridError> {
        let sigma = ((2.0 * k as f64 + 1.0) * hbar / 2.0).sqrt();
        let scale = hbar.sqrt();
        let envelope = move |q: f64| {
            let x = q / scale;
            Complex64::new(hermite_polynomial(k, x) * (-x * x / 2.0).exp(), 0.0)
        };
        Self::sampled(envelope, 0.0, sigma, sigma, 0.0, hbar, n, span_sigmas)
    }

    /// Even superposition of two ground-state packets displaced to `±offset`.
    pub fn cat(offset: f64, hbar: f64, n: usize, span_sigmas: f64) -> Result<Self, GridError> {
        let var = hbar / 2.0;
        let moments = cat_moments(offset, hbar);
        let envelope = move |q: f64| {
            let left = (-(q - offset) * (q - offset) / (4.0 * var)).exp();
            let right = (-(q + offset) * (q + offset) / (4.0 * var)).exp();
            Complex64::new(left + right, 0.0)
        };
        Self::sampled(
            envelope,
            0.0,
            moments.var_q().sqrt(),
            moments.var_p().sqrt(),
            0.0,
            hbar,
            n,
            span_sigmas,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn sampled(
        envelope: impl Fn(f64) -> Complex64,
        center: f64,
        sigma_q: f64,
        sigma_p: f64,
        mean_p: f64,
        hbar: f64,
        n: usize,
        span_sigmas: f64,
    ) -> Result<Self, GridError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(GridError::InvalidSize(n));
        }
        if span_sigmas < MIN_SPAN_SIGMAS {
            return Err(GridError::SpanTooSmall(span_sigmas));
        }
        let half_width = span_sigmas * sigma_q;
        let dx = 2.0 * half_width / n as f64;
        let window = std::f64::consts::PI * hbar / dx;
        if mean_p.abs() + MIN_SPAN_SIGMAS * sigma_p > window {
            return Err(GridError::MomentumWindowExceeded {
                mean_p,
                sigma_p,
                window,
            });
        }
        let x_min = center - half_width;
        let amplitudes: Vec<Complex64> = (0..n)
            .map(|j| envelope(x_min + j as f64 * dx))
            .collect();
        let mut wf = Self {
            amplitudes,
            x_min,
            dx,
        };
        let mass = wf.mass();
        if !mass.is_finite() || mass <= 0.0 {
            return Err(GridError::MassOutsideTolerance(mass));
        }
        wf.renormalize();
        Ok(wf)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn position(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.position(j)).collect()
    }

    /// `|ψ(q_j)|²` on the grid.
    pub fn position_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn mass(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dx
    }

    fn renormalize(&mut self) {
        let mass = self.mass();
        if (mass - 1.0).abs() <= 1e-15 {
            return; // already normalized; keep bits stable for round trips
        }
        let scale = 1.0 / mass.sqrt();
        for a in &mut self.amplitudes {
            *a *= scale;
        }
    }

    /// Momentum-space amplitudes `ψ̂(p_k)` on the conjugate grid, ascending in
    /// `p`, with the unitary convention `ψ̂(p) = (2πℏ)^{−1/2}∫ψ(q)e^{−ipq/ℏ}dq`.
    pub fn momentum_amplitudes(&self, hbar: f64) -> MomentumAmplitudes {
        let n = self.len();
        let dp = 2.0 * std::f64::consts::PI * hbar / (n as f64 * self.dx);
        let mut buffer: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, &a)| if j % 2 == 1 { -a } else { a })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
        let norm = self.dx / (2.0 * std::f64::consts::PI * hbar).sqrt();
        let half = (n / 2) as f64;
        let mut values = Vec::with_capacity(n);
        for (k, amp) in buffer.iter_mut().enumerate() {
            let p = (k as f64 - half) * dp;
            let phase = Complex64::from_polar(norm, -p * self.x_min / hbar);
            *amp *= phase;
            values.push(p);
        }
        MomentumAmplitudes {
            values,
            amplitudes: buffer,
            dp,
        }
    }

    /// Mean, variance, and covariance summary measured from the grid itself.
    pub fn measured_moments(&self, hbar: f64) -> MeasuredMoments {
        let density = self.position_density();
        let (mean_q, var_q) = weighted_mean_var(&self.positions(), &density, self.dx);
        let momentum = self.momentum_amplitudes(hbar);
        let p_density: Vec<f64> = momentum.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let (mean_p, var_p) = weighted_mean_var(&momentum.values, &p_density, momentum.dp);

        // ⟨{Q,P}⟩/2 − ⟨Q⟩⟨P⟩ via Re(ψ̄ · q · (Pψ)) with Pψ from the transform.
        let mut p_applied = momentum.amplitudes.clone();
        for (amp, &p) in p_applied.iter_mut().zip(&momentum.values) {
            *amp *= p;
        }
        let p_psi = inverse_transform(&p_applied, &momentum.values, self.x_min, self.dx, hbar);
        let mut sym = 0.0;
        for j in 0..self.len() {
            let q = self.position(j);
            sym += q * (self.amplitudes[j].conj() * p_psi[j]).re;
        }
        let cov_qp = sym * self.dx - mean_q * mean_p;

        MeasuredMoments {
            mean_q,
            var_q,
            mean_p,
            var_p,
            cov_qp,
        }
    }

    /// Writes `q,re,im` rows.
    pub fn to_csv<W: Write>(&self, mut writer: W) -> Result<(), GridError> {
        writeln!(writer, "q,re,im")?;
        for (j, a) in self.amplitudes.iter().enumerate() {
            writeln!(
                writer,
                "{:.16e},{:.16e},{:.16e}",
                self.position(j),
                a.re,
                a.im
            )?;
        }
        Ok(())
    }

    /// Reads the `q,re,im` layout produced by [`GridWavefunction::to_csv`].
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self, GridError> {
        let mut positions = Vec::new();
        let mut amplitudes = Vec::new();
        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || (index == 0 && trimmed.starts_with('q')) {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 3 {
                return Err(GridError::Format(format!(
                    "expected 3 columns, got {} in line {}",
                    fields.len(),
                    index + 1
                )));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| GridError::Format(format!("line {}: {e}", index + 1)))
            };
            positions.push(parse(fields[0])?);
            amplitudes.push(Complex64::new(parse(fields[1])?, parse(fields[2])?));
        }
        if positions.len() < 2 {
            return Err(GridError::Format("too few samples".into()));
        }
        let dx = positions[1] - positions[0];
        for (j, &q) in positions.iter().enumerate() {
            let expected = positions[0] + j as f64 * dx;
            if (q - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                return Err(GridError::Format("grid is not uniform".into()));
            }
        }
        Self::from_samples(amplitudes, positions[0], dx)
    }

    pub fn to_record(&self) -> WavefunctionRecord {
        WavefunctionRecord {
            x_min: self.x_min,
            dx: self.dx,
            n: self.len(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

/// Self-describing serialization form: `{x_min, dx, n, amplitudes:[[re,im],…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionRecord {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<WavefunctionRecord> for GridWavefunction {
    type Error = GridError;

    fn try_from(record: WavefunctionRecord) -> Result<Self, GridError> {
        if record.amplitudes.len() != record.n {
            return Err(GridError::Format(format!(
                "record declares n = {} but carries {} amplitudes",
                record.n,
                record.amplitudes.len()
            )));
        }
        let amplitudes = record
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        Self::from_samples(amplitudes, record.x_min, record.dx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumAmplitudes {
    pub values: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub dp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredMoments {
    pub mean_q: f64,
    pub var_q: f64,
    pub mean_p: f64,
    pub var_p: f64,
    pub cov_qp: f64,
}

/// `|ψ̂(p)|²` on the conjugate grid; integrates to one.
pub fn momentum_density(w: &GridWavefunction, hbar: f64) -> (Vec<f64>, Vec<f64>) {
    let momentum = w.momentum_amplitudes(hbar);
    let density = momentum.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    (momentum.values, density)
}

fn inverse_transform(
    amplitudes: &[Complex64],
    p_values: &[f64],
    x_min: f64,
    dx: f64,
    hbar: f64,
) -> Vec<Complex64> {
    let n = amplitudes.len();
    let dp = 2.0 * std::f64::consts::PI * hbar / (n as f64 * dx);
    let mut buffer: Vec<Complex64> = amplitudes
        .iter()
        .zip(p_values)
        .map(|(&a, &p)| a * Complex64::from_polar(1.0, p * x_min / hbar))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buffer);
    let norm = dp / (2.0 * std::f64::consts::PI * hbar).sqrt();
    buffer
        .iter()
        .enumerate()
        .map(|(j, &v)| if j % 2 == 1 { -v * norm } else { v * norm })
        .collect()
}

fn weighted_mean_var(values: &[f64], density: &[f64], spacing: f64) -> (f64, f64) {
    let mut mass = 0.0;
    let mut mean = 0.0;
    for (&v, &w) in values.iter().zip(density) {
        mass += w;
        mean += v * w;
    }
    mean /= mass;
    let mut var = 0.0;
    for (&v, &w) in values.iter().zip(density) {
        var += (v - mean) * (v - mean) * w;
    }
    let _ = spacing; // probability weights normalize out the spacing
    (mean, var / mass)
}

fn hermite_polynomial(k: usize, x: f64) -> f64 {
    let mut previous = 1.0;
    if k == 0 {
        return previous;
    }
    let mut current = 2.0 * x;
    for order in 1..k {
        let next = 2.0 * x * current - 2.0 * order as f64 * previous;
        previous = current;
        current = next;
    }
    current
}

/// Moment summary of the oscillator eigenstate `k`.
pub fn hermite_moments(k: usize, hbar: f64) -> GaussianState {
    let second = (2.0 * k as f64 + 1.0) * hbar / 2.0;
    GaussianState::new(0.0, 0.0, second, second, 0.0, hbar)
        .expect("oscillator eigenstates are admissible")
}

/// Moment summary of the even two-packet superposition with displacement
/// `±offset`: the overlap `s = e^{−offset²/ℏ}` interpolates between the
/// ground state and two well-separated packets.
pub fn cat_moments(offset: f64, hbar: f64) -> GaussianState {
    let var = hbar / 2.0;
    let overlap = (-offset * offset / hbar).exp();
    let var_q = var + offset * offset / (1.0 + overlap);
    let var_p = var * (1.0 - overlap * offset * offset / (var * (1.0 + overlap)));
    GaussianState::new(0.0, 0.0, var_q, var_p, 0.0, hbar)
        .expect("cat superpositions are admissible")
}

/// RMS error evaluated as a quadrature over the joint outcome distribution of
/// the commuting pair (object position at t=0, meter position at t=Δt):
/// `ε² = ΣΣ |ψ(q)|²|ξ(q̄)|² ((c·q + d·q̄) − q)² dq dq̄`.
pub fn oracle_rms_error(m: &TransferMatrix, psi: &GridWavefunction, xi: &GridWavefunction) -> f64 {
    let object = psi.position_density();
    let probe = xi.position_density();
    let object_values = psi.positions();
    let probe_values = xi.positions();
    let gain = m.c() - 1.0;
    let cross = m.d();
    let mut total = 0.0;
    for (wi, &q) in object.iter().zip(&object_values) {
        let base = gain * q;
        let mut row = 0.0;
        for (vj, &q_bar) in probe.iter().zip(&probe_values) {
            let deviation = base + cross * q_bar;
            row += vj * deviation * deviation;
        }
        total += wi * row;
    }
    (total * psi.dx() * xi.dx()).sqrt()
}

/// RMS disturbance as the same quadrature in the momentum sector:
/// `η² = ΣΣ |ψ̂(p)|²|ξ̂(p̄)|² ((d·p − c·p̄) − p)² dp dp̄`.
pub fn oracle_rms_disturbance(
    m: &TransferMatrix,
    psi: &GridWavefunction,
    xi: &GridWavefunction,
    hbar: f64,
) -> f64 {
    let (object_values, object) = momentum_density(psi, hbar);
    let (probe_values, probe) = momentum_density(xi, hbar);
    let dp_object = object_values[1] - object_values[0];
    let dp_probe = probe_values[1] - probe_values[0];
    let gain = m.d() - 1.0;
    let cross = -m.c();
    let mut total = 0.0;
    for (wi, &p) in object.iter().zip(&object_values) {
        let base = gain * p;
        let mut row = 0.0;
        for (vj, &p_bar) in probe.iter().zip(&probe_values) {
            let deviation = base + cross * p_bar;
            row += vj * deviation * deviation;
        }
        total += wi * row;
    }
    (total * dp_object * dp_probe).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Position,
    Momentum,
}

/// Joint distribution of a commuting (true value, outcome) pair.
///
/// The outcome support is a sheared lattice rather than a product grid, so
/// the outcome value at support point `(i, j)` is stored alongside its
/// weight with the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    theta_values: Vec<f64>,
    theta_spacing: f64,
    omega_values: Array2<f64>,
    weights: Array2<f64>,
}

impl JointDistribution {
    pub fn theta_values(&self) -> &[f64] {
        &self.theta_values
    }

    pub fn omega_values(&self) -> &Array2<f64> {
        &self.omega_values
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.sum()
    }

    /// Marginal density over the true value, comparable with the input grid
    /// density.
    pub fn theta_marginal_density(&self) -> Vec<f64> {
        self.weights
            .rows()
            .into_iter()
            .map(|row| row.sum() / self.theta_spacing)
            .collect()
    }

    /// Mean and second moment of the signed deviation `ω − θ`.
    pub fn residual_moments(&self) -> (f64, f64) {
        let mut mean = 0.0;
        let mut second = 0.0;
        for ((i, j), &w) in self.weights.indexed_iter() {
            let r = self.omega_values[(i, j)] - self.theta_values[i];
            mean += w * r;
            second += w * r * r;
        }
        (mean, second)
    }

    /// Covariance of the pair `(θ, ω)` under the joint weights.
    pub fn covariance(&self) -> f64 {
        let mut mean_theta = 0.0;
        let mut mean_omega = 0.0;
        for ((i, j), &w) in self.weights.indexed_iter() {
            mean_theta += w * self.theta_values[i];
            mean_omega += w * self.omega_values[(i, j)];
        }
        let mut cov = 0.0;
        for ((i, j), &w) in self.weights.indexed_iter() {
            cov += w * (self.theta_values[i] - mean_theta) * (self.omega_values[(i, j)] - mean_omega);
        }
        cov
    }
}

/// Materializes the joint outcome distribution of the commuting pair in the
/// requested sector: position pairs `(q, c·q + d·q̄)`, momentum pairs
/// `(p, d·p − c·p̄)`.
pub fn joint_outcome_distribution(
    m: &TransferMatrix,
    psi: &GridWavefunction,
    xi: &GridWavefunction,
    sector: Sector,
    hbar: f64,
) -> JointDistribution {
    let (theta_values, theta_weights, theta_spacing, probe_values, probe_weights, probe_spacing) =
        match sector {
            Sector::Position => (
                psi.positions(),
                psi.position_density(),
                psi.dx(),
                xi.positions(),
                xi.position_density(),
                xi.dx(),
            ),
            Sector::Momentum => {
                let (pv, pw) = momentum_density(psi, hbar);
                let (xv, xw) = momentum_density(xi, hbar);
                let dpp = pv[1] - pv[0];
                let dpx = xv[1] - xv[0];
                (pv, pw, dpp, xv, xw, dpx)
            }
        };

    let rows = theta_values.len();
    let cols = probe_values.len();
    let mut weights = Array2::zeros((rows, cols));
    let mut omega = Array2::zeros((rows, cols));
    for i in 0..rows {
        let wi = theta_weights[i] * theta_spacing;
        for j in 0..cols {
            weights[(i, j)] = wi * probe_weights[j] * probe_spacing;
            omega[(i, j)] = match sector {
                Sector::Position => m.c() * theta_values[i] + m.d() * probe_values[j],
                Sector::Momentum => m.d() * theta_values[i] - m.c() * probe_values[j],
            };
        }
    }
    JointDistribution {
        theta_values,
        theta_spacing,
        omega_values: omega,
        weights,
    }
}

/// Outcome density of the commuting pair read out by an error-free model,
/// `(Q̄(Δt), P(Δt)) = (Q(0), −P̄(0))`: the product `|ψ(q)|²·|ξ̂(−p)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPovmDensity {
    pub q_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub density: Array2<f64>,
    pub dq: f64,
    pub dp: f64,
}

impl JointPovmDensity {
    pub fn q_marginal(&self) -> Vec<f64> {
        self.density
            .rows()
            .into_iter()
            .map(|row| row.sum() * self.dp)
            .collect()
    }

    pub fn p_marginal(&self) -> Vec<f64> {
        self.density
            .columns()
            .into_iter()
            .map(|col| col.sum() * self.dq)
            .collect()
    }
}

pub fn error_free_joint_povm_density(
    psi: &GridWavefunction,
    xi: &GridWavefunction,
    hbar: f64,
) -> JointPovmDensity {
    let q_density = psi.position_density();
    let (p_values, probe_density) = momentum_density(xi, hbar);
    let n = probe_density.len();
    // |ξ̂(−p_k)|²: bins are n-periodic, so reflection is an exact permutation.
    let reflected: Vec<f64> = (0..n).map(|k| probe_density[(n - k) % n]).collect();
    let mut density = Array2::zeros((q_density.len(), n));
    for (i, &wq) in q_density.iter().enumerate() {
        for (k, &wp) in reflected.iter().enumerate() {
            density[(i, k)] = wq * wp;
        }
    }
    JointPovmDensity {
        q_values: psi.positions(),
        p_values,
        density,
        dq: psi.dx(),
        dp: (2.0 * std::f64::consts::PI * hbar) / (n as f64 * xi.dx()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::GaussianState;
    use crate::symplectic::CouplingParams;

    const N: usize = 1024;
    const SPAN: f64 = 10.0;

    fn ground_grid() -> GridWavefunction {
        GridWavefunction::from_gaussian(&GaussianState::ground(1.0), 1.0, N, SPAN).unwrap()
    }

    fn von_neumann() -> TransferMatrix {
        CouplingParams::new(0.0, 0.0, 1.0).unwrap().solve_dynamics()
    }

    #[test]
    fn ground_state_grid_moments() {
        let m = ground_grid().measured_moments(1.0);
        assert!(m.mean_q.abs() < 1e-8);
        assert!((m.var_q - 0.5).abs() < 1e-8);
        assert!((m.var_p - 0.5).abs() < 1e-8);
        assert!(m.cov_qp.abs() < 1e-8);
    }

    #[test]
    fn displaced_state_grid_mean() {
        let s = GaussianState::displaced(2.0, 0.0, 1.0).unwrap();
        let w = GridWavefunction::from_gaussian(&s, 1.0, N, SPAN).unwrap();
        assert!((w.measured_moments(1.0).mean_q - 2.0).abs() < 1e-8);
    }

    #[test]
    fn contractive_state_momentum_variance_from_fft() {
        let s = GaussianState::contractive(0.3, 1.0).unwrap();
        let w = GridWavefunction::from_gaussian(&s, 1.0, N, SPAN).unwrap();
        let m = w.measured_moments(1.0);
        assert!((m.var_p - 0.68).abs() < 1e-6, "var_p = {}", m.var_p);
        assert!((m.cov_qp + 0.3).abs() < 1e-6, "cov_qp = {}", m.cov_qp);
    }

    #[test]
    fn non_minimum_moments_are_rejected() {
        let s = GaussianState::new(0.0, 0.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            GridWavefunction::from_gaussian(&s, 1.0, N, SPAN),
            Err(GridError::NotMinimumUncertainty { .. })
        ));
    }

    #[test]
    fn span_and_size_validation() {
        let s = GaussianState::ground(1.0);
        assert!(matches!(
            GridWavefunction::from_gaussian(&s, 1.0, N, 4.0),
            Err(GridError::SpanTooSmall(_))
        ));
        assert!(matches!(
            GridWavefunction::from_gaussian(&s, 1.0, 100, SPAN),
            Err(GridError::InvalidSize(100))
        ));
        assert!(matches!(
            GridWavefunction::from_gaussian(&s, 1.0, 8, SPAN),
            Err(GridError::InvalidSize(8))
        ));
    }

    #[test]
    fn momentum_density_of_ground_state_is_self_dual() {
        let (values, density) = momentum_density(&ground_grid(), 1.0);
        let dp = values[1] - values[0];
        let total: f64 = density.iter().sum::<f64>() * dp;
        assert!((total - 1.0).abs() < 1e-9);
        let (mean, var) = super::weighted_mean_var(&values, &density, dp);
        assert!(mean.abs() < 1e-8);
        assert!((var - 0.5).abs() < 1e-6);
    }

    #[test]
    fn plane_wave_phase_shifts_momentum_mean() {
        let base = ground_grid();
        let k = 1.5;
        let amplitudes: Vec<Complex64> = base
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(j, &a)| a * Complex64::from_polar(1.0, k * base.position(j)))
            .collect();
        let modulated =
            GridWavefunction::from_samples(amplitudes, base.x_min(), base.dx()).unwrap();
        let (values, density) = momentum_density(&modulated, 1.0);
        let dp = values[1] - values[0];
        let (mean, _) = super::weighted_mean_var(&values, &density, dp);
        assert!((mean - k).abs() < 1e-6, "mean = {mean}");
    }

    #[test]
    fn parseval_identity_holds() {
        let s = GaussianState::min_uncertainty(0.31, 0.2, 1.0)
            .unwrap()
            .with_means(0.7, -0.4);
        let w = GridWavefunction::from_gaussian(&s, 1.0, 256, 9.0).unwrap();
        let (values, density) = momentum_density(&w, 1.0);
        let dp = values[1] - values[0];
        let momentum_mass: f64 = density.iter().sum::<f64>() * dp;
        assert!((momentum_mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_error_is_zero_for_error_free_models() {
        let m = TransferMatrix::error_free(1.0);
        let psi = ground_grid();
        let xi = GridWavefunction::from_gaussian(
            &GaussianState::contractive(0.3, 1.0).unwrap(),
            1.0,
            N,
            SPAN,
        )
        .unwrap();
        assert!(oracle_rms_error(&m, &psi, &xi) <= 1e-9);
    }

    #[test]
    fn oracle_error_von_neumann_matches_closed_form() {
        let psi = GridWavefunction::from_gaussian(
            &GaussianState::min_uncertainty(0.4, -0.1, 1.0)
                .unwrap()
                .with_means(1.5, 0.0),
            1.0,
            N,
            SPAN,
        )
        .unwrap();
        let xi = ground_grid();
        let oracle = oracle_rms_error(&von_neumann(), &psi, &xi);
        assert!((oracle - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn oracle_error_first_excited_identity_model() {
        let psi = GridWavefunction::hermite(1, 1.0, N, SPAN).unwrap();
        let xi = ground_grid();
        let oracle = oracle_rms_error(&TransferMatrix::identity(), &psi, &xi);
        assert!((oracle - 2.0f64.sqrt()).abs() < 1e-6, "oracle = {oracle}");
    }

    #[test]
    fn oracle_disturbance_cases() {
        let psi = ground_grid();
        let xi = ground_grid();
        assert!(oracle_rms_disturbance(&TransferMatrix::identity(), &psi, &xi, 1.0) <= 1e-9);
        let error_free = oracle_rms_disturbance(&TransferMatrix::error_free(1.0), &psi, &xi, 1.0);
        assert!((error_free - 1.0).abs() < 1e-6);
        let vn = oracle_rms_disturbance(&von_neumann(), &psi, &xi, 1.0);
        assert!((vn - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn joint_distribution_identity_is_decoupled() {
        let dist = joint_outcome_distribution(
            &TransferMatrix::identity(),
            &ground_grid(),
            &ground_grid(),
            Sector::Position,
            1.0,
        );
        assert!((dist.total_weight() - 1.0).abs() < 1e-9);
        assert!(dist.covariance().abs() < 1e-12);
    }

    #[test]
    fn joint_distribution_error_free_outcome_tracks_theta() {
        let dist = joint_outcome_distribution(
            &TransferMatrix::error_free(2.0),
            &ground_grid(),
            &ground_grid(),
            Sector::Position,
            1.0,
        );
        for ((i, _j), &omega) in dist.omega_values().indexed_iter() {
            assert_eq!(omega, dist.theta_values()[i]);
        }
    }

    #[test]
    fn joint_distribution_von_neumann_residual_variance() {
        let dist = joint_outcome_distribution(
            &von_neumann(),
            &ground_grid(),
            &ground_grid(),
            Sector::Position,
            1.0,
        );
        let (mean, second) = dist.residual_moments();
        assert!(mean.abs() < 1e-9);
        assert!((second - 0.5).abs() < 1e-6);
    }

    #[test]
    fn joint_distribution_marginal_matches_input_density() {
        let psi = ground_grid();
        let dist = joint_outcome_distribution(
            &von_neumann(),
            &psi,
            &ground_grid(),
            Sector::Position,
            1.0,
        );
        let marginal = dist.theta_marginal_density();
        for (m, d) in marginal.iter().zip(psi.position_density()) {
            assert!((m - d).abs() < 1e-9);
        }
    }

    #[test]
    fn povm_density_ground_pair_is_product_of_gaussians() {
        let povm = error_free_joint_povm_density(&ground_grid(), &ground_grid(), 1.0);
        let q_marginal = povm.q_marginal();
        let expected = ground_grid().position_density();
        for (m, d) in q_marginal.iter().zip(&expected) {
            assert!((m - d).abs() < 1e-9);
        }
        let p_marginal = povm.p_marginal();
        let dp = povm.dp;
        let (mean, var) = super::weighted_mean_var(&povm.p_values, &p_marginal, dp);
        assert!(mean.abs() < 1e-8);
        assert!((var - 0.5).abs() < 1e-6);
    }

    #[test]
    fn povm_density_reflects_displaced_probe_momentum() {
        let xi = GridWavefunction::from_gaussian(
            &GaussianState::displaced(0.0, 2.0, 1.0).unwrap(),
            1.0,
            N,
            SPAN,
        )
        .unwrap();
        let povm = error_free_joint_povm_density(&ground_grid(), &xi, 1.0);
        let p_marginal = povm.p_marginal();
        let (mean, _) = super::weighted_mean_var(&povm.p_values, &p_marginal, povm.dp);
        assert!((mean + 2.0).abs() < 1e-6, "mean = {mean}");
    }

    #[test]
    fn povm_q_marginal_is_independent_of_probe() {
        let psi = ground_grid();
        let xi_a = ground_grid();
        let xi_b = GridWavefunction::from_gaussian(
            &GaussianState::displaced(0.0, 1.0, 1.0).unwrap(),
            1.0,
            N,
            SPAN,
        )
        .unwrap();
        let a = error_free_joint_povm_density(&psi, &xi_a, 1.0).q_marginal();
        let b = error_free_joint_povm_density(&psi, &xi_b, 1.0).q_marginal();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn hermite_and_cat_moments_match_grid_measurements() {
        for k in [1usize, 2, 3] {
            let w = GridWavefunction::hermite(k, 1.0, N, SPAN).unwrap();
            let grid = w.measured_moments(1.0);
            let analytic = hermite_moments(k, 1.0);
            assert!((grid.var_q - analytic.var_q()).abs() < 1e-7);
            assert!((grid.var_p - analytic.var_p()).abs() < 1e-7);
        }
        for offset in [0.5, 1.5, 3.0] {
            let w = GridWavefunction::cat(offset, 1.0, N, 12.0).unwrap();
            let grid = w.measured_moments(1.0);
            let analytic = cat_moments(offset, 1.0);
            assert!(
                (grid.var_q - analytic.var_q()).abs() < 1e-7,
                "offset {offset}: {} vs {}",
                grid.var_q,
                analytic.var_q()
            );
            assert!(
                (grid.var_p - analytic.var_p()).abs() < 1e-7,
                "offset {offset}: {} vs {}",
                grid.var_p,
                analytic.var_p()
            );
        }
    }

    #[test]
    fn csv_round_trip_preserves_amplitudes() {
        let w = GridWavefunction::from_gaussian(
            &GaussianState::min_uncertainty(0.7, 0.25, 1.0)
                .unwrap()
                .with_means(-0.3, 0.9),
            1.0,
            64,
            8.0,
        )
        .unwrap();
        let mut buffer = Vec::new();
        w.to_csv(&mut buffer).unwrap();
        let parsed = GridWavefunction::from_csv(buffer.as_slice()).unwrap();
        assert_eq!(parsed.len(), w.len());
        for (x, y) in parsed.amplitudes().iter().zip(w.amplitudes()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn json_record_round_trip() {
        let w = GridWavefunction::hermite(2, 1.0, 128, 8.0).unwrap();
        let json = serde_json::to_string(&w.to_record()).unwrap();
        let record: WavefunctionRecord = serde_json::from_str(&json).unwrap();
        let parsed = GridWavefunction::try_from(record).unwrap();
        assert_eq!(parsed, w);
    }

    #[test]
    fn grid_refinement_converges() {
        let s = GaussianState::min_uncertainty(0.45, -0.15, 1.0)
            .unwrap()
            .with_means(0.8, -0.6);
        let xi = GaussianState::ground(1.0);
        let m = von_neumann();
        let coarse = oracle_rms_error(
            &m,
            &GridWavefunction::from_gaussian(&s, 1.0, 2048, 12.0).unwrap(),
            &GridWavefunction::from_gaussian(&xi, 1.0, 2048, 12.0).unwrap(),
        );
        let fine = oracle_rms_error(
            &m,
            &GridWavefunction::from_gaussian(&s, 1.0, 4096, 12.0).unwrap(),
            &GridWavefunction::from_gaussian(&xi, 1.0, 4096, 12.0).unwrap(),
        );
        assert!((coarse - fine).abs() < 1e-7);
    }
}
