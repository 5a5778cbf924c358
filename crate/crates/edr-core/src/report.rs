//! Structured analysis reports tying the modules together.
//!
//! One report captures everything a single model/state pair produces: the
//! solved matrix, regime, closed-form error and disturbance, the sharp bound,
//! optional grid-oracle cross-checks, and the supremum verdicts. Reports
//! serialize to JSON with every float printed at 17 significant digits so
//! reruns round-trip bit-exactly.

use serde::{Deserialize, Serialize};

use crate::grid::{oracle_rms_disturbance, oracle_rms_error, GridWavefunction};
use crate::moments::{edr_check, GaussianState};
use crate::supremum::{
    appleby_product, blw_product_verdict, uniform_disturbance, uniform_error, ExtendedValue,
    ProductVerdict,
};
use crate::symplectic::{CouplingParams, Regime, TransferMatrix};

/// A named model: the coupling triple plus the matrix actually analyzed.
///
/// For the error-free preset the matrix is the exact constraint matrix
/// rather than the numerically solved one; the two agree to ~1e−15 but the
/// exact form keeps identically-zero quantities identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub preset: Option<String>,
    pub params: CouplingParams,
}

impl ModelInfo {
    pub fn from_params(preset: Option<String>, params: CouplingParams) -> (Self, TransferMatrix) {
        let matrix = params.solve_dynamics();
        (Self { preset, params }, matrix)
    }

    pub fn error_free(a: f64, hbar: f64) -> Result<(Self, TransferMatrix), crate::DomainError> {
        let params = CouplingParams::error_free(a)?.with_hbar(hbar)?;
        let info = Self {
            preset: Some(format!("error-free:a={a}")),
            params,
        };
        Ok((info, TransferMatrix::error_free(a)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdReport {
    pub model: ModelInfo,
    pub matrix: TransferMatrix,
    pub regime: Regime,
    pub epsilon: f64,
    pub eta: f64,
    pub product: f64,
    pub sharp_bound: f64,
    pub heisenberg_bound: f64,
    pub violates_heisenberg: bool,
    pub oracle_epsilon: Option<f64>,
    pub oracle_eta: Option<f64>,
    pub uniform_error: ExtendedValue,
    pub uniform_disturbance: ExtendedValue,
    pub appleby: ProductVerdict,
    pub appleby_meets_bound: Option<bool>,
    pub blw: ProductVerdict,
    pub blw_meets_bound: Option<bool>,
}

/// Grid-sampled versions of the same input states, for the oracle columns.
pub struct OracleInput<'a> {
    pub psi: &'a GridWavefunction,
    pub xi: &'a GridWavefunction,
}

pub fn analyze(
    info: &ModelInfo,
    matrix: &TransferMatrix,
    psi: &GaussianState,
    xi: &GaussianState,
    oracle: Option<OracleInput<'_>>,
) -> EdReport {
    let hbar = info.params.hbar();
    let check = edr_check(matrix, psi, xi, hbar);
    let appleby = appleby_product(matrix, xi, hbar);
    let blw = blw_product_verdict(matrix, xi, hbar);
    let (oracle_epsilon, oracle_eta) = match oracle {
        Some(input) => (
            Some(oracle_rms_error(matrix, input.psi, input.xi)),
            Some(oracle_rms_disturbance(matrix, input.psi, input.xi, hbar)),
        ),
        None => (None, None),
    };
    EdReport {
        model: info.clone(),
        matrix: *matrix,
        regime: info.params.regime(),
        epsilon: check.epsilon,
        eta: check.eta,
        product: check.product,
        sharp_bound: check.sharp_bound,
        heisenberg_bound: hbar / 2.0,
        violates_heisenberg: check.violates_heisenberg,
        oracle_epsilon,
        oracle_eta,
        uniform_error: uniform_error(matrix, xi),
        uniform_disturbance: uniform_disturbance(matrix, xi),
        appleby: appleby.verdict,
        appleby_meets_bound: appleby.meets_bound,
        blw: blw.verdict,
        blw_meets_bound: blw.meets_bound,
    }
}

impl EdReport {
    pub fn to_json(&self) -> String {
        to_json_17(self)
    }
}

/// Serializes any value to JSON with floats at 17 significant digits
/// (lossless f64 round trip).
pub fn to_json_17<T: Serialize>(value: &T) -> String {
    let mut buffer = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut buffer, Float17Formatter);
    value
        .serialize(&mut serializer)
        .expect("report serialization cannot fail");
    String::from_utf8(buffer).expect("serializer emits UTF-8")
}

struct Float17Formatter;

impl serde_json::ser::Formatter for Float17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        debug_assert!(value.is_finite(), "non-finite float in JSON output");
        write!(writer, "{value:.16e}")
    }
}

/// The fixed format used for every float column in CSV output.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}
