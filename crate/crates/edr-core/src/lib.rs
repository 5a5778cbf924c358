//! Solvable linear position-measurement models and their error-disturbance
//! diagnostics.
//!
//! The measurement couples an object mode to a probe mode through a bilinear
//! interaction; reading the probe position afterwards measures the object
//! position with an RMS error and momentum disturbance that both have exact
//! closed forms in the transfer-matrix coefficients. This crate computes
//! those closed forms, cross-checks them against an independent
//! sampled-wavefunction quadrature, and evaluates the supremum-based error
//! measures under which the error-free family yields an indeterminate 0·∞
//! product instead of a Heisenberg-type lower bound.
//!
//! Module map:
//! - [`symplectic`]: coupling triples, regimes, and the solved transfer matrix
//! - [`moments`]: closed-form RMS error/disturbance over moment summaries
//! - [`grid`]: FFT wavefunction oracle and joint outcome distributions
//! - [`supremum`]: uniform/constrained suprema, verdicts, divergence witnesses
//! - [`report`]: structured analysis reports with reproducible serialization
//! - [`sampling`]: deterministic random inputs for suites and benchmarks

pub mod grid;
pub mod moments;
pub mod report;
pub mod sampling;
pub mod supremum;
pub mod symplectic;

pub use grid::{
    cat_moments, error_free_joint_povm_density, hermite_moments, joint_outcome_distribution,
    momentum_density, oracle_rms_disturbance, oracle_rms_error, GridError, GridWavefunction,
    JointDistribution, JointPovmDensity, Sector, WavefunctionRecord,
};
pub use moments::{
    edr_check, error_free_disturbance, kennard_check, rms_disturbance, rms_error, EdrCheck,
    GaussianState, Moments, StateError,
};
pub use report::{analyze, to_json_17, EdReport, ModelInfo, OracleInput};
pub use supremum::{
    appleby_product, blw_delta_c_disturbance_estimate, blw_delta_c_estimate, blw_deviation,
    blw_momentum_deviation, blw_product_verdict, divergence_witness, finite_family_sup,
    uniform_disturbance, uniform_error, ConfigError, ExtendedValue, ProductVerdict, Quantity,
    SupremumEstimate, SweepConfig, Trend, VerdictReport, WitnessError,
};
pub use symplectic::{
    error_free_scale, CouplingParams, DomainError, Regime, RegimeKind, SharpBound,
    SymplecticError, TransferMatrix, DETERMINANT_TOLERANCE, REGIME_TOLERANCE,
};
