//! Property tests for the model-level invariants: symplecticity of the
//! solved dynamics, the commutator lower bound on the error-disturbance
//! product, gain-independence of the error-free disturbance, and agreement
//! between the closed forms and the sampled-wavefunction oracle.

use proptest::prelude::*;

use edr_core::{
    blw_deviation, blw_momentum_deviation, divergence_witness, error_free_scale,
    finite_family_sup, momentum_density, oracle_rms_disturbance, oracle_rms_error, rms_disturbance,
    rms_error, uniform_disturbance, uniform_error, CouplingParams, ExtendedValue, GaussianState,
    GridWavefunction, Quantity, TransferMatrix,
};

fn arb_coupling() -> impl Strategy<Value = CouplingParams> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
        .prop_map(|(a, b, g)| CouplingParams::new(a, b, g).unwrap())
}

fn arb_matrix() -> impl Strategy<Value = TransferMatrix> {
    arb_coupling().prop_map(|p| p.solve_dynamics())
}

/// Admissible moment summary; the excess factor lifts the uncertainty
/// product above saturation.
fn arb_state() -> impl Strategy<Value = GaussianState> {
    (
        -0.8..0.8f64,
        -1.0..1.0f64,
        1.0..2.5f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
    )
        .prop_map(|(squeeze, cov_frac, excess, mq, mp)| {
            let var_q = 0.5 * (2.0 * squeeze).exp();
            let cov = 0.5 * cov_frac;
            let var_p = excess * (0.25 + cov * cov) / var_q;
            GaussianState::new(mq, mp, var_q, var_p, cov, 1.0).unwrap()
        })
}

/// Minimum-uncertainty summary the grid can realize as a pure Gaussian.
fn arb_pure_state() -> impl Strategy<Value = GaussianState> {
    (-0.6..0.6f64, -0.8..0.8f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(
        |(squeeze, cov_frac, mq, mp)| {
            let var_q = 0.5 * (2.0 * squeeze).exp();
            GaussianState::min_uncertainty(var_q, 0.5 * cov_frac, 1.0)
                .unwrap()
                .with_means(mq, mp)
        },
    )
}

proptest! {
    #[test]
    fn solved_dynamics_is_symplectic(p in arb_coupling()) {
        let residual = p.solve_dynamics().det_residual();
        prop_assert!(residual.abs() <= 1e-12, "residual {residual:e}");
    }

    #[test]
    fn product_respects_commutator_bound(
        m in arb_matrix(),
        psi in arb_state(),
        xi in arb_state(),
    ) {
        let epsilon = rms_error(&m, &psi, &xi);
        let eta = rms_disturbance(&m, &psi, &xi);
        let bound = m.sharp_bound(1.0);
        prop_assert!(
            epsilon * eta >= bound.bound - 1e-9,
            "product {} below bound {}",
            epsilon * eta,
            bound.bound
        );
        if bound.full_heisenberg {
            prop_assert!(epsilon * eta >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn error_free_disturbance_ignores_meter_gain(
        gain_a in -1.99..10.0f64,
        gain_b in -1.99..10.0f64,
        psi in arb_state(),
        xi in arb_state(),
    ) {
        let first = rms_disturbance(&TransferMatrix::error_free(gain_a), &psi, &xi);
        let second = rms_disturbance(&TransferMatrix::error_free(gain_b), &psi, &xi);
        prop_assert!((first - second).abs() <= 1e-12);
    }

    #[test]
    fn exact_meter_error_ignores_object_state(
        a in -3.0..3.0f64,
        d in -3.0..3.0f64,
        psi_a in arb_state(),
        psi_b in arb_state(),
        xi in arb_state(),
    ) {
        // c = 1 pins the error to the probe slot; b follows from det = 1
        let m = TransferMatrix::new(a, a * d - 1.0, 1.0, d).unwrap();
        let first = rms_error(&m, &psi_a, &xi);
        let second = rms_error(&m, &psi_b, &xi);
        prop_assert!((first - second).abs() < 1e-12);
    }

    #[test]
    fn admissible_states_satisfy_kennard(s in arb_state()) {
        prop_assert!(edr_core::kennard_check(&s, 1.0));
    }

    #[test]
    fn error_free_couplings_round_trip(a in -1.99..10.0f64) {
        let m = CouplingParams::error_free(a).unwrap().solve_dynamics();
        prop_assert!((m.a() - a).abs() <= 1e-9);
        prop_assert!((m.b() + 1.0).abs() <= 1e-9);
        prop_assert!((m.c() - 1.0).abs() <= 1e-9);
        prop_assert!(m.d().abs() <= 1e-9);
        prop_assert!(m.sharp_bound(1.0).bound <= 1e-9);
    }

    #[test]
    fn error_free_scale_monotone_window(a in 1.999..2.001f64) {
        let value = error_free_scale(a).unwrap();
        prop_assert!((value - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn deviation_sandwiches_rms_error(
        m in arb_matrix(),
        xi in arb_state(),
        theta in -5.0..5.0f64,
        width in 1e-4..1e-1f64,
    ) {
        let psi = GaussianState::min_uncertainty(width * width, 0.0, 1.0)
            .unwrap()
            .with_means(theta, 0.0);
        let gap = (blw_deviation(&m, &psi, &xi, theta) - rms_error(&m, &psi, &xi)).abs();
        prop_assert!(gap <= width + 1e-9, "gap {gap} width {width}");
    }

    #[test]
    fn momentum_deviation_sandwiches_rms_disturbance(
        m in arb_matrix(),
        xi in arb_state(),
        theta in -5.0..5.0f64,
        width in 1e-4..1e-1f64,
    ) {
        let psi = GaussianState::min_uncertainty(0.25 / (width * width), 0.0, 1.0)
            .unwrap()
            .with_means(0.0, theta);
        let gap =
            (blw_momentum_deviation(&m, &psi, &xi, theta) - rms_disturbance(&m, &psi, &xi)).abs();
        prop_assert!(gap <= width + 1e-9, "gap {gap} width {width}");
    }

    #[test]
    fn witness_pushes_quantity_past_target(
        m in arb_matrix(),
        xi in arb_state(),
        target in 1.0..200.0f64,
    ) {
        if let Ok(psi) = divergence_witness(&m, &xi, target, Quantity::Error, 1.0) {
            prop_assert!(rms_error(&m, &psi, &xi) >= target);
        }
        if let Ok(psi) = divergence_witness(&m, &xi, target, Quantity::Disturbance, 1.0) {
            prop_assert!(rms_disturbance(&m, &psi, &xi) >= target);
        }
    }

    #[test]
    fn verdict_kinds_agree(m in arb_matrix(), xi in arb_state()) {
        let appleby = edr_core::appleby_product(&m, &xi, 1.0).verdict;
        let blw = edr_core::blw_product_verdict(&m, &xi, 1.0).verdict;
        prop_assert_eq!(std::mem::discriminant(&appleby), std::mem::discriminant(&blw));
    }

    #[test]
    fn finite_family_below_uniform_product(
        a in -3.0..3.0f64,
        xi in arb_state(),
        states in proptest::collection::vec(arb_state(), 1..8),
    ) {
        // c = d = 1 makes both uniform values finite; b follows from det = 1
        let m = TransferMatrix::new(a, a - 1.0, 1.0, 1.0).unwrap();
        let family_value = finite_family_sup(&m, &xi, &states);
        let (ExtendedValue::Finite(ue), ExtendedValue::Finite(ud)) =
            (uniform_error(&m, &xi), uniform_disturbance(&m, &xi))
        else {
            panic!("both uniform values are finite for c = d = 1");
        };
        prop_assert!(family_value <= ue * ud + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn grid_satisfies_parseval(s in arb_pure_state()) {
        let w = GridWavefunction::from_gaussian(&s, 1.0, 256, 10.0).unwrap();
        let (values, density) = momentum_density(&w, 1.0);
        let dp = values[1] - values[0];
        let momentum_mass: f64 = density.iter().sum::<f64>() * dp;
        prop_assert!((momentum_mass - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn oracle_agrees_with_closed_forms(
        m in arb_matrix(),
        psi in arb_pure_state(),
        xi in arb_pure_state(),
    ) {
        let grid_psi = GridWavefunction::from_gaussian(&psi, 1.0, 512, 10.0).unwrap();
        let grid_xi = GridWavefunction::from_gaussian(&xi, 1.0, 512, 10.0).unwrap();
        let closed_eps = rms_error(&m, &psi, &xi);
        let closed_eta = rms_disturbance(&m, &psi, &xi);
        let oracle_eps = oracle_rms_error(&m, &grid_psi, &grid_xi);
        let oracle_eta = oracle_rms_disturbance(&m, &grid_psi, &grid_xi, 1.0);
        prop_assert!((oracle_eps - closed_eps).abs() / closed_eps.max(1e-6) <= 1e-6);
        prop_assert!((oracle_eta - closed_eta).abs() / closed_eta.max(1e-6) <= 1e-6);
    }
}
