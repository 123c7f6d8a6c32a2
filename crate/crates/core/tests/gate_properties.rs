use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use polsim_core::gate::{
    gate_fidelity, gate_matrix, linear_gate_matrix, optimal_swap_time, table1_reference, target_iswap, target_swap,
    GateMatrix,
};
use polsim_core::integrator::IntegratorConfig;
use polsim_core::model::ModelParams;
use proptest::prelude::*;

fn unit_column_matrix() -> impl Strategy<Value = GateMatrix> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16).prop_filter_map("nonzero columns", |entries| {
        let m = Matrix4::from_iterator(entries.into_iter().map(|(re, im)| Complex64::new(re, im)));
        let mut out = m;
        for k in 0..4 {
            let norm = m.column(k).norm();
            if norm < 1e-3 {
                return None;
            }
            out.set_column(k, &(m.column(k) / Complex64::new(norm, 0.0)));
        }
        Some(GateMatrix(out))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fidelity_ignores_global_phase(u in unit_column_matrix(), phi in -PI..PI) {
        for target in [target_swap(), target_iswap()] {
            let a = gate_fidelity(&u, &target);
            let b = gate_fidelity(&u.scaled(Complex64::from_polar(1.0, phi)), &target);
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_is_bounded(u in unit_column_matrix()) {
        for target in [target_swap(), target_iswap()] {
            let f = gate_fidelity(&u, &target);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f), "F = {}", f);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn hermitian_linear_gate_matches_table(t in 0.0..PI) {
        let g = gate_matrix(&ModelParams::default(), t, &IntegratorConfig::rk45(1.0, 1.0)).unwrap();
        let d = g.max_abs_diff(&table1_reference(1.0, t));
        prop_assert!(d < 1e-7, "t = {}: {}", t, d);
    }

    #[test]
    fn integrated_linear_gate_matches_propagator(t in 0.0..PI, gamma in 0.0..0.9f64) {
        let mp = ModelParams::pt(0.0, 0.0, gamma);
        let g = gate_matrix(&mp, t, &IntegratorConfig::rk45(1.0, 1.0)).unwrap();
        let d = g.max_abs_diff(&linear_gate_matrix(1.0, gamma, t).unwrap());
        prop_assert!(d < 1e-7, "{}", d);
    }
}

#[test]
fn optimal_time_improves_linear_swap() {
    for gamma in [0.1, 0.3] {
        let at_half = linear_gate_matrix(1.0, gamma, PI / 2.0).unwrap();
        let at_opt = linear_gate_matrix(1.0, gamma, optimal_swap_time(1.0, gamma).unwrap()).unwrap();
        let (f_half, f_opt) = (gate_fidelity(&at_half, &target_swap()), gate_fidelity(&at_opt, &target_swap()));
        assert!(f_opt >= f_half, "gamma {gamma}: {f_opt} < {f_half}");
    }
}
