use proptest::prelude::*;
use syzygy::{ConfigPoint, PhaseState, SystemDescriptor};

fn systems() -> impl Strategy<Value = SystemDescriptor> {
    prop_oneof![
        (0.0..=1.0f64).prop_map(|mu| SystemDescriptor::pcr3bp(mu).unwrap()),
        Just(SystemDescriptor::hill_lunar()),
        Just(SystemDescriptor::pcr3bp(0.5).unwrap()),
    ]
}

fn point() -> impl Strategy<Value = ConfigPoint> {
    (-2.5..2.5f64, -2.5..2.5f64).prop_map(|(a, b)| ConfigPoint::new(a, b))
}

fn rel_err(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn birkhoff_potential_identity(mu in 1e-3..(1.0 - 1e-3), q in point()) {
        let sys = SystemDescriptor::pcr3bp(mu).unwrap();
        prop_assume!(sys.singularity_distance(q) > 1e-3);
        let omega = sys.alt_potential(q).unwrap();
        let v = sys.effective_potential(q).unwrap();
        prop_assert!((omega + v - mu * (1.0 - mu) / 2.0).abs() < 1e-12 * omega.abs().max(1.0));
    }

    #[test]
    fn reflection_symmetries(sys in systems(), q in point()) {
        prop_assume!(sys.singularity_distance(q) > 1e-3);
        let v = sys.effective_potential(q).unwrap();
        prop_assert_eq!(v, sys.effective_potential(q.mirror_q2()).unwrap());
        let symmetric_in_q1 = sys.kind == syzygy::SystemKind::HillLunar || sys.mu == 0.5;
        if symmetric_in_q1 {
            let w = sys.effective_potential(q.mirror_q1()).unwrap();
            prop_assert!((v - w).abs() <= 1e-14 * v.abs());
        }
    }

    #[test]
    fn derivatives_match_finite_differences(sys in systems(), q in point()) {
        prop_assume!(sys.singularity_distance(q) > 0.05);
        let h = 1e-5;
        let v = |a: f64, b: f64| sys.effective_potential(ConfigPoint::new(a, b)).unwrap();
        let g = |a: f64, b: f64| sys.grad_v(ConfigPoint::new(a, b)).unwrap();
        let grad = sys.grad_v(q).unwrap();
        let fd1 = (v(q.q1 + h, q.q2) - v(q.q1 - h, q.q2)) / (2.0 * h);
        let fd2 = (v(q.q1, q.q2 + h) - v(q.q1, q.q2 - h)) / (2.0 * h);
        prop_assert!(rel_err(fd1, grad[0]) < 1e-6, "{fd1} vs {}", grad[0]);
        prop_assert!(rel_err(fd2, grad[1]) < 1e-6, "{fd2} vs {}", grad[1]);

        let hess = sys.hess_v(q).unwrap();
        let d1 = |i: usize| (g(q.q1 + h, q.q2)[i] - g(q.q1 - h, q.q2)[i]) / (2.0 * h);
        let d2 = |i: usize| (g(q.q1, q.q2 + h)[i] - g(q.q1, q.q2 - h)[i]) / (2.0 * h);
        prop_assert!(rel_err(d1(0), hess.a11) < 1e-6);
        prop_assert!(rel_err(d1(1), hess.a12) < 1e-6);
        prop_assert!(rel_err(d2(0), hess.a12) < 1e-6);
        prop_assert!(rel_err(d2(1), hess.a22) < 1e-6);
    }

    #[test]
    fn energy_is_conserved_by_the_vector_field(
        sys in systems(), q in point(), v1 in -2.0..2.0f64, v2 in -2.0..2.0f64,
    ) {
        prop_assume!(sys.singularity_distance(q) > 0.1);
        let state = PhaseState::new(q.q1, q.q2, v1, v2);
        let g = sys.grad_v(q).unwrap();
        let f = sys.eom(&state).unwrap();
        let dh = g[0] * f.q.q1 + g[1] * f.q.q2 + v1 * f.v[0] + v2 * f.v[1];
        prop_assert!(dh.abs() < 1e-12, "dH/dt = {dh:e}");
    }

    #[test]
    fn velocity_and_momentum_forms_agree(sys in systems(), q in point(), v1 in -2.0..2.0f64, v2 in -2.0..2.0f64) {
        prop_assume!(sys.singularity_distance(q) > 1e-3);
        let state = PhaseState::new(q.q1, q.q2, v1, v2);
        let h = sys.hamiltonian(&state).unwrap();
        let hc = sys.hamiltonian_canonical(q, state.momenta()).unwrap();
        prop_assert!((h - hc).abs() < 1e-12 * h.abs().max(1.0));
    }
}

#[test]
fn singularities_are_rejected() {
    let sys = SystemDescriptor::pcr3bp(0.3).unwrap();
    assert!(sys.effective_potential(sys.earth()).is_err());
    assert!(sys.grad_v(sys.sun()).is_err());
    assert!(SystemDescriptor::hill_lunar().hess_v(ConfigPoint::ORIGIN).is_err());
}
