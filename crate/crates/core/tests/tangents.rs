use proptest::prelude::*;
use syzygy::critical::critical_energies;
use syzygy::region::{trace_oval, ComponentLabel};
use syzygy::tangent::{
    continuation_check, eval_w, grad_w, trace_w_zero, vertical_tangents, ParameterPath, NON_DEGENERACY_MARGIN,
};
use syzygy::{ConfigPoint, Error, SystemDescriptor};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn two_vertical_tangents_on_the_axis(mu in 0.05..0.95f64, s in 0.05..0.95f64) {
        let h = critical_energies(mu).unwrap();
        let c = h.denormalize(s);
        let sys = SystemDescriptor::pcr3bp(mu).unwrap();
        let report = vertical_tangents(&trace_oval(&sys, c, ComponentLabel::Bounded).unwrap()).unwrap();
        prop_assert_eq!(report.count, 2);
        prop_assert!(report.all_on_axis());
        for p in &report.points {
            prop_assert!(p.vq2q2 > NON_DEGENERACY_MARGIN);
        }
        let (a, b) = (report.points[0].location.q1, report.points[1].location.q1);
        // One tangent beyond each primary.
        prop_assert!(a.min(b) < -mu && a.max(b) > 1.0 - mu);
    }

    #[test]
    fn w_zero_set_is_regular(mu in 0.01..0.99f64) {
        let curve = trace_w_zero(mu).unwrap();
        prop_assert!(curve.min_gradient > 1e-6);
        for p in curve.curve.vertices.iter().step_by(10) {
            let g = grad_w(mu, *p).unwrap();
            prop_assert!(g[0].hypot(g[1]) > 1e-6);
            prop_assert!(eval_w(mu, *p).unwrap().abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn w_positive_between_primaries(mu in 1e-3..(1.0 - 1e-3f64), f in 1e-6..(1.0 - 1e-6f64)) {
        let x = -mu + f;
        prop_assert!(eval_w(mu, ConfigPoint::new(x, 0.0)).unwrap() > 0.0);
    }

    #[test]
    fn w_decreases_away_from_the_axis(
        mu in 1e-3..(1.0 - 1e-3f64), q1 in -2.0..2.0f64, q2 in -2.0..2.0f64,
    ) {
        prop_assume!(q2.abs() > 1e-6);
        let q = ConfigPoint::new(q1, q2);
        let sys = SystemDescriptor::pcr3bp(mu).unwrap();
        prop_assume!(sys.singularity_distance(q) > 1e-3);
        let (re, rs) = (q.dist(sys.earth()), q.dist(sys.sun()));
        let closed = -3.0 * q2 * (mu / re.powi(5) + (1.0 - mu) / rs.powi(5));
        let dw = grad_w(mu, q).unwrap()[1];
        prop_assert!(dw != 0.0 && dw.signum() == -q2.signum());
        prop_assert!((dw - closed).abs() <= 1e-12 * closed.abs());
    }
}

#[test]
fn count_is_constant_along_paths() {
    let path = ParameterPath::through(&[(0.5, 0.3), (0.2, 0.6), (0.8, 0.4)], 250).unwrap();
    let report = continuation_check(&path).unwrap();
    assert!(report.passed);
    assert!(report.samples.iter().all(|s| s.count == 2));
}

#[test]
fn paths_leaving_the_energy_window_are_rejected() {
    assert!(matches!(ParameterPath::through(&[(0.5, 0.5), (0.5, 1.2)], 300), Err(Error::InvalidPath(_))));
    assert!(matches!(ParameterPath::through(&[(0.1, 0.5), (0.9, 0.5)], 10), Err(Error::InvalidPath(_))));
}
