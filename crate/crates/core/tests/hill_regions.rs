use proptest::prelude::*;
use syzygy::critical::critical_energies;
use syzygy::region::{classify, contains, trace_oval, ComponentLabel, TopologyClass};
use syzygy::{ConfigPoint, SystemDescriptor};

/// Connected components of `{V <= c}` on a grid over `[-r, r]^2`, by flood
/// fill with 4-neighbourhoods. Independent of the tracer.
fn flood_fill_components(mu: f64, c: f64, r: f64, step: f64) -> usize {
    let sys = SystemDescriptor::pcr3bp(mu).unwrap();
    let n = (2.0 * r / step).round() as usize + 1;
    let at = |i: usize| -r + i as f64 * step;
    let inside: Vec<bool> = (0..n * n)
        .map(|k| sys.effective_potential(ConfigPoint::new(at(k % n), at(k / n))).map_or(true, |v| v <= c))
        .collect();
    let mut seen = vec![false; n * n];
    let mut count = 0;
    for start in 0..n * n {
        if !inside[start] || seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(k) = stack.pop() {
            let (i, j) = (k % n, k / n);
            let mut visit = |m: usize| {
                if inside[m] && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < n {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - n);
            }
            if j + 1 < n {
                visit(k + n);
            }
        }
    }
    count
}

/// Energy strictly inside the interval of the class, away from its ends.
fn energy_in_class(mu: f64, class: TopologyClass, f: f64) -> f64 {
    let h = critical_energies(mu).unwrap();
    let (lo, hi) = match class {
        TopologyClass::ThreeComponents => (h.h1 - 0.5, h.h1),
        TopologyClass::BoundedPlusUnbounded => (h.h1, h.second()),
        TopologyClass::Horseshoe => (h.second(), h.third()),
        TopologyClass::TwoHoles => (h.third(), h.h45),
        TopologyClass::AllPlane => (h.h45, h.h45 + 0.5),
    };
    lo + (0.2 + 0.6 * f) * (hi - lo)
}

#[test]
fn classification_matches_flood_fill() {
    let classes = [
        TopologyClass::ThreeComponents,
        TopologyClass::BoundedPlusUnbounded,
        TopologyClass::Horseshoe,
        TopologyClass::TwoHoles,
        TopologyClass::AllPlane,
    ];
    for class in classes {
        for k in 0..50 {
            // The equal-mass case has h2 = h3, leaving no room for a horseshoe.
            let mu = 0.15 + 0.3 * (k % 10) as f64 / 10.0;
            let mu = if k % 2 == 0 { mu } else { 1.0 - mu };
            let c = energy_in_class(mu, class, (k / 10) as f64 / 4.0);
            let topology = classify(mu, c).unwrap();
            assert_eq!(topology.class, class, "mu = {mu}, c = {c}");
            let counted = flood_fill_components(mu, c, 3.0, 0.01);
            assert_eq!(counted, topology.component_count, "mu = {mu}, c = {c}, {class:?}");
        }
    }
}

fn mu_and_energy() -> impl Strategy<Value = (f64, f64)> {
    (0.1..0.9f64, 0.1..0.9f64).prop_map(|(mu, s)| (mu, critical_energies(mu).unwrap().denormalize(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oval_is_orthogonal_to_the_gradient((mu, c) in mu_and_energy()) {
        let sys = SystemDescriptor::pcr3bp(mu).unwrap();
        let oval = trace_oval(&sys, c, ComponentLabel::Bounded).unwrap();
        let v = oval.vertices();
        for w in v.windows(3) {
            // Second-order tangent for unequal neighbour spacing.
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            let (ha, hb) = (a.norm(), b.norm());
            let t = (hb / ha) * a + (ha / hb) * b;
            let g = sys.grad_v(w[1]).unwrap();
            let cos = (t.q1 * g[0] + t.q2 * g[1]) / (t.norm() * g[0].hypot(g[1]));
            // Angle from orthogonality.
            prop_assert!(cos.abs().asin() < 1e-3, "angle {:e} at {:?} {:?} {:?}", cos.abs().asin(), w[0], w[1], w[2]);
        }
        for p in v {
            prop_assert!((sys.effective_potential(*p).unwrap() - c).abs() < 1e-9);
        }
    }

    #[test]
    fn bounded_ovals_grow_with_energy((mu, c) in mu_and_energy(), ds in 1e-3..0.1f64) {
        let sys = SystemDescriptor::pcr3bp(mu).unwrap();
        let h = critical_energies(mu).unwrap();
        let c2 = (c + ds).min(h.second() - 1e-3);
        prop_assume!(c2 > c);
        let oval = trace_oval(&sys, c, ComponentLabel::Bounded).unwrap();
        for p in oval.vertices().iter().step_by(25) {
            prop_assert!(sys.effective_potential(*p).unwrap() <= c2);
            let m = contains(&sys, c2, *p).unwrap();
            prop_assert!(m.inside && m.component == Some(ComponentLabel::Bounded));
        }
    }
}
