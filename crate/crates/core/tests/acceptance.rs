//! End-to-end acceptance run. Prints one line per criterion and exits with a
//! failure status if any criterion fails.

use std::time::{Duration, Instant};

use syzygy::critical::{critical_energies, hill_critical_points, hill_critical_value, lagrange_points, Label};
use syzygy::io;
use syzygy::orbits::{
    find_symmetric_orbit, hill_bounded_region_check, integrate, scan_symmetric_orbits, verify_syzygy_theorem,
    Direction, PeriodicOrbit,
};
use syzygy::region::{trace_oval, ComponentLabel};
use syzygy::tangent::{compute_base_case, continuation_report, w_positive_on_region, ParameterPath};
use syzygy::{ConfigPoint, SystemDescriptor};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn run(number: usize, limit: Option<Duration>, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = check();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed < l);
    let passed = out.passed && in_time;
    let budget = limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
    println!(
        "criterion {number}: {} | {} | {:.1} s{budget}",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    passed
}

fn lagrange_suite() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0f64;
    for k in 1..100 {
        let mu = k as f64 / 100.0;
        let sys = SystemDescriptor::pcr3bp(mu).unwrap();
        let points = lagrange_points(mu).unwrap();
        for p in &points {
            let g = sys.grad_v(p.location).unwrap();
            worst = worst.max(g[0].hypot(g[1]));
        }
        let indices: Vec<u8> = points.iter().map(|p| p.morse_index).collect();
        let value = |l: Label| points.iter().find(|p| p.label == l).unwrap().value;
        let ordered = value(Label::L1) < value(Label::L2)
            && value(Label::L1) < value(Label::L3)
            && value(Label::L2) < value(Label::L4)
            && value(Label::L3) < value(Label::L4)
            && value(Label::L4) == value(Label::L5);
        if indices != [1, 1, 1, 2, 2] || !ordered {
            failures.push(mu);
        }
    }
    outcome(
        worst < 1e-10 && failures.is_empty(),
        format!("99 mass ratios, max |grad V| = {worst:.1e}, index/order failures at {failures:?}"),
    )
}

fn base_case() -> Outcome {
    let cert = compute_base_case(1e-3).unwrap();
    let exact = [
        (&cert.arc, -1.0 - 1.0 / 5f64.sqrt() - 0.5, -2.0),
        (&cert.lid, -37.0 / 20.0, f64::NEG_INFINITY),
        (&cert.zero_set, 3416.0 / 3375.0, 1.0),
    ];
    let bounds_ok = exact.iter().all(|(b, value, above)| {
        b.passed && (b.closed_form - value).abs() < 1e-12 && (b.estimate - value).abs() < 1e-12 && *value > *above
    });
    outcome(
        cert.passed && bounds_ok && cert.epsilon > 0.0,
        format!(
            "arc {:.12} (certified min {:.6}), lid {:.12} (min {:.6}), zero set {:.12} (min {:.6}), eps = {} < {:.6}",
            cert.arc.closed_form,
            cert.arc.certified_min,
            cert.lid.closed_form,
            cert.lid.certified_min,
            cert.zero_set.closed_form,
            cert.zero_set.certified_min,
            cert.epsilon,
            cert.epsilon_sup
        ),
    )
}

fn lemma_numerics() -> Outcome {
    let mut samples = 0;
    let mut bad = Vec::new();
    let mut max_off_axis = 0f64;
    let mut min_w = f64::INFINITY;
    for s in [0.25, 0.5, 0.75] {
        let path = ParameterPath::through(&[(0.1, s), (0.9, s)], 200).unwrap();
        let report = continuation_report(&path).unwrap();
        for r in &report.samples {
            samples += 1;
            max_off_axis = r.locations.iter().map(|q| q.q2.abs()).fold(max_off_axis, f64::max);
            let scan = w_positive_on_region(r.mu, r.c, 1e-3).unwrap();
            min_w = min_w.min(scan.min_margin);
            let on_axis = r.locations.iter().all(|q| q.q2.abs() < 1e-8);
            if r.count != 2 || !on_axis || !scan.positive {
                bad.push((r.mu, r.c, r.count));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{samples} samples, max |q2| at tangents {max_off_axis:.1e}, min W {min_w:.4}, failures {bad:?}"),
    )
}

/// Symmetric orbits at mid normalized energy around both primaries.
fn theorem_orbits() -> Vec<PeriodicOrbit> {
    let mut orbits = Vec::new();
    for mu in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let sys = SystemDescriptor::pcr3bp(mu).unwrap();
        let c = critical_energies(mu).unwrap().denormalize(0.5);
        let l1 = syzygy::critical::collinear_points(mu).unwrap()[0].location.q1;
        for range in [(l1 + 1e-3, sys.earth().q1 - 1e-3), (sys.sun().q1 + 1e-3, l1 - 1e-3)] {
            for direction in [Direction::Retrograde, Direction::Direct] {
                orbits.extend(scan_symmetric_orbits(&sys, c, range, 40, direction).unwrap());
            }
        }
    }
    orbits
}

fn syzygy_theorem(orbits: &[PeriodicOrbit]) -> Outcome {
    let mut mus: Vec<f64> = orbits.iter().map(|o| o.system.mu).collect();
    mus.dedup();
    let mut worst_residual = 0f64;
    let mut worst_integral = 0f64;
    let mut min_count = usize::MAX;
    let mut all_hold = true;
    for o in orbits {
        let r = verify_syzygy_theorem(o).unwrap();
        worst_residual = worst_residual.max(o.residual);
        worst_integral = worst_integral.max(r.period_integral.abs());
        min_count = min_count.min(r.count);
        all_hold &= r.precondition && r.count >= 2 && r.transverse && r.period_integral.abs() < 1e-8;
    }
    outcome(
        orbits.len() >= 10 && mus.len() == 5 && worst_residual < 1e-10 && all_hold,
        format!(
            "{} orbits over mu {mus:?}, max residual {worst_residual:.1e}, min syzygies {min_count}, max |int V_q2| {worst_integral:.1e}",
            orbits.len()
        ),
    )
}

/// Root of `r^3 + 2 c r + 2 = 0` inside the unit disc, from the trigonometric
/// solution of the depressed cubic.
fn kepler_radius(c: f64) -> f64 {
    let p = 2.0 * c;
    let m = 2.0 * (-p / 3.0).sqrt();
    let theta = (3.0 * 2.0 / (p * m)).acos() / 3.0;
    (0..3)
        .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
        .filter(|r| *r > 0.0 && *r < 1.0)
        .fold(f64::NAN, f64::max)
}

fn kepler_oracle() -> Outcome {
    let sys = SystemDescriptor::pcr3bp(0.0).unwrap();
    let r = kepler_radius(-1.7);
    let residual = r.powi(3) - 3.4 * r + 2.0;
    let oval = trace_oval(&sys, -1.7, ComponentLabel::Bounded).unwrap();
    let deviation = oval.vertices().iter().map(|v| (v.norm() - r).abs()).fold(0.0, f64::max);
    let critical = SystemDescriptor::kepler_critical_value();
    outcome(
        deviation < 1e-6 && residual.abs() < 1e-14 && critical == -1.5 && oval.closed(),
        format!("radius {r:.12}, max radial deviation {deviation:.1e}, critical value {critical}"),
    )
}

/// Positive root of `V_q1(x, 0) = 1/x^2 - 3x` by bisection.
fn hill_axis_root() -> f64 {
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 / (mid * mid) - 3.0 * mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn hill_lunar() -> Outcome {
    let sys = SystemDescriptor::hill_lunar();
    let x = hill_axis_root();
    let oracle_value = -1.0 / x - 1.5 * x * x;
    let (plus, minus) = hill_critical_points();
    let points_ok = (plus.location.q1 - x).abs() < 1e-12
        && (minus.location.q1 + x).abs() < 1e-12
        && plus.location.q2 == 0.0
        && (hill_critical_value() - oracle_value).abs() < 1e-12
        && (plus.value - oracle_value).abs() < 1e-12
        && [plus, minus].iter().all(|p| {
            let g = sys.grad_v(p.location).unwrap();
            g[0].hypot(g[1]) < 1e-12
        });

    let contained = hill_bounded_region_check(-2.2).unwrap();

    let mut found = 0;
    let mut min_quadratures = usize::MAX;
    let mut min_syzygies = usize::MAX;
    for c in [-2.2, -2.5, -3.0] {
        let r = hill_bounded_region_check(c).unwrap().max_radius;
        for direction in [Direction::Retrograde, Direction::Direct] {
            for range in [(1e-3, r - 1e-4), (-r + 1e-4, -1e-3)] {
                for o in scan_symmetric_orbits(&sys, c, range, 40, direction).unwrap() {
                    let rep = verify_syzygy_theorem(&o).unwrap();
                    found += 1;
                    min_quadratures = min_quadratures.min(rep.quadrature_count().unwrap());
                    min_syzygies = min_syzygies.min(rep.count);
                }
            }
        }
    }

    let lyapunov = find_symmetric_orbit(&sys, hill_critical_value() + 1e-3, 0.7009, Direction::Retrograde).unwrap();
    let lyapunov_report = verify_syzygy_theorem(&lyapunov).unwrap();
    let lyapunov_quadratures = lyapunov_report.quadrature_count().unwrap();

    outcome(
        points_ok
            && contained.contained
            && found > 0
            && min_quadratures >= 2
            && min_syzygies >= 2
            && lyapunov.residual < 1e-10
            && lyapunov_quadratures == 0,
        format!(
            "critical q1 = {x:.15}, value {oracle_value:.15}, oval radius {:.6} < {:.6}, {found} orbits with >= {min_quadratures} quadratures and >= {min_syzygies} syzygies, Lyapunov orbit at q1 = {:.6} with {lyapunov_quadratures} quadratures",
            contained.max_radius, contained.bound, lyapunov.initial.q.q1
        ),
    )
}

fn hygiene(orbits: &[PeriodicOrbit]) -> Outcome {
    // Finite differences on a grid, away from the primaries.
    let mut worst_fd = 0f64;
    let h = 1e-5;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    for sys in [
        SystemDescriptor::pcr3bp(0.2).unwrap(),
        SystemDescriptor::pcr3bp(0.5).unwrap(),
        SystemDescriptor::pcr3bp(0.0).unwrap(),
        SystemDescriptor::hill_lunar(),
    ] {
        for i in 0..41 {
            for j in 0..41 {
                let q = ConfigPoint::new(-2.0 + 0.1 * i as f64, -2.0 + 0.1 * j as f64);
                if sys.singularity_distance(q) < 0.05 {
                    continue;
                }
                let v = |a: f64, b: f64| sys.effective_potential(ConfigPoint::new(a, b)).unwrap();
                let g = |a: f64, b: f64| sys.grad_v(ConfigPoint::new(a, b)).unwrap();
                let (grad, hess) = (sys.grad_v(q).unwrap(), sys.hess_v(q).unwrap());
                let errs = [
                    rel((v(q.q1 + h, q.q2) - v(q.q1 - h, q.q2)) / (2.0 * h), grad[0]),
                    rel((v(q.q1, q.q2 + h) - v(q.q1, q.q2 - h)) / (2.0 * h), grad[1]),
                    rel((g(q.q1 + h, q.q2)[0] - g(q.q1 - h, q.q2)[0]) / (2.0 * h), hess.a11),
                    rel((g(q.q1 + h, q.q2)[1] - g(q.q1 - h, q.q2)[1]) / (2.0 * h), hess.a12),
                    rel((g(q.q1, q.q2 + h)[1] - g(q.q1, q.q2 - h)[1]) / (2.0 * h), hess.a22),
                ];
                worst_fd = errs.iter().fold(worst_fd, |a, &b| a.max(b));
            }
        }
    }

    // Energy drift over t = 100 from every theorem orbit; runs that hit a
    // primary stop with an error and carry no drift figure.
    let mut worst_drift = 0f64;
    let mut completed = 0;
    for o in orbits {
        if let Ok(traj) = integrate(&o.system, o.initial, 100.0, 1e-10) {
            completed += 1;
            worst_drift = worst_drift.max(traj.energy_drift);
        }
    }

    // Byte determinism of representative outputs.
    let render = || {
        let sys = SystemDescriptor::pcr3bp(0.3).unwrap();
        let c = critical_energies(0.3).unwrap().denormalize(0.5);
        let oval = trace_oval(&sys, c, ComponentLabel::Bounded).unwrap();
        let orbit = find_symmetric_orbit(&sys, c, 0.56, Direction::Retrograde).unwrap();
        let traj = integrate(&sys, orbit.initial, orbit.period, 1e-12).unwrap();
        let path = ParameterPath::through(&[(0.3, 0.5), (0.35, 0.5)], 12).unwrap();
        let report = continuation_report(&path).unwrap();
        [
            io::points_csv(oval.vertices()),
            io::trajectory_csv(&traj),
            io::json_envelope(&serde_json::json!({ "mu": 0.3, "energy": c }), &orbit).unwrap(),
            io::json_envelope(&path, &report).unwrap(),
            io::json_envelope(&0.3, &lagrange_points(0.3).unwrap()).unwrap(),
        ]
        .concat()
    };
    let deterministic = render() == render();

    outcome(
        worst_fd < 1e-6 && completed > 0 && worst_drift < 1e-8 && deterministic,
        format!(
            "max finite-difference error {worst_fd:.1e}, max drift {worst_drift:.1e} over {completed} runs to t = 100, byte-identical outputs: {deterministic}"
        ),
    )
}

fn main() {
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let mut orbits = Vec::new();
    let results = [
        run(1, Some(Duration::from_secs(10)), lagrange_suite),
        run(2, Some(Duration::from_secs(60)), base_case),
        run(3, minutes(10), lemma_numerics),
        run(4, minutes(5), || {
            orbits = theorem_orbits();
            syzygy_theorem(&orbits)
        }),
        run(5, None, kepler_oracle),
        run(6, None, hill_lunar),
        run(7, None, || hygiene(&orbits)),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
