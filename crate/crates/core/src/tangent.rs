//! Vertical tangents of the ovals of zero velocity.
//!
//! In the restricted problem `V_q2 = q2 * W` with
//! `W(q) = mu / |q - e|^3 + (1 - mu) / |q - s|^3 - 1`, so the oval has a
//! vertical tangent exactly where it meets the `q1`-axis or the zero set of
//! `W`. This module counts those tangents, certifies the equal-mass base case
//! on a grid and follows the count along paths in `(mu, c)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical;
use crate::error::{Error, Result};
use crate::levelset::{self, LevelCurve, ScalarField, TraceSettings, Window};
use crate::region::{self, ComponentLabel, OvalCurve};
use crate::roots;
use crate::systems::{ConfigPoint, MassRatio, SystemDescriptor, SINGULARITY_GUARD};

/// Tangent points with `|q2|` below this count as lying on the `q1`-axis.
pub const ON_AXIS_TOLERANCE: f64 = 1e-8;

/// Smallest `V_q2q2` accepted at an on-axis tangent by the continuation check.
pub const NON_DEGENERACY_MARGIN: f64 = 1e-6;

/// The base-case energy offset: the bounded region at `c = -2 + eps` for
/// `mu = 1/2` lies in the unit ball below `|q2| = 2/3`.
pub const BASE_CASE_EPSILON: f64 = 0.08;

/// Largest per-coordinate jump between consecutive path samples.
pub const PATH_STEP_BOUND: f64 = 1e-2;

fn primaries(mu: f64) -> [(f64, ConfigPoint); 2] {
    [(mu, ConfigPoint::new(1.0 - mu, 0.0)), (1.0 - mu, ConfigPoint::new(-mu, 0.0))]
}

fn guard(mu: f64, q: ConfigPoint) -> Result<()> {
    MassRatio::new(mu)?;
    for (m, c) in primaries(mu) {
        if m > 0.0 && q.dist(c) <= SINGULARITY_GUARD {
            return Err(Error::Singularity { q1: q.q1, q2: q.q2 });
        }
    }
    Ok(())
}

/// `W(q) = mu / |q - e|^3 + (1 - mu) / |q - s|^3 - 1`. Defined for `mu` in
/// `[0, 1]`; a massless primary contributes nothing.
pub fn eval_w(mu: f64, q: ConfigPoint) -> Result<f64> {
    guard(mu, q)?;
    let mut w = -1.0;
    for (m, c) in primaries(mu) {
        if m > 0.0 {
            let r = q.dist(c);
            w += m / (r * r * r);
        }
    }
    Ok(w)
}

pub fn grad_w(mu: f64, q: ConfigPoint) -> Result<[f64; 2]> {
    guard(mu, q)?;
    let mut g = [0.0; 2];
    for (m, c) in primaries(mu) {
        if m > 0.0 {
            let d = q - c;
            let r2 = d.norm_sq();
            let k = -3.0 * m / (r2 * r2 * r2.sqrt());
            g[0] += k * d.q1;
            g[1] += k * d.q2;
        }
    }
    Ok(g)
}

/// The zero set of `W`, with the smallest gradient norm seen on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WZeroCurve {
    #[serde(flatten)]
    pub curve: LevelCurve,
    pub mu: f64,
    pub min_gradient: f64,
}

/// Traces `{W = 0}`, a single closed curve around the primaries, and checks
/// that zero is a regular value along it.
pub fn trace_w_zero(mu: f64) -> Result<WZeroCurve> {
    MassRatio::new(mu)?;
    let field = |q: ConfigPoint| -> Result<(f64, [f64; 2])> { Ok((eval_w(mu, q)?, grad_w(mu, q)?)) };
    let seed = levelset::seed_on_ray(&field, 0.0, ConfigPoint::ORIGIN, ConfigPoint::new(0.0, 1.0), 1e-6, 3.0, 1e-3)?;
    let curve = levelset::trace(&field, 0.0, seed, &TraceSettings::default())?;
    let min_gradient = curve
        .vertices
        .iter()
        .map(|&v| grad_w(mu, v).map(|g| g[0].hypot(g[1])))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if !(min_gradient > NON_DEGENERACY_MARGIN) {
        return Err(Error::CertificationFailed(format!(
            "|grad W| = {min_gradient:e} on the zero set of W at mu = {mu}"
        )));
    }
    Ok(WZeroCurve { curve, mu, min_gradient })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    pub location: ConfigPoint,
    pub on_axis: bool,
    /// `V_q2q2` at the point; equals `W` on the axis of the restricted problem.
    pub vq2q2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentReport {
    pub count: usize,
    pub points: Vec<TangentPoint>,
}

impl TangentReport {
    pub fn locations(&self) -> Vec<ConfigPoint> {
        self.points.iter().map(|p| p.location).collect()
    }

    pub fn all_on_axis(&self) -> bool {
        self.points.iter().all(|p| p.on_axis)
    }
}

/// Vertical tangents of a closed oval: sign changes of `V_q2` between
/// consecutive vertices, each localized by bisection along the segment with
/// every trial point projected back onto the oval.
pub fn vertical_tangents(oval: &OvalCurve) -> Result<TangentReport> {
    if !oval.closed() {
        return Err(Error::NotClosed);
    }
    tangents_along(oval)
}

/// As [`vertical_tangents`], for open arcs of unbounded components.
pub fn vertical_tangents_on_arc(oval: &OvalCurve) -> Result<TangentReport> {
    tangents_along(oval)
}

fn tangents_along(oval: &OvalCurve) -> Result<TangentReport> {
    let sys = oval.system();
    let vs = oval.vertices();
    let max_gap = 4.0 * oval.step;
    if let Some(w) = vs.windows(2).find(|w| w[0].dist(w[1]) > max_gap) {
        return Err(Error::InvalidArgument(format!("vertex spacing {} exceeds {max_gap}", w[0].dist(w[1]))));
    }
    let field = |q: ConfigPoint| -> Result<(f64, [f64; 2])> { Ok((sys.effective_potential(q)?, sys.grad_v(q)?)) };
    let on_curve =
        |p: ConfigPoint| -> Result<ConfigPoint> { Ok(levelset::project(&field, oval.energy, p, 1e-13, 50)?.0) };
    let signs = vs.iter().map(|&v| sys.grad_v(v).map(|g| g[1] >= 0.0)).collect::<Result<Vec<bool>>>()?;
    let mut points = Vec::new();
    for (k, w) in vs.windows(2).enumerate() {
        if signs[k] == signs[k + 1] {
            continue;
        }
        let (a, b) = (w[0], w[1]);
        let at = |t: f64| on_curve(a + t * (b - a));
        let phi = |t: f64| -> Result<f64> { Ok(sys.grad_v(at(t)?)?[1]) };
        let (lo, hi) = roots::bisect(phi, 0.0, 1.0, 1e-10)?;
        let location = at(0.5 * (lo + hi))?;
        points.push(TangentPoint {
            location,
            on_axis: location.q2.abs() < ON_AXIS_TOLERANCE,
            vq2q2: sys.hess_v(location)?.a22,
        });
    }
    Ok(TangentReport { count: points.len(), points })
}

/// One of the three grid-certified estimates of the equal-mass base case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    /// The closed-form lower bound.
    pub closed_form: f64,
    /// The same bound recomputed from the extreme distances found on the grid.
    pub estimate: f64,
    /// Certified lower bound of the function over the whole set.
    pub certified_min: f64,
    /// Value the closed form has to exceed.
    pub threshold: f64,
    pub passed: bool,
}

impl BoundCheck {
    fn new(name: &str, closed_form: f64, estimate: f64, certified_min: f64, threshold: f64) -> Self {
        let passed = closed_form > threshold && (estimate - closed_form).abs() < 1e-12 && certified_min >= closed_form;
        Self { name: name.to_string(), closed_form, estimate, certified_min, threshold, passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseCaseCertificate {
    pub epsilon: f64,
    /// Largest `eps` for which the traced bounded oval still fits.
    pub epsilon_sup: f64,
    pub grid_step: f64,
    pub arc: BoundCheck,
    pub lid: BoundCheck,
    pub zero_set: BoundCheck,
    pub passed: bool,
}

const HALF: f64 = 0.5;

fn equal_mass_distances(q: ConfigPoint) -> (f64, f64) {
    (q.dist(ConfigPoint::new(HALF, 0.0)), q.dist(ConfigPoint::new(-HALF, 0.0)))
}

fn equal_mass_v(q: ConfigPoint) -> f64 {
    let (re, rs) = equal_mass_distances(q);
    -HALF / re - HALF / rs - 0.5 * q.norm_sq()
}

fn equal_mass_grad_v(q: ConfigPoint) -> [f64; 2] {
    SystemDescriptor::pcr3bp(HALF).and_then(|s| s.grad_v(q)).unwrap_or([f64::INFINITY; 2])
}

/// Smallest and largest distance from `p` to the rectangle `[x0, x1] x [y0, y1]`.
fn rect_distance_range(p: ConfigPoint, x0: f64, x1: f64, y0: f64, y1: f64) -> (f64, f64) {
    let near = ConfigPoint::new(p.q1.clamp(x0, x1), p.q2.clamp(y0, y1));
    let far = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)]
        .into_iter()
        .map(|(x, y)| p.dist(ConfigPoint::new(x, y)))
        .fold(0.0, f64::max);
    (p.dist(near), far)
}

struct CellBounds {
    /// Lower bound on the cell, the better of a Lipschitz and a monotonicity argument.
    lower: f64,
}

/// Grid over `[x0, x1] x [y0, y1]` with `n` cells per side. Grid coordinates
/// are computed as `x0 + i (x1 - x0) / n` so the corners of the rectangle are
/// hit exactly.
fn grid_axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| lo + (hi - lo) * (i as f64 / n as f64)).collect()
}

fn certify_arc(step: f64) -> BoundCheck {
    let closed_form = -1.0 - 1.0 / 5f64.sqrt() - 0.5;
    let thetas = grid_axis(0.0, std::f64::consts::FRAC_PI_2, step);
    let points: Vec<ConfigPoint> = thetas.iter().map(|t| ConfigPoint::new(t.cos(), t.sin())).collect();
    let (mut min_re, mut min_rs) = (f64::INFINITY, f64::INFINITY);
    for &p in &points {
        let (re, rs) = equal_mass_distances(p);
        min_re = min_re.min(re);
        min_rs = min_rs.min(rs);
    }
    let estimate = -HALF / min_re - HALF / min_rs - 0.5;
    let slope = |i: usize| {
        let g = equal_mass_grad_v(points[i]);
        (-g[0] * thetas[i].sin() + g[1] * thetas[i].cos()).abs()
    };
    let certified_min = (0..points.len() - 1)
        .map(|i| {
            let dt = thetas[i + 1] - thetas[i];
            let lip = 1.5 * slope(i).max(slope(i + 1));
            equal_mass_v(points[i]).min(equal_mass_v(points[i + 1])) - lip * 0.5 * dt
        })
        .fold(f64::INFINITY, f64::min);
    BoundCheck::new("unit circle arc: V >= -1 - 1/sqrt(5) - 1/2", closed_form, estimate, certified_min, -2.0)
}

/// Runs `cell` over every grid cell of `[x0, x1] x [y0, y1]` meeting the closed
/// unit disk, returning the smallest lower bound.
fn cells_min<F>(x0: f64, x1: f64, y0: f64, y1: f64, step: f64, cell: F) -> f64
where
    F: Fn(f64, f64, f64, f64) -> CellBounds + Sync,
{
    let xs = grid_axis(x0, x1, step);
    let ys = grid_axis(y0, y1, step);
    (0..ys.len() - 1)
        .into_par_iter()
        .map(|j| {
            let mut m = f64::INFINITY;
            for i in 0..xs.len() - 1 {
                let (a, b, c, d) = (xs[i], xs[i + 1], ys[j], ys[j + 1]);
                if a * a + c * c > 1.0 {
                    continue;
                }
                m = m.min(cell(a, b, c, d).lower);
            }
            m
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn grid_points_in_disk(x0: f64, x1: f64, y0: f64, y1: f64, step: f64) -> Vec<ConfigPoint> {
    let xs = grid_axis(x0, x1, step);
    let ys = grid_axis(y0, y1, step);
    ys.iter().flat_map(|&y| xs.iter().map(move |&x| ConfigPoint::new(x, y))).filter(|p| p.norm_sq() <= 1.0).collect()
}

fn corners(a: f64, b: f64, c: f64, d: f64) -> [ConfigPoint; 4] {
    [ConfigPoint::new(a, c), ConfigPoint::new(b, c), ConfigPoint::new(a, d), ConfigPoint::new(b, d)]
}

fn lipschitz_lower(a: f64, b: f64, c: f64, d: f64, f: impl Fn(ConfigPoint) -> (f64, f64)) -> f64 {
    let half_diagonal = 0.5 * (b - a).hypot(d - c);
    let (mut fmin, mut gmax) = (f64::INFINITY, 0.0f64);
    for p in corners(a, b, c, d) {
        let (v, g) = f(p);
        fmin = fmin.min(v);
        gmax = gmax.max(g);
    }
    let bound = fmin - 1.5 * gmax * half_diagonal;
    if bound.is_nan() {
        f64::NEG_INFINITY
    } else {
        bound
    }
}

fn certify_lid(step: f64) -> BoundCheck {
    let closed_form = -37.0 / 20.0;
    let (y0, y1) = (2.0 / 3.0, 1.0);
    let pts = grid_points_in_disk(0.0, 1.0, y0, y1, step);
    let min_re = pts.iter().map(|&p| equal_mass_distances(p).0).fold(f64::INFINITY, f64::min);
    let min_rs = pts.iter().map(|&p| equal_mass_distances(p).1).fold(f64::INFINITY, f64::min);
    let max_q2 = pts.iter().map(|p| p.norm_sq()).fold(0.0, f64::max);
    let estimate = -HALF / min_re - HALF / min_rs - 0.5 * max_q2;
    let certified_min = cells_min(0.0, 1.0, y0, y1, step, |a, b, c, d| {
        let lip = lipschitz_lower(a, b, c, d, |p| {
            let g = equal_mass_grad_v(p);
            (equal_mass_v(p), g[0].hypot(g[1]))
        });
        let (re_min, _) = rect_distance_range(ConfigPoint::new(HALF, 0.0), a, b, c, d);
        let (rs_min, _) = rect_distance_range(ConfigPoint::new(-HALF, 0.0), a, b, c, d);
        let (_, q_max) = rect_distance_range(ConfigPoint::ORIGIN, a, b, c, d);
        // |q| < 1 on the set itself, so the quadratic term never drops below -1/2.
        let mono = -HALF / re_min - HALF / rs_min - 0.5 * q_max.min(1.0).powi(2);
        CellBounds { lower: lip.max(mono) }
    });
    BoundCheck::new("lid q2 >= 2/3: V > -37/20", closed_form, estimate, certified_min, -2.0)
}

fn certify_zero_set(step: f64) -> BoundCheck {
    let closed_form = 3416.0 / 3375.0;
    let (y0, y1) = (0.0, 2.0 / 3.0);
    let f = |re: f64, rs: f64| HALF / re.powi(3) + HALF / rs.powi(3);
    let pts = grid_points_in_disk(0.0, 1.0, y0, y1, step);
    let max_re = pts.iter().map(|&p| equal_mass_distances(p).0).fold(0.0, f64::max);
    let max_rs = pts.iter().map(|&p| equal_mass_distances(p).1).fold(0.0, f64::max);
    let estimate = f(max_re, max_rs);
    let certified_min = cells_min(0.0, 1.0, y0, y1, step, |a, b, c, d| {
        let lip = lipschitz_lower(a, b, c, d, |p| {
            let (re, rs) = equal_mass_distances(p);
            let g = 3.0 * HALF * (re.powi(-4) + rs.powi(-4));
            (f(re, rs), g)
        });
        let (_, re_max) = rect_distance_range(ConfigPoint::new(HALF, 0.0), a, b, c, d);
        let (_, rs_max) = rect_distance_range(ConfigPoint::new(-HALF, 0.0), a, b, c, d);
        CellBounds { lower: lip.max(f(re_max, rs_max)) }
    });
    BoundCheck::new("zero set: |q-e|^-3/2 + |q-s|^-3/2 >= 3416/3375", closed_form, estimate, certified_min, 1.0)
}

/// Whether the bounded region at `c = -2 + eps`, `mu = 1/2`, lies in
/// `B_1(0) ∩ {|q2| < 2/3}`.
pub fn base_case_fits(eps: f64) -> bool {
    let Ok(sys) = SystemDescriptor::pcr3bp(HALF) else { return false };
    let Ok(oval) = region::trace_oval(&sys, -2.0 + eps, ComponentLabel::Bounded) else { return false };
    let max_norm = oval.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let Ok(bounds) = region::bounded_region_bounds(&sys, -2.0 + eps) else { return false };
    max_norm < 1.0 && bounds.q1_max < 1.0 && bounds.q2_max < 2.0 / 3.0 && -bounds.q2_min < 2.0 / 3.0
}

fn epsilon_sup() -> f64 {
    let (mut lo, mut hi) = (1e-6, 0.5);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if base_case_fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Grid certificate for the equal-mass base case. Always returns the record;
/// [`base_case_certificate`] turns a failed record into an error.
pub fn compute_base_case(grid_step: f64) -> Result<BaseCaseCertificate> {
    if !(grid_step > 0.0 && grid_step <= 1e-3) {
        return Err(Error::InvalidArgument(format!("grid step {grid_step} must lie in (0, 1e-3]")));
    }
    let arc = certify_arc(grid_step);
    let lid = certify_lid(grid_step);
    let zero_set = certify_zero_set(grid_step);
    let epsilon_sup = epsilon_sup();
    let passed = arc.passed
        && lid.passed
        && zero_set.passed
        && BASE_CASE_EPSILON < epsilon_sup
        && base_case_fits(BASE_CASE_EPSILON);
    Ok(BaseCaseCertificate { epsilon: BASE_CASE_EPSILON, epsilon_sup, grid_step, arc, lid, zero_set, passed })
}

pub fn base_case_certificate() -> Result<BaseCaseCertificate> {
    let cert = compute_base_case(1e-3)?;
    if !cert.passed {
        return Err(Error::CertificationFailed(format!("{cert:?}")));
    }
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub mu: f64,
    pub c: f64,
}

/// A path in `(mu, c)` strictly between the first and second critical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPath {
    pub samples: Vec<PathSample>,
    pub resolution: usize,
}

impl ParameterPath {
    /// Piecewise-linear path through waypoints `(mu, s)` with `s` the
    /// normalized energy, sampled at `resolution` points spread evenly over
    /// the waypoint parameter.
    pub fn through(waypoints: &[(f64, f64)], resolution: usize) -> Result<Self> {
        if waypoints.is_empty() || resolution == 0 {
            return Err(Error::InvalidPath("need at least one waypoint and one sample".into()));
        }
        let segments = waypoints.len() - 1;
        let samples = (0..resolution)
            .map(|k| {
                let (mu, s) = if segments == 0 || resolution == 1 {
                    waypoints[0]
                } else {
                    let t = k as f64 / (resolution - 1) as f64 * segments as f64;
                    let i = (t.floor() as usize).min(segments - 1);
                    let f = t - i as f64;
                    let (a, b) = (waypoints[i], waypoints[i + 1]);
                    (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))
                };
                MassRatio::require_proper(mu)?;
                Ok(PathSample { mu, c: critical::critical_energies(mu)?.denormalize(s) })
            })
            .collect::<Result<Vec<_>>>()?;
        let path = Self { samples, resolution };
        path.validate()?;
        Ok(path)
    }

    /// Straight path from the base case `(1/2, -2 + eps)` to `(mu, s)`.
    pub fn from_base_case(mu: f64, s: f64, resolution: usize) -> Result<Self> {
        let s0 = critical::critical_energies(HALF)?.normalize(-2.0 + BASE_CASE_EPSILON);
        Self::through(&[(HALF, s0), (mu, s)], resolution)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, p) in self.samples.iter().enumerate() {
            MassRatio::require_proper(p.mu).map_err(|e| Error::InvalidPath(format!("sample {k}: {e}")))?;
            let h = critical::critical_energies(p.mu)?;
            if !(h.h1 < p.c && p.c < h.second()) {
                return Err(Error::InvalidPath(format!(
                    "sample {k}: c = {} outside ({}, {}) at mu = {}",
                    p.c,
                    h.h1,
                    h.second(),
                    p.mu
                )));
            }
        }
        for (k, w) in self.samples.windows(2).enumerate() {
            let (dm, dc) = ((w[1].mu - w[0].mu).abs(), (w[1].c - w[0].c).abs());
            if dm >= PATH_STEP_BOUND || dc >= PATH_STEP_BOUND {
                return Err(Error::InvalidPath(format!(
                    "samples {k} and {} differ by ({dm}, {dc}); the bound is {PATH_STEP_BOUND}",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub mu: f64,
    pub c: f64,
    pub count: usize,
    pub all_on_axis: bool,
    /// Smallest `V_q2q2` over the tangent points.
    pub min_vq2q2: f64,
    pub locations: Vec<ConfigPoint>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub samples: Vec<SampleReport>,
    pub passed: bool,
}

impl ContinuationReport {
    pub fn first_failure(&self) -> Option<&SampleReport> {
        self.samples.iter().find(|s| !s.passed)
    }
}

fn check_sample(p: PathSample) -> Result<SampleReport> {
    let sys = SystemDescriptor::pcr3bp(p.mu)?;
    let oval = region::trace_oval(&sys, p.c, ComponentLabel::Bounded)?;
    let report = vertical_tangents(&oval)?;
    let min_vq2q2 = report.points.iter().map(|t| t.vq2q2).fold(f64::INFINITY, f64::min);
    let all_on_axis = report.all_on_axis();
    Ok(SampleReport {
        mu: p.mu,
        c: p.c,
        count: report.count,
        all_on_axis,
        min_vq2q2,
        locations: report.locations(),
        passed: report.count == 2 && all_on_axis && min_vq2q2 > NON_DEGENERACY_MARGIN,
    })
}

/// Tangent reports for every sample of the path, in path order.
pub fn continuation_report(path: &ParameterPath) -> Result<ContinuationReport> {
    path.validate()?;
    let samples = path.samples.par_iter().map(|&p| check_sample(p)).collect::<Result<Vec<_>>>()?;
    let passed = samples.iter().all(|s| s.passed);
    Ok(ContinuationReport { samples, passed })
}

/// Like [`continuation_report`] but fails on the first sample where the
/// oval does not have exactly two non-degenerate vertical tangents on the axis.
pub fn continuation_check(path: &ParameterPath) -> Result<ContinuationReport> {
    let report = continuation_report(path)?;
    if let Some(bad) = report.first_failure() {
        if bad.count == 2 && bad.all_on_axis {
            return Err(Error::CertificationFailed(format!(
                "degenerate vertical tangent (V_q2q2 = {:e}) at mu = {}, c = {}",
                bad.min_vq2q2, bad.mu, bad.c
            )));
        }
        return Err(Error::CountChanged { mu: bad.mu, c: bad.c, count: bad.count });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WScan {
    pub positive: bool,
    /// Smallest `W` over the scanned points.
    pub min_margin: f64,
    pub argmin: ConfigPoint,
    pub points: usize,
}

fn merge_scan(a: (f64, ConfigPoint, usize), b: (f64, ConfigPoint, usize)) -> (f64, ConfigPoint, usize) {
    let best = if b.0 < a.0 { (b.0, b.1) } else { (a.0, a.1) };
    (best.0, best.1, a.2 + b.2)
}

fn finish_scan((min_margin, argmin, points): (f64, ConfigPoint, usize)) -> WScan {
    WScan { positive: points > 0 && min_margin > 0.0, min_margin, argmin, points }
}

/// Evaluates `W` at the points of the grid `step * Z^2` inside the bounded
/// Hill's region. Below the second critical value the region is the inside
/// of the traced bounded oval; at higher energies, where the region is no
/// longer bounded, the component of `{V <= c}` containing `L1` is flood
/// filled inside `[-2, 2]^2`.
pub fn w_positive_on_region(mu: f64, c: f64, grid_step: f64) -> Result<WScan> {
    MassRatio::require_proper(mu)?;
    if !(grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step {grid_step} must be positive")));
    }
    let energies = critical::critical_energies(mu)?;
    if energies.h1 < c && c < energies.second() {
        scan_bounded(mu, c, grid_step)
    } else {
        scan_flood(mu, c, grid_step)
    }
}

fn scan_bounded(mu: f64, c: f64, step: f64) -> Result<WScan> {
    let sys = SystemDescriptor::pcr3bp(mu)?;
    let oval = region::trace_oval(&sys, c, ComponentLabel::Bounded)?;
    let bounds = Window::bounding(oval.vertices().iter().copied()).ok_or(Error::NotClosed)?;
    let j0 = (bounds.q2_min / step).floor() as i64;
    let j1 = (bounds.q2_max / step).ceil() as i64;
    let empty = (f64::INFINITY, ConfigPoint::ORIGIN, 0usize);
    let acc = (j0..=j1)
        .into_par_iter()
        .map(|j| {
            let q2 = j as f64 * step;
            let mut acc = empty;
            for (x0, x1) in oval.curve.scanline(q2) {
                let i0 = (x0 / step).ceil() as i64;
                let i1 = (x1 / step).floor() as i64;
                for i in i0..=i1 {
                    let q = ConfigPoint::new(i as f64 * step, q2);
                    if let Ok(w) = eval_w(mu, q) {
                        acc = merge_scan(acc, (w, q, 1));
                    }
                }
            }
            acc
        })
        .reduce(|| empty, merge_scan);
    Ok(finish_scan(acc))
}

fn scan_flood(mu: f64, c: f64, step: f64) -> Result<WScan> {
    let sys = SystemDescriptor::pcr3bp(mu)?;
    let half = 2.0;
    let n = (2.0 * half / step).round() as usize + 1;
    let point = |i: usize, j: usize| ConfigPoint::new(-half + i as f64 * step, -half + j as f64 * step);
    let inside = |i: usize, j: usize| sys.effective_potential(point(i, j)).map(|v| v <= c).unwrap_or(true);
    let [l1, ..] = critical::collinear_points(mu)?;
    let start = (((l1.location.q1 + half) / step).round() as usize, (half / step).round() as usize);
    let mut seen = vec![false; n * n];
    let mut stack = Vec::new();
    if inside(start.0, start.1) {
        seen[start.1 * n + start.0] = true;
        stack.push(start);
    }
    let mut acc = (f64::INFINITY, ConfigPoint::ORIGIN, 0usize);
    while let Some((i, j)) = stack.pop() {
        let q = point(i, j);
        if let Ok(w) = eval_w(mu, q) {
            acc = merge_scan(acc, (w, q, 1));
        }
        let neighbours = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
        for (a, b) in neighbours {
            if a < n && b < n && !seen[b * n + a] && inside(a, b) {
                seen[b * n + a] = true;
                stack.push((a, b));
            }
        }
    }
    Ok(finish_scan(acc))
}

/// `{V_q1 = 0}` inside `window`, by marching squares with spacing `step`.
pub fn trace_vq1_zero(sys: &SystemDescriptor, window: Window, step: f64) -> Result<Vec<LevelCurve>> {
    struct Vq1<'a>(&'a SystemDescriptor);
    impl ScalarField for Vq1<'_> {
        fn value_grad(&self, q: ConfigPoint) -> Result<(f64, [f64; 2])> {
            let g = self.0.grad_v(q)?;
            let h = self.0.hess_v(q)?;
            Ok((g[0], [h.a11, h.a12]))
        }
    }
    levelset::contour_grid(&Vq1(sys), 0.0, window, step)
}
