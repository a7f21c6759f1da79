//! Level curves of smooth scalar fields on the plane.
//!
//! [`trace`] follows a single curve by predictor-corrector continuation: a
//! predictor step along the tangent `grad^perp = (f_q2, -f_q1)` followed by
//! Newton corrections along the gradient. [`contour_grid`] extracts all
//! components inside a window with marching squares.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;
use crate::systems::ConfigPoint;

/// A scalar field with its gradient.
pub trait ScalarField {
    fn value_grad(&self, q: ConfigPoint) -> Result<(f64, [f64; 2])>;

    fn value(&self, q: ConfigPoint) -> Result<f64> {
        Ok(self.value_grad(q)?.0)
    }
}

impl<F> ScalarField for F
where
    F: Fn(ConfigPoint) -> Result<(f64, [f64; 2])>,
{
    fn value_grad(&self, q: ConfigPoint) -> Result<(f64, [f64; 2])> {
        self(q)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub q1_min: f64,
    pub q1_max: f64,
    pub q2_min: f64,
    pub q2_max: f64,
}

impl Window {
    pub fn new(q1_min: f64, q1_max: f64, q2_min: f64, q2_max: f64) -> Self {
        Self { q1_min, q1_max, q2_min, q2_max }
    }

    pub fn square(half_width: f64) -> Self {
        Self::new(-half_width, half_width, -half_width, half_width)
    }

    pub fn contains(&self, q: ConfigPoint) -> bool {
        q.q1 >= self.q1_min && q.q1 <= self.q1_max && q.q2 >= self.q2_min && q.q2 <= self.q2_max
    }

    /// Smallest window containing all points.
    pub fn bounding(points: impl IntoIterator<Item = ConfigPoint>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut w = Self::new(first.q1, first.q1, first.q2, first.q2);
        for p in it {
            w.q1_min = w.q1_min.min(p.q1);
            w.q1_max = w.q1_max.max(p.q1);
            w.q2_min = w.q2_min.min(p.q2);
            w.q2_max = w.q2_max.max(p.q2);
        }
        Some(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSettings {
    /// Nominal predictor step (arc length).
    pub step: f64,
    /// Corrector stops once `|f - level|` is below this.
    pub tolerance: f64,
    pub max_steps: usize,
    /// The step is halved when the corrector needs more iterations than this.
    pub max_newton: usize,
    /// Largest accepted turn of the tangent per step, in radians.
    pub max_turn: f64,
    pub min_step: f64,
    /// Curves leaving this window are cut and reported as open.
    pub clip: Window,
}

impl Default for TraceSettings {
    fn default() -> Self {
        Self {
            step: 1e-3,
            tolerance: 1e-10,
            max_steps: 1_000_000,
            max_newton: 5,
            max_turn: 0.2,
            min_step: 1e-10,
            clip: Window::square(10.0),
        }
    }
}

impl TraceSettings {
    /// Distance to the seed at which a walk is considered to have closed.
    pub fn closure_tolerance(&self) -> f64 {
        2.0 * self.step
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurve {
    pub vertices: Vec<ConfigPoint>,
    /// First and last vertex coincide.
    pub closed: bool,
}

impl LevelCurve {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn arc_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Distance from `p` to the polyline.
    pub fn distance_to(&self, p: ConfigPoint) -> f64 {
        self.vertices.windows(2).map(|w| segment_distance(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
    }

    /// Even-odd point-in-polygon test; only meaningful for closed curves.
    pub fn encloses(&self, p: ConfigPoint) -> bool {
        let mut inside = false;
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.q2 > p.q2) != (b.q2 > p.q2) {
                let x = a.q1 + (p.q2 - a.q2) * (b.q1 - a.q1) / (b.q2 - a.q2);
                if p.q1 < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Intervals of `q1` where the horizontal line at `q2` lies inside the closed curve.
    pub fn scanline(&self, q2: f64) -> Vec<(f64, f64)> {
        let mut xs: Vec<f64> = self
            .vertices
            .windows(2)
            .filter(|w| (w[0].q2 > q2) != (w[1].q2 > q2))
            .map(|w| w[0].q1 + (q2 - w[0].q2) * (w[1].q1 - w[0].q1) / (w[1].q2 - w[0].q2))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
    }
}

pub fn segment_distance(p: ConfigPoint, a: ConfigPoint, b: ConfigPoint) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + t * ab)
}

fn unit_tangent(g: [f64; 2]) -> Result<ConfigPoint> {
    let n = g[0].hypot(g[1]);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument("vanishing gradient on level curve".into()));
    }
    Ok(ConfigPoint::new(g[1] / n, -g[0] / n))
}

/// Newton iteration along the gradient onto `f = level`. Returns the point and
/// the number of iterations used.
pub fn project<F: ScalarField + ?Sized>(
    f: &F,
    level: f64,
    start: ConfigPoint,
    tolerance: f64,
    max_iter: usize,
) -> Result<(ConfigPoint, usize)> {
    let mut q = start;
    for it in 0..=max_iter {
        let (v, g) = f.value_grad(q)?;
        let r = v - level;
        if r.abs() < tolerance {
            return Ok((q, it));
        }
        if it == max_iter {
            break;
        }
        let g2 = g[0] * g[0] + g[1] * g[1];
        if !(g2 > 0.0 && g2.is_finite()) {
            break;
        }
        q = ConfigPoint::new(q.q1 - r * g[0] / g2, q.q2 - r * g[1] / g2);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: f.value(q).map(|v| (v - level).abs()).unwrap_or(f64::NAN),
    })
}

/// First point on the ray `origin + s * direction`, `s` in `[s_min, s_max]`,
/// where `f` crosses `level`. The ray is probed in increments of `probe` and
/// the crossing refined with Brent's method.
pub fn seed_on_ray<F: ScalarField + ?Sized>(
    f: &F,
    level: f64,
    origin: ConfigPoint,
    direction: ConfigPoint,
    s_min: f64,
    s_max: f64,
    probe: f64,
) -> Result<ConfigPoint> {
    let g = |s: f64| -> Result<f64> { Ok(f.value(origin + s * direction)? - level) };
    let mut s0 = s_min;
    let mut g0 = g(s0)?;
    if g0 == 0.0 {
        return Ok(origin + s0 * direction);
    }
    let mut s1 = s0;
    while s1 < s_max {
        s1 = (s0 + probe).min(s_max);
        let g1 = g(s1)?;
        if g1.signum() != g0.signum() {
            let s = roots::brent(g, s0, s1, 1e-15, 200)?;
            return Ok(origin + s * direction);
        }
        s0 = s1;
        g0 = g1;
    }
    Err(Error::SeedNotFound(format!(
        "no crossing of level {level} on ray from ({}, {}) direction ({}, {})",
        origin.q1, origin.q2, direction.q1, direction.q2
    )))
}

enum WalkEnd {
    Closed,
    Exited,
}

fn walk<F: ScalarField + ?Sized>(
    f: &F,
    level: f64,
    seed: ConfigPoint,
    orientation: f64,
    settings: &TraceSettings,
) -> Result<(Vec<ConfigPoint>, WalkEnd)> {
    let mut q = seed;
    let mut tangent = orientation * unit_tangent(f.value_grad(q)?.1)?;
    let mut h = settings.step;
    let mut travelled = 0.0;
    let mut path = Vec::new();
    let closure = settings.closure_tolerance();
    let cos_turn = settings.max_turn.cos();

    for _ in 0..settings.max_steps {
        let predicted = q + h * tangent;
        let accepted = match project(f, level, predicted, settings.tolerance, settings.max_newton) {
            Ok((next, _)) => {
                let moved = next.dist(q);
                match f.value_grad(next).and_then(|(_, g)| unit_tangent(g)) {
                    Ok(t) => {
                        let t = orientation * t;
                        if t.dot(tangent) >= cos_turn && moved < 2.0 * h && moved > 0.25 * h {
                            Some((next, t, moved))
                        } else {
                            None
                        }
                    }
                    Err(_) => None,
                }
            }
            Err(Error::Singularity { .. }) | Err(Error::NoConvergence { .. }) => None,
            Err(e) => return Err(e),
        };
        let Some((next, t, moved)) = accepted else {
            h *= 0.5;
            if h < settings.min_step {
                return Err(Error::TraceUnderflow { q1: q.q1, q2: q.q2 });
            }
            continue;
        };
        q = next;
        tangent = t;
        travelled += moved;
        path.push(q);
        if !settings.clip.contains(q) {
            return Ok((path, WalkEnd::Exited));
        }
        if travelled > 4.0 * settings.step && q.dist(seed) < closure && (seed - q).dot(tangent) > 0.0 {
            return Ok((path, WalkEnd::Closed));
        }
        h = (2.0 * h).min(settings.step);
    }
    Err(Error::NoClosure { steps: settings.max_steps })
}

/// Follows the level curve `f = level` through `seed`. A curve that returns to
/// its seed is closed; one that leaves the clip window is traced in both
/// directions and returned open.
pub fn trace<F: ScalarField + ?Sized>(
    f: &F,
    level: f64,
    seed: ConfigPoint,
    settings: &TraceSettings,
) -> Result<LevelCurve> {
    let (seed, _) = project(f, level, seed, settings.tolerance, 50)?;
    let (forward, end) = walk(f, level, seed, 1.0, settings)?;
    match end {
        WalkEnd::Closed => {
            let mut vertices = Vec::with_capacity(forward.len() + 2);
            vertices.push(seed);
            vertices.extend(forward);
            vertices.push(seed);
            Ok(LevelCurve { vertices, closed: true })
        }
        WalkEnd::Exited => {
            let (backward, _) = walk(f, level, seed, -1.0, settings)?;
            let mut vertices: Vec<ConfigPoint> = backward.into_iter().rev().collect();
            vertices.push(seed);
            vertices.extend(forward);
            Ok(LevelCurve { vertices, closed: false })
        }
    }
}

/// Edge of the sampling grid: horizontal edges join `(i, j)`-`(i+1, j)`,
/// vertical edges join `(i, j)`-`(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct EdgeKey {
    j: usize,
    i: usize,
    vertical: bool,
}

/// All components of `f = level` inside `window`, by marching squares on a
/// grid of spacing `step`. Edge crossings are refined by bisection; sign
/// changes caused by poles of `f` (no genuine root on the edge) are dropped.
pub fn contour_grid<F: ScalarField + Sync + ?Sized>(
    f: &F,
    level: f64,
    window: Window,
    step: f64,
) -> Result<Vec<LevelCurve>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step {step} must be positive")));
    }
    let nx = ((window.q1_max - window.q1_min) / step).ceil() as usize;
    let ny = ((window.q2_max - window.q2_min) / step).ceil() as usize;
    let point = |i: usize, j: usize| ConfigPoint::new(window.q1_min + i as f64 * step, window.q2_min + j as f64 * step);
    let sample = |p: ConfigPoint| f.value(p).map(|v| v - level).unwrap_or(f64::NAN);

    use rayon::prelude::*;
    let values: Vec<Vec<f64>> =
        (0..=ny).into_par_iter().map(|j| (0..=nx).map(|i| sample(point(i, j))).collect()).collect();

    let mut crossings: BTreeMap<EdgeKey, Option<ConfigPoint>> = BTreeMap::new();
    let mut edge_point = |key: EdgeKey| -> Option<ConfigPoint> {
        *crossings.entry(key).or_insert_with(|| {
            let a = point(key.i, key.j);
            let b = if key.vertical { point(key.i, key.j + 1) } else { point(key.i + 1, key.j) };
            let g = |s: f64| -> Result<f64> { Ok(f.value(a + s * (b - a))? - level) };
            let (lo, hi) = roots::bisect(g, 0.0, 1.0, 1e-13).ok()?;
            let s = 0.5 * (lo + hi);
            let p = a + s * (b - a);
            let r = f.value(p).ok()?;
            // A pole leaves a large residual where a genuine root leaves almost none.
            (r - level).abs().le(&1e-6).then_some(p)
        })
    };

    let mut adjacency: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = [values[j][i], values[j][i + 1], values[j + 1][i + 1], values[j + 1][i]];
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let pos: Vec<bool> = v.iter().map(|&x| x > 0.0).collect();
            // Edges of the cell, in order: bottom, right, top, left.
            let edges = [
                EdgeKey { j, i, vertical: false },
                EdgeKey { j, i: i + 1, vertical: true },
                EdgeKey { j: j + 1, i, vertical: false },
                EdgeKey { j, i, vertical: true },
            ];
            let crossed: Vec<usize> = (0..4).filter(|&k| pos[k] != pos[(k + 1) % 4]).collect();
            let pairs: Vec<(usize, usize)> = match crossed.len() {
                2 => vec![(crossed[0], crossed[1])],
                4 => {
                    let centre = sample(point(i, j) + ConfigPoint::new(0.5 * step, 0.5 * step));
                    if (centre > 0.0) == pos[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
                _ => vec![],
            };
            for (a, b) in pairs {
                let (ka, kb) = (edges[a], edges[b]);
                if edge_point(ka).is_some() && edge_point(kb).is_some() {
                    adjacency.entry(ka).or_default().push(kb);
                    adjacency.entry(kb).or_default().push(ka);
                }
            }
        }
    }

    let mut visited: BTreeMap<EdgeKey, bool> = adjacency.keys().map(|k| (*k, false)).collect();
    let mut curves = Vec::new();
    let chain = |start: EdgeKey, visited: &mut BTreeMap<EdgeKey, bool>| -> Vec<EdgeKey> {
        let mut keys = vec![start];
        visited.insert(start, true);
        let mut current = start;
        loop {
            let next = adjacency[&current].iter().find(|k| !visited[*k]).copied();
            match next {
                Some(n) => {
                    visited.insert(n, true);
                    keys.push(n);
                    current = n;
                }
                None => break,
            }
        }
        keys
    };
    let endpoints: Vec<EdgeKey> = adjacency.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    for start in endpoints {
        if !visited[&start] {
            let keys = chain(start, &mut visited);
            curves.push((keys, false));
        }
    }
    let all: Vec<EdgeKey> = adjacency.keys().copied().collect();
    for start in all {
        if !visited[&start] {
            let keys = chain(start, &mut visited);
            curves.push((keys, true));
        }
    }
    Ok(curves
        .into_iter()
        .map(|(keys, closed)| {
            let mut vertices: Vec<ConfigPoint> = keys.iter().filter_map(|k| crossings[k]).collect();
            if closed {
                vertices.push(vertices[0]);
            }
            LevelCurve { vertices, closed }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(q: ConfigPoint) -> Result<(f64, [f64; 2])> {
        Ok((q.norm_sq(), [2.0 * q.q1, 2.0 * q.q2]))
    }

    #[test]
    fn traces_unit_circle() {
        let c = trace(&circle, 1.0, ConfigPoint::new(0.0, 1.0), &TraceSettings::default()).unwrap();
        assert!(c.closed);
        assert_eq!(c.vertices.first(), c.vertices.last());
        for v in &c.vertices {
            assert!((v.norm_sq() - 1.0).abs() < 1e-10);
        }
        assert!((c.arc_length() - 2.0 * std::f64::consts::PI).abs() < 1e-3);
        assert!(c.encloses(ConfigPoint::new(0.1, 0.2)));
        assert!(!c.encloses(ConfigPoint::new(1.1, 0.0)));
        let iv = c.scanline(0.0);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 + 1.0).abs() < 1e-6 && (iv[0].1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn open_curve_is_clipped() {
        let line = |q: ConfigPoint| -> Result<(f64, [f64; 2])> { Ok((q.q1 - q.q2, [1.0, -1.0])) };
        let settings = TraceSettings { clip: Window::square(1.0), ..Default::default() };
        let c = trace(&line, 0.0, ConfigPoint::new(0.2, 0.2), &settings).unwrap();
        assert!(!c.closed);
        let first = c.vertices[0];
        let last = *c.vertices.last().unwrap();
        assert!(first.q1.abs() > 1.0 && last.q1.abs() > 1.0 && first.q1 * last.q1 < 0.0);
    }

    #[test]
    fn seed_on_ray_finds_first_crossing() {
        let p = seed_on_ray(&circle, 4.0, ConfigPoint::ORIGIN, ConfigPoint::new(0.0, 1.0), 0.0, 5.0, 0.1).unwrap();
        assert!((p.q2 - 2.0).abs() < 1e-12);
        assert!(seed_on_ray(&circle, 100.0, ConfigPoint::ORIGIN, ConfigPoint::new(1.0, 0.0), 0.0, 5.0, 0.1).is_err());
    }

    #[test]
    fn marching_squares_two_circles() {
        let two = |q: ConfigPoint| -> Result<(f64, [f64; 2])> {
            let a = (q - ConfigPoint::new(-1.0, 0.0)).norm_sq();
            let b = (q - ConfigPoint::new(1.0, 0.0)).norm_sq();
            Ok((a.min(b), [0.0, 0.0]))
        };
        let curves = contour_grid(&two, 0.25, Window::square(2.0), 0.01).unwrap();
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert!(c.closed);
            for v in &c.vertices {
                let r = (v.q1.abs() - 1.0).hypot(v.q2);
                assert!((r - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn marching_squares_skips_poles() {
        // 1/x changes sign across x = 0 without a root.
        let pole = |q: ConfigPoint| -> Result<(f64, [f64; 2])> { Ok((1.0 / q.q1, [0.0, 0.0])) };
        let curves = contour_grid(&pole, 0.0, Window::new(-1.005, 0.995, -1.0, 1.0), 0.01).unwrap();
        assert!(curves.is_empty());
    }
}
