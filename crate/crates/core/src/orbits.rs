//! Trajectories, symmetric periodic orbits and their syzygies.
//!
//! A syzygy is a crossing of the `q1`-axis (the line through both primaries);
//! in Hill's lunar problem a quadrature is a crossing of the `q2`-axis.

use serde::{Deserialize, Serialize};

use crate::critical;
use crate::error::{Error, Result};
use crate::ode::{DenseSegment, Dop853, StepperOptions};
use crate::quadrature::GaussLegendre;
use crate::region::{self, ComponentLabel};
use crate::roots;
use crate::systems::{ConfigPoint, PhaseState, SystemDescriptor, SystemKind};

/// Integration stops when the trajectory comes this close to a primary.
pub const GUARD_RADIUS: f64 = 1e-4;

/// Integrator tolerance used by the shooter and the theorem checks.
pub const SHOOTING_TOLERANCE: f64 = 1e-13;

/// Time tolerance for locating axis crossings.
pub const EVENT_TIME_TOLERANCE: f64 = 1e-12;

/// Crossings with `|velocity|` above this are transverse.
pub const TRANSVERSALITY_THRESHOLD: f64 = 1e-8;

/// Largest accepted `|integral of V_q2 over one period|`.
pub const PERIOD_INTEGRAL_TOLERANCE: f64 = 1e-8;

/// Gradient norm below which a state at rest counts as an equilibrium.
const EQUILIBRIUM_GRADIENT: f64 = 1e-10;

/// Dense samples per step used to look for sign changes.
const EVENT_SAMPLES: usize = 8;

/// Gauss-Legendre nodes per step for the period integral.
const QUADRATURE_NODES: usize = 10;

/// A solution of the equations of motion with continuous output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub system: SystemDescriptor,
    pub tolerance: f64,
    /// Accepted integrator nodes `(t, state)`.
    pub nodes: Vec<(f64, PhaseState)>,
    /// `max |H(node) - H(start)|` over the nodes.
    pub energy_drift: f64,
    #[serde(skip)]
    segments: Vec<DenseSegment<4>>,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.nodes[0].0
    }

    pub fn t_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].0
    }

    pub fn initial(&self) -> PhaseState {
        self.nodes[0].1
    }

    pub fn final_state(&self) -> PhaseState {
        self.nodes[self.nodes.len() - 1].1
    }

    pub fn segments(&self) -> &[DenseSegment<4>] {
        &self.segments
    }

    /// State at time `t` from the dense output; `t` is clamped to the span.
    pub fn state_at(&self, t: f64) -> PhaseState {
        if self.segments.is_empty() {
            return self.initial();
        }
        let k = self.segments.partition_point(|s| s.t1() < t).min(self.segments.len() - 1);
        PhaseState::from_array(self.segments[k].eval(t.clamp(self.t_start(), self.t_end())))
    }

    /// `int V_q2(x(t)) dt` over the whole trajectory.
    pub fn integral_of_vq2(&self) -> Result<f64> {
        let rule = GaussLegendre::new(QUADRATURE_NODES);
        let mut total = 0.0;
        let mut failure = None;
        for seg in &self.segments {
            total += rule.integrate(seg.t0, seg.t1(), |t| {
                let q = PhaseState::from_array(seg.eval(t)).q;
                match self.system.grad_v(q) {
                    Ok(g) => g[1],
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            });
        }
        failure.map_or(Ok(total), Err)
    }
}

fn rhs(sys: SystemDescriptor) -> impl FnMut(f64, &[f64; 4]) -> Result<[f64; 4]> {
    move |_, y| Ok(sys.eom(&PhaseState::from_array(*y))?.to_array())
}

fn check_start(sys: &SystemDescriptor, state: &PhaseState) -> Result<()> {
    if sys.singularity_distance(state.q) <= GUARD_RADIUS {
        return Err(Error::SingularityApproach { t: 0.0 });
    }
    Ok(())
}

/// Drives the stepper from `state0` until `t_end` or until `stop` returns true
/// for an accepted segment.
fn integrate_with(
    sys: &SystemDescriptor,
    state0: PhaseState,
    t_end: f64,
    tolerance: f64,
    mut stop: impl FnMut(&DenseSegment<4>) -> bool,
) -> Result<Trajectory> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tolerance} must be positive")));
    }
    if !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("end time {t_end} must be non-negative")));
    }
    check_start(sys, &state0)?;
    let h0 = sys.hamiltonian(&state0)?;
    let mut nodes = vec![(0.0, state0)];
    let mut segments = Vec::new();
    let mut drift: f64 = 0.0;
    if t_end > 0.0 {
        // Per-unit-step control keeps the energy error proportional to
        // `tolerance * t_end` on long runs.
        let options = StepperOptions { per_unit_step: true, ..StepperOptions::with_tolerance(tolerance) };
        let mut stepper = Dop853::new(rhs(*sys), 0.0, state0.to_array(), options)?;
        while stepper.t() < t_end {
            let seg = stepper.step(t_end)?;
            let state = PhaseState::from_array(stepper.y());
            if sys.singularity_distance(state.q) <= GUARD_RADIUS {
                return Err(Error::SingularityApproach { t: stepper.t() });
            }
            drift = drift.max((sys.hamiltonian(&state)? - h0).abs());
            nodes.push((stepper.t(), state));
            segments.push(seg);
            if stop(&seg) {
                break;
            }
        }
    }
    Ok(Trajectory { system: *sys, tolerance, nodes, energy_drift: drift, segments })
}

/// Integrates the equations of motion on `[0, t_end]`.
///
/// Fails with [`Error::SingularityApproach`] inside the guard radius of a
/// primary, or with [`Error::StepUnderflow`] when a close approach needs
/// steps below round-off at the requested tolerance.
pub fn integrate(sys: &SystemDescriptor, state0: PhaseState, t_end: f64, tolerance: f64) -> Result<Trajectory> {
    integrate_with(sys, state0, t_end, tolerance, |_| false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Crossings of the `q1`-axis (`q2 = 0`): syzygies.
    Q2Zero,
    /// Crossings of the `q2`-axis (`q1 = 0`): quadratures.
    Q1Zero,
}

impl Axis {
    fn component(self) -> usize {
        match self {
            Axis::Q2Zero => 1,
            Axis::Q1Zero => 0,
        }
    }
}

/// Where an axis crossing happens relative to the primaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventSide {
    BeyondEarth,
    BetweenPrimaries,
    BeyondSun,
    Positive,
    Negative,
}

fn side_of(sys: &SystemDescriptor, axis: Axis, q: ConfigPoint) -> EventSide {
    match (axis, sys.kind) {
        (Axis::Q2Zero, SystemKind::Pcr3bp) => {
            if q.q1 > sys.earth().q1 {
                EventSide::BeyondEarth
            } else if q.q1 < sys.sun().q1 {
                EventSide::BeyondSun
            } else {
                EventSide::BetweenPrimaries
            }
        }
        (Axis::Q2Zero, _) if q.q1 >= 0.0 => EventSide::Positive,
        (Axis::Q1Zero, _) if q.q2 >= 0.0 => EventSide::Positive,
        _ => EventSide::Negative,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisEvent {
    pub t: f64,
    pub location: ConfigPoint,
    /// Velocity component normal to the axis at the crossing.
    pub crossing_velocity: f64,
    pub side: EventSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossings {
    pub events: Vec<AxisEvent>,
    /// The coordinate vanished identically along the trajectory, as for the
    /// equilibrium at `L1`, so the trajectory lies on the axis for all time.
    pub degenerate: bool,
}

/// Every sign change of the coordinate normal to `axis`, located by bisection
/// on the dense output. Exact zeros at sample points are skipped, so a
/// trajectory that starts on the axis does not report its starting point.
pub fn detect_axis_crossings(traj: &Trajectory, axis: Axis) -> Result<Crossings> {
    let k = axis.component();
    let x0 = traj.initial();
    let at_rest_on_axis = x0.q.to_array()[k] == 0.0
        && x0.v == [0.0, 0.0]
        && traj.system.grad_v(x0.q).is_ok_and(|g| g[0].hypot(g[1]) < EQUILIBRIUM_GRADIENT);
    if at_rest_on_axis {
        // The equilibrium on the axis: round-off would otherwise be amplified by
        // the instability of the saddle and produce spurious crossings.
        return Ok(Crossings { events: Vec::new(), degenerate: true });
    }
    let value = |seg: &DenseSegment<4>, t: f64| seg.eval(t)[k];
    let mut events = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut max_abs: f64 = traj.initial().to_array()[k].abs();
    if max_abs > 0.0 {
        prev = Some((traj.t_start(), traj.initial().to_array()[k]));
    }
    for seg in traj.segments() {
        for j in 1..=EVENT_SAMPLES {
            let t = if j == EVENT_SAMPLES { seg.t1() } else { seg.t0 + seg.h * j as f64 / EVENT_SAMPLES as f64 };
            let v = value(seg, t);
            max_abs = max_abs.max(v.abs());
            if v == 0.0 {
                continue;
            }
            if let Some((tp, vp)) = prev {
                if vp.signum() != v.signum() {
                    let lo = tp.max(seg.t0);
                    let (a, b) = roots::bisect(|s| Ok(value(seg, s)), lo, t, EVENT_TIME_TOLERANCE)?;
                    let tc = 0.5 * (a + b);
                    let state = PhaseState::from_array(seg.eval(tc));
                    events.push(AxisEvent {
                        t: tc,
                        location: state.q,
                        crossing_velocity: state.v[k],
                        side: side_of(&traj.system, axis, state.q),
                    });
                }
            }
            prev = Some((t, v));
        }
    }
    Ok(Crossings { events, degenerate: max_abs < 1e-14 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Rotating against the frame, clockwise around the nearest primary.
    Retrograde,
    Direct,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retrograde" => Ok(Self::Retrograde),
            "direct" => Ok(Self::Direct),
            other => Err(Error::InvalidArgument(format!("unknown direction {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub system: SystemDescriptor,
    pub initial: PhaseState,
    pub period: f64,
    pub energy: f64,
    pub symmetric: bool,
    pub direction: Direction,
    /// `max |x(T) - x(0)|` over the four components.
    pub residual: f64,
    pub energy_drift: f64,
}

fn nearest_centre(sys: &SystemDescriptor, q1: f64) -> f64 {
    sys.singularities()
        .into_iter()
        .min_by(|a, b| (a.q1 - q1).abs().total_cmp(&(b.q1 - q1).abs()))
        .map(|p| p.q1)
        .unwrap_or(0.0)
}

/// Initial state `(q1, 0, 0, v2)` on the energy level `c`.
pub fn symmetric_start(sys: &SystemDescriptor, c: f64, q1: f64, direction: Direction) -> Result<PhaseState> {
    let q = ConfigPoint::new(q1, 0.0);
    let v = sys.effective_potential(q).map_err(|_| Error::GuessOutsideRegion { q1, c })?;
    if !(v < c) {
        return Err(Error::GuessOutsideRegion { q1, c });
    }
    let speed = (2.0 * (c - v)).sqrt();
    let outward = (q1 - nearest_centre(sys, q1)).signum();
    let v2 = match direction {
        Direction::Retrograde => -outward * speed,
        Direction::Direct => outward * speed,
    };
    Ok(PhaseState::new(q1, 0.0, 0.0, v2))
}

/// Longest half-period the shooter will integrate.
const MAX_HALF_PERIOD: f64 = 100.0;

/// First return to `q2 = 0`: time and state.
fn half_return(sys: &SystemDescriptor, start: PhaseState) -> Result<(f64, PhaseState)> {
    let sign = start.v[1].signum();
    let mut hit: Option<(DenseSegment<4>, f64, f64)> = None;
    let traj = integrate_with(sys, start, MAX_HALF_PERIOD, SHOOTING_TOLERANCE, |seg| {
        let mut tp = seg.t0;
        for j in 1..=EVENT_SAMPLES {
            let t = seg.t0 + seg.h * j as f64 / EVENT_SAMPLES as f64;
            let v = seg.eval(t)[1];
            if v != 0.0 && v.signum() != sign {
                hit = Some((*seg, tp, t));
                return true;
            }
            tp = t;
        }
        false
    })?;
    let Some((seg, a, b)) = hit else {
        return Err(Error::NoReturn { t_max: traj.t_end() });
    };
    // At the very first sample the orbit still sits on the axis.
    let a = if a == 0.0 { b * 1e-3 } else { a };
    let t = roots::brent(|s| Ok(seg.eval(s)[1]), a, b, 1e-15, 200)?;
    Ok((t, PhaseState::from_array(seg.eval(t))))
}

/// The quantity the shooter drives to zero: `v1` at the first return.
pub fn shooting_function(sys: &SystemDescriptor, c: f64, q1: f64, direction: Direction) -> Result<f64> {
    let start = symmetric_start(sys, c, q1, direction)?;
    Ok(half_return(sys, start)?.1.v[0])
}

const SHOOT_TARGET: f64 = 1e-11;
const MAX_SHOOT_ITERATIONS: usize = 60;

fn finish_orbit(sys: &SystemDescriptor, c: f64, q1: f64, direction: Direction) -> Result<PeriodicOrbit> {
    let initial = symmetric_start(sys, c, q1, direction)?;
    let (t_half, _) = half_return(sys, initial)?;
    let period = 2.0 * t_half;
    let traj = integrate(sys, initial, period, SHOOTING_TOLERANCE)?;
    let end = traj.final_state().to_array();
    let start = initial.to_array();
    let residual = (0..4).map(|i| (end[i] - start[i]).abs()).fold(0.0, f64::max);
    Ok(PeriodicOrbit {
        system: *sys,
        initial,
        period,
        energy: c,
        symmetric: true,
        direction,
        residual,
        energy_drift: traj.energy_drift,
    })
}

/// Symmetric periodic orbit through `(q1, 0)` perpendicular to the axis,
/// found by secant iteration on `q1` starting from `q1_guess`.
pub fn find_symmetric_orbit(
    sys: &SystemDescriptor,
    c: f64,
    q1_guess: f64,
    direction: Direction,
) -> Result<PeriodicOrbit> {
    symmetric_start(sys, c, q1_guess, direction)?;
    let g = |q1: f64| shooting_function(sys, c, q1, direction);
    let mut x0 = q1_guess;
    let mut g0 = g(x0)?;
    let dx = 1e-5 * (1.0 + x0.abs());
    let mut x1 = x0 + dx;
    let mut g1 = g(x1).or_else(|_| {
        x1 = x0 - dx;
        g(x1)
    })?;
    for _ in 0..MAX_SHOOT_ITERATIONS {
        if g1.abs() < SHOOT_TARGET {
            return finish_orbit(sys, c, x1, direction);
        }
        if g1 == g0 || !g1.is_finite() {
            break;
        }
        let step = (-g1 * (x1 - x0) / (g1 - g0)).clamp(-0.05, 0.05);
        x0 = x1;
        g0 = g1;
        x1 += step;
        g1 = g(x1)?;
    }
    Err(Error::NoConvergence { iterations: MAX_SHOOT_ITERATIONS, residual: g1.abs() })
}

/// Symmetric orbits with `q1` in `[a, b]`: sign changes of the shooting
/// function over `samples` points are refined with Brent's method; jumps
/// (where the first return switches branch) are discarded.
pub fn scan_symmetric_orbits(
    sys: &SystemDescriptor,
    c: f64,
    range: (f64, f64),
    samples: usize,
    direction: Direction,
) -> Result<Vec<PeriodicOrbit>> {
    if samples < 2 || !(range.0 < range.1) {
        return Err(Error::InvalidArgument("scan needs two or more samples on a non-empty range".into()));
    }
    let xs: Vec<f64> = (0..samples).map(|i| range.0 + (range.1 - range.0) * i as f64 / (samples - 1) as f64).collect();
    let gs: Vec<Option<f64>> = xs.iter().map(|&x| shooting_function(sys, c, x, direction).ok()).collect();
    let mut orbits = Vec::new();
    for i in 0..samples - 1 {
        let (Some(ga), Some(gb)) = (gs[i], gs[i + 1]) else { continue };
        if ga.signum() == gb.signum() {
            continue;
        }
        let root = roots::brent(|x| shooting_function(sys, c, x, direction), xs[i], xs[i + 1], 1e-15, 200);
        let Ok(x) = root else { continue };
        let Ok(gx) = shooting_function(sys, c, x, direction) else { continue };
        if gx.abs() > 1e-9 {
            continue;
        }
        if let Ok(orbit) = finish_orbit(sys, c, x, direction) {
            orbits.push(orbit);
        }
    }
    Ok(orbits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyzygyReport {
    pub events: Vec<AxisEvent>,
    pub count: usize,
    pub transverse: bool,
    /// Consecutive syzygies cross the axis in opposite directions.
    pub alternating: bool,
    pub period_integral: f64,
    /// Crossings of the `q2`-axis; reported for Hill's lunar problem.
    pub quadratures: Option<Vec<AxisEvent>>,
    /// The orbit lies in a bounded component below the second critical value,
    /// so the theorem applies; otherwise the report is informational.
    pub precondition: bool,
    pub degenerate: bool,
}

impl SyzygyReport {
    pub fn quadrature_count(&self) -> Option<usize> {
        self.quadratures.as_ref().map(Vec::len)
    }

    /// The conclusions of the theorem: at least two transverse syzygies and a
    /// vanishing period integral of `V_q2`.
    pub fn theorem_holds(&self) -> bool {
        self.degenerate
            || (self.count >= 2 && self.transverse && self.period_integral.abs() < PERIOD_INTEGRAL_TOLERANCE)
    }
}

/// Whether `c` lies below the energy at which the bounded component around
/// the primaries opens up, and `q` lies in a bounded component.
fn syzygy_precondition(sys: &SystemDescriptor, c: f64, q: ConfigPoint) -> bool {
    let below = match sys.kind {
        SystemKind::Pcr3bp => critical::critical_energies(sys.mu).map(|h| c < h.second()).unwrap_or(false),
        SystemKind::RotatingKepler => c < SystemDescriptor::kepler_critical_value(),
        SystemKind::HillLunar => c < critical::hill_critical_value(),
    };
    below
        && region::contains(sys, c, q)
            .map(|m| m.component.is_some_and(|l| l != ComponentLabel::Unbounded))
            .unwrap_or(false)
}

/// Counts syzygies over one period, checks transversality and evaluates
/// `int_0^T V_q2 dt`. The period is re-integrated from a point well off the
/// axis so that every crossing is interior to the time span.
pub fn verify_syzygy_theorem(orbit: &PeriodicOrbit) -> Result<SyzygyReport> {
    let sys = orbit.system;
    let precondition = syzygy_precondition(&sys, orbit.energy, orbit.initial.q);
    let first = integrate(&sys, orbit.initial, orbit.period, SHOOTING_TOLERANCE)?;
    let start = first
        .nodes
        .iter()
        .max_by(|a, b| a.1.q.q2.abs().total_cmp(&b.1.q.q2.abs()))
        .map(|n| n.1)
        .unwrap_or(orbit.initial);
    let traj = integrate(&sys, start, orbit.period, SHOOTING_TOLERANCE)?;
    let crossings = detect_axis_crossings(&traj, Axis::Q2Zero)?;
    let events = crossings.events;
    let transverse = events.iter().all(|e| e.crossing_velocity.abs() > TRANSVERSALITY_THRESHOLD);
    let alternating = events.windows(2).all(|w| w[0].crossing_velocity.signum() != w[1].crossing_velocity.signum());
    let period_integral = traj.integral_of_vq2()?;
    let quadratures =
        if sys.kind == SystemKind::HillLunar { Some(detect_axis_crossings(&traj, Axis::Q1Zero)?.events) } else { None };
    Ok(SyzygyReport {
        count: events.len(),
        events,
        transverse,
        alternating,
        period_integral,
        quadratures,
        precondition,
        degenerate: crossings.degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillContainment {
    pub energy: f64,
    pub max_radius: f64,
    pub bound: f64,
    pub contained: bool,
}

/// Traces the bounded oval of Hill's lunar problem at `c` and compares its
/// largest distance from the origin with `3^(-1/3)`.
pub fn hill_bounded_region_check(c: f64) -> Result<HillContainment> {
    let critical = critical::hill_critical_value();
    if !(c < critical) {
        return Err(Error::InvalidArgument(format!("energy {c} is not below the critical value {critical}")));
    }
    let sys = SystemDescriptor::hill_lunar();
    let oval = region::trace_oval(&sys, c, ComponentLabel::Bounded)?;
    let max_radius = oval.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let bound = 3f64.powf(-1.0 / 3.0);
    Ok(HillContainment { energy: c, max_radius, bound, contained: max_radius < bound })
}
