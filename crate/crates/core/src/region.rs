//! Hill's regions `{V <= c}` and their boundaries, the ovals of zero velocity.

use serde::{Deserialize, Serialize};

use crate::critical::{self, CriticalEnergies};
use crate::error::{Error, Result};
use crate::levelset::{self, LevelCurve, TraceSettings, Window};
use crate::systems::{ConfigPoint, MassRatio, SystemDescriptor, SystemKind};

/// Energies closer than this to a critical value are rejected.
pub const NEAR_CRITICAL_TOLERANCE: f64 = 1e-9;

/// Offset from a primary where seed rays start.
const RAY_START: f64 = 1e-6;
const RAY_PROBE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyClass {
    AllPlane,
    TwoHoles,
    Horseshoe,
    BoundedPlusUnbounded,
    ThreeComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub class: TopologyClass,
    pub component_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentLabel {
    Bounded,
    Unbounded,
    Earth,
    Sun,
}

impl std::str::FromStr for ComponentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded" => Ok(Self::Bounded),
            "unbounded" => Ok(Self::Unbounded),
            "earth" => Ok(Self::Earth),
            "sun" => Ok(Self::Sun),
            other => Err(Error::InvalidArgument(format!("unknown component label {other:?}"))),
        }
    }
}

/// A traced component of the zero-velocity curve `{V = c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvalCurve {
    #[serde(flatten)]
    pub curve: LevelCurve,
    pub component_label: ComponentLabel,
    pub energy: f64,
    pub mu: f64,
    pub system: SystemKind,
    pub step: f64,
    pub tolerance: f64,
}

impl OvalCurve {
    pub fn vertices(&self) -> &[ConfigPoint] {
        &self.curve.vertices
    }

    pub fn closed(&self) -> bool {
        self.curve.closed
    }

    pub fn system(&self) -> SystemDescriptor {
        SystemDescriptor { kind: self.system, mu: self.mu }
    }
}

fn topology_of(class: TopologyClass) -> Topology {
    let component_count = match class {
        TopologyClass::ThreeComponents => 3,
        TopologyClass::BoundedPlusUnbounded => 2,
        _ => 1,
    };
    Topology { class, component_count }
}

fn reject_near(c: f64, critical: f64) -> Result<()> {
    if (c - critical).abs() < NEAR_CRITICAL_TOLERANCE {
        return Err(Error::NearCriticalEnergy { c, critical, tolerance: NEAR_CRITICAL_TOLERANCE });
    }
    Ok(())
}

/// Topology of the Hill's region from the position of `c` among the critical energies.
pub fn classify_with(energies: &CriticalEnergies, c: f64) -> Result<Topology> {
    for h in energies.all() {
        reject_near(c, h)?;
    }
    let class = if c >= energies.h45 {
        TopologyClass::AllPlane
    } else if c > energies.third() {
        TopologyClass::TwoHoles
    } else if c > energies.second() {
        TopologyClass::Horseshoe
    } else if c > energies.h1 {
        TopologyClass::BoundedPlusUnbounded
    } else {
        TopologyClass::ThreeComponents
    };
    Ok(topology_of(class))
}

pub fn classify(mu: f64, c: f64) -> Result<Topology> {
    MassRatio::require_proper(mu)?;
    classify_with(&critical::critical_energies(mu)?, c)
}

/// Topology of any supported system. The one-centre systems have a single
/// critical value below which a bounded component splits off.
pub fn system_topology(sys: &SystemDescriptor, c: f64) -> Result<Topology> {
    let critical = match sys.kind {
        SystemKind::Pcr3bp => return classify(sys.mu, c),
        SystemKind::RotatingKepler => SystemDescriptor::kepler_critical_value(),
        SystemKind::HillLunar => critical::hill_critical_value(),
    };
    reject_near(c, critical)?;
    Ok(if c < critical {
        topology_of(TopologyClass::BoundedPlusUnbounded)
    } else {
        topology_of(TopologyClass::AllPlane)
    })
}

/// Membership of a point in the Hill's region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub inside: bool,
    pub component: Option<ComponentLabel>,
}

/// Whether `q` lies in `{V <= c}` and, if so, in which component. Components
/// are told apart by testing `q` against the traced ovals bounding them.
pub fn contains(sys: &SystemDescriptor, c: f64, q: ConfigPoint) -> Result<Membership> {
    let inside = sys.effective_potential(q)? <= c;
    if !inside {
        return Ok(Membership { inside, component: None });
    }
    let topology = system_topology(sys, c)?;
    let candidates: &[ComponentLabel] = match topology.class {
        TopologyClass::ThreeComponents => &[ComponentLabel::Earth, ComponentLabel::Sun],
        TopologyClass::BoundedPlusUnbounded => &[ComponentLabel::Bounded],
        _ => &[],
    };
    for &label in candidates {
        if trace_oval(sys, c, label)?.curve.encloses(q) {
            return Ok(Membership { inside, component: Some(label) });
        }
    }
    Ok(Membership { inside, component: Some(ComponentLabel::Unbounded) })
}

/// Radius beyond which `V < c` holds for every direction.
fn far_radius(c: f64) -> f64 {
    (2.0 * (2.0 * c.abs() + 2.0).sqrt()).max(4.0)
}

fn missing(sys: &SystemDescriptor, c: f64, label: ComponentLabel) -> Error {
    Error::SeedNotFound(format!("no {label:?} component for {:?} mu = {} at c = {c}", sys.kind, sys.mu))
}

/// Starting point, direction and length of the ray used to seed a component.
fn seed_ray(sys: &SystemDescriptor, c: f64, label: ComponentLabel) -> Result<(ConfigPoint, ConfigPoint, f64, f64)> {
    let up = ConfigPoint::new(0.0, 1.0);
    let down = ConfigPoint::new(0.0, -1.0);
    let topology = system_topology(sys, c)?;
    let far = far_radius(c);
    use ComponentLabel::*;
    use TopologyClass::*;
    match (sys.kind, label, topology.class) {
        (SystemKind::Pcr3bp, Bounded, BoundedPlusUnbounded) | (SystemKind::Pcr3bp, Earth, ThreeComponents) => {
            Ok((sys.earth(), up, RAY_START, 3.0))
        }
        (SystemKind::Pcr3bp, Sun, ThreeComponents) => Ok((sys.sun(), up, RAY_START, 3.0)),
        (SystemKind::Pcr3bp, Unbounded, TwoHoles | Horseshoe) => {
            let (l4, _) = critical::triangular_points(sys.mu)?;
            Ok((l4.location, up, 0.0, far))
        }
        (SystemKind::Pcr3bp | SystemKind::RotatingKepler, Unbounded, BoundedPlusUnbounded | ThreeComponents) => {
            Ok((ConfigPoint::new(0.0, far), down, 0.0, far))
        }
        (SystemKind::HillLunar, Unbounded, BoundedPlusUnbounded) => {
            Ok((ConfigPoint::new(far, 0.0), ConfigPoint::new(-1.0, 0.0), 0.0, far))
        }
        (SystemKind::RotatingKepler | SystemKind::HillLunar, Bounded, BoundedPlusUnbounded) => {
            Ok((ConfigPoint::ORIGIN, up, RAY_START, 3.0))
        }
        _ => Err(missing(sys, c, label)),
    }
}

pub fn trace_oval(sys: &SystemDescriptor, c: f64, label: ComponentLabel) -> Result<OvalCurve> {
    trace_oval_with(sys, c, label, &TraceSettings::default())
}

/// Traces one component of `{V = c}`. Unbounded arcs are followed until they
/// leave `settings.clip`; the clip is widened when it would cut the outer oval
/// of the restricted problem.
pub fn trace_oval_with(
    sys: &SystemDescriptor,
    c: f64,
    label: ComponentLabel,
    settings: &TraceSettings,
) -> Result<OvalCurve> {
    let (origin, dir, s_min, s_max) = seed_ray(sys, c, label)?;
    let field = |q: ConfigPoint| -> Result<(f64, [f64; 2])> { Ok((sys.effective_potential(q)?, sys.grad_v(q)?)) };
    let seed =
        levelset::seed_on_ray(&field, c, origin, dir, s_min, s_max, RAY_PROBE).map_err(|_| missing(sys, c, label))?;
    let mut settings = *settings;
    if label == ComponentLabel::Unbounded && sys.kind != SystemKind::HillLunar {
        let r = far_radius(c) + 1.0;
        let w = &mut settings.clip;
        w.q1_min = w.q1_min.min(-r);
        w.q1_max = w.q1_max.max(r);
        w.q2_min = w.q2_min.min(-r);
        w.q2_max = w.q2_max.max(r);
    }
    let curve = levelset::trace(&field, c, seed, &settings)?;
    Ok(OvalCurve {
        curve,
        component_label: label,
        energy: c,
        mu: sys.mu,
        system: sys.kind,
        step: settings.step,
        tolerance: settings.tolerance,
    })
}

/// Solves `V = c`, `dV/dq_other = 0` by Newton from `start`: the point of the
/// oval where the coordinate `axis` (0 for `q1`, 1 for `q2`) is extremal.
fn refine_extremum(sys: &SystemDescriptor, c: f64, start: ConfigPoint, axis: usize) -> Option<ConfigPoint> {
    let mut q = start;
    for _ in 0..30 {
        let v = sys.effective_potential(q).ok()? - c;
        let g = sys.grad_v(q).ok()?;
        let h = sys.hess_v(q).ok()?;
        let other = 1 - axis;
        let f = [v, g[other]];
        if f[0].abs() < 1e-14 && f[1].abs() < 1e-12 {
            return Some(q);
        }
        let row = if other == 0 { [h.a11, h.a12] } else { [h.a12, h.a22] };
        let jac = [[g[0], g[1]], row];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let d1 = (f[0] * jac[1][1] - f[1] * jac[0][1]) / det;
        let d2 = (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
        q = ConfigPoint::new(q.q1 - d1, q.q2 - d2);
    }
    (start.dist(q) < 1e-2).then_some(q)
}

/// Bounding box of the bounded component, with each extreme refined onto the
/// exact point of the oval where the tangent is vertical or horizontal.
pub fn bounded_region_bounds(sys: &SystemDescriptor, c: f64) -> Result<Window> {
    let oval = trace_oval(sys, c, ComponentLabel::Bounded)?;
    let vs = oval.vertices();
    let mut window = Window::bounding(vs.iter().copied()).ok_or(Error::NotClosed)?;
    let pick = |key: fn(&ConfigPoint) -> f64, max: bool| -> ConfigPoint {
        let it = vs.iter().copied();
        if max {
            it.max_by(|a, b| key(a).total_cmp(&key(b))).unwrap()
        } else {
            it.min_by(|a, b| key(a).total_cmp(&key(b))).unwrap()
        }
    };
    let q1 = |p: &ConfigPoint| p.q1;
    let q2 = |p: &ConfigPoint| p.q2;
    if let Some(p) = refine_extremum(sys, c, pick(q1, false), 0) {
        window.q1_min = window.q1_min.min(p.q1);
    }
    if let Some(p) = refine_extremum(sys, c, pick(q1, true), 0) {
        window.q1_max = window.q1_max.max(p.q1);
    }
    if let Some(p) = refine_extremum(sys, c, pick(q2, false), 1) {
        window.q2_min = window.q2_min.min(p.q2);
    }
    if let Some(p) = refine_extremum(sys, c, pick(q2, true), 1) {
        window.q2_max = window.q2_max.max(p.q2);
    }
    Ok(window)
}
