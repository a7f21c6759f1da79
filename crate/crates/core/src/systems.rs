//! Rotating-frame dynamical systems: the planar circular restricted three-body
//! problem, its rotating Kepler limit and Hill's lunar problem.
//!
//! States are stored with rotating-frame velocities `v = dq/dt`. The canonical
//! momenta of the Hamiltonian form are `p = (v1 - q2, v2 + q1)`; see
//! [`PhaseState::momenta`].

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closest admissible distance to a singularity for potential evaluation.
pub const SINGULARITY_GUARD: f64 = 1e-12;

/// Position in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfigPoint {
    pub q1: f64,
    pub q2: f64,
}

impl ConfigPoint {
    pub const ORIGIN: ConfigPoint = ConfigPoint { q1: 0.0, q2: 0.0 };

    pub const fn new(q1: f64, q2: f64) -> Self {
        Self { q1, q2 }
    }

    pub fn norm(self) -> f64 {
        self.q1.hypot(self.q2)
    }

    pub fn norm_sq(self) -> f64 {
        self.q1 * self.q1 + self.q2 * self.q2
    }

    pub fn dist(self, other: ConfigPoint) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: ConfigPoint) -> f64 {
        self.q1 * other.q1 + self.q2 * other.q2
    }

    /// Reflection across the q1-axis.
    pub fn mirror_q2(self) -> Self {
        Self::new(self.q1, -self.q2)
    }

    /// Reflection across the q2-axis.
    pub fn mirror_q1(self) -> Self {
        Self::new(-self.q1, self.q2)
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.q1, self.q2]
    }
}

impl From<[f64; 2]> for ConfigPoint {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl Add for ConfigPoint {
    type Output = ConfigPoint;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.q1 + rhs.q1, self.q2 + rhs.q2)
    }
}

impl Sub for ConfigPoint {
    type Output = ConfigPoint;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.q1 - rhs.q1, self.q2 - rhs.q2)
    }
}

impl Mul<ConfigPoint> for f64 {
    type Output = ConfigPoint;
    fn mul(self, rhs: ConfigPoint) -> ConfigPoint {
        ConfigPoint::new(self * rhs.q1, self * rhs.q2)
    }
}

/// Position plus rotating-frame velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: ConfigPoint,
    pub v: [f64; 2],
}

impl PhaseState {
    pub const fn new(q1: f64, q2: f64, v1: f64, v2: f64) -> Self {
        Self { q: ConfigPoint::new(q1, q2), v: [v1, v2] }
    }

    pub fn at_rest(q: ConfigPoint) -> Self {
        Self { q, v: [0.0, 0.0] }
    }

    /// Canonical momenta `p = (v1 - q2, v2 + q1)`.
    pub fn momenta(&self) -> [f64; 2] {
        [self.v[0] - self.q.q2, self.v[1] + self.q.q1]
    }

    pub fn from_momenta(q: ConfigPoint, p: [f64; 2]) -> Self {
        Self { q, v: [p[0] + q.q2, p[1] - q.q1] }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.q.q1, self.q.q2, self.v[0], self.v[1]]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn speed_sq(&self) -> f64 {
        self.v[0] * self.v[0] + self.v[1] * self.v[1]
    }
}

/// Mass of the lighter primary ("earth"), normalized so the total mass is one.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MassRatio(f64);

impl MassRatio {
    pub fn new(mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidMassRatio(mu));
        }
        Ok(Self(mu))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `mu` is 0 or 1: one primary is massless.
    pub fn is_degenerate(self) -> bool {
        self.0 == 0.0 || self.0 == 1.0
    }

    /// Rejects the degenerate values, for operations defined only for `0 < mu < 1`.
    pub fn require_proper(mu: f64) -> Result<Self> {
        let m = Self::new(mu)?;
        if m.is_degenerate() {
            return Err(Error::DegenerateMass(mu));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Pcr3bp,
    RotatingKepler,
    HillLunar,
}

/// Symmetric 2x2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hessian {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Hessian {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.a11 + self.a22);
        let half_diff = 0.5 * (self.a11 - self.a22);
        let radius = half_diff.hypot(self.a12);
        [mean - radius, mean + radius]
    }

    pub fn determinant(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }
}

/// Point mass term `-mass / |q - center|` of an effective potential.
#[derive(Debug, Clone, Copy)]
struct Attractor {
    mass: f64,
    center: ConfigPoint,
}

/// Which dynamical system, together with its constants.
///
/// For the restricted problem the lighter primary ("earth", mass `mu`) sits at
/// `(1 - mu, 0)` and the heavier ("sun", mass `1 - mu`) at `(-mu, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub kind: SystemKind,
    pub mu: f64,
}

impl SystemDescriptor {
    /// Restricted three-body problem with mass ratio `mu`. The limits `mu = 0`
    /// and `mu = 1` give the rotating Kepler problem centered at the massive
    /// primary, which in both cases sits at the origin.
    pub fn pcr3bp(mu: f64) -> Result<Self> {
        let m = MassRatio::new(mu)?;
        if m.is_degenerate() {
            return Ok(Self { kind: SystemKind::RotatingKepler, mu });
        }
        Ok(Self { kind: SystemKind::Pcr3bp, mu })
    }

    pub fn rotating_kepler() -> Self {
        Self { kind: SystemKind::RotatingKepler, mu: 0.0 }
    }

    pub fn hill_lunar() -> Self {
        Self { kind: SystemKind::HillLunar, mu: 0.0 }
    }

    pub fn mass_ratio(&self) -> MassRatio {
        MassRatio(self.mu)
    }

    /// Position of the lighter primary `(1 - mu, 0)`.
    pub fn earth(&self) -> ConfigPoint {
        ConfigPoint::new(1.0 - self.mu, 0.0)
    }

    /// Position of the heavier primary `(-mu, 0)`.
    pub fn sun(&self) -> ConfigPoint {
        ConfigPoint::new(-self.mu, 0.0)
    }

    pub fn singularities(&self) -> Vec<ConfigPoint> {
        match self.kind {
            SystemKind::Pcr3bp => vec![self.earth(), self.sun()],
            SystemKind::RotatingKepler | SystemKind::HillLunar => vec![ConfigPoint::ORIGIN],
        }
    }

    /// Distance from `q` to the nearest singularity.
    pub fn singularity_distance(&self, q: ConfigPoint) -> f64 {
        self.singularities().into_iter().map(|s| s.dist(q)).fold(f64::INFINITY, f64::min)
    }

    fn attractors(&self) -> ([Attractor; 2], usize) {
        match self.kind {
            SystemKind::Pcr3bp => (
                [
                    Attractor { mass: self.mu, center: self.earth() },
                    Attractor { mass: 1.0 - self.mu, center: self.sun() },
                ],
                2,
            ),
            SystemKind::RotatingKepler | SystemKind::HillLunar => (
                [
                    Attractor { mass: 1.0, center: ConfigPoint::ORIGIN },
                    Attractor { mass: 0.0, center: ConfigPoint::ORIGIN },
                ],
                1,
            ),
        }
    }

    /// Coefficients `(a1, a2)` of the quadratic part `-(a1 q1^2 + a2 q2^2) / 2`.
    fn quadratic_coefficients(&self) -> (f64, f64) {
        match self.kind {
            SystemKind::Pcr3bp | SystemKind::RotatingKepler => (1.0, 1.0),
            SystemKind::HillLunar => (3.0, 0.0),
        }
    }

    fn check(&self, q: ConfigPoint) -> Result<()> {
        if !(q.q1.is_finite() && q.q2.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite point ({}, {})", q.q1, q.q2)));
        }
        if self.singularity_distance(q) <= SINGULARITY_GUARD {
            return Err(Error::Singularity { q1: q.q1, q2: q.q2 });
        }
        Ok(())
    }

    /// Effective potential `V(q)`.
    pub fn effective_potential(&self, q: ConfigPoint) -> Result<f64> {
        self.check(q)?;
        let (atts, n) = self.attractors();
        let (a1, a2) = self.quadratic_coefficients();
        let mut v = -0.5 * (a1 * q.q1 * q.q1 + a2 * q.q2 * q.q2);
        for a in &atts[..n] {
            v -= a.mass / q.dist(a.center);
        }
        Ok(v)
    }

    /// Birkhoff's potential `Omega(q) = -V(q) + mu (1 - mu) / 2`, written in
    /// terms of the two primary distances only.
    pub fn alt_potential(&self, q: ConfigPoint) -> Result<f64> {
        if self.kind != SystemKind::Pcr3bp {
            return Err(Error::Unsupported("alternative potential is defined for the restricted problem only"));
        }
        self.check(q)?;
        let mu = self.mu;
        let re = q.dist(self.earth());
        let rs = q.dist(self.sun());
        Ok(0.5 * ((1.0 - mu) * rs * rs + mu * re * re) + mu / re + (1.0 - mu) / rs)
    }

    /// Gradient `(V_q1, V_q2)`.
    pub fn grad_v(&self, q: ConfigPoint) -> Result<[f64; 2]> {
        self.check(q)?;
        let (atts, n) = self.attractors();
        let (a1, a2) = self.quadratic_coefficients();
        let mut g = [-a1 * q.q1, -a2 * q.q2];
        for a in &atts[..n] {
            let d = q - a.center;
            let r = d.norm();
            let k = a.mass / (r * r * r);
            g[0] += k * d.q1;
            g[1] += k * d.q2;
        }
        Ok(g)
    }

    pub fn hess_v(&self, q: ConfigPoint) -> Result<Hessian> {
        self.check(q)?;
        let (atts, n) = self.attractors();
        let (a1, a2) = self.quadratic_coefficients();
        let mut h = Hessian { a11: -a1, a12: 0.0, a22: -a2 };
        for a in &atts[..n] {
            let d = q - a.center;
            let r2 = d.norm_sq();
            let r = r2.sqrt();
            let inv3 = a.mass / (r2 * r);
            let inv5 = 3.0 * inv3 / r2;
            h.a11 += inv3 - inv5 * d.q1 * d.q1;
            h.a22 += inv3 - inv5 * d.q2 * d.q2;
            h.a12 -= inv5 * d.q1 * d.q2;
        }
        Ok(h)
    }

    /// Value of the autonomous Hamiltonian, `|v|^2 / 2 + V(q)`.
    pub fn hamiltonian(&self, state: &PhaseState) -> Result<f64> {
        Ok(0.5 * state.speed_sq() + self.effective_potential(state.q)?)
    }

    /// Hamiltonian in canonical form, `((p1 + q2)^2 + (p2 - q1)^2) / 2 + V(q)`.
    pub fn hamiltonian_canonical(&self, q: ConfigPoint, p: [f64; 2]) -> Result<f64> {
        let a = p[0] + q.q2;
        let b = p[1] - q.q1;
        Ok(0.5 * (a * a + b * b) + self.effective_potential(q)?)
    }

    /// First-order equations of motion: `q' = v`, `v1' = 2 v2 - V_q1`,
    /// `v2' = -2 v1 - V_q2`. Returned in the layout of a [`PhaseState`].
    pub fn eom(&self, state: &PhaseState) -> Result<PhaseState> {
        let g = self.grad_v(state.q)?;
        Ok(PhaseState::new(state.v[0], state.v[1], 2.0 * state.v[1] - g[0], -2.0 * state.v[0] - g[1]))
    }

    /// Critical (ring) value of the rotating Kepler problem, `V` on the unit circle.
    pub fn kepler_critical_value() -> f64 {
        Self::rotating_kepler().effective_potential(ConfigPoint::new(1.0, 0.0)).expect("unit circle is regular")
    }
}
