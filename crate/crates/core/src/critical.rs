//! Lagrange points, their Morse indices and the ordered critical energies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;
use crate::systems::{ConfigPoint, Hessian, MassRatio, SystemDescriptor};

/// Eigenvalues with magnitude below this are treated as round-off when counting
/// the Morse index.
pub const MORSE_ZERO_THRESHOLD: f64 = 1e-9;

const BRACKET_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    L1,
    L2,
    L3,
    L4,
    L5,
    HillPlus,
    HillMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub label: Label,
    pub location: ConfigPoint,
    pub value: f64,
    pub morse_index: u8,
}

/// Critical values of the restricted problem: `h1, h2, h3` at the collinear
/// points and the common value `h45` of the triangular points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalEnergies {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h45: f64,
}

impl CriticalEnergies {
    /// The second critical value, `min(h2, h3)`: the saddle on the far side of
    /// the lighter primary.
    pub fn second(&self) -> f64 {
        self.h2.min(self.h3)
    }

    /// The third critical value, `max(h2, h3)`.
    pub fn third(&self) -> f64 {
        self.h2.max(self.h3)
    }

    pub fn all(&self) -> [f64; 4] {
        [self.h1, self.h2, self.h3, self.h45]
    }

    /// Energy for a normalized value `s`, with `s = 0` at `h1` and `s = 1` at
    /// the second critical value.
    pub fn denormalize(&self, s: f64) -> f64 {
        self.h1 + s * (self.second() - self.h1)
    }

    pub fn normalize(&self, c: f64) -> f64 {
        (c - self.h1) / (self.second() - self.h1)
    }
}

/// Number of negative eigenvalues.
pub fn morse_index(h: &Hessian) -> u8 {
    h.eigenvalues().iter().filter(|&&l| l < -MORSE_ZERO_THRESHOLD).count() as u8
}

fn classify_point(sys: &SystemDescriptor, label: Label, location: ConfigPoint) -> Result<CriticalPoint> {
    Ok(CriticalPoint {
        label,
        location,
        value: sys.effective_potential(location)?,
        morse_index: morse_index(&sys.hess_v(location)?),
    })
}

/// The triangular points `(1/2 - mu, +-sqrt(3)/2)`.
pub fn triangular_points(mu: f64) -> Result<(CriticalPoint, CriticalPoint)> {
    MassRatio::require_proper(mu)?;
    let sys = SystemDescriptor::pcr3bp(mu)?;
    let l4 = ConfigPoint::new(0.5 - mu, 3f64.sqrt() / 2.0);
    let value = (mu * (1.0 - mu) - 3.0) / 2.0;
    let mk = |label, location| -> Result<CriticalPoint> {
        Ok(CriticalPoint { value, ..classify_point(&sys, label, location)? })
    };
    Ok((mk(Label::L4, l4)?, mk(Label::L5, l4.mirror_q2())?))
}

/// The potential restricted to the q1-axis, `u(x) = V(x, 0)`, with `u'` and `u''`.
pub fn restricted_potential(mu: f64, x: f64) -> Result<(f64, f64, f64)> {
    MassRatio::new(mu)?;
    let de = x - (1.0 - mu);
    let ds = x + mu;
    if (mu > 0.0 && de.abs() <= crate::systems::SINGULARITY_GUARD)
        || (mu < 1.0 && ds.abs() <= crate::systems::SINGULARITY_GUARD)
    {
        return Err(Error::Singularity { q1: x, q2: 0.0 });
    }
    let (ae, as_) = (de.abs(), ds.abs());
    let mut u = -0.5 * x * x;
    let mut du = -x;
    let mut ddu = -1.0;
    if mu > 0.0 {
        u -= mu / ae;
        du += mu * de / (ae * ae * ae);
        ddu -= 2.0 * mu / (ae * ae * ae);
    }
    if mu < 1.0 {
        u -= (1.0 - mu) / as_;
        du += (1.0 - mu) * ds / (as_ * as_ * as_);
        ddu -= 2.0 * (1.0 - mu) / (as_ * as_ * as_);
    }
    Ok((u, du, ddu))
}

fn du(mu: f64, x: f64) -> Result<f64> {
    Ok(restricted_potential(mu, x)?.1)
}

/// Root of `u'` on the side `dir` (+1 or -1) of the singularity at `start`,
/// bracketed by stepping outward in multiples of [`BRACKET_STEP`].
fn collinear_root(mu: f64, start: f64, dir: f64, limit: Option<f64>) -> Result<f64> {
    // Sign of u' immediately next to the singularity.
    let near_sign = dir;
    let mut delta = BRACKET_STEP;
    let mut near = start + dir * delta;
    while du(mu, near)?.signum() != near_sign {
        delta *= 0.5;
        if delta < 1e-14 {
            return Err(Error::Bracketing(format!("no near-singularity sign for mu = {mu}")));
        }
        near = start + dir * delta;
    }
    let mut prev = near;
    let mut k = 1.0;
    let far = loop {
        let mut x = near + dir * k * BRACKET_STEP;
        if let Some(lim) = limit {
            if (x - lim) * dir >= 0.0 {
                // Approach the opposite singularity by halving the remaining gap.
                x = prev;
                for _ in 0..60 {
                    x = 0.5 * (x + lim);
                    if du(mu, x)?.signum() != near_sign {
                        break;
                    }
                }
            }
        }
        if du(mu, x)?.signum() != near_sign {
            break x;
        }
        prev = x;
        k += 1.0;
        if k > 1e7 {
            return Err(Error::Bracketing(format!("unbounded search for mu = {mu}")));
        }
    };
    let near = prev;
    let mut x = roots::brent(|x| du(mu, x), near, far, 1e-15, 200)?;
    // Newton polish; u'' < 0 so the step is well defined.
    for _ in 0..4 {
        let (_, d1, d2) = restricted_potential(mu, x)?;
        if d1.abs() < 1e-14 {
            break;
        }
        let next = x - d1 / d2;
        if (next - near) * (next - far) > 0.0 {
            break;
        }
        if du(mu, next)?.abs() >= d1.abs() {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// The three collinear points `L1 in (-mu, 1-mu)`, `L2 in (1-mu, inf)` and
/// `L3 in (-inf, -mu)`, all of Morse index one.
pub fn collinear_points(mu: f64) -> Result<[CriticalPoint; 3]> {
    MassRatio::require_proper(mu)?;
    let sys = SystemDescriptor::pcr3bp(mu)?;
    let (s, e) = (-mu, 1.0 - mu);
    let x1 = collinear_root(mu, s, 1.0, Some(e))?;
    let x2 = collinear_root(mu, e, 1.0, None)?;
    let x3 = collinear_root(mu, s, -1.0, None)?;
    Ok([
        classify_point(&sys, Label::L1, ConfigPoint::new(x1, 0.0))?,
        classify_point(&sys, Label::L2, ConfigPoint::new(x2, 0.0))?,
        classify_point(&sys, Label::L3, ConfigPoint::new(x3, 0.0))?,
    ])
}

/// All five Lagrange points in label order.
pub fn lagrange_points(mu: f64) -> Result<[CriticalPoint; 5]> {
    let [l1, l2, l3] = collinear_points(mu)?;
    let (l4, l5) = triangular_points(mu)?;
    Ok([l1, l2, l3, l4, l5])
}

pub fn critical_energies(mu: f64) -> Result<CriticalEnergies> {
    let [l1, l2, l3] = collinear_points(mu)?;
    Ok(CriticalEnergies { h1: l1.value, h2: l2.value, h3: l3.value, h45: (mu * (1.0 - mu) - 3.0) / 2.0 })
}

/// Equilibria of Hill's lunar problem at `(+-3^(-1/3), 0)`.
pub fn hill_critical_points() -> (CriticalPoint, CriticalPoint) {
    let sys = SystemDescriptor::hill_lunar();
    let x = 3f64.powf(-1.0 / 3.0);
    let value = -(3f64.powf(4.0 / 3.0)) / 2.0;
    let mk = |label, q1: f64| CriticalPoint {
        value,
        ..classify_point(&sys, label, ConfigPoint::new(q1, 0.0)).expect("away from the origin")
    };
    (mk(Label::HillPlus, x), mk(Label::HillMinus, -x))
}

/// Common critical value `-3^(4/3) / 2` of Hill's lunar problem.
pub fn hill_critical_value() -> f64 {
    -(3f64.powf(4.0 / 3.0)) / 2.0
}

/// Inverse of the distance map `q -> (|q - s|, |q - e|)` on the upper half plane.
pub fn distance_map_inverse(mu: f64, sigma: f64, rho: f64) -> Result<ConfigPoint> {
    if !(sigma > 0.0 && rho > 0.0 && sigma + rho > 1.0 && (sigma - rho).abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("({sigma}, {rho}) outside the half strip")));
    }
    let x = 0.5 * (sigma * sigma - rho * rho + 1.0);
    Ok(ConfigPoint::new(x - mu, (sigma * sigma - x * x).sqrt()))
}

/// Birkhoff's potential in distance coordinates, evaluated through the
/// distance map so it can be checked against the closed form.
pub fn transformed_potential(mu: f64, sigma: f64, rho: f64) -> Result<f64> {
    let sys = SystemDescriptor::pcr3bp(mu)?;
    sys.alt_potential(distance_map_inverse(mu, sigma, rho)?)
}
