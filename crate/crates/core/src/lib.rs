//! Numerics for the planar circular restricted three-body problem and Hill's
//! lunar problem: Lagrange points, Hill's regions and ovals of zero velocity,
//! vertical tangents of the ovals, symmetric periodic orbits and their syzygies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod critical;
pub mod error;
pub mod io;
pub mod levelset;
pub mod ode;
pub mod orbits;
pub mod quadrature;
pub mod region;
pub mod roots;
pub mod systems;
pub mod tangent;

pub use critical::{CriticalEnergies, CriticalPoint, Label};
pub use error::{Error, Result};
pub use systems::{ConfigPoint, MassRatio, PhaseState, SystemDescriptor, SystemKind};
