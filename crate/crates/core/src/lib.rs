//! Semiclassical analysis of a two-species condensate driven by a quantized
//! field.
//!
//! * [`model`]: the mean-field energy, its derivatives and the physical to
//!   dimensionless parameter map.
//! * [`fixed_points`]: stationary states, critical parameters and
//!   bifurcation sweeps.
//! * [`dynamics`]: trajectories of the mean-field flow and their
//!   classification.
//! * [`analysis`]: regime reports, energy landscapes, phase-portrait bundles
//!   and transition scans.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod fixed_points;
pub mod model;
mod integrator;
mod roots;

pub use error::{ModelError, Result};
pub use fixed_points::{FixedPoint, PhaseBranch, Stability};
pub use model::{ModelParams, PhasePoint, PhysicalConfig};
