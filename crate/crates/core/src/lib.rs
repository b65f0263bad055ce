//! Field propagation and phase optimisation for successive multi-hop
//! reconfigurable-intelligent-surface (RIS) links.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerics:
//!
//! - [`geometry`]: board frames, unit grids, spherical directions.
//! - [`field`]: spherical-wave scattering through one board, board-to-board
//!   illumination and the K-hop cascade.
//! - [`array`]: far-field array factor, steering phases, half-power beamwidth.
//! - [`aperture`]: illumination, spillover and aperture efficiency, EA-B ratio.
//! - [`deploy`]: optimal inter-board distance and unit count.
//! - [`beam`]: illumination classification, sampling plans, max-min multi-beam
//!   solver, last-hop conjugation, quantisation and the per-hop configurator.
//! - [`numeric`]: adaptive quadrature and bracketed root finding.
//!
//! File formats, sweeps and the command-line front end live in `ris-sim`.

#![no_std]
// The `num_traits::Float` imports are marked `allow(unused_imports)`: when std
// is linked anywhere in the build its inherent float methods take precedence.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aperture;
pub mod array;
pub mod beam;
pub mod deploy;
pub mod field;
pub mod geometry;
pub mod numeric;
pub mod scenario;

pub use num_complex::Complex64;

pub use geometry::{Anchor, Frame, Point3, SphericalDirection, UnitGrid, Wavelength};
pub use field::{ComplexFieldMap, FeedPattern, PhaseProfile, SourceSpec};
pub use scenario::{BeamMode, RisNode, Scenario};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
