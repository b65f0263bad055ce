//! Spherical-wave field model for one reflection, board-to-board
//! illumination and the general K-hop cascade.
//!
//! Every segment contributes the exact per-unit factor `e^{-jkr}/r`; there is
//! no plane-wave shortcut, so the model is valid in the near field. Units
//! scatter isotropically with a scalar amplitude `τ`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::geometry::{wrap_angle, GeometryError, Point3, UnitGrid, Wavelength};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("zero distance between a point and unit {unit}")]
    ZeroDistance { unit: usize },
    #[error("phase profile has {got} entries, grid has {expected} units")]
    ProfileMismatch { expected: usize, got: usize },
    #[error("field map has {got} samples, grid has {expected} units")]
    MapMismatch { expected: usize, got: usize },
    #[error("boards overlap")]
    Overlap,
    #[error("invalid source: {0}")]
    InvalidSource(&'static str),
    #[error("chain has no boards")]
    EmptyChain,
    #[error("expected {expected} phase profiles, got {got}")]
    ProfileCount { expected: usize, got: usize },
}

/// Chain failure annotated with the 1-based hop index.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("hop {hop}: {source}")]
pub struct ChainError {
    pub hop: usize,
    #[source]
    pub source: FieldError,
}

/// Far-field amplitude pattern of a point source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeedPattern {
    Isotropic,
    /// Field pattern `cos^q(θ)` about the boresight, zero behind the source.
    CosQ { q: f64 },
}

impl FeedPattern {
    /// Field amplitude at angle `theta` from boresight.
    pub fn amplitude(&self, theta: f64) -> f64 {
        match *self {
            FeedPattern::Isotropic => 1.0,
            FeedPattern::CosQ { q } => {
                let c = theta.cos();
                if q == 0.0 {
                    1.0
                } else if c <= 0.0 {
                    0.0
                } else {
                    c.powf(q)
                }
            }
        }
    }

    /// Power pattern `|F|^2`.
    pub fn power(&self, theta: f64) -> f64 {
        let a = self.amplitude(theta);
        a * a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub position: Point3,
    /// Complex field at 1 m on boresight.
    pub amplitude: Complex64,
    pub pattern: FeedPattern,
    /// Unit boresight vector; ignored for isotropic sources.
    pub boresight: Point3,
}

impl SourceSpec {
    pub fn isotropic(position: Point3, amplitude: Complex64) -> Self {
        Self {
            position,
            amplitude,
            pattern: FeedPattern::Isotropic,
            boresight: Point3::new(0.0, 0.0, -1.0),
        }
    }

    pub fn horn(position: Point3, amplitude: Complex64, q: f64, boresight: Point3) -> Self {
        Self { position, amplitude, pattern: FeedPattern::CosQ { q }, boresight }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.amplitude.norm() > 0.0) || !self.amplitude.is_finite() {
            return Err(FieldError::InvalidSource("amplitude must be nonzero and finite"));
        }
        if let FeedPattern::CosQ { q } = self.pattern {
            if !(q >= 0.0) || !q.is_finite() {
                return Err(FieldError::InvalidSource("cos^q exponent must be >= 0"));
            }
            if self.boresight.normalized().is_none() {
                return Err(FieldError::InvalidSource("boresight must be a nonzero vector"));
            }
        }
        if !self.position.is_finite() {
            return Err(FieldError::InvalidSource("position must be finite"));
        }
        Ok(())
    }

    /// Pattern amplitude towards `p`.
    pub fn pattern_towards(&self, p: Point3) -> f64 {
        match self.pattern {
            FeedPattern::Isotropic => 1.0,
            FeedPattern::CosQ { .. } => {
                let dir = p - self.position;
                let b = self.boresight.normalized().unwrap_or(Point3::new(0.0, 0.0, -1.0));
                let c = (dir.dot(b) / dir.norm()).max(-1.0).min(1.0);
                self.pattern.amplitude(c.acos())
            }
        }
    }
}

/// One complex field sample per unit, row-major from unit (1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFieldMap {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
}

impl ComplexFieldMap {
    pub fn new(rows: usize, cols: usize, values: Vec<Complex64>) -> Result<Self, FieldError> {
        if values.len() != rows * cols {
            return Err(FieldError::MapMismatch { expected: rows * cols, got: values.len() });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn for_grid(grid: &UnitGrid, values: Vec<Complex64>) -> Result<Self, FieldError> {
        Self::new(grid.rows(), grid.cols(), values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.values[(a - 1) * self.cols + (b - 1)]
    }

    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v.norm())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, values: self.values.iter().map(|v| v * c).collect() }
    }
}

/// Per-unit phase configuration in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    omegas: Vec<f64>,
    bits: Option<u8>,
}

impl PhaseProfile {
    pub fn new(omegas: Vec<f64>) -> Self {
        Self { omegas: omegas.into_iter().map(wrap_angle).collect(), bits: None }
    }

    pub fn zeros(n: usize) -> Self {
        Self { omegas: alloc::vec![0.0; n], bits: None }
    }

    /// Profile from `b`-bit level indices, `ω = 2πq/2^b`.
    pub fn from_levels(levels: &[u32], bits: u8) -> Self {
        let step = 2.0 * PI / (1u64 << bits) as f64;
        Self {
            omegas: levels.iter().map(|&q| wrap_angle(q as f64 * step)).collect(),
            bits: Some(bits),
        }
    }

    pub(crate) fn quantized(omegas: Vec<f64>, bits: u8) -> Self {
        Self { omegas, bits: Some(bits) }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn quantization_bits(&self) -> Option<u8> {
        self.bits
    }

    /// Level indices for a quantised profile.
    pub fn levels(&self) -> Option<Vec<u32>> {
        let bits = self.bits?;
        let n_levels = 1u64 << bits;
        let step = 2.0 * PI / n_levels as f64;
        Some(
            self.omegas
                .iter()
                .map(|w| ((w / step).round() as u64 % n_levels) as u32)
                .collect(),
        )
    }

    /// Adds `delta` to every phase.
    pub fn shifted(&self, delta: f64) -> Self {
        Self::new(self.omegas.iter().map(|w| w + delta).collect())
    }

    /// `e^{jω_n}` for every unit.
    pub fn weights(&self) -> Vec<Complex64> {
        self.omegas.iter().map(|&w| Complex64::from_polar(1.0, w)).collect()
    }
}

/// `e^{-jkr}/r` for a segment of length `r`.
#[inline]
pub fn path_factor(r: f64, k: f64) -> Complex64 {
    let (s, c) = (k * r).sin_cos();
    Complex64::new(c / r, -s / r)
}

fn check_profile(grid: &UnitGrid, phases: &PhaseProfile) -> Result<(), FieldError> {
    if phases.len() != grid.len() {
        return Err(FieldError::ProfileMismatch { expected: grid.len(), got: phases.len() });
    }
    Ok(())
}

fn check_map(grid: &UnitGrid, map: &ComplexFieldMap) -> Result<(), FieldError> {
    if map.len() != grid.len() {
        return Err(FieldError::MapMismatch { expected: grid.len(), got: map.len() });
    }
    Ok(())
}

/// Field of a point source sampled at every unit:
/// `E^i · F(angle) · e^{-jk r^i(n)} / r^i(n)`.
pub fn incident_field(
    source: &SourceSpec,
    grid: &UnitGrid,
    lambda: Wavelength,
) -> Result<ComplexFieldMap, FieldError> {
    source.validate()?;
    let k = lambda.wavenumber();
    let mut values = Vec::with_capacity(grid.len());
    for (n, &p) in grid.positions().iter().enumerate() {
        let r = p.distance(source.position);
        if !(r > 0.0) {
            return Err(FieldError::ZeroDistance { unit: n });
        }
        values.push(source.amplitude * source.pattern_towards(p) * path_factor(r, k));
    }
    ComplexFieldMap::for_grid(grid, values)
}

/// Per-unit outgoing weights `τ e^{jω_n} E^i(n)`.
pub fn unit_weights(
    incident: &ComplexFieldMap,
    phases: &PhaseProfile,
    tau: f64,
) -> Vec<Complex64> {
    incident
        .values()
        .iter()
        .zip(phases.omegas())
        .map(|(e, &w)| e * Complex64::from_polar(tau, w))
        .collect()
}

/// Field at `p` radiated by unit weights placed at `positions`.
pub fn radiate(weights: &[Complex64], positions: &[Point3], p: Point3, k: f64) -> Result<Complex64, FieldError> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, (w, q)) in weights.iter().zip(positions).enumerate() {
        let r = p.distance(*q);
        if !(r > 0.0) {
            return Err(FieldError::ZeroDistance { unit: n });
        }
        acc += w * path_factor(r, k);
    }
    Ok(acc)
}

/// Single-board scattering to an observation point:
/// `Σ_n τ e^{jω_n} E^i(n) e^{-jk r^s(n)} / r^s(n)`.
pub fn scatter_to_point(
    incident: &ComplexFieldMap,
    phases: &PhaseProfile,
    tau: f64,
    grid: &UnitGrid,
    observation: Point3,
    lambda: Wavelength,
) -> Result<Complex64, FieldError> {
    check_map(grid, incident)?;
    check_profile(grid, phases)?;
    let w = unit_weights(incident, phases, tau);
    radiate(&w, grid.positions(), observation, lambda.wavenumber())
}

fn grids_overlap(a: &UnitGrid, b: &UnitGrid) -> bool {
    b.positions().iter().any(|&p| a.footprint_contains(p))
        || a.positions().iter().any(|&p| b.footprint_contains(p))
}

/// Incident field on `next` produced by board `grid` (exact unit-pair distances).
pub fn scatter_to_surface(
    incident: &ComplexFieldMap,
    phases: &PhaseProfile,
    tau: f64,
    grid: &UnitGrid,
    next: &UnitGrid,
    lambda: Wavelength,
) -> Result<ComplexFieldMap, FieldError> {
    check_map(grid, incident)?;
    check_profile(grid, phases)?;
    if grids_overlap(grid, next) {
        return Err(FieldError::Overlap);
    }
    let w = unit_weights(incident, phases, tau);
    let k = lambda.wavenumber();
    let values = next
        .positions()
        .iter()
        .map(|&p| radiate(&w, grid.positions(), p, k))
        .collect::<Result<Vec<_>, _>>()?;
    ComplexFieldMap::for_grid(next, values)
}

/// Geometry of one hop as seen from the board it lands on.
#[derive(Debug, Clone, PartialEq)]
pub struct HopInfo {
    /// Distance from the emitter (source or previous board centre) to this board's centre.
    pub distance_in: f64,
    /// Incidence angle from this board's normal.
    pub incidence: f64,
}

/// Result of propagating through the whole chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainField {
    pub receiver: Complex64,
    /// Incident field on each board, in chain order.
    pub incident: Vec<ComplexFieldMap>,
    pub hops: Vec<HopInfo>,
}

impl ChainField {
    /// `|E|^2` at the receiver.
    pub fn received_power(&self) -> f64 {
        self.receiver.norm_sqr()
    }
}

/// Source → board 1 → … → board K → receiver.
pub fn propagate_chain(scenario: &Scenario, profiles: &[PhaseProfile]) -> Result<ChainField, ChainError> {
    let chain = &scenario.chain;
    if chain.is_empty() {
        return Err(ChainError { hop: 0, source: FieldError::EmptyChain });
    }
    if profiles.len() != chain.len() {
        return Err(ChainError {
            hop: 0,
            source: FieldError::ProfileCount { expected: chain.len(), got: profiles.len() },
        });
    }
    let lambda = scenario.wavelength;
    let wrap = |hop: usize| move |source: FieldError| ChainError { hop, source };

    let mut incident = Vec::with_capacity(chain.len());
    let mut hops = Vec::with_capacity(chain.len());
    let mut current = incident_field(&scenario.source, &chain[0].grid, lambda).map_err(wrap(1))?;
    let mut emitter = scenario.source.position;
    for (i, node) in chain.iter().enumerate() {
        let hop = i + 1;
        check_profile(&node.grid, &profiles[i]).map_err(wrap(hop))?;
        hops.push(hop_info(emitter, &node.grid));
        incident.push(current.clone());
        if let Some(next) = chain.get(i + 1) {
            current = scatter_to_surface(&current, &profiles[i], node.tau, &node.grid, &next.grid, lambda)
                .map_err(wrap(hop))?;
            emitter = node.grid.center();
        }
    }
    let last = chain.len() - 1;
    let receiver = scatter_to_point(
        &current,
        &profiles[last],
        chain[last].tau,
        &chain[last].grid,
        scenario.receiver,
        lambda,
    )
    .map_err(wrap(chain.len()))?;
    Ok(ChainField { receiver, incident, hops })
}

fn hop_info(emitter: Point3, grid: &UnitGrid) -> HopInfo {
    let d = emitter - grid.center();
    let r = d.norm();
    let incidence = if r > 0.0 {
        (d.dot(grid.frame().normal) / r).max(-1.0).min(1.0).acos()
    } else {
        0.0
    };
    HopInfo { distance_in: r, incidence }
}
