//! Coordinate frames, RIS unit grids and spherical/Cartesian conversion.
//!
//! The world frame is right-handed. Every board carries its own orthonormal
//! [`Frame`]: `u` runs along the columns, `v` along the rows and `normal`
//! points into the reflection half-space. Unit `(a, b)` (1-based row, column)
//! sits at local `[(b-1)d, (a-1)d, 0]` before the anchor offset is removed.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("grid needs at least one row and one column (got {rows}x{cols})")]
    InvalidDimensions { rows: usize, cols: usize },
    #[error("unit spacing must be positive and finite (got {0})")]
    NonPositiveSpacing(f64),
    #[error("points coincide, direction undefined")]
    CoincidentPoints,
    #[error("frame vectors are degenerate or not orthogonal")]
    DegenerateFrame,
    #[error("wavelength must be positive and finite (got {0})")]
    InvalidWavelength(f64),
    #[error("non-finite coordinate")]
    NonFinite,
}

/// A point (or displacement) in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Orthonormal board frame. `u × v = normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub u: Point3,
    pub v: Point3,
    pub normal: Point3,
}

impl Frame {
    /// Board in the xy-plane facing +z.
    pub const XY: Frame = Frame {
        u: Point3::new(1.0, 0.0, 0.0),
        v: Point3::new(0.0, 1.0, 0.0),
        normal: Point3::new(0.0, 0.0, 1.0),
    };

    /// Board parallel to the xy-plane facing -z (a ceiling mount). `u` stays +x.
    pub const XY_DOWN: Frame = Frame {
        u: Point3::new(1.0, 0.0, 0.0),
        v: Point3::new(0.0, -1.0, 0.0),
        normal: Point3::new(0.0, 0.0, -1.0),
    };

    /// Builds a frame from a normal and a hint for the column axis. The hint is
    /// projected onto the board plane; `v` completes the right-handed triad.
    pub fn new(normal: Point3, u_hint: Point3) -> Result<Frame, GeometryError> {
        let n = normal.normalized().ok_or(GeometryError::DegenerateFrame)?;
        let u = (u_hint - n * u_hint.dot(n))
            .normalized()
            .ok_or(GeometryError::DegenerateFrame)?;
        let v = n.cross(u);
        Ok(Frame { u, v, normal: n })
    }

    /// Components of a world displacement in this frame.
    pub fn to_local(&self, p: Point3) -> Point3 {
        Point3::new(p.dot(self.u), p.dot(self.v), p.dot(self.normal))
    }

    /// World displacement from local components.
    pub fn to_world(&self, local: Point3) -> Point3 {
        self.u * local.x + self.v * local.y + self.normal * local.z
    }
}

impl Default for Frame {
    fn default() -> Self {
        Frame::XY
    }
}

/// Elevation `theta` from the board normal and azimuth `phi` from the `u` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalDirection {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi: wrap_angle(phi) }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// Direction of a local (frame) vector. The zero vector maps to boresight.
    pub fn from_local(v: Point3) -> Self {
        let r = v.norm();
        if r == 0.0 {
            return Self { theta: 0.0, phi: 0.0 };
        }
        let theta = (v.z / r).max(-1.0).min(1.0).acos();
        let phi = if v.x == 0.0 && v.y == 0.0 { 0.0 } else { v.y.atan2(v.x) };
        Self::new(theta, phi)
    }

    /// `[cos φ sin θ, sin φ sin θ, cos θ]`.
    pub fn unit_vector(&self) -> Point3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Point3::new(cp * st, sp * st, ct)
    }

    /// True for directions in the reflection half-space, θ ∈ [0, π/2].
    pub fn on_hemisphere(&self) -> bool {
        self.theta >= 0.0 && self.theta <= PI / 2.0 + 1e-12
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let tau = 2.0 * PI;
    let r = a % tau;
    let r = if r < 0.0 { r + tau } else { r };
    if r >= tau { 0.0 } else { r }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavelength {
    lambda: f64,
}

impl Wavelength {
    pub fn new(lambda: f64) -> Result<Self, GeometryError> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(Self { lambda })
        } else {
            Err(GeometryError::InvalidWavelength(lambda))
        }
    }

    /// λ = c / f.
    pub fn from_frequency(hz: f64) -> Result<Self, GeometryError> {
        Self::new(SPEED_OF_LIGHT / hz)
    }

    pub fn meters(&self) -> f64 {
        self.lambda
    }

    /// k = 2π/λ in rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    pub fn half(&self) -> f64 {
        self.lambda / 2.0
    }
}

/// Which point of the board `origin` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    /// Geometric centre of the unit lattice.
    #[default]
    Center,
    /// Unit (1, 1).
    FirstUnit,
}

/// A rectangular lattice of `rows × cols` units with uniform spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitGrid {
    rows: usize,
    cols: usize,
    spacing: f64,
    origin: Point3,
    frame: Frame,
    anchor: Anchor,
    positions: Vec<Point3>,
}

impl UnitGrid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> Point3 {
        self.origin
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    /// World positions in row-major order starting at unit (1, 1).
    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    /// World position of unit `(a, b)`, both 1-based.
    pub fn position(&self, a: usize, b: usize) -> Point3 {
        self.positions[(a - 1) * self.cols + (b - 1)]
    }

    /// Local in-plane offset of unit `n` from the anchor.
    pub fn local_offset(&self, n: usize) -> Point3 {
        let (a, b) = (n / self.cols, n % self.cols);
        let (ox, oy) = self.anchor_offset();
        Point3::new(b as f64 * self.spacing - ox, a as f64 * self.spacing - oy, 0.0)
    }

    fn anchor_offset(&self) -> (f64, f64) {
        match self.anchor {
            Anchor::Center => (
                (self.cols as f64 - 1.0) * self.spacing / 2.0,
                (self.rows as f64 - 1.0) * self.spacing / 2.0,
            ),
            Anchor::FirstUnit => (0.0, 0.0),
        }
    }

    /// World position of the lattice's geometric centre.
    pub fn center(&self) -> Point3 {
        let (ox, oy) = self.anchor_offset();
        let (cx, cy) = (
            (self.cols as f64 - 1.0) * self.spacing / 2.0,
            (self.rows as f64 - 1.0) * self.spacing / 2.0,
        );
        self.origin + self.frame.to_world(Point3::new(cx - ox, cy - oy, 0.0))
    }

    /// Physical extent along `u` (columns), `B·d`.
    pub fn width(&self) -> f64 {
        self.cols as f64 * self.spacing
    }

    /// Physical extent along `v` (rows), `A·d`.
    pub fn height(&self) -> f64 {
        self.rows as f64 * self.spacing
    }

    /// Physical aperture `A_p = (A·d)(B·d)`.
    pub fn aperture_area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Same lattice re-anchored; world unit positions are unchanged.
    pub fn with_anchor(&self, anchor: Anchor) -> UnitGrid {
        let center = self.center();
        let mut g = self.clone();
        g.anchor = anchor;
        let (ox, oy) = g.anchor_offset();
        let (cx, cy) = (
            (g.cols as f64 - 1.0) * g.spacing / 2.0,
            (g.rows as f64 - 1.0) * g.spacing / 2.0,
        );
        g.origin = center - g.frame.to_world(Point3::new(cx - ox, cy - oy, 0.0));
        g
    }

    /// True when `p` lies in the board plane inside its physical footprint.
    pub fn footprint_contains(&self, p: Point3) -> bool {
        let local = self.frame.to_local(p - self.center());
        let tol = 1e-9 * (1.0 + self.width().max(self.height()));
        local.z.abs() <= tol
            && local.x.abs() <= self.width() / 2.0 + tol
            && local.y.abs() <= self.height() / 2.0 + tol
    }
}

/// Builds a `rows × cols` grid whose `anchor` point sits at `origin`.
pub fn build_grid(
    rows: usize,
    cols: usize,
    spacing: f64,
    origin: Point3,
    frame: Frame,
    anchor: Anchor,
) -> Result<UnitGrid, GeometryError> {
    if rows == 0 || cols == 0 {
        return Err(GeometryError::InvalidDimensions { rows, cols });
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(GeometryError::NonPositiveSpacing(spacing));
    }
    if !origin.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let mut grid = UnitGrid {
        rows,
        cols,
        spacing,
        origin,
        frame,
        anchor,
        positions: Vec::with_capacity(rows * cols),
    };
    for n in 0..rows * cols {
        let local = grid.local_offset(n);
        grid.positions.push(origin + frame.to_world(local));
    }
    Ok(grid)
}

/// Distance and direction of `to` as seen from `from` in a board frame.
pub fn direction_between(
    from: Point3,
    to: Point3,
    frame: &Frame,
) -> Result<(f64, SphericalDirection), GeometryError> {
    let delta = to - from;
    if !delta.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let r = delta.norm();
    if r == 0.0 {
        return Err(GeometryError::CoincidentPoints);
    }
    Ok((r, SphericalDirection::from_local(frame.to_local(delta))))
}

/// Inverse of [`direction_between`].
pub fn to_cartesian(from: Point3, distance: f64, dir: SphericalDirection, frame: &Frame) -> Point3 {
    from + frame.to_world(dir.unit_vector() * distance)
}

/// Signed elevation of `to` in the plane through the `frame` normal at
/// azimuth `phi`; negative values lie on the `phi + π` side.
pub fn signed_elevation(from: Point3, to: Point3, frame: &Frame, phi: f64) -> f64 {
    let l = frame.to_local(to - from);
    let along = l.x * phi.cos() + l.y * phi.sin();
    along.atan2(l.z)
}
