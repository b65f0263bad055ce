//! Aperture figures of merit: illumination, spillover and aperture
//! efficiency, maximum directivity, realised gain and the EA-B ratio.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::array::PatternCut;
use crate::field::{radiate, ComplexFieldMap, FeedPattern, FieldError};
use crate::geometry::{signed_elevation, Point3, UnitGrid, Wavelength};
use crate::numeric::{integrate, integrate_with_breaks};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApertureError {
    #[error("field is zero on every unit")]
    ZeroField,
    #[error("angular aperture {0} rad outside [0, π/2]")]
    ThetaOutOfRange(f64),
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("incidence angle {0} rad outside [0, π/2)")]
    BadIncidence(f64),
    #[error("feed pattern carries no power")]
    ZeroPattern,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `|Σ|E_ab||² / (A·B·Σ|E_ab|²)`.
pub fn illumination_efficiency(field: &ComplexFieldMap) -> Result<f64, ApertureError> {
    illumination_efficiency_of(field.values())
}

pub fn illumination_efficiency_of(values: &[Complex64]) -> Result<f64, ApertureError> {
    let (s1, s2) = values.iter().fold((0.0, 0.0), |(a, b), v| {
        let m = v.norm();
        (a + m, b + m * m)
    });
    if !(s2 > 0.0) {
        return Err(ApertureError::ZeroField);
    }
    Ok((s1 * s1 / (values.len() as f64 * s2)).min(1.0))
}

fn check_theta0(theta0: f64) -> Result<(), ApertureError> {
    if !(0.0..=PI / 2.0 + 1e-12).contains(&theta0) {
        return Err(ApertureError::ThetaOutOfRange(theta0));
    }
    Ok(())
}

const SPILL_REL_TOL: f64 = 1e-10;

/// Spillover of an axisymmetric feed pattern into a cone of half-angle
/// `theta0`: the φ integral cancels, leaving a ratio of 1-D integrals of
/// `|F|² sin θ`.
pub fn spillover_efficiency(pattern: &FeedPattern, theta0: f64) -> Result<f64, ApertureError> {
    check_theta0(theta0)?;
    let f = |t: f64| pattern.power(t) * t.sin();
    let den = integrate(f, 0.0, PI / 2.0, SPILL_REL_TOL, 0.0, 500).value;
    if !(den > 0.0) {
        return Err(ApertureError::ZeroPattern);
    }
    let num = integrate(f, 0.0, theta0, SPILL_REL_TOL, 0.0, 500).value;
    Ok(num / den)
}

/// Spillover of a general power pattern `|F(θ, φ)|²` (nested adaptive quadrature).
pub fn spillover_efficiency_with<F: Fn(f64, f64) -> f64>(power: F, theta0: f64) -> Result<f64, ApertureError> {
    check_theta0(theta0)?;
    let shell = |upper: f64| {
        integrate(
            |phi| integrate(|t| power(t, phi) * t.sin(), 0.0, upper, 1e-8, 0.0, 200).value,
            0.0,
            2.0 * PI,
            1e-8,
            0.0,
            200,
        )
        .value
    };
    let den = shell(PI / 2.0);
    if !(den > 0.0) {
        return Err(ApertureError::ZeroPattern);
    }
    Ok(shell(theta0) / den)
}

/// Spillover from two sampled principal cuts, using the usual
/// `|F|² ≈ |E(θ)|² cos²φ + |H(θ)|² sin²φ` reconstruction. Only samples with
/// `θ ≥ 0` are used; integration is trapezoidal.
pub fn spillover_from_cuts(e_plane: &PatternCut, h_plane: &PatternCut, theta0: f64) -> Result<f64, ApertureError> {
    check_theta0(theta0)?;
    let trap = |cut: &PatternCut, upper: f64| {
        let pts: Vec<(f64, f64)> = cut.samples.iter().copied().filter(|s| s.0 >= 0.0).collect();
        let mut acc = 0.0;
        for w in pts.windows(2) {
            let (t0, m0) = w[0];
            let (t1, m1) = w[1];
            if t0 >= upper {
                break;
            }
            let (t1c, m1c) = if t1 > upper {
                (upper, m0 + (m1 - m0) * (upper - t0) / (t1 - t0))
            } else {
                (t1, m1)
            };
            acc += 0.5 * (m0 * m0 * t0.sin() + m1c * m1c * t1c.sin()) * (t1c - t0);
        }
        acc
    };
    let den = trap(e_plane, PI / 2.0) + trap(h_plane, PI / 2.0);
    if !(den > 0.0) {
        return Err(ApertureError::ZeroPattern);
    }
    Ok((trap(e_plane, theta0) + trap(h_plane, theta0)) / den)
}

/// Half-angle of the cone from `feed` (axis through the board centre) to the
/// nearest edge midpoint of `grid`.
pub fn inscribed_cone_angle(feed: Point3, grid: &UnitGrid) -> f64 {
    let c = grid.center();
    let axis = c - feed;
    let f = grid.frame();
    let (hw, hh) = (grid.width() / 2.0, grid.height() / 2.0);
    [f.u * hw, -(f.u * hw), f.v * hh, -(f.v * hh)]
        .iter()
        .map(|&off| {
            let to = c + off - feed;
            (axis.dot(to) / (axis.norm() * to.norm())).max(-1.0).min(1.0).acos()
        })
        .fold(f64::INFINITY, f64::min)
}

/// How the receiving board's angular span is taken for RIS-fed spillover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpilloverAperture {
    /// Actual (generally asymmetric) angles to the two physical edges.
    #[default]
    ExactEdges,
    /// Symmetric interval about the beam axis out to the nearer edge.
    InscribedCone,
}

/// RIS-fed spillover measured in the beam plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutSpillover {
    pub efficiency: f64,
    /// Signed elevations (feed frame) of the receiving board's edges.
    pub lower: f64,
    pub upper: f64,
    /// Signed elevation of the receiving board's centre.
    pub axis: f64,
    pub distance: f64,
}

/// Spillover of a board-fed board.
///
/// The feed board's exact scattered field `|E|²` is sampled on the arc of
/// radius `r` (feed centre to receiving centre) in the plane containing the
/// feed normal and the receiving centre. The efficiency is the arc integral
/// over the receiving board's angular span divided by the integral over
/// `[-π/2, π/2]`.
pub fn ris_fed_spillover(
    weights: &[Complex64],
    feed: &UnitGrid,
    receiving: &UnitGrid,
    lambda: Wavelength,
    aperture: SpilloverAperture,
) -> Result<CutSpillover, ApertureError> {
    let k = lambda.wavenumber();
    let c1 = feed.center();
    let c2 = receiving.center();
    let fr = feed.frame();
    let local = fr.to_local(c2 - c1);
    let r = (c2 - c1).norm();
    if !(r > 0.0) {
        return Err(ApertureError::NonPositive("feed-to-board distance"));
    }
    let phi_b = if local.x == 0.0 && local.y == 0.0 { 0.0 } else { local.y.atan2(local.x) };
    let in_plane = fr.u * phi_b.cos() + fr.v * phi_b.sin();

    let rf = receiving.frame();
    let (axis, half) = if rf.u.dot(in_plane).abs() >= rf.v.dot(in_plane).abs() {
        (rf.u, receiving.width() / 2.0)
    } else {
        (rf.v, receiving.height() / 2.0)
    };
    let theta_c = signed_elevation(c1, c2, fr, phi_b);
    let ta = signed_elevation(c1, c2 + axis * half, fr, phi_b);
    let tb = signed_elevation(c1, c2 - axis * half, fr, phi_b);
    let (mut lo, mut hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
    if aperture == SpilloverAperture::InscribedCone {
        let h = (theta_c - lo).min(hi - theta_c);
        lo = theta_c - h;
        hi = theta_c + h;
    }
    lo = lo.max(-PI / 2.0);
    hi = hi.min(PI / 2.0);

    let mut failure = None;
    let mut intensity = |t: f64| {
        let (s, c) = t.sin_cos();
        let p = c1 + in_plane * (r * s) + fr.normal * (r * c);
        match radiate(weights, feed.positions(), p, k) {
            Ok(e) => e.norm_sqr(),
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let inside = integrate_with_breaks(&mut intensity, lo, hi, &[theta_c], 1e-7, 4000).value;
    let outside = integrate(&mut intensity, -PI / 2.0, lo, 1e-7, 0.0, 4000).value
        + integrate(&mut intensity, hi, PI / 2.0, 1e-7, 0.0, 4000).value;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let total = inside + outside;
    if !(total > 0.0) {
        return Err(ApertureError::ZeroPattern);
    }
    Ok(CutSpillover { efficiency: inside / total, lower: lo, upper: hi, axis: theta_c, distance: r })
}

/// Efficiency of a board fed by another board whose outgoing unit weights
/// are `feed_weights`: illumination from the exact field on `receiving`,
/// spillover from [`ris_fed_spillover`].
pub fn ris_fed_report(
    feed_weights: &[Complex64],
    feed: &UnitGrid,
    receiving: &UnitGrid,
    lambda: Wavelength,
    aperture: SpilloverAperture,
) -> Result<(EfficiencyReport, CutSpillover), ApertureError> {
    let k = lambda.wavenumber();
    let field = receiving
        .positions()
        .iter()
        .map(|&p| radiate(feed_weights, feed.positions(), p, k))
        .collect::<Result<Vec<_>, _>>()?;
    let e_r = illumination_efficiency_of(&field)?;
    let spill = ris_fed_spillover(feed_weights, feed, receiving, lambda, aperture)?;
    Ok((report_from(e_r, spill.efficiency, receiving.aperture_area(), lambda)?, spill))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    pub e_r: f64,
    pub eps_s: f64,
    pub eps_ap: f64,
    pub d_max: f64,
    pub gain: f64,
    pub gain_dbi: f64,
    pub area: f64,
}

/// `D_max = 4π A_p / λ²`.
pub fn max_directivity(area: f64, lambda: Wavelength) -> f64 {
    4.0 * PI * area / (lambda.meters() * lambda.meters())
}

/// Assembles the report from an illumination efficiency and a spillover value.
pub fn report_from(e_r: f64, eps_s: f64, area: f64, lambda: Wavelength) -> Result<EfficiencyReport, ApertureError> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(ApertureError::NonPositive("aperture area"));
    }
    let eps_ap = e_r * eps_s;
    let d_max = max_directivity(area, lambda);
    let gain = eps_ap * d_max;
    Ok(EfficiencyReport { e_r, eps_s, eps_ap, d_max, gain, gain_dbi: 10.0 * gain.log10(), area })
}

/// Report for a horn-fed board: illumination from `field`, spillover of
/// `pattern` into the cone `theta0`.
pub fn aperture_report(
    field: &ComplexFieldMap,
    pattern: &FeedPattern,
    theta0: f64,
    area: f64,
    lambda: Wavelength,
) -> Result<EfficiencyReport, ApertureError> {
    let e_r = illumination_efficiency(field)?;
    let eps_s = spillover_efficiency(pattern, theta0)?;
    report_from(e_r, eps_s, area, lambda)
}

/// Effective aperture over the half-power footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EabRatio {
    pub value: f64,
    pub length: f64,
    pub alpha: f64,
    pub distance: f64,
    pub beamwidth: f64,
}

/// `L cos α / (2 r sin(θ_h/2))`.
pub fn eab_ratio(length: f64, alpha: f64, distance: f64, beamwidth: f64) -> Result<EabRatio, ApertureError> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(ApertureError::NonPositive("aperture length"));
    }
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(ApertureError::NonPositive("distance"));
    }
    if !(beamwidth > 0.0 && beamwidth.is_finite()) {
        return Err(ApertureError::NonPositive("beamwidth"));
    }
    if !(0.0..PI / 2.0).contains(&alpha) {
        return Err(ApertureError::BadIncidence(alpha));
    }
    let value = length * alpha.cos() / (2.0 * distance * (beamwidth / 2.0).sin());
    Ok(EabRatio { value, length, alpha, distance, beamwidth })
}
