//! Where to put the next board (fixed aperture) and how large to make it
//! (fixed distance), both from the beam-footprint matching condition
//! `2 r sin(θ_h/2) = L cos α`.
//!
//! The incidence angle `α` and the feed's reflecting elevation `θ_s` are
//! inputs: moving the receiving board is not allowed to change them.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::aperture::{eab_ratio, ApertureError};
use crate::array::{hpbw_closed_form, ArrayError};
use crate::geometry::Wavelength;

/// Inclusive integer range scanned by [`optimal_units`].
pub const UNIT_SCAN: (usize, usize) = (2, 512);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeployError {
    #[error("beamwidth of a {units}-unit feed at {theta_s} rad is edge-clamped; geometry infeasible")]
    Infeasible { units: usize, theta_s: f64 },
    #[error("no unit count in [{lo}, {hi}] gives an EA-B ratio in [0.5, 2]")]
    OutOfRange { lo: usize, hi: usize },
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error(transparent)]
    Array(#[from] ArrayError),
    #[error(transparent)]
    Aperture(#[from] ApertureError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploymentProblem {
    /// Incidence angle on the receiving board.
    pub alpha: f64,
    /// Reflecting elevation of the feeding board.
    pub theta_s: f64,
    pub spacing: f64,
    pub lambda: Wavelength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSolution {
    pub distance: f64,
    pub beamwidth: f64,
    /// `|2 r sin(θ_h/2) − L cos α|` at the returned distance.
    pub residual: f64,
    pub eab: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitsSolution {
    pub units: usize,
    pub beamwidth: f64,
    pub residual: f64,
    pub eab: f64,
    /// Iterates of `N ← round(2 r sin(θ_h(N)/2) / (d cos α))` from `N = 8`.
    pub iterates: Vec<usize>,
    /// The iteration reached a fixed point rather than a cycle.
    pub fixed_point: bool,
}

impl DeploymentProblem {
    pub fn new(alpha: f64, theta_s: f64, spacing: f64, lambda: Wavelength) -> Self {
        Self { alpha, theta_s, spacing, lambda }
    }

    /// Closed-form beamwidth of a `units`-long feed; infeasible if clamped.
    pub fn beamwidth(&self, units: usize) -> Result<f64, DeployError> {
        let h = hpbw_closed_form(units, self.spacing, self.lambda, self.theta_s)?;
        if h.edge_clamped {
            return Err(DeployError::Infeasible { units, theta_s: self.theta_s });
        }
        Ok(h.width)
    }

    /// `|2 r sin(θ_h/2) − L cos α|`.
    pub fn objective(&self, length: f64, distance: f64, beamwidth: f64) -> f64 {
        (2.0 * distance * (beamwidth / 2.0).sin() - length * self.alpha.cos()).abs()
    }
}

/// Optimal distance for a receiving aperture of `length` fed by a
/// `feed_units`-long board.
pub fn optimal_distance(p: &DeploymentProblem, feed_units: usize, length: f64) -> Result<DistanceSolution, DeployError> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(DeployError::NonPositive("aperture length"));
    }
    let th = p.beamwidth(feed_units)?;
    let distance = length * p.alpha.cos() / (2.0 * (th / 2.0).sin());
    let eab = eab_ratio(length, p.alpha, distance, th)?.value;
    Ok(DistanceSolution { distance, beamwidth: th, residual: p.objective(length, distance, th), eab })
}

/// Optimal unit count per side when both boards have `N` units at the
/// problem's spacing and sit `distance` apart.
pub fn optimal_units(p: &DeploymentProblem, distance: f64) -> Result<UnitsSolution, DeployError> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(DeployError::NonPositive("distance"));
    }
    let d = p.spacing;
    let cos_a = p.alpha.cos();
    let eval = |n: usize| -> Option<(f64, f64, f64)> {
        let th = p.beamwidth(n).ok()?;
        let len = n as f64 * d;
        let eab = eab_ratio(len, p.alpha, distance, th).ok()?.value;
        Some((th, p.objective(len, distance, th), eab))
    };

    let mut iterates = alloc::vec![8usize];
    let mut fixed_point = false;
    for _ in 0..64 {
        let n = *iterates.last().unwrap_or(&8);
        let Some((th, _, _)) = eval(n) else { break };
        let next = ((2.0 * distance * (th / 2.0).sin() / (d * cos_a)).round() as usize).max(UNIT_SCAN.0);
        if next == n {
            fixed_point = true;
            break;
        }
        if iterates.contains(&next) {
            iterates.push(next);
            break;
        }
        iterates.push(next);
    }

    let (lo, hi) = UNIT_SCAN;
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for n in lo..=hi {
        if let Some((th, res, eab)) = eval(n) {
            if (0.5..=2.0).contains(&eab) && best.map_or(true, |b| res < b.2) {
                best = Some((n, th, res, eab));
            }
        }
    }
    let (units, beamwidth, residual, eab) = best.ok_or(DeployError::OutOfRange { lo, hi })?;
    Ok(UnitsSolution { units, beamwidth, residual, eab, iterates, fixed_point })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_4;

    fn table2() -> DeploymentProblem {
        let l = Wavelength::from_frequency(3.4e9).unwrap();
        DeploymentProblem::new(FRAC_PI_4, FRAC_PI_4, l.half(), l)
    }

    #[test]
    fn distance_for_32_unit_board() {
        let p = table2();
        let s = optimal_distance(&p, 32, 32.0 * p.spacing).unwrap();
        assert!((s.distance - 12.74).abs() < 0.01, "{}", s.distance);
        assert!(s.residual < 1e-12);
        assert!((s.eab - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_at_normal_incidence() {
        let mut p = table2();
        p.alpha = 0.0;
        let s = optimal_distance(&p, 32, 32.0 * p.spacing).unwrap();
        assert!((s.distance - 18.01).abs() < 0.01, "{}", s.distance);
    }

    #[test]
    fn distance_for_small_board_matches_scan() {
        let p = table2();
        let len = 8.0 * p.spacing;
        let s = optimal_distance(&p, 8, len).unwrap();
        assert!((s.distance - 0.787).abs() < 1e-3, "{}", s.distance);
        let th = p.beamwidth(8).unwrap();
        let best = (1..20_000)
            .map(|i| i as f64 * 1e-3)
            .min_by(|a, b| p.objective(len, *a, th).partial_cmp(&p.objective(len, *b, th)).unwrap())
            .unwrap();
        assert!((best - s.distance).abs() <= 1e-3);
    }

    #[test]
    fn clamped_beam_is_infeasible() {
        let mut p = table2();
        p.theta_s = 80f64.to_radians();
        assert!(matches!(optimal_distance(&p, 4, 0.2), Err(DeployError::Infeasible { .. })));
    }

    #[test]
    fn units_at_five_metres() {
        let p = table2();
        let s = optimal_units(&p, 50f64.sqrt()).unwrap();
        assert_eq!(s.units, 24);
        assert!((s.eab - 1.0132).abs() < 0.02, "{}", s.eab);
    }

    #[test]
    fn units_grow_like_root_distance() {
        // θ_h ∝ 1/N, so the footprint match gives N² ∝ r.
        let p = table2();
        let a = optimal_units(&p, 20.0).unwrap().units as f64;
        let b = optimal_units(&p, 40.0).unwrap().units as f64;
        let c = optimal_units(&p, 80.0).unwrap().units as f64;
        assert!(a < b && b < c);
        assert!((b / a - 2f64.sqrt()).abs() < 0.1, "{a} {b}");
        assert!((c / a - 2.0).abs() < 0.1, "{a} {c}");
    }

    #[test]
    fn units_out_of_range() {
        let p = table2();
        assert!(matches!(optimal_units(&p, 1e6), Err(DeployError::OutOfRange { .. })));
    }
}
