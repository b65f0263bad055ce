//! Far-field array factor of a phase-configured board and its half-power
//! beamwidth.
//!
//! Directions in a pattern cut use a signed elevation: `θ < 0` at azimuth
//! `φ` is the direction `(|θ|, φ + π)`, so a cut through broadside is one
//! continuous curve.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::field::PhaseProfile;
use crate::geometry::{wrap_angle, Anchor, Point3, SphericalDirection, UnitGrid, Wavelength};
use crate::numeric::{brent, golden_max};

/// `x` with `sin x / x = 1/√2`, as used in the closed-form beamwidth.
pub const HALF_POWER_ARG: f64 = 1.391;

/// Below this `|sin(Ψ/2)|` the sine ratio is replaced by its limit.
const SINGULAR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArrayError {
    #[error("beamwidth needs at least 2 units along the cut (got {0})")]
    TooFewUnits(usize),
    #[error("no main lobe found in the cut")]
    NoMainLobe,
    #[error("profile has {got} entries, array has {expected}")]
    ProfileMismatch { expected: usize, got: usize },
}

/// Board dimensions plus incident and reflected beam directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringSpec {
    pub incident: SphericalDirection,
    pub reflect: SphericalDirection,
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub lambda: Wavelength,
    pub anchor: Anchor,
}

impl SteeringSpec {
    pub fn for_grid(grid: &UnitGrid, incident: SphericalDirection, reflect: SphericalDirection, lambda: Wavelength) -> Self {
        Self {
            incident,
            reflect,
            rows: grid.rows(),
            cols: grid.cols(),
            spacing: grid.spacing(),
            lambda,
            anchor: grid.anchor(),
        }
    }

    /// `units`-long linear array along `u`, normal incidence, beam at `theta2`
    /// in the `φ = 0` plane.
    pub fn linear(units: usize, spacing: f64, lambda: Wavelength, theta2: f64) -> Self {
        Self {
            incident: SphericalDirection::new(0.0, 0.0),
            reflect: cut_direction(theta2, 0.0),
            rows: 1,
            cols: units,
            spacing,
            lambda,
            anchor: Anchor::Center,
        }
    }

    pub fn units(&self) -> usize {
        self.rows * self.cols
    }

    /// Local position `r_ab` of unit `n` (row-major) relative to the anchor.
    pub fn unit_offset(&self, n: usize) -> Point3 {
        let (a, b) = (n / self.cols, n % self.cols);
        let (ox, oy) = match self.anchor {
            Anchor::Center => (
                (self.cols as f64 - 1.0) * self.spacing / 2.0,
                (self.rows as f64 - 1.0) * self.spacing / 2.0,
            ),
            Anchor::FirstUnit => (0.0, 0.0),
        };
        Point3::new(b as f64 * self.spacing - ox, a as f64 * self.spacing - oy, 0.0)
    }

    fn kd(&self) -> f64 {
        self.lambda.wavenumber() * self.spacing
    }

    /// Row and column phase progressions `(Ψ1, Ψ2)` towards `observe`.
    pub fn psi(&self, observe: SphericalDirection) -> (f64, f64) {
        let kd = self.kd();
        let (st, st2) = (observe.theta.sin(), self.reflect.theta.sin());
        (
            kd * (observe.phi.sin() * st - self.reflect.phi.sin() * st2),
            kd * (observe.phi.cos() * st - self.reflect.phi.cos() * st2),
        )
    }
}

/// Direction of signed elevation `theta` in the cut at azimuth `phi`.
pub fn cut_direction(theta: f64, phi: f64) -> SphericalDirection {
    if theta >= 0.0 {
        SphericalDirection::new(theta, phi)
    } else {
        SphericalDirection::new(-theta, phi + PI)
    }
}

/// `φ_ab = -k (r_1·r_ab + r_2·r_ab)`, wrapped to `[0, 2π)`.
pub fn steering_phases(spec: &SteeringSpec) -> PhaseProfile {
    let k = spec.lambda.wavenumber();
    let s = spec.incident.unit_vector() + spec.reflect.unit_vector();
    PhaseProfile::new((0..spec.units()).map(|n| -k * s.dot(spec.unit_offset(n))).collect())
}

/// Direct double sum `Σ_a Σ_b e^{jk(r − r_2)·r_ab}`.
pub fn array_factor_exact(spec: &SteeringSpec, observe: SphericalDirection) -> Complex64 {
    let k = spec.lambda.wavenumber();
    let dr = observe.unit_vector() - spec.reflect.unit_vector();
    (0..spec.units())
        .map(|n| Complex64::from_polar(1.0, k * dr.dot(spec.unit_offset(n))))
        .sum()
}

/// Array factor of an arbitrary profile illuminated from `spec.incident`:
/// `Σ e^{j(ω_ab + k(r_1 + r)·r_ab)}`. Equals [`array_factor_exact`] for the
/// steering profile.
pub fn array_factor_profile(
    spec: &SteeringSpec,
    phases: &PhaseProfile,
    observe: SphericalDirection,
) -> Result<Complex64, ArrayError> {
    if phases.len() != spec.units() {
        return Err(ArrayError::ProfileMismatch { expected: spec.units(), got: phases.len() });
    }
    let k = spec.lambda.wavenumber();
    let s = spec.incident.unit_vector() + observe.unit_vector();
    Ok(phases
        .omegas()
        .iter()
        .enumerate()
        .map(|(n, &w)| Complex64::from_polar(1.0, w + k * s.dot(spec.unit_offset(n))))
        .sum())
}

/// `sin(nψ/2) / sin(ψ/2)`, with the limit `n·cos(nψ/2)/cos(ψ/2)` near the zeros
/// of the denominator.
pub fn sine_ratio(n: usize, psi: f64) -> f64 {
    let nf = n as f64;
    let den = (psi / 2.0).sin();
    if den.abs() < SINGULAR_EPS {
        nf * (nf * psi / 2.0).cos() / (psi / 2.0).cos()
    } else {
        (nf * psi / 2.0).sin() / den
    }
}

/// `sin x / x` with the limit 1 at 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINGULAR_EPS { 1.0 } else { x.sin() / x }
}

/// Which expression [`array_factor_normalized`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AfModel {
    /// Normalised sine-ratio product (equal to the double sum).
    #[default]
    Exact,
    /// Product of `sin(x)/x` terms.
    Sinc,
}

/// `|AF| / (A·B)` in `[0, 1]`.
pub fn array_factor_normalized(spec: &SteeringSpec, observe: SphericalDirection, model: AfModel) -> f64 {
    let (p1, p2) = spec.psi(observe);
    let (a, b) = (spec.rows, spec.cols);
    let v = match model {
        AfModel::Exact => sine_ratio(a, p1) * sine_ratio(b, p2) / (a * b) as f64,
        AfModel::Sinc => sinc(a as f64 * p1 / 2.0) * sinc(b as f64 * p2 / 2.0),
    };
    v.abs().min(1.0)
}

/// Closed-form half-power beamwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hpbw {
    pub width: f64,
    /// `θ*_1 = asin(1.391·2/(B k d) + sin θ_2)`.
    pub upper: f64,
    /// `θ*_2 = asin(−1.391·2/(B k d) + sin θ_2)`.
    pub lower: f64,
    /// A branch argument left `[-1, 1]` and was clamped to ±π/2.
    pub edge_clamped: bool,
}

pub fn hpbw_closed_form(units: usize, spacing: f64, lambda: Wavelength, theta2: f64) -> Result<Hpbw, ArrayError> {
    if units < 2 {
        return Err(ArrayError::TooFewUnits(units));
    }
    let kd = lambda.wavenumber() * spacing;
    let delta = HALF_POWER_ARG * 2.0 / (units as f64 * kd);
    let s = theta2.sin();
    let mut clamped = false;
    let mut branch = |x: f64| {
        if x > 1.0 {
            clamped = true;
            PI / 2.0
        } else if x < -1.0 {
            clamped = true;
            -PI / 2.0
        } else {
            x.asin()
        }
    };
    let upper = branch(s + delta);
    let lower = branch(s - delta);
    Ok(Hpbw { width: (upper - lower).abs(), upper, lower, edge_clamped: clamped })
}

/// Beamwidth measured on the exact pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredHpbw {
    pub width: f64,
    /// Signed elevation of the pattern peak in the cut.
    pub peak: f64,
    pub lower: f64,
    pub upper: f64,
    /// One side of the lobe reached ±90° before dropping to 1/√2.
    pub truncated: bool,
}

/// Finds both 1/√2 crossings of the exact normalised pattern around the main
/// lobe in the cut at azimuth `phi` and returns their separation.
pub fn hpbw_numerical(spec: &SteeringSpec, phi: f64) -> Result<MeasuredHpbw, ArrayError> {
    let f = |t: f64| array_factor_normalized(spec, cut_direction(t, phi), AfModel::Exact);
    let edge = PI / 2.0;

    let dphi = wrap_angle(phi - spec.reflect.phi);
    let guess = if dphi < 1e-9 || (2.0 * PI - dphi) < 1e-9 {
        Some(spec.reflect.theta)
    } else if (dphi - PI).abs() < 1e-9 {
        Some(-spec.reflect.theta)
    } else {
        None
    };
    let peak = match guess {
        Some(t) if f(t) > 0.999_999 => t,
        _ => {
            let steps = 18_000;
            let h = 2.0 * edge / steps as f64;
            let (i, v) = (0..=steps)
                .map(|i| (i, f(-edge + i as f64 * h)))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if v <= FRAC_1_SQRT_2 {
                return Err(ArrayError::NoMainLobe);
            }
            let t0 = -edge + i as f64 * h;
            golden_max(&f, (t0 - h).max(-edge), (t0 + h).min(edge), 80).0
        }
    };

    let g = |t: f64| f(t) - FRAC_1_SQRT_2;
    // Walk outward in 0.01° steps (far below any lobe width at d ≤ λ/2), then
    // refine the bracketing step.
    let (step, tol) = (0.01f64.to_radians(), 1e-12);
    let mut truncated = false;
    let mut crossing = |dir: f64| -> f64 {
        let mut t = peak;
        loop {
            let next = t + dir * step;
            if dir * next >= edge {
                if g(dir * edge) > 0.0 {
                    truncated = true;
                    return dir * edge;
                }
                return brent(g, t, dir * edge, tol, 200).unwrap_or(dir * edge);
            }
            if g(next) <= 0.0 {
                return brent(g, t, next, tol, 200).unwrap_or(next);
            }
            t = next;
        }
    };
    let upper = crossing(1.0);
    let lower = crossing(-1.0);
    Ok(MeasuredHpbw { width: upper - lower, peak, lower, upper, truncated })
}

/// Sampled pattern in one azimuthal cut.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternCut {
    pub phi: f64,
    /// `(signed θ in radians, normalised magnitude)`, sorted by θ.
    pub samples: Vec<(f64, f64)>,
}

impl PatternCut {
    /// Local maxima above `floor`, as signed angles.
    pub fn peaks(&self, floor: f64) -> Vec<f64> {
        self.samples
            .windows(3)
            .filter(|w| w[1].1 >= w[0].1 && w[1].1 > w[2].1 && w[1].1 >= floor)
            .map(|w| w[1].0)
            .collect()
    }
}

/// Samples `|AF|/(A·B)` over signed `θ ∈ [from, to]` with the given step.
pub fn pattern_cut(spec: &SteeringSpec, phi: f64, from: f64, to: f64, step: f64, model: AfModel) -> PatternCut {
    let n = (((to - from) / step).round() as usize).max(1);
    let samples = (0..=n)
        .map(|i| {
            let t = from + (to - from) * i as f64 / n as f64;
            (t, array_factor_normalized(spec, cut_direction(t, phi), model))
        })
        .collect();
    PatternCut { phi, samples }
}

/// Pattern of an arbitrary profile, normalised to its own maximum over the cut.
pub fn profile_pattern_cut(
    spec: &SteeringSpec,
    phases: &PhaseProfile,
    phi: f64,
    from: f64,
    to: f64,
    step: f64,
) -> Result<PatternCut, ArrayError> {
    let n = (((to - from) / step).round() as usize).max(1);
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = from + (to - from) * i as f64 / n as f64;
        samples.push((t, array_factor_profile(spec, phases, cut_direction(t, phi))?.norm()));
    }
    let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    if peak > 0.0 {
        for s in &mut samples {
            s.1 /= peak;
        }
    }
    Ok(PatternCut { phi, samples })
}
