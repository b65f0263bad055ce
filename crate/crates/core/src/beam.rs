//! Per-hop phase configuration.
//!
//! A hop whose beam footprint covers the next board (exact or over
//! illumination) is phase-conjugated towards the next board's centre. A hop
//! that only lights part of the next board gets `Z` target points spread over
//! it, and the phases maximise the weakest target power:
//!
//! ```text
//! max_ω  min_z |Σ_n e^{jω_n} h_z(n)|²
//! ```
//!
//! The max-min problem is solved by softmin ascent. The minimum is smoothed
//! with a log-sum-exp at rising temperatures, each stage runs L-BFGS on the
//! phases, and a coordinate-wise polish on the true minimum follows. Several
//! seeded restarts are merged by best minimum power, ties going to the lower
//! restart index, so serial and parallel runs agree.
//!
//! The last board co-phases its incident field at the receiver.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aperture::{eab_ratio, ApertureError, EabRatio};
use crate::array::{hpbw_closed_form, ArrayError};
use crate::field::{
    incident_field, path_factor, scatter_to_surface, ComplexFieldMap, FieldError, PhaseProfile,
};
use crate::geometry::{wrap_angle, Point3, UnitGrid, Wavelength};
use crate::numeric::golden_max;
use crate::scenario::{BeamMode, Scenario};

/// Half-width of the "exact illumination" band around EA-B = 1.
pub const CLASS_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamError {
    #[error("max-min problem has no target points")]
    NoTargets,
    #[error("max-min problem has no units")]
    NoUnits,
    #[error("channel {z} has {got} entries, expected {expected}")]
    ChannelLength { z: usize, expected: usize, got: usize },
    #[error("channel {0} is identically zero")]
    ZeroChannel(usize),
    #[error("incident field is zero on every unit")]
    ZeroIncident,
    #[error("target point coincides with unit {0}")]
    TargetOnBoard(usize),
    #[error("quantisation needs 1..=16 bits (got {0})")]
    Bits(u8),
    #[error("beamwidth towards the next board is edge-clamped; geometry infeasible")]
    EdgeClamped,
    #[error("next board lies behind or in the plane of the feeding board")]
    BehindBoard,
    #[error(transparent)]
    Array(#[from] ArrayError),
    #[error(transparent)]
    Aperture(#[from] ApertureError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Settings for [`solve_max_min`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub seed: u64,
    pub restarts: usize,
    /// L-BFGS iteration budget per temperature stage.
    pub max_iters: usize,
    /// Softmin temperatures, applied in order to powers normalised by the
    /// current minimum.
    pub temperatures: Vec<f64>,
    /// Upper bound on coordinate-polish sweeps.
    pub polish_passes: usize,
    pub memory: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            restarts: 16,
            max_iters: 200,
            temperatures: alloc::vec![4.0, 16.0, 64.0, 256.0],
            polish_passes: 8,
            memory: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Illumination {
    Partial,
    Exact,
    Over,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationClass {
    pub kind: Illumination,
    pub eab: EabRatio,
}

/// Partial above `1 + tol`, exact within `tol` of 1, over below.
pub fn classify_eab(eab: EabRatio) -> IlluminationClass {
    let kind = if eab.value > 1.0 + CLASS_TOLERANCE {
        Illumination::Partial
    } else if eab.value >= 1.0 - CLASS_TOLERANCE {
        Illumination::Exact
    } else {
        Illumination::Over
    };
    IlluminationClass { kind, eab }
}

/// One principal cut of a board-to-board link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutLink {
    /// Feed units along the cut.
    pub units: usize,
    pub beamwidth: f64,
    pub class: IlluminationClass,
    /// Unit vector along the receiving board in this cut.
    pub axis: Point3,
}

/// Geometry of the link from a feeding board to the next one.
///
/// The primary cut contains the feed normal and the receiving centre. The
/// transverse cut is taken at the feed's broadside beamwidth with normal
/// incidence, over the receiving board's other extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance: f64,
    /// Reflecting elevation at the feed.
    pub theta_s: f64,
    /// Incidence angle at the receiving board.
    pub alpha: f64,
    pub primary: CutLink,
    pub transverse: Option<CutLink>,
}

pub fn link_geometry(feed: &UnitGrid, receiving: &UnitGrid, lambda: Wavelength) -> Result<LinkGeometry, BeamError> {
    let c1 = feed.center();
    let c2 = receiving.center();
    let f = feed.frame();
    let delta = c2 - c1;
    let distance = delta.norm();
    if !(distance > 0.0) {
        return Err(FieldError::Overlap.into());
    }
    let local = f.to_local(delta);
    if local.z <= 0.0 {
        return Err(BeamError::BehindBoard);
    }
    let theta_s = (local.z / distance).min(1.0).acos();
    let phi = if local.x == 0.0 && local.y == 0.0 { 0.0 } else { local.y.atan2(local.x) };
    let along_u = phi.cos().abs() >= phi.sin().abs();
    let (units_p, units_t) = if along_u { (feed.cols(), feed.rows()) } else { (feed.rows(), feed.cols()) };
    let in_plane = f.u * phi.cos() + f.v * phi.sin();

    let rf = receiving.frame();
    let (axis_p, len_p, axis_t, len_t) = if rf.u.dot(in_plane).abs() >= rf.v.dot(in_plane).abs() {
        (rf.u, receiving.width(), rf.v, receiving.height())
    } else {
        (rf.v, receiving.height(), rf.u, receiving.width())
    };
    let alpha = ((-delta).dot(rf.normal) / distance).max(-1.0).min(1.0).acos();
    if alpha >= PI / 2.0 {
        return Err(BeamError::BehindBoard);
    }

    let h = hpbw_closed_form(units_p, feed.spacing(), lambda, theta_s)?;
    if h.edge_clamped {
        return Err(BeamError::EdgeClamped);
    }
    let primary = CutLink {
        units: units_p,
        beamwidth: h.width,
        class: classify_eab(eab_ratio(len_p, alpha, distance, h.width)?),
        axis: axis_p,
    };
    let transverse = if units_t >= 2 {
        let h = hpbw_closed_form(units_t, feed.spacing(), lambda, 0.0)?;
        Some(CutLink {
            units: units_t,
            beamwidth: h.width,
            class: classify_eab(eab_ratio(len_t, 0.0, distance, h.width)?),
            axis: axis_t,
        })
    } else {
        None
    };
    Ok(LinkGeometry { distance, theta_s, alpha, primary, transverse })
}

/// Classification of the primary cut from `feed` to `receiving`.
pub fn classify_illumination(feed: &UnitGrid, receiving: &UnitGrid, lambda: Wavelength) -> Result<IlluminationClass, BeamError> {
    Ok(link_geometry(feed, receiving, lambda)?.primary.class)
}

/// `2⌈ABR⌉ − 1`, at least 1.
pub fn sampling_count(abr: f64) -> usize {
    let c = abr.ceil();
    if c <= 1.0 { 1 } else { 2 * c as usize - 1 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    /// Points along the primary cut.
    pub z_primary: usize,
    /// Points along the transverse cut (1 for a 1-D plan).
    pub z_transverse: usize,
    pub points: Vec<Point3>,
}

impl SamplingPlan {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `z` centred offsets splitting `length` into equal cells, one point per cell.
fn cell_centres(z: usize, length: f64) -> impl Iterator<Item = f64> {
    let half = (z as f64 - 1.0) / 2.0;
    (0..z).map(move |i| (i as f64 - half) * length / z as f64)
}

/// Target points on the receiving board: `2⌈ABR⌉ − 1` along the primary
/// cut and, with `lattice`, the same rule along a partial transverse cut.
pub fn sampling_plan(link: &LinkGeometry, receiving: &UnitGrid, lattice: bool) -> SamplingPlan {
    let zp = sampling_count(link.primary.class.eab.value);
    let zt = match link.transverse {
        Some(t) if lattice && t.class.kind == Illumination::Partial => sampling_count(t.class.eab.value),
        _ => 1,
    };
    let lp = link.primary.class.eab.length;
    let lt = link.transverse.map_or(0.0, |t| t.class.eab.length);
    let at = link.transverse.map_or(Point3::ORIGIN, |t| t.axis);
    let c = receiving.center();
    let mut points = Vec::with_capacity(zp * zt);
    for x in cell_centres(zp, lp) {
        for y in cell_centres(zt, lt) {
            points.push(c + link.primary.axis * x + at * y);
        }
    }
    SamplingPlan { z_primary: zp, z_transverse: zt, points }
}

/// `ω_n = k (r^i(n) + r^s(n))`: a point source at `source` co-phased at `target`.
pub fn single_beam_phases(source: Point3, target: Point3, grid: &UnitGrid, lambda: Wavelength) -> Result<PhaseProfile, BeamError> {
    let k = lambda.wavenumber();
    let mut out = Vec::with_capacity(grid.len());
    for (n, &p) in grid.positions().iter().enumerate() {
        let (ri, rs) = (p.distance(source), p.distance(target));
        if !(rs > 0.0) {
            return Err(BeamError::TargetOnBoard(n));
        }
        if !(ri > 0.0) {
            return Err(FieldError::ZeroDistance { unit: n }.into());
        }
        out.push(k * (ri + rs));
    }
    Ok(PhaseProfile::new(out))
}

/// `ω_n = −arg E^i(n) + k r^s(n)`: co-phases an arbitrary incident field at
/// `target`. Units with zero incident field get phase 0.
pub fn last_ris_phases(
    incident: &ComplexFieldMap,
    target: Point3,
    grid: &UnitGrid,
    lambda: Wavelength,
) -> Result<PhaseProfile, BeamError> {
    if incident.len() != grid.len() {
        return Err(FieldError::MapMismatch { expected: grid.len(), got: incident.len() }.into());
    }
    if incident.values().iter().all(|e| e.norm_sqr() == 0.0) {
        return Err(BeamError::ZeroIncident);
    }
    let k = lambda.wavenumber();
    let mut out = Vec::with_capacity(grid.len());
    for (n, (e, &p)) in incident.values().iter().zip(grid.positions()).enumerate() {
        let rs = p.distance(target);
        if !(rs > 0.0) {
            return Err(BeamError::TargetOnBoard(n));
        }
        out.push(if e.norm_sqr() == 0.0 { 0.0 } else { -e.arg() + k * rs });
    }
    Ok(PhaseProfile::new(out))
}

/// Snaps every phase to the nearest of `2^bits` uniform levels; exact ties
/// go to the lower level.
pub fn quantize(profile: &PhaseProfile, bits: u8) -> Result<PhaseProfile, BeamError> {
    if bits == 0 || bits > 16 {
        return Err(BeamError::Bits(bits));
    }
    let n = 1u32 << bits;
    let step = 2.0 * PI / n as f64;
    let omegas = profile
        .omegas()
        .iter()
        .map(|&w| {
            let q = wrap_angle(w) / step;
            let lo = q.floor();
            let level = if q - lo > 0.5 { lo + 1.0 } else { lo };
            (level as u32 % n) as f64 * step
        })
        .collect();
    Ok(PhaseProfile::quantized(omegas, bits))
}

/// Channels `h_z` of a max-min problem; power at target `z` is
/// `|Σ_n e^{jω_n} h_z(n)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinProblem {
    channels: Vec<Vec<Complex64>>,
    units: usize,
}

impl MaxMinProblem {
    pub fn new(channels: Vec<Vec<Complex64>>) -> Result<Self, BeamError> {
        let units = channels.first().ok_or(BeamError::NoTargets)?.len();
        if units == 0 {
            return Err(BeamError::NoUnits);
        }
        for (z, h) in channels.iter().enumerate() {
            if h.len() != units {
                return Err(BeamError::ChannelLength { z, expected: units, got: h.len() });
            }
            if h.iter().all(|c| c.norm_sqr() == 0.0) {
                return Err(BeamError::ZeroChannel(z));
            }
        }
        Ok(Self { channels, units })
    }

    /// Board-fed channels `h_z(n) = τ E^i(n) e^{-jk r_z(n)} / r_z(n)`.
    pub fn from_incident(
        incident: &ComplexFieldMap,
        tau: f64,
        grid: &UnitGrid,
        targets: &[Point3],
        lambda: Wavelength,
    ) -> Result<Self, BeamError> {
        if incident.len() != grid.len() {
            return Err(FieldError::MapMismatch { expected: grid.len(), got: incident.len() }.into());
        }
        let k = lambda.wavenumber();
        let mut channels = Vec::with_capacity(targets.len());
        for &t in targets {
            let mut h = Vec::with_capacity(grid.len());
            for (n, (e, &p)) in incident.values().iter().zip(grid.positions()).enumerate() {
                let r = p.distance(t);
                if !(r > 0.0) {
                    return Err(BeamError::TargetOnBoard(n));
                }
                h.push(e * tau * path_factor(r, k));
            }
            channels.push(h);
        }
        Self::new(channels)
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn targets(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.channels
    }

    /// `|Σ_n e^{jω_n} h_z(n)|²` for every target.
    pub fn powers(&self, phases: &[f64]) -> Vec<f64> {
        let w: Vec<Complex64> = phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        self.channels
            .iter()
            .map(|h| h.iter().zip(&w).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
            .collect()
    }

    pub fn min_power(&self, phases: &[f64]) -> f64 {
        self.powers(phases).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Phases co-phasing the normalised channel sum.
    pub fn warm_start(&self) -> Vec<f64> {
        let mut acc = alloc::vec![Complex64::new(0.0, 0.0); self.units];
        for h in &self.channels {
            let norm = h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for (a, c) in acc.iter_mut().zip(h) {
                *a += c / norm;
            }
        }
        acc.iter().map(|a| if a.norm_sqr() > 0.0 { wrap_angle(-a.arg()) } else { 0.0 }).collect()
    }
}

/// Best point found by one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub restart: usize,
    pub phases: Vec<f64>,
    pub min_power: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best true minimum power after every iteration and polish sweep.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub phases: PhaseProfile,
    pub min_power: f64,
    pub powers: Vec<f64>,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Index of the winning restart.
    pub best_restart: usize,
    pub converged: bool,
    /// Running best minimum power of the winning restart.
    pub trace: Vec<f64>,
}

/// Softmin objective with fixed temperature and power scale.
struct Softmin<'a> {
    h: &'a [Vec<Complex64>],
    beta: f64,
    scale: f64,
    rot: Vec<Complex64>,
    amps: Vec<Complex64>,
    weights: Vec<f64>,
}

impl<'a> Softmin<'a> {
    fn new(p: &'a MaxMinProblem) -> Self {
        Self {
            h: &p.channels,
            beta: 1.0,
            scale: 1.0,
            rot: alloc::vec![Complex64::new(0.0, 0.0); p.units],
            amps: alloc::vec![Complex64::new(0.0, 0.0); p.channels.len()],
            weights: alloc::vec![0.0; p.channels.len()],
        }
    }

    /// Returns (negated softmin, true min power) and writes the negated gradient.
    fn eval(&mut self, theta: &[f64], grad: &mut [f64]) -> (f64, f64) {
        for (r, &t) in self.rot.iter_mut().zip(theta) {
            *r = Complex64::from_polar(1.0, t);
        }
        let mut m = f64::INFINITY;
        for (a, h) in self.amps.iter_mut().zip(self.h) {
            *a = h.iter().zip(&self.rot).map(|(x, y)| x * y).sum();
            m = m.min(a.norm_sqr());
        }
        let ms = m / self.scale;
        let mut s = 0.0;
        for (w, a) in self.weights.iter_mut().zip(&self.amps) {
            *w = (-self.beta * (a.norm_sqr() / self.scale - ms)).exp();
            s += *w;
        }
        let f = ms - s.ln() / self.beta;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for ((w, a), h) in self.weights.iter().zip(&self.amps).zip(self.h) {
            let c = 2.0 * w / (s * self.scale);
            let ac = a.conj();
            for ((g, x), r) in grad.iter_mut().zip(h).zip(&self.rot) {
                // d|a|²/dθ = −2 Im(conj(a) e^{jθ} h); negated for minimisation.
                *g += c * (ac * r * x).im;
            }
        }
        (-f, m)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One L-BFGS run with Armijo backtracking. Returns (iterations, converged).
fn lbfgs(obj: &mut Softmin<'_>, x: &mut [f64], max_iters: usize, memory: usize, trace: &mut Vec<f64>, best: &mut (f64, Vec<f64>)) -> (usize, bool) {
    let n = x.len();
    let mut g = alloc::vec![0.0; n];
    let (mut f, m) = obj.eval(x, &mut g);
    record(best, trace, m, x);
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(memory);
    let mut d = alloc::vec![0.0; n];
    let mut alpha = alloc::vec![0.0; memory.max(1)];
    let mut xn = alloc::vec![0.0; n];
    let mut gn = alloc::vec![0.0; n];
    for it in 0..max_iters {
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if gmax < 1e-10 {
            return (it, true);
        }
        // Two-loop recursion.
        d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
        for (i, (s, y, rho)) in hist.iter().enumerate().rev() {
            alpha[i] = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= alpha[i] * yi);
        }
        let mut step = 1.0;
        if let Some((s, y, _)) = hist.last() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        } else {
            step = (0.5 / gmax).min(1.0e3);
        }
        for (i, (s, y, rho)) in hist.iter().enumerate() {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (alpha[i] - b) * si);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hist.clear();
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = -dot(&g, &g);
            step = (0.5 / gmax).min(1.0e3);
        }
        let mut accepted = None;
        for _ in 0..40 {
            xn.iter_mut().zip(x.iter()).zip(&d).for_each(|((a, b), c)| *a = b + step * c);
            let (fnew, mnew) = obj.eval(&xn, &mut gn);
            if fnew <= f + 1e-4 * step * slope {
                accepted = Some((fnew, mnew));
                break;
            }
            step *= 0.5;
        }
        let Some((fnew, mnew)) = accepted else {
            return (it + 1, true);
        };
        let s: Vec<f64> = xn.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if hist.len() == memory {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        x.copy_from_slice(&xn);
        g.copy_from_slice(&gn);
        let df = f - fnew;
        f = fnew;
        record(best, trace, mnew, x);
        if df.abs() <= 1e-13 * f.abs().max(1.0) {
            return (it + 1, true);
        }
    }
    (max_iters, false)
}

fn record(best: &mut (f64, Vec<f64>), trace: &mut Vec<f64>, m: f64, x: &[f64]) {
    if m > best.0 {
        best.0 = m;
        best.1.clear();
        best.1.extend_from_slice(x);
    }
    trace.push(best.0);
}

/// A polish sweep improving the minimum by less than this fraction ends
/// the polish as converged. Gains this small do not show in 6-digit output.
const POLISH_TOL: f64 = 1e-6;

/// Coordinate-wise ascent on the true minimum. Returns (sweeps, converged).
fn polish(p: &MaxMinProblem, x: &mut [f64], passes: usize, trace: &mut Vec<f64>) -> (usize, bool) {
    const GRID: usize = 36;
    let mut amps: Vec<Complex64> = p
        .channels
        .iter()
        .map(|h| h.iter().zip(x.iter()).map(|(c, &t)| c * Complex64::from_polar(1.0, t)).sum())
        .collect();
    let mut current = amps.iter().map(|a| a.norm_sqr()).fold(f64::INFINITY, f64::min);
    let mut rest = alloc::vec![Complex64::new(0.0, 0.0); amps.len()];
    for pass in 0..passes {
        let start = current;
        for n in 0..p.units {
            let rot = Complex64::from_polar(1.0, x[n]);
            for ((r, a), h) in rest.iter_mut().zip(&amps).zip(&p.channels) {
                *r = a - h[n] * rot;
            }
            let value = |t: f64| {
                let e = Complex64::from_polar(1.0, t);
                rest.iter()
                    .zip(&p.channels)
                    .map(|(r, h)| (r + h[n] * e).norm_sqr())
                    .fold(f64::INFINITY, f64::min)
            };
            let h = 2.0 * PI / GRID as f64;
            let (mut bt, mut bv) = (x[n], current);
            for i in 0..GRID {
                let t = x[n] + i as f64 * h;
                let v = value(t);
                if v > bv {
                    bt = t;
                    bv = v;
                }
            }
            let (gt, gv) = golden_max(value, bt - h, bt + h, 40);
            if gv > bv {
                bt = gt;
                bv = gv;
            }
            if bv > current {
                x[n] = wrap_angle(bt);
                let e = Complex64::from_polar(1.0, x[n]);
                for ((a, r), h) in amps.iter_mut().zip(&rest).zip(&p.channels) {
                    *a = r + h[n] * e;
                }
                current = amps.iter().map(|a| a.norm_sqr()).fold(f64::INFINITY, f64::min);
            }
        }
        let prev = trace.last().copied().unwrap_or(f64::NEG_INFINITY);
        trace.push(prev.max(current));
        if current - start <= POLISH_TOL * current.abs() {
            return (pass + 1, true);
        }
    }
    (passes, false)
}

/// Runs restart `restart` of the multi-start solver.
///
/// Restart 0 starts from [`MaxMinProblem::warm_start`]; restart `i > 0`
/// draws uniform phases from ChaCha8 seeded with `seed` on stream `i`.
pub fn solve_restart(problem: &MaxMinProblem, config: &SolverConfig, restart: usize) -> RestartOutcome {
    let mut x = if restart == 0 {
        problem.warm_start()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(restart as u64);
        (0..problem.units).map(|_| rng.gen_range(0.0..2.0 * PI)).collect()
    };
    let mut trace = Vec::new();
    let mut best = (f64::NEG_INFINITY, x.clone());
    let mut iterations = 0;
    let mut obj = Softmin::new(problem);
    if problem.targets() > 1 {
        for &beta in &config.temperatures {
            let m = problem.min_power(&x);
            obj.scale = if m > 0.0 { m } else { 1.0 };
            obj.beta = beta;
            let (it, _) = lbfgs(&mut obj, &mut x, config.max_iters, config.memory, &mut trace, &mut best);
            iterations += it;
        }
    } else {
        // One target: the co-phased start is already optimal.
        obj.scale = problem.min_power(&x).max(f64::MIN_POSITIVE);
        let (it, _) = lbfgs(&mut obj, &mut x, config.max_iters, config.memory, &mut trace, &mut best);
        iterations += it;
    }
    let mut x = best.1;
    let (sweeps, converged) = polish(problem, &mut x, config.polish_passes, &mut trace);
    iterations += sweeps;
    x.iter_mut().for_each(|t| *t = wrap_angle(*t));
    let min_power = problem.min_power(&x);
    RestartOutcome { restart, phases: x, min_power, iterations, converged, trace }
}

/// Picks the restart with the highest minimum power, lowest index on ties.
pub fn merge_restarts(problem: &MaxMinProblem, config: &SolverConfig, mut outcomes: Vec<RestartOutcome>) -> Option<SolverResult> {
    outcomes.sort_by_key(|o| o.restart);
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let restarts = outcomes.len();
    let mut best: Option<RestartOutcome> = None;
    for o in outcomes {
        if best.as_ref().map_or(true, |b| o.min_power > b.min_power) {
            best = Some(o);
        }
    }
    let b = best?;
    let powers = problem.powers(&b.phases);
    Some(SolverResult {
        min_power: b.min_power,
        powers,
        phases: PhaseProfile::new(b.phases),
        iterations,
        restarts,
        seed: config.seed,
        best_restart: b.restart,
        converged: b.converged,
        trace: b.trace,
    })
}

/// Serial multi-start max-min solver.
pub fn solve_max_min(problem: &MaxMinProblem, config: &SolverConfig) -> SolverResult {
    let outcomes = (0..config.restarts.max(1)).map(|r| solve_restart(problem, config, r)).collect();
    merge_restarts(problem, config, outcomes).expect("at least one restart")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopStrategy {
    Unconfigured,
    SingleBeam,
    MultiBeam,
    /// Last board: co-phased at the receiver.
    Receiver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopDecision {
    pub strategy: HopStrategy,
    pub link: Option<LinkGeometry>,
    pub plan: Option<SamplingPlan>,
    pub solver: Option<SolverResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfiguration {
    pub profiles: Vec<PhaseProfile>,
    pub hops: Vec<HopDecision>,
}

impl ChainConfiguration {
    /// Every multi-beam hop's solver reported convergence.
    pub fn converged(&self) -> bool {
        self.hops.iter().all(|h| h.solver.as_ref().map_or(true, |s| s.converged))
    }
}

/// Configuration failure with the 1-based hop index.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("hop {hop}: {source}")]
pub struct ConfigureError {
    pub hop: usize,
    #[source]
    pub source: BeamError,
}

/// Configures every board in chain order with the serial solver.
pub fn configure_chain(scenario: &Scenario) -> Result<ChainConfiguration, ConfigureError> {
    configure_chain_with(scenario, solve_max_min)
}

/// As [`configure_chain`], with a caller-supplied max-min solver (for
/// example one that runs restarts in parallel).
pub fn configure_chain_with<S>(scenario: &Scenario, solve: S) -> Result<ChainConfiguration, ConfigureError>
where
    S: Fn(&MaxMinProblem, &SolverConfig) -> SolverResult,
{
    let chain = &scenario.chain;
    if chain.is_empty() {
        return Err(ConfigureError { hop: 0, source: FieldError::EmptyChain.into() });
    }
    let lambda = scenario.wavelength;
    let at = |hop: usize| move |e: BeamError| ConfigureError { hop, source: e };
    let mut incident = incident_field(&scenario.source, &chain[0].grid, lambda).map_err(|e| at(1)(e.into()))?;
    let mut profiles = Vec::with_capacity(chain.len());
    let mut hops = Vec::with_capacity(chain.len());

    for (i, node) in chain.iter().enumerate() {
        let hop = i + 1;
        let grid = &node.grid;
        let next = chain.get(i + 1);
        let (profile, decision) = match (next, scenario.mode) {
            (_, BeamMode::Unconfigured) => (
                PhaseProfile::zeros(grid.len()),
                HopDecision { strategy: HopStrategy::Unconfigured, link: None, plan: None, solver: None },
            ),
            (None, _) => (
                last_ris_phases(&incident, scenario.receiver, grid, lambda).map_err(at(hop))?,
                HopDecision { strategy: HopStrategy::Receiver, link: None, plan: None, solver: None },
            ),
            (Some(nx), mode) => {
                let link = if mode == BeamMode::MultiBeam {
                    Some(link_geometry(grid, &nx.grid, lambda).map_err(at(hop))?)
                } else {
                    None
                };
                match link {
                    Some(l) if l.primary.class.kind == Illumination::Partial => {
                        let plan = sampling_plan(&l, &nx.grid, scenario.lattice);
                        let problem = MaxMinProblem::from_incident(&incident, node.tau, grid, &plan.points, lambda)
                            .map_err(at(hop))?;
                        let res = solve(&problem, &scenario.solver);
                        (
                            res.phases.clone(),
                            HopDecision { strategy: HopStrategy::MultiBeam, link, plan: Some(plan), solver: Some(res) },
                        )
                    }
                    _ => {
                        let target = nx.grid.center();
                        let p = if i == 0 {
                            single_beam_phases(scenario.source.position, target, grid, lambda)
                        } else {
                            last_ris_phases(&incident, target, grid, lambda)
                        }
                        .map_err(at(hop))?;
                        (p, HopDecision { strategy: HopStrategy::SingleBeam, link, plan: None, solver: None })
                    }
                }
            }
        };
        let profile = match node.quantization_bits {
            Some(b) => quantize(&profile, b).map_err(at(hop))?,
            None => profile,
        };
        if let Some(nx) = next {
            incident = scatter_to_surface(&incident, &profile, node.tau, grid, &nx.grid, lambda)
                .map_err(|e| at(hop)(e.into()))?;
        }
        profiles.push(profile);
        hops.push(decision);
    }
    Ok(ChainConfiguration { profiles, hops })
}
