//! TOML documents read by the command line.
//!
//! Every document carries `schema_version = 1`. Angles are in degrees,
//! lengths in metres, frequencies in hertz. Board orientation is a normal
//! vector plus an in-plane `u_axis` hint (projected onto the board plane).

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use ris_core::beam::SolverConfig;
use ris_core::geometry::build_grid;
use ris_core::{
    Anchor, BeamMode, Complex64, Frame, Point3, RisNode, Scenario, SourceSpec, UnitGrid, Wavelength,
};

use crate::error::{Invalid, SimError};

pub const SCHEMA_VERSION: u32 = 1;

/// Reads and deserialises `path`, mapping TOML errors to line/column
/// diagnostics.
pub fn read_document<T: DeserializeOwned>(path: &Path) -> Result<T, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_document(&text, &path.display().to_string())
}

pub fn parse_document<T: DeserializeOwned>(text: &str, file: &str) -> Result<T, SimError> {
    toml::from_str(text).map_err(|e| {
        let at = match e.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                format!("line {line}, column {col}")
            }
            None => "document".to_string(),
        };
        SimError::Parse { file: file.to_string(), at, message: e.message().trim().to_string() }
    })
}

fn check_version(v: u32) -> Result<(), Invalid> {
    if v != SCHEMA_VERSION {
        return Err(Invalid::new("schema_version", format!("unsupported version {v} (expected {SCHEMA_VERSION})")));
    }
    Ok(())
}

fn positive(key: &str, x: f64) -> Result<f64, Invalid> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Invalid::new(key, format!("must be positive and finite (got {x})")))
    }
}

fn point(key: &str, v: [f64; 3]) -> Result<Point3, Invalid> {
    let p = Point3::new(v[0], v[1], v[2]);
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Invalid::new(key, "non-finite coordinate"))
    }
}

fn wavelength(f: f64) -> Result<Wavelength, Invalid> {
    let f = positive("frequency_hz", f)?;
    Wavelength::from_frequency(f).map_err(|e| Invalid::new("frequency_hz", e.to_string()))
}

fn default_true() -> bool {
    true
}

fn default_one() -> f64 {
    1.0
}

fn default_normal() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_u() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    SingleBeam,
    #[default]
    MultiBeam,
    Unconfigured,
}

impl From<ModeName> for BeamMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::SingleBeam => BeamMode::SingleBeam,
            ModeName::MultiBeam => BeamMode::MultiBeam,
            ModeName::Unconfigured => BeamMode::Unconfigured,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternName {
    #[default]
    Isotropic,
    CosQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorName {
    #[default]
    Center,
    FirstUnit,
}

impl From<AnchorName> for Anchor {
    fn from(a: AnchorName) -> Self {
        match a {
            AnchorName::Center => Anchor::Center,
            AnchorName::FirstUnit => Anchor::FirstUnit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxSection {
    pub position: [f64; 3],
    /// Field magnitude at 1 m on boresight.
    #[serde(default = "default_one")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase_deg: f64,
    #[serde(default)]
    pub pattern: PatternName,
    /// Field exponent of a `cos-q` pattern.
    pub q: Option<f64>,
    /// Defaults to the direction of the first board's centre.
    pub boresight: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisSection {
    pub rows: usize,
    pub cols: usize,
    /// Defaults to half a wavelength.
    pub spacing_m: Option<f64>,
    /// World position of the anchor point.
    pub origin: [f64; 3],
    #[serde(default)]
    pub anchor: AnchorName,
    #[serde(default = "default_normal")]
    pub normal: [f64; 3],
    #[serde(default = "default_u")]
    pub u_axis: [f64; 3],
    #[serde(default = "default_one")]
    pub tau: f64,
    pub bits: Option<u8>,
}

impl RisSection {
    pub fn grid(&self, key: &str, lambda: Wavelength) -> Result<UnitGrid, Invalid> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Invalid::new(format!("{key}.rows"), "rows and cols must be at least 1"));
        }
        let spacing = match self.spacing_m {
            Some(d) => positive(&format!("{key}.spacing_m"), d)?,
            None => lambda.half(),
        };
        let frame = Frame::new(point(&format!("{key}.normal"), self.normal)?, point(&format!("{key}.u_axis"), self.u_axis)?)
            .map_err(|e| Invalid::new(format!("{key}.normal"), e.to_string()))?;
        let origin = point(&format!("{key}.origin"), self.origin)?;
        build_grid(self.rows, self.cols, spacing, origin, frame, self.anchor.into())
            .map_err(|e| Invalid::new(key, e.to_string()))
    }

    pub fn node(&self, key: &str, lambda: Wavelength) -> Result<RisNode, Invalid> {
        let grid = self.grid(key, lambda)?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Invalid::new(format!("{key}.tau"), "must be positive and finite"));
        }
        if let Some(b) = self.bits {
            if !(1..=16).contains(&b) {
                return Err(Invalid::new(format!("{key}.bits"), format!("must be in 1..=16 (got {b})")));
            }
        }
        Ok(RisNode::new(grid, self.tau).with_bits(self.bits))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RxSection {
    pub position: [f64; 3],
}

/// Optional overrides of the solver defaults.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub temperatures: Option<Vec<f64>>,
    pub polish_passes: Option<usize>,
    pub memory: Option<usize>,
}

impl SolverSection {
    pub fn config(&self) -> Result<SolverConfig, Invalid> {
        let mut c = SolverConfig::default();
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.restarts {
            if r == 0 {
                return Err(Invalid::new("solver.restarts", "must be at least 1"));
            }
            c.restarts = r;
        }
        if let Some(m) = self.max_iters {
            c.max_iters = m;
        }
        if let Some(t) = &self.temperatures {
            if t.is_empty() || t.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
                return Err(Invalid::new("solver.temperatures", "needs one or more positive values"));
            }
            c.temperatures = t.clone();
        }
        if let Some(p) = self.polish_passes {
            c.polish_passes = p;
        }
        if let Some(m) = self.memory {
            if m == 0 {
                return Err(Invalid::new("solver.memory", "must be at least 1"));
            }
            c.memory = m;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Board centre at `ray_origin + t · direction`.
    Position,
    /// Rows and columns of the listed boards set to `N`.
    Units,
    /// Board moved along the line from the previous board (or the source)
    /// through its current centre to the given distance.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOutput {
    Efficiency,
    Power,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: SweepKind,
    /// 1-based board index that is moved and reported; defaults to the last.
    pub board: Option<usize>,
    /// Boards resized by a `units` sweep; defaults to all.
    pub boards: Option<Vec<usize>>,
    pub values: Option<Vec<f64>>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,
    pub direction: Option<[f64; 3]>,
    /// Defaults to the previous board's centre, or the source for board 1.
    pub ray_origin: Option<[f64; 3]>,
    pub outputs: Option<Vec<SweepOutput>>,
}

impl SweepSection {
    /// Sweep values in order. Empty or malformed ranges are rejected.
    pub fn points(&self) -> Result<Vec<f64>, Invalid> {
        let pts = match (&self.values, self.from, self.to, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(s)) => {
                if !(s > 0.0 && s.is_finite() && a.is_finite() && b.is_finite()) {
                    return Err(Invalid::new("sweep.step", "must be positive with finite endpoints"));
                }
                let n = ((b - a) / s + 1e-9).floor();
                if n < 0.0 {
                    Vec::new()
                } else {
                    (0..=n as usize).map(|i| a + s * i as f64).collect()
                }
            }
            _ => return Err(Invalid::new("sweep", "give either `values` or all of `from`, `to`, `step`")),
        };
        if pts.is_empty() {
            return Err(Invalid::new("sweep", "empty range"));
        }
        if let Some(x) = pts.iter().find(|x| !x.is_finite()) {
            return Err(Invalid::new("sweep.values", format!("non-finite value {x}")));
        }
        if self.kind == SweepKind::Units {
            if let Some(x) = pts.iter().find(|x| x.fract() != 0.0 || **x < 1.0) {
                return Err(Invalid::new("sweep.values", format!("unit counts must be positive integers (got {x})")));
            }
        }
        if self.kind == SweepKind::Distance {
            if let Some(x) = pts.iter().find(|x| **x <= 0.0) {
                return Err(Invalid::new("sweep.values", format!("distances must be positive (got {x})")));
            }
        }
        Ok(pts)
    }

    pub fn wants(&self, o: SweepOutput) -> bool {
        self.outputs.as_ref().map_or(true, |v| v.contains(&o))
    }
}

/// A scenario document: one link, optionally a sweep over it.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub frequency_hz: f64,
    #[serde(default)]
    pub mode: ModeName,
    /// 2-D multi-beam targets when both cuts are partial.
    #[serde(default = "default_true")]
    pub lattice: bool,
    /// When present, received power is also reported in dBm.
    pub tx_power_dbm: Option<f64>,
    pub tx: TxSection,
    pub ris: Vec<RisSection>,
    pub rx: RxSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub sweep: Option<SweepSection>,
}

impl ScenarioFile {
    pub fn scenario(&self) -> Result<Scenario, Invalid> {
        check_version(self.schema_version)?;
        let lambda = wavelength(self.frequency_hz)?;
        if let Some(p) = self.tx_power_dbm {
            if !p.is_finite() {
                return Err(Invalid::new("tx_power_dbm", "must be finite"));
            }
        }
        if self.ris.is_empty() {
            return Err(Invalid::new("ris", "the chain needs at least one board"));
        }
        let chain = self
            .ris
            .iter()
            .enumerate()
            .map(|(i, r)| r.node(&format!("ris[{}]", i + 1), lambda))
            .collect::<Result<Vec<_>, _>>()?;

        let tx = &self.tx;
        let position = point("tx.position", tx.position)?;
        let amplitude = Complex64::from_polar(positive("tx.amplitude", tx.amplitude)?, tx.phase_deg.to_radians());
        let source = match tx.pattern {
            PatternName::Isotropic => SourceSpec::isotropic(position, amplitude),
            PatternName::CosQ => {
                let q = tx.q.ok_or_else(|| Invalid::new("tx.q", "required for the cos-q pattern"))?;
                if !(q >= 0.0 && q.is_finite()) {
                    return Err(Invalid::new("tx.q", "must be non-negative"));
                }
                let boresight = match tx.boresight {
                    Some(b) => point("tx.boresight", b)?,
                    None => chain[0].grid.center() - position,
                };
                let boresight = boresight
                    .normalized()
                    .ok_or_else(|| Invalid::new("tx.boresight", "must be a nonzero vector"))?;
                SourceSpec::horn(position, amplitude, q, boresight)
            }
        };
        let receiver = point("rx.position", self.rx.position)?;
        let mut s = Scenario::new(lambda, source, chain, receiver).with_mode(self.mode.into());
        s.solver = self.solver.config()?;
        s.lattice = self.lattice;
        Ok(s)
    }
}

/// A pattern-cut document.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternFile {
    pub schema_version: u32,
    pub frequency_hz: f64,
    pub array: ArraySection,
    pub pattern: CutSection,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    #[serde(default = "default_rows")]
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: Option<f64>,
    #[serde(default)]
    pub anchor: AnchorName,
    /// `[θ, φ]` of the incident direction.
    #[serde(default)]
    pub incident_deg: [f64; 2],
    pub bits: Option<u8>,
}

fn default_rows() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    #[default]
    Exact,
    Sinc,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutSection {
    #[serde(default)]
    pub phi_deg: f64,
    #[serde(default = "default_from")]
    pub from_deg: f64,
    #[serde(default = "default_to")]
    pub to_deg: f64,
    #[serde(default = "default_step")]
    pub step_deg: f64,
    #[serde(default)]
    pub model: ModelName,
    /// `[θ, φ]` of a single steered beam.
    pub steer_deg: Option<[f64; 2]>,
    /// Signed in-cut angles of max-min multi-beam targets.
    pub beams_deg: Option<Vec<f64>>,
    /// Adds a field-engine column with source and observer at this radius.
    pub field_radius_m: Option<f64>,
}

fn default_from() -> f64 {
    -90.0
}

fn default_to() -> f64 {
    90.0
}

fn default_step() -> f64 {
    0.1
}

impl PatternFile {
    pub fn validate(&self) -> Result<Wavelength, Invalid> {
        check_version(self.schema_version)?;
        let lambda = wavelength(self.frequency_hz)?;
        let a = &self.array;
        if a.rows == 0 || a.cols == 0 {
            return Err(Invalid::new("array.cols", "rows and cols must be at least 1"));
        }
        if let Some(d) = a.spacing_m {
            positive("array.spacing_m", d)?;
        }
        if let Some(b) = a.bits {
            if !(1..=16).contains(&b) {
                return Err(Invalid::new("array.bits", format!("must be in 1..=16 (got {b})")));
            }
        }
        let p = &self.pattern;
        if !(p.from_deg >= -90.0 && p.to_deg <= 90.0 && p.from_deg < p.to_deg) {
            return Err(Invalid::new("pattern.from_deg", "need -90 <= from_deg < to_deg <= 90"));
        }
        positive("pattern.step_deg", p.step_deg)?;
        match (&p.steer_deg, &p.beams_deg) {
            (Some(_), Some(_)) => return Err(Invalid::new("pattern", "give at most one of `steer_deg` and `beams_deg`")),
            (_, Some(b)) if b.is_empty() || b.iter().any(|t| t.abs() >= 90.0) => {
                return Err(Invalid::new("pattern.beams_deg", "needs one or more angles inside (-90, 90)"))
            }
            _ => {}
        }
        if let Some(r) = p.field_radius_m {
            positive("pattern.field_radius_m", r)?;
        }
        self.solver.config()?;
        Ok(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeployTarget {
    /// Optimal distance for a fixed receiving aperture.
    Distance,
    /// Optimal units per side for a fixed distance.
    Units,
}

/// A deployment document.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeployFile {
    pub schema_version: u32,
    pub frequency_hz: f64,
    pub deploy: DeploySection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploySection {
    pub solve: DeployTarget,
    pub alpha_deg: f64,
    pub theta_s_deg: f64,
    pub spacing_m: Option<f64>,
    /// Feed units along the cut (`distance`).
    pub feed_units: Option<usize>,
    /// Receiving units along the cut (`distance`); defaults to `feed_units`.
    pub receiving_units: Option<usize>,
    /// Board separation (`units`).
    pub distance_m: Option<f64>,
    /// Isotropic source feeding the first board, used for the predicted
    /// efficiency. The first board is at the origin facing `+z`.
    #[serde(default = "default_source")]
    pub source: [f64; 3],
}

fn default_source() -> [f64; 3] {
    [0.0, 0.0, 3.0]
}

impl DeployFile {
    pub fn validate(&self) -> Result<Wavelength, Invalid> {
        check_version(self.schema_version)?;
        let lambda = wavelength(self.frequency_hz)?;
        let d = &self.deploy;
        if !(0.0..90.0).contains(&d.alpha_deg) {
            return Err(Invalid::new("deploy.alpha_deg", "must be in [0, 90)"));
        }
        if !(0.0..90.0).contains(&d.theta_s_deg) {
            return Err(Invalid::new("deploy.theta_s_deg", "must be in [0, 90)"));
        }
        if let Some(s) = d.spacing_m {
            positive("deploy.spacing_m", s)?;
        }
        point("deploy.source", d.source)?;
        match d.solve {
            DeployTarget::Distance => {
                let n = d.feed_units.ok_or_else(|| Invalid::new("deploy.feed_units", "required when solving for distance"))?;
                if n < 2 {
                    return Err(Invalid::new("deploy.feed_units", "must be at least 2"));
                }
                if d.receiving_units == Some(0) {
                    return Err(Invalid::new("deploy.receiving_units", "must be at least 1"));
                }
            }
            DeployTarget::Units => {
                let r = d.distance_m.ok_or_else(|| Invalid::new("deploy.distance_m", "required when solving for units"))?;
                positive("deploy.distance_m", r)?;
            }
        }
        Ok(lambda)
    }
}
