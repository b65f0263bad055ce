//! Link description shared by the field engine and the chain configurator.

use alloc::vec::Vec;

use crate::beam::SolverConfig;
use crate::field::SourceSpec;
use crate::geometry::{Point3, UnitGrid, Wavelength};

/// One board in the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RisNode {
    pub grid: UnitGrid,
    /// Isotropic unit scattering amplitude.
    pub tau: f64,
    /// When set, every computed profile for this board is snapped to `2^b` levels.
    pub quantization_bits: Option<u8>,
}

impl RisNode {
    pub fn new(grid: UnitGrid, tau: f64) -> Self {
        Self { grid, tau, quantization_bits: None }
    }

    pub fn with_bits(mut self, bits: Option<u8>) -> Self {
        self.quantization_bits = bits;
        self
    }
}

/// How each board's phases are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeamMode {
    /// Phase conjugation towards the next board's centre at every hop.
    SingleBeam,
    /// Illumination-aware multi-beam configuration for partially lit boards.
    #[default]
    MultiBeam,
    /// All phases zero.
    Unconfigured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub wavelength: Wavelength,
    pub source: SourceSpec,
    pub chain: Vec<RisNode>,
    pub receiver: Point3,
    pub mode: BeamMode,
    pub solver: SolverConfig,
    /// Place multi-beam targets on a 2-D lattice when both cuts are partial.
    pub lattice: bool,
}

impl Scenario {
    pub fn new(wavelength: Wavelength, source: SourceSpec, chain: Vec<RisNode>, receiver: Point3) -> Self {
        Self {
            wavelength,
            source,
            chain,
            receiver,
            mode: BeamMode::default(),
            solver: SolverConfig::default(),
            lattice: true,
        }
    }

    pub fn with_mode(mut self, mode: BeamMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn hops(&self) -> usize {
        self.chain.len()
    }
}
