//! Configure a chain, propagate it and measure every board.

use rayon::prelude::*;

use ris_core::aperture::{
    illumination_efficiency, inscribed_cone_angle, report_from, ris_fed_report, spillover_efficiency,
    EfficiencyReport, SpilloverAperture,
};
use ris_core::beam::{
    configure_chain_with, link_geometry, merge_restarts, solve_restart, ChainConfiguration, HopStrategy, Illumination,
    MaxMinProblem, SolverConfig, SolverResult,
};
use ris_core::field::{propagate_chain, unit_weights, ChainField};
use ris_core::{Point3, Scenario};

use crate::error::SimError;
use crate::output::Cell;

/// Max-min solver with restarts spread over the rayon pool. Merging is
/// the serial rule, so results do not depend on the thread count.
pub fn parallel_solver(problem: &MaxMinProblem, config: &SolverConfig) -> SolverResult {
    let outcomes = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|r| solve_restart(problem, config, r))
        .collect();
    merge_restarts(problem, config, outcomes).expect("at least one restart")
}

/// One board's row.
#[derive(Debug, Clone, PartialEq)]
pub struct HopReport {
    pub hop: usize,
    pub position: Point3,
    /// From the emitter (source or previous board centre).
    pub distance: f64,
    /// Only for board-fed boards with a computable beamwidth.
    pub eab: Option<f64>,
    pub illumination: Option<Illumination>,
    /// How this board's own phases were chosen.
    pub strategy: HopStrategy,
    /// Multi-beam targets used on this board's outgoing link.
    pub targets: usize,
    pub efficiency: EfficiencyReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub hops: Vec<HopReport>,
    /// `|E|²` at the receiver.
    pub received_power: f64,
    pub received_dbm: Option<f64>,
    pub configuration: ChainConfiguration,
    pub field: ChainField,
}

impl Evaluation {
    pub fn received_db(&self) -> f64 {
        10.0 * self.received_power.log10()
    }

    pub fn converged(&self) -> bool {
        self.configuration.converged()
    }
}

pub fn illumination_name(i: Illumination) -> &'static str {
    match i {
        Illumination::Partial => "partial",
        Illumination::Exact => "exact",
        Illumination::Over => "over",
    }
}

pub fn strategy_name(s: HopStrategy) -> &'static str {
    match s {
        HopStrategy::Unconfigured => "unconfigured",
        HopStrategy::SingleBeam => "single-beam",
        HopStrategy::MultiBeam => "multi-beam",
        HopStrategy::Receiver => "receiver",
    }
}

/// `(x;y;z)` with 6 significant digits.
pub fn point_label(p: Point3) -> String {
    use crate::output::sig6;
    format!("({};{};{})", sig6(p.x), sig6(p.y), sig6(p.z))
}

pub const HOP_COLUMNS: [&str; 11] = [
    "hop",
    "position",
    "distance_m",
    "eab_ratio",
    "e_r",
    "eps_s",
    "eps_ap",
    "gain_dbi",
    "illumination",
    "strategy",
    "targets",
];

impl HopReport {
    /// Cells in [`HOP_COLUMNS`] order.
    pub fn cells(&self) -> Vec<Cell> {
        let e = &self.efficiency;
        vec![
            self.hop.into(),
            point_label(self.position).into(),
            self.distance.into(),
            self.eab.into(),
            e.e_r.into(),
            e.eps_s.into(),
            e.eps_ap.into(),
            e.gain_dbi.into(),
            self.illumination.map(illumination_name).into(),
            strategy_name(self.strategy).into(),
            self.targets.into(),
        ]
    }
}

/// Runs the whole pipeline with the parallel solver.
pub fn evaluate(scenario: &Scenario, tx_power_dbm: Option<f64>) -> Result<Evaluation, SimError> {
    let configuration = configure_chain_with(scenario, parallel_solver).map_err(SimError::infeasible)?;
    let field = propagate_chain(scenario, &configuration.profiles).map_err(SimError::infeasible)?;
    let lambda = scenario.wavelength;
    let chain = &scenario.chain;

    let mut hops = Vec::with_capacity(chain.len());
    for (i, node) in chain.iter().enumerate() {
        let grid = &node.grid;
        let info = &field.hops[i];
        let fail = |e: ris_core::aperture::ApertureError| SimError::Infeasible(format!("hop {}: {e}", i + 1));
        let (efficiency, eab, illumination) = if i == 0 {
            let e_r = illumination_efficiency(&field.incident[0]).map_err(fail)?;
            let theta0 = inscribed_cone_angle(scenario.source.position, grid);
            let eps_s = spillover_efficiency(&scenario.source.pattern, theta0).map_err(fail)?;
            (report_from(e_r, eps_s, grid.aperture_area(), lambda).map_err(fail)?, None, None)
        } else {
            let prev = &chain[i - 1];
            let w = unit_weights(&field.incident[i - 1], &configuration.profiles[i - 1], prev.tau);
            let (report, _) =
                ris_fed_report(&w, &prev.grid, grid, lambda, SpilloverAperture::ExactEdges).map_err(fail)?;
            let class = link_geometry(&prev.grid, grid, lambda).ok().map(|l| l.primary.class);
            (report, class.map(|c| c.eab.value), class.map(|c| c.kind))
        };
        let decision = &configuration.hops[i];
        hops.push(HopReport {
            hop: i + 1,
            position: grid.center(),
            distance: info.distance_in,
            eab,
            illumination,
            strategy: decision.strategy,
            targets: decision.plan.as_ref().map_or(0, |p| p.len()),
            efficiency,
        });
    }
    let received_power = field.received_power();
    let amp2 = scenario.source.amplitude.norm_sqr();
    let received_dbm = tx_power_dbm.map(|p| p + 10.0 * (received_power / amp2).log10());
    Ok(Evaluation { hops, received_power, received_dbm, configuration, field })
}
