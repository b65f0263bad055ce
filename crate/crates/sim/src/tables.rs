//! Reproduction of the two published tables, with difference columns
//! against the printed values.

use rayon::prelude::*;

use ris_core::array::{hpbw_closed_form, hpbw_numerical, SteeringSpec};
use ris_core::geometry::build_grid;
use ris_core::{Anchor, BeamMode, Complex64, Frame, Point3, RisNode, Scenario, SourceSpec, Wavelength};

use crate::error::SimError;
use crate::evaluate::{evaluate, point_label, HopReport};
use crate::output::Table;

pub const FREQUENCY_HZ: f64 = 3.4e9;

/// Printed beamwidth row of a linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamwidthRow {
    pub units: usize,
    pub theta2_deg: f64,
    pub closed_deg: f64,
    pub measured_deg: f64,
}

const fn bw(units: usize, theta2_deg: f64, closed_deg: f64, measured_deg: f64) -> BeamwidthRow {
    BeamwidthRow { units, theta2_deg, closed_deg, measured_deg }
}

/// Half-power beamwidths, λ/2 spacing at 3.4 GHz.
pub const TABLE1: [BeamwidthRow; 13] = [
    bw(8, 30.0, 14.73, 14.84),
    bw(8, 45.0, 18.25, 18.38),
    bw(8, 60.0, 28.56, 28.85),
    bw(16, 30.0, 7.33, 7.2),
    bw(16, 45.0, 9.01, 9.02),
    bw(16, 60.0, 12.97, 12.99),
    bw(32, 30.0, 3.66, 3.67),
    bw(32, 45.0, 4.49, 4.49),
    bw(32, 60.0, 6.38, 6.38),
    bw(64, 30.0, 1.83, 1.83),
    bw(64, 45.0, 2.24, 2.24),
    bw(64, 60.0, 3.18, 3.18),
    bw(64, 75.0, 6.26, 6.27),
];

/// Printed efficiency row: second board at `(t, 0, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyRow {
    pub t: f64,
    pub eab: f64,
    pub eps_ap: f64,
    pub gain_dbi: f64,
}

const fn eff(t: f64, eab: f64, eps_ap: f64, gain_dbi: f64) -> EfficiencyRow {
    EfficiencyRow { t, eab, eps_ap, gain_dbi }
}

/// Aperture efficiency of a 32×32 board fed by a 32×32 board at the origin.
pub const TABLE2: [EfficiencyRow; 11] = [
    eff(5.0, 1.8023, 0.5097, 32.16),
    eff(6.0, 1.5019, 0.5409, 32.41),
    eff(7.0, 1.2874, 0.5598, 32.56),
    eff(8.0, 1.1264, 0.5902, 32.79),
    eff(9.0, 1.0013, 0.6086, 32.93),
    eff(10.0, 0.9011, 0.6019, 32.88),
    eff(11.0, 0.8192, 0.5842, 32.75),
    eff(13.0, 0.6932, 0.5346, 32.36),
    eff(15.0, 0.6008, 0.4828, 31.92),
    eff(17.0, 0.5301, 0.4367, 31.48),
    eff(19.0, 0.4743, 0.3959, 31.06),
];

pub fn lambda() -> Wavelength {
    Wavelength::from_frequency(FREQUENCY_HZ).expect("positive frequency")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamwidthResult {
    pub row: BeamwidthRow,
    pub closed_deg: f64,
    pub measured_deg: f64,
}

pub fn table1_results() -> Result<Vec<BeamwidthResult>, SimError> {
    let l = lambda();
    TABLE1
        .iter()
        .map(|&row| {
            let t2 = row.theta2_deg.to_radians();
            let closed = hpbw_closed_form(row.units, l.half(), l, t2).map_err(SimError::infeasible)?;
            let measured =
                hpbw_numerical(&SteeringSpec::linear(row.units, l.half(), l, t2), 0.0).map_err(SimError::infeasible)?;
            Ok(BeamwidthResult { row, closed_deg: closed.width.to_degrees(), measured_deg: measured.width.to_degrees() })
        })
        .collect()
}

pub fn table1() -> Result<Table, SimError> {
    let mut t = Table::new(&[
        "units",
        "theta2_deg",
        "closed_form_deg",
        "numerical_deg",
        "gap_deg",
        "published_closed_form_deg",
        "published_measured_deg",
        "published_gap_deg",
        "diff_closed_form_deg",
        "diff_numerical_deg",
    ]);
    for r in table1_results()? {
        t.push(vec![
            r.row.units.into(),
            r.row.theta2_deg.into(),
            r.closed_deg.into(),
            r.measured_deg.into(),
            (r.measured_deg - r.closed_deg).into(),
            r.row.closed_deg.into(),
            r.row.measured_deg.into(),
            (r.row.measured_deg - r.row.closed_deg).into(),
            (r.closed_deg - r.row.closed_deg).into(),
            (r.measured_deg - r.row.measured_deg).into(),
        ]);
    }
    Ok(t)
}

/// Isotropic source at `(0, 0, 3)`, board 1 (32×32) at the origin facing up,
/// board 2 (32×32) centred at `(t, 0, t)` facing down, single beam towards
/// board 2's centre, receiver under board 2.
pub fn table2_scenario(t: f64) -> Scenario {
    let l = lambda();
    let g1 = build_grid(32, 32, l.half(), Point3::ORIGIN, Frame::XY, Anchor::Center).expect("valid grid");
    let g2 = build_grid(32, 32, l.half(), Point3::new(t, 0.0, t), Frame::XY_DOWN, Anchor::Center).expect("valid grid");
    let tx = SourceSpec::isotropic(Point3::new(0.0, 0.0, 3.0), Complex64::new(1.0, 0.0));
    Scenario::new(l, tx, vec![RisNode::new(g1, 1.0), RisNode::new(g2, 1.0)], Point3::new(t, 0.0, 0.0))
        .with_mode(BeamMode::SingleBeam)
}

/// Measured report for the second board at every printed position.
pub fn table2_results() -> Result<Vec<(EfficiencyRow, HopReport)>, SimError> {
    TABLE2
        .par_iter()
        .map(|&row| {
            let ev = evaluate(&table2_scenario(row.t), None)?;
            Ok((row, ev.hops[1].clone()))
        })
        .collect()
}

pub fn table2() -> Result<Table, SimError> {
    let mut t = Table::new(&[
        "position",
        "distance_m",
        "eab_ratio",
        "e_r",
        "eps_s",
        "eps_ap",
        "gain_dbi",
        "published_eab_ratio",
        "published_eps_ap",
        "published_gain_dbi",
        "diff_eab_ratio",
        "diff_eps_ap",
        "diff_gain_dbi",
    ]);
    for (row, h) in table2_results()? {
        let e = &h.efficiency;
        let eab = h.eab.ok_or_else(|| SimError::Infeasible(format!("no beamwidth for (t={})", row.t)))?;
        t.push(vec![
            point_label(Point3::new(row.t, 0.0, row.t)).into(),
            h.distance.into(),
            eab.into(),
            e.e_r.into(),
            e.eps_s.into(),
            e.eps_ap.into(),
            e.gain_dbi.into(),
            row.eab.into(),
            row.eps_ap.into(),
            row.gain_dbi.into(),
            (eab - row.eab).into(),
            (e.eps_ap - row.eps_ap).into(),
            (e.gain_dbi - row.gain_dbi).into(),
        ]);
    }
    Ok(t)
}
