//! Single-document commands: simulate, beam-opt, hpbw and deploy-opt.

use ris_core::aperture::{ris_fed_report, EfficiencyReport, SpilloverAperture};
use ris_core::array::{hpbw_closed_form, hpbw_numerical, SteeringSpec};
use ris_core::beam::{last_ris_phases, single_beam_phases, MaxMinProblem};
use ris_core::deploy::{optimal_distance, optimal_units, DeploymentProblem};
use ris_core::field::{incident_field, unit_weights};
use ris_core::geometry::build_grid;
use ris_core::{Anchor, Complex64, Frame, Point3, Scenario, SourceSpec, Wavelength};

use crate::error::{exit, Invalid, SimError};
use crate::evaluate::{evaluate, illumination_name, strategy_name, Evaluation, HOP_COLUMNS};
use crate::output::{codebook_table, phase_table, Cell, Table};
use crate::schema::{DeployFile, DeployTarget, ScenarioFile};

/// A named CSV next to the main table (codebooks, phase maps).
pub struct Attachment {
    pub name: String,
    pub table: Table,
}

pub struct SimulateOutcome {
    pub results: Table,
    pub attachments: Vec<Attachment>,
    pub evaluation: Evaluation,
}

impl SimulateOutcome {
    pub fn code(&self) -> i32 {
        if self.evaluation.converged() {
            exit::OK
        } else {
            exit::NOT_CONVERGED
        }
    }
}

fn load(file: &ScenarioFile, name: &str) -> Result<Scenario, SimError> {
    file.scenario().map_err(|e| e.into_sim(name))
}

/// Per-hop results plus phase and codebook attachments for every board.
pub fn simulate(file: &ScenarioFile, name: &str) -> Result<SimulateOutcome, SimError> {
    let scenario = load(file, name)?;
    let ev = evaluate(&scenario, file.tx_power_dbm)?;
    let mut header: Vec<String> = HOP_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.push("received_power_db".into());
    if file.tx_power_dbm.is_some() {
        header.push("received_power_dbm".into());
    }
    header.push("converged".into());
    let mut results = Table::new(&header);
    for h in &ev.hops {
        let mut row = h.cells();
        row.push(ev.received_db().into());
        if file.tx_power_dbm.is_some() {
            row.push(ev.received_dbm.into());
        }
        row.push(ev.converged().into());
        results.push(row);
    }
    Ok(SimulateOutcome { results, attachments: profile_attachments(&scenario, &ev), evaluation: ev })
}

fn profile_attachments(scenario: &Scenario, ev: &Evaluation) -> Vec<Attachment> {
    let mut out = Vec::new();
    for (i, (node, p)) in scenario.chain.iter().zip(&ev.configuration.profiles).enumerate() {
        let cols = node.grid.cols();
        out.push(Attachment { name: format!("phases_ris{}.csv", i + 1), table: phase_table(p, cols) });
        if let Some(levels) = p.levels() {
            out.push(Attachment { name: format!("codebook_ris{}.csv", i + 1), table: codebook_table(&levels, cols) });
        }
    }
    out
}

pub const BEAM_COLUMNS: [&str; 16] = [
    "hop",
    "strategy",
    "illumination",
    "eab_ratio",
    "z_primary",
    "z_transverse",
    "targets",
    "min_power_db",
    "centre_beam_min_power_db",
    "fairness_gain_db",
    "target_e_r",
    "iterations",
    "restarts",
    "best_restart",
    "seed",
    "converged",
];

/// Per-hop phase-configuration decisions. On multi-beam hops the achieved
/// worst target power is compared with a single beam aimed at the next
/// board's centre, evaluated on the same targets.
pub fn beam_opt(file: &ScenarioFile, name: &str) -> Result<SimulateOutcome, SimError> {
    let scenario = load(file, name)?;
    let ev = evaluate(&scenario, file.tx_power_dbm)?;
    let lambda = scenario.wavelength;
    let db = |x: f64| 10.0 * x.log10();
    let mut t = Table::new(&BEAM_COLUMNS);
    for (i, d) in ev.configuration.hops.iter().enumerate() {
        let node = &scenario.chain[i];
        let incident = &ev.field.incident[i];
        let mut row: Vec<Cell> = vec![(i + 1).into(), strategy_name(d.strategy).into()];
        let class = d.link.map(|l| l.primary.class);
        row.push(class.map(|c| illumination_name(c.kind)).into());
        row.push(class.map(|c| c.eab.value).into());
        match (&d.plan, scenario.chain.get(i + 1)) {
            (Some(plan), Some(next)) => {
                let fail = |e: ris_core::beam::BeamError| SimError::Infeasible(format!("hop {}: {e}", i + 1));
                let problem =
                    MaxMinProblem::from_incident(incident, node.tau, &node.grid, &plan.points, lambda).map_err(fail)?;
                let centre = next.grid.center();
                let baseline = if i == 0 {
                    single_beam_phases(scenario.source.position, centre, &node.grid, lambda)
                } else {
                    last_ris_phases(incident, centre, &node.grid, lambda)
                }
                .map_err(fail)?;
                let achieved = problem.min_power(ev.configuration.profiles[i].omegas());
                let base = problem.min_power(baseline.omegas());
                row.extend([
                    plan.z_primary.into(),
                    plan.z_transverse.into(),
                    plan.len().into(),
                    db(achieved).into(),
                    db(base).into(),
                    (db(achieved) - db(base)).into(),
                ]);
            }
            _ => row.extend((0..6).map(|_| Cell::Empty)),
        }
        let e_r = ev.hops.get(i + 1).map(|h| h.efficiency.e_r);
        row.push(e_r.into());
        match &d.solver {
            Some(s) => row.extend([
                s.iterations.into(),
                s.restarts.into(),
                s.best_restart.into(),
                Cell::Int(s.seed as i64),
                s.converged.into(),
            ]),
            None => row.extend((0..5).map(|_| Cell::Empty)),
        }
        t.push(row);
    }
    Ok(SimulateOutcome { results: t, attachments: profile_attachments(&scenario, &ev), evaluation: ev })
}

/// Closed-form and measured beamwidth of a linear array.
pub fn hpbw(units: usize, spacing: Option<f64>, theta2_deg: f64, freq_hz: f64) -> Result<(Table, i32), SimError> {
    let bad = |key: &str, msg: String| SimError::Parse { file: "command line".into(), at: key.into(), message: msg };
    let lambda = Wavelength::from_frequency(freq_hz).map_err(|e| bad("--freq", e.to_string()))?;
    let d = spacing.unwrap_or(lambda.half());
    if !(d > 0.0 && d.is_finite()) {
        return Err(bad("--spacing", format!("must be positive (got {d})")));
    }
    if !(theta2_deg.abs() < 90.0) {
        return Err(bad("--theta2", "must be inside (-90, 90)".into()));
    }
    let t2 = theta2_deg.to_radians();
    let closed = hpbw_closed_form(units, d, lambda, t2).map_err(|e| bad("--units", e.to_string()))?;
    let measured = hpbw_numerical(&SteeringSpec::linear(units, d, lambda, t2), 0.0).map_err(SimError::infeasible)?;
    let mut t = Table::new(&[
        "units",
        "spacing_m",
        "theta2_deg",
        "closed_form_deg",
        "numerical_deg",
        "gap_deg",
        "lower_deg",
        "upper_deg",
        "edge_clamped",
    ]);
    t.push(vec![
        units.into(),
        d.into(),
        theta2_deg.into(),
        closed.width.to_degrees().into(),
        measured.width.to_degrees().into(),
        (measured.width - closed.width).to_degrees().into(),
        measured.lower.to_degrees().into(),
        measured.upper.to_degrees().into(),
        closed.edge_clamped.into(),
    ]);
    let code = if closed.edge_clamped { exit::INFEASIBLE } else { exit::OK };
    Ok((t, code))
}

/// Table II style link: `feed_units²` board at the origin facing `+z` fed by
/// an isotropic source, conjugated towards a `receiving_units²` board
/// `distance` away at elevation `theta_s`, tilted to see the feed at `alpha`.
pub fn predicted_efficiency(
    source: Point3,
    feed_units: usize,
    receiving_units: usize,
    spacing: f64,
    distance: f64,
    alpha: f64,
    theta_s: f64,
    lambda: Wavelength,
) -> Result<EfficiencyReport, SimError> {
    let feed = build_grid(feed_units, feed_units, spacing, Point3::ORIGIN, Frame::XY, Anchor::Center)
        .map_err(SimError::infeasible)?;
    let centre = Point3::new(theta_s.sin(), 0.0, theta_s.cos()) * distance;
    let tilt = theta_s - alpha;
    let frame = Frame::new(Point3::new(-tilt.sin(), 0.0, -tilt.cos()), Point3::new(tilt.cos(), 0.0, -tilt.sin()))
        .map_err(SimError::infeasible)?;
    let receiving =
        build_grid(receiving_units, receiving_units, spacing, centre, frame, Anchor::Center).map_err(SimError::infeasible)?;
    let tx = SourceSpec::isotropic(source, Complex64::new(1.0, 0.0));
    let incident = incident_field(&tx, &feed, lambda).map_err(SimError::infeasible)?;
    let phases = single_beam_phases(source, centre, &feed, lambda).map_err(SimError::infeasible)?;
    let w = unit_weights(&incident, &phases, 1.0);
    let (report, _) =
        ris_fed_report(&w, &feed, &receiving, lambda, SpilloverAperture::ExactEdges).map_err(SimError::infeasible)?;
    Ok(report)
}

pub const DEPLOY_COLUMNS: [&str; 14] = [
    "decision",
    "value",
    "residual_m",
    "eab_ratio",
    "beamwidth_deg",
    "distance_m",
    "feed_units",
    "receiving_units",
    "e_r",
    "eps_s",
    "eps_ap",
    "gain_dbi",
    "fixed_point",
    "iterates",
];

pub fn deploy_opt(file: &DeployFile, name: &str) -> Result<Table, SimError> {
    let lambda = file.validate().map_err(|e: Invalid| e.into_sim(name))?;
    let d = &file.deploy;
    let spacing = d.spacing_m.unwrap_or(lambda.half());
    let (alpha, theta_s) = (d.alpha_deg.to_radians(), d.theta_s_deg.to_radians());
    let p = DeploymentProblem::new(alpha, theta_s, spacing, lambda);
    let source = Point3::new(d.source[0], d.source[1], d.source[2]);
    let mut t = Table::new(&DEPLOY_COLUMNS);
    match d.solve {
        DeployTarget::Distance => {
            let nf = d.feed_units.expect("validated");
            let nr = d.receiving_units.unwrap_or(nf);
            let s = optimal_distance(&p, nf, nr as f64 * spacing).map_err(SimError::infeasible)?;
            let e = predicted_efficiency(source, nf, nr, spacing, s.distance, alpha, theta_s, lambda)?;
            t.push(vec![
                "distance".into(),
                s.distance.into(),
                s.residual.into(),
                s.eab.into(),
                s.beamwidth.to_degrees().into(),
                s.distance.into(),
                nf.into(),
                nr.into(),
                e.e_r.into(),
                e.eps_s.into(),
                e.eps_ap.into(),
                e.gain_dbi.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
        }
        DeployTarget::Units => {
            let r = d.distance_m.expect("validated");
            let s = optimal_units(&p, r).map_err(SimError::infeasible)?;
            let e = predicted_efficiency(source, s.units, s.units, spacing, r, alpha, theta_s, lambda)?;
            let iterates: Vec<String> = s.iterates.iter().map(|n| n.to_string()).collect();
            t.push(vec![
                "units".into(),
                s.units.into(),
                s.residual.into(),
                s.eab.into(),
                s.beamwidth.to_degrees().into(),
                r.into(),
                s.units.into(),
                s.units.into(),
                e.e_r.into(),
                e.eps_s.into(),
                e.eps_ap.into(),
                e.gain_dbi.into(),
                s.fixed_point.into(),
                iterates.join(" ").into(),
            ]);
        }
    }
    Ok(t)
}
