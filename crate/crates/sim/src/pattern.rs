//! Radiation-pattern cuts of a single board.

use ris_core::array::{
    cut_direction, pattern_cut, profile_pattern_cut, steering_phases, AfModel, PatternCut, SteeringSpec,
};
use ris_core::beam::{quantize, MaxMinProblem, SolverResult};
use ris_core::field::{incident_field, scatter_to_point};
use ris_core::geometry::{build_grid, to_cartesian};
use ris_core::{Complex64, Frame, PhaseProfile, Point3, SourceSpec, SphericalDirection};

use crate::error::SimError;
use crate::evaluate::parallel_solver;
use crate::output::{line_plot_svg, Cell, Series, Table};
use crate::schema::{ModelName, PatternFile};

pub struct PatternOutcome {
    pub table: Table,
    pub af: PatternCut,
    pub field: Option<PatternCut>,
    pub phases: PhaseProfile,
    /// Present for multi-beam profiles.
    pub solver: Option<SolverResult>,
}

fn db(x: f64) -> f64 {
    20.0 * x.max(1e-300).log10()
}

fn deg_dir(v: [f64; 2]) -> SphericalDirection {
    SphericalDirection::from_degrees(v[0], v[1])
}

/// Far-field max-min profile with equal worst-case gain towards every
/// signed in-cut angle in `beams`.
fn multi_beam_profile(spec: &SteeringSpec, beams: &[f64], phi: f64, file: &PatternFile) -> Result<SolverResult, SimError> {
    let k = spec.lambda.wavenumber();
    let r1 = spec.incident.unit_vector();
    let channels: Vec<Vec<Complex64>> = beams
        .iter()
        .map(|&t| {
            let s = r1 + cut_direction(t.to_radians(), phi).unit_vector();
            (0..spec.units()).map(|n| Complex64::from_polar(1.0, k * s.dot(spec.unit_offset(n)))).collect()
        })
        .collect();
    let problem = MaxMinProblem::new(channels).map_err(SimError::infeasible)?;
    let config = file.solver.config().expect("validated");
    Ok(parallel_solver(&problem, &config))
}

pub fn pattern(file: &PatternFile, name: &str) -> Result<PatternOutcome, SimError> {
    let lambda = file.validate().map_err(|e| e.into_sim(name))?;
    let a = &file.array;
    let c = &file.pattern;
    let spacing = a.spacing_m.unwrap_or(lambda.half());
    let phi = c.phi_deg.to_radians();
    let reflect = c.steer_deg.map_or(SphericalDirection::new(0.0, 0.0), deg_dir);
    let spec = SteeringSpec {
        incident: deg_dir(a.incident_deg),
        reflect,
        rows: a.rows,
        cols: a.cols,
        spacing,
        lambda,
        anchor: a.anchor.into(),
    };
    let (mut phases, solver) = match &c.beams_deg {
        Some(beams) => {
            let s = multi_beam_profile(&spec, beams, phi, file)?;
            (s.phases.clone(), Some(s))
        }
        None => (steering_phases(&spec), None),
    };
    if let Some(b) = a.bits {
        phases = quantize(&phases, b).map_err(SimError::infeasible)?;
    }
    let (from, to, step) = (c.from_deg.to_radians(), c.to_deg.to_radians(), c.step_deg.to_radians());
    // The closed-form models only describe the ideal steered profile.
    let af = if solver.is_none() && a.bits.is_none() {
        let model = match c.model {
            ModelName::Exact => AfModel::Exact,
            ModelName::Sinc => AfModel::Sinc,
        };
        pattern_cut(&spec, phi, from, to, step, model)
    } else {
        profile_pattern_cut(&spec, &phases, phi, from, to, step).map_err(SimError::infeasible)?
    };

    let field = match c.field_radius_m {
        Some(r) => {
            let grid = build_grid(a.rows, a.cols, spacing, Point3::ORIGIN, Frame::XY, a.anchor.into())
                .map_err(SimError::infeasible)?;
            let src = SourceSpec::isotropic(to_cartesian(Point3::ORIGIN, r, spec.incident, &Frame::XY), Complex64::new(1.0, 0.0));
            let inc = incident_field(&src, &grid, lambda).map_err(SimError::infeasible)?;
            let mut samples = Vec::with_capacity(af.samples.len());
            for &(t, _) in &af.samples {
                let p = to_cartesian(Point3::ORIGIN, r, cut_direction(t, phi), &Frame::XY);
                let e = scatter_to_point(&inc, &phases, 1.0, &grid, p, lambda).map_err(SimError::infeasible)?;
                samples.push((t, e.norm()));
            }
            let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
            if peak > 0.0 {
                samples.iter_mut().for_each(|s| s.1 /= peak);
            }
            Some(PatternCut { phi, samples })
        }
        None => None,
    };

    let mut header = vec!["theta_deg", "af_normalized", "af_db"];
    if field.is_some() {
        header.extend(["field_normalized", "field_db"]);
    }
    let mut table = Table::new(&header);
    for (i, &(t, m)) in af.samples.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.to_degrees().into(), m.into(), db(m).into()];
        if let Some(f) = &field {
            let v = f.samples[i].1;
            row.extend([v.into(), db(v).into()]);
        }
        table.push(row);
    }
    Ok(PatternOutcome { table, af, field, phases, solver })
}

/// Line plot of the dB columns.
pub fn pattern_svg(out: &PatternOutcome, title: &str) -> String {
    let to_db = |cut: &PatternCut| -> Vec<(f64, f64)> { cut.samples.iter().map(|&(t, m)| (t.to_degrees(), db(m))).collect() };
    let af = to_db(&out.af);
    let field = out.field.as_ref().map(to_db);
    let mut series = vec![Series { label: "array factor", points: &af }];
    if let Some(f) = &field {
        series.push(Series { label: "field engine", points: f });
    }
    line_plot_svg(title, &series, -40.0)
}
