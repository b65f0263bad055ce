//! Parameter sweeps over a scenario document.
//!
//! Each point rewrites the document (board origin or size) and goes through
//! the same path as a standalone run, so a row equals the corresponding
//! `simulate` row. Points run on the rayon pool; rows keep sweep order.

use rayon::prelude::*;

use ris_core::Point3;

use crate::error::{exit, Invalid, SimError};
use crate::evaluate::{evaluate, HOP_COLUMNS};
use crate::output::{Cell, Table};
use crate::schema::{ScenarioFile, SweepKind, SweepOutput, SweepSection};

pub struct SweepOutcome {
    pub table: Table,
    /// Exit code of the first failed row, else 4 if any row did not
    /// converge, else 0.
    pub code: i32,
}

fn p3(v: [f64; 3]) -> Point3 {
    Point3::new(v[0], v[1], v[2])
}

fn board_index(file: &ScenarioFile, sweep: &SweepSection) -> Result<usize, Invalid> {
    let k = sweep.board.unwrap_or(file.ris.len());
    if k == 0 || k > file.ris.len() {
        return Err(Invalid::new("sweep.board", format!("no board {k} in a chain of {}", file.ris.len())));
    }
    Ok(k - 1)
}

/// The document for one sweep value.
pub fn variant(file: &ScenarioFile, value: f64) -> Result<ScenarioFile, Invalid> {
    let sweep = file.sweep.as_ref().ok_or_else(|| Invalid::new("sweep", "missing [sweep] section"))?;
    let b = board_index(file, sweep)?;
    let mut out = file.clone();
    out.sweep = None;
    let lambda = file.scenario()?.wavelength;
    let ray_origin = || -> Result<Point3, Invalid> {
        Ok(match sweep.ray_origin {
            Some(o) => p3(o),
            None if b == 0 => p3(file.tx.position),
            None => file.ris[b - 1].grid(&format!("ris[{b}]"), lambda)?.center(),
        })
    };
    let centre = file.ris[b].grid(&format!("ris[{}]", b + 1), lambda)?.center();
    let target = match sweep.kind {
        SweepKind::Units => {
            let n = value as usize;
            let boards = sweep.boards.clone().unwrap_or_else(|| (1..=file.ris.len()).collect());
            for k in boards {
                let r = out
                    .ris
                    .get_mut(k.wrapping_sub(1))
                    .ok_or_else(|| Invalid::new("sweep.boards", format!("no board {k}")))?;
                r.rows = n;
                r.cols = n;
            }
            return Ok(out);
        }
        SweepKind::Position => {
            let d = sweep.direction.ok_or_else(|| Invalid::new("sweep.direction", "required for a position sweep"))?;
            ray_origin()? + p3(d) * value
        }
        SweepKind::Distance => {
            let o = ray_origin()?;
            let dir = (centre - o)
                .normalized()
                .ok_or_else(|| Invalid::new("sweep.ray_origin", "coincides with the board centre"))?;
            o + dir * value
        }
    };
    let shift = target - centre;
    let r = &mut out.ris[b];
    r.origin = [r.origin[0] + shift.x, r.origin[1] + shift.y, r.origin[2] + shift.z];
    Ok(out)
}

pub fn columns(file: &ScenarioFile) -> Vec<String> {
    let sweep = file.sweep.as_ref();
    let mut cols = vec!["index".to_string(), "value".to_string()];
    if sweep.map_or(true, |s| s.wants(SweepOutput::Efficiency)) {
        cols.extend(HOP_COLUMNS.iter().map(|s| s.to_string()));
    }
    if sweep.map_or(true, |s| s.wants(SweepOutput::Power)) {
        cols.push("received_power_db".into());
        if file.tx_power_dbm.is_some() {
            cols.push("received_power_dbm".into());
        }
    }
    cols.push("converged".into());
    cols.push("error".into());
    cols
}

pub fn run_sweep(file: &ScenarioFile, name: &str) -> Result<SweepOutcome, SimError> {
    let sweep = file.sweep.as_ref().ok_or_else(|| Invalid::new("sweep", "missing [sweep] section").into_sim(name))?;
    // Everything that can be checked up front is, before any computation.
    file.scenario().map_err(|e| e.into_sim(name))?;
    let values = sweep.points().map_err(|e| e.into_sim(name))?;
    let b = board_index(file, sweep).map_err(|e| e.into_sim(name))?;
    let want_eff = sweep.wants(SweepOutput::Efficiency);
    let want_pow = sweep.wants(SweepOutput::Power);
    let header = columns(file);
    let width = header.len();

    let rows: Vec<(Vec<Cell>, i32)> = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut row: Vec<Cell> = vec![i.into(), v.into()];
            let result = variant(file, v)
                .and_then(|f| f.scenario())
                .map_err(|e| SimError::Parse { file: name.to_string(), at: e.key, message: e.message })
                .and_then(|s| evaluate(&s, file.tx_power_dbm));
            match result {
                Ok(ev) => {
                    if want_eff {
                        row.extend(ev.hops[b].cells());
                    }
                    if want_pow {
                        row.push(ev.received_db().into());
                        if file.tx_power_dbm.is_some() {
                            row.push(ev.received_dbm.into());
                        }
                    }
                    row.push(ev.converged().into());
                    row.push(Cell::Empty);
                    let code = if ev.converged() { exit::OK } else { exit::NOT_CONVERGED };
                    (row, code)
                }
                Err(e) => {
                    while row.len() < width - 1 {
                        row.push(Cell::Empty);
                    }
                    let code = e.exit_code();
                    row.push(e.to_string().into());
                    (row, code)
                }
            }
        })
        .collect();

    let mut table = Table::new(&header);
    let severity = |c: i32| match c {
        exit::OK => 0,
        exit::NOT_CONVERGED => 1,
        _ => 2,
    };
    let mut code = exit::OK;
    for (row, c) in rows {
        table.push(row);
        if severity(c) > severity(code) {
            code = c;
        }
    }
    Ok(SweepOutcome { table, code })
}
