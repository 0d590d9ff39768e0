//! CSV tables. Floats use `{:.16e}`, i.e. 17 significant digits, so every
//! value round-trips exactly.

use std::io::{self, Write};

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::function::Interval;
use crate::transform::NonlocalMap;

pub const TRAJECTORY_HEADER: &str = "t,x,xdot,tau,q,qdot_tau,energy,residual";
pub const MAP_TABLE_HEADER: &str = "x,q,qprime,f,g";

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_row<W: Write>(out: &mut W, values: &[f64]) -> io::Result<()> {
    let row: Vec<String> = values.iter().map(|v| fmt_float(*v)).collect();
    writeln!(out, "{}", row.join(","))
}

pub fn write_trajectory_csv<W: Write>(out: &mut W, traj: &Trajectory) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        write_row(out, &[s.t, s.x, s.xdot, s.tau, s.q, s.qdot_tau, s.energy, s.residual])?;
    }
    Ok(())
}

/// Samples of `(x, q, q', f, g)` at `count` uniform points of `window`.
pub fn map_table(map: &NonlocalMap, window: Interval, count: usize) -> Result<Vec<[f64; 5]>> {
    if count < 2 {
        return Err(crate::error::PdmError::invalid("count", "need at least 2 points"));
    }
    let w = window.intersect(&map.domain());
    if w.is_empty() || !w.lo.is_finite() || !w.hi.is_finite() {
        return Err(crate::error::PdmError::EmptyDomain);
    }
    Ok((0..count)
        .map(|i| {
            let x = w.lo + (w.hi - w.lo) * i as f64 / (count - 1) as f64;
            [x, map.q.value(x), map.q.derivative(x), map.f.value(x), map.g.value(x)]
        })
        .collect())
}

pub fn write_map_table_csv<W: Write>(out: &mut W, rows: &[[f64; 5]]) -> io::Result<()> {
    writeln!(out, "{MAP_TABLE_HEADER}")?;
    for r in rows {
        write_row(out, r)?;
    }
    Ok(())
}
