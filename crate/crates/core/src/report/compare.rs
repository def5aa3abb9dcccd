use serde::{Deserialize, Serialize};

use super::FtReport;
use crate::error::{Error, Result};
use crate::functionals::HeatBin;

/// Largest time difference treated as the same grid point, in seconds.
pub const GRID_MATCH: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub time_s: f64,
    pub quantity: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `|a - b|`; infinite when only one side is defined.
    pub abs_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDiff {
    pub rows: Vec<DiffRow>,
    pub max_abs_diff: f64,
    /// Rows of `psi` where either run departs from one by more than the
    /// detailed tolerance.
    pub psi_departures: Vec<DiffRow>,
}

/// Quantity-by-quantity difference of two reports on the same time grid.
pub fn compare_runs(a: &FtReport, b: &FtReport) -> Result<ReportDiff> {
    let (ta, tb) = (a.times(), b.times());
    if ta.len() != tb.len() {
        return Err(Error::GridMismatch(format!("{} vs {} time points", ta.len(), tb.len())));
    }
    if let Some((x, y)) = ta.iter().zip(&tb).find(|(x, y)| (*x - *y).abs() > GRID_MATCH) {
        return Err(Error::GridMismatch(format!("t = {x:e} s vs t = {y:e} s")));
    }

    let mut rows = Vec::new();
    let mut psi_departures = Vec::new();
    let psi_tol = a.metadata.tolerances.detailed;
    for (pa, pb) in a.time_points.iter().zip(&b.time_points) {
        let t = pa.time_s;
        let row = |quantity: String, x: Option<f64>, y: Option<f64>| {
            let abs_diff = match (x, y) {
                (Some(x), Some(y)) => (x - y).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            DiffRow {
                time_s: t,
                quantity,
                a: x,
                b: y,
                abs_diff,
            }
        };
        for (ra, rb) in pa.integral.rows.iter().zip(&pb.integral.rows) {
            rows.push(row(format!("exp_{}", ra.quantity), Some(ra.exp_average), Some(rb.exp_average)));
            rows.push(row(format!("mean_{}", ra.quantity), Some(ra.mean), Some(rb.mean)));
        }
        rows.push(row("mean_heat".into(), Some(pa.integral.mean_heat), Some(pb.integral.mean_heat)));
        for bin in HeatBin::ALL {
            let (da, db) = (pa.detailed_record(bin), pb.detailed_record(bin));
            let q = da.heat;
            rows.push(row(format!("p_forward[{q:+.6}]"), Some(da.p_forward), Some(db.p_forward)));
            rows.push(row(format!("p_reverse[{q:+.6}]"), Some(da.p_reverse), Some(db.p_reverse)));
            rows.push(row(format!("ln_ratio[{q:+.6}]"), da.ln_ratio, db.ln_ratio));
            let psi = row(format!("psi[{q:+.6}]"), da.psi, db.psi);
            let departs = |p: Option<f64>| p.is_some_and(|p| (p - 1.0).abs() > psi_tol);
            if departs(da.psi) || departs(db.psi) {
                psi_departures.push(psi.clone());
            }
            rows.push(psi);
        }
    }
    let max_abs_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    Ok(ReportDiff {
        rows,
        max_abs_diff,
        psi_departures,
    })
}
