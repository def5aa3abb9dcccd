//! CSV and JSON exports. Every float is written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{RunOutput, TimePointReport};
use crate::error::{Error, Result};
use crate::functionals::Direction;
use crate::ingest::{write_snapshots, SnapshotFormat};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `time_s,heat_pev,probability`. Reverse rows are keyed by the reverse-path
/// heat.
pub fn heat_csv(points: &[TimePointReport], direction: Direction) -> String {
    let mut out = String::from("time_s,heat_pev,probability\n");
    for tp in points {
        let h = match direction {
            Direction::Forward => &tp.forward,
            Direction::Reverse => &tp.reverse,
        };
        for (q, p) in h.support().iter().zip(&h.masses) {
            writeln!(out, "{},{},{}", num(tp.time_s), num(*q), num(*p)).expect("string write");
        }
    }
    out
}

pub fn detailed_csv(points: &[TimePointReport]) -> String {
    let mut out = String::from("time_s,heat_pev,p_forward,p_reverse_of_minus_heat,ln_ratio,heat_times_delta_beta,psi\n");
    for tp in points {
        for r in &tp.detailed {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(tp.time_s),
                num(r.heat),
                num(r.p_forward),
                num(r.p_reverse),
                opt(r.ln_ratio),
                num(r.heat_delta_beta),
                opt(r.psi)
            )
            .expect("string write");
        }
    }
    out
}

pub fn integral_csv(points: &[TimePointReport]) -> String {
    let mut out = String::from("time_s,quantity,exp_average,mean,mc_exp_mean,mc_exp_std\n");
    for tp in points {
        for row in &tp.integral.rows {
            let stats = tp.stats(&format!("exp_{}", row.quantity));
            writeln!(
                out,
                "{},{},{},{},{},{}",
                num(tp.time_s),
                row.quantity,
                num(row.exp_average),
                num(row.mean),
                opt(stats.map(|s| s.mean)),
                opt(stats.map(|s| s.std))
            )
            .expect("string write");
        }
        writeln!(
            out,
            "{},heat_exchange_plus,{},,,",
            num(tp.time_s),
            num(tp.integral.heat_exchange_plus)
        )
        .expect("string write");
    }
    out
}

pub fn paths_csv(points: &[TimePointReport]) -> String {
    let mut out = String::from(
        "time_s,s,a0,b0,a1,b1,overlap_initial,overlap_evolved,overlap_reversed_start,overlap_reversed_end,overlap_retro_final,overlap_retro_initial,p_forward,p_reverse,p_retro,heat_pev\n",
    );
    for tp in points {
        for p in &tp.paths {
            let l = p.labels;
            let o = p.overlaps;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                num(tp.time_s),
                l.s,
                l.a0,
                l.b0,
                l.a1,
                l.b1,
                num(o.initial),
                num(o.evolved),
                num(o.reversed_start),
                num(o.reversed_end),
                num(o.retro_final),
                num(o.retro_initial),
                num(p.p_forward),
                num(p.p_reverse),
                num(p.p_retro),
                opt(p.heat_pev)
            )
            .expect("string write");
        }
    }
    out
}

/// Writes `heat_forward.csv`, `heat_reverse.csv`, `detailed_ft.csv`,
/// `integral_ft.csv`, `paths.csv`, `snapshots.json` and `summary.json`.
pub fn write_outputs(output: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let points = &output.report.time_points;
    let files = [
        ("heat_forward.csv", heat_csv(points, Direction::Forward)),
        ("heat_reverse.csv", heat_csv(points, Direction::Reverse)),
        ("detailed_ft.csv", detailed_csv(points)),
        ("integral_ft.csv", integral_csv(points)),
        ("paths.csv", paths_csv(points)),
        ("summary.json", output.report.to_json()),
    ];
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    write_snapshots(&output.snapshots, &dir.join("snapshots.json"), SnapshotFormat::Json)
}
