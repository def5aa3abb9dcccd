//! Run configuration, the per-time-point pipeline, verdicts and exports.

mod compare;
mod config;
mod export;

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compare::{compare_runs, DiffRow, ReportDiff};
pub use config::{AnalysisOptions, CheckTolerances, GridSpec, InputSpec, Mode, RunConfig};
pub use export::{detailed_csv, heat_csv, integral_csv, paths_csv, write_outputs};

use crate::dynamics::{build_exchange, certify_energy_conservation, evolve, propagator_at, unitarity_defect};
use crate::error::{Error, Result};
use crate::functionals::{
    assemble_heat_histogram, detailed_ft_ratio, effective_delta_beta, evaluate_paths, integral_ft_averages,
    DetailedFtRecord, Direction, FtQuantity, HeatBin, HeatHistogram, IntegralAverages, JointProbability, PathContext,
};
use crate::ingest::{load_snapshots, monte_carlo_uncertainty, QuantityStats, StateSnapshot, UncertaintySummary};
use crate::linalg::{ComplexMatrix, Subsystem};
use crate::states::{correlated_initial_state, total_local_hamiltonian, ThermalParameters};
use crate::trajectories::{assign_bases, PathLabels, PathOverlaps, PathTable, StateSource};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How the time-reversed process is built; recorded in every report.
pub const REVERSE_PROCESS: &str =
    "initial state rho^0 driven by U^dagger; reverse heat E_a0 - E_a1; retrodicted paths start from the rho(t) eigenvector paired with U|s>";

/// Failing-check categories. The discriminant is the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckCategory {
    IntegralFt = 2,
    SecondLaw = 3,
    DetailedFt = 4,
    Structural = 5,
    ExcludedMass = 6,
}

impl CheckCategory {
    /// Order in which categories decide the exit code.
    pub const PRIORITY: [CheckCategory; 5] = [
        CheckCategory::Structural,
        CheckCategory::ExcludedMass,
        CheckCategory::IntegralFt,
        CheckCategory::SecondLaw,
        CheckCategory::DetailedFt,
    ];

    pub fn exit_code(self) -> i32 {
        self as i32
    }
}

impl fmt::Display for CheckCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckCategory::IntegralFt => "integral_ft",
            CheckCategory::SecondLaw => "second_law",
            CheckCategory::DetailedFt => "detailed_ft",
            CheckCategory::Structural => "structural",
            CheckCategory::ExcludedMass => "excluded_mass",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub time_s: f64,
    pub category: CheckCategory,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Structural {
    pub unitarity_defect: f64,
    /// `max |[U, H_A + H_B]|`.
    pub energy_commutator: f64,
    pub min_eigenvalue_initial: f64,
    pub min_eigenvalue_final: f64,
    /// `1 - min_s |<s*|U|s>|^2`.
    pub pairing_deficit: f64,
    /// `max_s |P_s - P_s*|`.
    pub population_mismatch: f64,
    pub forward_total: f64,
    pub reverse_total: f64,
}

/// One row of `paths.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub labels: PathLabels,
    pub overlaps: PathOverlaps,
    pub p_forward: f64,
    pub p_reverse: f64,
    pub p_retro: f64,
    pub heat_pev: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimePointReport {
    pub time_s: f64,
    pub source: StateSource,
    pub structural: Structural,
    pub forward: HeatHistogram,
    pub reverse: HeatHistogram,
    pub detailed: Vec<DetailedFtRecord>,
    /// Slope of `ln[P_f(Q)/P_r(-Q)]` against `Q`, in 1/peV.
    pub effective_delta_beta: Option<f64>,
    pub integral: IntegralAverages,
    /// Monte-Carlo statistics for this time point, keyed without prefix.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub uncertainty: Vec<QuantityStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub paths: Vec<PathRow>,
}

impl TimePointReport {
    pub fn detailed_record(&self, bin: HeatBin) -> &DetailedFtRecord {
        &self.detailed[bin.index()]
    }

    pub fn stats(&self, name: &str) -> Option<&QuantityStats> {
        self.uncertainty.iter().find(|q| q.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub mode: Mode,
    pub thermal: ThermalParameters,
    pub level_spacing_pev: f64,
    pub delta_beta_inv_pev: f64,
    pub uncorrelated: bool,
    pub joint_probability: JointProbability,
    pub heat_snap_pev: f64,
    pub reverse_process: String,
    pub tolerances: CheckTolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintySummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtReport {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub time_points: Vec<TimePointReport>,
    pub passed: bool,
    pub failures: Vec<CheckFailure>,
    pub exit_code: i32,
}

impl FtReport {
    pub fn times(&self) -> Vec<f64> {
        self.time_points.iter().map(|p| p.time_s).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: FtReport = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema_version {}", report.schema_version)));
        }
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// A finished run: the report plus the states it analysed.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: FtReport,
    pub snapshots: Vec<StateSnapshot>,
}

/// Runs the full pipeline on one pair of states.
#[allow(clippy::too_many_arguments)]
pub fn analyze_time_point(
    params: &ThermalParameters,
    rho0: &ComplexMatrix,
    rho_t: &ComplexMatrix,
    u: &ComplexMatrix,
    time_s: f64,
    source: StateSource,
    joint: JointProbability,
    heat_tol: f64,
) -> Result<TimePointReport> {
    let h_a = params.hamiltonian(Subsystem::A);
    let h_b = params.hamiltonian(Subsystem::B);
    let h_total = total_local_hamiltonian(&h_a, &h_b);
    let energy_commutator = u.commutator(&h_total).max_abs();

    let ba = assign_bases(rho0, rho_t, u, &h_a, &h_b, source).map_err(|e| e.at(time_s, "assign_bases"))?;
    let table = PathTable::build(&ba, u);
    let ctx = PathContext::new(&ba, rho0, rho_t, params.delta_beta(), params.level_spacing(), joint, heat_tol)
        .map_err(|e| e.at(time_s, "path_context"))?;
    let functionals = evaluate_paths(&table, &ctx).map_err(|e| e.at(time_s, "functionals"))?;
    let forward = assemble_heat_histogram(&table, &ctx, Direction::Forward).map_err(|e| e.at(time_s, "histogram"))?;
    let reverse = assemble_heat_histogram(&table, &ctx, Direction::Reverse).map_err(|e| e.at(time_s, "histogram"))?;
    let detailed = detailed_ft_ratio(&forward, &reverse, params.delta_beta());
    let integral = integral_ft_averages(&table, &functionals, params.delta_beta());

    let paths = table
        .paths
        .iter()
        .map(|p| PathRow {
            labels: p.labels,
            overlaps: p.overlaps,
            p_forward: p.p_forward,
            p_reverse: p.p_reverse,
            p_retro: p.p_retro,
            heat_pev: ctx.heat(p.labels.a0, p.labels.a1).ok().map(|h| h.value),
        })
        .collect();

    Ok(TimePointReport {
        time_s,
        source,
        structural: Structural {
            unitarity_defect: unitarity_defect(u),
            energy_commutator,
            min_eigenvalue_initial: ba.global_initial.min_eigenvalue(),
            min_eigenvalue_final: ba.global_final.min_eigenvalue(),
            pairing_deficit: 1.0 - ba.pairing_overlaps.iter().copied().fold(f64::INFINITY, f64::min),
            population_mismatch: ba.max_population_mismatch(),
            forward_total: table.forward_total(),
            reverse_total: table.reverse_total(),
        },
        effective_delta_beta: effective_delta_beta(&detailed),
        forward,
        reverse,
        detailed,
        integral,
        uncertainty: Vec::new(),
        warnings: ba.warnings.iter().map(ToString::to_string).collect(),
        paths,
    })
}

/// Simulated states on the configured grid.
pub fn simulate_states(params: &ThermalParameters, times: &[f64]) -> Result<Vec<(StateSnapshot, ComplexMatrix)>> {
    let rho0 = correlated_initial_state(params)?;
    let coupling = build_exchange(params.coupling())?;
    let h_total = total_local_hamiltonian(&params.hamiltonian(Subsystem::A), &params.hamiltonian(Subsystem::B));
    times
        .par_iter()
        .map(|&t| {
            let u = propagator_at(&coupling, t).map_err(|e| e.at(t, "propagator"))?;
            certify_energy_conservation(&u, &h_total).map_err(|e| e.at(t, "energy_conservation"))?;
            let rho_t = evolve(&rho0, &u).map_err(|e| e.at(t, "evolve"))?;
            Ok((StateSnapshot::simulated(t, rho_t), u))
        })
        .collect()
}

fn analyze_snapshots(
    params: &ThermalParameters,
    rho0: &ComplexMatrix,
    states: &[(StateSnapshot, ComplexMatrix)],
    joint: JointProbability,
    heat_tol: f64,
) -> Result<Vec<TimePointReport>> {
    states
        .par_iter()
        .map(|(snap, u)| analyze_time_point(params, rho0, &snap.rho, u, snap.time, snap.source, joint, heat_tol))
        .collect()
}

fn propagators_for(params: &ThermalParameters, snapshots: Vec<StateSnapshot>) -> Result<Vec<(StateSnapshot, ComplexMatrix)>> {
    let coupling = build_exchange(params.coupling())?;
    snapshots
        .into_iter()
        .map(|s| {
            let u = propagator_at(&coupling, s.time).map_err(|e| e.at(s.time, "propagator"))?;
            Ok((s, u))
        })
        .collect()
}

fn initial_of(snapshots: &[StateSnapshot]) -> Result<ComplexMatrix> {
    match snapshots.first() {
        Some(s) if s.time == 0.0 => Ok(s.rho),
        Some(s) => Err(Error::param("snapshots", format!("first snapshot must be at t = 0, got {}", s.time))),
        None => Err(Error::param("snapshots", "no snapshots")),
    }
}

/// Named scalars tracked by the Monte-Carlo resampling of one time point.
fn tracked_quantities(tp: &TimePointReport) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for row in &tp.integral.rows {
        out.push((format!("exp_{}", row.quantity), row.exp_average));
        out.push((format!("mean_{}", row.quantity), row.mean));
    }
    for (bin, name) in [(HeatBin::Negative, "minus"), (HeatBin::Zero, "zero"), (HeatBin::Positive, "plus")] {
        let r = tp.detailed_record(bin);
        out.push((format!("p_forward_{name}"), r.p_forward));
        out.push((format!("p_reverse_{name}"), r.p_reverse));
        out.push((format!("ln_ratio_{name}"), r.ln_ratio.unwrap_or(f64::NAN)));
        out.push((format!("psi_{name}"), r.psi.unwrap_or(f64::NAN)));
    }
    out.push(("mean_heat".into(), tp.integral.mean_heat));
    out
}

/// Executes a configured run and, if `output_dir` is set, writes all exports.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let params = config.thermal;
    let joint = config.analysis.joint_probability;
    let heat_tol = config.analysis.heat_snap_pev;

    let (rho0, states, uncertainty) = match config.mode {
        Mode::Simulate => {
            let grid = config.grid.to_grid()?;
            let states = simulate_states(&params, grid.times())?;
            (correlated_initial_state(&params)?, states, None)
        }
        Mode::Analyze => {
            let input = config
                .input
                .as_ref()
                .ok_or_else(|| Error::param("input", "analyze mode needs [input] snapshots"))?;
            let snapshots = load_snapshots(&input.snapshots, input.resolved_format()?)?;
            let rho0 = initial_of(&snapshots)?;
            let uncertainty = if config.uncertainty.enabled_for(&snapshots) {
                let resample_tol = params.level_spacing() / 2.0;
                let summary = monte_carlo_uncertainty(&snapshots, &config.uncertainty, |perturbed| {
                    let rho0 = initial_of(perturbed)?;
                    let states = propagators_for(&params, perturbed.to_vec())?;
                    let tps = analyze_snapshots(&params, &rho0, &states, joint, resample_tol)?;
                    Ok(tps
                        .iter()
                        .enumerate()
                        .flat_map(|(i, tp)| {
                            tracked_quantities(tp).into_iter().map(move |(n, v)| (format!("t{i}.{n}"), v))
                        })
                        .collect())
                })?;
                Some(summary)
            } else {
                None
            };
            (rho0, propagators_for(&params, snapshots)?, uncertainty)
        }
    };

    let mut time_points = analyze_snapshots(&params, &rho0, &states, joint, heat_tol)?;
    if let Some(summary) = &uncertainty {
        for (i, tp) in time_points.iter_mut().enumerate() {
            let prefix = format!("t{i}.");
            tp.uncertainty = summary
                .quantities
                .iter()
                .filter_map(|q| {
                    q.name.strip_prefix(&prefix).map(|n| QuantityStats {
                        name: n.to_string(),
                        mean: q.mean,
                        std: q.std,
                    })
                })
                .collect();
        }
    }

    let failures = evaluate_checks(&time_points, &params, &config.tolerances);
    let exit_code = CheckCategory::PRIORITY
        .iter()
        .find(|c| failures.iter().any(|f| f.category == **c))
        .map_or(0, |c| c.exit_code());
    let report = FtReport {
        schema_version: REPORT_SCHEMA_VERSION,
        metadata: RunMetadata {
            mode: config.mode,
            thermal: params,
            level_spacing_pev: params.level_spacing(),
            delta_beta_inv_pev: params.delta_beta(),
            uncorrelated: params.is_uncorrelated(),
            joint_probability: joint,
            heat_snap_pev: heat_tol,
            reverse_process: REVERSE_PROCESS.into(),
            tolerances: config.tolerances.clone(),
            uncertainty,
        },
        time_points,
        passed: failures.is_empty(),
        failures,
        exit_code,
    };
    let output = RunOutput {
        report,
        snapshots: states.into_iter().map(|(s, _)| s).collect(),
    };
    if let Some(dir) = &config.output_dir {
        write_outputs(&output, dir)?;
    }
    Ok(output)
}

/// Acceptance band: the nominal tolerance, widened by the Monte-Carlo spread
/// when available.
fn band(tp: &TimePointReport, name: &str, base: f64, tol: &CheckTolerances) -> (f64, Option<f64>) {
    match tp.stats(name) {
        Some(s) if s.mean.is_finite() && s.std.is_finite() => (base + tol.sigma_multiplier * s.std, Some(s.mean)),
        _ => (base, None),
    }
}

/// Evaluates every fluctuation-theorem and structural check.
pub fn evaluate_checks(
    time_points: &[TimePointReport],
    params: &ThermalParameters,
    tol: &CheckTolerances,
) -> Vec<CheckFailure> {
    let mut out = Vec::new();
    for tp in time_points {
        let mut fail = |category, detail: String| {
            out.push(CheckFailure {
                time_s: tp.time_s,
                category,
                detail,
            })
        };
        let s = &tp.structural;
        for (name, value) in [
            ("unitarity_defect", s.unitarity_defect),
            ("energy_commutator", s.energy_commutator),
            ("forward_total - 1", (s.forward_total - 1.0).abs()),
            ("reverse_total - 1", (s.reverse_total - 1.0).abs()),
            ("negative eigenvalue of rho(t)", (-s.min_eigenvalue_final).max(0.0)),
        ] {
            if !(value <= tol.structural) {
                fail(CheckCategory::Structural, format!("{name} = {value:.3e}"));
            }
        }
        if !(tp.integral.excluded_mass <= tol.excluded_mass) {
            fail(
                CheckCategory::ExcludedMass,
                format!("excluded forward mass {:.3e}", tp.integral.excluded_mass),
            );
        }
        for row in &tp.integral.rows {
            if row.quantity == FtQuantity::HeatExchange && !params.is_uncorrelated() {
                continue;
            }
            let (width, mc_mean) = band(tp, &format!("exp_{}", row.quantity), tol.integral, tol);
            let value = mc_mean.unwrap_or(row.exp_average);
            if !((value - 1.0).abs() <= width) {
                fail(
                    CheckCategory::IntegralFt,
                    format!("<e^-{}> = {value:.12} (allowed |x - 1| <= {width:.3e})", row.quantity),
                );
            }
            if row.quantity == FtQuantity::HeatExchange {
                continue;
            }
            let (width, mc_mean) = band(tp, &format!("mean_{}", row.quantity), tol.jensen, tol);
            let mean = mc_mean.unwrap_or(row.mean);
            if !(mean >= -width) {
                fail(CheckCategory::SecondLaw, format!("<{}> = {mean:.3e} < 0", row.quantity));
            }
        }
        if params.is_uncorrelated() {
            for (bin, name) in [(HeatBin::Negative, "minus"), (HeatBin::Positive, "plus")] {
                let r = tp.detailed_record(bin);
                if !(r.p_forward > tol.excluded_mass && r.p_reverse > tol.excluded_mass) {
                    continue;
                }
                let Some(ln_ratio) = r.ln_ratio else { continue };
                let (width, mc_mean) = band(tp, &format!("ln_ratio_{name}"), tol.detailed, tol);
                let value = mc_mean.unwrap_or(ln_ratio);
                if !((value - r.heat_delta_beta).abs() <= width) {
                    fail(
                        CheckCategory::DetailedFt,
                        format!(
                            "ln[P_f/P_r] = {value:.12} vs Q dbeta = {:.12} at Q = {:.6} peV",
                            r.heat_delta_beta, r.heat
                        ),
                    );
                }
            }
        }
    }
    out
}
