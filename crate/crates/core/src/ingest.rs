//! Loading reconstructed two-qubit states and Monte-Carlo error bars.
//!
//! JSON layout:
//!
//! ```json
//! {"schema_version": 1, "times": [0.0, 1e-4],
//!  "states": [[[[re, im], [re, im], [re, im], [re, im]], ...], ...],
//!  "uncertainties": [...]}
//! ```
//!
//! `uncertainties` is optional and has the shape of `states`, holding the
//! standard deviation of the real and imaginary parts of each entry. CSV files
//! have the header `t,row,col,re,im` and 16 rows per time.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, validate_density_matrix, ComplexMatrix};
use crate::tolerances;
use crate::trajectories::StateSource;

pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    Json,
    Csv,
}

impl SnapshotFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(SnapshotFormat::Json),
            "csv" => Some(SnapshotFormat::Csv),
            _ => None,
        }
    }
}

/// A change applied to a snapshot while loading it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Repair {
    Hermitized { deviation: f64 },
    TraceRenormalized { trace: f64 },
    PsdProjected { min_eigenvalue: f64 },
}

/// Per-entry standard deviations `(sd_re, sd_im)`, row-major.
pub type EntryUncertainty = [[(f64, f64); 4]; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct StateSnapshot {
    pub time: f64,
    pub rho: ComplexMatrix,
    pub source: StateSource,
    pub repairs: Vec<Repair>,
    pub uncertainty: Option<EntryUncertainty>,
}

impl StateSnapshot {
    pub fn simulated(time: f64, rho: ComplexMatrix) -> Self {
        Self {
            time,
            rho,
            source: StateSource::Simulated,
            repairs: Vec::new(),
            uncertainty: None,
        }
    }
}

/// Clips negative eigenvalues and renormalizes. Inputs whose smallest
/// eigenvalue is at least `-tol` are returned unchanged.
pub fn psd_project(rho: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let spectrum = hermitian_eig(&rho.hermitian_part())?;
    if spectrum.min_eigenvalue() >= -tol {
        return Ok(*rho);
    }
    let clipped: Vec<f64> = spectrum.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidState {
            violations: vec![crate::linalg::Violation::NegativeEigenvalue {
                min_eigenvalue: spectrum.min_eigenvalue(),
            }],
        });
    }
    let mut out = ComplexMatrix::zeros(rho.dim())?;
    for (l, v) in clipped.iter().zip(&spectrum.eigenvectors) {
        out = out + ComplexMatrix::outer(v)?.scale(Complex64::new(l / total, 0.0));
    }
    Ok(out.hermitian_part())
}

/// Hermitizes, renormalizes the trace, and projects onto the PSD cone.
/// Rejects states whose smallest eigenvalue is below `-tol_psd`.
pub fn repair_state(rho: &ComplexMatrix, index: usize, tol_psd: f64) -> Result<(ComplexMatrix, Vec<Repair>)> {
    let invalid = |violations| Error::InvalidSnapshot { index, violations };
    if !rho.is_finite() {
        return Err(invalid(vec![crate::linalg::Violation::NotFinite]));
    }
    let mut repairs = Vec::new();
    let mut m = *rho;
    let deviation = m.hermiticity_defect();
    if deviation > 0.0 {
        m = m.hermitian_part();
        repairs.push(Repair::Hermitized { deviation });
    }
    let trace = m.trace().re;
    if !(trace > 0.0) {
        return Err(invalid(vec![crate::linalg::Violation::TraceNotOne { trace }]));
    }
    if (trace - 1.0).abs() > 4.0 * f64::EPSILON {
        m = m.scale(Complex64::new(1.0 / trace, 0.0));
        repairs.push(Repair::TraceRenormalized { trace });
    }
    let min_eigenvalue = hermitian_eig(&m)?.min_eigenvalue();
    if min_eigenvalue < -tol_psd {
        return Err(invalid(vec![crate::linalg::Violation::NegativeEigenvalue { min_eigenvalue }]));
    }
    if min_eigenvalue < -tolerances::PSD_SIMULATION {
        m = psd_project(&m, tolerances::PSD_SIMULATION)?;
        repairs.push(Repair::PsdProjected { min_eigenvalue });
    }
    let validity = validate_density_matrix(&m, tolerances::PSD_SIMULATION);
    if !validity.is_valid() {
        return Err(invalid(validity.violations));
    }
    Ok((m, repairs))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<u32>,
    times: Vec<f64>,
    states: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uncertainties: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

fn nested_to_matrix(rows: &[Vec<[f64; 2]>], index: usize) -> Result<ComplexMatrix> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(Error::Parse(format!("state {index} is not a 4x4 array of [re, im] pairs")));
    }
    ComplexMatrix::from_fn(4, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]))
}

fn nested_to_uncertainty(rows: &[Vec<[f64; 2]>], index: usize) -> Result<EntryUncertainty> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(Error::Parse(format!("uncertainty {index} is not a 4x4 array")));
    }
    let mut out = [[(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let [re, im] = rows[i][j];
            if !(re >= 0.0 && im >= 0.0 && re.is_finite() && im.is_finite()) {
                return Err(Error::Parse(format!("uncertainty {index} entry ({i},{j}) must be finite and >= 0")));
            }
            out[i][j] = (re, im);
        }
    }
    Ok(out)
}

fn finish(raw: Vec<(f64, ComplexMatrix, Option<EntryUncertainty>)>, tol_psd: f64) -> Result<Vec<StateSnapshot>> {
    if raw.is_empty() {
        return Err(Error::Parse("no snapshots".into()));
    }
    let mut out = Vec::with_capacity(raw.len());
    for (index, (time, rho, uncertainty)) in raw.into_iter().enumerate() {
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::Parse(format!("snapshot {index} has invalid time {time}")));
        }
        let (rho, repairs) = repair_state(&rho, index, tol_psd)?;
        out.push(StateSnapshot {
            time,
            rho,
            source: StateSource::Measured,
            repairs,
            uncertainty,
        });
    }
    out.sort_by(|a, b| a.time.total_cmp(&b.time));
    if out.windows(2).any(|w| w[0].time == w[1].time) {
        return Err(Error::Parse("duplicate snapshot times".into()));
    }
    Ok(out)
}

pub fn parse_snapshots_json(text: &str, tol_psd: f64) -> Result<Vec<StateSnapshot>> {
    let file: SnapshotFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(v) = file.schema_version {
        if v != SNAPSHOT_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema_version {v}")));
        }
    }
    if file.times.len() != file.states.len() {
        return Err(Error::Parse(format!(
            "{} times but {} states",
            file.times.len(),
            file.states.len()
        )));
    }
    if let Some(u) = &file.uncertainties {
        if u.len() != file.states.len() {
            return Err(Error::Parse("uncertainties and states differ in length".into()));
        }
    }
    let mut raw = Vec::with_capacity(file.times.len());
    for (index, (t, state)) in file.times.iter().zip(&file.states).enumerate() {
        let uncertainty = match &file.uncertainties {
            Some(u) => Some(nested_to_uncertainty(&u[index], index)?),
            None => None,
        };
        raw.push((*t, nested_to_matrix(state, index)?, uncertainty));
    }
    finish(raw, tol_psd)
}

pub fn parse_snapshots_csv(text: &str, tol_psd: f64) -> Result<Vec<StateSnapshot>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns != ["t", "row", "col", "re", "im"] {
        return Err(Error::Parse(format!("expected header t,row,col,re,im, got `{header}`")));
    }
    let mut groups: Vec<(f64, [[Option<Complex64>; 4]; 4])> = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", n + 1));
        if fields.len() != 5 {
            return Err(bad("expected 5 fields"));
        }
        let t: f64 = fields[0].parse().map_err(|_| bad("bad time"))?;
        let row: usize = fields[1].parse().map_err(|_| bad("bad row"))?;
        let col: usize = fields[2].parse().map_err(|_| bad("bad col"))?;
        let re: f64 = fields[3].parse().map_err(|_| bad("bad re"))?;
        let im: f64 = fields[4].parse().map_err(|_| bad("bad im"))?;
        if row >= 4 || col >= 4 {
            return Err(bad("row/col out of range"));
        }
        let slot = match groups.iter_mut().position(|g| g.0 == t) {
            Some(i) => &mut groups[i].1,
            None => {
                groups.push((t, [[None; 4]; 4]));
                &mut groups.last_mut().expect("just pushed").1
            }
        };
        if slot[row][col].replace(Complex64::new(re, im)).is_some() {
            return Err(bad("duplicate entry"));
        }
    }
    let mut raw = Vec::with_capacity(groups.len());
    for (t, entries) in groups {
        let mut m = ComplexMatrix::zeros(4)?;
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = entries[i][j].ok_or_else(|| Error::Parse(format!("t = {t}: missing entry ({i},{j})")))?;
            }
        }
        raw.push((t, m, None));
    }
    finish(raw, tol_psd)
}

pub fn parse_snapshots(text: &str, format: SnapshotFormat, tol_psd: f64) -> Result<Vec<StateSnapshot>> {
    match format {
        SnapshotFormat::Json => parse_snapshots_json(text, tol_psd),
        SnapshotFormat::Csv => parse_snapshots_csv(text, tol_psd),
    }
}

/// Reads, validates and repairs snapshots, sorted by time.
pub fn load_snapshots(path: &Path, format: SnapshotFormat) -> Result<Vec<StateSnapshot>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshots(&text, format, tolerances::PSD_INGEST)
}

pub fn snapshots_to_json(snapshots: &[StateSnapshot]) -> String {
    let pairs = |m: &ComplexMatrix| -> Vec<Vec<[f64; 2]>> {
        (0..4).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
    };
    let uncertainties = if snapshots.iter().all(|s| s.uncertainty.is_some()) && !snapshots.is_empty() {
        Some(
            snapshots
                .iter()
                .map(|s| {
                    let u = s.uncertainty.expect("checked above");
                    u.iter().map(|r| r.iter().map(|&(a, b)| [a, b]).collect()).collect()
                })
                .collect(),
        )
    } else {
        None
    };
    let file = SnapshotFile {
        schema_version: Some(SNAPSHOT_SCHEMA_VERSION),
        times: snapshots.iter().map(|s| s.time).collect(),
        states: snapshots.iter().map(|s| pairs(&s.rho)).collect(),
        uncertainties,
    };
    serde_json::to_string_pretty(&file).expect("plain numeric data serializes")
}

pub fn snapshots_to_csv(snapshots: &[StateSnapshot]) -> String {
    let mut out = String::from("t,row,col,re,im\n");
    for s in snapshots {
        for i in 0..4 {
            for j in 0..4 {
                let z = s.rho[(i, j)];
                out.push_str(&format!("{:.16e},{i},{j},{:.16e},{:.16e}\n", s.time, z.re, z.im));
            }
        }
    }
    out
}

pub fn write_snapshots(snapshots: &[StateSnapshot], path: &Path, format: SnapshotFormat) -> Result<()> {
    let text = match format {
        SnapshotFormat::Json => snapshots_to_json(snapshots),
        SnapshotFormat::Csv => snapshots_to_csv(snapshots),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Monte-Carlo resampling settings. `noise_sigma = 0` with no per-entry
/// uncertainties disables resampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub n_resamples: usize,
    /// Gaussian standard deviation added to each real degree of freedom.
    /// Overrides per-entry uncertainties when positive.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Largest tolerated fraction of failed resamples.
    pub max_failure_fraction: f64,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        Self {
            n_resamples: 1000,
            noise_sigma: 0.0,
            seed: 0,
            max_failure_fraction: 0.01,
        }
    }
}

impl UncertaintyConfig {
    pub fn enabled_for(&self, snapshots: &[StateSnapshot]) -> bool {
        self.n_resamples > 0 && (self.noise_sigma > 0.0 || snapshots.iter().any(|s| s.uncertainty.is_some()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityStats {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySummary {
    pub n_resamples: usize,
    pub failed: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub procedure: String,
    pub quantities: Vec<QuantityStats>,
}

impl UncertaintySummary {
    pub fn get(&self, name: &str) -> Option<&QuantityStats> {
        self.quantities.iter().find(|q| q.name == name)
    }
}

/// Adds independent Gaussian noise to the 16 real degrees of freedom of a
/// Hermitian 4x4 matrix, then repairs the result.
pub fn perturb_snapshot(
    snapshot: &StateSnapshot,
    index: usize,
    noise_sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StateSnapshot> {
    let sd = |i: usize, j: usize| -> (f64, f64) {
        match (&snapshot.uncertainty, noise_sigma > 0.0) {
            (Some(u), false) => u[i][j],
            _ => (noise_sigma, noise_sigma),
        }
    };
    let mut draw = |sigma: f64| -> Result<f64> {
        if sigma == 0.0 {
            return Ok(0.0);
        }
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::param("noise_sigma", e.to_string()))?;
        Ok(normal.sample(rng))
    };
    let mut m = snapshot.rho;
    for i in 0..4 {
        let (re_sd, _) = sd(i, i);
        m[(i, i)] = Complex64::new(m[(i, i)].re + draw(re_sd)?, 0.0);
        for j in i + 1..4 {
            let (re_sd, im_sd) = sd(i, j);
            let z = m[(i, j)] + Complex64::new(draw(re_sd)?, draw(im_sd)?);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let (rho, repairs) = repair_state(&m, index, tolerances::PSD_INGEST)?;
    Ok(StateSnapshot {
        time: snapshot.time,
        rho,
        source: snapshot.source,
        repairs,
        uncertainty: snapshot.uncertainty,
    })
}

/// Reruns `pipeline` on `n_resamples` perturbed copies of `snapshots` and
/// reports the mean and sample standard deviation of each named output.
/// Resample `k` draws from the ChaCha8 stream `k` of `seed`.
pub fn monte_carlo_uncertainty<F>(
    snapshots: &[StateSnapshot],
    cfg: &UncertaintyConfig,
    pipeline: F,
) -> Result<UncertaintySummary>
where
    F: Fn(&[StateSnapshot]) -> Result<Vec<(String, f64)>> + Sync,
{
    if cfg.n_resamples == 0 {
        return Err(Error::param("n_resamples", "must be positive"));
    }
    if !(cfg.noise_sigma >= 0.0 && cfg.noise_sigma.is_finite()) {
        return Err(Error::param("noise_sigma", "must be finite and non-negative"));
    }
    let outcomes: Vec<Result<Vec<(String, f64)>>> = (0..cfg.n_resamples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let perturbed = snapshots
                .iter()
                .enumerate()
                .map(|(i, s)| perturb_snapshot(s, i, cfg.noise_sigma, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            pipeline(&perturbed)
        })
        .collect();

    let mut first_failure = None;
    let mut successes = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(v) => successes.push(v),
            Err(e) => {
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let failed = cfg.n_resamples - successes.len();
    if failed as f64 > cfg.max_failure_fraction * cfg.n_resamples as f64 || successes.is_empty() {
        return Err(Error::Resampling {
            failed,
            total: cfg.n_resamples,
            first: first_failure.unwrap_or_default(),
        });
    }

    let names: Vec<String> = successes[0].iter().map(|(n, _)| n.clone()).collect();
    if successes.iter().any(|s| s.len() != names.len()) {
        return Err(Error::param("pipeline", "resamples returned different quantity sets"));
    }
    let quantities = names
        .iter()
        .enumerate()
        .map(|(q, name)| {
            let values: Vec<f64> = successes.iter().map(|s| s[q].1).collect();
            let (mean, std) = mean_std(&values);
            QuantityStats {
                name: name.clone(),
                mean,
                std,
            }
        })
        .collect();
    Ok(UncertaintySummary {
        n_resamples: cfg.n_resamples,
        failed,
        noise_sigma: cfg.noise_sigma,
        seed: cfg.seed,
        procedure: "gaussian perturbation of the 16 Hermitian degrees of freedom, hermitize, renormalize, PSD projection, full pipeline rerun; ChaCha8 per-resample streams".into(),
        quantities,
    })
}

/// Mean and sample standard deviation. Identical values give exactly zero.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|v| v.to_bits() == values[0].to_bits()) {
        return (values[0], 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(p: [f64; 4]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&p).unwrap()
    }

    #[test]
    fn psd_project_leaves_valid_states() {
        let m = diag([0.4, 0.3, 0.2, 0.1]);
        assert_eq!(psd_project(&m, 1e-10).unwrap(), m);
    }

    #[test]
    fn psd_project_clips() {
        let m = diag([0.7, 0.35, -0.05, 0.0]);
        let p = psd_project(&m, 1e-10).unwrap();
        assert!((p[(0, 0)].re - 0.7 / 1.05).abs() < 1e-15);
        assert_eq!(p[(2, 2)].re, 0.0);
    }

    #[test]
    fn loader_rejects_strongly_negative_state() {
        let text = snapshots_to_json(&[StateSnapshot::simulated(0.0, diag([0.6, 0.45, -0.05, 0.0]))]);
        assert!(matches!(
            parse_snapshots_json(&text, tolerances::PSD_INGEST),
            Err(Error::InvalidSnapshot { index: 0, .. })
        ));
    }

    #[test]
    fn loader_repairs_mild_defects() {
        let mut m = diag([0.5, 0.3, 0.2, 0.0005]);
        m[(0, 1)] = Complex64::new(1e-6, 0.0);
        let text = snapshots_to_json(&[StateSnapshot::simulated(0.0, m)]);
        let s = parse_snapshots_json(&text, tolerances::PSD_INGEST).unwrap();
        assert!(s[0].repairs.iter().any(|r| matches!(r, Repair::Hermitized { .. })));
        assert!(s[0].repairs.iter().any(|r| matches!(r, Repair::TraceRenormalized { .. })));
        assert!((s[0].rho.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut m = diag([0.5, 0.25, 0.15, 0.1]);
        m[(1, 2)] = Complex64::new(0.01, 1.0 / 3.0 * 0.01);
        m[(2, 1)] = m[(1, 2)].conj();
        let snaps = vec![StateSnapshot::simulated(0.0, m), StateSnapshot::simulated(1.1e-4, m)];
        let back = parse_snapshots_csv(&snapshots_to_csv(&snaps), tolerances::PSD_INGEST).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].rho, m);
        assert_eq!(back[1].time, 1.1e-4);
    }

    #[test]
    fn schema_violations_are_parse_errors() {
        assert!(matches!(parse_snapshots_json("{\"times\": [0.0]}", 1e-3), Err(Error::Parse(_))));
        assert!(matches!(
            parse_snapshots_json("{\"times\": [0.0], \"states\": [[[[1,0]]]]}", 1e-3),
            Err(Error::Parse(_))
        ));
        assert!(matches!(parse_snapshots_csv("a,b\n", 1e-3), Err(Error::Parse(_))));
    }

    #[test]
    fn zero_noise_gives_zero_spread() {
        let snaps = vec![StateSnapshot::simulated(0.0, diag([0.4, 0.3, 0.2, 0.1]))];
        let cfg = UncertaintyConfig {
            n_resamples: 10,
            ..UncertaintyConfig::default()
        };
        let summary = monte_carlo_uncertainty(&snaps, &cfg, |s| Ok(vec![("p00".into(), s[0].rho[(0, 0)].re)])).unwrap();
        assert_eq!(summary.quantities[0].std, 0.0);
        assert_eq!(summary.quantities[0].mean, 0.4);
    }

    #[test]
    fn resampling_is_seeded() {
        let snaps = vec![StateSnapshot::simulated(0.0, diag([0.4, 0.3, 0.2, 0.1]))];
        let cfg = UncertaintyConfig {
            n_resamples: 20,
            noise_sigma: 1e-3,
            seed: 7,
            ..UncertaintyConfig::default()
        };
        let run = || monte_carlo_uncertainty(&snaps, &cfg, |s| Ok(vec![("p00".into(), s[0].rho[(0, 0)].re)])).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert!(a.quantities[0].std > 0.0);
    }

    #[test]
    fn too_many_failures_abort() {
        let snaps = vec![StateSnapshot::simulated(0.0, diag([0.4, 0.3, 0.2, 0.1]))];
        let cfg = UncertaintyConfig {
            n_resamples: 10,
            noise_sigma: 1e-3,
            ..UncertaintyConfig::default()
        };
        let err = monte_carlo_uncertainty(&snaps, &cfg, |_| Err(Error::Parse("boom".into())));
        assert!(matches!(err, Err(Error::Resampling { failed: 10, .. })));
    }
}
