//! Path functionals, heat histograms, and fluctuation-theorem averages.
//!
//! Every functional is a log-ratio of probabilities attached to one path:
//!
//! * `I0 = ln[P_s / (P_a0 P_b0)]`, `I1 = ln[P_s* / (P(a1) P(b1))]`
//! * `J_l = ln[P_{a_l b_l} / (P(a_l) P(b_l))]`, `C_l = ln[P_s / P_{a_l b_l}]`
//! * `Sigma_A = ln[P(a1) / <a1|rho_A^0|a1>]`, likewise for B
//! * `sigma = -Q_A dbeta - I0 + I1 + Sigma_A + Sigma_B - gamma`
//!
//! with `P(a1) = <a1|rho_A(t)|a1>` and `dbeta = beta_A - beta_B`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, ComplexMatrix, Subsystem};
use crate::tolerances;
use crate::trajectories::{gamma_of_path, BasisAssignment, PathLabels, PathRecord, PathTable};

/// Which state supplies the final joint probability `P_{a1 b1}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointProbability {
    /// `<a1 b1|rho(t)|a1 b1>`
    #[default]
    Evolved,
    /// `<a1 b1|rho^0|a1 b1>`
    Initial,
}

/// Heat-support bin, ordered `-h nu0, 0, +h nu0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatBin {
    Negative,
    Zero,
    Positive,
}

impl HeatBin {
    pub const ALL: [HeatBin; 3] = [HeatBin::Negative, HeatBin::Zero, HeatBin::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `-1, 0, +1`.
    pub fn sign(self) -> i32 {
        self as i32 - 1
    }

    pub fn mirrored(self) -> HeatBin {
        HeatBin::ALL[2 - self.index()]
    }

    pub fn value(self, level_spacing: f64) -> f64 {
        f64::from(self.sign()) * level_spacing
    }
}

/// Energy gained by A along a path, snapped to the heat support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heat {
    /// `<a1|H_A|a1> - <a0|H_A|a0>` in peV.
    pub raw: f64,
    pub bin: HeatBin,
    /// Snapped value in peV.
    pub value: f64,
}

/// Snaps `raw` to the nearest of `-h nu0, 0, +h nu0`.
pub fn snap_heat(raw: f64, level_spacing: f64, tol: f64) -> Result<Heat> {
    let (bin, distance) = HeatBin::ALL
        .iter()
        .map(|&b| (b, (raw - b.value(level_spacing)).abs()))
        .fold((HeatBin::Zero, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if !(distance <= tol) {
        return Err(Error::UnsnappableHeat { value: raw, distance });
    }
    Ok(Heat {
        raw,
        bin,
        value: bin.value(level_spacing),
    })
}

/// `Q_A = E_a1 - E_a0` for a path.
pub fn heat_of_path(labels: &PathLabels, ba: &BasisAssignment, level_spacing: f64, tol: f64) -> Result<Heat> {
    snap_heat(
        ba.energies_a_final[labels.a1] - ba.energies_a_initial[labels.a0],
        level_spacing,
        tol,
    )
}

/// Probabilities shared by all paths at one time point.
#[derive(Clone, Debug, PartialEq)]
pub struct PathContext {
    pub delta_beta: f64,
    pub level_spacing: f64,
    pub heat_tol: f64,
    p_s: [f64; 4],
    p_s_star: [f64; 4],
    p_a0: [f64; 2],
    p_b0: [f64; 2],
    joint0: [[f64; 2]; 2],
    joint1: [[f64; 2]; 2],
    marginal_a1: [f64; 2],
    marginal_b1: [f64; 2],
    reference_a1: [f64; 2],
    reference_b1: [f64; 2],
    heat_raw: [[f64; 2]; 2],
}

impl PathContext {
    pub fn new(
        ba: &BasisAssignment,
        rho0: &ComplexMatrix,
        rho_t: &ComplexMatrix,
        delta_beta: f64,
        level_spacing: f64,
        joint: JointProbability,
        heat_tol: f64,
    ) -> Result<Self> {
        let rho_a0 = partial_trace(rho0, Subsystem::A)?;
        let rho_b0 = partial_trace(rho0, Subsystem::B)?;
        let rho_at = partial_trace(rho_t, Subsystem::A)?;
        let rho_bt = partial_trace(rho_t, Subsystem::B)?;
        let joint_rho = match joint {
            JointProbability::Evolved => rho_t,
            JointProbability::Initial => rho0,
        };
        let mut ctx = Self {
            delta_beta,
            level_spacing,
            heat_tol,
            p_s: [0.0; 4],
            p_s_star: [0.0; 4],
            p_a0: [0.0; 2],
            p_b0: [0.0; 2],
            joint0: [[0.0; 2]; 2],
            joint1: [[0.0; 2]; 2],
            marginal_a1: [0.0; 2],
            marginal_b1: [0.0; 2],
            reference_a1: [0.0; 2],
            reference_b1: [0.0; 2],
            heat_raw: [[0.0; 2]; 2],
        };
        for s in 0..4 {
            ctx.p_s[s] = ba.p_s(s);
            ctx.p_s_star[s] = ba.p_s_star(s);
        }
        for i in 0..2 {
            ctx.p_a0[i] = ba.local_a_initial.eigenvalues[i];
            ctx.p_b0[i] = ba.local_b_initial.eigenvalues[i];
            let a1 = &ba.local_a_final.eigenvectors[i];
            let b1 = &ba.local_b_final.eigenvectors[i];
            ctx.marginal_a1[i] = rho_at.expectation(a1).re;
            ctx.marginal_b1[i] = rho_bt.expectation(b1).re;
            ctx.reference_a1[i] = rho_a0.expectation(a1).re;
            ctx.reference_b1[i] = rho_b0.expectation(b1).re;
            for j in 0..2 {
                ctx.joint0[i][j] = rho0.expectation(&ba.initial_product(i, j)).re;
                ctx.joint1[i][j] = joint_rho.expectation(&ba.final_product(i, j)).re;
                ctx.heat_raw[i][j] = ba.energies_a_final[j] - ba.energies_a_initial[i];
            }
        }
        Ok(ctx)
    }

    /// Heat of a path with initial label `a0` and final label `a1`.
    pub fn heat(&self, a0: usize, a1: usize) -> Result<Heat> {
        snap_heat(self.heat_raw[a0][a1], self.level_spacing, self.heat_tol)
    }
}

fn log_ratio(num: f64, den: f64, what: &str, labels: &PathLabels) -> Result<f64> {
    if !(num > 0.0 && den > 0.0) {
        return Err(Error::UndefinedOnPath(format!(
            "{what} = ln({num:e} / {den:e}) on path {labels:?}"
        )));
    }
    Ok((num / den).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutualInformations {
    pub i0: f64,
    pub i1: f64,
    pub j0: f64,
    pub j1: f64,
    pub c0: f64,
    pub c1: f64,
}

pub fn mutual_informations(labels: &PathLabels, ctx: &PathContext) -> Result<MutualInformations> {
    let l = labels;
    let local0 = ctx.p_a0[l.a0] * ctx.p_b0[l.b0];
    let local1 = ctx.marginal_a1[l.a1] * ctx.marginal_b1[l.b1];
    let joint0 = ctx.joint0[l.a0][l.b0];
    let joint1 = ctx.joint1[l.a1][l.b1];
    Ok(MutualInformations {
        i0: log_ratio(ctx.p_s[l.s], local0, "I0", l)?,
        i1: log_ratio(ctx.p_s_star[l.s], local1, "I1", l)?,
        j0: log_ratio(joint0, local0, "J0", l)?,
        j1: log_ratio(joint1, local1, "J1", l)?,
        c0: log_ratio(ctx.p_s[l.s], joint0, "C0", l)?,
        c1: log_ratio(ctx.p_s_star[l.s], joint1, "C1", l)?,
    })
}

/// `(Sigma_A, Sigma_B)`.
pub fn relative_entropies(labels: &PathLabels, ctx: &PathContext) -> Result<(f64, f64)> {
    Ok((
        log_ratio(ctx.marginal_a1[labels.a1], ctx.reference_a1[labels.a1], "Sigma_A", labels)?,
        log_ratio(ctx.marginal_b1[labels.b1], ctx.reference_b1[labels.b1], "Sigma_B", labels)?,
    ))
}

/// Every functional on one path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFunctionals {
    pub heat: Heat,
    pub info: MutualInformations,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub gamma: f64,
    /// Total entropy production.
    pub sigma: f64,
}

pub fn path_functionals(path: &PathRecord, ctx: &PathContext) -> Result<PathFunctionals> {
    let l = &path.labels;
    let heat = ctx.heat(l.a0, l.a1)?;
    let info = mutual_informations(l, ctx)?;
    let (sigma_a, sigma_b) = relative_entropies(l, ctx)?;
    let gamma = gamma_of_path(path)?;
    let sigma = -heat.value * ctx.delta_beta - info.i0 + info.i1 + sigma_a + sigma_b - gamma;
    Ok(PathFunctionals {
        heat,
        info,
        sigma_a,
        sigma_b,
        gamma,
        sigma,
    })
}

/// Functionals of every path in the forward measure; `None` where pruned.
pub fn evaluate_paths(table: &PathTable, ctx: &PathContext) -> Result<Vec<Option<PathFunctionals>>> {
    table
        .paths
        .iter()
        .map(|p| if p.prunable() { Ok(None) } else { path_functionals(p, ctx).map(Some) })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

/// Heat distribution on `{-h nu0, 0, +h nu0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatHistogram {
    pub direction: Direction,
    pub level_spacing: f64,
    pub masses: [f64; 3],
}

impl HeatHistogram {
    pub fn mass(&self, bin: HeatBin) -> f64 {
        self.masses[bin.index()]
    }

    pub fn support(&self) -> [f64; 3] {
        HeatBin::ALL.map(|b| b.value(self.level_spacing))
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.support().iter().zip(&self.masses).map(|(q, p)| q * p).sum()
    }
}

/// Bins forward weights by `Q_A` or time-reversed weights by `-Q_A`. Paths
/// whose heat cannot be snapped are skipped only if both weights are below
/// [`tolerances::PRUNE`].
pub fn assemble_heat_histogram(table: &PathTable, ctx: &PathContext, direction: Direction) -> Result<HeatHistogram> {
    let mut masses = [0.0; 3];
    for p in &table.paths {
        let weight = match direction {
            Direction::Forward => p.p_forward,
            Direction::Reverse => p.p_reverse,
        };
        let heat = match ctx.heat(p.labels.a0, p.labels.a1) {
            Ok(h) => h,
            Err(_) if p.p_forward < tolerances::PRUNE && p.p_reverse < tolerances::PRUNE => continue,
            Err(e) => return Err(e),
        };
        let bin = match direction {
            Direction::Forward => heat.bin,
            Direction::Reverse => heat.bin.mirrored(),
        };
        masses[bin.index()] += weight;
    }
    Ok(HeatHistogram {
        direction,
        level_spacing: ctx.level_spacing,
        masses,
    })
}

/// One heat value of the detailed relation `ln[P_f(Q) / P_r(-Q)] = Q dbeta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailedFtRecord {
    pub bin: HeatBin,
    /// `Q` in peV.
    pub heat: f64,
    pub p_forward: f64,
    /// `P_r(-Q)`.
    pub p_reverse: f64,
    /// `ln[P_f(Q) / P_r(-Q)]`, undefined if either mass is negligible.
    pub ln_ratio: Option<f64>,
    pub heat_delta_beta: f64,
    /// `e^{Q dbeta} P_r(-Q) / P_f(Q)`.
    pub psi: Option<f64>,
}

pub fn detailed_ft_ratio(forward: &HeatHistogram, reverse: &HeatHistogram, delta_beta: f64) -> Vec<DetailedFtRecord> {
    HeatBin::ALL
        .iter()
        .map(|&bin| {
            let heat = bin.value(forward.level_spacing);
            let p_forward = forward.mass(bin);
            let p_reverse = reverse.mass(bin.mirrored());
            let defined = p_forward > tolerances::AMPLITUDE && p_reverse > tolerances::AMPLITUDE;
            let heat_delta_beta = heat * delta_beta + 0.0;
            DetailedFtRecord {
                bin,
                heat,
                p_forward,
                p_reverse,
                ln_ratio: defined.then(|| (p_forward / p_reverse).ln()),
                heat_delta_beta,
                psi: defined.then(|| heat_delta_beta.exp() * p_reverse / p_forward),
            }
        })
        .collect()
}

/// Least-squares slope of `ln[P_f(Q) / P_r(-Q)]` against `Q` through the
/// origin, over the defined nonzero-heat records.
pub fn effective_delta_beta(records: &[DetailedFtRecord]) -> Option<f64> {
    let (num, den) = records
        .iter()
        .filter(|r| r.bin != HeatBin::Zero)
        .filter_map(|r| r.ln_ratio.map(|l| (r.heat * l, r.heat * r.heat)))
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    (den > 0.0).then(|| num / den)
}

/// Quantities averaged as `<e^{-X}>` over the forward measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FtQuantity {
    Sigma,
    I0,
    I1,
    J0,
    J1,
    C0,
    C1,
    SigmaA,
    SigmaB,
    Gamma,
    /// `X = Q_A dbeta`.
    HeatExchange,
}

impl FtQuantity {
    pub const ALL: [FtQuantity; 11] = [
        FtQuantity::Sigma,
        FtQuantity::I0,
        FtQuantity::I1,
        FtQuantity::J0,
        FtQuantity::J1,
        FtQuantity::C0,
        FtQuantity::C1,
        FtQuantity::SigmaA,
        FtQuantity::SigmaB,
        FtQuantity::Gamma,
        FtQuantity::HeatExchange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FtQuantity::Sigma => "sigma",
            FtQuantity::I0 => "i0",
            FtQuantity::I1 => "i1",
            FtQuantity::J0 => "j0",
            FtQuantity::J1 => "j1",
            FtQuantity::C0 => "c0",
            FtQuantity::C1 => "c1",
            FtQuantity::SigmaA => "sigma_a",
            FtQuantity::SigmaB => "sigma_b",
            FtQuantity::Gamma => "gamma",
            FtQuantity::HeatExchange => "heat_exchange",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.name() == name)
    }

    pub fn value(self, f: &PathFunctionals, delta_beta: f64) -> f64 {
        match self {
            FtQuantity::Sigma => f.sigma,
            FtQuantity::I0 => f.info.i0,
            FtQuantity::I1 => f.info.i1,
            FtQuantity::J0 => f.info.j0,
            FtQuantity::J1 => f.info.j1,
            FtQuantity::C0 => f.info.c0,
            FtQuantity::C1 => f.info.c1,
            FtQuantity::SigmaA => f.sigma_a,
            FtQuantity::SigmaB => f.sigma_b,
            FtQuantity::Gamma => f.gamma,
            FtQuantity::HeatExchange => f.heat.value * delta_beta,
        }
    }
}

impl fmt::Display for FtQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralRow {
    pub quantity: FtQuantity,
    /// `<e^{-X}>`
    pub exp_average: f64,
    /// `<X>`
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralAverages {
    pub rows: Vec<IntegralRow>,
    /// `<e^{+Q_A dbeta}>`.
    pub heat_exchange_plus: f64,
    /// `<Q_A>` in peV.
    pub mean_heat: f64,
    /// Forward mass of pruned paths.
    pub excluded_mass: f64,
}

impl IntegralAverages {
    pub fn row(&self, q: FtQuantity) -> Option<&IntegralRow> {
        self.rows.iter().find(|r| r.quantity == q)
    }
}

/// Averages over the forward measure, skipping pruned paths.
pub fn integral_ft_averages(
    table: &PathTable,
    functionals: &[Option<PathFunctionals>],
    delta_beta: f64,
) -> IntegralAverages {
    let included: Vec<(f64, &PathFunctionals)> = table
        .paths
        .iter()
        .zip(functionals)
        .filter_map(|(p, f)| f.as_ref().map(|f| (p.p_forward, f)))
        .collect();
    let average = |g: &dyn Fn(&PathFunctionals) -> f64| included.iter().map(|(p, f)| p * g(f)).sum::<f64>();
    let rows = FtQuantity::ALL
        .iter()
        .map(|&q| IntegralRow {
            quantity: q,
            exp_average: average(&|f| (-q.value(f, delta_beta)).exp()),
            mean: average(&|f| q.value(f, delta_beta)),
        })
        .collect();
    IntegralAverages {
        rows,
        heat_exchange_plus: average(&|f| (f.heat.value * delta_beta).exp()),
        mean_heat: average(&|f| f.heat.value),
        excluded_mass: table.excluded_mass(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_exchange, evolve, propagator_at};
    use crate::states::{correlated_initial_state, ThermalParameters};
    use crate::trajectories::{assign_bases, StateSource};

    fn pipeline(p: &ThermalParameters, t: f64, joint: JointProbability) -> (PathTable, PathContext) {
        let rho0 = correlated_initial_state(p).unwrap();
        let u = propagator_at(&build_exchange(p.coupling()).unwrap(), t).unwrap();
        let rho_t = evolve(&rho0, &u).unwrap();
        let ba = assign_bases(
            &rho0,
            &rho_t,
            &u,
            &p.hamiltonian(Subsystem::A),
            &p.hamiltonian(Subsystem::B),
            StateSource::Simulated,
        )
        .unwrap();
        let ctx = PathContext::new(&ba, &rho0, &rho_t, p.delta_beta(), p.level_spacing(), joint, tolerances::HEAT_SNAP)
            .unwrap();
        (PathTable::build(&ba, &u), ctx)
    }

    #[test]
    fn snapping() {
        let e = 4.135667696;
        assert_eq!(snap_heat(e + 1e-9, e, 1e-6).unwrap().bin, HeatBin::Positive);
        assert_eq!(snap_heat(-1e-9, e, 1e-6).unwrap().value, 0.0);
        assert!(matches!(snap_heat(1.0, e, 1e-6), Err(Error::UnsnappableHeat { .. })));
    }

    #[test]
    fn bins_mirror() {
        assert_eq!(HeatBin::Negative.mirrored(), HeatBin::Positive);
        assert_eq!(HeatBin::Zero.mirrored(), HeatBin::Zero);
        assert_eq!(HeatBin::Positive.sign(), 1);
    }

    #[test]
    fn integral_relations_hold_for_correlated_preset() {
        let p = ThermalParameters::correlated();
        let (table, ctx) = pipeline(&p, 1.88e-3, JointProbability::Evolved);
        let f = evaluate_paths(&table, &ctx).unwrap();
        let avg = integral_ft_averages(&table, &f, p.delta_beta());
        for row in avg.rows.iter().filter(|r| r.quantity != FtQuantity::HeatExchange) {
            assert!((row.exp_average - 1.0).abs() < 1e-9, "{row:?}");
        }
        assert!(avg.excluded_mass < 1e-12);
    }

    #[test]
    fn pathwise_decompositions() {
        let p = ThermalParameters::correlated();
        let (table, ctx) = pipeline(&p, 2.32e-3, JointProbability::Evolved);
        for f in evaluate_paths(&table, &ctx).unwrap().into_iter().flatten() {
            assert!((f.info.i0 - f.info.j0 - f.info.c0).abs() < 1e-12);
            assert!((f.info.i1 - f.info.j1 - f.info.c1).abs() < 1e-12);
        }
    }

    #[test]
    fn histograms_are_normalized() {
        let p = ThermalParameters::correlated();
        let (table, ctx) = pipeline(&p, 1.2e-3, JointProbability::Evolved);
        for d in [Direction::Forward, Direction::Reverse] {
            let h = assemble_heat_histogram(&table, &ctx, d).unwrap();
            assert!((h.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn undefined_records_have_no_ratio() {
        let f = HeatHistogram {
            direction: Direction::Forward,
            level_spacing: 1.0,
            masses: [0.0, 1.0, 0.0],
        };
        let r = HeatHistogram {
            direction: Direction::Reverse,
            ..f.clone()
        };
        let d = detailed_ft_ratio(&f, &r, 0.3);
        assert!(d[0].psi.is_none() && d[2].ln_ratio.is_none());
        assert_eq!(d[1].psi, Some(1.0));
        assert_eq!(effective_delta_beta(&d), None);
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in FtQuantity::ALL {
            assert_eq!(FtQuantity::from_name(q.name()), Some(q));
        }
    }
}
