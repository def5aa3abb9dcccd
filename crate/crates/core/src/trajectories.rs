//! Measurement bases and the 64-path conditional ensemble.
//!
//! A path is `Gamma = (s, a0, b0, a1, b1)`: the eigenstate `|s>` of the initial
//! global state, the local eigenstates `|a0>, |b0>` of the initial marginals,
//! and the local eigenstates `|a1>, |b1>` of the marginals at time `t`.
//!
//! Three weights are stored per path:
//!
//! * `p_forward = P_s |<a0 b0|s>|^2 |<a1 b1|U|s>|^2`
//! * `p_reverse = P_s |<a1 b1|s>|^2 |<a0 b0|U^dagger|s>|^2`, the same initial
//!   state driven by the time-reversed protocol. Its heat is `E_a0 - E_a1`.
//! * `p_retro = P_s* |<a1 b1|s*>|^2 |<a0 b0|U^dagger|s*>|^2`, retracing the
//!   path from the eigenstate `|s*>` of `rho(t)` paired with `U|s>`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_raw, fix_phase, hermitian_eig, inner, kron_vec, lexicographic_desc, overlap_sq, partial_trace, ComplexMatrix,
    SpectralEnsemble, Subsystem,
};
use crate::states::QubitHamiltonian;
use crate::tolerances;

/// Number of paths: 4 global eigenstates times 2^4 local outcomes.
pub const PATH_COUNT: usize = 64;

/// Largest `|rho_t - U rho0 U^dagger|` accepted for simulated states.
pub const CONSISTENCY: f64 = 1e-8;

/// Smallest `|<s*|U|s>|^2` accepted without a warning.
pub const PAIRING_OVERLAP: f64 = 1.0 - 1e-8;

/// Where the state at time `t` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSource {
    Simulated,
    Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisWarning {
    /// `rho(t)` has a degenerate cluster, so `|s*>` was fixed by aligning the
    /// cluster with the propagated initial eigenvectors.
    DegeneracyAmbiguity { cluster_size: usize, aligned: bool },
    /// A reduced state has equal eigenvalues and its eigenbasis is arbitrary.
    LocalDegeneracy { ensemble: String },
    WeakPairing { s: usize, overlap: f64 },
}

impl std::fmt::Display for BasisWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisWarning::DegeneracyAmbiguity { cluster_size, aligned } => write!(
                f,
                "degenerate cluster of size {cluster_size} in rho(t); {}",
                if *aligned { "aligned to U|s>" } else { "alignment singular, kept solver basis" }
            ),
            BasisWarning::LocalDegeneracy { ensemble } => write!(f, "{ensemble} has a degenerate spectrum"),
            BasisWarning::WeakPairing { s, overlap } => write!(f, "|<s*|U|s>|^2 = {overlap:.3e} for s = {s}"),
        }
    }
}

/// All measurement bases for one time point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisAssignment {
    pub global_initial: SpectralEnsemble,
    pub global_final: SpectralEnsemble,
    /// `pairing[s]` is the index in `global_final` of `|s*>`.
    pub pairing: Vec<usize>,
    /// `|<s*|U|s>|^2` per `s`.
    pub pairing_overlaps: Vec<f64>,
    pub local_a_initial: SpectralEnsemble,
    pub local_b_initial: SpectralEnsemble,
    pub local_a_final: SpectralEnsemble,
    pub local_b_final: SpectralEnsemble,
    /// `<a|H_A|a>` for the initial and final local bases of A, in peV.
    pub energies_a_initial: Vec<f64>,
    pub energies_a_final: Vec<f64>,
    pub energies_b_initial: Vec<f64>,
    pub energies_b_final: Vec<f64>,
    pub warnings: Vec<BasisWarning>,
}

impl BasisAssignment {
    /// `|a0> (x) |b0>`.
    pub fn initial_product(&self, a0: usize, b0: usize) -> Vec<Complex64> {
        kron_vec(&self.local_a_initial.eigenvectors[a0], &self.local_b_initial.eigenvectors[b0])
    }

    /// `|a1> (x) |b1>`.
    pub fn final_product(&self, a1: usize, b1: usize) -> Vec<Complex64> {
        kron_vec(&self.local_a_final.eigenvectors[a1], &self.local_b_final.eigenvectors[b1])
    }

    pub fn p_s(&self, s: usize) -> f64 {
        self.global_initial.eigenvalues[s]
    }

    pub fn p_s_star(&self, s: usize) -> f64 {
        self.global_final.eigenvalues[self.pairing[s]]
    }

    pub fn s_star(&self, s: usize) -> &[Complex64] {
        &self.global_final.eigenvectors[self.pairing[s]]
    }

    /// Largest `|P_s - P_s*|`; zero under unitary evolution.
    pub fn max_population_mismatch(&self) -> f64 {
        (0..self.pairing.len())
            .map(|s| (self.p_s(s) - self.p_s_star(s)).abs())
            .fold(0.0, f64::max)
    }
}

/// Diagonalizes the global and reduced states at both ends of the protocol and
/// pairs each `|s>` with an eigenvector `|s*>` of `rho_t`.
///
/// For simulated states `rho_t` must equal `U rho0 U^dagger` within
/// [`CONSISTENCY`].
pub fn assign_bases(
    rho0: &ComplexMatrix,
    rho_t: &ComplexMatrix,
    u: &ComplexMatrix,
    h_a: &QubitHamiltonian,
    h_b: &QubitHamiltonian,
    source: StateSource,
) -> Result<BasisAssignment> {
    for m in [rho0, rho_t, u] {
        if m.dim() != 4 {
            return Err(Error::Dimension {
                expected: "4",
                found: m.dim(),
            });
        }
    }
    if source == StateSource::Simulated {
        let gap = (*rho_t - rho0.conjugate_by(u)).max_abs();
        if !(gap <= CONSISTENCY) {
            return Err(Error::param("rho_t", format!("differs from U rho0 U^dagger by {gap:.3e}")));
        }
    }

    let global_initial = hermitian_eig(rho0)?;
    let mut global_final = hermitian_eig(rho_t)?;
    let mut warnings = Vec::new();
    let pairing = pair_eigenvectors(&global_initial, &mut global_final, u, &mut warnings)?;

    let pairing_overlaps: Vec<f64> = (0..4)
        .map(|s| overlap_sq(&global_final.eigenvectors[pairing[s]], &u.apply(&global_initial.eigenvectors[s])))
        .collect();
    if source == StateSource::Simulated {
        for (s, &overlap) in pairing_overlaps.iter().enumerate() {
            if overlap < PAIRING_OVERLAP {
                warnings.push(BasisWarning::WeakPairing { s, overlap });
            }
        }
    }

    let local = |rho: &ComplexMatrix, keep: Subsystem, label: &str, warnings: &mut Vec<BasisWarning>| {
        let ensemble = hermitian_eig(&partial_trace(rho, keep)?)?;
        if ensemble.clusters().len() < 2 {
            warnings.push(BasisWarning::LocalDegeneracy {
                ensemble: label.to_string(),
            });
        }
        Ok::<_, Error>(ensemble)
    };
    let local_a_initial = local(rho0, Subsystem::A, "rho_A(0)", &mut warnings)?;
    let local_b_initial = local(rho0, Subsystem::B, "rho_B(0)", &mut warnings)?;
    let local_a_final = local(rho_t, Subsystem::A, "rho_A(t)", &mut warnings)?;
    let local_b_final = local(rho_t, Subsystem::B, "rho_B(t)", &mut warnings)?;

    let energies = |e: &SpectralEnsemble, h: &QubitHamiltonian| e.eigenvectors.iter().map(|v| h.energy_of(v)).collect();
    Ok(BasisAssignment {
        energies_a_initial: energies(&local_a_initial, h_a),
        energies_a_final: energies(&local_a_final, h_a),
        energies_b_initial: energies(&local_b_initial, h_b),
        energies_b_final: energies(&local_b_final, h_b),
        global_initial,
        global_final,
        pairing,
        pairing_overlaps,
        local_a_initial,
        local_b_initial,
        local_a_final,
        local_b_final,
        warnings,
    })
}

/// Greedy cluster assignment by overlap weight, then Lowdin alignment inside
/// degenerate clusters. Rewrites the aligned eigenvectors of `fin`.
fn pair_eigenvectors(
    init: &SpectralEnsemble,
    fin: &mut SpectralEnsemble,
    u: &ComplexMatrix,
    warnings: &mut Vec<BasisWarning>,
) -> Result<Vec<usize>> {
    let n = init.len();
    let targets: Vec<Vec<Complex64>> = init.eigenvectors.iter().map(|v| u.apply(v)).collect();
    let clusters = fin.clusters();
    let weight = |c: usize, s: usize| -> f64 {
        clusters[c]
            .clone()
            .map(|j| overlap_sq(&fin.eigenvectors[j], &targets[s]))
            .sum()
    };

    let mut capacity: Vec<usize> = clusters.iter().map(|r| r.len()).collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for _ in 0..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for (c, cap) in capacity.iter().enumerate() {
            if *cap == 0 {
                continue;
            }
            for s in (0..n).filter(|&s| owner[s].is_none()) {
                let w = weight(c, s);
                if best.is_none_or(|(_, _, bw)| w > bw) {
                    best = Some((c, s, w));
                }
            }
        }
        let (c, s, _) = best.expect("capacity matches the number of eigenvectors");
        owner[s] = Some(c);
        capacity[c] -= 1;
    }

    let mut pairing = vec![0; n];
    for (c, range) in clusters.iter().enumerate() {
        let members: Vec<usize> = (0..n).filter(|&s| owner[s] == Some(c)).collect();
        if range.len() == 1 {
            pairing[members[0]] = range.start;
            continue;
        }
        let basis: Vec<Vec<Complex64>> = fin.eigenvectors[range.clone()].to_vec();
        let wanted: Vec<&[Complex64]> = members.iter().map(|&s| targets[s].as_slice()).collect();
        let (aligned, ok) = match lowdin_align(&basis, &wanted)? {
            Some(v) => (v, true),
            None => (basis.clone(), false),
        };
        warnings.push(BasisWarning::DegeneracyAmbiguity {
            cluster_size: range.len(),
            aligned: ok,
        });

        let mut labelled: Vec<(Vec<Complex64>, Option<usize>)> = aligned
            .into_iter()
            .enumerate()
            .map(|(j, mut v)| {
                fix_phase(&mut v);
                (v, ok.then(|| members[j]))
            })
            .collect();
        labelled.sort_by(|x, y| lexicographic_desc(&x.0, &y.0));
        for (offset, (v, _)) in labelled.iter().enumerate() {
            fin.eigenvectors[range.start + offset] = v.clone();
        }
        if ok {
            for (offset, (_, s)) in labelled.iter().enumerate() {
                pairing[s.expect("aligned vectors carry labels")] = range.start + offset;
            }
        } else {
            // Best-overlap matching inside the unchanged cluster.
            let mut free: Vec<usize> = range.clone().collect();
            for &s in &members {
                let (k, _) = free
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| (k, overlap_sq(&fin.eigenvectors[j], &targets[s])))
                    .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
                pairing[s] = free.remove(k);
            }
        }
    }
    Ok(pairing)
}

/// Rotates the orthonormal `basis` of a degenerate eigenspace to the closest
/// orthonormal set to `wanted`: `R = A (A^dagger A)^{-1/2}` with
/// `A_ij = <basis_i|wanted_j>`. `None` if `A` is singular.
fn lowdin_align(basis: &[Vec<Complex64>], wanted: &[&[Complex64]]) -> Result<Option<Vec<Vec<Complex64>>>> {
    let k = basis.len();
    let a: Vec<Complex64> = (0..k * k).map(|idx| inner(&basis[idx / k], wanted[idx % k])).collect();
    let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = (0..k).map(|m| a[m * k + i].conj() * a[m * k + j]).sum();
        }
    }
    let (values, vectors) = eig_raw(k, &gram)?;
    if values.iter().any(|&l| !(l > 1e-12)) {
        return Ok(None);
    }
    // (A^dagger A)^{-1/2}
    let mut inv_sqrt = vec![Complex64::new(0.0, 0.0); k * k];
    for (l, v) in values.iter().zip(&vectors) {
        let w = 1.0 / l.sqrt();
        for i in 0..k {
            for j in 0..k {
                inv_sqrt[i * k + j] += v[i] * v[j].conj() * w;
            }
        }
    }
    let r: Vec<Complex64> = (0..k * k)
        .map(|idx| {
            let (i, j) = (idx / k, idx % k);
            (0..k).map(|m| a[i * k + m] * inv_sqrt[m * k + j]).sum()
        })
        .collect();
    let dim = basis[0].len();
    let aligned = (0..k)
        .map(|j| {
            (0..dim)
                .map(|c| (0..k).map(|i| basis[i][c] * r[i * k + j]).sum())
                .collect()
        })
        .collect();
    Ok(Some(aligned))
}

/// Indices of one path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathLabels {
    pub s: usize,
    pub a0: usize,
    pub b0: usize,
    pub a1: usize,
    pub b1: usize,
}

impl PathLabels {
    /// All 64 labels with `b1` varying fastest.
    pub fn all() -> impl Iterator<Item = PathLabels> {
        (0..PATH_COUNT).map(|i| PathLabels {
            s: i >> 4,
            a0: (i >> 3) & 1,
            b0: (i >> 2) & 1,
            a1: (i >> 1) & 1,
            b1: i & 1,
        })
    }
}

/// Squared transition amplitudes entering the three path weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PathOverlaps {
    /// `|<a0 b0|s>|^2`
    pub initial: f64,
    /// `|<a1 b1|U|s>|^2`
    pub evolved: f64,
    /// `|<a1 b1|s>|^2`
    pub reversed_start: f64,
    /// `|<a0 b0|U^dagger|s>|^2`
    pub reversed_end: f64,
    /// `|<a1 b1|s*>|^2`
    pub retro_final: f64,
    /// `|<a0 b0|U^dagger|s*>|^2`
    pub retro_initial: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub labels: PathLabels,
    pub overlaps: PathOverlaps,
    pub p_forward: f64,
    pub p_reverse: f64,
    pub p_retro: f64,
}

impl PathRecord {
    /// Below [`tolerances::PRUNE`]: excluded from forward averages.
    pub fn prunable(&self) -> bool {
        self.p_forward < tolerances::PRUNE
    }
}

/// Forward weights of all 64 paths. Reverse fields are left at zero.
pub fn forward_path_probabilities(ba: &BasisAssignment, u: &ComplexMatrix) -> Vec<PathRecord> {
    PathLabels::all()
        .map(|labels| {
            let s = &ba.global_initial.eigenvectors[labels.s];
            let initial = overlap_sq(&ba.initial_product(labels.a0, labels.b0), s);
            let evolved = overlap_sq(&ba.final_product(labels.a1, labels.b1), &u.apply(s));
            PathRecord {
                labels,
                overlaps: PathOverlaps {
                    initial,
                    evolved,
                    ..PathOverlaps::default()
                },
                p_forward: ba.p_s(labels.s) * initial * evolved,
                p_reverse: 0.0,
                p_retro: 0.0,
            }
        })
        .collect()
}

/// Fills the time-reversed and retrodicted weights of `paths`.
pub fn reverse_path_probabilities(ba: &BasisAssignment, u: &ComplexMatrix, paths: &mut [PathRecord]) {
    let u_dag = u.dagger();
    for path in paths.iter_mut() {
        let l = path.labels;
        let start = ba.initial_product(l.a0, l.b0);
        let end = ba.final_product(l.a1, l.b1);
        let s = &ba.global_initial.eigenvectors[l.s];
        let s_star = ba.s_star(l.s);
        let o = &mut path.overlaps;
        o.reversed_start = overlap_sq(&end, s);
        o.reversed_end = overlap_sq(&start, &u_dag.apply(s));
        o.retro_final = overlap_sq(&end, s_star);
        o.retro_initial = overlap_sq(&start, &u_dag.apply(s_star));
        path.p_reverse = ba.p_s(l.s) * o.reversed_start * o.reversed_end;
        path.p_retro = ba.p_s_star(l.s) * o.retro_final * o.retro_initial;
    }
}

/// `ln[|<a0b0|s>|^2 |<a1b1|U|s>|^2 / (|<a1b1|s*>|^2 |<a0b0|U^dagger|s*>|^2)]`,
/// zero whenever `|s*> = U|s>` up to phase.
pub fn gamma_of_path(path: &PathRecord) -> Result<f64> {
    let o = &path.overlaps;
    let parts = [o.initial, o.evolved, o.retro_final, o.retro_initial];
    if parts.iter().any(|&x| !(x > tolerances::AMPLITUDE)) {
        return Err(Error::UndefinedOnPath(format!(
            "gamma needs nonzero amplitudes on path {:?}, got {:?}",
            path.labels, parts
        )));
    }
    Ok((o.initial * o.evolved / (o.retro_final * o.retro_initial)).ln())
}

/// The full path ensemble at one time point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathTable {
    pub paths: Vec<PathRecord>,
}

impl PathTable {
    pub fn build(ba: &BasisAssignment, u: &ComplexMatrix) -> Self {
        let mut paths = forward_path_probabilities(ba, u);
        reverse_path_probabilities(ba, u, &mut paths);
        Self { paths }
    }

    pub fn forward_total(&self) -> f64 {
        self.paths.iter().map(|p| p.p_forward).sum()
    }

    pub fn reverse_total(&self) -> f64 {
        self.paths.iter().map(|p| p.p_reverse).sum()
    }

    pub fn retro_total(&self) -> f64 {
        self.paths.iter().map(|p| p.p_retro).sum()
    }

    /// Forward mass of paths excluded by [`PathRecord::prunable`].
    pub fn excluded_mass(&self) -> f64 {
        self.paths.iter().filter(|p| p.prunable()).map(|p| p.p_forward).sum()
    }
}
