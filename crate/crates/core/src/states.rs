//! Local Hamiltonians, Gibbs marginals and the correlated initial state.
//!
//! Units: energies in peV, inverse temperatures in 1/peV, frequencies in Hz.
//! Qubit states `|0>` and `|1>` carry energies `0` and `h nu0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{validate_density_matrix, ComplexMatrix, Subsystem};
use crate::tolerances;

/// Planck constant in peV s (CODATA 2018, exact).
pub const PLANCK_PEV_S: f64 = 4.135667696e-3;

/// Slack allowed above the alpha positivity bound.
pub const ALPHA_BOUND_SLACK: f64 = 1e-12;

/// Temperatures, level spacing, exchange coupling and initial correlation of
/// the two-qubit experiment.
///
/// Temperatures are stored as `beta^-1` in peV, the form in which they are
/// reported and configured, so that configs round-trip exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThermalParametersRepr", into = "ThermalParametersRepr")]
pub struct ThermalParameters {
    beta_a_inv: f64,
    beta_b_inv: f64,
    nu0: f64,
    coupling: f64,
    alpha: Complex64,
}

impl ThermalParameters {
    pub fn new(beta_a_inv: f64, beta_b_inv: f64, nu0: f64, coupling: f64, alpha: Complex64) -> Result<Self> {
        positive("beta_a_inv", beta_a_inv)?;
        positive("beta_b_inv", beta_b_inv)?;
        positive("nu0", nu0)?;
        positive("coupling", coupling)?;
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::param("alpha", "must be finite"));
        }
        let bound = alpha_bound(1.0 / beta_a_inv, 1.0 / beta_b_inv, nu0)?;
        let modulus = alpha.norm();
        if modulus > bound + ALPHA_BOUND_SLACK {
            return Err(Error::AlphaOutOfBound { alpha, modulus, bound });
        }
        Ok(Self {
            beta_a_inv,
            beta_b_inv,
            nu0,
            coupling,
            alpha,
        })
    }

    /// Initially correlated run: `beta_A^-1 = 4.7 peV`, `beta_B^-1 = 3.3 peV`,
    /// `alpha = 0.17 + 0.03i`, `J = 215.1 Hz`, `nu0 = 1 kHz`.
    pub fn correlated() -> Self {
        Self::new(4.7, 3.3, 1.0e3, 215.1, Complex64::new(0.17, 0.03)).expect("preset within bound")
    }

    /// Uncorrelated run: `beta_A^-1 = 4.3 peV`, `beta_B^-1 = 3.7 peV`, `alpha = 0`.
    pub fn uncorrelated() -> Self {
        Self::new(4.3, 3.7, 1.0e3, 215.1, Complex64::new(0.0, 0.0)).expect("preset within bound")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "correlated" => Some(Self::correlated()),
            "uncorrelated" => Some(Self::uncorrelated()),
            _ => None,
        }
    }

    pub fn with_alpha(&self, alpha: Complex64) -> Result<Self> {
        Self::new(self.beta_a_inv, self.beta_b_inv, self.nu0, self.coupling, alpha)
    }

    pub fn beta_a_inv(&self) -> f64 {
        self.beta_a_inv
    }

    pub fn beta_b_inv(&self) -> f64 {
        self.beta_b_inv
    }

    pub fn beta_a(&self) -> f64 {
        1.0 / self.beta_a_inv
    }

    pub fn beta_b(&self) -> f64 {
        1.0 / self.beta_b_inv
    }

    pub fn beta(&self, which: Subsystem) -> f64 {
        match which {
            Subsystem::A => self.beta_a(),
            Subsystem::B => self.beta_b(),
        }
    }

    /// `beta_A - beta_B` (1/peV).
    pub fn delta_beta(&self) -> f64 {
        self.beta_a() - self.beta_b()
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    /// Exchange coupling `J` in Hz.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn is_uncorrelated(&self) -> bool {
        self.alpha == Complex64::new(0.0, 0.0)
    }

    pub fn planck_h(&self) -> f64 {
        PLANCK_PEV_S
    }

    /// `h nu0` in peV.
    pub fn level_spacing(&self) -> f64 {
        PLANCK_PEV_S * self.nu0
    }

    pub fn alpha_bound(&self) -> f64 {
        alpha_bound(self.beta_a(), self.beta_b(), self.nu0).expect("validated at construction")
    }

    pub fn hamiltonian(&self, which: Subsystem) -> QubitHamiltonian {
        QubitHamiltonian::new(which, self.nu0).expect("validated at construction")
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and positive, got {x}")))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThermalParametersRepr {
    beta_a_inv_pev: f64,
    beta_b_inv_pev: f64,
    nu0_hz: f64,
    coupling_hz: f64,
    alpha_re: f64,
    alpha_im: f64,
}

impl TryFrom<ThermalParametersRepr> for ThermalParameters {
    type Error = Error;

    fn try_from(r: ThermalParametersRepr) -> Result<Self> {
        Self::new(
            r.beta_a_inv_pev,
            r.beta_b_inv_pev,
            r.nu0_hz,
            r.coupling_hz,
            Complex64::new(r.alpha_re, r.alpha_im),
        )
    }
}

impl From<ThermalParameters> for ThermalParametersRepr {
    fn from(p: ThermalParameters) -> Self {
        Self {
            beta_a_inv_pev: p.beta_a_inv,
            beta_b_inv_pev: p.beta_b_inv,
            nu0_hz: p.nu0,
            coupling_hz: p.coupling,
            alpha_re: p.alpha.re,
            alpha_im: p.alpha.im,
        }
    }
}

/// `H_j = h nu0 (1 - sigma_z) / 2`, diagonal in the computational basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitHamiltonian {
    pub which: Subsystem,
    nu0: f64,
    matrix: ComplexMatrix,
}

impl QubitHamiltonian {
    pub fn new(which: Subsystem, nu0: f64) -> Result<Self> {
        positive("nu0", nu0)?;
        let matrix = ComplexMatrix::from_real_diagonal(&[0.0, PLANCK_PEV_S * nu0])?;
        Ok(Self { which, nu0, matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `(E_0, E_1) = (0, h nu0)` in peV.
    pub fn energies(&self) -> [f64; 2] {
        [0.0, self.level_spacing()]
    }

    pub fn level_spacing(&self) -> f64 {
        PLANCK_PEV_S * self.nu0
    }

    /// `<v|H|v>` in peV.
    pub fn energy_of(&self, v: &[Complex64]) -> f64 {
        self.matrix.expectation(v).re
    }
}

/// `H_A (x) 1 + 1 (x) H_B`.
pub fn total_local_hamiltonian(h_a: &QubitHamiltonian, h_b: &QubitHamiltonian) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2).expect("dimension 2");
    ComplexMatrix::kron(h_a.matrix(), &id).expect("2x2 factors") + ComplexMatrix::kron(&id, h_b.matrix()).expect("2x2 factors")
}

/// Ground and excited populations `(1, e^{-beta h nu0}) / Z`.
pub fn gibbs_populations(beta: f64, level_spacing: f64) -> [f64; 2] {
    let x = beta * level_spacing;
    [1.0 / (1.0 + (-x).exp()), 1.0 / (1.0 + x.exp())]
}

/// `exp(-beta H) / Z` for a single qubit.
pub fn gibbs_state(beta: f64, h: &QubitHamiltonian) -> Result<ComplexMatrix> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    ComplexMatrix::from_real_diagonal(&gibbs_populations(beta, h.level_spacing()))
}

/// Largest `|alpha|` keeping the correlated initial state positive:
/// `exp[-h nu0 (beta_A + beta_B) / 2] / (Z_A Z_B)`.
pub fn alpha_bound(beta_a: f64, beta_b: f64, nu0: f64) -> Result<f64> {
    if !(beta_a > 0.0 && beta_b > 0.0) {
        return Err(Error::param("beta", "inverse temperatures must be positive"));
    }
    positive("nu0", nu0)?;
    let e = PLANCK_PEV_S * nu0;
    let z_a = 1.0 + (-beta_a * e).exp();
    let z_b = 1.0 + (-beta_b * e).exp();
    Ok((-e * (beta_a + beta_b) / 2.0).exp() / (z_a * z_b))
}

/// `rho_A (x) rho_B + alpha |01><10| + alpha* |10><01|` with Gibbs marginals.
pub fn correlated_initial_state(p: &ThermalParameters) -> Result<ComplexMatrix> {
    let bound = p.alpha_bound();
    let modulus = p.alpha().norm();
    if modulus > bound + ALPHA_BOUND_SLACK {
        return Err(Error::AlphaOutOfBound {
            alpha: p.alpha(),
            modulus,
            bound,
        });
    }
    let rho_a = gibbs_state(p.beta_a(), &p.hamiltonian(Subsystem::A))?;
    let rho_b = gibbs_state(p.beta_b(), &p.hamiltonian(Subsystem::B))?;
    Ok(ComplexMatrix::kron(&rho_a, &rho_b)? + chi_matrix(p.alpha()))
}

/// Verdict of [`effective_local_beta`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalTemperature {
    Thermal { beta: f64 },
    /// Equal populations: `beta = 0`.
    InfiniteTemperature,
    NotThermal { coherence: f64 },
}

impl LocalTemperature {
    pub fn beta(&self) -> Option<f64> {
        match self {
            LocalTemperature::Thermal { beta } => Some(*beta),
            LocalTemperature::InfiniteTemperature => Some(0.0),
            LocalTemperature::NotThermal { .. } => None,
        }
    }
}

/// Inverse temperature `ln(p0 / p1) / (h nu0)` of a qubit state that is
/// diagonal in the energy basis.
pub fn effective_local_beta(rho: &ComplexMatrix, h: &QubitHamiltonian) -> Result<LocalTemperature> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            expected: "2",
            found: rho.dim(),
        });
    }
    let validity = validate_density_matrix(rho, tolerances::PSD_SIMULATION);
    if !validity.is_valid() {
        return Err(Error::InvalidState {
            violations: validity.violations,
        });
    }
    let coherence = rho[(0, 1)].norm();
    if coherence > tolerances::THERMAL_COHERENCE {
        return Ok(LocalTemperature::NotThermal { coherence });
    }
    let (p0, p1) = (rho[(0, 0)].re, rho[(1, 1)].re);
    if p0 == p1 {
        return Ok(LocalTemperature::InfiniteTemperature);
    }
    Ok(LocalTemperature::Thermal {
        beta: (p0 / p1).ln() / h.level_spacing(),
    })
}

/// `alpha |01><10| + alpha* |10><01|`.
pub(crate) fn chi_matrix(alpha: Complex64) -> ComplexMatrix {
    let mut chi = ComplexMatrix::zeros_unchecked(4);
    chi[(1, 2)] = alpha;
    chi[(2, 1)] = alpha.conj();
    chi
}
