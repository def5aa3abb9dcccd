//! Exchange coupling, propagators on a time grid, and unitary evolution.
//!
//! The interaction is kept in angular-frequency units (`hbar = 1`), so the
//! propagator restricted to `span{|01>, |10>}` is the real rotation
//! `[[cos t, -sin t], [sin t, cos t]]` with angle `pi J t / 2`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{propagator_from_hermitian, validate_density_matrix, ComplexMatrix, Hbar};
use crate::tolerances;

/// `H_int = i (pi hbar / 2) J (sigma_A^+ sigma_B^- - sigma_A^- sigma_B^+)` in
/// rad/s, with `sigma^+ = |1><0|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeCoupling {
    coupling: f64,
    h_int: ComplexMatrix,
}

impl ExchangeCoupling {
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn h_int(&self) -> &ComplexMatrix {
        &self.h_int
    }

    /// Rotation angle `pi J t / 2` of the one-excitation block.
    pub fn angle(&self, t: f64) -> f64 {
        FRAC_PI_2 * self.coupling * t
    }
}

/// Builds the exchange interaction for coupling `J` (Hz) and checks that it is
/// Hermitian and commutes with `H_A + H_B`.
pub fn build_exchange(coupling: f64) -> Result<ExchangeCoupling> {
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::param("coupling", format!("must be finite and positive, got {coupling}")));
    }
    let raise = ComplexMatrix::from_rows(&[[c(0.0), c(0.0)], [c(1.0), c(0.0)]])?;
    let lower = raise.dagger();
    let forward = ComplexMatrix::kron(&raise, &lower)?;
    let backward = ComplexMatrix::kron(&lower, &raise)?;
    let h_int = (forward - backward).scale(Complex64::new(0.0, FRAC_PI_2 * coupling));

    let deviation = h_int.hermiticity_defect();
    if deviation > tolerances::HERMITIAN {
        return Err(Error::NotHermitian { deviation });
    }
    let total = number_operator();
    let norm = h_int.commutator(&total).max_abs();
    if norm > 1e-12 {
        return Err(Error::EnergyConservationViolated { norm });
    }
    Ok(ExchangeCoupling { coupling, h_int })
}

/// `exp(-i t H_int)` for `t >= 0` seconds.
pub fn propagator_at(coupling: &ExchangeCoupling, t: f64) -> Result<ComplexMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param("t", format!("must be finite and non-negative, got {t}")));
    }
    propagator_from_hermitian(&coupling.h_int, t, Hbar::Unit)
}

/// `U rho U^dagger`, Hermitian by construction.
pub fn evolve(rho0: &ComplexMatrix, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let validity = validate_density_matrix(rho0, tolerances::PSD_SIMULATION);
    if !validity.is_valid() {
        return Err(Error::InvalidState {
            violations: validity.violations,
        });
    }
    let defect = unitarity_defect(u);
    if defect > tolerances::HERMITIAN {
        return Err(Error::param("U", format!("not unitary (max |U^dagger U - 1| = {defect:.3e})")));
    }
    Ok(rho0.conjugate_by(u).hermitian_part())
}

/// Returns `max |U H - H U|`, or an error above
/// [`tolerances::ENERGY_CONSERVATION`].
pub fn certify_energy_conservation(u: &ComplexMatrix, h_total: &ComplexMatrix) -> Result<f64> {
    let norm = u.commutator(h_total).max_abs();
    if norm > tolerances::ENERGY_CONSERVATION {
        Err(Error::EnergyConservationViolated { norm })
    } else {
        Ok(norm)
    }
}

/// `max |U^dagger U - 1|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let id = ComplexMatrix::identity(u.dim()).expect("validated dimension");
    (u.dagger() * *u - id).max_abs()
}

/// Excitation number `n_A + n_B`; proportional to `H_A + H_B`.
fn number_operator() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0, 2.0]).expect("dimension 4")
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Interaction times in seconds: strictly increasing, starting at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

/// Default sampling: 22 points spanning 0 to 2.32 ms.
pub const DEFAULT_T_MAX_S: f64 = 2.32e-3;
pub const DEFAULT_T_POINTS: usize = 22;

impl TimeGrid {
    pub fn uniform(t_max: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::param("t_points", "need at least two grid points"));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::param("t_max", format!("must be finite and positive, got {t_max}")));
        }
        let step = t_max / (points - 1) as f64;
        let mut times: Vec<f64> = (0..points).map(|k| k as f64 * step).collect();
        times[points - 1] = t_max;
        Self::from_times(times)
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        match times.first() {
            None => return Err(Error::param("times", "grid is empty")),
            Some(&t0) if t0 != 0.0 => return Err(Error::param("times", format!("first time must be 0, got {t0}"))),
            _ => {}
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("times", "non-finite time"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("times", "times must be strictly increasing"));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::uniform(DEFAULT_T_MAX_S, DEFAULT_T_POINTS).expect("valid default grid")
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::from_times(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Vec<f64> {
        g.times
    }
}

/// Propagators computed once per grid point.
#[derive(Clone, Debug)]
pub struct Propagators {
    entries: Vec<(f64, ComplexMatrix)>,
}

impl Propagators {
    pub fn new(coupling: &ExchangeCoupling, grid: &TimeGrid) -> Result<Self> {
        let entries = grid
            .times()
            .iter()
            .map(|&t| propagator_at(coupling, t).map(|u| (t, u)))
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = &(f64, ComplexMatrix)> {
        self.entries.iter()
    }

    pub fn get(&self, index: usize) -> Option<&ComplexMatrix> {
        self.entries.get(index).map(|(_, u)| u)
    }
}
