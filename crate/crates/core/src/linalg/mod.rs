//! Dense complex linear algebra for one- and two-qubit operators.

mod eigen;
mod matrix;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eigen::{fix_phase, hermitian_eig, propagator_from_hermitian, Hbar, SpectralEnsemble};
pub(crate) use eigen::{eig_raw, lexicographic_desc};
pub use matrix::{inner, kron_vec, overlap_sq, ComplexMatrix};

use crate::error::{Error, Result};
use crate::tolerances;

/// One of the two qubits. `A` is the left tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::A => f.write_str("A"),
            Subsystem::B => f.write_str("B"),
        }
    }
}

/// Partial trace of any 4x4 operator, keeping `keep`. Linear, no validation.
pub fn partial_trace_operator(m: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    if m.dim() != 4 {
        return Err(Error::Dimension {
            expected: "4",
            found: m.dim(),
        });
    }
    ComplexMatrix::from_fn(2, |i, j| match keep {
        Subsystem::A => (0..2).map(|b| m[(2 * i + b, 2 * j + b)]).sum(),
        Subsystem::B => (0..2).map(|a| m[(2 * a + i, 2 * a + j)]).sum(),
    })
}

/// Reduced state of one qubit. Rejects inputs that are not Hermitian or not
/// unit-trace.
pub fn partial_trace(rho: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    let violations: Vec<Violation> = structural_violations(rho);
    if !violations.is_empty() {
        return Err(Error::InvalidState { violations });
    }
    partial_trace_operator(rho, keep)
}

/// A reason a matrix fails to be a density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotFinite,
    NotHermitian { deviation: f64 },
    TraceNotOne { trace: f64 },
    NegativeEigenvalue { min_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotFinite => f.write_str("non-finite entries"),
            Violation::NotHermitian { deviation } => write!(f, "non-Hermitian (deviation {deviation:.3e})"),
            Violation::TraceNotOne { trace } => write!(f, "trace {trace:.12} != 1"),
            Violation::NegativeEigenvalue { min_eigenvalue } => {
                write!(f, "negative eigenvalue {min_eigenvalue:.3e}")
            }
        }
    }
}

/// Outcome of [`validate_density_matrix`]; valid iff `violations` is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Validity {
    pub violations: Vec<Violation>,
    pub min_eigenvalue: Option<f64>,
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn structural_violations(m: &ComplexMatrix) -> Vec<Violation> {
    if !m.is_finite() {
        return vec![Violation::NotFinite];
    }
    let mut out = Vec::new();
    let deviation = m.hermiticity_defect();
    if deviation > tolerances::HERMITIAN {
        out.push(Violation::NotHermitian { deviation });
    }
    let trace = m.trace();
    if (trace.re - 1.0).abs() > tolerances::TRACE || trace.im.abs() > tolerances::TRACE {
        out.push(Violation::TraceNotOne { trace: trace.re });
    }
    out
}

/// Lists every density-matrix violation of `m`. The spectrum is taken from
/// the Hermitian part, so a non-Hermitian input still gets a PSD verdict.
pub fn validate_density_matrix(m: &ComplexMatrix, tol_psd: f64) -> Validity {
    let mut violations = structural_violations(m);
    if violations.contains(&Violation::NotFinite) {
        return Validity {
            violations,
            min_eigenvalue: None,
        };
    }
    let min_eigenvalue = hermitian_eig(&m.hermitian_part()).ok().map(|e| e.min_eigenvalue());
    if let Some(min) = min_eigenvalue {
        if min < -tol_psd {
            violations.push(Violation::NegativeEigenvalue { min_eigenvalue: min });
        }
    }
    Validity {
        violations,
        min_eigenvalue,
    }
}

#[cfg(test)]
pub(crate) fn c64(re: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn bell() -> ComplexMatrix {
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c64(amp), c64(0.0), c64(0.0), c64(amp)];
        ComplexMatrix::outer(&psi).unwrap()
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let rho_a = partial_trace(&bell(), Subsystem::A).unwrap();
        let half = ComplexMatrix::identity(2).unwrap().scale(c64(0.5));
        assert!((rho_a - half).max_abs() < 1e-15);
    }

    #[test]
    fn product_state_returns_factor() {
        let a = ComplexMatrix::from_rows(&[[c64(0.7), Complex64::new(0.1, 0.2)], [Complex64::new(0.1, -0.2), c64(0.3)]]).unwrap();
        let b = ComplexMatrix::from_real_diagonal(&[0.6, 0.4]).unwrap();
        let ab = ComplexMatrix::kron(&a, &b).unwrap();
        assert!((partial_trace(&ab, Subsystem::A).unwrap() - a).max_abs() < 1e-15);
        assert!((partial_trace(&ab, Subsystem::B).unwrap() - b).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_trace() {
        let m = ComplexMatrix::identity(4).unwrap();
        assert!(matches!(partial_trace(&m, Subsystem::A), Err(Error::InvalidState { .. })));
    }

    #[test]
    fn maximally_mixed_is_valid() {
        let m = ComplexMatrix::identity(4).unwrap().scale(c64(0.25));
        assert!(validate_density_matrix(&m, tolerances::PSD_SIMULATION).is_valid());
    }

    #[test]
    fn negative_population_is_flagged() {
        let m = ComplexMatrix::from_real_diagonal(&[1.2, -0.2, 0.0, 0.0]).unwrap();
        let v = validate_density_matrix(&m, tolerances::PSD_SIMULATION);
        assert_eq!(v.violations.len(), 1);
        assert!(matches!(v.violations[0], Violation::NegativeEigenvalue { min_eigenvalue } if (min_eigenvalue + 0.2).abs() < 1e-15));
    }

    #[test]
    fn reports_every_violation() {
        let mut m = ComplexMatrix::from_real_diagonal(&[0.9, -0.1, 0.5, 0.0]).unwrap();
        m[(0, 1)] = c64(1e-3);
        let v = validate_density_matrix(&m, tolerances::PSD_SIMULATION);
        assert_eq!(v.violations.len(), 3);
    }
}
