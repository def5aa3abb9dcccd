//! Two-qubit heat-exchange fluctuation theorems.
//!
//! Builds the conditional path ensemble of two initially correlated qubits
//! coupled by an energy-conserving exchange interaction, evaluates the
//! information and entropy-production functionals on every path, and checks
//! the detailed and integral fluctuation theorems at each time point.

// `!(x <= tol)` is used so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod ingest;
pub mod linalg;
pub mod report;
pub mod states;
pub mod tolerances;
pub mod trajectories;

pub use dynamics::{build_exchange, evolve, propagator_at, ExchangeCoupling, Propagators, TimeGrid};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use functionals::{
    DetailedFtRecord, FtQuantity, HeatBin, HeatHistogram, IntegralAverages, IntegralRow, JointProbability,
    PathContext, PathFunctionals,
};
pub use ingest::{load_snapshots, psd_project, SnapshotFormat, StateSnapshot, UncertaintyConfig, UncertaintySummary};
pub use linalg::{hermitian_eig, partial_trace, ComplexMatrix, SpectralEnsemble, Subsystem};
pub use report::{compare_runs, run, CheckCategory, FtReport, Mode, RunConfig, RunOutput, TimePointReport};
pub use states::{correlated_initial_state, QubitHamiltonian, ThermalParameters};
pub use trajectories::{assign_bases, BasisAssignment, PathRecord, PathTable, StateSource};
