//! Numerical thresholds shared across the pipeline.
//!
//! Every comparison against a fixed threshold goes through one of these
//! constants so the acceptance suite and the library agree on what "equal"
//! means.

/// Largest `|M - M^dagger|` entry accepted as Hermitian.
pub const HERMITIAN: f64 = 1e-10;

/// Allowed deviation of a density-matrix trace from one.
pub const TRACE: f64 = 1e-10;

/// Most negative eigenvalue tolerated in a simulated state.
pub const PSD_SIMULATION: f64 = 1e-10;

/// Most negative eigenvalue tolerated in an ingested (tomographic) state.
pub const PSD_INGEST: f64 = 1e-3;

/// Jacobi convergence threshold on the off-diagonal Frobenius norm, relative
/// to the matrix norm.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-14;

/// Sweep budget of the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues closer than this form a degenerate cluster.
pub const DEGENERACY: f64 = 1e-10;

/// Components below this modulus are skipped by the eigenvector phase fix.
pub const PHASE_COMPONENT: f64 = 1e-12;

/// Squared overlaps below this are exact zeros.
pub const AMPLITUDE: f64 = 1e-14;

/// Paths lighter than this carry no measure in averages.
pub const PRUNE: f64 = 1e-14;

/// Total pruned forward mass above which a run fails.
pub const EXCLUDED_MASS: f64 = 1e-12;

/// Above this commutator norm the simulation refuses to proceed.
pub const ENERGY_CONSERVATION: f64 = 1e-10;

/// Default heat snapping distance (peV).
pub const HEAT_SNAP: f64 = 1e-6;

/// Default tolerance on every integral fluctuation-theorem average.
pub const INTEGRAL_FT: f64 = 1e-9;

/// Default tolerance on the detailed Jarzynski-Wojcik relation.
pub const DETAILED_FT: f64 = 1e-9;

/// Floor for Jensen checks `<X> >= -tol`.
pub const JENSEN: f64 = 1e-10;

/// Off-diagonal magnitude below which a qubit state counts as diagonal.
pub const THERMAL_COHERENCE: f64 = 1e-9;
