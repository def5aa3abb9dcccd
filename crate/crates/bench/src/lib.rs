//! Shared fixtures for the criterion benchmarks.

use qheat_core::{correlated_initial_state, ComplexMatrix, ThermalParameters};

/// Initial state of the correlated preset.
pub fn correlated_state() -> ComplexMatrix {
    correlated_initial_state(&ThermalParameters::correlated()).expect("preset is valid")
}
