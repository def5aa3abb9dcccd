mod common;

use common::{rand_hermitian4, to_library};
use proptest::prelude::*;
use qheat_core::ingest::{
    mean_std, monte_carlo_uncertainty, parse_snapshots, snapshots_to_csv, snapshots_to_json, write_snapshots,
    Repair,
};
use qheat_core::linalg::validate_density_matrix;
use qheat_core::report::simulate_states;
use qheat_core::{
    hermitian_eig, load_snapshots, psd_project, ComplexMatrix, Complex64, SnapshotFormat, StateSnapshot,
    ThermalParameters, TimeGrid, UncertaintyConfig,
};

fn simulated() -> Vec<StateSnapshot> {
    simulate_states(&ThermalParameters::correlated(), TimeGrid::default().times())
        .unwrap()
        .into_iter()
        .map(|(s, _)| s)
        .collect()
}

#[test]
fn json_and_csv_round_trip_bit_identically() {
    let snaps = simulated();
    for format in [SnapshotFormat::Json, SnapshotFormat::Csv] {
        let text = match format {
            SnapshotFormat::Json => snapshots_to_json(&snaps),
            SnapshotFormat::Csv => snapshots_to_csv(&snaps),
        };
        let back = parse_snapshots(&text, format, 1e-3).unwrap();
        assert_eq!(back.len(), snaps.len());
        for (a, b) in snaps.iter().zip(&back) {
            assert_eq!(a.time.to_bits(), b.time.to_bits());
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(a.rho[(i, j)].re.to_bits(), b.rho[(i, j)].re.to_bits(), "{format:?}");
                    assert_eq!(a.rho[(i, j)].im.to_bits(), b.rho[(i, j)].im.to_bits(), "{format:?}");
                }
            }
        }
    }
}

#[test]
fn files_are_loaded_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = simulated();
    for (name, format) in [("s.json", SnapshotFormat::Json), ("s.csv", SnapshotFormat::Csv)] {
        let path = dir.path().join(name);
        write_snapshots(&snaps, &path, format).unwrap();
        assert_eq!(SnapshotFormat::from_path(&path), Some(format));
        let back = load_snapshots(&path, format).unwrap();
        assert_eq!(back.len(), 22);
    }
    assert!(load_snapshots(&dir.path().join("missing.json"), SnapshotFormat::Json).is_err());
}

#[test]
fn strongly_negative_states_are_rejected() {
    let mut rho = ComplexMatrix::from_real_diagonal(&[0.6, 0.3, 0.2, -0.1]).unwrap();
    let snaps = vec![StateSnapshot::simulated(0.0, rho)];
    let text = snapshots_to_json(&snaps);
    assert!(parse_snapshots(&text, SnapshotFormat::Json, 1e-3).is_err());

    rho = ComplexMatrix::from_real_diagonal(&[0.6, 0.3, 0.1005, -0.0005]).unwrap();
    let text = snapshots_to_json(&[StateSnapshot::simulated(0.0, rho)]);
    let back = parse_snapshots(&text, SnapshotFormat::Json, 1e-3).unwrap();
    assert!(back[0].repairs.iter().any(|r| matches!(r, Repair::PsdProjected { .. })));
    assert!(validate_density_matrix(&back[0].rho, 1e-12).is_valid());
}

#[test]
fn malformed_input_is_rejected() {
    assert!(parse_snapshots("{\"times\": [0.0]}", SnapshotFormat::Json, 1e-3).is_err());
    assert!(parse_snapshots("{\"times\": [], \"states\": [], \"extra\": 1}", SnapshotFormat::Json, 1e-3).is_err());
    assert!(parse_snapshots("t,row,col,re,im\n0,0,0,1,0\n", SnapshotFormat::Csv, 1e-3).is_err());
    assert!(parse_snapshots("a,b\n", SnapshotFormat::Csv, 1e-3).is_err());
}

fn trace_pipeline(snaps: &[StateSnapshot]) -> qheat_core::Result<Vec<(String, f64)>> {
    Ok(snaps
        .iter()
        .enumerate()
        .map(|(i, s)| (format!("p{i}"), hermitian_eig(&s.rho).unwrap().eigenvalues[0]))
        .collect())
}

#[test]
fn monte_carlo_is_reproducible_per_seed() {
    let snaps: Vec<_> = simulated().into_iter().take(3).collect();
    let cfg = UncertaintyConfig {
        n_resamples: 64,
        noise_sigma: 1e-3,
        seed: 7,
        ..UncertaintyConfig::default()
    };
    let a = monte_carlo_uncertainty(&snaps, &cfg, trace_pipeline).unwrap();
    let b = monte_carlo_uncertainty(&snaps, &cfg, trace_pipeline).unwrap();
    assert_eq!(a, b);
    let c = monte_carlo_uncertainty(&snaps, &UncertaintyConfig { seed: 8, ..cfg.clone() }, trace_pipeline).unwrap();
    assert_ne!(a.quantities, c.quantities);
    assert!(a.quantities.iter().all(|q| q.std > 0.0));
}

#[test]
fn zero_noise_gives_zero_spread() {
    let snaps: Vec<_> = simulated().into_iter().take(2).collect();
    let mut with_zero = snaps.clone();
    for s in &mut with_zero {
        s.uncertainty = Some([[(0.0, 0.0); 4]; 4]);
    }
    let cfg = UncertaintyConfig {
        n_resamples: 16,
        ..UncertaintyConfig::default()
    };
    assert!(!cfg.enabled_for(&snaps));
    assert!(cfg.enabled_for(&with_zero));
    let summary = monte_carlo_uncertainty(&with_zero, &cfg, trace_pipeline).unwrap();
    assert!(summary.quantities.iter().all(|q| q.std == 0.0));
}

#[test]
fn failing_resamples_abort_the_estimate() {
    let snaps: Vec<_> = simulated().into_iter().take(1).collect();
    let cfg = UncertaintyConfig {
        n_resamples: 10,
        noise_sigma: 1e-3,
        ..UncertaintyConfig::default()
    };
    let always_fail = |_: &[StateSnapshot]| -> qheat_core::Result<Vec<(String, f64)>> {
        Err(qheat_core::Error::UndefinedOnPath("fails".into()))
    };
    assert!(monte_carlo_uncertainty(&snaps, &cfg, always_fail).is_err());
}

#[test]
fn sample_standard_deviation() {
    let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m, 2.5);
    assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!(mean_std(&[0.1; 5]), (0.1, 0.0));
}

fn entries() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 16)
}

proptest! {
    #[test]
    fn psd_projection_is_idempotent(e in entries(), shift in 0.0f64..0.3) {
        let h = to_library(&rand_hermitian4(&e));
        let m = h.scale(Complex64::new(0.1, 0.0)) + ComplexMatrix::identity(4).unwrap().scale(Complex64::new(0.25 - shift, 0.0));
        let mut m = m;
        let tr = m.trace().re;
        prop_assume!(tr.abs() > 0.1);
        m = m.scale(Complex64::new(1.0 / tr, 0.0));
        let once = psd_project(&m, 0.0);
        prop_assume!(once.is_ok());
        let once = once.unwrap();
        let twice = psd_project(&once, 0.0).unwrap();
        prop_assert!((once - twice).max_abs() < 1e-12);
        prop_assert!(hermitian_eig(&once).unwrap().min_eigenvalue() >= -1e-12);
        prop_assert!((once.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn valid_states_survive_ingest_unchanged(e in entries()) {
        let m = rand_hermitian4(&e);
        let rho = m * m.adjoint();
        let rho = to_library(&(rho / rho.trace()));
        let snaps = vec![StateSnapshot::simulated(0.0, rho)];
        let back = parse_snapshots(&snapshots_to_json(&snaps), SnapshotFormat::Json, 1e-3).unwrap();
        prop_assert!((back[0].rho - rho).max_abs() < 1e-14);
    }
}
