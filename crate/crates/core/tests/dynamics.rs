mod common;

use common::{analytic_propagator, c, to_library, Model};
use proptest::prelude::*;
use qheat_core::dynamics::{certify_energy_conservation, unitarity_defect};
use qheat_core::linalg::validate_density_matrix;
use qheat_core::states::{effective_local_beta, gibbs_state, total_local_hamiltonian, LocalTemperature};
use qheat_core::{
    build_exchange, correlated_initial_state, evolve, hermitian_eig, partial_trace, propagator_at, Complex64, Propagators,
    Subsystem, ThermalParameters, TimeGrid,
};

fn correlated() -> ThermalParameters {
    ThermalParameters::correlated()
}

#[test]
fn initial_state_matches_oracle() {
    for (p, m) in [
        (ThermalParameters::correlated(), Model::correlated()),
        (ThermalParameters::uncorrelated(), Model::uncorrelated()),
    ] {
        let ours = correlated_initial_state(&p).unwrap();
        assert!((ours - to_library(&m.rho0())).max_abs() < 1e-15);
    }
}

#[test]
fn propagator_matches_taylor_and_closed_form() {
    let coupling = build_exchange(215.1).unwrap();
    let model = Model::correlated();
    for t in TimeGrid::default().times().iter().chain(&[1.77e-3, 1.88e-3, 1e-2]) {
        let u = propagator_at(&coupling, *t).unwrap();
        assert!((u - to_library(&model.propagator(*t))).max_abs() < 1e-12, "t = {t}");
        assert!((u - to_library(&analytic_propagator(215.1, *t))).max_abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn grid_propagators_are_certified() {
    let p = correlated();
    let coupling = build_exchange(p.coupling()).unwrap();
    let h = total_local_hamiltonian(&p.hamiltonian(Subsystem::A), &p.hamiltonian(Subsystem::B));
    let props = Propagators::new(&coupling, &TimeGrid::default()).unwrap();
    assert_eq!(props.iter().count(), 22);
    for (_, u) in props.iter() {
        assert!(certify_energy_conservation(u, &h).unwrap() < 1e-10);
        assert!(unitarity_defect(u) < 1e-10);
    }
}

#[test]
fn evolution_preserves_marginal_thermality_only_without_correlations() {
    let p = ThermalParameters::uncorrelated();
    let rho0 = correlated_initial_state(&p).unwrap();
    let u = propagator_at(&build_exchange(p.coupling()).unwrap(), 2.32e-3).unwrap();
    let rho_a = partial_trace(&evolve(&rho0, &u).unwrap(), Subsystem::A).unwrap();
    assert!(matches!(
        effective_local_beta(&rho_a, &p.hamiltonian(Subsystem::A)).unwrap(),
        LocalTemperature::Thermal { .. }
    ));
}

#[test]
fn gibbs_marginals_of_initial_state() {
    let p = correlated();
    let rho0 = correlated_initial_state(&p).unwrap();
    for which in [Subsystem::A, Subsystem::B] {
        let h = p.hamiltonian(which);
        let expected = gibbs_state(p.beta(which), &h).unwrap();
        assert!((partial_trace(&rho0, which).unwrap() - expected).max_abs() < 1e-15);
    }
}

#[test]
fn alpha_beyond_bound_is_rejected() {
    let p = correlated();
    let too_big = Complex64::new(p.alpha_bound() * 1.01, 0.0);
    assert!(p.with_alpha(too_big).is_err());
    let at_bound = p.with_alpha(Complex64::new(0.0, p.alpha_bound())).unwrap();
    let rho = correlated_initial_state(&at_bound).unwrap();
    assert!(hermitian_eig(&rho).unwrap().min_eigenvalue() > -1e-12);
}

proptest! {
    #[test]
    fn local_beta_round_trips(beta_inv in 0.5f64..50.0) {
        let p = ThermalParameters::new(beta_inv, 3.3, 1e3, 215.1, Complex64::new(0.0, 0.0)).unwrap();
        let h = p.hamiltonian(Subsystem::A);
        let rho = gibbs_state(p.beta_a(), &h).unwrap();
        let beta = effective_local_beta(&rho, &h).unwrap().beta().unwrap();
        prop_assert!((beta - 1.0 / beta_inv).abs() < 1e-9 * (1.0 / beta_inv));
    }

    #[test]
    fn propagators_compose(t1 in 0.0f64..5e-3, t2 in 0.0f64..5e-3, j in 10.0f64..1000.0) {
        let coupling = build_exchange(j).unwrap();
        let u1 = propagator_at(&coupling, t1).unwrap();
        let u2 = propagator_at(&coupling, t2).unwrap();
        let u12 = propagator_at(&coupling, t1 + t2).unwrap();
        prop_assert!((u1 * u2 - u12).max_abs() < 1e-12);
    }

    #[test]
    fn evolution_preserves_spectrum_and_validity(
        bai in 1.0f64..10.0,
        bbi in 1.0f64..10.0,
        frac in 0.0f64..1.0,
        phase in 0.0f64..std::f64::consts::TAU,
        t in 0.0f64..1e-2,
    ) {
        let bound = qheat_core::states::alpha_bound(1.0 / bai, 1.0 / bbi, 1e3).unwrap();
        let alpha = Complex64::from_polar(frac * bound, phase);
        let p = ThermalParameters::new(bai, bbi, 1e3, 215.1, alpha).unwrap();
        let rho0 = correlated_initial_state(&p).unwrap();
        let u = propagator_at(&build_exchange(p.coupling()).unwrap(), t).unwrap();
        let rho_t = evolve(&rho0, &u).unwrap();
        prop_assert!(validate_density_matrix(&rho_t, 1e-10).is_valid());
        let e0 = hermitian_eig(&rho0).unwrap().eigenvalues;
        let e1 = hermitian_eig(&rho_t).unwrap().eigenvalues;
        for (a, b) in e0.iter().zip(&e1) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exchange_conserves_energy(j in 1.0f64..1e4, t in 0.0f64..1.0) {
        let p = correlated();
        let h = total_local_hamiltonian(&p.hamiltonian(Subsystem::A), &p.hamiltonian(Subsystem::B));
        let u = propagator_at(&build_exchange(j).unwrap(), t).unwrap();
        prop_assert!(u.commutator(&h).max_abs() < 1e-10);
        prop_assert!((u - to_library(&analytic_propagator(j, t))).max_abs() < 1e-10);
    }
}

#[test]
fn block_rotation_sign_convention() {
    let u = propagator_at(&build_exchange(215.1).unwrap(), 1.0e-3).unwrap();
    let theta = std::f64::consts::PI * 215.1 * 1.0e-3 / 2.0;
    assert!((u[(2, 1)] - c(theta.sin(), 0.0)).norm() < 1e-14);
    assert!((u[(1, 2)] + c(theta.sin(), 0.0)).norm() < 1e-14);
}
