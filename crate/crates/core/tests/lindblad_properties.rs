mod common;

use common::*;
use proptest::prelude::*;
use purestate::lindblad::{
    apply_liouvillian, integrate, integrate_sampled, stability, steady_state, superoperator, vectorize,
    LindbladSystem, Selection,
};
use purestate::qcore::{DensityMatrix, StateVector};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn random_system(rng: &mut Xoshiro256PlusPlus, n: usize, n_ops: usize) -> (M, Vec<M>, LindbladSystem) {
    let h = random_hermitian(rng, n);
    let ops: Vec<M> = (0..n_ops).map(|_| gaussian(rng, n, n)).collect();
    let sys = LindbladSystem::new(h.clone(), ops.clone()).unwrap();
    (h, ops, sys)
}

#[test]
fn zero_generator_keeps_state_constant() {
    let mut rng = rng(1);
    let rho = DensityMatrix::new(random_density(&mut rng, 3)).unwrap();
    let evo = integrate(&LindbladSystem::empty(3), &rho, 1.0, 0.1).unwrap();
    assert!(evo.states.iter().all(|s| s.matrix() == rho.matrix()));
}

#[test]
fn excited_population_decays_at_the_generator_rate() {
    for gamma in [0.5f64, 1.0, 4.0] {
        let c = scale(&sm(), gamma.sqrt() / 2.0);
        let sys = LindbladSystem::new(M::zeros(2, 2), vec![c]).unwrap();
        let rate = -real_schur_eigenvalues(&vectorize(&sys).a)
            .iter()
            .filter(|e| e.im.abs() < 1e-12)
            .map(|e| e.re)
            .fold(f64::INFINITY, f64::min);
        assert!((rate - gamma).abs() < 1e-12, "rate {rate}");
        let excited = DensityMatrix::pure(&StateVector::basis(2, 0));
        let evo = integrate_sampled(&sys, &excited, 3.0, 1e-3, 100).unwrap();
        for (t, s) in evo.times.iter().zip(&evo.states) {
            assert!((s.matrix()[(0, 0)].re - (-rate * t).exp()).abs() < 1e-8, "t = {t}");
        }
    }
}

#[test]
fn long_integration_reaches_the_steady_state() {
    let mut rng = rng(11);
    for n in [2, 3] {
        let (_, _, sys) = random_system(&mut rng, n, 2);
        let gap = -stability(&vectorize(&sys)).unwrap().spectral_abscissa;
        assert!(gap > 1e-3);
        let ss = steady_state(&sys).unwrap();
        let t_final = 60.0 / gap;
        let dt = (0.2 / sys.scale()).min(t_final / 100.0);
        let evo = integrate_sampled(&sys, &DensityMatrix::maximally_mixed(n), t_final, dt, 1_000_000).unwrap();
        assert!(trace_distance(evo.last().matrix(), ss.rho.matrix()) < 1e-6);
    }
}

#[test]
fn dephasing_fixed_points_select_a_pure_state() {
    let d = M::from_diagonal(&V::from_vec(vec![z(1., 0.), z(2., 0.), z(3., 0.)]));
    let sys = LindbladSystem::new(M::zeros(3, 3), vec![d.clone()]).unwrap();
    let ss = steady_state(&sys).unwrap();
    assert!(!ss.unique);
    assert_eq!(ss.degeneracy, 2);
    assert_eq!(ss.selection, Selection::Pure);
    assert!((purity(ss.rho.matrix()) - 1.0).abs() < 1e-12);
    assert!(apply(&M::zeros(3, 3), &[d], ss.rho.matrix()).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generator_preserves_trace_and_hermiticity(seed in any::<u64>(), n in 2usize..5, n_ops in 1usize..4) {
        let mut rng = rng(seed);
        let (h, ops, sys) = random_system(&mut rng, n, n_ops);
        let rho = random_density(&mut rng, n);
        let out = apply_liouvillian(&sys, &rho).unwrap();
        prop_assert!(out.trace().norm() <= 1e-12 * sys.scale().max(1.0));
        prop_assert!((&out - out.adjoint()).norm() <= 1e-12 * sys.scale().max(1.0));
        prop_assert!((&out - apply(&h, &ops, &rho)).norm() <= 1e-12 * sys.scale().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn superoperator_matches_kronecker_oracle(seed in any::<u64>(), n in 2usize..5, n_ops in 1usize..4) {
        let mut rng = rng(seed);
        let (h, ops, sys) = random_system(&mut rng, n, n_ops);
        let gap = (superoperator(&sys) - liouvillian(&h, &ops)).iter().map(|e| e.norm()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-12 * sys.scale().max(1.0));
        let rho = random_density(&mut rng, n);
        prop_assert!((superoperator(&sys) * vec_cols(&rho) - vec_cols(&apply(&h, &ops, &rho))).norm() <= 1e-12 * sys.scale());
    }

    #[test]
    fn affine_form_reproduces_generator(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = rng(seed);
        let (h, ops, sys) = random_system(&mut rng, n, 2);
        let dynamics = vectorize(&sys);
        let rho = random_density(&mut rng, n);
        let x = dynamics.map.coords_of(&rho);
        prop_assert!((dynamics.map.density(&x) - &rho).norm() <= 1e-13);
        let lhs = dynamics.map.tangent(&dynamics.velocity(&x));
        prop_assert!((lhs - apply(&h, &ops, &rho)).norm() <= 1e-10);
    }

    #[test]
    fn unital_generators_never_raise_purity(seed in any::<u64>(), n in 2usize..5, n_ops in 1usize..4) {
        let mut rng = rng(seed);
        let h = random_hermitian(&mut rng, n);
        let ops: Vec<M> = (0..n_ops).map(|_| random_hermitian(&mut rng, n)).collect();
        let sys = LindbladSystem::new(h, ops).unwrap();
        prop_assert!(sys.apply(&(eye(n) / z(n as f64, 0.))).norm() <= 1e-14);
        let rho = random_density(&mut rng, n);
        let rate = 2.0 * (&rho * sys.apply(&rho)).trace().re;
        prop_assert!(rate <= 1e-10, "d/dt purity = {}", rate);
    }

    #[test]
    fn steady_states_have_small_residuals(seed in any::<u64>(), n in 2usize..5, n_ops in 1usize..3) {
        let mut rng = rng(seed);
        let (h, ops, sys) = random_system(&mut rng, n, n_ops);
        let ss = steady_state(&sys).unwrap();
        prop_assert!(ss.residual <= 1e-9 * sys.scale());
        prop_assert!(apply(&h, &ops, ss.rho.matrix()).norm() <= 1e-9 * sys.scale());
        prop_assert!(ss.spectral_abscissa <= 1e-8);
        prop_assert!(hermitian_eigen(ss.rho.matrix()).0[0] >= -1e-9);
    }
}
