mod common;

use common::*;
use proptest::prelude::*;
use purestate::qcore::eig::eig;
use purestate::qcore::{concurrence as lib_concurrence, kron, purity as lib_purity, trace_distance as lib_td};
use purestate::qcore::{DensityMatrix, StateVector};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn haar_unitary(rng: &mut Xoshiro256PlusPlus, n: usize) -> M {
    let qr = gaussian(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = M::from_diagonal(&V::from_iterator(n, (0..n).map(|k| r[(k, k)] / z(r[(k, k)].norm(), 0.))));
    q * phases
}

fn max_entry(m: &M) -> f64 {
    m.iter().map(|e| e.norm()).fold(0.0, f64::max)
}

#[test]
fn werner_state_concurrence() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi = V::from_vec(vec![z(s, 0.), z(0., 0.), z(0., 0.), z(s, 0.)]);
    let p = 0.5;
    let rho = projector(&phi) * z(p, 0.) + eye(4) * z((1.0 - p) / 4.0, 0.);
    let expected = (3.0 * p - 1.0) / 2.0;
    assert!((concurrence(&rho) - expected).abs() < 1e-12);
    let lib = lib_concurrence(&DensityMatrix::new(rho).unwrap()).unwrap();
    assert!((lib - expected).abs() < 1e-9, "{lib}");
}

#[test]
fn product_states_are_unentangled() {
    let mut rng = rng(3);
    for _ in 0..20 {
        let a = random_state(&mut rng, 2);
        let b = random_state(&mut rng, 2);
        let psi = StateVector::normalized(a.kronecker(&b)).unwrap();
        assert!(lib_concurrence(&DensityMatrix::pure(&psi)).unwrap() < 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn purity_bounds_and_pure_iff_idempotent(seed in any::<u64>(), n in 2usize..5, rank in 1usize..5) {
        let mut rng = rng(seed);
        let rank = rank.min(n);
        let g = gaussian(&mut rng, n, rank);
        let m = &g * g.adjoint();
        let t = m.trace();
        let rho = DensityMatrix::new(m / t).unwrap();
        let p = lib_purity(&rho);
        prop_assert!(p >= 1.0 / n as f64 - 1e-12 && p <= 1.0 + 1e-12);
        prop_assert!((p - purity(rho.matrix())).abs() < 1e-12);
        let idempotent = (rho.matrix() * rho.matrix() - rho.matrix()).norm() <= 1e-9;
        prop_assert_eq!(idempotent, (p - 1.0).abs() <= 1e-9);
        prop_assert_eq!(idempotent, rank == 1);
    }

    #[test]
    fn concurrence_matches_oracle_and_is_locally_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let rho = random_density(&mut rng, 4);
        let u = kr(&haar_unitary(&mut rng, 2), &haar_unitary(&mut rng, 2));
        let rotated = &u * &rho * u.adjoint();
        let before = lib_concurrence(&DensityMatrix::new(rho.clone()).unwrap()).unwrap();
        let after = lib_concurrence(&DensityMatrix::new(rotated).unwrap()).unwrap();
        prop_assert!((before - after).abs() <= 1e-9, "{} vs {}", before, after);
        prop_assert!((before - concurrence(&rho)).abs() <= 1e-9);
    }

    #[test]
    fn pure_state_concurrence_is_twice_determinant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let v = random_state(&mut rng, 4);
        let expected = 2.0 * (v[0] * v[3] - v[1] * v[2]).norm();
        let c = lib_concurrence(&DensityMatrix::pure(&StateVector::normalized(v).unwrap())).unwrap();
        prop_assert!((c - expected).abs() <= 1e-7, "{} vs {}", c, expected);
    }

    #[test]
    fn kron_is_associative_and_mixes_products(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let [a, b, c, d] = [0; 4].map(|_| gaussian(&mut rng, 2, 2));
        prop_assert!(max_entry(&(kron(&kron(&a, &b), &c) - kron(&a, &kron(&b, &c)))) <= 1e-12);
        prop_assert!(max_entry(&(kron(&a, &b) * kron(&c, &d) - kron(&(&a * &c), &(&b * &d)))) <= 1e-12);
        prop_assert_eq!(kron(&a, &b), kr(&a, &b));
    }

    #[test]
    fn eigenpairs_have_small_residuals_and_match_schur(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = rng(seed);
        let m = gaussian(&mut rng, n, n);
        let e = eig(&m).unwrap();
        prop_assert!(e.max_residual() <= 1e-9 * m.norm().max(1.0));
        for (lambda, v) in e.eigenvalues.iter().zip(&e.eigenvectors) {
            prop_assert!((&m * v.amplitudes() - v.amplitudes() * *lambda).norm() <= 1e-9 * m.norm().max(1.0));
        }
        let mut oracle = schur_eigenvalues(&m);
        for lambda in &e.eigenvalues {
            let (k, gap) = oracle
                .iter()
                .enumerate()
                .map(|(k, o)| (k, (o - lambda).norm()))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            prop_assert!(gap <= 1e-8 * m.norm().max(1.0), "eigenvalue {} unmatched ({})", lambda, gap);
            oracle.swap_remove(k);
        }
    }

    #[test]
    fn trace_distance_matches_oracle(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = rng(seed);
        let a = random_density(&mut rng, n);
        let b = random_density(&mut rng, n);
        let d = lib_td(&a, &b);
        prop_assert!((d - trace_distance(&a, &b)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!(lib_td(&a, &a) <= 1e-14);
    }
}
