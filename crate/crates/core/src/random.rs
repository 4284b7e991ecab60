//! Random matrices and systems for sweeps, property tests and benchmarks.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::lindblad::LindbladSystem;
use crate::qcore::{ComplexMatrix, ComplexVector, DensityMatrix, StateVector};

/// Complex Ginibre matrix with `E|z|² = 1` per entry.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        C64::new(s * a, s * b)
    })
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = complex_gaussian(rng, n, n);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = complex_gaussian(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> StateVector {
    let g = complex_gaussian(rng, n, 1);
    StateVector::normalized(ComplexVector::from_column_slice(g.as_slice())).expect("nonzero")
}

/// Full-rank mixed state `GG†/Tr(GG†)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = complex_gaussian(rng, n, n);
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = crate::qcore::matrix::hermitize(&(m / tr));
    DensityMatrix::renormalized(&m)
}

/// Random system with Hermitian `H` and `n_ops` Ginibre Lindblad operators.
pub fn system<R: Rng + ?Sized>(rng: &mut R, n: usize, n_ops: usize) -> LindbladSystem {
    let h = hermitian(rng, n);
    let ops = (0..n_ops).map(|_| complex_gaussian(rng, n, n)).collect();
    LindbladSystem::new(h, ops).expect("random system is valid")
}

pub fn uniform_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.random_range(lo..hi))
}
