//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the crate's eigen-solvers, superoperator or
//! certification code; matrices are assembled from hand-written Paulis and
//! nalgebra's own Schur, SVD and Hermitian eigen routines.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type M = DMatrix<C64>;
pub type V = DVector<C64>;

pub fn z(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn mat(rows: &[&[C64]]) -> M {
    M::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

pub fn px() -> M {
    mat(&[&[z(0., 0.), z(1., 0.)], &[z(1., 0.), z(0., 0.)]])
}

pub fn py() -> M {
    mat(&[&[z(0., 0.), z(0., -1.)], &[z(0., 1.), z(0., 0.)]])
}

pub fn pz() -> M {
    mat(&[&[z(1., 0.), z(0., 0.)], &[z(0., 0.), z(-1., 0.)]])
}

/// `σx − iσy = [[0, 0], [2, 0]]` in the basis `|e⟩ = [1, 0]`, `|g⟩ = [0, 1]`.
pub fn sm() -> M {
    mat(&[&[z(0., 0.), z(0., 0.)], &[z(2., 0.), z(0., 0.)]])
}

pub fn kr(a: &M, b: &M) -> M {
    a.kronecker(b)
}

pub fn scale(m: &M, s: f64) -> M {
    m.map(|e| e * s)
}

/// Generator applied directly: `−i[H,ρ] + Σ bρb† − ½{b†b, ρ}`.
pub fn apply(h: &M, ops: &[M], rho: &M) -> M {
    let mut out = (h * rho - rho * h) * z(0., -1.);
    for b in ops {
        let bd = b.adjoint();
        let bdb = &bd * b;
        out += b * rho * &bd - (&bdb * rho + rho * &bdb) * z(0.5, 0.);
    }
    out
}

/// Column-stacked Liouvillian from Kronecker products.
pub fn liouvillian(h: &M, ops: &[M]) -> M {
    let n = h.nrows();
    let id = eye(n);
    let mut l = (kr(&id, h) - kr(&h.transpose(), &id)) * z(0., -1.);
    for b in ops {
        let bdb = b.adjoint() * b;
        l += kr(&b.conjugate(), b) - (kr(&id, &bdb) + kr(&bdb.transpose(), &id)) * z(0.5, 0.);
    }
    l
}

pub fn vec_cols(m: &M) -> V {
    V::from_column_slice(m.as_slice())
}

/// Eigenvalues from nalgebra's complex Schur form.
pub fn schur_eigenvalues(m: &M) -> Vec<C64> {
    nalgebra::linalg::Schur::new(m.clone()).eigenvalues().expect("complex Schur is triangular").iter().copied().collect()
}

/// Eigenvalues of a real matrix from nalgebra's real Schur form.
pub fn real_schur_eigenvalues(m: &DMatrix<f64>) -> Vec<C64> {
    nalgebra::linalg::Schur::new(m.clone()).complex_eigenvalues().iter().copied().collect()
}

/// Null vectors (smallest right singular vectors) of a stacked matrix with
/// singular value at most `threshold`.
pub fn null_vectors(m: &M, threshold: f64) -> Vec<V> {
    let cols = m.ncols();
    let padded = if m.nrows() < cols { m.clone().resize_vertically(cols, z(0., 0.)) } else { m.clone() };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    (0..cols)
        .filter(|&k| svd.singular_values[k] <= threshold)
        .map(|k| vt.row(k).adjoint())
        .collect()
}

/// Smallest singular value of `[M_0 − λ_0; …; M_k − λ_k]` over all choices
/// of eigenvalues `λ_j` of each `M_j`, with the corresponding vector. A
/// common eigenvector exists iff the minimum is zero.
pub fn best_common_eigenvector(ops: &[M]) -> (f64, V) {
    let n = ops[0].nrows();
    let spectra: Vec<Vec<C64>> = ops.iter().map(schur_eigenvalues).collect();
    let mut best = (f64::INFINITY, V::zeros(n));
    let mut idx = vec![0usize; ops.len()];
    loop {
        let mut stacked = M::zeros(n * ops.len(), n);
        for (j, op) in ops.iter().enumerate() {
            let shifted = op - eye(n) * spectra[j][idx[j]];
            stacked.view_mut((j * n, 0), (n, n)).copy_from(&shifted);
        }
        let svd = stacked.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let (k, s) = svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |acc, (k, &s)| if s < acc.1 { (k, s) } else { acc });
        if s < best.0 {
            best = (s, vt.row(k).adjoint());
        }
        let mut j = 0;
        loop {
            if j == ops.len() {
                return best;
            }
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

pub fn drift(h: &M, ops: &[M]) -> M {
    let mut k = h * z(0., 1.);
    for b in ops {
        k += b.adjoint() * b * z(0.5, 0.);
    }
    k
}

pub fn projector(v: &V) -> M {
    let v = v / z(v.norm(), 0.);
    &v * v.adjoint()
}

pub fn hermitian_eigen(m: &M) -> (Vec<f64>, M) {
    let h = (m + m.adjoint()) * z(0.5, 0.);
    let e = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vectors = M::from_fn(m.nrows(), m.nrows(), |i, j| e.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn purity(rho: &M) -> f64 {
    (rho * rho).trace().re
}

pub fn trace_distance(a: &M, b: &M) -> f64 {
    0.5 * hermitian_eigen(&(a - b)).0.iter().map(|x| x.abs()).sum::<f64>()
}

/// Wootters concurrence through the Hermitian form `√(√ρ ρ̃ √ρ)`.
pub fn concurrence(rho: &M) -> f64 {
    let yy = kr(&py(), &py());
    let tilde = &yy * rho.conjugate() * &yy;
    let (vals, vecs) = hermitian_eigen(rho);
    let sqrt = &vecs * M::from_diagonal(&V::from_iterator(4, vals.iter().map(|&x| z(x.max(0.0).sqrt(), 0.)))) * vecs.adjoint();
    let (mut r, _) = hermitian_eigen(&(&sqrt * tilde * &sqrt));
    r.iter_mut().for_each(|x| *x = x.max(0.0).sqrt());
    r.sort_by(|a, b| b.total_cmp(a));
    (r[0] - r[1] - r[2] - r[3]).max(0.0)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> M {
    M::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        z(a, b) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> M {
    let g = gaussian(rng, n, n);
    (&g + g.adjoint()) * z(0.5, 0.)
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> V {
    let v = gaussian(rng, n, 1).column(0).into_owned();
    &v / z(v.norm(), 0.)
}

pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> M {
    let g = gaussian(rng, n, n);
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

/// System `(H, b_k)` with `|φ⟩` a planted pure steady state:
/// `b_k = μ_k|φ⟩⟨φ| + X_k(I − |φ⟩⟨φ|)` and `H` chosen so that the drift
/// keeps `|φ⟩` as an eigenvector.
pub fn planted_system<R: Rng + ?Sized>(rng: &mut R, n: usize, n_ops: usize) -> (M, Vec<M>, V) {
    let phi = random_state(rng, n);
    let p = &phi * phi.adjoint();
    let perp = eye(n) - &p;
    let mut ops = Vec::new();
    let mut v = V::zeros(n);
    for _ in 0..n_ops {
        let mu = gaussian(rng, 1, 1)[(0, 0)];
        let x = gaussian(rng, n, n);
        let b = &p * mu + &x * &perp;
        v += &perp * x.adjoint() * &phi * mu;
        ops.push(b);
    }
    let g = random_hermitian(rng, n);
    let h0 = &p * z(gaussian(rng, 1, 1)[(0, 0)].re, 0.) + &perp * g * &perp;
    let hc = (&v * phi.adjoint() - &phi * v.adjoint()) * z(0., 0.5);
    (h0 + hc, ops, phi)
}
