//! Eigen-decomposition of small dense complex matrices.
//!
//! General (non-normal) matrices go through Householder reduction to upper
//! Hessenberg form followed by single-shift complex QR with Wilkinson
//! shifts, which yields a Schur form `M = Z T Z†`. Right eigenvectors are
//! recovered from `T` by back-substitution and mapped back through `Z`.

use nalgebra::{SymmetricEigen, SVD};
use num_complex::Complex64 as C64;

use super::matrix::{identity, ComplexMatrix, ComplexVector};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Complex Schur form `M = Z T Z†` with `T` upper triangular and `Z` unitary.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: ComplexMatrix,
    pub z: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    pub eigenvectors: Vec<StateVector>,
    /// `‖M v − λ v‖` for each pair.
    pub residuals: Vec<f64>,
}

impl EigenDecomposition {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn schur(m: &ComplexMatrix) -> Result<Schur> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("eig of non-square {}x{}", n, m.ncols())));
    }
    let mut t = m.clone();
    let mut z = identity(n);
    reduce_to_hessenberg(&mut t, &mut z);
    shifted_qr(&mut t, &mut z, m.norm())?;
    Ok(Schur { t, z })
}

/// Eigenvalues only, in Schur-diagonal order.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let s = schur(m)?;
    Ok((0..m.nrows()).map(|i| s.t[(i, i)]).collect())
}

/// Eigenvalues of a real matrix.
pub fn real_eigenvalues(m: &nalgebra::DMatrix<f64>) -> Result<Vec<C64>> {
    eigenvalues(&m.map(|x| C64::new(x, 0.0)))
}

/// Full right eigen-decomposition. Every pair is checked against
/// `‖M v − λ v‖ ≤ eig_residual·‖M‖`.
pub fn eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let tol = Tolerances::default();
    let n = m.nrows();
    let Schur { t, z } = schur(m)?;
    let scale = m.norm();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = ComplexVector::zeros(n);
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            y[i] = -s / d;
            let big = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big > 1e150 {
                y /= C64::new(big, 0.0);
            }
        }
        let mut v = &z * y;
        let nv = v.norm();
        v /= C64::new(nv, 0.0);
        let r = (m * &v - &v * lambda).norm();
        if r > tol.eig_residual * scale + f64::MIN_POSITIVE {
            return Err(Error::Inconsistency(format!(
                "eigenpair {k} residual {r:.3e} exceeds {:.3e}·‖M‖ (‖M‖ = {scale:.3e})",
                tol.eig_residual
            )));
        }
        eigenvalues.push(lambda);
        eigenvectors.push(StateVector::from_normalized(v));
        residuals.push(r);
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors, residuals })
}

fn reduce_to_hessenberg(h: &mut ComplexMatrix, z: &mut ComplexMatrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut v: Vec<C64> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        // H ← P H with P = I − 2vv† on rows k+1..n
        for j in 0..n {
            let s: C64 = (0..len).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..len {
                h[(k + 1 + i, j)] -= v[i] * s * 2.0;
            }
        }
        // H ← H P, Z ← Z P on columns k+1..n
        for mat in [&mut *h, &mut *z] {
            for r in 0..n {
                let s: C64 = (0..len).map(|i| mat[(r, k + 1 + i)] * v[i]).sum();
                for i in 0..len {
                    mat[(r, k + 1 + i)] -= s * v[i].conj() * 2.0;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Rotation `G = [[c, s], [−s̄, c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let r = a.norm().hypot(b.norm());
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (l1, l2) = (mean + disc, mean - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn shifted_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix, norm: f64) -> Result<()> {
    let n = h.nrows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let max_iterations = 100 * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let mut rotations: Vec<(f64, C64)> = Vec::with_capacity(n);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iterations {
            return Err(Error::NoConvergence { iterations: total, norm });
        }
        let shift = if since_deflation % 11 == 10 {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.25 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        rotations.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = C64::new(0.0, 0.0);
            rotations.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rotations[idx];
            for r in 0..=(k + 1) {
                let (x, y) = (h[(r, k)], h[(r, k + 1)]);
                h[(r, k)] = x * c + y * s.conj();
                h[(r, k + 1)] = -x * s + y * c;
            }
            for r in 0..n {
                let (x, y) = (z[(r, k)], z[(r, k + 1)]);
                z[(r, k)] = x * c + y * s.conj();
                z[(r, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }
    // clear rounding debris below the diagonal
    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// A group of eigenvalues within the clustering tolerance of each other.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub center: C64,
    pub members: Vec<usize>,
}

/// Single-linkage clustering of eigenvalues at absolute distance `tol`.
pub fn cluster_eigenvalues(values: &[C64], tol: f64) -> Vec<Cluster> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(ci) => clusters[ci].members.push(i),
            None => {
                root_of[r] = Some(clusters.len());
                clusters.push(Cluster { center: values[i], members: vec![i] });
            }
        }
    }
    for cl in clusters.iter_mut() {
        let sum: C64 = cl.members.iter().map(|&i| values[i]).sum();
        cl.center = sum / cl.members.len() as f64;
    }
    clusters
}

/// Orthonormal basis (as columns) of the right null space of `m`, keeping
/// singular directions with `σ ≤ threshold`.
pub fn null_space(m: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let padded = if rows < cols {
        let mut p = ComplexMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    let mut basis = ComplexMatrix::zeros(cols, keep.len());
    for (out, &i) in keep.iter().enumerate() {
        for j in 0..cols {
            basis[(j, out)] = v_t[(i, j)].conj();
        }
    }
    basis
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let se = SymmetricEigen::new(super::matrix::hermitize(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (out, &i) in order.iter().enumerate() {
        vectors.set_column(out, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix (closed form for 2×2).
pub fn min_hermitian_eigenvalue(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        return 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    }
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// A subspace on which every operator of a list acts as a scalar.
#[derive(Debug, Clone)]
pub struct JointEigenspace {
    /// Orthonormal columns spanning the subspace.
    pub basis: ComplexMatrix,
    /// One eigenvalue per operator, in operator order.
    pub eigenvalues: Vec<C64>,
}

/// All joint eigenspaces of `ops`.
///
/// The search restricts successively: eigenspaces of `ops[0]` are found,
/// then inside each of them the eigenspaces of `ops[1]`, and so on. A
/// candidate eigenvalue of operator `M` on subspace `V` comes from the
/// compressed matrix `V†MV`; the subspace kept is the null space of
/// `(M − λ)V`, so operators that leak out of `V` are handled exactly.
/// Residuals are accepted at `tol.certification·‖M‖`.
///
/// Results are sorted lexicographically by `(Re λ, Im λ)` over the
/// operator list.
pub fn joint_eigenspaces(ops: &[ComplexMatrix], tol: &Tolerances) -> Result<Vec<JointEigenspace>> {
    let Some(first) = ops.first() else {
        return Ok(Vec::new());
    };
    let n = first.nrows();
    for m in ops {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension("joint eigenspaces need equal square operators".into()));
        }
    }
    let mut out = Vec::new();
    refine(ops, 0, identity(n), Vec::new(), tol, &mut out)?;

    // Split clusters of a defective eigenvalue can reach the same subspace twice.
    let mut unique: Vec<JointEigenspace> = Vec::new();
    for cand in out {
        let dup = unique.iter().any(|u| {
            let proj = &u.basis * (u.basis.adjoint() * &cand.basis);
            (&cand.basis - proj).norm() <= 1e-6
        });
        if !dup {
            unique.push(cand);
        }
    }
    unique.sort_by(|a, b| {
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if ord.is_ne() {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(unique)
}

fn refine(
    ops: &[ComplexMatrix],
    idx: usize,
    basis: ComplexMatrix,
    values: Vec<C64>,
    tol: &Tolerances,
    out: &mut Vec<JointEigenspace>,
) -> Result<()> {
    if idx == ops.len() {
        out.push(JointEigenspace { basis, eigenvalues: values });
        return Ok(());
    }
    let m = &ops[idx];
    let n = m.nrows();
    let scale = m.norm();
    let threshold = tol.certification * scale;
    let compressed = basis.adjoint() * m * &basis;
    let candidates = eigenvalues(&compressed)?;
    let clusters = cluster_eigenvalues(&candidates, tol.cluster * compressed.norm().max(f64::MIN_POSITIVE));
    for cl in clusters {
        let shifted = (m - identity(n) * cl.center) * &basis;
        let y = null_space(&shifted, threshold);
        if y.ncols() == 0 {
            continue;
        }
        let sub = &basis * y;
        let k = sub.ncols() as f64;
        let lambda = (sub.adjoint() * m * &sub).trace() / k;
        let residual = (m * &sub - &sub * lambda).norm() / k.sqrt();
        if residual > threshold {
            continue;
        }
        let mut next = values.clone();
        next.push(lambda);
        refine(ops, idx + 1, sub, next, tol, out)?;
    }
    Ok(())
}
