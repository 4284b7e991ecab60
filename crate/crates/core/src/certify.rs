//! Pure steady states via common eigenvectors, and decoherence-free
//! subspace detection.
//!
//! `|φ⟩⟨φ|` is stationary for `L` exactly when `|φ⟩` is an eigenvector of
//! every Lindblad operator `b_k` and of `iH + ½Σ b_k†b_k`. The search below
//! finds such vectors numerically; every certificate it hands out is also
//! re-checked directly against the generator.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lindblad::LindbladSystem;
use crate::qcore::eig::{hermitian_eigen, joint_eigenspaces};
use crate::qcore::matrix::{block, expectation, identity, ComplexMatrix, ComplexVector, I};
use crate::qcore::StateVector;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct PureSteadyCertificate {
    pub state: StateVector,
    /// `μ_k` with `b_k|φ⟩ = μ_k|φ⟩`.
    pub lindblad_eigenvalues: Vec<C64>,
    /// Eigenvalue of `iH + ½Σ b_k†b_k` at `|φ⟩`.
    pub drift_eigenvalue: C64,
    /// `‖b_k|φ⟩ − μ_k|φ⟩‖` for each `k`, then the drift residual.
    pub residuals: Vec<f64>,
    /// `‖L(|φ⟩⟨φ|)‖_F`.
    pub generator_residual: f64,
}

impl PureSteadyCertificate {
    /// Builds the certificate data for `phi` (no acceptance decision).
    pub fn evaluate(sys: &LindbladSystem, phi: &StateVector) -> Self {
        let v = phi.amplitudes();
        let mut lindblad_eigenvalues = Vec::with_capacity(sys.lindblad_ops().len());
        let mut residuals = Vec::with_capacity(sys.lindblad_ops().len() + 1);
        for b in sys.lindblad_ops() {
            let mu = expectation(b, v);
            residuals.push((b * v - v * mu).norm());
            lindblad_eigenvalues.push(mu);
        }
        let drift = sys.drift_matrix();
        let drift_eigenvalue = expectation(drift, v);
        residuals.push((drift * v - v * drift_eigenvalue).norm());
        let generator_residual = sys.apply(&phi.projector()).norm();
        Self { state: phi.clone(), lindblad_eigenvalues, drift_eigenvalue, residuals, generator_residual }
    }

    /// Eigen residuals within `tol.certification·‖M‖` and generator
    /// residual within `tol.generator_residual`.
    pub fn is_valid(&self, sys: &LindbladSystem, tol: &Tolerances) -> bool {
        let eigen_ok = sys
            .lindblad_ops()
            .iter()
            .chain(std::iter::once(sys.drift_matrix()))
            .zip(&self.residuals)
            .all(|(m, &r)| r <= tol.certification * m.norm());
        eigen_ok && self.generator_residual <= tol.generator_residual
    }
}

/// A unit vector `v` with `M1 v = λ1 v` and `M2 v = λ2 v`, if one exists.
///
/// Eigenspaces of `M2` are searched first, then `M1` is resolved inside
/// each. When several pairs qualify, the one whose `(Re λ2, Im λ2, Re λ1,
/// Im λ1)` sorts first is returned.
pub fn common_eigenvector(
    m1: &ComplexMatrix,
    m2: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Option<(StateVector, C64, C64)>> {
    if m1.shape() != m2.shape() || m1.nrows() != m1.ncols() {
        return Err(Error::Dimension("common_eigenvector needs two square matrices of equal size".into()));
    }
    let spaces = joint_eigenspaces(&[m2.clone(), m1.clone()], tol)?;
    for space in spaces {
        let v = ComplexVector::from_column_slice(space.basis.column(0).as_slice());
        let l1 = expectation(m1, &v);
        let l2 = expectation(m2, &v);
        if (m1 * &v - &v * l1).norm() <= tol.certification * m1.norm()
            && (m2 * &v - &v * l2).norm() <= tol.certification * m2.norm()
        {
            return Ok(Some((StateVector::normalized(v)?, l1, l2)));
        }
    }
    Ok(None)
}

fn candidate_states(sys: &LindbladSystem, tol: &Tolerances) -> Result<Vec<StateVector>> {
    let mut ops = Vec::with_capacity(sys.lindblad_ops().len() + 1);
    ops.push(sys.drift_matrix().clone());
    ops.extend(sys.lindblad_ops().iter().cloned());
    let spaces = joint_eigenspaces(&ops, tol)?;
    let mut out = Vec::new();
    for space in spaces {
        for j in 0..space.basis.ncols() {
            let v = ComplexVector::from_column_slice(space.basis.column(j).as_slice());
            out.push(StateVector::normalized(v)?);
        }
    }
    Ok(out)
}

/// One pure steady state of `sys`, if any.
pub fn certify(sys: &LindbladSystem, tol: &Tolerances) -> Result<Option<PureSteadyCertificate>> {
    for phi in candidate_states(sys, tol)? {
        let cert = PureSteadyCertificate::evaluate(sys, &phi);
        if cert.is_valid(sys, tol) {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// Every joint eigenvector found (one per basis direction of each joint
/// eigenspace) that passes certification.
pub fn enumerate_certificates(sys: &LindbladSystem, tol: &Tolerances) -> Result<Vec<PureSteadyCertificate>> {
    Ok(candidate_states(sys, tol)?
        .iter()
        .map(|phi| PureSteadyCertificate::evaluate(sys, phi))
        .filter(|c| c.is_valid(sys, tol))
        .collect())
}

/// `Σ_k (|⟨φ|b_k|φ⟩|² − ⟨φ|b_k†b_k|φ⟩)`, which is never positive and
/// vanishes iff `|φ⟩` is an eigenvector of every `b_k`.
pub fn schwarz_sum(sys: &LindbladSystem, phi: &StateVector) -> f64 {
    let v = phi.amplitudes();
    sys.lindblad_ops()
        .iter()
        .map(|b| {
            let bv = b * v;
            v.dotc(&bv).norm_sqr() - bv.norm_squared()
        })
        .sum()
}

/// True when the Schwarz bound is saturated (`schwarz_sum ≥ −1e−10`).
pub fn schwarz_saturation(sys: &LindbladSystem, phi: &StateVector) -> bool {
    schwarz_sum(sys, phi) >= -1e-10
}

/// `H` and each `b_k` split as `[[H1, H2], [H2†, H3]]`,
/// `[[P_k, Q_k], [R_k, S_k]]` with the leading block of size `split`.
#[derive(Debug, Clone)]
pub struct DfsBlocks {
    pub h1: ComplexMatrix,
    pub h2: ComplexMatrix,
    pub h3: ComplexMatrix,
    pub p: Vec<ComplexMatrix>,
    pub q: Vec<ComplexMatrix>,
    pub r: Vec<ComplexMatrix>,
    pub s: Vec<ComplexMatrix>,
}

impl DfsBlocks {
    pub fn split(sys: &LindbladSystem, d: usize) -> Self {
        let n = sys.dim();
        let m = n - d;
        let h = sys.hamiltonian();
        let ops = sys.lindblad_ops();
        Self {
            h1: block(h, 0, 0, d, d),
            h2: block(h, 0, d, d, m),
            h3: block(h, d, d, m, m),
            p: ops.iter().map(|b| block(b, 0, 0, d, d)).collect(),
            q: ops.iter().map(|b| block(b, 0, d, d, m)).collect(),
            r: ops.iter().map(|b| block(b, d, 0, m, d)).collect(),
            s: ops.iter().map(|b| block(b, d, d, m, m)).collect(),
        }
    }
}

/// The leading `split`-dimensional coordinate subspace is decoherence free:
/// `P_k = α_k I`, `R_k = 0` and `H2 + (i/2)Σ α_k* Q_k = 0`.
#[derive(Debug, Clone)]
pub struct DfsSpec {
    pub split: usize,
    pub alpha: Vec<C64>,
    pub blocks: DfsBlocks,
    /// Whether `Q_k = 0` was also required.
    pub strict: bool,
    system: LindbladSystem,
}

impl DfsSpec {
    pub fn system(&self) -> &LindbladSystem {
        &self.system
    }
}

/// Checks the block conditions for the leading `d` basis states. With
/// `strict`, `Q_k = 0` is required as well (needed when the initial state
/// has weight outside the subspace).
pub fn dfs_check(sys: &LindbladSystem, d: usize, strict: bool, tol: &Tolerances) -> Result<Option<DfsSpec>> {
    let n = sys.dim();
    if d == 0 || d >= n {
        return Err(Error::Validation(format!("DFS split must satisfy 1 ≤ d < n (d = {d}, n = {n})")));
    }
    let blocks = DfsBlocks::split(sys, d);
    let mut alpha = Vec::with_capacity(blocks.p.len());
    for (k, b) in sys.lindblad_ops().iter().enumerate() {
        let bound = tol.certification * b.norm();
        let p = &blocks.p[k];
        let a = p.trace() / d as f64;
        if (p - identity(d) * a).norm() > bound || blocks.r[k].norm() > bound {
            return Ok(None);
        }
        if strict && blocks.q[k].norm() > bound {
            return Ok(None);
        }
        alpha.push(a);
    }
    let mut coupling = blocks.h2.clone();
    for (a, q) in alpha.iter().zip(&blocks.q) {
        coupling += q * (a.conj() * I * 0.5);
    }
    if coupling.norm() > tol.certification * sys.scale() {
        return Ok(None);
    }
    Ok(Some(DfsSpec { split: d, alpha, blocks, strict, system: sys.clone() }))
}

/// Pure steady state `|h⟩ ⊕ 0` built from the `index`-th eigenvector of
/// `H1` (eigenvalues ascending). Its drift eigenvalue must equal
/// `ih + ½Σ|α_k|²`.
pub fn dfs_steady_state(spec: &DfsSpec, index: usize, tol: &Tolerances) -> Result<PureSteadyCertificate> {
    let d = spec.split;
    if index >= d {
        return Err(Error::Validation(format!("H1 has {d} eigenvectors, index {index} requested")));
    }
    let sys = &spec.system;
    let (values, vectors) = hermitian_eigen(&spec.blocks.h1);
    let mut psi = ComplexVector::zeros(sys.dim());
    psi.rows_mut(0, d).copy_from(&vectors.column(index));
    let psi = StateVector::normalized(psi)?;
    let cert = PureSteadyCertificate::evaluate(sys, &psi);

    let expected_drift = I * values[index] + 0.5 * spec.alpha.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let drift_scale = sys.drift_matrix().norm().max(1.0);
    let alpha_ok = cert
        .lindblad_eigenvalues
        .iter()
        .zip(&spec.alpha)
        .zip(sys.lindblad_ops())
        .all(|((mu, a), b)| (mu - a).norm() <= tol.certification * b.norm().max(1.0));
    if !alpha_ok
        || (cert.drift_eigenvalue - expected_drift).norm() > tol.certification * drift_scale
        || !cert.is_valid(sys, tol)
    {
        return Err(Error::Inconsistency(format!(
            "DFS state {index} failed certification (generator residual {:.3e})",
            cert.generator_residual
        )));
    }
    Ok(cert)
}
