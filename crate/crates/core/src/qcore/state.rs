use num_complex::Complex64 as C64;

use super::eig::{eigenvalues, hermitian_eigen};
use super::matrix::{hermiticity_defect, kron, outer, sigma_y, ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Unit-norm complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(ComplexVector);

impl StateVector {
    /// Normalizes `v`; fails on a zero or non-finite vector.
    pub fn normalized(v: ComplexVector) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::Validation("state vector has zero or non-finite norm".into()));
        }
        Ok(Self(v / C64::new(n, 0.0)))
    }

    pub fn from_amplitudes(amps: &[C64]) -> Result<Self> {
        Self::normalized(ComplexVector::from_column_slice(amps))
    }

    pub(crate) fn from_normalized(v: ComplexVector) -> Self {
        debug_assert!((v.norm() - 1.0).abs() < 1e-10);
        Self(v)
    }

    /// Computational basis vector `|k⟩` of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = ComplexVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.0
    }

    /// `|⟨self|other⟩|`, which is 1 when the two agree up to a global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.0.dotc(&other.0).norm()
    }

    pub fn projector(&self) -> ComplexMatrix {
        outer(&self.0)
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at the default
    /// tolerances.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("density matrix {}x{}", m.nrows(), m.ncols())));
        }
        let defect = hermiticity_defect(&m);
        if defect > tol.hermiticity {
            return Err(Error::Validation(format!("density matrix not Hermitian ({defect:.3e})")));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.trace {
            return Err(Error::Validation(format!("density matrix trace {tr} ≠ 1")));
        }
        let min = hermitian_eigen(&m).0.first().copied().unwrap_or(0.0);
        if min < tol.positivity {
            return Err(Error::Validation(format!("density matrix has eigenvalue {min:.3e} < 0")));
        }
        Ok(Self(m))
    }

    /// Hermitizes and rescales to unit trace.
    pub(crate) fn renormalized(m: &ComplexMatrix) -> Self {
        let mut h = super::matrix::hermitize(m);
        let tr = h.trace().re;
        h /= C64::new(tr, 0.0);
        Self(h)
    }

    pub fn pure(psi: &StateVector) -> Self {
        Self(psi.projector())
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(ComplexMatrix::identity(n, n) / C64::new(n as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        super::eig::min_hermitian_eigenvalue(&self.0)
    }
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.0.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_to_pure(rho: &DensityMatrix, psi: &StateVector) -> f64 {
    super::matrix::expectation(&rho.0, &psi.0).re
}

/// `½‖ρ − σ‖₁` for Hermitian arguments.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(&(a - b));
    0.5 * vals.iter().map(|x| x.abs()).sum::<f64>()
}

/// Wootters concurrence of a two-qubit state:
/// `max(0, λ₁ − λ₂ − λ₃ − λ₄)` with `λᵢ` the decreasing square roots of the
/// eigenvalues of `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("concurrence needs a 4x4 state, got {}", rho.dim())));
    }
    let yy = kron(&sigma_y(), &sigma_y());
    let flipped = &yy * rho.0.conjugate() * &yy;
    let r = &rho.0 * flipped;
    let mut lambdas: Vec<f64> = eigenvalues(&r)?.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}
