//! Numerical tolerances shared by every module.

/// Central tolerance record. Relative tolerances are scaled by the
/// Frobenius norm of the matrix under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Accepted eigenpair residual, relative to `‖M‖`.
    pub eig_residual: f64,
    /// Hermiticity check on inputs and states (absolute, entrywise scale).
    pub hermiticity: f64,
    /// Common-eigenvector and certificate residuals, relative to `‖M‖`.
    pub certification: f64,
    /// Eigenvalues closer than this (relative to `‖M‖`) are one cluster.
    pub cluster: f64,
    /// Bound on `‖L(|φ⟩⟨φ|)‖_F` for an accepted certificate.
    pub generator_residual: f64,
    /// Trace tolerance for density matrices.
    pub trace: f64,
    /// Smallest eigenvalue a density matrix may have.
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_residual: 1e-9,
            hermiticity: 1e-12,
            certification: 1e-9,
            cluster: 1e-8,
            generator_residual: 1e-8,
            trace: 1e-12,
            positivity: -1e-10,
        }
    }
}

impl Tolerances {
    pub fn with_certification(mut self, tol: f64) -> Self {
        self.certification = tol;
        self
    }
}
