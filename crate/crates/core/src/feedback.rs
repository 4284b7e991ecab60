//! Homodyne measurement with Markovian (current-proportional) feedback.
//!
//! Feeding the homodyne current `I(t) = dy/dt` back through a Hamiltonian
//! `I(t)F` turns the measured channel `c` into
//!
//! ```text
//! dρ/dt = −i[H + ½c†F + ½Fc, ρ] + D[c − iF]ρ
//! ```
//!
//! and, for detection efficiency `η < 1`, adds `D[√((1−η)/η) F]ρ`.

use num_complex::Complex64 as C64;

use crate::certify::{certify, common_eigenvector, enumerate_certificates, PureSteadyCertificate};
use crate::error::{Error, Result};
use crate::lindblad::LindbladSystem;
use crate::qcore::matrix::{ensure_hermitian, ensure_square, hermitize, ComplexMatrix, I};
use crate::qcore::StateVector;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackSetup {
    h: ComplexMatrix,
    c: ComplexMatrix,
    f: ComplexMatrix,
    eta: f64,
}

impl FeedbackSetup {
    pub fn new(h: ComplexMatrix, c: ComplexMatrix, f: ComplexMatrix, eta: f64) -> Result<Self> {
        let tol = Tolerances::default();
        let n = ensure_square(&h, "H")?;
        if ensure_square(&c, "c")? != n || ensure_square(&f, "F")? != n {
            return Err(Error::Dimension(format!("H, c and F must all be {n}x{n}")));
        }
        ensure_hermitian(&h, tol.hermiticity, "H")?;
        ensure_hermitian(&f, tol.hermiticity, "F")?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Validation(format!("detection efficiency must lie in (0, 1], got {eta}")));
        }
        Ok(Self { h, c, f, eta })
    }

    /// Perfect detection (`η = 1`).
    pub fn ideal(h: ComplexMatrix, c: ComplexMatrix, f: ComplexMatrix) -> Result<Self> {
        Self::new(h, c, f, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn measurement(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn feedback(&self) -> &ComplexMatrix {
        &self.f
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `H + ½c†F + ½Fc`, Hermitized.
    pub fn effective_hamiltonian(&self) -> ComplexMatrix {
        let half = C64::new(0.5, 0.0);
        hermitize(&(&self.h + (self.c.adjoint() * &self.f + &self.f * &self.c) * half))
    }

    /// `c − iF`.
    pub fn effective_measurement(&self) -> ComplexMatrix {
        &self.c - &self.f * I
    }

    fn prune_scale(&self) -> f64 {
        (self.c.norm() + self.f.norm()).max(1.0)
    }
}

/// The pair whose common eigenvectors are the pure steady states of the
/// feedback master equation: `A = iH + iFc + ½c†c + ½F²`, `B = c − iF`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackTestMatrices {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

pub fn feedback_test_matrices(setup: &FeedbackSetup) -> FeedbackTestMatrices {
    let (h, c, f) = (&setup.h, &setup.c, &setup.f);
    let half = C64::new(0.5, 0.0);
    let a = h * I + f * c * I + (c.adjoint() * c) * half + (f * f) * half;
    FeedbackTestMatrices { a, b: setup.effective_measurement() }
}

fn push_nonzero(ops: &mut Vec<ComplexMatrix>, op: ComplexMatrix, scale: f64) {
    if op.norm() > 1e-14 * scale {
        ops.push(op);
    }
}

/// Averaged dynamics under ideal feedback: `H' = H + ½c†F + ½Fc`,
/// single Lindblad operator `c' = c − iF` (dropped if it vanishes).
pub fn feedback_master_equation(setup: &FeedbackSetup) -> Result<LindbladSystem> {
    if setup.eta != 1.0 {
        return Err(Error::Validation(format!(
            "ideal feedback equation needs η = 1 (got {}); use inefficient_master_equation",
            setup.eta
        )));
    }
    let mut ops = Vec::with_capacity(1);
    push_nonzero(&mut ops, setup.effective_measurement(), setup.prune_scale());
    LindbladSystem::new(setup.effective_hamiltonian(), ops)
}

/// Feedback dynamics at efficiency `η`: the ideal equation plus
/// `D[√((1−η)/η) F]`. At `η = 1` the extra operator is omitted.
pub fn inefficient_master_equation(setup: &FeedbackSetup) -> Result<LindbladSystem> {
    let eta = setup.eta;
    let mut ops = Vec::with_capacity(2);
    push_nonzero(&mut ops, setup.effective_measurement(), setup.prune_scale());
    if eta < 1.0 {
        let k = ((1.0 - eta) / eta).sqrt();
        push_nonzero(&mut ops, &setup.f * C64::new(k, 0.0), setup.prune_scale());
    }
    LindbladSystem::new(setup.effective_hamiltonian(), ops)
}

/// Pure steady state of the ideal feedback equation from a common
/// eigenvector of `A` and `B`, re-checked against the generator.
pub fn certify_feedback(setup: &FeedbackSetup, tol: &Tolerances) -> Result<Option<PureSteadyCertificate>> {
    let sys = feedback_master_equation(setup)?;
    let FeedbackTestMatrices { a, b } = feedback_test_matrices(setup);
    let Some((phi, _, _)) = common_eigenvector(&a, &b, tol)? else {
        return Ok(None);
    };
    let cert = PureSteadyCertificate::evaluate(&sys, &phi);
    if cert.generator_residual > tol.generator_residual {
        return Err(Error::Inconsistency(format!(
            "common eigenvector of A and B leaves generator residual {:.3e}",
            cert.generator_residual
        )));
    }
    Ok(Some(cert))
}

/// All pure steady states of the ideal feedback equation.
pub fn enumerate_feedback_certificates(setup: &FeedbackSetup, tol: &Tolerances) -> Result<Vec<PureSteadyCertificate>> {
    enumerate_certificates(&feedback_master_equation(setup)?, tol)
}

/// Outcome of the pure-state search under inefficient detection.
#[derive(Debug, Clone)]
pub struct InefficientDiagnosis {
    pub certificate: Option<PureSteadyCertificate>,
    /// A common eigenvector of `c` and `iH + ½c†c`. Without one, no
    /// feedback Hamiltonian can produce a pure steady state when `η < 1`.
    pub measurement_eigenvector: Option<StateVector>,
}

impl InefficientDiagnosis {
    pub fn feedback_can_help(&self) -> bool {
        self.measurement_eigenvector.is_some()
    }
}

pub fn certify_inefficient(setup: &FeedbackSetup, tol: &Tolerances) -> Result<InefficientDiagnosis> {
    if setup.eta >= 1.0 {
        return Err(Error::Validation("inefficient-detection check needs η < 1".into()));
    }
    let certificate = certify(&inefficient_master_equation(setup)?, tol)?;
    let half = C64::new(0.5, 0.0);
    let drift = &setup.h * I + (setup.c.adjoint() * &setup.c) * half;
    let measurement_eigenvector = common_eigenvector(&drift, &setup.c, tol)?.map(|(v, _, _)| v);
    Ok(InefficientDiagnosis { certificate, measurement_eigenvector })
}
