//! Worked feedback families: the single-atom pure-state manifold and the
//! two-qubit feedback Hamiltonians that stabilize `(|00⟩ + |11⟩)/√2`.

use crate::error::{Error, Result};
use crate::feedback::{feedback_master_equation, feedback_test_matrices, FeedbackSetup};
use crate::qcore::matrix::{expectation, identity, kron, re, sigma_minus, sigma_x, sigma_y, sigma_z, zeros, ComplexMatrix, I};
use crate::qcore::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Branch::Plus),
            "-" | "minus" => Ok(Branch::Minus),
            other => Err(Error::Validation(format!("branch must be '+' or '-', got '{other}'"))),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

/// Two-level atom with spontaneous emission `c = (√γ/2)σ_−`, drive
/// `H = ασ_y` and feedback `F = λσ_y`.
pub fn single_atom_setup(alpha: f64, lambda: f64, gamma: f64) -> Result<FeedbackSetup> {
    if !(gamma > 0.0) {
        return Err(Error::Validation(format!("γ must be positive, got {gamma}")));
    }
    FeedbackSetup::ideal(sigma_y() * re(alpha), sigma_minus() * re(gamma.sqrt() / 2.0), sigma_y() * re(lambda))
}

#[derive(Debug, Clone)]
pub struct SingleAtomPoint {
    pub theta: f64,
    pub branch: Branch,
    pub gamma: f64,
    pub alpha: f64,
    pub lambda: f64,
    /// The pure steady state for this point.
    pub phi: StateVector,
}

impl SingleAtomPoint {
    pub fn setup(&self) -> FeedbackSetup {
        single_atom_setup(self.alpha, self.lambda, self.gamma).expect("validated on construction")
    }
}

/// Point of the pure-steady-state manifold:
/// `α = (γ/4) sinθ cosθ`, `λ = −(√γ/2)(1 ± cosθ)`, with steady state
/// `[cos(θ/2), sin(θ/2)]` on the `+` branch and `[sin(θ/2), −cos(θ/2)]`
/// on the `−` branch.
pub fn single_atom_point(theta: f64, branch: Branch, gamma: f64) -> Result<SingleAtomPoint> {
    if !(gamma > 0.0) {
        return Err(Error::Validation(format!("γ must be positive, got {gamma}")));
    }
    let (s, c) = theta.sin_cos();
    let alpha = gamma / 4.0 * s * c;
    let lambda = -(gamma.sqrt() / 2.0) * (1.0 + branch.sign() * c);
    let (hs, hc) = (theta / 2.0).sin_cos();
    let phi = match branch {
        Branch::Plus => StateVector::from_amplitudes(&[re(hc), re(hs)])?,
        Branch::Minus => StateVector::from_amplitudes(&[re(hs), re(-hc)])?,
    };
    let point = SingleAtomPoint { theta, branch, gamma, alpha, lambda, phi };
    let sys = feedback_master_equation(&point.setup())?;
    let residual = sys.apply(&point.phi.projector()).norm();
    if residual > 1e-9 * sys.scale() {
        return Err(Error::Inconsistency(format!(
            "single-atom point θ = {theta}, branch {branch}: generator residual {residual:.3e}"
        )));
    }
    Ok(point)
}

/// `α² + [(λ + √γ/2)² − γ/8]² − (γ/8)²`, zero exactly on the manifold.
pub fn manifold_defect(alpha: f64, lambda: f64, gamma: f64) -> f64 {
    let shifted = (lambda + gamma.sqrt() / 2.0).powi(2) - gamma / 8.0;
    alpha * alpha + shifted * shifted - (gamma / 8.0).powi(2)
}

/// Whether `(α, λ)` admits a pure steady state, to `1e−9·γ²`.
pub fn on_single_atom_manifold(alpha: f64, lambda: f64, gamma: f64) -> bool {
    manifold_defect(alpha, lambda, gamma).abs() <= 1e-9 * gamma * gamma
}

/// `|det[A, B]|` for a 2-level setup, relative to `(‖A‖‖B‖)²`.
pub fn commutator_determinant(setup: &FeedbackSetup) -> Result<f64> {
    if setup.dim() != 2 {
        return Err(Error::Dimension("commutator determinant test is specific to dimension 2".into()));
    }
    let m = feedback_test_matrices(setup);
    let k = &m.a * &m.b - &m.b * &m.a;
    let det = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(1, 0)];
    let scale = (m.a.norm() * m.b.norm()).powi(2).max(f64::MIN_POSITIVE);
    Ok(det.norm() / scale)
}

/// Collective measurement `c = −i√γ(σ_−⊗I + I⊗σ_−)` in the basis
/// `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn two_qubit_measurement(gamma: f64) -> ComplexMatrix {
    let id = identity(2);
    (kron(&sigma_minus(), &id) + kron(&id, &sigma_minus())) * (-I * gamma.sqrt())
}

/// `J_x = (σ_x⊗I + I⊗σ_x)/2`.
pub fn collective_jx() -> ComplexMatrix {
    let id = identity(2);
    (kron(&sigma_x(), &id) + kron(&id, &sigma_x())) * re(0.5)
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_state() -> StateVector {
    StateVector::from_amplitudes(&[re(1.0), re(0.0), re(0.0), re(1.0)]).expect("nonzero")
}

#[derive(Debug, Clone)]
pub struct TwoQubitFamilyPoint {
    pub x: [f64; 4],
    pub mu: f64,
    pub gamma: f64,
    pub f: ComplexMatrix,
}

impl TwoQubitFamilyPoint {
    /// `H = 0`, collective measurement, feedback `F`.
    pub fn setup(&self) -> FeedbackSetup {
        FeedbackSetup::ideal(zeros(4), two_qubit_measurement(self.gamma), self.f.clone()).expect("F is Hermitian")
    }
}

/// Feedback Hamiltonian making the Bell state `|Φ⟩` stationary:
///
/// ```text
/// F = (x1+x2) I⊗I − (μ+x1+x2) σx⊗σx + (x1−x2)(σy⊗σy + σz⊗σz)
///   + (x3+√γ) I⊗σx − (x3+3√γ) σx⊗I + x4 (σy⊗σz − σz⊗σy)
///   − √γ (σx⊗σz + σz⊗σx)
/// ```
///
/// `μ` is the (real) value of `−i·k` where `(c − iF)|Φ⟩ = k|Φ⟩`. The drive
/// must vanish for `|Φ⟩` to be stationary, so the setup has `H = 0`.
pub fn two_qubit_family(x: [f64; 4], mu: f64, gamma: f64) -> Result<TwoQubitFamilyPoint> {
    if !(gamma > 0.0) {
        return Err(Error::Validation(format!("γ must be positive, got {gamma}")));
    }
    let g = gamma.sqrt();
    let [x1, x2, x3, x4] = x;
    let (id, sx, sy, sz) = (identity(2), sigma_x(), sigma_y(), sigma_z());
    let k = |a: &ComplexMatrix, b: &ComplexMatrix| kron(a, b);
    let f = k(&id, &id) * re(x1 + x2) - k(&sx, &sx) * re(mu + x1 + x2)
        + (k(&sy, &sy) + k(&sz, &sz)) * re(x1 - x2)
        + k(&id, &sx) * re(x3 + g)
        - k(&sx, &id) * re(x3 + 3.0 * g)
        + (k(&sy, &sz) - k(&sz, &sy)) * re(x4)
        - (k(&sx, &sz) + k(&sz, &sx)) * re(g);
    let point = TwoQubitFamilyPoint { x, mu, gamma, f };

    let worst = bell_constraint_defects(&point.f, mu, gamma)
        .into_iter()
        .fold(0.0, |acc: f64, (_, d)| acc.max(d));
    let scale = point.f.norm().max(1.0);
    if worst > 1e-12 * scale {
        return Err(Error::Inconsistency(format!("family F violates Bell-state constraints by {worst:.3e}")));
    }
    let setup = point.setup();
    let m = feedback_test_matrices(&setup);
    let phi = bell_state();
    let v = phi.amplitudes();
    let kb = expectation(&m.b, v);
    let ka = expectation(&m.a, v);
    let eigen_defect = (&m.b * v - v * kb).norm().max((&m.a * v - v * ka).norm());
    let generator = feedback_master_equation(&setup)?.apply(&phi.projector()).norm();
    if eigen_defect > 1e-9 * m.a.norm().max(m.b.norm()) || generator > 1e-8 {
        return Err(Error::Inconsistency(format!(
            "Bell state not certified for family point (eigen {eigen_defect:.3e}, generator {generator:.3e})"
        )));
    }
    // B|Φ⟩ = k|Φ⟩ with μ = −ik
    if ((-I * kb) - re(mu)).norm() > 1e-12 * scale {
        return Err(Error::Inconsistency(format!("B-eigenvalue {kb} inconsistent with μ = {mu}")));
    }
    Ok(point)
}

/// Entry conditions on `F = {f_ij}` (1-indexed names) for `|Φ⟩` to be a
/// common eigenvector of `A` and `B` with `H = 0`. Returns each defect.
pub fn bell_constraint_defects(f: &ComplexMatrix, mu: f64, gamma: f64) -> Vec<(&'static str, f64)> {
    let g = gamma.sqrt();
    let e = |i: usize, j: usize| f[(i - 1, j - 1)];
    let two_g = re(2.0 * g);
    vec![
        ("f11 = f44", (e(1, 1) - e(4, 4)).norm()),
        ("f34 = -f13* - 2√γ", (e(3, 4) - (-e(1, 3).conj() - two_g)).norm()),
        ("f24 = -f12* - 2√γ", (e(2, 4) - (-e(1, 2).conj() - two_g)).norm()),
        ("f14 = -μ - f11", (e(1, 4) - (re(-mu) - e(1, 1))).norm()),
        ("f22 = f33", (e(2, 2) - e(3, 3)).norm()),
        ("f23 real", e(2, 3).im.abs()),
        ("f23 = -f22 - μ", (e(2, 3) - (-e(2, 2) - re(mu))).norm()),
        ("f12 + f13 = -4√γ", (e(1, 2) + e(1, 3) + re(4.0 * g)).norm()),
    ]
}

/// Local drive and feedback along `J_x`: `H = αJ_x`, `F = λJ_x`.
#[derive(Debug, Clone)]
pub struct TwoQubitOriginal {
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub h: ComplexMatrix,
    pub f: ComplexMatrix,
}

impl TwoQubitOriginal {
    pub fn setup(&self) -> FeedbackSetup {
        FeedbackSetup::ideal(self.h.clone(), two_qubit_measurement(self.gamma), self.f.clone())
            .expect("J_x is Hermitian")
    }
}

pub fn two_qubit_original(alpha: f64, lambda: f64, gamma: f64) -> Result<TwoQubitOriginal> {
    if !(gamma > 0.0) {
        return Err(Error::Validation(format!("γ must be positive, got {gamma}")));
    }
    let jx = collective_jx();
    Ok(TwoQubitOriginal { alpha, lambda, gamma, h: &jx * re(alpha), f: &jx * re(lambda) })
}

/// Restriction of an operator to the exchange-symmetric (triplet)
/// subspace, in the basis `|00⟩, (|01⟩+|10⟩)/√2, |11⟩`.
pub fn triplet_block(m: &ComplexMatrix) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = ComplexMatrix::zeros(4, 3);
    v[(0, 0)] = re(1.0);
    v[(1, 1)] = re(s);
    v[(2, 1)] = re(s);
    v[(3, 2)] = re(1.0);
    v.adjoint() * m * v
}

/// Singlet `(|01⟩ − |10⟩)/√2`.
pub fn singlet_state() -> StateVector {
    StateVector::from_amplitudes(&[re(0.0), re(1.0), re(-1.0), re(0.0)]).expect("nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use crate::certify::PureSteadyCertificate;
    use crate::feedback::{certify_feedback, enumerate_feedback_certificates};
    use crate::tolerance::Tolerances;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn theta_zero_needs_no_feedback() {
        let p = single_atom_point(0.0, Branch::Minus, 1.0).unwrap();
        assert_eq!((p.alpha, p.lambda), (0.0, 0.0));
        assert!((p.phi.overlap(&StateVector::basis(2, 1)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_plus_branch() {
        let p = single_atom_point(FRAC_PI_2, Branch::Plus, 1.0).unwrap();
        assert!(p.alpha.abs() < 1e-16);
        assert!((p.lambda + 0.5).abs() < 1e-15);
        let expect = StateVector::from_amplitudes(&[re(FRAC_PI_4.cos()), re(FRAC_PI_4.sin())]).unwrap();
        assert!((p.phi.overlap(&expect) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn third_turn_minus_branch_certified() {
        let gamma = 4.0;
        let p = single_atom_point(FRAC_PI_3, Branch::Minus, gamma).unwrap();
        assert!((p.alpha - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((p.lambda + 0.5).abs() < 1e-15);
        let cert = certify_feedback(&p.setup(), &Tolerances::default()).unwrap().unwrap();
        assert!(cert.generator_residual <= 1e-9);
        assert!((cert.state.overlap(&p.phi) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quarter_turn_minus_branch_lists_displayed_state() {
        let p = single_atom_point(FRAC_PI_2, Branch::Minus, 1.0).unwrap();
        assert!((p.lambda + 0.5).abs() < 1e-15);
        let certs = enumerate_feedback_certificates(&p.setup(), &Tolerances::default()).unwrap();
        let shown = StateVector::from_amplitudes(&[re(FRAC_PI_4.sin()), re(FRAC_PI_4.cos())]).unwrap();
        assert!(certs.iter().any(|c: &PureSteadyCertificate| (c.state.overlap(&shown) - 1.0).abs() < 1e-9));
    }

    #[test]
    fn manifold_examples() {
        assert!(on_single_atom_manifold(0.0, 0.0, 1.0));
        assert!(!on_single_atom_manifold(1.0, 0.0, 1.0));
        let off = single_atom_setup(1.0, 0.0, 1.0).unwrap();
        assert!(certify_feedback(&off, &Tolerances::default()).unwrap().is_none());
        assert!(commutator_determinant(&off).unwrap() > 1e-6);
    }

    #[test]
    fn measurement_display_and_scaling() {
        let c = two_qubit_measurement(1.0);
        for (r, col) in [(1, 0), (2, 0), (3, 1), (3, 2)] {
            assert_eq!(c[(r, col)], C64::new(0.0, -2.0));
        }
        assert_eq!(c.iter().filter(|z| z.norm() > 0.0).count(), 4);
        let quarter = two_qubit_measurement(0.25);
        assert!(quarter.iter().filter(|z| z.norm() > 0.0).all(|z| (z - C64::new(0.0, -1.0)).norm() < 1e-15));
        let col = &c * StateVector::basis(4, 0).amplitudes();
        assert_eq!(col.as_slice(), &[re(0.0), C64::new(0.0, -2.0), C64::new(0.0, -2.0), re(0.0)]);
    }

    #[test]
    fn reduced_family_point() {
        let g: f64 = 1.7;
        let p = two_qubit_family([0.0, 0.0, -2.0 * g.sqrt(), 0.0], 0.0, g).unwrap();
        let (id, sx, sz) = (identity(2), sigma_x(), sigma_z());
        let expect = (kron(&sx, &id) + kron(&id, &sx) + kron(&sx, &sz) + kron(&sz, &sx)) * re(-g.sqrt());
        assert!((p.f - expect).norm() < 1e-14);
    }

    #[test]
    fn zero_parameter_family_meets_constraints() {
        let p = two_qubit_family([0.0; 4], 0.0, 1.0).unwrap();
        assert!((p.f[(0, 1)] + p.f[(0, 2)] - re(-4.0)).norm() < 1e-15);
        assert!(bell_constraint_defects(&p.f, 0.0, 1.0).iter().all(|(_, d)| *d < 1e-14));
    }

    #[test]
    fn original_scheme_matrices() {
        let o = two_qubit_original(0.0, 0.0, 1.0).unwrap();
        assert_eq!(o.h.norm() + o.f.norm(), 0.0);
        let o = two_qubit_original(0.0, 1.0, 1.0).unwrap();
        assert_eq!(o.f, collective_jx());
        assert_eq!(o.f, o.f.transpose());
        assert!(o.f.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn singlet_is_dark_for_original_scheme() {
        let o = two_qubit_original(0.5, 1.0, 1.0).unwrap();
        let sys = feedback_master_equation(&o.setup()).unwrap();
        assert!(sys.apply(&singlet_state().projector()).norm() < 1e-14);
        let t = triplet_block(&collective_jx());
        assert!((t.adjoint() - &t).norm() < 1e-15);
    }
}
