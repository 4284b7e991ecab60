//! Lindblad generator, affine real vectorization, steady states, stability
//! and RK4 propagation.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qcore::eig::{min_hermitian_eigenvalue, real_eigenvalues};
use crate::qcore::matrix::{ensure_hermitian, ensure_square, identity, kron, ComplexMatrix, I};
use crate::qcore::DensityMatrix;
use crate::tolerance::Tolerances;

/// `dρ/dt = −i[H, ρ] + Σ_k D[b_k]ρ` with
/// `D[b]ρ = bρb† − ½b†bρ − ½ρb†b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSystem {
    h: ComplexMatrix,
    ops: Vec<ComplexMatrix>,
    // iH + ½Σ b†b, so that Lρ = −(Kρ + ρK†) + Σ bρb†
    drift: ComplexMatrix,
}

impl LindbladSystem {
    pub fn new(h: ComplexMatrix, ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerances(h, ops, &Tolerances::default())
    }

    pub fn with_tolerances(h: ComplexMatrix, ops: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        let n = ensure_square(&h, "H")?;
        ensure_hermitian(&h, tol.hermiticity, "H")?;
        for (k, b) in ops.iter().enumerate() {
            let m = ensure_square(b, "Lindblad operator")?;
            if m != n {
                return Err(Error::Dimension(format!("Lindblad operator {k} is {m}x{m}, H is {n}x{n}")));
            }
        }
        let mut drift = &h * I;
        for b in &ops {
            drift += b.adjoint() * b * C64::new(0.5, 0.0);
        }
        Ok(Self { h, ops, drift })
    }

    /// System with no Hamiltonian and no dissipation.
    pub fn empty(n: usize) -> Self {
        Self::new(ComplexMatrix::zeros(n, n), Vec::new()).expect("zero system is valid")
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn lindblad_ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `iH + ½Σ b_k†b_k`, the matrix whose eigenvectors shared with all
    /// `b_k` are exactly the pure steady states.
    pub fn drift_matrix(&self) -> &ComplexMatrix {
        &self.drift
    }

    /// `‖H‖ + Σ‖b_k‖² + 1`, the scale for generator residuals.
    pub fn scale(&self) -> f64 {
        self.h.norm() + self.ops.iter().map(|b| b.norm_squared()).sum::<f64>() + 1.0
    }

    /// Applies the generator without dimension checks.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = -(&self.drift * rho + rho * self.drift.adjoint());
        for b in &self.ops {
            out += b * rho * b.adjoint();
        }
        out
    }

    /// Compression onto the span of the orthonormal columns of `v`.
    ///
    /// States supported on that span stay there iff every `b_k` and the drift
    /// leave it invariant; the compressed system then reproduces the dynamics
    /// exactly. Errors if the span is not invariant.
    pub fn restrict(&self, v: &ComplexMatrix) -> Result<Self> {
        let n = self.dim();
        if v.nrows() != n || v.ncols() == 0 || v.ncols() > n {
            return Err(Error::Dimension(format!("basis must be {n}×k with 1 ≤ k ≤ {n}, got {}×{}", v.nrows(), v.ncols())));
        }
        let vh = v.adjoint();
        if (&vh * v - identity(v.ncols())).norm() > 1e-10 {
            return Err(Error::Validation("basis columns are not orthonormal".into()));
        }
        let leak = |m: &ComplexMatrix| {
            let mv = m * v;
            (&mv - v * (&vh * &mv)).norm()
        };
        let bound = 1e-10 * self.scale();
        let worst = self.ops.iter().map(leak).fold(leak(&self.drift), f64::max);
        if worst > bound {
            return Err(Error::Validation(format!("subspace is not invariant (leak {worst:.3e})")));
        }
        let h = crate::qcore::matrix::hermitize(&(&vh * &self.h * v));
        let ops = self.ops.iter().map(|b| &vh * b * v).collect();
        Self::new(h, ops)
    }
}

pub fn dissipator(b: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let bdb = b.adjoint() * b;
    b * rho * b.adjoint() - (&bdb * rho + rho * &bdb) * C64::new(0.5, 0.0)
}

/// `Lρ`; `ρ` need not be Hermitian.
pub fn apply_liouvillian(sys: &LindbladSystem, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.nrows() != sys.dim() || rho.ncols() != sys.dim() {
        return Err(Error::Dimension(format!(
            "state is {}x{}, system dimension is {}",
            rho.nrows(),
            rho.ncols(),
            sys.dim()
        )));
    }
    Ok(sys.apply(rho))
}

/// Superoperator matrix of `L` acting on column-stacked `vec(ρ)`, using
/// `vec(AXB) = (Bᵀ⊗A) vec(X)`.
pub fn superoperator(sys: &LindbladSystem) -> ComplexMatrix {
    let n = sys.dim();
    let id = identity(n);
    let k = sys.drift_matrix();
    let mut l = -(kron(&id, k) + kron(&k.adjoint().transpose(), &id));
    for b in sys.lindblad_ops() {
        l += kron(&b.conjugate(), b);
    }
    l
}

/// One real coordinate of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    /// `ν_i = ρ_ii` for `i < n − 1`.
    Population(usize),
    /// `λ_ij = Re ρ_ij` for `i > j`.
    Real(usize, usize),
    /// `μ_ij = Im ρ_ij` for `i > j`.
    Imag(usize, usize),
}

/// Fixed enumeration of the `n² − 1` real coordinates: populations
/// `ν_0..ν_{n−2}` first, then for each lower-triangular pair `i > j` in
/// row-major order the pair `(λ_ij, μ_ij)`. The last population is
/// implied by unit trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateMap {
    n: usize,
    coords: Vec<Coordinate>,
}

impl CoordinateMap {
    pub fn new(n: usize) -> Self {
        let mut coords = Vec::with_capacity(n * n - 1);
        coords.extend((0..n.saturating_sub(1)).map(Coordinate::Population));
        for i in 1..n {
            for j in 0..i {
                coords.push(Coordinate::Real(i, j));
                coords.push(Coordinate::Imag(i, j));
            }
        }
        Self { n, coords }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coordinates(&self) -> &[Coordinate] {
        &self.coords
    }

    /// Linear direction in matrix space carried by coordinate `k`.
    fn direction(&self, k: usize) -> ComplexMatrix {
        let n = self.n;
        let mut m = ComplexMatrix::zeros(n, n);
        match self.coords[k] {
            Coordinate::Population(i) => {
                m[(i, i)] = C64::new(1.0, 0.0);
                m[(n - 1, n - 1)] = C64::new(-1.0, 0.0);
            }
            Coordinate::Real(i, j) => {
                m[(i, j)] = C64::new(1.0, 0.0);
                m[(j, i)] = C64::new(1.0, 0.0);
            }
            Coordinate::Imag(i, j) => {
                m[(i, j)] = I;
                m[(j, i)] = -I;
            }
        }
        m
    }

    /// `ρ(x)`: Hermitian, unit trace (positivity not implied).
    pub fn density(&self, x: &DVector<f64>) -> ComplexMatrix {
        let n = self.n;
        let mut m = self.tangent(x);
        m[(n - 1, n - 1)] += C64::new(1.0, 0.0);
        m
    }

    /// Traceless Hermitian matrix with coordinates `dx` (the devectorization
    /// of a velocity `ẋ`).
    pub fn tangent(&self, dx: &DVector<f64>) -> ComplexMatrix {
        let n = self.n;
        let mut m = ComplexMatrix::zeros(n, n);
        let mut last = 0.0;
        for (k, c) in self.coords.iter().enumerate() {
            match *c {
                Coordinate::Population(i) => {
                    m[(i, i)] = C64::new(dx[k], 0.0);
                    last -= dx[k];
                }
                Coordinate::Real(i, j) => {
                    m[(i, j)].re = dx[k];
                    m[(j, i)].re = dx[k];
                }
                Coordinate::Imag(i, j) => {
                    m[(i, j)].im = dx[k];
                    m[(j, i)].im = -dx[k];
                }
            }
        }
        m[(n - 1, n - 1)] = C64::new(last, 0.0);
        m
    }

    /// Reads the coordinates of a matrix (lower triangle and the first
    /// `n − 1` diagonal entries).
    pub fn coords_of(&self, m: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.coords.len(),
            self.coords.iter().map(|c| match *c {
                Coordinate::Population(i) => m[(i, i)].re,
                Coordinate::Real(i, j) => m[(i, j)].re,
                Coordinate::Imag(i, j) => m[(i, j)].im,
            }),
        )
    }
}

/// `ẋ = A x + a`.
#[derive(Debug, Clone)]
pub struct VectorizedDynamics {
    pub a: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub map: CoordinateMap,
}

impl VectorizedDynamics {
    pub fn velocity(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.offset
    }
}

/// Real affine form of the generator, assembled from the superoperator.
pub fn vectorize(sys: &LindbladSystem) -> VectorizedDynamics {
    let n = sys.dim();
    let map = CoordinateMap::new(n);
    let sup = superoperator(sys);
    let m = map.len();
    let mut a = DMatrix::zeros(m, m);
    for k in 0..m {
        let dir = map.direction(k);
        let out = &sup * nalgebra::DVector::from_column_slice(dir.as_slice());
        let out = ComplexMatrix::from_column_slice(n, n, out.as_slice());
        a.set_column(k, &map.coords_of(&out));
    }
    let mut base = ComplexMatrix::zeros(n, n);
    base[(n - 1, n - 1)] = C64::new(1.0, 0.0);
    let out = &sup * nalgebra::DVector::from_column_slice(base.as_slice());
    let offset = map.coords_of(&ComplexMatrix::from_column_slice(n, n, out.as_slice()));
    VectorizedDynamics { a, offset, map }
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    /// `A` invertible (condition number below `1e12`).
    pub unique: bool,
    /// `max Re λ(A)`.
    pub spectral_abscissa: f64,
    /// `‖Lρ‖_F`.
    pub residual: f64,
    pub condition_number: f64,
    /// Dimension of the affine set of fixed points (0 when unique).
    pub degeneracy: usize,
    pub selection: Selection,
}

/// How the returned state was chosen among the fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Unique,
    /// A certified pure steady state, first in certificate order.
    Pure,
    /// Fixed point closest in coordinates to `I/n`.
    NearestMaximallyMixed,
}

const CONDITION_LIMIT: f64 = 1e12;

/// Solves `A x + a = 0`.
///
/// For invertible `A` the unique solution `x = −A⁻¹a` is returned. When
/// `A` is singular the fixed points form an affine set. If that set contains
/// a pure state (a certificate exists) the first certified state is returned;
/// otherwise the fixed point closest in coordinates to the maximally mixed
/// state, obtained with the pseudo-inverse.
pub fn steady_state(sys: &LindbladSystem) -> Result<SteadyStateResult> {
    let n = sys.dim();
    if n == 0 {
        return Err(Error::Dimension("empty system".into()));
    }
    let dynamics = vectorize(sys);
    let spectral_abscissa = spectral_abscissa(&dynamics)?;
    if n == 1 {
        let rho = DensityMatrix::new(identity(1))?;
        return Ok(SteadyStateResult {
            rho,
            unique: true,
            spectral_abscissa,
            residual: 0.0,
            condition_number: 1.0,
            degeneracy: 0,
            selection: Selection::Unique,
        });
    }

    let svd = SVD::new(dynamics.a.clone(), true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let unique = condition_number < CONDITION_LIMIT;
    let cutoff = smax / CONDITION_LIMIT;
    let degeneracy = if unique { 0 } else { svd.singular_values.iter().filter(|&&s| s <= cutoff).count() };

    if !unique {
        if let Some(cert) = crate::certify::certify(sys, &Tolerances::default())? {
            let rho = DensityMatrix::pure(&cert.state);
            return Ok(SteadyStateResult {
                residual: cert.generator_residual,
                rho,
                unique,
                spectral_abscissa,
                condition_number,
                degeneracy,
                selection: Selection::Pure,
            });
        }
    }

    let x = if unique {
        dynamics
            .a
            .clone()
            .lu()
            .solve(&(-&dynamics.offset))
            .ok_or_else(|| Error::Inconsistency("LU failed on a well-conditioned A".into()))?
    } else {
        let center = dynamics.map.coords_of(DensityMatrix::maximally_mixed(n).matrix());
        let rhs = -(&dynamics.offset + &dynamics.a * &center);
        let step = svd
            .solve(&rhs, cutoff)
            .map_err(|e| Error::Inconsistency(format!("pseudo-inverse failed: {e}")))?;
        center + step
    };

    let rho = crate::qcore::matrix::hermitize(&dynamics.map.density(&x));
    let residual = sys.apply(&rho).norm();
    let bound = 1e-9 * sys.scale();
    if !(residual <= bound) {
        return Err(Error::Infeasible { residual, bound });
    }
    let rho = DensityMatrix::new(rho).map_err(|e| {
        Error::Inconsistency(format!("fixed point of the generator is not a valid state: {e}"))
    })?;
    let selection = if unique { Selection::Unique } else { Selection::NearestMaximallyMixed };
    Ok(SteadyStateResult { rho, unique, spectral_abscissa, residual, condition_number, degeneracy, selection })
}

fn spectral_abscissa(dynamics: &VectorizedDynamics) -> Result<f64> {
    if dynamics.a.is_empty() {
        return Ok(0.0);
    }
    Ok(real_eigenvalues(&dynamics.a)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// Every eigenvalue of `A` has real part below `−1e−9`.
    StrictlyStable,
    MarginallyStable,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub class: Stability,
    pub eigenvalues: Vec<C64>,
    pub spectral_abscissa: f64,
}

pub fn stability(dynamics: &VectorizedDynamics) -> Result<StabilityReport> {
    let eigenvalues = if dynamics.a.is_empty() { Vec::new() } else { real_eigenvalues(&dynamics.a)? };
    let spectral_abscissa = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let spectral_abscissa = if eigenvalues.is_empty() { 0.0 } else { spectral_abscissa };
    let class = if spectral_abscissa < -1e-9 { Stability::StrictlyStable } else { Stability::MarginallyStable };
    Ok(StabilityReport { class, eigenvalues, spectral_abscissa })
}

/// Raised when an RK4 state has an eigenvalue below `−1e−6`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationWarning {
    pub step: usize,
    pub time: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub warnings: Vec<IntegrationWarning>,
}

impl Evolution {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("evolution holds the initial state")
    }
}

const POSITIVITY_WARNING: f64 = -1e-6;

/// Classic RK4 on `dρ/dt = Lρ`, recording every step.
pub fn integrate(sys: &LindbladSystem, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<Evolution> {
    integrate_sampled(sys, rho0, t_final, dt, 1)
}

/// RK4 with output every `sample_every` steps (the initial and final
/// states are always recorded). Each step is Hermitized and rescaled to
/// unit trace; positivity is monitored, not enforced.
pub fn integrate_sampled(
    sys: &LindbladSystem,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Evolution> {
    if !(dt > 0.0) || !(t_final >= dt) {
        return Err(Error::Validation(format!("need dt > 0 and T ≥ dt (dt = {dt}, T = {t_final})")));
    }
    if rho0.dim() != sys.dim() {
        return Err(Error::Dimension(format!("initial state {} vs system {}", rho0.dim(), sys.dim())));
    }
    let every = sample_every.max(1);
    let steps = (t_final / dt).round() as usize;
    let mut rho = rho0.matrix().clone();
    let mut out = Evolution { times: vec![0.0], states: vec![rho0.clone()], warnings: Vec::new() };
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    for step in 1..=steps {
        let k1 = sys.apply(&rho);
        let k2 = sys.apply(&(&rho + &k1 * half));
        let k3 = sys.apply(&(&rho + &k2 * half));
        let k4 = sys.apply(&(&rho + &k3 * full));
        rho += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * sixth;
        let state = DensityMatrix::renormalized(&rho);
        rho = state.matrix().clone();
        let min = min_hermitian_eigenvalue(&rho);
        if min < POSITIVITY_WARNING {
            out.warnings.push(IntegrationWarning { step, time: step as f64 * dt, min_eigenvalue: min });
        }
        if step % every == 0 || step == steps {
            out.times.push(step as f64 * dt);
            out.states.push(state);
        }
    }
    Ok(out)
}
