//! Homodyne stochastic master equations, with and without feedback.
//!
//! Two first-order updates are provided, both followed by Hermitization and
//! trace renormalization:
//!
//! * [`Integrator::EulerMaruyama`]: `ρ + drift·dt + noise·dW` for the Itô
//!   equations. On nearly pure states its smallest eigenvalue is about
//!   `‖(c − ⟨c⟩)ψ‖²(dt − dW²)`, so long runs at `dt ~ 1e−3` trip the
//!   positivity check.
//! * [`Integrator::Kraus`]: `ρ → MρM†` with `M = I − (iH + ½c†c)dt + c·dy`,
//!   and `(H, c)` replaced by `(H', c − iF)` under feedback. It agrees with
//!   the Itô equations to first order, is positive by construction and
//!   leaves certified pure steady states exactly fixed.
//!
//! Averaging the feedback equation over the noise gives the feedback master
//! equation of [`crate::feedback`].
//!
//! Randomness is Xoshiro256++ with Box–Muller normals. Trajectory `i` of a
//! run seeded with `s` draws from its own generator, seeded by
//! `x ^ (i · 0x9E3779B97F4A7C15)` where `x` is the first output of the
//! generator seeded with `s` (seeding goes through SplitMix64). Streams are
//! therefore identical on every platform and independent of scheduling.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::feedback::{feedback_test_matrices, FeedbackSetup};
use crate::qcore::eig::min_hermitian_eigenvalue;
use crate::qcore::matrix::{comm, re, ComplexMatrix, I};
use crate::qcore::DensityMatrix;

/// Smallest eigenvalue tolerated after a step before it is rejected.
pub const STEP_POSITIVITY_LIMIT: f64 = -1e-4;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Measurement only; `F` is ignored.
    Plain,
    Feedback,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    EulerMaruyama,
    #[default]
    Kraus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
    pub n_traj: usize,
    pub scheme: Scheme,
    pub integrator: Integrator,
    /// Store the conditioned state every this many steps (the initial and
    /// final states are always stored).
    pub sample_every: usize,
}

impl TrajectoryConfig {
    pub fn new(dt: f64, t_final: f64, seed: u64, n_traj: usize, scheme: Scheme) -> Self {
        Self { dt, t_final, seed, n_traj, scheme, integrator: Integrator::default(), sample_every: 1 }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_sample_every(mut self, every: usize) -> Self {
        self.sample_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err(Error::Validation(format!("T = {} must be at least dt = {}", self.t_final, self.dt)));
        }
        if self.n_traj == 0 {
            return Err(Error::Validation("n_traj must be at least 1".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::Validation("sample_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// Conditioned states at `times`.
    pub states: Vec<DensityMatrix>,
    /// Measurement increments `dy`, one per step.
    pub record: Vec<f64>,
    pub seed: u64,
    pub index: usize,
}

/// Standard normal samples by the polar-free Box–Muller transform.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(rng: Xoshiro256PlusPlus) -> Self {
        Self { rng, spare: None }
    }

    /// Substream for trajectory `index` of a run seeded with `seed`.
    pub fn for_trajectory(seed: u64, index: usize) -> Self {
        let root = Xoshiro256PlusPlus::seed_from_u64(seed).next_u64();
        Self::new(Xoshiro256PlusPlus::seed_from_u64(root ^ (index as u64).wrapping_mul(GOLDEN)))
    }

    /// Uniform on `(0, 1]` with 53 random bits.
    fn uniform_open_closed(&mut self) -> f64 {
        1.0 - (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open_closed();
        let u2 = self.uniform_open_closed();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// Wiener increment with variance `dt`.
    pub fn increment(&mut self, dt: f64) -> f64 {
        self.next_standard() * dt.sqrt()
    }
}

fn lindblad_term(c: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let cdc = c.adjoint() * c;
    c * rho * c.adjoint() - (&cdc * rho + rho * &cdc) * re(0.5)
}

/// `cρ + ρc† − Tr[(c + c†)ρ]ρ` and `Tr[(c + c†)ρ]`.
fn innovation(c: &ComplexMatrix, rho: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let cr = c * rho;
    let mean = 2.0 * cr.trace().re;
    (&cr + cr.adjoint() - rho * re(mean), mean)
}

fn finish(rho: &ComplexMatrix) -> Result<DensityMatrix> {
    let next = DensityMatrix::renormalized(rho);
    let min = min_hermitian_eigenvalue(next.matrix());
    if !(min >= STEP_POSITIVITY_LIMIT) {
        return Err(Error::StepQuality { min_eigenvalue: min });
    }
    Ok(next)
}

/// Deterministic and stochastic parts of the measurement-only SME at `ρ`.
pub fn sme_coefficients(rho: &ComplexMatrix, h: &ComplexMatrix, c: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix, f64) {
    let drift = comm(h, rho) * (-I) + lindblad_term(c, rho);
    let (noise, mean) = innovation(c, rho);
    (drift, noise, mean)
}

/// Deterministic and stochastic parts of the feedback SME at `ρ`:
/// drift `−i[H,ρ] + D[c]ρ − i[F, cρ + ρc†] + D[F]ρ`, noise
/// `cρ + ρc† − Tr[(c+c†)ρ]ρ − i[F, ρ]`.
pub fn feedback_sme_coefficients(rho: &ComplexMatrix, setup: &FeedbackSetup) -> (ComplexMatrix, ComplexMatrix, f64) {
    let (c, f) = (setup.measurement(), setup.feedback());
    let (mut drift, mut noise, mean) = sme_coefficients(rho, setup.hamiltonian(), c);
    let cr = c * rho;
    drift += comm(f, &(&cr + cr.adjoint())) * (-I) + lindblad_term(f, rho);
    noise += comm(f, rho) * (-I);
    (drift, noise, mean)
}

/// One Euler–Maruyama step of `dρ = −i[H,ρ]dt + D[c]ρ dt + H[c]ρ dW`.
/// Returns the renormalized state and `dy = Tr[(c+c†)ρ]dt + dW`.
pub fn sme_step(rho: &DensityMatrix, h: &ComplexMatrix, c: &ComplexMatrix, dw: f64, dt: f64) -> Result<(DensityMatrix, f64)> {
    check_step(rho, h, c, dt)?;
    let (drift, noise, mean) = sme_coefficients(rho.matrix(), h, c);
    let next = finish(&(rho.matrix() + drift * re(dt) + noise * re(dw)))?;
    Ok((next, mean * dt + dw))
}

/// One Euler–Maruyama step of the feedback SME. Requires `η = 1`.
pub fn feedback_sme_step(rho: &DensityMatrix, setup: &FeedbackSetup, dw: f64, dt: f64) -> Result<(DensityMatrix, f64)> {
    require_ideal(setup)?;
    check_step(rho, setup.hamiltonian(), setup.measurement(), dt)?;
    let (drift, noise, mean) = feedback_sme_coefficients(rho.matrix(), setup);
    let next = finish(&(rho.matrix() + drift * re(dt) + noise * re(dw)))?;
    Ok((next, mean * dt + dw))
}

fn check_step(rho: &DensityMatrix, h: &ComplexMatrix, c: &ComplexMatrix, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("dt must be positive, got {dt}")));
    }
    let n = rho.dim();
    if h.shape() != (n, n) || c.shape() != (n, n) {
        return Err(Error::Dimension(format!("operators must be {n}x{n} to act on the state")));
    }
    Ok(())
}

fn require_ideal(setup: &FeedbackSetup) -> Result<()> {
    if setup.eta() != 1.0 {
        return Err(Error::Validation(format!(
            "trajectories need perfect detection; got η = {}",
            setup.eta()
        )));
    }
    Ok(())
}

/// Positive first-order update `ρ → MρM†` with `M = I − K·dt + L·dy`.
///
/// Plain scheme: `K = iH + ½c†c`, `L = c`. Feedback scheme: `K = iH' +
/// ½B†B`, `L = B = c − iF`; the feedback SME is the plain SME for `(H', B)`
/// with the same innovation because `Tr[(B + B†)ρ] = Tr[(c + c†)ρ]`.
#[derive(Debug, Clone)]
pub struct KrausStepper {
    drift: ComplexMatrix,
    jump: ComplexMatrix,
    c: ComplexMatrix,
}

impl KrausStepper {
    pub fn new(setup: &FeedbackSetup, scheme: Scheme) -> Result<Self> {
        let c = setup.measurement().clone();
        let (drift, jump) = match scheme {
            Scheme::Plain => (setup.hamiltonian() * I + c.adjoint() * &c * re(0.5), c.clone()),
            Scheme::Feedback => {
                require_ideal(setup)?;
                let m = feedback_test_matrices(setup);
                (m.a, m.b)
            }
        };
        Ok(Self { drift, jump, c })
    }

    /// Returns the next state and `dy`.
    pub fn step(&self, rho: &DensityMatrix, dw: f64, dt: f64) -> Result<(DensityMatrix, f64)> {
        if !(dt > 0.0) {
            return Err(Error::Validation(format!("dt must be positive, got {dt}")));
        }
        if rho.dim() != self.c.nrows() {
            return Err(Error::Dimension(format!("state is {0}x{0}, operators are {1}x{1}", rho.dim(), self.c.nrows())));
        }
        let mean = 2.0 * (&self.c * rho.matrix()).trace().re;
        let dy = mean * dt + dw;
        let n = rho.dim();
        let m = ComplexMatrix::identity(n, n) - &self.drift * re(dt) + &self.jump * re(dy);
        Ok((finish(&(&m * rho.matrix() * m.adjoint()))?, dy))
    }
}

/// Runs trajectory `index` of `config`.
pub fn simulate_one(rho0: &DensityMatrix, setup: &FeedbackSetup, config: &TrajectoryConfig, index: usize) -> Result<TrajectoryRecord> {
    let steps = config.steps();
    let mut noise = GaussianStream::for_trajectory(config.seed, index);
    let mut rho = rho0.clone();
    let mut times = vec![0.0];
    let mut states = vec![rho.clone()];
    let mut record = Vec::with_capacity(steps);
    let kraus = match config.integrator {
        Integrator::Kraus => Some(KrausStepper::new(setup, config.scheme)?),
        Integrator::EulerMaruyama => None,
    };
    for k in 1..=steps {
        let dw = noise.increment(config.dt);
        let step = match (&kraus, config.scheme) {
            (Some(stepper), _) => stepper.step(&rho, dw, config.dt),
            (None, Scheme::Plain) => sme_step(&rho, setup.hamiltonian(), setup.measurement(), dw, config.dt),
            (None, Scheme::Feedback) => feedback_sme_step(&rho, setup, dw, config.dt),
        };
        let (next, dy) = step.map_err(|e| Error::Trajectory { trajectory: index, step: k, source: Box::new(e) })?;
        rho = next;
        record.push(dy);
        if k % config.sample_every == 0 || k == steps {
            times.push(k as f64 * config.dt);
            states.push(rho.clone());
        }
    }
    Ok(TrajectoryRecord { times, states, record, seed: config.seed, index })
}

fn check_run(rho0: &DensityMatrix, setup: &FeedbackSetup, config: &TrajectoryConfig) -> Result<()> {
    config.validate()?;
    if rho0.dim() != setup.dim() {
        return Err(Error::Dimension(format!("initial state is {0}x{0}, system is {1}x{1}", rho0.dim(), setup.dim())));
    }
    if config.scheme == Scheme::Feedback {
        require_ideal(setup)?;
    }
    Ok(())
}

/// All trajectories on the calling thread.
pub fn simulate_sequential(rho0: &DensityMatrix, setup: &FeedbackSetup, config: &TrajectoryConfig) -> Result<Vec<TrajectoryRecord>> {
    check_run(rho0, setup, config)?;
    (0..config.n_traj).map(|i| simulate_one(rho0, setup, config, i)).collect()
}

/// Trajectories spread over the rayon pool; output order and content match
/// [`simulate_sequential`].
#[cfg(feature = "parallel")]
pub fn simulate_parallel(rho0: &DensityMatrix, setup: &FeedbackSetup, config: &TrajectoryConfig) -> Result<Vec<TrajectoryRecord>> {
    use rayon::prelude::*;
    check_run(rho0, setup, config)?;
    (0..config.n_traj).into_par_iter().map(|i| simulate_one(rho0, setup, config, i)).collect()
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn simulate(rho0: &DensityMatrix, setup: &FeedbackSetup, config: &TrajectoryConfig) -> Result<Vec<TrajectoryRecord>> {
    #[cfg(feature = "parallel")]
    {
        simulate_parallel(rho0, setup, config)
    }
    #[cfg(not(feature = "parallel"))]
    {
        simulate_sequential(rho0, setup, config)
    }
}

/// Pointwise mean of the conditioned states.
pub fn ensemble_average(records: &[TrajectoryRecord]) -> Result<Vec<DensityMatrix>> {
    let first = records.first().ok_or_else(|| Error::Validation("no trajectories to average".into()))?;
    if records.iter().any(|r| r.times != first.times) {
        return Err(Error::Validation("trajectories have mismatched time grids".into()));
    }
    let weight = 1.0 / records.len() as f64;
    Ok((0..first.times.len())
        .map(|k| {
            let sum = records.iter().fold(ComplexMatrix::zeros(first.states[k].dim(), first.states[k].dim()), |acc, r| {
                acc + r.states[k].matrix()
            });
            DensityMatrix::renormalized(&(sum * re(weight)))
        })
        .collect())
}

/// Mean of `dy` over trajectories at each step.
pub fn mean_record(records: &[TrajectoryRecord]) -> Vec<f64> {
    let Some(first) = records.first() else { return Vec::new() };
    let weight = 1.0 / records.len() as f64;
    (0..first.record.len()).map(|k| records.iter().map(|r| r.record[k]).sum::<f64>() * weight).collect()
}
