//! JSON problem files.
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs, vectors are
//! arrays of `[re, im]`. Which fields are read depends on `kind`:
//!
//! * `custom`: `H` (required), `b` (uncontrolled channels), and optionally a
//!   homodyne channel `c` with feedback `F` and efficiency `eta`.
//! * `single-atom`: `gamma` with either `theta` + `sign` or `alpha` + `lambda`.
//! * `two-qubit`: `gamma` with `x1`..`x4` + `mu` (variant `family`, the
//!   default) or `alpha` + `lambda` (variant `original`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::families::{self, Branch};
use crate::feedback::{inefficient_master_equation, FeedbackSetup};
use crate::lindblad::LindbladSystem;
use crate::qcore::matrix::{c, ensure_hermitian, ComplexMatrix, ComplexVector};
use crate::qcore::{DensityMatrix, StateVector};
use crate::sme::{Integrator, Scheme};

pub const SCHEMA_VERSION: u32 = 1;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;
pub type VectorJson = Vec<[f64; 2]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Custom,
    SingleAtom,
    TwoQubit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoQubitVariant {
    #[default]
    Family,
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub seed: u64,
    /// `0` integrates the averaged equation only.
    pub n_traj: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<Integrator>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<MatrixJson>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<TwoQubitVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x4: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Pure state used for fidelities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<VectorJson>,
    /// Pure initial state; the maximally mixed state when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<VectorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationBlock>,
}

impl ProblemFile {
    pub fn new(kind: Kind) -> Self {
        Self {
            version: SCHEMA_VERSION,
            kind,
            gamma: None,
            eta: None,
            h: None,
            b: Vec::new(),
            c: None,
            f: None,
            alpha: None,
            lambda: None,
            theta: None,
            sign: None,
            variant: None,
            x1: None,
            x2: None,
            x3: None,
            x4: None,
            mu: None,
            target: None,
            initial_state: None,
            simulation: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: Self = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{e}")))?;
        if file.version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn vector_to_json(v: &ComplexVector) -> VectorJson {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn matrix_from_json(rows: &MatrixJson, field: &str) -> Result<ComplexMatrix, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::Parse(format!("field `{field}`: empty matrix")));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(CliError::Parse(format!(
            "field `{field}`: row {i} has {} entries, expected {n} (matrices must be square)",
            row.len()
        )));
    }
    let m = ComplexMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::Parse(format!("field `{field}`: non-finite entry")));
    }
    Ok(m)
}

fn vector_from_json(v: &VectorJson, field: &str) -> Result<StateVector, CliError> {
    let amps: Vec<_> = v.iter().map(|p| c(p[0], p[1])).collect();
    StateVector::from_amplitudes(&amps).map_err(|e| CliError::Parse(format!("field `{field}`: {e}")))
}

fn hermitian(m: ComplexMatrix, field: &str) -> Result<ComplexMatrix, CliError> {
    ensure_hermitian(&m, 1e-12, field).map_err(|e| CliError::Parse(format!("field `{field}`: {e}")))?;
    Ok(m)
}

fn required(value: Option<f64>, field: &str, kind: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Parse(format!("field `{field}` is required for kind {kind}")))
}

fn gamma(file: &ProblemFile) -> Result<f64, CliError> {
    let g = file.gamma.unwrap_or(1.0);
    if !(g > 0.0 && g.is_finite()) {
        return Err(CliError::Parse(format!("field `gamma`: must be positive, got {g}")));
    }
    Ok(g)
}

fn setup_error(e: crate::Error) -> CliError {
    CliError::Parse(format!("invalid system: {e}"))
}

/// A loaded, validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    /// Homodyne channel with feedback, when the problem has one.
    pub setup: Option<FeedbackSetup>,
    /// Uncontrolled channels `b_k`.
    pub extra: Vec<ComplexMatrix>,
    /// Averaged dynamics: the (feedback-modified) master equation.
    pub system: LindbladSystem,
    pub target: Option<StateVector>,
    pub initial: DensityMatrix,
}

impl Problem {
    pub fn from_file(file: ProblemFile) -> Result<Self, CliError> {
        let (setup, extra, default_target) = match file.kind {
            Kind::Custom => custom_parts(&file)?,
            Kind::SingleAtom => single_atom_parts(&file)?,
            Kind::TwoQubit => two_qubit_parts(&file)?,
        };
        let system = match &setup {
            Some(s) => {
                let base = inefficient_master_equation(s).map_err(setup_error)?;
                let mut ops = base.lindblad_ops().to_vec();
                ops.extend(extra.iter().cloned());
                LindbladSystem::new(base.hamiltonian().clone(), ops).map_err(setup_error)?
            }
            None => {
                let h = file.h.as_ref().ok_or_else(|| CliError::Parse("field `H` is required".into()))?;
                LindbladSystem::new(hermitian(matrix_from_json(h, "H")?, "H")?, extra.clone()).map_err(setup_error)?
            }
        };
        let n = system.dim();
        let target = match &file.target {
            Some(v) => Some(vector_from_json(v, "target")?),
            None => default_target,
        };
        let initial = match &file.initial_state {
            Some(v) => DensityMatrix::pure(&vector_from_json(v, "initial_state")?),
            None => DensityMatrix::maximally_mixed(n),
        };
        for (field, dim) in [("target", target.as_ref().map(|t| t.dim())), ("initial_state", Some(initial.dim()))] {
            if let Some(d) = dim {
                if d != n {
                    return Err(CliError::Parse(format!("field `{field}`: dimension {d}, system is {n}")));
                }
            }
        }
        if let Some(sim) = &file.simulation {
            if !(sim.dt > 0.0) || !(sim.t_final >= sim.dt) {
                return Err(CliError::Parse(format!(
                    "field `simulation`: need dt > 0 and T ≥ dt (dt = {}, T = {})",
                    sim.dt, sim.t_final
                )));
            }
            if sim.sample_every == Some(0) {
                return Err(CliError::Parse("field `simulation.sample_every`: must be at least 1".into()));
            }
        }
        Ok(Self { file, setup, extra, system, target, initial })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_file(ProblemFile::load(path)?)
    }
}

type Parts = (Option<FeedbackSetup>, Vec<ComplexMatrix>, Option<StateVector>);

fn custom_parts(file: &ProblemFile) -> Result<Parts, CliError> {
    let h = file.h.as_ref().ok_or_else(|| CliError::Parse("field `H` is required for kind custom".into()))?;
    let h = hermitian(matrix_from_json(h, "H")?, "H")?;
    let n = h.nrows();
    let extra = file
        .b
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let field = format!("b[{k}]");
            let m = matrix_from_json(b, &field)?;
            if m.nrows() != n {
                return Err(CliError::Parse(format!("field `{field}`: {0}x{0}, H is {n}x{n}", m.nrows())));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let setup = match &file.c {
        None => {
            if file.f.is_some() || file.eta.is_some() {
                return Err(CliError::Parse("fields `F` and `eta` need a measurement channel `c`".into()));
            }
            None
        }
        Some(cm) => {
            let cm = matrix_from_json(cm, "c")?;
            let f = match &file.f {
                Some(f) => hermitian(matrix_from_json(f, "F")?, "F")?,
                None => ComplexMatrix::zeros(n, n),
            };
            for (field, m) in [("c", &cm), ("F", &f)] {
                if m.nrows() != n {
                    return Err(CliError::Parse(format!("field `{field}`: {0}x{0}, H is {n}x{n}", m.nrows())));
                }
            }
            Some(FeedbackSetup::new(h, cm, f, file.eta.unwrap_or(1.0)).map_err(setup_error)?)
        }
    };
    Ok((setup, extra, None))
}

fn with_eta(setup: FeedbackSetup, eta: Option<f64>) -> Result<FeedbackSetup, CliError> {
    match eta {
        None => Ok(setup),
        Some(eta) => FeedbackSetup::new(
            setup.hamiltonian().clone(),
            setup.measurement().clone(),
            setup.feedback().clone(),
            eta,
        )
        .map_err(setup_error),
    }
}

fn single_atom_parts(file: &ProblemFile) -> Result<Parts, CliError> {
    let g = gamma(file)?;
    let (setup, phi) = match (file.theta, &file.sign) {
        (Some(theta), sign) => {
            let branch: Branch = sign.as_deref().unwrap_or("+").parse().map_err(|e| CliError::Parse(format!("field `sign`: {e}")))?;
            let p = families::single_atom_point(theta, branch, g).map_err(CliError::Numerical)?;
            (p.setup(), Some(p.phi))
        }
        (None, _) => {
            let alpha = required(file.alpha, "alpha", "single-atom (without theta)")?;
            let lambda = required(file.lambda, "lambda", "single-atom (without theta)")?;
            (families::single_atom_setup(alpha, lambda, g).map_err(setup_error)?, None)
        }
    };
    Ok((Some(with_eta(setup, file.eta)?), Vec::new(), phi))
}

fn two_qubit_parts(file: &ProblemFile) -> Result<Parts, CliError> {
    let g = gamma(file)?;
    match file.variant.unwrap_or_default() {
        TwoQubitVariant::Family => {
            let x = [file.x1, file.x2, file.x3, file.x4].map(|v| v.unwrap_or(0.0));
            let p = families::two_qubit_family(x, file.mu.unwrap_or(0.0), g).map_err(CliError::Numerical)?;
            Ok((Some(with_eta(p.setup(), file.eta)?), Vec::new(), Some(families::bell_state())))
        }
        TwoQubitVariant::Original => {
            let alpha = required(file.alpha, "alpha", "two-qubit (original)")?;
            let lambda = required(file.lambda, "lambda", "two-qubit (original)")?;
            let o = families::two_qubit_original(alpha, lambda, g).map_err(setup_error)?;
            Ok((Some(with_eta(o.setup(), file.eta)?), Vec::new(), Some(families::bell_state())))
        }
    }
}
