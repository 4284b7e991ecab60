//! Markovian-feedback master equations and pure steady states.
//!
//! The crate builds Lindblad generators (optionally modified by homodyne
//! feedback), decides whether they admit a pure steady state by searching
//! for common eigenvectors, generates the single-atom and two-qubit
//! feedback families, and cross-checks everything with steady-state
//! solves, RK4 integration and stochastic trajectories.

pub mod certify;
pub mod cli;
pub mod error;
pub mod families;
pub mod feedback;
pub mod lindblad;
pub mod qcore;
pub mod random;
pub mod sme;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
