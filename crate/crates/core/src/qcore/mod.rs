//! Dense complex linear algebra and quantum-state primitives.

pub mod eig;
pub mod matrix;
pub mod state;

pub use eig::{eig, eigenvalues, joint_eigenspaces, EigenDecomposition, JointEigenspace};
pub use matrix::{
    anticomm, comm, dagger, identity, kron, pauli, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z,
    ComplexMatrix, ComplexVector, Pauli,
};
pub use state::{concurrence, fidelity_to_pure, purity, trace_distance, DensityMatrix, StateVector};
