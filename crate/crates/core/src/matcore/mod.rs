//! Dense complex linear algebra at desk scale (dimension ≤ 64).

mod eig;
mod matrix;
mod state;

pub use eig::{
    complete_basis, herm_eig, herm_eig_with, polar_unitary, psd_sqrt, psd_sqrt_with, trace_norm,
    HermEig, MAX_SWEEPS,
};
pub use matrix::{
    basis_vector, inner, kron_vec, norm, normalized, pauli_x, pauli_y, pauli_z, ComplexMatrix,
    Subsystem, C64, I, ONE, ZERO,
};
pub use state::{BlochVector, DensityOperator};
