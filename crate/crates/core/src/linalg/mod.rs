// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for Lindblad generators.

mod dynamics;
mod eig;
mod expm;
mod operator;
mod superop;

pub use dynamics::{evolve, expectation, propagate, steady_state, steady_state_with, Stepper};
pub use eig::{eigen, eigenvalues, Eigen};
pub use expm::{expm, MAX_SQUARINGS};
pub use operator::{annihilation, kron, pauli_x, pauli_z, DensityMatrix, Operator, C64};
pub use superop::{
    apply_super, liouvillian, trace_functional, unvectorize, vectorize, SuperOperator,
};

/// Numerical tolerances used by state validation and the steady-state solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `‖ρ − ρ†‖_max` allowed for a density matrix.
    pub hermiticity: f64,
    /// `|Tr ρ − 1|` allowed for a density matrix.
    pub trace: f64,
    /// Most negative eigenvalue accepted for a density matrix.
    pub positivity: f64,
    /// Singular values below `null_space · max(1, σ_max)` count as zero.
    pub null_space: f64,
    /// Allowed `‖L vec(ρ_ss)‖` relative to `max(1, σ_max)`.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-12,
            trace: 1e-12,
            positivity: 1e-10,
            null_space: 1e-8,
            residual: 1e-10,
        }
    }
}
