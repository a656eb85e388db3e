// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("non-finite result in {0}")]
    NonFinite(&'static str),

    #[error("steady state is not unique ({count} singular values below {tolerance:e})")]
    DegenerateSteadyState { count: usize, tolerance: f64 },

    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    SteadyStateResidual { residual: f64, tolerance: f64 },

    #[error("zero intensity: normalised correlation is undefined")]
    ZeroIntensity,

    #[error("eigenvalue crossing near the counting-field origin: {0}")]
    EigenvalueCrossing(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("not a classical rate model: {0}")]
    NotClassical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
