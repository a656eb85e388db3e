// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::Tolerances;
use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A square complex matrix acting on a Hilbert space of dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::dims(format!(
                "operator must be square with dim >= 1, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix }
    }

    /// Builds an operator from real entries given in row-major order.
    pub fn from_real(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::dims(format!(
                "expected {} entries for a {dim}x{dim} operator, got {}",
                dim * dim,
                rows.len()
            )));
        }
        Self::new(DMatrix::from_row_iterator(
            dim,
            dim,
            rows.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::identity(dim, dim))
    }

    /// The transition operator `|row⟩⟨col|`.
    pub fn outer(dim: usize, row: usize, col: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(row, col)] = ONE;
        Self::from_matrix_unchecked(m)
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let d = DVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0)));
        Self::from_matrix_unchecked(DMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self::from_matrix_unchecked(self.matrix.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_matrix_unchecked(&self.matrix * C64::new(factor, 0.0))
    }

    pub fn kron(&self, other: &Operator) -> Self {
        Self::from_matrix_unchecked(self.matrix.kronecker(&other.matrix))
    }

    /// Largest element-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs_diff(&self.matrix, &self.matrix.adjoint()) <= tol
    }

    pub(crate) fn check_same_dim(&self, other: &Operator, what: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::dims(format!(
                "{what}: dimensions {} and {} differ",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator::from_matrix_unchecked(&self.matrix + &rhs.matrix)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator::from_matrix_unchecked(&self.matrix - &rhs.matrix)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::from_matrix_unchecked(&self.matrix * &rhs.matrix)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kron(b)
}

pub fn pauli_x() -> Operator {
    Operator::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("static")
}

pub fn pauli_z() -> Operator {
    Operator::diagonal(&[1.0, -1.0])
}

/// Truncated bosonic annihilation operator on `{|0⟩, …, |n_max⟩}`.
pub fn annihilation(n_max: usize) -> Operator {
    let d = n_max + 1;
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::from_matrix_unchecked(m)
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    pub fn with_tolerances(op: Operator, tol: &Tolerances) -> Result<Self> {
        if !op.is_hermitian(tol.hermiticity) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = min_hermitian_eigenvalue(op.matrix());
        if min_eig < -tol.positivity {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { op })
    }

    /// Wraps an evolved state without re-validating positivity.
    ///
    /// Only finiteness is enforced; the caller guarantees the operator came
    /// from a trace-preserving evolution of a valid state.
    pub(crate) fn from_evolved(op: Operator) -> Result<Self> {
        if op.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density matrix"));
        }
        Ok(Self { op })
    }

    /// The pure basis state `|index⟩⟨index|`.
    pub fn basis(dim: usize, index: usize) -> Self {
        Self { op: Operator::outer(dim, index, index) }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm2 = v.norm_squared();
        if psi.is_empty() || norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let m = (&v * v.adjoint()) / C64::new(norm2, 0.0);
        Ok(Self { op: Operator::from_matrix_unchecked(m) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: Operator::identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.op.get(index, index).re
    }

    pub fn trace(&self) -> C64 {
        self.op.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&hermitian_part(self.op.matrix()))
    }
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_identity() {
        let i4 = kron(&Operator::identity(2), &Operator::identity(2));
        assert_eq!(i4, Operator::identity(4));
    }

    #[test]
    fn kron_sigma_z_identity() {
        let k = kron(&pauli_z(), &Operator::identity(2));
        assert_eq!(k, Operator::diagonal(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_sigma_x_involution() {
        let xx = kron(&pauli_x(), &pauli_x());
        assert_eq!(&xx * &xx, Operator::identity(4));
    }

    #[test]
    fn annihilation_number_operator() {
        let a = annihilation(3);
        let n = &a.dagger() * &a;
        assert!(n.max_abs_diff(&Operator::diagonal(&[0.0, 1.0, 2.0, 3.0])) < 1e-15);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(Operator::new(DMatrix::zeros(2, 3)).is_err());
        assert!(Operator::new(DMatrix::zeros(0, 0)).is_err());
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(Operator::new(m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Operator::diagonal(&[0.5, 0.5])).is_ok());
        assert!(DensityMatrix::new(Operator::diagonal(&[0.6, 0.5])).is_err());
        assert!(DensityMatrix::new(Operator::diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(Operator::from_real(2, &[0.5, 0.1, 0.0, 0.5]).unwrap()).is_err());
    }

    #[test]
    fn pure_state_is_normalised() {
        let rho = DensityMatrix::pure(&[C64::new(3.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert!((rho.trace() - ONE).norm() < 1e-15);
        assert!((rho.population(0) - 0.36).abs() < 1e-15);
        assert!(rho.min_eigenvalue() > -1e-15);
    }
}
