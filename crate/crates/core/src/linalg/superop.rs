// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Super-operators on column-stacked operators.
//!
//! `vec(ρ)[i + d·j] = ρ[i, j]`, so `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)` and the
//! commutator generator is `−i[H, ·] ↦ −i (I ⊗ H − Hᵀ ⊗ I)`.

use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector, RowDVector};

use super::operator::{max_abs_diff, Operator, C64, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl SuperOperator {
    pub fn new(dim: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let n = dim * dim;
        if dim == 0 || matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::dims(format!(
                "super-operator on dim {dim} must be {n}x{n}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub(crate) fn from_matrix_unchecked(dim: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), dim * dim);
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix_unchecked(dim, DMatrix::identity(dim * dim, dim * dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_unchecked(dim, DMatrix::zeros(dim * dim, dim * dim))
    }

    /// `ρ ↦ a ρ`.
    pub fn left(a: &Operator) -> Self {
        let id = DMatrix::<C64>::identity(a.dim(), a.dim());
        Self::from_matrix_unchecked(a.dim(), id.kronecker(a.matrix()))
    }

    /// `ρ ↦ ρ b`.
    pub fn right(b: &Operator) -> Self {
        let id = DMatrix::<C64>::identity(b.dim(), b.dim());
        Self::from_matrix_unchecked(b.dim(), b.matrix().transpose().kronecker(&id))
    }

    /// `ρ ↦ a ρ b`.
    pub fn sandwich(a: &Operator, b: &Operator) -> Self {
        Self::from_matrix_unchecked(a.dim(), b.matrix().transpose().kronecker(a.matrix()))
    }

    /// The jump term `ρ ↦ rate · c ρ c†`.
    pub fn jump(c: &Operator, rate: f64) -> Self {
        Self::sandwich(c, &c.dagger()).scale(rate)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.scale_complex(C64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self::from_matrix_unchecked(self.dim, &self.matrix * factor)
    }

    /// `self ∘ other`, i.e. `other` acts first.
    pub fn compose(&self, other: &SuperOperator) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self::from_matrix_unchecked(self.dim, &self.matrix * &other.matrix))
    }

    pub fn apply(&self, m: &Operator) -> Result<Operator> {
        apply_super(self, m)
    }

    pub fn max_abs_diff(&self, other: &SuperOperator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    /// Largest modulus of `vec(I)† · L`, zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let t = trace_functional(self.dim);
        (t * &self.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Extracts the block acting on the operators spanned by `indices`.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let d = self.dim;
        let pairs: Vec<usize> = (0..k)
            .flat_map(|j| (0..k).map(move |i| (i, j)))
            .map(|(i, j)| indices[i] + d * indices[j])
            .collect();
        let m = DMatrix::from_fn(k * k, k * k, |r, c| self.matrix[(pairs[r], pairs[c])]);
        Self::from_matrix_unchecked(k, m)
    }

    fn check_same_dim(&self, other: &SuperOperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::dims(format!(
                "super-operators on dims {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        assert_eq!(self.dim, rhs.dim, "super-operator dimension mismatch");
        SuperOperator::from_matrix_unchecked(self.dim, &self.matrix + &rhs.matrix)
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: &SuperOperator) -> SuperOperator {
        assert_eq!(self.dim, rhs.dim, "super-operator dimension mismatch");
        SuperOperator::from_matrix_unchecked(self.dim, &self.matrix - &rhs.matrix)
    }
}

pub fn vectorize(m: &Operator) -> DVector<C64> {
    DVector::from_column_slice(m.matrix().as_slice())
}

pub fn unvectorize(dim: usize, v: &DVector<C64>) -> Operator {
    Operator::from_matrix_unchecked(DMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Row vector `vec(I)†`, so that `trace_functional(d) · vec(ρ) = Tr ρ`.
pub fn trace_functional(dim: usize) -> RowDVector<C64> {
    RowDVector::from_fn(dim * dim, |_, k| if k % (dim + 1) == 0 { ONE } else { ZERO })
}

/// Lindblad generator `ρ ↦ −i[h, ρ] + Σ_k γ_k (c_k ρ c_k† − ½{c_k†c_k, ρ})`.
pub fn liouvillian(h: &Operator, channels: &[(Operator, f64)]) -> Result<SuperOperator> {
    let d = h.dim();
    let id = DMatrix::<C64>::identity(d, d);
    let minus_i = C64::new(0.0, -1.0);
    let mut l = (id.kronecker(h.matrix()) - h.matrix().transpose().kronecker(&id)) * minus_i;
    for (k, (c, rate)) in channels.iter().enumerate() {
        h.check_same_dim(c, "collapse operator")?;
        if !(*rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param(format!("channel {k} has invalid rate {rate}")));
        }
        if *rate == 0.0 {
            continue;
        }
        let cdc = c.dagger().matrix() * c.matrix();
        let sandwich = c.matrix().conjugate().kronecker(c.matrix());
        let anti = id.kronecker(&cdc) + cdc.transpose().kronecker(&id);
        l += (sandwich - anti * C64::new(0.5, 0.0)) * C64::new(*rate, 0.0);
    }
    Ok(SuperOperator::from_matrix_unchecked(d, l))
}

/// Un-vectorised `s · vec(m)`.
pub fn apply_super(s: &SuperOperator, m: &Operator) -> Result<Operator> {
    if s.dim() != m.dim() {
        return Err(Error::dims(format!(
            "super-operator on dim {} applied to operator of dim {}",
            s.dim(),
            m.dim()
        )));
    }
    Ok(unvectorize(m.dim(), &(s.matrix() * vectorize(m))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, DensityMatrix};

    fn random_op(d: usize, seed: u64) -> Operator {
        // Small LCG so the tests stay dependency free.
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        Operator::new(DMatrix::from_fn(d, d, |_, _| C64::new(next(), next()))).unwrap()
    }

    #[test]
    fn vectorisation_identities() {
        let (a, b, x) = (random_op(3, 1), random_op(3, 2), random_op(3, 3));
        let direct = &(&a * &x) * &b;
        let via = SuperOperator::sandwich(&a, &b).apply(&x).unwrap();
        assert!(direct.max_abs_diff(&via) < 1e-14);
        let via_lr = SuperOperator::left(&a).compose(&SuperOperator::right(&b)).unwrap();
        assert!(via_lr.apply(&x).unwrap().max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn zero_generator() {
        let l = liouvillian(&Operator::zeros(2), &[]).unwrap();
        assert_eq!(l, SuperOperator::zeros(2));
    }

    #[test]
    fn liouvillian_matches_direct_action() {
        let h = {
            let r = random_op(3, 7);
            &r + &r.dagger()
        };
        let c1 = random_op(3, 8);
        let c2 = random_op(3, 9);
        let rho = random_op(3, 10);
        let l = liouvillian(&h, &[(c1.clone(), 0.7), (c2.clone(), 1.3)]).unwrap();
        let i = C64::new(0.0, 1.0);
        let comm = &(&h * &rho) - &(&rho * &h);
        let mut expected = Operator::from_matrix_unchecked(comm.matrix() * (-i));
        for (c, g) in [(c1, 0.7), (c2, 1.3)] {
            let cd = c.dagger();
            let cdc = &cd * &c;
            let term = &(&(&c * &rho) * &cd)
                - &(&(&cdc * &rho) + &(&rho * &cdc)).scale(0.5);
            expected = &expected + &term.scale(g);
        }
        assert!(l.apply(&rho).unwrap().max_abs_diff(&expected) < 1e-13);
        assert!(l.trace_defect() < 1e-13);
    }

    #[test]
    fn liouvillian_errors() {
        let h = Operator::zeros(2);
        assert!(matches!(
            liouvillian(&h, &[(Operator::zeros(3), 1.0)]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            liouvillian(&h, &[(pauli_x(), -1.0)]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn identity_super_operator() {
        let m = random_op(4, 11);
        assert_eq!(apply_super(&SuperOperator::identity(4), &m).unwrap(), m);
        assert!(apply_super(&SuperOperator::identity(3), &m).is_err());
    }

    #[test]
    fn jump_on_projector() {
        // Single-excitation cavity basis ordering {|e,0⟩, |g,1⟩}: κ σ̃₊ ρ σ̃₋.
        let kappa = 2.5;
        let raise = Operator::outer(2, 0, 1);
        let out = SuperOperator::jump(&raise, kappa)
            .apply(DensityMatrix::basis(2, 1).op())
            .unwrap();
        assert!(out.max_abs_diff(&Operator::outer(2, 0, 0).scale(kappa)) < 1e-15);
    }

    #[test]
    fn restrict_extracts_block() {
        let h = Operator::diagonal(&[1.0, 2.0, 3.0]);
        let l = liouvillian(&h, &[]).unwrap();
        let block = l.restrict(&[0, 2]);
        let expected = liouvillian(&Operator::diagonal(&[1.0, 3.0]), &[]).unwrap();
        assert!(block.max_abs_diff(&expected) < 1e-15);
    }
}
