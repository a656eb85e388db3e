// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Eigenpairs of dense non-Hermitian complex matrices.
//!
//! Eigenvalues come from the complex Schur form `M = Q T Q†`; right
//! eigenvectors are obtained by back-substitution on the triangular factor.

use nalgebra::{DMatrix, DVector};

use super::operator::{C64, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Right eigenvectors as unit-norm columns, in the order of `values`.
    pub vectors: DMatrix<C64>,
}

pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let (_, t) = schur(m)?;
    Ok(t.diagonal().iter().copied().collect())
}

pub fn eigen(m: &DMatrix<C64>) -> Result<Eigen> {
    let (q, t) = schur(m)?;
    let n = t.nrows();
    let values: Vec<C64> = t.diagonal().iter().copied().collect();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = scale * f64::EPSILON;

    let mut vectors = DMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        let mut x = DVector::from_element(n, ZERO);
        x[k] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in (i + 1)..=k {
                acc += t[(i, j)] * x[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            x[i] = -acc / denom;
        }
        let v = &q * x;
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Eigen(format!("eigenvector {k} is not finite")));
        }
        vectors.set_column(k, &(v / C64::new(norm, 0.0)));
    }
    Ok(Eigen { values, vectors })
}

fn schur(m: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::dims("eigendecomposition needs a non-empty square matrix"));
    }
    let s = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    Ok(s.unpack())
}
