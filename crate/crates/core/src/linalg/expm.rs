// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring with a [13/13] Padé approximant.
//!
//! The generators in this crate are at most a few hundred entries on a side,
//! so the dense method is exact to rounding. When the required number of
//! squarings exceeds [`MAX_SQUARINGS`] the exponential is taken from an
//! eigendecomposition instead, since repeated squaring of a huge-norm matrix
//! accumulates error.

use nalgebra::DMatrix;

use super::eig::eigen;
use super::operator::C64;
use crate::error::{Error, Result};

/// θ₁₃ from Higham's backward-error analysis.
const THETA_13: f64 = 5.371_920_351_148_152;

pub const MAX_SQUARINGS: u32 = 48;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

pub fn expm(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    expm_with_limit(a, MAX_SQUARINGS)
}

pub(crate) fn expm_with_limit(a: &DMatrix<C64>, max_squarings: u32) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::dims("matrix exponential needs a square matrix"));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as u32 } else { 0 };
    let out = if s > max_squarings {
        expm_eigen(a)?
    } else {
        let scaled = a * C64::new(0.5f64.powi(s as i32), 0.0);
        let mut x = pade13(&scaled)?;
        for _ in 0..s {
            x = &x * &x;
        }
        x
    };
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential"));
    }
    Ok(out)
}

fn pade13(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    let b = |k: usize| C64::new(PADE_13[k], 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    q.lu()
        .solve(&p)
        .ok_or(Error::NonFinite("Padé denominator is singular"))
}

fn expm_eigen(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let e = eigen(a)?;
    let inv = e
        .vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Eigen("eigenvector matrix is singular".into()))?;
    let mut scaled = e.vectors.clone();
    for (k, lambda) in e.values.iter().enumerate() {
        let f = lambda.exp();
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= f);
    }
    Ok(scaled * inv)
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::{max_abs_diff, ONE, ZERO};

    fn taylor(a: &DMatrix<C64>, terms: usize) -> DMatrix<C64> {
        let n = a.nrows();
        let mut sum = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_and_diagonal() {
        let z = DMatrix::<C64>::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(3, 3));
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(-1.0, 2.0),
            C64::new(0.5, 0.0),
        ]));
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] - C64::new(-1.0, 2.0).exp()).norm() < 1e-15);
        assert!((e[(1, 1)] - C64::new(0.5, 0.0).exp()).norm() < 1e-15);
    }

    #[test]
    fn matches_taylor_for_small_norm() {
        let a = DMatrix::from_row_slice(2, 2, &[
            C64::new(0.1, 0.2), C64::new(-0.3, 0.0),
            C64::new(0.05, -0.1), C64::new(-0.2, 0.1),
        ]);
        assert!(max_abs_diff(&expm(&a).unwrap(), &taylor(&a, 30)) < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        // exp(θ [[0, -1], [1, 0]]) is a rotation by θ.
        let theta = 37.0;
        let a = DMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]) * C64::new(theta, 0.0);
        let e = expm(&a).unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        let r = DMatrix::from_row_slice(2, 2, &[
            C64::new(c, 0.0), C64::new(-s, 0.0),
            C64::new(s, 0.0), C64::new(c, 0.0),
        ]);
        assert!(max_abs_diff(&e, &r) < 1e-12);
    }

    #[test]
    fn eigen_fallback_agrees_with_pade() {
        let a = DMatrix::from_row_slice(3, 3, &[
            C64::new(-1.0, 0.0), C64::new(0.4, 0.0), C64::new(0.0, 0.3),
            C64::new(0.2, 0.0), C64::new(-2.0, 1.0), C64::new(0.1, 0.0),
            C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(-0.5, -0.5),
        ]) * C64::new(12.0, 0.0);
        let pade = expm(&a).unwrap();
        let eig = expm_with_limit(&a, 0).unwrap();
        assert!(max_abs_diff(&pade, &eig) < 1e-12);
    }
}
