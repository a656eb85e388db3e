// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Second-order correlation of the emitted photon (or electron) stream.

use nalgebra::{DVector, RowDVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm, trace_functional, vectorize, DensityMatrix, Stepper, C64};
use crate::models::ModelBundle;

/// Below this `|Θ|/κ` the closed form is evaluated through its entire
/// (series) representation instead of dividing by `Θ`.
const EXCEPTIONAL_POINT_WINDOW: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct G2Curve {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    /// Intensity `⟨a†a⟩` the curve was normalised by.
    pub normalization: f64,
    pub stderr: Option<Vec<f64>>,
}

impl G2Curve {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// Closed-form `g²(τ)` of the time-adjusted source on resonance.
///
/// With `β = 3κ/4` and `Θ = √(κ²/16 − 4g²)` (imaginary when `64g² > κ²`),
///
/// `g²(τ) = 1 − ½[(1 + β/Θ) e^{(Θ−β)τ} + (1 − β/Θ) e^{−(Θ+β)τ}]`,
///
/// which equals `1 − e^{−βτ}[cosh Θτ + βτ · sinh(Θτ)/(Θτ)]`; the latter form
/// is used near `Θ = 0`.
pub fn g2_analytic(g: f64, kappa: f64, tau: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::param(format!("kappa must be positive, got {kappa}")));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::param(format!("tau must be finite and >= 0, got {tau}")));
    }
    if !g.is_finite() {
        return Err(Error::param("g must be finite"));
    }
    let beta = 0.75 * kappa;
    let theta = Complex64::new(kappa * kappa / 16.0 - 4.0 * g * g, 0.0).sqrt();
    let value = if theta.norm() < EXCEPTIONAL_POINT_WINDOW * kappa {
        let z = theta * tau;
        1.0 - (-beta * tau).exp() * (z.cosh() + beta * tau * sinhc(z))
    } else {
        let ratio = beta / theta;
        let slow = (1.0 + ratio) * ((theta - beta) * tau).exp();
        let fast = (1.0 - ratio) * ((-theta - beta) * tau).exp();
        1.0 - 0.5 * (slow + fast)
    };
    debug_assert!(value.im.abs() < 1e-10 * value.re.abs().max(1.0));
    Ok(value.re)
}

fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        1.0 + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// Two-time jump correlations `Tr[J e^{Lτ} J ρ₀]` by the quantum regression
/// theorem.
#[derive(Clone, Debug)]
pub struct JumpCorrelator {
    generator: nalgebra::DMatrix<C64>,
    dim: usize,
    jump_trace: RowDVector<C64>,
    jumped: DVector<C64>,
    intensity: f64,
}

impl JumpCorrelator {
    pub fn new(bundle: &ModelBundle, rho0: &DensityMatrix) -> Result<Self> {
        let dim = bundle.dim();
        if rho0.dim() != dim {
            return Err(Error::dims(format!(
                "model on dim {dim} with initial state of dim {}",
                rho0.dim()
            )));
        }
        let jump_trace = trace_functional(dim) * bundle.jump.matrix();
        let jumped = bundle.jump.matrix() * vectorize(rho0.op());
        let intensity = (&jump_trace * vectorize(rho0.op()))[(0, 0)].re;
        if !(intensity > ZERO_INTENSITY * bundle.output_rate) {
            return Err(Error::ZeroIntensity);
        }
        Ok(Self { generator: bundle.generator.matrix().clone(), dim, jump_trace, jumped, intensity })
    }

    /// `Tr[J ρ₀]`, the flux at the initial time.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Tr[J e^{Lτ} J ρ₀]`.
    pub fn correlation(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::param(format!("tau must be finite and >= 0, got {tau}")));
        }
        if tau == 0.0 {
            return Ok((&self.jump_trace * &self.jumped)[(0, 0)].re);
        }
        let e = expm(&(&self.generator * C64::new(tau, 0.0)))?;
        Ok((&self.jump_trace * (e * &self.jumped))[(0, 0)].re)
    }

    pub fn g2(&self, tau: f64) -> Result<f64> {
        Ok(self.correlation(tau)? / (self.intensity * self.intensity))
    }

    /// `g²` at `0, dt, …, steps·dt`.
    pub fn g2_grid(&self, dt: f64, steps: usize) -> Result<Vec<f64>> {
        let stepper = Stepper::from_matrix(self.dim, &self.generator, dt)?;
        let norm = self.intensity * self.intensity;
        Ok(stepper
            .iterate(&self.jumped, steps)
            .map(|v| (&self.jump_trace * v)[(0, 0)].re / norm)
            .collect())
    }
}

/// Relative flux below which a state counts as dark.
const ZERO_INTENSITY: f64 = 1e-14;

/// `g²(τ) = Tr[J e^{Lτ} J ρ₀] / Tr[J ρ₀]²`.
pub fn g2_numeric(bundle: &ModelBundle, rho0: &DensityMatrix, tau: f64) -> Result<f64> {
    JumpCorrelator::new(bundle, rho0)?.g2(tau)
}

/// [`g2_numeric`] on a list of lags, normalised by `⟨intensity_op⟩` of `rho0`.
pub fn g2_curve(bundle: &ModelBundle, rho0: &DensityMatrix, taus: &[f64]) -> Result<G2Curve> {
    let corr = JumpCorrelator::new(bundle, rho0)?;
    let values = taus.iter().map(|&t| corr.g2(t)).collect::<Result<Vec<_>>>()?;
    let normalization = crate::linalg::expectation(&bundle.intensity_op, rho0)?.re;
    Ok(G2Curve { taus: taus.to_vec(), values, normalization, stderr: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{restricted_liouvillian, RestrictedParams, Splitting};

    fn resonant(g: f64, kappa: f64) -> (ModelBundle, DensityMatrix) {
        let p = RestrictedParams { delta: 0.0, g, kappa, splitting: Splitting::Half };
        let b = restricted_liouvillian(&p).unwrap();
        let ss = b.steady_state().unwrap();
        (b, ss)
    }

    #[test]
    fn analytic_limits() {
        assert!(g2_analytic(1.3, 1.0, 0.0).unwrap().abs() < 1e-15);
        assert!((g2_analytic(2.0, 1.0, 40.0).unwrap() - 1.0).abs() < 1e-6);
        for tau in [0.1, 1.0, 3.0] {
            let expected = (1.0 - (-0.5f64 * tau).exp()).powi(2);
            assert!((g2_analytic(0.0, 1.0, tau).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn branches_agree_at_the_series_window_edge() {
        let kappa = 1.0;
        // Θ² = κ²/16 − 4g², so these couplings put |Θ| just inside and just
        // outside the window on both sides of the exceptional point.
        let g_for = |theta2: f64| ((kappa * kappa / 16.0 - theta2) / 4.0).sqrt();
        let w = EXCEPTIONAL_POINT_WINDOW * kappa;
        for sign in [1.0, -1.0] {
            let inside = g_for(sign * (0.9 * w).powi(2));
            let outside = g_for(sign * (1.1 * w).powi(2));
            for tau in [0.3, 2.0, 9.0] {
                let a = g2_analytic(inside, kappa, tau).unwrap();
                let b = g2_analytic(outside, kappa, tau).unwrap();
                assert!((a - b).abs() < 1e-9, "tau={tau}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn analytic_rejects_bad_input() {
        assert!(g2_analytic(1.0, 0.0, 1.0).is_err());
        assert!(g2_analytic(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn numeric_matches_analytic() {
        for (g, kappa) in [(0.05, 1.0), (0.125, 1.0), (2.0, 1.0), (10.0, 2.7)] {
            let (b, ss) = resonant(g, kappa);
            let corr = JumpCorrelator::new(&b, &ss).unwrap();
            for k in 0..50 {
                let tau = 0.2 * k as f64 / kappa;
                let a = g2_analytic(g, kappa, tau).unwrap();
                assert!((corr.g2(tau).unwrap() - a).abs() < 1e-10, "g={g} tau={tau}");
            }
        }
    }

    #[test]
    fn grid_matches_pointwise() {
        let (b, ss) = resonant(1.0, 1.0);
        let corr = JumpCorrelator::new(&b, &ss).unwrap();
        let grid = corr.g2_grid(0.05, 100).unwrap();
        for (k, v) in grid.iter().enumerate() {
            assert!((v - corr.g2(0.05 * k as f64).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn dark_state_is_reported() {
        let (b, _) = resonant(0.0, 1.0);
        let dark = DensityMatrix::basis(2, 0);
        assert!(matches!(g2_numeric(&b, &dark, 0.5), Err(Error::ZeroIntensity)));
    }
}
