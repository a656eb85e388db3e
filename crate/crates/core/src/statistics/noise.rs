// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Photon-current noise of the time-adjusted source.
//!
//! `S(ω) = 2 Re ∫₀^∞ e^{iωτ} ⟨I⟩² (g²(τ) − 1) dτ` and `F = S(0) / (2⟨I⟩)`,
//! with `⟨I⟩ = κ⟨a†a⟩_ss`. There is no self-correlation term, so an
//! uncorrelated stream gives `F = 0`.

use super::g2::JumpCorrelator;
use super::quad::{integrate, QuadOptions};
use super::transport::{FanoKind, FanoResult};
use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::models::{restricted_liouvillian, RestrictedParams};

/// The correlation integral is split at `HORIZON / min(κ, gap)`.
const HORIZON: f64 = 40.0;

/// Absolute tolerance on `∫(g² − 1)dτ`, in units of `1/κ`.
const INTEGRAL_TOL: f64 = 1e-12;

/// Closed-form photon Fano factor `−8g²(3κ² − δ²) / (8g² + κ² + δ²)²`.
pub fn fano_photon_analytic(g: f64, kappa: f64, delta: f64) -> Result<FanoResult> {
    if !(kappa > 0.0) || !kappa.is_finite() || !g.is_finite() || !delta.is_finite() {
        return Err(Error::param("need finite g, delta and kappa > 0"));
    }
    let (g2, k2, d2) = (g * g, kappa * kappa, delta * delta);
    let den = 8.0 * g2 + k2 + d2;
    Ok(FanoResult { value: -8.0 * g2 * (3.0 * k2 - d2) / (den * den), kind: FanoKind::Photon })
}

/// Result of integrating the excess correlation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcessIntegral {
    /// `∫₀^∞ cos(ωτ)(g²(τ) − 1) dτ`.
    pub value: f64,
    /// Quadrature error estimate plus the bound on the discarded tail.
    pub error: f64,
    /// Where the finite part of the integral stops.
    pub horizon: f64,
    pub intensity: f64,
}

struct Prepared {
    corr: JumpCorrelator,
    kappa: f64,
    gap: f64,
    max_frequency: f64,
}

fn prepare(p: &RestrictedParams) -> Result<Option<Prepared>> {
    if !(p.kappa > 0.0) {
        return Err(Error::param(format!("kappa must be positive, got {}", p.kappa)));
    }
    let bundle = restricted_liouvillian(p)?;
    let ss = bundle.steady_state()?;
    let corr = match JumpCorrelator::new(&bundle, &ss) {
        Ok(c) => c,
        Err(Error::ZeroIntensity) => return Ok(None),
        Err(e) => return Err(e),
    };
    let spectrum = eigenvalues(bundle.generator.matrix())?;
    let stationary = spectrum
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(k, _)| k)
        .expect("non-empty spectrum");
    let gap = spectrum
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != stationary)
        .map(|(_, z)| -z.re)
        .fold(f64::INFINITY, f64::min);
    if !(gap > 0.0) {
        return Err(Error::Quadrature(format!("relaxation gap {gap} is not positive")));
    }
    let max_frequency = spectrum.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(Some(Prepared { corr, kappa: p.kappa, gap, max_frequency }))
}

fn excess(prep: &Prepared, omega: f64) -> Result<ExcessIntegral> {
    let tol = INTEGRAL_TOL / prep.kappa;
    let mut horizon = HORIZON / prep.kappa.min(prep.gap);
    let f = |tau: f64| -> Result<f64> { Ok((prep.corr.g2(tau)? - 1.0) * (omega * tau).cos()) };
    for _ in 0..4 {
        let tail = tail_bound(&prep.corr, prep.gap, horizon)?;
        if tail <= tol {
            let panels = ((omega.abs() + prep.max_frequency) * horizon / std::f64::consts::PI)
                .ceil()
                .max(8.0) as usize;
            let opts = QuadOptions {
                abs_tol: tol,
                rel_tol: 1e-12,
                initial_panels: panels,
                ..QuadOptions::default()
            };
            let r = integrate(f, 0.0, horizon, &opts)?;
            return Ok(ExcessIntegral {
                value: r.value,
                error: r.error + tail,
                horizon,
                intensity: prep.corr.intensity(),
            });
        }
        horizon *= 2.0;
    }
    Err(Error::Quadrature(format!("correlation tail above {tol:e} at tau = {horizon}")))
}

/// `|∫_T^∞ (g² − 1)| ≤ envelope(T) / gap` for an exponentially relaxing
/// excess. The envelope is taken over the last tenth of the finite range so
/// that an oscillation node at `T` cannot hide it.
fn tail_bound(corr: &JumpCorrelator, gap: f64, horizon: f64) -> Result<f64> {
    let mut envelope: f64 = 0.0;
    for k in 0..=16 {
        let tau = horizon * (0.9 + 0.1 * k as f64 / 16.0);
        envelope = envelope.max((corr.g2(tau)? - 1.0).abs());
    }
    Ok(envelope / gap)
}

/// `∫₀^∞ cos(ωτ)(g²(τ) − 1) dτ` for the restricted model's stationary
/// emission, or `None` when the stationary state is dark.
pub fn excess_correlation_integral(
    p: &RestrictedParams,
    omega: f64,
) -> Result<Option<ExcessIntegral>> {
    match prepare(p)? {
        Some(prep) => excess(&prep, omega).map(Some),
        None => Ok(None),
    }
}

/// `F_ph = ⟨I⟩ ∫₀^∞ (g²(τ) − 1) dτ`. A dark steady state gives 0.
pub fn fano_photon_numeric(p: &RestrictedParams) -> Result<FanoResult> {
    let value = match excess_correlation_integral(p, 0.0)? {
        Some(x) => x.intensity * x.value,
        None => 0.0,
    };
    Ok(FanoResult { value, kind: FanoKind::Photon })
}

/// `S(ω) = 2⟨I⟩² ∫₀^∞ cos(ωτ)(g²(τ) − 1) dτ`.
pub fn photon_noise_spectrum(p: &RestrictedParams, omega: f64) -> Result<f64> {
    if !omega.is_finite() {
        return Err(Error::param("omega must be finite"));
    }
    Ok(match excess_correlation_integral(p, omega)? {
        Some(x) => 2.0 * x.intensity * x.intensity * x.value,
        None => 0.0,
    })
}

/// Detuning in `[lo, hi]` where the numeric photon Fano factor changes sign,
/// by bisection to `tol`.
pub fn fano_zero_crossing(p: &RestrictedParams, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let f = |delta: f64| fano_photon_numeric(&RestrictedParams { delta, ..*p }).map(|r| r.value);
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a)?, f(b)?);
    if fa.signum() == fb.signum() {
        return Err(Error::param(format!("no sign change between {lo} and {hi}")));
    }
    let mut fa = fa;
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Splitting;

    fn params(g: f64, delta: f64) -> RestrictedParams {
        RestrictedParams { delta, g, kappa: 1.0, splitting: Splitting::Quarter }
    }

    #[test]
    fn analytic_special_values() {
        let k = 1.7;
        let root = 3f64.sqrt() * k;
        assert!(fano_photon_analytic(2.0, k, root).unwrap().value.abs() < 1e-15);
        assert!(fano_photon_analytic(2.0, k, -root).unwrap().value.abs() < 1e-15);
        assert_eq!(fano_photon_analytic(0.0, k, 0.3).unwrap().value, 0.0);
        let g = 0.9;
        let expected = -24.0 * g * g * k * k / (8.0 * g * g + k * k).powi(2);
        assert!((fano_photon_analytic(g, k, 0.0).unwrap().value - expected).abs() < 1e-15);
        assert!(fano_photon_analytic(g, 0.0, 0.0).is_err());
    }

    #[test]
    fn resonant_integral_closed_form() {
        for g in [0.1, 0.125, 0.7, 3.0] {
            let x = excess_correlation_integral(&params(g, 0.0), 0.0).unwrap().unwrap();
            let expected = -3.0 / (1.0 + 8.0 * g * g);
            assert!((x.value - expected).abs() < 1e-9, "g={g}: {} vs {expected}", x.value);
        }
    }

    #[test]
    fn dark_state_has_zero_noise() {
        assert_eq!(fano_photon_numeric(&params(0.0, 0.5)).unwrap().value, 0.0);
        assert_eq!(photon_noise_spectrum(&params(0.0, 0.5), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn spectrum_at_zero_frequency() {
        let p = params(1.2, 0.4);
        let f = fano_photon_numeric(&p).unwrap().value;
        let x = excess_correlation_integral(&p, 0.0).unwrap().unwrap();
        let s0 = photon_noise_spectrum(&p, 0.0).unwrap();
        assert!((s0 - 2.0 * x.intensity * f).abs() < 1e-12);
    }
}
