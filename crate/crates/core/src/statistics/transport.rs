// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form current and electron Fano factor of the double dot.

use crate::error::{Error, Result};
use crate::models::DqdParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FanoKind {
    /// Includes the self-correlation of each tunnelling event, so a Poisson
    /// stream gives 1.
    Electron,
    /// No self-correlation term; 0 means uncorrelated.
    Photon,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FanoResult {
    pub value: f64,
    pub kind: FanoKind,
}

fn check(p: &DqdParams) -> Result<()> {
    p.validate()?;
    if !(p.gamma_left > 0.0 && p.gamma_right > 0.0) {
        return Err(Error::param("tunnelling rates must be positive"));
    }
    Ok(())
}

/// `Γ_R T² / (Γ_R²/4 + ε² + T²(2 + Γ_R/Γ_L))`. An infinite `Γ_L` is allowed.
pub fn dqd_current_analytic(p: &DqdParams) -> Result<f64> {
    check(p)?;
    let (t2, gr, eps) = (p.t_coh * p.t_coh, p.gamma_right, p.epsilon());
    Ok(gr * t2 / (gr * gr / 4.0 + eps * eps + t2 * (2.0 + gr / p.gamma_left)))
}

/// Zero-frequency Fano factor of the right-barrier current,
///
/// `1 − 8T²Γ_L[4ε²(Γ_R−Γ_L) + 3Γ_LΓ_R² + Γ_R³ + 8Γ_RT²] / [Γ_LΓ_R² + 4Γ_Lε² + 4T²(Γ_R+2Γ_L)]²`.
///
/// For infinite `Γ_L` the limit `1 − 8T²(3Γ_R² − 4ε²)/(Γ_R² + 4ε² + 8T²)²`
/// is returned.
pub fn fano_electron_analytic(p: &DqdParams) -> Result<FanoResult> {
    check(p)?;
    let (t2, gl, gr) = (p.t_coh * p.t_coh, p.gamma_left, p.gamma_right);
    let e2 = p.epsilon() * p.epsilon();
    let value = if gl.is_infinite() {
        let den = gr * gr + 4.0 * e2 + 8.0 * t2;
        1.0 - 8.0 * t2 * (3.0 * gr * gr - 4.0 * e2) / (den * den)
    } else {
        let num = 8.0 * t2 * gl * (4.0 * e2 * (gr - gl) + 3.0 * gl * gr * gr + gr.powi(3) + 8.0 * gr * t2);
        let den = gl * gr * gr + 4.0 * gl * e2 + 4.0 * t2 * (gr + 2.0 * gl);
        1.0 - num / (den * den)
    };
    Ok(FanoResult { value, kind: FanoKind::Electron })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn current_limits() {
        assert_eq!(dqd_current_analytic(&DqdParams::new(0.3, 0.0, 1.0, 2.0)).unwrap(), 0.0);
        let (g, t) = (1.3, 0.7);
        let sym = dqd_current_analytic(&DqdParams::new(0.0, t, g, g)).unwrap();
        assert!((sym - g * t * t / (g * g / 4.0 + 3.0 * t * t)).abs() < 1e-15);
        let strong = dqd_current_analytic(&DqdParams::new(0.0, 1e6, g, g)).unwrap();
        assert!((strong - g / 3.0).abs() < 1e-9);
    }

    #[test]
    fn fano_limits() {
        let f = fano_electron_analytic(&DqdParams::new(0.4, 1e-9, 1.0, 2.0)).unwrap();
        assert!((f.value - 1.0).abs() < 1e-15);
        let f = fano_electron_analytic(&DqdParams::new(0.0, 1e4, 1.0, 1.0)).unwrap();
        assert!((f.value - 5.0 / 9.0).abs() < 1e-6);
    }

    #[test]
    fn infinite_left_rate_is_the_limit() {
        let p = DqdParams::new(0.8, 0.6, f64::INFINITY, 1.1);
        let lim = fano_electron_analytic(&p).unwrap().value;
        let big = fano_electron_analytic(&DqdParams { gamma_left: 1e9, ..p }).unwrap().value;
        assert!((lim - big).abs() < 1e-8);
        let i_lim = dqd_current_analytic(&p).unwrap();
        let (t, g, e) = (0.6f64, 1.1f64, 0.8f64);
        assert!((i_lim - g * t * t / (g * g / 4.0 + e * e + 2.0 * t * t)).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_rates() {
        assert!(dqd_current_analytic(&DqdParams::new(0.0, 1.0, 0.0, 1.0)).is_err());
        assert!(fano_electron_analytic(&DqdParams::new(0.0, 1.0, 1.0, 0.0)).is_err());
    }
}
