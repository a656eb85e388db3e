// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! The extended Leggett–Garg inequality `|2g²(τ) − g²(2τ)| ≤ 1/⟨a†a⟩`.
//!
//! For classical rate dynamics of the emitter the combination
//! `|2⟨I(τ)I(0)⟩ − ⟨I(2τ)I(0)⟩|` cannot exceed `κ⟨I⟩`. Dividing by `⟨I⟩²`
//! gives the form above, and the reported `ratio` is `lhs · ⟨a†a⟩`, so that
//! a violation is `ratio > 1`.
//!
//! In the time-adjusted picture the state `|g,0⟩` does not exist, while the
//! classical argument behind the bound uses a three-state cascade. Both
//! [`lg_adjusted`] (two-state, stationary) and [`lg_bound_check`]
//! (three-state rate model) are provided so the two can be compared.

use nalgebra::{DMatrix, DVector, RowDVector};
use rayon::prelude::*;

use super::g2::JumpCorrelator;
use crate::error::{Error, Result};
use crate::linalg::{expm, vectorize, DensityMatrix, Operator, Stepper, SuperOperator, C64};
use crate::models::{
    cavity_liouvillian, classical_rate_liouvillian, restricted_liouvillian, CavityOperators,
    CavityParams, ClassicalRates, ModelBundle, RestrictedParams,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LgResult {
    pub tau: f64,
    /// `|2g²(τ) − g²(2τ)|`.
    pub lhs: f64,
    /// `1/⟨a†a⟩`; infinite for a dark state.
    pub bound: f64,
    /// `lhs / bound`.
    pub ratio: f64,
}

impl LgResult {
    fn from_g2(tau: f64, single: f64, double: f64, occupation: f64) -> Self {
        let lhs = (2.0 * single - double).abs();
        Self { tau, lhs, bound: 1.0 / occupation, ratio: lhs * occupation }
    }

    fn dark(tau: f64) -> Self {
        Self { tau, lhs: 0.0, bound: f64::INFINITY, ratio: 0.0 }
    }

    pub fn violates(&self) -> bool {
        self.ratio > 1.0
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("tau must be positive, got {tau}")))
    }
}

/// Stationary correlations of a bundle, with the emitter occupation taken as
/// `⟨I⟩/rate`.
fn stationary(bundle: &ModelBundle) -> Result<Option<(JumpCorrelator, f64)>> {
    let ss = bundle.steady_state()?;
    match JumpCorrelator::new(bundle, &ss) {
        Ok(c) => {
            let occupation = c.intensity() / bundle.output_rate;
            Ok(Some((c, occupation)))
        }
        Err(Error::ZeroIntensity) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The inequality for the time-adjusted source in its stationary state.
/// A dark stationary state (`g = 0`) gives `ratio = 0`.
pub fn lg_adjusted(p: &RestrictedParams, tau: f64) -> Result<LgResult> {
    check_tau(tau)?;
    let bundle = restricted_liouvillian(p)?;
    Ok(match stationary(&bundle)? {
        Some((c, n)) => LgResult::from_g2(tau, c.g2(tau)?, c.g2(2.0 * tau)?, n),
        None => LgResult::dark(tau),
    })
}

/// [`lg_adjusted`] at `τ = dt, 2dt, …, steps·dt`.
pub fn lg_adjusted_curve(p: &RestrictedParams, dt: f64, steps: usize) -> Result<Vec<LgResult>> {
    let bundle = restricted_liouvillian(p)?;
    stationary_curve(&bundle, dt, steps)
}

fn stationary_curve(bundle: &ModelBundle, dt: f64, steps: usize) -> Result<Vec<LgResult>> {
    check_tau(dt)?;
    let Some((c, n)) = stationary(bundle)? else {
        return Ok((1..=steps).map(|k| LgResult::dark(dt * k as f64)).collect());
    };
    let g2 = c.g2_grid(dt, 2 * steps)?;
    Ok((1..=steps).map(|k| LgResult::from_g2(dt * k as f64, g2[k], g2[2 * k], n)).collect())
}

/// Ingredients of the raw (non-adjusted) correlation on the full model.
struct Raw {
    generator: SuperOperator,
    number: RowDVector<C64>,
    jumped: DVector<C64>,
    occupation: f64,
}

/// `g²(0, τ) = Tr[a†a e^{Lτ} F ρ₀] / ⟨a†a⟩₀²`, where `F ρ = (σ₊a) ρ (σ₊a)†`
/// removes the detected photon and re-excites the atom.
fn raw(p: &CavityParams, rho0: &DensityMatrix) -> Result<Raw> {
    let bundle = cavity_liouvillian(p)?;
    if rho0.dim() != bundle.dim() {
        return Err(Error::dims(format!(
            "initial state of dim {} for a model of dim {}",
            rho0.dim(),
            bundle.dim()
        )));
    }
    let ops = CavityOperators::new(p.fock_cutoff);
    let occupation = crate::linalg::expectation(&ops.number, rho0)?.re;
    if !(occupation > 0.0) {
        return Err(Error::ZeroIntensity);
    }
    let feedback = &ops.sigma_minus.dagger() * &ops.a;
    let jumped = SuperOperator::jump(&feedback, 1.0).matrix() * vectorize(rho0.op())
        / C64::new(occupation * occupation, 0.0);
    Ok(Raw { generator: bundle.generator, number: observable(&ops.number), jumped, occupation })
}

/// Row vector `r` with `r · vec(X) = Tr(a X)`.
fn observable(a: &Operator) -> RowDVector<C64> {
    let d = a.dim();
    RowDVector::from_fn(d * d, |_, k| a.matrix()[(k / d, k % d)])
}

/// The inequality for standard pulsed counting, conditioned on the initial
/// state `rho0` (typically `|g,1⟩`), on the full model including `γ`.
pub fn lg_raw(p: &CavityParams, rho0: &DensityMatrix, tau: f64) -> Result<LgResult> {
    check_tau(tau)?;
    let r = raw(p, rho0)?;
    let at = |t: f64| -> Result<f64> {
        let e = expm(&(r.generator.matrix() * C64::new(t, 0.0)))?;
        Ok((&r.number * (e * &r.jumped))[(0, 0)].re)
    };
    Ok(LgResult::from_g2(tau, at(tau)?, at(2.0 * tau)?, r.occupation))
}

/// [`lg_raw`] at `τ = dt, 2dt, …, steps·dt`.
pub fn lg_raw_curve(
    p: &CavityParams,
    rho0: &DensityMatrix,
    dt: f64,
    steps: usize,
) -> Result<Vec<LgResult>> {
    check_tau(dt)?;
    let r = raw(p, rho0)?;
    let g2: Vec<f64> = Stepper::new(&r.generator, dt)?
        .iterate(&r.jumped, 2 * steps)
        .map(|v| (&r.number * v)[(0, 0)].re)
        .collect();
    Ok((1..=steps).map(|k| LgResult::from_g2(dt * k as f64, g2[k], g2[2 * k], r.occupation)).collect())
}

pub fn max_ratio(curve: &[LgResult]) -> Option<LgResult> {
    curve.iter().copied().max_by(|a, b| a.ratio.total_cmp(&b.ratio))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LgBoundReport {
    pub max_ratio: f64,
    pub tau_at_max: f64,
    pub samples: usize,
}

/// Number of lags per decade in [`lg_bound_check`].
const LAGS_PER_DECADE: usize = 40;

/// Scans the stationary inequality of a classical rate model over lags from
/// `10⁻³` of the fastest to `10³` of the slowest timescale.
///
/// The bundle must not couple populations to coherences and must have no
/// coherent part; otherwise [`Error::NotClassical`].
pub fn lg_bound_check(bundle: &ModelBundle) -> Result<LgBoundReport> {
    let (rates, jump) = population_blocks(bundle)?;
    let d = rates.nrows();
    let Some((c, n)) = stationary(bundle)? else {
        return Ok(LgBoundReport { max_ratio: 0.0, tau_at_max: 0.0, samples: 0 });
    };
    let intensity = c.intensity();

    let p_ss = {
        let ss = bundle.steady_state()?;
        DVector::from_fn(d, |i, _| C64::new(ss.population(i), 0.0))
    };
    let ones = RowDVector::from_element(d, C64::new(1.0, 0.0));
    let left = &ones * &jump;
    let right = &jump * p_ss;
    let corr = |tau: f64| -> Result<f64> {
        let e = expm(&(&rates * C64::new(tau, 0.0)))?;
        Ok((&left * (e * &right))[(0, 0)].re / (intensity * intensity))
    };

    let diag: Vec<f64> = (0..d).map(|i| rates[(i, i)].re.abs()).filter(|r| *r > 0.0).collect();
    let fastest = diag.iter().copied().fold(0.0, f64::max);
    let slowest = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let (lo, hi) = ((1e-3 / fastest).ln(), (1e3 / slowest).ln());
    let samples = (((hi - lo) / std::f64::consts::LN_10) * LAGS_PER_DECADE as f64).ceil() as usize + 1;

    let mut best = LgBoundReport { max_ratio: 0.0, tau_at_max: 0.0, samples };
    for k in 0..samples {
        let tau = (lo + (hi - lo) * k as f64 / (samples - 1).max(1) as f64).exp();
        let r = LgResult::from_g2(tau, corr(tau)?, corr(2.0 * tau)?, n);
        if r.ratio > best.max_ratio {
            best.max_ratio = r.ratio;
            best.tau_at_max = tau;
        }
    }
    Ok(best)
}

/// Population-to-population blocks of the generator and jump.
fn population_blocks(bundle: &ModelBundle) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let d = bundle.dim();
    let l = bundle.generator.matrix();
    let scale = l.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let is_pop = |k: usize| k % (d + 1) == 0;
    for r in 0..d * d {
        for c in 0..d * d {
            if is_pop(r) != is_pop(c) && l[(r, c)].norm() > 1e-12 * scale {
                return Err(Error::NotClassical(format!(
                    "generator couples vec index {c} to {r}"
                )));
            }
        }
    }
    let block = |m: &DMatrix<C64>| DMatrix::from_fn(d, d, |i, j| m[(i * (d + 1), j * (d + 1))]);
    let pops = block(l);
    if pops.iter().any(|z| z.im.abs() > 1e-12 * scale) {
        return Err(Error::NotClassical("complex population rates".into()));
    }
    Ok((pops, block(bundle.jump.matrix())))
}

/// [`lg_bound_check`] over every combination of `values` for the pump,
/// forward, backward and loss rates at fixed `kappa`, in parallel.
/// Returns the largest ratio found and the rates that produced it.
pub fn classical_bound_scan(kappa: f64, values: &[f64]) -> Result<(LgBoundReport, ClassicalRates)> {
    let n = values.len();
    let combos: Vec<ClassicalRates> = (0..n.pow(4))
        .map(|k| ClassicalRates {
            kappa,
            pump: values[k % n],
            forward: values[(k / n) % n],
            backward: values[(k / (n * n)) % n],
            loss: values[k / (n * n * n)],
        })
        .collect();
    let reports = combos
        .par_iter()
        .map(|r| lg_bound_check(&classical_rate_liouvillian(r)?))
        .collect::<Result<Vec<_>>>()?;
    reports
        .into_iter()
        .zip(combos)
        .max_by(|a, b| a.0.max_ratio.total_cmp(&b.0.max_ratio))
        .ok_or_else(|| Error::param("empty rate grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Splitting;

    #[test]
    fn long_lag_ratio_is_occupation() {
        let p = RestrictedParams { delta: 0.0, g: 1.0, kappa: 1.0, splitting: Splitting::Half };
        let r = lg_adjusted(&p, 60.0).unwrap();
        let n = 4.0 / (1.0 + 8.0);
        assert!((r.lhs - 1.0).abs() < 1e-9);
        assert!((r.ratio - n).abs() < 1e-9);
        assert!(r.bound >= 1.0);
    }

    #[test]
    fn dark_source_never_violates() {
        let p = RestrictedParams { delta: 0.3, g: 0.0, kappa: 1.0, splitting: Splitting::Quarter };
        let r = lg_adjusted(&p, 0.1).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert!(r.bound.is_infinite());
    }

    #[test]
    fn curve_matches_pointwise() {
        let p = RestrictedParams { delta: 0.5, g: 2.0, kappa: 1.0, splitting: Splitting::Quarter };
        let curve = lg_adjusted_curve(&p, 0.05, 30).unwrap();
        for r in curve.iter().step_by(7) {
            let direct = lg_adjusted(&p, r.tau).unwrap();
            assert!((direct.ratio - r.ratio).abs() < 1e-11);
        }
    }

    #[test]
    fn raw_from_photon_state_is_excited_return_probability() {
        let p = CavityParams::new(1.5, 0.0, 0.0, 0.0);
        let rho0 = DensityMatrix::basis(p.dim(), p.index(false, 1));
        let r = lg_raw(&p, &rho0, 0.3).unwrap();
        // Without losses the photon population after re-excitation is sin²(gτ).
        let s = |t: f64| (1.5 * t).sin().powi(2);
        assert!((r.lhs - (2.0 * s(0.3) - s(0.6)).abs()).abs() < 1e-12);
        let curve = lg_raw_curve(&p, &rho0, 0.1, 10).unwrap();
        assert!((curve[2].ratio - r.ratio).abs() < 1e-11);
    }

    #[test]
    fn raw_needs_photons() {
        let p = CavityParams::new(1.0, 1.0, 0.0, 0.0);
        let rho0 = DensityMatrix::basis(p.dim(), p.index(true, 0));
        assert!(matches!(lg_raw(&p, &rho0, 0.1), Err(Error::ZeroIntensity)));
    }

    #[test]
    fn coherent_model_is_rejected_by_bound_check() {
        let p = RestrictedParams { delta: 0.0, g: 1.0, kappa: 1.0, splitting: Splitting::Half };
        let b = restricted_liouvillian(&p).unwrap();
        assert!(matches!(lg_bound_check(&b), Err(Error::NotClassical(_))));
    }

    #[test]
    fn equal_rates_respect_bound() {
        let r = ClassicalRates { kappa: 1.0, pump: 1.0, forward: 1.0, backward: 1.0, loss: 1.0 };
        let report = lg_bound_check(&classical_rate_liouvillian(&r).unwrap()).unwrap();
        assert!(report.max_ratio <= 1.0 + 1e-9);
        assert!(report.max_ratio > 0.0);
    }
}
