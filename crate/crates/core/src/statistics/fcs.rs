// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Cumulant rates from the counting-field-dressed generator.
//!
//! `L(χ) = L + (e^{iχ} − 1) J`; the cumulant generating function grows as
//! `e^{λ(χ) t}` where `λ` is the eigenvalue continuously connected to the
//! stationary one. The `k`-th cumulant rate is `(−i)^k λ^{(k)}(0)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{eigen, vectorize, C64};
use crate::models::ModelBundle;

/// Finite-difference steps (in units of the counting field) for the first
/// two and for the third derivative.
const STEP_LOW: f64 = 1e-4;
const STEP_THIRD: f64 = 1e-2;

/// Minimum normalised overlap with the stationary eigenvector.
const MIN_OVERLAP: f64 = 0.5;

/// Cumulant rates `[c₁, …, c_order]` for `order` in `1..=3`.
///
/// `c₁` is the mean current and `c₂/c₁` the Fano factor.
pub fn fcs_cumulants(bundle: &ModelBundle, order: usize) -> Result<Vec<f64>> {
    if !(1..=3).contains(&order) {
        return Err(Error::param(format!("cumulant order must be 1..=3, got {order}")));
    }
    let stationary = vectorize(bundle.steady_state()?.op());
    let lambda = |chi: f64| tracked_eigenvalue(bundle, &stationary, chi);

    let mut out = Vec::with_capacity(order);
    let mut cache = Cache::new(lambda);
    for k in 1..=order {
        let h = if k == 3 { STEP_THIRD } else { STEP_LOW };
        let coarse = derivative(&mut cache, k, h)?;
        let fine = derivative(&mut cache, k, h / 2.0)?;
        let d = (4.0 * fine - coarse) / 3.0;
        out.push((C64::new(0.0, -1.0).powu(k as u32) * d).re);
    }
    Ok(out)
}

struct Cache<F> {
    eval: F,
    seen: Vec<(f64, C64)>,
}

impl<F: FnMut(f64) -> Result<C64>> Cache<F> {
    fn new(eval: F) -> Self {
        Self { eval, seen: Vec::new() }
    }

    fn at(&mut self, chi: f64) -> Result<C64> {
        if let Some(&(_, v)) = self.seen.iter().find(|(c, _)| *c == chi) {
            return Ok(v);
        }
        let v = (self.eval)(chi)?;
        self.seen.push((chi, v));
        Ok(v)
    }
}

/// Central difference of order `k` with step `h`, error `O(h²)`.
fn derivative<F: FnMut(f64) -> Result<C64>>(f: &mut Cache<F>, k: usize, h: f64) -> Result<C64> {
    Ok(match k {
        1 => (f.at(h)? - f.at(-h)?) / (2.0 * h),
        2 => (f.at(h)? - 2.0 * f.at(0.0)? + f.at(-h)?) / (h * h),
        3 => (f.at(2.0 * h)? - 2.0 * f.at(h)? + 2.0 * f.at(-h)? - f.at(-2.0 * h)?) / (2.0 * h.powi(3)),
        _ => unreachable!("order checked by caller"),
    })
}

fn tracked_eigenvalue(bundle: &ModelBundle, stationary: &DVector<C64>, chi: f64) -> Result<C64> {
    let factor = C64::new(0.0, chi).exp() - 1.0;
    let dressed = bundle.generator.matrix() + bundle.jump.matrix() * factor;
    let e = eigen(&dressed)?;
    let s_norm = stationary.norm();
    let overlap = |k: usize| e.vectors.column(k).dotc(stationary).norm() / s_norm;
    let tracked = (0..e.values.len())
        .max_by(|&a, &b| overlap(a).total_cmp(&overlap(b)))
        .ok_or_else(|| Error::Eigen("empty spectrum".into()))?;
    let leading = (0..e.values.len())
        .max_by(|&a, &b| e.values[a].re.total_cmp(&e.values[b].re))
        .expect("non-empty");
    let scale = e.values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if overlap(tracked) < MIN_OVERLAP
        || (e.values[leading].re - e.values[tracked].re) > 1e-9 * scale
    {
        return Err(Error::EigenvalueCrossing(format!(
            "at chi = {chi}: overlap {:.3}, tracked {} vs leading {}",
            overlap(tracked),
            e.values[tracked],
            e.values[leading]
        )));
    }
    Ok(e.values[tracked])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{liouvillian, Operator, SuperOperator};

    /// Two-state telegraph: 0 → 1 at rate `a`, 1 → 0 at rate `b`, counting
    /// the 1 → 0 jumps. Known cumulants: c₁ = ab/(a+b), F = (a²+b²)/(a+b)².
    fn telegraph(a: f64, b: f64) -> ModelBundle {
        let up = Operator::outer(2, 1, 0);
        let down = Operator::outer(2, 0, 1);
        ModelBundle {
            generator: liouvillian(&Operator::zeros(2), &[(up, a), (down.clone(), b)]).unwrap(),
            jump: SuperOperator::jump(&down, b),
            intensity_op: Operator::outer(2, 1, 1),
            basis_labels: vec!["0".into(), "1".into()],
            output_rate: b,
        }
    }

    #[test]
    fn telegraph_cumulants() {
        let (a, b) = (1.3, 0.4);
        let c = fcs_cumulants(&telegraph(a, b), 3).unwrap();
        let s = a + b;
        assert!((c[0] - a * b / s).abs() < 1e-10);
        assert!((c[1] / c[0] - (a * a + b * b) / (s * s)).abs() < 1e-6);
        let poly = a.powi(4) - 2.0 * a.powi(3) * b + 6.0 * a * a * b * b - 2.0 * a * b.powi(3) + b.powi(4);
        let expected = a * b * poly / s.powi(5);
        assert!((c[2] - expected).abs() < 1e-6, "{} vs {expected}", c[2]);
    }

    #[test]
    fn order_is_validated() {
        assert!(fcs_cumulants(&telegraph(1.0, 1.0), 0).is_err());
        assert!(fcs_cumulants(&telegraph(1.0, 1.0), 4).is_err());
    }
}
