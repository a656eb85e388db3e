// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};

use super::expm::expm;
use super::operator::{hermitian_part, DensityMatrix, Operator, C64};
use super::superop::{trace_functional, unvectorize, vectorize, SuperOperator};
use super::Tolerances;
use crate::error::{Error, Result};

/// `vec(ρ(t)) = exp(l t) vec(ρ₀)`.
pub fn propagate(l: &SuperOperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if t == 0.0 {
        check_dims(l, rho0.op())?;
        return Ok(rho0.clone());
    }
    DensityMatrix::from_evolved(evolve(l, rho0.op(), t)?)
}

/// Like [`propagate`] but for arbitrary (e.g. jumped, unnormalised) operators.
pub fn evolve(l: &SuperOperator, m: &Operator, t: f64) -> Result<Operator> {
    check_dims(l, m)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(format!("propagation time must be finite and >= 0, got {t}")));
    }
    let e = expm(&(l.matrix() * C64::new(t, 0.0)))?;
    let out = unvectorize(m.dim(), &(e * vectorize(m)));
    if out.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("propagated state"));
    }
    Ok(out)
}

/// A cached one-step propagator `exp(l·dt)` for evaluating dynamics on a
/// uniform time grid.
#[derive(Clone, Debug)]
pub struct Stepper {
    dim: usize,
    dt: f64,
    step: DMatrix<C64>,
}

impl Stepper {
    pub fn new(l: &SuperOperator, dt: f64) -> Result<Self> {
        Self::from_matrix(l.dim(), l.matrix(), dt)
    }

    pub(crate) fn from_matrix(dim: usize, l: &DMatrix<C64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { dim, dt, step: expm(&(l * C64::new(dt, 0.0)))? })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// States at `0, dt, …, steps·dt`.
    pub fn trajectory(&self, m: &Operator, steps: usize) -> Result<Vec<DVector<C64>>> {
        if m.dim() != self.dim {
            return Err(Error::dims("stepper and operator dimensions differ"));
        }
        Ok(self.iterate(&vectorize(m), steps).collect())
    }

    /// Vectorised states at `0, dt, …, steps·dt`, lazily.
    pub fn iterate<'a>(
        &'a self,
        v0: &DVector<C64>,
        steps: usize,
    ) -> impl Iterator<Item = DVector<C64>> + 'a {
        std::iter::successors(Some(v0.clone()), move |v| Some(&self.step * v)).take(steps + 1)
    }
}

/// The unique stationary state of a Liouvillian, from the right singular
/// vector belonging to its smallest singular value.
pub fn steady_state(l: &SuperOperator) -> Result<DensityMatrix> {
    steady_state_with(l, &Tolerances::default())
}

pub fn steady_state_with(l: &SuperOperator, tol: &Tolerances) -> Result<DensityMatrix> {
    let d = l.dim();
    let svd = l.matrix().clone().svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or(Error::NonFinite("singular value decomposition"))?;
    let sv = &svd.singular_values;
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let threshold = tol.null_space * sigma_max.max(1.0);
    let near_zero = order.iter().filter(|&&k| sv[k] <= threshold).count();
    if near_zero > 1 {
        return Err(Error::DegenerateSteadyState { count: near_zero, tolerance: threshold });
    }

    let null: DVector<C64> = v_t.row(order[0]).adjoint();
    let tr = (trace_functional(d) * &null)[(0, 0)];
    if tr.norm() < f64::EPSILON {
        return Err(Error::InvalidState("null vector has zero trace".into()));
    }
    let rho = unvectorize(d, &(null / tr));
    let rho = Operator::from_matrix_unchecked(hermitian_part(rho.matrix()));

    let residual = (l.matrix() * vectorize(&rho)).norm();
    let limit = tol.residual * sigma_max.max(1.0);
    if !(residual <= limit) {
        return Err(Error::SteadyStateResidual { residual, tolerance: limit });
    }
    DensityMatrix::from_evolved(rho)
}

/// `Tr(a ρ)`.
pub fn expectation(a: &Operator, rho: &DensityMatrix) -> Result<C64> {
    a.check_same_dim(rho.op(), "expectation")?;
    Ok((a.matrix() * rho.op().matrix()).trace())
}

fn check_dims(l: &SuperOperator, m: &Operator) -> Result<()> {
    if l.dim() != m.dim() {
        return Err(Error::dims(format!(
            "generator on dim {} applied to state of dim {}",
            l.dim(),
            m.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::ONE;
    use crate::linalg::{liouvillian, pauli_x, DensityMatrix};

    fn decay(kappa: f64) -> SuperOperator {
        // basis {|g⟩, |e⟩}; σ₋ = |g⟩⟨e|
        liouvillian(&Operator::zeros(2), &[(Operator::outer(2, 0, 1), kappa)]).unwrap()
    }

    #[test]
    fn zero_time_is_exact() {
        let rho = DensityMatrix::basis(2, 1);
        assert_eq!(propagate(&decay(1.0), &rho, 0.0).unwrap(), rho);
    }

    #[test]
    fn pure_decay() {
        let kappa = 3.0;
        let rho = propagate(&decay(kappa), &DensityMatrix::basis(2, 1), 1.0 / kappa).unwrap();
        assert!((rho.population(1) - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn rabi_flop() {
        let g = 2.0;
        let l = liouvillian(&pauli_x().scale(g), &[]).unwrap();
        let t = std::f64::consts::PI / (2.0 * g);
        let rho = propagate(&l, &DensityMatrix::basis(2, 0), t).unwrap();
        assert!(rho.population(0).abs() < 1e-14);
    }

    #[test]
    fn steady_state_of_decay_is_ground() {
        let ss = steady_state(&decay(1.7)).unwrap();
        assert!(ss.op().max_abs_diff(DensityMatrix::basis(2, 0).op()) < 1e-14);
    }

    #[test]
    fn degenerate_null_space_is_reported() {
        let l = liouvillian(&Operator::zeros(2), &[]).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::DegenerateSteadyState { .. })));
    }

    #[test]
    fn negative_time_rejected() {
        assert!(propagate(&decay(1.0), &DensityMatrix::basis(2, 1), -1.0).is_err());
    }

    #[test]
    fn expectation_values() {
        let rho = DensityMatrix::basis(2, 0);
        assert_eq!(expectation(&Operator::identity(2), &rho).unwrap(), ONE);
        let sz = crate::linalg::pauli_z();
        assert_eq!(expectation(&sz, &rho).unwrap().re, 1.0);
        assert!(expectation(&Operator::identity(3), &rho).is_err());
    }
}
