// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

use countstat::linalg::{
    apply_super, expectation, propagate, DensityMatrix, Operator, SuperOperator, C64,
};
use countstat::models::{
    cavity_liouvillian, dqd_liouvillian, excited_probability, map_parameters,
    reduced_dqd_liouvillian, restricted_liouvillian, unmap_parameters, CavityOperators,
    CavityParams, DqdParams, ModelBundle, RestrictedParams, Splitting,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn reduced_dot_equals_restricted_source_on_grid() {
    for &t in &grid(0.0, 4.0, 5) {
        for &gr in &grid(0.1, 5.0, 5) {
            for &eps in &grid(-3.0, 3.0, 5) {
                let d = DqdParams::new(eps, t, f64::INFINITY, gr);
                let dot = reduced_dqd_liouvillian(&d).unwrap();
                let r = map_parameters(&d);
                let source = restricted_liouvillian(&r).unwrap();
                assert!(dot.generator.max_abs_diff(&source.generator) < 1e-12, "{d:?}");
                assert!(dot.jump.max_abs_diff(&source.jump) < 1e-12);
            }
        }
    }
}

#[test]
fn only_quarter_splitting_matches() {
    let d = DqdParams::new(1.3, 0.8, f64::INFINITY, 1.1);
    let dot = reduced_dqd_liouvillian(&d).unwrap();
    let mapped = map_parameters(&d);
    assert_eq!(mapped.splitting, Splitting::Quarter);
    for s in [Splitting::Half, Splitting::Full] {
        let other = restricted_liouvillian(&RestrictedParams { splitting: s, ..mapped }).unwrap();
        assert!(dot.generator.max_abs_diff(&other.generator) > 0.1);
    }
}

#[test]
fn parameter_map_round_trips() {
    let d = DqdParams::new(0.0, 0.0, f64::INFINITY, 2.0);
    let back = unmap_parameters(&map_parameters(&d));
    assert_eq!(back.epsilon(), 0.0);
    assert_eq!(back.t_coh, 0.0);
    assert_eq!(back.gamma_right, 2.0);
    let d = DqdParams::new(0.75, 1.5, f64::INFINITY, 2.0);
    let back = unmap_parameters(&map_parameters(&d));
    assert!((back.epsilon() - 0.75).abs() < 1e-15);
    assert!(back.gamma_left.is_infinite());
}

#[test]
fn half_splitting_is_the_cavity_block() {
    // Keep the single-excitation pair of the N = 1 cavity model and replace
    // the loss to |g,0⟩ by re-excitation.
    for (g, kappa, delta) in [(1.0, 0.5, 0.0), (0.3, 2.0, 1.7), (2.0, 1.0, -0.9)] {
        let p = CavityParams::new(g, kappa, 0.0, delta);
        let full = cavity_liouvillian(&p).unwrap();
        let block = full.generator.restrict(&[p.index(true, 0), p.index(false, 1)]);
        let refill = SuperOperator::jump(&Operator::outer(2, 0, 1), kappa);
        let r = RestrictedParams { delta, g, kappa, splitting: Splitting::Half };
        let restricted = restricted_liouvillian(&r).unwrap();
        assert!((&block + &refill).max_abs_diff(&restricted.generator) < 1e-12);
    }
}

#[test]
fn restricted_examples() {
    let p = RestrictedParams { delta: 0.4, g: 0.0, kappa: 1.0, splitting: Splitting::Half };
    let b = restricted_liouvillian(&p).unwrap();
    let late = propagate(&b.generator, &DensityMatrix::basis(2, 1), 40.0).unwrap();
    assert!((late.population(0) - 1.0).abs() < 1e-12);
}

#[test]
fn empty_cavity_decays() {
    let p = CavityParams::new(0.0, 1.4, 0.0, 0.0);
    let b = cavity_liouvillian(&p).unwrap();
    let rho0 = DensityMatrix::basis(p.dim(), p.index(false, 1));
    for t in [0.1, 1.0, 3.0] {
        let rho = propagate(&b.generator, &rho0, t).unwrap();
        let n = expectation(&b.intensity_op, &rho).unwrap().re;
        assert!((n - (-1.4 * t).exp()).abs() < 1e-12);
    }
}

#[test]
fn lossless_rabi_oscillation() {
    let g = 1.3;
    let p = CavityParams::new(g, 0.0, 0.0, 0.0);
    let b = cavity_liouvillian(&p).unwrap();
    let rho0 = DensityMatrix::basis(p.dim(), p.index(true, 0));
    let ops = CavityOperators::new(1);
    for k in 0..20 {
        let t = 0.17 * k as f64;
        let rho = propagate(&b.generator, &rho0, t).unwrap();
        let pe = expectation(&ops.excited, &rho).unwrap().re;
        assert!((pe - excited_probability(g, t).unwrap()).abs() < 1e-9);
    }
    assert_eq!(excited_probability(g, 0.0).unwrap(), 1.0);
    assert!(excited_probability(g, std::f64::consts::PI / (2.0 * g)).unwrap().abs() < 1e-15);
    assert!(excited_probability(g, -1.0).is_err());
}

#[test]
fn excitation_number_is_conserved_without_losses() {
    let mut p = CavityParams::new(0.9, 0.0, 0.0, 0.6);
    p.fock_cutoff = 3;
    let b = cavity_liouvillian(&p).unwrap();
    let ops = CavityOperators::new(p.fock_cutoff);
    let total = &ops.excited + &ops.number;
    let psi: Vec<C64> = (0..p.dim()).map(|k| C64::new(1.0 + k as f64, 0.3 * k as f64)).collect();
    let rho0 = DensityMatrix::pure(&psi).unwrap();
    let n0 = expectation(&total, &rho0).unwrap().re;
    for k in 1..30 {
        let rho = propagate(&b.generator, &rho0, 0.37 * k as f64).unwrap();
        assert!((expectation(&total, &rho).unwrap().re - n0).abs() < 1e-10);
    }
}

#[test]
fn single_excitation_manifold_is_closed() {
    let p = CavityParams::new(1.1, 0.7, 0.3, 0.2);
    let b = cavity_liouvillian(&p).unwrap();
    let rho0 = DensityMatrix::basis(p.dim(), p.index(true, 0));
    for t in [0.5, 2.0, 9.0] {
        let rho = propagate(&b.generator, &rho0, t).unwrap();
        assert!(rho.population(p.index(true, 1)).abs() < 1e-14);
    }
}

#[test]
fn dqd_examples() {
    let b = dqd_liouvillian(&DqdParams::new(0.3, 0.0, 1.0, 1.0)).unwrap();
    assert!(b.current(&b.steady_state().unwrap()).unwrap().abs() < 1e-14);

    let (gamma, t) = (1.3, 0.8);
    let b = dqd_liouvillian(&DqdParams::new(0.0, t, gamma, gamma)).unwrap();
    let expected = gamma * t * t / (gamma * gamma / 4.0 + 3.0 * t * t);
    assert!((b.current(&b.steady_state().unwrap()).unwrap() - expected).abs() < 1e-12);

    let b = dqd_liouvillian(&DqdParams::new(0.0, 1e4, gamma, gamma)).unwrap();
    assert!((b.current(&b.steady_state().unwrap()).unwrap() - gamma / 3.0).abs() < 1e-6);
    assert!(dqd_liouvillian(&DqdParams::new(0.0, 1.0, f64::INFINITY, 1.0)).is_err());
}

#[test]
fn reduced_dot_current() {
    for (eps, t, gr) in [(0.0, 1.0, 1.0), (1.2, 0.3, 2.0), (-0.5, 2.0, 0.7)] {
        let b = reduced_dqd_liouvillian(&DqdParams::new(eps, t, 0.0, gr)).unwrap();
        let expected = gr * t * t / (gr * gr / 4.0 + eps * eps + 2.0 * t * t);
        assert!((b.current(&b.steady_state().unwrap()).unwrap() - expected).abs() < 1e-12);
    }
    let b = reduced_dqd_liouvillian(&DqdParams::new(0.4, 0.0, 0.0, 1.0)).unwrap();
    assert!(b.current(&b.steady_state().unwrap()).unwrap().abs() < 1e-14);
}

#[test]
fn dqd_current_converges_as_left_rate_grows() {
    let (eps, t, gr) = (0.6, 0.9, 1.0);
    let reduced = reduced_dqd_liouvillian(&DqdParams::new(eps, t, 0.0, gr)).unwrap();
    let limit = reduced.current(&reduced.steady_state().unwrap()).unwrap();
    let errors: Vec<f64> = (1..=6)
        .map(|k| {
            let b = dqd_liouvillian(&DqdParams::new(eps, t, 10f64.powi(k) * gr, gr)).unwrap();
            (b.current(&b.steady_state().unwrap()).unwrap() - limit).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((8.0..12.5).contains(&ratio), "{errors:?}");
    }
    assert!(errors[5] < 1e-5 * limit);
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let m = &a * a.adjoint();
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = m.trace();
    DensityMatrix::new(Operator::new(m / tr).unwrap()).unwrap()
}

#[test]
fn jump_flux_is_non_negative() {
    let models: Vec<ModelBundle> = vec![
        cavity_liouvillian(&CavityParams::new(1.0, 0.8, 0.3, 0.5)).unwrap(),
        restricted_liouvillian(&RestrictedParams {
            delta: 0.7,
            g: 1.2,
            kappa: 0.9,
            splitting: Splitting::Quarter,
        })
        .unwrap(),
        dqd_liouvillian(&DqdParams::new(0.3, 1.0, 2.0, 0.6)).unwrap(),
        reduced_dqd_liouvillian(&DqdParams::new(-0.4, 0.5, 0.0, 1.4)).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for b in &models {
        let no_jump = b.no_jump_generator();
        for _ in 0..100 {
            let rho = random_state(&mut rng, b.dim());
            let flux = apply_super(&b.jump, rho.op()).unwrap().trace();
            assert!(flux.re >= 0.0 && flux.im.abs() < 1e-14);
            // Without the jump term the norm can only decrease.
            assert!(apply_super(&no_jump, rho.op()).unwrap().trace().re <= 1e-14);
        }
    }
}
