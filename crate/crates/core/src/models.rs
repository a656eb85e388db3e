// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Generators for the cavity-QED single-photon source and the double dot.
//!
//! Four models are provided:
//!
//! * [`cavity_liouvillian`]: a two-level atom coupled to a truncated cavity
//!   mode with cavity loss `κ` and emission `γ` into other modes.
//! * [`restricted_liouvillian`]: the time-adjusted source. Photon detection is
//!   followed instantly by incoherent re-excitation, which closes the dynamics
//!   on the pseudo-spin `{|e,0⟩, |g,1⟩}`.
//! * [`dqd_liouvillian`]: a double quantum dot at large bias, basis
//!   `{|0⟩, |L⟩, |R⟩}`.
//! * [`reduced_dqd_liouvillian`]: the same dot with `Γ_L → ∞`, which removes
//!   the empty state.
//!
//! Under [`map_parameters`] the last two produce identical generators.
//!
//! The restricted model's detuning term is written `c·δ·σ̃_z`. Restricting
//! the full cavity Hamiltonian to the single-excitation pair gives `c = ½`
//! ([`Splitting::Half`]). The correspondence table that identifies the dot's
//! level difference `ε` with `δ/2`, and the closed-form photon Fano factor
//! whose sign changes at `δ² = 3κ²`, both need `c = ¼`
//! ([`Splitting::Quarter`]); that is what [`map_parameters`] returns.

use crate::error::{Error, Result};
use crate::linalg::{
    annihilation, kron, liouvillian, steady_state, DensityMatrix, Operator, SuperOperator,
};

/// Parameters of the full atom–cavity model.
///
/// `omega` and `nu` enter only through `δ = ω − ν` for single-excitation
/// dynamics; working in the frame rotating at the cavity frequency
/// (`nu = 0`, `omega = δ`) is the usual choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityParams {
    pub omega: f64,
    pub nu: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub fock_cutoff: usize,
}

impl CavityParams {
    /// Rotating-frame parameters with detuning `delta` and one Fock level.
    pub fn new(g: f64, kappa: f64, gamma: f64, delta: f64) -> Self {
        Self { omega: delta, nu: 0.0, g, kappa, gamma, fock_cutoff: 1 }
    }

    pub fn delta(&self) -> f64 {
        self.omega - self.nu
    }

    pub fn dim(&self) -> usize {
        2 * (self.fock_cutoff + 1)
    }

    /// Basis index of `|atom, n⟩`, with the atom ordered `{|g⟩, |e⟩}`.
    pub fn index(&self, excited: bool, photons: usize) -> usize {
        usize::from(excited) * (self.fock_cutoff + 1) + photons
    }

    pub fn validate(&self) -> Result<()> {
        finite("omega", self.omega)?;
        finite("nu", self.nu)?;
        non_negative("g", self.g)?;
        non_negative("kappa", self.kappa)?;
        non_negative("gamma", self.gamma)?;
        if self.fock_cutoff < 1 {
            return Err(Error::param("fock_cutoff must be at least 1"));
        }
        Ok(())
    }
}

/// Coefficient `c` of the detuning term `c·δ·σ̃_z` in the restricted model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Splitting {
    /// `(δ/2)·σ̃_z`: the restriction of the full cavity Hamiltonian.
    Half,
    /// `δ·σ̃_z`.
    Full,
    /// `(δ/4)·σ̃_z`: pseudo-spin level difference `δ/2`, matching the dot's
    /// `ε = E_L − E_R` under the parameter map.
    Quarter,
}

impl Splitting {
    pub const ALL: [Splitting; 3] = [Splitting::Half, Splitting::Full, Splitting::Quarter];

    pub fn coefficient(self) -> f64 {
        match self {
            Splitting::Half => 0.5,
            Splitting::Full => 1.0,
            Splitting::Quarter => 0.25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Splitting::Half => "half",
            Splitting::Full => "full",
            Splitting::Quarter => "quarter",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestrictedParams {
    pub delta: f64,
    pub g: f64,
    pub kappa: f64,
    pub splitting: Splitting,
}

impl RestrictedParams {
    pub fn validate(&self) -> Result<()> {
        finite("delta", self.delta)?;
        finite("g", self.g)?;
        non_negative("kappa", self.kappa)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DqdParams {
    pub e_left: f64,
    pub e_right: f64,
    pub t_coh: f64,
    pub gamma_left: f64,
    pub gamma_right: f64,
}

impl DqdParams {
    /// Symmetric level placement `E_L = ε/2`, `E_R = −ε/2`.
    pub fn new(epsilon: f64, t_coh: f64, gamma_left: f64, gamma_right: f64) -> Self {
        Self { e_left: epsilon / 2.0, e_right: -epsilon / 2.0, t_coh, gamma_left, gamma_right }
    }

    pub fn epsilon(&self) -> f64 {
        self.e_left - self.e_right
    }

    pub fn validate(&self) -> Result<()> {
        finite("e_left", self.e_left)?;
        finite("e_right", self.e_right)?;
        finite("t_coh", self.t_coh)?;
        non_negative("gamma_right", self.gamma_right)?;
        if !(self.gamma_left >= 0.0) {
            return Err(Error::param(format!("gamma_left must be >= 0, got {}", self.gamma_left)));
        }
        Ok(())
    }
}

/// A generator together with its emission (or tunnelling) jump term.
#[derive(Clone, Debug)]
pub struct ModelBundle {
    pub generator: SuperOperator,
    /// The part of `generator` that records a detected photon or a
    /// transferred electron.
    pub jump: SuperOperator,
    pub intensity_op: Operator,
    pub basis_labels: Vec<String>,
    /// Rate of the output channel (`κ` or `Γ_R`), which sets the
    /// Leggett–Garg bound.
    pub output_rate: f64,
}

impl ModelBundle {
    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// Generator of the evolution conditioned on no jump.
    pub fn no_jump_generator(&self) -> SuperOperator {
        &self.generator - &self.jump
    }

    pub fn steady_state(&self) -> Result<DensityMatrix> {
        steady_state(&self.generator)
    }

    /// Mean output current `Tr(J ρ)`.
    pub fn current(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(self.jump.apply(rho.op())?.trace().re)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.basis_labels.iter().position(|l| l == label)
    }
}

/// The full atom–cavity generator with `H = ν a†a + (ω/2) σ_z + g(σ₋a† + σ₊a)`.
pub fn cavity_liouvillian(p: &CavityParams) -> Result<ModelBundle> {
    p.validate()?;
    let n = p.fock_cutoff;
    let ops = CavityOperators::new(n);
    let h = cavity_hamiltonian(p, &ops);
    let generator = liouvillian(&h, &[(ops.a.clone(), p.kappa), (ops.sigma_minus, p.gamma)])?;
    let labels = ["g", "e"]
        .iter()
        .flat_map(|atom| (0..=n).map(move |k| format!("{atom},{k}")))
        .collect();
    Ok(ModelBundle {
        generator,
        jump: SuperOperator::jump(&ops.a, p.kappa),
        intensity_op: ops.number,
        basis_labels: labels,
        output_rate: p.kappa,
    })
}

/// `ν a†a + (ω/2) σ_z + g(σ₋a† + σ₊a)`.
pub fn cavity_hamiltonian(p: &CavityParams, ops: &CavityOperators) -> Operator {
    let coupling = &(&ops.sigma_minus * &ops.a.dagger()) + &(&ops.sigma_minus.dagger() * &ops.a);
    &(&ops.number.scale(p.nu) + &ops.sigma_z.scale(p.omega / 2.0)) + &coupling.scale(p.g)
}

/// Operators on `{|g⟩, |e⟩} ⊗ {|0⟩, …, |N⟩}`.
#[derive(Clone, Debug)]
pub struct CavityOperators {
    pub a: Operator,
    pub number: Operator,
    pub sigma_minus: Operator,
    pub sigma_z: Operator,
    /// `σ₊σ₋ = |e⟩⟨e| ⊗ I`.
    pub excited: Operator,
}

impl CavityOperators {
    pub fn new(fock_cutoff: usize) -> Self {
        let id_c = Operator::identity(fock_cutoff + 1);
        let id_a = Operator::identity(2);
        let a = kron(&id_a, &annihilation(fock_cutoff));
        let sigma_minus = kron(&Operator::outer(2, 0, 1), &id_c);
        let sigma_z = kron(&Operator::diagonal(&[-1.0, 1.0]), &id_c);
        Self {
            number: &a.dagger() * &a,
            excited: kron(&Operator::outer(2, 1, 1), &id_c),
            a,
            sigma_minus,
            sigma_z,
        }
    }
}

/// The time-adjusted two-state generator on `{|e,0⟩, |g,1⟩}`.
pub fn restricted_liouvillian(p: &RestrictedParams) -> Result<ModelBundle> {
    p.validate()?;
    let h = pseudo_spin_hamiltonian(p.splitting.coefficient() * p.delta, p.g);
    let raise = Operator::outer(2, 0, 1);
    Ok(ModelBundle {
        generator: liouvillian(&h, &[(raise.clone(), p.kappa)])?,
        jump: SuperOperator::jump(&raise, p.kappa),
        intensity_op: Operator::outer(2, 1, 1),
        basis_labels: vec!["e,0".into(), "g,1".into()],
        output_rate: p.kappa,
    })
}

/// Three-state double dot, `H = E_L|L⟩⟨L| + E_R|R⟩⟨R| + T(|L⟩⟨R| + |R⟩⟨L|)`,
/// with electrons entering the left dot at `Γ_L` and leaving the right dot at
/// `Γ_R`.
pub fn dqd_liouvillian(p: &DqdParams) -> Result<ModelBundle> {
    p.validate()?;
    if !p.gamma_left.is_finite() {
        return Err(Error::param("the three-state model needs a finite gamma_left"));
    }
    let (empty, left, right) = (0, 1, 2);
    let h = &(&Operator::diagonal(&[0.0, p.e_left, p.e_right])
        + &Operator::outer(3, left, right).scale(p.t_coh))
        + &Operator::outer(3, right, left).scale(p.t_coh);
    let s_left_dag = Operator::outer(3, left, empty);
    let s_right = Operator::outer(3, empty, right);
    Ok(ModelBundle {
        generator: liouvillian(&h, &[(s_left_dag, p.gamma_left), (s_right.clone(), p.gamma_right)])?,
        jump: SuperOperator::jump(&s_right, p.gamma_right),
        intensity_op: Operator::outer(3, right, right).scale(p.gamma_right),
        basis_labels: vec!["0".into(), "L".into(), "R".into()],
        output_rate: p.gamma_right,
    })
}

/// The double dot with `Γ_L → ∞`: a tunnelling-out event at the right barrier
/// is immediately followed by refilling of the left dot. `gamma_left` is
/// ignored.
pub fn reduced_dqd_liouvillian(p: &DqdParams) -> Result<ModelBundle> {
    finite("e_left", p.e_left)?;
    finite("e_right", p.e_right)?;
    finite("t_coh", p.t_coh)?;
    non_negative("gamma_right", p.gamma_right)?;
    let h = pseudo_spin_hamiltonian(p.epsilon() / 2.0, p.t_coh);
    let refill = Operator::outer(2, 0, 1);
    Ok(ModelBundle {
        generator: liouvillian(&h, &[(refill.clone(), p.gamma_right)])?,
        jump: SuperOperator::jump(&refill, p.gamma_right),
        intensity_op: Operator::outer(2, 1, 1).scale(p.gamma_right),
        basis_labels: vec!["L".into(), "R".into()],
        output_rate: p.gamma_right,
    })
}

/// `z·σ_z + x·σ_x` with `σ_z = diag(1, −1)`.
fn pseudo_spin_hamiltonian(z: f64, x: f64) -> Operator {
    Operator::from_real(2, &[z, x, x, -z]).expect("2x2")
}

/// Dot → cavity: `T ↦ g`, `Γ_R ↦ κ`, `ε ↦ δ/2`, with the splitting that makes
/// the two generators identical.
pub fn map_parameters(d: &DqdParams) -> RestrictedParams {
    RestrictedParams {
        delta: 2.0 * d.epsilon(),
        g: d.t_coh,
        kappa: d.gamma_right,
        splitting: Splitting::Quarter,
    }
}

/// Cavity → dot, the inverse of [`map_parameters`] for any splitting. The
/// returned `gamma_left` is infinite.
pub fn unmap_parameters(r: &RestrictedParams) -> DqdParams {
    let epsilon = 2.0 * r.splitting.coefficient() * r.delta;
    DqdParams::new(epsilon, r.g, f64::INFINITY, r.kappa)
}

/// Probability that an atom entering an empty resonant cavity in `|e⟩` is
/// still excited after an interaction time `t`: `(1 + cos 2gt)/2`.
pub fn excited_probability(g: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param(format!("interaction time must be >= 0, got {t}")));
    }
    Ok(0.5 * (1.0 + (2.0 * g * t).cos()))
}

/// Transition rates of a classical three-state model of the source with
/// states `{|g,0⟩, |g,1⟩, |e,0⟩}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalRates {
    /// `|g,1⟩ → |g,0⟩`, the detected emission.
    pub kappa: f64,
    /// `|g,0⟩ → |e,0⟩`, incoherent re-excitation.
    pub pump: f64,
    /// `|e,0⟩ → |g,1⟩`.
    pub forward: f64,
    /// `|g,1⟩ → |e,0⟩`.
    pub backward: f64,
    /// `|e,0⟩ → |g,0⟩`, undetected loss.
    pub loss: f64,
}

/// A rate-equation model written as a Lindblad generator with purely
/// incoherent transitions, so coherences decouple from populations.
pub fn classical_rate_liouvillian(r: &ClassicalRates) -> Result<ModelBundle> {
    let (empty, photon, atom) = (0, 1, 2);
    let transitions = [
        (photon, empty, r.kappa, "kappa"),
        (empty, atom, r.pump, "pump"),
        (atom, photon, r.forward, "forward"),
        (photon, atom, r.backward, "backward"),
        (atom, empty, r.loss, "loss"),
    ];
    let mut channels = Vec::new();
    for (from, to, rate, name) in transitions {
        non_negative(name, rate)?;
        channels.push((Operator::outer(3, to, from), rate));
    }
    let emit = Operator::outer(3, empty, photon);
    Ok(ModelBundle {
        generator: liouvillian(&Operator::zeros(3), &channels)?,
        jump: SuperOperator::jump(&emit, r.kappa),
        intensity_op: Operator::outer(3, photon, photon),
        basis_labels: vec!["g,0".into(), "g,1".into(), "e,0".into()],
        output_rate: r.kappa,
    })
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be finite, got {x}")))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be finite and >= 0, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expectation, propagate};

    #[test]
    fn cavity_basis_layout() {
        let p = CavityParams { fock_cutoff: 2, ..CavityParams::new(1.0, 1.0, 0.0, 0.0) };
        let b = cavity_liouvillian(&p).unwrap();
        assert_eq!(b.basis_labels, ["g,0", "g,1", "g,2", "e,0", "e,1", "e,2"]);
        assert_eq!(b.index_of("e,0"), Some(p.index(true, 0)));
        assert!(b.generator.trace_defect() < 1e-12);
    }

    #[test]
    fn empty_cavity_decay() {
        let kappa = 1.3;
        let p = CavityParams::new(0.0, kappa, 0.0, 0.4);
        let b = cavity_liouvillian(&p).unwrap();
        let rho0 = DensityMatrix::basis(p.dim(), p.index(false, 1));
        for t in [0.1, 0.5, 2.0] {
            let rho = propagate(&b.generator, &rho0, t).unwrap();
            let n = expectation(&b.intensity_op, &rho).unwrap().re;
            assert!((n - (-kappa * t).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn lossless_rabi_matches_excited_probability() {
        let g = 2.2;
        let p = CavityParams::new(g, 0.0, 0.0, 0.0);
        let b = cavity_liouvillian(&p).unwrap();
        let rho0 = DensityMatrix::basis(p.dim(), p.index(true, 0));
        let ops = CavityOperators::new(1);
        for k in 0..40 {
            let t = 0.05 * k as f64;
            let rho = propagate(&b.generator, &rho0, t).unwrap();
            let pe = expectation(&ops.excited, &rho).unwrap().re;
            assert!((pe - excited_probability(g, t).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn single_excitation_manifold_is_closed() {
        let p = CavityParams::new(1.5, 0.8, 0.3, 0.7);
        let b = cavity_liouvillian(&p).unwrap();
        let rho0 = DensityMatrix::basis(p.dim(), p.index(true, 0));
        let e1 = p.index(true, 1);
        for t in [0.3, 1.0, 5.0] {
            let rho = propagate(&b.generator, &rho0, t).unwrap();
            assert!(rho.population(e1).abs() < 1e-15);
        }
    }

    #[test]
    fn restricted_without_coupling_relaxes_to_excited() {
        let p = RestrictedParams { delta: 0.3, g: 0.0, kappa: 2.0, splitting: Splitting::Half };
        let b = restricted_liouvillian(&p).unwrap();
        let rho = propagate(&b.generator, &DensityMatrix::basis(2, 1), 20.0).unwrap();
        assert!((rho.population(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excited_probability_values() {
        assert_eq!(excited_probability(3.0, 0.0).unwrap(), 1.0);
        let g = 1.7;
        assert!(excited_probability(g, std::f64::consts::PI / (2.0 * g)).unwrap().abs() < 1e-15);
        assert!(excited_probability(g, -1.0).is_err());
    }

    #[test]
    fn degenerate_map_round_trips() {
        let d = DqdParams::new(0.0, 0.0, f64::INFINITY, 1.5);
        let r = map_parameters(&d);
        assert_eq!(r.g, 0.0);
        let back = unmap_parameters(&r);
        assert_eq!(back.t_coh, 0.0);
        assert_eq!(back.gamma_right, 1.5);
        assert_eq!(back.epsilon(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(cavity_liouvillian(&CavityParams { fock_cutoff: 0, ..CavityParams::new(1.0, 1.0, 0.0, 0.0) }).is_err());
        assert!(cavity_liouvillian(&CavityParams::new(1.0, -1.0, 0.0, 0.0)).is_err());
        assert!(dqd_liouvillian(&DqdParams::new(0.0, 1.0, f64::INFINITY, 1.0)).is_err());
        assert!(dqd_liouvillian(&DqdParams::new(0.0, 1.0, 1.0, -1.0)).is_err());
    }

    #[test]
    fn splitting_names_round_trip() {
        for s in Splitting::ALL {
            assert_eq!(Splitting::parse(s.name()), Some(s));
        }
        assert_eq!(Splitting::parse("double"), None);
    }
}
