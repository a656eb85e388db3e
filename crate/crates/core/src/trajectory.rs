// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum-jump simulation of the pulsed single-photon source.
//!
//! Each pulse resets the atom–cavity system to `|e,0⟩`. Between pulses the
//! conditional state evolves under `H_eff = H − (i/2)(κ a†a + γ σ₊σ₋)` until
//! a photon leaves through the cavity or into other modes; afterwards the
//! system sits in `|g,0⟩` until the next pulse. Since every cycle starts from
//! the same state, the no-jump survival curve is computed once and reused.

use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{expectation, expm, propagate, DensityMatrix, C64};
use crate::models::{cavity_hamiltonian, cavity_liouvillian, CavityOperators, CavityParams};
use crate::statistics::quad::{integrate, QuadOptions};

/// Default pulse period in units of `1/κ`.
pub const DEFAULT_PERIOD_KAPPA: f64 = 20.0;

/// Survival left at the end of a cycle above which a warning is logged.
const RESIDUAL_WARNING: f64 = 1e-3;

/// Grid step of the survival curve, relative to `1/‖H_eff‖₁`.
const GRID_STEP: f64 = 1e-3;

/// Resolution of the jump time, relative to `1/κ`.
const TIME_RESOLUTION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseProtocol {
    pub period: f64,
    pub n_pulses: u64,
    /// Detector efficiency `η ∈ [0, 1]`.
    pub efficiency: f64,
}

impl PulseProtocol {
    pub fn new(period: f64, n_pulses: u64, efficiency: f64) -> Result<Self> {
        let p = Self { period, n_pulses, efficiency };
        p.validate()?;
        Ok(p)
    }

    /// Period `20/κ`.
    pub fn with_default_period(p: &CavityParams, n_pulses: u64, efficiency: f64) -> Result<Self> {
        Self::new(DEFAULT_PERIOD_KAPPA / p.kappa, n_pulses, efficiency)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::param(format!("pulse period must be positive, got {}", self.period)));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::param(format!("efficiency must be in [0, 1], got {}", self.efficiency)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Cavity,
    OtherModes,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Cavity => "cavity",
            Channel::OtherModes => "other",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClickEvent {
    pub cycle: u64,
    /// Time since the pulse that started the cycle.
    pub offset: f64,
    pub channel: Channel,
    /// Always false for [`Channel::OtherModes`].
    pub detected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClickRecord {
    pub protocol: PulseProtocol,
    pub params: CavityParams,
    pub seed: u64,
    pub events: Vec<ClickEvent>,
}

/// Conditional no-jump evolution from `|e,0⟩`, tabulated on a uniform grid.
struct Survival {
    h_eff: DMatrix<C64>,
    cavity_weight: DMatrix<C64>,
    other_weight: DMatrix<C64>,
    dt: f64,
    states: Vec<DVector<C64>>,
    norms: Vec<f64>,
    resolution: f64,
}

impl Survival {
    fn new(p: &CavityParams, period: f64) -> Result<Self> {
        p.validate()?;
        let ops = CavityOperators::new(p.fock_cutoff);
        let h = cavity_hamiltonian(p, &ops);
        let decay = &ops.number.scale(p.kappa) + &ops.excited.scale(p.gamma);
        let h_eff = h.matrix() - decay.matrix() * C64::new(0.0, 0.5);
        let norm1 = h_eff
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let steps = (period * norm1 / GRID_STEP).ceil().max(1.0) as usize;
        let dt = period / steps as f64;
        let generator = h_eff.clone() * C64::new(0.0, -1.0);
        let step = expm(&(generator * C64::new(dt, 0.0)))?;
        let mut psi0 = DVector::from_element(p.dim(), C64::new(0.0, 0.0));
        psi0[p.index(true, 0)] = C64::new(1.0, 0.0);
        let states: Vec<DVector<C64>> =
            std::iter::successors(Some(psi0), |v| Some(&step * v)).take(steps + 1).collect();
        let norms = states.iter().map(|s| s.norm_squared()).collect();
        let scale = if p.kappa > 0.0 { p.kappa } else { norm1 };
        Ok(Self {
            h_eff,
            cavity_weight: ops.number.scale(p.kappa).into_matrix(),
            other_weight: ops.excited.scale(p.gamma).into_matrix(),
            dt,
            states,
            norms,
            resolution: TIME_RESOLUTION / scale,
        })
    }

    fn at_end(&self) -> f64 {
        *self.norms.last().expect("grid has at least two points")
    }

    /// State at `t = k·dt + s` for `0 ≤ s ≤ dt`, by a Taylor series of the
    /// short step.
    fn state(&self, k: usize, s: f64) -> DVector<C64> {
        let a = &self.h_eff * C64::new(0.0, -s);
        let mut term = self.states[k].clone();
        let mut out = term.clone();
        for n in 1..30 {
            term = &a * term / C64::new(n as f64, 0.0);
            out += &term;
            if term.norm() < 1e-18 * out.norm() {
                break;
            }
        }
        out
    }

    /// Time at which the survival drops to `level`, if within the period.
    fn crossing(&self, level: f64) -> Option<(f64, DVector<C64>)> {
        if level <= self.at_end() {
            return None;
        }
        // norms decrease monotonically: find the first grid index below level
        let k = self.norms.partition_point(|&n| n > level);
        let k0 = k - 1;
        let (mut lo, mut hi) = (0.0, self.dt);
        while hi - lo > self.resolution {
            let mid = 0.5 * (lo + hi);
            if self.state(k0, mid).norm_squared() > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        Some((k0 as f64 * self.dt + s, self.state(k0, s)))
    }
}

fn weight(m: &DMatrix<C64>, psi: &DVector<C64>) -> f64 {
    psi.dotc(&(m * psi)).re
}

/// Simulates `proto.n_pulses` independent cycles. Cycle `k` draws from a
/// ChaCha8 stream selected by `k`, so the record does not depend on thread
/// scheduling.
pub fn simulate_pulsed(p: &CavityParams, proto: &PulseProtocol, seed: u64) -> Result<ClickRecord> {
    proto.validate()?;
    let survival = Survival::new(p, proto.period)?;
    let residual = survival.at_end();
    if residual > RESIDUAL_WARNING {
        log::warn!(
            "excitation left at the end of each cycle is {residual:.3e}; \
             it is discarded at the next pulse (period {} us is short)",
            proto.period
        );
    }
    let events: Vec<ClickEvent> = (0..proto.n_pulses)
        .into_par_iter()
        .filter_map(|cycle| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(cycle);
            let level: f64 = rng.random();
            let pick: f64 = rng.random();
            let detect: f64 = rng.random();
            let (offset, psi) = survival.crossing(level)?;
            let wc = weight(&survival.cavity_weight, &psi);
            let wo = weight(&survival.other_weight, &psi);
            let channel = if pick * (wc + wo) < wc { Channel::Cavity } else { Channel::OtherModes };
            let detected = channel == Channel::Cavity && detect < proto.efficiency;
            Some(ClickEvent { cycle, offset, channel, detected })
        })
        .collect();
    Ok(ClickRecord { protocol: *proto, params: *p, seed, events })
}

/// Probability that no photon has left by time `t` after a pulse.
pub fn survival_probability(p: &CavityParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param(format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok(Survival::new(p, t)?.at_end())
}

/// `κ⟨a†a⟩(t)` on the full model started from `rho0`, without resets.
pub fn emission_density_from(p: &CavityParams, rho0: &DensityMatrix, t: f64) -> Result<f64> {
    let bundle = cavity_liouvillian(p)?;
    let rho = propagate(&bundle.generator, rho0, t)?;
    Ok(p.kappa * expectation(&bundle.intensity_op, &rho)?.re)
}

/// Density of the cavity-emission time after a pulse, `κ⟨a†a⟩(t)` from
/// `|e,0⟩`.
pub fn first_emission_density(p: &CavityParams, t: f64) -> Result<f64> {
    emission_density_from(p, &excited(p), t)
}

fn excited(p: &CavityParams) -> DensityMatrix {
    DensityMatrix::basis(p.dim(), p.index(true, 0))
}

/// Probabilities that a cycle of length `period` ends with a cavity photon
/// and with a photon in other modes, from the master equation.
pub fn emission_probabilities(p: &CavityParams, period: f64) -> Result<(f64, f64)> {
    let bundle = cavity_liouvillian(p)?;
    let ops = CavityOperators::new(p.fock_cutoff);
    let rho0 = excited(p);
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, initial_panels: 32, ..QuadOptions::default() };
    let both = |tau: f64| -> Result<(f64, f64)> {
        let rho = propagate(&bundle.generator, &rho0, tau)?;
        Ok((
            p.kappa * expectation(&ops.number, &rho)?.re,
            p.gamma * expectation(&ops.excited, &rho)?.re,
        ))
    };
    let cavity = integrate(|t| both(t).map(|x| x.0), 0.0, period, &opts)?.value;
    let other = integrate(|t| both(t).map(|x| x.1), 0.0, period, &opts)?.value;
    Ok((cavity, other))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistogramNormalization {
    Counts,
    /// Divide by detected clicks × bin width: a probability density.
    PerDetectedCycle,
    /// Divide by pulses × efficiency × bin width: an estimate of
    /// [`first_emission_density`].
    PerPulse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    /// `bins + 1` bin edges in μs.
    pub edges: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Detected cavity clicks binned by offset on `[0, range)`; `range`
/// defaults to the pulse period.
pub fn detection_histogram(
    rec: &ClickRecord,
    bins: usize,
    range: Option<f64>,
    normalization: HistogramNormalization,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::param("a histogram needs at least one bin"));
    }
    if rec.protocol.n_pulses == 0 {
        return Err(Error::InsufficientStatistics("empty record".into()));
    }
    let range = range.unwrap_or(rec.protocol.period);
    if !(range > 0.0) {
        return Err(Error::param(format!("histogram range must be positive, got {range}")));
    }
    let width = range / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut detected = 0u64;
    for e in rec.events.iter().filter(|e| e.detected) {
        detected += 1;
        let k = (e.offset / width) as usize;
        if e.offset < range && k < bins {
            counts[k] += 1;
        }
    }
    let scale = match normalization {
        HistogramNormalization::Counts => 1.0,
        HistogramNormalization::PerDetectedCycle if detected == 0 => 0.0,
        HistogramNormalization::PerDetectedCycle => 1.0 / (detected as f64 * width),
        HistogramNormalization::PerPulse if rec.protocol.efficiency == 0.0 => 0.0,
        HistogramNormalization::PerPulse => {
            1.0 / (rec.protocol.n_pulses as f64 * rec.protocol.efficiency * width)
        }
    };
    Ok(Histogram {
        edges: (0..=bins).map(|k| width * k as f64).collect(),
        values: counts.iter().map(|&c| c as f64 * scale).collect(),
        stderr: counts.iter().map(|&c| (c as f64).sqrt() * scale).collect(),
        counts,
    })
}

const HEADER: &str = "cycle\toffset_us\tchannel\tdetected";

impl ClickRecord {
    /// Tab-separated text: `# key=value` header lines, a column header, then
    /// one event per line. Floats are written in shortest round-trip form.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let p = &self.params;
        let pr = &self.protocol;
        writeln!(w, "# record=clicks")?;
        writeln!(w, "# seed={}", self.seed)?;
        writeln!(w, "# period_us={}", pr.period)?;
        writeln!(w, "# n_pulses={}", pr.n_pulses)?;
        writeln!(w, "# efficiency={}", pr.efficiency)?;
        writeln!(w, "# omega={}", p.omega)?;
        writeln!(w, "# nu={}", p.nu)?;
        writeln!(w, "# g={}", p.g)?;
        writeln!(w, "# kappa={}", p.kappa)?;
        writeln!(w, "# gamma={}", p.gamma)?;
        writeln!(w, "# fock_cutoff={}", p.fock_cutoff)?;
        writeln!(w, "{HEADER}")?;
        for e in &self.events {
            writeln!(w, "{}\t{}\t{}\t{}", e.cycle, e.offset, e.channel, u8::from(e.detected))?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut header = std::collections::HashMap::new();
        let mut events = Vec::new();
        let mut seen_columns = false;
        for (n, line) in r.lines().enumerate() {
            let line_no = n + 1;
            let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
            if let Some(kv) = line.strip_prefix("# ") {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| parse_err(line_no, format!("expected key=value, got {kv:?}")))?;
                header.insert(k.to_string(), v.to_string());
                continue;
            }
            if line == HEADER {
                seen_columns = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            if !seen_columns {
                return Err(parse_err(line_no, "event before column header".into()));
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(parse_err(line_no, format!("expected 4 fields, got {}", f.len())));
            }
            let channel = match f[2] {
                "cavity" => Channel::Cavity,
                "other" => Channel::OtherModes,
                c => return Err(parse_err(line_no, format!("unknown channel {c:?}"))),
            };
            let detected = match f[3] {
                "1" => true,
                "0" => false,
                d => return Err(parse_err(line_no, format!("detected must be 0 or 1, got {d:?}"))),
            };
            events.push(ClickEvent {
                cycle: parse_field(f[0], line_no)?,
                offset: parse_field(f[1], line_no)?,
                channel,
                detected,
            });
        }
        let get = |k: &str| -> Result<&String> {
            header.get(k).ok_or_else(|| parse_err(0, format!("missing header key {k}")))
        };
        let num = |k: &str| -> Result<f64> { parse_field(get(k)?, 0) };
        Ok(ClickRecord {
            protocol: PulseProtocol {
                period: num("period_us")?,
                n_pulses: parse_field(get("n_pulses")?, 0)?,
                efficiency: num("efficiency")?,
            },
            params: CavityParams {
                omega: num("omega")?,
                nu: num("nu")?,
                g: num("g")?,
                kappa: num("kappa")?,
                gamma: num("gamma")?,
                fock_cutoff: parse_field(get("fock_cutoff")?, 0)?,
            },
            seed: parse_field(get("seed")?, 0)?,
            events,
        })
    }
}

pub(crate) fn parse_err(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

pub(crate) fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.parse().map_err(|e: T::Err| parse_err(line, format!("{s:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source() -> CavityParams {
        CavityParams::new(2.0, 1.0, 0.0, 0.0)
    }

    #[test]
    fn no_coupling_no_cavity_clicks() {
        let p = CavityParams::new(0.0, 1.0, 0.0, 0.0);
        let proto = PulseProtocol::with_default_period(&p, 200, 1.0).unwrap();
        assert!(simulate_pulsed(&p, &proto, 1).unwrap().events.is_empty());
    }

    #[test]
    fn one_event_per_cycle_and_sorted() {
        let p = CavityParams::new(2.0, 1.0, 0.5, 0.3);
        let proto = PulseProtocol::with_default_period(&p, 500, 0.7).unwrap();
        let rec = simulate_pulsed(&p, &proto, 9).unwrap();
        assert!(rec.events.windows(2).all(|w| w[0].cycle < w[1].cycle));
        assert!(rec.events.iter().all(|e| e.offset >= 0.0 && e.offset < proto.period));
        assert!(rec.events.iter().all(|e| e.channel == Channel::Cavity || !e.detected));
        assert!(rec.events.iter().any(|e| e.channel == Channel::OtherModes));
    }

    #[test]
    fn deterministic_and_round_trips() {
        let p = source();
        let proto = PulseProtocol::with_default_period(&p, 300, 0.5).unwrap();
        let a = simulate_pulsed(&p, &proto, 42).unwrap();
        assert_eq!(a, simulate_pulsed(&p, &proto, 42).unwrap());
        assert_ne!(a.events, simulate_pulsed(&p, &proto, 43).unwrap().events);
        let mut buf = Vec::new();
        a.write_tsv(&mut buf).unwrap();
        let b = ClickRecord::read_tsv(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn survival_grid_matches_master_equation() {
        let p = CavityParams::new(1.3, 1.0, 0.4, 0.2);
        for t in [0.5, 2.0, 6.0] {
            let s = survival_probability(&p, t).unwrap();
            let (c, o) = emission_probabilities(&p, t).unwrap();
            assert!((s - (1.0 - c - o)).abs() < 1e-9, "t={t}: {s} vs {}", 1.0 - c - o);
        }
    }

    #[test]
    fn density_starts_at_zero() {
        assert_eq!(first_emission_density(&source(), 0.0).unwrap(), 0.0);
        let p = CavityParams::new(0.0, 1.5, 0.0, 0.0);
        let photon = DensityMatrix::basis(p.dim(), p.index(false, 1));
        let d = emission_density_from(&p, &photon, 0.4).unwrap();
        assert!((d - 1.5 * (-1.5f64 * 0.4).exp()).abs() < 1e-13);
    }

    #[test]
    fn histogram_of_undetected_record_is_zero() {
        let p = source();
        let proto = PulseProtocol::with_default_period(&p, 100, 0.0).unwrap();
        let rec = simulate_pulsed(&p, &proto, 3).unwrap();
        let h = detection_histogram(&rec, 10, None, HistogramNormalization::PerDetectedCycle).unwrap();
        assert!(h.values.iter().all(|v| *v == 0.0));
        assert!(detection_histogram(&rec, 0, None, HistogramNormalization::Counts).is_err());
    }

    #[test]
    fn malformed_records_are_rejected() {
        let bad = "# seed=1\ncycle\toffset_us\tchannel\tdetected\n0\t0.1\tlaser\t1\n";
        assert!(matches!(ClickRecord::read_tsv(bad.as_bytes()), Err(Error::Parse { line: 3, .. })));
    }
}
