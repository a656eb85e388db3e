// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-adjusted counting and estimators on the adjusted click stream.
//!
//! Adjustment moves every laser pulse to the instant of the previous
//! detected click and drops cycles in which nothing was detected. The result
//! is a renewal process: each wait is the offset of a detected click within
//! its own cycle.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::statistics::G2Curve;
use crate::trajectory::{parse_err, parse_field, Channel, ClickRecord};

#[derive(Clone, Debug, PartialEq)]
pub struct AdjustedRecord {
    /// Waiting time before each click, in μs.
    pub waits: Vec<f64>,
    /// Cumulative click times `t_k = w₁ + … + w_k`.
    pub clock: Vec<f64>,
    /// Where the record came from, e.g. `seed=7 n_pulses=1000`.
    pub source: String,
}

impl AdjustedRecord {
    pub fn from_waits(waits: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if let Some(w) = waits.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::param(format!("waiting times must be positive, got {w}")));
        }
        let clock = waits
            .iter()
            .scan(0.0, |t, w| {
                *t += w;
                Some(*t)
            })
            .collect();
        Ok(Self { waits, clock, source: source.into() })
    }

    pub fn len(&self) -> usize {
        self.waits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waits.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.clock.last().copied().unwrap_or(0.0)
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# record=adjusted")?;
        writeln!(w, "# source={}", self.source)?;
        writeln!(w, "k\twait_us")?;
        for (k, wait) in self.waits.iter().enumerate() {
            writeln!(w, "{k}\t{wait}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut source = String::new();
        let mut waits = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line_no = n + 1;
            let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
            if let Some(s) = line.strip_prefix("# source=") {
                source = s.to_string();
                continue;
            }
            if line.starts_with('#') || line == "k\twait_us" || line.is_empty() {
                continue;
            }
            let (k, w) = line
                .split_once('\t')
                .ok_or_else(|| parse_err(line_no, "expected k<TAB>wait_us".into()))?;
            let k: usize = parse_field(k, line_no)?;
            if k != waits.len() {
                return Err(parse_err(line_no, format!("expected index {}, got {k}", waits.len())));
            }
            waits.push(parse_field(w, line_no)?);
        }
        Self::from_waits(waits, source)
    }
}

/// Keeps the detected cavity clicks, each wait being its offset in the cycle.
pub fn time_adjust(rec: &ClickRecord) -> AdjustedRecord {
    let waits: Vec<f64> = rec
        .events
        .iter()
        .filter(|e| e.detected && e.channel == Channel::Cavity)
        .map(|e| e.offset)
        .collect();
    let source = format!("seed={} n_pulses={}", rec.seed, rec.protocol.n_pulses);
    // Offsets of recorded clicks are strictly positive by construction.
    AdjustedRecord::from_waits(waits, source).expect("click offsets are positive")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub stderr: f64,
}

/// `N / t_N`, with the renewal-process error `std(w) / mean(w)² / √N`.
pub fn estimate_rate(adj: &AdjustedRecord) -> Result<RateEstimate> {
    let n = adj.len();
    if n < 2 {
        return Err(Error::InsufficientStatistics(format!("need at least 2 clicks, got {n}")));
    }
    let nf = n as f64;
    let mean = adj.duration() / nf;
    let var = adj.waits.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(RateEstimate { rate: nf / adj.duration(), stderr: var.sqrt() / (mean * mean) / nf.sqrt() })
}

/// Minimum number of clicks for [`estimate_g2`].
pub const MIN_CLICKS_G2: usize = 100;

fn g2_bins(adj: &AdjustedRecord, bin: f64, tau_max: f64) -> Result<(usize, f64)> {
    if !(bin > 0.0 && bin.is_finite()) || !(tau_max >= bin && tau_max.is_finite()) {
        return Err(Error::param(format!("need 0 < bin <= tau_max, got bin={bin} tau_max={tau_max}")));
    }
    if adj.len() < MIN_CLICKS_G2 {
        return Err(Error::InsufficientStatistics(format!(
            "need at least {MIN_CLICKS_G2} clicks, got {}",
            adj.len()
        )));
    }
    if adj.duration() <= 2.0 * tau_max {
        return Err(Error::InsufficientStatistics(format!(
            "record of {} us is too short for tau_max = {tau_max} us",
            adj.duration()
        )));
    }
    let bins = (tau_max / bin).round().max(1.0) as usize;
    Ok((bins, estimate_rate(adj)?.rate))
}

/// Pair-correlation estimate of `g²` on bins `[kΔ, (k+1)Δ)` up to `tau_max`.
///
/// Only clicks at `t_i ≤ t_N − τ_max` serve as references so every lag
/// window is fully observed. Bin `k` is normalised by `N_ref · rate · Δ` and
/// carries a Poisson error (one count for empty bins). Lags are reported at
/// bin centres.
pub fn estimate_g2(adj: &AdjustedRecord, bin: f64, tau_max: f64) -> Result<G2Curve> {
    let (bins, rate) = g2_bins(adj, bin, tau_max)?;
    let t = &adj.clock;
    let cutoff = adj.duration() - tau_max;
    let mut counts = vec![0u64; bins];
    let mut references = 0usize;
    for (i, &ti) in t.iter().enumerate() {
        if ti > cutoff {
            break;
        }
        references += 1;
        for &tj in &t[i + 1..] {
            let lag = tj - ti;
            if lag >= tau_max {
                break;
            }
            let k = (lag / bin) as usize;
            if k < bins {
                counts[k] += 1;
            }
        }
    }
    let norm = references as f64 * rate * bin;
    Ok(G2Curve {
        taus: (0..bins).map(|k| (k as f64 + 0.5) * bin).collect(),
        values: counts.iter().map(|&c| c as f64 / norm).collect(),
        normalization: rate,
        stderr: Some(counts.iter().map(|&c| (c.max(1) as f64).sqrt() / norm).collect()),
    })
}

/// Cross-check of [`estimate_g2`] that uses only the wait distribution:
/// `g² = h / rate` with the renewal density `h = f + f∗f + …`, where `f` is
/// the histogram of waits on the same bins.
pub fn renewal_g2(adj: &AdjustedRecord, bin: f64, tau_max: f64) -> Result<G2Curve> {
    let (bins, rate) = g2_bins(adj, bin, tau_max)?;
    let n = adj.len() as f64;
    let mut f = vec![0.0; bins];
    for w in &adj.waits {
        let k = (w / bin) as usize;
        if k < bins {
            f[k] += 1.0 / (n * bin);
        }
    }
    // h(t) = f(t) + ∫₀ᵗ f(t − s) h(s) ds on bin centres. The lag between two
    // centres falls on a bin edge, so f there is the mean of its neighbours.
    let mut h = vec![0.0; bins];
    for k in 0..bins {
        let conv: f64 =
            (0..k).map(|m| 0.5 * (f[k - m - 1] + f[k - m]) * h[m]).sum::<f64>() * bin;
        h[k] = f[k] + conv;
    }
    Ok(G2Curve {
        taus: (0..bins).map(|k| (k as f64 + 0.5) * bin).collect(),
        values: h.iter().map(|x| x / rate).collect(),
        normalization: rate,
        stderr: None,
    })
}

impl G2Curve {
    /// CSV with columns `tau,g2,stderr` (empty `stderr` when unknown).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,g2,stderr")?;
        for (k, (t, v)) in self.taus.iter().zip(&self.values).enumerate() {
            match &self.stderr {
                Some(e) => writeln!(w, "{t},{v},{}", e[k])?,
                None => writeln!(w, "{t},{v},")?,
            }
        }
        Ok(())
    }
}
