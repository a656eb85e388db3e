// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! The acceptance checks, numbered 1 to 13.
//!
//! Each check returns a pass/fail verdict with a one-line summary of the
//! numbers behind it. Runtime limits are part of the verdict where a check
//! has one. [`report`] leaves out timings so the report file is
//! reproducible.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use countstat::models::{
    dqd_liouvillian, map_parameters, reduced_dqd_liouvillian,
    restricted_liouvillian, CavityParams, DqdParams, RestrictedParams, Splitting,
};
use countstat::statistics::quad::{integrate, QuadOptions};
use countstat::statistics::{
    classical_bound_scan, dqd_current_analytic, fano_electron_analytic, fano_photon_analytic,
    fano_photon_numeric, fano_zero_crossing, fcs_cumulants, g2_analytic, raw_max_ratio,
    violation_map, vrs_threshold_scan, Axis, JumpCorrelator, ScanSpec,
};
use countstat::counting::{estimate_g2, time_adjust};
use countstat::trajectory::{
    detection_histogram, emission_probabilities, first_emission_density, simulate_pulsed,
    HistogramNormalization, PulseProtocol,
};
use countstat::units::from_mhz;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{execute, Command};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{header, write};

/// Settings shared by all checks.
#[derive(Clone, Debug)]
pub struct Context {
    pub seed: u64,
    /// Scratch space for the determinism check; removed afterwards.
    pub scratch: PathBuf,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Values worth keeping in the report header.
    pub records: Vec<(&'static str, String)>,
    pub elapsed: Duration,
}

struct Finding {
    passed: bool,
    detail: String,
    records: Vec<(&'static str, String)>,
}

impl Finding {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail, records: Vec::new() }
    }
}

type Outcome = Result<Finding, CliError>;

struct Criterion {
    id: u8,
    title: &'static str,
    budget: Option<Duration>,
    run: fn(&Context) -> Outcome,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

const CRITERIA: [Criterion; 13] = [
    Criterion { id: 1, title: "antibunching", budget: secs(1), run: antibunching },
    Criterion { id: 2, title: "closed-form g2", budget: secs(10), run: g2_equivalence },
    Criterion { id: 3, title: "generator unification", budget: secs(5), run: unification },
    Criterion { id: 4, title: "steady current", budget: None, run: steady_current },
    Criterion { id: 5, title: "electron Fano factor", budget: None, run: electron_fano },
    Criterion { id: 6, title: "photon Fano structure", budget: None, run: photon_fano },
    Criterion { id: 7, title: "large left-rate limit", budget: None, run: left_rate_limit },
    Criterion { id: 8, title: "adjusted Leggett-Garg map", budget: secs(30), run: adjusted_map },
    Criterion { id: 9, title: "raw Leggett-Garg and VRS threshold", budget: secs(60), run: raw_map },
    Criterion { id: 10, title: "classical bound", budget: None, run: classical_bound },
    Criterion { id: 11, title: "trajectory pipeline", budget: secs(300), run: pipeline },
    Criterion { id: 12, title: "detection histogram", budget: None, run: histogram },
    Criterion { id: 13, title: "determinism", budget: None, run: determinism },
];

/// Runs check `id` (1 to 13).
pub fn run_check(id: u8, ctx: &Context) -> Option<Check> {
    let c = CRITERIA.iter().find(|c| c.id == id)?;
    let start = Instant::now();
    let outcome = (c.run)(ctx);
    let elapsed = start.elapsed();
    let (mut passed, mut detail, records) = match outcome {
        Ok(f) => (f.passed, f.detail, f.records),
        Err(e) => (false, format!("error: {e}"), Vec::new()),
    };
    if let Some(budget) = c.budget {
        if elapsed > budget {
            passed = false;
            detail.push_str(&format!("; runtime over the {} s limit", budget.as_secs()));
        }
    }
    Some(Check { id, title: c.title, passed, detail, records, elapsed })
}

pub fn run_all(ctx: &Context) -> Vec<Check> {
    CRITERIA.iter().filter_map(|c| run_check(c.id, ctx)).collect()
}

/// One line per check, as printed to the terminal.
pub fn summary_line(c: &Check) -> String {
    let verdict = if c.passed { "PASS" } else { "FAIL" };
    format!("{verdict} criterion {}: {} ({:.2} s): {}", c.id, c.title, c.elapsed.as_secs_f64(), c.detail)
}

/// Report body without timings.
pub fn report(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{verdict} criterion {}: {}\n    {}\n", c.id, c.title, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} passed, {failed} failed\n", checks.len() - failed));
    out
}

pub(crate) fn command(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let out_dir = cfg.out_dir();
    let ctx = Context { seed: cfg.seed(), scratch: out_dir.join("verify-determinism") };
    let mut checks = Vec::new();
    for c in &CRITERIA {
        let check = run_check(c.id, &ctx).expect("listed criterion");
        println!("{}", summary_line(&check));
        checks.push(check);
    }
    let records: Vec<(&str, String)> = checks.iter().flat_map(|c| c.records.iter().cloned()).collect();
    let mut text = header(cfg, "verify", &records);
    text.extend_from_slice(report(&checks).as_bytes());
    let path = write(&out_dir, "verify_report.txt", &text)?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(CliError::Breach(format!("criteria {} failed; see {}", failed.join(", "), path.display())))
    }
}

/// Couplings spanning the overdamped (`64g² < κ²`) and oscillating regimes,
/// including the exceptional point `g = κ/8`.
const G2_PAIRS: [(f64, f64); 10] = [
    (0.01, 1.0),
    (0.05, 1.0),
    (0.1, 1.0),
    (0.125, 1.0),
    (0.2, 1.0),
    (0.5, 2.0),
    (1.0, 1.0),
    (3.0, 0.7),
    (10.0, 2.7),
    (37.0, 5.0),
];

fn quarter(g: f64, kappa: f64, delta: f64) -> RestrictedParams {
    RestrictedParams { delta, g, kappa, splitting: Splitting::Quarter }
}

fn correlator(g: f64, kappa: f64) -> Result<JumpCorrelator, CliError> {
    let b = restricted_liouvillian(&quarter(g, kappa, 0.0))?;
    Ok(JumpCorrelator::new(&b, &b.steady_state()?)?)
}

fn antibunching(_: &Context) -> Outcome {
    let (mut at_zero, mut at_late) = (0.0f64, 0.0f64);
    for (g, kappa) in G2_PAIRS {
        let c = correlator(g, kappa)?;
        let late = 40.0 / kappa;
        for v in [g2_analytic(g, kappa, 0.0)?, c.g2(0.0)?] {
            at_zero = at_zero.max(v.abs());
        }
        for v in [g2_analytic(g, kappa, late)?, c.g2(late)?] {
            at_late = at_late.max((v - 1.0).abs());
        }
    }
    Ok(Finding::new(
        at_zero < 1e-9 && at_late < 1e-6,
        format!("max |g2(0)| = {at_zero:.2e}, max |g2(40/kappa) - 1| = {at_late:.2e} over 10 (g, kappa) pairs"),
    ))
}

fn g2_equivalence(_: &Context) -> Outcome {
    let mut worst = 0.0f64;
    for (g, kappa) in G2_PAIRS {
        let c = correlator(g, kappa)?;
        for k in 1..=200 {
            let tau = 10.0 * k as f64 / (200.0 * kappa);
            let a = g2_analytic(g, kappa, tau)?;
            worst = worst.max(((c.g2(tau)? - a) / a).abs());
        }
    }
    Ok(Finding::new(worst < 1e-6, format!("max relative deviation {worst:.2e} over 10 pairs x 200 lags")))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn unification(_: &Context) -> Outcome {
    let mut worst = BTreeMap::new();
    for &t in &linspace(0.0, 4.0, 5) {
        for &gr in &linspace(0.1, 5.0, 5) {
            for &eps in &linspace(-3.0, 3.0, 5) {
                let d = DqdParams::new(eps, t, f64::INFINITY, gr);
                let dot = reduced_dqd_liouvillian(&d)?;
                let mapped = map_parameters(&d);
                for s in [Splitting::Half, Splitting::Full, Splitting::Quarter] {
                    let src = restricted_liouvillian(&RestrictedParams { splitting: s, ..mapped })?;
                    let diff = dot.generator.max_abs_diff(&src.generator).max(dot.jump.max_abs_diff(&src.jump));
                    let w = worst.entry(s.name()).or_insert(0.0f64);
                    *w = w.max(diff);
                }
            }
        }
    }
    let matching: Vec<&str> = worst.iter().filter(|(_, d)| **d < 1e-12).map(|(s, _)| *s).collect();
    let passed = matching == [map_parameters(&DqdParams::new(0.0, 1.0, f64::INFINITY, 1.0)).splitting.name()];
    let detail = format!(
        "max |dL| over 125 points: {}; convention = {}",
        worst.iter().map(|(s, d)| format!("{s} {d:.1e}")).collect::<Vec<_>>().join(", "),
        matching.join("+"),
    );
    Ok(Finding { passed, detail, records: vec![("detuning_convention", matching.join("+"))] })
}

fn random_dqd(rng: &mut ChaCha8Rng) -> DqdParams {
    DqdParams::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(0.05..3.0),
        rng.random_range(0.1..5.0),
        rng.random_range(0.1..5.0),
    )
}

fn steady_current(ctx: &Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = random_dqd(&mut rng);
        let b = dqd_liouvillian(&d)?;
        let analytic = dqd_current_analytic(&d)?;
        worst = worst.max(((b.current(&b.steady_state()?)? - analytic) / analytic).abs());
    }
    Ok(Finding::new(worst < 1e-10, format!("max relative error {worst:.2e} over 20 random sets")))
}

fn electron_fano(ctx: &Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = random_dqd(&mut rng);
        let c = fcs_cumulants(&dqd_liouvillian(&d)?, 2)?;
        let closed = fano_electron_analytic(&d)?.value;
        worst = worst.max(((c[1] / c[0] - closed) / closed).abs());
    }
    let limit = 5.0 / 9.0;
    let closed = fano_electron_analytic(&DqdParams::new(0.0, 1e3, 1.0, 1.0))?.value;
    let c = fcs_cumulants(&dqd_liouvillian(&DqdParams::new(0.0, 50.0, 1.0, 1.0))?, 2)?;
    let (closed_err, fcs_err) = ((closed - limit).abs(), (c[1] / c[0] - limit).abs());
    Ok(Finding::new(
        worst < 1e-4 && closed_err < 1e-3 && fcs_err < 1e-3,
        format!(
            "max relative error {worst:.2e} over 20 random sets; |F - 5/9| = {closed_err:.1e} (closed form), {fcs_err:.1e} (counting field)"
        ),
    ))
}

/// Mean and standard deviation of numeric over printed photon Fano factor
/// on a 10 × 10 grid in units of `kappa`.
fn fano_ratio(kappa: f64) -> Result<(f64, f64), CliError> {
    let mut ratios = Vec::new();
    for ig in 0..10 {
        let g = kappa * (0.2 + 0.45 * ig as f64);
        for id in 0..10 {
            let delta = kappa * (-4.3 + 0.95 * id as f64);
            let numeric = fano_photon_numeric(&quarter(g, kappa, delta))?.value;
            ratios.push(numeric / fano_photon_analytic(g, kappa, delta)?.value);
        }
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let std = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok((mean, std))
}

fn photon_fano(_: &Context) -> Outcome {
    let kappa = from_mhz(2.7);
    let root = 3f64.sqrt() * kappa;
    let rows = [0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 15.0, 20.0].map(from_mhz);
    let deltas = linspace(from_mhz(-20.0), from_mhz(20.0), 41);
    let (mut crossing_err, mut sign_ok) = (0.0f64, true);
    for g in rows {
        let p = quarter(g, kappa, 0.0);
        let right = fano_zero_crossing(&p, kappa, 2.5 * kappa, 1e-5 * kappa)?;
        let left = fano_zero_crossing(&p, -2.5 * kappa, -kappa, 1e-5 * kappa)?;
        crossing_err = crossing_err.max((right - root).abs()).max((left + root).abs());
        for &d in deltas.iter().filter(|d| (d.abs() - root).abs() > 1e-3 * kappa) {
            let v = fano_photon_numeric(&quarter(g, kappa, d))?.value;
            sign_ok &= if d.abs() < root { v < 0.0 } else { v > 0.0 };
        }
    }
    let (mean, std) = fano_ratio(kappa)?;
    let crossing = crossing_err / kappa;
    Ok(Finding {
        passed: crossing < 1e-3 && sign_ok && std < 1e-6,
        detail: format!(
            "zero crossings within {crossing:.1e} kappa of +-sqrt(3) kappa on {} rows, signs {}; numeric/printed = {mean:.9} (std {std:.1e})",
            rows.len(),
            if sign_ok { "correct" } else { "WRONG" },
        ),
        records: vec![("fano_ratio_constant", format!("{mean:.9}"))],
    })
}

fn left_rate_limit(_: &Context) -> Outcome {
    let (constant, _) = fano_ratio(1.0)?;
    let sets = [(0.0, 1.0, 1.0), (0.4, 0.3, 1.0), (2.0, 1.5, 0.7), (-1.0, 0.6, 2.0), (0.9, 2.5, 3.0), (-2.5, 0.8, 0.4)];
    let mut worst = 0.0f64;
    for (eps, t, gr) in sets {
        let d = DqdParams::new(eps, t, 1e6 * gr, gr);
        let excess = fano_electron_analytic(&d)?.value - 1.0;
        let photon = fano_photon_numeric(&map_parameters(&d))?.value / constant;
        worst = worst.max(((excess - photon) / photon).abs());
    }
    Ok(Finding::new(
        worst < 1e-3,
        format!("max relative difference {worst:.2e} between F_e - 1 and F_ph / {constant:.6} on {} sets", sets.len()),
    ))
}

fn adjusted_spec(g: f64) -> Result<ScanSpec, CliError> {
    Ok(ScanSpec::Adjusted {
        g,
        kappa: from_mhz(2.7),
        splitting: Splitting::Quarter,
        delta: Axis::linspace("delta", "rad/us", from_mhz(-20.0), from_mhz(20.0), 41)?,
        tau: Axis::linspace("tau", "us", 0.005, 0.2, 40)?,
    })
}

fn adjusted_map(_: &Context) -> Outcome {
    let grid = violation_map(&adjusted_spec(from_mhz(10.0))?)?;
    let regions = grid.regions_above(1.0);
    let largest = regions.iter().map(Vec::len).max().unwrap_or(0);
    let dark = violation_map(&adjusted_spec(0.0)?)?.max();
    Ok(Finding::new(
        grid.max() > 1.0 && !regions.is_empty() && dark <= 1.0 + 1e-9,
        format!(
            "max ratio {:.4}, {} violation region(s), largest {largest} of {} cells; g = 0 max ratio {dark:.2e}",
            grid.max(),
            regions.len(),
            grid.values.len()
        ),
    ))
}

fn raw_map(_: &Context) -> Outcome {
    let (g, kappa) = (from_mhz(10.0), from_mhz(2.7));
    let (dt, steps) = (1e-3, 2000);
    let lossy = raw_max_ratio(&CavityParams::new(g, kappa, from_mhz(3.0), 0.0), dt, steps)?;
    let halved = raw_max_ratio(&CavityParams::new(g, kappa, from_mhz(1.5), 0.0), dt, steps)?;
    let losses = Axis::linspace("loss", "rad/us", from_mhz(0.5), from_mhz(15.0), 16)?;
    let scan = vrs_threshold_scan(g, &losses, dt, steps)?;
    let vrs = scan.vrs_at_threshold;
    let contour_ok = vrs.is_some_and(|v| (v - 4.0).abs() <= 0.2 * 4.0);
    Ok(Finding::new(
        lossy <= 1.0 && halved > 1.0 && contour_ok,
        format!(
            "max raw ratio {lossy:.4} at gamma/2pi = 3 MHz (needs <= 1), {halved:.4} at 1.5 MHz (needs > 1); ratio = 1 on kappa = gamma at 4g/(kappa+gamma) = {}",
            vrs.map_or("none".into(), |v| format!("{v:.3}")),
        ),
    ))
}

fn classical_bound(_: &Context) -> Outcome {
    let values: Vec<f64> = (0..9).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect();
    let (report, rates) = classical_bound_scan(1.0, &values)?;
    Ok(Finding::new(
        report.max_ratio <= 1.0 + 1e-9,
        format!(
            "max ratio {:.9} over {} rate sets ({} lags each), at pump {:.3}, forward {:.3}, backward {:.3}, loss {:.3}",
            report.max_ratio,
            values.len().pow(4),
            report.samples,
            rates.pump,
            rates.forward,
            rates.backward,
            rates.loss
        ),
    ))
}

fn fig2_source() -> CavityParams {
    CavityParams::new(from_mhz(10.0), from_mhz(2.7), 0.0, 0.0)
}

const TARGET_CLICKS: f64 = 1e5;

/// A protocol expected to yield at least `TARGET_CLICKS` detected clicks.
fn protocol_for_clicks(p: &CavityParams, efficiency: f64) -> Result<PulseProtocol, CliError> {
    let period = PulseProtocol::with_default_period(p, 1, efficiency)?.period;
    let (cavity, _) = emission_probabilities(p, period)?;
    let pulses = (1.01 * TARGET_CLICKS / (cavity * efficiency)).ceil() as u64;
    Ok(PulseProtocol::new(period, pulses, efficiency)?)
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-12, rel_tol: 1e-10, ..QuadOptions::default() }
}

fn pipeline(ctx: &Context) -> Outcome {
    let p = fig2_source();
    let (bin, tau_max) = (0.005, 0.5);
    let mut curves = Vec::new();
    let mut parts = Vec::new();
    let mut passed = true;
    for eta in [1.0, 0.2] {
        let rec = simulate_pulsed(&p, &protocol_for_clicks(&p, eta)?, ctx.seed)?;
        let adj = time_adjust(&rec);
        let c = estimate_g2(&adj, bin, tau_max)?;
        let err = c.stderr.clone().unwrap_or_default();
        let mut inside = 0;
        for k in 0..c.len() {
            let a = k as f64 * bin;
            let expected = integrate(|t| g2_analytic(p.g, p.kappa, t), a, a + bin, &quad_opts())?.value / bin;
            if (c.values[k] - expected).abs() < 3.0 * err[k] {
                inside += 1;
            }
        }
        passed &= adj.len() as f64 >= TARGET_CLICKS && inside as f64 >= 0.95 * c.len() as f64;
        parts.push(format!("eta {eta}: {} clicks, {inside}/{} bins within 3 sigma", adj.len(), c.len()));
        curves.push((c, err));
    }
    let ((a, ea), (b, eb)) = (&curves[0], &curves[1]);
    let agree = (0..a.len()).filter(|&k| (a.values[k] - b.values[k]).abs() < 3.0 * ea[k].hypot(eb[k])).count();
    passed &= agree as f64 >= 0.95 * a.len() as f64;
    parts.push(format!("runs agree within combined 3 sigma in {agree}/{} bins", a.len()));
    Ok(Finding::new(passed, parts.join("; ")))
}

fn histogram(ctx: &Context) -> Outcome {
    let p = fig2_source();
    let proto = protocol_for_clicks(&p, 1.0)?;
    let rec = simulate_pulsed(&p, &proto, ctx.seed)?;
    let detected = rec.events.iter().filter(|e| e.detected).count();
    let bins = 25;
    let h = detection_histogram(&rec, bins, Some(10.0 / p.kappa), HistogramNormalization::PerPulse)?;
    let n = proto.n_pulses as f64;
    let mut worst = 0.0f64;
    for k in 0..bins {
        let (a, b) = (h.edges[k], h.edges[k + 1]);
        let prob = integrate(|t| first_emission_density(&p, t), a, b, &quad_opts())?.value;
        let width = b - a;
        let sigma = (n * prob).sqrt() / (n * width);
        worst = worst.max((h.values[k] - prob / width).abs() / sigma);
    }
    Ok(Finding::new(
        detected as f64 >= TARGET_CLICKS && worst < 3.0,
        format!("{detected} clicks, {bins} bins over 10/kappa, largest deviation {worst:.2} sigma"),
    ))
}

fn determinism_config(dir: &Path, seed: u64, mode: &str) -> Result<RunConfig, CliError> {
    let text = format!(
        "[run]\nseed = {seed}\nout = {}\n\n[scan]\nmode = {mode}\ndelta = -10:10:5\ng = 1:10:4\ntau = 0.01:0.1:5\nloss = 1:10:4\n\n\
         [lags]\nmax_us = 0.2\npoints = 41\n\n[protocol]\npulses = 2000\nefficiency = 0.5\n\n\
         [estimate]\nbin_us = 0.01\ntau_max_us = 0.1\n",
        dir.display()
    );
    RunConfig::parse(&text).map_err(CliError::Flag)
}

/// Runs every command except `verify` into the scratch directory.
fn run_commands(ctx: &Context) -> Result<BTreeMap<PathBuf, Vec<u8>>, CliError> {
    let mut files = BTreeMap::new();
    for (mode, sub) in [("adjusted", "adjusted"), ("raw", "raw")] {
        let cfg = determinism_config(&ctx.scratch.join(sub), ctx.seed, mode)?;
        let commands: &[Command] = if mode == "raw" {
            &[Command::LgMap]
        } else {
            &Command::ALL[..Command::ALL.len() - 1]
        };
        for &c in commands {
            for path in execute(c, &cfg)? {
                let bytes = fs::read(&path).map_err(|source| CliError::ReadInput { path: path.clone(), source })?;
                files.insert(path, bytes);
            }
        }
    }
    Ok(files)
}

fn determinism(ctx: &Context) -> Outcome {
    let first = run_commands(ctx);
    let second = run_commands(ctx);
    let _ = fs::remove_dir_all(&ctx.scratch);
    let (first, second) = (first?, second?);
    let differing: Vec<String> = first
        .iter()
        .filter(|(path, bytes)| second.get(*path) != Some(bytes))
        .map(|(path, _)| path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    let passed = differing.is_empty() && first.len() == second.len() && !first.is_empty();
    Ok(Finding::new(
        passed,
        if passed {
            format!("{} output files identical across two runs of every command except verify", first.len())
        } else {
            format!("files differ between runs: {}", differing.join(", "))
        },
    ))
}
