// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand. Each writes its files into the configured
//! output directory and returns their paths.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Subcommand;
use countstat::counting::{estimate_g2, estimate_rate, time_adjust, AdjustedRecord};
use countstat::models::{dqd_liouvillian, CavityParams};
use countstat::statistics::{
    dqd_current_analytic, fano_electron_analytic, fcs_cumulants, g2_analytic, violation_map,
    vrs_threshold_scan, Axis, JumpCorrelator, ScanGrid, ScanSpec,
};
use countstat::trajectory::{simulate_pulsed, ClickRecord, PulseProtocol};

use crate::config::{LgMode, RunConfig};
use crate::error::CliError;
use crate::output::{header, write};
use crate::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form and master-equation g²(τ) of the time-adjusted source.
    G2,
    /// Numeric photon Fano factor over detuning and coupling.
    FanoMap,
    /// Leggett–Garg ratio map (`scan.mode` = adjusted or raw).
    LgMap,
    /// Largest raw Leggett–Garg ratio over cavity and atomic loss rates.
    VrsScan,
    /// Current and noise of the double dot, closed form against numerics.
    Dqd,
    /// Quantum-jump simulation of the pulsed source.
    Simulate,
    /// Time-adjust a click record.
    Adjust,
    /// Estimate g²(τ) from an adjusted record.
    Estimate,
    /// Run every acceptance check and write a report.
    Verify,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::G2,
        Command::FanoMap,
        Command::LgMap,
        Command::VrsScan,
        Command::Dqd,
        Command::Simulate,
        Command::Adjust,
        Command::Estimate,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::G2 => "g2",
            Command::FanoMap => "fano-map",
            Command::LgMap => "lg-map",
            Command::VrsScan => "vrs-scan",
            Command::Dqd => "dqd",
            Command::Simulate => "simulate",
            Command::Adjust => "adjust",
            Command::Estimate => "estimate",
            Command::Verify => "verify",
        }
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    match command {
        Command::G2 => g2(cfg),
        Command::FanoMap => fano_map(cfg),
        Command::LgMap => lg_map(cfg),
        Command::VrsScan => vrs_scan(cfg),
        Command::Dqd => dqd(cfg),
        Command::Simulate => simulate(cfg),
        Command::Adjust => adjust(cfg),
        Command::Estimate => estimate(cfg),
        Command::Verify => verify::command(cfg),
    }
}

/// Lag spacing and number of steps from `[lags]`.
fn lags(cfg: &RunConfig) -> Result<(f64, usize), CliError> {
    let max = cfg.real("lags", "max_us").expect("lags.max_us has a default");
    let points = cfg.count("lags", "points") as usize;
    if !(max > 0.0) || points < 2 {
        return Err(CliError::Invalid(format!(
            "lags need max_us > 0 and at least 2 points, got {max} and {points}"
        )));
    }
    Ok((max / (points - 1) as f64, points - 1))
}

fn g2(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let r = cfg.restricted();
    if r.delta != 0.0 {
        return Err(CliError::Invalid("g2 compares against the resonant closed form; set model.delta = 0".into()));
    }
    let bundle = countstat::models::restricted_liouvillian(&r)?;
    let corr = JumpCorrelator::new(&bundle, &bundle.steady_state()?)?;
    let (dt, steps) = lags(cfg)?;
    let numeric = corr.g2_grid(dt, steps)?;
    let tolerance = cfg.real("tolerance", "g2_agreement").expect("has a default");

    let mut body = String::from("tau,g2_analytic,g2_numeric\n");
    let mut worst = (0.0f64, 0.0f64);
    for (k, n) in numeric.iter().enumerate() {
        let tau = dt * k as f64;
        let a = g2_analytic(r.g, r.kappa, tau)?;
        if (a - n).abs() > worst.0 {
            worst = ((a - n).abs(), tau);
        }
        body.push_str(&format!("{tau},{a},{n}\n"));
    }
    let mut out = header(cfg, "g2", &[("max_abs_difference", format!("{:e}", worst.0))]);
    out.extend_from_slice(body.as_bytes());
    let path = write(&cfg.out_dir(), "g2.csv", &out)?;
    if worst.0 > tolerance {
        return Err(CliError::Breach(format!(
            "g2 columns differ by {:e} at tau={} us (tolerance {tolerance:e})",
            worst.0, worst.1
        )));
    }
    Ok(vec![path])
}

/// Converts a frequency axis back to the units of the config.
fn shown(cfg: &RunConfig, axis: &Axis) -> Axis {
    if axis.unit == "us" {
        return axis.clone();
    }
    Axis {
        name: axis.name.clone(),
        unit: cfg.frequency_unit().into(),
        values: axis.values.iter().map(|&v| cfg.display_frequency(v)).collect(),
    }
}

fn write_grid(cfg: &RunConfig, command: &str, name: &str, grid: &ScanGrid, extra: &[(&str, String)]) -> Result<PathBuf, CliError> {
    let shown_grid = ScanGrid {
        x_axis: shown(cfg, &grid.x_axis),
        y_axis: shown(cfg, &grid.y_axis),
        ..grid.clone()
    };
    let mut meta = vec![
        ("x_unit", shown_grid.x_axis.unit.clone()),
        ("y_unit", shown_grid.y_axis.unit.clone()),
        ("max_value", grid.max().to_string()),
    ];
    meta.extend(extra.iter().cloned());
    let mut out = header(cfg, command, &meta);
    shown_grid
        .write_csv(&mut out)
        .map_err(|source| CliError::WriteOutput { path: cfg.out_dir().join(name), source })?;
    write(&cfg.out_dir(), name, &out)
}

fn fano_map(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let r = cfg.restricted();
    let spec = ScanSpec::Fano { kappa: r.kappa, splitting: r.splitting, delta: cfg.axis("delta"), g: cfg.axis("g") };
    let grid = violation_map(&spec)?;
    let root = cfg.display_frequency(3f64.sqrt() * r.kappa);
    Ok(vec![write_grid(cfg, "fano-map", "fano_map.csv", &grid, &[("zero_line_delta", root.to_string())])?])
}

fn lg_map(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = cfg.cavity();
    let spec = match cfg.lg_mode() {
        LgMode::Adjusted => ScanSpec::Adjusted {
            g: p.g,
            kappa: p.kappa,
            splitting: cfg.splitting(),
            delta: cfg.axis("delta"),
            tau: cfg.axis("tau"),
        },
        LgMode::Raw => ScanSpec::RawTauDelta {
            g: p.g,
            kappa: p.kappa,
            gamma: p.gamma,
            tau: cfg.axis("tau"),
            delta: cfg.axis("delta"),
        },
    };
    let grid = violation_map(&spec)?;
    let regions = grid.regions_above(1.0);
    let largest = regions.iter().map(Vec::len).max().unwrap_or(0);
    let extra = [
        ("map", spec.kind().to_string()),
        ("violation_regions", regions.len().to_string()),
        ("largest_region_cells", largest.to_string()),
    ];
    Ok(vec![write_grid(cfg, "lg-map", "lg_map.csv", &grid, &extra)?])
}

fn vrs_scan(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = cfg.cavity();
    let (dt, steps) = lags(cfg)?;
    let scan = vrs_threshold_scan(p.g, &cfg.axis("loss"), dt, steps)?;
    let show = |x: Option<f64>, f: &dyn Fn(f64) -> f64| x.map_or("none".to_string(), |v| f(v).to_string());
    let extra = [
        ("threshold_loss", show(scan.threshold, &|v| cfg.display_frequency(v))),
        ("vrs_at_threshold", show(scan.vrs_at_threshold, &|v| v)),
    ];
    Ok(vec![write_grid(cfg, "vrs-scan", "vrs_scan.csv", &scan.grid, &extra)?])
}

fn dqd(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let d = cfg.dqd();
    let bundle = dqd_liouvillian(&d)?;
    let current = bundle.current(&bundle.steady_state()?)?;
    let c = fcs_cumulants(&bundle, 3)?;
    let mut body = String::from("quantity,analytic,numeric\n");
    body.push_str(&format!("current,{},{current}\n", dqd_current_analytic(&d)?));
    body.push_str(&format!("fcs_current,{},{}\n", dqd_current_analytic(&d)?, c[0]));
    body.push_str(&format!("fano,{},{}\n", fano_electron_analytic(&d)?.value, c[1] / c[0]));
    body.push_str(&format!("skewness,,{}\n", c[2] / c[0]));
    let mut out = header(cfg, "dqd", &[("current_unit", "1/us".into())]);
    out.extend_from_slice(body.as_bytes());
    Ok(vec![write(&cfg.out_dir(), "dqd_stats.csv", &out)?])
}

fn protocol(cfg: &RunConfig, p: &CavityParams) -> Result<PulseProtocol, CliError> {
    let pulses = cfg.count("protocol", "pulses");
    let efficiency = cfg.real("protocol", "efficiency").expect("has a default");
    let proto = match cfg.real("protocol", "period_us") {
        Some(period) => PulseProtocol::new(period, pulses, efficiency)?,
        None => PulseProtocol::with_default_period(p, pulses, efficiency)?,
    };
    Ok(proto)
}

fn simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = cfg.cavity();
    let proto = protocol(cfg, &p)?;
    let rec = simulate_pulsed(&p, &proto, cfg.seed())?;
    let detected = rec.events.iter().filter(|e| e.detected).count();
    let mut out = header(cfg, "simulate", &[("detected_clicks", detected.to_string())]);
    rec.write_tsv(&mut out).expect("writing to memory");
    Ok(vec![write(&cfg.out_dir(), "clicks.tsv", &out)?])
}

fn input(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.path("io", "input").unwrap_or_else(|| cfg.out_dir().join(default))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::ReadInput { path: path.to_path_buf(), source })
}

fn adjust(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let path = input(cfg, "clicks.tsv");
    let rec = ClickRecord::read_tsv(open(&path)?)
        .map_err(|source| CliError::ParseInput { path: path.clone(), source })?;
    let adj = time_adjust(&rec);
    let mut out = header(cfg, "adjust", &[("input", path.display().to_string()), ("clicks", adj.len().to_string())]);
    adj.write_tsv(&mut out).expect("writing to memory");
    Ok(vec![write(&cfg.out_dir(), "adjusted.tsv", &out)?])
}

fn estimate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let path = input(cfg, "adjusted.tsv");
    let adj = AdjustedRecord::read_tsv(open(&path)?)
        .map_err(|source| CliError::ParseInput { path: path.clone(), source })?;
    let bin = cfg.real("estimate", "bin_us").expect("has a default");
    let tau_max = cfg.real("estimate", "tau_max_us").expect("has a default");
    let rate = estimate_rate(&adj)?;
    let curve = estimate_g2(&adj, bin, tau_max)?;
    let extra = [
        ("input", path.display().to_string()),
        ("clicks", adj.len().to_string()),
        ("rate_per_us", rate.rate.to_string()),
        ("rate_stderr", rate.stderr.to_string()),
    ];
    let mut out = header(cfg, "estimate", &extra);
    curve.write_csv(&mut out).expect("writing to memory");
    Ok(vec![write(&cfg.out_dir(), "g2_estimate.csv", &out)?])
}
