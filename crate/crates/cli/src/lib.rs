// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for `countstat`.
//!
//! ```text
//! countstat g2 --g-mhz 10 --kappa-mhz 2.7 --tau-max-us 1 --out results
//! countstat simulate --pulses 100000 --seed 7
//! countstat --config run.conf verify
//! ```
//!
//! Settings come from an optional config file (see [`config`]) with flags
//! applied on top. Exit codes: 0 on success, 1 for configuration and I/O
//! errors, 2 for numeric failures and tolerance breaches.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser};

mod commands;
pub mod config;
mod error;
mod output;
pub mod verify;

pub use commands::{execute, Command};
pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "countstat", version, about = "Photon and electron counting statistics")]
struct Cli {
    /// Config file with `[section]` and `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<String>,
    /// Read frequencies as rad/μs instead of MHz.
    #[arg(long, global = true)]
    angular: bool,
    #[command(flatten)]
    flags: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override single config keys. Frequencies follow `--angular`.
#[derive(Debug, Args)]
struct Overrides {
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "F")]
    g_mhz: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "F")]
    kappa_mhz: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "F")]
    gamma_mhz: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "F")]
    delta_mhz: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "N")]
    fock_cutoff: Option<String>,
    /// half, full or quarter.
    #[arg(long, global = true, allow_hyphen_values = true)]
    splitting: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "F")]
    epsilon_mhz: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "F")]
    tunnel_mhz: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "F")]
    gamma_left_mhz: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "F")]
    gamma_right_mhz: Option<String>,
    /// Detuning axis, `min:max:points`.
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "AXIS")]
    scan_delta: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "AXIS")]
    scan_g: Option<String>,
    /// Lag axis in μs.
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "AXIS")]
    scan_tau: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "AXIS")]
    scan_loss: Option<String>,
    /// adjusted or raw.
    #[arg(long, global = true, allow_hyphen_values = true)]
    mode: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "T")]
    tau_max_us: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "N")]
    tau_points: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "T")]
    period_us: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "N")]
    pulses: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "ETA")]
    efficiency: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "T")]
    bin_us: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "T")]
    estimate_tau_max_us: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "PATH")]
    input: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "TOL")]
    g2_tolerance: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &'static str, Option<&str>)> {
        let f = &self.flags;
        vec![
            ("run", "out", self.out.as_deref()),
            ("run", "seed", self.seed.as_deref()),
            ("run", "angular", self.angular.then_some("true")),
            ("model", "g", f.g_mhz.as_deref()),
            ("model", "kappa", f.kappa_mhz.as_deref()),
            ("model", "gamma", f.gamma_mhz.as_deref()),
            ("model", "delta", f.delta_mhz.as_deref()),
            ("model", "fock_cutoff", f.fock_cutoff.as_deref()),
            ("model", "splitting", f.splitting.as_deref()),
            ("dqd", "epsilon", f.epsilon_mhz.as_deref()),
            ("dqd", "t", f.tunnel_mhz.as_deref()),
            ("dqd", "gamma_left", f.gamma_left_mhz.as_deref()),
            ("dqd", "gamma_right", f.gamma_right_mhz.as_deref()),
            ("scan", "delta", f.scan_delta.as_deref()),
            ("scan", "g", f.scan_g.as_deref()),
            ("scan", "tau", f.scan_tau.as_deref()),
            ("scan", "loss", f.scan_loss.as_deref()),
            ("scan", "mode", f.mode.as_deref()),
            ("lags", "max_us", f.tau_max_us.as_deref()),
            ("lags", "points", f.tau_points.as_deref()),
            ("protocol", "period_us", f.period_us.as_deref()),
            ("protocol", "pulses", f.pulses.as_deref()),
            ("protocol", "efficiency", f.efficiency.as_deref()),
            ("estimate", "bin_us", f.bin_us.as_deref()),
            ("estimate", "tau_max_us", f.estimate_tau_max_us.as_deref()),
            ("io", "input", f.input.as_deref()),
            ("tolerance", "g2_agreement", f.g2_tolerance.as_deref()),
        ]
    }

    /// The config file, if any, with flags applied on top.
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| CliError::ReadConfig { path: path.clone(), source })?;
                RunConfig::parse(&text).map_err(|source| CliError::ConfigFile { path: path.clone(), source })?
            }
            None => RunConfig::default(),
        };
        let mut flags = RunConfig::default();
        for (section, key, value) in self.overrides() {
            if let Some(v) = value {
                flags.set(section, key, v).map_err(CliError::Flag)?;
            }
        }
        cfg.merge(&flags);
        Ok(cfg)
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Errors are printed to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match cli.resolve().and_then(|cfg| execute(cli.command, &cfg)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("countstat {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_the_config() {
        let cli = Cli::try_parse_from(["countstat", "g2", "--g-mhz", "3", "--angular", "--seed", "9"]).unwrap();
        let cfg = cli.resolve().unwrap();
        assert_eq!(cfg.frequency("model", "g"), 3.0);
        assert_eq!(cfg.seed(), 9);
        assert_eq!(cli.command, Command::G2);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["countstat", "g2", "--no-such-flag"]), 1);
        assert_eq!(run(["countstat", "launch"]), 1);
        assert_eq!(run(["countstat", "g2", "--g-mhz", "ten"]), 1);
        assert_eq!(run(["countstat", "--help"]), 0);
    }

    #[test]
    fn every_command_has_a_distinct_name() {
        let mut names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), Command::ALL.len());
    }
}
