// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config file {path}: {source}")]
    ConfigFile { path: PathBuf, source: ConfigError },

    #[error("command-line option: {0}")]
    Flag(ConfigError),

    #[error("cannot read config file {path}: {source}")]
    ReadConfig { path: PathBuf, source: io::Error },

    #[error("{0}")]
    Invalid(String),

    #[error("cannot create output directory {path}: {source}")]
    OutputDir { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    WriteOutput { path: PathBuf, source: io::Error },

    #[error("cannot read input {path}: {source}")]
    ReadInput { path: PathBuf, source: io::Error },

    #[error("malformed input {path}: {source}")]
    ParseInput { path: PathBuf, source: countstat::Error },

    #[error("invalid parameters: {0}")]
    Parameters(countstat::Error),

    #[error("numeric failure: {0}")]
    Numeric(countstat::Error),

    /// A computed result broke a tolerance.
    #[error("tolerance breach: {0}")]
    Breach(String),
}

impl From<countstat::Error> for CliError {
    fn from(e: countstat::Error) -> Self {
        match e {
            countstat::Error::InvalidParameter(_) => CliError::Parameters(e),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    /// 1 for configuration and I/O problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) | CliError::Breach(_) => 2,
            _ => 1,
        }
    }
}
