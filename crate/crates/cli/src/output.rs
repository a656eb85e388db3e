// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Output files: a `# key=value` header block followed by the body.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header lines shared by every file a command writes: tool version,
/// command, seed and the effective configuration.
pub fn header(cfg: &RunConfig, command: &str, extra: &[(&str, String)]) -> Vec<u8> {
    let mut lines = vec![
        format!("tool=countstat {VERSION}"),
        format!("command={command}"),
        format!("seed={}", cfg.seed()),
    ];
    lines.extend(cfg.snapshot());
    lines.extend(extra.iter().map(|(k, v)| format!("{k}={v}")));
    let mut out = Vec::new();
    for l in lines {
        out.extend_from_slice(b"# ");
        out.extend_from_slice(l.as_bytes());
        out.push(b'\n');
    }
    out
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::OutputDir { path: dir.to_path_buf(), source })
}

pub fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::WriteOutput { path: path.clone(), source })?;
    log::info!("wrote {}", path.display());
    Ok(path)
}
