// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-dimensional parameter scans of the photon Fano factor and of the
//! Leggett–Garg ratio.

use std::io::{self, Write};

use rayon::prelude::*;

use super::lg::{lg_adjusted, lg_raw, lg_raw_curve, max_ratio};
use super::noise::fano_photon_numeric;
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::models::{CavityParams, RestrictedParams, Splitting};

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("axis values must be finite and non-empty"));
        }
        Ok(Self { name: name.into(), unit: unit.into(), values })
    }

    /// `points` evenly spaced values from `min` to `max` inclusive.
    pub fn linspace(
        name: impl Into<String>,
        unit: impl Into<String>,
        min: f64,
        max: f64,
        points: usize,
    ) -> Result<Self> {
        if points < 2 {
            return Err(Error::param(format!("an axis needs at least 2 points, got {points}")));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::param(format!("bad axis range [{min}, {max}]")));
        }
        let step = (max - min) / (points - 1) as f64;
        let values = (0..points)
            .map(|k| if k + 1 == points { max } else { min + step * k as f64 })
            .collect();
        Self::new(name, unit, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Scalar results on an `x × y` grid, stored row by row (`y` outer).
#[derive(Clone, Debug, PartialEq)]
pub struct ScanGrid {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub values: Vec<f64>,
    /// Fixed parameters of the scan as `(name, value)` pairs.
    pub meta: Vec<(String, String)>,
}

impl ScanGrid {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.x_axis.len() + ix]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cells with value above `threshold`, grouped into 4-connected regions.
    pub fn regions_above(&self, threshold: f64) -> Vec<Vec<(usize, usize)>> {
        let (nx, ny) = (self.x_axis.len(), self.y_axis.len());
        let mut seen = vec![false; nx * ny];
        let mut regions = Vec::new();
        for start in 0..nx * ny {
            if seen[start] || !(self.values[start] > threshold) {
                continue;
            }
            let mut region = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                let (ix, iy) = (k % nx, k / nx);
                region.push((ix, iy));
                let mut visit = |jx: usize, jy: usize| {
                    let j = jy * nx + jx;
                    if !seen[j] && self.values[j] > threshold {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if ix > 0 {
                    visit(ix - 1, iy);
                }
                if ix + 1 < nx {
                    visit(ix + 1, iy);
                }
                if iy > 0 {
                    visit(ix, iy - 1);
                }
                if iy + 1 < ny {
                    visit(ix, iy + 1);
                }
            }
            regions.push(region);
        }
        regions
    }

    /// Long-format CSV: a column header `x,y,value` then one row per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{},{},value", self.x_axis.name, self.y_axis.name)?;
        for (iy, y) in self.y_axis.values.iter().enumerate() {
            for (ix, x) in self.x_axis.values.iter().enumerate() {
                writeln!(w, "{x},{y},{}", self.get(ix, iy))?;
            }
        }
        Ok(())
    }
}

/// What a [`violation_map`] computes in each cell.
#[derive(Clone, Debug, PartialEq)]
pub enum ScanSpec {
    /// Numeric photon Fano factor over detuning (x) and coupling (y).
    Fano { kappa: f64, splitting: Splitting, delta: Axis, g: Axis },
    /// Stationary time-adjusted ratio over detuning (x) and lag (y).
    Adjusted { g: f64, kappa: f64, splitting: Splitting, delta: Axis, tau: Axis },
    /// Raw ratio from `|g,1⟩` over lag (x) and detuning (y).
    RawTauDelta { g: f64, kappa: f64, gamma: f64, tau: Axis, delta: Axis },
    /// Largest raw ratio over `τ = dt … steps·dt` for each cavity (x) and
    /// atomic (y) loss rate.
    RawLosses { g: f64, delta: f64, kappa: Axis, gamma: Axis, dt: f64, steps: usize },
}

impl ScanSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ScanSpec::Fano { .. } => "fano",
            ScanSpec::Adjusted { .. } => "adjusted",
            ScanSpec::RawTauDelta { .. } => "raw-tau-delta",
            ScanSpec::RawLosses { .. } => "raw-losses",
        }
    }
}

fn photon_state(p: &CavityParams) -> DensityMatrix {
    DensityMatrix::basis(p.dim(), p.index(false, 1))
}

/// Largest raw ratio over `τ = dt … steps·dt`, starting from `|g,1⟩`.
pub fn raw_max_ratio(p: &CavityParams, dt: f64, steps: usize) -> Result<f64> {
    let curve = lg_raw_curve(p, &photon_state(p), dt, steps)?;
    Ok(max_ratio(&curve).map_or(0.0, |r| r.ratio))
}

/// Evaluates `spec` on every cell in parallel. Cell order in the result does
/// not depend on scheduling.
pub fn violation_map(spec: &ScanSpec) -> Result<ScanGrid> {
    let (x_axis, y_axis, meta) = match spec {
        ScanSpec::Fano { kappa, splitting, delta, g } => {
            (delta.clone(), g.clone(), vec![kv("kappa", kappa), ("splitting".into(), splitting.name().into())])
        }
        ScanSpec::Adjusted { g, kappa, splitting, delta, tau } => (
            delta.clone(),
            tau.clone(),
            vec![kv("g", g), kv("kappa", kappa), ("splitting".into(), splitting.name().into())],
        ),
        ScanSpec::RawTauDelta { g, kappa, gamma, tau, delta } => {
            (tau.clone(), delta.clone(), vec![kv("g", g), kv("kappa", kappa), kv("gamma", gamma)])
        }
        ScanSpec::RawLosses { g, delta, kappa, gamma, dt, steps } => (
            kappa.clone(),
            gamma.clone(),
            vec![kv("g", g), kv("delta", delta), kv("dt", dt), ("steps".into(), steps.to_string())],
        ),
    };
    let nx = x_axis.len();
    let cell = |k: usize| -> Result<f64> {
        let (x, y) = (x_axis.values[k % nx], y_axis.values[k / nx]);
        match spec {
            ScanSpec::Fano { kappa, splitting, .. } => {
                let p = RestrictedParams { delta: x, g: y, kappa: *kappa, splitting: *splitting };
                Ok(fano_photon_numeric(&p)?.value)
            }
            ScanSpec::Adjusted { g, kappa, splitting, .. } => {
                let p = RestrictedParams { delta: x, g: *g, kappa: *kappa, splitting: *splitting };
                Ok(lg_adjusted(&p, y)?.ratio)
            }
            ScanSpec::RawTauDelta { g, kappa, gamma, .. } => {
                let p = CavityParams::new(*g, *kappa, *gamma, y);
                Ok(lg_raw(&p, &photon_state(&p), x)?.ratio)
            }
            ScanSpec::RawLosses { g, delta, dt, steps, .. } => {
                raw_max_ratio(&CavityParams::new(*g, x, y, *delta), *dt, *steps)
            }
        }
    };
    let values = (0..nx * y_axis.len()).into_par_iter().map(cell).collect::<Result<Vec<_>>>()?;
    Ok(ScanGrid { x_axis, y_axis, values, meta })
}

fn kv(name: &str, value: &f64) -> (String, String) {
    (name.to_string(), value.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VrsScan {
    pub grid: ScanGrid,
    /// Loss rate on the `κ = γ` line where the largest raw ratio equals 1.
    pub threshold: Option<f64>,
    /// `4g/(κ + γ)` at that point.
    pub vrs_at_threshold: Option<f64>,
}

/// Raw-ratio map over `κ` and `γ` (both on `losses`) at zero detuning, and
/// the ratio = 1 crossing along the diagonal, refined by bisection.
pub fn vrs_threshold_scan(g: f64, losses: &Axis, dt: f64, steps: usize) -> Result<VrsScan> {
    let kappa = Axis { name: "kappa".into(), ..losses.clone() };
    let gamma = Axis { name: "gamma".into(), ..losses.clone() };
    let grid = violation_map(&ScanSpec::RawLosses { g, delta: 0.0, kappa, gamma, dt, steps })?;
    let on_diagonal = |x: f64| raw_max_ratio(&CavityParams::new(g, x, x, 0.0), dt, steps);

    let n = losses.len();
    let mut threshold = None;
    for k in 0..n.saturating_sub(1) {
        let (a, b) = (grid.get(k, k) - 1.0, grid.get(k + 1, k + 1) - 1.0);
        if a.signum() != b.signum() {
            let (mut lo, mut hi) = (losses.values[k], losses.values[k + 1]);
            let mut f_lo = a;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let f_mid = on_diagonal(mid)? - 1.0;
                if f_mid.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
                if (hi - lo).abs() <= 1e-10 * hi.abs() {
                    break;
                }
            }
            threshold = Some(0.5 * (lo + hi));
            break;
        }
    }
    Ok(VrsScan {
        grid,
        threshold,
        vrs_at_threshold: threshold.map(|k| 4.0 * g / (2.0 * k)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let a = Axis::linspace("x", "1", -1.0, 1.0, 5).unwrap();
        assert_eq!(a.values, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(Axis::linspace("x", "1", 0.0, 1.0, 1).is_err());
        assert!(Axis::linspace("x", "1", 1.0, 0.0, 3).is_err());
    }

    #[test]
    fn regions_are_four_connected() {
        let ax = |n| Axis::linspace("a", "1", 0.0, 1.0, n).unwrap();
        #[rustfmt::skip]
        let values = vec![
            2.0, 0.0, 2.0,
            2.0, 0.0, 0.0,
            0.0, 0.0, 2.0,
        ];
        let g = ScanGrid { x_axis: ax(3), y_axis: ax(3), values, meta: vec![] };
        let mut sizes: Vec<usize> = g.regions_above(1.0).iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2]);
    }

    #[test]
    fn zero_coupling_rows_are_zero() {
        let spec = ScanSpec::Fano {
            kappa: 1.0,
            splitting: Splitting::Quarter,
            delta: Axis::linspace("delta", "rad/us", -3.0, 3.0, 4).unwrap(),
            g: Axis::new("g", "rad/us", vec![0.0]).unwrap(),
        };
        assert!(violation_map(&spec).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn csv_layout() {
        let g = ScanGrid {
            x_axis: Axis::new("x", "1", vec![1.0, 2.0]).unwrap(),
            y_axis: Axis::new("y", "1", vec![5.0]).unwrap(),
            values: vec![0.25, -1.0],
            meta: vec![],
        };
        let mut out = Vec::new();
        g.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,y,value\n1,5,0.25\n2,5,-1\n");
    }
}
