// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Correlations, currents, noise, cumulants and the Leggett–Garg inequality.

mod fcs;
mod g2;
mod lg;
mod noise;
pub mod quad;
mod scan;
mod transport;

pub use fcs::fcs_cumulants;
pub use g2::{g2_analytic, g2_curve, g2_numeric, G2Curve, JumpCorrelator};
pub use lg::{
    classical_bound_scan, lg_adjusted, lg_adjusted_curve, lg_bound_check, lg_raw, lg_raw_curve,
    max_ratio, LgBoundReport, LgResult,
};
pub use noise::{
    excess_correlation_integral, fano_photon_analytic, fano_photon_numeric, fano_zero_crossing,
    photon_noise_spectrum, ExcessIntegral,
};
pub use scan::{raw_max_ratio, violation_map, vrs_threshold_scan, Axis, ScanGrid, ScanSpec, VrsScan};
pub use transport::{dqd_current_analytic, fano_electron_analytic, FanoKind, FanoResult};
