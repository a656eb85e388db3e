// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Unit conventions.
//!
//! Every frequency and rate inside the crate is an angular frequency in
//! rad/μs and every time is in μs. Experimental papers quote cavity-QED
//! parameters as `x/2π` in MHz (for example `κ/2π = 2.7 MHz`); use
//! [`from_mhz`] to convert such a figure into the internal unit.

use std::f64::consts::TAU;

/// Converts `f = x/2π` in MHz to the angular value `x` in rad/μs.
#[inline]
pub fn from_mhz(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

/// Inverse of [`from_mhz`].
#[inline]
pub fn to_mhz(angular: f64) -> f64 {
    angular / TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let k = from_mhz(2.7);
        assert!((k - 16.964_600_329_384_88).abs() < 1e-12);
        assert!((to_mhz(k) - 2.7).abs() < 1e-15);
    }
}
