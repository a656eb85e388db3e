// Copyright 2026 The countstat Authors
// SPDX-License-Identifier: Apache-2.0

//! Photon- and electron-counting statistics for a pulsed single-photon
//! cavity-QED source and a double quantum dot in the Coulomb-blockade regime.
//!
//! The crate builds Lindblad generators for both systems, shows that the
//! time-adjusted photon stream and the large-bias electron current are
//! described by the same two-state generator, and computes the statistics
//! that follow: `g²(τ)`, mean currents, zero-frequency noise and Fano
//! factors, higher cumulants from a counting field, and the extended
//! Leggett–Garg inequality. A quantum-jump simulator produces synthetic
//! detector records that close the loop against the analytic results.
//!
//! Units: all frequencies and rates are angular, in rad/μs; times are in μs.
//! See [`units`].
//!
//! ```
//! use countstat::models::{restricted_liouvillian, RestrictedParams, Splitting};
//! use countstat::statistics::{g2_analytic, g2_numeric};
//!
//! let p = RestrictedParams { delta: 0.0, g: 2.0, kappa: 1.0, splitting: Splitting::Half };
//! let bundle = restricted_liouvillian(&p)?;
//! let rho_ss = bundle.steady_state()?;
//! let tau = 0.7;
//! let numeric = g2_numeric(&bundle, &rho_ss, tau)?;
//! assert!((numeric - g2_analytic(p.g, p.kappa, tau)?).abs() < 1e-10);
//! # Ok::<(), countstat::Error>(())
//! ```

pub mod counting;
mod error;
pub mod linalg;
pub mod models;
pub mod statistics;
pub mod trajectory;
pub mod units;

pub use error::{Error, Result};

// The guide in `book/` is compiled as doctests so its listings cannot drift.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/equivalence.md")]
    mod equivalence {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    mod correlations {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/leggett_garg.md")]
    mod leggett_garg {}
    #[doc = include_str!("../../../book/src/trajectories.md")]
    mod trajectories {}
}
