//! Valuation and exposure management for European derivatives on a single
//! underlying.
//!
//! Two probability distributions for the final asset price drive everything:
//! the market-implied one, which reproduces current prices, and a subjective
//! one, which encodes the holder's own beliefs. Instruments are valued under
//! both, the difference between the two portfolio values is maximized, and
//! risk is controlled through the family of loss moments
//! `rho_j = E[max(-L, 0)^j]` under the subjective view.
//!
//! Because every `rho_j` is homogeneous of degree `j` in the contract counts,
//! the search runs over exposure directions on the unit hypersphere; the
//! feasible radius along each direction follows in closed form.
//!
//! The crate is `no_std` and needs only `alloc`.
//!
//! - [`dist`]: uncertain-variance log-return distribution and price grids.
//! - [`pricing`]: payoffs, instrument values, portfolio values.
//! - [`risk`]: profit/loss at expiry and the risk measures.
//! - [`exposure`]: hyperspherical coordinates, max exposure and the scan.

#![no_std]
#![deny(unsafe_code)]
// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dist;
pub mod error;
pub mod exposure;
pub mod pricing;
pub mod quadrature;
pub mod risk;

pub use error::{Error, Result};
