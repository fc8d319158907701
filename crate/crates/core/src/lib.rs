//! Exact combinatorics for bi-free probability.
//!
//! The crate covers the full pipeline from set partitions up to the
//! liberation map:
//!
//! * [`partitions`]: set partitions of `{1..n}`, refinement, meet/join and a
//!   generic Möbius function.
//! * [`bnc`]: χ-maps, the χ-order, χ-intervals and bi-non-crossing partitions.
//! * [`ncp`]: letters, words, moment tables and joint distributions.
//! * [`cumulants`]: bi-free and conditional cumulants and the (conditionally)
//!   bi-free product.
//! * [`vaccine`]: centring of maximal monochromatic χ-intervals, the vaccine
//!   property test and moment reconstruction from it.
//! * [`liberation`]: the taur map, tensor sums, the free liberation gradient,
//!   free unitary Brownian motion moments and the order-t liberation check.
//!
//! All arithmetic is exact ([`Rational`]) except floating evaluation of
//! unitary Brownian motion moments.

pub mod bnc;
pub mod cumulants;
mod error;
pub mod liberation;
mod memo;
pub mod ncp;
pub mod partitions;
pub mod rational;
pub mod spec_file;
pub mod vaccine;

pub use error::{Error, Result};
pub use rational::Rational;
