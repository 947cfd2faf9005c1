//! Shallow ReLU networks, their effective-tuple parametrization, and the
//! generalized responses that close the search space.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: half-spaces, arrangement cells, hyperplane charts over boxes.
//! - [`response`]: network configurations, effective tuples, generalized responses.
//! - [`quadrature`]: measures with continuous densities, volume and surface rules,
//!   the error functional.
//! - [`landscape`]: losses, gradient-descent training, a brute-force oracle and
//!   divergence diagnostics.
//! - [`closure`]: diverging approximants of discontinuous responses and the
//!   κ-perturbation that strictly improves on them.
//! - [`cli`]: config-driven front end used by the `relu-lab` binary.
//!
//! With the default `parallel` feature, point evaluations are farmed out to
//! rayon. Summation always runs over fixed-size chunks in a fixed order, so
//! results are bit-identical with and without the feature.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closure;
pub mod config;
pub mod error;
pub mod geometry;
pub mod landscape;
pub mod par;
pub mod quadrature;
pub mod response;

pub use error::{Error, Result};
