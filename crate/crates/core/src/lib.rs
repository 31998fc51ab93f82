//! Statistics of neural response matrices.
//!
//! A response matrix holds one row per stimulus and one column per neuron.
//! Columns are single-neuron response profiles (selectivity), rows are
//! population responses to one stimulus (sparseness). This crate provides:
//!
//! - [`matrix`]: the [`ResponseMatrix`] model, per-neuron normalization,
//!   dead-neuron removal, seeded subsampling and the reshuffled null.
//! - [`moments`]: excess kurtosis per column or row and the resampling grid.
//! - [`tail`]: maximum-likelihood generalized Pareto fits of upper tails.
//! - [`dimension`]: PCA spectra, reshuffle-null intrinsic dimensionality,
//!   dimensionality surfaces.
//! - [`asymptotic`]: the saturating curve model, restart-based fitting and
//!   two-stage extrapolation of a dimensionality surface.
//! - [`synthetic`]: seeded generators with analytically known answers.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, exports and
//! the command-line front-end live in the `nrstat` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotic;
pub mod dimension;
mod error;
pub mod linalg;
pub mod matrix;
pub mod moments;
mod optim;
pub mod rng;
pub mod stats;
pub mod synthetic;
pub mod tail;

pub use error::{Error, Result};
pub use matrix::{ResponseMatrix, ShuffleMode, SubsampleSpec};

/// Which vectors of a matrix a statistic runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Axis {
    /// One value per column: single-neuron selectivity.
    Neuron,
    /// One value per row: population sparseness.
    Image,
}

impl core::fmt::Display for Axis {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Axis::Neuron => f.write_str("neuron"),
            Axis::Image => f.write_str("image"),
        }
    }
}
