//! Limiting spectral laws of sums of products of non-Hermitian random
//! matrices, and Monte Carlo checks of them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod limits;
pub mod numerics;
pub mod rng;
pub mod spectra;
pub mod transforms;

pub use error::{Error, Result};
