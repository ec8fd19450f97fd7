//! Numerical laboratory for directed last-passage percolation with decaying
//! exponential parameters.
//!
//! The crate couples a seeded Monte Carlo simulator of the last-passage times
//! `G(m, n)` with independent evaluations of the correlation kernels and
//! Fredholm determinants describing their limits: Bessel (hard edge), Airy
//! and extended Airy kernels, the finite-N double contour integral kernel and
//! the limiting canonical-product kernels.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod lpp;
pub mod params;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use params::ParamSeq;
