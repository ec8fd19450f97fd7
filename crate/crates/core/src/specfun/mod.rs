//! Entire-function primitives and the classical special functions.

mod airy;
mod bessel;
mod entire;

pub use airy::{airy, airy_pair, AIRY_RANGE};
pub use bessel::{bessel_j, bessel_j_pair, bessel_j_prime, BESSEL_NU_MAX, BESSEL_X_MAX};
pub use entire::{canonical_product, h_m, h_sum, primary_factor_log, CanonicalProduct, ProductValue};
