//! Special functions: Airy Ai / Ai' and Gauss-Legendre quadrature.
//!
//! Everything downstream that integrates deterministically (the Fredholm
//! engine, the crossover kernel, the Tracy-Widom layer) is built on these
//! two primitives.

mod airy;
mod dd;
mod gauss;

pub use airy::{
    airy_ai, airy_ai_prime, detail, AIRY_ABS_TOL, AIRY_REL_TOL, AIRY_SUPPORTED_RANGE,
    OVERLAP_ABS_TOL, OVERLAP_BAND_HALFWIDTH, SERIES_ASYMPTOTIC_SWITCH,
};
pub(crate) use airy::{ai_prime_unchecked, ai_unchecked};
pub use gauss::{
    gauss_legendre, QuadratureRule, DEGREE_EXACTNESS_REL_TOL, MAX_NODES, NODE_NEWTON_TOL,
    WEIGHT_SUM_REL_TOL,
};
