//! Exact and empirical distributions of d-descents of permutations.
//!
//! A pair of positions `(i, j)` is a d-descent of `p` when `i < j <= i + d`
//! and `p_i > p_j`; `d = 1` gives classical descents, `d = n - 1` gives
//! inversions, and a per-position window vector generalizes both. This
//! crate computes:
//!
//! - the statistic and its closed-form combinatorics (eligible-pair counts,
//!   joint-expectation classes, exact rational mean and variance),
//! - exact distribution tables by parallel exhaustive enumeration, with
//!   independent oracles and structural checks,
//! - Monte Carlo normality diagnostics of the standardized statistic, and
//! - the dependency-graph certificate quantity whose vanishing yields
//!   asymptotic normality.

#![forbid(unsafe_code)]

pub mod cache;
pub mod dist;
pub mod error;
pub mod janson;
pub mod jsonio;
pub mod manifest;
pub mod mc;
pub mod normal;
pub mod perm;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use perm::{
    DescentSpec, MomentReport, MomentSource, PairClass, PairIndex, Permutation, Rational,
};
