//! Computable set-valued and fuzzy set-valued stochastic analysis.
//!
//! The crate provides, bottom up:
//!
//! - [`geometry`]: compact convex subsets of R^d in a dual support-vector /
//!   vertex representation, with Minkowski arithmetic, grid Hausdorff
//!   distances, and an exact polygon oracle for d <= 2;
//! - [`fuzzy`]: fuzzy sets as nested α-cut stacks with levelwise
//!   arithmetic, the d∞ metric, and the isometric support-function
//!   embedding together with point-evaluation functionals on its image;
//! - [`randomsets`]: random fuzzy sets on finite probability spaces —
//!   Aumann expectation by weighted Minkowski sums, selections and
//!   separating functionals, an extreme-selection enumerator, and the
//!   singleton-almost-everywhere detector;
//! - [`processes`]: seeded Wiener paths, Gaussian fuzzy random variables
//!   via the mean-plus-Gaussian-shift decomposition, the degenerate fuzzy
//!   Brownian motion `1_{b_t}`, and its shift / rescaling / translation /
//!   time-inversion transforms;
//! - [`verify`]: Monte Carlo estimators with standard errors and the
//!   statistical suites that confirm the Brownian covariance structure and
//!   the collapse of every α-cut to a random point — and that detect the
//!   failure of both for translated processes;
//! - [`selftest`]: exact algebraic invariant suites over randomized
//!   instances, used by the CLI self-test.
//!
//! All types are immutable after validated construction and safe to share
//! across threads; every stochastic routine is deterministic given its
//! seed (and worker count, where estimation is parallelized).

pub mod error;
pub mod fuzzy;
pub mod geometry;
pub mod instances;
pub mod processes;
pub mod randomsets;
pub mod rng;
pub mod selftest;
pub mod verify;

pub use error::{Error, Result};
