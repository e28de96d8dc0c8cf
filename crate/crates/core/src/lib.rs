//! A simulation and verification laboratory for longest planar matchings in
//! ordered random bipartite graphs.
//!
//! The crate has three layers:
//!
//! * exact combinatorial solvers ([`solvers`]) for planar-matching size,
//!   longest increasing subsequences, longest common subsequences,
//!   maximum-weight planar matchings, and the relaxed (weak-column) height
//!   statistic, together with exhaustive oracles used by the test suite;
//! * random models ([`models`]) with deterministic per-trial randomness, the
//!   degree-based pruning and matching/permutation correspondence
//!   ([`reduction`]), closed-form bound evaluators ([`bounds`]), and the
//!   block-partition construction on concrete matchings ([`blocks`]);
//! * a reproducible Monte Carlo engine ([`montecarlo`]) whose aggregates are
//!   bit-identical for a fixed seed regardless of worker count.
//!
//! Scalar-valued evaluators are generic over the float type via [`Real`];
//! the [`Scalar`] alias fixes the concrete type used by the engine and CLI.

// Validation deliberately uses negated comparisons (`!(v > 0)`) so that NaN
// arguments are rejected rather than slipping through an inverted test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod bounds;
pub mod error;
mod fenwick;
pub mod models;
pub mod montecarlo;
pub mod reduction;
mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete scalar used by the Monte Carlo engine and the CLI.
pub type Scalar = f64;
