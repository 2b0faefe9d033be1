//! Propagation for conjunctions of two overlapping `AllDifferent`
//! constraints.
//!
//! The crate provides, over one variable/value model:
//!
//! - [`decomp`]: a polynomial bound-consistency propagator for the
//!   conjunction, built as bounds propagation over a counter network plus a
//!   candidate-interval pass, together with a constructive simultaneous
//!   matching for interval domains;
//! - [`oracle`]: exhaustive reference procedures (matching search, Hall
//!   condition check, per-edge support, brute-force bound consistency) that
//!   everything fast is tested against;
//! - [`rules`]: an exponential domain-consistency reference propagator;
//! - [`alldiff`]: textbook single-constraint baselines;
//! - [`solver`]: a backtracking solver with pluggable propagation;
//! - [`gen`]: deterministic instance generators and named examples;
//! - [`format`]: the instance file format;
//! - [`bench`]: the benchmark harness behind the CLI.

pub mod alldiff;
pub mod bench;
pub mod decomp;
pub mod domain;
pub mod format;
pub mod gen;
pub mod instance;
pub mod oracle;
mod prng;
pub mod rules;
pub mod solver;

pub use domain::{Domain, IntervalDomain, SetDomain, Value, VarId};
pub use instance::{
    Block, InstanceError, OverlapInstance, PropStatus, PropagationOutcome, PruneEntry,
};
pub use oracle::{OracleError, SimMatching, SizeGuard};
