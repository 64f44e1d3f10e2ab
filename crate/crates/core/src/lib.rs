//! Invariant causal prediction.
//!
//! Given observations of a target and a set of predictors collected under
//! several environments, the search in [`engine`] returns the predictors whose
//! relationship with the target is invariant across environments, together
//! with confidence intervals for their coefficients. [`hidden`] extends the
//! search to hidden confounding, and [`sem`] simulates linear Gaussian
//! structural equation models with interventions for ground-truth checks.
//!
//! The crate is `no_std` (it needs `alloc`). The `std` feature is on by
//! default; `parallel` evaluates candidate sets of equal size with rayon.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// Numerical kernels index several arrays in lockstep, keep reference
// constants at full printed precision and use `!(x > 0.0)` to catch NaN.
#![allow(
    clippy::excessive_precision,
    clippy::inconsistent_digit_grouping,
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord
)]

extern crate alloc;

pub mod data;
pub mod engine;
pub mod error;
pub mod hidden;
pub mod invariance;
pub mod linalg;
pub mod seed;
pub mod sem;
pub mod stats;

pub use data::{Dataset, EnvironmentGrouping, RawTable, SplitOutcome};
pub use engine::{
    brute_force_oracle, confidence_intervals, preselect, run_icp, run_icp_robust, AcceptedSet, CoefInterval, IcpConfig,
    IcpResult, Method,
};
pub use error::{IcpError, Result};
pub use hidden::{
    hidden_invariance_test, hidden_set_test, run_hidden_icp, GridCentering, GridSpec, HiddenConfig, HiddenSetOutcome,
};
pub use invariance::{method1_test, method2_test, InvarianceTestResult};
pub use sem::{Draw, SemSpec};
