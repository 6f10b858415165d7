//! Actuator selection for linear dynamical networks.
//!
//! Given stable dynamics `ẋ = A x + B u` and a pool of candidate input columns, choose `k`
//! columns that maximize a scalar metric of the controllability Gramian. The trace is modular
//! and `log det W` and `rank W` are submodular, so greedy selection carries the
//! `1 − ((k−1)/k)^k` guarantee for them. `λ_min` is not submodular (see
//! [`oracle::counterexample_check`]), and `−tr W⁻¹` has sampled violations of diminishing returns.
//!
//! Modules:
//! - [`lti`]: systems, candidate pools, file formats, random stable instances
//! - [`gramian`]: Lyapunov and finite-horizon Gramians, per-candidate caches, minimum-energy inputs
//! - [`metrics`]: metric evaluation with explicit numerical-rank handling
//! - [`greedy`]: plain, two-stage and lazy greedy selection with bounds
//! - [`oracle`]: exhaustive search, quadrature, diminishing-returns checks

// `!(x < y)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gramian;
pub mod greedy;
pub mod lti;
pub mod metrics;
pub mod oracle;

pub use error::{Error, Result};
pub use gramian::{Gramian, GramianCache, Horizon};
pub use greedy::{SelectionProblem, SelectionResult};
pub use lti::{CandidateActuator, LtiSystem};
pub use metrics::{MetricKind, MetricValue, RankPolicy};
