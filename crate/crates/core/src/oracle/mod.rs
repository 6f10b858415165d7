//! Ground truth for the selection pipeline: exhaustive enumeration, quadrature Gramians,
//! sampled and exhaustive diminishing-returns checks, ray-derivative probes, and the
//! `λ_min` counterexample.

mod brute;
mod counterexample;
mod quadrature;
mod ray;
mod sampler;

pub use brute::{binomial, brute_force, BruteSummary, ScoreTable, ENUMERATION_LIMIT};
pub use counterexample::{
    counterexample_check, counterexample_check_with, counterexample_dynamics, counterexample_system,
    CounterexampleRecord, PRINTED_GAINS, PRINTED_GAIN_TOL,
};
pub use quadrature::{h2_quadrature, quadrature_gramian, quadrature_gramian_on, quadrature_horizon};
pub use ray::{probe_passes, ray_monotonicity_probe, RAY_SLACK, RAY_STEP};
pub use sampler::{
    exhaustive_triples, submodularity_sampler, Violation, ViolationReport, VIOLATION_TOL,
};
