use nalgebra::{dmatrix, DMatrix};
use serde::Serialize;

use crate::error::Result;
use crate::gramian::GramianCache;
use crate::lti::{unit_candidates, LtiSystem};
use crate::metrics::{eval_matrix, MetricKind, RankPolicy};

/// Reference gains `Δ(b₃|{b₁})`, `Δ(b₃|{b₁,b₂})`, `Δ(b₃|{b₂})`, three decimals.
pub const PRINTED_GAINS: [f64; 3] = [0.037, 0.033, 0.001];

/// Half a unit in the last printed decimal.
pub const PRINTED_GAIN_TOL: f64 = 0.0005;

/// Stable 3-state dynamics on which `λ_min` of the Gramian loses diminishing returns.
pub fn counterexample_dynamics() -> DMatrix<f64> {
    dmatrix![
        -8.0, 0.0, -2.0;
        0.0, -2.0, -8.0;
        7.0, 0.0, -3.0
    ]
}

/// The counterexample dynamics with candidates `b1 = e₁`, `b2 = e₂`, `b3 = e₃`.
pub fn counterexample_system() -> LtiSystem {
    system_with(counterexample_dynamics()).expect("counterexample dynamics are stable")
}

fn system_with(a: DMatrix<f64>) -> Result<LtiSystem> {
    let mut cands = unit_candidates(3, 3);
    for (i, c) in cands.iter_mut().enumerate() {
        c.id = format!("b{}", i + 1);
    }
    LtiSystem::new(a, DMatrix::zeros(3, 0), cands)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRecord {
    pub gain_b3_given_b1: f64,
    pub gain_b3_given_b1b2: f64,
    pub gain_b3_given_b2: f64,
    /// `Δ(b₃|{b₂}) < Δ(b₃|{b₁,b₂})` although `{b₂} ⊂ {b₁,b₂}`.
    pub violated: bool,
    /// `λ_min` of `W_{b1}`, `W_{b2}`, `W_{b1,b2}`, `W_{b1,b3}`, `W_{b2,b3}`, `W_{b1,b2,b3}`.
    pub lambda_min: [f64; 6],
    /// The same three gains formed from `λ_min` values rounded to three decimals first.
    pub gains_from_rounded_lambda: [f64; 3],
}

impl CounterexampleRecord {
    pub fn gains(&self) -> [f64; 3] {
        [self.gain_b3_given_b1, self.gain_b3_given_b1b2, self.gain_b3_given_b2]
    }

    /// Per-gain check against [`PRINTED_GAINS`] within [`PRINTED_GAIN_TOL`].
    pub fn gain_matches(&self) -> [bool; 3] {
        let g = self.gains();
        std::array::from_fn(|i| (g[i] - PRINTED_GAINS[i]).abs() <= PRINTED_GAIN_TOL)
    }

    pub fn matches_printed(&self) -> bool {
        self.violated && self.gain_matches().iter().all(|&ok| ok)
    }
}

/// `λ_min` marginal gains of `b₃` on the counterexample system (infinite-horizon Gramians).
pub fn counterexample_check() -> CounterexampleRecord {
    counterexample_check_with(counterexample_dynamics()).expect("counterexample dynamics are stable")
}

/// [`counterexample_check`] on other 3×3 dynamics with the same unit-vector candidates.
pub fn counterexample_check_with(a: DMatrix<f64>) -> Result<CounterexampleRecord> {
    let cache = GramianCache::build(system_with(a)?)?;
    let policy = RankPolicy::default();
    let lmin = |s: &[usize]| eval_matrix(&MetricKind::LambdaMin, &cache.sum_matrix(s), &policy).map(|v| v.get());
    let b1 = lmin(&[0])?;
    let b2 = lmin(&[1])?;
    let b12 = lmin(&[0, 1])?;
    let b13 = lmin(&[0, 2])?;
    let b23 = lmin(&[1, 2])?;
    let b123 = lmin(&[0, 1, 2])?;
    let g1 = b13 - b1;
    let g12 = b123 - b12;
    let g2 = b23 - b2;
    let r = |x: f64| (x * 1000.0).round() / 1000.0;
    Ok(CounterexampleRecord {
        gain_b3_given_b1: g1,
        gain_b3_given_b1b2: g12,
        gain_b3_given_b2: g2,
        violated: g2 < g12,
        lambda_min: [b1, b2, b12, b13, b23, b123],
        gains_from_rounded_lambda: [r(b13) - r(b1), r(b123) - r(b12), r(b23) - r(b2)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from SciPy solve_continuous_lyapunov
    const REFERENCE: [f64; 3] = [0.036928565442928, 0.032485377482840, 0.001067861381785];

    #[test]
    fn gains_match_reference_solve() {
        let rec = counterexample_check();
        for (got, want) in rec.gains().iter().zip(REFERENCE) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(rec.violated);
        // the diminishing-returns instance {b1} ⊂ {b1, b2} holds
        assert!(rec.gain_b3_given_b1 >= rec.gain_b3_given_b1b2);
    }

    #[test]
    fn rounded_lambdas_reproduce_printed_gains() {
        let rec = counterexample_check();
        for (got, want) in rec.gains_from_rounded_lambda.iter().zip(PRINTED_GAINS) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn lambda_of_single_b2_is_zero() {
        // (A, e₂) only reaches the second state
        let rec = counterexample_check();
        assert!(rec.lambda_min[1].abs() < 1e-15);
    }

    #[test]
    fn tampered_dynamics_do_not_match() {
        let mut a = counterexample_dynamics();
        a[(2, 0)] = 1.0;
        let rec = counterexample_check_with(a).unwrap();
        assert!(!rec.matches_printed());
    }
}
