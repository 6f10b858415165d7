//! Greedy actuator selection under a cardinality budget.
//!
//! Starting from the empty set, each iteration adds the candidate with the largest marginal
//! gain `Δ(a|S) = f(S ∪ {a}) − f(S)`, ties going to the lowest candidate index. Gains are
//! extended reals: a move between two `-∞` values counts as 0, and a move from `-∞` to a finite
//! value counts as `+∞`.
//!
//! Strict metrics (`-tr W⁻¹`, `log det`) cannot tell uncontrollable sets apart, so
//! [`two_stage_greedy`] first builds rank, breaking rank ties with a pseudo-inverse surrogate,
//! and only then switches to the target metric.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramian::GramianCache;
use crate::metrics::{eval_matrix, eval_with_rank, numerical_rank, MetricKind, MetricValue, RankPolicy};

/// `1 − ((k−1)/k)^k`, the worst-case ratio of greedy to optimal for monotone, normalized,
/// non-negative submodular functions.
pub fn greedy_bound(k: usize) -> f64 {
    assert!(k >= 1, "budget must be positive");
    let k = k as f64;
    1.0 - ((k - 1.0) / k).powf(k)
}

#[derive(Debug, Clone)]
pub struct SelectionProblem<'a> {
    pub cache: &'a GramianCache,
    pub metric: MetricKind,
    pub k: usize,
    pub policy: RankPolicy,
    pub two_stage: bool,
}

impl<'a> SelectionProblem<'a> {
    pub fn new(cache: &'a GramianCache, metric: MetricKind, k: usize) -> Result<Self> {
        if k == 0 || k > cache.len() {
            return Err(Error::InvalidArgument(format!(
                "budget k = {k} must lie in 1..={}",
                cache.len()
            )));
        }
        Ok(Self { cache, metric, k, policy: RankPolicy::default(), two_stage: false })
    }

    pub fn with_policy(mut self, policy: RankPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_two_stage(mut self, two_stage: bool) -> Self {
        self.two_stage = two_stage;
        self
    }

    fn eval(&self, metric: &MetricKind, w: &DMatrix<f64>) -> Result<MetricValue> {
        eval_matrix(metric, w, &self.policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    /// Plain greedy on the requested metric.
    Greedy,
    /// Rank-building phase of the two-stage algorithm.
    Rank,
    /// Target-metric phase of the two-stage algorithm.
    Target,
}

/// One greedy iteration. `gain` is measured in the objective of `stage` (rank during the rank
/// phase); `value` is always the requested metric after the choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub id: String,
    pub index: usize,
    pub stage: Stage,
    pub gain: MetricValue,
    pub value: MetricValue,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub metric: String,
    pub selected: Vec<String>,
    pub indices: Vec<usize>,
    pub value: MetricValue,
    pub trace: Vec<IterationRecord>,
    pub theoretical_ratio: f64,
    pub guarantee: String,
    pub certified_upper_bound: Option<MetricValue>,
    pub controllable: bool,
    pub rank: usize,
    pub evaluations: usize,
    pub warnings: Vec<String>,
}

/// Plain or two-stage greedy, depending on `problem.two_stage`.
pub fn select(problem: &SelectionProblem) -> Result<SelectionResult> {
    if problem.two_stage {
        two_stage_greedy(problem)
    } else {
        greedy_select(problem)
    }
}

/// Plain greedy on `problem.metric` for exactly `k` iterations.
pub fn greedy_select(problem: &SelectionProblem) -> Result<SelectionResult> {
    let mut run = Run::new(problem);
    run.target_phase(problem.k, Stage::Greedy, false)?;
    run.finish()
}

/// Rank first (ties by the metric's pseudo-inverse surrogate, then lowest index) until the
/// Gramian has full numerical rank, then greedy on the target metric for the remaining budget.
pub fn two_stage_greedy(problem: &SelectionProblem) -> Result<SelectionResult> {
    two_stage(problem, false)
}

/// Lazy evaluation of the same greedy rule: stale gains are upper bounds by diminishing
/// returns, so only candidates whose bound can still win are re-evaluated. Produces the same
/// selection as [`select`] with fewer metric evaluations.
pub fn lazy_greedy(problem: &SelectionProblem) -> Result<SelectionResult> {
    if !problem.metric.supports_lazy() {
        return Err(Error::UnsupportedMetric(problem.metric.name().into()));
    }
    if problem.two_stage {
        return two_stage(problem, true);
    }
    let mut run = Run::new(problem);
    run.target_phase(problem.k, Stage::Greedy, true)?;
    run.finish()
}

fn two_stage(problem: &SelectionProblem, lazy: bool) -> Result<SelectionResult> {
    let secondary = problem
        .metric
        .rank_stage_secondary()
        .ok_or_else(|| Error::UnsupportedMetric(problem.metric.name().into()))?;
    let mut run = Run::new(problem);
    run.rank_phase(&secondary)?;
    let remaining = problem.k - run.selected.len();
    run.target_phase(remaining, Stage::Target, lazy)?;
    run.finish()
}

/// Upper bound on the optimum from submodularity and monotonicity:
/// `f(OPT) ≤ f(S) + Σ (k largest Δ(a|S))`. Stored into `result`.
pub fn certified_gap(result: &mut SelectionResult, problem: &SelectionProblem) -> Result<MetricValue> {
    if !problem.metric.is_submodular() {
        return Err(Error::UnsupportedMetric(problem.metric.name().into()));
    }
    let cache = problem.cache;
    // ascending order, so the value matches any other evaluation of the same set bit for bit
    let mut sorted = result.indices.clone();
    sorted.sort_unstable();
    let w = cache.sum_matrix(&sorted);
    let value = problem.eval(&problem.metric, &w)?;
    if !value.is_finite() {
        return Err(Error::BoundUnavailable);
    }
    let rest: Vec<usize> = (0..cache.len()).filter(|i| !result.indices.contains(i)).collect();
    let values = rest
        .par_iter()
        .map(|&a| problem.eval(&problem.metric, &(&w + cache.candidate(a).matrix())))
        .collect::<Result<Vec<_>>>()?;
    let mut gains = Vec::with_capacity(values.len());
    for v in values {
        if !v.is_finite() {
            return Err(Error::BoundUnavailable);
        }
        gains.push((v.get() - value.get()).max(0.0));
    }
    gains.sort_by(|a, b| b.total_cmp(a));
    let bound = value.get() + gains.iter().take(problem.k).sum::<f64>();
    let bound = MetricValue::finite(bound);
    result.certified_upper_bound = Some(bound);
    Ok(bound)
}

struct Run<'p, 'a> {
    problem: &'p SelectionProblem<'a>,
    selected: Vec<usize>,
    in_set: Vec<bool>,
    w: DMatrix<f64>,
    value: MetricValue,
    trace: Vec<IterationRecord>,
    evaluations: usize,
}

impl<'p, 'a> Run<'p, 'a> {
    fn new(problem: &'p SelectionProblem<'a>) -> Self {
        let w = problem.cache.base().matrix().clone();
        Self {
            problem,
            selected: Vec::with_capacity(problem.k),
            in_set: vec![false; problem.cache.len()],
            w,
            value: MetricValue::NEG_INFINITY,
            trace: Vec::with_capacity(problem.k),
            evaluations: 0,
        }
    }

    fn with(&self, a: usize) -> DMatrix<f64> {
        &self.w + self.problem.cache.candidate(a).matrix()
    }

    fn remaining(&self) -> Vec<usize> {
        (0..self.in_set.len()).filter(|&i| !self.in_set[i]).collect()
    }

    fn rank(&self) -> Result<usize> {
        numerical_rank(&self.w, &self.problem.policy)
    }

    fn accept(&mut self, a: usize, stage: Stage, gain: MetricValue, value: Option<MetricValue>) -> Result<()> {
        self.w += self.problem.cache.candidate(a).matrix();
        self.in_set[a] = true;
        self.selected.push(a);
        self.value = match value {
            Some(v) => v,
            None => self.problem.eval(&self.problem.metric, &self.w)?,
        };
        let rank = self.rank()?;
        self.trace.push(IterationRecord {
            id: self.problem.cache.system().id(a).to_owned(),
            index: a,
            stage,
            gain,
            value: self.value,
            rank,
        });
        Ok(())
    }

    /// Evaluates `metric` on `S ∪ {a}` for every remaining `a`, in candidate order.
    fn evaluate_all(&mut self, metric: &MetricKind, candidates: &[usize]) -> Result<Vec<MetricValue>> {
        self.evaluations += candidates.len();
        let this = &*self;
        candidates
            .par_iter()
            .map(|&a| this.problem.eval(metric, &this.with(a)))
            .collect()
    }

    fn rank_phase(&mut self, secondary: &MetricKind) -> Result<()> {
        let n = self.problem.cache.n();
        let mut rank = self.rank()?;
        self.value = self.problem.eval(&self.problem.metric, &self.w)?;
        while rank < n && self.selected.len() < self.problem.k {
            let candidates = self.remaining();
            self.evaluations += candidates.len();
            let this = &*self;
            let keys: Vec<(usize, MetricValue)> = candidates
                .par_iter()
                .map(|&a| eval_with_rank(secondary, &this.with(a), &this.problem.policy))
                .collect::<Result<_>>()?;
            let mut best: Option<(usize, (usize, MetricValue))> = None;
            for (&a, &key) in candidates.iter().zip(&keys) {
                if best.as_ref().is_none_or(|(_, b)| key > *b) {
                    best = Some((a, key));
                }
            }
            let (a, (new_rank, _)) = best.expect("budget below candidate count");
            let gain = MetricValue::finite((new_rank - rank) as f64);
            self.accept(a, Stage::Rank, gain, None)?;
            rank = new_rank;
        }
        Ok(())
    }

    fn target_phase(&mut self, budget: usize, stage: Stage, lazy: bool) -> Result<()> {
        if budget == 0 {
            return Ok(());
        }
        self.value = self.problem.eval(&self.problem.metric, &self.w)?;
        if lazy {
            self.lazy_phase(budget, stage)
        } else {
            for _ in 0..budget {
                let candidates = self.remaining();
                let values = self.evaluate_all(&self.problem.metric.clone(), &candidates)?;
                let (a, gain, value) = self.argmax(&candidates, &values);
                self.accept(a, stage, gain, Some(value))?;
            }
            Ok(())
        }
    }

    // lowest index wins ties: only a strictly larger gain replaces the incumbent
    fn argmax(&self, candidates: &[usize], values: &[MetricValue]) -> (usize, MetricValue, MetricValue) {
        let mut best = (candidates[0], MetricValue::gain(self.value, values[0]), values[0]);
        for (j, &a) in candidates.iter().enumerate().skip(1) {
            let g = MetricValue::gain(self.value, values[j]);
            if g > best.1 {
                best = (a, g, values[j]);
            }
        }
        best
    }

    fn lazy_phase(&mut self, budget: usize, stage: Stage) -> Result<()> {
        let metric = self.problem.metric.clone();
        let mut heap: BinaryHeap<LazyEntry> = BinaryHeap::new();
        // heap holds valid bounds only once they were computed at a finite f(S)
        let mut bounds_valid = false;
        // stale gains bound fresh ones only under diminishing returns; surrogates and -tr W⁻¹
        // (which can violate it) re-evaluate every round
        let reuse = metric.is_submodular() && !matches!(metric, MetricKind::TraceInverse);
        for round in 0..budget {
            if !self.value.is_finite() || !bounds_valid {
                let candidates = self.remaining();
                let values = self.evaluate_all(&metric, &candidates)?;
                let (a, gain, value) = self.argmax(&candidates, &values);
                if self.value.is_finite() {
                    heap = candidates
                        .iter()
                        .zip(&values)
                        .filter(|(&c, _)| c != a)
                        .map(|(&c, &v)| LazyEntry::new(c, MetricValue::gain(self.value, v), v, round))
                        .collect();
                    bounds_valid = reuse;
                }
                self.accept(a, stage, gain, Some(value))?;
                continue;
            }
            let chosen = loop {
                let top = heap.pop().expect("budget below candidate count");
                if top.round != round {
                    let v = self.problem.eval(&metric, &self.with(top.index))?;
                    self.evaluations += 1;
                    heap.push(LazyEntry::new(top.index, MetricValue::gain(self.value, v), v, round));
                    continue;
                }
                // refresh stale bounds that sit within noise of the fresh leader
                let slack = 1e-9 * top.gain.get().abs().max(1.0);
                let mut parked = Vec::new();
                let mut restart = false;
                while let Some(next) = heap.peek() {
                    if next.gain.get() < top.gain.get() - slack {
                        break;
                    }
                    let next = heap.pop().unwrap();
                    if next.round == round {
                        parked.push(next);
                    } else {
                        let v = self.problem.eval(&metric, &self.with(next.index))?;
                        self.evaluations += 1;
                        let fresh = LazyEntry::new(next.index, MetricValue::gain(self.value, v), v, round);
                        let beats = fresh > top;
                        heap.push(fresh);
                        if beats {
                            restart = true;
                            break;
                        }
                    }
                }
                heap.extend(parked);
                if restart {
                    heap.push(top);
                    continue;
                }
                match heap.peek() {
                    Some(next) if next.round == round && *next > top => {
                        heap.push(top);
                        continue;
                    }
                    _ => break top,
                }
            };
            self.accept(chosen.index, stage, chosen.gain, Some(chosen.value))?;
        }
        Ok(())
    }

    fn finish(self) -> Result<SelectionResult> {
        let problem = self.problem;
        let n = problem.cache.n();
        let rank = self.rank()?;
        let value = problem.eval(&problem.metric, &self.w)?;
        let mut warnings = Vec::new();
        if rank < n {
            warnings.push(format!(
                "final Gramian is rank deficient (numerical rank {rank} of {n}); the selection does not render the system controllable"
            ));
        }
        if problem.metric == MetricKind::TraceInverse {
            warnings.push(
                "-tr W^-1 loses diminishing returns on some instances (see `verify --metric trace-inv`); the ratio is not certified".to_owned(),
            );
        }
        let guarantee = if problem.metric.is_submodular() {
            format!(
                "1-((k-1)/k)^k = {:.6} for monotone non-negative normalized submodular metrics",
                greedy_bound(problem.k)
            )
        } else if problem.metric == MetricKind::LambdaMin {
            "none (metric not submodular)".to_owned()
        } else {
            "none (submodularity not established across rank changes)".to_owned()
        };
        let system = problem.cache.system();
        Ok(SelectionResult {
            metric: problem.metric.name().to_owned(),
            selected: self.selected.iter().map(|&i| system.id(i).to_owned()).collect(),
            indices: self.selected,
            value,
            trace: self.trace,
            theoretical_ratio: greedy_bound(problem.k),
            guarantee,
            certified_upper_bound: None,
            controllable: rank == n,
            rank,
            evaluations: self.evaluations,
            warnings,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct LazyEntry {
    index: usize,
    gain: MetricValue,
    value: MetricValue,
    round: usize,
}

impl LazyEntry {
    fn new(index: usize, gain: MetricValue, value: MetricValue, round: usize) -> Self {
        Self { index, gain, value, round }
    }

    fn key(&self) -> (MetricValue, Reverse<usize>) {
        (self.gain, Reverse(self.index))
    }
}

impl PartialEq for LazyEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for LazyEntry {}

impl PartialOrd for LazyEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LazyEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{random_stable_system, unit_candidates, LtiSystem};
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector, DVector};

    fn diag3() -> GramianCache {
        let a = DMatrix::from_diagonal(&dvector![-1.0, -2.0, -3.0]);
        GramianCache::build(LtiSystem::new(a, DMatrix::zeros(3, 0), unit_candidates(3, 3)).unwrap()).unwrap()
    }

    #[test]
    fn bound_values() {
        assert_eq!(greedy_bound(1), 1.0);
        assert_eq!(greedy_bound(2), 0.75);
        assert!((greedy_bound(1000) - 0.6321).abs() < 3e-4);
        assert!(greedy_bound(1000) > 1.0 - (-1f64).exp());
    }

    #[test]
    fn trace_picks_modular_optimum() {
        let cache = diag3();
        let p = SelectionProblem::new(&cache, MetricKind::Trace, 2).unwrap();
        let r = greedy_select(&p).unwrap();
        assert_eq!(r.selected, vec!["e1", "e2"]);
        assert_relative_eq!(r.trace[0].gain.get(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(r.trace[1].gain.get(), 0.25, epsilon = 1e-14);
        assert_relative_eq!(r.value.get(), 0.75, epsilon = 1e-14);
        assert!(!r.controllable);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn rank_ties_go_to_lowest_index() {
        let cache = diag3();
        let p = SelectionProblem::new(&cache, MetricKind::Rank, 2).unwrap();
        let r = greedy_select(&p).unwrap();
        assert_eq!(r.selected, vec!["e1", "e2"]);
        assert!(r.trace.iter().all(|t| t.gain.get() == 1.0));
    }

    #[test]
    fn strict_metric_progresses_through_neg_infinity() {
        let cache = diag3();
        let p = SelectionProblem::new(&cache, MetricKind::LogDet, 3).unwrap();
        let r = greedy_select(&p).unwrap();
        assert_eq!(r.selected, vec!["e1", "e2", "e3"]);
        assert_eq!(r.trace[0].gain, MetricValue::ZERO);
        assert_eq!(r.trace[1].gain, MetricValue::ZERO);
        assert_eq!(r.trace[2].gain, MetricValue::INFINITY);
        assert!(r.value.is_finite());
        assert!(r.controllable);
    }

    #[test]
    fn two_stage_all_rank_picks() {
        let cache = diag3();
        let p = SelectionProblem::new(&cache, MetricKind::LogDet, 3).unwrap().with_two_stage(true);
        let r = two_stage_greedy(&p).unwrap();
        assert_eq!(r.trace.iter().filter(|t| t.stage == Stage::Rank).count(), 3);
        assert!(r.controllable);
        // secondary log-product prefers the largest diagonal Gramian entry first
        assert_eq!(r.selected, vec!["e1", "e2", "e3"]);
    }

    #[test]
    fn two_stage_secondary_tie_break() {
        // candidates e1, e2 and 2(e1 + e2) on diag(-1, -2)
        let a = dmatrix![-1.0, 0.0; 0.0, -2.0];
        let mut cands = unit_candidates(2, 2);
        cands.push(crate::lti::CandidateActuator::new("c", DVector::from_vec(vec![2.0, 2.0])));
        let sys = LtiSystem::new(a, DMatrix::zeros(2, 0), cands).unwrap();
        let cache = GramianCache::build(sys).unwrap();
        // W_{e1} = diag(1/2, 0), W_{e2} = diag(0, 1/4), W_c = 4·[[1/2, 1/3], [1/3, 1/4]]
        let wc = dmatrix![2.0, 4.0 / 3.0; 4.0 / 3.0, 1.0];
        assert_relative_eq!(cache.candidate(2).matrix(), &wc, epsilon = 1e-13);
        // W_c is full rank: rank gain 2 beats the unit vectors outright
        let p = SelectionProblem::new(&cache, MetricKind::LogDet, 1).unwrap().with_two_stage(true);
        let r = two_stage_greedy(&p).unwrap();
        assert_eq!(r.selected, vec!["c"]);
        assert_eq!(r.trace[0].gain.get(), 2.0);
    }

    #[test]
    fn two_stage_breaks_rank_ties_by_log_product() {
        let a = DMatrix::from_diagonal(&dvector![-1.0, -2.0, -3.0]);
        let mut cands = unit_candidates(3, 3);
        cands[1] = crate::lti::CandidateActuator::new("s2", dvector![0.0, 3.0, 0.0]);
        let cache = GramianCache::build(LtiSystem::new(a, DMatrix::zeros(3, 0), cands).unwrap()).unwrap();
        // singleton Gramians diag(1/2, 0, 0), diag(0, 9/4, 0), diag(0, 0, 1/6): rank gains all 1
        let p = SelectionProblem::new(&cache, MetricKind::LogDet, 3).unwrap().with_two_stage(true);
        let r = two_stage_greedy(&p).unwrap();
        assert_eq!(r.selected, vec!["s2", "e1", "e3"]);
        assert!(r.trace.iter().all(|t| t.stage == Stage::Rank && t.gain.get() == 1.0));
        assert_relative_eq!(r.value.get(), (0.5f64 * 2.25 / 6.0).ln(), epsilon = 1e-12);
        // plain greedy sees -inf gains and falls back to index order
        let plain = greedy_select(&p.clone().with_two_stage(false)).unwrap();
        assert_eq!(plain.selected, vec!["e1", "s2", "e3"]);
    }

    #[test]
    fn two_stage_rejects_non_strict_metric() {
        let cache = diag3();
        let p = SelectionProblem::new(&cache, MetricKind::Trace, 2).unwrap().with_two_stage(true);
        assert!(matches!(two_stage_greedy(&p), Err(Error::UnsupportedMetric(_))));
    }

    #[test]
    fn budget_validation() {
        let cache = diag3();
        assert!(SelectionProblem::new(&cache, MetricKind::Trace, 0).is_err());
        assert!(SelectionProblem::new(&cache, MetricKind::Trace, 4).is_err());
    }

    #[test]
    fn lazy_rejects_lambda_min() {
        let cache = diag3();
        let p = SelectionProblem::new(&cache, MetricKind::LambdaMin, 2).unwrap();
        assert!(matches!(lazy_greedy(&p), Err(Error::UnsupportedMetric(_))));
        let r = greedy_select(&p).unwrap();
        assert_eq!(r.guarantee, "none (metric not submodular)");
    }

    #[test]
    fn lazy_matches_plain() {
        let sys = random_stable_system(10, 10, 4, 0.5).unwrap();
        let cache = GramianCache::build(sys).unwrap();
        for metric in [
            MetricKind::Trace,
            MetricKind::LogDet,
            MetricKind::TraceInverse,
            MetricKind::Rank,
            MetricKind::LogProdNonzero,
        ] {
            let p = SelectionProblem::new(&cache, metric.clone(), 4).unwrap();
            let plain = greedy_select(&p).unwrap();
            let lazy = lazy_greedy(&p).unwrap();
            assert_eq!(plain.selected, lazy.selected, "{metric}");
            assert!(lazy.evaluations <= plain.evaluations, "{metric}");
        }
    }

    #[test]
    fn certificate_for_trace() {
        let cache = diag3();
        let p = SelectionProblem::new(&cache, MetricKind::Trace, 2).unwrap();
        let mut r = greedy_select(&p).unwrap();
        let u = certified_gap(&mut r, &p).unwrap();
        // f(S) = 3/4, only e3 remains with gain 1/6
        assert_relative_eq!(u.get(), 0.75 + 1.0 / 6.0, epsilon = 1e-14);
        assert_eq!(r.certified_upper_bound, Some(u));

        let p = SelectionProblem::new(&cache, MetricKind::Trace, 3).unwrap();
        let mut r = greedy_select(&p).unwrap();
        let u = certified_gap(&mut r, &p).unwrap();
        assert_eq!(u, r.value);
    }

    #[test]
    fn certificate_unavailable() {
        let cache = diag3();
        let p = SelectionProblem::new(&cache, MetricKind::LogDet, 2).unwrap();
        let mut r = greedy_select(&p).unwrap();
        assert!(matches!(certified_gap(&mut r, &p), Err(Error::BoundUnavailable)));
        let p = SelectionProblem::new(&cache, MetricKind::LambdaMin, 2).unwrap();
        let mut r = greedy_select(&p).unwrap();
        assert!(matches!(certified_gap(&mut r, &p), Err(Error::UnsupportedMetric(_))));
    }
}
