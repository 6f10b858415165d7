use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::GramianCache;
use crate::metrics::{eval_matrix, numerical_rank, MetricKind, RankPolicy};

/// A trial violates diminishing returns when `Δ(a|A) < Δ(a|B) − VIOLATION_TOL · max(1, |Δ(a|B)|)`.
pub const VIOLATION_TOL: f64 = 1e-7;

const MAX_EXHAUSTIVE_CANDIDATES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub a_set: Vec<String>,
    pub b_set: Vec<String>,
    pub element: String,
    pub gain_at_a: f64,
    pub gain_at_b: f64,
    /// `gain_at_b − gain_at_a`
    pub deficit: f64,
}

/// Outcome of a diminishing-returns check over triples `A ⊂ B ⊆ V`, `a ∉ B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub metric: String,
    pub requested_trials: usize,
    /// Triples actually evaluated.
    pub trials: usize,
    /// Draws discarded because a value was `-∞`.
    pub resampled: usize,
    /// Draws discarded because the two gains crossed different rank changes
    /// (pseudo-inverse surrogates only).
    pub skipped_rank_change: usize,
    pub violations: Vec<Violation>,
    /// Largest `Δ(a|B) − Δ(a|A)` seen, positive only for violating triples.
    pub max_deficit: f64,
    /// Largest `|Δ(a|A) − Δ(a|B)| / max(1, |Δ(a|B)|)`; zero for modular metrics up to rounding.
    pub max_modularity_gap: f64,
}

impl ViolationReport {
    fn new(metric: &MetricKind, requested: usize) -> Self {
        Self {
            metric: metric.name().to_owned(),
            requested_trials: requested,
            trials: 0,
            resampled: 0,
            skipped_rank_change: 0,
            violations: Vec::new(),
            max_deficit: f64::NEG_INFINITY,
            max_modularity_gap: 0.0,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, ids: &dyn Fn(&[usize]) -> Vec<String>, a_set: &[usize], b_set: &[usize], a: usize, ga: f64, gb: f64) {
        self.trials += 1;
        let deficit = gb - ga;
        self.max_deficit = self.max_deficit.max(deficit);
        let scale = gb.abs().max(1.0);
        self.max_modularity_gap = self.max_modularity_gap.max((ga - gb).abs() / scale);
        if ga < gb - VIOLATION_TOL * scale {
            self.violations.push(Violation {
                a_set: ids(a_set),
                b_set: ids(b_set),
                element: ids(&[a]).remove(0),
                gain_at_a: ga,
                gain_at_b: gb,
                deficit,
            });
        }
    }
}

enum Outcome {
    Gains(f64, f64),
    NonFinite,
    RankChange,
}

struct TripleEval<'a> {
    cache: &'a GramianCache,
    metric: &'a MetricKind,
    policy: &'a RankPolicy,
    surrogate: bool,
}

impl TripleEval<'_> {
    fn eval(&self, a_set: &[usize], b_set: &[usize], a: usize) -> Result<Outcome> {
        let wa = self.cache.sum_matrix(a_set);
        let wb = self.cache.sum_matrix(b_set);
        let wa_plus = &wa + self.cache.candidate(a).matrix();
        let wb_plus = &wb + self.cache.candidate(a).matrix();
        if self.surrogate {
            let r = |w| numerical_rank(w, self.policy);
            if r(&wa_plus)? - r(&wa)? != r(&wb_plus)? - r(&wb)? {
                return Ok(Outcome::RankChange);
            }
        }
        let f = |w| eval_matrix(self.metric, w, self.policy);
        let (fa, fa1, fb, fb1) = (f(&wa)?, f(&wa_plus)?, f(&wb)?, f(&wb_plus)?);
        if !(fa.is_finite() && fa1.is_finite() && fb.is_finite() && fb1.is_finite()) {
            return Ok(Outcome::NonFinite);
        }
        Ok(Outcome::Gains(fa1.get() - fa.get(), fb1.get() - fb.get()))
    }
}

fn id_mapper(cache: &GramianCache) -> impl Fn(&[usize]) -> Vec<String> + '_ {
    move |s: &[usize]| s.iter().map(|&i| cache.system().id(i).to_owned()).collect()
}

/// Draws `trials` random triples and checks `Δ(a|A) ≥ Δ(a|B)`.
///
/// `|B|` is uniform on `1..M`, `B` uniform among subsets of that size, `A` uniform among proper
/// subsets of `B` (including `∅`), and `a` uniform outside `B`. Draws where any of the four
/// values is `-∞` are redrawn, up to `100 · trials` draws in total.
pub fn submodularity_sampler(
    cache: &GramianCache,
    metric: &MetricKind,
    trials: usize,
    seed: u64,
    policy: &RankPolicy,
) -> Result<ViolationReport> {
    let m = cache.len();
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("sampling needs at least two candidates".into()));
    }
    let ev = TripleEval {
        cache,
        metric,
        policy,
        surrogate: matches!(metric, MetricKind::TracePinv | MetricKind::LogProdNonzero),
    };
    let ids = id_mapper(cache);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ViolationReport::new(metric, trials);
    let max_attempts = trials.saturating_mul(100);
    let mut attempts = 0;
    while report.trials < trials && attempts < max_attempts {
        attempts += 1;
        let b_size = rng.random_range(1..m);
        let mut b_set = sample(&mut rng, m, b_size).into_vec();
        b_set.sort_unstable();
        let a_set = loop {
            let a_set: Vec<usize> = b_set.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            if a_set.len() < b_set.len() {
                break a_set;
            }
        };
        let outside: Vec<usize> = (0..m).filter(|i| b_set.binary_search(i).is_err()).collect();
        let a = outside[rng.random_range(0..outside.len())];
        match ev.eval(&a_set, &b_set, a)? {
            Outcome::Gains(ga, gb) => report.record(&ids, &a_set, &b_set, a, ga, gb),
            Outcome::NonFinite => report.resampled += 1,
            Outcome::RankChange => report.skipped_rank_change += 1,
        }
    }
    if report.trials == 0 {
        return Err(Error::SamplingExhausted { attempts });
    }
    Ok(report)
}

/// Checks every triple `A ⊊ B ⊆ V`, `a ∉ B`, for pools of at most 12 candidates.
pub fn exhaustive_triples(cache: &GramianCache, metric: &MetricKind, policy: &RankPolicy) -> Result<ViolationReport> {
    let m = cache.len();
    if m > MAX_EXHAUSTIVE_CANDIDATES {
        return Err(Error::InvalidArgument(format!(
            "exhaustive checking supports at most {MAX_EXHAUSTIVE_CANDIDATES} candidates, got {m}"
        )));
    }
    let surrogate = matches!(metric, MetricKind::TracePinv | MetricKind::LogProdNonzero);
    let members = |mask: usize| (0..m).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>();
    // every subset value (and rank) once, indexed by bitmask
    let mut values = Vec::with_capacity(1 << m);
    let mut ranks = Vec::with_capacity(1 << m);
    for mask in 0..1usize << m {
        let w = cache.sum_matrix(&members(mask));
        values.push(eval_matrix(metric, &w, policy)?);
        ranks.push(if surrogate { numerical_rank(&w, policy)? } else { 0 });
    }
    let ids = id_mapper(cache);
    let mut report = ViolationReport::new(metric, 0);
    for b in 1..(1usize << m) {
        // proper subsets a_mask of b
        let mut sub = (b - 1) & b;
        loop {
            for a in (0..m).filter(|i| b >> i & 1 == 0) {
                let bit = 1 << a;
                report.requested_trials += 1;
                let (fa, fa1, fb, fb1) = (values[sub], values[sub | bit], values[b], values[b | bit]);
                if surrogate && ranks[sub | bit] - ranks[sub] != ranks[b | bit] - ranks[b] {
                    report.skipped_rank_change += 1;
                } else if !(fa.is_finite() && fa1.is_finite() && fb.is_finite() && fb1.is_finite()) {
                    report.resampled += 1;
                } else {
                    let (ga, gb) = (fa1.get() - fa.get(), fb1.get() - fb.get());
                    report.record(&ids, &members(sub), &members(b), a, ga, gb);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & b;
        }
    }
    Ok(report)
}
