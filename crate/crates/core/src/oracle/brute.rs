use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::GramianCache;
use crate::metrics::{eval_matrix, MetricKind, MetricValue, RankPolicy};

/// Largest number of subsets [`brute_force`] will enumerate.
pub const ENUMERATION_LIMIT: u128 = 2_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc · (n − i) is divisible by (i + 1) at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Metric value of every size-`k` subset, in lexicographic order.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub k: usize,
    ids: Vec<String>,
    // row-major, k indices per row
    subsets: Vec<usize>,
    values: Vec<MetricValue>,
    optimum: usize,
}

impl ScoreTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> (&[usize], MetricValue) {
        (&self.subsets[i * self.k..(i + 1) * self.k], self.values[i])
    }

    pub fn values(&self) -> &[MetricValue] {
        &self.values
    }

    pub fn optimum_index(&self) -> usize {
        self.optimum
    }

    pub fn optimum(&self) -> (&[usize], MetricValue) {
        self.row(self.optimum)
    }

    pub fn subset_ids(&self, i: usize) -> Vec<String> {
        self.row(i).0.iter().map(|&j| self.ids[j].clone()).collect()
    }

    /// Writes `subset;value` rows with `+`-joined ids.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "subset;value")?;
        for i in 0..self.len() {
            let (subset, value) = self.row(i);
            let mut first = true;
            for &j in subset {
                if !first {
                    w.write_all(b"+")?;
                }
                first = false;
                w.write_all(self.ids[j].as_bytes())?;
            }
            writeln!(w, ";{value}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fraction of enumerated subsets scoring strictly below `value`.
    pub fn percentile(&self, value: MetricValue) -> f64 {
        self.values.iter().filter(|&&v| v < value).count() as f64 / self.len() as f64
    }

    pub fn min_finite(&self) -> Option<f64> {
        self.values.iter().filter(|v| v.is_finite()).map(|v| v.get()).reduce(f64::min)
    }

    /// Greedy-versus-optimum statistics for a histogram of the table.
    pub fn summary(&self, greedy_value: MetricValue) -> BruteSummary {
        let (_, opt) = self.optimum();
        let shift = self.min_finite();
        let shifted_ratio = match shift {
            Some(s) if greedy_value.is_finite() && opt.is_finite() => {
                let span = opt.get() - s;
                Some(if span > 0.0 { (greedy_value.get() - s) / span } else { 1.0 })
            }
            _ => None,
        };
        let volume_ratio = if greedy_value.is_finite() && opt.is_finite() {
            Some(((greedy_value.get() - opt.get()) / 2.0).exp())
        } else {
            None
        };
        BruteSummary {
            rows: self.len(),
            optimum: self.subset_ids(self.optimum),
            optimum_value: opt,
            greedy_value,
            shift,
            shifted_ratio,
            percentile: self.percentile(greedy_value),
            volume_ratio,
            uncontrollable_rows: self.values.iter().filter(|v| !v.is_finite()).count(),
        }
    }
}

/// `shifted_ratio` compares `f′ = f − shift` with `shift` the smallest finite table value;
/// `volume_ratio` is `√(e^{f_greedy} / e^{f_opt})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteSummary {
    pub rows: usize,
    pub optimum: Vec<String>,
    pub optimum_value: MetricValue,
    pub greedy_value: MetricValue,
    pub shift: Option<f64>,
    pub shifted_ratio: Option<f64>,
    pub percentile: f64,
    pub volume_ratio: Option<f64>,
    pub uncontrollable_rows: usize,
}

/// Scores every size-`k` subset of the candidate pool.
pub fn brute_force(cache: &GramianCache, metric: &MetricKind, k: usize, policy: &RankPolicy) -> Result<ScoreTable> {
    let m = cache.len();
    if k > m {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds the {m} candidates")));
    }
    let count = binomial(m as u64, k as u64);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit { count, limit: ENUMERATION_LIMIT });
    }
    let rows = count as usize;
    let mut subsets = Vec::with_capacity(rows * k);
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        subsets.extend_from_slice(&current);
        // advance to the next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&i| current[i] < m - k + i) else { break };
        current[pos] += 1;
        for i in pos + 1..k {
            current[i] = current[i - 1] + 1;
        }
    }
    debug_assert_eq!(subsets.len(), rows * k);
    let values = if k == 0 {
        vec![eval_matrix(metric, cache.base().matrix(), policy)?]
    } else {
        subsets
            .par_chunks(k)
            .map(|s| eval_matrix(metric, &cache.sum_matrix(s), policy))
            .collect::<Result<Vec<_>>>()?
    };
    let mut optimum = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[optimum] {
            optimum = i;
        }
    }
    let ids = cache.system().candidates().iter().map(|c| c.id.clone()).collect();
    Ok(ScoreTable { k, ids, subsets, values, optimum })
}
