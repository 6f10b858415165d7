//! Scalar controllability metrics of a Gramian.
//!
//! Every metric is oriented for maximization: the trace of the inverse is returned negated.
//! Metrics that need an invertible Gramian return [`MetricValue::NEG_INFINITY`] when the
//! Gramian is numerically rank deficient under the active [`RankPolicy`].

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gramian::Gramian;

/// Numerical-rank threshold `τ = max(rel_tol · λ_max, abs_floor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPolicy {
    pub rel_tol: f64,
    pub abs_floor: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_floor: 1e-14 }
    }
}

impl RankPolicy {
    pub fn new(rel_tol: f64, abs_floor: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("rank tolerance must lie in (0, 1), got {rel_tol}")));
        }
        if !(abs_floor > 0.0) {
            return Err(Error::InvalidArgument(format!("absolute rank floor must be positive, got {abs_floor}")));
        }
        Ok(Self { rel_tol, abs_floor })
    }

    pub fn threshold(&self, lambda_max: f64) -> f64 {
        (self.rel_tol * lambda_max).max(self.abs_floor)
    }

    pub fn numerical_rank(&self, eigenvalues: &DVector<f64>) -> usize {
        let tau = self.threshold(eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        eigenvalues.iter().filter(|&&l| l > tau).count()
    }
}

/// Extended real: a finite value or ±∞.
///
/// Metric values only ever take `-∞`; greedy gains may also be `+∞` (a move from an
/// uncontrollable to a controllable configuration). Serialized as a JSON number when finite and
/// as the strings `"-inf"` / `"inf"` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue(f64);

impl MetricValue {
    pub const NEG_INFINITY: Self = Self(f64::NEG_INFINITY);
    pub const INFINITY: Self = Self(f64::INFINITY);
    pub const ZERO: Self = Self(0.0);

    pub fn finite(v: f64) -> Self {
        debug_assert!(!v.is_nan());
        Self(v)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Marginal gain from `before` to `after`. `-∞ → -∞` is `0`; `-∞ → finite` is `+∞`.
    pub fn gain(before: Self, after: Self) -> Self {
        match (before.0 == f64::NEG_INFINITY, after.0 == f64::NEG_INFINITY) {
            (true, true) => Self::ZERO,
            (true, false) => Self::INFINITY,
            _ => Self(after.0 - before.0),
        }
    }
}

impl Eq for MetricValue {}

impl PartialOrd for MetricValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MetricValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for MetricValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for MetricValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Self(v)),
            Repr::Str(s) if s == "-inf" => Ok(Self::NEG_INFINITY),
            Repr::Str(s) if s == "inf" => Ok(Self::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("invalid extended real `{s}`"))),
        }
    }
}

/// Full-row-rank weight `Q` (m×n, m ≤ n) for `log det(Q W Qᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(DMatrix<f64>);

impl WeightMatrix {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = q.shape();
        if rows == 0 || rows > cols {
            return Err(Error::WeightRank { rank: 0, rows, cols });
        }
        let sv = q.clone().svd(false, false).singular_values;
        let smax = sv.max();
        let tol = smax * (cols as f64) * f64::EPSILON;
        let rank = sv.iter().filter(|&&s| s > tol).count();
        if rank < rows {
            return Err(Error::WeightRank { rank, rows, cols });
        }
        Ok(Self(q))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    Trace,
    /// `−tr W⁻¹`
    TraceInverse,
    /// `−tr W⁺`
    TracePinv,
    LogDet,
    /// Sum of logs of the eigenvalues above the rank threshold.
    LogProdNonzero,
    Rank,
    LambdaMin,
    /// `(1/n) log det W`
    NthRootLogDet,
    WeightedLogDet(WeightMatrix),
}

impl MetricKind {
    /// Names accepted on the command line.
    pub const NAMES: [&'static str; 9] = [
        "trace",
        "trace-inv",
        "trace-pinv",
        "logdet",
        "logprod",
        "rank",
        "lambda-min",
        "nthroot-logdet",
        "weighted-logdet",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Trace => "trace",
            MetricKind::TraceInverse => "trace-inv",
            MetricKind::TracePinv => "trace-pinv",
            MetricKind::LogDet => "logdet",
            MetricKind::LogProdNonzero => "logprod",
            MetricKind::Rank => "rank",
            MetricKind::LambdaMin => "lambda-min",
            MetricKind::NthRootLogDet => "nthroot-logdet",
            MetricKind::WeightedLogDet(_) => "weighted-logdet",
        }
    }

    /// Parses a metric name; `weighted-logdet` needs `weight`.
    pub fn parse(name: &str, weight: Option<DMatrix<f64>>) -> Result<Self> {
        if name == "weighted-logdet" {
            let q = weight.ok_or_else(|| {
                Error::InvalidArgument("weighted-logdet requires a weight matrix".into())
            })?;
            return Ok(MetricKind::WeightedLogDet(WeightMatrix::new(q)?));
        }
        name.parse()
    }

    /// Metrics with a proven diminishing-returns property.
    pub fn is_submodular(&self) -> bool {
        matches!(
            self,
            MetricKind::Trace
                | MetricKind::TraceInverse
                | MetricKind::LogDet
                | MetricKind::NthRootLogDet
                | MetricKind::WeightedLogDet(_)
                | MetricKind::Rank
        )
    }

    /// Metrics lazy evaluation accepts: the submodular ones plus the pseudo-inverse surrogates.
    pub fn supports_lazy(&self) -> bool {
        self.is_submodular() || matches!(self, MetricKind::TracePinv | MetricKind::LogProdNonzero)
    }

    /// Metrics that evaluate to `-∞` on rank-deficient Gramians.
    pub fn is_strict(&self) -> bool {
        matches!(
            self,
            MetricKind::TraceInverse
                | MetricKind::LogDet
                | MetricKind::NthRootLogDet
                | MetricKind::WeightedLogDet(_)
        )
    }

    /// Tie-break score used while building up rank in the two-stage algorithm.
    pub fn rank_stage_secondary(&self) -> Option<MetricKind> {
        match self {
            MetricKind::TraceInverse => Some(MetricKind::TracePinv),
            MetricKind::LogDet | MetricKind::NthRootLogDet | MetricKind::WeightedLogDet(_) => {
                Some(MetricKind::LogProdNonzero)
            }
            _ => None,
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "trace" => MetricKind::Trace,
            "trace-inv" => MetricKind::TraceInverse,
            "trace-pinv" => MetricKind::TracePinv,
            "logdet" => MetricKind::LogDet,
            "logprod" => MetricKind::LogProdNonzero,
            "rank" => MetricKind::Rank,
            "lambda-min" => MetricKind::LambdaMin,
            "nthroot-logdet" => MetricKind::NthRootLogDet,
            "weighted-logdet" => {
                return Err(Error::InvalidArgument("weighted-logdet requires a weight matrix".into()))
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown metric `{other}` (expected one of {})",
                    MetricKind::NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates `kind` on a Gramian.
pub fn eval_metric(kind: &MetricKind, w: &Gramian, policy: &RankPolicy) -> Result<MetricValue> {
    eval_matrix(kind, w.matrix(), policy)
}

/// [`eval_metric`] on a raw symmetric PSD matrix.
pub fn eval_matrix(kind: &MetricKind, w: &DMatrix<f64>, policy: &RankPolicy) -> Result<MetricValue> {
    let n = w.nrows();
    if let MetricKind::Trace = kind {
        return Ok(MetricValue::finite(w.trace()));
    }
    if let MetricKind::WeightedLogDet(q) = kind {
        let q = q.matrix();
        if q.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "weight matrix has {} columns, Gramian is {n}x{n}",
                q.ncols()
            )));
        }
        let reduced = q * w * q.transpose();
        let spec = Spectrum::of(&reduced, policy)?;
        return Ok(if spec.rank == reduced.nrows() { spec.log_sum() } else { MetricValue::NEG_INFINITY });
    }
    let spec = Spectrum::of(w, policy)?;
    Ok(from_spectrum(kind, &spec, n))
}

/// Numerical rank together with the value of `kind`, from one eigendecomposition.
pub(crate) fn eval_with_rank(kind: &MetricKind, w: &DMatrix<f64>, policy: &RankPolicy) -> Result<(usize, MetricValue)> {
    if matches!(kind, MetricKind::Trace | MetricKind::WeightedLogDet(_)) {
        return Ok((numerical_rank(w, policy)?, eval_matrix(kind, w, policy)?));
    }
    let spec = Spectrum::of(w, policy)?;
    Ok((spec.rank, from_spectrum(kind, &spec, w.nrows())))
}

fn from_spectrum(kind: &MetricKind, spec: &Spectrum, n: usize) -> MetricValue {
    let full = spec.rank == n;
    match kind {
        MetricKind::TraceInverse if full => MetricValue::finite(-spec.inv_sum()),
        MetricKind::TraceInverse => MetricValue::NEG_INFINITY,
        MetricKind::TracePinv => MetricValue::finite(-spec.inv_sum()),
        MetricKind::LogDet if full => spec.log_sum(),
        MetricKind::LogDet => MetricValue::NEG_INFINITY,
        MetricKind::NthRootLogDet if full => MetricValue::finite(spec.log_sum().get() / n as f64),
        MetricKind::NthRootLogDet => MetricValue::NEG_INFINITY,
        MetricKind::LogProdNonzero => spec.log_sum(),
        MetricKind::Rank => MetricValue::finite(spec.rank as f64),
        MetricKind::LambdaMin => MetricValue::finite(spec.min),
        MetricKind::Trace | MetricKind::WeightedLogDet(_) => unreachable!("handled before the spectrum"),
    }
}

/// Numerical rank of a PSD matrix under `policy`.
pub fn numerical_rank(w: &DMatrix<f64>, policy: &RankPolicy) -> Result<usize> {
    Ok(Spectrum::of(w, policy)?.rank)
}

struct Spectrum {
    // eigenvalues above the rank threshold
    nonzero: Vec<f64>,
    rank: usize,
    // smallest eigenvalue after clipping
    min: f64,
}

impl Spectrum {
    fn of(w: &DMatrix<f64>, policy: &RankPolicy) -> Result<Self> {
        if w.nrows() == 0 {
            return Ok(Self { nonzero: vec![], rank: 0, min: 0.0 });
        }
        let eig = w.symmetric_eigenvalues();
        let max = eig.max();
        let mut min = eig.min();
        let band = (crate::gramian::PSD_TOL * max).max(policy.abs_floor);
        if min < 0.0 {
            if min < -band {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
            min = 0.0;
        }
        let tau = policy.threshold(max);
        let nonzero: Vec<f64> = eig.iter().copied().filter(|&l| l > tau).collect();
        Ok(Self { rank: nonzero.len(), nonzero, min })
    }

    fn inv_sum(&self) -> f64 {
        self.nonzero.iter().map(|l| 1.0 / l).sum()
    }

    fn log_sum(&self) -> MetricValue {
        MetricValue::finite(self.nonzero.iter().map(|l| l.ln()).sum())
    }
}

/// Squared H₂ norm `tr(C W Cᵀ)` of `(A, B, C)` given the controllability Gramian of `(A, B)`.
pub fn h2_norm_sq(w: &Gramian, c: &DMatrix<f64>) -> Result<f64> {
    if c.ncols() != w.n() {
        return Err(Error::DimensionMismatch(format!(
            "C has {} columns, Gramian is {}x{}",
            c.ncols(),
            w.n(),
            w.n()
        )));
    }
    Ok((c * w.matrix() * c.transpose()).trace())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolumeMode {
    /// `c_n · (det W)^{1/n}`
    NthRoot,
    /// `c_n · √det W`, the volume of `{x : xᵀ W⁻¹ x ≤ 1}`
    #[default]
    StandardSqrt,
}

impl FromStr for VolumeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nth-root" | "paper-nth-root" => Ok(VolumeMode::NthRoot),
            "standard-sqrt" | "sqrt" => Ok(VolumeMode::StandardSqrt),
            other => Err(Error::InvalidArgument(format!(
                "unknown volume mode `{other}` (expected nth-root or standard-sqrt)"
            ))),
        }
    }
}

/// Volume of the unit-energy reachable ellipsoid, scaled by the unit `n`-ball volume
/// `c_n = π^{n/2} / Γ(n/2 + 1)`. Rank-deficient Gramians give 0.
pub fn ellipsoid_volume(w: &Gramian, mode: VolumeMode, policy: &RankPolicy) -> Result<f64> {
    let n = w.n();
    let log_det = eval_matrix(&MetricKind::LogDet, w.matrix(), policy)?;
    if !log_det.is_finite() {
        return Ok(0.0);
    }
    let exponent = match mode {
        VolumeMode::NthRoot => log_det.get() / n as f64,
        VolumeMode::StandardSqrt => log_det.get() / 2.0,
    };
    Ok((log_unit_ball_volume(n) + exponent).exp())
}

/// `ln(π^{n/2} / Γ(n/2 + 1))`.
pub fn log_unit_ball_volume(n: usize) -> f64 {
    (n as f64 / 2.0) * PI.ln() - ln_gamma_half_plus_one(n)
}

// ln Γ(n/2 + 1) via Γ(x + 1) = x Γ(x), from Γ(1) = 1 or Γ(1/2) = √π
fn ln_gamma_half_plus_one(n: usize) -> f64 {
    let mut acc = if n.is_multiple_of(2) { 0.0 } else { 0.5 * PI.ln() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    let target = n as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}
