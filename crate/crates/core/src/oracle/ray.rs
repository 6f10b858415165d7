use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gramian::PSD_TOL;
use crate::metrics::MetricKind;

/// Central-difference step.
pub const RAY_STEP: f64 = 1e-5;

/// Estimates up to this value above zero still count as non-positive.
pub const RAY_SLACK: f64 = 1e-6;

/// Central-difference estimates of `d/dt [f(X + tY + W_a) − f(X + tY)]` along the ray
/// `X + tY` (X positive definite, Y and `W_a` PSD), for `f = −tr(·)⁻¹` or `log det`.
///
/// Diminishing returns of `f` as a set function corresponds to these derivatives being
/// non-positive.
pub fn ray_monotonicity_probe(
    metric: &MetricKind,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    w_a: &DMatrix<f64>,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let trace_inverse = match metric {
        MetricKind::TraceInverse => true,
        MetricKind::LogDet => false,
        other => return Err(Error::UnsupportedMetric(other.name().into())),
    };
    let n = x.nrows();
    for (name, m) in [("X", x), ("Y", y), ("W_a", w_a)] {
        if m.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
        }
    }
    if x.clone().cholesky().is_none() {
        return Err(Error::Singular { t: 0.0 });
    }
    for m in [y, w_a] {
        let eig = m.symmetric_eigenvalues();
        if eig.min() < -PSD_TOL * eig.max().max(1.0) {
            return Err(Error::NotPsd { min_eigenvalue: eig.min() });
        }
    }
    let f = |m: DMatrix<f64>, t: f64| -> Result<f64> {
        let chol = m.cholesky().ok_or(Error::Singular { t })?;
        Ok(if trace_inverse {
            -chol.inverse().trace()
        } else {
            2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
        })
    };
    let g = |t: f64| -> Result<f64> {
        let ray = x + y * t;
        Ok(f(&ray + w_a, t)? - f(ray, t)?)
    };
    grid.iter()
        .map(|&t| Ok((g(t + RAY_STEP)? - g(t - RAY_STEP)?) / (2.0 * RAY_STEP)))
        .collect()
}

pub fn probe_passes(estimates: &[f64]) -> bool {
    estimates.iter().all(|&d| d <= RAY_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn zero_direction_is_flat() {
        let x = dmatrix![2.0, 0.5; 0.5, 1.0];
        let w = dmatrix![1.0, 0.0; 0.0, 0.0];
        let grid = [0.1, 0.5, 1.0];
        for metric in [MetricKind::TraceInverse, MetricKind::LogDet] {
            let d = ray_monotonicity_probe(&metric, &x, &DMatrix::zeros(2, 2), &w, &grid).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-9));
            let d = ray_monotonicity_probe(&metric, &x, &w, &DMatrix::zeros(2, 2), &grid).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn rejects_other_metrics_and_singular_start() {
        let i = DMatrix::identity(2, 2);
        assert!(ray_monotonicity_probe(&MetricKind::Trace, &i, &i, &i, &[1.0]).is_err());
        let sing = dmatrix![1.0, 0.0; 0.0, 0.0];
        assert!(matches!(
            ray_monotonicity_probe(&MetricKind::LogDet, &sing, &i, &i, &[1.0]),
            Err(Error::Singular { .. })
        ));
    }
}
