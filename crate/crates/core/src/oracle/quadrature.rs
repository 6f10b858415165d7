use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gramian::{Gramian, Horizon};
use crate::lti::{spectral_abscissa, STABILITY_TOL};

const INITIAL_PANELS: usize = 16;
const MAX_DOUBLINGS: usize = 20;

/// Truncation horizon for `∫₀^∞`: `40 / |α(A)|`, doubled until `‖e^{AT}‖_F ≤ 1e-9`.
pub fn quadrature_horizon(a: &DMatrix<f64>) -> Result<f64> {
    let alpha = spectral_abscissa(a);
    if !(alpha < -STABILITY_TOL) {
        return Err(Error::Unstable { abscissa: alpha });
    }
    let mut t = 40.0 / alpha.abs();
    for _ in 0..8 {
        if (a * t).exp().norm() <= 1e-9 {
            break;
        }
        t *= 2.0;
    }
    Ok(t)
}

/// Composite Simpson of `∫₀ᵀ g(e^{Aτ}) dτ`, panels doubled until successive estimates differ by
/// less than `rel_tol` (relative, Frobenius norm).
///
/// Simpson on `2N` panels is `(4·T_{2N} − T_N)/3` with `T` the trapezoid rule, so each doubling
/// only evaluates the new midpoints.
fn simpson<G>(a: &DMatrix<f64>, horizon: f64, rel_tol: f64, g: G) -> Result<DMatrix<f64>>
where
    G: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    let n = a.nrows();
    let mut panels = INITIAL_PANELS;
    let mut h = horizon / panels as f64;
    // trapezoid on `panels` panels
    let step = (a * h).exp();
    let mut phi = DMatrix::<f64>::identity(n, n);
    let mut sum = g(&phi) * 0.5;
    for j in 1..=panels {
        phi = &step * &phi;
        let v = g(&phi);
        sum += if j == panels { v * 0.5 } else { v };
    }
    let mut trap = &sum * h;
    let mut prev: Option<DMatrix<f64>> = None;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        // midpoints (2j + 1)·h/2
        let half = h / 2.0;
        let stride = (a * h).exp();
        let mut mid = (a * half).exp();
        let mut mids = g(&mid);
        for _ in 1..panels {
            mid = &stride * &mid;
            mids += g(&mid);
        }
        let trap_fine = &trap * 0.5 + mids * half;
        let simpson = (&trap_fine * 4.0 - &trap) / 3.0;
        panels *= 2;
        h = half;
        trap = trap_fine;
        if let Some(p) = &prev {
            change = (&simpson - p).norm();
            let scale = simpson.norm();
            if change <= rel_tol * scale || (scale == 0.0 && change == 0.0) {
                return Ok(simpson);
            }
        }
        prev = Some(simpson);
    }
    Err(Error::QuadratureDiverged { doublings: MAX_DOUBLINGS, change })
}

/// `∫₀^∞ e^{Aτ} B Bᵀ e^{Aᵀτ} dτ` by composite Simpson on `[0, T]` (see [`quadrature_horizon`]).
pub fn quadrature_gramian(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> Result<Gramian> {
    let t = quadrature_horizon(a)?;
    let w = quadrature_integral(a, b, t, rel_tol)?;
    Gramian::new(w, Horizon::Infinite)
}

/// `∫₀ᵗ e^{Aτ} B Bᵀ e^{Aᵀτ} dτ` by composite Simpson; `A` need not be stable.
pub fn quadrature_gramian_on(a: &DMatrix<f64>, b: &DMatrix<f64>, horizon: f64, rel_tol: f64) -> Result<Gramian> {
    let w = quadrature_integral(a, b, horizon, rel_tol)?;
    Gramian::new(w, Horizon::Finite(horizon))
}

fn quadrature_integral(a: &DMatrix<f64>, b: &DMatrix<f64>, horizon: f64, rel_tol: f64) -> Result<DMatrix<f64>> {
    if !a.is_square() || b.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    simpson(a, horizon, rel_tol, |phi| {
        let pb = phi * b;
        &pb * pb.transpose()
    })
}

/// Impulse-response energy `∫₀ᵀ ‖C e^{Aτ} B‖_F² dτ`, with `T` from [`quadrature_horizon`].
pub fn h2_quadrature(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, rel_tol: f64) -> Result<f64> {
    if c.ncols() != a.nrows() || b.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch("A, B and C do not conform".into()));
    }
    let t = quadrature_horizon(a)?;
    let v = simpson(a, t, rel_tol, |phi| DMatrix::from_element(1, 1, (c * phi * b).norm_squared()))?;
    Ok(v[(0, 0)])
}
