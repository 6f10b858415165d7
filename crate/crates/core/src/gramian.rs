//! Controllability Gramians.
//!
//! The infinite-horizon Gramian `W = ∫₀^∞ e^{Aτ} B Bᵀ e^{Aᵀτ} dτ` of a stable system is the
//! unique solution of `A W + W Aᵀ + B Bᵀ = 0`, solved here with the Bartels–Stewart method on
//! the real Schur form of `A`. Since the integrand is linear in `B Bᵀ`, the Gramian of a set of
//! input columns is the sum of the single-column Gramians; [`GramianCache`] stores those once so
//! any subset Gramian is a matrix sum.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lti::{spectral_abscissa, LtiSystem, STABILITY_TOL};
use crate::metrics::RankPolicy;

/// Relative residual bound every Lyapunov solution must meet.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvalues down to `-PSD_TOL · max(1, λ_max)` are accepted as rounding noise.
pub const PSD_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Infinite,
    Finite(f64),
}

/// Symmetric positive semidefinite controllability Gramian.
#[derive(Debug, Clone, PartialEq)]
pub struct Gramian {
    matrix: DMatrix<f64>,
    horizon: Horizon,
}

impl Gramian {
    /// Symmetrizes `matrix` and checks that it is positive semidefinite.
    pub fn new(matrix: DMatrix<f64>, horizon: Horizon) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Gramian must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let matrix = symmetrize(matrix);
        if matrix.nrows() > 0 {
            let eig = matrix.symmetric_eigenvalues();
            let max = eig.max();
            let min = eig.min();
            if min < -PSD_TOL * max.max(1.0) {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
        }
        Ok(Self { matrix, horizon })
    }

    /// Sums of valid Gramians are valid; skips the eigenvalue check.
    pub(crate) fn from_sum(matrix: DMatrix<f64>, horizon: Horizon) -> Self {
        Self { matrix: symmetrize(matrix), horizon }
    }

    pub fn zeros(n: usize) -> Self {
        Self { matrix: DMatrix::zeros(n, n), horizon: Horizon::Infinite }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// `‖A W + W Aᵀ + M‖_F`.
pub fn lyapunov_residual(a: &DMatrix<f64>, w: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    (a * w + w * a.transpose() + m).norm()
}

/// Real Schur factorization `A = Q T Qᵀ` reused across right-hand sides.
#[derive(Debug, Clone)]
pub struct LyapunovSolver {
    a: DMatrix<f64>,
    q: DMatrix<f64>,
    t: DMatrix<f64>,
    // (start, size) of the 1×1 and 2×2 diagonal blocks of `t`
    blocks: Vec<(usize, usize)>,
}

impl LyapunovSolver {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "dynamics matrix must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let abscissa = spectral_abscissa(a);
        if !(abscissa < -STABILITY_TOL) {
            return Err(Error::Unstable { abscissa });
        }
        let (q, mut t) = a.clone().schur().unpack();
        let n = a.nrows();
        let mut blocks = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            if i + 1 < n && t[(i + 1, i)] != 0.0 {
                blocks.push((i, 2));
                i += 2;
            } else {
                blocks.push((i, 1));
                i += 1;
            }
        }
        // clear anything below the block diagonal
        for &(s, size) in &blocks {
            for r in (s + size)..n {
                for c in s..(s + size) {
                    t[(r, c)] = 0.0;
                }
            }
        }
        Ok(Self { a: a.clone(), q, t, blocks })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Solves `A W + W Aᵀ + M = 0` for symmetric PSD `M`.
    pub fn solve(&self, m: &DMatrix<f64>) -> Result<Gramian> {
        let n = self.n();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let m_norm = m.norm();
        let asym = (m - m.transpose()).norm();
        if asym > SYMMETRY_TOL * m_norm {
            return Err(Error::NotSymmetric { asymmetry: asym / m_norm });
        }
        let bound = LYAPUNOV_RESIDUAL_TOL * m_norm.max(1.0);
        let mut w = symmetrize(self.solve_raw(m));
        let mut residual = lyapunov_residual(&self.a, &w, m);
        // iterative refinement on the residual equation
        for _ in 0..MAX_REFINEMENTS {
            if residual <= bound * 1e-3 {
                break;
            }
            let r = &self.a * &w + &w * self.a.transpose() + m;
            let next = symmetrize(&w + self.solve_raw(&symmetrize(r)));
            let next_residual = lyapunov_residual(&self.a, &next, m);
            if next_residual >= residual {
                break;
            }
            w = next;
            residual = next_residual;
        }
        if !(residual <= bound) {
            return Err(Error::Residual { residual, bound });
        }
        Gramian::new(w, Horizon::Infinite)
    }

    /// `W` with `A W + W Aᵀ + M = 0`, no checks.
    fn solve_raw(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let f = -(self.q.transpose() * m * &self.q);
        let x = self.solve_quasi_triangular(&f);
        &self.q * x * self.q.transpose()
    }

    /// Solves `T X + X Tᵀ = F` block by block, last block column first.
    fn solve_quasi_triangular(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n();
        let t = &self.t;
        let mut x = DMatrix::<f64>::zeros(n, n);
        for &(cj, q) in self.blocks.iter().rev() {
            let tail_j = cj + q;
            for &(ri, p) in self.blocks.iter().rev() {
                let tail_i = ri + p;
                let mut rhs = f.view((ri, cj), (p, q)).clone_owned();
                if tail_i < n {
                    rhs -= t.view((ri, tail_i), (p, n - tail_i)) * x.view((tail_i, cj), (n - tail_i, q));
                }
                if tail_j < n {
                    rhs -= x.view((ri, tail_j), (p, n - tail_j))
                        * t.view((cj, tail_j), (q, n - tail_j)).transpose();
                }
                let tii = t.view((ri, ri), (p, p));
                let tjj = t.view((cj, cj), (q, q));
                let sol = solve_small_sylvester(&tii.clone_owned(), &tjj.clone_owned(), &rhs);
                x.view_mut((ri, cj), (p, q)).copy_from(&sol);
            }
        }
        x
    }
}

/// `P X + X Rᵀ = C` for blocks of size at most 2, via the Kronecker form.
fn solve_small_sylvester(p: &DMatrix<f64>, r: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let (pn, qn) = (p.nrows(), r.nrows());
    if pn == 1 && qn == 1 {
        return DMatrix::from_element(1, 1, c[(0, 0)] / (p[(0, 0)] + r[(0, 0)]));
    }
    let dim = pn * qn;
    // vec(P X) = (I ⊗ P) vec X,  vec(X Rᵀ) = (R ⊗ I) vec X
    let k = DMatrix::from_fn(dim, dim, |row, col| {
        let (i, j) = (row % pn, row / pn);
        let (k, l) = (col % pn, col / pn);
        let mut v = 0.0;
        if j == l {
            v += p[(i, k)];
        }
        if i == k {
            v += r[(j, l)];
        }
        v
    });
    let rhs = DVector::from_column_slice(c.as_slice());
    let sol = k
        .lu()
        .solve(&rhs)
        .expect("Sylvester block is singular; A has eigenvalues summing to zero");
    DMatrix::from_column_slice(pn, qn, sol.as_slice())
}

/// Infinite-horizon Gramian: solution of `A W + W Aᵀ + M = 0` for stable `A`.
pub fn solve_lyapunov(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Gramian> {
    LyapunovSolver::new(a)?.solve(m)
}

/// Observability Gramian of `(A, C)`, i.e. the controllability Gramian of `(Aᵀ, Cᵀ)`.
pub fn observability_gramian(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Gramian> {
    if c.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "C has {} columns, A is {}x{}",
            c.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    solve_lyapunov(&a.transpose(), &(c.transpose() * c))
}

/// Per-candidate Gramians of a system, so that `W_S = W_base + Σ_{s∈S} W_s`.
#[derive(Debug, Clone)]
pub struct GramianCache {
    system: Arc<LtiSystem>,
    base: Gramian,
    per_candidate: Vec<Gramian>,
}

impl GramianCache {
    /// Solves one Lyapunov equation per candidate (plus one for `B₀`), in parallel.
    pub fn build(system: impl Into<Arc<LtiSystem>>) -> Result<Self> {
        let system = system.into();
        let n = system.n();
        let solver = LyapunovSolver::new(system.a())?;
        let base = if system.base().ncols() == 0 {
            Gramian::zeros(n)
        } else {
            let b0 = system.base();
            solver.solve(&(b0 * b0.transpose()))?
        };
        let per_candidate = system
            .candidates()
            .par_iter()
            .map(|c| {
                solver
                    .solve(&(&c.column * c.column.transpose()))
                    .map_err(|e| Error::Candidate { id: c.id.clone(), source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { system, base, per_candidate })
    }

    pub fn system(&self) -> &LtiSystem {
        &self.system
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn len(&self) -> usize {
        self.per_candidate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_candidate.is_empty()
    }

    pub fn base(&self) -> &Gramian {
        &self.base
    }

    pub fn candidate(&self, index: usize) -> &Gramian {
        &self.per_candidate[index]
    }

    pub fn candidate_by_id(&self, id: &str) -> Option<&Gramian> {
        self.system.index_of(id).map(|i| &self.per_candidate[i])
    }

    /// `W_S` for a set of candidate ids. Repeated ids count once.
    pub fn gramian_of<S: AsRef<str>>(&self, ids: &[S]) -> Result<Gramian> {
        let indices = ids
            .iter()
            .map(|id| {
                let id = id.as_ref();
                self.system.index_of(id).ok_or_else(|| Error::UnknownCandidate(id.to_owned()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.gramian_of_indices(&indices)
    }

    pub fn gramian_of_indices(&self, indices: &[usize]) -> Result<Gramian> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&i| i >= self.len()) {
            return Err(Error::UnknownCandidate(format!("#{bad}")));
        }
        Ok(Gramian::from_sum(self.sum_matrix(&sorted), Horizon::Infinite))
    }

    /// `W_base + Σ W_s` over `indices` (assumed distinct and in range), summed in the given order.
    pub(crate) fn sum_matrix(&self, indices: &[usize]) -> DMatrix<f64> {
        let mut w = self.base.matrix.clone();
        for &i in indices {
            w += &self.per_candidate[i].matrix;
        }
        w
    }
}

/// Finite-horizon Gramian `∫₀ᵗ e^{Aτ} B Bᵀ e^{Aᵀτ} dτ`; `A` need not be stable.
///
/// The integral over a short step `h` is read off `exp(h·[[−A, BBᵀ], [0, Aᵀ]])`; the horizon is
/// then reached by doubling with `W(2h) = W(h) + e^{Ah} W(h) e^{Aᵀh}`.
pub fn finite_horizon_gramian(a: &DMatrix<f64>, b: &DMatrix<f64>, t: f64) -> Result<Gramian> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {t}")));
    }
    let (w, _) = finite_gramian_and_transition(a, &(b * b.transpose()), t);
    Gramian::new(w, Horizon::Finite(t))
}

/// Returns `(W(t), e^{At})`.
fn finite_gramian_and_transition(a: &DMatrix<f64>, bbt: &DMatrix<f64>, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let a_norm = a.abs().column_sum().max();
    let mut doublings = 0u32;
    if a_norm * t > 0.5 {
        doublings = ((a_norm * t / 0.5).log2().ceil() as u32).min(60);
    }
    let h = t / 2f64.powi(doublings as i32);
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(-a * h));
    block.view_mut((0, n), (n, n)).copy_from(&(bbt * h));
    block.view_mut((n, n), (n, n)).copy_from(&(a.transpose() * h));
    let e = block.exp();
    let f12 = e.view((0, n), (n, n)).clone_owned();
    let phi = e.view((n, n), (n, n)).transpose(); // e^{Ah}
    let mut w = symmetrize(&phi * f12);
    let mut phi = phi;
    for _ in 0..doublings {
        w = symmetrize(&w + &phi * &w * phi.transpose());
        phi = &phi * &phi;
    }
    (w, phi)
}

/// Minimum-energy transfer from the origin to `target` in time `horizon`.
#[derive(Debug, Clone)]
pub struct EnergyControl {
    pub horizon: f64,
    pub target: DVector<f64>,
    pub energy: f64,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    // W_c(t)⁻¹ x_f
    costate: DVector<f64>,
}

/// Result of integrating the closed-form input through the dynamics.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub endpoint: DVector<f64>,
    pub endpoint_error: f64,
    pub realized_energy: f64,
    pub steps: usize,
}

impl EnergyControl {
    /// `u*(τ) = Bᵀ e^{Aᵀ(t−τ)} W_c(t)⁻¹ x_f`.
    pub fn input_at(&self, tau: f64) -> DVector<f64> {
        let e = (self.a.transpose() * (self.horizon - tau)).exp();
        self.b.transpose() * (e * &self.costate)
    }

    /// Integrates `ẋ = A x + B u*(τ)` from `x(0) = 0` together with `∫‖u*‖²` using classical RK4,
    /// starting at 2000 steps and doubling until the endpoint moves by less than `1e-9`.
    pub fn simulate(&self) -> Simulation {
        let scale = self.target.norm().max(1.0);
        let mut steps = 2000;
        let mut prev = self.integrate(steps);
        loop {
            let next = self.integrate(steps * 2);
            steps *= 2;
            let change = (&next.0 - &prev.0).norm();
            prev = next;
            if change < 1e-9 * scale || steps >= 2000 << 8 {
                break;
            }
        }
        let (endpoint, realized_energy) = prev;
        Simulation {
            endpoint_error: (&endpoint - &self.target).norm(),
            endpoint,
            realized_energy,
            steps,
        }
    }

    // state z = [x; p; e] with p(τ) = e^{Aᵀ(t−τ)} η, so u = Bᵀp and ṗ = −Aᵀp
    fn integrate(&self, steps: usize) -> (DVector<f64>, f64) {
        let n = self.a.nrows();
        let bbt = &self.b * self.b.transpose();
        let at = self.a.transpose();
        let rhs = |z: &DVector<f64>| -> DVector<f64> {
            let x = z.rows(0, n);
            let p = z.rows(n, n);
            let u = self.b.transpose() * p;
            let mut dz = DVector::zeros(2 * n + 1);
            dz.rows_mut(0, n).copy_from(&(&self.a * x + &bbt * p));
            dz.rows_mut(n, n).copy_from(&(-(&at * p)));
            dz[2 * n] = u.norm_squared();
            dz
        };
        let mut z = DVector::zeros(2 * n + 1);
        let p0 = (&at * self.horizon).exp() * &self.costate;
        z.rows_mut(n, n).copy_from(&p0);
        let h = self.horizon / steps as f64;
        for _ in 0..steps {
            let k1 = rhs(&z);
            let k2 = rhs(&(&z + &k1 * (h / 2.0)));
            let k3 = rhs(&(&z + &k2 * (h / 2.0)));
            let k4 = rhs(&(&z + &k3 * h));
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        (z.rows(0, n).clone_owned(), z[2 * n])
    }
}

/// Closed-form minimum-energy input; fails if `W_c(t)` is numerically rank deficient.
pub fn min_energy_input(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    horizon: f64,
    target: &DVector<f64>,
    policy: &RankPolicy,
) -> Result<EnergyControl> {
    let n = a.nrows();
    if target.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "target has length {}, expected {n}",
            target.len()
        )));
    }
    let w = finite_horizon_gramian(a, b, horizon)?;
    let rank = policy.numerical_rank(&w.matrix.symmetric_eigenvalues());
    if rank < n {
        return Err(Error::Uncontrollable { rank, n });
    }
    let costate = w
        .matrix
        .clone()
        .cholesky()
        .map(|c| c.solve(target))
        .or_else(|| w.matrix.clone().lu().solve(target))
        .ok_or(Error::Uncontrollable { rank, n })?;
    let energy = target.dot(&costate);
    Ok(EnergyControl {
        horizon,
        target: target.clone(),
        energy,
        a: a.clone(),
        b: b.clone(),
        costate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{random_stable_system, unit_candidates};
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    fn counterexample_a() -> DMatrix<f64> {
        dmatrix![-8.0, 0.0, -2.0; 0.0, -2.0, -8.0; 7.0, 0.0, -3.0]
    }

    #[test]
    fn closed_form_lyapunov() {
        let w = solve_lyapunov(&(-DMatrix::identity(2, 2)), &DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(w.matrix(), &(DMatrix::identity(2, 2) * 0.5), epsilon = 1e-14);
        let w = solve_lyapunov(&dmatrix![-1.0, 0.0; 0.0, -2.0], &dmatrix![1.0, 0.0; 0.0, 0.0]).unwrap();
        assert_relative_eq!(w.matrix(), &dmatrix![0.5, 0.0; 0.0, 0.0], epsilon = 1e-14);
    }

    #[test]
    fn complex_pair_block_residual() {
        // rotation-dominated dynamics produce 2×2 Schur blocks
        let a = dmatrix![-0.1, 5.0, 0.0; -5.0, -0.1, 1.0; 0.0, 0.0, -1.0];
        let m = dmatrix![1.0, 0.2, 0.0; 0.2, 2.0, 0.1; 0.0, 0.1, 0.5];
        let w = solve_lyapunov(&a, &m).unwrap();
        assert!(lyapunov_residual(&a, w.matrix(), &m) < 1e-12);
        let w = solve_lyapunov(&counterexample_a(), &DMatrix::identity(3, 3)).unwrap();
        assert!(lyapunov_residual(&counterexample_a(), w.matrix(), &DMatrix::identity(3, 3)) < 1e-13);
    }

    #[test]
    fn lyapunov_rejects_bad_input() {
        assert!(matches!(
            solve_lyapunov(&dmatrix![0.5], &dmatrix![1.0]),
            Err(Error::Unstable { .. })
        ));
        assert!(matches!(
            solve_lyapunov(&(-DMatrix::identity(2, 2)), &dmatrix![1.0, 1.0; 0.0, 1.0]),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            solve_lyapunov(&(-DMatrix::identity(2, 2)), &DMatrix::identity(3, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cache_of_diagonal_system() {
        let n = 3;
        let a = DMatrix::from_diagonal(&dvector![-1.0, -2.0, -3.0]);
        let sys = LtiSystem::new(a, DMatrix::zeros(n, 0), unit_candidates(n, n)).unwrap();
        let cache = GramianCache::build(sys).unwrap();
        for i in 0..n {
            let mut expected = DMatrix::zeros(n, n);
            expected[(i, i)] = 1.0 / (2.0 * (i + 1) as f64);
            assert_relative_eq!(cache.candidate(i).matrix(), &expected, epsilon = 1e-15);
        }
        let w = cache.gramian_of(&["e1", "e2"]).unwrap();
        assert_relative_eq!(w.matrix(), &DMatrix::from_diagonal(&dvector![0.5, 0.25, 0.0]), epsilon = 1e-15);
        assert_eq!(cache.gramian_of::<&str>(&[]).unwrap().matrix(), &DMatrix::zeros(n, n));
        assert!(matches!(cache.gramian_of(&["nope"]), Err(Error::UnknownCandidate(_))));
    }

    #[test]
    fn empty_cache() {
        let sys = LtiSystem::new(dmatrix![-1.0], DMatrix::zeros(1, 0), vec![]).unwrap();
        let cache = GramianCache::build(sys).unwrap();
        assert!(cache.is_empty());
        assert_eq!(cache.base().matrix(), &DMatrix::zeros(1, 1));
    }

    #[test]
    fn base_columns_enter_every_subset() {
        let sys = LtiSystem::new(
            dmatrix![-1.0, 0.0; 0.0, -2.0],
            dmatrix![0.0; 2.0],
            unit_candidates(2, 1),
        )
        .unwrap();
        let cache = GramianCache::build(sys).unwrap();
        let w = cache.gramian_of::<&str>(&[]).unwrap();
        assert_relative_eq!(w.matrix(), &dmatrix![0.0, 0.0; 0.0, 1.0], epsilon = 1e-15);
        let w = cache.gramian_of(&["e1"]).unwrap();
        assert_relative_eq!(w.matrix(), &dmatrix![0.5, 0.0; 0.0, 1.0], epsilon = 1e-15);
    }

    #[test]
    fn full_set_matches_direct_solve() {
        let sys = random_stable_system(12, 12, 3, 0.5).unwrap();
        let b = sys.input_matrix(&(0..12).collect::<Vec<_>>());
        let direct = solve_lyapunov(sys.a(), &(&b * b.transpose())).unwrap();
        let cache = GramianCache::build(sys).unwrap();
        let summed = cache.gramian_of_indices(&(0..12).collect::<Vec<_>>()).unwrap();
        let rel = (summed.matrix() - direct.matrix()).norm() / direct.matrix().norm();
        assert!(rel < 1e-8, "relative difference {rel}");
    }

    #[test]
    fn finite_horizon_closed_forms() {
        let w = finite_horizon_gramian(&dmatrix![-1.0], &dmatrix![1.0], 1.0).unwrap();
        assert_relative_eq!(w.matrix()[(0, 0)], (1.0 - (-2.0f64).exp()) / 2.0, max_relative = 1e-13);
        let w = finite_horizon_gramian(&dmatrix![0.0], &dmatrix![1.0], 2.0).unwrap();
        assert_relative_eq!(w.matrix()[(0, 0)], 2.0, max_relative = 1e-13);
        assert_eq!(w.horizon(), Horizon::Finite(2.0));
        assert!(finite_horizon_gramian(&dmatrix![0.0], &dmatrix![1.0], 0.0).is_err());
    }

    #[test]
    fn finite_horizon_small_t() {
        let a = counterexample_a();
        let b = dmatrix![1.0, 0.0; 0.0, 2.0; 1.0, 1.0];
        let bbt = &b * b.transpose();
        let t = 1e-8;
        let w = finite_horizon_gramian(&a, &b, t).unwrap();
        assert!(w.matrix().norm() <= 2e-8 * bbt.norm());
        // first-order term, error O(t² ‖A‖ ‖BBᵀ‖)
        assert!((w.matrix() - &bbt * t).norm() <= 1e-6 * t * bbt.norm());
    }

    #[test]
    fn finite_horizon_unstable_scalar() {
        // ∫₀ᵗ e^{2τ} dτ = (e^{2t} − 1)/2
        let w = finite_horizon_gramian(&dmatrix![1.0], &dmatrix![1.0], 3.0).unwrap();
        assert_relative_eq!(w.matrix()[(0, 0)], ((6.0f64).exp() - 1.0) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn finite_horizon_converges_to_lyapunov() {
        let sys = random_stable_system(6, 2, 11, 0.5).unwrap();
        let b = sys.input_matrix(&[0, 1]);
        let inf = solve_lyapunov(sys.a(), &(&b * b.transpose())).unwrap();
        let t = 40.0 / sys.abscissa().abs();
        let fin = finite_horizon_gramian(sys.a(), &b, t).unwrap();
        let rel = (fin.matrix() - inf.matrix()).norm() / inf.matrix().norm();
        assert!(rel < 1e-6, "relative difference {rel}");
    }

    #[test]
    fn observability_duality() {
        let w = observability_gramian(&(-DMatrix::identity(2, 2)), &DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(w.matrix(), &(DMatrix::identity(2, 2) * 0.5), epsilon = 1e-14);
        let w = observability_gramian(&dmatrix![-1.0, 0.0; 0.0, -2.0], &dmatrix![1.0, 0.0]).unwrap();
        assert_relative_eq!(w.matrix(), &dmatrix![0.5, 0.0; 0.0, 0.0], epsilon = 1e-14);
        let a = counterexample_a();
        let b = dmatrix![1.0; -2.0; 0.5];
        let lhs = observability_gramian(&a.transpose(), &b.transpose()).unwrap();
        let rhs = solve_lyapunov(&a, &(&b * b.transpose())).unwrap();
        assert_relative_eq!(lhs.matrix(), rhs.matrix(), epsilon = 1e-13);
    }

    #[test]
    fn gramian_rejects_indefinite() {
        assert!(matches!(
            Gramian::new(dmatrix![1.0, 0.0; 0.0, -1e-3], Horizon::Infinite),
            Err(Error::NotPsd { .. })
        ));
        let g = Gramian::new(dmatrix![1.0, 2.0; 0.0, 4.0], Horizon::Infinite).unwrap();
        assert_eq!(g.matrix(), &dmatrix![1.0, 1.0; 1.0, 4.0]);
    }

    #[test]
    fn scalar_min_energy() {
        let policy = RankPolicy::default();
        let ctl = min_energy_input(&dmatrix![0.0], &dmatrix![1.0], 1.0, &dvector![1.0], &policy).unwrap();
        assert_relative_eq!(ctl.energy, 1.0, max_relative = 1e-12);
        for tau in [0.0, 0.3, 1.0] {
            assert_relative_eq!(ctl.input_at(tau)[0], 1.0, max_relative = 1e-12);
        }
        let ctl = min_energy_input(&dmatrix![-1.0], &dmatrix![1.0], 1.0, &dvector![1.0], &policy).unwrap();
        assert_relative_eq!(ctl.energy, 2.0 / (1.0 - (-2.0f64).exp()), max_relative = 1e-12);
        let sim = ctl.simulate();
        assert!(sim.endpoint_error < 1e-6);
        assert_relative_eq!(sim.realized_energy, ctl.energy, max_relative = 1e-6);
    }

    #[test]
    fn min_energy_uncontrollable() {
        let a = dmatrix![-1.0, 0.0; 0.0, -2.0];
        let b = dmatrix![1.0; 0.0];
        let err = min_energy_input(&a, &b, 1.0, &dvector![1.0, 1.0], &RankPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::Uncontrollable { rank: 1, n: 2 }));
    }
}
