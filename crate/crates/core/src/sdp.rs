//! Small dense semidefinite programs in linear-matrix-inequality form.
//!
//! ```text
//! minimize    cᵀx
//! subject to  F₀ᵇ + Σ_k x_k F_kᵇ ⪰ 0   for every block b   (F Hermitian)
//!             A x = b                                    (optional)
//! ```
//!
//! The solver is a primal-dual interior-point method with the HKM search
//! direction and Mehrotra predictor-corrector steps. Complex blocks are
//! embedded as real symmetric matrices of twice the size. Equalities are
//! eliminated up front, the remaining variables are re-parametrized so the
//! constraint matrices are orthonormal, and the iteration keeps `x` strictly
//! feasible (after a phase-I search when the supplied start is not). The
//! dual matrix is projected onto its affine constraints at every iteration,
//! and only a positive semidefinite projection is reported as a dual bound,
//! so the reported dual objective is always a valid lower bound.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use noisy_metrology::sdp::{solve, LmiBlock, SdpProblem, SdpStatus};
//! use num_complex::Complex64;
//!
//! // Largest eigenvalue of M as: minimize λ subject to λ·1 - M ⪰ 0.
//! let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, -2.0]).map(|v| Complex64::new(v, 0.0)));
//! let mut block = LmiBlock::new(3, 1);
//! block.constant = -m;
//! block.coefficients[0] = DMatrix::identity(3, 3);
//! let sol = solve(&SdpProblem::new(DVector::from_vec(vec![1.0]), vec![block])).unwrap();
//! assert_eq!(sol.status, SdpStatus::Optimal);
//! assert!((sol.objective_value - 3.0).abs() < 1e-8);
//! ```

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One Hermitian LMI block `F₀ + Σ_k x_k F_k ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    pub constant: DMatrix<Complex64>,
    /// One matrix per variable, in variable order.
    pub coefficients: Vec<DMatrix<Complex64>>,
}

impl LmiBlock {
    /// Block of size `dim` with all matrices zero.
    pub fn new(dim: usize, num_vars: usize) -> Self {
        Self { constant: DMatrix::zeros(dim, dim), coefficients: vec![DMatrix::zeros(dim, dim); num_vars] }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> DMatrix<Complex64> {
        self.coefficients
            .iter()
            .zip(x.iter())
            .fold(self.constant.clone(), |acc, (f, &xk)| acc + f * Complex64::new(xk, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearEqualities {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub num_vars: usize,
    pub objective: DVector<f64>,
    pub blocks: Vec<LmiBlock>,
    pub equalities: Option<LinearEqualities>,
    /// Optional starting point; used directly when it is strictly feasible.
    pub initial_point: Option<DVector<f64>>,
}

impl SdpProblem {
    pub fn new(objective: DVector<f64>, blocks: Vec<LmiBlock>) -> Self {
        Self { num_vars: objective.len(), objective, blocks, equalities: None, initial_point: None }
    }

    pub fn with_equalities(mut self, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        self.equalities = Some(LinearEqualities { a, b });
        self
    }

    pub fn with_initial_point(mut self, x: DVector<f64>) -> Self {
        self.initial_point = Some(x);
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.objective.len() != self.num_vars {
            return bad(format!("objective has {} entries for {} variables", self.objective.len(), self.num_vars));
        }
        for (i, block) in self.blocks.iter().enumerate() {
            let dim = block.dim();
            if block.constant.ncols() != dim || block.coefficients.len() != self.num_vars {
                return bad(format!("block {i} is malformed"));
            }
            for m in std::iter::once(&block.constant).chain(&block.coefficients) {
                if m.nrows() != dim || m.ncols() != dim {
                    return bad(format!("block {i} mixes matrix sizes"));
                }
                if (m - m.adjoint()).norm() > 1e-12 * (1.0 + m.norm()) {
                    return bad(format!("block {i} has a non-Hermitian matrix"));
                }
            }
        }
        if let Some(eq) = &self.equalities {
            if eq.a.ncols() != self.num_vars || eq.a.nrows() != eq.b.len() {
                return bad("equality constraint dimensions do not match".into());
            }
        }
        if let Some(x) = &self.initial_point {
            if x.len() != self.num_vars {
                return bad("initial point has the wrong length".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub primal_objective: f64,
    /// Certified lower bound, `-∞` while the projected dual matrix is not PSD.
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: DVector<f64>,
    pub objective_value: f64,
    pub dual_objective: f64,
    /// `(primal - dual) / max(|primal|, |dual|)`.
    pub duality_gap: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub gap_tol: f64,
    pub step_fraction: f64,
    /// Further iterations taken once the gap tolerance is met.
    pub polish_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 200, gap_tol: 1e-8, step_fraction: 0.99, polish_iter: 2 }
    }
}

/// Constraint violation of a candidate point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityResidual {
    /// Most negative eigenvalue over all blocks, or 0 when all are PSD.
    pub lmi: f64,
    /// `‖A x - b‖₂`, 0 without equalities.
    pub equality: f64,
}

pub fn check_feasibility(problem: &SdpProblem, x: &DVector<f64>) -> FeasibilityResidual {
    let lmi = problem
        .blocks
        .iter()
        .filter(|b| b.dim() > 0)
        .map(|b| SymmetricEigen::new(b.evaluate(x)).eigenvalues.min())
        .fold(0.0, f64::min);
    let equality = problem.equalities.as_ref().map_or(0.0, |eq| (&eq.a * x - &eq.b).norm());
    FeasibilityResidual { lmi, equality }
}

/// `[[Re H, -Im H], [Im H, Re H]]`.
fn realify(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

type Blocks = Vec<DMatrix<f64>>;

fn block_dot(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn combine(base: &Blocks, dirs: &[Blocks], w: &DVector<f64>) -> Blocks {
    let mut out = base.clone();
    for (dir, &wj) in dirs.iter().zip(w.iter()) {
        if wj != 0.0 {
            for (o, d) in out.iter_mut().zip(dir) {
                *o += d * wj;
            }
        }
    }
    out
}

fn min_eigenvalue(blocks: &Blocks) -> f64 {
    blocks
        .iter()
        .filter(|b| b.nrows() > 0)
        .map(|b| SymmetricEigen::new(b.clone()).eigenvalues.min())
        .fold(f64::INFINITY, f64::min)
}

fn spectral_scale(blocks: &Blocks) -> f64 {
    blocks
        .iter()
        .filter(|b| b.nrows() > 0)
        .map(|b| SymmetricEigen::new(b.clone()).eigenvalues.amax())
        .fold(0.0, f64::max)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `α` with `X + α ΔX ⪰ 0`, given the Cholesky factor of `X`.
fn step_to_boundary(chol: &Cholesky<f64, nalgebra::Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let Some(tmp) = l.solve_lower_triangular(dx) else { return 0.0 };
    let Some(scaled) = l.solve_lower_triangular(&tmp.transpose()) else { return 0.0 };
    let lambda = SymmetricEigen::new(symmetrize(&scaled)).eigenvalues.min();
    if lambda >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda
    }
}

fn max_step(chols: &[Cholesky<f64, nalgebra::Dyn>], dirs: &Blocks) -> f64 {
    chols.iter().zip(dirs).map(|(c, d)| step_to_boundary(c, d)).fold(f64::INFINITY, f64::min)
}

const DUAL_PSD_TOL: f64 = 1e-9;
/// Smallest relative eigenvalue margin accepted as a strictly feasible start.
const STRICT_TOL: f64 = 1e-13;
const EQUALITY_RANK_TOL: f64 = 1e-12;

fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(ch.solve(rhs));
    }
    m.clone().lu().solve(rhs)
}

/// Strictly feasible LMI problem in reduced variables with real symmetric blocks.
struct Core<'a> {
    g0: &'a Blocks,
    dirs: &'a [Blocks],
    c: &'a DVector<f64>,
    gram: Cholesky<f64, nalgebra::Dyn>,
    dim_total: usize,
}

struct CoreResult {
    w: DVector<f64>,
    status: SdpStatus,
    iterations: usize,
    /// `(cᵀw, certified dual)` per iteration in reduced units.
    history: Vec<(f64, f64)>,
}

impl<'a> Core<'a> {
    fn new(g0: &'a Blocks, dirs: &'a [Blocks], c: &'a DVector<f64>) -> Option<Self> {
        let k = dirs.len();
        let gram = DMatrix::from_fn(k, k, |i, j| block_dot(&dirs[i], &dirs[j]));
        let gram = Cholesky::new(gram)?;
        let dim_total = g0.iter().map(|b| b.nrows()).sum();
        Some(Self { g0, dirs, c, gram, dim_total })
    }

    /// Dual objective of `X` projected onto `{X : ⟨G_j, X⟩ = c_j}`.
    ///
    /// A projection that is PSD up to roundoff is accepted with its value
    /// lowered by `λ_min(X̂) tr(S)`, which keeps it below the primal value at `S`.
    fn certified_dual(&self, x: &Blocks, s: &Blocks) -> f64 {
        let r = DVector::from_fn(self.dirs.len(), |j, _| self.c[j] - block_dot(&self.dirs[j], x));
        let y = self.gram.solve(&r);
        let projected = combine(x, self.dirs, &y);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for b in projected.iter().filter(|b| b.nrows() > 0) {
            let eig = SymmetricEigen::new(symmetrize(b)).eigenvalues;
            lo = lo.min(eig.min());
            hi = hi.max(eig.amax());
        }
        let value = -block_dot(self.g0, &projected);
        if lo >= 0.0 {
            value
        } else if lo >= -DUAL_PSD_TOL * hi {
            let trace_s: f64 = s.iter().map(|b| b.trace()).sum();
            value + lo * trace_s
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Runs from the strictly feasible `w0`; `done(w, primal, dual)` ends the iteration early.
    fn run(&self, w0: DVector<f64>, opts: &SolverOptions, done: &dyn Fn(&DVector<f64>, f64, f64) -> bool) -> CoreResult {
        let k = self.dirs.len();
        let n = self.dim_total as f64;
        let mut w = w0;
        let mut x: Blocks = self.g0.iter().map(|b| DMatrix::identity(b.nrows(), b.ncols())).collect();
        let mut history = Vec::new();
        let mut best_dual = f64::NEG_INFINITY;
        let mut polish_left: Option<usize> = None;

        for iter in 0..opts.max_iter {
            let s = combine(self.g0, self.dirs, &w);
            let Some(s_chol) = s.iter().map(|b| Cholesky::new(symmetrize(b))).collect::<Option<Vec<_>>>() else {
                return CoreResult { w, status: SdpStatus::MaxIter, iterations: iter, history };
            };
            let s_inv: Blocks = s_chol.iter().map(|c| c.inverse()).collect();
            let mu = block_dot(&x, &s) / n;

            let primal = self.c.dot(&w);
            best_dual = best_dual.max(self.certified_dual(&x, &s));
            history.push((primal, best_dual));
            if polish_left.is_none() && done(&w, primal, best_dual) {
                polish_left = Some(opts.polish_iter);
            }
            match polish_left {
                Some(0) => return CoreResult { w, status: SdpStatus::Optimal, iterations: iter, history },
                Some(left) => polish_left = Some(left - 1),
                None => {}
            }

            // Schur complement M_ij = tr(G_i X G_j S⁻¹).
            let p: Vec<Blocks> = self
                .dirs
                .iter()
                .map(|gj| gj.iter().zip(&x).zip(&s_inv).map(|((g, xb), si)| xb * g * si).collect())
                .collect();
            let mut m = DMatrix::from_fn(k, k, |i, j| block_dot(&self.dirs[i], &p[j]));
            m = symmetrize(&m);
            let trace_g_sinv = DVector::from_fn(k, |i, _| block_dot(&self.dirs[i], &s_inv));

            let Some(x_chol) = x.iter().map(|b| Cholesky::new(symmetrize(b))).collect::<Option<Vec<_>>>() else {
                return CoreResult { w, status: SdpStatus::MaxIter, iterations: iter, history };
            };

            let direction = |sigma_mu: f64, corrector: Option<&Blocks>| -> Option<(DVector<f64>, Blocks, Blocks)> {
                let xi_sinv: Option<Blocks> =
                    corrector.map(|xi| xi.iter().zip(&s_inv).map(|(a, si)| a * si).collect());
                let mut rhs = &trace_g_sinv * sigma_mu - self.c;
                if let Some(xs) = &xi_sinv {
                    for i in 0..k {
                        rhs[i] -= block_dot(&self.dirs[i], xs);
                    }
                }
                let dw = solve_spd(&m, &rhs)?;
                let ds = combine(&self.g0.iter().map(|b| DMatrix::zeros(b.nrows(), b.ncols())).collect(), self.dirs, &dw);
                let dx: Blocks = (0..x.len())
                    .map(|b| {
                        let mut d = &s_inv[b] * sigma_mu - &x[b] - &x[b] * &ds[b] * &s_inv[b];
                        if let Some(xs) = &xi_sinv {
                            d -= &xs[b];
                        }
                        symmetrize(&d)
                    })
                    .collect();
                Some((dw, ds, dx))
            };

            let Some((_, ds_aff, dx_aff)) = direction(0.0, None) else {
                return CoreResult { w, status: SdpStatus::MaxIter, iterations: iter, history };
            };
            let ap = max_step(&x_chol, &dx_aff).min(1.0);
            let ad = max_step(&s_chol, &ds_aff).min(1.0);
            let x_aff = combine(&x, &[dx_aff.clone()], &DVector::from_element(1, ap));
            let s_aff = combine(&s, &[ds_aff.clone()], &DVector::from_element(1, ad));
            let mu_aff = block_dot(&x_aff, &s_aff) / n;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            let xi: Blocks = dx_aff.iter().zip(&ds_aff).map(|(a, b)| a * b).collect();
            let Some((dw, ds, dx)) = direction(sigma * mu, Some(&xi)) else {
                return CoreResult { w, status: SdpStatus::MaxIter, iterations: iter, history };
            };
            let mut ap = (opts.step_fraction * max_step(&x_chol, &dx)).min(1.0);
            let mut ad = (opts.step_fraction * max_step(&s_chol, &ds)).min(1.0);
            // Roundoff can leave the recomputed iterate just outside the cone; back off.
            let x_next = loop {
                let cand: Blocks = x.iter().zip(&dx).map(|(xb, d)| xb + d * ap).collect();
                if cand.iter().all(|b| Cholesky::new(symmetrize(b)).is_some()) {
                    break Some(cand);
                }
                ap *= 0.5;
                if ap < 1e-12 {
                    break None;
                }
            };
            let w_next = loop {
                let cand = &w + &dw * ad;
                let s_cand = combine(self.g0, self.dirs, &cand);
                if s_cand.iter().all(|b| Cholesky::new(symmetrize(b)).is_some()) {
                    break Some(cand);
                }
                ad *= 0.5;
                if ad < 1e-12 {
                    break None;
                }
            };
            let (Some(x_next), Some(w_next)) = (x_next, w_next) else {
                return CoreResult { w, status: SdpStatus::MaxIter, iterations: iter + 1, history };
            };
            x = x_next;
            w = w_next;
            if w.iter().any(|v| !v.is_finite()) {
                return CoreResult { w, status: SdpStatus::MaxIter, iterations: iter + 1, history };
            }
        }
        CoreResult { w, status: SdpStatus::MaxIter, iterations: opts.max_iter, history }
    }
}

/// The problem after equality elimination and orthonormalization: `x = x0 + T w`.
struct Reduced {
    x0: DVector<f64>,
    transform: DMatrix<f64>,
    g0: Blocks,
    dirs: Vec<Blocks>,
    c: DVector<f64>,
    const_obj: f64,
}

enum Reduction {
    Ready(Reduced),
    Infeasible(DVector<f64>),
    Unbounded(DVector<f64>),
}

fn reduce(problem: &SdpProblem) -> Reduction {
    let nv = problem.num_vars;
    let f0: Blocks = problem.blocks.iter().map(|b| realify(&b.constant)).collect();
    let fk: Vec<Blocks> =
        (0..nv).map(|k| problem.blocks.iter().map(|b| realify(&b.coefficients[k])).collect()).collect();

    // Equalities: x = x0 + basis · v with basis spanning null(A).
    let (x0, basis) = match &problem.equalities {
        None => (DVector::zeros(nv), DMatrix::identity(nv, nv)),
        Some(eq) => {
            if nv == 0 {
                return if eq.b.norm() > 1e-9 { Reduction::Infeasible(DVector::zeros(0)) } else {
                    Reduction::Ready(Reduced { x0: DVector::zeros(0), transform: DMatrix::zeros(0, 0), g0: f0, dirs: vec![], c: DVector::zeros(0), const_obj: 0.0 })
                };
            }
            // Aᵀ = Q R Π with column pivoting; the first k columns of Q span the row space of A.
            let (x0, q, k) = range_solve(&eq.a, &eq.b);
            let mut projector = DMatrix::<f64>::identity(nv, nv);
            for i in 0..k {
                let v = q.column(i);
                projector -= v * v.transpose();
            }
            // The null space of A is the unit-eigenvalue eigenspace of I - VVᵀ.
            let eig = SymmetricEigen::new(symmetrize(&projector));
            let null_cols: Vec<DVector<f64>> = (0..nv)
                .filter(|&i| eig.eigenvalues[i] > 0.5)
                .map(|i| eig.eigenvectors.column(i).clone_owned())
                .collect();
            if (&eq.a * &x0 - &eq.b).norm() > 1e-9 * (1.0 + eq.b.norm()) {
                return Reduction::Infeasible(x0);
            }
            let basis = if null_cols.is_empty() { DMatrix::zeros(nv, 0) } else { DMatrix::from_columns(&null_cols) };
            (x0, basis)
        }
    };

    let g0 = combine(&f0, &fk, &x0);
    let kdim = basis.ncols();
    let h: Vec<Blocks> = (0..kdim)
        .map(|j| {
            let zero: Blocks = f0.iter().map(|b| DMatrix::zeros(b.nrows(), b.ncols())).collect();
            combine(&zero, &fk, &basis.column(j).clone_owned())
        })
        .collect();
    let c_reduced = basis.transpose() * &problem.objective;

    let gram = DMatrix::from_fn(kdim, kdim, |i, j| block_dot(&h[i], &h[j]));
    if kdim == 0 {
        let const_obj = problem.objective.dot(&x0);
        return Reduction::Ready(Reduced { x0, transform: DMatrix::zeros(nv, 0), g0, dirs: vec![], c: DVector::zeros(0), const_obj });
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let c_scale = c_reduced.norm();
    let mut kept = Vec::new();
    for l in 0..kdim {
        let u = eig.eigenvectors.column(l);
        if top > 0.0 && eig.eigenvalues[l] > 1e-12 * top {
            kept.push(l);
        } else if u.dot(&c_reduced).abs() > 1e-12 * c_scale.max(f64::MIN_POSITIVE) {
            // The objective decreases along a direction no constraint sees.
            return Reduction::Unbounded(x0);
        }
    }
    let mut transform = DMatrix::zeros(nv, kept.len());
    let mut dirs = Vec::with_capacity(kept.len());
    for (col, &l) in kept.iter().enumerate() {
        let u = eig.eigenvectors.column(l) / eig.eigenvalues[l].sqrt();
        transform.set_column(col, &(&basis * &u));
        let zero: Blocks = f0.iter().map(|b| DMatrix::zeros(b.nrows(), b.ncols())).collect();
        dirs.push(combine(&zero, &h, &u));
    }
    let c = transform.transpose() * &problem.objective;
    let const_obj = problem.objective.dot(&x0);
    Reduction::Ready(Reduced { x0, transform, g0, dirs, c, const_obj })
}

fn finish(
    problem: &SdpProblem,
    x: DVector<f64>,
    status: SdpStatus,
    dual: f64,
    iterations: usize,
    history: Vec<IterationRecord>,
) -> SdpSolution {
    let objective_value = problem.objective.dot(&x);
    let duality_gap = if dual.is_finite() {
        let denom = objective_value.abs().max(dual.abs());
        if denom > 0.0 { (objective_value - dual) / denom } else { 0.0 }
    } else {
        f64::INFINITY
    };
    SdpSolution { x, objective_value, dual_objective: dual, duality_gap, status, iterations, history }
}

pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    solve_with(problem, &SolverOptions::default())
}

pub fn solve_with(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let red = match reduce(problem) {
        Reduction::Ready(r) => r,
        Reduction::Infeasible(x) => return Ok(finish(problem, x, SdpStatus::Infeasible, f64::NEG_INFINITY, 0, vec![])),
        Reduction::Unbounded(x) => return Ok(finish(problem, x, SdpStatus::Unbounded, f64::NEG_INFINITY, 0, vec![])),
    };
    let k = red.dirs.len();
    let has_blocks = red.g0.iter().any(|b| b.nrows() > 0);

    if k == 0 || !has_blocks {
        // Nothing left to optimize: the point x0 is optimal if it is feasible.
        let feasible = !has_blocks || min_eigenvalue(&red.g0) >= -1e-9;
        let status = if feasible { SdpStatus::Optimal } else { SdpStatus::Infeasible };
        let dual = if feasible { problem.objective.dot(&red.x0) } else { f64::NEG_INFINITY };
        return Ok(finish(problem, red.x0.clone(), status, dual, 0, vec![]));
    }

    // Starting point in reduced coordinates.
    let tt = red.transform.transpose() * &red.transform;
    let mut w0 = match &problem.initial_point {
        Some(x) => solve_spd(&tt, &(red.transform.transpose() * (x - &red.x0))).unwrap_or_else(|| DVector::zeros(k)),
        None => DVector::zeros(k),
    };
    let start = combine(&red.g0, &red.dirs, &w0);
    let scale = spectral_scale(&start).max(1.0);
    if min_eigenvalue(&start) <= STRICT_TOL * scale {
        match phase_one(&red, w0, scale, opts) {
            Some(w) => w0 = w,
            None => {
                let x = &red.x0 + &red.transform * DVector::<f64>::zeros(k);
                return Ok(finish(problem, x, SdpStatus::Infeasible, f64::NEG_INFINITY, 0, vec![]));
            }
        }
    }

    let c_scale = red.c.norm();
    if c_scale == 0.0 {
        let x = &red.x0 + &red.transform * &w0;
        let value = problem.objective.dot(&x);
        return Ok(finish(problem, x, SdpStatus::Optimal, value, 0, vec![]));
    }
    let c_unit = &red.c / c_scale;
    let Some(core) = Core::new(&red.g0, &red.dirs, &c_unit) else {
        return Err(Error::InvalidParameter("degenerate constraint matrices".into()));
    };
    let to_true = |v: f64| red.const_obj + c_scale * v;
    let gap_tol = opts.gap_tol;
    let done = |_: &DVector<f64>, primal: f64, dual: f64| {
        if !dual.is_finite() {
            return false;
        }
        let (p, d) = (to_true(primal), to_true(dual));
        let denom = p.abs().max(d.abs());
        denom == 0.0 || (p - d) <= gap_tol * denom
    };
    let mut result = core.run(w0, opts, &done);
    if let Some(&(p, d)) = result.history.last() {
        if result.status == SdpStatus::MaxIter && done(&result.w, p, d) {
            result.status = SdpStatus::Optimal;
        }
    }
    let history: Vec<IterationRecord> = result
        .history
        .iter()
        .map(|&(p, d)| IterationRecord {
            primal_objective: to_true(p),
            dual_objective: if d.is_finite() { to_true(d) } else { f64::NEG_INFINITY },
        })
        .collect();
    let dual = history.last().map_or(f64::NEG_INFINITY, |h| h.dual_objective);
    let x = &red.x0 + &red.transform * &result.w;
    Ok(finish(problem, x, result.status, dual, result.iterations, history))
}

/// Minimum-norm solution of `a x = b` together with an orthonormal basis of
/// the row space of `a` (first `k` columns of the returned matrix).
fn range_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>, usize) {
    let nv = a.ncols();
    let qr = a.transpose().col_piv_qr();
    let (q, r) = (qr.q(), qr.r());
    let diag = r.nrows().min(r.ncols());
    let top = if diag > 0 { r[(0, 0)].abs() } else { 0.0 };
    let k = (0..diag).take_while(|&i| top > 0.0 && r[(i, i)].abs() > EQUALITY_RANK_TOL * top).count();
    let mut pb = b.clone();
    qr.p().permute_rows(&mut pb);
    let mut x0 = DVector::zeros(nv);
    if k > 0 {
        let rk = r.view((0, 0), (k, k)).transpose();
        let y = rk.solve_lower_triangular(&pb.rows(0, k).clone_owned()).unwrap_or_else(|| DVector::zeros(k));
        x0 = q.columns(0, k) * y;
    }
    (x0, q, k)
}

/// Minimum-norm solution of the (possibly rank-deficient) system `a x = b`.
pub fn least_norm_solution(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    range_solve(a, b).0
}

/// Finds `w` with `G(w) ≻ 0` by minimizing `τ` subject to `G(w) + τ·1 ⪰ 0`, `τ ≥ -scale`.
fn phase_one(red: &Reduced, w0: DVector<f64>, scale: f64, opts: &SolverOptions) -> Option<DVector<f64>> {
    let k = red.dirs.len();
    let lambda_min = min_eigenvalue(&combine(&red.g0, &red.dirs, &w0));
    let tau0 = -lambda_min + scale;

    let mut g0 = red.g0.clone();
    g0.push(DMatrix::from_element(1, 1, scale));
    let mut dirs: Vec<Blocks> = red
        .dirs
        .iter()
        .map(|d| {
            let mut d = d.clone();
            d.push(DMatrix::zeros(1, 1));
            d
        })
        .collect();
    let mut tau_dir: Blocks = red.g0.iter().map(|b| DMatrix::identity(b.nrows(), b.ncols())).collect();
    tau_dir.push(DMatrix::from_element(1, 1, 1.0));
    dirs.push(tau_dir);
    let mut c = DVector::zeros(k + 1);
    c[k] = 1.0;

    let core = Core::new(&g0, &dirs, &c)?;
    let mut start = w0.clone();
    start = start.insert_row(k, tau0);
    let margin = 1e-3 * scale;
    let done = |w: &DVector<f64>, primal: f64, dual: f64| {
        w[k] < -margin || (dual.is_finite() && primal - dual <= 1e-9 * scale)
    };
    let result = core.run(start, &SolverOptions { polish_iter: 0, ..*opts }, &done);
    let tau = result.w[k];
    if tau < -STRICT_TOL * scale {
        Some(result.w.rows(0, k).clone_owned())
    } else {
        None
    }
}
