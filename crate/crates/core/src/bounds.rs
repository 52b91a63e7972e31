//! Precision bounds: closed forms for parallel noise, short-time classical
//! simulation factors, the channel-extension (CE) semidefinite bound and the
//! transversal asymptotes.
//!
//! All precisions are `δω √T`, the Cramér-Rao floor `(F / t)^{-1/2}` for a
//! total time `T` split into rounds of duration `t`.
//!
//! ```
//! use noisy_metrology::bounds::{ce_qfi_bound, CeMode};
//! use noisy_metrology::channel::ChannelParams;
//!
//! // For parallel dephasing the finite-N CE bound has a closed form.
//! let (n, gamma, t) = (10usize, 1.0, 0.2);
//! let p = ChannelParams::parallel(1.0, gamma, t).unwrap();
//! let bound = ce_qfi_bound(n, &p, CeMode::FiniteN).unwrap();
//! let nf = n as f64;
//! let closed = nf * nf * t * t / (1.0 + (2.0 * gamma * t).exp_m1() * nf);
//! assert!((bound / closed - 1.0).abs() < 1e-6);
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{kraus_set, ChannelParams, KrausSet, Mat2};
use crate::error::{Error, Result};
use crate::optimize::{default_t_max, maximize_over_t};
use crate::sdp::{self, LmiBlock, SdpProblem, SdpSolution, SdpStatus};

const CE_T_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundMethod {
    SqlParallel,
    ParallelQ,
    Cs,
    CeFinite,
    CeAsymptotic,
    Asymptote,
}

/// Lower bound on `δω √T` and the matching upper bound on `F / t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub precision_bound: f64,
    pub qfi_upper: f64,
    /// Round duration at which the bound is evaluated; `None` for `t → 0` limits.
    pub t_opt: Option<f64>,
    pub method: BoundMethod,
}

impl BoundResult {
    fn from_qfi_per_time(qfi_upper: f64, t_opt: Option<f64>, method: BoundMethod) -> Self {
        Self { precision_bound: qfi_upper.powf(-0.5), qfi_upper, t_opt, method }
    }

    fn from_precision(precision_bound: f64, t_opt: Option<f64>, method: BoundMethod) -> Self {
        Self { precision_bound, qfi_upper: precision_bound.powi(-2), t_opt, method }
    }
}

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("probe size must be at least 1".into()));
    }
    Ok(n as f64)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Shot-noise limit `√(2γe/N)` for parallel dephasing, reached at `t = 1/(2γ)`.
pub fn sql_parallel(n: usize, gamma: f64) -> Result<BoundResult> {
    let nf = check_n(n)?;
    check_positive("gamma", gamma)?;
    let precision = (2.0 * gamma * std::f64::consts::E / nf).sqrt();
    Ok(BoundResult::from_precision(precision, Some(0.5 / gamma), BoundMethod::SqlParallel))
}

/// Quantum bound `√((1 + (e^{2γt} - 1) N) / (t N²))` for parallel dephasing.
///
/// With `t = None` the bound is evaluated at its optimum
/// `t = (1 + W((1 - N)/(eN))) / 2γ`.
pub fn parallel_quantum_bound(n: usize, gamma: f64, t: Option<f64>) -> Result<BoundResult> {
    let nf = check_n(n)?;
    check_positive("gamma", gamma)?;
    let t = match t {
        Some(t) => {
            check_positive("t", t)?;
            t
        }
        None => (1.0 + lambert_w((1.0 - nf) / (std::f64::consts::E * nf))?) / (2.0 * gamma),
    };
    let qfi_per_time = t * nf * nf / (1.0 + (2.0 * gamma * t).exp_m1() * nf);
    Ok(BoundResult::from_qfi_per_time(qfi_per_time, Some(t), BoundMethod::ParallelQ))
}

/// Principal branch of the Lambert W function, `w e^w = z` for `z ≥ -1/e`.
pub fn lambert_w(z: f64) -> Result<f64> {
    let branch = -(-1.0f64).exp();
    if z.is_nan() || z < branch - 1e-15 {
        return Err(Error::DomainError(format!("lambert_w needs z >= -1/e, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let mut w = if z < -0.25 {
        let p = (2.0 * (std::f64::consts::E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if z < 3.0 {
        z.ln_1p()
    } else {
        let l = z.ln();
        l - l.ln()
    };
    if w <= -1.0 {
        return Ok(-1.0);
    }
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = (w - step).max(-1.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Axis {
    Parallel,
    Transversal,
}

/// Short-time classical simulation factor `c(γ, t) = ε(t)² t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsFactor {
    pub axis: Axis,
    pub t: f64,
    pub value: f64,
}

impl CsFactor {
    /// `ε(t)²`, the squared distance parameter; infinite at `t = 0` for parallel noise.
    pub fn epsilon_squared(&self) -> f64 {
        self.value / self.t
    }

    /// Precision bound `√(c / N)` implied by the factor.
    pub fn precision(&self, n: usize) -> Result<BoundResult> {
        let nf = check_n(n)?;
        if self.value <= 0.0 {
            return Err(Error::DomainError("classical simulation factor vanishes".into()));
        }
        Ok(BoundResult::from_precision((self.value / nf).sqrt(), Some(self.t), BoundMethod::Cs))
    }
}

/// Leading-order factors `2γ + 2γ²t` (parallel) and `γ²ω²t³/12` (transversal).
pub fn cs_factor(axis: Axis, gamma: f64, omega: f64, t: f64) -> Result<CsFactor> {
    if !(t.is_finite() && t >= 0.0) || !(gamma.is_finite() && gamma >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter("need finite t ≥ 0 and γ ≥ 0".into()));
    }
    let value = match axis {
        Axis::Parallel => 2.0 * gamma + 2.0 * gamma * gamma * t,
        Axis::Transversal => gamma * gamma * omega * omega * t.powi(3) / 12.0,
    };
    Ok(CsFactor { axis, t, value })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CeMode {
    FiniteN,
    /// Adds `β̃ = 0`, dropping the `N(N-1)` term.
    Asymptotic,
}

impl CeMode {
    fn method(self) -> BoundMethod {
        match self {
            CeMode::FiniteN => BoundMethod::CeFinite,
            CeMode::Asymptotic => BoundMethod::CeAsymptotic,
        }
    }
}

/// Optimal CE certificate at one `(N, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CeSolution {
    /// Upper bound on `F_N(t)`: `4 [N λ_a + N(N-1) λ_b]`.
    pub bound: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    /// Hermitian generator of the optimal Kraus representation.
    pub h: DMatrix<Complex64>,
    pub sdp: SdpSolution,
}

/// CE problem data for one channel; reusable for every probe size `N`.
#[derive(Debug, Clone)]
pub struct CeProblem {
    kraus: KrausSet,
    /// `-i Σ_j E_ij K_j` stacked per Hermitian basis element `E`.
    dk_dirs: Vec<Vec<Mat2>>,
    /// `-Σ_ij E_ij K_i† K_j` per basis element.
    beta_dirs: Vec<Mat2>,
    beta: Mat2,
}

/// Real coordinates of an `r×r` Hermitian matrix: diagonal, then `(Re, Im)` per upper pair.
fn hermitian_basis(r: usize) -> Vec<DMatrix<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut basis = Vec::with_capacity(r * r);
    for i in 0..r {
        let mut e = DMatrix::from_element(r, r, zero);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..r {
        for j in i + 1..r {
            let mut re = DMatrix::from_element(r, r, zero);
            re[(i, j)] = Complex64::new(1.0, 0.0);
            re[(j, i)] = Complex64::new(1.0, 0.0);
            basis.push(re);
            let mut im = DMatrix::from_element(r, r, zero);
            im[(i, j)] = Complex64::new(0.0, 1.0);
            im[(j, i)] = Complex64::new(0.0, -1.0);
            basis.push(im);
        }
    }
    basis
}

/// `[[a·1₂ , X†], [X, 1]]` pieces: writes `X` into the lower-left and `X†` into the upper-right.
fn put_offdiag(m: &mut DMatrix<Complex64>, rows: &[Mat2]) {
    for (blk, x) in rows.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                m[(2 + 2 * blk + i, j)] += x[(i, j)];
                m[(j, 2 + 2 * blk + i)] += x[(i, j)].conj();
            }
        }
    }
}

fn top_identity(dim: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim, dim);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    m[(1, 1)] = Complex64::new(1.0, 0.0);
    m
}

fn bottom_identity(dim: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::identity(dim, dim);
    m[(0, 0)] = Complex64::new(0.0, 0.0);
    m[(1, 1)] = Complex64::new(0.0, 0.0);
    m
}

fn operator_norm(m: &Mat2) -> f64 {
    (m.adjoint() * m).symmetric_eigenvalues().amax().sqrt()
}

impl CeProblem {
    pub fn new(params: &ChannelParams) -> Result<Self> {
        Ok(Self::from_kraus(kraus_set(params)?))
    }

    pub fn from_kraus(kraus: KrausSet) -> Self {
        let r = kraus.rank();
        let ks = &kraus.kraus;
        let i = Complex64::new(0.0, 1.0);
        let mut dk_dirs = Vec::with_capacity(r * r);
        let mut beta_dirs = Vec::with_capacity(r * r);
        for e in hermitian_basis(r) {
            let rows: Vec<Mat2> =
                (0..r).map(|a| (0..r).map(|b| ks[b] * (-i * e[(a, b)])).sum()).collect();
            dk_dirs.push(rows);
            let mut g = Mat2::zeros();
            for a in 0..r {
                for b in 0..r {
                    g -= ks[a].adjoint() * ks[b] * e[(a, b)];
                }
            }
            beta_dirs.push(g);
        }
        let beta: Mat2 = kraus.dkraus.iter().zip(ks).map(|(dk, k)| dk.adjoint() * k * i).sum();
        Self { kraus, dk_dirs, beta_dirs, beta }
    }

    pub fn kraus(&self) -> &KrausSet {
        &self.kraus
    }

    /// `β = i Σ K̇_i† K_i` of the starting representation.
    pub fn beta(&self) -> Mat2 {
        self.beta
    }

    fn uses_beta_block(n: usize, mode: CeMode) -> bool {
        mode == CeMode::FiniteN && n > 1
    }

    /// Size of `K̇` and `β`; the SDP works with `K̇/s`, `h/s` and `λ/s²` so its entries are O(1).
    pub fn scale(&self) -> f64 {
        let alpha: Mat2 = self.kraus.dkraus.iter().map(|dk| dk.adjoint() * dk).sum();
        let s = operator_norm(&alpha).sqrt().max(operator_norm(&self.beta));
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// The linear SDP over `(λ_a/s², [N λ_b/s²], h/s)` for probe size `n`, with `s` from [`Self::scale`].
    ///
    /// The `β̃` block is further divided by `1/√N`, the typical size of `‖β̃‖` at the optimum.
    pub fn sdp(&self, n: usize, mode: CeMode) -> Result<SdpProblem> {
        let nf = check_n(n)?;
        let scale = self.scale();
        let inv = Complex64::new(1.0 / scale, 0.0);
        let dkraus: Vec<Mat2> = self.kraus.dkraus.iter().map(|dk| dk * inv).collect();
        let beta = self.beta * inv;
        let r = self.kraus.rank();
        let with_b = Self::uses_beta_block(n, mode);
        let offset = if with_b { 2 } else { 1 };
        let num_vars = offset + r * r;

        let dim_a = 2 + 2 * r;
        let mut a_block = LmiBlock::new(dim_a, num_vars);
        a_block.constant = bottom_identity(dim_a);
        put_offdiag(&mut a_block.constant, &dkraus);
        a_block.coefficients[0] = top_identity(dim_a);
        for (p, rows) in self.dk_dirs.iter().enumerate() {
            put_offdiag(&mut a_block.coefficients[offset + p], rows);
        }
        let mut blocks = vec![a_block];

        if with_b {
            let mut b_block = LmiBlock::new(4, num_vars);
            b_block.constant = bottom_identity(4);
            let root_n = Complex64::new(nf.sqrt(), 0.0);
            put_offdiag(&mut b_block.constant, &[beta * root_n]);
            b_block.coefficients[1] = top_identity(4);
            for (p, g) in self.beta_dirs.iter().enumerate() {
                put_offdiag(&mut b_block.coefficients[offset + p], &[*g * root_n]);
            }
            blocks.push(b_block);
        }

        let mut objective = DVector::zeros(num_vars);
        let s2 = scale * scale;
        objective[0] = 4.0 * nf * s2;
        if with_b {
            objective[1] = 4.0 * (nf - 1.0) * s2;
        }

        let mut equalities = None;
        let mut h0 = DVector::zeros(r * r);
        if mode == CeMode::Asymptotic {
            // β̃ is Hermitian, so β̃ = 0 is four real equations.
            let row = |m: &Mat2| [m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)].re, m[(0, 1)].im];
            let mut a = DMatrix::zeros(4, r * r);
            for (p, g) in self.beta_dirs.iter().enumerate() {
                for (q, v) in row(g).iter().enumerate() {
                    a[(q, p)] = *v;
                }
            }
            let b = DVector::from_iterator(4, row(&beta).iter().map(|v| -v));
            h0 = sdp::least_norm_solution(&a, &b);
            let mut full = DMatrix::zeros(4, num_vars);
            full.columns_mut(offset, r * r).copy_from(&a);
            equalities = Some((full, b));
        }

        // Start at h0 with both λ comfortably above their thresholds.
        let shifted: Vec<Mat2> = (0..r)
            .map(|j| {
                self.dk_dirs.iter().zip(h0.iter()).fold(dkraus[j], |acc, (rows, &c)| acc + rows[j] * Complex64::new(c, 0.0))
            })
            .collect();
        let alpha: Mat2 = shifted.iter().map(|dk| dk.adjoint() * dk).sum();
        let mut start = DVector::zeros(num_vars);
        start[0] = 2.0 * operator_norm(&alpha) + 1e-3;
        if with_b {
            start[1] = 2.0 * nf * operator_norm(&beta).powi(2) + 1e-3;
        }
        start.rows_mut(offset, r * r).copy_from(&h0);
        let mut problem = SdpProblem::new(objective, blocks).with_initial_point(start);
        if let Some((a, b)) = equalities {
            problem = problem.with_equalities(a, b);
        }
        Ok(problem)
    }

    pub fn solve(&self, n: usize, mode: CeMode) -> Result<CeSolution> {
        let problem = self.sdp(n, mode)?;
        let sol = sdp::solve(&problem)?;
        match sol.status {
            SdpStatus::Optimal => {}
            SdpStatus::Infeasible => return Err(Error::SdpInfeasible),
            SdpStatus::Unbounded => return Err(Error::SdpUnbounded),
            SdpStatus::MaxIter => return Err(Error::SdpNotConverged { gap: sol.duality_gap }),
        }
        let with_b = Self::uses_beta_block(n, mode);
        let offset = if with_b { 2 } else { 1 };
        let r = self.kraus.rank();
        let scale = self.scale();
        let h = hermitian_basis(r)
            .iter()
            .enumerate()
            .fold(DMatrix::zeros(r, r), |acc, (p, e)| acc + e * Complex64::new(scale * sol.x[offset + p], 0.0));
        Ok(CeSolution {
            bound: sol.objective_value,
            lambda_a: scale * scale * sol.x[0],
            lambda_b: if with_b { scale * scale * sol.x[1] / n as f64 } else { 0.0 },
            h,
            sdp: sol,
        })
    }

    /// `(bound, λ_a, λ_b)` evaluated on a given generator `h` with the smallest feasible `λ`s.
    pub fn objective_at(&self, n: usize, mode: CeMode, h: &DMatrix<Complex64>) -> Result<f64> {
        let nf = check_n(n)?;
        let r = self.kraus.rank();
        let i = Complex64::new(0.0, 1.0);
        let ks = &self.kraus.kraus;
        let mut alpha = Mat2::zeros();
        let mut beta = Mat2::zeros();
        for a in 0..r {
            let dk: Mat2 = self.kraus.dkraus[a] - (0..r).map(|b| ks[b] * (i * h[(a, b)])).sum::<Mat2>();
            alpha += dk.adjoint() * dk;
            beta += dk.adjoint() * ks[a] * i;
        }
        let lambda_a = operator_norm(&alpha);
        match mode {
            CeMode::FiniteN => Ok(4.0 * (nf * lambda_a + nf * (nf - 1.0) * operator_norm(&beta).powi(2))),
            CeMode::Asymptotic => {
                if operator_norm(&beta) > 1e-9 * (1.0 + operator_norm(&self.beta)) {
                    return Err(Error::DomainError("generator does not satisfy β̃ = 0".into()));
                }
                Ok(4.0 * nf * lambda_a)
            }
        }
    }
}

/// Upper bound on the QFI `F_N(t)` for any `N`-qubit input.
pub fn ce_qfi_bound(n: usize, params: &ChannelParams, mode: CeMode) -> Result<f64> {
    check_n(n)?;
    Ok(CeProblem::new(params)?.solve(n, mode)?.bound)
}

/// CE precision bound at the fixed round duration `params.t`.
pub fn ce_precision_at(n: usize, params: &ChannelParams, mode: CeMode) -> Result<BoundResult> {
    check_positive("t", params.t)?;
    let f = ce_qfi_bound(n, params, mode)?;
    Ok(BoundResult::from_qfi_per_time(f / params.t, Some(params.t), mode.method()))
}

/// CE precision bound with `t` chosen to maximize `F_N(t) / t`.
pub fn ce_precision(n: usize, omega: f64, gamma: f64, alphas: [f64; 3], mode: CeMode) -> Result<BoundResult> {
    ce_precision_with_hint(n, omega, gamma, alphas, mode, None)
}

/// As [`ce_precision`], starting the bracket search from `t_hint`.
pub fn ce_precision_with_hint(
    n: usize,
    omega: f64,
    gamma: f64,
    alphas: [f64; 3],
    mode: CeMode,
    t_hint: Option<f64>,
) -> Result<BoundResult> {
    check_n(n)?;
    let base = ChannelParams::new(omega, gamma, alphas, 0.0)?;
    let best = maximize_over_t(
        |t| Ok(ce_qfi_bound(n, &base.with_t(t), mode)? / t),
        default_t_max(gamma, omega),
        t_hint,
        CE_T_REL_TOL,
    )?;
    Ok(BoundResult::from_qfi_per_time(best.value, Some(best.t), mode.method()))
}

/// `c_x(γ) = (3^{2/3}/2) (γω²)^{1/3}`.
pub fn transversal_constant(gamma: f64, omega: f64) -> f64 {
    3f64.powf(2.0 / 3.0) / 2.0 * (gamma * omega * omega).cbrt()
}

/// `(3 / γω²N)^{1/3}`, the optimal round duration for transversal noise at large `N`.
pub fn transversal_t_opt(n: usize, gamma: f64, omega: f64) -> f64 {
    (3.0 / (gamma * omega * omega * n as f64)).cbrt()
}

/// Large-`N` transversal law `√(c_x(γ) / N^{5/3})`.
pub fn asymptote_transversal(n: usize, gamma: f64, omega: f64) -> Result<BoundResult> {
    let nf = check_n(n)?;
    check_positive("gamma", gamma)?;
    check_positive("|omega|", omega.abs())?;
    let precision = (transversal_constant(gamma, omega) / nf.powf(5.0 / 3.0)).sqrt();
    Ok(BoundResult::from_precision(precision, Some(transversal_t_opt(n, gamma, omega)), BoundMethod::Asymptote))
}

/// Large-`N` law `√(2γε/N)` once any parallel component `ε` is present.
pub fn asymptote_intermediate(n: usize, gamma: f64, epsilon: f64) -> Result<BoundResult> {
    let nf = check_n(n)?;
    check_positive("gamma", gamma)?;
    check_positive("epsilon", epsilon)?;
    Ok(BoundResult::from_precision((2.0 * gamma * epsilon / nf).sqrt(), None, BoundMethod::Asymptote))
}

/// Probe size `3ω / (8γε^{3/2})` where the transversal and parallel asymptotes cross.
pub fn transition_point(gamma: f64, epsilon: f64, omega: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::DomainError(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    check_positive("gamma", gamma)?;
    Ok(3.0 * omega.abs() / (8.0 * gamma * epsilon.powf(1.5)))
}

/// Least-squares line through `(ln N, ln precision)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub points: usize,
}

pub fn scaling_fit_with_error(series: &[(f64, f64)]) -> Result<ScalingFit> {
    const MIN_POINTS: usize = 5;
    if series.len() < MIN_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_POINTS, got: series.len() });
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidParameter("N must be strictly increasing".into()));
    }
    if series.iter().any(|&(n, p)| !(n > 0.0 && p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidParameter("N and precision must be positive".into()));
    }
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = (rss / (k - 2.0) / sxx).sqrt();
    Ok(ScalingFit { slope, intercept, slope_stderr, points: series.len() })
}

/// Slope of `ln precision` against `ln N`.
pub fn scaling_fit(series: &[(f64, f64)]) -> Result<f64> {
    Ok(scaling_fit_with_error(series)?.slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambert_w_special_values() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-14);
        assert!((lambert_w(-(-1.0f64).exp()).unwrap() + 1.0).abs() < 1e-7);
        assert!(matches!(lambert_w(-0.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn closed_forms() {
        let sql = sql_parallel(1, 1.0).unwrap();
        assert!((sql.precision_bound - (2.0 * std::f64::consts::E).sqrt()).abs() < 1e-14);
        assert!((sql_parallel(4, 1.0).unwrap().precision_bound * 2.0 - sql.precision_bound).abs() < 1e-14);
        let q = parallel_quantum_bound(1, 1.0, None).unwrap();
        assert!((q.t_opt.unwrap() - 0.5).abs() < 1e-14);
        assert!((q.precision_bound - sql.precision_bound).abs() < 1e-12);
        assert!((transition_point(1.0, 0.01, 1.0).unwrap() - 375.0).abs() < 1e-9);
        assert!(transition_point(1.0, 0.0, 1.0).is_err());
        assert!((transversal_constant(1.0, 1.0) - 1.040041911525952).abs() < 1e-12);
        let cx = cs_factor(Axis::Transversal, 1.0, 1.0, 0.1).unwrap();
        assert!((cx.value - 1e-3 / 12.0).abs() < 1e-18);
        assert_eq!(cs_factor(Axis::Parallel, 1.5, 1.0, 0.0).unwrap().value, 3.0);
    }

    #[test]
    fn fit_on_exact_power_law() {
        let series: Vec<(f64, f64)> = (1..=6).map(|k| (10f64.powi(k), 10f64.powi(k).powf(-0.5))).collect();
        let fit = scaling_fit_with_error(&series).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-12);
        assert!(matches!(scaling_fit(&series[..4]), Err(Error::InsufficientPoints { needed: 5, got: 4 })));
    }

    #[test]
    fn unitary_channel_has_no_asymptotic_certificate() {
        let p = ChannelParams::transversal(1.0, 0.0, 0.5).unwrap();
        assert!(matches!(ce_qfi_bound(3, &p, CeMode::Asymptotic), Err(Error::SdpInfeasible)));
        // Finite N recovers the Heisenberg value N²t².
        let f = ce_qfi_bound(3, &p, CeMode::FiniteN).unwrap();
        assert!((f - 9.0 * 0.25).abs() < 1e-6);
    }

    #[test]
    fn parallel_noise_matches_closed_form() {
        for &n in &[1usize, 10, 100] {
            for &t in &[0.01, 0.1, 0.5] {
                let p = ChannelParams::parallel(1.0, 1.0, t).unwrap();
                let nf = n as f64;
                let closed = nf * nf * t * t / (1.0 + (2.0 * t).exp_m1() * nf);
                let f = ce_qfi_bound(n, &p, CeMode::FiniteN).unwrap();
                assert!((f / closed - 1.0).abs() < 1e-6, "n={n} t={t}: {f} vs {closed}");
            }
        }
    }
}
