//! Single-qubit dephasing channel.
//!
//! The master equation `dρ/dt = -i[ω σ_z / 2, ρ] + L(ρ)` with the weighted
//! Pauli dephasing Liouvillian
//!
//! ```text
//! L(ρ) = -γ/2 [ρ - α_x σ_x ρ σ_x - α_y σ_y ρ σ_y - α_z σ_z ρ σ_z]
//! ```
//!
//! has a closed-form solution `E(ρ) = Σ_ij S_ij σ̃_i ρ σ̃_j` in the normalized
//! Pauli basis `σ̃_i = σ_i / √2`. Five real functions `a, b, c, d, f` of
//! `(ω, γ, α, t)` fix the process matrix `S`; this module evaluates them
//! together with their exact `ω`-derivatives and turns `S` into a minimal
//! Kraus set `{K_i, ∂_ω K_i}`.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;

const ALPHA_SUM_TOL: f64 = 1e-12;
/// Eigenvalues of `S` below this fraction of the largest are dropped.
const RANK_TOL: f64 = 1e-12;
/// Minimum eigenvalue of `S` tolerated before the map is declared invalid.
const NEGATIVE_EIGENVALUE_TOL: f64 = -1e-9;
/// Below this gap the eigenvector derivative is switched to finite differences.
const DERIVATIVE_GAP_TOL: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrix `σ_i` with `σ_0 = 1`, `σ_1 = σ_x`, `σ_2 = σ_y`, `σ_3 = σ_z`.
pub fn pauli(i: usize) -> Mat2 {
    let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
    match i {
        0 => Mat2::new(o, z, z, o),
        1 => Mat2::new(z, o, o, z),
        2 => Mat2::new(z, c(0.0, -1.0), c(0.0, 1.0), z),
        3 => Mat2::new(o, z, z, -o),
        _ => panic!("Pauli index {i} out of range"),
    }
}

fn normalized_pauli(i: usize) -> Mat2 {
    pauli(i) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// Physical configuration of one qubit's evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Angular frequency being estimated.
    pub omega: f64,
    /// Overall dephasing rate.
    pub gamma: f64,
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub alpha_z: f64,
    /// Duration of one evolve-and-measure round.
    pub t: f64,
}

impl ChannelParams {
    pub fn new(omega: f64, gamma: f64, alphas: [f64; 3], t: f64) -> Result<Self> {
        let params = Self {
            omega,
            gamma,
            alpha_x: alphas[0],
            alpha_y: alphas[1],
            alpha_z: alphas[2],
            t,
        };
        params.validate()?;
        Ok(params)
    }

    /// Dephasing along the Hamiltonian axis (`α_z = 1`).
    pub fn parallel(omega: f64, gamma: f64, t: f64) -> Result<Self> {
        Self::new(omega, gamma, [0.0, 0.0, 1.0], t)
    }

    /// Dephasing perpendicular to the Hamiltonian axis (`α_x = 1`).
    pub fn transversal(omega: f64, gamma: f64, t: f64) -> Result<Self> {
        Self::new(omega, gamma, [1.0, 0.0, 0.0], t)
    }

    /// Mostly transversal dephasing with a parallel admixture: `α_x = 1 - ε`, `α_z = ε`.
    pub fn tilted(omega: f64, gamma: f64, epsilon: f64, t: f64) -> Result<Self> {
        Self::new(omega, gamma, [1.0 - epsilon, 0.0, epsilon], t)
    }

    pub fn alphas(&self) -> [f64; 3] {
        [self.alpha_x, self.alpha_y, self.alpha_z]
    }

    pub fn with_t(self, t: f64) -> Self {
        Self { t, ..self }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let alphas = self.alphas();
        if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise weights must be non-negative, got {alphas:?}"
            )));
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "noise weights must sum to 1, got {sum}"
            )));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {} must be >= 0", self.gamma)));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParameter(format!("t = {} must be >= 0", self.t)));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter("omega must be finite".into()));
        }
        Ok(())
    }
}

/// The five real functions fixing the process matrix, with their `ω`-derivatives.
///
/// `a` and `d` do not depend on `ω`, so `da` and `dd` are always zero; they are
/// kept so that the derivative process matrix is assembled by the same rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub da: f64,
    pub db: f64,
    pub dc: f64,
    pub dd: f64,
    pub df: f64,
}

/// `e^{-decay}` times `cosh √q`, `sinh √q / √q` and its `q`-derivative.
///
/// `b`, `c` and `f` depend on the square root `s = √((α_x-α_y)²γ² - 4ω²)`
/// only through these even functions of `s t / 2`, so evaluating them as
/// functions of the real `q = s² t² / 4` covers both signs of the radicand
/// without complex arithmetic.
fn damped_even_fns(q: f64, decay: f64) -> (f64, f64, f64) {
    let damp = (-decay).exp();
    if q.abs() < 0.5 {
        // Taylor series; 13 terms are exact to rounding for |q| < 0.5.
        let (mut ch, mut shc, mut dshc) = (0.0, 0.0, 0.0);
        let mut even_fact = 1.0; // (2k)!
        let mut qk = 1.0; // q^k
        let mut qk_minus = 0.0; // q^{k-1}
        for k in 0..13 {
            let odd_fact = even_fact * (2 * k + 1) as f64;
            ch += qk / even_fact;
            shc += qk / odd_fact;
            if k > 0 {
                dshc += k as f64 * qk_minus / odd_fact;
            }
            qk_minus = qk;
            qk *= q;
            even_fact = odd_fact * (2 * k + 2) as f64;
        }
        return (damp * ch, damp * shc, damp * dshc);
    }
    if q < 0.0 {
        let u = (-q).sqrt();
        let ch = damp * u.cos();
        let shc = damp * u.sin() / u;
        (ch, shc, (ch - shc) / (2.0 * q))
    } else {
        let u = q.sqrt();
        let grow = (u - decay).exp();
        let shrink = (-2.0 * u).exp();
        let ch = 0.5 * grow * (1.0 + shrink);
        let shc = 0.5 * grow * (1.0 - shrink) / u;
        (ch, shc, (ch - shc) / (2.0 * q))
    }
}

/// Closed-form channel coefficients and their analytic `ω`-derivatives.
pub fn coefficients(params: &ChannelParams) -> Result<ChannelCoefficients> {
    params.validate()?;
    let ChannelParams { omega, gamma, alpha_x, alpha_y, alpha_z, t } = *params;

    // a, d: population transfer, exp(-(α_x + α_y) γ t) relaxation of ⟨σ_z⟩.
    let p = (alpha_x + alpha_y) * gamma * t;
    let a = 0.5 * (1.0 + (-p).exp());
    let d = -0.5 * (-p).exp_m1();

    let asym = (alpha_x - alpha_y) * gamma;
    let q = (asym * asym - 4.0 * omega * omega) * t * t / 4.0;
    let decay = 0.5 * gamma * (1.0 + alpha_z) * t;
    let (ch, shc, dshc) = damped_even_fns(q, decay);
    let dq = -2.0 * omega * t * t;

    Ok(ChannelCoefficients {
        a,
        b: ch,
        c: omega * t * shc,
        d,
        f: 0.5 * asym * t * shc,
        da: 0.0,
        db: 0.5 * shc * dq,
        dc: t * shc + omega * t * dshc * dq,
        dd: 0.0,
        df: 0.5 * asym * t * dshc * dq,
    })
}

/// Process matrix `S` of the map `ρ ↦ Σ_ij S_ij σ̃_i ρ σ̃_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMatrix {
    pub s: Matrix4<Complex64>,
}

impl ProcessMatrix {
    fn assemble(a: f64, b: f64, cc: f64, d: f64, f: f64) -> Self {
        let mut s = Matrix4::zeros();
        s[(0, 0)] = c(a + b, 0.0);
        s[(1, 1)] = c(d + f, 0.0);
        s[(2, 2)] = c(d - f, 0.0);
        s[(3, 3)] = c(a - b, 0.0);
        s[(0, 3)] = c(0.0, cc);
        s[(3, 0)] = c(0.0, -cc);
        Self { s }
    }

    pub fn from_coefficients(k: &ChannelCoefficients) -> Self {
        Self::assemble(k.a, k.b, k.c, k.d, k.f)
    }

    /// `∂_ω S`, assembled from the coefficient derivatives.
    pub fn derivative(k: &ChannelCoefficients) -> Self {
        Self::assemble(k.da, k.db, k.dc, k.dd, k.df)
    }

    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let mut out = Mat2::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let sij = self.s[(i, j)];
                if sij != c(0.0, 0.0) {
                    out += pauli(i) * rho * pauli(j) * (sij * 0.5);
                }
            }
        }
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let dm = DMatrix::from_iterator(4, 4, self.s.iter().copied());
        SymmetricEigen::new(dm).eigenvalues.min()
    }
}

pub fn process_matrix(coeffs: &ChannelCoefficients) -> ProcessMatrix {
    ProcessMatrix::from_coefficients(coeffs)
}

/// How `∂_ω K_i` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativePath {
    /// First-order perturbation theory of the eigendecomposition of `S`.
    Analytic,
    /// Richardson-extrapolated central differences of gauge-aligned Kraus sets.
    FiniteDifference,
}

/// Kraus operators `K_i` of the channel and their `ω`-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub kraus: Vec<Mat2>,
    pub dkraus: Vec<Mat2>,
    pub path: DerivativePath,
}

/// Groups of indices of `S` that are coupled by `S` or `∂_ω S`.
fn coupled_components(s: &Matrix4<Complex64>, ds: &Matrix4<Complex64>) -> Vec<Vec<usize>> {
    let mut label = [0usize, 1, 2, 3];
    fn root(label: &mut [usize; 4], mut i: usize) -> usize {
        while label[i] != i {
            i = label[i];
        }
        i
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            if s[(i, j)].norm() + ds[(i, j)].norm() > 0.0 {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                label[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..4 {
        let r = root(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(i),
            None => {
                roots.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

struct EigenPair {
    value: f64,
    /// Eigenvector in the full 4-dimensional Pauli index space.
    vector: [Complex64; 4],
}

fn eigenpairs(s: &Matrix4<Complex64>, groups: &[Vec<usize>]) -> Vec<EigenPair> {
    let mut pairs = Vec::with_capacity(4);
    for g in groups {
        let k = g.len();
        let sub = DMatrix::from_fn(k, k, |i, j| s[(g[i], g[j])]);
        let eig = SymmetricEigen::new(sub);
        for col in 0..k {
            let mut vector = [c(0.0, 0.0); 4];
            for (row, &idx) in g.iter().enumerate() {
                vector[idx] = eig.eigenvectors[(row, col)];
            }
            pairs.push(EigenPair { value: eig.eigenvalues[col], vector });
        }
    }
    pairs
}

fn pauli_combination(v: &[Complex64; 4]) -> Mat2 {
    (0..4).fold(Mat2::zeros(), |acc, j| acc + normalized_pauli(j) * v[j])
}

fn check_positive(pairs: &[EigenPair]) -> Result<f64> {
    let min = pairs.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    if min < NEGATIVE_EIGENVALUE_TOL {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(pairs.iter().map(|p| p.value).fold(0.0, f64::max))
}

fn quadratic_form(u: &[Complex64; 4], m: &Matrix4<Complex64>, v: &[Complex64; 4]) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += u[i].conj() * m[(i, j)] * v[j];
        }
    }
    acc
}

impl KrausSet {
    /// Kraus set from `S` with derivatives by perturbation theory of its eigenvectors.
    ///
    /// Fails with [`Error::DegenerateDerivative`] when two eigenvalues coupled by
    /// `∂_ω S` are closer than `1e-8`.
    pub fn from_process(s: &ProcessMatrix, ds: &ProcessMatrix) -> Result<Self> {
        let groups = coupled_components(&s.s, &ds.s);
        let pairs = eigenpairs(&s.s, &groups);
        let max = check_positive(&pairs)?;
        let coupling_floor = 1e-14 * ds.s.norm().max(f64::MIN_POSITIVE);

        let mut kraus = Vec::new();
        let mut dkraus = Vec::new();
        for (k, pk) in pairs.iter().enumerate() {
            if pk.value <= RANK_TOL * max {
                continue;
            }
            let dvalue = quadratic_form(&pk.vector, &ds.s, &pk.vector).re;
            let mut dvector = [c(0.0, 0.0); 4];
            for (l, pl) in pairs.iter().enumerate() {
                if l == k {
                    continue;
                }
                let coupling = quadratic_form(&pl.vector, &ds.s, &pk.vector);
                if coupling.norm() <= coupling_floor {
                    continue;
                }
                let gap = pk.value - pl.value;
                if gap.abs() < DERIVATIVE_GAP_TOL {
                    return Err(Error::DegenerateDerivative { gap: gap.abs() });
                }
                let weight = coupling / gap;
                for i in 0..4 {
                    dvector[i] += pl.vector[i] * weight;
                }
            }
            let root = pk.value.sqrt();
            let basis = pauli_combination(&pk.vector);
            kraus.push(basis * c(root, 0.0));
            dkraus.push(
                basis * c(dvalue / (2.0 * root), 0.0) + pauli_combination(&dvector) * c(root, 0.0),
            );
        }
        Ok(Self { kraus, dkraus, path: DerivativePath::Analytic })
    }

    pub fn rank(&self) -> usize {
        self.kraus.len()
    }

    /// `Σ_i K_i† K_i`, the identity for a trace-preserving map.
    pub fn completeness(&self) -> Mat2 {
        self.kraus.iter().map(|k| k.adjoint() * k).sum()
    }

    pub fn apply(&self, state: &QubitState) -> QubitState {
        QubitState { rho: self.apply_matrix(&state.rho) }
    }

    /// `Σ_i K_i ρ K_i†` for an arbitrary (not necessarily normalized) operator.
    pub fn apply_matrix(&self, rho: &Mat2) -> Mat2 {
        self.kraus.iter().map(|k| k * rho * k.adjoint()).sum()
    }

    /// `∂_ω` of the output: `Σ_i K̇_i ρ K_i† + K_i ρ K̇_i†`.
    pub fn apply_derivative(&self, state: &QubitState) -> Mat2 {
        self.apply_derivative_matrix(&state.rho)
    }

    pub fn apply_derivative_matrix(&self, rho: &Mat2) -> Mat2 {
        self.kraus
            .iter()
            .zip(&self.dkraus)
            .map(|(k, dk)| {
                let half = dk * rho * k.adjoint();
                half + half.adjoint()
            })
            .sum()
    }
}

fn eigen_kraus(s: &ProcessMatrix) -> Result<Vec<Mat2>> {
    let groups = coupled_components(&s.s, &Matrix4::zeros());
    let pairs = eigenpairs(&s.s, &groups);
    let max = check_positive(&pairs)?;
    Ok(pairs
        .iter()
        .filter(|p| p.value > RANK_TOL * max)
        .map(|p| pauli_combination(&p.vector) * c(p.value.sqrt(), 0.0))
        .collect())
}

fn hs_inner(a: &Mat2, b: &Mat2) -> Complex64 {
    (a.adjoint() * b).trace()
}

/// Unitary remix of `other` closest to `reference` (orthogonal Procrustes).
fn align_kraus(reference: &[Mat2], other: &[Mat2]) -> Vec<Mat2> {
    let r = reference.len().max(other.len());
    let pad = |v: &[Mat2]| {
        let mut out = v.to_vec();
        out.resize(r, Mat2::zeros());
        out
    };
    let (reference, other) = (pad(reference), pad(other));
    // C^T_{ji} = <K_i, K'_j>; optimal mixing U = Q P† for C^T = P Σ Q†.
    let ct = DMatrix::from_fn(r, r, |j, i| hs_inner(&reference[i], &other[j]));
    let svd = ct.svd(true, true);
    let p = svd.u.expect("svd u");
    let q = svd.v_t.expect("svd v_t").adjoint();
    let u = q * p.adjoint();
    (0..r)
        .map(|i| (0..r).fold(Mat2::zeros(), |acc, j| acc + other[j] * u[(i, j)]))
        .collect()
}

fn process_at(params: &ChannelParams) -> Result<(ProcessMatrix, ProcessMatrix)> {
    let k = coefficients(params)?;
    Ok((ProcessMatrix::from_coefficients(&k), ProcessMatrix::derivative(&k)))
}

fn finite_difference_kraus(params: &ChannelParams) -> Result<KrausSet> {
    let (s, _) = process_at(params)?;
    let kraus = eigen_kraus(&s)?;
    let h = 1e-3 * params.omega.abs().max(1.0);
    let central = |step: f64| -> Result<Vec<Mat2>> {
        let plus = eigen_kraus(&process_at(&params.with_omega(params.omega + step))?.0)?;
        let minus = eigen_kraus(&process_at(&params.with_omega(params.omega - step))?.0)?;
        let plus = align_kraus(&kraus, &plus);
        let minus = align_kraus(&kraus, &minus);
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) * c(0.5 / step, 0.0))
            .collect())
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    let mut dkraus: Vec<Mat2> = fine
        .iter()
        .zip(&coarse)
        .map(|(f, g)| (f * c(4.0, 0.0) - g) * c(1.0 / 3.0, 0.0))
        .collect();
    let mut kraus = kraus;
    kraus.resize(dkraus.len(), Mat2::zeros());
    dkraus.truncate(kraus.len());
    Ok(KrausSet { kraus, dkraus, path: DerivativePath::FiniteDifference })
}

/// Minimal Kraus set of the channel at `params`, with `∂_ω K_i`.
///
/// Uses perturbation theory of the eigendecomposition of `S` and falls back
/// to extrapolated finite differences near eigenvalue degeneracies; the
/// chosen route is recorded in [`KrausSet::path`].
pub fn kraus_set(params: &ChannelParams) -> Result<KrausSet> {
    let (s, ds) = process_at(params)?;
    match KrausSet::from_process(&s, &ds) {
        Err(Error::DegenerateDerivative { .. }) => finite_difference_kraus(params),
        other => other,
    }
}

/// Normalized single-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub rho: Mat2,
}

impl QubitState {
    pub fn new(rho: Mat2) -> Result<Self> {
        if (rho - rho.adjoint()).norm() > 1e-12 {
            return Err(Error::InvalidParameter("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr - c(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidParameter(format!("trace {tr} != 1")));
        }
        let state = Self { rho };
        if state.min_eigenvalue() < -1e-12 {
            return Err(Error::InvalidParameter("density matrix is not positive".into()));
        }
        Ok(state)
    }

    /// Pure state with Bloch angles `θ` (polar) and `φ` (azimuth).
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        let (x, y, z) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        Self {
            rho: (pauli(0) + pauli(1) * c(x, 0.0) + pauli(2) * c(y, 0.0) + pauli(3) * c(z, 0.0))
                * c(0.5, 0.0),
        }
    }

    pub fn zero() -> Self {
        Self::from_bloch(0.0, 0.0)
    }

    pub fn plus() -> Self {
        Self::from_bloch(std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn plus_i() -> Self {
        Self::from_bloch(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: pauli(0) * c(0.5, 0.0) }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (a, d, b) = (self.rho[(0, 0)].re, self.rho[(1, 1)].re, self.rho[(0, 1)]);
        let mean = 0.5 * (a + d);
        mean - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
    }
}

pub fn apply(kraus: &KrausSet, state: &QubitState) -> QubitState {
    kraus.apply(state)
}

pub fn apply_derivative(kraus: &KrausSet, state: &QubitState) -> Mat2 {
    kraus.apply_derivative(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn zero_time_is_identity() {
        let p = ChannelParams::new(1.3, 0.7, [0.2, 0.3, 0.5], 0.0).unwrap();
        let k = coefficients(&p).unwrap();
        assert_eq!((k.a, k.b, k.c, k.d, k.f), (1.0, 1.0, 0.0, 0.0, 0.0));
        let s = process_matrix(&k);
        assert!((s.s[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        let ks = kraus_set(&p).unwrap();
        assert_eq!(ks.rank(), 1);
        assert!((ks.kraus[0] - pauli(0)).norm() < 1e-14 || (ks.kraus[0] + pauli(0)).norm() < 1e-14);
        assert!(ks.dkraus[0].norm() < 1e-14);
    }

    #[test]
    fn unitary_limit() {
        for &alphas in &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, 0.3, 0.4]] {
            let p = ChannelParams::new(1.1, 0.0, alphas, 0.9).unwrap();
            let k = coefficients(&p).unwrap();
            assert!(close(k.a, 1.0, 1e-15) && k.d.abs() < 1e-15 && k.f.abs() < 1e-15);
            assert!(close(k.b, (1.1f64 * 0.9).cos(), 1e-14));
            assert!(close(k.c, (1.1f64 * 0.9).sin(), 1e-14));
        }
    }

    #[test]
    fn parallel_coefficients() {
        let p = ChannelParams::parallel(1.0, 1.0, 0.7).unwrap();
        let k = coefficients(&p).unwrap();
        let damp = (-0.7f64).exp();
        assert_eq!(k.a, 1.0);
        assert_eq!(k.d, 0.0);
        assert_eq!(k.f, 0.0);
        assert!(close(k.b, damp * 0.7f64.cos(), 1e-14));
        assert!(close(k.c, damp * 0.7f64.sin(), 1e-14));
    }

    #[test]
    fn half_period_is_sigma_z() {
        let p = ChannelParams::transversal(1.0, 0.0, std::f64::consts::PI).unwrap();
        let s = process_matrix(&coefficients(&p).unwrap());
        assert!(s.s[(0, 0)].norm() < 1e-14);
        assert!((s.s[(3, 3)] - c(2.0, 0.0)).norm() < 1e-14);
        let rho = QubitState::plus().rho;
        let out = s.apply(&rho);
        assert!((out - pauli(3) * rho * pauli(3)).norm() < 1e-14);
    }

    #[test]
    fn unitary_kraus_is_rotation() {
        let (omega, t) = (0.8, 1.7);
        let p = ChannelParams::transversal(omega, 0.0, t).unwrap();
        let ks = kraus_set(&p).unwrap();
        assert_eq!(ks.rank(), 1);
        let u = Mat2::new(
            Complex64::from_polar(1.0, -omega * t / 2.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, omega * t / 2.0),
        );
        // Equal up to a global phase.
        let phase = (u.adjoint() * ks.kraus[0]).trace() / 2.0;
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!((ks.kraus[0] - u * phase).norm() < 1e-12);
        let du = Mat2::new(
            Complex64::from_polar(1.0, -omega * t / 2.0) * c(0.0, -t / 2.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, omega * t / 2.0) * c(0.0, t / 2.0),
        );
        // Derivative agrees with d/dω of the rotation up to the gauge term i θ K.
        let residual = ks.dkraus[0] - du * phase;
        let gauge = (ks.kraus[0].adjoint() * residual).trace() / 2.0;
        assert!(gauge.re.abs() < 1e-12);
        assert!((residual - ks.kraus[0] * gauge).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(ChannelParams::new(1.0, 1.0, [0.5, 0.5, 0.5], 0.1).is_err());
        assert!(ChannelParams::new(1.0, 1.0, [1.2, -0.2, 0.0], 0.1).is_err());
        assert!(ChannelParams::new(1.0, -1.0, [1.0, 0.0, 0.0], 0.1).is_err());
        let mut p = ChannelParams::transversal(1.0, 1.0, 0.1).unwrap();
        p.alpha_y = 0.5;
        assert!(coefficients(&p).is_err());
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let bad = ProcessMatrix { s: Matrix4::from_diagonal(&nalgebra::Vector4::new(c(2.0, 0.0), c(-0.1, 0.0), c(0.0, 0.0), c(0.0, 0.0))) };
        let err = KrausSet::from_process(&bad, &ProcessMatrix { s: Matrix4::zeros() }).unwrap_err();
        assert!(matches!(err, Error::NegativeEigenvalue(v) if v < -0.09));
    }

    #[test]
    fn long_time_parallel_dephasing_kills_coherence() {
        let p = ChannelParams::parallel(1.0, 1.0, 60.0).unwrap();
        let ks = kraus_set(&p).unwrap();
        let out = ks.apply(&QubitState::plus());
        assert!((out.rho - QubitState::maximally_mixed().rho).norm() < 1e-12);
    }

    #[test]
    fn near_degenerate_spectrum_uses_finite_differences() {
        let p = ChannelParams::parallel(1.0, 1.0, 20.0).unwrap();
        let ks = kraus_set(&p).unwrap();
        assert_eq!(ks.path, DerivativePath::FiniteDifference);
        assert!((ks.completeness() - pauli(0)).norm() < 1e-12);
        // Coherence of |+> evolves as e^{-(γ + iω) t} / 2.
        let an = ks.apply_derivative(&QubitState::plus());
        let expected = Complex64::from_polar(0.5 * (-20.0f64).exp(), -20.0) * c(0.0, -20.0);
        // Roundoff in O(1) Kraus entries limits the relative accuracy of a 1e-8 signal.
        assert!((an[(0, 1)] - expected).norm() <= 1e-4 * expected.norm());
        assert!(an[(0, 0)].norm() < 1e-4 * expected.norm());
    }

    #[test]
    fn state_validation() {
        assert!(QubitState::new(pauli(0)).is_err());
        assert!(QubitState::new(pauli(3) * c(0.5, 0.0) + pauli(0) * c(0.5, 0.0)).is_ok());
        assert!(QubitState::new(pauli(3) + pauli(0) * c(0.5, 0.0)).is_err());
    }
}
