//! Exact QFI of an N-qubit GHZ probe after independent dephasing.
//!
//! The channel maps populations to populations and `|0⟩⟨1|` to a combination
//! of `|0⟩⟨1|` and `|1⟩⟨0|`, so the evolved GHZ state only has entries on the
//! diagonal and between a bitstring `x` and its complement `x̄`. Every
//! unordered pair `{x, x̄}` spans a 2×2 block that depends on `x` only through
//! its Hamming weight `m`:
//!
//! ```text
//! ⟨x|ρ|x⟩  = ½ [dᵐ a^{N-m} + d^{N-m} aᵐ]
//! ⟨x|ρ|x̄⟩ = ½ [fᵐ (b - ic)^{N-m} + f^{N-m} (b + ic)ᵐ]
//! ```
//!
//! With `m ≤ ⌊N/2⌋` there are `⌊N/2⌋ + 1` distinct blocks, block `m` occurring
//! `C(N, m)` times (`C(N, N/2) / 2` for the middle block of even `N`). Blocks
//! are stored with their diagonal in log form and the remaining entries as
//! ratios to it, so probe sizes of several thousand qubits do not overflow.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{coefficients, ChannelCoefficients, ChannelParams};
use crate::error::{Error, Result};
use crate::logpolar::{ln_add_exp, LogPolar};
use crate::optimize::{default_t_max, maximize_over_t};

/// Blocks whose normalized eigenvalue sum `2(1 - |A/D|)` falls below this are
/// treated as rank-deficient.
const EIGENVALUE_SUM_CUTOFF: f64 = 1e-14;
/// Relative tolerance in `ln t` of the golden-section refinement.
const T_REL_TOL: f64 = 1e-8;

/// One 2×2 block `[[D, A], [A*, D]]` of the evolved GHZ state and its `ω`-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzBlock {
    /// Hamming weight of the lighter bitstring of the pair.
    pub m: usize,
    pub ln_multiplicity: f64,
    /// `ln D(m)`; `-∞` for an empty block.
    pub ln_diag: f64,
    /// `∂_ω D(m) / D(m)`.
    pub d_diag_ratio: f64,
    /// `A(m) / D(m)`.
    pub antidiag_ratio: Complex64,
    /// `∂_ω A(m) / D(m)`.
    pub d_antidiag_ratio: Complex64,
}

impl GhzBlock {
    pub fn multiplicity(&self) -> f64 {
        self.ln_multiplicity.exp()
    }

    pub fn diag_m(&self) -> f64 {
        self.ln_diag.exp()
    }

    /// Equal to [`diag_m`](Self::diag_m): the diagonal is symmetric under `m ↔ N - m`.
    pub fn diag_complement(&self) -> f64 {
        self.diag_m()
    }

    pub fn antidiag(&self) -> Complex64 {
        self.antidiag_ratio * self.diag_m()
    }

    pub fn d_diag_m(&self) -> f64 {
        self.d_diag_ratio * self.diag_m()
    }

    pub fn d_diag_complement(&self) -> f64 {
        self.d_diag_m()
    }

    pub fn d_antidiag(&self) -> Complex64 {
        self.d_antidiag_ratio * self.diag_m()
    }

    /// `ln` of the total probability carried by all copies of this block.
    pub fn ln_weight(&self) -> f64 {
        self.ln_multiplicity + std::f64::consts::LN_2 + self.ln_diag
    }

    /// Block QFI divided by `D(m)`.
    fn qfi_density(&self) -> f64 {
        if self.ln_diag == f64::NEG_INFINITY {
            return 0.0;
        }
        let modulus = self.antidiag_ratio.norm();
        let phase = if modulus > 0.0 { self.antidiag_ratio / modulus } else { Complex64::new(1.0, 0.0) };
        let u = self.d_antidiag_ratio * phase.conj();
        let p = self.d_diag_ratio;
        let mut density = (p + u.re).powi(2) / (1.0 + modulus) + 2.0 * u.im * u.im;
        let lower = 1.0 - modulus;
        if 2.0 * lower > EIGENVALUE_SUM_CUTOFF {
            density += (p - u.re).powi(2) / lower;
        }
        density
    }
}

/// The `⌊N/2⌋ + 1` distinct blocks of the evolved GHZ state.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzBlockSpectrum {
    pub n: usize,
    pub blocks: Vec<GhzBlock>,
}

impl GhzBlockSpectrum {
    /// `Σ multiplicity × block trace`; equals `(a + d)^N = 1`.
    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.ln_weight().exp()).sum()
    }

    /// QFI of the full state: the block QFIs weighted by multiplicity.
    pub fn qfi(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.ln_diag > f64::NEG_INFINITY)
            .map(|b| (b.ln_multiplicity + b.ln_diag).exp() * b.qfi_density())
            .sum()
    }
}

/// `x^k y^l` and its derivative `k x' x^{k-1} y^l + l y' x^k y^{l-1}` as log-polar terms.
fn power_product(
    x: LogPolar,
    dx: LogPolar,
    k: usize,
    y: LogPolar,
    dy: LogPolar,
    l: usize,
) -> (LogPolar, [LogPolar; 2]) {
    let value = x.powi(k).mul(y.powi(l));
    let dx_part = if k == 0 {
        LogPolar::ZERO
    } else {
        LogPolar::from_real(k as f64).mul(dx).mul(x.powi(k - 1)).mul(y.powi(l))
    };
    let dy_part = if l == 0 {
        LogPolar::ZERO
    } else {
        LogPolar::from_real(l as f64).mul(dy).mul(x.powi(k)).mul(y.powi(l - 1))
    };
    (value, [dx_part, dy_part])
}

/// `ln C(n, m)` for `m = 0..=n/2` by the multiplicative recurrence.
fn ln_binomials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n / 2 + 1);
    let mut acc = 0.0;
    for m in 0..=n / 2 {
        out.push(acc);
        acc += ((n - m) as f64).ln() - ((m + 1) as f64).ln();
    }
    out
}

fn check_probe_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("probe size N must be >= 1".into()));
    }
    Ok(())
}

/// Block decomposition of the GHZ state evolved for time `params.t`.
pub fn ghz_blocks(n: usize, params: &ChannelParams) -> Result<GhzBlockSpectrum> {
    check_probe_size(n)?;
    let k = coefficients(params)?;
    Ok(blocks_from_coefficients(n, &k))
}

pub(crate) fn blocks_from_coefficients(n: usize, k: &ChannelCoefficients) -> GhzBlockSpectrum {
    let a = LogPolar::from_real(k.a);
    let d = LogPolar::from_real(k.d);
    let da = LogPolar::from_real(k.da);
    let dd = LogPolar::from_real(k.dd);
    let f = LogPolar::from_real(k.f);
    let df = LogPolar::from_real(k.df);
    let z = Complex64::new(k.b, k.c);
    let dz = Complex64::new(k.db, k.dc);
    let (zp, dzp) = (LogPolar::from_complex(z), LogPolar::from_complex(dz));
    let (zm, dzm) = (LogPolar::from_complex(z.conj()), LogPolar::from_complex(dz.conj()));

    let ln_binom = ln_binomials(n);
    let blocks = (0..=n / 2)
        .map(|m| {
            let rest = n - m;
            let mut ln_multiplicity = ln_binom[m];
            if 2 * m == n {
                ln_multiplicity -= std::f64::consts::LN_2;
            }

            let (diag1, ddiag1) = power_product(d, dd, m, a, da, rest);
            let (diag2, ddiag2) = power_product(d, dd, rest, a, da, m);
            let ln_diag = ln_add_exp(diag1.ln_abs, diag2.ln_abs) - std::f64::consts::LN_2;
            if ln_diag == f64::NEG_INFINITY {
                return GhzBlock {
                    m,
                    ln_multiplicity,
                    ln_diag,
                    d_diag_ratio: 0.0,
                    antidiag_ratio: Complex64::new(0.0, 0.0),
                    d_antidiag_ratio: Complex64::new(0.0, 0.0),
                };
            }
            let ratio = |terms: &[LogPolar]| -> Complex64 {
                terms.iter().map(|t| t.scaled(ln_diag)).sum::<Complex64>() * 0.5
            };

            let (anti1, danti1) = power_product(f, df, m, zm, dzm, rest);
            let (anti2, danti2) = power_product(f, df, rest, zp, dzp, m);
            GhzBlock {
                m,
                ln_multiplicity,
                ln_diag,
                d_diag_ratio: ratio(&[ddiag1[0], ddiag1[1], ddiag2[0], ddiag2[1]]).re,
                antidiag_ratio: ratio(&[anti1, anti2]),
                d_antidiag_ratio: ratio(&[danti1[0], danti1[1], danti2[0], danti2[1]]),
            }
        })
        .collect();
    GhzBlockSpectrum { n, blocks }
}

/// QFI of the GHZ probe about `ω` after time `params.t`.
pub fn ghz_qfi(n: usize, params: &ChannelParams) -> Result<f64> {
    Ok(ghz_blocks(n, params)?.qfi())
}

/// QFI and Cramér-Rao precision `δω √T = (F / t)^{-1/2}` at one round duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionResult {
    pub qfi: f64,
    pub qfi_per_time: f64,
    pub t_opt: f64,
    pub precision: f64,
}

impl PrecisionResult {
    pub(crate) fn from_qfi_per_time(qfi_per_time: f64, t: f64) -> Self {
        Self { qfi: qfi_per_time * t, qfi_per_time, t_opt: t, precision: qfi_per_time.powf(-0.5) }
    }
}

/// GHZ precision at the fixed round duration `params.t`.
pub fn ghz_precision_at(n: usize, params: &ChannelParams) -> Result<PrecisionResult> {
    if params.t <= 0.0 {
        return Err(Error::InvalidParameter("round duration must be positive".into()));
    }
    let f = ghz_qfi(n, params)?;
    Ok(PrecisionResult::from_qfi_per_time(f / params.t, params.t))
}

/// GHZ precision with the round duration chosen to maximize `F_N(t) / t`.
pub fn ghz_precision(n: usize, omega: f64, gamma: f64, alphas: [f64; 3]) -> Result<PrecisionResult> {
    ghz_precision_with_hint(n, omega, gamma, alphas, None)
}

/// As [`ghz_precision`], starting the bracket search from `t_hint`.
pub fn ghz_precision_with_hint(
    n: usize,
    omega: f64,
    gamma: f64,
    alphas: [f64; 3],
    t_hint: Option<f64>,
) -> Result<PrecisionResult> {
    check_probe_size(n)?;
    let base = ChannelParams::new(omega, gamma, alphas, 0.0)?;
    let best = maximize_over_t(
        |t| Ok(ghz_qfi(n, &base.with_t(t))? / t),
        default_t_max(gamma, omega),
        t_hint,
        T_REL_TOL,
    )?;
    Ok(PrecisionResult::from_qfi_per_time(best.value, best.t))
}

/// Second-order expansion of `F_N / t` in `t` for `α_x = 1 - ε`, `α_z = ε`.
///
/// Exact to `O(t³)` for `ε > 0` or `ω = 0`. At `ε = 0`, `ω ≠ 0` the true `t²`
/// coefficient is smaller in magnitude by `Nγ/6`.
pub fn ghz_qfi_short_time(n: usize, epsilon: f64, gamma: f64, t: f64) -> f64 {
    let n = n as f64;
    n * n * t - ((2.0 * n - 1.0) * (1.0 - epsilon) + 4.0 * n * n * epsilon) * n * gamma * t * t / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities() {
        let s = ghz_blocks(4, &ChannelParams::transversal(1.0, 0.5, 0.3).unwrap()).unwrap();
        let mult: Vec<f64> = s.blocks.iter().map(|b| b.multiplicity()).collect();
        assert_eq!(s.blocks.len(), 3);
        for (got, want) in mult.iter().zip([1.0, 4.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let odd = ghz_blocks(5, &ChannelParams::transversal(1.0, 0.5, 0.3).unwrap()).unwrap();
        let total: f64 = odd.blocks.iter().map(|b| b.multiplicity()).sum();
        assert!((total - 16.0).abs() < 1e-10);
    }

    #[test]
    fn pure_ghz_at_zero_time() {
        let s = ghz_blocks(2, &ChannelParams::transversal(1.0, 0.5, 0.0).unwrap()).unwrap();
        let b0 = s.blocks[0];
        assert!((b0.diag_m() - 0.5).abs() < 1e-15);
        assert!((b0.antidiag() - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(s.blocks[1].diag_m(), 0.0);
        assert!((s.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parallel_noise_single_block() {
        let (n, gamma, omega, t) = (5, 0.4, 1.3, 0.8);
        let s = ghz_blocks(n, &ChannelParams::parallel(omega, gamma, t).unwrap()).unwrap();
        let b0 = s.blocks[0];
        let expected = Complex64::from_polar(0.5 * (-(n as f64) * gamma * t).exp(), -(n as f64) * omega * t);
        assert!((b0.antidiag() - expected).norm() < 1e-14);
        assert!(s.blocks[1..].iter().all(|b| b.diag_m() == 0.0));
        let f = s.qfi();
        let closed = (n * n) as f64 * t * t * (-2.0 * n as f64 * gamma * t).exp();
        assert!((f - closed).abs() < 1e-12 * closed);
    }

    #[test]
    fn large_probe_stays_finite() {
        let p = ChannelParams::transversal(1.0, 1.0, 0.05).unwrap();
        let s = ghz_blocks(5000, &p).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-9);
        let f = s.qfi();
        assert!(f.is_finite() && f > 0.0 && f <= 5000.0f64.powi(2) * 0.05 * 0.05);
    }

    #[test]
    fn short_time_expansion_limits() {
        assert_eq!(ghz_qfi_short_time(7, 0.2, 1.0, 0.0), 0.0);
        let (n, g, t) = (4.0, 0.3, 0.01);
        let e0 = ghz_qfi_short_time(4, 0.0, g, t);
        assert!((e0 - (n * n * t - (2.0 * n - 1.0) * n * g * t * t / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_probe() {
        assert!(ghz_qfi(0, &ChannelParams::transversal(1.0, 1.0, 0.1).unwrap()).is_err());
    }
}
