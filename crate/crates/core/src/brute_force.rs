//! Dense `2^N`-dimensional reference evolution and QFI.
//!
//! Independent of the GHZ block reduction: the single-qubit Kraus map is
//! applied to every tensor factor of a full density matrix and the QFI is
//! read off its eigendecomposition. Intended as a test oracle for `N ≤ 10`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::channel::{kraus_set, ChannelParams, KrausSet, Mat2};
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 10;
const EIGENVALUE_SUM_CUTOFF: f64 = 1e-14;

/// Density matrix of `n` qubits; qubit 0 is the most significant bit of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n: usize,
    pub rho: DMatrix<Complex64>,
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::SizeCap { n, cap: MAX_QUBITS });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    Ok(())
}

impl DensityMatrix {
    pub fn from_pure(n: usize, amplitudes: &[Complex64]) -> Result<Self> {
        check_size(n)?;
        let dim = 1 << n;
        if amplitudes.len() != dim {
            return Err(Error::InvalidParameter(format!("expected {dim} amplitudes")));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let rho = DMatrix::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj() / norm);
        Ok(Self { n, rho })
    }

    /// `(|0…0⟩ + |1…1⟩) / √2`.
    pub fn ghz(n: usize) -> Result<Self> {
        check_size(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        amps[(1 << n) - 1] = Complex64::new(1.0, 0.0);
        Self::from_pure(n, &amps)
    }

    /// `|+⟩^{⊗n}`.
    pub fn product_plus(n: usize) -> Result<Self> {
        check_size(n)?;
        Self::from_pure(n, &vec![Complex64::new(1.0, 0.0); 1 << n])
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.rho.clone()).eigenvalues.min()
    }
}

/// `M ↦ (K ⊗ 1) M (L ⊗ 1)†` acting on the given qubit.
fn sandwich(m: &DMatrix<Complex64>, n: usize, qubit: usize, left: &Mat2, right: &Mat2) -> DMatrix<Complex64> {
    let dim = m.nrows();
    let bit = 1usize << (n - 1 - qubit);
    let mut tmp = DMatrix::zeros(dim, dim);
    // Rows: tmp = (K ⊗ 1) M.
    for x in (0..dim).filter(|x| x & bit == 0) {
        let x1 = x | bit;
        for col in 0..dim {
            let (m0, m1) = (m[(x, col)], m[(x1, col)]);
            tmp[(x, col)] = left[(0, 0)] * m0 + left[(0, 1)] * m1;
            tmp[(x1, col)] = left[(1, 0)] * m0 + left[(1, 1)] * m1;
        }
    }
    // Columns: out = tmp (L ⊗ 1)†.
    let mut out = DMatrix::zeros(dim, dim);
    for y in (0..dim).filter(|y| y & bit == 0) {
        let y1 = y | bit;
        for row in 0..dim {
            let (t0, t1) = (tmp[(row, y)], tmp[(row, y1)]);
            out[(row, y)] = t0 * right[(0, 0)].conj() + t1 * right[(0, 1)].conj();
            out[(row, y1)] = t0 * right[(1, 0)].conj() + t1 * right[(1, 1)].conj();
        }
    }
    out
}

fn apply_on_qubit(m: &DMatrix<Complex64>, n: usize, qubit: usize, ks: &KrausSet) -> DMatrix<Complex64> {
    ks.kraus
        .iter()
        .fold(DMatrix::zeros(m.nrows(), m.ncols()), |acc, k| acc + sandwich(m, n, qubit, k, k))
}

fn apply_derivative_on_qubit(m: &DMatrix<Complex64>, n: usize, qubit: usize, ks: &KrausSet) -> DMatrix<Complex64> {
    ks.kraus.iter().zip(&ks.dkraus).fold(DMatrix::zeros(m.nrows(), m.ncols()), |acc, (k, dk)| {
        let half = sandwich(m, n, qubit, dk, k);
        let other = half.adjoint();
        acc + half + other
    })
}

/// Evolved state and its `ω`-derivative, applying the qubits in `order`.
pub fn evolve_with_derivative_ordered(
    input: &DensityMatrix,
    params: &ChannelParams,
    order: &[usize],
) -> Result<(DensityMatrix, DMatrix<Complex64>)> {
    check_size(input.n)?;
    let ks = kraus_set(params)?;
    let n = input.n;
    let mut rho = input.rho.clone();
    let mut drho = DMatrix::zeros(rho.nrows(), rho.ncols());
    for &q in order {
        // Product rule: ∂(E_q ρ) = E_q(∂ρ) + (∂E_q)(ρ).
        drho = apply_on_qubit(&drho, n, q, &ks) + apply_derivative_on_qubit(&rho, n, q, &ks);
        rho = apply_on_qubit(&rho, n, q, &ks);
    }
    Ok((DensityMatrix { n, rho }, drho))
}

pub fn evolve_with_derivative(
    input: &DensityMatrix,
    params: &ChannelParams,
) -> Result<(DensityMatrix, DMatrix<Complex64>)> {
    let order: Vec<usize> = (0..input.n).collect();
    evolve_with_derivative_ordered(input, params, &order)
}

/// `E^{⊗N}` applied to `input`.
pub fn evolve_full(n: usize, input: &DensityMatrix, params: &ChannelParams) -> Result<DensityMatrix> {
    check_size(n)?;
    if input.n != n {
        return Err(Error::InvalidParameter(format!("state has {} qubits, expected {n}", input.n)));
    }
    Ok(evolve_with_derivative(input, params)?.0)
}

/// SLD quantum Fisher information of `rho` given `drho = ∂_ω rho`.
pub fn qfi_from_state(rho: &DMatrix<Complex64>, drho: &DMatrix<Complex64>) -> f64 {
    let eig = SymmetricEigen::new(rho.clone());
    let v = &eig.eigenvectors;
    let rotated = v.adjoint() * drho * v;
    let lambda = &eig.eigenvalues;
    let dim = lambda.len();
    let mut f = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let denom = lambda[i] + lambda[j];
            if denom > EIGENVALUE_SUM_CUTOFF {
                f += 2.0 * rotated[(i, j)].norm_sqr() / denom;
            }
        }
    }
    f
}

/// QFI of `E^{⊗N}(input)` about `ω`.
pub fn qfi_full(n: usize, params: &ChannelParams, input: &DensityMatrix) -> Result<f64> {
    check_size(n)?;
    if input.n != n {
        return Err(Error::InvalidParameter(format!("state has {} qubits, expected {n}", input.n)));
    }
    let (rho, drho) = evolve_with_derivative(input, params)?;
    Ok(qfi_from_state(&rho.rho, &drho))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_cap() {
        let p = ChannelParams::transversal(1.0, 1.0, 0.1).unwrap();
        assert!(matches!(DensityMatrix::ghz(11), Err(Error::SizeCap { n: 11, cap: 10 })));
        let small = DensityMatrix::ghz(2).unwrap();
        assert!(matches!(qfi_full(11, &p, &small), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn zero_time_leaves_state_unchanged() {
        let p = ChannelParams::transversal(1.0, 1.0, 0.0).unwrap();
        let ghz = DensityMatrix::ghz(3).unwrap();
        let out = evolve_full(3, &ghz, &p).unwrap();
        assert!((out.rho - ghz.rho).norm() < 1e-14);
    }

    #[test]
    fn heisenberg_and_shot_noise_limits() {
        let t = 0.7;
        let p = ChannelParams::transversal(1.0, 0.0, t).unwrap();
        for n in 1..=5 {
            let ghz = qfi_full(n, &p, &DensityMatrix::ghz(n).unwrap()).unwrap();
            assert!((ghz - (n * n) as f64 * t * t).abs() < 1e-10);
            let plus = qfi_full(n, &p, &DensityMatrix::product_plus(n).unwrap()).unwrap();
            assert!((plus - n as f64 * t * t).abs() < 1e-10);
        }
    }
}
