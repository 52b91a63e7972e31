#![allow(dead_code)]

use nalgebra::DMatrix;
use noisy_metrology::channel::{pauli, ChannelParams, Mat2};
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Right-hand side of the dephasing master equation.
fn lindblad(p: &ChannelParams, rho: &Mat2) -> Mat2 {
    let h = pauli(3) * c(p.omega / 2.0, 0.0);
    let i = c(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    let alphas = [p.alpha_x, p.alpha_y, p.alpha_z];
    let mut dissipator = -*rho;
    for (k, a) in alphas.iter().enumerate() {
        let s = pauli(k + 1);
        dissipator += s * rho * s * c(*a, 0.0);
    }
    out += dissipator * c(p.gamma / 2.0, 0.0);
    out
}

/// Fixed-step RK4 integration of the master equation up to `p.t`.
pub fn rk4_evolve(p: &ChannelParams, rho: &Mat2, steps: usize) -> Mat2 {
    let dt = p.t / steps as f64;
    let half = c(dt / 2.0, 0.0);
    let full = c(dt, 0.0);
    let mut r = *rho;
    for _ in 0..steps {
        let k1 = lindblad(p, &r);
        let k2 = lindblad(p, &(r + k1 * half));
        let k3 = lindblad(p, &(r + k2 * half));
        let k4 = lindblad(p, &(r + k3 * full));
        r += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
    }
    r
}

pub fn random_alphas<R: Rng>(rng: &mut R) -> [f64; 3] {
    let w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let s: f64 = w.iter().sum();
    [w[0] / s, w[1] / s, w[2] / s]
}

/// Log-uniform draw in `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Hermitian `r×r` matrix from `r²` reals: diagonal first, then (Re, Im) of the upper triangle.
pub fn hermitian_from(r: usize, x: &[f64]) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(r, r);
    for i in 0..r {
        h[(i, i)] = c(x[i], 0.0);
    }
    let mut k = r;
    for i in 0..r {
        for j in (i + 1)..r {
            h[(i, j)] = c(x[k], x[k + 1]);
            h[(j, i)] = c(x[k], -x[k + 1]);
            k += 2;
        }
    }
    h
}

/// Nelder-Mead with dimension-adapted coefficients.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    for _ in 0..iters {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / nf).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (centroid[j] - simplex[n][j])).collect() };
        let xr = along(alpha);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(alpha * beta);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let x = along(alpha * gamma);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(-gamma);
                let v = f(&x);
                (x, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = simplex[0][j] + delta * (simplex[i][j] - simplex[0][j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best].clone(), values[best])
}

/// Dense diagonalization resolves the QFI only to about `1e-32 · N²t²`;
/// below that the relative comparison is replaced by this absolute floor.
pub const BRUTE_FORCE_FLOOR: f64 = 1e-30;

pub fn qfi_agrees(fast: f64, dense: f64, n: usize, t: f64, rel: f64) -> bool {
    (fast - dense).abs() <= rel * dense.abs() + BRUTE_FORCE_FLOOR * (n * n) as f64 * t * t
}
