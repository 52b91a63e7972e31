mod common;

use common::{log_uniform, qfi_agrees, random_alphas, rel_err};
use noisy_metrology::bounds::scaling_fit;
use noisy_metrology::brute_force::{evolve_with_derivative, evolve_with_derivative_ordered, qfi_full, DensityMatrix};
use noisy_metrology::channel::ChannelParams;
use noisy_metrology::ghz::{ghz_blocks, ghz_precision, ghz_qfi};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn blocks_match_dense_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=6 {
        for _ in 0..5 {
            let p = ChannelParams::new(1.0, log_uniform(&mut rng, 0.01, 10.0), random_alphas(&mut rng), rng.gen_range(0.01..2.0))
                .unwrap();
            let exact = qfi_full(n, &p, &DensityMatrix::ghz(n).unwrap()).unwrap();
            let fast = ghz_qfi(n, &p).unwrap();
            assert!(qfi_agrees(fast, exact, n, p.t, 1e-8), "N={n} {p:?}: {fast} vs {exact}");
            let spec = ghz_blocks(n, &p).unwrap();
            assert!((spec.trace() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn dense_evolution_ignores_qubit_order() {
    let p = ChannelParams::new(0.8, 0.6, [0.5, 0.2, 0.3], 0.7).unwrap();
    let ghz = DensityMatrix::ghz(4).unwrap();
    let (a, da) = evolve_with_derivative(&ghz, &p).unwrap();
    let (b, db) = evolve_with_derivative_ordered(&ghz, &p, &[2, 0, 3, 1]).unwrap();
    assert!((&a.rho - &b.rho).norm() < 1e-13);
    assert!((da - db).norm() < 1e-13);
    assert!((a.trace().re - 1.0).abs() < 1e-12);
    assert!(a.min_eigenvalue() > -1e-12);
}

#[test]
fn parallel_noise_closed_form() {
    for n in [1, 2, 7, 40, 300] {
        for t in [0.01, 0.3, 2.0] {
            let gamma = 0.8;
            let p = ChannelParams::parallel(1.3, gamma, t).unwrap();
            let want = (n * n) as f64 * t * t * (-2.0 * n as f64 * gamma * t).exp();
            assert!(rel_err(ghz_qfi(n, &p).unwrap(), want) < 1e-9);
        }
    }
}

#[test]
fn qfi_below_heisenberg_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let n = rng.gen_range(1..200);
        let t = rng.gen_range(0.01..3.0);
        let p = ChannelParams::new(1.0, log_uniform(&mut rng, 0.01, 10.0), random_alphas(&mut rng), t).unwrap();
        let f = ghz_qfi(n, &p).unwrap();
        assert!(f >= 0.0 && f <= (n * n) as f64 * t * t * (1.0 + 1e-12));
    }
}

#[test]
fn transversal_ghz_slope() {
    let ns: Vec<usize> = (0..6).map(|i| (500.0 * 10f64.powf(i as f64 / 5.0)).round() as usize).collect();
    let series: Vec<(f64, f64)> =
        ns.iter().map(|&n| (n as f64, ghz_precision(n, 1.0, 1.0, [1.0, 0.0, 0.0]).unwrap().precision)).collect();
    let slope = scaling_fit(&series).unwrap();
    assert!((slope + 5.0 / 6.0).abs() < 0.03, "slope {slope}");
}

// Second-order coefficient of F_N/t for pure transversal noise, from the exact
// QFI (fast path at t=1e-4, dense evolution at t=1e-3).
#[test]
fn transversal_second_order_coefficient() {
    let c2 = |f: f64, n: usize, t: f64| (f / t - (n * n) as f64 * t) / (t * t);
    for n in [3usize, 10] {
        let nf = n as f64;
        let rotating = -((2.0 * nf - 1.0) - 1.0 / 3.0) * nf / 2.0;
        let static_ = -(2.0 * nf - 1.0) * nf / 2.0;
        let t = 1e-4;
        let p = ChannelParams::tilted(1.0, 1.0, 0.0, t).unwrap();
        assert!(rel_err(c2(ghz_qfi(n, &p).unwrap(), n, t), rotating) < 1e-3);
        let p0 = ChannelParams::tilted(0.0, 1.0, 0.0, t).unwrap();
        assert!(rel_err(c2(ghz_qfi(n, &p0).unwrap(), n, t), static_) < 1e-3);
        if n == 3 {
            let t = 1e-3;
            let p = ChannelParams::tilted(1.0, 1.0, 0.0, t).unwrap();
            let dense = qfi_full(n, &p, &DensityMatrix::ghz(n).unwrap()).unwrap();
            assert!(rel_err(c2(dense, n, t), rotating) < 1e-2);
        }
    }
}
