mod common;

use common::{c, log_uniform, random_alphas, rk4_evolve};
use noisy_metrology::channel::{coefficients, kraus_set, process_matrix, ChannelParams, Mat2, QubitState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state<R: Rng>(rng: &mut R) -> QubitState {
    let theta = rng.gen_range(0.0..std::f64::consts::PI);
    let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let mix = rng.gen_range(0.0..1.0);
    let pure = QubitState::from_bloch(theta, phi).rho;
    QubitState::new(pure * c(mix, 0.0) + QubitState::maximally_mixed().rho * c(1.0 - mix, 0.0)).unwrap()
}

fn random_params<R: Rng>(rng: &mut R) -> ChannelParams {
    let omega = rng.gen_range(-3.0..3.0);
    ChannelParams::new(omega, log_uniform(rng, 0.01, 10.0), random_alphas(rng), rng.gen_range(0.01..2.0)).unwrap()
}

#[test]
fn kraus_map_matches_master_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let state = random_state(&mut rng);
        let ks = kraus_set(&p).unwrap();
        let closed = ks.apply(&state).rho;
        let steps = (4000.0 * (1.0 + p.gamma * p.t + p.omega.abs() * p.t)) as usize;
        let ode = rk4_evolve(&p, &state.rho, steps);
        assert!((closed - ode).norm() < 1e-9, "{p:?}: {}", (closed - ode).norm());
        let via_s = process_matrix(&coefficients(&p).unwrap()).apply(&state.rho);
        assert!((closed - via_s).norm() < 1e-12);
    }
}

#[test]
fn derivatives_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let state = random_state(&mut rng);
        let h = 1e-5;
        let plus = kraus_set(&p.with_omega(p.omega + h)).unwrap().apply(&state).rho;
        let minus = kraus_set(&p.with_omega(p.omega - h)).unwrap().apply(&state).rho;
        let fd: Mat2 = (plus - minus) * c(0.5 / h, 0.0);
        let analytic = kraus_set(&p).unwrap().apply_derivative(&state);
        assert!((fd - analytic).norm() < 1e-6 * (1.0 + analytic.norm()), "{p:?}");

        let k = coefficients(&p).unwrap();
        let kp = coefficients(&p.with_omega(p.omega + h)).unwrap();
        let km = coefficients(&p.with_omega(p.omega - h)).unwrap();
        for (d, a, b) in [(k.db, kp.b, km.b), (k.dc, kp.c, km.c), (k.df, kp.f, km.f)] {
            assert!((d - (a - b) / (2.0 * h)).abs() < 1e-6 * (1.0 + d.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn channel_identities(
        omega in -5.0..5.0f64,
        log_gamma in -4.6..2.3f64,
        w in prop::array::uniform3(0.0..1.0f64),
        t in 0.0..3.0f64,
        theta in 0.0..std::f64::consts::PI,
        phi in 0.0..6.3f64,
    ) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-3);
        let alphas = [w[0] / total, w[1] / total, w[2] / total];
        let p = ChannelParams::new(omega, log_gamma.exp(), alphas, t).unwrap();
        let k = coefficients(&p).unwrap();
        prop_assert!((k.a + k.d - 1.0).abs() < 1e-12);

        let ks = kraus_set(&p).unwrap();
        prop_assert!((ks.completeness() - Mat2::identity()).norm() < 1e-12);
        let out = ks.apply(&QubitState::from_bloch(theta, phi));
        prop_assert!((out.rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(out.min_eigenvalue() > -1e-12);
        prop_assert!((out.rho - out.rho.adjoint()).norm() < 1e-12);
        prop_assert!(process_matrix(&k).min_eigenvalue() > -1e-12);
        // The derivative of a trace-preserving map is traceless.
        prop_assert!(ks.apply_derivative(&QubitState::from_bloch(theta, phi)).trace().norm() < 1e-10);
    }
}
