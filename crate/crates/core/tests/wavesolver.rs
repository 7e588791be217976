use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srrwave::orbits::orbit_for_period;
use srrwave::verify::oracles;
use srrwave::wavesolver::*;
use std::f64::consts::PI;

fn random_series(seed: u64, period: f64, modes: usize) -> FourierSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decay = |m: usize| 0.5f64.powi(m as i32);
    let cos = (0..modes).map(|m| rng.random_range(-1.0..1.0) * decay(m)).collect();
    let sin = (1..=modes).map(|m| rng.random_range(-1.0..1.0) * decay(m)).collect();
    FourierSolution::new(period, cos, sin).unwrap()
}

fn unperturbed_wave(modes: usize) -> FourierSolution {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 1024).unwrap();
    let seed = FourierSolution::from_orbit(&orbit, 0.5, modes).unwrap();
    newton_solve(&seed, &ModelParams::default(), NewtonOptions::default()).unwrap().solution
}

#[test]
fn derivatives_match_finite_differences() {
    let s = random_series(1, 3.7, 12);
    let h = 1e-4;
    for z in [-1.2, 0.0, 0.4, 2.9] {
        let fd1 = (s.evaluate(z + h, 0) - s.evaluate(z - h, 0)) / (2.0 * h);
        let fd2 = (s.evaluate(z + h, 0) - 2.0 * s.evaluate(z, 0) + s.evaluate(z - h, 0)) / (h * h);
        assert!((fd1 - s.evaluate(z, 1)).abs() < 1e-6, "{fd1} vs {}", s.evaluate(z, 1));
        assert!((fd2 - s.evaluate(z, 2)).abs() < 1e-6, "{fd2} vs {}", s.evaluate(z, 2));
    }
}

#[test]
fn parseval_matches_quadrature() {
    for seed in 0..4 {
        let s = random_series(seed, 2.0 * PI * (1.0 + seed as f64), 10);
        let direct = oracles::simpson(|z| s.evaluate(z, 0).powi(2), 0.0, s.period, 1e-13).sqrt();
        assert!((direct - s.norm()).abs() < 1e-10 * s.norm(), "{direct} vs {}", s.norm());
    }
}

#[test]
fn orbit_encoding_nearly_solves_the_frame_equation() {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 1024).unwrap();
    let seed = FourierSolution::from_orbit(&orbit, 0.5, 50).unwrap();
    let r = residual(&seed, &ModelParams::default());
    assert_eq!(r.len(), 100);
    assert!(r.iter().all(|v| v.abs() < 1e-8), "{}", r.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
}

#[test]
fn unperturbed_wave_matches_shooting() {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 1024).unwrap();
    let seed = FourierSolution::from_orbit(&orbit, 0.5, 50).unwrap();
    let report = newton_solve(&seed, &ModelParams::default(), NewtonOptions::default()).unwrap();
    assert!(report.residual < 1e-10);
    assert!(report.offgrid_residual < 1e-9);
    let sol = report.solution;
    assert!(sol.max_sine() <= 1e-12);
    // U'' = U·(βU − 1) shot from the top turning point; the frame variable is ωz.
    let u_max = orbit.turning_points.u_max;
    let mut err = 0.0_f64;
    for k in 0..=32 {
        let z = 4.0 * PI * k as f64 / 32.0;
        let y = oracles::ode(|_, y| vec![y[1], y[0] * (y[0] - 1.0)], &[u_max, 0.0], 0.0, z, 1e-12);
        err = err.max((y[0] - sol.evaluate(0.5 * z, 0)).abs());
    }
    assert!(err < 1e-6, "profile error {err}");
}

#[test]
fn linear_guess_converges_quickly() {
    let params = ModelParams { lambda: 0.1, gamma: 0.05, delta: 1e-3, ..Default::default() };
    let guess = linear_response_guess(&params, 2.0 * PI, 50).unwrap();
    let report = newton_solve(&guess, &params, NewtonOptions::default()).unwrap();
    assert!(report.iterations <= 5, "{} iterations", report.iterations);
    assert!(report.residual < 1e-10);
}

#[test]
fn coarse_truncation_is_rejected() {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 1024).unwrap();
    let seed = FourierSolution::from_orbit(&orbit, 0.5, 8).unwrap();
    assert!(newton_solve(&seed, &ModelParams::default(), NewtonOptions::default()).is_err());
}

#[test]
fn doubling_modes_keeps_the_norm() {
    let coarse = unperturbed_wave(50);
    let fine = newton_solve(&coarse.resized(100), &ModelParams::default(), NewtonOptions::default()).unwrap();
    assert!((coarse.norm() - fine.solution.norm()).abs() < 1e-9);
    assert!(coarse.tail_ratio() < 1e-10);
}

#[test]
fn damping_without_drive_leaves_no_wave() {
    let wave = unperturbed_wave(50);
    let damped = ModelParams { gamma: 0.05, ..Default::default() };
    match newton_solve(&wave, &damped, NewtonOptions::default()) {
        Err(_) => {}
        Ok(r) => {
            let ripple = r.solution.cos[1..].iter().chain(&r.solution.sin).fold(0.0_f64, |m, c| m.max(c.abs()));
            assert!(ripple < 1e-8, "a non-constant wave survived damping (ripple {ripple})");
        }
    }
}

#[test]
fn small_drive_response_is_linear() {
    let base = ModelParams { lambda: 0.1, ..Default::default() };
    let mut ratios = Vec::new();
    for delta in [0.0025, 0.005, 0.01] {
        let params = ModelParams { delta, ..base };
        let guess = linear_response_guess(&params, 2.0 * PI, 50).unwrap();
        let norm = newton_solve(&guess, &params, NewtonOptions::default()).unwrap().solution.norm();
        let w2 = params.omega * params.omega;
        let d = 1.0 - w2 + 2.0 * params.lambda * w2 * params.p.cos();
        let linear = PI.sqrt() * delta / d.abs();
        assert!((norm / linear - 1.0).abs() < 0.05, "{norm} vs {linear}");
        ratios.push(norm / delta);
    }
    assert!((ratios[2] / ratios[0] - 1.0).abs() < 0.01);
}

#[test]
fn degenerate_range_gives_one_point() {
    let zero = FourierSolution::zeros(2.0 * PI, 16).unwrap();
    let params = ModelParams { lambda: 0.1, ..Default::default() };
    let b = continue_branch(&zero, &params, Parameter::Delta, (0.0, 0.0), StepControl::default()).unwrap();
    assert_eq!(b.points.len(), 1);
    assert_eq!(b.termination, Termination::SinglePoint);
}

#[test]
fn driven_branch_grows_from_zero() {
    let zero = FourierSolution::zeros(2.0 * PI, 32).unwrap();
    let params = ModelParams { lambda: 0.1, ..Default::default() };
    let ctl = StepControl { initial: 0.005, ..Default::default() };
    let b = continue_branch(&zero, &params, Parameter::Delta, (0.0, 0.05), ctl).unwrap();
    assert_eq!(b.termination, Termination::RangeEnd);
    assert!((b.points.last().unwrap().param - 0.05).abs() < 1e-12);
    assert!(b.folds.is_empty());
    for w in b.points.windows(2) {
        assert!(w[1].param > w[0].param && w[1].norm > w[0].norm);
    }
}

#[test]
fn damping_loop_is_closed_and_symmetric() {
    let wave = unperturbed_wave(50);
    let params = ModelParams { lambda: 1e-4, delta: 7e-4, ..Default::default() };
    let opts = NewtonOptions { subspace: Subspace::Even, ..Default::default() };
    let start = newton_solve(&wave, &params, opts).unwrap().solution;
    let ctl = StepControl { initial: 0.05, ..Default::default() };
    let up = continue_branch(&start, &params, Parameter::Gamma, (-0.01, 0.01), ctl).unwrap();
    let down = continue_branch(&start, &params, Parameter::Gamma, (-0.01, 0.01), StepControl { increasing: false, ..ctl }).unwrap();
    assert_eq!(up.termination, Termination::ClosedLoop);
    assert_eq!(up.folds.len(), 2);
    assert!(up.folds.iter().any(|f| f.param > 0.0) && up.folds.iter().any(|f| f.param < 0.0));
    assert_eq!(up.points.len(), down.points.len());
    for (a, b) in up.points.iter().zip(&down.points) {
        assert!((a.norm - b.norm).abs() < 1e-8);
        assert!((a.param + b.param).abs() < 1e-8);
    }
    // Every fold sits where the parameter increments change sign.
    for f in &up.folds {
        let i = f.index;
        assert!(up.points[i].fold);
        let before = up.points[i].param - up.points[i - 1].param;
        let after = up.points[i + 1].param - up.points[i].param;
        assert!(before * after <= 0.0);
    }
    let turns = up.points.windows(3).filter(|w| (w[1].param - w[0].param) * (w[2].param - w[1].param) < 0.0).count();
    assert_eq!(turns, 2);
}

#[test]
fn resonant_or_incommensurate_drive_is_rejected() {
    let params = ModelParams { omega: 1.0, delta: 0.1, ..Default::default() };
    assert!(linear_response_guess(&params, 2.0 * PI, 8).is_err());
    let seed = FourierSolution::zeros(3.0, 8).unwrap();
    assert!(newton_solve(&seed, &ModelParams { delta: 0.1, ..Default::default() }, NewtonOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_pairs_opposite_damping(seed in 0u64..1000, gamma in -0.5f64..0.5, lambda in -0.4f64..0.4, delta in 0.0f64..0.5) {
        let s = random_series(seed, 2.0 * PI, 8);
        let params = ModelParams { gamma, lambda, delta, ..Default::default() };
        let mirrored = ModelParams { gamma: -gamma, ..params };
        let r = residual(&s, &params);
        let rr = residual(&s.reflect(), &mirrored);
        let n = r.len();
        for i in 0..n {
            prop_assert!((r[i] - rr[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn full_period_shift_is_identity(seed in 0u64..1000, z in -5.0f64..5.0, order in 0u32..3) {
        let s = random_series(seed, 4.5, 6);
        prop_assert!((s.shift_evaluate(z, s.period, order) - s.evaluate(z, order)).abs() < 1e-11);
        prop_assert!((s.shift_evaluate(z, 0.0, order) - s.evaluate(z, order)).abs() == 0.0);
    }
}
