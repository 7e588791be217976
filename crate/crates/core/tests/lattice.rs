use srrwave::floquet::{build_mass, classify, monodromy, FloquetOptions};
use srrwave::lattice::*;
use srrwave::orbits::orbit_for_period;
use srrwave::wavesolver::*;
use std::f64::consts::PI;

fn wave() -> FourierSolution {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 1024).unwrap();
    let seed = FourierSolution::from_orbit(&orbit, 0.5, 50).unwrap();
    newton_solve(&seed, &ModelParams::default(), NewtonOptions::default()).unwrap().solution
}

fn damped_driven() -> (FourierSolution, ModelParams) {
    let params = ModelParams { lambda: 0.1, delta: 0.5, gamma: 1.5, ..Default::default() };
    let guess = linear_response_guess(&params, 2.0 * PI, 50).unwrap();
    (newton_solve(&guess, &params, NewtonOptions::default()).unwrap().solution, params)
}

/// Linear oscillators; `step` does not validate, so `β = 0` is allowed here.
fn linear_params(gamma: f64) -> ModelParams {
    ModelParams { beta: 0.0, gamma, ..Default::default() }
}

#[test]
fn single_mode_seed() {
    let mut s = FourierSolution::zeros(2.0 * PI, 4).unwrap();
    s.cos[1] = 1.0;
    let state = seed_from_wave(&s, &ModelParams::default(), 20).unwrap();
    for n in 0..20 {
        assert!((state.q[n] - (2.0 * PI * n as f64 / 20.0).cos()).abs() < 1e-14);
    }
    assert!(seed_from_wave(&s, &ModelParams::default(), 19).is_err());
}

#[test]
fn harmonic_rotation() {
    let c = build_mass(3, 0.0).unwrap();
    let params = linear_params(0.0);
    let dt = 2.0 * PI / 2048.0;
    let mut s = LatticeState { t: 0.0, q: vec![1.0, 0.0, 0.5], qdot: vec![0.0, 1.0, 0.0] };
    for _ in 0..2048 {
        s = step(&s, &params, &c, dt).unwrap();
    }
    assert!((s.q[0] - 1.0).abs() < 1e-9 && s.qdot[0].abs() < 1e-9);
    assert!(s.q[1].abs() < 1e-9 && (s.qdot[1] - 1.0).abs() < 1e-9);
    let energy = |s: &LatticeState| 0.5 * (s.q[0] * s.q[0] + s.qdot[0] * s.qdot[0]);
    assert!((energy(&s) - 0.5).abs() < 1e-9);
}

#[test]
fn damped_linear_lattice_loses_amplitude() {
    let c = build_mass(5, 0.2).unwrap();
    let params = linear_params(0.3);
    let mut s = LatticeState { t: 0.0, q: vec![1.0, -0.5, 0.2, 0.0, 0.3], qdot: vec![0.0; 5] };
    let mut last = s.energy(&c, 0.0);
    for _ in 0..200 {
        s = step(&s, &params, &c, 0.01).unwrap();
        let e = s.energy(&c, 0.0);
        assert!(e < last);
        last = e;
    }
}

#[test]
fn global_error_is_fourth_order() {
    let c = build_mass(4, 0.1).unwrap();
    let params = ModelParams { gamma: 0.1, lambda: 0.1, delta: 0.2, ..Default::default() };
    let s0 = LatticeState { t: 0.0, q: vec![0.3, -0.2, 0.1, 0.0], qdot: vec![0.0, 0.1, 0.0, -0.1] };
    let run = |dt: f64| simulate(&s0, &params, &c, 4.0, dt, 1_000_000).unwrap().last;
    let (a, b, r) = (run(0.1), run(0.05), run(0.025));
    let order = (a.phase_distance(&b) / b.phase_distance(&r)).log2();
    assert!((3.5..4.5).contains(&order), "observed order {order}");
}

#[test]
fn conservative_lattice_keeps_its_energy() {
    let w = wave();
    let period = w.period / 0.5;
    let coupled = ModelParams { lambda: 0.1, ..Default::default() };
    let ring = LatticeState {
        t: 0.0,
        q: (0..20).map(|n| 0.2 * (2.0 * PI * n as f64 / 20.0).cos()).collect(),
        qdot: (0..20).map(|n| 0.1 * (4.0 * PI * n as f64 / 20.0).sin()).collect(),
    };
    let cases = [
        (seed_from_wave(&w, &ModelParams::default(), 20).unwrap(), ModelParams::default()),
        (ring, coupled),
    ];
    for (s0, params) in cases {
        let c = build_mass(20, params.lambda).unwrap();
        let f = simulate(&s0, &params, &c, 10.0 * period, default_dt(w.period, &params), 4096).unwrap();
        assert!(f.blowup.is_none());
        let (e0, e1) = (s0.energy(&c, 1.0), f.last.energy(&c, 1.0));
        assert!((e1 - e0).abs() < 1e-6 * e0.abs(), "{e0} → {e1}");
    }
}

#[test]
fn wave_returns_after_one_period() {
    let w = wave();
    let params = ModelParams::default();
    let c = build_mass(20, 0.0).unwrap();
    let s0 = seed_from_wave(&w, &params, 20).unwrap();
    let f = simulate(&s0, &params, &c, w.period / params.omega, default_dt(w.period, &params), 4096).unwrap();
    assert!(f.last.distance(&s0) < 1e-5);

    let (s, params) = damped_driven();
    let c = build_mass(20, 0.1).unwrap();
    let s0 = seed_from_wave(&s, &params, 20).unwrap();
    let period = s.period / params.omega;
    let f = simulate(&s0, &params, &c, period, default_dt(s.period, &params), 4096).unwrap();
    let exact = wave_state(&s, &params, 20, period);
    assert!(f.last.distance(&exact) < 1e-4);
    assert!(f.last.distance(&s0) < 1e-4);
}

#[test]
fn stable_wave_stays_put() {
    let (s, params) = damped_driven();
    let c = build_mass(20, 0.1).unwrap();
    assert!(classify(&monodromy(&s, &params, &c, FloquetOptions::default()).unwrap(), 1e-6).stable);
    let period = s.period / params.omega;
    let mut state = seed_from_wave(&s, &params, 20).unwrap().perturbed(1e-8, 3);
    for _ in 0..50 {
        let f = simulate(&state, &params, &c, period, default_dt(s.period, &params), 4096).unwrap();
        assert!(f.blowup.is_none());
        assert!(f.last.distance(&state) < 1e-3);
        state = f.last;
    }
}

#[test]
fn unstable_wave_blows_up_at_the_floquet_rate() {
    // With its maximum at the origin the drive-selected wave is a saddle of the phase dynamics.
    let params = ModelParams { lambda: 1e-4, delta: 7e-4, ..Default::default() };
    let opts = NewtonOptions { subspace: Subspace::Even, ..Default::default() };
    let s = newton_solve(&wave(), &params, opts).unwrap().solution;
    let c = build_mass(20, params.lambda).unwrap();
    let m = monodromy(&s, &params, &c, FloquetOptions::default()).unwrap();
    assert!(!classify(&m, 1e-6).stable);
    let period = s.period / params.omega;
    let dt = default_dt(s.period, &params);

    let mut reference = seed_from_wave(&s, &params, 20).unwrap();
    let mut perturbed = reference.perturbed(1e-8, 11);
    let (mut times, mut gaps) = (Vec::new(), Vec::new());
    let mut blowup = None;
    for _ in 0..200 {
        let a = simulate(&reference, &params, &c, period, dt, 4096).unwrap();
        let b = simulate(&perturbed, &params, &c, period, dt, 4096).unwrap();
        if b.blowup.is_some() {
            blowup = b.blowup;
            break;
        }
        reference = a.last;
        perturbed = b.last;
        times.push(reference.t);
        gaps.push(reference.phase_distance(&perturbed));
    }
    assert!(blowup.is_some());
    let measured = growth_rate(&times, &gaps, 1e-7, 1e-3).unwrap();
    let predicted = m.max_modulus.ln() / period;
    assert!((measured / predicted - 1.0).abs() < 0.2, "{measured} vs {predicted}");
}
