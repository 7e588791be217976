use nalgebra::Complex;
use srrwave::floquet::*;
use srrwave::orbits::orbit_for_period;
use srrwave::wavesolver::*;
use std::f64::consts::PI;

fn wave(lambda: f64) -> FourierSolution {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 1024).unwrap();
    let seed = FourierSolution::from_orbit(&orbit, 0.5, 50).unwrap();
    let params = ModelParams { lambda, ..Default::default() };
    newton_solve(&seed, &params, NewtonOptions::default()).unwrap().solution
}

#[test]
fn decoupled_oscillators_rotate_on_the_unit_circle() {
    let params = ModelParams { omega: 0.7, ..Default::default() };
    let zero = FourierSolution::zeros(2.0 * PI, 8).unwrap();
    let m = monodromy(&zero, &params, &build_mass(20, 0.0).unwrap(), FloquetOptions::default()).unwrap();
    assert_eq!(m.multipliers.len(), 40);
    let rotation = Complex::from_polar(1.0, m.period);
    for z in &m.multipliers {
        assert!((z.norm() - 1.0).abs() < 1e-6);
        assert!((z - rotation).norm().min((z - rotation.conj()).norm()) < 1e-6, "{z}");
    }
    assert!(m.stable);
    assert!(m.determinant_error() < 1e-8);
}

#[test]
fn determinant_follows_the_damping() {
    let w = wave(0.0);
    let damped = ModelParams { gamma: 0.1, ..Default::default() };
    let m = monodromy(&w, &damped, &build_mass(20, 0.0).unwrap(), FloquetOptions::default()).unwrap();
    let expected = (-0.1 * (w.period / 0.5) * 20.0f64).exp();
    assert!((w.period / 0.5 - 4.0 * PI).abs() < 1e-9);
    assert!((m.expected_determinant - expected).abs() < 1e-12 * expected);
    assert!(m.determinant_error() < 1e-6, "{}", m.determinant_error());

    let coupled = ModelParams { gamma: 0.1, lambda: 0.1, delta: 0.05, ..Default::default() };
    let c = build_mass(20, 0.1).unwrap();
    let m = monodromy(&w, &coupled, &c, FloquetOptions::default()).unwrap();
    let expected = (-0.1 * 4.0 * PI * c.trace_inverse()).exp();
    assert!((m.determinant - expected).abs() < 1e-6 * expected);
}

#[test]
fn conservative_spectrum_pairs_up() {
    let w = wave(0.0);
    let m = monodromy(&w, &ModelParams::default(), &build_mass(20, 0.0).unwrap(), FloquetOptions::default()).unwrap();
    assert!((m.determinant - 1.0).abs() < 1e-8);
    assert!(m.reciprocal_pairing_residual() < 1e-6);
    assert!(m.conjugate_pairing_residual() < 1e-8);
}

#[test]
fn rk4_convergence_order() {
    let w = wave(0.0);
    let params = ModelParams { gamma: 0.1, lambda: 0.1, delta: 0.05, ..Default::default() };
    let c = build_mass(20, 0.1).unwrap();
    let mats: Vec<_> = [64, 128, 256].iter().map(|&s| monodromy_matrix(&w, &params, &c, s)).collect();
    let order = ((&mats[0] - &mats[1]).amax() / (&mats[1] - &mats[2]).amax()).log2();
    assert!((3.5..4.5).contains(&order), "observed order {order}");
}

#[test]
fn coupling_spreads_the_multipliers() {
    let spread = |lambda: f64| {
        let params = ModelParams { lambda, ..Default::default() };
        let m = monodromy(&wave(lambda), &params, &build_mass(20, lambda).unwrap(), FloquetOptions::default()).unwrap();
        let mods: Vec<f64> = m.multipliers.iter().map(|z| z.norm()).collect();
        mods.iter().cloned().fold(0.0, f64::max) - mods.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (free, coupled) = (spread(0.0), spread(0.1));
    assert!(free < 1e-6);
    assert!(coupled > free + 1e-3);
}

#[test]
fn drive_moves_multipliers_along_the_circle() {
    let w = wave(0.0).half_shifted();
    let c = build_mass(20, 0.0).unwrap();
    let mut last_angle = 0.0;
    for delta in [1e-4, 2e-4, 4e-4] {
        let params = ModelParams { delta, ..Default::default() };
        let opts = NewtonOptions { subspace: Subspace::Even, ..Default::default() };
        let s = newton_solve(&w, &params, opts).unwrap().solution;
        let m = monodromy(&s, &params, &c, FloquetOptions::default()).unwrap();
        assert!(classify(&m, 1e-6).stable);
        let angle = m.multipliers.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
        assert!(angle > last_angle);
        last_angle = angle;
    }
}

#[test]
fn incompatible_lattice_is_rejected() {
    let zero = FourierSolution::zeros(2.0 * PI, 8).unwrap();
    let params = ModelParams { p: 0.3, ..Default::default() };
    let err = monodromy(&zero, &params, &build_mass(20, 0.0).unwrap(), FloquetOptions::default()).unwrap_err();
    assert!(matches!(err, srrwave::Error::Incompatible(_)));
}

#[test]
fn resolution_check_passes_on_a_damped_wave() {
    let params = ModelParams { gamma: 0.2, lambda: 0.1, delta: 0.1, ..Default::default() };
    let guess = linear_response_guess(&params, 2.0 * PI, 32).unwrap();
    let s = newton_solve(&guess, &params, NewtonOptions::default()).unwrap().solution;
    let opts = FloquetOptions { check_resolution: true, ..Default::default() };
    assert!(monodromy(&s, &params, &build_mass(20, 0.1).unwrap(), opts).is_ok());
    let coarse = FloquetOptions { steps_per_period: 8, check_resolution: true, ..Default::default() };
    let err = monodromy(&s, &params, &build_mass(20, 0.1).unwrap(), coarse).unwrap_err();
    assert!(matches!(err, srrwave::Error::Resolution(_)));
}

#[test]
fn damped_zero_branch_is_stable() {
    let zero = FourierSolution::zeros(2.0 * PI, 16).unwrap();
    let params = ModelParams { gamma: 0.05, ..Default::default() };
    let ctl = StepControl { initial: 0.1, ..Default::default() };
    let branch = continue_branch(&zero, &params, Parameter::Gamma, (0.05, 0.5), ctl).unwrap();
    assert!(branch.points.len() > 2);
    let st = stability_along_branch(&branch, &build_mass(20, 0.0).unwrap(), FloquetOptions::default());
    assert!(st.errors.is_empty());
    assert!(st.branch.points.iter().all(|p| p.stable == Some(true)));
    assert_eq!(st.segments.len(), 1);
}

#[test]
fn duplicate_points_get_identical_verdicts() {
    let params = ModelParams { lambda: 0.1, delta: 0.5, gamma: 1.5, ..Default::default() };
    let guess = linear_response_guess(&params, 2.0 * PI, 50).unwrap();
    let s = newton_solve(&guess, &params, NewtonOptions::default()).unwrap().solution;
    let mut branch = continue_branch(&s, &params, Parameter::Gamma, (1.5, 1.5), StepControl::default()).unwrap();
    let p = branch.points[0].clone();
    branch.points.push(p);
    let st = stability_along_branch(&branch, &build_mass(20, 0.1).unwrap(), FloquetOptions::default());
    assert_eq!(st.verdicts[0], st.verdicts[1]);
    assert!(st.verdicts[0].unwrap().stable);
}

#[test]
fn failing_points_do_not_abort_the_sweep() {
    let zero = FourierSolution::zeros(2.0 * PI, 16).unwrap();
    let params = ModelParams { gamma: 0.05, ..Default::default() };
    let branch = continue_branch(&zero, &params, Parameter::Gamma, (0.05, 0.05), StepControl::default()).unwrap();
    // A 7-site ring is incompatible with p = 2π/20.
    let st = stability_along_branch(&branch, &build_mass(7, 0.0).unwrap(), FloquetOptions::default());
    assert_eq!(st.errors.len(), 1);
    assert_eq!(st.branch.points[0].stable, None);
}
