use proptest::prelude::*;
use srrwave::elliptic::complete_k;
use srrwave::orbits::*;
use srrwave::verify::oracles;
use std::f64::consts::PI;

fn cubic_root_oracle(c0: f64, beta: f64, lo: f64, hi: f64) -> f64 {
    oracles::bisect(|u| u * u / 2.0 - beta * u * u * u / 3.0 - c0, lo, hi, 1e-15).unwrap()
}

#[test]
fn turning_points_match_bisection() {
    let tp = turning_points(PotentialLevel::new(0.1, 1.0).unwrap()).unwrap();
    assert!((tp.u_min - cubic_root_oracle(0.1, 1.0, -1.0, 0.0)).abs() < 1e-12);
    assert!((tp.u_max - cubic_root_oracle(0.1, 1.0, 0.0, 1.0)).abs() < 1e-12);
    assert!((tp.u_far - cubic_root_oracle(0.1, 1.0, 1.0, 3.0)).abs() < 1e-12);
}

#[test]
fn period_matches_shooting_oracle() {
    let level = PotentialLevel::new(0.15, 1.0).unwrap();
    let orbit = orbit_from_energy(level, 256).unwrap();
    let u_max = cubic_root_oracle(0.15, 1.0, 0.0, 1.0);
    let shot = oracles::shooting_period(1.0, u_max, 1e-3);
    assert!((orbit.period - shot).abs() < 1e-6, "{} vs {shot}", orbit.period);
}

#[test]
fn four_pi_orbit() {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 512).unwrap();
    assert!((orbit.period - 4.0 * PI).abs() < 1e-10);
    let again = orbit_from_energy(orbit.level, 512).unwrap();
    assert!((again.period - 4.0 * PI).abs() < 1e-10);
    let shot = oracles::shooting_period(1.0, orbit.turning_points.u_max, 1e-3);
    assert!((shot - 4.0 * PI).abs() < 1e-6);
    assert!(orbit.energy_residual() < 1e-8);
    assert!(orbit.evenness_error() < 1e-8);
    assert!(!orbit.near_homoclinic);
}

#[test]
fn profile_matches_ode_oracle_past_half_period() {
    let orbit = orbit_from_energy(PotentialLevel::new(0.12, 1.0).unwrap(), 128).unwrap();
    let u_max = orbit.turning_points.u_max;
    for i in [5, 40, 64, 90, 127] {
        let y = oracles::ode(
            |_, y| vec![y[1], -y[0] + y[0] * y[0]],
            &[u_max, 0.0],
            0.0,
            orbit.z(i),
            1e-12,
        );
        assert!((orbit.u[i] - y[0]).abs() < 1e-8, "sample {i}");
        assert!((orbit.du[i] - y[1]).abs() < 1e-8, "sample {i}");
    }
}

#[test]
fn harmonic_limit() {
    let orbit = orbit_from_energy(PotentialLevel::new(1e-8, 1.0).unwrap(), 64).unwrap();
    assert!((orbit.period - 2.0 * PI).abs() < 1e-3);
    let near = orbit_for_period(2.0 * PI + 1e-6, 1.0, 64).unwrap();
    assert!(near.level.c0 < 1e-6);
}

#[test]
fn long_period_orbit_is_near_homoclinic() {
    let orbit = orbit_for_period(20.0 * PI, 1.0, 4096).unwrap();
    assert!((orbit.period - 20.0 * PI).abs() < 1e-10);
    assert!(orbit.near_homoclinic);
    assert!(orbit.level.gap < 1e-20);
    assert!((orbit.level.c0 - separatrix_energy(1.0)).abs() < 1e-16);
    assert!(orbit.energy_residual() < 1e-8);
    // Away from its dip the orbit sits on the saddle; the dip follows the homoclinic loop.
    let n = orbit.n_samples();
    let h = HomoclinicOrbit::new(1.0).unwrap();
    for i in [n / 2 - 100, n / 2, n / 2 + 37] {
        let z = orbit.z(i) - orbit.period / 2.0;
        assert!((orbit.u[i] - h.value(z)).abs() < 1e-6, "sample {i}");
    }
}

#[test]
fn period_increases_with_energy() {
    let mut last = 0.0;
    for i in 1..60 {
        let c0 = separatrix_energy(1.0) * i as f64 / 60.0;
        let t = period_of_level(PotentialLevel::new(c0, 1.0).unwrap()).unwrap();
        assert!(t > last, "c0={c0}");
        last = t;
    }
}

#[test]
fn period_map_round_trip() {
    for i in 1..12 {
        let c0 = separatrix_energy(1.0) * i as f64 / 12.0;
        let t = period_of_level(PotentialLevel::new(c0, 1.0).unwrap()).unwrap();
        let orbit = orbit_for_period(t, 1.0, 64).unwrap();
        assert!((orbit.level.c0 - c0).abs() < 1e-8, "c0={c0}");
    }
}

#[test]
fn homoclinic_identities() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for &beta in &[0.5, 1.0, 2.0] {
        let h = HomoclinicOrbit::new(beta).unwrap();
        for _ in 0..1000 {
            let z: f64 = rng.random_range(-30.0..30.0);
            // Γ'' by direct differentiation of (3/(2β))·sech²(z/2)·tanh(z/2).
            let (s, t) = (1.0 / (0.5 * z).cosh(), (0.5 * z).tanh());
            let g2 = 1.5 / beta * (0.5 * s.powi(4) - s * s * t * t);
            let g = h.value(z);
            assert!((g2 + g - beta * g * g).abs() < 1e-12);
        }
        let integral = oracles::simpson_panels(
            |z| h.derivative(z).powi(2),
            &(-60..=60).map(|i| i as f64).collect::<Vec<_>>(),
            1e-16,
        );
        assert!((integral / h.kinetic_integral() - 1.0).abs() < 1e-10);
        assert_eq!(h.derivative(0.0), 0.0);
    }
}

#[test]
fn cnoidal_closed_form_local_agreement() {
    // For a level with one real root the closed form is exact away from its pole;
    // compare with an ODE integration started at the minimum α.
    for &c0 in &[0.3, -0.05] {
        let p = CnoidalParameters::from_energy(c0, 1.0).unwrap();
        let kk = complete_k(p.k);
        for j in 1..8 {
            let z = p.g * kk * 1.4 * j as f64 / 8.0;
            let cn = srrwave::elliptic::jacobi(z / p.g, p.k).unwrap().cn;
            if 1.0 + cn <= 0.1 {
                continue;
            }
            let y = oracles::ode(|_, y| vec![y[1], -y[0] + y[0] * y[0]], &[p.alpha, 0.0], 0.0, z, 1e-12);
            let closed = cnoidal_profile(&p, z).unwrap();
            assert!((closed - y[0]).abs() < 1e-6 * (1.0 + y[0].abs()), "c0={c0} z={z}");
        }
    }
}

#[test]
fn cnoidal_fit_to_bounded_orbit_reproduces_period() {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 256).unwrap();
    let p = CnoidalParameters::matched_to(&orbit).unwrap();
    assert!((p.period() - orbit.period).abs() < 1e-9);
    assert!((cnoidal_profile(&p, 0.0).unwrap() - orbit.turning_points.u_min).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_and_evenness_hold(frac in 0.01..0.999f64, beta in 0.3..3.0f64) {
        let level = PotentialLevel::new(frac * separatrix_energy(beta), beta).unwrap();
        let orbit = orbit_from_energy(level, 128).unwrap();
        prop_assert!(orbit.energy_residual() < 1e-8);
        prop_assert!(orbit.evenness_error() < 1e-8);
        let tp = orbit.turning_points;
        for r in [tp.u_min, tp.u_max, tp.u_far] {
            prop_assert!((potential(r, beta) - level.c0).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_is_conserved_along_trajectories(u in -0.4..0.9f64, du in -0.2..0.2f64) {
        prop_assume!(potential_energy(u, du, 1.0) < 0.9 * separatrix_energy(1.0));
        let e0 = potential_energy(u, du, 1.0);
        let y = oracles::ode(|_, y| vec![y[1], -y[0] + y[0] * y[0]], &[u, du], 0.0, 2.0 * PI, 1e-11);
        prop_assert!((potential_energy(y[0], y[1], 1.0) - e0).abs() < 1e-8);
    }
}
