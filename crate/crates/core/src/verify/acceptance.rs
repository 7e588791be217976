//! The acceptance suite: eleven end-to-end checks with fixed tolerances and runtime limits.
//! Each check returns an [`Outcome`]; [`run_all`] runs them in order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use super::oracles;
use crate::elliptic::{complete_e, complete_k, incomplete_e, incomplete_f, jacobi, EllipticModulus};
use crate::error::{Error, Result};
use crate::floquet::{build_mass, classify, monodromy, stability_along_branch, FloquetOptions, InstabilityKind};
use crate::floquet::{LatticeCoupling, StabilityVerdict};
use crate::lattice::{default_dt, growth_rate, seed_from_wave, simulate};
use crate::melnikov::{
    damping_threshold_homoclinic, find_simple_zeros, melnikov_homoclinic_closed, melnikov_homoclinic_numeric, DriveSpec,
};
use crate::orbits::{homoclinic_profile, orbit_for_period, HomoclinicOrbit};
use crate::wavesolver::{
    continue_branch, linear_response_guess, newton_solve, FourierSolution, ModelParams, NewtonOptions, Parameter,
    StepControl, Subspace, Termination,
};

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} [{:>2}] {} ({:.2} s): {}", self.id, self.title, self.seconds, self.detail)
    }
}

/// Collects named checks; a criterion passes when every check does.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failed.push(what);
        }
    }

    fn note(&mut self, what: String) {
        self.notes.push(what);
    }
}

type Criterion = fn(&mut Checks) -> Result<()>;

/// Criterion titles, runtime limits in seconds (if any) and bodies.
const CRITERIA: [(&str, Option<f64>, Criterion); 11] = [
    ("homoclinic Melnikov two-path agreement", Some(5.0), homoclinic_two_paths),
    ("threshold sharpness", Some(5.0), threshold_sharpness),
    ("homoclinic profile identity", None, homoclinic_identity),
    ("unperturbed wave solvability", Some(10.0), unperturbed_wave),
    ("monodromy determinant identity", None, determinant_identity),
    ("period-doubling route", Some(120.0), period_doubling_route),
    ("closed damping loop with two folds", Some(300.0), damping_loop),
    ("driven-branch linear response", None, linear_response),
    ("stabilization by loss", None, stabilization_by_loss),
    ("Floquet and dynamics consistency", None, floquet_dynamics),
    ("special-function kernel", None, special_functions),
];

pub const COUNT: usize = CRITERIA.len();

/// Runs criterion `id` (1-based).
pub fn run(id: usize) -> Outcome {
    let (title, limit, body) = CRITERIA[id - 1];
    let start = Instant::now();
    let mut checks = Checks::default();
    let result = body(&mut checks);
    let seconds = start.elapsed().as_secs_f64();
    if let Some(limit) = limit {
        checks.check(seconds < limit, format!("runtime {seconds:.2} s < {limit} s"));
    }
    if let Err(e) = &result {
        checks.failed.push(format!("error: {e}"));
    }
    let passed = checks.failed.is_empty();
    let detail = if passed { checks.notes.join("; ") } else { checks.failed.join("; ") };
    Outcome { id, title, passed, detail, seconds }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=COUNT).map(run).collect()
}

fn drive(delta: f64) -> DriveSpec {
    DriveSpec { amplitude: delta }
}

fn homoclinic_scale(omega: f64, gamma: f64, delta: f64) -> Result<f64> {
    Ok(6.0 / 5.0 * (gamma.abs() + damping_threshold_homoclinic(1.0, omega, delta)?))
}

fn homoclinic_two_paths(c: &mut Checks) -> Result<()> {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for i in 0..5 {
        let omega = 0.3 + 1.7 * i as f64 / 4.0;
        for j in 0..5 {
            let gamma = j as f64 / 4.0;
            for l in 0..5 {
                let a = 2.0 * PI * l as f64 / 5.0;
                let closed = melnikov_homoclinic_closed(1.0, omega, gamma, drive(1.0), a)?;
                let numeric = melnikov_homoclinic_numeric(1.0, omega, gamma, drive(1.0), a)?;
                worst = worst.max((closed - numeric).abs() / homoclinic_scale(omega, gamma, 1.0)?);
                count += 1;
            }
        }
    }
    c.check(count == 125 && worst < 1e-8, format!("{count} points, max relative difference {worst:.2e} < 1e-8"));
    Ok(())
}

fn threshold_sharpness(c: &mut Checks) -> Result<()> {
    for omega in [0.5, 1.0, 2.0] {
        for delta in [1.0, 7e-4] {
            let star = 5.0 * PI * omega * omega * delta / (PI * omega).sinh();
            let zeros = |gamma: f64| -> Result<usize> {
                Ok(find_simple_zeros(|a| melnikov_homoclinic_closed(1.0, omega, gamma, drive(delta), a), 256)?.zeros.len())
            };
            let (below, above) = (zeros(0.9 * star)?, zeros(1.1 * star)?);
            c.check(
                below == 2 && above == 0,
                format!("ω={omega} Δ={delta}: {below} zeros below, {above} above"),
            );
        }
    }
    Ok(())
}

fn homoclinic_identity(c: &mut Checks) -> Result<()> {
    for beta in [0.5, 1.0, 3.0] {
        let mut worst = 0.0_f64;
        for i in 0..=4000 {
            let z = -40.0 + 80.0 * i as f64 / 4000.0;
            let (g, _) = homoclinic_profile(beta, z);
            let s = 1.0 / (0.5 * z).cosh();
            let t = (0.5 * z).tanh();
            let second = -1.5 / beta * (s * s * t * t - 0.5 * s.powi(4));
            worst = worst.max((second + g - beta * g * g).abs());
        }
        c.check(worst < 1e-12, format!("β={beta}: residual {worst:.1e} < 1e-12"));
        let exact = 6.0 / (5.0 * beta * beta);
        let panels: Vec<f64> = (0..=24).map(|i| -60.0 + 5.0 * i as f64).collect();
        let integral = oracles::simpson_panels(|z| homoclinic_profile(beta, z).1.powi(2), &panels, 1e-15);
        let rel = (integral - exact).abs() / exact;
        c.check(rel < 1e-10, format!("β={beta}: ∫Γ'² relative error {rel:.1e} < 1e-10"));
        c.check(HomoclinicOrbit::new(beta)?.kinetic_integral() == exact, format!("β={beta}: damping coefficient"));
    }
    Ok(())
}

/// The `Δ = γ = λ = 0` wave of orbit period `4π` at `ω = 1/2`, with `J` modes.
fn four_pi_wave(modes: usize) -> Result<(FourierSolution, f64)> {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 1024)?;
    let seed = FourierSolution::from_orbit(&orbit, 0.5, modes)?;
    let report = newton_solve(&seed, &ModelParams::default(), NewtonOptions::default())?;
    Ok((report.solution, report.residual))
}

fn unperturbed_wave(c: &mut Checks) -> Result<()> {
    let orbit = orbit_for_period(4.0 * PI, 1.0, 1024)?;
    let (sol, residual) = four_pi_wave(50)?;
    c.check(residual < 1e-10, format!("residual {residual:.1e} < 1e-10"));
    let u_max = orbit.turning_points.u_max;
    let mut err = 0.0_f64;
    for k in 0..=32 {
        let z = 4.0 * PI * k as f64 / 32.0;
        let y = oracles::ode(|_, y| vec![y[1], y[0] * (y[0] - 1.0)], &[u_max, 0.0], 0.0, z, 1e-12);
        err = err.max((y[0] - sol.evaluate(0.5 * z, 0)).abs());
    }
    c.check(err < 1e-6, format!("profile vs shooting {err:.1e} < 1e-6"));
    Ok(())
}

fn determinant_identity(c: &mut Checks) -> Result<()> {
    let (wave, _) = four_pi_wave(50)?;
    let free = build_mass(20, 0.0)?;
    let opts = FloquetOptions::default();

    let zero = FourierSolution::zeros(2.0 * PI, 8)?;
    let m = monodromy(&zero, &ModelParams::default(), &free, opts)?;
    let off = m.multipliers.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    c.check(
        m.multipliers.len() == 40 && off < 1e-6,
        format!("decoupled undriven: {} multipliers, max ||χ|−1| {off:.1e} < 1e-6", m.multipliers.len()),
    );
    let m = monodromy(&wave, &ModelParams::default(), &free, opts)?;
    let off = m.multipliers.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    c.check(off < 1e-6, format!("decoupled wave: max ||χ|−1| {off:.1e} < 1e-6"));

    let coupled = ModelParams { lambda: 0.1, ..Default::default() };
    let coupled_wave = newton_solve(&wave, &coupled, NewtonOptions::default())?.solution;
    for (name, sol, params) in [
        ("γ=0 λ=0", &wave, ModelParams::default()),
        ("γ=0 λ=0.1", &coupled_wave, coupled),
    ] {
        let m = monodromy(sol, &params, &build_mass(20, params.lambda)?, opts)?;
        let err = (m.determinant - 1.0).abs();
        c.check(err < 1e-8, format!("{name}: |det−1| {err:.1e} < 1e-8"));
    }

    let damped = ModelParams { gamma: 0.1, lambda: 0.1, delta: 0.05, ..Default::default() };
    let driven = ModelParams { gamma: 1.5, lambda: 0.1, delta: 0.5, ..Default::default() };
    let driven_wave = newton_solve(&linear_response_guess(&driven, 2.0 * PI, 50)?, &driven, NewtonOptions::default())?.solution;
    for (name, sol, params) in [
        ("γ=0.1 λ=0 (wave)", &wave, ModelParams { gamma: 0.1, ..Default::default() }),
        ("γ=0.1 λ=0.1 Δ=0.05 (wave)", &wave, damped),
        ("γ=1.5 λ=0.1 Δ=0.5", &driven_wave, driven),
    ] {
        let coupling = build_mass(20, params.lambda)?;
        let m = monodromy(sol, &params, &coupling, opts)?;
        let expected = (-params.gamma * (sol.period / params.omega) * coupling.trace_inverse()).exp();
        let err = (m.determinant - expected).abs() / expected;
        c.check(err < 1e-6, format!("{name}: relative determinant error {err:.1e} < 1e-6"));
    }
    Ok(())
}

fn even_newton() -> NewtonOptions {
    NewtonOptions { subspace: Subspace::Even, ..Default::default() }
}

fn verdict(sol: &FourierSolution, params: &ModelParams, coupling: &LatticeCoupling) -> Result<StabilityVerdict> {
    Ok(classify(&monodromy(sol, params, coupling, FloquetOptions::default())?, FloquetOptions::default().tolerance))
}

fn period_doubling_route(c: &mut Checks) -> Result<()> {
    // The wave with its minimum at the origin is the one selected as elliptic by the drive.
    let (wave, _) = four_pi_wave(50)?;
    let start = wave.half_shifted();
    let params = ModelParams::default();
    let ctl = StepControl { initial: 1e-4, ..Default::default() };
    let branch = continue_branch(&start, &params, Parameter::Delta, (0.0, 2e-3), ctl)?;
    let coupling = build_mass(20, 0.0)?;
    let st = stability_along_branch(&branch, &coupling, FloquetOptions::default());
    if let Some((i, e)) = st.errors.first() {
        return Err(Error::NoSolution(format!("monodromy failed at point {i}: {e}")));
    }
    let first = st.branch.points.iter().position(|p| p.stable == Some(false));
    let Some(first) = first else {
        c.check(false, format!("no instability up to Δ = {}", branch.points.last().unwrap().param));
        return Ok(());
    };
    c.check(first > 0, format!("branch starts stable, first unstable point {first} at Δ = {:.4e}", st.branch.points[first].param));
    let target = 1.01;
    let (mut lo, mut hi) = (st.branch.points[first - 1].param, st.branch.points[first].param);
    let mut warm = st.branch.points[first - 1].solution.clone();
    let mut at_crossing = st.verdicts[first].unwrap();
    // Bisect for |χ| = 1.01, warm-starting Newton from the last accepted point.
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        let p = ModelParams { delta: mid, ..params };
        let sol = newton_solve(&warm, &p, even_newton())?.solution;
        let v = verdict(&sol, &p, &coupling)?;
        if v.max_modulus < target {
            lo = mid;
            warm = sol;
        } else {
            hi = mid;
            at_crossing = v;
        }
    }
    c.check(
        (at_crossing.max_modulus - target).abs() < 1e-3,
        format!("|χ| = {:.5} at Δ = {hi:.6e}", at_crossing.max_modulus),
    );
    c.check(
        at_crossing.kind == InstabilityKind::PeriodDoubling && at_crossing.dominant_re < 0.0 && at_crossing.dominant_im.abs() < 1e-3,
        format!("dominant χ = {:.5} {:+.2e}i exits through −1", at_crossing.dominant_re, at_crossing.dominant_im),
    );
    Ok(())
}

fn damping_loop(c: &mut Checks) -> Result<()> {
    let (wave, _) = four_pi_wave(50)?;
    let params = ModelParams { lambda: 1e-4, delta: 7e-4, ..Default::default() };
    let start = newton_solve(&wave, &params, even_newton())?.solution;
    let ctl = StepControl { initial: 0.05, ..Default::default() };
    let up = continue_branch(&start, &params, Parameter::Gamma, (-0.01, 0.01), ctl)?;
    let down = continue_branch(&start, &params, Parameter::Gamma, (-0.01, 0.01), StepControl { increasing: false, ..ctl })?;
    c.check(up.termination == Termination::ClosedLoop, format!("closed loop of {} points", up.points.len()));
    c.check(up.folds.len() == 2, format!("{} folds", up.folds.len()));
    let mut worst = 0.0_f64;
    let paired = up.points.len() == down.points.len();
    for (a, b) in up.points.iter().zip(&down.points) {
        worst = worst.max((a.norm - b.norm).abs()).max((a.param + b.param).abs());
    }
    c.check(paired && worst < 1e-8, format!("γ → −γ mirror mismatch {worst:.1e} < 1e-8"));
    let predicted = damping_threshold_homoclinic(params.beta, params.omega, params.delta)?;
    match up.folds.iter().map(|f| f.param).find(|&g| g > 0.0) {
        Some(fold) => {
            let ratio = fold / predicted;
            c.check(
                (0.5..=2.0).contains(&ratio),
                format!("positive fold γ = {fold:.5e}, prediction {predicted:.5e}, ratio {ratio:.4}"),
            );
        }
        None => c.check(false, "no fold at positive damping".into()),
    }
    Ok(())
}

fn linear_response(c: &mut Checks) -> Result<()> {
    let base = ModelParams { lambda: 0.1, ..Default::default() };
    let mut ratios = Vec::new();
    for delta in [0.001, 0.0025, 0.005, 0.01] {
        let params = ModelParams { delta, ..base };
        let guess = linear_response_guess(&params, 2.0 * PI, 50)?;
        let norm = newton_solve(&guess, &params, NewtonOptions::default())?.solution.norm();
        let w2 = params.omega * params.omega;
        let denom = 1.0 - w2 + 2.0 * params.lambda * w2 * params.p.cos();
        let linear = PI.sqrt() * delta / denom.abs();
        let dev = (norm / linear - 1.0).abs();
        c.check(dev < 0.05, format!("Δ={delta}: norm/linear − 1 = {dev:.2e}"));
        ratios.push(norm / delta);
    }
    let spread = ratios.iter().map(|r| (r / ratios[0] - 1.0).abs()).fold(0.0, f64::max);
    c.check(spread < 0.01, format!("norm/Δ varies by {spread:.2e} < 1e-2"));
    Ok(())
}

fn stabilization_by_loss(c: &mut Checks) -> Result<()> {
    let params = ModelParams { lambda: 0.1, delta: 0.5, gamma: 2.0, ..Default::default() };
    let seed = newton_solve(&linear_response_guess(&params, 2.0 * PI, 50)?, &params, NewtonOptions::default())?.solution;
    let ctl = StepControl { initial: 0.05, increasing: false, ..Default::default() };
    let branch = continue_branch(&seed, &params, Parameter::Gamma, (0.0, 2.0), ctl)?;
    let coupling = build_mass(20, 0.1)?;
    let st = stability_along_branch(&branch, &coupling, FloquetOptions::default());
    let pts = &st.branch.points;
    let flip = (1..pts.len()).find(|&i| pts[i - 1].stable == Some(true) && pts[i].stable == Some(false));
    let Some(i) = flip else {
        c.check(false, format!("no stable-to-unstable change along {} points", pts.len()));
        return Ok(());
    };
    let (mut stable_gamma, mut unstable_gamma) = (pts[i - 1].param, pts[i].param);
    let mut warm = pts[i - 1].solution.clone();
    while (stable_gamma - unstable_gamma).abs() > 1e-3 {
        let mid = 0.5 * (stable_gamma + unstable_gamma);
        let p = ModelParams { gamma: mid, ..params };
        let sol = newton_solve(&warm, &p, NewtonOptions::default())?.solution;
        if verdict(&sol, &p, &coupling)?.stable {
            stable_gamma = mid;
            warm = sol;
        } else {
            unstable_gamma = mid;
        }
    }
    let width = (stable_gamma - unstable_gamma).abs();
    c.check(
        unstable_gamma < stable_gamma && width <= 1e-3,
        format!("unstable at γ = {unstable_gamma:.5}, stable at γ = {stable_gamma:.5} (bracket {width:.1e})"),
    );
    Ok(())
}

fn floquet_dynamics(c: &mut Checks) -> Result<()> {
    // Stable reference: strongly damped driven wave.
    let params = ModelParams { lambda: 0.1, delta: 0.5, gamma: 1.5, ..Default::default() };
    let sol = newton_solve(&linear_response_guess(&params, 2.0 * PI, 50)?, &params, NewtonOptions::default())?.solution;
    let coupling = build_mass(20, params.lambda)?;
    let v = verdict(&sol, &params, &coupling)?;
    c.check(v.stable, format!("stable wave max|χ| = {:.3e}", v.max_modulus));
    let period = sol.period / params.omega;
    let dt = default_dt(sol.period, &params);
    let mut state = seed_from_wave(&sol, &params, 20)?.perturbed(1e-8, 3);
    let (mut worst, mut blown) = (0.0_f64, false);
    for _ in 0..50 {
        let f = simulate(&state, &params, &coupling, period, dt, 4096)?;
        blown |= f.blowup.is_some();
        worst = worst.max(f.last.distance(&state));
        state = f.last;
    }
    c.check(!blown && worst < 1e-3, format!("50 periods, return error ≤ {worst:.1e} per period"));

    // Unstable reference: drive-selected saddle wave.
    let (wave, _) = four_pi_wave(50)?;
    let params = ModelParams { lambda: 1e-4, delta: 7e-4, ..Default::default() };
    let sol = newton_solve(&wave, &params, even_newton())?.solution;
    let coupling = build_mass(20, params.lambda)?;
    let m = monodromy(&sol, &params, &coupling, FloquetOptions::default())?;
    let v = classify(&m, FloquetOptions::default().tolerance);
    c.check(!v.stable, format!("unstable wave max|χ| = {:.4}", v.max_modulus));
    let period = sol.period / params.omega;
    let dt = default_dt(sol.period, &params);
    let mut reference = seed_from_wave(&sol, &params, 20)?;
    let mut perturbed = reference.perturbed(1e-8, 11);
    let (mut times, mut gaps) = (Vec::new(), Vec::new());
    let mut blowup = None;
    for _ in 0..200 {
        let a = simulate(&reference, &params, &coupling, period, dt, 4096)?;
        let b = simulate(&perturbed, &params, &coupling, period, dt, 4096)?;
        if b.blowup.is_some() {
            blowup = b.blowup;
            break;
        }
        reference = a.last;
        perturbed = b.last;
        times.push(reference.t);
        gaps.push(reference.phase_distance(&perturbed));
    }
    match blowup {
        Some(b) => c.note(format!("blow-up at t = {:.1} (site {})", b.time, b.site)),
        None => c.check(false, "no blow-up within 200 periods".into()),
    }
    let predicted = m.max_modulus.ln() / period;
    match growth_rate(&times, &gaps, 1e-7, 1e-3) {
        Some(rate) => {
            let rel = (rate / predicted - 1.0).abs();
            c.check(rel < 0.2, format!("growth rate {rate:.4} vs log|χ|/T̄ = {predicted:.4} ({:.0}%)", 100.0 * rel));
        }
        None => c.check(false, "too few samples in the linear growth window".into()),
    }
    Ok(())
}

fn special_functions(c: &mut Checks) -> Result<()> {
    let m = |k: f64| EllipticModulus::new(k);
    let mut legendre = 0.0_f64;
    for i in 1..20 {
        let k = 0.05 * i as f64;
        let kp = m(k)?.complementary();
        let (e, kk) = (complete_e(m(k)?), complete_k(m(k)?));
        let (ep, kkp) = (complete_e(m(kp)?), complete_k(m(kp)?));
        legendre = legendre.max((e * kkp + ep * kk - kk * kkp - FRAC_PI_2).abs());
    }
    c.check(legendre < 1e-10, format!("Legendre relation {legendre:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut identity = 0.0_f64;
    for _ in 0..1000 {
        let u: f64 = rng.random_range(-50.0..50.0);
        let k: f64 = rng.random_range(0.0..0.999_999);
        let t = jacobi(u, m(k)?)?;
        identity = identity
            .max((t.sn * t.sn + t.cn * t.cn - 1.0).abs())
            .max((t.dn * t.dn + k * k * t.sn * t.sn - 1.0).abs());
    }
    c.check(identity < 1e-10, format!("Jacobi identities {identity:.1e}"));

    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst = 0.0_f64;
    for k in (0..10).map(|i| 0.1 * i as f64).chain([0.99]) {
        let first = oracles::simpson(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14);
        let second = oracles::simpson(|t| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14);
        worst = worst.max(rel(complete_k(m(k)?), first)).max(rel(complete_e(m(k)?), second));
    }
    for (phi, k) in [(0.3, 0.2), (1.2, 0.9), (-2.5, 0.5), (7.0, 0.6), (PI / 3.0, 0.6)] {
        let first = oracles::simpson(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-14);
        let second = oracles::simpson(|t| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-14);
        worst = worst.max(rel(incomplete_f(phi, m(k)?)?, first)).max(rel(incomplete_e(phi, m(k)?)?, second));
    }
    for (u, k) in [(0.7, 0.3), (1.9, 0.8), (-1.3, 0.5)] {
        let y = oracles::ode(|_, y| vec![y[1] * y[2], -y[0] * y[2], -k * k * y[0] * y[1]], &[0.0, 1.0, 1.0], 0.0, u, 1e-14);
        let t = jacobi(u, m(k)?)?;
        worst = worst.max(rel(t.sn, y[0])).max(rel(t.cn, y[1])).max(rel(t.dn, y[2]));
    }
    c.check(worst < 1e-10, format!("elliptic values vs quadrature/ODE oracles {worst:.1e}"));
    Ok(())
}
