//! Direct integration of the driven lattice
//! `M·q̈ = −γq̇ − q + βq² + Δ·cos(ωt + pn)` on a ring of `N` sites by fixed-step RK4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{check_compatible, LatticeCoupling, DEFAULT_STEPS};
use crate::wavesolver::{FourierSolution, ModelParams};

/// `max|q_n|` above which a run is declared blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl LatticeState {
    pub fn at_rest(sites: usize) -> Self {
        Self { t: 0.0, q: vec![0.0; sites], qdot: vec![0.0; sites] }
    }

    pub fn sites(&self) -> usize {
        self.q.len()
    }

    /// `H = ½q̇ᵀMq̇ + Σ(q_n²/2 − βq_n³/3)`, conserved when `γ = Δ = 0`.
    pub fn energy(&self, coupling: &LatticeCoupling, beta: f64) -> f64 {
        let n = self.sites();
        let kinetic: f64 = (0..n)
            .map(|i| self.qdot[i] * (0..n).map(|j| coupling.mass[(i, j)] * self.qdot[j]).sum::<f64>())
            .sum();
        let potential: f64 = self.q.iter().map(|q| q * q / 2.0 - beta * q * q * q / 3.0).sum();
        0.5 * kinetic + potential
    }

    /// Largest `|q_n − other.q_n|`.
    pub fn distance(&self, other: &LatticeState) -> f64 {
        self.q.iter().zip(&other.q).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Euclidean distance in `(q, q̇)`.
    pub fn phase_distance(&self, other: &LatticeState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.qdot.iter().zip(&other.qdot))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `q_n → q_n·(1 + size·ξ_n)` with `ξ_n` uniform in `[−1, 1]` from a seeded ChaCha stream.
    pub fn perturbed(&self, size: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = self.q.iter().map(|q| q * (1.0 + size * rng.random_range(-1.0..=1.0))).collect();
        Self { t: self.t, q, qdot: self.qdot.clone() }
    }
}

/// Travelling-wave initial data `q_n = U(np)`, `q̇_n = ω·U′(np)`.
pub fn seed_from_wave(sol: &FourierSolution, params: &ModelParams, sites: usize) -> Result<LatticeState> {
    check_compatible(sol.period, params, sites)?;
    let z = |n: usize| n as f64 * params.p;
    Ok(LatticeState {
        t: 0.0,
        q: (0..sites).map(|n| sol.evaluate(z(n), 0)).collect(),
        qdot: (0..sites).map(|n| params.omega * sol.evaluate(z(n), 1)).collect(),
    })
}

/// The state of the exact travelling wave at time `t`.
pub fn wave_state(sol: &FourierSolution, params: &ModelParams, sites: usize, t: f64) -> LatticeState {
    let z = |n: usize| params.omega * t + n as f64 * params.p;
    LatticeState {
        t,
        q: (0..sites).map(|n| sol.evaluate(z(n), 0)).collect(),
        qdot: (0..sites).map(|n| params.omega * sol.evaluate(z(n), 1)).collect(),
    }
}

/// `T̄/2¹²` for a wave of domain period `L`: `T̄ = L/ω`.
pub fn default_dt(period: f64, params: &ModelParams) -> f64 {
    period / params.omega / DEFAULT_STEPS as f64
}

fn acceleration(t: f64, q: &[f64], qdot: &[f64], params: &ModelParams, minv: &[f64], out: &mut [f64]) {
    let n = q.len();
    let force: Vec<f64> = (0..n)
        .map(|j| {
            -params.gamma * qdot[j] - q[j]
                + params.beta * q[j] * q[j]
                + params.delta * (params.omega * t + j as f64 * params.p).cos()
        })
        .collect();
    for (i, o) in out.iter_mut().enumerate() {
        *o = minv[i * n..(i + 1) * n].iter().zip(&force).map(|(a, b)| a * b).sum();
    }
}

fn rk4(state: &LatticeState, params: &ModelParams, minv: &[f64], dt: f64) -> LatticeState {
    let n = state.sites();
    let (q, v) = (&state.q, &state.qdot);
    let mut a1 = vec![0.0; n];
    let mut a2 = vec![0.0; n];
    let mut a3 = vec![0.0; n];
    let mut a4 = vec![0.0; n];
    let t = state.t;
    acceleration(t, q, v, params, minv, &mut a1);
    let q2: Vec<f64> = (0..n).map(|i| q[i] + 0.5 * dt * v[i]).collect();
    let v2: Vec<f64> = (0..n).map(|i| v[i] + 0.5 * dt * a1[i]).collect();
    acceleration(t + 0.5 * dt, &q2, &v2, params, minv, &mut a2);
    let q3: Vec<f64> = (0..n).map(|i| q[i] + 0.5 * dt * v2[i]).collect();
    let v3: Vec<f64> = (0..n).map(|i| v[i] + 0.5 * dt * a2[i]).collect();
    acceleration(t + 0.5 * dt, &q3, &v3, params, minv, &mut a3);
    let q4: Vec<f64> = (0..n).map(|i| q[i] + dt * v3[i]).collect();
    let v4: Vec<f64> = (0..n).map(|i| v[i] + dt * a3[i]).collect();
    acceleration(t + dt, &q4, &v4, params, minv, &mut a4);
    LatticeState {
        t: t + dt,
        q: (0..n).map(|i| q[i] + dt / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])).collect(),
        qdot: (0..n).map(|i| v[i] + dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i])).collect(),
    }
}

/// One RK4 step. Overflow shows up as non-finite or huge entries, never as a panic.
pub fn step(state: &LatticeState, params: &ModelParams, coupling: &LatticeCoupling, dt: f64) -> Result<LatticeState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    if state.sites() != coupling.sites || state.qdot.len() != coupling.sites {
        return Err(Error::InvalidParameter(format!(
            "state has {} sites but the coupling has {}",
            state.sites(),
            coupling.sites
        )));
    }
    Ok(rk4(state, params, &coupling.inverse_rows(), dt))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub time: f64,
    pub site: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    pub times: Vec<f64>,
    /// `q` at each recorded time.
    pub frames: Vec<Vec<f64>>,
    pub blowup: Option<BlowUp>,
    pub dt: f64,
    /// State at the last completed step.
    pub last: LatticeState,
}

/// Advances `initial` by `duration` with steps of at most `dt` (shrunk so that they divide the
/// duration), recording `q` every `sample_every` steps and at the end. Stops early when some
/// `|q_n|` exceeds [`BLOWUP_THRESHOLD`] or turns non-finite.
pub fn simulate(
    initial: &LatticeState,
    params: &ModelParams,
    coupling: &LatticeCoupling,
    duration: f64,
    dt: f64,
    sample_every: usize,
) -> Result<SpaceTimeField> {
    params.validate()?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidParameter(format!("duration must be non-negative, got {duration}")));
    }
    if !(dt > 0.0 && dt.is_finite()) || sample_every == 0 {
        return Err(Error::InvalidParameter("need dt > 0 and sample_every ≥ 1".into()));
    }
    if initial.sites() != coupling.sites {
        return Err(Error::InvalidParameter(format!(
            "state has {} sites but the coupling has {}",
            initial.sites(),
            coupling.sites
        )));
    }
    let steps = (duration / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 { duration / steps as f64 } else { dt };
    let minv = coupling.inverse_rows();
    let t0 = initial.t;
    let mut field = SpaceTimeField {
        times: vec![initial.t],
        frames: vec![initial.q.clone()],
        blowup: None,
        dt: h,
        last: initial.clone(),
    };
    let mut state = initial.clone();
    for k in 1..=steps {
        let mut next = rk4(&state, params, &minv, h);
        next.t = t0 + k as f64 * h;
        let escaped = next.q.iter().position(|q| !(q.abs() <= BLOWUP_THRESHOLD));
        if let Some(site) = escaped {
            field.blowup = Some(BlowUp { time: next.t, site });
            field.times.push(next.t);
            field.frames.push(next.q.clone());
            break;
        }
        state = next;
        if k % sample_every == 0 || k == steps {
            field.times.push(state.t);
            field.frames.push(state.q.clone());
        }
    }
    field.last = state;
    Ok(field)
}

/// Exponential growth rate of `‖δ‖` from a least-squares fit of `ln‖δ‖` against time, using
/// only samples with `floor < ‖δ‖ < ceiling`.
pub fn growth_rate(times: &[f64], separations: &[f64], floor: f64, ceiling: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(separations)
        .filter(|(_, &d)| d > floor && d < ceiling)
        .map(|(&t, &d)| (t, d.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / n, b + y / n));
    let (sty, stt) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    (stt > 0.0).then(|| sty / stt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::build_mass;

    #[test]
    fn zero_wave_gives_zero_state() {
        let zero = FourierSolution::zeros(2.0 * std::f64::consts::PI, 8).unwrap();
        let s = seed_from_wave(&zero, &ModelParams::default(), 20).unwrap();
        assert!(s.q.iter().chain(&s.qdot).all(|&v| v == 0.0));
    }

    #[test]
    fn zero_duration_keeps_initial_frame() {
        let c = build_mass(4, 0.0).unwrap();
        let s = LatticeState { t: 0.0, q: vec![0.1, 0.0, -0.1, 0.2], qdot: vec![0.0; 4] };
        let f = simulate(&s, &ModelParams::default(), &c, 0.0, 0.01, 1).unwrap();
        assert_eq!(f.frames.len(), 1);
        assert_eq!(f.last, s);
    }

    #[test]
    fn blowup_is_flagged() {
        let c = build_mass(3, 0.0).unwrap();
        let s = LatticeState { t: 0.0, q: vec![3.0, 0.0, 0.0], qdot: vec![0.0; 3] };
        let f = simulate(&s, &ModelParams::default(), &c, 50.0, 1e-3, 100).unwrap();
        let b = f.blowup.unwrap();
        assert_eq!(b.site, 0);
        assert!(b.time < 50.0);
    }

    #[test]
    fn perturbation_is_reproducible() {
        let s = LatticeState { t: 0.0, q: vec![1.0; 5], qdot: vec![0.0; 5] };
        let a = s.perturbed(1e-8, 7);
        assert_eq!(a, s.perturbed(1e-8, 7));
        assert_ne!(a, s.perturbed(1e-8, 8));
        assert!(a.q.iter().all(|q| (q - 1.0).abs() <= 1e-8));
    }

    #[test]
    fn growth_fit() {
        let t: Vec<f64> = (0..20).map(f64::from).collect();
        let d: Vec<f64> = t.iter().map(|t| 1e-9 * (0.3 * t).exp()).collect();
        assert!((growth_rate(&t, &d, 0.0, 1.0).unwrap() - 0.3).abs() < 1e-12);
        assert!(growth_rate(&t, &d, 1.0, 2.0).is_none());
    }
}
