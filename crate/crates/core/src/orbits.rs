//! Unperturbed travelling-wave orbits of `U'' + U − βU² = 0`.
//!
//! The first integral is `½U'² + V(U) = c0` with `V(U) = U²/2 − βU³/3`. Bounded orbits
//! circle the centre `U = 0` for `0 < c0 < 1/(6β²)`; the upper limit is the energy of the
//! saddle `U = 1/β`, which is also the level of the homoclinic loop.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::elliptic::{complete_k, jacobi, EllipticModulus};
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Orbits whose energy is this close (relatively) to the separatrix are flagged.
pub const NEAR_HOMOCLINIC_GAP: f64 = 1e-6;

/// Smallest number of samples accepted for a sampled orbit.
pub const MIN_SAMPLES: usize = 64;

/// Largest RK4 step used when sampling an orbit profile.
const MAX_PROFILE_STEP: f64 = 1e-3;

#[inline]
pub fn potential(u: f64, beta: f64) -> f64 {
    u * u * (0.5 - beta * u / 3.0)
}

/// First integral `½U'² + U²/2 − βU³/3`.
#[inline]
pub fn potential_energy(u: f64, du: f64, beta: f64) -> f64 {
    0.5 * du * du + potential(u, beta)
}

/// Energy of the saddle `U = 1/β`, `V(1/β) = 1/(6β²)`.
#[inline]
pub fn separatrix_energy(beta: f64) -> f64 {
    1.0 / (6.0 * beta * beta)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")))
    }
}

/// Energy level of a bounded orbit around the centre.
///
/// Besides `c0` the level keeps `gap = 1/(6β²) − c0` exactly, so levels whose energy is
/// indistinguishable from the separatrix in `c0` alone (long periods) stay representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialLevel {
    pub c0: f64,
    pub beta: f64,
    pub gap: f64,
}

impl PotentialLevel {
    pub fn new(c0: f64, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let upper = separatrix_energy(beta);
        if !(c0 > 0.0 && c0 < upper) {
            return Err(Error::DegenerateLevel { c0, upper });
        }
        Ok(Self { c0, beta, gap: upper - c0 })
    }

    /// Level at energy `1/(6β²) − gap` below the separatrix.
    pub fn below_separatrix(gap: f64, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let upper = separatrix_energy(beta);
        if !(gap > 0.0 && gap < upper) {
            return Err(Error::DegenerateLevel { c0: upper - gap, upper });
        }
        Ok(Self { c0: upper - gap, beta, gap })
    }

    pub fn is_near_homoclinic(&self) -> bool {
        self.gap / separatrix_energy(self.beta) < NEAR_HOMOCLINIC_GAP
    }

    fn check(&self) -> Result<()> {
        let upper = separatrix_energy(self.beta);
        if self.c0 > 0.0 && self.gap > 0.0 && self.gap < upper {
            Ok(())
        } else {
            Err(Error::DegenerateLevel { c0: self.c0, upper })
        }
    }
}

/// The three real roots of `V(U) = c0`: the oscillation runs over `[u_min, u_max]`,
/// `u_far` lies beyond the saddle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    pub u_min: f64,
    pub u_max: f64,
    pub u_far: f64,
}

/// Newton on `u²/2 − b·u³/3 = c`.
fn polish_root(mut u: f64, c: f64, b: f64) -> f64 {
    for _ in 0..6 {
        let f = u * u * (0.5 - b * u / 3.0) - c;
        let df = u - b * u * u;
        if df == 0.0 {
            break;
        }
        let next = u - f / df;
        if !next.is_finite() {
            break;
        }
        u = next;
    }
    u
}

/// Roots as `(u_min, w_max, w_far)` with `w = U − 1/β` measured from the saddle, so the two
/// roots that merge at the separatrix keep full relative precision. In that coordinate the
/// level equation reads `w²/2 + βw³/3 = gap`.
fn roots(level: PotentialLevel) -> Result<(f64, f64, f64)> {
    level.check()?;
    let PotentialLevel { c0, beta, gap } = level;
    let upper = separatrix_energy(beta);
    // Trigonometric Cardano: U = 1/(2β) + cos(θ/3 − 2πj/3)/β with cos θ = 1 − 12β²c0.
    let theta = (1.0 - 12.0 * beta * beta * c0).clamp(-1.0, 1.0).acos();
    let root = |j: f64| 0.5 / beta + (theta / 3.0 - 2.0 * PI * j / 3.0).cos() / beta;
    let mut r = [root(0.0), root(1.0), root(2.0)];
    r.sort_by(|a, b| a.total_cmp(b));
    let mut u_min = polish_root(r[0], c0, beta);
    let saddle = 1.0 / beta;
    let (guess_max, guess_far) = if gap < 1e-8 * upper {
        let s = (2.0 * gap).sqrt();
        (-s, s)
    } else {
        (r[1] - saddle, r[2] - saddle)
    };
    let w_max = polish_root(guess_max, gap, -beta);
    let w_far = polish_root(guess_far, gap, -beta);
    if c0 < 1e-6 * upper {
        // Tiny orbits: the product of roots, −3c0/β = u_min·u_max·u_far, fixes both small ones.
        let far = saddle + w_far;
        let prod = -3.0 * c0 / beta / far;
        let sum = 1.5 / beta - far;
        let disc = (sum * sum - 4.0 * prod).max(0.0).sqrt();
        let u_max = 0.5 * (sum + disc);
        u_min = prod / u_max;
        return Ok((u_min, u_max - saddle, w_far));
    }
    Ok((u_min, w_max, w_far))
}

/// Roots of `U²/2 − βU³/3 = c0` (Cardano, Newton-polished; the pair near the saddle is
/// resolved relative to `1/β`).
pub fn turning_points(level: PotentialLevel) -> Result<TurningPoints> {
    let (u_min, w_max, w_far) = roots(level)?;
    let saddle = 1.0 / level.beta;
    Ok(TurningPoints { u_min, u_max: saddle + w_max, u_far: saddle + w_far })
}

/// Period `T̄ = 2∫ dU/√(2(c0 − V))` over `[u_min, u_max]`. With `U = m + h·cos x` both
/// square-root endpoint singularities cancel and the integrand becomes
/// `1/√((2β/3)(u_far − U))`, `u_far − U = (u_far − u_max) + 2h·sin²(x/2)`, on `x ∈ [0, π]`.
pub fn period_of_level(level: PotentialLevel) -> Result<f64> {
    let (u_min, w_max, w_far) = roots(level)?;
    let half = 0.5 * (1.0 / level.beta + w_max - u_min);
    let scale = 2.0 * level.beta / 3.0;
    let top_gap = w_far - w_max;
    let integrand = move |x: f64| {
        let s = (0.5 * x).sin();
        1.0 / (scale * (top_gap + 2.0 * half * s * s)).sqrt()
    };
    // Near the separatrix the integrand is a spike of width ~√(top_gap/h) at x = 0;
    // grade the panels geometrically down to that width.
    let width = (top_gap / half).sqrt();
    let mut breaks = vec![0.0];
    let mut x = 0.1 * width;
    while x < 0.5 {
        breaks.push(x);
        x *= 10f64.sqrt();
    }
    breaks.extend([0.5, FRAC_PI_2, PI]);
    let r = quad::integrate_panels(integrand, &breaks, Tolerance { abs: 1e-15, rel: 1e-13 })?;
    Ok(2.0 * r.value)
}

/// A sampled bounded orbit, phase-fixed so that `U(0) = u_max` and `U'(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub level: PotentialLevel,
    pub period: f64,
    /// `U(z_i)` at `z_i = i·period/n`.
    pub u: Vec<f64>,
    /// `U'(z_i)` at the same points.
    pub du: Vec<f64>,
    pub turning_points: TurningPoints,
    pub near_homoclinic: bool,
}

impl PeriodicOrbit {
    pub fn n_samples(&self) -> usize {
        self.u.len()
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.u.len() as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Largest deviation of the first integral from `c0` over the samples.
    pub fn energy_residual(&self) -> f64 {
        let beta = self.level.beta;
        self.u
            .iter()
            .zip(&self.du)
            .map(|(&u, &du)| (potential_energy(u, du, beta) - self.level.c0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|U(z) − U(−z)|` over the samples.
    pub fn evenness_error(&self) -> f64 {
        let n = self.u.len();
        (0..n).map(|i| (self.u[i] - self.u[(n - i) % n]).abs()).fold(0.0, f64::max)
    }

    /// `∫₀^T̄ U'² dz` by the periodic trapezoid rule.
    pub fn kinetic_integral(&self) -> f64 {
        self.du.iter().map(|d| d * d).sum::<f64>() * self.spacing()
    }
}

/// RK4 for the saddle-centred form `w'' = w + βw²` over a span `h·steps`.
fn rk4_saddle(beta: f64, mut w: f64, mut dw: f64, h: f64, steps: usize) -> (f64, f64) {
    let rhs = |w: f64, dw: f64| (dw, w + beta * w * w);
    for _ in 0..steps {
        let (k1u, k1v) = rhs(w, dw);
        let (k2u, k2v) = rhs(w + 0.5 * h * k1u, dw + 0.5 * h * k1v);
        let (k3u, k3v) = rhs(w + 0.5 * h * k2u, dw + 0.5 * h * k2v);
        let (k4u, k4v) = rhs(w + h * k3u, dw + h * k3v);
        w += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        dw += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (w, dw)
}

/// Builds the orbit at the given level: period by quadrature, profile by RK4 from
/// `(u_max, 0)` over half a period, completed by the reflection `U(T̄ − z) = U(z)`.
///
/// The half-period landing (`U' = 0` at `U = u_min`) is checked to `1e-8`.
pub fn orbit_from_energy(level: PotentialLevel, n_samples: usize) -> Result<PeriodicOrbit> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::Resolution(format!(
            "orbit sampling needs at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let (u_min, w_max, w_far) = roots(level)?;
    let saddle = 1.0 / level.beta;
    let period = period_of_level(level)?;
    let spacing = period / n_samples as f64;
    let substeps = (spacing / MAX_PROFILE_STEP).ceil().max(1.0) as usize;
    let h = spacing / substeps as f64;
    let half_n = n_samples / 2;
    let mut u = vec![0.0; n_samples];
    let mut du = vec![0.0; n_samples];
    let (mut w, mut dw) = (w_max, 0.0);
    for i in 0..=half_n {
        u[i] = saddle + w;
        du[i] = dw;
        if i < half_n {
            (w, dw) = rk4_saddle(level.beta, w, dw, h, substeps);
        }
    }
    for i in half_n + 1..n_samples {
        u[i] = u[n_samples - i];
        du[i] = -du[n_samples - i];
    }
    let remaining = 0.5 * period - half_n as f64 * spacing;
    let (w_mid, dw_mid) = if remaining > 0.0 {
        let steps = (remaining / MAX_PROFILE_STEP).ceil().max(1.0) as usize;
        rk4_saddle(level.beta, w, dw, remaining / steps as f64, steps)
    } else {
        (w, dw)
    };
    let landing = dw_mid.abs().max((saddle + w_mid - u_min).abs());
    if landing > 1e-8 {
        return Err(Error::Resolution(format!(
            "half-period integration misses the lower turning point by {landing:e}"
        )));
    }
    Ok(PeriodicOrbit {
        level,
        period,
        u,
        du,
        turning_points: TurningPoints { u_min, u_max: saddle + w_max, u_far: saddle + w_far },
        near_homoclinic: level.is_near_homoclinic(),
    })
}

/// Inverts the (monotone) period map by bisection on `ln(gap)`, to `1e-10` in the period.
pub fn orbit_for_period(t_bar: f64, beta: f64, n_samples: usize) -> Result<PeriodicOrbit> {
    check_beta(beta)?;
    if !t_bar.is_finite() || t_bar <= 2.0 * PI {
        return Err(Error::NoSolution(format!(
            "bounded orbits have periods above 2π; requested {t_bar}"
        )));
    }
    let upper = separatrix_energy(beta);
    let level_at = |log_gap: f64| PotentialLevel::below_separatrix(upper * log_gap.exp(), beta);
    // Period decreases as the gap grows; ln(gap/upper) ranges over (−690, 0).
    let (mut lo, mut hi) = (-690.0_f64, -1e-14_f64);
    if period_of_level(level_at(lo)?)? < t_bar {
        return Err(Error::NoSolution(format!(
            "period {t_bar} lies beyond the longest representable orbit"
        )));
    }
    let mut best: Option<(PotentialLevel, f64)> = None;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let level = level_at(mid)?;
        let miss = period_of_level(level)? - t_bar;
        if best.is_none_or(|(_, m)| miss.abs() < m.abs()) {
            best = Some((level, miss));
        }
        if miss.abs() < 1e-10 {
            break;
        }
        if miss > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    match best {
        Some((level, miss)) if miss.abs() < 1e-10 => orbit_from_energy(level, n_samples),
        Some((_, miss)) => Err(Error::NoSolution(format!(
            "period bisection stalled {miss:e} away from {t_bar}"
        ))),
        None => Err(Error::NoSolution(format!("period bisection failed for {t_bar}"))),
    }
}

/// Parameters of the closed form `U(z) = A(1 − cn(z/g))/(1 + cn(z/g)) + α` with modulus `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnoidalParameters {
    pub amplitude: f64,
    pub alpha: f64,
    pub g: f64,
    pub k: EllipticModulus,
}

impl CnoidalParameters {
    pub fn new(amplitude: f64, alpha: f64, g: f64, k: EllipticModulus) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter(format!("g must be positive, got {g}")));
        }
        if !amplitude.is_finite() || !alpha.is_finite() {
            return Err(Error::InvalidParameter("amplitude and offset must be finite".into()));
        }
        Ok(Self { amplitude, alpha, g, k })
    }

    /// `T̄ = 4K(k)·g`.
    pub fn period(&self) -> f64 {
        4.0 * complete_k(self.k) * self.g
    }

    /// Exact parameters for a level where `c0 − V(U)` has one real root `α` and a complex
    /// pair `b₁ ± i·a₁` (that is `c0 < 0` or `c0 > 1/(6β²)`): `A² = (b₁ − α)² + a₁²`,
    /// `k² = (A + b₁ − α)/(2A)`, `g = 1/√(2βA/3)`. The profile then starts at its minimum
    /// `α` and escapes to infinity at `z/g = 2K`.
    pub fn from_energy(c0: f64, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let upper = separatrix_energy(beta);
        if c0.is_nan() || (0.0..=upper).contains(&c0) {
            return Err(Error::Domain(format!(
                "closed form needs c0 < 0 or c0 > {upper} (one real root), got {c0}"
            )));
        }
        let cubic = |t: f64| beta / 3.0 * t * t * t - 0.5 * t * t + c0;
        let (mut lo, mut hi) = if c0 > upper {
            let mut lo = -1.0 / beta;
            while cubic(lo) > 0.0 {
                lo *= 2.0;
            }
            (lo, -0.5 / beta)
        } else {
            let mut hi = 3.0 / beta;
            while cubic(hi) < 0.0 {
                hi *= 2.0;
            }
            (1.5 / beta, hi)
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (cubic(mid) > 0.0) == (cubic(hi) > 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let alpha = 0.5 * (lo + hi);
        // c0 − V(t) = (β/3)(t − α)(t² + p t + q)
        let p = alpha - 1.5 / beta;
        let q = alpha * p;
        let b1 = -0.5 * p;
        let a1_sq = q - b1 * b1;
        if a1_sq <= 0.0 {
            return Err(Error::Domain("level does not have a complex root pair".into()));
        }
        let big_a = ((b1 - alpha).powi(2) + a1_sq).sqrt();
        let k = EllipticModulus::new(((big_a + b1 - alpha) / (2.0 * big_a)).sqrt())?;
        let g = 1.0 / (2.0 * beta * big_a / 3.0).sqrt();
        Self::new(big_a, alpha, g, k)
    }

    /// Matches the closed form to a bounded orbit: offset at `u_min`, `A = u_max − u_min`,
    /// `g` from the curvature at the minimum, and `k` from `4K(k)·g = T̄`.
    pub fn matched_to(orbit: &PeriodicOrbit) -> Result<Self> {
        let beta = orbit.level.beta;
        let tp = orbit.turning_points;
        let amplitude = tp.u_max - tp.u_min;
        let curvature = -tp.u_min + beta * tp.u_min * tp.u_min;
        let g = (amplitude / (2.0 * curvature)).sqrt();
        let target_k = orbit.period / (4.0 * g);
        if target_k < FRAC_PI_2 {
            return Err(Error::NoSolution(format!(
                "K(k) = {target_k} is below π/2; no modulus matches this orbit"
            )));
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if complete_k(EllipticModulus::new(mid)?) < target_k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::new(amplitude, tp.u_min, g, EllipticModulus::new(lo)?)
    }
}

/// Evaluates `A(1 − cn(z/g))/(1 + cn(z/g)) + α`; fails near the pole at `z/g = 2K(k)`.
pub fn cnoidal_profile(params: &CnoidalParameters, z: f64) -> Result<f64> {
    let cn = jacobi(z / params.g, params.k)?.cn;
    let denom = 1.0 + cn;
    if denom < 1e-10 {
        return Err(Error::Singular(format!(
            "1 + cn(z/g) = {denom:e} at z = {z}: the closed form has a pole at z/g = 2K(k)"
        )));
    }
    Ok(params.amplitude * (1.0 - cn) / denom + params.alpha)
}

/// `Γ(z) = 1/β − (3/(2β))·sech²(z/2)`, the loop through the saddle `U = 1/β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicOrbit {
    pub beta: f64,
}

impl HomoclinicOrbit {
    pub fn new(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta })
    }

    pub fn value(&self, z: f64) -> f64 {
        homoclinic_profile(self.beta, z).0
    }

    pub fn derivative(&self, z: f64) -> f64 {
        homoclinic_profile(self.beta, z).1
    }

    /// `∫Γ'² dz = 6/(5β²)`.
    pub fn kinetic_integral(&self) -> f64 {
        6.0 / (5.0 * self.beta * self.beta)
    }
}

/// `(Γ(z), Γ'(z))` with `Γ' = (3/(2β))·sech²(z/2)·tanh(z/2)`.
pub fn homoclinic_profile(beta: f64, z: f64) -> (f64, f64) {
    let sech = 1.0 / (0.5 * z).cosh();
    let s2 = sech * sech;
    let amp = 1.5 / beta;
    (1.0 / beta - amp * s2, amp * s2 * (0.5 * z).tanh())
}
