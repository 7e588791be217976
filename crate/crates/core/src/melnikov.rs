//! Melnikov functions for the travelling-frame equation: the subharmonic function along
//! a bounded orbit and the homoclinic function along the saddle loop, their simple zeros,
//! and the damping thresholds below which the unperturbed wave persists.
//!
//! Each quantity has two routes. The quadrature routes are the reference; the closed forms
//! are evaluated as given and compared against them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::elliptic::{complete_e, complete_k};
use crate::error::{Error, Result};
use crate::orbits::{homoclinic_profile, CnoidalParameters, PeriodicOrbit};
use crate::quad::{self, Tolerance};

/// Samples per drive oscillation required by the subharmonic quadrature.
pub const SAMPLES_PER_OSCILLATION: usize = 32;

/// Tail level of `sech²(z/2)` at the homoclinic truncation point (before the safety factor).
const TAIL: f64 = 1e-16;
const CUTOFF_SAFETY: f64 = 1.25;

/// Drive profile `h(z) = Δ·cos z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub amplitude: f64,
}

impl DriveSpec {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!("drive amplitude must be finite, got {amplitude}")));
        }
        Ok(Self { amplitude })
    }

    pub fn value(&self, z: f64) -> f64 {
        self.amplitude * z.cos()
    }

    pub fn derivative(&self, z: f64) -> f64 {
        -self.amplitude * z.sin()
    }
}

/// Resonance `ω = 2πu/T̄` between an orbit of period `T̄` and the drive (with `v = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicIndex {
    pub u: u32,
    pub t_bar: f64,
    pub omega: f64,
}

impl SubharmonicIndex {
    pub fn new(u: u32, t_bar: f64) -> Result<Self> {
        if u == 0 {
            return Err(Error::InvalidParameter("resonance index u must be at least 1".into()));
        }
        if !(t_bar.is_finite() && t_bar > 0.0) {
            return Err(Error::InvalidParameter(format!("orbit period must be positive, got {t_bar}")));
        }
        Ok(Self { u, t_bar, omega: 2.0 * PI * u as f64 / t_bar })
    }

    pub fn for_orbit(u: u32, orbit: &PeriodicOrbit) -> Result<Self> {
        Self::new(u, orbit.period)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("damping must be non-negative, got {gamma}")))
    }
}

/// `M(a) = −γ·damping + sin_coefficient·sin a + cos_coefficient·cos a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicDecomposition {
    /// `∫₀^T̄ U₀'² dz`.
    pub damping: f64,
    /// `ωΔ∫₀^T̄ cos(ωz)·U₀ dz`.
    pub sin_coefficient: f64,
    /// `ωΔ∫₀^T̄ sin(ωz)·U₀ dz` (zero for an even orbit).
    pub cos_coefficient: f64,
}

impl SubharmonicDecomposition {
    /// Trapezoid sums over the orbit samples; the integrands are `T̄`-periodic, so the rule
    /// converges spectrally.
    pub fn new(orbit: &PeriodicOrbit, idx: SubharmonicIndex, drive: DriveSpec) -> Result<Self> {
        let needed = SAMPLES_PER_OSCILLATION * idx.u as usize;
        if orbit.n_samples() < needed {
            return Err(Error::Resolution(format!(
                "u = {} needs at least {needed} orbit samples, got {}",
                idx.u,
                orbit.n_samples()
            )));
        }
        if (orbit.period - idx.t_bar).abs() > 1e-8 * idx.t_bar {
            return Err(Error::InvalidParameter(format!(
                "resonance built for T̄ = {} but the orbit has period {}",
                idx.t_bar, orbit.period
            )));
        }
        let dz = orbit.spacing();
        let (mut c, mut s) = (0.0, 0.0);
        for (i, &u) in orbit.u.iter().enumerate() {
            let (sn, cs) = (idx.omega * orbit.z(i)).sin_cos();
            c += cs * u;
            s += sn * u;
        }
        let scale = idx.omega * drive.amplitude * dz;
        Ok(Self { damping: orbit.kinetic_integral(), sin_coefficient: scale * c, cos_coefficient: scale * s })
    }

    pub fn evaluate(&self, gamma: f64, a: f64) -> f64 {
        -gamma * self.damping + self.sin_coefficient * a.sin() + self.cos_coefficient * a.cos()
    }

    /// Amplitude of the phase-dependent part.
    pub fn drive_amplitude(&self) -> f64 {
        self.sin_coefficient.hypot(self.cos_coefficient)
    }
}

/// Subharmonic Melnikov function by quadrature along the sampled orbit:
/// `M(a) = −γ∫U₀'² − ω∫h'(ωz + a)·U₀ dz` over one orbit period.
pub fn melnikov_subharmonic_numeric(
    orbit: &PeriodicOrbit,
    idx: SubharmonicIndex,
    gamma: f64,
    drive: DriveSpec,
    a: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(SubharmonicDecomposition::new(orbit, idx, drive)?.evaluate(gamma, a))
}

/// How a Melnikov value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Quadrature,
    /// Closed-form expression in elliptic integrals, not independently derived here.
    EllipticClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormValue {
    pub value: f64,
    /// Coefficient multiplying `−γ`.
    pub damping: f64,
    /// Coefficient multiplying `Δ·sin a`.
    pub drive: f64,
    pub method: Method,
}

/// `Ξ(k, u) = P/(24π⁵u⁵K⁵)` with the numerator `P` transcribed term by term.
pub fn xi(params: &CnoidalParameters, u: u32) -> f64 {
    let k = params.k.k();
    let kk = complete_k(params.k);
    let u = u as f64;
    let (k2, pi2u2) = (kk * kk, PI * PI * u * u);
    let arg = 2.0 * PI * u * k2;
    let first = 64.0 * PI * u * arg.cos() * k2 * (24.0 - 48.0 * k + pi2u2 * k2 * (-3.0 + 16.0 * (-1.0 + 2.0 * k) * k2));
    let second = 32.0
        * (-24.0
            + 48.0 * k
            + pi2u2 * k2 * (3.0 + k2 * (48.0 - 96.0 * k + 2.0 * pi2u2 * k2 * (-3.0 + 8.0 * (-1.0 + 2.0 * k) * k2))))
        * arg.sin();
    let p = -(first + second);
    p / (24.0 * PI.powi(5) * u.powi(5) * kk.powi(5))
}

/// Closed-form subharmonic Melnikov function
/// `−γ·(4A²/g)·[((2k − 1)·E(am(4K)) − 4(k − 1)K)/(3(1 + cn)⁴k)] + (Aπu/(2K))·Ξ·Δ·sin a`.
///
/// `E(am(4K, k), k)` is `4E(k)` because `am(4K) = 2π`. The bare `(1 + cn)⁴` is taken at
/// `z = 0`, where `cn = 1`.
pub fn melnikov_subharmonic_closed(
    params: &CnoidalParameters,
    idx: SubharmonicIndex,
    gamma: f64,
    drive: DriveSpec,
    a: f64,
) -> Result<ClosedFormValue> {
    check_gamma(gamma)?;
    let k = params.k.k();
    if k < 1e-12 || params.k.is_near_degenerate() {
        return Err(Error::Singular(format!("closed form is singular at modulus k = {k}")));
    }
    let kk = complete_k(params.k);
    let ee = 4.0 * complete_e(params.k);
    let bracket = ((-1.0 + 2.0 * k) * ee - 4.0 * (-1.0 + k) * kk) / (3.0 * 16.0 * k);
    let damping = 4.0 * params.amplitude * params.amplitude / params.g * bracket;
    let drive_coefficient = params.amplitude * PI * idx.u as f64 / (2.0 * kk) * xi(params, idx.u);
    Ok(ClosedFormValue {
        value: -gamma * damping + drive_coefficient * drive.amplitude * a.sin(),
        damping,
        drive: drive_coefficient,
        method: Method::EllipticClosedForm,
    })
}

/// Closed-form and quadrature coefficients side by side for one orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicDiscrepancy {
    pub numeric: SubharmonicDecomposition,
    pub closed_damping: f64,
    pub closed_drive: f64,
    pub relative_damping: f64,
    pub relative_drive: f64,
}

/// Fits the closed form to `orbit` and reports how far its coefficients are from the
/// quadrature values (unit drive amplitude).
pub fn subharmonic_discrepancy(orbit: &PeriodicOrbit, idx: SubharmonicIndex) -> Result<SubharmonicDiscrepancy> {
    let unit = DriveSpec::new(1.0)?;
    let numeric = SubharmonicDecomposition::new(orbit, idx, unit)?;
    let params = CnoidalParameters::matched_to(orbit)?;
    let closed = melnikov_subharmonic_closed(&params, idx, 0.0, unit, 0.0)?;
    let rel = |c: f64, n: f64| (c - n).abs() / n.abs().max(f64::MIN_POSITIVE);
    Ok(SubharmonicDiscrepancy {
        numeric,
        closed_damping: closed.damping,
        closed_drive: closed.drive,
        relative_damping: rel(closed.damping, numeric.damping),
        relative_drive: rel(closed.drive, numeric.sin_coefficient),
    })
}

fn check_homoclinic(beta: f64, omega: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    Ok(())
}

/// `M(a) = −6(γ + 5βπω²Δ·csch(πω)·sin a)/(5β²)`.
pub fn melnikov_homoclinic_closed(beta: f64, omega: f64, gamma: f64, drive: DriveSpec, a: f64) -> Result<f64> {
    check_homoclinic(beta, omega)?;
    let forcing = 5.0 * beta * PI * omega * omega * drive.amplitude / (PI * omega).sinh();
    Ok(-6.0 * (gamma + forcing * a.sin()) / (5.0 * beta * beta))
}

/// Half-width of the homoclinic quadrature window: `2·asech(√TAIL)·1.25`.
pub fn homoclinic_cutoff() -> f64 {
    let x = TAIL.sqrt();
    let asech = ((1.0 + (1.0 - x * x).sqrt()) / x).ln();
    2.0 * asech * CUTOFF_SAFETY
}

/// `M(a) = ∫(−γΓ' + h(ωz + a))·Γ' dz` by adaptive Gauss–Kronrod over `(−Z, Z)`.
pub fn melnikov_homoclinic_numeric(beta: f64, omega: f64, gamma: f64, drive: DriveSpec, a: f64) -> Result<f64> {
    check_homoclinic(beta, omega)?;
    let z_max = homoclinic_cutoff();
    // Panels no wider than a quarter drive period or one unit of z.
    let width = (0.5 * PI / omega).min(1.0);
    let panels = (2.0 * z_max / width).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels).map(|i| -z_max + 2.0 * z_max * i as f64 / panels as f64).collect();
    let integrand = |z: f64| {
        let dg = homoclinic_profile(beta, z).1;
        (-gamma * dg + drive.value(omega * z + a)) * dg
    };
    // ∫Γ'² = 6/(5β²) and ∫|Γ'| = 3/β bound the two parts; cancellation near a zero of M
    // makes a purely relative target unreachable.
    let size = gamma.abs() * 6.0 / (5.0 * beta * beta) + drive.amplitude.abs() * 3.0 / beta;
    let r = quad::integrate_panels(integrand, &breaks, Tolerance { abs: 1e-14 * size, rel: 1e-13 })?;
    Ok(r.value)
}

/// `γ* = 5βπω²·Δ·csch(πω)`; the homoclinic wave persists for `γ < γ*`.
pub fn damping_threshold_homoclinic(beta: f64, omega: f64, delta: f64) -> Result<f64> {
    check_homoclinic(beta, omega)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("drive amplitude must be non-negative, got {delta}")));
    }
    Ok(5.0 * beta * PI * omega * omega * delta / (PI * omega).sinh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicThreshold {
    pub gamma_star: f64,
    pub decomposition: SubharmonicDecomposition,
    /// Set when the orbit is so small that both integrals are close to zero and the ratio
    /// loses meaning.
    pub small_orbit: bool,
}

/// `γ* = |drive amplitude| / ∫U₀'²` from the quadrature decomposition.
pub fn damping_threshold_periodic(
    orbit: &PeriodicOrbit,
    idx: SubharmonicIndex,
    drive: DriveSpec,
) -> Result<PeriodicThreshold> {
    if !(drive.amplitude > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold needs a positive drive amplitude, got {}",
            drive.amplitude
        )));
    }
    let d = SubharmonicDecomposition::new(orbit, idx, drive)?;
    let amp = d.drive_amplitude();
    // The u-th Fourier coefficient of an even orbit is never exactly zero, but can drop
    // below the sampling noise for high u on small orbits.
    let noise = 1e-14 * idx.omega * drive.amplitude * orbit.period * orbit.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if amp <= noise || d.damping <= 0.0 {
        return Err(Error::Singular(format!("drive term vanishes for u = {} (non-resonant)", idx.u)));
    }
    Ok(PeriodicThreshold { gamma_star: amp / d.damping, decomposition: d, small_orbit: d.damping < 1e-8 })
}

/// A refined simple zero of `M` and the sign of `dM/da` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleZero {
    pub phase: f64,
    pub slope: f64,
}

impl SimpleZero {
    pub fn slope_sign(&self) -> i8 {
        if self.slope > 0.0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovCurve {
    pub phases: Vec<f64>,
    pub values: Vec<f64>,
    pub zeros: Vec<SimpleZero>,
}

const ZERO_TOL: f64 = 1e-10;
const MIN_SLOPE: f64 = 1e-8;
const FD_STEP: f64 = 1e-6;

fn refine_zero<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // One secant step inside the final bracket.
    let fhi = f(hi)?;
    let x = if fhi != flo { lo - flo * (hi - lo) / (fhi - flo) } else { 0.5 * (lo + hi) };
    let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
    let fx = f(x)?;
    Ok(if fx.abs() <= flo.abs().min(fhi.abs()) { x } else if flo.abs() < fhi.abs() { lo } else { hi })
}

/// Samples `M` on `grid_size` uniform phases in `[0, 2π)`, brackets sign changes
/// (including the wrap to `2π`), refines each by bisection with a final secant step and
/// keeps the zeros where `|M| < 1e-10` and a centred difference gives `|dM/da| > 1e-8`.
pub fn find_simple_zeros<F>(m: F, grid_size: usize) -> Result<MelnikovCurve>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if grid_size < 32 {
        return Err(Error::InvalidParameter(format!("phase grid needs at least 32 points, got {grid_size}")));
    }
    let phases: Vec<f64> = (0..grid_size).map(|i| 2.0 * PI * i as f64 / grid_size as f64).collect();
    let values = phases.par_iter().map(|&a| m(a)).collect::<Result<Vec<f64>>>()?;
    let mut zeros = Vec::new();
    for i in 0..grid_size {
        let (a0, v0) = (phases[i], values[i]);
        let (a1, v1) = if i + 1 < grid_size { (phases[i + 1], values[i + 1]) } else { (2.0 * PI, values[0]) };
        let candidate = if v0 == 0.0 {
            a0
        } else if v1 != 0.0 && (v0 > 0.0) != (v1 > 0.0) {
            refine_zero(&m, a0, a1, v0)?
        } else {
            continue;
        };
        let value = m(candidate)?;
        let slope = (m(candidate + FD_STEP)? - m(candidate - FD_STEP)?) / (2.0 * FD_STEP);
        if value.abs() < ZERO_TOL && slope.abs() > MIN_SLOPE {
            zeros.push(SimpleZero { phase: candidate.rem_euclid(2.0 * PI), slope });
        }
    }
    zeros.sort_by(|a, b| a.phase.total_cmp(&b.phase));
    zeros.dedup_by(|a, b| (a.phase - b.phase).abs() < 1e-9);
    Ok(MelnikovCurve { phases, values, zeros })
}
