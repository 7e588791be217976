use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::orbits::PeriodicOrbit;

/// Truncated trigonometric series on a period `L`:
/// `U(z) = A₀ + Σ_{m=1}^{J−1} A_m cos(m·k̃z) + Σ_{m=1}^{J} B_m sin(m·k̃z)`, `k̃ = 2π/L`.
///
/// `cos[m]` holds `A_m` for `m = 0..J`, `sin[m − 1]` holds `B_m` for `m = 1..=J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSolution {
    pub period: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

#[inline]
fn derivative_factor(kappa: f64, order: u32) -> (f64, f64) {
    // d^n/dz^n cos(κz) = κ^n cos(κz + nπ/2); returns (κ^n, phase n·π/2 as quarter turns).
    (kappa.powi(order as i32), order as f64)
}

impl FourierSolution {
    pub fn zeros(period: f64, modes: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!("domain period must be positive, got {period}")));
        }
        if modes < 1 {
            return Err(Error::InvalidParameter("need at least one Fourier mode".into()));
        }
        Ok(Self { period, cos: vec![0.0; modes], sin: vec![0.0; modes] })
    }

    pub fn new(period: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let mut s = Self::zeros(period, cos.len().max(1))?;
        if cos.len() != sin.len() {
            return Err(Error::InvalidParameter(format!(
                "cosine and sine coefficient counts differ ({} vs {})",
                cos.len(),
                sin.len()
            )));
        }
        if cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("Fourier coefficients must be finite".into()));
        }
        s.cos = cos;
        s.sin = sin;
        Ok(s)
    }

    /// Number of modes `J`.
    pub fn modes(&self) -> usize {
        self.cos.len()
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// `d^order U/dz^order` at `z`, exact for the truncated series.
    pub fn evaluate(&self, z: f64, order: u32) -> f64 {
        self.shift_evaluate(z, 0.0, order)
    }

    /// `U^(order)(z + shift)`, each mode rotated by its own phase `m·k̃·shift`.
    pub fn shift_evaluate(&self, z: f64, shift: f64, order: u32) -> f64 {
        let k = self.wavenumber();
        let mut total = if order == 0 { self.cos[0] } else { 0.0 };
        let quarter = 0.5 * PI;
        for m in 1..=self.modes() {
            let kappa = m as f64 * k;
            let (scale, turns) = derivative_factor(kappa, order);
            let angle = kappa * z + kappa * shift + turns * quarter;
            let (s, c) = angle.sin_cos();
            if m < self.modes() {
                total += scale * self.cos[m] * c;
            }
            total += scale * self.sin[m - 1] * s;
        }
        total
    }

    /// `N = √(∫₀^L U² dz) = √(L·(A₀² + ½ΣA_m² + ½ΣB_m²))` by Parseval.
    pub fn norm(&self) -> f64 {
        let tail: f64 = self.cos[1..].iter().chain(&self.sin).map(|c| c * c).sum();
        (self.period * (self.cos[0] * self.cos[0] + 0.5 * tail)).sqrt()
    }

    /// `U(−z)`: sine coefficients change sign.
    pub fn reflect(&self) -> Self {
        Self { period: self.period, cos: self.cos.clone(), sin: self.sin.iter().map(|b| -b).collect() }
    }

    /// `U(z + L/2)`, exact since every mode turns by a multiple of π.
    pub fn half_shifted(&self) -> Self {
        let sign = |m: usize| if m % 2 == 0 { 1.0 } else { -1.0 };
        Self {
            period: self.period,
            cos: self.cos.iter().enumerate().map(|(m, a)| sign(m) * a).collect(),
            sin: self.sin.iter().enumerate().map(|(i, b)| sign(i + 1) * b).collect(),
        }
    }

    pub fn max_sine(&self) -> f64 {
        self.sin.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    /// Largest coefficient magnitude among the top mode pair, relative to the largest
    /// coefficient overall.
    pub fn tail_ratio(&self) -> f64 {
        let j = self.modes();
        let top = self.sin[j - 1].abs().max(if j > 1 { self.cos[j - 1].abs() } else { 0.0 });
        let max = self.cos.iter().chain(&self.sin).fold(0.0_f64, |m, c| m.max(c.abs()));
        if max == 0.0 {
            0.0
        } else {
            top / max
        }
    }

    /// Series of `modes` modes interpolating `n` uniform samples `values[i] = U(i·L/n)`
    /// (discrete Fourier coefficients; needs `n > 2·modes`).
    pub fn from_samples(period: f64, values: &[f64], modes: usize) -> Result<Self> {
        let n = values.len();
        if n <= 2 * modes {
            return Err(Error::Resolution(format!("{n} samples cannot resolve {modes} modes")));
        }
        let mut s = Self::zeros(period, modes)?;
        let inv = 1.0 / n as f64;
        s.cos[0] = values.iter().sum::<f64>() * inv;
        for m in 1..=modes {
            let (mut c, mut d) = (0.0, 0.0);
            for (i, v) in values.iter().enumerate() {
                let (sn, cs) = (2.0 * PI * ((m * i) % n) as f64 * inv).sin_cos();
                c += v * cs;
                d += v * sn;
            }
            if m < modes {
                s.cos[m] = 2.0 * inv * c;
            }
            s.sin[m - 1] = 2.0 * inv * d;
        }
        Ok(s)
    }

    /// Encodes `U₀(z/ω)` for an unperturbed orbit, on the domain `L = ω·T̄`.
    pub fn from_orbit(orbit: &PeriodicOrbit, omega: f64, modes: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Self::from_samples(omega * orbit.period, &orbit.u, modes)
    }

    /// Same function with `modes` modes (padding with zeros or truncating).
    pub fn resized(&self, modes: usize) -> Self {
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        cos.resize(modes, 0.0);
        sin.resize(modes, 0.0);
        Self { period: self.period, cos, sin }
    }

    /// Coefficients stacked as `[A₀..A_{J−1}, B₁..B_J]`.
    pub fn to_vector(&self) -> Vec<f64> {
        self.cos.iter().chain(&self.sin).copied().collect()
    }

    pub fn from_vector(period: f64, x: &[f64]) -> Self {
        let j = x.len() / 2;
        Self { period, cos: x[..j].to_vec(), sin: x[j..2 * j].to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_single_mode() {
        let z = FourierSolution::zeros(2.0 * PI, 4).unwrap();
        for order in 0..3 {
            assert_eq!(z.evaluate(0.3, order), 0.0);
        }
        assert_eq!(z.norm(), 0.0);
        let mut s = z.clone();
        s.cos[1] = 1.0;
        assert!((s.evaluate(0.7, 0) - 0.7f64.cos()).abs() < 1e-15);
        assert!((s.evaluate(0.7, 2) + 0.7f64.cos()).abs() < 1e-15);
        assert!((s.norm() - PI.sqrt()).abs() < 1e-15);
        let p = 2.0 * PI / 20.0;
        assert!((s.shift_evaluate(0.7, p, 0) - (0.7 + p).cos()).abs() < 1e-15);
        assert!((s.shift_evaluate(0.7, 2.0 * PI, 0) - s.evaluate(0.7, 0)).abs() < 1e-14);
    }

    #[test]
    fn half_shift_and_reflection() {
        let s = FourierSolution::new(3.0, vec![0.1, 0.4, -0.2], vec![0.3, 0.05, 0.01]).unwrap();
        let h = s.half_shifted();
        let r = s.reflect();
        for z in [-1.0, 0.2, 1.3] {
            assert!((h.evaluate(z, 0) - s.evaluate(z + 1.5, 0)).abs() < 1e-14);
            assert!((r.evaluate(z, 0) - s.evaluate(-z, 0)).abs() < 1e-14);
        }
    }

    #[test]
    fn samples_round_trip() {
        let s = FourierSolution::new(5.0, vec![0.1, 0.4, -0.2, 0.0], vec![0.3, 0.05, 0.01, 0.0]).unwrap();
        let n = 16;
        let values: Vec<f64> = (0..n).map(|i| s.evaluate(5.0 * i as f64 / n as f64, 0)).collect();
        let back = FourierSolution::from_samples(5.0, &values, 4).unwrap();
        for (a, b) in s.to_vector().iter().zip(back.to_vector()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(FourierSolution::from_samples(5.0, &values, 8).is_err());
    }
}
