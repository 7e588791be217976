//! Complete and incomplete elliptic integrals and the Jacobi elliptic functions.
//!
//! Everything here is parameterised by the modulus `k` (never by `m = k²`).
//! Complete integrals use the arithmetic–geometric mean, the Jacobi functions use the
//! descending Landen transformation, and incomplete integrals go through Carlson's
//! symmetric forms with the usual quasi-periodic extension in the amplitude.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Distance from `k = 1` below which results are flagged as near-degenerate.
pub const NEAR_DEGENERATE_GAP: f64 = 1e-6;

/// Elliptic modulus `k` with `0 ≤ k < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || !(0.0..1.0).contains(&k) {
            return Err(Error::Domain(format!("elliptic modulus must satisfy 0 ≤ k < 1, got {k}")));
        }
        Ok(Self(k))
    }

    #[inline]
    pub fn k(self) -> f64 {
        self.0
    }

    /// Complementary modulus `k' = √(1 − k²)`, formed as `√((1−k)(1+k))` to keep digits near `k = 1`.
    #[inline]
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }

    /// True when `1 − k` is below [`NEAR_DEGENERATE_GAP`]; values are still computed,
    /// but `K` grows like `ln(4/k')` and callers should treat them with care.
    pub fn is_near_degenerate(self) -> bool {
        1.0 - self.0 < NEAR_DEGENERATE_GAP
    }
}

impl TryFrom<f64> for EllipticModulus {
    type Error = Error;
    fn try_from(k: f64) -> Result<Self> {
        Self::new(k)
    }
}

/// Values of the Jacobi functions and the amplitude at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    pub am: f64,
}

const AGM_TOL: f64 = 1e-16;

/// Complete elliptic integral of the first kind, `K(k) = π / (2·agm(1, k'))`.
pub fn complete_k(k: EllipticModulus) -> f64 {
    let (mut a, mut b) = (1.0_f64, k.complementary());
    for _ in 0..64 {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    PI / (2.0 * a)
}

/// Complete elliptic integral of the second kind via the AGM series
/// `E = K·(1 − Σ 2^{n−1} c_n²)`, `c_0 = k`.
pub fn complete_e(k: EllipticModulus) -> f64 {
    let (mut a, mut b) = (1.0_f64, k.complementary());
    let c0 = k.k();
    let mut sum = 0.5 * c0 * c0;
    let mut weight = 1.0;
    for _ in 0..64 {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let c = 0.5 * (a - b);
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
        sum += weight * c * c;
        weight *= 2.0;
    }
    let kk = PI / (2.0 * a);
    kk * (1.0 - sum)
}

/// Carlson's symmetric integral `R_F(x, y, z)`.
pub(crate) fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0025;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let (mut ave, mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lambda);
        yt = 0.25 * (yt + lambda);
        zt = 0.25 * (zt + lambda);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0) / ave.sqrt()
}

/// Carlson's symmetric integral `R_D(x, y, z)`.
pub(crate) fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0015;
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let (mut ave, mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (zt + lambda));
        fac *= 0.25;
        xt = 0.25 * (xt + lambda);
        yt = 0.25 * (yt + lambda);
        zt = 0.25 * (zt + lambda);
        ave = 0.2 * (xt + yt + 3.0 * zt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac
            * (1.0
                + ed * (-C1 + C5 * ed - C6 * dz * ee)
                + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
            / (ave * ave.sqrt())
}

fn check_phi(phi: f64) -> Result<()> {
    if phi.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("amplitude must be finite, got {phi}")))
    }
}

/// Splits `φ = nπ + r` with `r ∈ [−π/2, π/2]`.
fn reduce_amplitude(phi: f64) -> (f64, f64) {
    let n = (phi / PI).round();
    (n, phi - n * PI)
}

/// Incomplete integral of the first kind `F(φ, k)` for any real `φ`.
pub fn incomplete_f(phi: f64, k: EllipticModulus) -> Result<f64> {
    check_phi(phi)?;
    let (n, r) = reduce_amplitude(phi);
    let (s, c) = r.sin_cos();
    let kk = k.k();
    let principal = s * carlson_rf(c * c, (1.0 - kk * s) * (1.0 + kk * s), 1.0);
    Ok(if n == 0.0 { principal } else { 2.0 * n * complete_k(k) + principal })
}

/// Incomplete integral of the second kind `E(φ, k)`, extended by `E(φ + π) = E(φ) + 2E(k)`.
pub fn incomplete_e(phi: f64, k: EllipticModulus) -> Result<f64> {
    check_phi(phi)?;
    let (n, r) = reduce_amplitude(phi);
    let (s, c) = r.sin_cos();
    let kk = k.k();
    let y = (1.0 - kk * s) * (1.0 + kk * s);
    let principal = s * carlson_rf(c * c, y, 1.0) - kk * kk * s * s * s * carlson_rd(c * c, y, 1.0) / 3.0;
    Ok(if n == 0.0 { principal } else { 2.0 * n * complete_e(k) + principal })
}

/// Jacobi `sn`, `cn`, `dn` and amplitude at `u` by the descending Landen (AGM) scheme.
pub fn jacobi(u: f64, k: EllipticModulus) -> Result<JacobiTriple> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("argument must be finite, got {u}")));
    }
    let mut a = [0.0_f64; 32];
    let mut c = [0.0_f64; 32];
    a[0] = 1.0;
    c[0] = k.k();
    let mut b = k.complementary();
    let mut n = 0;
    while c[n].abs() > f64::EPSILON * a[n] && n + 1 < a.len() {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] * phi.sin() / a[i]).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn = √(k'² + k²cn²): a sum of squares, so no cancellation as k → 1.
    let dn = k.complementary().hypot(k.k() * cn);
    Ok(JacobiTriple { sn, cn, dn, am: phi })
}

/// Inverse of `cn` on the principal branch `u ∈ [0, 2K]`.
pub fn inverse_cn(x: f64, k: EllipticModulus) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !x.is_finite() || x.abs() > 1.0 + SLACK {
        return Err(Error::Domain(format!("cn⁻¹ argument {x} outside [−1, 1]")));
    }
    incomplete_f(x.clamp(-1.0, 1.0).acos(), k)
}

/// `∫_α^y dt / √((t − α)[(t − b₁)² + a₁²])` for a cubic with one real root `α` and a
/// complex-conjugate pair `b₁ ± i·a₁`, reduced to `g·cn⁻¹(cos φ, k)` with
/// `A² = (b₁ − α)² + a₁²`, `g = 1/√A`, `k² = (A + b₁ − α)/(2A)` and
/// `cos φ = (A + α − y)/(A − α + y)`.
pub fn complex_pair_integral(alpha: f64, b1: f64, a1: f64, y: f64) -> Result<f64> {
    if ![alpha, b1, a1, y].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("arguments must be finite".into()));
    }
    if a1 == 0.0 {
        return Err(Error::Domain("a1 must be non-zero (complex-conjugate root pair)".into()));
    }
    if y <= alpha {
        return Err(Error::Domain(format!("upper limit y = {y} must exceed the real root α = {alpha}")));
    }
    let big_a = (b1 - alpha).hypot(a1);
    let k2 = (big_a + b1 - alpha) / (2.0 * big_a);
    let k = EllipticModulus::new(k2.sqrt())?;
    let g = 1.0 / big_a.sqrt();
    let cos_phi = (big_a + alpha - y) / (big_a - alpha + y);
    Ok(g * inverse_cn(cos_phi, k)?)
}
