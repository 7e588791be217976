//! Floquet stability of travelling waves on a periodic lattice of `N` sites.
//!
//! Perturbations `u_n` of `q_n(t) = U(ωt + np)` obey
//! `M·ü = −γu̇ − u + 2β·diag(U(ωt + np))·u`, with `M` the periodic tridiagonal mass matrix
//! (1 on the diagonal, `−λ` on both neighbours). The monodromy matrix maps `(u, u̇)` over one
//! period `T̄ = L/ω`.

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::wavesolver::{BifurcationBranch, FourierSolution, ModelParams};

/// Default number of RK4 steps per period.
pub const DEFAULT_STEPS: usize = 1 << 12;
/// Default classification slack on `|χ|`.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCoupling {
    pub sites: usize,
    pub lambda: f64,
    pub mass: DMatrix<f64>,
    pub mass_inverse: DMatrix<f64>,
}

impl LatticeCoupling {
    pub fn trace_inverse(&self) -> f64 {
        self.mass_inverse.trace()
    }

    /// Row-major copy of `M⁻¹` for the inner integration loops.
    pub(crate) fn inverse_rows(&self) -> Vec<f64> {
        let n = self.sites;
        (0..n * n).map(|k| self.mass_inverse[(k / n, k % n)]).collect()
    }
}

pub fn build_mass(sites: usize, lambda: f64) -> Result<LatticeCoupling> {
    if sites < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 lattice sites, got {sites}")));
    }
    if !(lambda.abs() < 0.5) {
        return Err(Error::InvalidParameter(format!("coupling must satisfy |lambda| < 1/2, got {lambda}")));
    }
    let mut mass = DMatrix::identity(sites, sites);
    for n in 0..sites {
        mass[(n, (n + 1) % sites)] -= lambda;
        mass[(n, (n + sites - 1) % sites)] -= lambda;
    }
    let mass_inverse = mass.clone().lu().solve(&DMatrix::identity(sites, sites)).ok_or(Error::Singular(
        "mass matrix is not invertible".into(),
    ))?;
    Ok(LatticeCoupling { sites, lambda, mass, mass_inverse })
}

/// `q_{n+N} = q_n` needs `N·p ≡ 0 (mod L)`; a drive additionally needs `N·p ≡ 0 (mod 2π)`.
pub fn check_compatible(period: f64, params: &ModelParams, sites: usize) -> Result<()> {
    let span = sites as f64 * params.p;
    let off = |m: f64| {
        let r = span / m;
        (r - r.round()).abs() > 1e-9 * r.abs().max(1.0)
    };
    if off(period) || (params.delta != 0.0 && off(2.0 * PI)) {
        return Err(Error::Incompatible(format!(
            "N·p = {span} is not a multiple of the wave period {period}{}",
            if params.delta != 0.0 { " and of 2π" } else { "" }
        )));
    }
    Ok(())
}

/// `2β·U(ωt + np)` at the RK4 stage times `t = k·h/2`, one row of `N` values per time.
pub(crate) fn potential_table(sol: &FourierSolution, params: &ModelParams, sites: usize, steps: usize) -> Vec<f64> {
    let h = sol.period / params.omega / steps as f64;
    (0..=2 * steps)
        .into_par_iter()
        .flat_map_iter(|k| {
            let t = 0.5 * h * k as f64;
            (0..sites).map(move |n| 2.0 * params.beta * sol.evaluate(params.omega * t + n as f64 * params.p, 0))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FloquetOptions {
    pub sites: usize,
    pub steps_per_period: usize,
    pub tolerance: f64,
    /// Repeat with twice the steps and fail if `max|χ|` moves by more than `1e-6`.
    pub check_resolution: bool,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self { sites: 20, steps_per_period: DEFAULT_STEPS, tolerance: DEFAULT_TOLERANCE, check_resolution: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyResult {
    pub matrix: DMatrix<f64>,
    pub multipliers: Vec<Complex<f64>>,
    pub max_modulus: f64,
    pub stable: bool,
    pub tolerance: f64,
    /// `T̄ = L/ω`.
    pub period: f64,
    pub determinant: f64,
    /// `exp(−γ·T̄·trace(M⁻¹))`.
    pub expected_determinant: f64,
}

impl MonodromyResult {
    pub fn determinant_error(&self) -> f64 {
        (self.determinant - self.expected_determinant).abs() / self.expected_determinant.abs()
    }

    /// Largest distance from a multiplier to the nearest conjugate of another.
    pub fn conjugate_pairing_residual(&self) -> f64 {
        self.pairing_residual(|z| z.conj())
    }

    /// Largest distance from a multiplier to the nearest `1/χ̄`, which pairs the spectrum of a
    /// conservative system.
    pub fn reciprocal_pairing_residual(&self) -> f64 {
        self.pairing_residual(|z| Complex::new(1.0, 0.0) / z.conj())
    }

    fn pairing_residual(&self, map: impl Fn(Complex<f64>) -> Complex<f64>) -> f64 {
        self.multipliers
            .iter()
            .map(|&z| {
                let target = map(z);
                self.multipliers.iter().map(|w| (w - target).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

/// Monodromy matrix by fixed-step RK4 from the `2N` unit initial conditions (columns in
/// parallel), multipliers by balancing and the real Schur form.
pub fn monodromy(
    sol: &FourierSolution,
    params: &ModelParams,
    coupling: &LatticeCoupling,
    opts: FloquetOptions,
) -> Result<MonodromyResult> {
    params.validate()?;
    check_compatible(sol.period, params, coupling.sites)?;
    if opts.steps_per_period < 1 {
        return Err(Error::InvalidParameter("need at least one RK4 step per period".into()));
    }
    if (coupling.lambda - params.lambda).abs() > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mass matrix built for lambda = {} but the model has lambda = {}",
            coupling.lambda, params.lambda
        )));
    }
    let result = monodromy_with_steps(sol, params, coupling, opts.steps_per_period, opts.tolerance)?;
    if opts.check_resolution {
        let fine = monodromy_with_steps(sol, params, coupling, 2 * opts.steps_per_period, opts.tolerance)?;
        let change = (fine.max_modulus - result.max_modulus).abs();
        if change > 1e-6 {
            return Err(Error::Resolution(format!(
                "doubling the RK4 steps moved max|χ| by {change:e} (> 1e-6)"
            )));
        }
    }
    Ok(result)
}

fn monodromy_with_steps(
    sol: &FourierSolution,
    params: &ModelParams,
    coupling: &LatticeCoupling,
    steps: usize,
    tolerance: f64,
) -> Result<MonodromyResult> {
    let matrix = monodromy_matrix(sol, params, coupling, steps);
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("monodromy matrix has non-finite entries".into()));
    }
    let multipliers = eigenvalues(&matrix)?;
    let max_modulus = multipliers.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let determinant = matrix.clone().lu().determinant();
    let expected_determinant = (-params.gamma * sol.period / params.omega * coupling.trace_inverse()).exp();
    Ok(MonodromyResult {
        matrix,
        multipliers,
        max_modulus,
        stable: max_modulus <= 1.0 + tolerance,
        tolerance,
        period: sol.period / params.omega,
        determinant,
        expected_determinant,
    })
}

/// The `2N × 2N` monodromy matrix after `steps` RK4 steps, without compatibility checks.
pub fn monodromy_matrix(sol: &FourierSolution, params: &ModelParams, coupling: &LatticeCoupling, steps: usize) -> DMatrix<f64> {
    let n = coupling.sites;
    let period = sol.period / params.omega;
    let h = period / steps as f64;
    let table = potential_table(sol, params, n, steps);
    let minv = coupling.inverse_rows();
    let gamma = params.gamma;

    let columns: Vec<Vec<f64>> = (0..2 * n)
        .into_par_iter()
        .map(|c| {
            let mut y = vec![0.0; 2 * n];
            y[c] = 1.0;
            let rhs = |k: usize, y: &[f64], out: &mut [f64]| {
                let pot = &table[k * n..(k + 1) * n];
                let (x, v) = y.split_at(n);
                let force: Vec<f64> = (0..n).map(|j| (pot[j] - 1.0) * x[j] - gamma * v[j]).collect();
                out[..n].copy_from_slice(v);
                for i in 0..n {
                    out[n + i] = minv[i * n..(i + 1) * n].iter().zip(&force).map(|(a, b)| a * b).sum();
                }
            };
            let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; 2 * n], vec![0.0; 2 * n], vec![0.0; 2 * n], vec![0.0; 2 * n]);
            let mut tmp = vec![0.0; 2 * n];
            for s in 0..steps {
                rhs(2 * s, &y, &mut k1);
                for i in 0..2 * n {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                rhs(2 * s + 1, &tmp, &mut k2);
                for i in 0..2 * n {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                rhs(2 * s + 1, &tmp, &mut k3);
                for i in 0..2 * n {
                    tmp[i] = y[i] + h * k3[i];
                }
                rhs(2 * s + 2, &tmp, &mut k4);
                for i in 0..2 * n {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            y
        })
        .collect();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| columns[j][i])
}

/// Eigenvalues of a real square matrix: Parlett–Reinsch balancing, then Hessenberg reduction and
/// shifted QR.
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let mut balanced = matrix.clone();
    balance_parlett_reinsch(&mut balanced);
    let dense = faer::Mat::from_fn(balanced.nrows(), balanced.ncols(), |i, j| balanced[(i, j)]);
    let values = dense.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(values.iter().map(|z| Complex::new(z.re, z.im)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstabilityKind {
    None,
    /// Dominant multiplier real and below −1.
    PeriodDoubling,
    /// Dominant multiplier real and above 1.
    Real,
    /// Dominant multiplier off the real axis.
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub max_modulus: f64,
    /// Multipliers with `|χ| > 1 + tol`.
    pub outside: usize,
    pub kind: InstabilityKind,
    pub dominant_re: f64,
    pub dominant_im: f64,
}

/// Unstable iff some `|χ| > 1 + tol`. A dominant multiplier with `|Im χ| < 1e-3` counts as real.
pub fn classify(result: &MonodromyResult, tol: f64) -> StabilityVerdict {
    let dominant = result
        .multipliers
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex::new(0.0, 0.0));
    let outside = result.multipliers.iter().filter(|z| z.norm() > 1.0 + tol).count();
    let kind = if outside == 0 {
        InstabilityKind::None
    } else if dominant.im.abs() < 1e-3 {
        if dominant.re < 0.0 {
            InstabilityKind::PeriodDoubling
        } else {
            InstabilityKind::Real
        }
    } else {
        InstabilityKind::Oscillatory
    };
    StabilityVerdict {
        stable: outside == 0,
        max_modulus: dominant.norm(),
        outside,
        kind,
        dominant_re: dominant.re,
        dominant_im: dominant.im,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilitySegment {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStability {
    pub branch: BifurcationBranch,
    pub verdicts: Vec<Option<StabilityVerdict>>,
    /// Points whose monodromy failed, with the error message.
    pub errors: Vec<(usize, String)>,
    pub segments: Vec<StabilitySegment>,
}

/// Fills the `stable` flag of every branch point. A failing point keeps `stable = None` and is
/// listed in `errors`; the sweep continues.
pub fn stability_along_branch(branch: &BifurcationBranch, coupling: &LatticeCoupling, opts: FloquetOptions) -> BranchStability {
    let outcomes: Vec<Result<StabilityVerdict>> = (0..branch.points.len())
        .into_par_iter()
        .map(|i| {
            let params = branch.params_at(i);
            monodromy(&branch.points[i].solution, &params, coupling, opts).map(|m| classify(&m, opts.tolerance))
        })
        .collect();
    let mut out = branch.clone();
    let mut verdicts = Vec::with_capacity(outcomes.len());
    let mut errors = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(v) => {
                out.points[i].stable = Some(v.stable);
                verdicts.push(Some(v));
            }
            Err(e) => {
                out.points[i].stable = None;
                errors.push((i, e.to_string()));
                verdicts.push(None);
            }
        }
    }
    let mut segments: Vec<StabilitySegment> = Vec::new();
    for (i, p) in out.points.iter().enumerate() {
        let Some(stable) = p.stable else { continue };
        match segments.last_mut() {
            Some(s) if s.stable == stable && s.end + 1 == i => s.end = i,
            _ => segments.push(StabilitySegment { start: i, end: i, stable }),
        }
    }
    BranchStability { branch: out, verdicts, errors, segments }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_matrix() {
        let c = build_mass(3, 0.1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { -0.1 };
                assert_eq!(c.mass[(i, j)], expect);
            }
        }
        let eye = &c.mass * &c.mass_inverse;
        assert!((eye - DMatrix::identity(3, 3)).amax() < 1e-12);
        let free = build_mass(20, 0.0).unwrap();
        assert_eq!(free.mass_inverse, DMatrix::identity(20, 20));
        assert_eq!(free.trace_inverse(), 20.0);
        assert!(build_mass(20, 0.5).is_err());
        assert!(build_mass(2, 0.1).is_err());
    }

    fn fake(multipliers: Vec<Complex<f64>>) -> MonodromyResult {
        let max_modulus = multipliers.iter().map(|z| z.norm()).fold(0.0, f64::max);
        MonodromyResult {
            matrix: DMatrix::zeros(0, 0),
            multipliers,
            max_modulus,
            stable: max_modulus <= 1.0 + DEFAULT_TOLERANCE,
            tolerance: DEFAULT_TOLERANCE,
            period: 1.0,
            determinant: 1.0,
            expected_determinant: 1.0,
        }
    }

    #[test]
    fn verdicts() {
        let inside = fake(vec![Complex::new(0.5, 0.5), Complex::new(1.0, 0.0)]);
        assert_eq!(classify(&inside, 1e-6).kind, InstabilityKind::None);
        assert!(classify(&inside, 1e-6).stable);
        let pd = fake(vec![Complex::new(-1.05, 0.0), Complex::new(-1.0 / 1.05, 0.0)]);
        let v = classify(&pd, 1e-6);
        assert!(!v.stable);
        assert_eq!(v.kind, InstabilityKind::PeriodDoubling);
        assert_eq!(v.outside, 1);
        let osc = fake(vec![Complex::new(0.0, 1.2), Complex::new(0.0, -1.2)]);
        assert_eq!(classify(&osc, 1e-6).kind, InstabilityKind::Oscillatory);
    }

    #[test]
    fn compatibility() {
        let p = ModelParams::default();
        assert!(check_compatible(2.0 * PI, &p, 20).is_ok());
        assert!(check_compatible(2.0 * PI, &p, 21).is_err());
        let driven = ModelParams { delta: 0.1, p: 4.0 * PI / 20.0, ..p };
        assert!(check_compatible(4.0 * PI, &driven, 20).is_ok());
        assert!(check_compatible(4.0 * PI, &ModelParams { p: PI / 10.0 * 1.5, ..driven }, 20).is_err());
    }
}
