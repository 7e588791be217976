use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{FourierSolution, ModelParams};
use crate::error::{Error, Result};

/// `2J` uniform points in `[−L/2, L/2)`, offset by half a cell: `z_i = −L/2 + (i + ½)·L/(2J)`.
///
/// The offset keeps the top sine mode `sin(J·k̃z)` away from its zeros; on the unshifted grid
/// it vanishes at every node and the collocation matrix is singular.
pub fn collocation_points(period: f64, modes: usize) -> Vec<f64> {
    let n = 2 * modes;
    let h = period / n as f64;
    (0..n).map(|i| -0.5 * period + (i as f64 + 0.5) * h).collect()
}

/// Basis values and first derivatives at the collocation nodes, columns ordered like
/// [`FourierSolution::to_vector`].
pub(crate) struct Collocation {
    pub period: f64,
    pub modes: usize,
    pub points: Vec<f64>,
    pub basis: DMatrix<f64>,
    pub dbasis: DMatrix<f64>,
    /// Wavenumber of each column.
    pub kappa: Vec<f64>,
}

impl Collocation {
    pub fn new(period: f64, modes: usize) -> Self {
        Self::at(period, modes, collocation_points(period, modes))
    }

    pub fn at(period: f64, modes: usize, points: Vec<f64>) -> Self {
        let k = 2.0 * PI / period;
        let n = 2 * modes;
        let rows = points.len();
        let mut basis = DMatrix::zeros(rows, n);
        let mut dbasis = DMatrix::zeros(rows, n);
        let mut kappa = vec![0.0; n];
        for m in 0..modes {
            kappa[m] = m as f64 * k;
            kappa[modes + m] = (m + 1) as f64 * k;
        }
        for (i, &z) in points.iter().enumerate() {
            for m in 0..modes {
                let (s, c) = (kappa[m] * z).sin_cos();
                basis[(i, m)] = c;
                dbasis[(i, m)] = -kappa[m] * s;
                let (s, c) = (kappa[modes + m] * z).sin_cos();
                basis[(i, modes + m)] = s;
                dbasis[(i, modes + m)] = kappa[modes + m] * c;
            }
        }
        Self { period, modes, points, basis, dbasis, kappa }
    }

    /// Symbol of the linear part on one mode, `1 − ω²κ² + 2λω²κ²·cos(κp)`.
    fn symbol(params: &ModelParams, kappa: f64) -> f64 {
        let w2k2 = params.omega * params.omega * kappa * kappa;
        1.0 - w2k2 + 2.0 * params.lambda * w2k2 * (kappa * params.p).cos()
    }

    /// Matrix of the linear part: `basis·diag(symbol) + γω·dbasis`.
    pub fn linear(&self, params: &ModelParams) -> DMatrix<f64> {
        let mut lin = self.dbasis.clone() * (params.gamma * params.omega);
        for (j, &kappa) in self.kappa.iter().enumerate() {
            let c = Self::symbol(params, kappa);
            for i in 0..lin.nrows() {
                lin[(i, j)] += c * self.basis[(i, j)];
            }
        }
        lin
    }

    pub fn residual(&self, lin: &DMatrix<f64>, x: &DVector<f64>, params: &ModelParams) -> (DVector<f64>, DVector<f64>) {
        let u = &self.basis * x;
        let mut r = lin * x;
        for i in 0..r.len() {
            r[i] -= params.beta * u[i] * u[i] + params.delta * self.points[i].cos();
        }
        (r, u)
    }

    pub fn jacobian(&self, lin: &DMatrix<f64>, u: &DVector<f64>, beta: f64) -> DMatrix<f64> {
        let mut jac = lin.clone();
        for i in 0..jac.nrows() {
            let w = 2.0 * beta * u[i];
            for j in 0..jac.ncols() {
                jac[(i, j)] -= w * self.basis[(i, j)];
            }
        }
        jac
    }

    /// `∂R/∂γ = ωU'` and `∂R/∂Δ = −cos z` at the nodes.
    pub fn parameter_derivative(&self, x: &DVector<f64>, params: &ModelParams, gamma: bool) -> DVector<f64> {
        if gamma {
            (&self.dbasis * x) * params.omega
        } else {
            DVector::from_iterator(self.points.len(), self.points.iter().map(|z| -z.cos()))
        }
    }
}

/// Residual of the advance-delay equation at the `2J` collocation points.
pub fn residual(sol: &FourierSolution, params: &ModelParams) -> Vec<f64> {
    residual_at(sol, params, &collocation_points(sol.period, sol.modes()))
}

fn residual_at(sol: &FourierSolution, params: &ModelParams, points: &[f64]) -> Vec<f64> {
    let w2 = params.omega * params.omega;
    points
        .iter()
        .map(|&z| {
            let u = sol.evaluate(z, 0);
            w2 * sol.evaluate(z, 2) + u - params.beta * u * u
                - params.lambda * w2 * (sol.shift_evaluate(z, -params.p, 2) + sol.shift_evaluate(z, params.p, 2))
                + params.gamma * params.omega * sol.evaluate(z, 1)
                - params.delta * z.cos()
        })
        .collect()
}

/// Max-norm residual at `4J` points interleaved with the collocation nodes.
pub fn offgrid_residual(sol: &FourierSolution, params: &ModelParams) -> f64 {
    let n = 4 * sol.modes();
    let h = sol.period / n as f64;
    let points: Vec<f64> = (0..n).map(|i| -0.5 * sol.period + (i as f64 + 1.0 / 3.0) * h).collect();
    residual_at(sol, params, &points).iter().fold(0.0, |m, r| m.max(r.abs()))
}

/// Which coefficients Newton's method may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subspace {
    /// Even (cosine-only) waves when `γ = Δ = 0`, where translations leave a null vector;
    /// all coefficients otherwise.
    Auto,
    Full,
    /// Cosine modes only, collocated on the `J` nodes with `z > 0`.
    Even,
}

impl Subspace {
    pub(crate) fn is_even(self, params: &ModelParams) -> bool {
        match self {
            Subspace::Auto => params.gamma == 0.0 && params.delta == 0.0,
            Subspace::Full => false,
            Subspace::Even => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Reject converged solutions whose off-grid residual exceeds `10·tol`.
    pub check_truncation: bool,
    pub subspace: Subspace,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, check_truncation: true, subspace: Subspace::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub solution: FourierSolution,
    pub iterations: usize,
    pub residual: f64,
    pub offgrid_residual: f64,
}

/// Pivot ratio below which a Jacobian is treated as singular.
pub(crate) const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

pub(crate) fn solve_checked(jac: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = jac.full_piv_lu();
    let diag = lu.u().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| (lo.min(d.abs()), hi.max(d.abs())));
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(ratio > SINGULAR_PIVOT_RATIO) {
        return Err(Error::SingularJacobian(ratio));
    }
    lu.solve(rhs).ok_or(Error::SingularJacobian(ratio))
}

pub(crate) fn check_commensurate(period: f64, params: &ModelParams) -> Result<()> {
    if params.delta != 0.0 {
        let u = period / (2.0 * PI);
        if (u - u.round()).abs() > 1e-9 * u.max(1.0) || u.round() < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "a driven wave needs L = 2πu for integer u ≥ 1, got L = {period}"
            )));
        }
    }
    Ok(())
}

/// Index maps for the even subspace: (rows, columns) of the full system that are kept.
pub(crate) fn even_indices(modes: usize) -> (Vec<usize>, Vec<usize>) {
    ((modes..2 * modes).collect(), (0..modes).collect())
}

/// Newton's method on the collocation equations with the analytic Jacobian
/// `linear − 2β·diag(U(z_i))·basis`.
pub fn newton_solve(initial: &FourierSolution, params: &ModelParams, opts: NewtonOptions) -> Result<NewtonReport> {
    params.validate()?;
    check_commensurate(initial.period, params)?;
    let modes = initial.modes();
    let sys = Collocation::new(initial.period, modes);
    let lin = sys.linear(params);
    let even = opts.subspace.is_even(params);
    let mut x = DVector::from_vec(initial.to_vector());
    if even {
        x.rows_mut(modes, modes).fill(0.0);
    }
    let (rows, cols) = even_indices(modes);
    let mut last = f64::INFINITY;
    for iteration in 0..=opts.max_iter {
        let (r, u) = sys.residual(&lin, &x, params);
        let norm = r.amax();
        if !norm.is_finite() || norm > 1e12 {
            return Err(Error::NotConverged { iterations: iteration, residual: norm });
        }
        last = norm;
        if norm < opts.tol {
            let solution = FourierSolution::from_vector(initial.period, x.as_slice());
            let off = offgrid_residual(&solution, params);
            if opts.check_truncation && off > 10.0 * opts.tol {
                return Err(Error::Truncation { residual: off, limit: 10.0 * opts.tol });
            }
            return Ok(NewtonReport { solution, iterations: iteration, residual: norm, offgrid_residual: off });
        }
        if iteration == opts.max_iter {
            break;
        }
        let jac = sys.jacobian(&lin, &u, params.beta);
        if even {
            let sub = jac.select_rows(&rows).select_columns(&cols);
            let rhs = DVector::from_iterator(modes, rows.iter().map(|&i| r[i]));
            let dx = solve_checked(sub, &rhs)?;
            for (k, &c) in cols.iter().enumerate() {
                x[c] -= dx[k];
            }
        } else {
            x -= solve_checked(jac, &r)?;
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: last })
}

/// Single-mode small-amplitude response `C·cos z + S·sin z` with
/// `[D, γω; −γω, D]·[C; S] = [Δ; 0]`, `D = 1 − ω² + 2λω²·cos p`, on `L = 2πu`.
pub fn linear_response_guess(params: &ModelParams, period: f64, modes: usize) -> Result<FourierSolution> {
    params.validate()?;
    let u = (period / (2.0 * PI)).round();
    if u < 1.0 || (period / (2.0 * PI) - u).abs() > 1e-9 * u {
        return Err(Error::InvalidParameter(format!("drive needs L = 2πu for integer u ≥ 1, got L = {period}")));
    }
    let m = u as usize;
    if m >= modes {
        return Err(Error::InvalidParameter(format!("mode {m} of the drive needs more than {modes} modes")));
    }
    let w = params.omega;
    let d = 1.0 - w * w + 2.0 * params.lambda * w * w * params.p.cos();
    let g = params.gamma * w;
    let det = d * d + g * g;
    if det < 1e-20 {
        return Err(Error::NoSolution(format!("linear response is resonant (D² + γ²ω² = {det:e})")));
    }
    let mut sol = FourierSolution::zeros(period, modes)?;
    sol.cos[m] = params.delta * d / det;
    sol.sin[m - 1] = params.delta * g / det;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let z = collocation_points(2.0 * PI, 5);
        assert_eq!(z.len(), 10);
        for i in 0..10 {
            assert!((z[i] + z[9 - i]).abs() < 1e-14);
        }
        assert!(z.iter().all(|&x| x >= -PI && x < PI));
    }

    #[test]
    fn zero_solution_residuals() {
        let zero = FourierSolution::zeros(2.0 * PI, 6).unwrap();
        let p = ModelParams::default();
        assert!(residual(&zero, &p).iter().all(|&r| r == 0.0));
        let driven = ModelParams { delta: 0.3, ..p };
        for (r, z) in residual(&zero, &driven).iter().zip(collocation_points(2.0 * PI, 6)) {
            assert!((r + 0.3 * z.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn matrix_residual_matches_series_residual() {
        let sol = FourierSolution::new(2.0 * PI, vec![0.1, 0.5, -0.2, 0.05], vec![0.2, -0.1, 0.03, 0.01]).unwrap();
        let params = ModelParams { gamma: 0.3, lambda: 0.2, delta: 0.4, ..Default::default() };
        let sys = Collocation::new(sol.period, sol.modes());
        let x = DVector::from_vec(sol.to_vector());
        let (r, _) = sys.residual(&sys.linear(&params), &x, &params);
        for (a, b) in r.iter().zip(residual(&sol, &params)) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn linear_response_hand_case() {
        let params = ModelParams { omega: 2.0, delta: 0.1, ..Default::default() };
        let s = linear_response_guess(&params, 2.0 * PI, 4).unwrap();
        assert!((s.cos[1] + 1.0 / 30.0).abs() < 1e-15);
        assert_eq!(s.sin[0], 0.0);
        let zero = linear_response_guess(&ModelParams { delta: 0.0, ..params }, 2.0 * PI, 4).unwrap();
        assert_eq!(zero.norm(), 0.0);
        assert!(linear_response_guess(&ModelParams { omega: 1.0, ..params }, 2.0 * PI, 4).is_err());
    }
}
