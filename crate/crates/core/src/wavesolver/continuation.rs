use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::newton::{check_commensurate, even_indices, solve_checked, Collocation};
use super::{newton_solve, FourierSolution, ModelParams, NewtonOptions, Subspace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Gamma,
    Delta,
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parameter::Gamma => "gamma",
            Parameter::Delta => "delta",
        })
    }
}

impl FromStr for Parameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" => Ok(Parameter::Gamma),
            "delta" => Ok(Parameter::Delta),
            other => Err(Error::InvalidParameter(format!("unknown continuation parameter '{other}'"))),
        }
    }
}

/// Pseudo-arclength step control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepControl {
    /// First (and largest) arclength step.
    pub initial: f64,
    /// Abort once a halved step falls below this.
    pub min: f64,
    pub grow: f64,
    pub max_points: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Leave the start towards increasing parameter values.
    pub increasing: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { initial: 0.05, min: 1e-12, grow: 1.3, max_points: 5000, tol: 1e-10, max_iter: 12, increasing: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub param: f64,
    pub solution: FourierSolution,
    pub norm: f64,
    pub stable: Option<bool>,
    pub fold: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub param: f64,
    pub norm: f64,
    /// Position of the fold point in [`BifurcationBranch::points`].
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    SinglePoint,
    RangeEnd,
    ClosedLoop,
    MaxPoints,
    StepUnderflow { param: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationBranch {
    pub parameter: Parameter,
    pub params: ModelParams,
    pub points: Vec<BranchPoint>,
    pub folds: Vec<Fold>,
    pub termination: Termination,
    /// Continued inside the even (cosine-only) subspace.
    pub even: bool,
}

impl BifurcationBranch {
    pub fn params_at(&self, i: usize) -> ModelParams {
        self.params.with(self.parameter, self.points[i].param)
    }
}

/// Restriction of the collocation system to the coefficients being continued.
struct Restricted {
    sys: Collocation,
    base: ModelParams,
    parameter: Parameter,
    even: bool,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Restricted {
    fn dim(&self) -> usize {
        self.cols.len()
    }

    fn full(&self, x: &[f64]) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.sys.modes);
        for (k, &c) in self.cols.iter().enumerate() {
            v[c] = x[k];
        }
        v
    }

    fn solution(&self, y: &DVector<f64>) -> FourierSolution {
        let n = self.dim();
        FourierSolution::from_vector(self.sys.period, self.full(&y.as_slice()[..n]).as_slice())
    }

    /// Residual, `∂R/∂x` and `∂R/∂μ` at `y = (x, μ)`.
    fn eval(&self, y: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>, DVector<f64>) {
        let n = self.dim();
        let params = self.base.with(self.parameter, y[n]);
        let x = self.full(&y.as_slice()[..n]);
        let lin = self.sys.linear(&params);
        let (r, u) = self.sys.residual(&lin, &x, &params);
        let jac = self.sys.jacobian(&lin, &u, params.beta);
        let rmu = self.sys.parameter_derivative(&x, &params, self.parameter == Parameter::Gamma);
        let pick = |v: &DVector<f64>| DVector::from_iterator(self.rows.len(), self.rows.iter().map(|&i| v[i]));
        (pick(&r), jac.select_rows(&self.rows).select_columns(&self.cols), pick(&rmu))
    }

    fn augmented(jx: &DMatrix<f64>, rmu: &DVector<f64>, t: &DVector<f64>) -> DMatrix<f64> {
        let n = jx.ncols();
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n)).copy_from(jx);
        a.view_mut((0, n), (n, 1)).copy_from(rmu);
        a.view_mut((n, 0), (1, n + 1)).copy_from(&t.transpose());
        a
    }

    /// Unit tangent with `prev·t = 1` before normalisation (keeps orientation).
    fn tangent(&self, y: &DVector<f64>, prev: &DVector<f64>) -> Result<DVector<f64>> {
        let (_, jx, rmu) = self.eval(y);
        let n = self.dim();
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = 1.0;
        let t = solve_checked(Self::augmented(&jx, &rmu, prev), &rhs)?;
        Ok(t.normalize())
    }

    /// Newton in `x` alone with the parameter held at `mu`.
    fn pin(&self, guess: &DVector<f64>, mu: f64, tol: f64, max_iter: usize) -> Result<DVector<f64>> {
        let n = self.dim();
        let mut y = guess.clone();
        y[n] = mu;
        for it in 0..=max_iter {
            let (r, jx, _) = self.eval(&y);
            let norm = r.amax();
            if !norm.is_finite() {
                break;
            }
            if norm < tol {
                return Ok(y);
            }
            if it == max_iter {
                return Err(Error::NotConverged { iterations: it, residual: norm });
            }
            let dx = solve_checked(jx, &r)?;
            for k in 0..n {
                y[k] -= dx[k];
            }
        }
        Err(Error::NotConverged { iterations: max_iter, residual: f64::NAN })
    }

    /// Newton on `[R(y); t·(y − anchor) − s] = 0` from `anchor + s·t`.
    fn correct(&self, anchor: &DVector<f64>, t: &DVector<f64>, s: f64, tol: f64, max_iter: usize) -> Result<(DVector<f64>, usize)> {
        let n = self.dim();
        let mut y = anchor + t * s;
        for it in 0..=max_iter {
            let (r, jx, rmu) = self.eval(&y);
            let arc = t.dot(&(&y - anchor)) - s;
            let norm = r.amax().max(arc.abs());
            if !norm.is_finite() {
                break;
            }
            if norm < tol {
                return Ok((y, it));
            }
            if it == max_iter {
                return Err(Error::NotConverged { iterations: it, residual: norm });
            }
            let mut g = DVector::zeros(n + 1);
            g.rows_mut(0, n).copy_from(&r);
            g[n] = arc;
            y -= solve_checked(Self::augmented(&jx, &rmu, t), &g)?;
        }
        Err(Error::NotConverged { iterations: max_iter, residual: f64::NAN })
    }
}

fn point(sys: &Restricted, y: &DVector<f64>, fold: bool) -> BranchPoint {
    let solution = sys.solution(y);
    BranchPoint { param: y[sys.dim()], norm: solution.norm(), solution, stable: None, fold }
}

/// Distance from `p` to the segment `[a, b]`.
fn segment_distance(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Follows the solution branch through `start` in `parameter` over `[lower, upper]` by
/// pseudo-arclength continuation.
///
/// Steps are halved when the corrector fails and grow by `control.grow` (capped at the
/// initial step) after quick convergence. Folds, where the parameter component of the
/// tangent changes sign, are bisected in arclength until the parameter is pinned to `1e-9`
/// and inserted as flagged points. A branch that comes back through its start point is
/// closed there. Continuation runs in the even subspace when the damping is fixed at zero,
/// the drive amplitude is the parameter and the start is even.
pub fn continue_branch(
    start: &FourierSolution,
    params: &ModelParams,
    parameter: Parameter,
    range: (f64, f64),
    control: StepControl,
) -> Result<BifurcationBranch> {
    params.validate()?;
    let (lower, upper) = (range.0.min(range.1), range.0.max(range.1));
    let mu0 = params.get(parameter);
    if !(lower <= mu0 && mu0 <= upper) {
        return Err(Error::InvalidParameter(format!(
            "start value {parameter} = {mu0} lies outside [{lower}, {upper}]"
        )));
    }
    if !(control.initial > 0.0 && control.min > 0.0 && control.grow >= 1.0) {
        return Err(Error::InvalidParameter("step control needs positive steps and grow ≥ 1".into()));
    }
    let scale = start.norm().max(1.0);
    let even = parameter == Parameter::Delta && params.gamma == 0.0 && start.max_sine() <= 1e-12 * scale;
    if parameter == Parameter::Delta || params.delta != 0.0 {
        check_commensurate(start.period, &params.with(Parameter::Delta, 1.0))?;
    }
    let subspace = if even { Subspace::Even } else { Subspace::Full };
    let opts = NewtonOptions { tol: control.tol, max_iter: 50, check_truncation: false, subspace };
    let first = newton_solve(start, params, opts)?.solution;

    let modes = start.modes();
    let (rows, cols) = if even { even_indices(modes) } else { ((0..2 * modes).collect(), (0..2 * modes).collect()) };
    let sys = Restricted { sys: Collocation::new(start.period, modes), base: *params, parameter, even, rows, cols };
    let n = sys.dim();
    let full0 = first.to_vector();
    let mut y0 = DVector::zeros(n + 1);
    for (k, &c) in sys.cols.iter().enumerate() {
        y0[k] = full0[c];
    }
    y0[n] = mu0;

    let mut branch = BifurcationBranch {
        parameter,
        params: *params,
        points: vec![point(&sys, &y0, false)],
        folds: Vec::new(),
        termination: Termination::SinglePoint,
        even: sys.even,
    };
    if lower == upper {
        return Ok(branch);
    }

    // Initial tangent: the kernel direction of [R_x R_μ], oriented by `increasing`.
    let mut seed = DVector::zeros(n + 1);
    seed[n] = 1.0;
    let mut t = sys.tangent(&y0, &seed)?;
    if (t[n] > 0.0) != control.increasing {
        t = -t;
    }
    let mut y = y0.clone();
    let mut ds = control.initial;
    let mut travelled = 0.0;
    loop {
        if branch.points.len() >= control.max_points {
            branch.termination = Termination::MaxPoints;
            break;
        }
        let (y_new, iterations) = match sys.correct(&y, &t, ds, control.tol, control.max_iter) {
            Ok(v) => v,
            Err(_) => {
                ds *= 0.5;
                if ds < control.min {
                    branch.termination = Termination::StepUnderflow { param: y[n] };
                    break;
                }
                continue;
            }
        };
        let t_new = match sys.tangent(&y_new, &t) {
            Ok(v) => v,
            Err(_) => {
                ds *= 0.5;
                if ds < control.min {
                    branch.termination = Termination::StepUnderflow { param: y[n] };
                    break;
                }
                continue;
            }
        };
        if y_new[n] < lower || y_new[n] > upper {
            let edge = y_new[n].clamp(lower, upper);
            let f = (edge - y[n]) / (y_new[n] - y[n]);
            if let Ok(y_edge) = sys.pin(&(&y + (&y_new - &y) * f), edge, control.tol, control.max_iter) {
                if y_edge != y {
                    branch.points.push(point(&sys, &y_edge, false));
                }
            }
            branch.termination = Termination::RangeEnd;
            break;
        }
        if t_new[n] * t[n] < 0.0 {
            let (yf, _) = locate_fold(&sys, &y, &t, ds, control)?;
            let p = point(&sys, &yf, true);
            branch.folds.push(Fold { param: p.param, norm: p.norm, index: branch.points.len() });
            branch.points.push(p);
        }
        travelled += ds;
        if travelled > 4.0 * control.initial && segment_distance(&y0, &y, &y_new) < 0.1 * ds {
            branch.points.push(point(&sys, &y0, false));
            branch.termination = Termination::ClosedLoop;
            break;
        }
        branch.points.push(point(&sys, &y_new, false));
        y = y_new;
        t = t_new;
        if iterations <= 3 {
            ds = (ds * control.grow).min(control.initial);
        }
    }
    Ok(branch)
}

/// Bisects the arclength between `y` (tangent `t`) and the next accepted point at `ds`
/// for the sign change of the tangent's parameter component.
fn locate_fold(
    sys: &Restricted,
    y: &DVector<f64>,
    t: &DVector<f64>,
    ds: f64,
    control: StepControl,
) -> Result<(DVector<f64>, f64)> {
    let n = sys.dim();
    let sign0 = t[n] > 0.0;
    let (mut lo, mut hi) = (0.0, ds);
    let (mut y_lo, mut y_hi) = (y.clone(), sys.correct(y, t, ds, control.tol, control.max_iter)?.0);
    for _ in 0..200 {
        if (y_hi[n] - y_lo[n]).abs() < 1e-9 || hi - lo < 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (ym, _) = sys.correct(y, t, mid, control.tol, control.max_iter)?;
        let tm = sys.tangent(&ym, t)?;
        if (tm[n] > 0.0) == sign0 {
            lo = mid;
            y_lo = ym;
        } else {
            hi = mid;
            y_hi = ym;
        }
    }
    // The turning point is the extreme parameter value of the bracket.
    let far = if sign0 { y_lo[n] >= y_hi[n] } else { y_lo[n] <= y_hi[n] };
    Ok(if far { (y_lo, lo) } else { (y_hi, hi) })
}
