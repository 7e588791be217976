//! Independent reference computations used to check the main routines.
//!
//! These deliberately share no code with the production paths: quadrature is adaptive
//! Simpson (not Gauss–Kronrod), ODEs use fixed-step RK4 with Richardson extrapolation,
//! and roots come from plain bisection.

/// Adaptive Simpson quadrature with Richardson correction. Splits until the local
/// estimate is below `tol` (split with the interval), up to a recursion depth of 50.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Simpson over consecutive panels `[x_i, x_{i+1}]`, each with tolerance `tol`.
pub fn simpson_panels<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> f64 {
    points.windows(2).map(|w| simpson(&f, w[0], w[1], tol)).sum()
}

fn rk4_fixed<F>(f: &F, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let add = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &add(&y, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &add(&y, &k2, 0.5 * h));
        let k4 = f(t + h, &add(&y, &k3, h));
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`, doubling the RK4 step count until two
/// successive Richardson-extrapolated results agree to `tol` (max-norm).
pub fn ode<F>(f: F, y0: &[f64], t0: f64, t1: f64, tol: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let mut steps = 16;
    let mut coarse = rk4_fixed(&f, y0, t0, t1, steps);
    let mut previous: Option<Vec<f64>> = None;
    loop {
        steps *= 2;
        let fine = rk4_fixed(&f, y0, t0, t1, steps);
        let extrapolated: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| f + (f - c) / 15.0).collect();
        if let Some(prev) = &previous {
            let diff = prev.iter().zip(&extrapolated).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if diff < tol || steps >= 1 << 22 {
                return extrapolated;
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to an interval width of `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    if flo == 0.0 {
        return Some(lo);
    }
    if flo.signum() == f(hi).signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Period of `U'' + U − βU² = 0` started at rest from `u0 > 0` by shooting: integrate
/// with RK4 at step `h` until `U'` returns to zero from above for the second time
/// (minimum, then maximum), locating each crossing by re-integrating the last step with
/// a bisected step length.
pub fn shooting_period(beta: f64, u0: f64, h: f64) -> f64 {
    let rhs = |s: [f64; 2]| [s[1], -s[0] + beta * s[0] * s[0]];
    let step = |s: [f64; 2], h: f64| {
        let k1 = rhs(s);
        let k2 = rhs([s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([s[0] + h * k3[0], s[1] + h * k3[1]]);
        [
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };
    let mut s = [u0, 0.0];
    let mut t = 0.0;
    let mut crossings = 0;
    // Leave the starting rest point before looking for sign changes.
    s = step(s, h);
    t += h;
    loop {
        let next = step(s, h);
        if next[1] == 0.0 || next[1].signum() != s[1].signum() {
            crossings += 1;
            if crossings == 2 {
                let dt = bisect(|d| step(s, d)[1], 0.0, h, 1e-15).unwrap_or(h);
                return t + dt;
            }
        }
        s = next;
        t += h;
    }
}
