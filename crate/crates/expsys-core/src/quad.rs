//! Small quadrature toolbox: adaptive Simpson on an interval and the
//! periodic trapezoid rule on the circle with a refinement-based error
//! estimate.

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`. Handles `a > b` by sign convention; returns 0 for empty intervals.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -adaptive_simpson(f, b, a, tol);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol.max(1e-307), 52)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
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
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Result of a trapezoid evaluation refined once: `value` is the finer rule,
/// `error_estimate` the difference between the two refinement levels.
#[derive(Debug, Clone, Copy)]
pub struct TrapezoidEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub samples: usize,
}

/// Periodic trapezoid rule for `(1/(2*pi)) * 2*pi`-style integrals over
/// `[0, 2*pi)`: returns `(2*pi/n) * sum f(theta_j)` at `n` equispaced nodes.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: &F, n: usize) -> f64 {
    assert!(n > 0, "need at least one node");
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|j| f(j as f64 * h)).sum::<f64>() * h
}

/// Evaluate the periodic trapezoid rule at `n` and `2n` nodes; the coarse
/// value only serves the error estimate `|T_{2n} - T_n|`.
pub fn periodic_trapezoid_refined<F: Fn(f64) -> f64>(f: &F, n: usize) -> TrapezoidEstimate {
    let coarse = periodic_trapezoid(f, n);
    let fine = periodic_trapezoid(f, 2 * n);
    TrapezoidEstimate {
        value: fine,
        error_estimate: (fine - coarse).abs(),
        samples: 2 * n,
    }
}

/// Least-squares slope of `y` against `x`. Returns 0 for fewer than two
/// distinct abscissae.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
