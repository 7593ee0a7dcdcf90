//! Shared numerical kernels: Gauss-Legendre rules, adaptive Simpson
//! quadrature, a safeguarded Newton root finder and the standard normal
//! distribution functions.

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule mapped to (0, 1).
///
/// Nodes are found by Newton iteration on the Legendre polynomial, using the
/// Chebyshev-like initial guess; the recurrence evaluates P_n and P_n'.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2, "need at least two quadrature nodes");
    let mut rule = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for k in 0..m {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map from [-1, 1] to [0, 1]
        rule.push(((1.0 - x) / 2.0, w / 2.0));
        if 2 * (k + 1) <= n {
            rule.push(((1.0 + x) / 2.0, w / 2.0));
        }
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
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
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Solves `f(x) = target` for an increasing `f` on the bracket `[lo, hi]`.
///
/// Newton steps (via `fd` when supplied, secant otherwise) are kept inside the
/// bracket; any step that escapes falls back to bisection. Converges when the
/// residual drops below `ftol`.
pub fn solve_increasing<F, D>(
    f: F,
    fd: Option<D>,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    ftol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut flo = f(lo) - target;
    let mut fhi = f(hi) - target;
    if flo > ftol {
        return Err(Error::NoSolution(format!(
            "target {target} below f({lo}) = {}",
            flo + target
        )));
    }
    if fhi < -ftol {
        return Err(Error::NoSolution(format!(
            "target {target} above f({hi}) = {}",
            fhi + target
        )));
    }
    if flo >= -ftol {
        return Ok(lo);
    }
    if fhi <= ftol {
        return Ok(hi);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x) - target;
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        let slope = match &fd {
            Some(d) => d(x),
            None => (fhi - flo) / (hi - lo),
        };
        let mut next = x - fx / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        // stop once the step is below one ulp of the iterate
        if (next - x).abs() <= f64::EPSILON * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Standard normal CDF, accurate to roughly double precision (Hart's
/// rational approximation in the body, a continued-fraction tail).
pub fn norm_cdf(x: f64) -> f64 {
    let z = x.abs();
    let c = if z > 37.0 {
        0.0
    } else {
        let e = (-z * z / 2.0).exp();
        if z < 7.071_067_811_865_475 {
            let mut num = 3.52624965998911e-2 * z + 0.700383064443688;
            num = num * z + 6.37396220353165;
            num = num * z + 33.912866078383;
            num = num * z + 112.079291497871;
            num = num * z + 221.213596169931;
            num = num * z + 220.206867912376;
            let mut den = 8.83883476483184e-2 * z + 1.75566716318264;
            den = den * z + 16.064177579207;
            den = den * z + 86.7807322029461;
            den = den * z + 296.564248779674;
            den = den * z + 637.333633378831;
            den = den * z + 793.826512519948;
            den = den * z + 440.413735824752;
            e * num / den
        } else {
            let mut b = z + 0.65;
            b = z + 4.0 / b;
            b = z + 3.0 / b;
            b = z + 2.0 / b;
            b = z + 1.0 / b;
            e / (b * 2.506628274631)
        }
    };
    if x > 0.0 {
        1.0 - c
    } else {
        c
    }
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Newton polish against `norm_cdf`, leaving full double-precision accuracy.
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal quantile needs p in (0,1)");

    const A: [f64; 6] = [
        -39.6968302866538,
        220.946098424521,
        -275.928510446969,
        138.357751867269,
        -30.6647980661472,
        2.50662827745924,
    ];
    const B: [f64; 5] = [
        -54.4760987982241,
        161.585836858041,
        -155.698979859887,
        66.8013118877197,
        -13.2806815528857,
    ];
    const C: [f64; 6] = [
        -7.78489400243029e-3,
        -0.322396458041136,
        -2.40075827716184,
        -2.54973253934373,
        4.37466414146497,
        2.93816398269878,
    ];
    const D: [f64; 4] = [
        7.78469570904146e-3,
        0.32246712907004,
        2.445134137143,
        3.75440866190742,
    ];

    let x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 0.97575 {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    let d = norm_pdf(x);
    if d > 1e-300 {
        x - (norm_cdf(x) - p) / d
    } else {
        x
    }
}
