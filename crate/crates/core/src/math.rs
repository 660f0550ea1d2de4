//! Small numerical helpers shared across the solver and the diagnostics.
//!
//! All time-dependent constants are written in the scaled form
//! `sinh(√c t)/√c`, `cosh(√c t)`, `√c / tanh(√c t)` so that `c = 0` is the
//! continuous limit (`t`, `1`, `1/t`) rather than a special case callers
//! have to remember.

use crate::error::{Error, Result};
use alloc::format;

/// `sinh(√c t) / √c`, equal to `t` when `c = 0`.
pub fn sinh_scaled(c: f64, t: f64) -> f64 {
    if c <= 0.0 {
        return t;
    }
    let r = libm::sqrt(c);
    let x = r * t;
    if x.abs() < 1e-4 {
        // sinh(x)/r = t (1 + x²/6 + x⁴/120)
        let x2 = x * x;
        t * (1.0 + x2 / 6.0 * (1.0 + x2 / 20.0))
    } else {
        libm::sinh(x) / r
    }
}

/// `cosh(√c t)`, equal to `1` when `c = 0`.
pub fn cosh_factor(c: f64, t: f64) -> f64 {
    if c <= 0.0 {
        1.0
    } else {
        libm::cosh(libm::sqrt(c) * t)
    }
}

/// One-sided Lipschitz constant `√c / tanh(√c t)`, equal to `1/t` when `c = 0`.
pub fn oleinik_kappa(c: f64, t: f64) -> f64 {
    if c <= 0.0 {
        return 1.0 / t;
    }
    let r = libm::sqrt(c);
    r / libm::tanh(r * t)
}

/// `ϑ(t) = e^{(c+1)t²} ∫₀ᵗ e^{-(c+1)s²} ds`, evaluated with adaptive Simpson.
pub fn theta(t: f64, c: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain { what: "theta time", value: t });
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain { what: "semiconvexity constant", value: c });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let a = c + 1.0;
    let integral = adaptive_simpson(|s| libm::exp(-a * s * s), 0.0, t, 1e-14 * t, 48)?;
    Ok(libm::exp(a * t * t) * integral)
}

/// `ϑ'(t) = 2(c+1) t ϑ(t) + 1`.
pub fn theta_prime(t: f64, c: f64) -> Result<f64> {
    Ok(2.0 * (c + 1.0) * t * theta(t, c)? + 1.0)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, max_depth)
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
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "no convergence on [{a}, {b}] (error estimate {})",
            delta.abs() / 15.0
        )));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Inverse of the standard normal CDF (Acklam's rational approximation
/// polished with one Halley step against `erfc`).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain { what: "normal quantile level", value: p });
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(0.5 * x * x);
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Cubic Hermite interpolation of a path from endpoint positions and
/// velocities. Returns `(position, velocity)` at `theta ∈ [0, 1]`.
pub fn hermite(x0: f64, v0: f64, x1: f64, v1: f64, h: f64, theta: f64) -> (f64, f64) {
    let t = theta;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let pos = h00 * x0 + h10 * h * v0 + h01 * x1 + h11 * h * v1;
    let d00 = 6.0 * t2 - 6.0 * t;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = -6.0 * t2 + 6.0 * t;
    let d11 = 3.0 * t2 - 2.0 * t;
    let vel = if h > 0.0 {
        (d00 * x0 + d01 * x1) / h + d10 * v0 + d11 * v1
    } else {
        v0
    };
    (pos, vel)
}
