use alloc::format;
use alloc::vec::Vec;

use crate::error::{finite, Error, Result};

/// Piecewise-linear initial velocity `v₀`, constant beyond its breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialVelocity {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl InitialVelocity {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::Validation(format!(
                "velocity table needs matching nonempty breakpoints/values (got {} and {})",
                breakpoints.len(),
                values.len()
            )));
        }
        for (&b, &v) in breakpoints.iter().zip(&values) {
            finite("velocity breakpoint", b)?;
            finite("velocity value", v)?;
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("velocity breakpoints must be strictly increasing".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(v: f64) -> Result<Self> {
        Self::new(alloc::vec![0.0], alloc::vec![v])
    }

    /// The piecewise-linear interpolant through `(xᵢ, vᵢ)`. Duplicate
    /// positions are collapsed to their mean value.
    pub fn interpolating(positions: &[f64], values: &[f64]) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::Argument("positions and values differ in length".into()));
        }
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
        let mut xs: Vec<f64> = Vec::new();
        let mut vs: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for i in order {
            if xs.last() == Some(&positions[i]) {
                *vs.last_mut().unwrap() += values[i];
                *counts.last_mut().unwrap() += 1.0;
            } else {
                xs.push(positions[i]);
                vs.push(values[i]);
                counts.push(1.0);
            }
        }
        for (v, n) in vs.iter_mut().zip(&counts) {
            *v /= n;
        }
        Self::new(xs, vs)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.breakpoints.len();
        if x <= self.breakpoints[0] {
            return self.values[0];
        }
        if x >= self.breakpoints[n - 1] {
            return self.values[n - 1];
        }
        let k = self.breakpoints.partition_point(|&b| b <= x) - 1;
        let (x0, x1) = (self.breakpoints[k], self.breakpoints[k + 1]);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// `∫_a^b |v₀'|`, exact for the piecewise-linear profile.
    pub fn total_variation(&self, a: f64, b: f64) -> Result<f64> {
        finite("variation bound", a)?;
        finite("variation bound", b)?;
        if a > b {
            return Err(Error::Argument(format!("total variation needs a <= b (a = {a}, b = {b})")));
        }
        let mut tv = 0.0;
        for k in 0..self.breakpoints.len().saturating_sub(1) {
            let (x0, x1) = (self.breakpoints[k], self.breakpoints[k + 1]);
            let lo = a.max(x0);
            let hi = b.min(x1);
            if hi <= lo {
                continue;
            }
            let jump = (self.values[k + 1] - self.values[k]).abs();
            if lo == x0 && hi == x1 {
                tv += jump;
            } else {
                tv += jump * ((hi - lo) / (x1 - x0));
            }
        }
        Ok(tv)
    }

    /// Modulus `ω(r) = sup{ ∫_a^{a+r} |v₀'| : a ∈ ℝ }`.
    ///
    /// The windowed variation is piecewise linear in `a` with kinks where
    /// either window end crosses a breakpoint, so the supremum is attained
    /// with one end on a breakpoint.
    pub fn modulus(&self, r: f64) -> Result<f64> {
        finite("modulus window", r)?;
        if r < 0.0 {
            return Err(Error::Argument(format!("modulus window must be nonnegative, got {r}")));
        }
        let mut best: f64 = 0.0;
        for &b in &self.breakpoints {
            best = best.max(self.total_variation(b, b + r)?);
            best = best.max(self.total_variation(b - r, b)?);
        }
        Ok(best)
    }
}
