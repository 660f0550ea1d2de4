//! Interaction potentials `W` with their derivative and semiconvexity constant.
//!
//! Every potential here is even, has a derivative growing at most linearly
//! and makes `W(x) + (c/2)x²` convex for its stored `c`. The constructors
//! enforce those properties; the evaluation methods assume them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{finite, Error, Result};

/// Pairwise interaction as seen by the solver and the diagnostics.
///
/// Implemented by [`Potential`] and by the non-smooth
/// [`AbsPotential`](crate::euler_poisson::AbsPotential) of the Euler-Poisson model.
pub trait Interaction {
    /// `W(x)`.
    fn w(&self, x: f64) -> f64;
    /// `W'(x)`; odd, so `W'(0) = 0`.
    fn w_prime(&self, x: f64) -> f64;
    /// The semiconvexity constant `c` used by every time-dependent bound.
    fn semiconvexity(&self) -> f64;
    /// Short label for reports and provenance.
    fn label(&self) -> String;
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// `W(x) = (a/2) x²`.
    Quadratic { curvature: f64 },
    /// `W(x) = (x² + ε²)^{1/2}`.
    SmoothAbs { epsilon: f64 },
    Custom(TabulatedPotential),
}

/// `W` and `W'` sampled on `0 = x₀ < x₁ < … < x_n`, extended to negative
/// arguments by evenness.
///
/// Between nodes `W` is the cubic Hermite interpolant of the `(W, W')`
/// samples and `W'` its exact derivative. Past the last node `W'` continues
/// linearly with the slope of the last interval, which keeps the growth
/// linear and the pair `(W, W')` consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    nodes: Vec<f64>,
    w: Vec<f64>,
    w_prime: Vec<f64>,
    tail_slope: f64,
}

impl TabulatedPotential {
    pub fn new(nodes: Vec<f64>, w: Vec<f64>, w_prime: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != w.len() || nodes.len() != w_prime.len() {
            return Err(Error::Validation(format!(
                "tabulated potential needs at least two nodes and equal lengths (got {}, {}, {})",
                nodes.len(),
                w.len(),
                w_prime.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Validation(String::from(
                "tabulated potential nodes must start at x = 0",
            )));
        }
        for (i, pair) in nodes.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(Error::Validation(format!(
                    "tabulated potential nodes not strictly increasing at index {}",
                    i + 1
                )));
            }
        }
        for &v in nodes.iter().chain(&w).chain(&w_prime) {
            finite("tabulated potential entry", v)?;
        }
        if w_prime[0].abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "W'(0) = {} but an even potential needs W'(0) = 0",
                w_prime[0]
            )));
        }
        let n = nodes.len();
        let tail_slope = (w_prime[n - 1] - w_prime[n - 2]) / (nodes[n - 1] - nodes[n - 2]);
        let mut w_prime = w_prime;
        w_prime[0] = 0.0;
        Ok(Self { nodes, w, w_prime, tail_slope })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.w_prime
    }

    /// `(W(r), W'(r))` for `r ≥ 0`.
    fn eval_nonneg(&self, r: f64) -> (f64, f64) {
        let n = self.nodes.len();
        let last = self.nodes[n - 1];
        if r >= last {
            let d = r - last;
            let wp = self.w_prime[n - 1] + self.tail_slope * d;
            let w = self.w[n - 1] + self.w_prime[n - 1] * d + 0.5 * self.tail_slope * d * d;
            return (w, wp);
        }
        let k = self.nodes.partition_point(|&x| x <= r).saturating_sub(1).min(n - 2);
        let h = self.nodes[k + 1] - self.nodes[k];
        let theta = (r - self.nodes[k]) / h;
        crate::math::hermite(
            self.w[k],
            self.w_prime[k],
            self.w[k + 1],
            self.w_prime[k + 1],
            h,
            theta,
        )
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let (w, wp) = self.eval_nonneg(x.abs());
        if x < 0.0 {
            (w, -wp)
        } else {
            (w, wp)
        }
    }

    /// Sample points used to validate convexity and estimate growth:
    /// every node, four interior points per interval, and a stretch of the
    /// linear tail, mirrored to negative arguments.
    fn sample_points(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut pos = Vec::with_capacity(5 * n + 8);
        for k in 0..n - 1 {
            let a = self.nodes[k];
            let h = self.nodes[k + 1] - a;
            for j in 0..5 {
                pos.push(a + h * j as f64 / 5.0);
            }
        }
        let last = self.nodes[n - 1];
        let span = last.max(1.0);
        for j in 0..=8 {
            pos.push(last + span * j as f64 / 4.0);
        }
        let mut all: Vec<f64> = pos.iter().rev().filter(|&&x| x > 0.0).map(|&x| -x).collect();
        all.extend(pos);
        all
    }
}

/// An interaction potential with its semiconvexity constant `c` and a
/// linear growth constant `K` with `|W'(x)| ≤ K (1 + |x|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    semiconvexity: f64,
    growth: f64,
}

impl Potential {
    pub fn zero() -> Self {
        Self { kind: PotentialKind::Zero, semiconvexity: 0.0, growth: 0.0 }
    }

    pub fn quadratic(curvature: f64) -> Result<Self> {
        finite("quadratic curvature", curvature)?;
        if curvature < 0.0 {
            return Err(Error::Domain { what: "quadratic curvature", value: curvature });
        }
        Ok(Self {
            kind: PotentialKind::Quadratic { curvature },
            semiconvexity: 0.0,
            growth: curvature,
        })
    }

    pub fn smooth_abs(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Domain { what: "smoothing length epsilon", value: epsilon });
        }
        Ok(Self {
            kind: PotentialKind::SmoothAbs { epsilon },
            semiconvexity: 0.0,
            growth: 1.0,
        })
    }

    /// Tabulated potential with a user-supplied semiconvexity constant.
    ///
    /// Fails if `W + (c/2)x²` has a sampled second difference below `-tol`.
    pub fn custom(table: TabulatedPotential, c: f64) -> Result<Self> {
        finite("semiconvexity constant", c)?;
        if c < 0.0 {
            return Err(Error::Domain { what: "semiconvexity constant", value: c });
        }
        let xs = table.sample_points();
        let shifted: Vec<f64> = xs.iter().map(|&x| table.eval(x).0 + 0.5 * c * x * x).collect();
        let scale = shifted.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-8 * scale;
        for i in 1..xs.len() - 1 {
            let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
            let s0 = (shifted[i] - shifted[i - 1]) / (x1 - x0);
            let s1 = (shifted[i + 1] - shifted[i]) / (x2 - x1);
            let second = 2.0 * (s1 - s0) / (x2 - x0);
            if second < -tol {
                return Err(Error::Validation(format!(
                    "W + (c/2)x² with c = {c} is not convex near x = {x1} (second difference {second})"
                )));
            }
        }
        let growth = xs
            .iter()
            .map(|&x| table.eval(x).1.abs() / (1.0 + x.abs()))
            .fold(table.tail_slope.abs(), f64::max);
        Ok(Self { kind: PotentialKind::Custom(table), semiconvexity: c, growth })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }

    pub fn semiconvexity_constant(&self) -> f64 {
        self.semiconvexity
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth
    }

    /// `W(x)`, rejecting non-finite input.
    pub fn eval_w(&self, x: f64) -> Result<f64> {
        finite("potential argument", x)?;
        Ok(self.w(x))
    }

    /// `W'(x)`, rejecting non-finite input.
    pub fn eval_w_prime(&self, x: f64) -> Result<f64> {
        finite("potential argument", x)?;
        Ok(self.w_prime(x))
    }
}

impl Interaction for Potential {
    #[inline]
    fn w(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Quadratic { curvature } => 0.5 * curvature * x * x,
            PotentialKind::SmoothAbs { epsilon } => libm::sqrt(x * x + epsilon * epsilon),
            PotentialKind::Custom(table) => table.eval(x).0,
        }
    }

    #[inline]
    fn w_prime(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Quadratic { curvature } => curvature * x,
            PotentialKind::SmoothAbs { epsilon } => x / libm::sqrt(x * x + epsilon * epsilon),
            PotentialKind::Custom(table) => table.eval(x).1,
        }
    }

    fn semiconvexity(&self) -> f64 {
        self.semiconvexity
    }

    fn label(&self) -> String {
        match &self.kind {
            PotentialKind::Zero => String::from("zero"),
            PotentialKind::Quadratic { curvature } => format!("quadratic(a={curvature})"),
            PotentialKind::SmoothAbs { epsilon } => format!("smooth_abs(epsilon={epsilon})"),
            PotentialKind::Custom(t) => format!("custom({} nodes, c={})", t.nodes.len(), self.semiconvexity),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn smooth_abs_values() {
        let p = Potential::smooth_abs(1.0).unwrap();
        assert_eq!(p.eval_w(0.0).unwrap(), 1.0);
        assert_eq!(p.eval_w_prime(0.0).unwrap(), 0.0);
        let q = Potential::smooth_abs(0.5).unwrap();
        // (1.44 + 0.25)^{1/2} = 1.3
        assert!((q.eval_w(1.2).unwrap() - 1.3).abs() < 1e-15);
        assert!((q.eval_w_prime(1.2).unwrap() - 1.2 / 1.3).abs() < 1e-15);
        assert!((q.eval_w_prime(1.2).unwrap() - 0.923_076_923_076_923).abs() < 1e-14);
    }

    #[test]
    fn zero_and_quadratic() {
        let z = Potential::zero();
        assert_eq!(z.eval_w(5.0).unwrap(), 0.0);
        assert_eq!(z.semiconvexity_constant(), 0.0);
        let q = Potential::quadratic(1.0).unwrap();
        assert_eq!(q.eval_w_prime(-2.0).unwrap(), -2.0);
        assert_eq!(q.eval_w(2.0).unwrap(), 2.0);
        assert_eq!(q.semiconvexity_constant(), 0.0);
        assert_eq!(Potential::smooth_abs(1.0).unwrap().semiconvexity_constant(), 0.0);
    }

    #[test]
    fn domain_errors() {
        let p = Potential::smooth_abs(1.0).unwrap();
        assert!(matches!(p.eval_w(f64::NAN), Err(Error::Domain { .. })));
        assert!(matches!(p.eval_w_prime(f64::INFINITY), Err(Error::Domain { .. })));
        assert!(Potential::smooth_abs(0.0).is_err());
        assert!(Potential::smooth_abs(-1.0).is_err());
        assert!(Potential::quadratic(-1.0).is_err());
    }

    fn concave_table() -> TabulatedPotential {
        let nodes: Vec<f64> = (0..=20).map(|k| k as f64 * 0.25).collect();
        let w = nodes.iter().map(|x| -0.5 * x * x).collect();
        let wp = nodes.iter().map(|x| -x).collect();
        TabulatedPotential::new(nodes, w, wp).unwrap()
    }

    #[test]
    fn custom_concave_accepts_matching_c() {
        let p = Potential::custom(concave_table(), 1.0).unwrap();
        assert_eq!(p.semiconvexity_constant(), 1.0);
        assert!((p.eval_w(1.3).unwrap() + 0.5 * 1.69).abs() < 1e-12);
        assert!((p.eval_w_prime(-1.3).unwrap() - 1.3).abs() < 1e-12);
        // beyond the table: linear continuation of W'
        assert!((p.eval_w_prime(7.0).unwrap() + 7.0).abs() < 1e-12);
        assert!(p.growth_constant() >= 1.0);
    }

    #[test]
    fn custom_rejects_too_small_c() {
        assert!(matches!(Potential::custom(concave_table(), 0.5), Err(Error::Validation(_))));
    }

    #[test]
    fn custom_rejects_bad_tables() {
        assert!(TabulatedPotential::new(vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(TabulatedPotential::new(vec![0.1, 1.0], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(TabulatedPotential::new(vec![0.0, 1.0], vec![0.0; 2], vec![0.5, 1.0]).is_err());
        assert!(TabulatedPotential::new(vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    fn builtins() -> Vec<Potential> {
        vec![
            Potential::zero(),
            Potential::quadratic(1.7).unwrap(),
            Potential::smooth_abs(0.3).unwrap(),
            Potential::custom(concave_table(), 1.0).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn even_w_odd_derivative(x in -50.0f64..50.0) {
            for p in builtins() {
                prop_assert_eq!(p.w(x), p.w(-x));
                prop_assert_eq!(p.w_prime(x), -p.w_prime(-x));
            }
        }

        #[test]
        fn linear_growth(x in -1e3f64..1e3) {
            for p in builtins() {
                prop_assert!(p.w_prime(x).abs() <= p.growth_constant() * (1.0 + x.abs()) * (1.0 + 1e-12));
            }
        }

        #[test]
        fn smooth_abs_sandwich(x in -10.0f64..10.0, eps in 1e-3f64..2.0) {
            let p = Potential::smooth_abs(eps).unwrap();
            let w = p.w(x);
            prop_assert!(x.abs() <= w);
            prop_assert!(w <= x.abs() + eps + 1e-15);
            prop_assert!(p.w_prime(x).abs() <= 1.0);
        }

        #[test]
        fn shifted_second_differences_nonnegative(x in -20.0f64..20.0, h in 1e-3f64..1.0) {
            for p in builtins() {
                let c = p.semiconvexity_constant();
                let f = |y: f64| p.w(y) + 0.5 * c * y * y;
                let second = f(x + h) - 2.0 * f(x) + f(x - h);
                prop_assert!(second >= -1e-9 * (1.0 + f(x).abs()));
            }
        }
    }

    #[test]
    fn smooth_abs_derivative_tends_to_sign() {
        for &x in &[-2.0, -0.3, 0.05, 1.0] {
            let mut prev_gap = f64::INFINITY;
            for k in 0..20 {
                let eps = libm::pow(2.0, -(k as f64));
                let gap = (Potential::smooth_abs(eps).unwrap().w_prime(x) - f64::signum(x)).abs();
                assert!(gap <= prev_gap);
                prev_gap = gap;
            }
            assert!(prev_gap < 1e-6);
        }
    }
}
