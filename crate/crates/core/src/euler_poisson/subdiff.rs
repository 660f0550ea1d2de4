use crate::error::{Error, Result};
use crate::initial_data::DiscreteMeasure;

/// Three-valued sign with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(sgn * μ)(x) = Σ mᵢ sgn(x - xᵢ)`.
pub fn sgn_convolve(mu: &DiscreteMeasure, x: f64) -> f64 {
    mu.atoms().map(|(xi, mi)| mi * sgn(x - xi)).sum()
}

/// Slack of the subdifferential inequality
///
/// `∬ ½|x - y + g(x) - g(y)| dμdμ ≥ ∬ ½|x - y| dμdμ + ∫ (sgn*μ) g dμ`,
///
/// i.e. left side minus right side. Double sums run over unordered pairs
/// (diagonal terms vanish); the linear term uses the symmetrized form
/// `Σ_{i<j} mᵢ mⱼ sgn(xᵢ - xⱼ)(gᵢ - gⱼ)`, so a constant `g` gives exactly 0.
pub fn check_subdiff(mu: &DiscreteMeasure, g: &[f64]) -> Result<f64> {
    if g.len() != mu.len() {
        return Err(Error::Argument(alloc::format!(
            "{} test values for {} atoms",
            g.len(),
            mu.len()
        )));
    }
    let xs = mu.positions();
    let ms = mu.masses();
    let mut lhs = 0.0;
    let mut quadratic = 0.0;
    let mut linear = 0.0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let w = ms[i] * ms[j];
            let d = xs[i] - xs[j];
            let dg = g[i] - g[j];
            lhs += w * (d + dg).abs();
            quadratic += w * d.abs();
            linear += w * sgn(d) * dg;
        }
    }
    Ok(lhs - quadratic - linear)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn three() -> DiscreteMeasure {
        let t = 1.0 / 3.0;
        DiscreteMeasure::from_atoms(vec![-1.0, 0.0, 1.0], vec![t, t, 1.0 - 2.0 * t]).unwrap()
    }

    #[test]
    fn sgn_convolution_examples() {
        assert_eq!(sgn_convolve(&DiscreteMeasure::dirac(0.7).unwrap(), 0.7), 0.0);
        assert!(sgn_convolve(&three(), 0.0).abs() < 1e-16);
        assert!((sgn_convolve(&three(), 1.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_or_zero_test_function() {
        let mu = three();
        assert_eq!(check_subdiff(&mu, &[0.0; 3]).unwrap(), 0.0);
        assert_eq!(check_subdiff(&mu, &[2.5; 3]).unwrap(), 0.0);
        assert!(check_subdiff(&mu, &[1.0]).is_err());
    }

    /// Full double sums with `sgn_convolve` for the linear term.
    fn oracle_slack(mu: &DiscreteMeasure, g: &[f64]) -> f64 {
        let (xs, ms) = (mu.positions(), mu.masses());
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                lhs += 0.5 * ms[i] * ms[j] * (xs[i] - xs[j] + g[i] - g[j]).abs();
                rhs += 0.5 * ms[i] * ms[j] * (xs[i] - xs[j]).abs();
            }
            rhs += ms[i] * sgn_convolve(mu, xs[i]) * g[i];
        }
        lhs - rhs
    }

    #[test]
    fn matches_double_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(1..=16);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let ms: Vec<f64> = raw.iter().map(|m| m / s).collect();
            let Ok(mu) = DiscreteMeasure::from_atoms(xs, ms) else { continue };
            let g: Vec<f64> = (0..mu.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let fast = check_subdiff(&mu, &g).unwrap();
            let slow = oracle_slack(&mu, &g);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
            assert!(fast >= -1e-12);
        }
    }
}
