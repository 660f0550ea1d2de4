use alloc::format;
use alloc::vec::Vec;

use super::DiscreteMeasure;
use crate::error::{finite, Error, Result};
use crate::math::normal_quantile;

/// A description of the initial mass distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    /// Already discrete; quantization leaves it unchanged.
    Atoms(DiscreteMeasure),
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, std_dev: f64 },
    /// Piecewise-linear CDF through `(x_k, F_k)` with `F_0 = 0`, `F_last = 1`.
    TabulatedCdf { x: Vec<f64>, cdf: Vec<f64> },
}

impl MeasureSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Atoms(_) => Ok(()),
            MeasureSpec::Uniform { a, b } => {
                finite("uniform bound", *a)?;
                finite("uniform bound", *b)?;
                if a < b {
                    Ok(())
                } else {
                    Err(Error::Validation(format!("uniform({a}, {b}) needs a < b")))
                }
            }
            MeasureSpec::Gaussian { mean, std_dev } => {
                finite("gaussian mean", *mean)?;
                finite("gaussian std_dev", *std_dev)?;
                if *std_dev > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Validation(format!("gaussian std_dev must be positive, got {std_dev}")))
                }
            }
            MeasureSpec::TabulatedCdf { x, cdf } => {
                if x.len() < 2 || x.len() != cdf.len() {
                    return Err(Error::Validation("tabulated CDF needs >= 2 matching points".into()));
                }
                for (&xi, &fi) in x.iter().zip(cdf) {
                    finite("CDF abscissa", xi)?;
                    finite("CDF value", fi)?;
                }
                if x.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Validation("CDF abscissae must be nondecreasing".into()));
                }
                if cdf.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Validation("CDF values are not monotone".into()));
                }
                if cdf[0].abs() > 1e-12 || (cdf[cdf.len() - 1] - 1.0).abs() > 1e-12 {
                    return Err(Error::Validation(format!(
                        "CDF must run from 0 to 1 (got {} .. {})",
                        cdf[0],
                        cdf[cdf.len() - 1]
                    )));
                }
                Ok(())
            }
        }
    }

    /// `F^{-1}(q)` for `q ∈ (0, 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain { what: "quantile level", value: q });
        }
        Ok(match self {
            MeasureSpec::Atoms(m) => m.quantile(q),
            MeasureSpec::Uniform { a, b } => a + (b - a) * q,
            MeasureSpec::Gaussian { mean, std_dev } => mean + std_dev * normal_quantile(q)?,
            MeasureSpec::TabulatedCdf { x, cdf } => {
                let k = cdf.partition_point(|&f| f < q);
                if k == 0 {
                    x[0]
                } else {
                    let k = k.min(x.len() - 1);
                    let (f0, f1) = (cdf[k - 1], cdf[k]);
                    x[k - 1] + (q - f0) / (f1 - f0) * (x[k] - x[k - 1])
                }
            }
        })
    }
}

/// Equal-mass quantile-midpoint quantization: `n` atoms at
/// `F^{-1}((k - ½)/n)`, each of mass `1/n`. Discrete specs are returned as is.
pub fn quantize(spec: &MeasureSpec, n: usize) -> Result<DiscreteMeasure> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Argument("quantization needs at least one atom".into()));
    }
    if let MeasureSpec::Atoms(m) = spec {
        return Ok(m.clone());
    }
    let nf = n as f64;
    let positions = (1..=n)
        .map(|k| spec.quantile((k as f64 - 0.5) / nf))
        .collect::<Result<Vec<f64>>>()?;
    let masses = alloc::vec![1.0 / nf; n];
    DiscreteMeasure::from_atoms(positions, masses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uniform_quantization() {
        let spec = MeasureSpec::Uniform { a: 0.0, b: 1.0 };
        let two = quantize(&spec, 2).unwrap();
        assert_eq!(two.positions(), &[0.25, 0.75]);
        assert_eq!(two.masses(), &[0.5, 0.5]);
        let one = quantize(&spec, 1).unwrap();
        assert_eq!(one.positions(), &[0.5]);
        assert_eq!(one.masses(), &[1.0]);
    }

    #[test]
    fn atoms_pass_through() {
        let m = DiscreteMeasure::from_atoms(vec![0.0, 2.0, 3.0], vec![0.2, 0.3, 0.5]).unwrap();
        for n in [1, 3, 100] {
            assert_eq!(quantize(&MeasureSpec::Atoms(m.clone()), n).unwrap(), m);
        }
    }

    #[test]
    fn masses_sum_to_one() {
        let spec = MeasureSpec::Gaussian { mean: 0.0, std_dev: 1.0 };
        for n in [1, 3, 7, 10, 64, 333, 1024] {
            let m = quantize(&spec, n).unwrap();
            assert_eq!(m.len(), n);
            assert!((m.total_mass() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn gaussian_is_symmetric() {
        let m = quantize(&MeasureSpec::Gaussian { mean: 2.0, std_dev: 0.5 }, 9).unwrap();
        assert_eq!(m.positions()[4], 2.0);
        assert!((m.positions()[0] - 2.0 + (m.positions()[8] - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn tabulated_cdf() {
        let spec = MeasureSpec::TabulatedCdf { x: vec![0.0, 1.0, 3.0], cdf: vec![0.0, 0.5, 1.0] };
        let m = quantize(&spec, 4).unwrap();
        assert_eq!(m.positions(), &[0.25, 0.75, 1.5, 2.5]);
        let bad = MeasureSpec::TabulatedCdf { x: vec![0.0, 1.0, 2.0], cdf: vec![0.0, 0.7, 1.0 - 0.5] };
        assert!(matches!(quantize(&bad, 4), Err(Error::Validation(_))));
        let short = MeasureSpec::TabulatedCdf { x: vec![0.0, 1.0], cdf: vec![0.0, 0.9] };
        assert!(quantize(&short, 4).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(quantize(&MeasureSpec::Uniform { a: 1.0, b: 1.0 }, 4).is_err());
        assert!(quantize(&MeasureSpec::Gaussian { mean: 0.0, std_dev: 0.0 }, 4).is_err());
        assert!(quantize(&MeasureSpec::Uniform { a: 0.0, b: 1.0 }, 0).is_err());
    }
}
