use alloc::format;
use alloc::vec::Vec;

use crate::error::{finite, Error, Result};
use crate::math::compensated_sum;

/// Tolerance on `|Σ mᵢ - 1|` for a probability measure.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A finitely supported probability measure `Σ mᵢ δ_{xᵢ}` with strictly
/// increasing, distinct atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    positions: Vec<f64>,
    masses: Vec<f64>,
    second_moment: f64,
}

impl DiscreteMeasure {
    /// Builds a measure from unsorted atoms. Atoms at identical positions are
    /// merged by summing their masses.
    pub fn from_atoms(positions: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if positions.len() != masses.len() {
            return Err(Error::Argument(format!(
                "{} positions but {} masses",
                positions.len(),
                masses.len()
            )));
        }
        if positions.is_empty() {
            return Err(Error::Validation("measure has no atoms".into()));
        }
        for (&x, &m) in positions.iter().zip(&masses) {
            finite("atom position", x)?;
            finite("atom mass", m)?;
            if m <= 0.0 {
                return Err(Error::Validation(format!("atom at {x} has nonpositive mass {m}")));
            }
        }
        let total = compensated_sum(masses.iter().copied());
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Validation(format!("masses sum to {total}, expected 1")));
        }

        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
        let mut xs: Vec<f64> = Vec::with_capacity(order.len());
        let mut ms: Vec<f64> = Vec::with_capacity(order.len());
        for i in order {
            match xs.last() {
                Some(&last) if last == positions[i] => *ms.last_mut().unwrap() += masses[i],
                _ => {
                    xs.push(positions[i]);
                    ms.push(masses[i]);
                }
            }
        }
        Ok(Self::from_sorted(xs, ms))
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::from_atoms(alloc::vec![x], alloc::vec![1.0])
    }

    /// Sorted, distinct, validated atoms.
    pub(crate) fn from_sorted(positions: Vec<f64>, masses: Vec<f64>) -> Self {
        let second_moment = compensated_sum(positions.iter().zip(&masses).map(|(x, m)| m * x * x));
        Self { positions, masses, second_moment }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.masses.iter().copied())
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.atoms().map(|(x, m)| m * x))
    }

    /// Support diameter `x_N - x_1`.
    pub fn diameter(&self) -> f64 {
        self.positions[self.positions.len() - 1] - self.positions[0]
    }

    /// Left-continuous quantile `F^{-1}(q) = inf{x : F(x) ≥ q}`.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for (x, m) in self.atoms() {
            acc += m;
            if acc >= q {
                return x;
            }
        }
        self.positions[self.positions.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sorts_and_merges_coincident_atoms() {
        let m = DiscreteMeasure::from_atoms(vec![1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(m.positions(), &[0.0, 1.0]);
        assert_eq!(m.masses(), &[0.5, 0.5]);
        assert_eq!(m.second_moment(), 0.5);
        assert_eq!(m.mean(), 0.5);
    }

    #[test]
    fn rejects_bad_masses() {
        assert!(matches!(
            DiscreteMeasure::from_atoms(vec![0.0, 1.0], vec![0.5, 0.6]),
            Err(Error::Validation(_))
        ));
        assert!(DiscreteMeasure::from_atoms(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(DiscreteMeasure::from_atoms(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::from_atoms(vec![f64::NAN], vec![1.0]).is_err());
        assert!(matches!(
            DiscreteMeasure::from_atoms(vec![0.0], vec![0.5, 0.5]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn quantile_is_left_continuous() {
        let m = DiscreteMeasure::from_atoms(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(m.quantile(0.25), 0.0);
        assert_eq!(m.quantile(0.5), 0.0);
        assert_eq!(m.quantile(0.75), 1.0);
    }
}
