use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use super::simulate_ep;
use crate::dynamics::{simulate, SolverOptions};
use crate::error::{Error, Result};
use crate::initial_data::{DiscreteMeasure, InitialVelocity};
use crate::math::compensated_sum;
use crate::potential::Potential;
use crate::trajectory::TrajectoryMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationTolerances {
    /// Bound on the finest member's distance at the horizon.
    pub final_tol: f64,
    /// Allowed increase of `d_k(T)` from one `k` to the next.
    pub monotone_tol: f64,
}

impl Default for ContinuationTolerances {
    fn default() -> Self {
        Self { final_tol: 1e-3, monotone_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonReport {
    pub epsilons: Vec<f64>,
    pub times: Vec<f64>,
    /// `distances[k][j] = d_k(times[j])`.
    pub distances: Vec<Vec<f64>>,
    /// `d_k(T)` for each member.
    pub final_distances: Vec<f64>,
    /// Largest `d_{k+1}(T) - d_k(T)` (≤ 0 when monotone).
    pub worst_increase: f64,
    pub tolerances: ContinuationTolerances,
    pub pass: bool,
}

/// `ε_k = 2^{-k}` for `k = 0..=k_max`.
pub fn default_epsilons(k_max: u32) -> Vec<f64> {
    (0..=k_max).map(|k| libm::ldexp(1.0, -(k as i32))).collect()
}

/// Lagrangian `L²(ρ₀)` distance `(Σ mᵢ (X_a(xᵢ,t) - X_b(xᵢ,t))²)^{1/2}`.
pub fn lagrangian_distance(a: &TrajectoryMap, b: &TrajectoryMap, t: f64) -> Result<f64> {
    if a.atoms() != b.atoms() {
        return Err(Error::Argument("trajectory maps start from different atoms".into()));
    }
    let xa = a.atom_positions_at(t)?;
    let xb = b.atom_positions_at(t)?;
    let masses = a.atoms().masses();
    let sq = compensated_sum(masses.iter().zip(xa.iter().zip(&xb)).map(|(m, (p, q))| m * (p - q) * (p - q)));
    Ok(libm::sqrt(sq))
}

fn validate_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::Argument("empty epsilon sequence".into()));
    }
    for &e in epsilons {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::Domain { what: "smoothing length epsilon", value: e });
        }
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Argument("epsilon sequence must be strictly decreasing".into()));
    }
    Ok(())
}

/// Compares each smoothed run with the exact Euler-Poisson run on `times`.
pub fn epsilon_report(
    exact: &TrajectoryMap,
    members: &[TrajectoryMap],
    epsilons: &[f64],
    times: &[f64],
    tol: ContinuationTolerances,
) -> Result<EpsilonReport> {
    validate_epsilons(epsilons)?;
    if members.len() != epsilons.len() {
        return Err(Error::Argument(format!(
            "{} member runs for {} epsilons",
            members.len(),
            epsilons.len()
        )));
    }
    let distances = members
        .iter()
        .map(|m| times.iter().map(|&t| lagrangian_distance(m, exact, t)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let final_distances: Vec<f64> = distances.iter().map(|d| *d.last().unwrap_or(&0.0)).collect();
    let worst_increase = if final_distances.len() < 2 {
        0.0
    } else {
        final_distances.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    };
    let last = *final_distances.last().unwrap_or(&0.0);
    let pass = worst_increase <= tol.monotone_tol && last <= tol.final_tol;
    Ok(EpsilonReport {
        epsilons: epsilons.to_vec(),
        times: times.to_vec(),
        distances,
        final_distances,
        worst_increase,
        tolerances: tol,
        pass,
    })
}

/// Runs the smoothed dynamics with `W_ε` for every `ε` and measures the
/// distance to the exact Euler-Poisson trajectories on the output grid.
pub fn epsilon_continuation(
    rho0: &DiscreteMeasure,
    v0: &InitialVelocity,
    horizon: f64,
    epsilons: &[f64],
    opts: &SolverOptions,
    tol: ContinuationTolerances,
) -> Result<EpsilonReport> {
    validate_epsilons(epsilons)?;
    let exact = simulate_ep(rho0, v0, horizon, opts)?;
    let members = epsilons
        .iter()
        .enumerate()
        .map(|(index, &eps)| {
            Potential::smooth_abs(eps)
                .and_then(|p| simulate(rho0, v0, &p, horizon, opts))
                .map_err(|e| Error::Member { index, source: Box::new(e) })
        })
        .collect::<Result<Vec<TrajectoryMap>>>()?;
    let times = opts.output_grid(horizon)?;
    epsilon_report(&exact, &members, epsilons, &times, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn epsilon_schedule() {
        assert_eq!(default_epsilons(3), vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn rejects_zero_epsilon() {
        let rho = DiscreteMeasure::dirac(0.0).unwrap();
        let v = InitialVelocity::constant(0.0).unwrap();
        let r = epsilon_continuation(&rho, &v, 1.0, &[1.0, 0.0], &SolverOptions::default(), Default::default());
        assert!(matches!(r, Err(Error::Domain { .. })));
        let r = epsilon_continuation(&rho, &v, 1.0, &[0.5, 1.0], &SolverOptions::default(), Default::default());
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn single_atom_has_zero_distance() {
        let rho = DiscreteMeasure::dirac(0.3).unwrap();
        let v = InitialVelocity::constant(1.5).unwrap();
        let opts = SolverOptions { output_times: vec![0.5, 1.0, 1.5], ..Default::default() };
        let report = epsilon_continuation(&rho, &v, 2.0, &default_epsilons(4), &opts, Default::default()).unwrap();
        assert!(report.pass);
        for row in &report.distances {
            assert!(row.iter().all(|&d| d < 1e-12));
        }
    }
}
