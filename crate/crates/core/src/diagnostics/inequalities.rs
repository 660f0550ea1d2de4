use alloc::vec::Vec;

use super::{grid_states, CheckRecord};
use crate::error::{Error, Result};
use crate::initial_data::InitialVelocity;
use crate::math::{cosh_factor, oleinik_kappa, sinh_scaled};
use crate::trajectory::TrajectoryMap;

/// Smallest sum over contiguous non-empty runs of `d`.
///
/// Pair quantities below are sums of per-gap terms between consecutive
/// atoms, so the worst pair is the worst run of gaps.
fn min_run_sum(d: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    let mut current = 0.0;
    for &x in d {
        current = if current < 0.0 { current + x } else { x };
        best = best.min(current);
    }
    best
}

fn atom_positions(tm: &TrajectoryMap, grid: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
    grid_states(tm, grid)?
        .into_iter()
        .map(|node| {
            let mut x = alloc::vec![0.0; tm.atom_count()];
            for c in &node.clusters {
                x[c.members.clone()].iter_mut().for_each(|v| *v = c.position);
            }
            Ok((node.time, x))
        })
        .collect()
}

fn gaps(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Quantitative sticky particle property: for every atom pair and grid times
/// `0 < s ≤ t`, `|X(y,t) - X(z,t)|/σ(t) ≤ |X(y,s) - X(z,s)|/σ(s) + tol` with
/// `σ(τ) = sinh(√c τ)/√c`.
pub fn check_qspp(tm: &TrajectoryMap, c: f64, grid: &[f64], tol: f64) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new("qspp", tol);
    let positive: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
    let states = atom_positions(tm, &positive)?;
    let ratios: Vec<(f64, Vec<f64>)> = states
        .iter()
        .map(|(t, x)| {
            let s = sinh_scaled(c, *t);
            (*t, gaps(x).into_iter().map(|g| g / s).collect())
        })
        .collect();
    if tm.atom_count() < 2 {
        return Ok(rec.finish());
    }
    for (i, (_, early)) in ratios.iter().enumerate() {
        for (t, late) in &ratios[i..] {
            let d: Vec<f64> = early.iter().zip(late).map(|(a, b)| a - b).collect();
            rec.observe(min_run_sum(&d), *t);
        }
    }
    Ok(rec.finish())
}

/// Stability: for atoms `z ≤ y` and grid times `t`,
/// `0 ≤ X(y,t) - X(z,t) ≤ cosh(√c t)(y - z) + σ(t) TV(v₀; [z, y]) + tol`.
pub fn check_stability(
    tm: &TrajectoryMap,
    v0: &InitialVelocity,
    c: f64,
    grid: &[f64],
    tol: f64,
) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new("stability", tol);
    let x0 = tm.atoms().positions();
    if x0.len() < 2 {
        return Ok(rec.finish());
    }
    let dx0 = gaps(x0);
    let tv = x0
        .windows(2)
        .map(|w| v0.total_variation(w[0], w[1]))
        .collect::<Result<Vec<f64>>>()?;
    for (t, x) in atom_positions(tm, grid)? {
        let g = gaps(&x);
        let (ch, sh) = (cosh_factor(c, t), sinh_scaled(c, t));
        let upper: Vec<f64> = (0..g.len()).map(|k| ch * dx0[k] + sh * tv[k] - g[k]).collect();
        rec.observe(min_run_sum(&g), t);
        rec.observe(min_run_sum(&upper), t);
    }
    Ok(rec.finish())
}

/// One-sided Lipschitz (entropy) bound: for cluster pairs at grid times
/// `t ≥ 10 t_tol`, `(v(x) - v(y))(x - y) ≤ κ(t)(x - y)² + tol` with
/// `κ(t) = √c / tanh(√c t)`.
pub fn check_oleinik(tm: &TrajectoryMap, c: f64, grid: &[f64], tol: f64) -> Result<CheckRecord> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain { what: "semiconvexity constant", value: c });
    }
    let mut rec = CheckRecord::new("oleinik", tol);
    let t_min = super::ToleranceBudget::oleinik_start(tm.provenance().t_tol);
    let times: Vec<f64> = grid.iter().copied().filter(|&t| t >= t_min && t > 0.0).collect();
    for node in grid_states(tm, &times)? {
        let kappa = oleinik_kappa(c, node.time);
        let cl = &node.clusters;
        for (k, a) in cl.iter().enumerate() {
            for b in &cl[k + 1..] {
                let dx = a.position - b.position;
                let lhs = (a.velocity - b.velocity) * dx;
                rec.observe(kappa * dx * dx - lhs, node.time);
            }
        }
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{simulate, DiscreteMeasure, Potential, SolverOptions};
    use alloc::vec;
    use proptest::prelude::*;

    fn free_streaming() -> (TrajectoryMap, InitialVelocity) {
        let rho = DiscreteMeasure::from_atoms(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let v = InitialVelocity::interpolating(&[0.0, 1.0], &[1.0, -1.0]).unwrap();
        let opts = SolverOptions { output_times: vec![0.25, 0.75], ..Default::default() };
        (simulate(&rho, &v, &Potential::zero(), 1.0, &opts).unwrap(), v)
    }

    #[test]
    fn free_streaming_qspp() {
        let (tm, _) = free_streaming();
        let rec = check_qspp(&tm, 0.0, &[0.25, 0.5, 0.75], 1e-12).unwrap();
        assert!(rec.pass);
        assert_eq!(rec.examined, 6);
    }

    #[test]
    fn free_streaming_stability() {
        let (tm, v) = free_streaming();
        let rec = check_stability(&tm, &v, 0.0, &[0.25], 0.0).unwrap();
        assert!(rec.pass);
        assert!((rec.worst_slack - 0.5).abs() < 1e-12);
        let rec = check_stability(&tm, &v, 0.0, &[0.0], 0.0).unwrap();
        assert!(rec.pass);
        assert_eq!(rec.worst_slack, 0.0);
    }

    #[test]
    fn free_streaming_oleinik() {
        let (tm, _) = free_streaming();
        let rec = check_oleinik(&tm, 0.0, &[0.25], 0.0).unwrap();
        assert!(rec.pass);
        assert!((rec.worst_slack - 2.0).abs() < 1e-12);
        let rec = check_oleinik(&tm, 0.0, &[0.75, 1.0], 0.0).unwrap();
        assert_eq!(rec.examined, 0);
        assert!(rec.pass);
    }

    #[test]
    fn single_atom_vacuous() {
        let rho = DiscreteMeasure::dirac(1.0).unwrap();
        let v = InitialVelocity::constant(-1.0).unwrap();
        let tm = simulate(&rho, &v, &Potential::zero(), 1.0, &SolverOptions::default()).unwrap();
        assert!(check_qspp(&tm, 0.0, &[0.5, 1.0], 0.0).unwrap().pass);
        assert!(check_stability(&tm, &v, 0.0, &[0.5, 1.0], 0.0).unwrap().pass);
        assert!(check_oleinik(&tm, 0.0, &[0.5, 1.0], 0.0).unwrap().pass);
    }

    fn brute_min_run(d: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..d.len() {
            for j in i + 1..=d.len() {
                best = best.min(d[i..j].iter().sum());
            }
        }
        best
    }

    proptest! {
        #[test]
        fn min_run_sum_matches_brute_force(d in prop::collection::vec(-5i32..5, 1..12)) {
            let d: Vec<f64> = d.into_iter().map(f64::from).collect();
            prop_assert_eq!(min_run_sum(&d), brute_min_run(&d));
        }

        #[test]
        fn checks_are_monotone_in_tol(tol in 0.0f64..1.0, extra in 0.0f64..1.0) {
            let (tm, v) = free_streaming();
            let grid = tm.snapshot_times();
            let a = check_stability(&tm, &v, 0.0, &grid, tol).unwrap();
            let b = check_stability(&tm, &v, 0.0, &grid, tol + extra).unwrap();
            prop_assert!(!a.pass || b.pass);
            let a = check_oleinik(&tm, 0.0, &grid, tol).unwrap();
            let b = check_oleinik(&tm, 0.0, &grid, tol + extra).unwrap();
            prop_assert!(!a.pass || b.pass);
        }
    }
}
