use alloc::vec::Vec;

use super::{cluster_forces, CheckRecord};
use crate::error::{Error, Result};
use crate::math::hermite;
use crate::potential::Interaction;
use crate::trajectory::{ClusterView, FrameKind, TrajectoryMap};

/// Flow-equation residual at one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowResidual {
    pub time: f64,
    pub kind: FrameKind,
    pub residual: f64,
    /// `t` is an event time, so the velocities are one-sided limits.
    pub one_sided: bool,
}

/// Walks all frames, integrating `(W' * ρ_τ)(X(xᵢ, τ))` per atom with
/// Simpson's rule (Hermite midpoints) between frames, and hands each frame's
/// per-cluster defects `M_k v_k - Σ_{i∈k} mᵢ (v₀ᵢ - ∫₀ᵗ Fᵢ)` to `visit`.
fn walk_defects<I, F>(tm: &TrajectoryMap, p: &I, mut visit: F) -> Result<()>
where
    I: Interaction + ?Sized,
    F: FnMut(usize, &[ClusterView], &[f64]) -> Result<bool>,
{
    let m = tm.atoms().masses();
    let v0 = tm.initial_velocities();
    let mut integral = alloc::vec![0.0; tm.atom_count()];
    let frames = tm.frames();
    let mut prev: Option<(Vec<ClusterView>, Vec<f64>)> = None;
    for k in 0..frames.len() {
        let clusters = tm.frame_clusters(k);
        let forces = cluster_forces(p, &clusters);
        if let Some((pc, pf)) = &prev {
            let h = frames[k].time - frames[k - 1].time;
            if h > 0.0 {
                if frames[k].ids != frames[k - 1].ids {
                    return Err(Error::Invariant(alloc::format!(
                        "layout changes between frames {} and {k} without an event",
                        k - 1
                    )));
                }
                let mid: Vec<ClusterView> = pc
                    .iter()
                    .zip(&clusters)
                    .map(|(a, b)| {
                        let (position, velocity) =
                            hermite(a.position, a.velocity, b.position, b.velocity, h, 0.5);
                        ClusterView { position, velocity, ..a.clone() }
                    })
                    .collect();
                let fm = cluster_forces(p, &mid);
                for (j, c) in clusters.iter().enumerate() {
                    let inc = h / 6.0 * (pf[j] + 4.0 * fm[j] + forces[j]);
                    integral[c.members.clone()].iter_mut().for_each(|v| *v += inc);
                }
            }
        }
        let defects: Vec<f64> = clusters
            .iter()
            .map(|c| {
                let predicted: f64 = c.members.clone().map(|i| m[i] * (v0[i] - integral[i])).sum();
                c.mass * c.velocity - predicted
            })
            .collect();
        if !visit(k, &clusters, &defects)? {
            break;
        }
        prev = Some((clusters, forces));
    }
    Ok(())
}

fn basis_residual(clusters: &[ClusterView], defects: &[f64]) -> f64 {
    let constant: f64 = defects.iter().sum();
    let linear: f64 = clusters.iter().zip(defects).map(|(c, d)| c.position * d).sum();
    defects.iter().fold(constant.abs().max(linear.abs()), |a, d| a.max(d.abs()))
}

/// `|Σ m g(X) γ̇(t+) - Σ m g(X)(v₀ - ∫₀ᵗ (W' * ρ_τ)(X(τ)) dτ)|`, maximised
/// over the test functions `tests`. `t` must be a stored frame time; at an
/// event the right limit is used and the result is flagged one-sided.
pub fn flow_equation_residual<I: Interaction + ?Sized>(
    tm: &TrajectoryMap,
    p: &I,
    t: f64,
    tests: &[&dyn Fn(f64) -> f64],
) -> Result<FlowResidual> {
    let frames = tm.frames();
    let end = frames.partition_point(|f| f.time <= t);
    if end == 0 || frames[end - 1].time != t {
        return Err(Error::Argument(alloc::format!("t = {t} is not a stored frame time")));
    }
    let target = end - 1;
    let mut out = None;
    walk_defects(tm, p, |k, clusters, defects| {
        if k == target {
            let residual = tests.iter().fold(0.0f64, |acc, g| {
                let s: f64 = clusters.iter().zip(defects).map(|(c, d)| g(c.position) * d).sum();
                acc.max(s.abs())
            });
            out = Some(FlowResidual {
                time: t,
                kind: frames[k].kind,
                residual,
                one_sided: tm.is_event_time(t),
            });
            return Ok(false);
        }
        Ok(true)
    })?;
    out.ok_or_else(|| Error::Invariant("flow residual target frame not visited".into()))
}

/// Residuals for the test basis `{1, id, cluster indicators}` at every
/// snapshot frame.
pub fn flow_basis_residuals<I: Interaction + ?Sized>(tm: &TrajectoryMap, p: &I) -> Result<Vec<FlowResidual>> {
    let frames = tm.frames();
    let mut out = Vec::new();
    walk_defects(tm, p, |k, clusters, defects| {
        if frames[k].kind.is_snapshot() {
            out.push(FlowResidual {
                time: frames[k].time,
                kind: frames[k].kind,
                residual: basis_residual(clusters, defects),
                one_sided: tm.is_event_time(frames[k].time),
            });
        }
        Ok(true)
    })?;
    Ok(out)
}

/// Basis flow-equation residuals at every snapshot frame, as a check with
/// slack `-residual`.
pub fn check_flow_equation<I: Interaction + ?Sized>(tm: &TrajectoryMap, p: &I, tol: f64) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new("flow", tol);
    for r in flow_basis_residuals(tm, p)? {
        rec.observe(0.0 - r.residual, r.time);
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{simulate, DiscreteMeasure, InitialVelocity, Potential, SolverOptions};
    use alloc::vec;

    #[test]
    fn zero_at_start_and_small_after() {
        let rho = DiscreteMeasure::from_atoms(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let v = InitialVelocity::interpolating(&[0.0, 1.0], &[1.0, -1.0]).unwrap();
        let opts = SolverOptions { output_times: vec![0.25, 0.75], ..Default::default() };
        let p = Potential::zero();
        let tm = simulate(&rho, &v, &p, 1.0, &opts).unwrap();
        let one = |_: f64| 1.0;
        let id = |x: f64| x;
        let r0 = flow_equation_residual(&tm, &p, 0.0, &[&one, &id]).unwrap();
        assert_eq!(r0.residual, 0.0);
        let r = flow_equation_residual(&tm, &p, 0.75, &[&one, &id]).unwrap();
        assert!(r.residual <= 1e-12);
        let te = tm.event_times()[0];
        assert!(flow_equation_residual(&tm, &p, te, &[&id]).unwrap().one_sided);
        assert!(flow_equation_residual(&tm, &p, 0.3, &[&id]).is_err());
        assert!(check_flow_equation(&tm, &p, 1e-12).unwrap().pass);
    }

    #[test]
    fn harmonic_basis_residual() {
        let rho = DiscreteMeasure::from_atoms(vec![-1.0, 0.2, 1.0], vec![0.3, 0.3, 0.4]).unwrap();
        let v = InitialVelocity::interpolating(&[-1.0, 0.2, 1.0], &[0.5, 0.0, -0.3]).unwrap();
        let p = Potential::quadratic(1.0).unwrap();
        let opts = SolverOptions { output_times: vec![0.5, 1.0, 1.5, 2.0], ..Default::default() };
        let tm = simulate(&rho, &v, &p, 2.5, &opts).unwrap();
        let worst = flow_basis_residuals(&tm, &p).unwrap().iter().fold(0.0f64, |a, r| a.max(r.residual));
        assert!(worst <= 1e-9, "worst residual {worst}");
    }
}
