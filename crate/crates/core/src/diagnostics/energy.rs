use alloc::vec::Vec;

use super::{grid_states, quadrature_estimate, snapshot_nodes, CheckRecord, ToleranceBudget};
use crate::error::Result;
use crate::math::{compensated_sum, theta, theta_prime};
use crate::potential::Interaction;
use crate::trajectory::{ClusterView, TrajectoryMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

pub(crate) fn energy_of<I: Interaction + ?Sized>(p: &I, clusters: &[ClusterView]) -> Energy {
    let kinetic = 0.5 * compensated_sum(clusters.iter().map(|c| c.mass * c.velocity * c.velocity));
    let w0 = p.w(0.0);
    let diagonal = clusters.iter().map(|c| 0.5 * c.mass * c.mass * w0);
    let off = clusters.iter().enumerate().flat_map(|(k, a)| {
        clusters[k + 1..].iter().map(move |b| a.mass * b.mass * p.w(a.position - b.position))
    });
    let potential = compensated_sum(diagonal.chain(off));
    Energy { kinetic, potential, total: kinetic + potential }
}

/// `E(t)`: kinetic `½ Σ M v²` plus potential `½ Σ_{k,l} M_k M_l W(γ_k - γ_l)`,
/// using right limits at events.
pub fn energy<I: Interaction + ?Sized>(tm: &TrajectoryMap, p: &I, t: f64) -> Result<Energy> {
    Ok(energy_of(p, &tm.clusters_at(t)?))
}

/// `E(t) ≤ E(s) + tol` for all grid times `s ≤ t`, with both one-sided
/// energies compared at event times.
pub fn check_energy_monotone<I: Interaction + ?Sized>(
    tm: &TrajectoryMap,
    p: &I,
    grid: &[f64],
    tol: f64,
) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new("energy", tol);
    let mut lowest = f64::INFINITY;
    for node in grid_states(tm, grid)? {
        let e = energy_of(p, &node.clusters).total;
        lowest = lowest.min(e);
        rec.observe(lowest - e, node.time);
    }
    Ok(rec.finish())
}

/// The `ϑ`-bounds on kinetic energy:
/// `∫₀ᵗ Σ m γ̇² ≤ K ϑ(t)` (trapezoid on the snapshot grid) and
/// `Σ m γ̇(t)² ≤ K ϑ'(t)`, with `K = Σ m v₀² + ½ Σ Σ m m W'(xᵢ - xⱼ)²`.
///
/// `tol` covers integrator error; a quadrature term estimated from the data
/// is added to it in the returned record.
pub fn check_kinetic_bound<I: Interaction + ?Sized>(
    tm: &TrajectoryMap,
    p: &I,
    grid: &[f64],
    tol: f64,
) -> Result<CheckRecord> {
    let c = p.semiconvexity();
    let atoms = tm.atoms();
    let (x, m, v0) = (atoms.positions(), atoms.masses(), tm.initial_velocities());
    let kin0 = compensated_sum(m.iter().zip(v0).map(|(m, v)| m * v * v));
    let cross = compensated_sum((0..x.len()).flat_map(|i| {
        (i + 1..x.len()).map(move |j| {
            let w = p.w_prime(x[i] - x[j]);
            m[i] * m[j] * w * w
        })
    }));
    let k_const = kin0 + cross;

    let twice_kinetic = |cl: &[ClusterView]| compensated_sum(cl.iter().map(|c| c.mass * c.velocity * c.velocity));
    let nodes = snapshot_nodes(tm, grid)?;
    let mut cumulative = Vec::with_capacity(nodes.len());
    let mut pieces: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut acc = 0.0;
    let mut prev: Option<(usize, f64)> = None;
    for (k, node) in nodes.iter().enumerate() {
        let f = twice_kinetic(&node.clusters);
        if let Some((j, fp)) = prev {
            if nodes[j].smooth_to(node) {
                acc += 0.5 * (node.time - nodes[j].time) * (f + fp);
                pieces.last_mut().unwrap().push((node.time, f));
            } else {
                pieces.push(alloc::vec![(node.time, f)]);
            }
        } else {
            pieces.push(alloc::vec![(node.time, f)]);
        }
        cumulative.push((node.time, acc));
        prev = Some((k, f));
    }
    let quad = ToleranceBudget::QUADRATURE_FACTOR * quadrature_estimate(&pieces, tm.last_time());
    let mut rec = CheckRecord::new("kinetic", tol + quad);

    let mut cursor = 0;
    for node in grid_states(tm, grid)? {
        let t = node.time;
        while cursor + 1 < cumulative.len() && cumulative[cursor + 1].0 <= t {
            cursor += 1;
        }
        let integral = cumulative[cursor].1;
        rec.observe(k_const * theta(t, c)? - integral, t);
        rec.observe(k_const * theta_prime(t, c)? - twice_kinetic(&node.clusters), t);
    }
    Ok(rec.finish())
}
