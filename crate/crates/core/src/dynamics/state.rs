use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::initial_data::{DiscreteMeasure, InitialVelocity};
use crate::math::compensated_sum;

/// Identifier of a cluster. Initial atoms get ids `0..N`; each merge mints
/// the next unused id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterId(pub usize);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A group of atoms moving together. Ordering is preserved by the dynamics,
/// so the members of a cluster are always a contiguous range of atom indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: ClusterId,
    pub members: Range<usize>,
    pub mass: f64,
    pub position: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub time: f64,
    /// Ordered by strictly increasing position.
    pub clusters: Vec<Cluster>,
    pub next_id: usize,
}

impl SimState {
    /// One cluster per atom, with velocities `v₀(xᵢ)`.
    pub fn from_measure(rho0: &DiscreteMeasure, v0: &InitialVelocity) -> Self {
        let clusters: Vec<Cluster> = rho0
            .atoms()
            .enumerate()
            .map(|(i, (x, m))| Cluster {
                id: ClusterId(i),
                members: i..i + 1,
                mass: m,
                position: x,
                velocity: v0.eval(x),
            })
            .collect();
        let next_id = clusters.len();
        Self { time: 0.0, clusters, next_id }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.position).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.mass).collect()
    }

    pub fn velocities(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.velocity).collect()
    }

    /// Smallest adjacent gap and the index of its left cluster.
    pub fn min_gap(&self) -> Option<(usize, f64)> {
        self.clusters
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k, w[1].position - w[0].position))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn momentum(&self) -> f64 {
        compensated_sum(self.clusters.iter().map(|c| c.mass * c.velocity))
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * compensated_sum(self.clusters.iter().map(|c| c.mass * c.velocity * c.velocity))
    }

    pub fn is_finite(&self) -> bool {
        self.clusters.iter().all(|c| c.position.is_finite() && c.velocity.is_finite())
    }
}

/// A perfectly inelastic collision of adjacent clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeEvent {
    pub time: f64,
    pub position: f64,
    /// Colliding clusters, left to right.
    pub participants: Vec<ClusterId>,
    pub result: ClusterId,
    pub masses: Vec<f64>,
    /// Left-limit velocities `γ̇(t-)` of the participants.
    pub pre_velocities: Vec<f64>,
    /// Right-limit velocity `γ̇(t+)` of the merged cluster.
    pub post_velocity: f64,
    /// Smallest participant gap at the event (≤ gap tolerance, may be negative).
    pub gap_residual: f64,
}

impl MergeEvent {
    pub fn mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn momentum_before(&self) -> f64 {
        compensated_sum(self.masses.iter().zip(&self.pre_velocities).map(|(m, v)| m * v))
    }

    pub fn kinetic_before(&self) -> f64 {
        0.5 * compensated_sum(self.masses.iter().zip(&self.pre_velocities).map(|(m, v)| m * v * v))
    }

    pub fn kinetic_after(&self) -> f64 {
        0.5 * self.mass() * self.post_velocity * self.post_velocity
    }
}

/// Merges the adjacent clusters `participants` into one.
pub fn merge(state: &SimState, participants: &[ClusterId]) -> Result<(SimState, MergeEvent)> {
    if participants.len() < 2 {
        return Err(Error::Argument("a merge needs at least two clusters".into()));
    }
    let mut idx = participants
        .iter()
        .map(|id| {
            state
                .clusters
                .iter()
                .position(|c| c.id == *id)
                .ok_or_else(|| Error::Invariant(format!("cluster {id} is not live")))
        })
        .collect::<Result<Vec<usize>>>()?;
    idx.sort_unstable();
    if idx.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Invariant(format!(
            "merge participants {participants:?} are not adjacent"
        )));
    }
    let range = idx[0]..idx[idx.len() - 1] + 1;
    let (merged, event) = merge_range(state, range);
    Ok((merged, event))
}

fn merge_range(state: &SimState, range: Range<usize>) -> (SimState, MergeEvent) {
    let group = &state.clusters[range.clone()];
    let mass: f64 = group.iter().map(|c| c.mass).sum();
    let position = compensated_sum(group.iter().map(|c| c.mass * c.position)) / mass;
    let velocity = compensated_sum(group.iter().map(|c| c.mass * c.velocity)) / mass;
    let gap_residual = group
        .windows(2)
        .map(|w| w[1].position - w[0].position)
        .fold(f64::INFINITY, f64::min);
    let id = ClusterId(state.next_id);
    let merged = Cluster {
        id,
        members: group[0].members.start..group[group.len() - 1].members.end,
        mass,
        position,
        velocity,
    };
    let event = MergeEvent {
        time: state.time,
        position,
        participants: group.iter().map(|c| c.id).collect(),
        result: id,
        masses: group.iter().map(|c| c.mass).collect(),
        pre_velocities: group.iter().map(|c| c.velocity).collect(),
        post_velocity: velocity,
        gap_residual,
    };
    let mut clusters = Vec::with_capacity(state.clusters.len() - range.len() + 1);
    clusters.extend_from_slice(&state.clusters[..range.start]);
    clusters.push(merged);
    clusters.extend_from_slice(&state.clusters[range.end..]);
    (SimState { time: state.time, clusters, next_id: state.next_id + 1 }, event)
}

/// Merges every maximal run of clusters whose adjacent gaps are `<= gap_tol`,
/// rescanning until no such gap remains.
pub fn cascade_merges(state: SimState, gap_tol: f64) -> (SimState, Vec<MergeEvent>) {
    let mut state = state;
    let mut events = Vec::new();
    loop {
        let mut merged_any = false;
        let mut k = 0;
        while k + 1 < state.clusters.len() {
            let mut end = k;
            while end + 1 < state.clusters.len()
                && state.clusters[end + 1].position - state.clusters[end].position <= gap_tol
            {
                end += 1;
            }
            if end > k {
                let (next, event) = merge_range(&state, k..end + 1);
                state = next;
                events.push(event);
                merged_any = true;
            }
            k += 1;
        }
        if !merged_any {
            return (state, events);
        }
    }
}
