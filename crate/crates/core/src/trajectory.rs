//! The trajectory map `X(y, t)` recovered from a simulation record.
//!
//! A [`TrajectoryMap`] stores every integrator frame. Queries between frames
//! use cubic Hermite interpolation of positions and velocities, which is
//! exact for the parabolic Euler-Poisson segments and matches RK4 accuracy
//! otherwise. At an event time the right limit is returned.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::dynamics::{ClusterId, MergeEvent, SimState};
use crate::error::{Error, Result};
use crate::initial_data::DiscreteMeasure;
use crate::math::{hermite, sinh_scaled};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    PressurelessEuler,
    EulerPoisson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub model: Model,
    pub interaction: String,
    /// Semiconvexity constant used by every time-dependent bound.
    pub semiconvexity: f64,
    pub gap_tol: f64,
    pub t_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Initial,
    Step,
    Output,
    /// Left limit at an event: clusters about to merge.
    PreEvent,
    /// Right limit at an event: merged clusters.
    PostEvent,
}

impl FrameKind {
    /// Frames on the snapshot grid (output times and both sides of events).
    pub fn is_snapshot(self) -> bool {
        !matches!(self, FrameKind::Step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub kind: FrameKind,
    pub ids: Vec<ClusterId>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl Frame {
    pub(crate) fn from_state(state: &SimState, kind: FrameKind) -> Self {
        Self {
            time: state.time,
            kind,
            ids: state.clusters.iter().map(|c| c.id).collect(),
            positions: state.positions(),
            velocities: state.velocities(),
        }
    }
}

/// Lifetime and membership of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRecord {
    pub id: ClusterId,
    pub members: Range<usize>,
    pub mass: f64,
    pub born: f64,
    pub absorbed: Option<f64>,
}

/// A live cluster at some time.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterView {
    pub id: ClusterId,
    pub members: Range<usize>,
    pub mass: f64,
    pub position: f64,
    pub velocity: f64,
}

/// `v(·, t)` on the support of `ρ_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub time: f64,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub masses: Vec<f64>,
    /// `t` is an event time and the velocities are right limits.
    pub right_limit_at_event: bool,
}

/// Nondecreasing piecewise-linear map through knots, extended linearly past
/// both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap {
    pub knots_x: Vec<f64>,
    pub knots_y: Vec<f64>,
    pub left_slope: f64,
    pub right_slope: f64,
}

impl MonotoneMap {
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots_x.len();
        if x <= self.knots_x[0] {
            return self.knots_y[0] + self.left_slope * (x - self.knots_x[0]);
        }
        if x >= self.knots_x[n - 1] {
            return self.knots_y[n - 1] + self.right_slope * (x - self.knots_x[n - 1]);
        }
        let k = self.knots_x.partition_point(|&k| k <= x) - 1;
        if self.knots_x[k] == x {
            return self.knots_y[k];
        }
        let (x0, x1) = (self.knots_x[k], self.knots_x[k + 1]);
        let (y0, y1) = (self.knots_y[k], self.knots_y[k + 1]);
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }

    /// Largest slope over all pieces, including the extensions.
    pub fn lipschitz(&self) -> f64 {
        let inner = self
            .knots_x
            .windows(2)
            .zip(self.knots_y.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .fold(0.0, f64::max);
        inner.max(self.left_slope).max(self.right_slope)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMap {
    atoms: DiscreteMeasure,
    initial_velocities: Vec<f64>,
    clusters: Vec<ClusterRecord>,
    events: Vec<MergeEvent>,
    frames: Vec<Frame>,
    horizon: f64,
    provenance: Provenance,
}

/// Position of a query time in the frame record.
#[derive(Debug, Clone, Copy)]
enum Located {
    Exact(usize),
    Between(usize, f64),
}

impl TrajectoryMap {
    /// Assembles and validates a map from stored parts (used when reading
    /// exported trajectories back).
    pub fn from_parts(
        atoms: DiscreteMeasure,
        initial_velocities: Vec<f64>,
        clusters: Vec<ClusterRecord>,
        events: Vec<MergeEvent>,
        frames: Vec<Frame>,
        horizon: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        let map = Self { atoms, initial_velocities, clusters, events, frames, horizon, provenance };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        let n = self.atoms.len();
        if self.initial_velocities.len() != n {
            return Err(Error::Validation(format!(
                "{} atoms but {} initial velocities",
                n,
                self.initial_velocities.len()
            )));
        }
        if self.frames.is_empty() || self.frames[0].time != 0.0 {
            return Err(Error::Validation("trajectory must start with a frame at t = 0".into()));
        }
        for (k, rec) in self.clusters.iter().enumerate() {
            if rec.id.0 != k {
                return Err(Error::Validation(format!("cluster record {k} carries id {}", rec.id)));
            }
            if rec.members.is_empty() || rec.members.end > n {
                return Err(Error::Validation(format!("cluster {k} has invalid members {:?}", rec.members)));
            }
        }
        let mut prev_time = 0.0;
        for (k, f) in self.frames.iter().enumerate() {
            if f.time < prev_time || !f.time.is_finite() {
                return Err(Error::Validation(format!("frame {k} at t = {} goes back in time", f.time)));
            }
            prev_time = f.time;
            if f.ids.len() != f.positions.len() || f.ids.len() != f.velocities.len() {
                return Err(Error::Validation(format!("frame {k} has ragged columns")));
            }
            let mut next_member = 0;
            for (j, id) in f.ids.iter().enumerate() {
                let rec = self.clusters.get(id.0).ok_or_else(|| {
                    Error::Validation(format!("frame {k} refers to unknown cluster {id}"))
                })?;
                if rec.members.start != next_member {
                    return Err(Error::Validation(format!(
                        "frame {k}: clusters do not partition the atoms in order"
                    )));
                }
                next_member = rec.members.end;
                if j > 0 && f.positions[j] < f.positions[j - 1] {
                    return Err(Error::Validation(format!("frame {k}: cluster ordering violated")));
                }
            }
            if next_member != n {
                return Err(Error::Validation(format!("frame {k} does not cover every atom")));
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> &DiscreteMeasure {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn initial_velocities(&self) -> &[f64] {
        &self.initial_velocities
    }

    pub fn clusters(&self) -> &[ClusterRecord] {
        &self.clusters
    }

    pub fn cluster(&self, id: ClusterId) -> &ClusterRecord {
        &self.clusters[id.0]
    }

    pub fn events(&self) -> &[MergeEvent] {
        &self.events
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Time of the last stored frame (the horizon unless truncated).
    pub fn last_time(&self) -> f64 {
        self.frames.last().map_or(0.0, |f| f.time)
    }

    /// Distinct times of the snapshot grid, ascending.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for f in self.frames.iter().filter(|f| f.kind.is_snapshot()) {
            if out.last() != Some(&f.time) {
                out.push(f.time);
            }
        }
        out
    }

    pub fn event_times(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for e in &self.events {
            if out.last() != Some(&e.time) {
                out.push(e.time);
            }
        }
        out
    }

    pub fn is_event_time(&self, t: f64) -> bool {
        self.events.iter().any(|e| e.time == t)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let last = self.last_time();
        if t.is_finite() && (0.0..=last).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfRange { time: t, horizon: last })
        }
    }

    fn locate(&self, t: f64) -> Result<Located> {
        self.check_time(t)?;
        let k = self.frames.partition_point(|f| f.time <= t) - 1;
        if self.frames[k].time == t {
            return Ok(Located::Exact(k));
        }
        let (a, b) = (&self.frames[k], &self.frames[k + 1]);
        if a.ids != b.ids {
            return Err(Error::Invariant(format!(
                "frames {k} and {} bracket t = {t} but differ in layout",
                k + 1
            )));
        }
        Ok(Located::Between(k, (t - a.time) / (b.time - a.time)))
    }

    /// Cluster states of frame `k`.
    pub fn frame_clusters(&self, k: usize) -> Vec<ClusterView> {
        let f = &self.frames[k];
        f.ids
            .iter()
            .zip(f.positions.iter().zip(&f.velocities))
            .map(|(id, (&position, &velocity))| {
                let rec = &self.clusters[id.0];
                ClusterView { id: *id, members: rec.members.clone(), mass: rec.mass, position, velocity }
            })
            .collect()
    }

    /// Live clusters at `t`, ordered by position (right limits at events).
    pub fn clusters_at(&self, t: f64) -> Result<Vec<ClusterView>> {
        match self.locate(t)? {
            Located::Exact(k) => Ok(self.frame_clusters(k)),
            Located::Between(k, theta) => {
                let (a, b) = (&self.frames[k], &self.frames[k + 1]);
                let h = b.time - a.time;
                Ok(a.ids
                    .iter()
                    .enumerate()
                    .map(|(j, id)| {
                        let (position, velocity) = hermite(
                            a.positions[j],
                            a.velocities[j],
                            b.positions[j],
                            b.velocities[j],
                            h,
                            theta,
                        );
                        let rec = &self.clusters[id.0];
                        ClusterView { id: *id, members: rec.members.clone(), mass: rec.mass, position, velocity }
                    })
                    .collect())
            }
        }
    }

    /// `X(xᵢ, t)` for every atom.
    pub fn atom_positions_at(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.atom_count()];
        for c in self.clusters_at(t)? {
            out[c.members].iter_mut().for_each(|x| *x = c.position);
        }
        Ok(out)
    }

    /// `γ̇ᵢ(t+)` for every atom.
    pub fn atom_velocities_at(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.atom_count()];
        for c in self.clusters_at(t)? {
            out[c.members].iter_mut().for_each(|v| *v = c.velocity);
        }
        Ok(out)
    }

    /// `X(xᵢ, t)`.
    pub fn eval_x(&self, atom: usize, t: f64) -> Result<f64> {
        if atom >= self.atom_count() {
            return Err(Error::Argument(format!(
                "atom index {atom} out of range ({} atoms)",
                self.atom_count()
            )));
        }
        self.clusters_at(t)?
            .into_iter()
            .find(|c| c.members.contains(&atom))
            .map(|c| c.position)
            .ok_or_else(|| Error::Invariant(format!("atom {atom} belongs to no live cluster")))
    }

    /// Monotone map `f_{t,s}` with `f(X(y, s)) = X(y, t)` on every atom,
    /// extended past the data with the nearest interior slope capped at
    /// `sinh(√c t)/sinh(√c s)`.
    pub fn flow_between(&self, s: f64, t: f64) -> Result<MonotoneMap> {
        if !(s > 0.0 && s <= t) {
            return Err(Error::Argument(format!("flow map needs 0 < s <= t (s = {s}, t = {t})")));
        }
        let at_s = self.clusters_at(s)?;
        let at_t = self.atom_positions_at(t)?;
        let mut knots_x: Vec<f64> = Vec::with_capacity(at_s.len());
        let mut knots_y: Vec<f64> = Vec::with_capacity(at_s.len());
        for c in &at_s {
            let y = at_t[c.members.start];
            if knots_x.last() == Some(&c.position) {
                continue;
            }
            knots_x.push(c.position);
            knots_y.push(y);
        }
        let c = self.provenance.semiconvexity;
        let cap = sinh_scaled(c, t) / sinh_scaled(c, s);
        let n = knots_x.len();
        let slope = |k: usize| (knots_y[k + 1] - knots_y[k]) / (knots_x[k + 1] - knots_x[k]);
        let (left_slope, right_slope) = if n < 2 {
            (0.0, 0.0)
        } else {
            (slope(0).clamp(0.0, cap), slope(n - 2).clamp(0.0, cap))
        };
        Ok(MonotoneMap { knots_x, knots_y, left_slope, right_slope })
    }

    /// `ρ_t = X(t)_# ρ₀`: one atom per live cluster.
    pub fn push_forward(&self, t: f64) -> Result<DiscreteMeasure> {
        let clusters = self.clusters_at(t)?;
        let (xs, ms) = clusters.iter().map(|c| (c.position, c.mass)).unzip();
        DiscreteMeasure::from_atoms(xs, ms)
    }

    /// `E_{ρ₀}[g | X(t)]` on atoms: the mass-weighted mean of `g` over each
    /// atom's cluster.
    pub fn conditional_expectation(&self, t: f64, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.atom_count() {
            return Err(Error::Argument(format!(
                "{} values for {} atoms",
                g.len(),
                self.atom_count()
            )));
        }
        let masses = self.atoms.masses();
        let mut out = vec![0.0; g.len()];
        for c in self.clusters_at(t)? {
            let range = c.members.clone();
            let mean = if range.len() == 1 {
                g[range.start]
            } else {
                let base = g[range.start];
                let num: f64 = range.clone().map(|i| masses[i] * (g[i] - base)).sum();
                let den: f64 = range.clone().map(|i| masses[i]).sum();
                base + num / den
            };
            out[range].iter_mut().for_each(|v| *v = mean);
        }
        Ok(out)
    }

    /// `v(·, t)` on `supp ρ_t`.
    pub fn velocity_field(&self, t: f64) -> Result<VelocityField> {
        let clusters = self.clusters_at(t)?;
        Ok(VelocityField {
            time: t,
            positions: clusters.iter().map(|c| c.position).collect(),
            velocities: clusters.iter().map(|c| c.velocity).collect(),
            masses: clusters.iter().map(|c| c.mass).collect(),
            right_limit_at_event: self.is_event_time(t),
        })
    }
}

/// Incremental construction of a [`TrajectoryMap`] during a simulation.
pub(crate) struct TrajectoryBuilder {
    map: TrajectoryMap,
}

impl TrajectoryBuilder {
    pub(crate) fn new(
        atoms: DiscreteMeasure,
        initial_velocities: Vec<f64>,
        horizon: f64,
        provenance: Provenance,
    ) -> Self {
        let clusters = atoms
            .masses()
            .iter()
            .enumerate()
            .map(|(i, &m)| ClusterRecord { id: ClusterId(i), members: i..i + 1, mass: m, born: 0.0, absorbed: None })
            .collect();
        Self {
            map: TrajectoryMap {
                atoms,
                initial_velocities,
                clusters,
                events: Vec::new(),
                frames: Vec::new(),
                horizon,
                provenance,
            },
        }
    }

    pub(crate) fn push(&mut self, state: &SimState, kind: FrameKind) {
        self.map.frames.push(Frame::from_state(state, kind));
    }

    pub(crate) fn last_frame_kind(&self) -> Option<FrameKind> {
        self.map.frames.last().map(|f| f.kind)
    }

    pub(crate) fn set_last_kind(&mut self, kind: FrameKind) {
        if let Some(f) = self.map.frames.last_mut() {
            f.kind = kind;
        }
    }

    pub(crate) fn record_events(&mut self, events: Vec<MergeEvent>) {
        for e in events {
            let mut start = usize::MAX;
            let mut end = 0;
            for id in &e.participants {
                let rec = &mut self.map.clusters[id.0];
                rec.absorbed = Some(e.time);
                start = start.min(rec.members.start);
                end = end.max(rec.members.end);
            }
            debug_assert_eq!(e.result.0, self.map.clusters.len());
            self.map.clusters.push(ClusterRecord {
                id: e.result,
                members: start..end,
                mass: e.mass(),
                born: e.time,
                absorbed: None,
            });
            self.map.events.push(e);
        }
    }

    pub(crate) fn finish(self) -> TrajectoryMap {
        self.map
    }
}
