//! Checks of the inequalities and identities satisfied by sticky-particle
//! trajectories, evaluated on a finished [`TrajectoryMap`].
//!
//! Every check returns a [`CheckRecord`] whose `worst_slack` is the most
//! negative margin `bound - observed` seen; a check passes exactly when
//! `worst_slack >= -tol`, so loosening `tol` never turns a pass into a failure.

mod energy;
mod flow;
mod inequalities;
mod wasserstein;
mod weak;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use energy::{check_energy_monotone, check_kinetic_bound, energy, Energy};
pub use flow::{check_flow_equation, flow_basis_residuals, flow_equation_residual, FlowResidual};
pub use inequalities::{check_oleinik, check_qspp, check_stability};
pub use wasserstein::wasserstein2;
pub use weak::{check_weak_form, weak_form_residual, BumpTestFunction, TestFunction, WeakResidual};

use crate::dynamics::ClusterId;
use crate::error::{Error, Result};
use crate::initial_data::InitialVelocity;
use crate::math::sinh_scaled;
use crate::potential::Interaction;
use crate::trajectory::{ClusterView, TrajectoryMap};

pub use crate::math::{theta, theta_prime};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    /// Number of (time, pair) combinations examined.
    pub examined: usize,
    /// Most negative `bound - observed`; `0` when nothing was examined.
    pub worst_slack: f64,
    /// Time at which the worst slack occurred.
    pub worst_time: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: &str, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            examined: 0,
            worst_slack: f64::INFINITY,
            worst_time: None,
            tol,
            pass: true,
        }
    }

    /// Records one margin `bound - observed` at time `t`.
    pub fn observe(&mut self, slack: f64, t: f64) {
        self.examined += 1;
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        if slack < self.worst_slack || self.worst_time.is_none() {
            self.worst_slack = slack;
            self.worst_time = Some(t);
        }
    }

    pub fn finish(mut self) -> Self {
        if self.examined == 0 {
            self.worst_slack = 0.0;
        }
        self.pass = self.worst_slack >= -self.tol;
        self
    }
}

/// All check records for one trajectory, with the hash of the configuration
/// that produced it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsReport {
    pub checks: Vec<CheckRecord>,
    pub config_hash: Option<String>,
}

impl DiagnosticsReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tolerances for every check, derived from the solver tolerances and the
/// scales of a particular trajectory.
///
/// Each tolerance has the form `INTEGRATOR_FACTOR * integrator * scale`,
/// plus `QUADRATURE_FACTOR * estimate` for checks that integrate in time on
/// the snapshot grid, where the estimate is `T Δt² max|f''| / 12` with `f''`
/// taken from divided differences of the integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceBudget {
    /// `max(gap_tol, t_tol * velocity_scale, 1e-12)`.
    pub integrator: f64,
    /// `1 + max |v|` over all frames.
    pub velocity_scale: f64,
    /// `1 + max |x|` over all frames.
    pub length_scale: f64,
    /// `1 + |E(0)| + 2 KE(0)`.
    pub energy_scale: f64,
    pub semiconvexity: f64,
    /// Smallest positive snapshot time.
    pub min_positive_time: f64,
    pub horizon: f64,
}

impl ToleranceBudget {
    pub const INTEGRATOR_FACTOR: f64 = 10.0;
    pub const QUADRATURE_FACTOR: f64 = 10.0;
    /// Absolute bound on flow-equation residuals.
    pub const FLOW_TOL: f64 = 1e-8;

    pub fn for_map<I: Interaction + ?Sized>(tm: &TrajectoryMap, p: &I) -> Result<Self> {
        let prov = tm.provenance();
        let mut vmax = 0.0f64;
        let mut xmax = 0.0f64;
        for f in tm.frames() {
            vmax = f.velocities.iter().fold(vmax, |m, v| m.max(v.abs()));
            xmax = f.positions.iter().fold(xmax, |m, x| m.max(x.abs()));
        }
        let velocity_scale = 1.0 + vmax;
        let e0 = energy(tm, p, 0.0)?;
        let integrator = prov.gap_tol.max(prov.t_tol * velocity_scale).max(1e-12);
        let min_positive_time =
            tm.snapshot_times().into_iter().find(|&t| t > 0.0).unwrap_or(tm.last_time());
        Ok(Self {
            integrator,
            velocity_scale,
            length_scale: 1.0 + xmax,
            energy_scale: 1.0 + e0.total.abs() + 2.0 * e0.kinetic,
            semiconvexity: p.semiconvexity(),
            min_positive_time,
            horizon: tm.last_time(),
        })
    }

    fn base(&self) -> f64 {
        Self::INTEGRATOR_FACTOR * self.integrator
    }

    pub fn energy(&self) -> f64 {
        self.base() * self.energy_scale * self.velocity_scale
    }

    /// Tolerance on `Σ m γ̇²` and its time integral, excluding quadrature.
    pub fn kinetic(&self) -> f64 {
        self.base() * self.energy_scale * self.velocity_scale * (1.0 + self.horizon)
    }

    /// Tolerance on the ratios `|X(y,t) - X(z,t)| / σ(t)` for `s ≥ s_min`.
    pub fn qspp(&self, s_min: f64) -> f64 {
        self.base() * self.length_scale / sinh_scaled(self.semiconvexity, s_min)
    }

    pub fn stability(&self) -> f64 {
        self.base() * self.length_scale
    }

    pub fn oleinik(&self) -> f64 {
        self.base() * self.velocity_scale * self.length_scale
    }

    pub fn weak(&self) -> f64 {
        self.base() * self.velocity_scale * self.velocity_scale * (1.0 + self.horizon)
    }

    /// Earliest time at which the Oleinik bound is checked.
    pub fn oleinik_start(t_tol: f64) -> f64 {
        10.0 * t_tol
    }
}

/// Named checks selectable in [`verify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    Energy,
    Kinetic,
    Qspp,
    Stability,
    Oleinik,
    Flow,
    Weak,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Energy,
        CheckKind::Kinetic,
        CheckKind::Qspp,
        CheckKind::Stability,
        CheckKind::Oleinik,
        CheckKind::Flow,
        CheckKind::Weak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Energy => "energy",
            CheckKind::Kinetic => "kinetic",
            CheckKind::Qspp => "qspp",
            CheckKind::Stability => "stability",
            CheckKind::Oleinik => "oleinik",
            CheckKind::Flow => "flow",
            CheckKind::Weak => "weak",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(alloc::format!("unknown check '{s}'")))
    }
}

/// Runs the selected checks on the snapshot grid of `tm` with the tolerances
/// of [`ToleranceBudget::for_map`].
pub fn verify<I: Interaction + ?Sized>(
    tm: &TrajectoryMap,
    p: &I,
    v0: &InitialVelocity,
    kinds: &[CheckKind],
) -> Result<DiagnosticsReport> {
    let budget = ToleranceBudget::for_map(tm, p)?;
    let grid = tm.snapshot_times();
    let c = p.semiconvexity();
    let mut checks = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let record = match kind {
            CheckKind::Energy => check_energy_monotone(tm, p, &grid, budget.energy())?,
            CheckKind::Kinetic => check_kinetic_bound(tm, p, &grid, budget.kinetic())?,
            CheckKind::Qspp => check_qspp(tm, c, &grid, budget.qspp(budget.min_positive_time))?,
            CheckKind::Stability => check_stability(tm, v0, c, &grid, budget.stability())?,
            CheckKind::Oleinik => check_oleinik(tm, c, &grid, budget.oleinik())?,
            CheckKind::Flow => check_flow_equation(tm, p, ToleranceBudget::FLOW_TOL)?,
            CheckKind::Weak => {
                let phi = BumpTestFunction::covering(tm)?;
                check_weak_form(tm, p, &phi, budget.weak())?
            }
        };
        checks.push(record);
    }
    Ok(DiagnosticsReport { checks, config_hash: None })
}

/// Cluster states at one node of a time grid.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub time: f64,
    pub clusters: Vec<ClusterView>,
}

impl Node {
    fn ids(&self) -> impl Iterator<Item = ClusterId> + '_ {
        self.clusters.iter().map(|c| c.id)
    }

    /// Whether `self` and `next` bound a smooth stretch of positive length.
    pub fn smooth_to(&self, next: &Node) -> bool {
        next.time > self.time && self.ids().eq(next.ids())
    }
}

/// Chronological nodes: every snapshot frame (so both one-sided states at
/// events) plus the requested extra times, up to the last stored time.
pub(crate) fn snapshot_nodes(tm: &TrajectoryMap, extra: &[f64]) -> Result<Vec<Node>> {
    let mut extra: Vec<f64> = extra.to_vec();
    for &t in &extra {
        if !(t.is_finite() && (0.0..=tm.last_time()).contains(&t)) {
            return Err(Error::OutOfRange { time: t, horizon: tm.last_time() });
        }
    }
    extra.sort_by(f64::total_cmp);
    extra.dedup();
    let frames = tm.frames();
    let mut nodes = Vec::new();
    let mut e = 0;
    for (k, f) in frames.iter().enumerate() {
        while e < extra.len() && extra[e] < f.time {
            nodes.push(Node { time: extra[e], clusters: tm.clusters_at(extra[e])? });
            e += 1;
        }
        let wanted = f.kind.is_snapshot() || (e < extra.len() && extra[e] == f.time);
        if wanted {
            nodes.push(Node { time: f.time, clusters: tm.frame_clusters(k) });
        }
        while e < extra.len() && extra[e] == f.time {
            e += 1;
        }
    }
    Ok(nodes)
}

/// States at each grid time: both one-sided states where the grid time
/// carries several snapshot frames (events), otherwise the right limit.
pub(crate) fn grid_states(tm: &TrajectoryMap, grid: &[f64]) -> Result<Vec<Node>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Argument("check grid must be sorted ascending".into()));
    }
    let frames = tm.frames();
    let mut out = Vec::new();
    for &t in grid {
        tm.clusters_at(t)?;
        let lo = frames.partition_point(|f| f.time < t);
        let hi = frames.partition_point(|f| f.time <= t);
        let at: Vec<usize> = (lo..hi).filter(|&k| frames[k].kind.is_snapshot()).collect();
        if at.len() > 1 {
            for k in [at[0], at[at.len() - 1]] {
                out.push(Node { time: t, clusters: tm.frame_clusters(k) });
            }
        } else {
            out.push(Node { time: t, clusters: tm.clusters_at(t)? });
        }
    }
    Ok(out)
}

/// `F_k = Σ_l M_l W'(γ_k - γ_l)` for every cluster.
///
/// Distinct clusters in contact (a pre-event state) are treated as ordered,
/// so `W'` is taken as its limit from the negative side, matching the
/// motion just before the contact.
pub(crate) fn cluster_forces<I: Interaction + ?Sized>(p: &I, clusters: &[ClusterView]) -> Vec<f64> {
    let n = clusters.len();
    let mut f = alloc::vec![0.0; n];
    for k in 0..n {
        for l in k + 1..n {
            let d = clusters[k].position - clusters[l].position;
            let w = p.w_prime(if d == 0.0 { -f64::MIN_POSITIVE } else { d });
            f[k] += clusters[l].mass * w;
            f[l] -= clusters[k].mass * w;
        }
    }
    f
}

/// `T Δt² max|f''| / 12` for samples `(t, f)` grouped into smooth pieces.
pub(crate) fn quadrature_estimate(pieces: &[Vec<(f64, f64)>], horizon: f64) -> f64 {
    let mut dt_max = 0.0f64;
    let mut second = 0.0f64;
    for piece in pieces {
        for w in piece.windows(2) {
            dt_max = dt_max.max(w[1].0 - w[0].0);
        }
        for w in piece.windows(3) {
            let (h1, h2) = (w[1].0 - w[0].0, w[2].0 - w[1].0);
            let d = 2.0 * ((w[2].1 - w[1].1) / h2 - (w[1].1 - w[0].1) / h1) / (h1 + h2);
            second = second.max(d.abs());
        }
    }
    horizon * dt_max * dt_max * second / 12.0
}
