use alloc::vec::Vec;

use super::{cluster_forces, snapshot_nodes, CheckRecord, Node, ToleranceBudget};
use crate::error::{Error, Result};
use crate::math::compensated_sum;
use crate::potential::Interaction;
use crate::trajectory::TrajectoryMap;

/// Smooth compactly supported `φ(x, t)` with its partial derivatives.
pub trait TestFunction {
    fn value(&self, x: f64, t: f64) -> f64;
    fn dt(&self, x: f64, t: f64) -> f64;
    fn dx(&self, x: f64, t: f64) -> f64;
    /// `φ(·, t) = 0` for every `t ≥` this value.
    fn time_support_end(&self) -> f64;
}

/// `φ(x, t) = b((x - x_c)/r_x) b((t - t_c)/r_t)` with the standard bump
/// `b(s) = exp(-1/(1 - s²))` on `|s| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpTestFunction {
    pub x_center: f64,
    pub x_radius: f64,
    pub t_center: f64,
    pub t_radius: f64,
}

fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = libm::exp(-1.0 / q);
    (b, b * (-2.0 * s / (q * q)))
}

impl BumpTestFunction {
    pub fn new(x_center: f64, x_radius: f64, t_center: f64, t_radius: f64) -> Result<Self> {
        for (what, v) in [("bump centre", x_center), ("bump time centre", t_center)] {
            if !v.is_finite() {
                return Err(Error::Domain { what, value: v });
            }
        }
        for (what, v) in [("bump radius", x_radius), ("bump time radius", t_radius)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain { what, value: v });
            }
        }
        Ok(Self { x_center, x_radius, t_center, t_radius })
    }

    /// A bump covering every recorded position, with time support
    /// `(-0.1 T, 0.9 T)` where `T` is the last stored time.
    pub fn covering(tm: &TrajectoryMap) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for f in tm.frames() {
            for &x in &f.positions {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        let t = tm.last_time();
        if t <= 0.0 {
            return Err(Error::Argument("weak form needs a positive simulated horizon".into()));
        }
        Self::new(0.5 * (lo + hi), 0.6 * (hi - lo) + 0.5, 0.4 * t, 0.5 * t)
    }

    fn parts(&self, x: f64, t: f64) -> ((f64, f64), (f64, f64)) {
        (bump((x - self.x_center) / self.x_radius), bump((t - self.t_center) / self.t_radius))
    }
}

impl TestFunction for BumpTestFunction {
    fn value(&self, x: f64, t: f64) -> f64 {
        let ((bx, _), (bt, _)) = self.parts(x, t);
        bx * bt
    }

    fn dt(&self, x: f64, t: f64) -> f64 {
        let ((bx, _), (_, dbt)) = self.parts(x, t);
        bx * dbt / self.t_radius
    }

    fn dx(&self, x: f64, t: f64) -> f64 {
        let ((_, dbx), (bt, _)) = self.parts(x, t);
        dbx * bt / self.x_radius
    }

    fn time_support_end(&self) -> f64 {
        self.t_center + self.t_radius
    }
}

/// Absolute residuals of the mass and momentum identities of the weak
/// formulation, with the snapshot-grid quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakResidual {
    pub mass: f64,
    pub momentum: f64,
    pub quadrature_estimate: f64,
}

fn integrands<I, T>(p: &I, phi: &T, node: &Node) -> (f64, f64)
where
    I: Interaction + ?Sized,
    T: TestFunction + ?Sized,
{
    let t = node.time;
    let forces = cluster_forces(p, &node.clusters);
    let mut mass = Vec::with_capacity(node.clusters.len());
    let mut momentum = Vec::with_capacity(node.clusters.len());
    for (c, f) in node.clusters.iter().zip(forces) {
        let (x, v) = (c.position, c.velocity);
        let (ph, pt, px) = (phi.value(x, t), phi.dt(x, t), phi.dx(x, t));
        mass.push(c.mass * (pt + v * px));
        momentum.push(c.mass * (v * pt + v * v * px - ph * f));
    }
    (compensated_sum(mass), compensated_sum(momentum))
}

/// Residuals of
/// `∫∫ (∂ₜφ + v ∂ₓφ) dρₜ dt + ∫ φ(·,0) dρ₀ = 0` and
/// `∫∫ (v ∂ₜφ + v² ∂ₓφ) dρₜ dt + ∫ φ(·,0) v₀ dρ₀ = ∫∫ φ (W' * ρₜ) dρₜ dt`,
/// with time integrals by the trapezoid rule on the snapshot grid.
pub fn weak_form_residual<I, T>(tm: &TrajectoryMap, p: &I, phi: &T) -> Result<WeakResidual>
where
    I: Interaction + ?Sized,
    T: TestFunction + ?Sized,
{
    let end = phi.time_support_end();
    if !(end <= tm.last_time()) {
        return Err(Error::Argument(alloc::format!(
            "test function support reaches t = {end}, beyond the simulated horizon {}",
            tm.last_time()
        )));
    }
    let atoms = tm.atoms();
    let v0 = tm.initial_velocities();
    let init_mass = compensated_sum(atoms.atoms().map(|(x, m)| m * phi.value(x, 0.0)));
    let init_momentum = compensated_sum(atoms.atoms().zip(v0).map(|((x, m), v)| m * v * phi.value(x, 0.0)));

    let nodes = snapshot_nodes(tm, &[])?;
    let mut mass_terms = Vec::with_capacity(nodes.len());
    let mut momentum_terms = Vec::with_capacity(nodes.len());
    let mut mass_err = Vec::new();
    let mut momentum_err = Vec::new();
    let mut prev: Option<(usize, f64, f64)> = None;
    for (k, node) in nodes.iter().enumerate() {
        let (fm, fp) = integrands(p, phi, node);
        if let Some((j, pm, pp)) = prev {
            if nodes[j].smooth_to(node) {
                let (a, b) = (nodes[j].time, node.time);
                let h = b - a;
                mass_terms.push(0.5 * h * (pm + fm));
                momentum_terms.push(0.5 * h * (pp + fp));
                let mid = 0.5 * (a + b);
                let (cm, cp) = integrands(p, phi, &Node { time: mid, clusters: tm.clusters_at(mid)? });
                mass_err.push((h / 3.0 * (pm + fm - 2.0 * cm)).abs());
                momentum_err.push((h / 3.0 * (pp + fp - 2.0 * cp)).abs());
            }
        }
        prev = Some((k, fm, fp));
    }
    mass_terms.push(init_mass);
    momentum_terms.push(init_momentum);
    Ok(WeakResidual {
        mass: compensated_sum(mass_terms).abs(),
        momentum: compensated_sum(momentum_terms).abs(),
        quadrature_estimate: compensated_sum(mass_err).max(compensated_sum(momentum_err)),
    })
}

/// Both weak-form residuals against `tol` plus the scaled quadrature estimate.
pub fn check_weak_form<I, T>(tm: &TrajectoryMap, p: &I, phi: &T, tol: f64) -> Result<CheckRecord>
where
    I: Interaction + ?Sized,
    T: TestFunction + ?Sized,
{
    let r = weak_form_residual(tm, p, phi)?;
    let mut rec = CheckRecord::new("weak", tol + ToleranceBudget::QUADRATURE_FACTOR * r.quadrature_estimate);
    rec.observe(0.0 - r.mass, tm.last_time());
    rec.observe(0.0 - r.momentum, tm.last_time());
    Ok(rec.finish())
}
