use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use super::events::{locate_collision, Collision, EventTolerances};
use super::integrator::rk4_step;
use super::state::{cascade_merges, SimState};
use crate::error::{finite, Error, Result};
use crate::initial_data::{DiscreteMeasure, InitialVelocity};
use crate::potential::Interaction;
use crate::trajectory::{FrameKind, Model, Provenance, TrajectoryBuilder, TrajectoryMap};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Initial (and largest) RK4 step.
    pub dt_init: f64,
    /// Contact tolerance; defaults to `1e-9 · diam(supp ρ₀)`.
    pub gap_tol: Option<f64>,
    /// Event-time tolerance; defaults to `1e-10 · max(1, T)`.
    pub t_tol: Option<f64>,
    /// Times at which a snapshot is stored. `0` and `T` are always added.
    pub output_times: Vec<f64>,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { dt_init: 1e-3, gap_tol: None, t_tol: None, output_times: Vec::new(), max_steps: 10_000_000 }
    }
}

impl SolverOptions {
    pub fn tolerances(&self, rho0: &DiscreteMeasure, horizon: f64) -> EventTolerances {
        let diam = rho0.diameter();
        let gap_tol = self.gap_tol.unwrap_or(if diam > 0.0 { 1e-9 * diam } else { 1e-9 });
        let t_tol = self.t_tol.unwrap_or(1e-10 * horizon.max(1.0));
        EventTolerances { gap_tol, t_tol }
    }

    /// Sorted, deduplicated output grid on `[0, T]` including both ends.
    pub fn output_grid(&self, horizon: f64) -> Result<Vec<f64>> {
        let mut grid: Vec<f64> = Vec::with_capacity(self.output_times.len() + 2);
        grid.push(0.0);
        for &t in &self.output_times {
            finite("output time", t)?;
            if !(0.0..=horizon).contains(&t) {
                return Err(Error::Argument(format!("output time {t} outside [0, {horizon}]")));
            }
            grid.push(t);
        }
        grid.push(horizon);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Ok(grid)
    }

    pub(crate) fn validate(&self, horizon: f64) -> Result<()> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Domain { what: "horizon", value: horizon });
        }
        if !(self.dt_init.is_finite() && self.dt_init > 0.0) {
            return Err(Error::Domain { what: "dt_init", value: self.dt_init });
        }
        for (what, v) in [("gap_tol", self.gap_tol), ("t_tol", self.t_tol)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Domain { what, value: v });
                }
            }
        }
        Ok(())
    }
}

/// Sticky-particle trajectories of `ρ₀ = Σ mᵢ δ_{xᵢ}` with velocities
/// `v₀(xᵢ)` under the interaction `p`, up to `horizon`.
pub fn simulate<I: Interaction + ?Sized>(
    rho0: &DiscreteMeasure,
    v0: &InitialVelocity,
    p: &I,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<TrajectoryMap> {
    opts.validate(horizon)?;
    let tol = opts.tolerances(rho0, horizon);
    let grid = opts.output_grid(horizon)?;
    let provenance = Provenance {
        model: Model::PressurelessEuler,
        interaction: p.label(),
        semiconvexity: p.semiconvexity(),
        gap_tol: tol.gap_tol,
        t_tol: tol.t_tol,
    };

    let state = SimState::from_measure(rho0, v0);
    let velocities = state.velocities();
    let mut out = TrajectoryBuilder::new(rho0.clone(), velocities, horizon, provenance);
    out.push(&state, FrameKind::Initial);
    let (mut state, initial_events) = cascade_merges(state, tol.gap_tol);
    if !initial_events.is_empty() {
        out.record_events(initial_events);
        out.push(&state, FrameKind::PostEvent);
    }

    let mut next_out = 1;
    let mut dt = opts.dt_init;
    let mut steps = 0usize;
    while state.time < horizon {
        if steps >= opts.max_steps {
            return Err(Error::Truncated { steps, partial: Box::new(out.finish()) });
        }
        steps += 1;
        let target = grid[next_out];
        let remaining = target - state.time;
        let lands = dt >= remaining;
        let h = if lands { remaining } else { dt };
        let mut trial = rk4_step(&state, p, h);
        if lands {
            trial.time = target;
        }
        if !trial.is_finite() {
            return Err(Error::Integration { time: state.time, state: Box::new(trial) });
        }

        match locate_collision(&state, &trial, p, &tol) {
            Collision::At(contact) => {
                out.push(&contact, FrameKind::PreEvent);
                let (merged, events) = cascade_merges(contact, tol.gap_tol);
                out.record_events(events);
                out.push(&merged, FrameKind::PostEvent);
                state = merged;
                if state.time >= target {
                    next_out += 1;
                }
                continue;
            }
            Collision::Unbracketed if h > tol.t_tol => {
                dt = 0.5 * h;
                continue;
            }
            _ => {}
        }

        let shrink = worst_gap_ratio(&state, &trial);
        if shrink < 0.5 && h > tol.t_tol {
            dt = 0.5 * h;
            continue;
        }
        let kind = if lands {
            next_out += 1;
            FrameKind::Output
        } else {
            FrameKind::Step
        };
        out.push(&trial, kind);
        if shrink >= 0.75 && !lands {
            dt = (2.0 * dt).min(opts.dt_init);
        }
        state = trial;
    }
    if out.last_frame_kind() == Some(FrameKind::Step) {
        out.set_last_kind(FrameKind::Output);
    }
    Ok(out.finish())
}

/// Smallest `g_after / g_before` over closing adjacent gaps (1 if none close).
fn worst_gap_ratio(before: &SimState, after: &SimState) -> f64 {
    before
        .clusters
        .windows(2)
        .zip(after.clusters.windows(2))
        .map(|(b, a)| {
            let g0 = b[1].position - b[0].position;
            let g1 = a[1].position - a[0].position;
            if g1 < g0 {
                g1 / g0
            } else {
                1.0
            }
        })
        .fold(1.0, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use alloc::vec;

    fn two_body() -> (DiscreteMeasure, InitialVelocity) {
        (
            DiscreteMeasure::from_atoms(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap(),
            InitialVelocity::new(vec![0.0, 1.0], vec![1.0, -1.0]).unwrap(),
        )
    }

    #[test]
    fn free_streaming_pair_merges_at_half() {
        let (rho, v) = two_body();
        let tm = simulate(&rho, &v, &Potential::zero(), 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(tm.events().len(), 1);
        let e = &tm.events()[0];
        assert!((e.time - 0.5).abs() < 1e-8);
        assert!((e.position - 0.5).abs() < 1e-8);
        assert_eq!(e.post_velocity, 0.0);
        let last = tm.clusters_at(1.0).unwrap();
        assert_eq!(last.len(), 1);
        assert!((last[0].position - 0.5).abs() < 1e-8);
    }

    #[test]
    fn harmonic_pair_merges_at_quarter_period() {
        let rho = DiscreteMeasure::from_atoms(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let v = InitialVelocity::constant(0.0).unwrap();
        let p = Potential::quadratic(1.0).unwrap();
        let tm = simulate(&rho, &v, &p, 2.0, &SolverOptions::default()).unwrap();
        assert_eq!(tm.events().len(), 1);
        let e = &tm.events()[0];
        assert!((e.time - core::f64::consts::FRAC_PI_2).abs() < 1e-6);
        assert!(e.position.abs() < 1e-9);
        assert!((e.pre_velocities[0] - 1.0).abs() < 1e-6);
        assert!((e.pre_velocities[1] + 1.0).abs() < 1e-6);
        assert!(e.post_velocity.abs() < 1e-12);
    }

    #[test]
    fn single_atom_moves_freely() {
        let rho = DiscreteMeasure::dirac(2.0).unwrap();
        let v = InitialVelocity::constant(-0.5).unwrap();
        let p = Potential::smooth_abs(0.3).unwrap();
        let tm = simulate(&rho, &v, &p, 5.0, &SolverOptions::default()).unwrap();
        assert!(tm.events().is_empty());
        assert!((tm.eval_x(0, 5.0).unwrap() - (2.0 - 2.5)).abs() < 1e-12);
    }

    #[test]
    fn output_grid_is_hit_exactly() {
        let (rho, v) = two_body();
        let opts = SolverOptions { output_times: vec![0.1, 0.25, 0.5, 0.75], ..Default::default() };
        let tm = simulate(&rho, &v, &Potential::zero(), 1.0, &opts).unwrap();
        let snaps = tm.snapshot_times();
        for t in [0.0, 0.1, 0.25, 0.75, 1.0] {
            assert!(snaps.contains(&t), "missing {t}");
        }
    }

    #[test]
    fn step_limit_truncates() {
        let (rho, v) = two_body();
        let opts = SolverOptions { max_steps: 10, ..Default::default() };
        match simulate(&rho, &v, &Potential::zero(), 1.0, &opts) {
            Err(Error::Truncated { steps, partial }) => {
                assert_eq!(steps, 10);
                assert!(partial.last_time() > 0.0 && partial.last_time() < 1.0);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_options() {
        let (rho, v) = two_body();
        let p = Potential::zero();
        assert!(simulate(&rho, &v, &p, 0.0, &SolverOptions::default()).is_err());
        let bad_dt = SolverOptions { dt_init: 0.0, ..Default::default() };
        assert!(simulate(&rho, &v, &p, 1.0, &bad_dt).is_err());
        let bad_grid = SolverOptions { output_times: vec![2.0], ..Default::default() };
        assert!(simulate(&rho, &v, &p, 1.0, &bad_grid).is_err());
    }
}
