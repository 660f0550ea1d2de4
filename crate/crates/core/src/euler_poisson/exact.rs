use alloc::vec::Vec;

use super::AbsPotential;
use crate::dynamics::{cascade_merges, merge, SimState, SolverOptions};
use crate::error::{Error, Result};
use crate::initial_data::{DiscreteMeasure, InitialVelocity};
use crate::potential::Interaction;
use crate::trajectory::{FrameKind, Model, Provenance, TrajectoryBuilder, TrajectoryMap};

/// `a_k = (mass right of k) - (mass left of k) = -(sgn * ρ)(γ_k)`.
pub fn ep_accelerations(state: &SimState) -> Vec<f64> {
    let total: f64 = state.clusters.iter().map(|c| c.mass).sum();
    let mut left = 0.0;
    state
        .clusters
        .iter()
        .map(|c| {
            let right = total - left - c.mass;
            let a = right - left;
            left += c.mass;
            a
        })
        .collect()
}

/// Smallest positive root of `A τ² + B τ + C` with `C > 0`, if any.
fn first_contact(a: f64, b: f64, c: f64) -> Option<f64> {
    if a == 0.0 {
        return if b < 0.0 { Some(-c / b) } else { None };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = libm::sqrt(disc);
    let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
    let mut roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots.sort_by(f64::total_cmp);
    roots.into_iter().find(|r| *r > 0.0)
}

fn advance(state: &SimState, acc: &[f64], tau: f64, time: f64) -> SimState {
    let mut next = state.clone();
    next.time = time;
    for (c, a) in next.clusters.iter_mut().zip(acc) {
        c.position += tau * (c.velocity + 0.5 * a * tau);
        c.velocity += a * tau;
    }
    // closed-form updates can round a contacting pair past each other
    for k in 1..next.clusters.len() {
        let prev = next.clusters[k - 1].position;
        if next.clusters[k].position < prev {
            next.clusters[k].position = prev;
        }
    }
    next
}

/// Exact event-driven Euler-Poisson trajectories up to `horizon`.
///
/// Only `output_times` and `max_steps` of `opts` are used: between events
/// the motion is integrated in closed form.
pub fn simulate_ep(
    rho0: &DiscreteMeasure,
    v0: &InitialVelocity,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<TrajectoryMap> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Domain { what: "horizon", value: horizon });
    }
    let grid = opts.output_grid(horizon)?;
    let scale = rho0.positions().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let contact_tol = 1e-13 * scale;
    let provenance = Provenance {
        model: Model::EulerPoisson,
        interaction: AbsPotential.label(),
        semiconvexity: 0.0,
        gap_tol: contact_tol,
        t_tol: 0.0,
    };
    let state = SimState::from_measure(rho0, v0);
    let mut out = TrajectoryBuilder::new(rho0.clone(), state.velocities(), horizon, provenance);
    out.push(&state, FrameKind::Initial);

    let mut state = state;
    let mut next_out = 1;
    let mut steps = 0usize;
    while state.time < horizon {
        if steps >= opts.max_steps {
            return Err(Error::Truncated { steps, partial: alloc::boxed::Box::new(out.finish()) });
        }
        steps += 1;
        let acc = ep_accelerations(&state);
        // earliest contact; strict comparison keeps the leftmost pair on ties
        let mut next: Option<(f64, usize)> = None;
        for k in 0..state.clusters.len().saturating_sub(1) {
            let (l, r) = (&state.clusters[k], &state.clusters[k + 1]);
            let gap = r.position - l.position;
            let rel_v = r.velocity - l.velocity;
            let rel_a = acc[k + 1] - acc[k];
            if let Some(tau) = first_contact(0.5 * rel_a, rel_v, gap) {
                if next.is_none_or(|(best, _)| tau < best) {
                    next = Some((tau, k));
                }
            }
        }
        let target = grid[next_out];
        match next {
            Some((tau, k)) if state.time + tau <= target => {
                let t_event = if state.time + tau == target { target } else { state.time + tau };
                let contact = advance(&state, &acc, tau, t_event);
                out.push(&contact, FrameKind::PreEvent);
                let pair = [contact.clusters[k].id, contact.clusters[k + 1].id];
                let (merged, first) = merge(&contact, &pair)?;
                let (merged, rest) = cascade_merges(merged, contact_tol);
                out.record_events(core::iter::once(first).chain(rest).collect());
                out.push(&merged, FrameKind::PostEvent);
                state = merged;
                if state.time >= target {
                    next_out += 1;
                }
            }
            _ => {
                let tau = target - state.time;
                state = advance(&state, &acc, tau, target);
                out.push(&state, FrameKind::Output);
                next_out += 1;
            }
        }
    }
    Ok(out.finish())
}
