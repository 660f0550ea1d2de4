use super::{rk4_step, SimState};
use crate::potential::Interaction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventTolerances {
    /// Adjacent clusters closer than this are in contact.
    pub gap_tol: f64,
    /// Bisection stops once the bracket is this narrow.
    pub t_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Collision {
    None,
    /// Earliest contact, with the (pre-merge) state at the located time.
    At(SimState),
    /// A gap dips below tolerance inside the step without a sign change at
    /// the endpoints; the caller should retry with a smaller step.
    Unbracketed,
}

/// Looks for contacts inside the accepted step `before -> after`.
///
/// Contact is bracketed when some adjacent gap ends the step at or below
/// `gap_tol`; the time is then bisected on single RK4 substeps from
/// `before`, past `t_tol` if needed so the located state has no crossed
/// pair. Otherwise each gap's cubic Hermite profile (endpoint gaps and
/// relative velocities) is scanned for an interior dip.
pub fn locate_collision<I: Interaction + ?Sized>(
    before: &SimState,
    after: &SimState,
    p: &I,
    tol: &EventTolerances,
) -> Collision {
    let dt = after.time - before.time;
    let Some((_, end_gap)) = after.min_gap() else {
        return Collision::None;
    };
    if end_gap <= tol.gap_tol {
        let mut lo = 0.0;
        let mut hi = dt;
        let mut hi_state = after.clone();
        let mut hi_gap = end_gap;
        while hi - lo > tol.t_tol || hi_gap < 0.0 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let trial = rk4_step(before, p, mid);
            let gap = trial.min_gap().map_or(f64::INFINITY, |g| g.1);
            if gap <= tol.gap_tol {
                hi = mid;
                hi_state = trial;
                hi_gap = gap;
            } else {
                lo = mid;
            }
        }
        return Collision::At(hi_state);
    }
    for k in 0..before.clusters.len() - 1 {
        let (l0, r0) = (&before.clusters[k], &before.clusters[k + 1]);
        let (l1, r1) = (&after.clusters[k], &after.clusters[k + 1]);
        let g0 = r0.position - l0.position;
        let g1 = r1.position - l1.position;
        let d0 = r0.velocity - l0.velocity;
        let d1 = r1.velocity - l1.velocity;
        if hermite_min(g0, d0, g1, d1, dt) <= tol.gap_tol {
            return Collision::Unbracketed;
        }
    }
    Collision::None
}

/// Minimum over `[0, h]` of the cubic Hermite through `(g0, d0)`, `(g1, d1)`.
fn hermite_min(g0: f64, d0: f64, g1: f64, d1: f64, h: f64) -> f64 {
    let mut best = g0.min(g1);
    if h <= 0.0 {
        return best;
    }
    // g(θ) = a θ³ + b θ² + c θ + g0 on θ ∈ [0, 1]
    let c = h * d0;
    let a = 2.0 * g0 - 2.0 * g1 + h * d0 + h * d1;
    let b = -3.0 * g0 + 3.0 * g1 - 2.0 * h * d0 - h * d1;
    let eval = |t: f64| ((a * t + b) * t + c) * t + g0;
    // g'(θ) = 3a θ² + 2b θ + c
    let qa = 3.0 * a;
    let qb = 2.0 * b;
    let mut check = |t: f64| {
        if t > 0.0 && t < 1.0 {
            best = best.min(eval(t));
        }
    };
    if qa.abs() < 1e-300 {
        if qb != 0.0 {
            check(-c / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * c;
        if disc >= 0.0 {
            let s = libm::sqrt(disc);
            check((-qb - s) / (2.0 * qa));
            check((-qb + s) / (2.0 * qa));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrator::rk4_step;
    use crate::dynamics::{Cluster, ClusterId};
    use crate::potential::Potential;
    use alloc::vec::Vec;

    fn state(parts: &[(f64, f64)]) -> SimState {
        let m = 1.0 / parts.len() as f64;
        let clusters: Vec<Cluster> = parts
            .iter()
            .enumerate()
            .map(|(i, &(x, v))| Cluster { id: ClusterId(i), members: i..i + 1, mass: m, position: x, velocity: v })
            .collect();
        SimState { time: 0.0, clusters, next_id: parts.len() }
    }

    const TOL: EventTolerances = EventTolerances { gap_tol: 1e-9, t_tol: 1e-10 };

    #[test]
    fn linear_gap_closes_at_half() {
        let p = Potential::zero();
        let s = state(&[(0.0, 1.0), (1.0, -1.0)]);
        let after = rk4_step(&s, &p, 0.8);
        match locate_collision(&s, &after, &p, &TOL) {
            Collision::At(e) => assert!((e.time - 0.5).abs() <= 1e-9, "t = {}", e.time),
            other => panic!("expected a collision, got {other:?}"),
        }
    }

    #[test]
    fn widening_gap_has_no_event() {
        let p = Potential::zero();
        let s = state(&[(0.0, -1.0), (1.0, 1.0)]);
        let after = rk4_step(&s, &p, 1.0);
        assert_eq!(locate_collision(&s, &after, &p, &TOL), Collision::None);
    }

    #[test]
    fn earliest_of_several_contacts() {
        // gaps 1 - 2t (left pair) and 0.5 - 2t (right pair): right pair first at t = 0.25
        let p = Potential::zero();
        let s = state(&[(0.0, 2.0), (1.0, 0.0), (1.5, -2.0)]);
        let after = rk4_step(&s, &p, 0.6);
        match locate_collision(&s, &after, &p, &TOL) {
            Collision::At(e) => {
                assert!((e.time - 0.25).abs() <= 1e-9);
                let (k, _) = e.min_gap().unwrap();
                assert_eq!(k, 1);
            }
            other => panic!("expected a collision, got {other:?}"),
        }
    }

    #[test]
    fn grazing_dip_requests_refinement() {
        // equal endpoint gaps, approaching then separating: 5θ² - 5θ + 1 dips to -1/4
        assert!((hermite_min(1.0, -5.0, 1.0, 5.0, 1.0) + 0.25).abs() < 1e-15);
        assert_eq!(hermite_min(1.0, 1.0, 2.0, 1.0, 1.0), 1.0);
    }
}
