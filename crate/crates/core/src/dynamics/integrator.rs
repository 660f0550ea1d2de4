use alloc::vec;
use alloc::vec::Vec;

use super::SimState;
use crate::error::{finite, Error, Result};
use crate::potential::Interaction;

/// `a_k = -Σ_j M_j W'(γ_k - γ_j)` over all live clusters.
pub fn accelerations<I: Interaction + ?Sized>(state: &SimState, p: &I) -> Vec<f64> {
    let positions = state.positions();
    let masses = state.masses();
    let mut out = vec![0.0; positions.len()];
    accel_into(&positions, &masses, p, &mut out);
    out
}

/// Pairwise accumulation: each `W'` is evaluated once and applied with
/// opposite signs, so the total force cancels up to rounding.
pub(crate) fn accel_into<I: Interaction + ?Sized>(
    positions: &[f64],
    masses: &[f64],
    p: &I,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|a| *a = 0.0);
    let n = positions.len();
    for k in 0..n {
        let (xk, mk) = (positions[k], masses[k]);
        let mut acc = 0.0;
        for j in k + 1..n {
            let f = p.w_prime(xk - positions[j]);
            acc -= masses[j] * f;
            out[j] += mk * f;
        }
        out[k] += acc;
    }
}

/// One classical RK4 step of size `dt`. Membership and ids are unchanged.
pub(crate) fn rk4_step<I: Interaction + ?Sized>(state: &SimState, p: &I, dt: f64) -> SimState {
    let mut next = state.clone();
    next.time = state.time + dt;
    if dt == 0.0 {
        return next;
    }
    let n = state.clusters.len();
    let x0 = state.positions();
    let v0 = state.velocities();
    let m = state.masses();
    let mut k1v = vec![0.0; n];
    let mut k2v = vec![0.0; n];
    let mut k3v = vec![0.0; n];
    let mut k4v = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    accel_into(&x0, &m, p, &mut k1v);
    for i in 0..n {
        tmp[i] = x0[i] + 0.5 * dt * v0[i];
    }
    accel_into(&tmp, &m, p, &mut k2v);
    for i in 0..n {
        tmp[i] = x0[i] + 0.5 * dt * (v0[i] + 0.5 * dt * k1v[i]);
    }
    accel_into(&tmp, &m, p, &mut k3v);
    for i in 0..n {
        tmp[i] = x0[i] + dt * (v0[i] + 0.5 * dt * k2v[i]);
    }
    accel_into(&tmp, &m, p, &mut k4v);

    for (i, c) in next.clusters.iter_mut().enumerate() {
        // position stages: k1x = v, k2x = v + dt/2 k1v, k3x = v + dt/2 k2v, k4x = v + dt k3v
        let dx = v0[i] + dt / 6.0 * (k1v[i] + k2v[i] + k3v[i]);
        c.position = x0[i] + dt * dx;
        c.velocity = v0[i] + dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    next
}

/// Advances a collision-free segment by one RK4 step.
pub fn advance_segment<I: Interaction + ?Sized>(
    state: &SimState,
    p: &I,
    dt: f64,
) -> Result<SimState> {
    finite("step size", dt)?;
    if dt < 0.0 {
        return Err(Error::Domain { what: "step size", value: dt });
    }
    let next = rk4_step(state, p, dt);
    if !next.is_finite() {
        return Err(Error::Integration { time: state.time, state: alloc::boxed::Box::new(next) });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Cluster, ClusterId};
    use crate::potential::Potential;

    fn pair(x: f64, v: f64) -> SimState {
        SimState {
            time: 0.0,
            clusters: vec![
                Cluster { id: ClusterId(0), members: 0..1, mass: 0.5, position: -x, velocity: v },
                Cluster { id: ClusterId(1), members: 1..2, mass: 0.5, position: x, velocity: -v },
            ],
            next_id: 2,
        }
    }

    #[test]
    fn zero_potential_has_no_force() {
        let s = pair(1.0, 0.3);
        assert_eq!(accelerations(&s, &Potential::zero()), vec![0.0, 0.0]);
    }

    #[test]
    fn quadratic_pair_accelerations() {
        // a₁ = -½ W'(-2) = +1, a₂ = -½ W'(2) = -1
        let s = pair(1.0, 0.0);
        assert_eq!(accelerations(&s, &Potential::quadratic(1.0).unwrap()), vec![1.0, -1.0]);
    }

    #[test]
    fn single_cluster_feels_nothing() {
        let s = SimState {
            time: 0.0,
            clusters: vec![Cluster { id: ClusterId(0), members: 0..1, mass: 1.0, position: 3.0, velocity: 1.0 }],
            next_id: 1,
        };
        for p in [Potential::smooth_abs(0.2).unwrap(), Potential::quadratic(4.0).unwrap()] {
            assert_eq!(accelerations(&s, &p), vec![0.0]);
        }
    }

    #[test]
    fn free_streaming_step() {
        let s = SimState {
            time: 0.0,
            clusters: vec![Cluster { id: ClusterId(0), members: 0..1, mass: 1.0, position: 0.0, velocity: 1.0 }],
            next_id: 1,
        };
        let n = advance_segment(&s, &Potential::zero(), 0.5).unwrap();
        assert_eq!(n.clusters[0].position, 0.5);
        assert_eq!(n.clusters[0].velocity, 1.0);
        assert_eq!(n.time, 0.5);
        assert_eq!(advance_segment(&s, &Potential::zero(), 0.0).unwrap(), s);
    }

    #[test]
    fn harmonic_step_matches_cosine() {
        // γ₂(t) = cos t, γ̇₂(t) = -sin t; local RK4 error O(dt⁵)
        let p = Potential::quadratic(1.0).unwrap();
        let dt = 0.01;
        let mut s = pair(1.0, 0.0);
        for step in 1..=150 {
            let t0 = s.time;
            let start = pair(libm::cos(t0), libm::sin(t0));
            let one = advance_segment(&start, &p, dt).unwrap();
            let t1 = t0 + dt;
            assert!((one.clusters[1].position - libm::cos(t1)).abs() <= 1e-9);
            assert!((one.clusters[1].velocity + libm::sin(t1)).abs() <= 1e-9);
            s = advance_segment(&s, &p, dt).unwrap();
            assert!((s.time - step as f64 * dt).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_step_is_reported() {
        let p = Potential::quadratic(1.0).unwrap();
        let s = pair(1.0, 0.0);
        assert!(advance_segment(&s, &p, f64::NAN).is_err());
        let huge = pair(1e300, 0.0);
        assert!(matches!(advance_segment(&huge, &p, 1e10), Err(Error::Integration { .. })));
    }
}
