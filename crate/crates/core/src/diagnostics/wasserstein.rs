use crate::initial_data::DiscreteMeasure;
use crate::math::compensated_sum;

/// `W₂(μ, ν)` via the monotone (quantile) coupling, exact for atomic measures.
pub fn wasserstein2(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let (xa, ma) = (mu.positions(), mu.masses());
    let (xb, mb) = (nu.positions(), nu.masses());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (ma[0], mb[0]);
    let mut terms = alloc::vec::Vec::with_capacity(xa.len() + xb.len());
    loop {
        let step = ra.min(rb);
        let d = xa[i] - xb[j];
        terms.push(step * d * d);
        ra -= step;
        rb -= step;
        let next_a = ra <= 0.0 && i + 1 < xa.len();
        let next_b = rb <= 0.0 && j + 1 < xb.len();
        if next_a {
            i += 1;
            ra = ma[i];
        }
        if next_b {
            j += 1;
            rb = mb[j];
        }
        if !next_a && !next_b {
            if i + 1 < xa.len() {
                i += 1;
                ra = ma[i];
            } else if j + 1 < xb.len() {
                j += 1;
                rb = mb[j];
            } else {
                break;
            }
        }
    }
    libm::sqrt(compensated_sum(terms).max(0.0))
}
