use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::scalar::{vector, Scalar};

use super::medoids::{validate, PrototypeSelection};

/// Median of all pairwise distances, or `1` when that median is zero.
pub fn median_bandwidth<T: Scalar>(points: &[Vec<T>]) -> T {
    let n = points.len();
    let mut d: Vec<T> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (i + 1..n).map(move |j| vector::distance(&points[i], &points[j])))
        .collect();
    if d.is_empty() {
        return T::one();
    }
    let mid = d.len() / 2;
    let (_, &mut m, _) = d.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let med = if d.len() % 2 == 1 {
        m
    } else {
        let lower = d[..mid].iter().copied().fold(T::neg_infinity(), T::max);
        (lower + m) * T::lit(0.5)
    };
    if med > T::zero() {
        med
    } else {
        T::one()
    }
}

/// `exp(−‖x − y‖² / (2σ²))`.
pub fn rbf<T: Scalar>(x: &[T], y: &[T], sigma: T) -> T {
    let d = vector::distance(x, y);
    (-(d * d) / (T::lit(2.0) * sigma * sigma)).exp()
}

/// Greedy MMD-critic prototypes: each step adds the point whose inclusion
/// gives the smallest squared MMD between the data and the prototypes under
/// an RBF kernel. `bandwidth = None` uses the median heuristic.
///
/// The kernel matrix is never stored; each step costs one kernel row.
pub fn mmd_critic_prototypes<T: Scalar>(
    points: &[Vec<T>],
    k: usize,
    bandwidth: Option<T>,
) -> Result<PrototypeSelection<T>> {
    validate(points, k)?;
    let sigma = match bandwidth {
        Some(s) if s > T::zero() && s.is_finite() => s,
        Some(s) => return domain(format!("bandwidth must be positive, got {s}")),
        None => median_bandwidth(points),
    };
    let n = points.len();
    let nf = T::from_count(n);

    // mean kernel similarity of each point to the data
    let mu: Vec<T> = points
        .par_iter()
        .map(|x| points.iter().map(|y| rbf(x, y, sigma)).sum::<T>() / nf)
        .collect();
    let data_term = mu.iter().copied().sum::<T>() / nf;

    let mut chosen = vec![false; n];
    let mut indices = Vec::with_capacity(k);
    // Σ_{s∈S} k(c, s) for every candidate c
    let mut cross = vec![T::zero(); n];
    let mut mu_sum = T::zero();
    let mut self_sum = T::zero();
    let mut trace = Vec::with_capacity(k);
    let two = T::lit(2.0);

    for step in 0..k {
        let m1 = T::from_count(step + 1);
        let (value, c) = (0..n)
            .into_par_iter()
            .filter(|&c| !chosen[c])
            .map(|c| {
                let s = self_sum + two * cross[c] + T::one();
                (data_term - two * (mu_sum + mu[c]) / m1 + s / (m1 * m1), c)
            })
            .reduce_with(|a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            })
            .expect("k ≤ n leaves a candidate");
        chosen[c] = true;
        indices.push(c);
        self_sum += two * cross[c] + T::one();
        mu_sum += mu[c];
        cross
            .par_iter_mut()
            .zip(points.par_iter())
            .for_each(|(acc, x)| *acc += rbf(x, &points[c], sigma));
        // rounding can leave a tiny negative value
        trace.push(value.max(T::zero()));
    }

    Ok(PrototypeSelection {
        indices,
        objective: *trace.last().expect("k ≥ 1"),
        trace,
    })
}
