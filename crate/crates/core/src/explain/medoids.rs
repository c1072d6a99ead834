use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, domain, Result};
use crate::scalar::{vector, Scalar};

/// Chosen prototype indices with the final objective and its history
/// (one entry per accepted greedy or swap step).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrototypeSelection<T> {
    pub indices: Vec<usize>,
    pub objective: T,
    pub trace: Vec<T>,
}

pub(crate) fn validate<T: Scalar>(points: &[Vec<T>], k: usize) -> Result<()> {
    if k == 0 || k > points.len() {
        return domain(format!("k must lie in [1, {}], got {k}", points.len()));
    }
    let d = points[0].len();
    for p in points {
        check_dim(d, p.len())?;
    }
    Ok(())
}

/// Sum over all points of the distance to the nearest medoid.
pub fn medoid_cost<T: Scalar>(points: &[Vec<T>], medoids: &[usize]) -> T {
    points
        .iter()
        .map(|x| {
            medoids
                .iter()
                .map(|&m| vector::distance(x, &points[m]))
                .fold(T::infinity(), T::min)
        })
        .sum()
}

/// Distance to the nearest medoid, the index (into `medoids`) of that
/// medoid, and the distance to the second nearest.
fn nearest_two<T: Scalar>(points: &[Vec<T>], medoids: &[usize]) -> Vec<(T, usize, T)> {
    points
        .par_iter()
        .map(|x| {
            let mut best = (T::infinity(), 0, T::infinity());
            for (slot, &m) in medoids.iter().enumerate() {
                let d = vector::distance(x, &points[m]);
                if d < best.0 {
                    best = (d, slot, best.0);
                } else if d < best.2 {
                    best.2 = d;
                }
            }
            best
        })
        .collect()
}

/// PAM k-medoids: greedy BUILD followed by best-improvement SWAP passes
/// until no single exchange lowers the total distance. Distances are
/// computed on demand, so memory stays linear in the number of points.
///
/// BUILD is deterministic; `seed` is accepted for interface stability only.
pub fn k_medoid<T: Scalar>(
    points: &[Vec<T>],
    k: usize,
    _seed: u64,
) -> Result<PrototypeSelection<T>> {
    validate(points, k)?;
    let n = points.len();

    // BUILD
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut near = vec![T::infinity(); n];
    let mut trace = Vec::new();
    for _ in 0..k {
        let chosen = (0..n)
            .into_par_iter()
            .filter(|c| !medoids.contains(c))
            .map(|c| {
                let cost: T = points
                    .iter()
                    .zip(&near)
                    .map(|(x, &d)| d.min(vector::distance(x, &points[c])))
                    .sum();
                (cost, c)
            })
            .reduce_with(|a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            })
            .expect("k ≤ n leaves a candidate");
        medoids.push(chosen.1);
        for (x, d) in points.iter().zip(near.iter_mut()) {
            *d = d.min(vector::distance(x, &points[chosen.1]));
        }
        trace.push(chosen.0);
    }
    let mut cost: T = near.iter().copied().sum();

    // SWAP
    loop {
        let info = nearest_two(points, &medoids);
        let best = (0..n)
            .into_par_iter()
            .filter(|o| !medoids.contains(o))
            .map(|o| {
                // change in cost for swapping o in and each medoid slot out
                let mut delta = vec![T::zero(); k];
                let mut shared = T::zero();
                for (x, &(d1, slot, d2)) in points.iter().zip(&info) {
                    let doj = vector::distance(x, &points[o]);
                    shared += doj.min(d1) - d1;
                    delta[slot] += doj.min(d2) - doj.min(d1);
                }
                let (slot, dv) = delta
                    .iter()
                    .enumerate()
                    .map(|(s, &v)| (s, v + shared))
                    .fold((0, T::infinity()), |a, b| if b.1 < a.1 { b } else { a });
                (dv, o, slot)
            })
            .reduce_with(|a, b| {
                if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            });
        let Some((dv, o, slot)) = best else { break };
        let tol = T::lit(1e-12) * cost.max(T::one());
        if !(dv < -tol) {
            break;
        }
        medoids[slot] = o;
        cost = medoid_cost(points, &medoids);
        trace.push(cost);
    }

    medoids.sort_unstable();
    Ok(PrototypeSelection {
        indices: medoids,
        objective: cost,
        trace,
    })
}
