//! Boundary points and boundary pairs of a linear model over a finite
//! feature set.
//!
//! A pair `(x, x′)` is a boundary pair when `‖x − x′‖ < r` and the model
//! labels the two points differently: an agent at `x` could misreport `x′`
//! and flip its label.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Error, Result};
use crate::model::LinearModel;
use crate::scalar::{vector, Scalar};
use crate::sphere::angle_psi;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig<T> {
    /// Manipulation radius.
    pub r: T,
    /// Keep only negative → positive moves.
    pub positive_flip_only: bool,
}

impl<T: Scalar> BoundaryConfig<T> {
    pub fn new(r: T) -> Result<Self> {
        if !(r > T::zero()) {
            return domain(format!("manipulation radius must be positive, got {r}"));
        }
        Ok(Self {
            r,
            positive_flip_only: true,
        })
    }

    pub fn both_directions(mut self) -> Self {
        self.positive_flip_only = false;
        self
    }
}

/// Index pairs `(i, j)`: an agent at `points[i]` can reach `points[j]` and
/// the model labels them differently. Sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct BoundaryPairSet {
    pub pairs: Vec<(usize, usize)>,
}

impl BoundaryPairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sorted, deduplicated point indices appearing in any pair.
    pub fn members(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    /// Membership flags over `n` points.
    pub fn member_flags(&self, n: usize) -> Vec<bool> {
        let mut flags = vec![false; n];
        for &(i, j) in &self.pairs {
            flags[i] = true;
            flags[j] = true;
        }
        flags
    }
}

/// One serialisable pair row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRow<T> {
    pub i: usize,
    pub j: usize,
    pub dist: T,
    pub margin_i: T,
    pub margin_j: T,
}

pub fn pair_rows<T: Scalar>(
    pairs: &BoundaryPairSet,
    points: &[Vec<T>],
    model: &LinearModel<T>,
) -> Vec<PairRow<T>> {
    pairs
        .pairs
        .iter()
        .map(|&(i, j)| PairRow {
            i,
            j,
            dist: vector::distance(&points[i], &points[j]),
            margin_i: model.score(&points[i]),
            margin_j: model.score(&points[j]),
        })
        .collect()
}

/// All boundary pairs among `points`.
///
/// Only points with `|f(x)|/‖w‖ ≤ r` can be in a pair (the distance to the
/// decision hyperplane is at most the distance to any oppositely labelled
/// point), so the quadratic scan runs over that band only.
pub fn boundary_pairs<T: Scalar>(
    points: &[Vec<T>],
    model: &LinearModel<T>,
    cfg: &BoundaryConfig<T>,
) -> Result<BoundaryPairSet> {
    for p in points {
        check_dim(model.dim(), p.len())?;
    }
    let wn = vector::norm(&model.w);
    if !(wn > T::zero()) {
        return Ok(BoundaryPairSet::default());
    }
    let scores: Vec<T> = points.iter().map(|x| model.score(x)).collect();
    let band = |i: &usize| scores[*i].abs() / wn <= cfg.r;
    let neg: Vec<usize> = (0..points.len())
        .filter(band)
        .filter(|&i| scores[i] < T::zero())
        .collect();
    let pos: Vec<usize> = (0..points.len())
        .filter(band)
        .filter(|&i| scores[i] >= T::zero())
        .collect();

    let found: Vec<(usize, usize)> = neg
        .par_iter()
        .flat_map_iter(|&i| {
            pos.iter()
                .filter(move |&&j| vector::distance(&points[i], &points[j]) < cfg.r)
                .map(move |&j| (i, j))
        })
        .collect();

    let mut pairs = found;
    if !cfg.positive_flip_only {
        let rev: Vec<_> = pairs.iter().map(|&(i, j)| (j, i)).collect();
        pairs.extend(rev);
    }
    pairs.sort_unstable();
    Ok(BoundaryPairSet { pairs })
}

/// Membership of each sphere point in the continuous boundary band
/// `⟨w*, x⟩ ∈ [−sin ψ, sin ψ)`, `ψ = 2·arcsin(r/2)`.
pub fn band_membership<T: Scalar>(points: &[Vec<T>], w_star: &[T], r: T) -> Result<Vec<bool>> {
    let psi = angle_psi(r)?;
    let s = psi.sin();
    let tol = T::lit(1e-6);
    points
        .iter()
        .enumerate()
        .map(|(index, x)| {
            check_dim(w_star.len(), x.len())?;
            let n = vector::norm(x);
            if (n - T::one()).abs() > tol {
                return Err(Error::NotNormalized {
                    index,
                    norm: n.as_f64(),
                });
            }
            let t = vector::dot(w_star, x);
            Ok(t >= -s && t < s)
        })
        .collect()
}

/// Share of each group among the flagged points, or `None` when nothing is
/// flagged.
pub fn group_composition<G: Ord + Clone>(
    flags: &[bool],
    groups: &[G],
) -> Result<Option<BTreeMap<G, f64>>> {
    if flags.len() != groups.len() {
        return domain(format!(
            "{} flags but {} group labels",
            flags.len(),
            groups.len()
        ));
    }
    let mut counts: BTreeMap<G, usize> = BTreeMap::new();
    let mut total = 0usize;
    for (g, _) in groups.iter().zip(flags).filter(|(_, &f)| f) {
        *counts.entry(g.clone()).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Ok(None);
    }
    Ok(Some(
        counts
            .into_iter()
            .map(|(g, c)| (g, c as f64 / total as f64))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn brute_force(points: &[Vec<f64>], model: &LinearModel<f64>, r: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..points.len() {
            for j in 0..points.len() {
                let (fi, fj) = (model.score(&points[i]), model.score(&points[j]));
                if fi < 0.0 && fj >= 0.0 && vector::distance(&points[i], &points[j]) < r {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn canonical_pair_is_found() {
        let psi = 0.6_f64;
        let (s, c) = ((psi / 2.0).sin(), (psi / 2.0).cos());
        let pts = vec![vec![s, c], vec![-s, c]];
        let m = LinearModel::homogeneous(vec![1.0, 0.0]);
        let cfg = BoundaryConfig::new(2.0 * s + 1e-9).unwrap();
        assert_eq!(boundary_pairs(&pts, &m, &cfg).unwrap().pairs, vec![(1, 0)]);
        // the distance condition is strict
        let cfg = BoundaryConfig::new(2.0 * s).unwrap();
        assert!(boundary_pairs(&pts, &m, &cfg).unwrap().is_empty());
    }

    #[test]
    fn same_side_points_have_no_pairs() {
        let pts = vec![vec![0.1, 0.0], vec![0.2, 0.0]];
        let m = LinearModel::homogeneous(vec![1.0, 0.0]);
        let cfg = BoundaryConfig::new(1.0).unwrap();
        assert!(boundary_pairs(&pts, &m, &cfg).unwrap().is_empty());
    }

    #[test]
    fn pruned_scan_equals_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let pts: Vec<Vec<f64>> = (0..1000)
            .map(|_| vector::random_unit(5, &mut rng))
            .collect();
        let w: Vec<f64> = vector::random_unit(5, &mut rng);
        let m = LinearModel::new(w, 0.05);
        let cfg = BoundaryConfig::new(0.3).unwrap();
        let got = boundary_pairs(&pts, &m, &cfg).unwrap();
        assert!(!got.is_empty());
        assert_eq!(got.pairs, brute_force(&pts, &m, 0.3));
    }

    #[test]
    fn both_directions_are_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<Vec<f64>> = (0..200).map(|_| vector::random_unit(3, &mut rng)).collect();
        let m = LinearModel::homogeneous(vec![0.0, 1.0, 0.0]);
        let cfg = BoundaryConfig::new(0.4).unwrap().both_directions();
        let got = boundary_pairs(&pts, &m, &cfg).unwrap();
        let set: std::collections::HashSet<_> = got.pairs.iter().copied().collect();
        assert!(got.pairs.iter().all(|&(i, j)| set.contains(&(j, i))));
    }

    #[test]
    fn band_examples() {
        let w = [1.0, 0.0];
        let flags = band_membership(
            &[
                vec![0.5, 3.0_f64.sqrt() / 2.0],
                vec![0.9, (1.0_f64 - 0.81).sqrt()],
            ],
            &w,
            1.0,
        )
        .unwrap();
        assert_eq!(flags, vec![true, false]);
        let psi = angle_psi(1.0_f64).unwrap();
        let edge = vec![psi.sin(), psi.cos()];
        assert_eq!(band_membership(&[edge], &w, 1.0).unwrap(), vec![false]);
        assert!(matches!(
            band_membership(&[vec![2.0, 0.0]], &w, 1.0),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn pair_members_lie_in_band() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let w: Vec<f64> = vector::random_unit(4, &mut rng);
        let pts: Vec<Vec<f64>> = (0..800).map(|_| vector::random_unit(4, &mut rng)).collect();
        let m = LinearModel::homogeneous(w.clone());
        let r = 0.35;
        let pairs = boundary_pairs(&pts, &m, &BoundaryConfig::new(r).unwrap()).unwrap();
        let band = band_membership(&pts, &w, r).unwrap();
        assert!(pairs.members().iter().all(|&i| band[i]));
    }

    #[test]
    fn composition_examples() {
        assert_eq!(
            group_composition(&[false, false], &["a", "b"]).unwrap(),
            None
        );
        let c = group_composition(&[true, true, false], &["a", "a", "b"])
            .unwrap()
            .unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c["a"], 1.0);
        let c = group_composition(&[true, false, true, true], &["a", "b", "b", "b"])
            .unwrap()
            .unwrap();
        assert!((c["a"] - 1.0 / 3.0).abs() < 1e-15 && (c["b"] - 2.0 / 3.0).abs() < 1e-15);
        assert!(group_composition(&[true], &["a", "b"]).is_err());
    }
}
