//! Seeded synthetic datasets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::io::Dataset;
use crate::model::sign;
use crate::scalar::{vector, Scalar};

fn feature_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

/// `n` uniform points on the unit sphere in `ℝ^d`, labelled by
/// `sign(⟨w_star, x⟩)`.
pub fn sphere_dataset<T: Scalar>(n: usize, w_star: &[T], seed: u64) -> Result<Dataset<T>> {
    let d = w_star.len();
    if d < 2 {
        return domain("sphere data needs at least two dimensions");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<T>> = (0..n).map(|_| vector::random_unit(d, &mut rng)).collect();
    let labels = points
        .iter()
        .map(|x| sign(vector::dot(w_star, x)))
        .collect();
    Ok(Dataset {
        features: feature_names(d),
        points,
        labels,
        groups: None,
    })
}

/// Two isotropic unit-variance Gaussian classes of `n/2` points each, with
/// means `∓(separation/2)·e₁` and labels `∓1`. Each point also gets a group
/// `"a"` or `"b"` with probability one half, independent of the class.
pub fn two_gaussians<T: Scalar>(
    n: usize,
    d: usize,
    separation: T,
    seed: u64,
) -> Result<Dataset<T>> {
    if d == 0 {
        return domain("dimension must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = separation * T::lit(0.5);
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for i in 0..n {
        let y: i8 = if i < n / 2 { -1 } else { 1 };
        let mut x: Vec<T> = (0..d).map(|_| T::sample_normal(&mut rng)).collect();
        x[0] += T::lit(y as f64) * half;
        points.push(x);
        labels.push(y);
        let g = if T::sample_unit(&mut rng) < T::lit(0.5) {
            "a"
        } else {
            "b"
        };
        groups.push(g.to_string());
    }
    Ok(Dataset {
        features: feature_names(d),
        points,
        labels,
        groups: Some(groups),
    })
}
