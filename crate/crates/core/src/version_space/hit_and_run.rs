use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::LinearModel;
use crate::scalar::{vector, Scalar};

use super::polytope::{BoundingBody, ConsistencyPolytope};

/// A chord shorter than this counts as a stalled step.
pub const MIN_CHORD: f64 = 1e-14;
/// Consecutive stalled steps before the walk is declared stuck.
pub const MAX_STALLED: usize = 100;
const MAX_REDRAWS: usize = 32;

/// Hit-and-run schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Retained samples.
    pub n: usize,
    /// Steps discarded before the first retained sample.
    pub burn_in: usize,
    /// Steps between retained samples.
    pub thin: usize,
    pub seed: u64,
    /// ChaCha stream, so that repeated runs under one seed stay independent.
    #[serde(default)]
    pub stream: u64,
}

impl WalkConfig {
    /// Burn-in `1000·dim`, thinning `10·dim`.
    pub fn for_dim(dim: usize, n: usize, seed: u64) -> Self {
        Self {
            n,
            burn_in: 1000 * dim,
            thin: 10 * dim,
            seed,
            stream: 0,
        }
    }
}

/// Feasible step interval `[lo, hi]` along `dir` from the interior point `x`.
fn chord<T: Scalar>(poly: &ConsistencyPolytope<T>, x: &[T], dir: &[T]) -> (T, T) {
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    for h in &poly.halfspaces {
        let q = vector::dot(&h.normal, dir);
        if q == T::zero() {
            continue;
        }
        let t = -h.slack(x) / q;
        if q > T::zero() {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
    }
    let b = poly.box_bound;
    match poly.body {
        BoundingBody::Cube => {
            for (&xi, &ui) in x.iter().zip(dir) {
                if ui > T::zero() {
                    hi = hi.min((b - xi) / ui);
                    lo = lo.max((-b - xi) / ui);
                } else if ui < T::zero() {
                    hi = hi.min((-b - xi) / ui);
                    lo = lo.max((b - xi) / ui);
                }
            }
        }
        BoundingBody::Ball => {
            let xu = vector::dot(x, dir);
            let disc = xu * xu - (vector::dot(x, x) - b * b);
            let root = disc.max(T::zero()).sqrt();
            lo = lo.max(-xu - root);
            hi = hi.min(-xu + root);
        }
    }
    (lo, hi)
}

/// Runs hit-and-run from the polytope's Chebyshev centre and returns the
/// retained points without normalisation. Every returned point satisfies all
/// constraints of `poly`.
pub fn hit_and_run_raw<T: Scalar>(
    poly: &ConsistencyPolytope<T>,
    cfg: &WalkConfig,
) -> Result<Vec<Vec<T>>> {
    if cfg.n == 0 {
        return domain("sample count must be positive");
    }
    let (mut x, _) = poly.interior_point()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cfg.stream);

    let thin = cfg.thin.max(1);
    let total = cfg.burn_in + cfg.n * thin;
    let min_chord = T::lit(MIN_CHORD);
    let mut stalled = 0;
    let mut out = Vec::with_capacity(cfg.n);
    let mut next = vec![T::zero(); poly.dim];

    for step in 1..=total {
        let dir: Vec<T> = vector::random_unit(poly.dim, &mut rng);
        let (lo, hi) = chord(poly, &x, &dir);
        if !(hi - lo > min_chord) {
            stalled += 1;
            if stalled >= MAX_STALLED {
                return Err(Error::StuckWalk {
                    threshold: MIN_CHORD,
                    steps: MAX_STALLED,
                });
            }
        } else {
            stalled = 0;
            // rounding can place the endpoint a hair outside; redraw then
            for _ in 0..MAX_REDRAWS {
                let t = lo + (hi - lo) * T::sample_unit(&mut rng);
                for ((n, &xi), &ui) in next.iter_mut().zip(&x).zip(&dir) {
                    *n = xi + t * ui;
                }
                if poly.contains(&next) {
                    std::mem::swap(&mut x, &mut next);
                    break;
                }
            }
        }
        if step > cfg.burn_in && (step - cfg.burn_in).is_multiple_of(thin) {
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// Approximately uniform samples from `poly`, each scaled onto the unit
/// sphere. Sign classifiers are invariant to positive scaling, so the
/// normalisation only affects reporting.
pub fn hit_and_run_sample<T: Scalar>(
    poly: &ConsistencyPolytope<T>,
    cfg: &WalkConfig,
) -> Result<Vec<Vec<T>>> {
    Ok(hit_and_run_raw(poly, cfg)?
        .into_iter()
        .map(|v| vector::normalized(&v).unwrap_or(v))
        .collect())
}

/// Samples read as homogeneous models over `ℝ^{dim}`; with `lifted` the
/// last coordinate is the bias.
pub fn samples_to_models<T: Scalar>(samples: Vec<Vec<T>>, lifted: bool) -> Vec<LinearModel<T>> {
    samples
        .into_iter()
        .map(|v| {
            if lifted {
                LinearModel::from_lifted(&v)
            } else {
                LinearModel::homogeneous(v)
            }
        })
        .collect()
}
