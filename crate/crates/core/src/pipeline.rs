//! Certainty curves over a grid of omission percentiles.
//!
//! For each percentile `l`: withhold the `l` percent of explanations closest
//! to the margin, sample the version space of what remains, and summarise
//! boundary certainty over the boundary pairs of the dataset.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{boundary_pairs, BoundaryConfig, BoundaryPairSet};
use crate::certainty::{certainty_metrics, Metric};
use crate::error::{domain, Error, Result};
use crate::explain::{k_medoid, margin_distance_filter, mmd_critic_prototypes, DistancingConfig};
use crate::model::{ExplanationSet, LinearModel};
use crate::scalar::Scalar;
use crate::search::CertaintyCurve;
use crate::version_space::{
    hit_and_run_raw, polytope_from_explanations, samples_to_models, BoundingBody,
    ConsistencyPolytope, WalkConfig,
};

/// How the released explanation set is chosen from the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ExplanationMethod {
    /// Every data point.
    All,
    KMedoid {
        k: usize,
    },
    MmdCritic {
        k: usize,
        bandwidth: Option<f64>,
    },
}

impl Default for ExplanationMethod {
    fn default() -> Self {
        ExplanationMethod::KMedoid { k: 50 }
    }
}

/// Hit-and-run settings; unset burn-in and thinning default to `1000·dim`
/// and `10·dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub n: usize,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub box_bound: f64,
    pub body: BoundingBody,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            burn_in: None,
            thin: None,
            box_bound: 1.0,
            body: BoundingBody::Cube,
        }
    }
}

impl SamplerConfig {
    pub fn walk(&self, dim: usize, seed: u64, stream: u64) -> WalkConfig {
        let mut w = WalkConfig::for_dim(dim, self.n, seed);
        w.burn_in = self.burn_in.unwrap_or(w.burn_in);
        w.thin = self.thin.unwrap_or(w.thin);
        w.stream = stream;
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveConfig {
    /// Omission percentiles, strictly ascending in `[0, 100]`.
    pub grid: Vec<f64>,
    pub r: f64,
    pub positive_flip_only: bool,
    pub per_class: bool,
    pub sampler: SamplerConfig,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            grid: (0..=15).map(|i| 5.0 * i as f64).collect(),
            r: 0.1,
            positive_flip_only: true,
            per_class: true,
            sampler: SamplerConfig::default(),
            repeats: 8,
            seed: 0,
        }
    }
}

/// The explanation set released before any distancing, labelled by `model`.
pub fn select_explanations<T: Scalar>(
    points: &[Vec<T>],
    model: &LinearModel<T>,
    method: &ExplanationMethod,
    seed: u64,
) -> Result<ExplanationSet<T>> {
    let chosen: Vec<usize> = match *method {
        ExplanationMethod::All => (0..points.len()).collect(),
        ExplanationMethod::KMedoid { k } => k_medoid(points, k, seed)?.indices,
        ExplanationMethod::MmdCritic { k, bandwidth } => {
            mmd_critic_prototypes(points, k, bandwidth.map(T::lit))?.indices
        }
    };
    ExplanationSet::from_model(model, chosen.iter().map(|&i| points[i].clone()).collect())
}

/// Consistency polytope of `expl` in `ℝ^dim`; with no explanations it is the
/// whole bounding body.
pub fn version_space_polytope<T: Scalar>(
    expl: &ExplanationSet<T>,
    dim: usize,
    sampler: &SamplerConfig,
) -> Result<ConsistencyPolytope<T>> {
    let bound = T::lit(sampler.box_bound);
    let poly = if expl.is_empty() {
        ConsistencyPolytope::new(dim, Vec::new(), bound)?
    } else {
        polytope_from_explanations(expl, bound)?
    };
    Ok(poly.with_body(sampler.body))
}

/// Classifier samples from the version space of `expl`. Affine models are
/// handled in the lifted space `ℝ^{d+1}` and returned with their bias.
pub fn version_space_models<T: Scalar>(
    expl: &ExplanationSet<T>,
    dim: usize,
    lifted: bool,
    sampler: &SamplerConfig,
    seed: u64,
    stream: u64,
) -> Result<Vec<LinearModel<T>>> {
    let (expl, dim) = if lifted {
        (expl.lifted(), dim + 1)
    } else {
        (expl.clone(), dim)
    };
    let poly = version_space_polytope(&expl, dim, sampler)?;
    let raw = hit_and_run_raw(&poly, &sampler.walk(dim, seed, stream))?;
    Ok(samples_to_models(raw, lifted))
}

/// Metric triples `(max, top5, mean)` per repeat at one grid point, or
/// `None` when no estimate exists there.
fn grid_point<T: Scalar>(
    points: &[Vec<T>],
    model: &LinearModel<T>,
    expl: &ExplanationSet<T>,
    pairs: &BoundaryPairSet,
    cfg: &CurveConfig,
    index: usize,
) -> Result<Option<Vec<[T; 3]>>> {
    let l = cfg.grid[index];
    let filtered = margin_distance_filter(
        expl,
        &DistancingConfig {
            l,
            per_class: cfg.per_class,
        },
    )?;
    let lifted = !model.is_homogeneous();
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut out = Vec::with_capacity(cfg.repeats);
    for rep in 0..cfg.repeats {
        let samples = match version_space_models(
            &filtered,
            model.dim(),
            lifted,
            &cfg.sampler,
            seed,
            rep as u64,
        ) {
            Ok(s) => s,
            Err(e @ (Error::Infeasible(_) | Error::StuckWalk { .. })) => {
                log::warn!("percentile {l}: {e}; recorded as missing");
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        match certainty_metrics(&samples, points, pairs)? {
            Some(r) => out.push([r.max_pi, r.top5_mean, r.mean_pi]),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

fn mean_std<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::from_count(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}

/// One curve per metric (`max`, `top5`, `mean`, in that order) from shared
/// samples. Grid points are evaluated in parallel; grid point `i` uses seed
/// `cfg.seed + i` and repeat `k` uses stream `k`, so results do not depend
/// on scheduling.
pub fn certainty_curves<T: Scalar>(
    points: &[Vec<T>],
    model: &LinearModel<T>,
    expl: &ExplanationSet<T>,
    cfg: &CurveConfig,
) -> Result<Vec<CertaintyCurve<T>>> {
    if cfg.repeats == 0 {
        return domain("repeats must be positive");
    }
    let r = T::lit(cfg.r);
    let probe = CertaintyCurve::<T> {
        grid: cfg.grid.clone(),
        values: vec![None; cfg.grid.len()],
        stddev: vec![None; cfg.grid.len()],
        repeats: cfg.repeats,
        metric: Metric::Max,
        r,
    };
    probe.validate()?;
    let mut bcfg = BoundaryConfig::new(r)?;
    bcfg.positive_flip_only = cfg.positive_flip_only;
    let pairs = boundary_pairs(points, model, &bcfg)?;
    if pairs.is_empty() {
        log::warn!(
            "no boundary pairs at r = {}; every grid point is missing",
            cfg.r
        );
    }

    let per_point: Vec<Option<Vec<[T; 3]>>> = (0..cfg.grid.len())
        .into_par_iter()
        .map(|i| {
            if pairs.is_empty() {
                Ok(None)
            } else {
                grid_point(points, model, expl, &pairs, cfg, i)
            }
        })
        .collect::<Result<_>>()?;

    Ok(Metric::ALL
        .iter()
        .enumerate()
        .map(|(m, &metric)| {
            let stats: Vec<Option<(T, T)>> = per_point
                .iter()
                .map(|p| {
                    p.as_ref()
                        .map(|reps| mean_std(&reps.iter().map(|t| t[m]).collect::<Vec<_>>()))
                })
                .collect();
            CertaintyCurve {
                grid: cfg.grid.clone(),
                values: stats.iter().map(|s| s.map(|s| s.0)).collect(),
                stddev: stats.iter().map(|s| s.map(|s| s.1)).collect(),
                repeats: cfg.repeats,
                metric,
                r,
            }
        })
        .collect())
}

/// The curve of a single metric.
pub fn certainty_curve<T: Scalar>(
    points: &[Vec<T>],
    model: &LinearModel<T>,
    expl: &ExplanationSet<T>,
    cfg: &CurveConfig,
    metric: Metric,
) -> Result<CertaintyCurve<T>> {
    let curves = certainty_curves(points, model, expl, cfg)?;
    Ok(curves
        .into_iter()
        .find(|c| c.metric == metric)
        .expect("every metric has a curve"))
}
