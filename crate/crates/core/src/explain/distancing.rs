use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::ExplanationSet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistancingConfig {
    /// Percentile of closest-to-margin explanations to withhold, in `[0, 100]`.
    pub l: f64,
    /// Apply the percentile within each label class separately.
    pub per_class: bool,
}

impl DistancingConfig {
    pub fn new(l: f64) -> Result<Self> {
        let cfg = Self { l, per_class: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.l) {
            return domain(format!("percentile must lie in [0, 100], got {}", self.l));
        }
        Ok(())
    }
}

/// Number of the `m` points removed at percentile `l`: `floor(l·m/100)`.
pub fn removal_count(l: f64, m: usize) -> usize {
    ((l * m as f64 / 100.0).floor() as usize).min(m)
}

/// Indices kept by [`margin_distance_filter`], in original order.
pub fn margin_distance_selection<T: Scalar>(
    expl: &ExplanationSet<T>,
    cfg: &DistancingConfig,
) -> Result<Vec<usize>> {
    cfg.validate()?;
    let classes: Vec<Vec<usize>> = if cfg.per_class {
        [-1i8, 1]
            .iter()
            .map(|&c| (0..expl.len()).filter(|&i| expl.labels[i] == c).collect())
            .collect()
    } else {
        vec![(0..expl.len()).collect()]
    };
    let mut keep = vec![true; expl.len()];
    for mut class in classes {
        let drop = removal_count(cfg.l, class.len());
        class.sort_by(|&a, &b| {
            expl.margins[a]
                .abs()
                .partial_cmp(&expl.margins[b].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for &i in &class[..drop] {
            keep[i] = false;
        }
    }
    Ok((0..expl.len()).filter(|&i| keep[i]).collect())
}

/// Withholds the `l` percent of explanations closest to the decision
/// boundary (smallest `|margin|`, ties by index), per class by default.
/// Surviving explanations keep their relative order.
pub fn margin_distance_filter<T: Scalar>(
    expl: &ExplanationSet<T>,
    cfg: &DistancingConfig,
) -> Result<ExplanationSet<T>> {
    Ok(expl.select(&margin_distance_selection(expl, cfg)?))
}
