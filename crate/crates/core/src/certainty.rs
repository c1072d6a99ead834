//! Monte Carlo estimates of boundary certainty from version-space samples.
//!
//! For a pair `(x, x′)` the estimate is `ρ̂(x′) − ρ̂(x)`, where `ρ̂(z)` is the
//! share of sampled classifiers labelling `z` positive.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::BoundaryPairSet;
use crate::error::{check_dim, domain, Result};
use crate::model::LinearModel;
use crate::scalar::Scalar;

/// Constant in the sample-size bound.
pub const SAMPLE_CONSTANT: f64 = 8.0;

/// Share of pairs averaged by the `top5` metric.
pub const TOP_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEstimate<T> {
    /// Position of the pair in its [`BoundaryPairSet`].
    pub pair: usize,
    pub i: usize,
    pub j: usize,
    pub pi_hat: T,
    pub stderr: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertaintyReport<T> {
    pub per_pair: Vec<PairEstimate<T>>,
    pub max_pi: T,
    pub top5_mean: T,
    pub mean_pi: T,
    pub n_samples: usize,
    /// Largest per-pair standard error.
    pub stderr_bound: T,
}

impl<T: Scalar> CertaintyReport<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat CSV with columns `pair,i,j,pi_hat,stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.per_pair {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Which summary of the per-pair estimates a search targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Max,
    Top5,
    Mean,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Max, Metric::Top5, Metric::Mean];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Max => "max",
            Metric::Top5 => "top5",
            Metric::Mean => "mean",
        }
    }

    pub fn of<T: Scalar>(self, report: &CertaintyReport<T>) -> T {
        match self {
            Metric::Max => report.max_pi,
            Metric::Top5 => report.top5_mean,
            Metric::Mean => report.mean_pi,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Metric::Max),
            "top5" => Ok(Metric::Top5),
            "mean" => Ok(Metric::Mean),
            other => domain(format!(
                "unknown metric {other:?} (expected max, top5 or mean)"
            )),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn positive_count<T: Scalar>(samples: &[LinearModel<T>], x: &[T]) -> usize {
    samples.iter().filter(|h| h.predict(x) > 0).count()
}

fn binomial_se<T: Scalar>(count: usize, n: usize) -> T {
    let p = T::from_count(count) / T::from_count(n);
    (p * (T::one() - p) / T::from_count(n)).sqrt()
}

fn pair_value<T: Scalar>(ci: usize, cj: usize, n: usize) -> (T, T) {
    let pi = (T::from_count(cj) - T::from_count(ci)) / T::from_count(n);
    (pi, binomial_se::<T>(ci, n) + binomial_se::<T>(cj, n))
}

/// `ρ̂(x′) − ρ̂(x)` and the conservative standard error
/// `√(p̂₁(1−p̂₁)/n) + √(p̂₂(1−p̂₂)/n)`.
pub fn estimate_pi<T: Scalar>(
    samples: &[LinearModel<T>],
    x: &[T],
    x_prime: &[T],
) -> Result<(T, T)> {
    if samples.is_empty() {
        return domain("no classifier samples");
    }
    for h in samples {
        check_dim(h.dim(), x.len())?;
        check_dim(h.dim(), x_prime.len())?;
    }
    let n = samples.len();
    Ok(pair_value(
        positive_count(samples, x),
        positive_count(samples, x_prime),
        n,
    ))
}

/// Number of `ceil(TOP_FRACTION·m)` values averaged by the top metric.
pub fn top_count(m: usize) -> usize {
    ((TOP_FRACTION * m as f64).ceil() as usize).clamp(1, m.max(1))
}

/// Summary metrics over all boundary pairs, or `None` when there are no
/// pairs (nothing can be gamed at this radius).
pub fn certainty_metrics<T: Scalar>(
    samples: &[LinearModel<T>],
    points: &[Vec<T>],
    pairs: &BoundaryPairSet,
) -> Result<Option<CertaintyReport<T>>> {
    if samples.is_empty() {
        return domain("no classifier samples");
    }
    if pairs.is_empty() {
        return Ok(None);
    }
    let n = samples.len();
    for h in samples {
        for p in points {
            check_dim(h.dim(), p.len())?;
        }
    }
    let members = pairs.members();
    if let Some(&last) = members.last() {
        if last >= points.len() {
            return domain(format!(
                "pair index {last} out of range for {} points",
                points.len()
            ));
        }
    }
    let mut counts = vec![0usize; points.len()];
    let computed: Vec<(usize, usize)> = members
        .par_iter()
        .map(|&k| (k, positive_count(samples, &points[k])))
        .collect();
    for (k, c) in computed {
        counts[k] = c;
    }

    let per_pair: Vec<PairEstimate<T>> = pairs
        .pairs
        .iter()
        .enumerate()
        .map(|(pair, &(i, j))| {
            let (pi_hat, stderr) = pair_value(counts[i], counts[j], n);
            PairEstimate {
                pair,
                i,
                j,
                pi_hat,
                stderr,
            }
        })
        .collect();
    Ok(Some(summarize(per_pair, n)))
}

/// Summary metrics of precomputed per-pair estimates.
pub fn summarize<T: Scalar>(
    per_pair: Vec<PairEstimate<T>>,
    n_samples: usize,
) -> CertaintyReport<T> {
    let m = per_pair.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        per_pair[b]
            .pi_hat
            .partial_cmp(&per_pair[a].pi_hat)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(per_pair[b].pair.cmp(&per_pair[a].pair))
    });
    let k = top_count(m);
    let top5_mean = order[..k].iter().map(|&o| per_pair[o].pi_hat).sum::<T>() / T::from_count(k);
    let max_pi = per_pair[order[0]].pi_hat;
    let mean_pi = per_pair.iter().map(|p| p.pi_hat).sum::<T>() / T::from_count(m);
    let stderr_bound = per_pair.iter().map(|p| p.stderr).fold(T::zero(), T::max);
    CertaintyReport {
        per_pair,
        max_pi,
        top5_mean,
        mean_pi,
        n_samples,
        stderr_bound,
    }
}

/// `ceil(C·(vc_dual + ln(1/δ))/ε²)` with [`SAMPLE_CONSTANT`].
pub fn required_samples(epsilon: f64, delta: f64, vc_dual: usize) -> Result<usize> {
    required_samples_with(SAMPLE_CONSTANT, epsilon, delta, vc_dual)
}

pub fn required_samples_with(c: f64, epsilon: f64, delta: f64, vc_dual: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    if vc_dual == 0 {
        return domain("dual VC dimension must be at least 1");
    }
    if !(c > 0.0) {
        return domain(format!("sample constant must be positive, got {c}"));
    }
    let v = c * (vc_dual as f64 + (1.0 / delta).ln()) / (epsilon * epsilon);
    Ok(v.ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::version_space::{cap_from_alpha, sample_cap_models};
    use std::f64::consts::FRAC_PI_4;

    fn est(pair: usize, v: f64) -> PairEstimate<f64> {
        PairEstimate {
            pair,
            i: 0,
            j: 1,
            pi_hat: v,
            stderr: 0.0,
        }
    }

    #[test]
    fn unanimous_samples_give_one() {
        let s = vec![LinearModel::homogeneous(vec![1.0, 0.0]); 10];
        let (pi, se) = estimate_pi(&s, &[-1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!((pi, se), (1.0, 0.0));
        let (pi, _) = estimate_pi(&s, &[0.3, 0.1], &[0.3, 0.1]).unwrap();
        assert_eq!(pi, 0.0);
        assert!(estimate_pi::<f64>(&[], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn arc_fraction_in_the_plane() {
        let (phi, psi) = (FRAC_PI_4, FRAC_PI_4);
        let a = psi / 8.0;
        let x = [-a.sin(), a.cos()];
        let xp = [a.sin(), a.cos()];
        let cap = cap_from_alpha(&[1.0, 0.0], phi.sin()).unwrap();
        let s = sample_cap_models(&cap, 200_000, 7);
        let (pi, se) = estimate_pi(&s, &x, &xp).unwrap();
        // oracle: w = (cos t, sin t), t uniform on [−φ, φ]; x′ positive iff
        // t ≥ −a, x positive iff t ≥ a, so the pair flips on [−a, a)
        let exact = (2.0 * a) / (2.0 * phi);
        assert!((exact - 0.125).abs() < 1e-15);
        assert!((pi - exact).abs() <= 4.0 * se, "{pi} vs {exact}");
    }

    #[test]
    fn metric_arithmetic() {
        let r = summarize(vec![est(0, 0.1), est(1, 0.2), est(2, 0.9), est(3, 0.4)], 10);
        assert_eq!(r.max_pi, 0.9);
        assert_eq!(r.top5_mean, 0.9);
        assert!((r.mean_pi - 0.4).abs() < 1e-15);
        let r = summarize(vec![est(0, -0.3)], 10);
        assert_eq!((r.max_pi, r.top5_mean, r.mean_pi), (-0.3, -0.3, -0.3));
    }

    #[test]
    fn top_count_uses_ceiling() {
        assert_eq!(top_count(1), 1);
        assert_eq!(top_count(20), 1);
        assert_eq!(top_count(21), 2);
        assert_eq!(top_count(100), 5);
        assert_eq!(top_count(101), 6);
    }

    #[test]
    fn top_ties_prefer_larger_pair_index() {
        let mut v: Vec<_> = (0..40).map(|k| est(k, 0.0)).collect();
        v[3].pi_hat = 0.5;
        v[30].pi_hat = 0.5;
        v[10].pi_hat = 0.7;
        // two slots: 0.7 and the later of the tied 0.5s
        let r = summarize(v, 10);
        assert!((r.top5_mean - 0.6).abs() < 1e-15);
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(required_samples(0.1, 0.05, 3).unwrap(), 4797);
        assert!(required_samples(1.0, 0.05, 3).is_err());
        assert!(required_samples(0.1, 0.0, 3).is_err());
        assert!(required_samples(0.1, 0.05, 0).is_err());
        // b = ceil(4v) and a = ceil(v), so 4a − 3 ≤ b ≤ 4a
        for eps in [0.5, 0.2, 0.1, 0.03] {
            let a = required_samples(eps, 0.05, 3).unwrap();
            let b = required_samples(eps / 2.0, 0.05, 3).unwrap();
            assert!(b <= 4 * a && b + 3 >= 4 * a, "{a} {b}");
        }
    }

    #[test]
    fn canonical_pair_tracks_closed_form() {
        use crate::boundary::BoundaryPairSet;
        let (phi, psi) = (0.7_f64, 0.5_f64);
        let h = psi / 2.0;
        let pts = vec![vec![-h.sin(), h.cos()], vec![h.sin(), h.cos()]];
        let cap = cap_from_alpha(&[1.0, 0.0], phi.sin()).unwrap();
        let s = sample_cap_models(&cap, 100_000, 11);
        let pairs = BoundaryPairSet {
            pairs: vec![(0, 1)],
        };
        let r = certainty_metrics(&s, &pts, &pairs).unwrap().unwrap();
        let exact = (psi / (2.0 * phi)).min(1.0);
        assert!((r.max_pi - exact).abs() <= 3.0 * r.stderr_bound);
        assert!(certainty_metrics(&s, &pts, &BoundaryPairSet::default())
            .unwrap()
            .is_none());
    }
}
