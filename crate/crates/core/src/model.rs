//! Linear classifiers and labelled explanation sets.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Result};
use crate::scalar::{vector, Scalar};

/// Sign with the convention `sign(0) = +1`.
#[inline]
pub fn sign<T: Scalar>(v: T) -> i8 {
    if v >= T::zero() {
        1
    } else {
        -1
    }
}

/// `x ↦ sign(⟨w, x⟩ + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel<T> {
    pub w: Vec<T>,
    #[serde(default)]
    pub b: T,
}

impl<T: Scalar> LinearModel<T> {
    pub fn new(w: Vec<T>, b: T) -> Self {
        Self { w, b }
    }

    pub fn homogeneous(w: Vec<T>) -> Self {
        Self { w, b: T::zero() }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.b == T::zero()
    }

    /// Signed margin score `f(x) = ⟨w, x⟩ + b`.
    #[inline]
    pub fn score(&self, x: &[T]) -> T {
        vector::dot(&self.w, x) + self.b
    }

    #[inline]
    pub fn predict(&self, x: &[T]) -> i8 {
        sign(self.score(x))
    }

    /// True when `‖w‖ = 1` (to `1e-10`) and `b = 0`.
    pub fn is_unit_homogeneous(&self) -> bool {
        let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
        self.is_homogeneous() && (vector::norm(&self.w) - T::one()).abs() <= tol
    }

    /// Rescales `(w, b)` so that `‖w‖ = 1`; the classifier is unchanged.
    pub fn normalized(&self) -> Result<Self> {
        let n = vector::norm(&self.w);
        if !(n > T::zero()) || !n.is_finite() {
            return domain("cannot normalise a model with zero weight vector");
        }
        Ok(Self {
            w: self.w.iter().map(|&x| x / n).collect(),
            b: self.b / n,
        })
    }

    /// `(w, b)` as one vector in the lifted space `ℝ^{d+1}`.
    pub fn lifted(&self) -> Vec<T> {
        let mut v = self.w.clone();
        v.push(self.b);
        v
    }

    /// Inverse of [`LinearModel::lifted`].
    pub fn from_lifted(v: &[T]) -> Self {
        let (w, b) = v.split_at(v.len() - 1);
        Self {
            w: w.to_vec(),
            b: b[0],
        }
    }
}

/// Signed margin scores of `points` under `model`.
pub fn margin_scores<T: Scalar>(model: &LinearModel<T>, points: &[Vec<T>]) -> Result<Vec<T>> {
    points
        .iter()
        .map(|x| {
            check_dim(model.dim(), x.len())?;
            Ok(model.score(x))
        })
        .collect()
}

/// Labelled explanation points released by the organisation.
///
/// `labels[i]` is the model's prediction on `points[i]` and `margins[i]` the
/// absolute margin score `|f(points[i])|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationSet<T> {
    pub points: Vec<Vec<T>>,
    pub labels: Vec<i8>,
    pub margins: Vec<T>,
}

impl<T: Scalar> ExplanationSet<T> {
    pub fn new(points: Vec<Vec<T>>, labels: Vec<i8>, margins: Vec<T>) -> Result<Self> {
        if points.len() != labels.len() || points.len() != margins.len() {
            return domain(format!(
                "explanation columns differ in length: {} points, {} labels, {} margins",
                points.len(),
                labels.len(),
                margins.len()
            ));
        }
        if let Some(l) = labels.iter().find(|&&l| l != 1 && l != -1) {
            return domain(format!("labels must be ±1, found {l}"));
        }
        if let Some(first) = points.first() {
            for p in &points {
                check_dim(first.len(), p.len())?;
            }
        }
        Ok(Self {
            points,
            labels,
            margins,
        })
    }

    /// Labels and margins come from `model`.
    pub fn from_model(model: &LinearModel<T>, points: Vec<Vec<T>>) -> Result<Self> {
        let scores = margin_scores(model, &points)?;
        let labels = scores.iter().map(|&s| sign(s)).collect();
        let margins = scores.iter().map(|s| s.abs()).collect();
        Ok(Self {
            points,
            labels,
            margins,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }

    /// Keeps the listed indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            margins: indices.iter().map(|&i| self.margins[i]).collect(),
        }
    }

    /// Appends a constant `1` coordinate so that an affine model becomes a
    /// homogeneous one over `ℝ^{d+1}`.
    pub fn lifted(&self) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    q.push(T::one());
                    q
                })
                .collect(),
            labels: self.labels.clone(),
            margins: self.margins.clone(),
        }
    }
}

/// True iff `model` reproduces every explanation label.
pub fn consistency_check<T: Scalar>(model: &LinearModel<T>, expl: &ExplanationSet<T>) -> bool {
    expl.points
        .iter()
        .zip(&expl.labels)
        .all(|(x, &y)| x.len() == model.dim() && model.predict(x) == y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_score_examples() {
        let m = LinearModel::homogeneous(vec![1.0, 0.0]);
        assert_eq!(margin_scores(&m, &[vec![0.3, 0.9]]).unwrap(), vec![0.3]);
        assert_eq!(margin_scores(&m, &[vec![0.0, 0.7]]).unwrap(), vec![0.0]);
        let m = LinearModel::new(vec![2.0, 0.0], -1.0);
        assert_eq!(margin_scores(&m, &[vec![1.0, 0.0]]).unwrap(), vec![1.0]);
        assert!(margin_scores(&m, &[vec![1.0]]).is_err());
    }

    #[test]
    fn sign_of_zero_is_positive() {
        assert_eq!(sign(0.0_f64), 1);
        assert_eq!(sign(-0.0_f32), 1);
        assert_eq!(sign(-1e-300_f64), -1);
    }

    #[test]
    fn consistency_examples() {
        let m = LinearModel::homogeneous(vec![0.0, 1.0]);
        let empty = ExplanationSet::<f64>::new(vec![], vec![], vec![]).unwrap();
        assert!(consistency_check(&m, &empty));

        let e = ExplanationSet::new(
            vec![vec![1.0, 0.1], vec![1.0, -0.1]],
            vec![1, -1],
            vec![0.1, 0.1],
        )
        .unwrap();
        assert!(consistency_check(&m, &e));

        let gen = LinearModel::new(vec![0.3, -2.0], 0.4);
        let pts = vec![vec![1.0, 1.0], vec![-3.0, 0.2], vec![0.0, 0.2]];
        let e = ExplanationSet::from_model(&gen, pts).unwrap();
        assert!(consistency_check(&gen, &e));
        assert!(!consistency_check(&m, &e));
    }

    #[test]
    fn lifting_round_trips() {
        let m = LinearModel::new(vec![0.5_f32, -1.0], 0.25);
        assert_eq!(LinearModel::from_lifted(&m.lifted()), m);
        let e = ExplanationSet::from_model(&m, vec![vec![1.0, 2.0]]).unwrap();
        let lifted = e.lifted();
        let lm = LinearModel::homogeneous(m.lifted());
        assert!(consistency_check(&lm, &lifted));
    }

    #[test]
    fn rejects_ragged_columns() {
        assert!(ExplanationSet::new(vec![vec![1.0]], vec![1, -1], vec![0.0]).is_err());
        assert!(ExplanationSet::new(vec![vec![1.0]], vec![0], vec![0.0]).is_err());
    }

    #[test]
    fn model_json_shape() {
        let m = LinearModel::homogeneous(vec![1.0, 0.0]);
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"w":[1.0,0.0],"b":0.0}"#
        );
        let back: LinearModel<f64> = serde_json::from_str(r#"{"w":[0.6,0.8]}"#).unwrap();
        assert!(back.is_unit_homogeneous());
    }
}
