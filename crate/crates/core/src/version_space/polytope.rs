use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Error, Result};
use crate::model::ExplanationSet;
use crate::scalar::{vector, Scalar};

/// `normal · w ≥ offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Halfspace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: Scalar> Halfspace<T> {
    #[inline]
    pub fn slack(&self, w: &[T]) -> T {
        vector::dot(&self.normal, w) - self.offset
    }
}

/// Convex body that bounds the (conic) consistency region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundingBody {
    /// `‖w‖_∞ ≤ B`.
    #[default]
    Cube,
    /// `‖w‖₂ ≤ B`. Uniform points of a cone ∩ ball have uniformly
    /// distributed directions, so normalised samples follow the uniform prior
    /// on the sphere exactly.
    Ball,
}

/// Linear classifiers (as weight vectors) consistent with every explanation,
/// intersected with a bounding body of radius `box_bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyPolytope<T> {
    pub dim: usize,
    pub halfspaces: Vec<Halfspace<T>>,
    pub box_bound: T,
    pub body: BoundingBody,
}

impl<T: Scalar> ConsistencyPolytope<T> {
    pub fn new(dim: usize, halfspaces: Vec<Halfspace<T>>, box_bound: T) -> Result<Self> {
        if dim == 0 {
            return domain("polytope dimension must be positive");
        }
        if !(box_bound > T::zero()) || !box_bound.is_finite() {
            return domain(format!("box bound must be positive, got {box_bound}"));
        }
        for h in &halfspaces {
            check_dim(dim, h.normal.len())?;
        }
        Ok(Self {
            dim,
            halfspaces,
            box_bound,
            body: BoundingBody::Cube,
        })
    }

    pub fn with_body(mut self, body: BoundingBody) -> Self {
        self.body = body;
        self
    }

    /// Whether `w` satisfies every halfspace and the bounding body.
    pub fn contains(&self, w: &[T]) -> bool {
        w.len() == self.dim
            && self.in_body(w)
            && self.halfspaces.iter().all(|h| h.slack(w) >= T::zero())
    }

    pub(crate) fn in_body(&self, w: &[T]) -> bool {
        match self.body {
            BoundingBody::Cube => w.iter().all(|x| x.abs() <= self.box_bound),
            BoundingBody::Ball => vector::dot(w, w) <= self.box_bound * self.box_bound,
        }
    }

    /// Chebyshev centre of the polytope (for the ball body, of its
    /// intersection with the inscribed cube) and the radius of the largest
    /// inscribed ball around it.
    ///
    /// Fails with [`Error::Infeasible`] when that radius is not strictly
    /// positive, i.e. there is no strictly interior point to start a walk.
    pub fn interior_point(&self) -> Result<(Vec<T>, T)> {
        let bound = match self.body {
            BoundingBody::Cube => self.box_bound.as_f64(),
            BoundingBody::Ball => self.box_bound.as_f64() / (self.dim as f64).sqrt(),
        };
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = (0..self.dim)
            .map(|_| lp.add_var(0.0, (-bound, bound)))
            .collect();
        let radius = lp.add_var(1.0, (0.0, bound));
        for &v in &vars {
            lp.add_constraint([(v, 1.0), (radius, 1.0)], ComparisonOp::Le, bound);
            lp.add_constraint([(v, -1.0), (radius, 1.0)], ComparisonOp::Le, bound);
        }
        for h in &self.halfspaces {
            let n = vector::norm(&h.normal).as_f64();
            if n == 0.0 {
                if h.offset > T::zero() {
                    return Err(Error::Infeasible("constraint 0 ≥ c with c > 0".into()));
                }
                continue;
            }
            let mut terms: Vec<_> = vars
                .iter()
                .zip(&h.normal)
                .map(|(&v, &a)| (v, a.as_f64() / n))
                .collect();
            terms.push((radius, -1.0));
            lp.add_constraint(terms, ComparisonOp::Ge, h.offset.as_f64() / n);
        }
        let solution = lp
            .solve()
            .map_err(|e| Error::Infeasible(format!("interior probe failed: {e:?}")))?
            .into_solution()
            .map_err(|_| Error::Infeasible("interior probe interrupted".into()))?;
        let r = solution.var_value(radius);
        if !(r > 1e-10 * bound) {
            return Err(Error::Infeasible(format!(
                "largest inscribed ball has radius {r:e}"
            )));
        }
        let center: Vec<T> = vars
            .iter()
            .map(|&v| T::lit(solution.var_value(v)))
            .collect();
        if !self.contains(&center) {
            return Err(Error::Infeasible(
                "interior probe returned an exterior point".into(),
            ));
        }
        Ok((center, T::lit(r)))
    }
}

/// One halfspace `label·⟨point, w⟩ ≥ 0` per explanation, bounded by the cube
/// `‖w‖_∞ ≤ box_bound`.
pub fn polytope_from_explanations<T: Scalar>(
    expl: &ExplanationSet<T>,
    box_bound: T,
) -> Result<ConsistencyPolytope<T>> {
    let Some(dim) = expl.dim() else {
        return domain("explanation set is empty");
    };
    let halfspaces = expl
        .points
        .iter()
        .zip(&expl.labels)
        .map(|(p, &y)| {
            let s = if y > 0 { T::one() } else { -T::one() };
            Halfspace {
                normal: p.iter().map(|&x| s * x).collect(),
                offset: T::zero(),
            }
        })
        .collect();
    let poly = ConsistencyPolytope::new(dim, halfspaces, box_bound)?;
    poly.interior_point()?;
    Ok(poly)
}
