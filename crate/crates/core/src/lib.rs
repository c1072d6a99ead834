//! Boundary certainty of linear classifiers under example-based
//! explanations, and margin-distancing to keep it low.
//!
//! Releasing labelled examples shrinks the set of classifiers an observer
//! still considers possible (the version space). Boundary certainty measures
//! how sure an agent can be that moving its features a distance `r` flips a
//! negative decision. The crate computes it in closed form on the sphere,
//! estimates it by sampling otherwise, and searches for the share of
//! near-margin explanations to withhold.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

// `!(x > 0)` is used on purpose so that NaN falls into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod certainty;
pub mod counterexamples;
pub mod error;
pub mod explain;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod quadrature;
pub mod scalar;
pub mod search;
pub mod sphere;
pub mod synthetic;
pub mod version_space;

pub use boundary::{
    band_membership, boundary_pairs, group_composition, BoundaryConfig, BoundaryPairSet,
};
pub use certainty::{certainty_metrics, estimate_pi, required_samples, CertaintyReport, Metric};
pub use error::{Error, Result};
pub use model::{consistency_check, margin_scores, ExplanationSet, LinearModel};
pub use scalar::Scalar;
pub use search::{
    bisect_percentile, difference_table, find_alpha_analytic, linear_scan_optimal, CertaintyCurve,
};
pub use sphere::{pi_closed_form, CapGeometry};

pub type Real = f64;
pub type Model = LinearModel<f64>;
pub type Explanations = ExplanationSet<f64>;
pub type Cap = version_space::SphericalCap<f64>;
pub type Polytope = version_space::ConsistencyPolytope<f64>;
pub type Geometry = CapGeometry<f64>;
pub type Report = CertaintyReport<f64>;
pub type Curve = CertaintyCurve<f64>;
pub type Data = io::Dataset<f64>;
