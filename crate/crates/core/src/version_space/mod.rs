//! Version spaces of linear classifiers: exact spherical caps for the
//! homogeneous spherical case, and consistency polytopes sampled by
//! hit-and-run otherwise.

mod cap;
mod hit_and_run;
mod polytope;

pub use cap::{
    cap_from_alpha, cap_measure, sample_cap, sample_cap_models, CapSampler, SphericalCap,
};
pub use hit_and_run::{
    hit_and_run_raw, hit_and_run_sample, samples_to_models, WalkConfig, MAX_STALLED, MIN_CHORD,
};
pub use polytope::{polytope_from_explanations, BoundingBody, ConsistencyPolytope, Halfspace};
