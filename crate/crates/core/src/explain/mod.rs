//! Building the released explanation set: a small logistic-regression
//! fitter, prototype selection and margin-distancing.

mod distancing;
mod fit;
mod medoids;
mod mmd;

pub use distancing::{
    margin_distance_filter, margin_distance_selection, removal_count, DistancingConfig,
};
pub use fit::{fit_linear, logistic_loss, FitConfig};
pub use medoids::{k_medoid, medoid_cost, PrototypeSelection};
pub use mmd::{median_bandwidth, mmd_critic_prototypes, rbf};
