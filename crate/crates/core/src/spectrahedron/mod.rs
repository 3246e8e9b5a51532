//! Update rules and projections over the set of density matrices.

mod oracle;
mod projection;
mod update;

pub use oracle::{
    hindsight_best, hindsight_best_with, sdp_oracle_update, total_loss, HindsightOptions, Observation,
    OracleReport,
};
pub use projection::{project_density, project_simplex};
pub use update::{
    meg_update, ogd_update, tsallis2_objective, tsallis2_rftl_update, vn_rftl_update, GradientSum,
};
pub(crate) use update::check_eta;
