//! Verification studies over simulated trajectories and exact moments.

mod config;
mod result;
mod studies;

pub use config::{ConfigOverrides, ExperimentConfig, Study, Tolerances};
pub use result::{aggregate, Check, Quantiles, SeedRow, Series, StudyResult, SCHEMA_VERSION};
pub use studies::{
    coupling_violations, estimate_theta, lemma2_window, LEMMA2_WINDOWS, run_study, scaled_gaps, study_corollary1,
    study_inequalities, study_lemma2, study_lemma5, study_moment_convergence, study_prop1,
    study_theorem1, sup_deviation, theorem1_from_runs,
};
