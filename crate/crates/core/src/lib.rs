//! Reliability-based ceilings for quadratic weighted kappa (QWK).
//!
//! Given two rater columns, the crate estimates single- and average-measure
//! reliability with a one-way random-effects ICC and turns them into two QWK
//! ceilings: the theoretical ceiling `sqrt(rho_Y)` for a model that predicts
//! true scores, and the human-like ceiling `sqrt(rho_1 * rho_Y)` for a model
//! as noisy as one rater. Human–human QWK is reported alongside as a
//! conservative reference. A seeded Monte Carlo engine checks all of this
//! against simulated raters.

pub mod agreement;
pub mod dataset;
pub mod error;
pub mod reliability;
pub mod report;
pub mod rng;
pub mod scale;
pub mod simulation;

pub use agreement::{
    ccc_approx_qwk, ccc_factor, exact_qwk, hh_reference, moments, pearson, HumanReference, Kappa,
    MomentSummary,
};
pub use dataset::{
    evaluate_predictions, load_csv, DatasetSpec, Evaluation, LoadedDataset, MissingPolicy,
};
pub use error::{Error, Result};
pub use reliability::{
    ceiling_report, human_like_ceiling, icc_average, icc_single, oneway_anova, theoretical_ceiling,
    AnovaSummary, CeilingReport, ReliabilityEstimates,
};
pub use report::ReportDocument;
pub use scale::{PairedScores, RaterMatrix, ScoreScale, ScoreVector};
pub use simulation::{
    build_target, run_ccc_check, run_noise_sweep, run_trial, AggregateResult, CccCheck,
    SimulationConfig, TargetRule, TrialResult,
};
