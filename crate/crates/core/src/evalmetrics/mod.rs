//! Performance measures and the procedures built on them: error rate,
//! cost-weighted error, Brier score, AUC, Gaussian Bayes rates, the
//! proportion-of-achievable-gain ratio, lowess smoothing, temporal
//! evaluation over a stream and rank statistics.

mod lowess;
mod metrics;
mod ranks;
mod summary;
mod temporal;

pub use lowess::{lowess_smooth, DEFAULT_SPAN};
pub use metrics::{auc, evaluate, MetricKind};
pub use ranks::{kendall_tau_b, mann_kendall, MannKendall};
pub use summary::{bayes_error_gaussian, confidence_interval, proportion_achievable};
pub use temporal::{smoothed, temporal_evaluate, EvalRecord};
