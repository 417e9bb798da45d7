//! Closed-form results: diminishing variance reduction under equicorrelated
//! predictors, the flat-maximum lower bound on weighted-sum correlation, and
//! the odds shrinkage caused by symmetric label noise.

mod equicorr;
mod flatmax;
mod noise;

pub use equicorr::{
    build_equicorr_sigma, conditional_variance, conditional_variance_direct, variance_reduction,
    EquicorrSpec, PSD_TOLERANCE,
};
pub use flatmax::{flat_maximum_bound, weighted_sum_correlation, CorrMatrix, FlatMaxBounds};
pub use noise::{corrected_threshold, denoised_odds, noisy_odds, NoiseModel};
