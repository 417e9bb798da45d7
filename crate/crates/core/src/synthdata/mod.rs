//! Seeded generators: equicorrelated regression data, two-class Gaussian
//! problems, drifting streams, and the corruptions applied to them (label
//! noise, class redefinition, selection on a score).
//!
//! Every generator is a pure function of its parameters and a `u64` seed.
//! Gaussian draws are `mean + L z`, with `L` the lower Cholesky factor of the
//! covariance and `z` standard normals from the seeded stream (see
//! [`crate::rng`]).
//!
//! Inside a stream batch the steps always run in one order: draw features,
//! compute the latent score, threshold labels, flip labels, then select rows.
//! Swapping noise and selection would change the distribution.

mod corrupt;
mod drift;
mod gaussian;

pub use corrupt::{
    apply_class_redefinition, apply_selection_filter, inject_label_noise, label_noise_mask,
};
pub use drift::{make_drift_stream, Band, DriftScenario, LatentModel, Selection, Stream};
pub use gaussian::{gen_equicorr_samples, gen_gaussian_two_class, GaussianClassSpec};
