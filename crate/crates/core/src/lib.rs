//! Experiments on how much simple classifiers leave on the table.
//!
//! [`analytic`] holds closed forms, [`classifiers`] five models from the
//! default rule to a perceptron, [`synthdata`] seeded generators for
//! Gaussian, noisy, selected and drifting data, [`evalmetrics`] the
//! performance measures, and [`harness`] the config-driven runner behind
//! the `illusion-lab` binary. The guide in `book/` walks through each part.

pub mod analytic;
pub mod classifiers;
pub mod data;
pub mod error;
pub mod evalmetrics;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod synthdata;

pub use data::Dataset;
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/variance.md")]
    mod variance {}
    #[doc = include_str!("../../../book/src/flat-maximum.md")]
    mod flat_maximum {}
    #[doc = include_str!("../../../book/src/classifiers.md")]
    mod classifiers {}
    #[doc = include_str!("../../../book/src/label-noise.md")]
    mod label_noise {}
    #[doc = include_str!("../../../book/src/drift.md")]
    mod drift {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
