//! From-scratch classifiers spanning the complexity axis: the default rule,
//! a one-feature partition rule (1R), Fisher's linear discriminant, a
//! pruned Gini tree and a single-hidden-layer perceptron.
//!
//! Every model scores a feature vector with a class-1 score in `[0, 1]`.
//! Hard labels compare the score odds `s / (1 - s)` with a threshold `k`;
//! `k = 1` is the usual "score at least one half".

mod default_rule;
mod lda;
pub mod mlp;
mod one_r;
mod text;
mod tree;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVectorView};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{ensure, Error, Result};

pub use default_rule::{fit_default, DefaultRule};
pub use lda::{fit_lda, LinearDiscriminant};
pub use mlp::{fit_mlp, Perceptron};
pub use one_r::{fit_one_r, OneRule};
pub use tree::{fit_tree, fit_tree_sequence, PrunedTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    Default,
    OneR,
    Lda,
    Tree,
    Mlp,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] =
        [Self::Default, Self::OneR, Self::Lda, Self::Tree, Self::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            Self::Default => "default",
            Self::OneR => "one-r",
            Self::Lda => "lda",
            Self::Tree => "tree",
            Self::Mlp => "mlp",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown classifier `{s}`")))
    }
}

/// Fitting knobs shared by all classifiers. Each model reads only the
/// fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct FitConfig {
    pub seed: u64,
    /// Initial LDA diagonal regularizer, escalated when the pooled
    /// covariance is singular.
    pub ridge: f64,
    pub min_leaf: usize,
    pub max_leaves: usize,
    pub hidden_nodes: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Largest number of 1R cells tried.
    pub bins: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            ridge: 0.0,
            min_leaf: 1,
            max_leaves: 16,
            hidden_nodes: 3,
            epochs: 500,
            learning_rate: 0.5,
            bins: 6,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.ridge >= 0.0 && self.ridge.is_finite(),
            Precondition,
            "ridge must be >= 0"
        );
        ensure!(self.min_leaf >= 1, Precondition, "min_leaf must be >= 1");
        ensure!(
            self.max_leaves >= 1,
            Precondition,
            "max_leaves must be >= 1"
        );
        ensure!(self.epochs >= 1, Precondition, "epochs must be >= 1");
        ensure!(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            Precondition,
            "learning_rate must be positive"
        );
        ensure!(self.bins >= 2, Precondition, "bins must be >= 2");
        Ok(())
    }
}

/// A fitted, immutable classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Default(DefaultRule),
    OneR(OneRule),
    Lda(LinearDiscriminant),
    Tree(PrunedTree),
    Mlp(Perceptron),
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Self::Default(_) => ClassifierKind::Default,
            Self::OneR(_) => ClassifierKind::OneR,
            Self::Lda(_) => ClassifierKind::Lda,
            Self::Tree(_) => ClassifierKind::Tree,
            Self::Mlp(_) => ClassifierKind::Mlp,
        }
    }

    /// Position on the complexity axis: 1 for the default rule and 1R, the
    /// leaf count for trees, the hidden width for perceptrons and the
    /// feature count for LDA.
    pub fn complexity(&self) -> usize {
        match self {
            Self::Default(_) | Self::OneR(_) => 1,
            Self::Lda(m) => m.dim(),
            Self::Tree(m) => m.leaves(),
            Self::Mlp(m) => m.hidden(),
        }
    }

    /// Number of features the model was trained on.
    pub fn dim(&self) -> usize {
        match self {
            Self::Default(m) => m.dim(),
            Self::OneR(m) => m.dim(),
            Self::Lda(m) => m.dim(),
            Self::Tree(m) => m.dim(),
            Self::Mlp(m) => m.dim(),
        }
    }

    fn score_row(&self, x: DVectorView<'_, f64>) -> f64 {
        let s = match self {
            Self::Default(m) => m.score(),
            Self::OneR(m) => m.score_row(x),
            Self::Lda(m) => m.score_row(x),
            Self::Tree(m) => m.score_row(x),
            Self::Mlp(m) => m.score_row(x),
        };
        s.clamp(0.0, 1.0)
    }
}

pub fn fit(kind: ClassifierKind, data: &Dataset, cfg: &FitConfig) -> Result<ClassifierModel> {
    cfg.validate()?;
    Ok(match kind {
        ClassifierKind::Default => ClassifierModel::Default(fit_default(data)?),
        ClassifierKind::OneR => ClassifierModel::OneR(fit_one_r(data, cfg)?),
        ClassifierKind::Lda => ClassifierModel::Lda(fit_lda(data, cfg)?),
        ClassifierKind::Tree => ClassifierModel::Tree(fit_tree(data, cfg)?),
        ClassifierKind::Mlp => ClassifierModel::Mlp(fit_mlp(data, cfg)?),
    })
}

/// Class-1 scores for every row of `features`.
pub fn predict_scores(model: &ClassifierModel, features: &DMatrix<f64>) -> Result<Vec<f64>> {
    if features.ncols() != model.dim() {
        return Err(Error::Shape {
            expected: model.dim(),
            got: features.ncols(),
        });
    }
    let xt = features.transpose();
    Ok(xt.column_iter().map(|c| model.score_row(c)).collect())
}

/// Label 1 when the score odds reach `k`.
pub fn label_at(score: f64, k: f64) -> u8 {
    u8::from(score / (1.0 - score) >= k)
}

pub fn predict_labels(model: &ClassifierModel, features: &DMatrix<f64>, k: f64) -> Result<Vec<u8>> {
    ensure!(k > 0.0, Precondition, "odds threshold {k} must be positive");
    Ok(predict_scores(model, features)?
        .into_iter()
        .map(|s| label_at(s, k))
        .collect())
}

/// Fraction of rows misclassified at odds threshold `k`.
pub fn training_error(model: &ClassifierModel, data: &Dataset, k: f64) -> Result<f64> {
    let labels = predict_labels(model, data.features(), k)?;
    let wrong = labels
        .iter()
        .zip(data.labels())
        .filter(|(a, b)| a != b)
        .count();
    Ok(wrong as f64 / data.n() as f64)
}

/// Class-1 score of a majority vote: the class-1 fraction, except that an
/// exact tie is nudged just below one half so ties resolve to class 0.
pub(crate) fn majority_score(n0: usize, n1: usize) -> f64 {
    if n0 == n1 {
        0.5f64.next_down()
    } else {
        n1 as f64 / (n0 + n1) as f64
    }
}

pub(crate) use text::fmt_f64;
pub use text::{model_from_text, model_to_text, MODEL_FORMAT_VERSION};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_threshold_matches_half() {
        for s in [0.0, 0.25, 0.4999, 0.5, 0.5001, 0.9, 1.0] {
            assert_eq!(label_at(s, 1.0), u8::from(s >= 0.5));
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.name().parse::<ClassifierKind>().unwrap(), k);
        }
        assert!("svm".parse::<ClassifierKind>().is_err());
    }

    #[test]
    fn majority_tie_goes_to_zero() {
        assert_eq!(label_at(majority_score(5, 5), 1.0), 0);
        assert_eq!(label_at(majority_score(4, 6), 1.0), 1);
        assert_eq!(majority_score(3, 7), 0.7);
    }

    #[test]
    fn config_validation() {
        let mut c = FitConfig::default();
        c.validate().unwrap();
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        c = FitConfig {
            bins: 1,
            ..FitConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
