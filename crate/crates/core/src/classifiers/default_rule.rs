use crate::data::Dataset;
use crate::error::Result;

use super::majority_score;

/// Assigns every point to the design-set majority class. Ties go to class 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DefaultRule {
    pub(crate) score: f64,
    pub(crate) dim: usize,
}

impl DefaultRule {
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predicted_class(&self) -> u8 {
        super::label_at(self.score, 1.0)
    }
}

pub fn fit_default(data: &Dataset) -> Result<DefaultRule> {
    // Dataset guarantees n >= 1.
    let (n0, n1) = data.class_counts();
    Ok(DefaultRule {
        score: majority_score(n0, n1),
        dim: data.p(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{predict_scores, training_error, ClassifierModel};
    use nalgebra::DMatrix;

    fn with_labels(labels: Vec<u8>) -> Dataset {
        let n = labels.len();
        Dataset::new(DMatrix::from_fn(n, 2, |i, j| (i * 3 + j) as f64), labels).unwrap()
    }

    #[test]
    fn seventy_percent_class_one() {
        let d = with_labels((0..100).map(|i| u8::from(i < 70)).collect());
        let m = ClassifierModel::Default(fit_default(&d).unwrap());
        assert!((training_error(&m, &d, 1.0).unwrap() - 0.30).abs() < 1e-15);
        let s = predict_scores(&m, d.features()).unwrap();
        assert!(s.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn tie_predicts_zero() {
        let d = with_labels(vec![0, 1, 0, 1]);
        assert_eq!(fit_default(&d).unwrap().predicted_class(), 0);
    }

    #[test]
    fn single_class() {
        let d = with_labels(vec![1, 1, 1]);
        let m = ClassifierModel::Default(fit_default(&d).unwrap());
        assert_eq!(training_error(&m, &d, 1.0).unwrap(), 0.0);
    }
}
