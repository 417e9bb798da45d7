use nalgebra::{DMatrix, DVector, DVectorView};

use crate::data::Dataset;
use crate::error::{ensure, Error, Result};
use crate::linalg;

use super::FitConfig;

/// Ridge values tried, relative to the mean pooled variance, after the
/// configured one fails.
const RIDGE_LADDER: [f64; 6] = [1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2];

/// Fisher's linear discriminant with a pooled covariance.
///
/// The score is the class-1 posterior under two Gaussians sharing that
/// covariance, with the design-set class proportions as priors:
/// `logit s = wᵀx + b`, `w = S⁻¹(μ1 - μ0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDiscriminant {
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) ridge_used: f64,
}

impl LinearDiscriminant {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Absolute ridge that was added to the pooled covariance diagonal.
    pub fn ridge_used(&self) -> f64 {
        self.ridge_used
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn log_odds_row(&self, x: DVectorView<'_, f64>) -> f64 {
        self.weights
            .iter()
            .zip(x.iter())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias
    }

    pub(crate) fn score_row(&self, x: DVectorView<'_, f64>) -> f64 {
        logistic(self.log_odds_row(x))
    }
}

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn fit_lda(data: &Dataset, cfg: &FitConfig) -> Result<LinearDiscriminant> {
    cfg.validate()?;
    let (n0, n1) = data.class_counts();
    ensure!(
        n0 >= 2 && n1 >= 2,
        Precondition,
        "LDA needs at least 2 rows per class (got {n0} and {n1})"
    );
    let p = data.p();
    let x = data.features();
    let mut mu = [DVector::<f64>::zeros(p), DVector::<f64>::zeros(p)];
    for (row, &y) in x.row_iter().zip(data.labels()) {
        mu[y as usize] += row.transpose();
    }
    mu[0] /= n0 as f64;
    mu[1] /= n1 as f64;

    let mut pooled = DMatrix::<f64>::zeros(p, p);
    for (row, &y) in x.row_iter().zip(data.labels()) {
        let c = row.transpose() - &mu[y as usize];
        pooled.ger(1.0, &c, &c, 1.0);
    }
    pooled /= (n0 + n1 - 2) as f64;

    let scale = pooled.trace() / p as f64;
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let ladder = std::iter::once(cfg.ridge).chain(RIDGE_LADDER.iter().map(|r| r * scale));
    let mut factor = None;
    for ridge in ladder.filter(|&r| r >= cfg.ridge) {
        let mut m = pooled.clone();
        for i in 0..p {
            m[(i, i)] += ridge;
        }
        if let Some(l) = linalg::cholesky(&m) {
            factor = Some((l, ridge));
            break;
        }
    }
    let (l, ridge_used) = factor.ok_or_else(|| {
        Error::Validity("pooled covariance stays singular after ridge escalation".into())
    })?;

    let diff = &mu[1] - &mu[0];
    let w = linalg::cholesky_solve(&l, &diff);
    let mid = (&mu[0] + &mu[1]) * 0.5;
    let bias = -w.dot(&mid) + (n1 as f64 / n0 as f64).ln();
    Ok(LinearDiscriminant {
        weights: w.iter().copied().collect(),
        bias,
        ridge_used,
    })
}
