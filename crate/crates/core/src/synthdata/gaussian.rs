use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::analytic::{build_equicorr_sigma, EquicorrSpec};
use crate::data::Dataset;
use crate::error::{ensure, Result};
use crate::linalg;
use crate::rng::{purpose, substream};

/// Two Gaussian classes sharing one covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClassSpec {
    mu0: DVector<f64>,
    mu1: DVector<f64>,
    sigma: DMatrix<f64>,
    prior1: f64,
    chol: DMatrix<f64>,
    /// `sigma^-1 (mu1 - mu0)`.
    direction: DVector<f64>,
}

impl GaussianClassSpec {
    pub fn new(mu0: Vec<f64>, mu1: Vec<f64>, sigma: DMatrix<f64>, prior1: f64) -> Result<Self> {
        let p = mu0.len();
        ensure!(
            p >= 1,
            Constraint,
            "class means need at least one coordinate"
        );
        ensure!(
            mu1.len() == p,
            Constraint,
            "mu1 has {} coordinates, mu0 has {p}",
            mu1.len()
        );
        ensure!(
            sigma.shape() == (p, p),
            Constraint,
            "sigma is {:?}, expected {p}x{p}",
            sigma.shape()
        );
        ensure!(
            mu0.iter()
                .chain(&mu1)
                .chain(sigma.iter())
                .all(|v| v.is_finite()),
            Constraint,
            "means and covariance must be finite"
        );
        ensure!(
            prior1 > 0.0 && prior1 < 1.0,
            Constraint,
            "prior1 = {prior1} must lie in (0, 1)"
        );
        let symmetric = (0..p).all(|i| {
            (0..i).all(|j| {
                (sigma[(i, j)] - sigma[(j, i)]).abs() <= 1e-12 * (1.0 + sigma[(i, j)].abs())
            })
        });
        ensure!(symmetric, Validity, "sigma is not symmetric");
        let Some(chol) = linalg::cholesky(&sigma) else {
            return Err(crate::Error::Validity(
                "sigma is not positive definite".into(),
            ));
        };
        let (mu0, mu1) = (DVector::from_vec(mu0), DVector::from_vec(mu1));
        let direction = linalg::cholesky_solve(&chol, &(&mu1 - &mu0));
        Ok(Self {
            mu0,
            mu1,
            sigma,
            prior1,
            chol,
            direction,
        })
    }

    /// Identity covariance, class 0 at the origin and class 1 at `delta`
    /// along the first axis.
    pub fn separated(p: usize, delta: f64, prior1: f64) -> Result<Self> {
        let mut mu1 = vec![0.0; p];
        if let Some(m) = mu1.first_mut() {
            *m = delta;
        }
        Self::new(vec![0.0; p], mu1, DMatrix::identity(p, p), prior1)
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }

    pub fn mu0(&self) -> &[f64] {
        self.mu0.as_slice()
    }

    pub fn mu1(&self) -> &[f64] {
        self.mu1.as_slice()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn prior1(&self) -> f64 {
        self.prior1
    }

    /// Mahalanobis distance between the class means.
    pub fn mahalanobis(&self) -> f64 {
        (&self.mu1 - &self.mu0).dot(&self.direction).max(0.0).sqrt()
    }

    /// `sigma^-1 (mu1 - mu0)`, the direction of the optimal linear rule.
    pub fn direction(&self) -> &[f64] {
        self.direction.as_slice()
    }

    /// The class-1 linear score `w'(x - (mu0 + mu1)/2)`, without the prior
    /// term. Zero on the midpoint between the means.
    pub fn linear_score(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.mu0.iter().zip(self.mu1.iter()))
            .zip(self.direction.iter())
            .map(|((&xi, (&a, &b)), &w)| w * (xi - 0.5 * (a + b)))
            .sum()
    }

    /// True posterior log-odds of class 1 at `x`.
    pub fn log_odds(&self, x: &[f64]) -> f64 {
        self.linear_score(x) + (self.prior1 / (1.0 - self.prior1)).ln()
    }

    /// True posterior probability of class 1 at `x`.
    pub fn posterior(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.log_odds(x)).exp())
    }

    pub(crate) fn with_means_and_prior(
        &self,
        mu0: DVector<f64>,
        mu1: DVector<f64>,
        prior1: f64,
    ) -> Result<Self> {
        ensure!(
            prior1 > 0.0 && prior1 < 1.0,
            Constraint,
            "prior1 = {prior1} must lie in (0, 1)"
        );
        let direction = linalg::cholesky_solve(&self.chol, &(&mu1 - &mu0));
        Ok(Self {
            mu0,
            mu1,
            sigma: self.sigma.clone(),
            prior1,
            chol: self.chol.clone(),
            direction,
        })
    }

    /// One row: a uniform for the class, then `p` standard normals.
    pub(crate) fn draw_row<R: Rng>(&self, rng: &mut R, out: &mut [f64]) -> u8 {
        let y = u8::from(rng.random::<f64>() < self.prior1);
        self.draw_given(rng, y, out);
        y
    }

    /// Features of one row of a known class: `p` standard normals.
    pub(crate) fn draw_given<R: Rng>(&self, rng: &mut R, class: u8, out: &mut [f64]) {
        let mean = if class == 1 { &self.mu1 } else { &self.mu0 };
        let z: DVector<f64> = DVector::from_fn(self.dim(), |_, _| rng.sample(StandardNormal));
        let x = mean + &self.chol * z;
        out.copy_from_slice(x.as_slice());
    }
}

/// `n` draws of `(x_1..x_d, y)` from the zero-mean unit-variance Gaussian with
/// the equicorrelated correlation matrix. The response is the last column,
/// named `y`, and is also kept as the latent score; labels are `y >= 0`.
pub fn gen_equicorr_samples(spec: &EquicorrSpec, n: usize, seed: u64) -> Result<Dataset> {
    ensure!(n >= 1, Precondition, "need at least one sample");
    let sigma = build_equicorr_sigma(spec);
    let factor = linalg::psd_factor(&sigma);
    let m = sigma.nrows();
    let mut rng = substream(seed, &[purpose::SAMPLE]);
    let mut data = DMatrix::zeros(n, m);
    for i in 0..n {
        let z: DVector<f64> = DVector::from_fn(m, |_, _| rng.sample(StandardNormal));
        data.row_mut(i).copy_from(&(&factor * z).transpose());
    }
    let y: Vec<f64> = data.column(m - 1).iter().copied().collect();
    let labels = y.iter().map(|&v| u8::from(v >= 0.0)).collect();
    let mut names: Vec<String> = (1..m).map(|j| format!("x{j}")).collect();
    names.push("y".into());
    Dataset::with_names(data, labels, names)?.with_latent_score(y)
}

/// `n` rows from the two-class model. The latent score is the class-1 linear
/// score, so the sample can be relabelled by thresholding.
pub fn gen_gaussian_two_class(spec: &GaussianClassSpec, n: usize, seed: u64) -> Result<Dataset> {
    ensure!(n >= 2, Precondition, "need at least two rows, got {n}");
    let mut rng = substream(seed, &[purpose::SAMPLE]);
    let p = spec.dim();
    let mut rows = vec![0.0; n * p];
    let mut labels = Vec::with_capacity(n);
    for row in rows.chunks_mut(p) {
        labels.push(spec.draw_row(&mut rng, row));
    }
    let latent = rows.chunks(p).map(|r| spec.linear_score(r)).collect();
    Dataset::new(DMatrix::from_row_slice(n, p, &rows), labels)?.with_latent_score(latent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::conditional_variance;
    use crate::classifiers::{fit, training_error, ClassifierKind, FitConfig};

    #[test]
    fn equicorr_sample_moments() {
        let spec = EquicorrSpec::new(2, 0.5, 0.5).unwrap();
        let d = gen_equicorr_samples(&spec, 100_000, 11).unwrap();
        let x = d.features();
        let n = x.nrows() as f64;
        let target = build_equicorr_sigma(&spec);
        for a in 0..3 {
            for b in 0..3 {
                let (ca, cb) = (x.column(a), x.column(b));
                let (ma, mb) = (ca.mean(), cb.mean());
                let cov = ca
                    .iter()
                    .zip(cb.iter())
                    .map(|(u, v)| (u - ma) * (v - mb))
                    .sum::<f64>()
                    / n;
                let sa = (ca.iter().map(|u| (u - ma).powi(2)).sum::<f64>() / n).sqrt();
                let sb = (cb.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / n).sqrt();
                assert!(
                    (cov / (sa * sb) - target[(a, b)]).abs() < 0.02,
                    "entry ({a},{b})"
                );
            }
        }
        assert_eq!(d.feature_names(), ["x1", "x2", "y"]);
    }

    #[test]
    fn equicorr_residual_variance_matches_closed_form() {
        let spec = EquicorrSpec::new(2, 0.5, 0.5).unwrap();
        let d = gen_equicorr_samples(&spec, 100_000, 12).unwrap();
        let n = d.n();
        let mut design = DMatrix::from_element(n, 3, 1.0);
        design
            .columns_mut(1, 2)
            .copy_from(&d.features().columns(0, 2));
        let y = DVector::from_iterator(n, d.features().column(2).iter().copied());
        let xtx = design.transpose() * &design;
        let beta =
            linalg::cholesky_solve(&linalg::cholesky(&xtx).unwrap(), &(design.transpose() * &y));
        let resid = &y - &design * beta;
        let var = resid.norm_squared() / n as f64;
        assert!(
            (var - conditional_variance(&spec)).abs() < 0.02,
            "residual variance {var}"
        );
        assert!((conditional_variance(&spec) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn generators_are_deterministic() {
        let spec = EquicorrSpec::new(3, 0.2, 0.4).unwrap();
        assert_eq!(
            gen_equicorr_samples(&spec, 500, 3).unwrap(),
            gen_equicorr_samples(&spec, 500, 3).unwrap()
        );
        assert_ne!(
            gen_equicorr_samples(&spec, 500, 3).unwrap(),
            gen_equicorr_samples(&spec, 500, 4).unwrap()
        );
        let g = GaussianClassSpec::separated(3, 1.0, 0.3).unwrap();
        assert_eq!(
            gen_gaussian_two_class(&g, 500, 9).unwrap(),
            gen_gaussian_two_class(&g, 500, 9).unwrap()
        );
    }

    #[test]
    fn identical_classes_cannot_beat_the_prior() {
        let g =
            GaussianClassSpec::new(vec![0.0, 0.0], vec![0.0, 0.0], DMatrix::identity(2, 2), 0.3)
                .unwrap();
        let design = gen_gaussian_two_class(&g, 2000, 1).unwrap();
        let test = gen_gaussian_two_class(&g, 20_000, 2).unwrap();
        let floor = 0.3 - 3.0 * (0.3f64 * 0.7 / 20_000.0).sqrt();
        for kind in [
            ClassifierKind::Lda,
            ClassifierKind::Tree,
            ClassifierKind::OneR,
        ] {
            let m = fit(kind, &design, &FitConfig::default()).unwrap();
            assert!(training_error(&m, &test, 1.0).unwrap() >= floor, "{kind}");
        }
    }

    #[test]
    fn optimal_rule_reaches_bayes_rate() {
        let g = GaussianClassSpec::separated(2, 2.0, 0.5).unwrap();
        let d = gen_gaussian_two_class(&g, 100_000, 5).unwrap();
        let wrong = (0..d.n())
            .filter(|&i| {
                let row: Vec<f64> = d.features().row(i).iter().copied().collect();
                u8::from(g.log_odds(&row) >= 0.0) != d.labels()[i]
            })
            .count();
        assert!((wrong as f64 / d.n() as f64 - 0.1587).abs() < 0.01);
        assert!((g.mahalanobis() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn class_fraction_follows_prior() {
        let g = GaussianClassSpec::separated(2, 1.0, 0.9).unwrap();
        let d = gen_gaussian_two_class(&g, 10_000, 6).unwrap();
        assert!((d.class1_fraction() - 0.9).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_specs() {
        let eye = DMatrix::identity(2, 2);
        assert!(GaussianClassSpec::new(vec![0.0; 2], vec![1.0; 2], eye.clone(), 1.0).is_err());
        assert!(GaussianClassSpec::new(vec![0.0; 2], vec![1.0; 3], eye.clone(), 0.5).is_err());
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(GaussianClassSpec::new(vec![0.0; 2], vec![1.0; 2], singular, 0.5).is_err());
    }
}
