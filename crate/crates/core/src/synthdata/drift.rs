use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{ensure, Error, Result};
use crate::rng::{purpose, substream};

use super::corrupt::flip_with;
use super::GaussianClassSpec;

/// Adds `weight` to the latent score when `lo <= x[feature] < hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub feature: usize,
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

/// An explicit latent score `intercept + w'x + bands + noise_sd * e`, with
/// `e` standard normal. When a scenario carries one, labels are
/// `latent >= threshold` and the drawn Gaussian class only picks which mean
/// a row's features come from.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub bands: Vec<Band>,
    pub noise_sd: f64,
    pub threshold: f64,
}

impl LatentModel {
    fn validate(&self, p: usize) -> Result<()> {
        ensure!(
            self.weights.len() == p,
            Config,
            "latent model has {} weights for {p} features",
            self.weights.len()
        );
        ensure!(
            self.noise_sd >= 0.0 && self.noise_sd.is_finite(),
            Config,
            "latent noise sd must be finite and >= 0"
        );
        for b in &self.bands {
            ensure!(
                b.feature < p,
                Config,
                "band feature {} out of range",
                b.feature
            );
            ensure!(
                b.lo < b.hi,
                Config,
                "band needs lo < hi, got [{}, {})",
                b.lo,
                b.hi
            );
        }
        Ok(())
    }

    /// The score without its noise term.
    pub fn systematic(&self, x: &[f64]) -> f64 {
        let linear: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum();
        let bands: f64 = self
            .bands
            .iter()
            .filter(|b| (b.lo..b.hi).contains(&x[b.feature]))
            .map(|b| b.weight)
            .sum();
        self.intercept + linear + bands
    }
}

/// Accept rows whose base linear score is at least `cutoff`, in batches
/// `1..=steps` (every batch when `steps` is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub cutoff: f64,
    pub steps: Option<usize>,
}

/// A stream of `steps` batches. Batch `t` (counting from 1) draws class 1
/// from `mu1 + t * mean_velocity`, and class 0 from `mu0 + t * mean_velocity`
/// when `drift_both` is set.
///
/// Without a latent model the latent score is the base class-1 linear score
/// [`GaussianClassSpec::linear_score`] (computed with the time-zero means),
/// and labels are the drawn classes unless a redefinition threshold applies.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftScenario {
    pub base: GaussianClassSpec,
    pub mean_velocity: Vec<f64>,
    pub drift_both: bool,
    pub prior_path: Option<Vec<f64>>,
    pub label_noise_delta: f64,
    pub redefinition_path: Option<Vec<f64>>,
    pub selection: Option<Selection>,
    pub latent: Option<LatentModel>,
    pub steps: usize,
    pub batch_size: usize,
}

impl DriftScenario {
    /// A stationary scenario: no drift, no paths, no noise, no selection.
    pub fn stationary(base: GaussianClassSpec, steps: usize, batch_size: usize) -> Self {
        let p = base.dim();
        Self {
            base,
            mean_velocity: vec![0.0; p],
            drift_both: false,
            prior_path: None,
            label_noise_delta: 0.0,
            redefinition_path: None,
            selection: None,
            latent: None,
            steps,
            batch_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.base.dim();
        ensure!(self.steps >= 1, Config, "steps must be at least 1");
        ensure!(
            self.batch_size >= 1,
            Config,
            "batch_size must be at least 1"
        );
        ensure!(
            self.mean_velocity.len() == p && self.mean_velocity.iter().all(|v| v.is_finite()),
            Config,
            "mean_velocity needs {p} finite entries"
        );
        ensure!(
            (0.0..0.5).contains(&self.label_noise_delta),
            Config,
            "label_noise_delta {} must lie in [0, 0.5)",
            self.label_noise_delta
        );
        if let Some(path) = &self.prior_path {
            ensure!(
                path.len() == self.steps,
                Config,
                "prior_path has {} entries for {} steps",
                path.len(),
                self.steps
            );
            ensure!(
                path.iter().all(|&q| q > 0.0 && q < 1.0),
                Config,
                "prior_path values must lie in (0, 1)"
            );
        }
        if let Some(path) = &self.redefinition_path {
            ensure!(
                path.len() == self.steps,
                Config,
                "redefinition_path has {} entries for {} steps",
                path.len(),
                self.steps
            );
            ensure!(
                path.iter().all(|v| !v.is_nan()),
                Config,
                "redefinition thresholds must not be NaN"
            );
        }
        if let Some(sel) = &self.selection {
            ensure!(!sel.cutoff.is_nan(), Config, "selection cutoff is NaN");
        }
        if let Some(latent) = &self.latent {
            latent.validate(p)?;
        }
        Ok(())
    }

    /// The class model of batch `t`.
    pub fn spec_at(&self, t: usize) -> Result<GaussianClassSpec> {
        let shift = DVector::from_column_slice(&self.mean_velocity) * t as f64;
        let mu0 = DVector::from_column_slice(self.base.mu0());
        let mu1 = DVector::from_column_slice(self.base.mu1()) + &shift;
        let mu0 = if self.drift_both { mu0 + shift } else { mu0 };
        let prior = self
            .prior_path
            .as_ref()
            .map_or(self.base.prior1(), |p| p[t - 1]);
        self.base.with_means_and_prior(mu0, mu1, prior)
    }

    fn threshold_at(&self, t: usize) -> Option<f64> {
        self.redefinition_path
            .as_ref()
            .map(|p| p[t - 1])
            .or_else(|| self.latent.as_ref().map(|m| m.threshold))
    }

    /// Batch `t`: features and latent noise from substream `(SAMPLE, t)`,
    /// label flips from `(LABEL_NOISE, t)`.
    fn batch(&self, t: usize, seed: u64) -> Result<(Dataset, f64)> {
        let spec = self.spec_at(t)?;
        let (n, p) = (self.batch_size, self.base.dim());
        let mut rng = substream(seed, &[purpose::SAMPLE, t as u64]);
        let mut rows = vec![0.0; n * p];
        let mut drawn = Vec::with_capacity(n);
        let mut latent = Vec::with_capacity(n);
        for row in rows.chunks_mut(p) {
            drawn.push(spec.draw_row(&mut rng, row));
            latent.push(match &self.latent {
                Some(m) if m.noise_sd > 0.0 => {
                    m.systematic(row) + m.noise_sd * rng.sample::<f64, _>(StandardNormal)
                }
                Some(m) => m.systematic(row),
                None => self.base.linear_score(row),
            });
        }
        let labels = match self.threshold_at(t) {
            Some(th) => latent.iter().map(|&s| u8::from(s >= th)).collect(),
            None => drawn,
        };
        let mut data = Dataset::new(DMatrix::from_row_slice(n, p, &rows), labels)?
            .with_latent_score(latent)?
            .with_time_index(vec![t as i64; n])?;
        if self.label_noise_delta > 0.0 {
            data = flip_with(
                &data,
                self.label_noise_delta,
                &mut substream(seed, &[purpose::LABEL_NOISE, t as u64]),
            )?;
        }
        match &self.selection {
            Some(sel) if sel.steps.is_none_or(|s| t <= s) => {
                let keep: Vec<usize> = (0..n)
                    .filter(|&i| self.base.linear_score(&rows[i * p..(i + 1) * p]) >= sel.cutoff)
                    .collect();
                if keep.is_empty() {
                    return Err(Error::Degenerate(format!(
                        "selection accepted no rows in batch {t}"
                    )));
                }
                let rate = keep.len() as f64 / n as f64;
                Ok((data.subset(&keep)?, rate))
            }
            _ => Ok((data, 1.0)),
        }
    }
}

/// Ordered batches, one per time step, each carrying its time index and
/// latent score.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    batches: Vec<Dataset>,
    acceptance: Vec<f64>,
}

impl Stream {
    pub fn steps(&self) -> usize {
        self.batches.len()
    }

    pub fn batches(&self) -> &[Dataset] {
        &self.batches
    }

    /// Batch `t`, counting from 1.
    pub fn batch(&self, t: usize) -> Option<&Dataset> {
        t.checked_sub(1).and_then(|i| self.batches.get(i))
    }

    /// Fraction of drawn rows kept by selection, per batch.
    pub fn acceptance_rates(&self) -> &[f64] {
        &self.acceptance
    }

    /// Batches `first..=last` stacked into one dataset.
    pub fn pooled(&self, first: usize, last: usize) -> Result<Dataset> {
        ensure!(
            first >= 1 && first <= last && last <= self.steps(),
            Precondition,
            "batch range {first}..={last} outside 1..={}",
            self.steps()
        );
        Dataset::concat(&self.batches[first - 1..last])
    }

    pub fn to_dataset(&self) -> Result<Dataset> {
        Dataset::concat(&self.batches)
    }
}

/// Generate every batch of `scenario`. Batches are drawn in parallel; each
/// depends only on `(scenario, seed, t)`, so the result does not depend on
/// the thread count.
pub fn make_drift_stream(scenario: &DriftScenario, seed: u64) -> Result<Stream> {
    scenario.validate()?;
    let parts = (1..=scenario.steps)
        .into_par_iter()
        .map(|t| scenario.batch(t, seed))
        .collect::<Result<Vec<_>>>()?;
    let (batches, acceptance) = parts.into_iter().unzip();
    Ok(Stream {
        batches,
        acceptance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> GaussianClassSpec {
        GaussianClassSpec::separated(2, 2.0, 0.5).unwrap()
    }

    fn column_stats(d: &Dataset, j: usize, class: Option<u8>) -> (f64, f64, f64) {
        let v: Vec<f64> = (0..d.n())
            .filter(|&i| class.is_none_or(|c| d.labels()[i] == c))
            .map(|i| d.features()[(i, j)])
            .collect();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, var, n)
    }

    #[test]
    fn stationary_batches_share_a_distribution() {
        let s = make_drift_stream(&DriftScenario::stationary(base(), 10, 2000), 17).unwrap();
        let (first, last) = (s.batch(1).unwrap(), s.batch(10).unwrap());
        for j in 0..2 {
            let (m1, v1, n1) = column_stats(first, j, None);
            let (m2, v2, n2) = column_stats(last, j, None);
            let z = (m1 - m2) / (v1 / n1 + v2 / n2).sqrt();
            assert!(z.abs() < 2.576, "feature {j}: z = {z}");
        }
        assert_eq!(s.batch(3).unwrap().time_index().unwrap()[0], 3);
        assert!(s.batch(0).is_none());
    }

    #[test]
    fn class_one_mean_moves_with_velocity() {
        let mut sc = DriftScenario::stationary(base(), 100, 4000);
        sc.mean_velocity = vec![0.05, 0.0];
        let s = make_drift_stream(&sc, 18).unwrap();
        let last = s.batch(100).unwrap();
        let (m, _, _) = column_stats(last, 0, Some(1));
        assert!((m - (2.0 + 5.0)).abs() < 0.1, "class-1 mean {m}");
        let (m0, _, _) = column_stats(last, 0, Some(0));
        assert!(m0.abs() < 0.1, "class-0 mean {m0} should not move");
    }

    #[test]
    fn raising_the_latent_threshold_drops_prevalence() {
        let mut sc = DriftScenario::stationary(base(), 20, 5000);
        sc.redefinition_path = Some((1..=20).map(|t| if t <= 10 { 3.0 } else { 4.0 }).collect());
        let s = make_drift_stream(&sc, 19).unwrap();
        let before = s.batch(10).unwrap().class1_fraction();
        let after = s.batch(11).unwrap().class1_fraction();
        assert!(after < before, "{before} -> {after}");
    }

    #[test]
    fn path_length_must_match_steps() {
        let mut sc = DriftScenario::stationary(base(), 5, 10);
        sc.prior_path = Some(vec![0.5; 4]);
        assert!(matches!(make_drift_stream(&sc, 1), Err(Error::Config(_))));
        sc.prior_path = None;
        sc.redefinition_path = Some(vec![0.0; 6]);
        assert!(matches!(make_drift_stream(&sc, 1), Err(Error::Config(_))));
    }

    #[test]
    fn streams_are_reproducible() {
        let mut sc = DriftScenario::stationary(base(), 8, 300);
        sc.mean_velocity = vec![0.1, -0.1];
        sc.label_noise_delta = 0.1;
        assert_eq!(
            make_drift_stream(&sc, 5).unwrap(),
            make_drift_stream(&sc, 5).unwrap()
        );
        assert_ne!(
            make_drift_stream(&sc, 5).unwrap(),
            make_drift_stream(&sc, 6).unwrap()
        );
    }

    #[test]
    fn label_noise_leaves_features_alone() {
        let clean = DriftScenario::stationary(base(), 4, 20_000);
        let noisy = DriftScenario {
            label_noise_delta: 0.2,
            ..clean.clone()
        };
        let (a, b) = (
            make_drift_stream(&clean, 3).unwrap(),
            make_drift_stream(&noisy, 3).unwrap(),
        );
        for (x, y) in a.batches().iter().zip(b.batches()) {
            assert_eq!(x.features(), y.features());
            let flipped = x
                .labels()
                .iter()
                .zip(y.labels())
                .filter(|(p, q)| p != q)
                .count() as f64;
            assert!((flipped / x.n() as f64 - 0.2).abs() < 0.01);
        }
    }

    #[test]
    fn selection_applies_to_design_batches_only() {
        let mut sc = DriftScenario::stationary(base(), 6, 2000);
        sc.selection = Some(Selection {
            cutoff: 0.0,
            steps: Some(3),
        });
        let s = make_drift_stream(&sc, 4).unwrap();
        let rates = s.acceptance_rates();
        assert!(rates[..3].iter().all(|&r| (r - 0.5).abs() < 0.05));
        assert!(rates[3..].iter().all(|&r| r == 1.0));
        assert!(s.batch(1).unwrap().class1_fraction() > 0.75);
    }

    #[test]
    fn latent_model_defines_labels() {
        let mut sc = DriftScenario::stationary(base(), 3, 1000);
        sc.latent = Some(LatentModel {
            intercept: -1.0,
            weights: vec![1.0, 0.0],
            bands: vec![Band {
                feature: 1,
                lo: 1.0,
                hi: 3.5,
                weight: 1.0,
            }],
            noise_sd: 0.0,
            threshold: 0.0,
        });
        let s = make_drift_stream(&sc, 2).unwrap();
        let m = sc.latent.as_ref().unwrap();
        for d in s.batches() {
            for i in 0..d.n() {
                let row: Vec<f64> = d.features().row(i).iter().copied().collect();
                assert_eq!(d.labels()[i], u8::from(m.systematic(&row) >= 0.0));
            }
        }
        let s = s.pooled(1, 3).unwrap();
        assert_eq!(s.n(), 3000);
    }
}
