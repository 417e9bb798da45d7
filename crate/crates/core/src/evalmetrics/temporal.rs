use rayon::prelude::*;

use crate::classifiers::{predict_scores, ClassifierModel};
use crate::error::{ensure, Result};
use crate::synthdata::Stream;

use super::lowess::lowess_smooth;
use super::metrics::{evaluate, MetricKind};

/// One row of a tidy result table. `index` is a time step or complexity
/// level; `label` names the series (a model, a dataset, a setting).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub index: i64,
    pub metric: String,
    pub value: f64,
    pub ci_half_width: f64,
    pub label: String,
}

impl EvalRecord {
    pub fn new(
        index: i64,
        metric: impl Into<String>,
        value: f64,
        label: impl Into<String>,
    ) -> Self {
        Self {
            index,
            metric: metric.into(),
            value,
            ci_half_width: 0.0,
            label: label.into(),
        }
    }

    pub fn with_ci(mut self, half_width: f64) -> Self {
        self.ci_half_width = half_width;
        self
    }
}

/// Score a fixed model on every batch of `stream`, one record per batch in
/// time order. Batches are scored in parallel.
pub fn temporal_evaluate(
    model: &ClassifierModel,
    stream: &Stream,
    metric: MetricKind,
    threshold_odds: f64,
) -> Result<Vec<EvalRecord>> {
    ensure!(stream.steps() > 0, Precondition, "stream has no batches");
    stream
        .batches()
        .par_iter()
        .enumerate()
        .map(|(i, batch)| {
            let scores = predict_scores(model, batch.features())?;
            let value = evaluate(metric, &scores, batch.labels(), threshold_odds)?;
            let t = batch.time_index().map_or(i as i64 + 1, |ti| ti[0]);
            Ok(EvalRecord::new(
                t,
                metric.name(),
                value,
                model.kind().name(),
            ))
        })
        .collect()
}

/// Lowess-smoothed copy of a record series, metric renamed `<metric>-lowess`.
pub fn smoothed(records: &[EvalRecord], span: f64) -> Result<Vec<EvalRecord>> {
    let x: Vec<f64> = records.iter().map(|r| r.index as f64).collect();
    let y: Vec<f64> = records.iter().map(|r| r.value).collect();
    let fit = lowess_smooth(&x, &y, span)?;
    Ok(records
        .iter()
        .zip(fit)
        .map(|(r, v)| EvalRecord::new(r.index, format!("{}-lowess", r.metric), v, r.label.clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, ClassifierKind, FitConfig};
    use crate::evalmetrics::mann_kendall;
    use crate::synthdata::{make_drift_stream, DriftScenario, GaussianClassSpec};

    #[test]
    fn stationary_stream_has_no_trend() {
        let sc =
            DriftScenario::stationary(GaussianClassSpec::separated(2, 2.0, 0.5).unwrap(), 60, 400);
        let stream = make_drift_stream(&sc, 9).unwrap();
        let model = fit(
            ClassifierKind::Lda,
            stream.batch(1).unwrap(),
            &FitConfig::default(),
        )
        .unwrap();
        let rec = temporal_evaluate(&model, &stream, MetricKind::ErrorRate, 1.0).unwrap();
        assert_eq!(rec.len(), 60);
        assert!(rec.windows(2).all(|w| w[0].index + 1 == w[1].index));
        let values: Vec<f64> = rec.iter().map(|r| r.value).collect();
        assert!(mann_kendall(&values).unwrap().p_value > 0.01);
        let smooth = smoothed(&rec, 0.3).unwrap();
        assert_eq!(smooth[0].metric, "error-rate-lowess");
    }

    #[test]
    fn drifting_class_mean_raises_cost() {
        let mut sc =
            DriftScenario::stationary(GaussianClassSpec::separated(2, 2.0, 0.3).unwrap(), 40, 500);
        sc.mean_velocity = vec![-0.1, 0.0];
        let stream = make_drift_stream(&sc, 10).unwrap();
        let model = fit(
            ClassifierKind::Lda,
            stream.batch(1).unwrap(),
            &FitConfig::default(),
        )
        .unwrap();
        let metric = MetricKind::cost_weighted(0.3 / 0.7).unwrap();
        let rec = temporal_evaluate(&model, &stream, metric, metric.natural_threshold()).unwrap();
        let mean = |r: &[EvalRecord]| r.iter().map(|x| x.value).sum::<f64>() / r.len() as f64;
        assert!(mean(&rec[30..]) > mean(&rec[..10]));
    }
}
