use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::Exp1;

use crate::analytic::{
    conditional_variance, corrected_threshold, flat_maximum_bound, noisy_odds, variance_reduction,
    weighted_sum_correlation, CorrMatrix, EquicorrSpec, NoiseModel,
};
use crate::classifiers::{
    fit, fit_tree_sequence, predict_scores, training_error, ClassifierKind, FitConfig,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evalmetrics::{
    confidence_interval, evaluate, kendall_tau_b, proportion_achievable, smoothed, EvalRecord,
    MetricKind,
};
use crate::rng::{child_seed, purpose, substream};
use crate::synthdata::{gen_gaussian_two_class, inject_label_noise, make_drift_stream};

use super::config::{ExperimentConfig, PosteriorSource, ProportionRow};
use super::{
    fit_seed, half_split, load_source, map_indexed, presets, scenario_for, write_stream_csv,
};

/// Mean and half-width over replicates; a single replicate has width 0.
fn summarize(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() == 1 {
        Ok((values[0], 0.0))
    } else {
        confidence_interval(values)
    }
}

fn summary_record(index: i64, metric: &str, values: &[f64], label: &str) -> Result<EvalRecord> {
    let (mean, hw) = summarize(values)?;
    Ok(EvalRecord::new(index, metric, mean, label).with_ci(hw))
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

fn split(data: &Dataset, seed: u64, r: usize) -> Result<(Dataset, Dataset)> {
    let (design, test) = half_split(data.n(), seed, r);
    Ok((data.subset(&design)?, data.subset(&test)?))
}

fn fit_cfg(base: &FitConfig, seed: u64, r: usize) -> FitConfig {
    FitConfig {
        seed: fit_seed(seed, r),
        ..base.clone()
    }
}

/// `V(d)` for each configured `rho` and `d = 1..=d_max`, plus `X(d+1)`
/// where `d + 1` is still a valid size. Infeasible `(d, rho)` pairs are
/// left out.
pub(super) fn variance_curves(cfg: &ExperimentConfig) -> Result<Vec<EvalRecord>> {
    let p = cfg.variance_curves();
    let mut out = Vec::new();
    for &rho in &p.rho {
        let label = format!("rho={rho}");
        for d in 1..=p.d_max {
            let Ok(spec) = EquicorrSpec::new(d, rho, p.tau) else {
                continue;
            };
            out.push(EvalRecord::new(
                d as i64,
                "conditional-variance",
                conditional_variance(&spec),
                &label,
            ));
            if let Ok(x) = variance_reduction(&spec) {
                out.push(EvalRecord::new(
                    d as i64 + 1,
                    "variance-reduction",
                    x,
                    &label,
                ));
            }
        }
    }
    Ok(out)
}

/// A random correlation matrix with nonnegative entries: `B B' + D`
/// rescaled to unit diagonal, `B` uniform on `[0, 1)` and `D` a diagonal
/// with entries in `[0.05, 1)`.
fn random_nonnegative_corr<R: Rng>(rng: &mut R, d: usize) -> Result<CorrMatrix> {
    let b = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>());
    let mut s = &b * b.transpose();
    for i in 0..d {
        s[(i, i)] += 0.05 + 0.95 * rng.random::<f64>();
    }
    let r = DMatrix::from_fn(d, d, |i, j| {
        let (i, j) = (i.min(j), i.max(j));
        if i == j {
            1.0
        } else {
            s[(i, j)] / (s[(i, i)] * s[(j, j)]).sqrt()
        }
    });
    CorrMatrix::new(r)
}

/// Per random matrix: the two lower bounds, the smallest correlation seen
/// between the equal-weight sum and random nonnegative weightings, and the
/// number of draws that fell below the mean-of-row-minima bound.
pub(super) fn flat_max(cfg: &ExperimentConfig) -> Result<Vec<EvalRecord>> {
    const SLACK: f64 = 1e-9;
    let p = cfg.flat_max();
    let per_matrix = map_indexed(cfg.parallel, p.matrices, |i| {
        let mut rng = substream(cfg.seed, &[purpose::MONTE_CARLO, i as u64]);
        let d = rng.random_range(2..=p.max_dim);
        let corr = random_nonnegative_corr(&mut rng, d)?;
        let bounds = flat_maximum_bound(&corr)?;
        let equal = vec![1.0 / d as f64; d];
        let mut min_r = f64::INFINITY;
        let mut violations = 0usize;
        for _ in 0..p.draws {
            let raw: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let r = weighted_sum_correlation(&corr, &equal, &w)?;
            min_r = min_r.min(r);
            if r < bounds.mean_of_row_minima - SLACK {
                violations += 1;
            }
        }
        let ix = i as i64 + 1;
        Ok(vec![
            EvalRecord::new(ix, "dimension", d as f64, "random"),
            EvalRecord::new(
                ix,
                "mean-of-row-minima",
                bounds.mean_of_row_minima,
                "random",
            ),
            EvalRecord::new(
                ix,
                "smallest-row-average",
                bounds.smallest_row_average,
                "random",
            ),
            EvalRecord::new(ix, "min-observed-correlation", min_r, "random"),
            EvalRecord::new(ix, "violations", violations as f64, "random"),
        ])
    })?;
    Ok(per_matrix.into_iter().flatten().collect())
}

fn hard(decisions: impl Iterator<Item = bool>) -> Vec<f64> {
    decisions.map(|b| if b { 1.0 } else { 0.0 }).collect()
}

/// For each noise rate: cost (at costs implied by `k`) of the noise-free
/// optimal rule, of thresholding noisy odds at the naive `k`, and at the
/// corrected `k*`, paired within each replicate.
pub(super) fn label_noise(cfg: &ExperimentConfig) -> Result<Vec<EvalRecord>> {
    let p = cfg.label_noise();
    let spec = presets::class_spec_preset(&p.preset)?;
    let metric = MetricKind::cost_weighted(p.k)?;
    let per_rep = map_indexed(cfg.parallel, cfg.replicates, |r| {
        let test = gen_gaussian_two_class(
            &spec,
            p.n,
            child_seed(cfg.seed, &[purpose::REPLICATE, r as u64]),
        )?;
        let rows: Vec<Vec<f64>> = (0..test.n())
            .map(|i| test.features().row(i).iter().copied().collect())
            .collect();
        let true_odds: Vec<f64> = rows.iter().map(|x| spec.log_odds(x).exp()).collect();
        let cost = |d: Vec<f64>| evaluate(metric, &d, test.labels(), 1.0);
        let optimal = cost(hard(true_odds.iter().map(|&o| o >= p.k)))?;
        let mut out = Vec::with_capacity(p.deltas.len());
        for (j, &delta) in p.deltas.iter().enumerate() {
            let noise = NoiseModel::new(delta)?;
            let k_star = corrected_threshold(p.k, &noise)?;
            let odds: Vec<f64> = match p.posterior {
                PosteriorSource::True => true_odds
                    .iter()
                    .map(|&o| noisy_odds(o, &noise))
                    .collect::<Result<_>>()?,
                PosteriorSource::Lda => {
                    let tags = [purpose::REPLICATE, r as u64, purpose::SAMPLE];
                    let design = gen_gaussian_two_class(&spec, p.n, child_seed(cfg.seed, &tags))?;
                    let flip_seed =
                        child_seed(cfg.seed, &[purpose::LABEL_NOISE, r as u64, j as u64]);
                    let noisy = inject_label_noise(&design, delta, flip_seed)?;
                    let model = fit(ClassifierKind::Lda, &noisy, &FitConfig::default())?;
                    predict_scores(&model, test.features())?
                        .iter()
                        .map(|&s| s / (1.0 - s))
                        .collect()
                }
            };
            let naive = cost(hard(odds.iter().map(|&o| o >= p.k)))?;
            let corrected = cost(hard(odds.iter().map(|&o| o >= k_star)))?;
            out.push([optimal, naive, corrected, k_star]);
        }
        Ok(out)
    })?;
    let mut records = Vec::new();
    for (j, &delta) in p.deltas.iter().enumerate() {
        let label = format!("delta={delta}");
        let ix = j as i64 + 1;
        let get = |c: usize| per_rep.iter().map(|rep| rep[j][c]).collect::<Vec<f64>>();
        let (opt, naive, corr) = (get(0), get(1), get(2));
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>();
        records.push(EvalRecord::new(
            ix,
            "corrected-threshold",
            per_rep[0][j][3],
            &label,
        ));
        records.push(summary_record(ix, "cost-optimal", &opt, &label)?);
        records.push(summary_record(ix, "cost-naive", &naive, &label)?);
        records.push(summary_record(ix, "cost-corrected", &corr, &label)?);
        records.push(summary_record(
            ix,
            "corrected-minus-optimal",
            &diff(&corr, &opt),
            &label,
        )?);
        records.push(summary_record(
            ix,
            "naive-minus-corrected",
            &diff(&naive, &corr),
            &label,
        )?);
    }
    Ok(records)
}

/// Held-out error at each complexity level over random half/half splits,
/// plus the default rule fitted on the same design halves (index 0).
pub(super) fn diminishing_returns(cfg: &ExperimentConfig) -> Result<Vec<EvalRecord>> {
    let p = cfg.diminishing_returns();
    let data = load_source(cfg, &p.data)?;
    let per_rep = map_indexed(cfg.parallel, cfg.replicates, |r| {
        let (design, test) = split(&data, cfg.seed, r)?;
        let base = fit_cfg(&p.fit, cfg.seed, r);
        let default = fit(ClassifierKind::Default, &design, &base)?;
        let mut errors = vec![training_error(&default, &test, 1.0)?];
        match p.classifier {
            ClassifierKind::Tree => {
                for m in fit_tree_sequence(&design, &base, &p.levels)? {
                    errors.push(training_error(&m, &test, 1.0)?);
                }
            }
            _ => {
                for &h in &p.levels {
                    let m = fit(
                        ClassifierKind::Mlp,
                        &design,
                        &FitConfig {
                            hidden_nodes: h,
                            ..base.clone()
                        },
                    )?;
                    errors.push(training_error(&m, &test, 1.0)?);
                }
            }
        }
        Ok(errors)
    })?;
    let name = p.classifier.name();
    let mut records = vec![summary_record(
        0,
        "test-error",
        &column(&per_rep, 0),
        "default",
    )?];
    for (j, &level) in p.levels.iter().enumerate() {
        records.push(summary_record(
            level as i64,
            "test-error",
            &column(&per_rep, j + 1),
            name,
        )?);
    }
    Ok(records)
}

/// Fit each classifier on the odd-numbered rows of the design window and
/// track cost-weighted error per batch. Inside the window only the other
/// rows are scored. Costs use `c0 / c1 = pi1 / pi0` from the design rows,
/// and the odds threshold is the same ratio.
pub(super) fn drift_replay(cfg: &ExperimentConfig) -> Result<Vec<EvalRecord>> {
    let p = cfg.drift_replay();
    let scenario = scenario_for(cfg)?;
    let stream = make_drift_stream(&scenario, cfg.seed)?;
    if let Some(path) = &p.export_stream {
        write_stream_csv(&stream, &cfg.resolve(path))?;
    }
    let mut design_parts = Vec::new();
    let mut held_out = Vec::new();
    let mut position = 0usize;
    for batch in &stream.batches()[..p.design_batches] {
        let (mut odd, mut even) = (Vec::new(), Vec::new());
        for i in 0..batch.n() {
            if position % 2 == 0 {
                odd.push(i)
            } else {
                even.push(i)
            }
            position += 1;
        }
        if !odd.is_empty() {
            design_parts.push(batch.subset(&odd)?);
        }
        held_out.push(if even.is_empty() {
            None
        } else {
            Some(batch.subset(&even)?)
        });
    }
    let design = Dataset::concat(&design_parts)?;
    design.require_both_classes("drift-replay design window")?;
    let (n0, n1) = design.class_counts();
    let ratio = n1 as f64 / n0 as f64;
    let metric = MetricKind::prior_weighted(n0, n1)?;
    let mut records = vec![EvalRecord::new(0, "cost-ratio", ratio, "design")];
    let base = fit_cfg(&p.fit, cfg.seed, 0);
    for &kind in &p.classifiers {
        let model = fit(kind, &design, &base)?;
        let per_batch = map_indexed(cfg.parallel, stream.steps(), |i| {
            let batch = match held_out.get(i) {
                Some(Some(rows)) => rows,
                Some(None) => return Ok(None),
                None => &stream.batches()[i],
            };
            let scores = predict_scores(&model, batch.features())?;
            let value = evaluate(metric, &scores, batch.labels(), ratio)?;
            Ok(Some(EvalRecord::new(
                i as i64 + 1,
                metric.name(),
                value,
                kind.name(),
            )))
        })?;
        let raw: Vec<EvalRecord> = per_batch.into_iter().flatten().collect();
        let smooth = smoothed(&raw, p.span)?;
        records.extend(raw);
        records.extend(smooth);
    }
    Ok(records)
}

/// Proportion of the default-to-best gap closed by LDA, from supplied rows
/// or from held-out errors on a dataset.
pub(super) fn proportion(cfg: &ExperimentConfig) -> Result<Vec<EvalRecord>> {
    let p = cfg.proportion();
    let rows: Vec<ProportionRow> = match (&p.preset, &p.data) {
        (Some(name), _) => presets::proportion_preset(name)?,
        (None, None) => p.rows.clone(),
        (None, Some(source)) => return proportion_from_data(cfg, source),
    };
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let ix = i as i64 + 1;
        out.push(EvalRecord::new(ix, "m0", row.m0, &row.name));
        out.push(EvalRecord::new(ix, "ml", row.ml, &row.name));
        out.push(EvalRecord::new(ix, "mt", row.mt, &row.name));
        out.push(EvalRecord::new(
            ix,
            "proportion",
            proportion_achievable(row.m0, row.ml, row.mt)?,
            &row.name,
        ));
    }
    Ok(out)
}

fn source_label(source: &super::DataSource) -> String {
    match (&source.preset, &source.csv) {
        (Some(name), _) => name.clone(),
        (_, Some(path)) => path.display().to_string(),
        _ => String::new(),
    }
}

fn proportion_from_data(
    cfg: &ExperimentConfig,
    source: &super::DataSource,
) -> Result<Vec<EvalRecord>> {
    let p = cfg.proportion();
    let data = load_source(cfg, source)?;
    let mut kinds = vec![ClassifierKind::Default, ClassifierKind::Lda];
    kinds.extend(p.classifiers.iter().copied());
    let per_rep = map_indexed(cfg.parallel, cfg.replicates, |r| {
        let (design, test) = split(&data, cfg.seed, r)?;
        let base = fit_cfg(&p.fit, cfg.seed, r);
        kinds
            .iter()
            .map(|&k| training_error(&fit(k, &design, &base)?, &test, 1.0))
            .collect::<Result<Vec<_>>>()
    })?;
    let means: Vec<f64> = (0..kinds.len())
        .map(|j| summarize(&column(&per_rep, j)).map(|s| s.0))
        .collect::<Result<_>>()?;
    let best = (2..kinds.len())
        .min_by(|&a, &b| means[a].total_cmp(&means[b]))
        .expect("classifier list checked");
    let label = source_label(source);
    let (m0, ml, mt) = (means[0], means[1], means[best]);
    Ok(vec![
        summary_record(1, "m0", &column(&per_rep, 0), &label)?,
        summary_record(1, "ml", &column(&per_rep, 1), &label)?,
        summary_record(
            1,
            "mt",
            &column(&per_rep, best),
            &format!("{label}:{}", kinds[best]),
        )?,
        EvalRecord::new(1, "proportion", proportion_achievable(m0, ml, mt)?, &label),
    ])
}

/// Rank the configured classifiers under each metric (1 = best) and report
/// Kendall's tau-b between the rankings of every metric pair.
pub(super) fn rank_disagreement(cfg: &ExperimentConfig) -> Result<Vec<EvalRecord>> {
    let p = cfg.rank_disagreement();
    let data = load_source(cfg, &p.data)?;
    let per_rep = map_indexed(cfg.parallel, cfg.replicates, |r| {
        let (design, test) = split(&data, cfg.seed, r)?;
        let ratio = match p.cost_ratio {
            Some(x) => x,
            None => {
                design.require_both_classes("rank-disagreement design half")?;
                let (n0, n1) = design.class_counts();
                n1 as f64 / n0 as f64
            }
        };
        let base = fit_cfg(&p.fit, cfg.seed, r);
        let mut values = Vec::with_capacity(p.classifiers.len() * p.metrics.len());
        for &kind in &p.classifiers {
            let scores = predict_scores(&fit(kind, &design, &base)?, test.features())?;
            for m in &p.metrics {
                let metric = m.with_cost_ratio(ratio)?;
                values.push(evaluate(
                    metric,
                    &scores,
                    test.labels(),
                    metric.natural_threshold(),
                )?);
            }
        }
        Ok(values)
    })?;
    let n_metrics = p.metrics.len();
    let mut records = Vec::new();
    let mut rankings: Vec<Vec<f64>> = Vec::new();
    for (mi, m) in p.metrics.iter().enumerate() {
        let metric = m.with_cost_ratio(1.0)?;
        let series: Vec<Vec<f64>> = (0..p.classifiers.len())
            .map(|ci| column(&per_rep, ci * n_metrics + mi))
            .collect();
        let means: Vec<f64> = series
            .iter()
            .map(|s| summarize(s).map(|x| x.0))
            .collect::<Result<_>>()?;
        let mut order: Vec<usize> = (0..means.len()).collect();
        if metric == MetricKind::Auc {
            order.sort_by(|&a, &b| means[b].total_cmp(&means[a]));
        } else {
            order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));
        }
        let mut rank = vec![0.0; means.len()];
        for (pos, &ci) in order.iter().enumerate() {
            rank[ci] = pos as f64 + 1.0;
        }
        for &ci in &order {
            records.push(summary_record(
                rank[ci] as i64,
                metric.name(),
                &series[ci],
                p.classifiers[ci].name(),
            )?);
        }
        rankings.push(rank);
    }
    let mut pair = 0;
    for a in 0..n_metrics {
        for b in (a + 1)..n_metrics {
            pair += 1;
            let tau = kendall_tau_b(&rankings[a], &rankings[b])?;
            let label = format!(
                "{}:{}",
                p.metrics[a].with_cost_ratio(1.0)?.name(),
                p.metrics[b].with_cost_ratio(1.0)?.name()
            );
            records.push(EvalRecord::new(pair, "kendall-tau", tau, label));
        }
    }
    if records.is_empty() {
        return Err(Error::Degenerate("nothing to rank".into()));
    }
    Ok(records)
}
