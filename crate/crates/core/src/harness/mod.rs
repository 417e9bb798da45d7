//! Configuration-driven experiment runner. A TOML file names one experiment
//! kind and its parameters; [`run_experiment`] turns it into a tidy
//! [`ResultTable`] whose bytes depend only on the config, the seed and the
//! crate version.
//!
//! Replicate `r` draws its split, sample and initial weights from substreams
//! tagged with `r`, and results are gathered in replicate order, so running
//! replicates on the thread pool gives the same output as running them one
//! after another.

mod config;
mod experiments;
mod io;
pub mod presets;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{child_seed, purpose, substream};
use crate::synthdata::{Band, DriftScenario, GaussianClassSpec, LatentModel, Selection};

pub use config::{
    BandConfig, DataSource, DiminishingParams, DriftReplayParams, ExperimentConfig, ExperimentKind,
    FlatMaxParams, LabelNoiseParams, LatentConfig, MetricName, PosteriorSource, ProportionParams,
    ProportionRow, RankParams, ScenarioConfig, VarianceCurvesParams,
};
pub use io::{
    load_dataset_csv, read_results, render_results, write_dataset_csv, write_results,
    write_stream_csv, LabelMapping, OutputFormat, ResultTable, RESULT_COLUMNS,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run one experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let records = match cfg.kind {
        ExperimentKind::VarianceCurves => experiments::variance_curves(cfg)?,
        ExperimentKind::FlatMax => experiments::flat_max(cfg)?,
        ExperimentKind::LabelNoise => experiments::label_noise(cfg)?,
        ExperimentKind::DiminishingReturns => experiments::diminishing_returns(cfg)?,
        ExperimentKind::DriftReplay => experiments::drift_replay(cfg)?,
        ExperimentKind::Proportion => experiments::proportion(cfg)?,
        ExperimentKind::RankDisagreement => experiments::rank_disagreement(cfg)?,
    };
    let metadata = vec![
        ("tool".to_string(), "illusion-lab".to_string()),
        ("version".to_string(), VERSION.to_string()),
        ("kind".to_string(), cfg.kind.name().to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("replicates".to_string(), cfg.replicates.to_string()),
        ("config-sha256".to_string(), cfg.content_hash()),
    ];
    Ok(ResultTable { metadata, records })
}

/// `f(0..n)` in index order, on the thread pool when `parallel` is set.
pub(crate) fn map_indexed<T, F>(parallel: bool, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Replicate `r`'s random half/half split of `n` rows: a shuffle from the
/// `(SPLIT, r)` substream, the first `n / 2` rows for design and the rest
/// for test, each in ascending row order.
pub fn half_split(n: usize, seed: u64, replicate: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut substream(seed, &[purpose::SPLIT, replicate as u64]));
    let mut test = rows.split_off(n / 2);
    rows.sort_unstable();
    test.sort_unstable();
    (rows, test)
}

/// Seed handed to classifier fitting in replicate `r`.
pub fn fit_seed(seed: u64, replicate: usize) -> u64 {
    child_seed(seed, &[purpose::INIT, replicate as u64])
}

/// The dataset a config section points at.
pub fn load_source(cfg: &ExperimentConfig, source: &DataSource) -> Result<Dataset> {
    match (&source.preset, &source.csv) {
        (Some(name), None) => presets::preset_dataset(name, source.rows, cfg.seed),
        (None, Some(path)) => {
            let label = source.label_column.as_deref().unwrap_or("class");
            Ok(load_dataset_csv(&cfg.resolve(path), label)?.0)
        }
        _ => Err(Error::Config(
            "a data source needs exactly one of `preset` or `csv`".into(),
        )),
    }
}

fn scenario_from_config(s: &ScenarioConfig) -> Result<DriftScenario> {
    let p = s.mu0.len();
    if s.sigma.len() != p || s.sigma.iter().any(|r| r.len() != p) {
        return Err(Error::Config(format!(
            "scenario sigma must be {p} rows of {p}"
        )));
    }
    let sigma = nalgebra::DMatrix::from_fn(p, p, |i, j| s.sigma[i][j]);
    let base = GaussianClassSpec::new(s.mu0.clone(), s.mu1.clone(), sigma, s.prior1)
        .map_err(|e| Error::Config(format!("scenario class model: {e}")))?;
    let mut sc = DriftScenario::stationary(base, s.steps, s.batch_size);
    if let Some(v) = &s.velocity {
        sc.mean_velocity = v.clone();
    }
    sc.drift_both = s.drift_both;
    sc.prior_path = s.prior_path.clone();
    sc.label_noise_delta = s.label_noise;
    sc.redefinition_path = s.redefinition_path.clone();
    sc.selection = s.selection_cutoff.map(|cutoff| Selection {
        cutoff,
        steps: s.selection_steps,
    });
    if s.selection_cutoff.is_none() && s.selection_steps.is_some() {
        return Err(Error::Config(
            "selection-steps given without selection-cutoff".into(),
        ));
    }
    sc.latent = s.latent.as_ref().map(|l| LatentModel {
        intercept: l.intercept,
        weights: l.weights.clone(),
        bands: l
            .bands
            .iter()
            .map(|b| Band {
                feature: b.feature,
                lo: b.lo,
                hi: b.hi,
                weight: b.weight,
            })
            .collect(),
        noise_sd: l.noise_sd,
        threshold: l.threshold,
    });
    Ok(sc)
}

/// The drift scenario of a drift-replay config: the inline scenario, else
/// the named preset, else `drift-crossing`.
pub fn scenario_for(cfg: &ExperimentConfig) -> Result<DriftScenario> {
    let p = cfg.drift_replay();
    match (&p.scenario, &p.preset) {
        (Some(s), _) => scenario_from_config(s),
        (None, Some(name)) => presets::scenario_preset(name),
        (None, None) => presets::scenario_preset("drift-crossing"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_split_partitions_rows() {
        let (a, b) = half_split(11, 3, 0);
        assert_eq!((a.len(), b.len()), (5, 6));
        let mut all = [a.clone(), b].concat();
        all.sort_unstable();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
        assert_ne!(half_split(11, 3, 1).0, a);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let f = |i: usize| Ok(i * i);
        assert_eq!(
            map_indexed(true, 100, f).unwrap(),
            map_indexed(false, 100, f).unwrap()
        );
    }
}
