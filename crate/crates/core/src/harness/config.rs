use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{ClassifierKind, FitConfig};
use crate::error::{ensure, Error, Result};
use crate::evalmetrics::{MetricKind, DEFAULT_SPAN};

use super::presets;

/// The experiment protocols the runner knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    VarianceCurves,
    FlatMax,
    LabelNoise,
    DiminishingReturns,
    DriftReplay,
    Proportion,
    RankDisagreement,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::VarianceCurves,
        Self::FlatMax,
        Self::LabelNoise,
        Self::DiminishingReturns,
        Self::DriftReplay,
        Self::Proportion,
        Self::RankDisagreement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::VarianceCurves => "variance-curves",
            Self::FlatMax => "flat-max",
            Self::LabelNoise => "label-noise",
            Self::DiminishingReturns => "diminishing-returns",
            Self::DriftReplay => "drift-replay",
            Self::Proportion => "proportion",
            Self::RankDisagreement => "rank-disagreement",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Where a dataset comes from: a named synthetic preset or a CSV file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct DataSource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    /// Row count for synthetic presets; each preset has its own default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
}

impl DataSource {
    fn validate(&self, section: &str) -> Result<()> {
        match (&self.preset, &self.csv) {
            (Some(_), Some(_)) => Err(Error::Config(format!(
                "[{section}.data] sets both `preset` and `csv`"
            ))),
            (None, None) => Err(Error::Config(format!(
                "[{section}.data] needs `preset` or `csv`"
            ))),
            (Some(name), None) => {
                presets::dataset_preset(name)?;
                ensure!(
                    self.label_column.is_none(),
                    Config,
                    "[{section}.data] `label-column` only applies to csv"
                );
                ensure!(
                    self.rows.is_none_or(|n| n >= 4),
                    Config,
                    "[{section}.data] `rows` must be at least 4"
                );
                Ok(())
            }
            (None, Some(_)) => {
                ensure!(
                    self.rows.is_none(),
                    Config,
                    "[{section}.data] `rows` only applies to presets"
                );
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct VarianceCurvesParams {
    pub tau: f64,
    pub rho: Vec<f64>,
    pub d_max: usize,
}

impl Default for VarianceCurvesParams {
    fn default() -> Self {
        Self {
            tau: 0.5,
            rho: vec![0.0, 0.3, 0.5, 0.7, 0.9],
            d_max: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct FlatMaxParams {
    pub matrices: usize,
    pub max_dim: usize,
    pub draws: usize,
}

impl Default for FlatMaxParams {
    fn default() -> Self {
        Self {
            matrices: 50,
            max_dim: 8,
            draws: 10_000,
        }
    }
}

/// Which posterior the label-noise experiment thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PosteriorSource {
    /// The generating model's exact posterior, pushed through the noise map.
    True,
    /// LDA fitted to a label-flipped design sample.
    Lda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct LabelNoiseParams {
    pub preset: String,
    pub k: f64,
    pub deltas: Vec<f64>,
    pub n: usize,
    pub posterior: PosteriorSource,
}

impl Default for LabelNoiseParams {
    fn default() -> Self {
        Self {
            preset: "gaussian-delta2".into(),
            k: 3.0,
            deltas: vec![0.05, 0.1, 0.2],
            n: 10_000,
            posterior: PosteriorSource::True,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct DiminishingParams {
    /// `tree` sweeps leaf budgets, `mlp` sweeps hidden-layer widths.
    pub classifier: ClassifierKind,
    pub levels: Vec<usize>,
    pub data: DataSource,
    pub fit: FitConfig,
}

impl Default for DiminishingParams {
    fn default() -> Self {
        Self {
            classifier: ClassifierKind::Tree,
            levels: (1..=16).collect(),
            data: DataSource {
                preset: Some("sonar-like".into()),
                ..DataSource::default()
            },
            fit: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BandConfig {
    pub feature: usize,
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct LatentConfig {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub bands: Vec<BandConfig>,
    pub noise_sd: f64,
    pub threshold: f64,
}

impl Default for LatentConfig {
    fn default() -> Self {
        Self {
            intercept: 0.0,
            weights: Vec::new(),
            bands: Vec::new(),
            noise_sd: 0.0,
            threshold: 0.0,
        }
    }
}

/// An inline drift scenario. `sigma` is given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub prior1: f64,
    pub steps: usize,
    pub batch_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    #[serde(default)]
    pub drift_both: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_path: Option<Vec<f64>>,
    #[serde(default)]
    pub label_noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redefinition_path: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent: Option<LatentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct DriftReplayParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    pub classifiers: Vec<ClassifierKind>,
    /// Batches pooled into the design window.
    pub design_batches: usize,
    pub span: f64,
    pub fit: FitConfig,
    /// Also write the generated stream as a dataset CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export_stream: Option<PathBuf>,
}

impl Default for DriftReplayParams {
    fn default() -> Self {
        Self {
            preset: None,
            scenario: None,
            classifiers: vec![ClassifierKind::Tree, ClassifierKind::Lda],
            design_batches: 10,
            span: DEFAULT_SPAN,
            fit: FitConfig {
                max_leaves: 16,
                min_leaf: 20,
                ..FitConfig::default()
            },
            export_stream: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ProportionRow {
    pub name: String,
    pub m0: f64,
    pub ml: f64,
    pub mt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ProportionParams {
    /// A named table of rows, e.g. `table1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub rows: Vec<ProportionRow>,
    /// Compute `(m0, mL, mT)` from held-out errors on a dataset instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSource>,
    /// Candidates for the best method when computing from a dataset.
    pub classifiers: Vec<ClassifierKind>,
    pub fit: FitConfig,
}

impl Default for ProportionParams {
    fn default() -> Self {
        Self {
            preset: None,
            rows: Vec::new(),
            data: None,
            classifiers: vec![
                ClassifierKind::Lda,
                ClassifierKind::Tree,
                ClassifierKind::Mlp,
            ],
            fit: FitConfig::default(),
        }
    }
}

/// Metric names as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricName {
    ErrorRate,
    CostWeighted,
    Brier,
    Auc,
}

impl MetricName {
    pub fn with_cost_ratio(self, cost_ratio: f64) -> Result<MetricKind> {
        Ok(match self {
            Self::ErrorRate => MetricKind::ErrorRate,
            Self::CostWeighted => MetricKind::cost_weighted(cost_ratio)?,
            Self::Brier => MetricKind::Brier,
            Self::Auc => MetricKind::Auc,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct RankParams {
    pub data: DataSource,
    pub classifiers: Vec<ClassifierKind>,
    pub metrics: Vec<MetricName>,
    /// `c0 / c1`; when absent, `pi1 / pi0` of each design half.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_ratio: Option<f64>,
    pub fit: FitConfig,
}

impl Default for RankParams {
    fn default() -> Self {
        Self {
            data: DataSource {
                preset: Some("sonar-like".into()),
                ..DataSource::default()
            },
            classifiers: ClassifierKind::ALL.to_vec(),
            metrics: vec![
                MetricName::ErrorRate,
                MetricName::CostWeighted,
                MetricName::Brier,
                MetricName::Auc,
            ],
            cost_ratio: None,
            fit: FitConfig::default(),
        }
    }
}

/// One experiment, as read from a TOML file. Only the section named by
/// `kind` may be present; a missing section means all its defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    /// Run replicates on the thread pool. Results do not depend on it.
    #[serde(default = "yes")]
    pub parallel: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_curves: Option<VarianceCurvesParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_max: Option<FlatMaxParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<LabelNoiseParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diminishing_returns: Option<DiminishingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_replay: Option<DriftReplayParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportion: Option<ProportionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_disagreement: Option<RankParams>,
    /// Directory that relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    /// A config of the given kind with every default.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            seed: 0,
            replicates: 1,
            parallel: true,
            output: None,
            variance_curves: None,
            flat_max: None,
            label_noise: None,
            diminishing_returns: None,
            drift_replay: None,
            proportion: None,
            rank_disagreement: None,
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Resolve a path from the config file against its directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn present_sections(&self) -> Vec<ExperimentKind> {
        let mut out = Vec::new();
        let flags = [
            (
                self.variance_curves.is_some(),
                ExperimentKind::VarianceCurves,
            ),
            (self.flat_max.is_some(), ExperimentKind::FlatMax),
            (self.label_noise.is_some(), ExperimentKind::LabelNoise),
            (
                self.diminishing_returns.is_some(),
                ExperimentKind::DiminishingReturns,
            ),
            (self.drift_replay.is_some(), ExperimentKind::DriftReplay),
            (self.proportion.is_some(), ExperimentKind::Proportion),
            (
                self.rank_disagreement.is_some(),
                ExperimentKind::RankDisagreement,
            ),
        ];
        for (present, kind) in flags {
            if present {
                out.push(kind);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.replicates >= 1,
            Config,
            "replicates must be at least 1"
        );
        ensure!(
            self.seed <= i64::MAX as u64,
            Config,
            "seed must be at most {}",
            i64::MAX
        );
        if let Some(other) = self
            .present_sections()
            .into_iter()
            .find(|&k| k != self.kind)
        {
            return Err(Error::Config(format!(
                "section [{other}] does not belong to a {} experiment",
                self.kind
            )));
        }
        match self.kind {
            ExperimentKind::VarianceCurves => {
                let p = self.variance_curves();
                ensure!(p.d_max >= 1, Config, "d-max must be at least 1");
                ensure!(!p.rho.is_empty(), Config, "rho list is empty");
                ensure!(
                    (0.0..=1.0).contains(&p.tau),
                    Config,
                    "tau must lie in [0, 1]"
                );
                ensure!(
                    p.rho.iter().all(|r| (0.0..1.0).contains(r)),
                    Config,
                    "rho values must lie in [0, 1)"
                );
            }
            ExperimentKind::FlatMax => {
                let p = self.flat_max();
                ensure!(
                    p.matrices >= 1 && p.draws >= 1,
                    Config,
                    "matrices and draws must be at least 1"
                );
                ensure!(p.max_dim >= 2, Config, "max-dim must be at least 2");
            }
            ExperimentKind::LabelNoise => {
                let p = self.label_noise();
                presets::class_spec_preset(&p.preset)?;
                ensure!(p.k > 0.0 && p.k.is_finite(), Config, "k must be positive");
                ensure!(!p.deltas.is_empty(), Config, "deltas list is empty");
                ensure!(
                    p.deltas.iter().all(|d| (0.0..0.5).contains(d)),
                    Config,
                    "deltas must lie in [0, 0.5)"
                );
                ensure!(p.n >= 10, Config, "n must be at least 10");
            }
            ExperimentKind::DiminishingReturns => {
                let p = self.diminishing_returns();
                p.data.validate("diminishing-returns")?;
                check_fit(&p.fit)?;
                ensure!(
                    matches!(p.classifier, ClassifierKind::Tree | ClassifierKind::Mlp),
                    Config,
                    "diminishing-returns sweeps `tree` or `mlp`, not `{}`",
                    p.classifier
                );
                ensure!(
                    p.levels.len() >= 2,
                    Config,
                    "need at least two complexity levels"
                );
                ensure!(
                    p.levels.windows(2).all(|w| w[0] < w[1]),
                    Config,
                    "levels must be strictly increasing"
                );
                if p.classifier == ClassifierKind::Tree {
                    ensure!(p.levels[0] >= 1, Config, "leaf budgets start at 1");
                }
            }
            ExperimentKind::DriftReplay => {
                let p = self.drift_replay();
                check_fit(&p.fit)?;
                ensure!(
                    !(p.preset.is_some() && p.scenario.is_some()),
                    Config,
                    "[drift-replay] sets both `preset` and `scenario`"
                );
                let sc = super::scenario_for(self)?;
                sc.validate()?;
                ensure!(
                    !p.classifiers.is_empty(),
                    Config,
                    "classifier list is empty"
                );
                ensure!(
                    p.design_batches >= 1,
                    Config,
                    "design-batches must be at least 1"
                );
                ensure!(
                    p.design_batches < sc.steps,
                    Config,
                    "design window leaves no batches to evaluate"
                );
                ensure!(
                    p.span > 0.0 && p.span <= 1.0,
                    Config,
                    "span must lie in (0, 1]"
                );
                ensure!(
                    p.span * sc.steps as f64 + 1e-9 >= 2.0,
                    Config,
                    "span {} covers fewer than two of {} batches",
                    p.span,
                    sc.steps
                );
            }
            ExperimentKind::Proportion => {
                let p = self.proportion();
                let sources = usize::from(p.preset.is_some())
                    + usize::from(!p.rows.is_empty())
                    + usize::from(p.data.is_some());
                ensure!(
                    sources == 1,
                    Config,
                    "[proportion] needs exactly one of `preset`, `rows` or `data`"
                );
                if let Some(name) = &p.preset {
                    presets::proportion_preset(name)?;
                }
                if let Some(d) = &p.data {
                    d.validate("proportion")?;
                    ensure!(
                        !p.classifiers.is_empty(),
                        Config,
                        "classifier list is empty"
                    );
                }
                check_fit(&p.fit)?;
            }
            ExperimentKind::RankDisagreement => {
                let p = self.rank_disagreement();
                p.data.validate("rank-disagreement")?;
                check_fit(&p.fit)?;
                ensure!(
                    p.classifiers.len() >= 2,
                    Config,
                    "need at least two classifiers to rank"
                );
                ensure!(
                    p.metrics.len() >= 2,
                    Config,
                    "need at least two metrics to compare"
                );
                if let Some(r) = p.cost_ratio {
                    ensure!(
                        r > 0.0 && r.is_finite(),
                        Config,
                        "cost-ratio must be positive"
                    );
                }
            }
        }
        Ok(())
    }

    pub fn variance_curves(&self) -> VarianceCurvesParams {
        self.variance_curves.clone().unwrap_or_default()
    }

    pub fn flat_max(&self) -> FlatMaxParams {
        self.flat_max.clone().unwrap_or_default()
    }

    pub fn label_noise(&self) -> LabelNoiseParams {
        self.label_noise.clone().unwrap_or_default()
    }

    pub fn diminishing_returns(&self) -> DiminishingParams {
        self.diminishing_returns.clone().unwrap_or_default()
    }

    pub fn drift_replay(&self) -> DriftReplayParams {
        self.drift_replay.clone().unwrap_or_default()
    }

    pub fn proportion(&self) -> ProportionParams {
        self.proportion.clone().unwrap_or_default()
    }

    pub fn rank_disagreement(&self) -> RankParams {
        self.rank_disagreement.clone().unwrap_or_default()
    }

    /// SHA-256 of the canonical TOML rendering, leaving out `output` and
    /// `parallel`, which do not affect results.
    pub fn content_hash(&self) -> String {
        let mut canon = self.clone();
        canon.output = None;
        canon.parallel = true;
        let text = toml::to_string(&canon).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn check_fit(fit: &FitConfig) -> Result<()> {
    fit.validate().map_err(|e| Error::Config(e.to_string()))?;
    ensure!(
        fit.seed == 0,
        Config,
        "set the top-level `seed`; fit sections take theirs from it"
    );
    Ok(())
}
