//! Velocity search behind the `drift-crossing` preset.
//!
//! For each candidate velocity and seed, runs the drift-replay protocol and
//! checks the crossing: tree cheaper than LDA over the first tenth of the
//! batches, LDA no dearer than the tree over the last tenth.
//!
//! ```sh
//! cargo run --release --example calibrate_drift
//! ```

use illusion_lab::harness::presets::DRIFT_CROSSING_VELOCITY;
use illusion_lab::harness::{run_experiment, ExperimentConfig, ExperimentKind, ScenarioConfig};

fn scenario(velocity: f64) -> ScenarioConfig {
    let text = format!(
        r#"
mu0 = [0.0, 0.0]
mu1 = [0.0, 0.0]
sigma = [[1.0, 0.0], [0.0, 1.0]]
prior1 = 0.5
steps = 120
batch-size = 500
velocity = [0.0, {velocity}]
drift-both = true
[latent]
weights = [1.0, 0.0]
noise-sd = 0.3
bands = [{{ feature = 1, lo = 1.0, hi = 3.5, weight = 1.0 }}, {{ feature = 1, lo = -3.5, hi = -1.0, weight = 1.0 }}]
"#
    );
    toml::from_str(&text).expect("scenario parses")
}

fn window_means(table: &illusion_lab::harness::ResultTable, label: &str) -> (f64, f64) {
    let v: Vec<f64> = table
        .series("cost-weighted", label)
        .map(|r| r.value)
        .collect();
    let k = v.len().div_ceil(10);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    (mean(&v[..k]), mean(&v[v.len() - k..]))
}

fn main() {
    println!("frozen velocity: {DRIFT_CROSSING_VELOCITY}");
    for velocity in [0.02, 0.03, 0.035, 0.04, 0.045, 0.05, 0.06] {
        let mut crossings = Vec::new();
        for seed in 0..30u64 {
            let mut cfg = ExperimentConfig::new(ExperimentKind::DriftReplay);
            cfg.seed = seed;
            let mut params = cfg.drift_replay();
            params.scenario = Some(scenario(velocity));
            cfg.drift_replay = Some(params);
            let table = run_experiment(&cfg).expect("run");
            let (tree_early, tree_late) = window_means(&table, "tree");
            let (lda_early, lda_late) = window_means(&table, "lda");
            if tree_early < lda_early && lda_late <= tree_late {
                crossings.push(seed);
            }
            if seed < 3 {
                println!(
                    "v={velocity} seed={seed} early tree {tree_early:.4} lda {lda_early:.4} | late tree {tree_late:.4} lda {lda_late:.4}"
                );
            }
        }
        println!(
            "v={velocity}: crossing at {}/30 seeds {:?}",
            crossings.len(),
            crossings
        );
    }
}
