use nalgebra::DVectorView;

use crate::data::Dataset;
use crate::error::Result;

use super::{majority_score, FitConfig};

/// A single-feature partition rule: the chosen feature is cut into cells and
/// each cell votes for its majority class.
#[derive(Debug, Clone, PartialEq)]
pub struct OneRule {
    pub(crate) feature: usize,
    /// Ascending cut points; a value `x` falls in cell `#{c : x > c}`.
    pub(crate) cuts: Vec<f64>,
    pub(crate) cell_scores: Vec<f64>,
    pub(crate) dim: usize,
}

impl OneRule {
    /// Zero-based index of the selected feature.
    pub fn feature(&self) -> usize {
        self.feature
    }

    pub fn cells(&self) -> usize {
        self.cell_scores.len()
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn score_row(&self, x: DVectorView<'_, f64>) -> f64 {
        let v = x[self.feature];
        let cell = self.cuts.partition_point(|&c| v > c);
        self.cell_scores[cell]
    }
}

/// Cut points of an equal-frequency partition of `sorted` into at most
/// `cells` cells. Targets that land inside a run of equal values are
/// dropped, so the partition can have fewer cells than asked for.
pub(crate) fn equal_frequency_cuts(sorted: &[f64], cells: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut cuts: Vec<f64> = Vec::with_capacity(cells.saturating_sub(1));
    for i in 1..cells {
        let pos = (i * n + cells / 2) / cells;
        if pos == 0 || pos >= n || sorted[pos - 1] == sorted[pos] {
            continue;
        }
        let cut = sorted[pos - 1] + (sorted[pos] - sorted[pos - 1]) / 2.0;
        if cuts.last().is_none_or(|&last| cut > last) {
            cuts.push(cut);
        }
    }
    cuts
}

struct Candidate {
    errors: usize,
    feature: usize,
    cuts: Vec<f64>,
    counts: Vec<(usize, usize)>,
}

fn evaluate(values: &[f64], labels: &[u8], cuts: &[f64]) -> (usize, Vec<(usize, usize)>) {
    let mut counts = vec![(0usize, 0usize); cuts.len() + 1];
    for (&v, &y) in values.iter().zip(labels) {
        let cell = cuts.partition_point(|&c| v > c);
        if y == 1 {
            counts[cell].1 += 1;
        } else {
            counts[cell].0 += 1;
        }
    }
    // majority label with ties to class 0 misclassifies min(n0, n1) rows
    let errors = counts.iter().map(|&(a, b)| a.min(b)).sum();
    (errors, counts)
}

/// Fit a 1R rule: for every feature and every cell budget `1..=cfg.bins`,
/// build the equal-frequency partition, label cells by majority, and keep
/// the partition with the fewest training errors. Ties go to the lowest
/// feature index, then to fewer cells.
pub fn fit_one_r(data: &Dataset, cfg: &FitConfig) -> Result<OneRule> {
    cfg.validate()?;
    data.require_both_classes("1R")?;
    let labels = data.labels();
    let mut best: Option<Candidate> = None;
    for j in 0..data.p() {
        let values: Vec<f64> = data.features().column(j).iter().copied().collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        for cells in 1..=cfg.bins {
            let cuts = equal_frequency_cuts(&sorted, cells);
            let (errors, counts) = evaluate(&values, labels, &cuts);
            let better = match &best {
                None => true,
                Some(b) => (errors, j, cuts.len()) < (b.errors, b.feature, b.cuts.len()),
            };
            if better {
                best = Some(Candidate {
                    errors,
                    feature: j,
                    cuts,
                    counts,
                });
            }
        }
    }
    let best = best.expect("at least one feature");
    Ok(OneRule {
        feature: best.feature,
        cell_scores: best
            .counts
            .iter()
            .map(|&(a, b)| majority_score(a, b))
            .collect(),
        cuts: best.cuts,
        dim: data.p(),
    })
}
