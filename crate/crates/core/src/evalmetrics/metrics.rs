use std::fmt;

use crate::classifiers::label_at;
use crate::error::{ensure, Error, Result};

/// What [`evaluate`] measures. `CostWeighted` holds `c0`, the cost of
/// calling a class-0 object class 1, and `c1`, the cost of the reverse
/// mistake; only their ratio matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    ErrorRate,
    CostWeighted { c0: f64, c1: f64 },
    Brier,
    Auc,
}

impl MetricKind {
    /// Cost-weighted with `c0 / c1 = cost_ratio`.
    pub fn cost_weighted(cost_ratio: f64) -> Result<Self> {
        Self::with_costs(cost_ratio, 1.0)
    }

    pub fn with_costs(c0: f64, c1: f64) -> Result<Self> {
        ensure!(
            c0 > 0.0 && c0.is_finite() && c1 > 0.0 && c1.is_finite(),
            Constraint,
            "costs {c0} and {c1} must be positive and finite"
        );
        Ok(Self::CostWeighted { c0, c1 })
    }

    /// Costs `c0 = n1`, `c1 = n0`, so `c0 / c1 = pi1 / pi0`. With integer
    /// costs both all-one-class rules cost exactly `n0 n1 / (n0 n)`.
    pub fn prior_weighted(n0: usize, n1: usize) -> Result<Self> {
        Self::with_costs(n1 as f64, n0 as f64)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ErrorRate => "error-rate",
            Self::CostWeighted { .. } => "cost-weighted",
            Self::Brier => "brier",
            Self::Auc => "auc",
        }
    }

    /// The odds threshold that minimizes expected loss for this metric when
    /// scores are calibrated: `c0 / c1` for cost-weighted, otherwise 1.
    pub fn natural_threshold(&self) -> f64 {
        match self {
            Self::CostWeighted { c0, c1 } => c0 / c1,
            _ => 1.0,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Score `scores` against `labels`. Hard-label metrics predict class 1 when
/// the score odds reach `threshold_odds`.
///
/// Cost-weighted cost is `(c0 n01 + c1 n10) / (c1 n)`, that is
/// `(r n01 + n10) / n` with `r = c0 / c1`, where `n01` counts class-0 rows
/// called 1 and `n10` class-1 rows called 0. Equal costs give the error rate.
pub fn evaluate(
    metric: MetricKind,
    scores: &[f64],
    labels: &[u8],
    threshold_odds: f64,
) -> Result<f64> {
    ensure!(!scores.is_empty(), Precondition, "no scores to evaluate");
    ensure!(
        scores.len() == labels.len(),
        Precondition,
        "{} scores for {} labels",
        scores.len(),
        labels.len()
    );
    ensure!(
        scores.iter().all(|s| (0.0..=1.0).contains(s)),
        Precondition,
        "scores must lie in [0, 1]"
    );
    ensure!(
        labels.iter().all(|&y| y <= 1),
        Precondition,
        "labels must be 0 or 1"
    );
    ensure!(
        threshold_odds > 0.0 && !threshold_odds.is_nan(),
        Precondition,
        "threshold odds {threshold_odds} must be positive"
    );
    let n = scores.len() as f64;
    let mistakes = |c0: f64, c1: f64| {
        let (mut n01, mut n10) = (0usize, 0usize);
        for (&s, &y) in scores.iter().zip(labels) {
            match (y, label_at(s, threshold_odds)) {
                (0, 1) => n01 += 1,
                (1, 0) => n10 += 1,
                _ => {}
            }
        }
        (c0 * n01 as f64 + c1 * n10 as f64) / (c1 * n)
    };
    Ok(match metric {
        MetricKind::ErrorRate => mistakes(1.0, 1.0),
        MetricKind::CostWeighted { c0, c1 } => {
            ensure!(
                c0 > 0.0 && c0.is_finite() && c1 > 0.0 && c1.is_finite(),
                Constraint,
                "costs must be positive"
            );
            mistakes(c0, c1)
        }
        MetricKind::Brier => {
            scores
                .iter()
                .zip(labels)
                .map(|(&s, &y)| (s - f64::from(y)).powi(2))
                .sum::<f64>()
                / n
        }
        MetricKind::Auc => auc(scores, labels)?,
    })
}

/// Probability that a random class-1 row outscores a random class-0 row,
/// ties counting one half. Computed from midranks in `O(n log n)`.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    ensure!(
        scores.len() == labels.len(),
        Precondition,
        "scores and labels differ in length"
    );
    ensure!(
        scores.iter().all(|s| !s.is_nan()),
        Precondition,
        "scores contain NaN"
    );
    let n1 = labels.iter().filter(|&&y| y == 1).count();
    let n0 = labels.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::Precondition("AUC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += midrank * order[i..=j].iter().filter(|&&r| labels[r] == 1).count() as f64;
        i = j + 1;
    }
    let (n0, n1) = (n0 as f64, n1 as f64);
    Ok((rank_sum - n1 * (n1 + 1.0) / 2.0) / (n0 * n1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(s: &[f64], y: &[u8]) -> f64 {
        let (mut wins, mut pairs) = (0.0, 0.0);
        for i in 0..s.len() {
            for j in 0..s.len() {
                if y[i] == 1 && y[j] == 0 {
                    pairs += 1.0;
                    wins += if s[i] > s[j] {
                        1.0
                    } else if s[i] == s[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn perfect_predictions() {
        let (s, y) = ([0.0, 1.0, 1.0, 0.0], [0, 1, 1, 0]);
        assert_eq!(evaluate(MetricKind::ErrorRate, &s, &y, 1.0).unwrap(), 0.0);
        assert_eq!(evaluate(MetricKind::Brier, &s, &y, 1.0).unwrap(), 0.0);
        assert_eq!(evaluate(MetricKind::Auc, &s, &y, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn balanced_costs_make_constant_rules_equal() {
        let y: Vec<u8> = (0..50).map(|i| u8::from(i % 5 == 0)).collect();
        let (n1, n0) = (10.0, 40.0);
        let m = MetricKind::cost_weighted(n1 / n0).unwrap();
        let all0 = evaluate(m, &[0.0; 50], &y, 1.0).unwrap();
        let all1 = evaluate(m, &[1.0; 50], &y, 1.0).unwrap();
        assert_eq!(all0, all1);
        assert_eq!(all0, 0.2);
    }

    proptest! {
        #[test]
        fn prior_weighted_constant_rules_tie_exactly(n0 in 1usize..500, n1 in 1usize..500) {
            let y: Vec<u8> = (0..n0 + n1).map(|i| u8::from(i >= n0)).collect();
            let m = MetricKind::prior_weighted(n0, n1).unwrap();
            let k = m.natural_threshold();
            let all0 = evaluate(m, &vec![0.0; y.len()], &y, k).unwrap();
            let all1 = evaluate(m, &vec![1.0; y.len()], &y, k).unwrap();
            prop_assert_eq!(all0, all1);
        }
    }

    #[test]
    fn small_auc_example() {
        let v = auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap();
        assert_eq!(v, 0.75);
        assert_eq!(v, brute_auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]));
    }

    #[test]
    fn auc_needs_both_classes() {
        assert!(matches!(
            evaluate(MetricKind::Auc, &[0.2, 0.3], &[1, 1], 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn input_checks() {
        assert!(evaluate(MetricKind::Brier, &[], &[], 1.0).is_err());
        assert!(evaluate(MetricKind::Brier, &[1.2], &[1], 1.0).is_err());
        assert!(evaluate(MetricKind::Brier, &[0.2], &[1, 0], 1.0).is_err());
        assert!(MetricKind::cost_weighted(0.0).is_err());
    }

    fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
        (2usize..200).prop_flat_map(|n| {
            (
                prop::collection::vec(
                    prop_oneof![(0u8..10).prop_map(|k| f64::from(k) / 10.0), 0.0f64..1.0],
                    n,
                ),
                prop::collection::vec(0u8..2, n),
            )
        })
    }

    proptest! {
        #[test]
        fn auc_matches_pair_count((s, mut y) in scored()) {
            y[0] = 0;
            y[1] = 1;
            prop_assert!((auc(&s, &y).unwrap() - brute_auc(&s, &y)).abs() < 1e-12);
        }

        #[test]
        fn auc_ignores_monotone_transforms((s, mut y) in scored()) {
            y[0] = 0;
            y[1] = 1;
            let t: Vec<f64> = s.iter().map(|v| v.powi(3) / 2.0 + 0.1).collect();
            prop_assert_eq!(auc(&s, &y).unwrap(), auc(&t, &y).unwrap());
        }

        #[test]
        fn unit_costs_give_error_rate((s, y) in scored(), k in 0.1f64..10.0) {
            let a = evaluate(MetricKind::cost_weighted(1.0).unwrap(), &s, &y, k).unwrap();
            let b = evaluate(MetricKind::ErrorRate, &s, &y, k).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
