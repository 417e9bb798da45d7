use nalgebra::{DMatrix, DVector};

use crate::error::{ensure, Result};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A symmetric correlation matrix with unit diagonal and entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix(DMatrix<f64>);

impl CorrMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let d = entries.nrows();
        ensure!(
            d >= 1 && entries.ncols() == d,
            Precondition,
            "correlation matrix must be square and nonempty"
        );
        for i in 0..d {
            ensure!(
                entries[(i, i)] == 1.0,
                Precondition,
                "diagonal entry {i} is {} not 1",
                entries[(i, i)]
            );
            for j in 0..d {
                let r = entries[(i, j)];
                ensure!(
                    (-1.0..=1.0).contains(&r),
                    Precondition,
                    "entry ({i},{j}) = {r} outside [-1, 1]"
                );
                ensure!(
                    (r - entries[(j, i)]).abs() <= SYMMETRY_TOLERANCE,
                    Precondition,
                    "matrix not symmetric at ({i},{j})"
                );
            }
        }
        Ok(Self(entries))
    }

    /// `(1 - rho) I + rho 11ᵀ`.
    pub fn equicorrelated(d: usize, rho: f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(
            d,
            d,
            |i, j| if i == j { 1.0 } else { rho },
        ))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// The two lower bounds on the correlation between the equally weighted sum
/// and any other nonnegative, normalized weighted sum.
///
/// `mean_of_row_minima` is `(1/d) Σ_i min_j r_ij`, the end of the inequality
/// chain, and is the guaranteed bound. `smallest_row_average` is
/// `min_i (1/d) Σ_j r_ij`; it is at least as large and is reported for
/// comparison only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatMaxBounds {
    pub mean_of_row_minima: f64,
    pub smallest_row_average: f64,
}

pub fn flat_maximum_bound(corr: &CorrMatrix) -> Result<FlatMaxBounds> {
    let m = corr.entries();
    ensure!(
        m.iter().all(|&r| r >= 0.0),
        Precondition,
        "flat-maximum bound needs nonnegative correlations"
    );
    let d = corr.dim() as f64;
    let rows = m.row_iter();
    let (min_sum, min_avg) = rows.fold((0.0, f64::INFINITY), |(acc, best), row| {
        let row_min = row.iter().copied().fold(f64::INFINITY, f64::min);
        (acc + row_min, best.min(row.sum() / d))
    });
    Ok(FlatMaxBounds {
        mean_of_row_minima: min_sum / d,
        smallest_row_average: min_avg,
    })
}

fn check_weights(name: &str, w: &[f64], d: usize) -> Result<()> {
    ensure!(
        w.len() == d,
        Precondition,
        "weight vector `{name}` has length {} for dimension {d}",
        w.len()
    );
    ensure!(
        w.iter().all(|&x| x >= 0.0),
        Precondition,
        "weight vector `{name}` has a negative entry"
    );
    let total: f64 = w.iter().sum();
    ensure!(
        (total - 1.0).abs() <= WEIGHT_SUM_TOLERANCE,
        Precondition,
        "weight vector `{name}` sums to {total}, not 1"
    );
    Ok(())
}

/// Correlation between `Σ w_i x_i` and `Σ v_i x_i` for standardized `x` with
/// correlation matrix `corr`: `wᵀΣv / sqrt(wᵀΣw · vᵀΣv)`.
pub fn weighted_sum_correlation(corr: &CorrMatrix, w: &[f64], v: &[f64]) -> Result<f64> {
    let d = corr.dim();
    check_weights("w", w, d)?;
    check_weights("v", v, d)?;
    let m = corr.entries();
    let w = DVector::from_column_slice(w);
    let v = DVector::from_column_slice(v);
    let (mw, mv) = (m * &w, m * &v);
    let var_w = w.dot(&mw);
    let var_v = v.dot(&mv);
    ensure!(
        var_w > 0.0 && var_v > 0.0,
        Degenerate,
        "weighted sum has zero variance (wᵀΣw = {var_w}, vᵀΣv = {var_v})"
    );
    Ok((w.dot(&mv) / (var_w * var_v).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::rng::substream;
    use rand::Rng;

    #[test]
    fn identity_bound_is_zero() {
        let b = flat_maximum_bound(&CorrMatrix::identity(3)).unwrap();
        assert_eq!(b.mean_of_row_minima, 0.0);
        assert!((b.smallest_row_average - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn equicorrelated_bound_is_rho() {
        let b = flat_maximum_bound(&CorrMatrix::equicorrelated(3, 0.8).unwrap()).unwrap();
        assert!((b.mean_of_row_minima - 0.8).abs() < 1e-15);
    }

    #[test]
    fn negative_entries_rejected() {
        let c = CorrMatrix::equicorrelated(2, -0.1).unwrap();
        assert!(matches!(
            flat_maximum_bound(&c),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn weighted_sum_examples() {
        let eq = CorrMatrix::equicorrelated(2, 0.5).unwrap();
        let id = CorrMatrix::identity(2);
        assert!(
            (weighted_sum_correlation(&eq, &[0.3, 0.7], &[0.3, 0.7]).unwrap() - 1.0).abs() < 1e-15
        );
        assert_eq!(
            weighted_sum_correlation(&id, &[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            0.0
        );
        assert!(
            (weighted_sum_correlation(&eq, &[1.0, 0.0], &[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15
        );
    }

    #[test]
    fn weight_preconditions() {
        let id = CorrMatrix::identity(2);
        assert!(matches!(
            weighted_sum_correlation(&id, &[1.5, -0.5], &[0.5, 0.5]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            weighted_sum_correlation(&id, &[0.5, 0.6], &[0.5, 0.5]),
            Err(Error::Precondition(_))
        ));
        let singular =
            CorrMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])).unwrap();
        assert!(matches!(
            weighted_sum_correlation(&singular, &[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn monte_carlo_equal_weights_bound() {
        let c = CorrMatrix::equicorrelated(4, 0.5).unwrap();
        let equal = [0.25; 4];
        let mut rng = substream(11, &[]);
        for _ in 0..10_000 {
            let raw: Vec<f64> = (0..4)
                .map(|_| -rng.random::<f64>().max(1e-300).ln())
                .collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            assert!(weighted_sum_correlation(&c, &equal, &w).unwrap() >= 0.5);
        }
    }
}
