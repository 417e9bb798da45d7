use nalgebra::DMatrix;

use crate::error::{ensure, Error, Result};

/// A labelled two-class sample.
///
/// Rows of `features` are observations. Labels are `0` or `1`. The optional
/// `time_index` orders rows for drift experiments and `latent_score` carries
/// the continuum that class labels were thresholded from, when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    time_index: Option<Vec<i64>>,
    latent_score: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<u8>) -> Result<Self> {
        let names = (0..features.ncols())
            .map(|j| format!("x{}", j + 1))
            .collect();
        Self::with_names(features, labels, names)
    }

    pub fn with_names(
        features: DMatrix<f64>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let (n, p) = features.shape();
        ensure!(n >= 1, Precondition, "dataset needs at least one row");
        ensure!(p >= 1, Precondition, "dataset needs at least one feature");
        ensure!(
            labels.len() == n,
            Precondition,
            "{} labels for {} rows",
            labels.len(),
            n
        );
        ensure!(
            feature_names.len() == p,
            Precondition,
            "{} feature names for {} columns",
            feature_names.len(),
            p
        );
        ensure!(
            labels.iter().all(|&y| y <= 1),
            Precondition,
            "labels must be 0 or 1"
        );
        ensure!(
            features.iter().all(|v| v.is_finite()),
            Precondition,
            "features must be finite"
        );
        Ok(Self {
            features,
            labels,
            feature_names,
            time_index: None,
            latent_score: None,
        })
    }

    pub fn with_time_index(mut self, t: Vec<i64>) -> Result<Self> {
        ensure!(
            t.len() == self.n(),
            Precondition,
            "time index length {} != {}",
            t.len(),
            self.n()
        );
        ensure!(
            t.windows(2).all(|w| w[0] <= w[1]),
            Precondition,
            "time index must be nondecreasing"
        );
        self.time_index = Some(t);
        Ok(self)
    }

    pub fn with_latent_score(mut self, s: Vec<f64>) -> Result<Self> {
        ensure!(
            s.len() == self.n(),
            Precondition,
            "latent score length {} != {}",
            s.len(),
            self.n()
        );
        ensure!(
            s.iter().all(|v| v.is_finite()),
            Precondition,
            "latent scores must be finite"
        );
        self.latent_score = Some(s);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn p(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn time_index(&self) -> Option<&[i64]> {
        self.time_index.as_deref()
    }

    pub fn latent_score(&self) -> Option<&[f64]> {
        self.latent_score.as_deref()
    }

    /// `(count of class 0, count of class 1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.labels.iter().filter(|&&y| y == 1).count();
        (self.n() - n1, n1)
    }

    pub fn class1_fraction(&self) -> f64 {
        self.class_counts().1 as f64 / self.n() as f64
    }

    pub(crate) fn require_both_classes(&self, what: &str) -> Result<()> {
        let (n0, n1) = self.class_counts();
        ensure!(
            n0 > 0 && n1 > 0,
            Precondition,
            "{what} needs both classes present (got {n0} of class 0, {n1} of class 1)"
        );
        Ok(())
    }

    /// Replace labels, keeping everything else.
    pub fn relabel(&self, labels: Vec<u8>) -> Result<Self> {
        ensure!(
            labels.len() == self.n(),
            Precondition,
            "label count mismatch"
        );
        ensure!(
            labels.iter().all(|&y| y <= 1),
            Precondition,
            "labels must be 0 or 1"
        );
        let mut out = self.clone();
        out.labels = labels;
        Ok(out)
    }

    /// Rows in the given order. Indices may repeat.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        ensure!(!rows.is_empty(), Degenerate, "empty row selection");
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::Precondition(format!("row {bad} out of range")));
        }
        let features = DMatrix::from_fn(rows.len(), self.p(), |i, j| self.features[(rows[i], j)]);
        Ok(Self {
            features,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            feature_names: self.feature_names.clone(),
            time_index: self
                .time_index
                .as_ref()
                .map(|t| rows.iter().map(|&r| t[r]).collect()),
            latent_score: self
                .latent_score
                .as_ref()
                .map(|s| rows.iter().map(|&r| s[r]).collect()),
        })
    }

    /// Drop a feature column.
    pub fn without_feature(&self, col: usize) -> Result<Self> {
        ensure!(col < self.p(), Precondition, "column {col} out of range");
        ensure!(self.p() >= 2, Degenerate, "cannot drop the only feature");
        let mut out = self.clone();
        out.features = self.features.clone().remove_column(col);
        out.feature_names.remove(col);
        Ok(out)
    }

    /// Stack datasets with the same columns, row-wise.
    pub fn concat(parts: &[Dataset]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Degenerate("nothing to concatenate".into()))?;
        let p = first.p();
        ensure!(
            parts.iter().all(|d| d.p() == p),
            Precondition,
            "column counts differ"
        );
        let n: usize = parts.iter().map(Dataset::n).sum();
        let mut features = DMatrix::zeros(n, p);
        let mut labels = Vec::with_capacity(n);
        let mut offset = 0;
        for d in parts {
            features.rows_mut(offset, d.n()).copy_from(&d.features);
            labels.extend_from_slice(&d.labels);
            offset += d.n();
        }
        let time_index = parts
            .iter()
            .map(|d| d.time_index.clone())
            .collect::<Option<Vec<_>>>()
            .map(|v| v.concat());
        let latent_score = parts
            .iter()
            .map(|d| d.latent_score.clone())
            .collect::<Option<Vec<_>>>()
            .map(|v| v.concat());
        let mut out = Self::with_names(features, labels, first.feature_names.clone())?;
        if let Some(t) = time_index {
            out = out.with_time_index(t)?;
        }
        out.latent_score = latent_score;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            vec![0, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn counts_and_subset() {
        let d = tiny();
        assert_eq!(d.class_counts(), (1, 2));
        let s = d.subset(&[2, 0]).unwrap();
        assert_eq!(s.labels(), &[1, 0]);
        assert_eq!(s.features()[(0, 1)], 6.0);
    }

    #[test]
    fn rejects_bad_labels_and_nan() {
        assert!(Dataset::new(DMatrix::from_element(1, 1, 0.0), vec![2]).is_err());
        assert!(Dataset::new(DMatrix::from_element(1, 1, f64::NAN), vec![0]).is_err());
        assert!(tiny().with_time_index(vec![2, 1, 3]).is_err());
    }

    #[test]
    fn concat_keeps_time() {
        let a = tiny().with_time_index(vec![0, 0, 0]).unwrap();
        let b = tiny().with_time_index(vec![1, 1, 1]).unwrap();
        let c = Dataset::concat(&[a, b]).unwrap();
        assert_eq!(c.n(), 6);
        assert_eq!(c.time_index().unwrap(), &[0, 0, 0, 1, 1, 1]);
    }
}
