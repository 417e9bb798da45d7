use crate::error::{ensure, Result};

pub const DEFAULT_SPAN: f64 = 0.3;

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let v = 1.0 - u * u * u;
        v * v * v
    }
}

/// Plain lowess (no robustness iterations): at each `x[i]`, a weighted
/// straight-line fit over the `q = floor(span * n)` nearest abscissae with
/// tricube weights scaled by the distance to the `q`-th nearest.
pub fn lowess_smooth(x: &[f64], y: &[f64], span: f64) -> Result<Vec<f64>> {
    let n = x.len();
    ensure!(
        y.len() == n,
        Precondition,
        "{} abscissae for {} values",
        n,
        y.len()
    );
    ensure!(
        span > 0.0 && span <= 1.0,
        Precondition,
        "span {span} must lie in (0, 1]"
    );
    ensure!(
        x.windows(2).all(|w| w[0] < w[1]),
        Precondition,
        "abscissae must be strictly increasing"
    );
    ensure!(
        x.iter().chain(y).all(|v| v.is_finite()),
        Precondition,
        "inputs must be finite"
    );
    let q = (span * n as f64 + 1e-9).floor() as usize;
    ensure!(
        q >= 2,
        Precondition,
        "span {span} covers fewer than 2 of {n} points"
    );
    let mut out = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0, q - 1);
    for i in 0..n {
        // Slide the window [lo, hi] of q nearest points to the right while
        // that brings it closer to x[i].
        while hi + 1 < n && x[hi + 1] - x[i] < x[i] - x[lo] {
            lo += 1;
            hi += 1;
        }
        let h = (x[i] - x[lo]).max(x[hi] - x[i]);
        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        let w: Vec<f64> = (lo..=hi)
            .map(|j| tricube((x[j] - x[i]).abs() / h))
            .collect();
        for (j, &wj) in (lo..=hi).zip(&w) {
            sw += wj;
            sx += wj * x[j];
            sy += wj * y[j];
        }
        let (mx, my) = (sx / sw, sy / sw);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (j, &wj) in (lo..=hi).zip(&w) {
            sxx += wj * (x[j] - mx).powi(2);
            sxy += wj * (x[j] - mx) * (y[j] - my);
        }
        let range = x[n - 1] - x[0];
        let fit = if sxx > 1e-12 * range * range * sw {
            my + sxy / sxx * (x[i] - mx)
        } else {
            my
        };
        out.push(fit);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Vector2};

    #[test]
    fn reproduces_lines_and_constants() {
        let x: Vec<f64> = (0..40)
            .map(|i| f64::from(i) * 0.7 + (f64::from(i) * 0.3).sin())
            .collect();
        let line: Vec<f64> = x.iter().map(|v| 3.0 - 2.5 * v).collect();
        for (a, b) in lowess_smooth(&x, &line, 0.3).unwrap().iter().zip(&line) {
            assert!((a - b).abs() < 1e-9);
        }
        let flat = lowess_smooth(&x, &[4.25; 40], 0.3).unwrap();
        assert!(flat.iter().all(|v| (v - 4.25).abs() < 1e-12));
    }

    /// Brute force: rank all points by distance, take the q nearest, build
    /// the weighted normal equations and solve them.
    fn oracle(x: &[f64], y: &[f64], span: f64) -> Vec<f64> {
        let q = (span * x.len() as f64 + 1e-9).floor() as usize;
        (0..x.len())
            .map(|i| {
                let mut d: Vec<(f64, usize)> = x
                    .iter()
                    .enumerate()
                    .map(|(j, v)| ((v - x[i]).abs(), j))
                    .collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0));
                let h = d[q - 1].0;
                let mut a = Matrix2::zeros();
                let mut b = Vector2::zeros();
                for &(dist, j) in &d[..q] {
                    let w = if dist < h {
                        (1.0 - (dist / h).powi(3)).powi(3)
                    } else {
                        0.0
                    };
                    let r = Vector2::new(1.0, x[j]);
                    a += w * r * r.transpose();
                    b += w * y[j] * r;
                }
                let beta = a.lu().solve(&b).unwrap();
                beta[0] + beta[1] * x[i]
            })
            .collect()
    }

    #[test]
    fn matches_weighted_least_squares_oracle() {
        let x = [1.0, 2.0, 3.5, 4.0, 5.5, 7.0, 8.0, 8.5, 10.0, 12.0];
        let y = [2.1, 3.9, 3.2, 5.8, 4.4, 7.7, 6.1, 8.9, 9.3, 12.5];
        for span in [0.4, 0.6, 1.0] {
            let got = lowess_smooth(&x, &y, span).unwrap();
            for (g, o) in got.iter().zip(oracle(&x, &y, span)) {
                assert!((g - o).abs() < 1e-9, "span {span}: {g} vs {o}");
            }
        }
    }

    #[test]
    fn span_too_small() {
        assert!(lowess_smooth(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 0.5).is_err());
        assert!(lowess_smooth(&[1.0, 1.0, 3.0], &[1.0, 2.0, 3.0], 1.0).is_err());
    }
}
