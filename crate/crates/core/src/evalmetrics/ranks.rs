use statrs::distribution::ContinuousCDF;

use crate::error::{ensure, Result};

use super::summary::std_normal;

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Kendall's tau-b between two paired rankings, with the usual correction
/// for ties in either variable.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Result<f64> {
    ensure!(
        a.len() == b.len(),
        Precondition,
        "paired samples differ in length"
    );
    ensure!(a.len() >= 2, Precondition, "need at least two pairs");
    let (mut s, mut na, mut nb) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let (da, db) = (sign(a[j] - a[i]), sign(b[j] - b[i]));
            s += da * db;
            na += da.abs();
            nb += db.abs();
        }
    }
    ensure!(na > 0.0 && nb > 0.0, Degenerate, "a ranking is constant");
    Ok(s / (na * nb).sqrt())
}

/// Mann-Kendall trend test on a series in time order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannKendall {
    pub s: f64,
    pub z: f64,
    /// Two-sided normal-approximation p-value.
    pub p_value: f64,
}

/// `S = sum_{i<j} sign(x_j - x_i)`, variance corrected for tied groups, `z`
/// with a continuity correction of one.
pub fn mann_kendall(x: &[f64]) -> Result<MannKendall> {
    let n = x.len();
    ensure!(
        n >= 3,
        Precondition,
        "trend test needs at least three values, got {n}"
    );
    ensure!(
        x.iter().all(|v| v.is_finite()),
        Precondition,
        "series must be finite"
    );
    let s: f64 = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| sign(x[j] - x[i]))
        .sum();
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        let t = j as f64;
        ties += t * (t - 1.0) * (2.0 * t + 5.0);
        i += j;
    }
    let nf = n as f64;
    let var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - ties) / 18.0;
    let z = if var <= 0.0 || s == 0.0 {
        0.0
    } else {
        (s - s.signum()) / var.sqrt()
    };
    let p_value = 2.0 * (1.0 - std_normal().cdf(z.abs()));
    Ok(MannKendall { s, z, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_extremes_and_ties() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau_b(&a, &a).unwrap(), 1.0);
        assert_eq!(kendall_tau_b(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        // One tie in b: 5 concordant, 0 discordant, 6 and 5 untied pairs.
        let t = kendall_tau_b(&a, &[1.0, 1.0, 2.0, 3.0]).unwrap();
        assert!((t - 5.0 / 30f64.sqrt()).abs() < 1e-12);
        assert!(kendall_tau_b(&a, &[1.0; 4]).is_err());
    }

    #[test]
    fn trend_detection() {
        let up: Vec<f64> = (0..30)
            .map(|i| f64::from(i) + (f64::from(i) * 1.7).sin())
            .collect();
        let mk = mann_kendall(&up).unwrap();
        assert!(mk.z > 0.0 && mk.p_value < 0.01);
        let flat = [1.0, 3.0, 2.0, 3.0, 1.0, 2.0, 1.0, 3.0, 2.0];
        assert!(mann_kendall(&flat).unwrap().p_value > 0.5);
        // n = 4, strictly increasing: S = 6, var = 4*3*13/18.
        let mk = mann_kendall(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(mk.s, 6.0);
        assert!((mk.z - 5.0 / (156.0f64 / 18.0).sqrt()).abs() < 1e-12);
    }
}
