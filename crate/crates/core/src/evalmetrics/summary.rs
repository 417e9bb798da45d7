use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ensure, Error, Result};
use crate::synthdata::GaussianClassSpec;

/// Share of the default-to-best error gap that a simple method closes:
/// `(m0 - mL) / (m0 - mT)`.
pub fn proportion_achievable(m0: f64, m_l: f64, m_t: f64) -> Result<f64> {
    ensure!(
        [m0, m_l, m_t].iter().all(|v| v.is_finite()),
        Precondition,
        "error rates must be finite"
    );
    ensure!(
        m_l >= 0.0 && m_t >= 0.0,
        Precondition,
        "error rates must be nonnegative"
    );
    ensure!(
        m_l <= m0,
        Precondition,
        "simple-method error {m_l} exceeds default-rule error {m0}"
    );
    if m0 == m_t {
        return Err(Error::UndefinedRatio(format!(
            "default-rule and best-method errors are both {m0}"
        )));
    }
    ensure!(
        m0 > m_t,
        Precondition,
        "best-method error {m_t} exceeds default-rule error {m0}"
    );
    Ok((m0 - m_l) / (m0 - m_t))
}

pub(crate) fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Error of the optimal rule for two Gaussian classes with shared
/// covariance. The rule calls class 1 when the linear score
/// `L = w'(x - mid)` reaches `c = ln(pi0 / pi1)`; given class 1, `L` is
/// `N(D^2/2, D^2)` and given class 0 it is `N(-D^2/2, D^2)`, `D` being the
/// Mahalanobis distance. Equal priors give `Phi(-D/2)`.
pub fn bayes_error_gaussian(spec: &GaussianClassSpec) -> f64 {
    let (p1, delta) = (spec.prior1(), spec.mahalanobis());
    let p0 = 1.0 - p1;
    if delta == 0.0 {
        return p0.min(p1);
    }
    let c = (p0 / p1).ln();
    let phi = std_normal();
    let miss1 = phi.cdf((c - delta * delta / 2.0) / delta);
    let miss0 = phi.cdf((-c - delta * delta / 2.0) / delta);
    (p1 * miss1 + p0 * miss0).min(p0.min(p1))
}

/// Mean and normal-approximation 95% half-width `1.96 s / sqrt(m)`, `s`
/// being the sample standard deviation.
pub fn confidence_interval(values: &[f64]) -> Result<(f64, f64)> {
    ensure!(
        values.len() >= 2,
        Precondition,
        "need at least two values, got {}",
        values.len()
    );
    ensure!(
        values.iter().all(|v| v.is_finite()),
        Precondition,
        "values must be finite"
    );
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok((mean, 1.96 * var.sqrt() / m.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::gen_gaussian_two_class;
    use proptest::prelude::*;

    #[test]
    fn table_rows() {
        assert!((proportion_achievable(0.760, 0.083, 0.0140).unwrap() - 0.907).abs() <= 1e-3);
        assert!((proportion_achievable(0.560, 0.141, 0.1410).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(proportion_achievable(0.3, 0.3, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn proportion_errors() {
        assert!(matches!(
            proportion_achievable(0.3, 0.2, 0.3),
            Err(Error::UndefinedRatio(_))
        ));
        assert!(matches!(
            proportion_achievable(0.3, 0.4, 0.1),
            Err(Error::Precondition(_))
        ));
    }

    proptest! {
        #[test]
        fn proportion_is_scale_free(m_t in 0.0f64..0.3, gap_l in 0.0f64..1.0, gap in 0.01f64..0.5, g in 0.01f64..100.0) {
            let m0 = m_t + gap;
            let m_l = m0 - gap_l * gap;
            let a = proportion_achievable(m0, m_l, m_t).unwrap();
            let b = proportion_achievable(g * m0, g * m_l, g * m_t).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn bayes_rates() {
        let g = GaussianClassSpec::separated(2, 2.0, 0.5).unwrap();
        assert!((bayes_error_gaussian(&g) - 0.158_655_253_931_457).abs() < 1e-9);
        let same = GaussianClassSpec::separated(2, 0.0, 0.3).unwrap();
        assert_eq!(bayes_error_gaussian(&same), 0.3);
    }

    #[test]
    fn unequal_prior_bayes_rate_matches_monte_carlo() {
        let g = GaussianClassSpec::separated(1, 2.0, 0.7).unwrap();
        let d = gen_gaussian_two_class(&g, 1_000_000, 77).unwrap();
        let wrong = (0..d.n())
            .filter(|&i| u8::from(g.log_odds(&[d.features()[(i, 0)]]) >= 0.0) != d.labels()[i])
            .count();
        let mc = wrong as f64 / d.n() as f64;
        let exact = bayes_error_gaussian(&g);
        assert!((mc - exact).abs() < 0.002, "mc {mc} vs {exact}");
        assert!(exact < 0.3);
    }

    #[test]
    fn intervals() {
        assert_eq!(confidence_interval(&[0.4; 5]).unwrap(), (0.4, 0.0));
        let (m, h) = confidence_interval(&[0.0, 1.0]).unwrap();
        assert_eq!(m, 0.5);
        assert!((h - 0.98).abs() < 1e-3);
        let block = [0.1, 0.5, 0.2, 0.9];
        let (_, h4) = confidence_interval(&block).unwrap();
        let h16 = confidence_interval(&block.repeat(4)).unwrap().1;
        // Same sample sd up to the (m - 1) correction, four times the count.
        let sd = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
        };
        let ratio = (h4 / sd(&block)) / (h16 / sd(&block.repeat(4)));
        assert!((ratio - 2.0).abs() < 1e-12);
        assert!(confidence_interval(&[1.0]).is_err());
    }
}
