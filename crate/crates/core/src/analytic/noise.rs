use crate::error::{ensure, Result};

/// Symmetric label noise: a fraction `delta` of each class carries the
/// other class's label. `epsilon = delta / (1 - delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    delta: f64,
    epsilon: f64,
}

impl NoiseModel {
    /// `delta` must lie in `[0, 0.5)`; at one half the labels carry no
    /// information and the odds map stops being increasing.
    pub fn new(delta: f64) -> Result<Self> {
        ensure!(
            (0.0..0.5).contains(&delta),
            Precondition,
            "label-flip proportion {delta} must be in [0, 0.5)"
        );
        Ok(Self {
            delta,
            epsilon: delta / (1.0 - delta),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

fn shrink(r: f64, eps: f64) -> f64 {
    if r.is_infinite() {
        // limit of (r + e) / (e r + 1)
        return if eps > 0.0 { 1.0 / eps } else { r };
    }
    (r + eps) / (eps * r + 1.0)
}

/// Apparent posterior odds `(r + ε) / (ε r + 1)` once labels are noisy.
/// Odds below one move up, odds above one move down.
pub fn noisy_odds(r: f64, noise: &NoiseModel) -> Result<f64> {
    ensure!(r >= 0.0, Precondition, "odds {r} must be nonnegative");
    Ok(shrink(r, noise.epsilon))
}

/// The threshold on noisy odds that reproduces the decisions of threshold
/// `k` on the true odds.
pub fn corrected_threshold(k: f64, noise: &NoiseModel) -> Result<f64> {
    ensure!(
        k > 0.0 && k.is_finite(),
        Precondition,
        "odds threshold {k} must be positive"
    );
    Ok(shrink(k, noise.epsilon))
}

/// Inverse of [`noisy_odds`]: `(r* - ε) / (1 - ε r*)`. Defined while
/// `ε r* < 1`, which holds for every odds value the forward map produces.
pub fn denoised_odds(r_star: f64, noise: &NoiseModel) -> Result<f64> {
    let eps = noise.epsilon;
    ensure!(
        r_star >= eps && eps * r_star < 1.0,
        Precondition,
        "noisy odds {r_star} outside the image [{eps}, {}) of the noise map",
        if eps > 0.0 { 1.0 / eps } else { f64::INFINITY }
    );
    Ok((r_star - eps) / (1.0 - eps * r_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn noise(delta: f64) -> NoiseModel {
        NoiseModel::new(delta).unwrap()
    }

    #[test]
    fn epsilon_definition() {
        assert_eq!(noise(0.1).epsilon(), 0.1 / 0.9);
        assert!(NoiseModel::new(0.5).is_err());
        assert!(NoiseModel::new(-0.01).is_err());
    }

    #[test]
    fn odds_examples() {
        assert_eq!(noisy_odds(1.0, &noise(0.3)).unwrap(), 1.0);
        assert_eq!(noisy_odds(3.0, &noise(0.0)).unwrap(), 3.0);
        // Oracle: p(1|x) = 3/4, p* = 0.9 * 0.75 + 0.1 * 0.25 = 0.7, odds 0.7/0.3.
        let p1: f64 = 0.75;
        let p_star = 0.9 * p1 + 0.1 * (1.0 - p1);
        let oracle = p_star / (1.0 - p_star);
        assert!((oracle - 7.0 / 3.0).abs() < 1e-12);
        assert!((noisy_odds(3.0, &noise(0.1)).unwrap() - oracle).abs() < 1e-12);
        assert!(noisy_odds(-1.0, &noise(0.1)).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(corrected_threshold(1.0, &noise(0.1)).unwrap(), 1.0);
        assert_eq!(corrected_threshold(2.0, &noise(0.0)).unwrap(), 2.0);
        // ε = 1/9: (2 + 1/9) / (2/9 + 1) = 19/11.
        assert!((corrected_threshold(2.0, &noise(0.1)).unwrap() - 19.0 / 11.0).abs() < 1e-12);
        assert!(corrected_threshold(0.0, &noise(0.1)).is_err());
    }

    proptest! {
        #[test]
        fn shrinks_toward_one(r in 0.0f64..100.0, delta in 0.001f64..0.49) {
            let n = noise(delta);
            let rs = noisy_odds(r, &n).unwrap();
            if r < 1.0 { prop_assert!(rs > r); }
            if r > 1.0 { prop_assert!(rs < r); }
        }

        #[test]
        fn monotone(a in 0.0f64..50.0, b in 0.0f64..50.0, delta in 0.0f64..0.49) {
            let n = noise(delta);
            if a < b {
                prop_assert!(noisy_odds(a, &n).unwrap() <= noisy_odds(b, &n).unwrap());
            }
        }

        #[test]
        fn inverse_recovers(r in 0.0f64..50.0, delta in 0.0f64..=0.4) {
            let n = noise(delta);
            let back = denoised_odds(noisy_odds(r, &n).unwrap(), &n).unwrap();
            prop_assert!((back - r).abs() <= 1e-12 * r.max(1.0));
        }

        #[test]
        fn decisions_preserved(r in 0.0f64..20.0, k in 0.01f64..20.0, delta in 0.0f64..=0.4) {
            let n = noise(delta);
            let rs = noisy_odds(r, &n).unwrap();
            let ks = corrected_threshold(k, &n).unwrap();
            // exclude the measure-zero boundary where rounding decides
            if (r - k).abs() > 1e-9 * k.max(1.0) {
                prop_assert_eq!(rs > ks, r > k);
            }
        }
    }
}
