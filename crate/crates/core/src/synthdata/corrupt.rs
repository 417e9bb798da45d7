use rand::Rng;

use crate::data::Dataset;
use crate::error::{ensure, Result};
use crate::rng::{purpose, substream, StreamRng};

/// The rows `inject_label_noise` flips: one uniform per row from the
/// label-noise substream, flipped when below `delta`.
pub fn label_noise_mask(n: usize, delta: f64, seed: u64) -> Result<Vec<bool>> {
    check_delta(delta)?;
    Ok(mask_from(
        &mut substream(seed, &[purpose::LABEL_NOISE]),
        n,
        delta,
    ))
}

/// Flip each label independently with probability `delta`. Features and the
/// latent score are untouched.
pub fn inject_label_noise(data: &Dataset, delta: f64, seed: u64) -> Result<Dataset> {
    check_delta(delta)?;
    flip_with(data, delta, &mut substream(seed, &[purpose::LABEL_NOISE]))
}

fn check_delta(delta: f64) -> Result<()> {
    ensure!(
        (0.0..0.5).contains(&delta),
        Precondition,
        "label noise rate {delta} must lie in [0, 0.5)"
    );
    Ok(())
}

fn mask_from(rng: &mut StreamRng, n: usize, delta: f64) -> Vec<bool> {
    (0..n).map(|_| rng.random::<f64>() < delta).collect()
}

pub(crate) fn flip_with(data: &Dataset, delta: f64, rng: &mut StreamRng) -> Result<Dataset> {
    if delta == 0.0 {
        return Ok(data.clone());
    }
    let mask = mask_from(rng, data.n(), delta);
    let labels = data
        .labels()
        .iter()
        .zip(mask)
        .map(|(&y, flip)| if flip { 1 - y } else { y })
        .collect();
    data.relabel(labels)
}

/// Relabel as `latent_score >= threshold`.
pub fn apply_class_redefinition(data: &Dataset, threshold: f64) -> Result<Dataset> {
    let Some(latent) = data.latent_score() else {
        return Err(crate::Error::Precondition(
            "class redefinition needs a latent score".into(),
        ));
    };
    ensure!(!threshold.is_nan(), Precondition, "threshold is NaN");
    let labels = latent.iter().map(|&s| u8::from(s >= threshold)).collect();
    data.relabel(labels)
}

/// Keep the rows whose score `w'x` is at least `cutoff`. Returns the accepted
/// rows and the fraction accepted.
pub fn apply_selection_filter(
    data: &Dataset,
    score_weights: &[f64],
    cutoff: f64,
) -> Result<(Dataset, f64)> {
    ensure!(
        score_weights.len() == data.p(),
        Precondition,
        "{} score weights for {} features",
        score_weights.len(),
        data.p()
    );
    let x = data.features();
    let keep: Vec<usize> = (0..data.n())
        .filter(|&i| {
            x.row(i)
                .iter()
                .zip(score_weights)
                .map(|(a, w)| a * w)
                .sum::<f64>()
                >= cutoff
        })
        .collect();
    let rate = keep.len() as f64 / data.n() as f64;
    if keep.is_empty() {
        return Err(crate::Error::Degenerate(format!(
            "no rows pass the selection cutoff {cutoff}"
        )));
    }
    Ok((data.subset(&keep)?, rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::{gen_gaussian_two_class, GaussianClassSpec};
    use proptest::prelude::*;

    fn sample(n: usize) -> Dataset {
        gen_gaussian_two_class(&GaussianClassSpec::separated(2, 2.0, 0.5).unwrap(), n, 21).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let d = sample(500);
        assert_eq!(inject_label_noise(&d, 0.0, 3).unwrap(), d);
    }

    #[test]
    fn flip_fraction_matches_delta() {
        let d = sample(100_000);
        let noisy = inject_label_noise(&d, 0.1, 4).unwrap();
        let flipped = d
            .labels()
            .iter()
            .zip(noisy.labels())
            .filter(|(a, b)| a != b)
            .count();
        assert!((flipped as f64 / 1e5 - 0.1).abs() < 0.005);
        assert_eq!(noisy.features(), d.features());
    }

    #[test]
    fn flips_follow_the_seeded_mask() {
        let d = sample(2000);
        let noisy = inject_label_noise(&d, 0.3, 8).unwrap();
        let mask = label_noise_mask(2000, 0.3, 8).unwrap();
        for ((a, b), &m) in noisy.labels().iter().zip(d.labels()).zip(&mask) {
            assert_eq!(a != b, m);
        }
    }

    #[test]
    fn noise_rate_is_checked() {
        let d = sample(10);
        assert!(inject_label_noise(&d, 0.5, 1).is_err());
        assert!(inject_label_noise(&d, -0.1, 1).is_err());
    }

    #[test]
    fn redefinition_cases() {
        let d = sample(1000);
        let min = d
            .latent_score()
            .unwrap()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(apply_class_redefinition(&d, min - 1.0)
            .unwrap()
            .labels()
            .iter()
            .all(|&y| y == 1));
        let relabelled = apply_class_redefinition(&d, 0.7).unwrap();
        assert_eq!(
            apply_class_redefinition(&relabelled, 0.7).unwrap(),
            relabelled
        );
        assert_eq!(relabelled.latent_score(), d.latent_score());
        let bare = Dataset::new(d.features().clone(), d.labels().to_vec()).unwrap();
        assert!(matches!(
            apply_class_redefinition(&bare, 0.0),
            Err(crate::Error::Precondition(_))
        ));
    }

    proptest! {
        #[test]
        fn raising_the_threshold_shrinks_class_one(a in -4.0f64..4.0, b in -4.0f64..4.0) {
            let d = sample(300);
            let (lo, hi) = (a.min(b), a.max(b));
            let l = apply_class_redefinition(&d, lo).unwrap();
            let h = apply_class_redefinition(&d, hi).unwrap();
            for (x, y) in l.labels().iter().zip(h.labels()) {
                prop_assert!(y <= x);
            }
        }
    }

    #[test]
    fn selection_cases() {
        let g = GaussianClassSpec::separated(2, 2.0, 0.5).unwrap();
        let d = gen_gaussian_two_class(&g, 10_001, 30).unwrap();
        let w = g.direction().to_vec();
        let (all, rate) = apply_selection_filter(&d, &w, f64::NEG_INFINITY).unwrap();
        assert_eq!((all, rate), (d.clone(), 1.0));

        let mut scores: Vec<f64> = (0..d.n())
            .map(|i| d.features().row(i).iter().zip(&w).map(|(a, b)| a * b).sum())
            .collect();
        scores.sort_by(f64::total_cmp);
        let median = scores[d.n() / 2];
        let (accepted, rate) = apply_selection_filter(&d, &w, median).unwrap();
        assert!((rate - 0.5).abs() <= 1.0 / d.n() as f64);
        assert!(accepted.class1_fraction() > d.class1_fraction());

        assert!(matches!(
            apply_selection_filter(&d, &w, f64::INFINITY),
            Err(crate::Error::Degenerate(_))
        ));
        assert!(apply_selection_filter(&d, &[1.0], 0.0).is_err());
    }
}
