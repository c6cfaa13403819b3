//! Colourfulness over opponent channels and deck-level vibrancy pacing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::SlideImage;
use crate::stats::{mean, population_std};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngagementConfig {
    /// Target spread of per-slide colourfulness.
    pub pacing_target: f64,
    /// Gaussian width around the target.
    pub pacing_width: f64,
    /// Weight of the scaled mean colourfulness in the component.
    pub mean_weight: f64,
    /// Weight of the scaled pacing score in the component.
    pub pacing_weight: f64,
    /// Multiplier applied to mean colourfulness before blending.
    pub mean_scale: f64,
    /// Multiplier applied to the pacing score before blending.
    pub pacing_scale: f64,
}

impl Default for EngagementConfig {
    fn default() -> Self {
        Self {
            pacing_target: 11.28,
            pacing_width: 8.54,
            mean_weight: 0.5,
            pacing_weight: 0.5,
            mean_scale: 0.1,
            pacing_scale: 10.0,
        }
    }
}

impl EngagementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pacing_width > 0.0) {
            return Err(Error::InvalidInput("engagement.pacing_width must be > 0".into()));
        }
        if self.mean_weight < 0.0 || self.pacing_weight < 0.0 {
            return Err(Error::InvalidInput("engagement blend weights must be >= 0".into()));
        }
        if ((self.mean_weight + self.pacing_weight) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("engagement blend weights must sum to 1".into()));
        }
        Ok(())
    }
}

/// Hasler–Süsstrunk colourfulness on raw 8-bit channels with population
/// statistics: `sqrt(var_rg + var_yb) + 0.3 * sqrt(mean_rg^2 + mean_yb^2)`.
pub fn colorfulness(img: &SlideImage) -> f64 {
    let n = img.pixels().len() as f64;
    let (mut sum_rg, mut sum_yb) = (0.0, 0.0);
    for &[r, g, b] in img.pixels() {
        let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
        sum_rg += r - g;
        sum_yb += 0.5 * (r + g) - b;
    }
    let (mu_rg, mu_yb) = (sum_rg / n, sum_yb / n);
    // Second pass keeps the variance free of cancellation on large images.
    let (mut var_rg, mut var_yb) = (0.0, 0.0);
    for &[r, g, b] in img.pixels() {
        let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
        var_rg += (r - g - mu_rg).powi(2);
        var_yb += (0.5 * (r + g) - b - mu_yb).powi(2);
    }
    let (var_rg, var_yb) = (var_rg / n, var_yb / n);
    (var_rg + var_yb).sqrt() + 0.3 * (mu_rg * mu_rg + mu_yb * mu_yb).sqrt()
}

/// Gaussian score of the deck's colourfulness spread around `target`.
pub fn pacing_score(per_slide: &[f64], target: f64, width: f64) -> Result<f64> {
    if per_slide.is_empty() {
        return Err(Error::Empty("pacing needs at least one slide".into()));
    }
    if !(width > 0.0) {
        return Err(Error::Domain(format!("pacing width {width} must be > 0")));
    }
    let spread = population_std(per_slide);
    Ok((-(spread - target).powi(2) / (2.0 * width * width)).exp())
}

/// Blends scaled mean colourfulness with the scaled pacing score.
pub fn engagement_component(per_slide: &[f64], config: &EngagementConfig) -> Result<f64> {
    let pacing = pacing_score(per_slide, config.pacing_target, config.pacing_width)?;
    Ok(config.mean_weight * config.mean_scale * mean(per_slide)
        + config.pacing_weight * config.pacing_scale * pacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct evaluation of the formula with textbook two-pass statistics.
    fn oracle(px: &[[u8; 3]]) -> f64 {
        let rg: Vec<f64> = px.iter().map(|p| p[0] as f64 - p[1] as f64).collect();
        let yb: Vec<f64> = px
            .iter()
            .map(|p| (p[0] as f64 + p[1] as f64) / 2.0 - p[2] as f64)
            .collect();
        let n = px.len() as f64;
        let m = |v: &[f64]| v.iter().sum::<f64>() / n;
        let var = |v: &[f64]| {
            let mu = m(v);
            v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n
        };
        (var(&rg) + var(&yb)).sqrt() + 0.3 * (m(&rg).powi(2) + m(&yb).powi(2)).sqrt()
    }

    #[test]
    fn gray_is_colourless() {
        let img = SlideImage::solid(5, 5, [77, 77, 77]).unwrap();
        assert_eq!(colorfulness(&img), 0.0);
    }

    #[test]
    fn solid_red_closed_form() {
        let img = SlideImage::solid(4, 4, [255, 0, 0]).unwrap();
        let expected = 0.3 * (255.0f64.powi(2) + 127.5f64.powi(2)).sqrt();
        assert!((colorfulness(&img) - expected).abs() < 1e-9);
        // 85.5296..., which rounds to 85.53
        assert!((colorfulness(&img) - 85.53).abs() < 0.005);
    }

    #[test]
    fn red_green_checkerboard() {
        let px = (0..16)
            .map(|i| if (i % 4 + i / 4) % 2 == 0 { [255, 0, 0] } else { [0, 255, 0] })
            .collect();
        let img = SlideImage::new(4, 4, px).unwrap();
        assert!((colorfulness(&img) - 293.25).abs() < 1e-9);
    }

    #[test]
    fn pacing_examples() {
        assert_eq!(pacing_score(&[5.0, 5.0, 5.0], 0.0, 3.0).unwrap(), 1.0);
        // Spread of {0, 10} is 5: one width above a target of 2 with width 3.
        let s = pacing_score(&[0.0, 10.0], 2.0, 3.0).unwrap();
        assert!((s - (-0.5f64).exp()).abs() < 1e-12);
        let single = pacing_score(&[40.0], 11.28, 8.54).unwrap();
        assert!((single - (-(11.28f64 * 11.28) / (2.0 * 8.54 * 8.54)).exp()).abs() < 1e-15);
        assert!(pacing_score(&[], 0.0, 1.0).is_err());
    }

    #[test]
    fn component_examples() {
        let config = EngagementConfig::default();
        let gray = engagement_component(&[0.0, 0.0], &config).unwrap();
        let expected = 0.5 * 10.0 * pacing_score(&[0.0, 0.0], 11.28, 8.54).unwrap();
        assert!((gray - expected).abs() < 1e-12);

        let mean_only = EngagementConfig { mean_weight: 1.0, pacing_weight: 0.0, ..config.clone() };
        assert!((engagement_component(&[51.09], &mean_only).unwrap() - 5.109).abs() < 1e-12);

        let pacing_only = EngagementConfig {
            mean_weight: 0.0,
            pacing_weight: 1.0,
            pacing_target: 0.0,
            ..config
        };
        assert_eq!(engagement_component(&[7.0, 7.0], &pacing_only).unwrap(), 10.0);
    }

    proptest! {
        #[test]
        fn matches_oracle_on_small_images(px in prop::collection::vec(any::<[u8; 3]>(), 1..=16)) {
            let n = px.len();
            let img = SlideImage::new(n, 1, px.clone()).unwrap();
            prop_assert!((colorfulness(&img) - oracle(&px)).abs() < 1e-9);
        }

        #[test]
        fn invariant_under_flip_and_rg_swap(px in prop::collection::vec(any::<[u8; 3]>(), 12)) {
            let img = SlideImage::new(4, 3, px.clone()).unwrap();
            let base = colorfulness(&img);
            let flipped: Vec<_> = (0..3).flat_map(|y| (0..4).rev().map(move |x| (x, y)))
                .map(|(x, y)| px[y * 4 + x]).collect();
            let flipped = SlideImage::new(4, 3, flipped).unwrap();
            prop_assert!((colorfulness(&flipped) - base).abs() < 1e-9);
            let swapped = img.map_pixels(|[r, g, b]| [g, r, b]);
            prop_assert!((colorfulness(&swapped) - base).abs() < 1e-9);
        }

        #[test]
        fn pacing_peaks_at_target(values in prop::collection::vec(0.0f64..100.0, 1..10),
                                  target in 0.0f64..50.0, width in 5.0f64..20.0) {
            let s = pacing_score(&values, target, width).unwrap();
            prop_assert!(s > 0.0 && s <= 1.0);
            let at_target = pacing_score(&values, population_std(&values), width).unwrap();
            prop_assert_eq!(at_target, 1.0);
        }
    }
}
