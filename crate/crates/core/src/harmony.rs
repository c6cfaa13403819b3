//! Hue-template colour harmony.
//!
//! A slide's saturation-weighted hue histogram is fitted against seven
//! harmonic templates at every rotation of the configured angular resolution.
//! Distances are measured in fractions of the hue wheel, the same unit as the
//! template sector table. Deck harmony rewards the mean slide score and
//! penalises its spread: `w1 * mean - w2 * std`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{rgb_to_hsv, Rgb, SlideImage};
use crate::stats::{mean, population_std};

pub const HISTOGRAM_BINS: usize = 360;

/// A 360-bin saturation-weighted hue histogram; bin `b` covers hues `[b, b+1)`.
pub type HueHistogram = [f64; HISTOGRAM_BINS];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateName {
    #[serde(rename = "i")]
    LowerI,
    V,
    L,
    #[serde(rename = "I")]
    UpperI,
    T,
    Y,
    X,
}

impl TemplateName {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateName::LowerI => "i",
            TemplateName::V => "V",
            TemplateName::L => "L",
            TemplateName::UpperI => "I",
            TemplateName::T => "T",
            TemplateName::Y => "Y",
            TemplateName::X => "X",
        }
    }
}

impl std::fmt::Display for TemplateName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sector on the hue wheel, both fields as fractions of a full turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HueTemplate {
    pub name: TemplateName,
    pub sectors: &'static [Sector],
}

const fn sector(center: f64, width: f64) -> Sector {
    Sector { center, width }
}

/// The canonical templates in tie-break order.
pub const TEMPLATES: [HueTemplate; 7] = [
    HueTemplate {
        name: TemplateName::LowerI,
        sectors: &[sector(0.0, 0.05)],
    },
    HueTemplate {
        name: TemplateName::V,
        sectors: &[sector(0.0, 0.26)],
    },
    HueTemplate {
        name: TemplateName::L,
        sectors: &[sector(0.0, 0.05), sector(0.25, 0.22)],
    },
    HueTemplate {
        name: TemplateName::UpperI,
        sectors: &[sector(0.0, 0.05), sector(0.50, 0.05)],
    },
    HueTemplate {
        name: TemplateName::T,
        sectors: &[sector(0.25, 0.50)],
    },
    HueTemplate {
        name: TemplateName::Y,
        sectors: &[sector(0.0, 0.26), sector(0.50, 0.05)],
    },
    HueTemplate {
        name: TemplateName::X,
        sectors: &[sector(0.0, 0.26), sector(0.50, 0.26)],
    },
];

pub fn template(name: TemplateName) -> &'static HueTemplate {
    TEMPLATES.iter().find(|t| t.name == name).expect("all names are tabled")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmonyConfig {
    /// Gaussian strictness, in fractions of the wheel.
    pub sigma: f64,
    /// Rotations tried per full turn.
    pub angular_resolution: usize,
    /// Pixels with saturation below this are ignored.
    pub sat_threshold: f64,
    pub deck_mean_weight: f64,
    pub deck_std_weight: f64,
}

impl Default for HarmonyConfig {
    fn default() -> Self {
        Self {
            sigma: 0.01,
            angular_resolution: 360,
            sat_threshold: 0.1,
            deck_mean_weight: 5.0,
            deck_std_weight: 30.0,
        }
    }
}

impl HarmonyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidInput("harmony.sigma must be > 0".into()));
        }
        if self.angular_resolution == 0 {
            return Err(Error::InvalidInput(
                "harmony.angular_resolution must be >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.sat_threshold) {
            return Err(Error::InvalidInput(
                "harmony.sat_threshold must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonyFit {
    pub template: TemplateName,
    /// Rotation as a fraction of the wheel, in `[0, 1)`.
    pub alpha: f64,
    /// Minimum saturation-weighted mean distance, in `[0, 0.5]`.
    pub mean_distance: f64,
    pub slide_score: f64,
    /// No pixel reached the saturation threshold.
    pub achromatic: bool,
}

/// Hue bin of a chromatic pixel, in exact integer arithmetic. Flooring the
/// float hue can put a pixel whose hue is a whole degree on either side of a
/// bin edge, depending on which channel is largest.
pub fn hue_bin(p: Rgb, bins: usize) -> usize {
    let [r, g, b] = p.map(i64::from);
    let max = r.max(g).max(b);
    let d = max - r.min(g).min(b);
    if d == 0 {
        return 0;
    }
    let (offset, n) = if max == r {
        (0, g - b)
    } else if max == g {
        (120, b - r)
    } else {
        (240, r - g)
    };
    // floor((offset + 60 n / d) * bins / 360)
    let bins = bins as i64;
    ((offset * d + 60 * n) * bins)
        .div_euclid(360 * d)
        .rem_euclid(bins) as usize
}

pub fn saturation_weighted_hue_histogram(img: &SlideImage, sat_threshold: f64) -> HueHistogram {
    let mut hist = [0.0; HISTOGRAM_BINS];
    for &p in img.pixels() {
        let hsv = rgb_to_hsv(p);
        if hsv.saturation >= sat_threshold && hsv.saturation > 0.0 {
            hist[hue_bin(p, HISTOGRAM_BINS)] += hsv.saturation;
        }
    }
    hist
}

/// Shortest wrap-around distance between two wheel positions, in `[0, 0.5]`.
#[inline]
fn wheel_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Distance from `hue` (fraction of the wheel) to the nearest border of the
/// rotated template, zero inside any sector.
pub fn hue_distance(hue: f64, template: &HueTemplate, alpha: f64) -> f64 {
    template
        .sectors
        .iter()
        .map(|s| (wheel_gap(hue, s.center + alpha) - s.width / 2.0).max(0.0))
        .fold(f64::INFINITY, f64::min)
}

/// Weighted mean distance of a histogram to `template` rotated by `alpha`.
/// Returns `None` for an all-zero histogram.
pub fn template_distance(hist: &[f64], template: &HueTemplate, alpha: f64) -> Option<f64> {
    let bins = hist.len() as f64;
    let mut total = 0.0;
    let mut weighted = 0.0;
    for (b, &w) in hist.iter().enumerate() {
        if w > 0.0 {
            total += w;
            weighted += w * hue_distance(b as f64 / bins, template, alpha);
        }
    }
    (total > 0.0).then(|| weighted / total)
}

/// Exhaustive search over templates and rotations on a histogram.
///
/// Ties keep the earlier template in table order, then the smaller rotation.
pub fn best_fit_histogram(hist: &[f64], config: &HarmonyConfig) -> HarmonyFit {
    let resolution = config.angular_resolution.max(1);
    // Only occupied bins matter; collecting them keeps the inner loop short.
    let bins = hist.len() as f64;
    let occupied: Vec<(f64, f64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(b, &w)| (b as f64 / bins, w))
        .collect();
    let total: f64 = occupied.iter().map(|(_, w)| w).sum();
    if occupied.is_empty() || total <= 0.0 {
        return HarmonyFit {
            template: TemplateName::LowerI,
            alpha: 0.0,
            mean_distance: 0.0,
            slide_score: 1.0,
            achromatic: true,
        };
    }

    let mut best = (f64::INFINITY, TemplateName::LowerI, 0.0);
    for t in &TEMPLATES {
        for step in 0..resolution {
            let alpha = step as f64 / resolution as f64;
            let weighted: f64 = occupied
                .iter()
                .map(|&(h, w)| w * hue_distance(h, t, alpha))
                .sum();
            let d = weighted / total;
            if d < best.0 {
                best = (d, t.name, alpha);
            }
        }
    }
    let mean_distance = best.0.clamp(0.0, 0.5);
    HarmonyFit {
        template: best.1,
        alpha: best.2,
        mean_distance,
        slide_score: slide_harmony_score(mean_distance, config.sigma),
        achromatic: false,
    }
}

pub fn best_fit(img: &SlideImage, config: &HarmonyConfig) -> HarmonyFit {
    let hist = saturation_weighted_hue_histogram(img, config.sat_threshold);
    best_fit_histogram(&hist, config)
}

/// `exp(-D^2 / (2 sigma^2))`; underflow lands on exactly 0.
pub fn slide_harmony_score(mean_distance: f64, sigma: f64) -> f64 {
    (-(mean_distance * mean_distance) / (2.0 * sigma * sigma)).exp()
}

pub fn deck_harmony_score(slide_scores: &[f64], w1: f64, w2: f64) -> Result<f64> {
    if slide_scores.is_empty() {
        return Err(Error::Empty("deck harmony needs at least one slide".into()));
    }
    Ok(w1 * mean(slide_scores) - w2 * population_std(slide_scores))
}
