//! Figure-ground contrast inside detected text regions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{relative_luminance, SlideImage};
use crate::layout::{text_regions, BoundingBox, LayoutDocument, DEFAULT_MIN_CONFIDENCE};
use crate::stats::{mean, percentile_sorted};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ContrastMode {
    /// True luminance extremes inside the region.
    Endpoint,
    /// Upper and lower luminance percentiles, robust to anti-aliased edges.
    Percentile { upper: f64, lower: f64 },
}

impl Default for ContrastMode {
    fn default() -> Self {
        ContrastMode::Endpoint
    }
}

impl ContrastMode {
    pub fn robust() -> Self {
        ContrastMode::Percentile {
            upper: 95.0,
            lower: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsabilityConfig {
    pub contrast: ContrastMode,
    pub min_confidence: f64,
    /// Multiplier applied to the mean slide usability at deck level.
    pub deck_scale: f64,
}

impl Default for UsabilityConfig {
    fn default() -> Self {
        Self {
            contrast: ContrastMode::Endpoint,
            min_confidence: DEFAULT_MIN_CONFIDENCE,
            deck_scale: 10.0,
        }
    }
}

impl UsabilityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(Error::InvalidInput("usability.min_confidence must lie in [0, 1]".into()));
        }
        if let ContrastMode::Percentile { upper, lower } = self.contrast {
            if !(0.0..=100.0).contains(&lower) || !(0.0..=100.0).contains(&upper) || lower > upper {
                return Err(Error::InvalidInput(
                    "usability percentiles must satisfy 0 <= lower <= upper <= 100".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastResult {
    pub region: BoundingBox,
    pub l_max: f64,
    pub l_min: f64,
    /// `(l_max + 0.05) / (l_min + 0.05)`, in `[1, 21]`.
    pub ratio: f64,
    pub score: f64,
}

/// Per-slide usability: a score, or no text regions to judge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlideUsability {
    Score(f64),
    Unavailable,
}

impl SlideUsability {
    pub fn score(self) -> Option<f64> {
        match self {
            SlideUsability::Score(s) => Some(s),
            SlideUsability::Unavailable => None,
        }
    }
}

/// Integer pixel span `[lo, hi)` covered by `[a, b)` after clipping to `[0, n)`.
fn pixel_span(a: f64, b: f64, n: usize) -> (usize, usize) {
    let lo = a.floor().max(0.0) as usize;
    let hi = (b.ceil().max(0.0) as usize).min(n);
    (lo.min(n), hi)
}

pub fn contrast_ratio(l_max: f64, l_min: f64) -> f64 {
    (l_max + 0.05) / (l_min + 0.05)
}

pub fn region_contrast(img: &SlideImage, region: &BoundingBox, mode: ContrastMode) -> Result<ContrastResult> {
    let (x0, x1) = pixel_span(region.x_min, region.x_max, img.width());
    let (y0, y1) = pixel_span(region.y_min, region.y_max, img.height());
    if x0 >= x1 || y0 >= y1 {
        return Err(Error::InvalidInput(format!(
            "region [{}, {}, {}, {}] lies outside the {}x{} image",
            region.x_min,
            region.y_min,
            region.x_max,
            region.y_max,
            img.width(),
            img.height()
        )));
    }
    let mut lum: Vec<f64> = (y0..y1)
        .flat_map(|y| (x0..x1).map(move |x| (x, y)))
        .map(|(x, y)| relative_luminance(img.pixel(x, y)))
        .collect();
    lum.sort_by(f64::total_cmp);
    let (l_max, l_min) = match mode {
        ContrastMode::Endpoint => (lum[lum.len() - 1], lum[0]),
        ContrastMode::Percentile { upper, lower } => {
            (percentile_sorted(&lum, upper), percentile_sorted(&lum, lower))
        }
    };
    let ratio = contrast_ratio(l_max, l_min).clamp(1.0, 21.0);
    Ok(ContrastResult {
        region: *region,
        l_max,
        l_min,
        ratio,
        score: contrast_score(ratio)?,
    })
}

/// `ln(c) / ln(21)`, clamped to `[0, 1]`.
pub fn contrast_score(ratio: f64) -> Result<f64> {
    if !(ratio >= 1.0) {
        return Err(Error::Domain(format!("contrast ratio {ratio} below 1")));
    }
    if ratio >= 21.0 {
        return Ok(1.0);
    }
    Ok((ratio.ln() / 21f64.ln()).clamp(0.0, 1.0))
}

/// Mean contrast score over the slide's text regions.
pub fn slide_usability(
    img: &SlideImage,
    layout: &LayoutDocument,
    config: &UsabilityConfig,
) -> Result<(SlideUsability, Vec<ContrastResult>)> {
    let regions = text_regions(layout, config.min_confidence);
    let results = regions
        .iter()
        .map(|r| region_contrast(img, r, config.contrast))
        .collect::<Result<Vec<_>>>()?;
    if results.is_empty() {
        return Ok((SlideUsability::Unavailable, results));
    }
    let scores: Vec<f64> = results.iter().map(|r| r.score).collect();
    Ok((SlideUsability::Score(mean(&scores)), results))
}

/// `scale * mean` over slides with a score; `None` if no slide has one.
pub fn deck_usability(slides: &[SlideUsability], scale: f64) -> Option<f64> {
    let available: Vec<f64> = slides.iter().filter_map(|s| s.score()).collect();
    (!available.is_empty()).then(|| scale * mean(&available))
}
