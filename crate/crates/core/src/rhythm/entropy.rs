//! Subband entropy of normalised Lab channels, a visual clutter proxy.

use serde::{Deserialize, Serialize};

use super::pyramid::{steerable_pyramid, Plane, PyramidConfig};
use crate::error::{Error, Result};
use crate::imaging::{rgb_to_lab_normalized, SlideImage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub luminance_weight: f64,
    pub chroma_weight: f64,
    /// Channels whose variance falls below this are left out.
    pub zero_threshold: f64,
    /// Centre of the complexity-to-score Gaussian, in bits.
    pub optimal_mean: f64,
    pub optimal_std: f64,
    /// Also feed the low-pass residual into the channel mean.
    pub include_lowpass: bool,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            luminance_weight: 0.84,
            chroma_weight: 0.08,
            zero_threshold: 0.008,
            optimal_mean: 3.878,
            optimal_std: 0.730,
            include_lowpass: false,
        }
    }
}

impl EntropyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.luminance_weight < 0.0 || self.chroma_weight < 0.0 {
            return Err(Error::InvalidInput("entropy weights must be >= 0".into()));
        }
        if !(self.optimal_std > 0.0) {
            return Err(Error::InvalidInput("entropy.optimal_std must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEntropy {
    pub variance: f64,
    /// Mean subband entropy in bits; `None` when the channel was dropped.
    pub mean_entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubbandEntropy {
    /// Weighted entropy in bits.
    pub value: f64,
    /// Every channel fell below the variance threshold.
    pub blank: bool,
    /// `L'`, `a'`, `b'` in that order.
    pub channels: [ChannelEntropy; 3],
}

/// Shannon entropy (bits) of a histogram with `ceil(sqrt(n))` equal-width
/// bins spanning the subband's own range. Zero-range input has entropy 0.
pub fn subband_shannon_entropy(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = hi - lo;
    if !(range > 1e-12) {
        return 0.0;
    }
    let bins = (values.len() as f64).sqrt().ceil() as usize;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / range) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let n = values.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Splits an image into normalised `L'`, `a'`, `b'` planes.
pub fn lab_planes(img: &SlideImage) -> [Plane; 3] {
    let (w, h) = (img.width(), img.height());
    let mut data = [
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
    ];
    for &p in img.pixels() {
        let lab = rgb_to_lab_normalized(p);
        for c in 0..3 {
            data[c].push(lab[c]);
        }
    }
    data.map(|d| Plane {
        width: w,
        height: h,
        data: d,
    })
}

fn channel_mean_entropy(plane: &Plane, pyramid: &PyramidConfig, include_lowpass: bool) -> Result<f64> {
    let pyr = steerable_pyramid(plane, pyramid)?;
    let mut entropies: Vec<f64> = pyr
        .bands
        .iter()
        .map(|b| subband_shannon_entropy(&b.plane.data))
        .collect();
    if include_lowpass {
        entropies.push(subband_shannon_entropy(&pyr.lowpass.data));
    }
    Ok(entropies.iter().sum::<f64>() / entropies.len() as f64)
}

pub fn subband_entropy(
    img: &SlideImage,
    pyramid: &PyramidConfig,
    config: &EntropyConfig,
) -> Result<SubbandEntropy> {
    let planes = lab_planes(img);
    let weights = [config.luminance_weight, config.chroma_weight, config.chroma_weight];
    let mut channels = Vec::with_capacity(3);
    let (mut weighted, mut weight_sum) = (0.0, 0.0);
    for (plane, &w) in planes.iter().zip(&weights) {
        let variance = plane.variance();
        let mean_entropy = if variance < config.zero_threshold {
            None
        } else {
            Some(channel_mean_entropy(plane, pyramid, config.include_lowpass)?)
        };
        if let Some(h) = mean_entropy {
            weighted += w * h;
            weight_sum += w;
        }
        channels.push(ChannelEntropy {
            variance,
            mean_entropy,
        });
    }
    let blank = channels.iter().all(|c| c.mean_entropy.is_none());
    let value = if weight_sum > 0.0 {
        weighted / weight_sum
    } else {
        0.0
    };
    Ok(SubbandEntropy {
        value,
        blank,
        channels: channels.try_into().expect("three channels"),
    })
}

/// Gaussian map from entropy to a complexity score in `(0, 1]`.
pub fn entropy_to_score(entropy: f64, config: &EntropyConfig) -> f64 {
    let z = entropy - config.optimal_mean;
    (-(z * z) / (2.0 * config.optimal_std * config.optimal_std)).exp()
}
