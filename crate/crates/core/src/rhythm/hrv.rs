//! Temporal variability of per-slide complexity scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HrvMode {
    /// `100 (1 - |RMSSD - target| / half_width) - penalty * overloads`.
    Banded,
    /// `lambda_mean * mean(S) + lambda_rmssd * RMSSD`.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HrvConfig {
    pub mode: HrvMode,
    pub lambda_mean: f64,
    pub lambda_rmssd: f64,
    pub target: f64,
    pub half_width: f64,
    pub overload_window: usize,
    pub overload_threshold: f64,
    pub penalty: f64,
}

impl Default for HrvConfig {
    fn default() -> Self {
        Self {
            mode: HrvMode::Banded,
            lambda_mean: 0.5,
            lambda_rmssd: 0.5,
            target: 0.03,
            half_width: 0.2,
            overload_window: 3,
            overload_threshold: 0.75,
            penalty: 10.0,
        }
    }
}

impl HrvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0) {
            return Err(Error::InvalidInput("hrv.half_width must be > 0".into()));
        }
        if self.overload_window == 0 {
            return Err(Error::InvalidInput("hrv.overload_window must be >= 1".into()));
        }
        if self.penalty < 0.0 {
            return Err(Error::InvalidInput("hrv.penalty must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhythmBand {
    Flatline,
    Healthy,
    Transitional,
    StrobeLight,
}

impl RhythmBand {
    pub fn classify(rmssd: f64) -> Self {
        if rmssd < 0.01 {
            RhythmBand::Flatline
        } else if rmssd <= 0.1 {
            RhythmBand::Healthy
        } else if rmssd > 0.30 {
            RhythmBand::StrobeLight
        } else {
            RhythmBand::Transitional
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rmssd {
    pub value: f64,
    /// Single-slide deck: no successive differences exist.
    pub degenerate: bool,
}

pub fn rmssd(scores: &[f64]) -> Result<Rmssd> {
    match scores.len() {
        0 => Err(Error::Empty("RMSSD needs at least one score".into())),
        1 => Ok(Rmssd {
            value: 0.0,
            degenerate: true,
        }),
        n => {
            let sum_sq: f64 = scores.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            Ok(Rmssd {
                value: (sum_sq / (n - 1) as f64).sqrt(),
                degenerate: false,
            })
        }
    }
}

/// Number of length-`window` runs whose mean exceeds `threshold`.
pub fn overload_events(scores: &[f64], window: usize, threshold: f64) -> usize {
    if window == 0 || scores.len() < window {
        return 0;
    }
    scores
        .windows(window)
        .filter(|w| w.iter().sum::<f64>() / window as f64 > threshold)
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrvScore {
    pub mode: HrvMode,
    pub score: f64,
    pub rmssd: Rmssd,
    pub overloads: usize,
    pub band: RhythmBand,
}

pub fn visual_hrv_score(scores: &[f64], config: &HrvConfig) -> Result<HrvScore> {
    let r = rmssd(scores)?;
    let overloads = overload_events(scores, config.overload_window, config.overload_threshold);
    let score = match config.mode {
        HrvMode::Banded => {
            100.0 * (1.0 - (r.value - config.target).abs() / config.half_width)
                - config.penalty * overloads as f64
        }
        HrvMode::Linear => config.lambda_mean * mean(scores) + config.lambda_rmssd * r.value,
    };
    Ok(HrvScore {
        mode: config.mode,
        score,
        rmssd: r,
        overloads,
        band: RhythmBand::classify(r.value),
    })
}
