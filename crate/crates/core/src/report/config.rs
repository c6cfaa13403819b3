//! Run configuration, read from TOML. Every section is optional and falls
//! back to the defaults below; unknown keys are rejected.
//!
//! ```toml
//! [profile]
//! name = "default"
//! version = "1"
//! rhythm_scale = 0.1
//!
//! [harmony]
//! sigma = 0.01
//! angular_resolution = 360
//! sat_threshold = 0.1
//! deck_mean_weight = 5.0
//! deck_std_weight = 30.0
//!
//! [engagement]
//! pacing_target = 11.28
//! pacing_width = 8.54
//! mean_weight = 0.5
//! pacing_weight = 0.5
//! mean_scale = 0.1
//! pacing_scale = 10.0
//!
//! [usability]
//! min_confidence = 0.5
//! deck_scale = 10.0
//! contrast = { mode = "endpoint" }   # or { mode = "percentile", upper = 95.0, lower = 5.0 }
//!
//! [pyramid]
//! levels = 3
//! orientations = 4
//!
//! [entropy]
//! luminance_weight = 0.84
//! chroma_weight = 0.08
//! zero_threshold = 0.008
//! optimal_mean = 3.878
//! optimal_std = 0.730
//! include_lowpass = false
//!
//! [hrv]
//! mode = "banded"                   # or "linear"
//! target = 0.03
//! half_width = 0.2
//! overload_window = 3
//! overload_threshold = 0.75
//! penalty = 10.0
//! lambda_mean = 0.5
//! lambda_rmssd = 0.5
//!
//! [pei]
//! full_bleed_coverage = 0.95
//! rasterized_slide_fraction = 0.5
//! fragment_min_boxes = 4
//! fragment_align_tolerance = 0.01
//! fragment_gap_factor = 1.5
//! duplicate_position_tolerance = 0.005
//! duplicate_slide_fraction = 0.8
//! group_shape_threshold = 15
//!
//! [client]
//! endpoint = "http://127.0.0.1:8000/v1/chat/completions"
//! model = "default"
//! api_key_env = "DECKEVAL_API_KEY"
//! timeout_secs = 120.0
//! max_retries = 3
//! retry_backoff_ms = 500
//! parallel_requests = 4
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engagement::EngagementConfig;
use crate::error::{Error, Result};
use crate::harmony::HarmonyConfig;
use crate::pei::PeiConfig;
use crate::quiz::ClientConfig;
use crate::rhythm::{EntropyConfig, HrvConfig, PyramidConfig};
use crate::usability::UsabilityConfig;

/// Scalings that map raw metric values onto report components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Profile {
    pub name: String,
    pub version: String,
    /// Multiplier from the banded rhythm score to the Rhythm component.
    pub rhythm_scale: f64,
}

impl Default for Profile {
    fn default() -> Self {
        Self {
            name: "default".into(),
            version: "1".into(),
            rhythm_scale: 0.1,
        }
    }
}

pub const PROFILES: [&str; 2] = ["default", "raw"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub profile: Profile,
    pub harmony: HarmonyConfig,
    pub engagement: EngagementConfig,
    pub usability: UsabilityConfig,
    pub pyramid: PyramidConfig,
    pub entropy: EntropyConfig,
    pub hrv: HrvConfig,
    pub pei: PeiConfig,
    pub client: ClientConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| {
            let context = match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    format!("config line {line}")
                }
                None => "config".to_string(),
            };
            Error::parse(context, e.message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse { context, message } => Error::Parse {
                context: format!("{}: {context}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Switches the reporting scalings to a built-in profile. `raw` reports
    /// unscaled metric values.
    pub fn apply_profile(&mut self, name: &str) -> Result<()> {
        match name {
            "default" => {
                let d = Config::default();
                self.profile = d.profile;
                self.usability.deck_scale = d.usability.deck_scale;
                self.engagement.mean_scale = d.engagement.mean_scale;
                self.engagement.pacing_scale = d.engagement.pacing_scale;
            }
            "raw" => {
                self.profile = Profile {
                    name: "raw".into(),
                    version: "1".into(),
                    rhythm_scale: 1.0,
                };
                self.usability.deck_scale = 1.0;
                self.engagement.mean_scale = 1.0;
                self.engagement.pacing_scale = 1.0;
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown profile {other:?}; available: {}",
                    PROFILES.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.profile.rhythm_scale.is_finite() {
            return Err(Error::InvalidInput("profile.rhythm_scale must be finite".into()));
        }
        self.harmony.validate()?;
        self.engagement.validate()?;
        self.usability.validate()?;
        self.pyramid.validate()?;
        self.entropy.validate()?;
        self.hrv.validate()?;
        self.pei.validate()?;
        Ok(())
    }
}
