//! Visual rhythm: per-slide clutter from subband entropy and its variability
//! across the deck.

pub mod entropy;
pub mod hrv;
pub mod pyramid;

pub use entropy::{
    entropy_to_score, subband_entropy, subband_shannon_entropy, EntropyConfig, SubbandEntropy,
};
pub use hrv::{
    overload_events, rmssd, visual_hrv_score, HrvConfig, HrvMode, HrvScore, RhythmBand, Rmssd,
};
pub use pyramid::{steerable_pyramid, Plane, PyramidConfig, SteerablePyramid, Subband};
