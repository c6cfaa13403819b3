//! Deck evaluation: per-slide metrics, deck components and serialisation.

pub mod config;
pub mod ingest;

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Config, Profile, PROFILES};
pub use ingest::{decode_image, load_deck, DeckSequence, SlideInput};

use crate::engagement::{colorfulness, engagement_component, pacing_score};
use crate::error::{Error, Result};
use crate::harmony::{best_fit, deck_harmony_score, HarmonyFit};
use crate::layout::parse_layout_file;
use crate::pei::{evaluate_pei, PeiReport};
use crate::rhythm::{entropy_to_score, subband_entropy, visual_hrv_score, HrvScore, SubbandEntropy};
use crate::stats::{mean, population_std};
use crate::usability::{deck_usability, slide_usability, ContrastResult, SlideUsability};

pub const TOOL: &str = "deckeval";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TABLE_HEADER: &str = "Usability,Engagement,Harmony,Rhythm,Aesthetics,PEI";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideRecord {
    pub index: usize,
    pub file: String,
    pub width: usize,
    pub height: usize,
    pub harmony: HarmonyFit,
    pub colorfulness: f64,
    pub usability: SlideUsability,
    pub contrast: Vec<ContrastResult>,
    pub entropy: SubbandEntropy,
    pub entropy_score: f64,
}

/// Report components at two decimals. `usability` is absent when no slide
/// has a layout with text regions, and is then left out of the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub usability: Option<f64>,
    pub engagement: f64,
    pub harmony: f64,
    pub rhythm: f64,
    pub aesthetics: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawComponents {
    pub usability: Option<f64>,
    pub engagement: f64,
    pub harmony: f64,
    pub rhythm: f64,
    pub aesthetics: f64,
    pub mean_colorfulness: f64,
    pub colorfulness_std: f64,
    pub pacing: f64,
    pub harmony_mean: f64,
    pub harmony_std: f64,
    pub hrv: HrvScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeckInfo {
    pub topic: String,
    pub system: Option<String>,
    pub slide_count: usize,
    pub missing_layouts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeckReport {
    pub tool: String,
    pub version: String,
    pub deck: DeckInfo,
    pub profile: Profile,
    pub components: Components,
    pub raw: RawComponents,
    pub slides: Vec<SlideRecord>,
    pub pei: Option<PeiReport>,
    /// Sections that could not be computed, with the reason.
    pub flags: Vec<String>,
    pub config: Config,
}

pub fn round2(x: f64) -> f64 {
    // Adding zero folds -0.0 into 0.0.
    (x * 100.0).round() / 100.0 + 0.0
}

/// Rounds each component and totals the rounded values, so the serialized
/// total always equals the serialized parts.
pub fn assemble_components(usability: Option<f64>, engagement: f64, harmony: f64, rhythm: f64) -> Components {
    let usability = usability.map(round2);
    let (engagement, harmony, rhythm) = (round2(engagement), round2(harmony), round2(rhythm));
    Components {
        usability,
        engagement,
        harmony,
        rhythm,
        aesthetics: round2(usability.unwrap_or(0.0) + engagement + harmony + rhythm),
    }
}

fn evaluate_slide(index: usize, input: &SlideInput, cfg: &Config) -> Result<SlideRecord> {
    let img = decode_image(&input.image)?;
    let (w, h) = (img.width(), img.height());
    let (usability, contrast) = match &input.layout {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let doc = parse_layout_file(&bytes, index, Some((w, h))).map_err(|e| match e {
                Error::Parse { context, message } => Error::Parse {
                    context: format!("{}: {context}", path.display()),
                    message,
                },
                other => other,
            })?;
            slide_usability(&img, &doc, &cfg.usability)?
        }
        None => (SlideUsability::Unavailable, Vec::new()),
    };
    let entropy = subband_entropy(&img, &cfg.pyramid, &cfg.entropy)?;
    let entropy_score = entropy_to_score(entropy.value, &cfg.entropy);
    Ok(SlideRecord {
        index,
        file: input
            .image
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        width: w,
        height: h,
        harmony: best_fit(&img, &cfg.harmony),
        colorfulness: colorfulness(&img),
        usability,
        contrast,
        entropy,
        entropy_score,
    })
}

pub fn evaluate_deck(deck: &DeckSequence, cfg: &Config) -> Result<DeckReport> {
    cfg.validate()?;
    if deck.slides.is_empty() {
        return Err(Error::Empty(format!("deck {} has no slides", deck.topic)));
    }
    let slides = deck
        .slides
        .par_iter()
        .enumerate()
        .map(|(i, s)| evaluate_slide(i, s, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut flags = Vec::new();
    let per_usability: Vec<SlideUsability> = slides.iter().map(|s| s.usability).collect();
    let usability = deck_usability(&per_usability, cfg.usability.deck_scale);
    if usability.is_none() {
        flags.push("usability: no slide has layout text regions; excluded from the total".to_string());
    }

    let m: Vec<f64> = slides.iter().map(|s| s.colorfulness).collect();
    let engagement = engagement_component(&m, &cfg.engagement)?;
    let pacing = pacing_score(&m, cfg.engagement.pacing_target, cfg.engagement.pacing_width)?;

    let harmony_scores: Vec<f64> = slides.iter().map(|s| s.harmony.slide_score).collect();
    let harmony = deck_harmony_score(
        &harmony_scores,
        cfg.harmony.deck_mean_weight,
        cfg.harmony.deck_std_weight,
    )?;

    let complexity: Vec<f64> = slides.iter().map(|s| s.entropy_score).collect();
    let hrv = visual_hrv_score(&complexity, &cfg.hrv)?;
    if hrv.rmssd.degenerate {
        flags.push("rhythm: single slide, successive differences undefined".to_string());
    }
    let rhythm = hrv.score * cfg.profile.rhythm_scale;

    let pei = match &deck.package {
        Some(path) => match evaluate_pei(&path.display().to_string(), &cfg.pei) {
            Ok(r) => Some(r),
            Err(e) => {
                flags.push(format!("pei: {e}"));
                None
            }
        },
        None => None,
    };

    let components = assemble_components(usability, engagement, harmony, rhythm);
    let raw = RawComponents {
        usability,
        engagement,
        harmony,
        rhythm,
        aesthetics: usability.unwrap_or(0.0) + engagement + harmony + rhythm,
        mean_colorfulness: mean(&m),
        colorfulness_std: population_std(&m),
        pacing,
        harmony_mean: mean(&harmony_scores),
        harmony_std: population_std(&harmony_scores),
        hrv,
    };
    Ok(DeckReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        deck: DeckInfo {
            topic: deck.topic.clone(),
            system: deck.system.clone(),
            slide_count: slides.len(),
            missing_layouts: deck.missing_layouts.clone(),
        },
        profile: cfg.profile.clone(),
        components,
        raw,
        slides,
        pei,
        flags,
        config: cfg.clone(),
    })
}

/// Loads and evaluates a deck in one step.
pub fn evaluate_path(
    source: &Path,
    layout_dir: Option<&Path>,
    package: Option<&Path>,
    cfg: &Config,
) -> Result<DeckReport> {
    evaluate_deck(&load_deck(source, layout_dir, package)?, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Pretty-printed JSON with a stable key order.
    Struct,
    /// CSV summary, one row per deck.
    Table,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "struct" | "json" => Ok(ReportFormat::Struct),
            "table" | "csv" => Ok(ReportFormat::Table),
            other => Err(Error::InvalidInput(format!(
                "unknown report format {other:?}; expected struct or table"
            ))),
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |x| format!("{:.2}", x + 0.0))
}

pub fn emit_table(reports: &[DeckReport]) -> String {
    let mut out = format!("{TABLE_HEADER}\n");
    for r in reports {
        let c = &r.components;
        let pei = r
            .pei
            .as_ref()
            .and_then(|p| p.level)
            .map_or_else(|| "N/A".to_string(), |l| format!("L{l}"));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{pei}",
            cell(c.usability),
            cell(Some(c.engagement)),
            cell(Some(c.harmony)),
            cell(Some(c.rhythm)),
            cell(Some(c.aesthetics)),
        );
    }
    out
}

pub fn emit_report(report: &DeckReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Struct => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Table => emit_table(std::slice::from_ref(report)).into_bytes(),
    }
}

pub fn parse_report(bytes: &[u8]) -> Result<DeckReport> {
    serde_json::from_slice(bytes)
        .map_err(|e| Error::parse(format!("report line {}", e.line()), e.to_string()))
}
