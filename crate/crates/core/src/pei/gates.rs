//! Static-analysis proxies for the five editability gates.

use serde::{Deserialize, Serialize};

use super::package::{PresentationPackage, Rect, Shape, ShapeKind, Slide, WorkbookLink};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gate {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl Gate {
    pub const ALL: [Gate; 5] = [Gate::T1, Gate::T2, Gate::T3, Gate::T4, Gate::T5];

    pub fn title(self) -> &'static str {
        match self {
            Gate::T1 => "text integrity",
            Gate::T2 => "vector graphics",
            Gate::T3 => "structural logic",
            Gate::T4 => "native data",
            Gate::T5 => "cinematic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateStatus {
    Passed,
    Failed,
    NotEvaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// 0-based slide index; `None` for deck-wide findings.
    pub slide: Option<usize>,
    pub finding: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub gate: Gate,
    pub status: GateStatus,
    pub evidence: Vec<Evidence>,
}

impl GateResult {
    pub fn passed(&self) -> bool {
        self.status == GateStatus::Passed
    }

    pub fn not_evaluated(gate: Gate) -> Self {
        Self {
            gate,
            status: GateStatus::NotEvaluated,
            evidence: Vec::new(),
        }
    }

    fn from_failures(gate: Gate, failures: Vec<Evidence>, pass_notes: Vec<Evidence>) -> Self {
        if failures.is_empty() {
            Self {
                gate,
                status: GateStatus::Passed,
                evidence: pass_notes,
            }
        } else {
            Self {
                gate,
                status: GateStatus::Failed,
                evidence: failures,
            }
        }
    }
}

fn ev(slide: Option<usize>, finding: impl Into<String>) -> Evidence {
    Evidence {
        slide,
        finding: finding.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeiConfig {
    /// Picture coverage of the slide that counts as full-bleed.
    pub full_bleed_coverage: f64,
    /// Share of slides that must be full-bleed for the rasterized-text rule.
    pub rasterized_slide_fraction: f64,
    /// Stacked single-paragraph boxes that count as fragmentation.
    pub fragment_min_boxes: usize,
    /// Left-edge tolerance as a fraction of slide width.
    pub fragment_align_tolerance: f64,
    /// Maximum vertical gap between stacked boxes, in box heights.
    pub fragment_gap_factor: f64,
    /// Position tolerance for duplicate detection, as a fraction of slide size.
    pub duplicate_position_tolerance: f64,
    pub duplicate_slide_fraction: f64,
    /// Slides with more top-level shapes than this need a group.
    pub group_shape_threshold: usize,
}

impl Default for PeiConfig {
    fn default() -> Self {
        Self {
            full_bleed_coverage: 0.95,
            rasterized_slide_fraction: 0.5,
            fragment_min_boxes: 4,
            fragment_align_tolerance: 0.01,
            fragment_gap_factor: 1.5,
            duplicate_position_tolerance: 0.005,
            duplicate_slide_fraction: 0.8,
            group_shape_threshold: 15,
        }
    }
}

impl PeiConfig {
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            ("full_bleed_coverage", self.full_bleed_coverage),
            ("rasterized_slide_fraction", self.rasterized_slide_fraction),
            ("fragment_align_tolerance", self.fragment_align_tolerance),
            ("duplicate_position_tolerance", self.duplicate_position_tolerance),
            ("duplicate_slide_fraction", self.duplicate_slide_fraction),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!("pei.{name} must be in [0, 1]")));
            }
        }
        if self.fragment_min_boxes < 2 {
            return Err(Error::InvalidInput("pei.fragment_min_boxes must be >= 2".into()));
        }
        if !(self.fragment_gap_factor > 0.0) {
            return Err(Error::InvalidInput("pei.fragment_gap_factor must be > 0".into()));
        }
        Ok(())
    }
}

fn picture_coverage(slide: &Slide, page: &Rect) -> f64 {
    let area = page.area();
    slide
        .shapes
        .iter()
        .filter(|s| matches!(s.kind, ShapeKind::Picture { svg: false, .. }))
        .filter_map(|s| s.frame)
        .map(|f| f.intersect(page).area() / area)
        .fold(0.0, f64::max)
}

/// Longest run of left-aligned, closely stacked single-paragraph boxes among
/// one set of siblings.
fn longest_stack(siblings: &[Shape], cfg: &PeiConfig, slide_width: f64) -> usize {
    let mut boxes: Vec<Rect> = siblings
        .iter()
        .filter(|s| matches!(s.kind, ShapeKind::Shape { paragraphs: 1, .. }))
        .filter_map(|s| s.frame)
        .filter(|f| f.cy > 0)
        .collect();
    boxes.sort_by_key(|b| (b.x, b.y));
    let tol = cfg.fragment_align_tolerance * slide_width;
    let mut best = 0;
    let mut used = vec![false; boxes.len()];
    for i in 0..boxes.len() {
        if used[i] {
            continue;
        }
        let mut column = Vec::new();
        for (j, b) in boxes.iter().enumerate() {
            if !used[j] && (b.x - boxes[i].x).abs() as f64 <= tol {
                used[j] = true;
                column.push(*b);
            }
        }
        column.sort_by_key(|b| b.y);
        let mut run = 1;
        for w in column.windows(2) {
            let gap = (w[1].y - (w[0].y + w[0].cy)) as f64;
            if gap < cfg.fragment_gap_factor * w[0].cy as f64 {
                run += 1;
            } else {
                run = 1;
            }
            best = best.max(run);
        }
        best = best.max(run);
    }
    best
}

fn sibling_sets(shapes: &[Shape], out: &mut Vec<Vec<Shape>>) {
    out.push(shapes.to_vec());
    for s in shapes {
        if let ShapeKind::Group { children } = &s.kind {
            sibling_sets(children, out);
        }
    }
}

pub fn gate_t1_text_integrity(pkg: &PresentationPackage, cfg: &PeiConfig) -> GateResult {
    let page = pkg.slide_rect();
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    let total_runs: usize = pkg.slides.iter().map(|s| s.text_runs).sum();
    let full_bleed: Vec<usize> = pkg
        .slides
        .iter()
        .filter(|s| picture_coverage(s, &page) >= cfg.full_bleed_coverage)
        .map(|s| s.index)
        .collect();
    let n = pkg.slides.len();
    if n > 0
        && total_runs == 0
        && full_bleed.len() as f64 >= cfg.rasterized_slide_fraction * n as f64
    {
        failures.push(ev(
            None,
            format!(
                "rasterized text: no text runs in any slide and {} of {n} slides are covered by a picture",
                full_bleed.len()
            ),
        ));
    }

    for slide in &pkg.slides {
        let mut sets = Vec::new();
        sibling_sets(&slide.shapes, &mut sets);
        let stack = sets
            .iter()
            .map(|set| longest_stack(set, cfg, page.cx as f64))
            .max()
            .unwrap_or(0);
        if stack >= cfg.fragment_min_boxes {
            failures.push(ev(
                Some(slide.index),
                format!("fragmented text: {stack} stacked single-paragraph boxes share a left edge"),
            ));
        }
        notes.push(ev(
            Some(slide.index),
            format!(
                "{} text runs, longest stack {stack}, picture coverage {:.0}%",
                slide.text_runs,
                picture_coverage(slide, &page) * 100.0
            ),
        ));
    }
    GateResult::from_failures(Gate::T1, failures, notes)
}

#[derive(Default)]
struct GraphicCounts {
    raster: usize,
    vector: usize,
}

fn count_graphics(shapes: &[Shape], c: &mut GraphicCounts) {
    for s in shapes {
        match &s.kind {
            ShapeKind::Picture { svg: true, .. } | ShapeKind::Connector | ShapeKind::Frame { .. } => {
                c.vector += 1
            }
            ShapeKind::Picture { svg: false, .. } => c.raster += 1,
            ShapeKind::Shape {
                geometry: Some(_),
                text_box: false,
                placeholder: None,
                ..
            } => c.vector += 1,
            ShapeKind::Shape { .. } => {}
            ShapeKind::Group { children } => count_graphics(children, c),
        }
    }
}

pub fn gate_t2_vector(pkg: &PresentationPackage, cfg: &PeiConfig) -> GateResult {
    let page = pkg.slide_rect();
    let mut raster = 0;
    let mut vector = 0;
    let mut notes = Vec::new();
    for slide in &pkg.slides {
        let mut c = GraphicCounts::default();
        count_graphics(&slide.shapes, &mut c);
        // A full-bleed picture behind other graphics is a backdrop, not content.
        let backdrops = slide
            .shapes
            .iter()
            .filter(|s| matches!(s.kind, ShapeKind::Picture { svg: false, .. }))
            .filter(|s| {
                s.frame
                    .is_some_and(|f| f.intersect(&page).area() / page.area() >= cfg.full_bleed_coverage)
            })
            .count();
        let exempt = if c.raster + c.vector > backdrops { backdrops } else { 0 };
        raster += c.raster - exempt;
        vector += c.vector;
        notes.push(ev(
            Some(slide.index),
            format!("{} raster, {} vector, {exempt} backdrop", c.raster - exempt, c.vector),
        ));
    }
    let failures = if raster * 2 > raster + vector && vector == 0 {
        vec![ev(
            None,
            format!("{raster} raster pictures and no vector shapes, connectors, SVG or native frames"),
        )]
    } else {
        Vec::new()
    };
    GateResult::from_failures(Gate::T2, failures, notes)
}

#[derive(Debug, Clone, PartialEq)]
struct Signature {
    kind: String,
    frame: Rect,
    fill: String,
}

/// Decorative elements: pictures and shapes that are neither placeholders
/// nor carry text.
fn decorative_signatures(slide: &Slide) -> Vec<Signature> {
    slide
        .shapes
        .iter()
        .filter_map(|s| {
            let kind = match &s.kind {
                ShapeKind::Picture { .. } => "picture".to_string(),
                ShapeKind::Shape {
                    geometry: Some(g),
                    placeholder: None,
                    paragraphs: 0,
                    ..
                } => format!("shape:{g}"),
                _ => return None,
            };
            Some(Signature {
                kind,
                frame: s.frame?,
                fill: s.fill.clone(),
            })
        })
        .collect()
}

fn same_signature(a: &Signature, b: &Signature, tol_x: f64, tol_y: f64) -> bool {
    a.kind == b.kind
        && a.fill == b.fill
        && ((a.frame.x - b.frame.x).abs() as f64) <= tol_x
        && ((a.frame.y - b.frame.y).abs() as f64) <= tol_y
        && ((a.frame.cx - b.frame.cx).abs() as f64) <= tol_x
        && ((a.frame.cy - b.frame.cy).abs() as f64) <= tol_y
}

pub fn gate_t3_structure(pkg: &PresentationPackage, cfg: &PeiConfig) -> GateResult {
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    for slide in &pkg.slides {
        match slide.layout.as_ref().and_then(|l| pkg.layouts.get(l)) {
            None => failures.push(ev(Some(slide.index), "no slide layout: master inheritance broken")),
            Some(layout) if layout.master.is_none() => failures.push(ev(
                Some(slide.index),
                format!("layout {} does not resolve to a master", layout.part),
            )),
            Some(_) => {}
        }
    }

    let n = pkg.slides.len();
    if n >= 2 {
        let tol_x = cfg.duplicate_position_tolerance * pkg.slide_size.0 as f64;
        let tol_y = cfg.duplicate_position_tolerance * pkg.slide_size.1 as f64;
        let sigs: Vec<Vec<Signature>> = pkg.slides.iter().map(decorative_signatures).collect();
        let mut reported: Vec<Signature> = Vec::new();
        for (i, slide_sigs) in sigs.iter().enumerate() {
            for sig in slide_sigs {
                if reported.iter().any(|r| same_signature(r, sig, tol_x, tol_y)) {
                    continue;
                }
                let hits = sigs
                    .iter()
                    .filter(|other| other.iter().any(|o| same_signature(o, sig, tol_x, tol_y)))
                    .count();
                if hits as f64 >= cfg.duplicate_slide_fraction * n as f64 {
                    failures.push(ev(
                        Some(i),
                        format!(
                            "hardcoded decoration: {} ({}) repeated on {hits} of {n} slides instead of the master",
                            sig.kind,
                            if sig.fill.is_empty() { "no fill" } else { &sig.fill }
                        ),
                    ));
                    reported.push(sig.clone());
                }
            }
        }
    }

    for slide in &pkg.slides {
        let count = slide.shapes.len();
        let grouped = slide.shapes.iter().any(Shape::is_group);
        if count > cfg.group_shape_threshold && !grouped {
            failures.push(ev(
                Some(slide.index),
                format!("atomic isolation: {count} loose shapes and no group"),
            ));
        }
        notes.push(ev(
            Some(slide.index),
            format!("{count} shapes, grouped: {grouped}, layout: {}", slide.layout.as_deref().unwrap_or("-")),
        ));
    }
    GateResult::from_failures(Gate::T3, failures, notes)
}

pub fn gate_t4_parametric(pkg: &PresentationPackage) -> GateResult {
    if pkg.charts.is_empty() {
        return GateResult::from_failures(
            Gate::T4,
            vec![ev(None, "no native chart parts")],
            Vec::new(),
        );
    }
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for c in &pkg.charts {
        let slide = Some(c.slide_index);
        match (&c.workbook, c.present) {
            (_, false) => failures.push(ev(slide, format!("chart part {} is missing", c.part))),
            (WorkbookLink::Resolved(w), _) => {
                notes.push(ev(slide, format!("chart {} with embedded workbook {w}", c.part)))
            }
            (WorkbookLink::Missing, _) => {
                failures.push(ev(slide, format!("chart {} has no embedded workbook", c.part)))
            }
            (WorkbookLink::Dangling(w), _) => failures.push(ev(
                slide,
                format!("broken data link: chart {} points at absent or empty {w}", c.part),
            )),
            (WorkbookLink::External(w), _) => failures.push(ev(
                slide,
                format!("chart {} links an external workbook {w}", c.part),
            )),
        }
    }
    GateResult::from_failures(Gate::T4, failures, notes)
}

pub fn gate_t5_cinematic(pkg: &PresentationPackage) -> GateResult {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let animated: Vec<&Slide> = pkg
        .slides
        .iter()
        .filter(|s| s.has_transition || s.has_timing)
        .collect();
    if animated.is_empty() {
        failures.push(ev(None, "static state: no transitions or animation timing on any slide"));
    }
    for s in &animated {
        notes.push(ev(
            Some(s.index),
            format!("transition: {}, timing: {}", s.has_transition, s.has_timing),
        ));
    }
    for m in &pkg.media {
        if m.external {
            failures.push(ev(
                Some(m.slide_index),
                format!("external dependency: {} linked to {}", m.kind, m.target),
            ));
        } else {
            notes.push(ev(Some(m.slide_index), format!("embedded {} {}", m.kind, m.target)));
        }
    }
    GateResult::from_failures(Gate::T5, failures, notes)
}
