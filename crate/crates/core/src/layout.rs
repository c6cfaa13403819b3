//! Layout-detection sidecar files.
//!
//! Each slide may carry a `<slide-stem>.layout.json` file holding the output
//! of an external layout detector: an object with an `elements` array whose
//! entries carry `label`, `score` and `coordinate = [x_min, y_min, x_max, y_max]`
//! in pixels. The detector's own `boxes` key is accepted as an alias.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Default confidence floor for [`text_regions`].
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutLabel {
    Text,
    DocTitle,
    Image,
    Footer,
    Other,
}

impl LayoutLabel {
    pub fn from_detector(label: &str) -> Self {
        match label {
            "text" => LayoutLabel::Text,
            "doc_title" => LayoutLabel::DocTitle,
            "image" => LayoutLabel::Image,
            "footer" => LayoutLabel::Footer,
            _ => LayoutLabel::Other,
        }
    }

    /// Labels whose regions carry legibility requirements.
    pub fn is_textual(self) -> bool {
        matches!(
            self,
            LayoutLabel::Text | LayoutLabel::DocTitle | LayoutLabel::Footer
        )
    }
}

/// Axis-aligned pixel box, `x_min < x_max` and `y_min < y_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let all_finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !all_finite || x_min >= x_max || y_min >= y_max {
            return Err(Error::InvalidInput(format!(
                "degenerate box [{x_min}, {y_min}, {x_max}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Clamps to `[0, width] x [0, height]`. Returns `None` when nothing is
    /// left, and whether any clamping happened otherwise.
    pub fn clamp_to(&self, width: usize, height: usize) -> Option<(BoundingBox, bool)> {
        let (w, h) = (width as f64, height as f64);
        let clamped = BoundingBox {
            x_min: self.x_min.clamp(0.0, w),
            y_min: self.y_min.clamp(0.0, h),
            x_max: self.x_max.clamp(0.0, w),
            y_max: self.y_max.clamp(0.0, h),
        };
        if clamped.x_min >= clamped.x_max || clamped.y_min >= clamped.y_max {
            return None;
        }
        Some((clamped, clamped != *self))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutElement {
    pub label: LayoutLabel,
    /// The label string as written by the detector.
    pub raw_label: String,
    pub score: f64,
    pub coordinate: BoundingBox,
    /// Set when the box was clamped to the image extent.
    #[serde(default)]
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct LayoutDocument {
    pub slide_index: usize,
    pub elements: Vec<LayoutElement>,
}

impl LayoutDocument {
    pub fn has_clamped_elements(&self) -> bool {
        self.elements.iter().any(|e| e.clamped)
    }
}

/// Parses a layout sidecar. When `image_size` is given, boxes are clamped to
/// it; a box lying entirely outside the image is an error.
pub fn parse_layout_file(
    bytes: &[u8],
    slide_index: usize,
    image_size: Option<(usize, usize)>,
) -> Result<LayoutDocument> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse("layout file", format!("not UTF-8: {e}")))?;
    let root: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("layout file line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let object = root
        .as_object()
        .ok_or_else(|| Error::parse("layout file", "top level must be an object"))?;
    let list = object
        .get("elements")
        .or_else(|| object.get("boxes"))
        .ok_or_else(|| Error::parse("layout file", "missing \"elements\" array"))?
        .as_array()
        .ok_or_else(|| Error::parse("elements", "expected an array"))?;

    let elements = list
        .iter()
        .enumerate()
        .map(|(i, v)| parse_element(i, v, image_size))
        .collect::<Result<Vec<_>>>()?;
    Ok(LayoutDocument {
        slide_index,
        elements,
    })
}

fn parse_element(
    index: usize,
    value: &Value,
    image_size: Option<(usize, usize)>,
) -> Result<LayoutElement> {
    let ctx = |field: &str| format!("elements[{index}].{field}");
    let raw_label = value
        .get("label")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse(ctx("label"), "missing or not a string"))?
        .to_owned();
    let score = value
        .get("score")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::parse(ctx("score"), "missing or not a number"))?;
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::parse(ctx("score"), format!("{score} outside [0, 1]")));
    }
    let coords = value
        .get("coordinate")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(ctx("coordinate"), "missing or not an array"))?;
    let nums = coords.iter().filter_map(Value::as_f64).collect::<Vec<_>>();
    if coords.len() != 4 || nums.len() != 4 {
        return Err(Error::parse(
            ctx("coordinate"),
            "expected [x_min, y_min, x_max, y_max]",
        ));
    }
    let mut coordinate = BoundingBox::new(nums[0], nums[1], nums[2], nums[3])
        .map_err(|e| Error::parse(ctx("coordinate"), e.to_string()))?;
    let mut clamped = false;
    if let Some((w, h)) = image_size {
        let (b, changed) = coordinate.clamp_to(w, h).ok_or_else(|| {
            Error::parse(ctx("coordinate"), format!("box lies outside the {w}x{h} image"))
        })?;
        coordinate = b;
        clamped = changed;
    }
    Ok(LayoutElement {
        label: LayoutLabel::from_detector(&raw_label),
        raw_label,
        score,
        coordinate,
        clamped,
    })
}

/// Boxes of textual elements scoring at least `min_confidence`, in document order.
pub fn text_regions(doc: &LayoutDocument, min_confidence: f64) -> Vec<BoundingBox> {
    doc.elements
        .iter()
        .filter(|e| e.label.is_textual() && e.score >= min_confidence)
        .map(|e| e.coordinate)
        .collect()
}
