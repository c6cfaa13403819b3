//! Loading a rendered deck: a directory of page images, or a TOML manifest.
//!
//! Manifest keys, with paths relative to the manifest's directory:
//!
//! ```toml
//! topic = "quarterly-review"
//! system = "generator-a"      # optional
//! slides = ["p1.png", "p2.png"]
//! layout_dir = "layouts"      # optional
//! pptx = "deck.pptx"          # optional
//! ```

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::SlideImage;

const IMAGE_EXT: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideInput {
    pub image: PathBuf,
    pub layout: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeckSequence {
    pub topic: String,
    pub system: Option<String>,
    pub slides: Vec<SlideInput>,
    pub package: Option<PathBuf>,
    /// File names of slides with no layout sidecar.
    pub missing_layouts: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    topic: String,
    system: Option<String>,
    slides: Vec<PathBuf>,
    layout_dir: Option<PathBuf>,
    pptx: Option<PathBuf>,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXT.contains(&e.to_ascii_lowercase().as_str()))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Natural order on file names, so `p2` sorts before `p10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    natord::compare(a, b).then_with(|| a.cmp(b))
}

/// Sidecar for `dir/stem.png` is `stem.layout.json`, or failing that
/// `stem.json`, looked up in `layout_dir`.
fn find_sidecar(image: &Path, layout_dir: &Path) -> Option<PathBuf> {
    let stem = image.file_stem()?.to_string_lossy().into_owned();
    [format!("{stem}.layout.json"), format!("{stem}.json")]
        .into_iter()
        .map(|n| layout_dir.join(n))
        .find(|p| p.is_file())
}

fn assemble(
    topic: String,
    system: Option<String>,
    images: Vec<PathBuf>,
    layout_dir: &Path,
    package: Option<PathBuf>,
) -> Result<DeckSequence> {
    let mut slides = Vec::with_capacity(images.len());
    let mut missing_layouts = Vec::new();
    for image in images {
        let layout = find_sidecar(&image, layout_dir);
        if layout.is_none() {
            missing_layouts.push(file_name(&image));
        }
        slides.push(SlideInput { image, layout });
    }
    Ok(DeckSequence {
        topic,
        system,
        slides,
        package,
        missing_layouts,
    })
}

/// Loads a deck from a directory of images or a manifest file. Explicit
/// `layout_dir` and `package` arguments override the manifest.
pub fn load_deck(
    source: &Path,
    layout_dir: Option<&Path>,
    package: Option<&Path>,
) -> Result<DeckSequence> {
    if source.is_dir() {
        let entries = std::fs::read_dir(source).map_err(|e| Error::io(source, e))?;
        let mut images = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| Error::io(source, e))?.path();
            if path.is_file() && is_image(&path) {
                images.push(path);
            }
        }
        if images.is_empty() {
            return Err(Error::Empty(format!(
                "no PNG or JPEG slides in {}",
                source.display()
            )));
        }
        images.sort_by(|a, b| natural_cmp(&file_name(a), &file_name(b)));
        let topic = source
            .canonicalize()
            .ok()
            .as_deref()
            .and_then(Path::file_name)
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "deck".into());
        return assemble(
            topic,
            None,
            images,
            layout_dir.unwrap_or(source),
            package.map(Path::to_path_buf),
        );
    }

    let text = std::fs::read_to_string(source).map_err(|e| Error::io(source, e))?;
    let manifest: Manifest = toml::from_str(&text)
        .map_err(|e| Error::parse(format!("manifest {}", source.display()), e.message()))?;
    if manifest.slides.is_empty() {
        return Err(Error::Empty(format!("manifest {} lists no slides", source.display())));
    }
    let base = source.parent().unwrap_or(Path::new("."));
    let images = manifest.slides.iter().map(|p| base.join(p)).collect();
    let layouts = layout_dir
        .map(Path::to_path_buf)
        .or_else(|| manifest.layout_dir.as_ref().map(|p| base.join(p)))
        .unwrap_or_else(|| base.to_path_buf());
    let pkg = package
        .map(Path::to_path_buf)
        .or_else(|| manifest.pptx.as_ref().map(|p| base.join(p)));
    assemble(manifest.topic, manifest.system, images, &layouts, pkg)
}

pub fn decode_image(path: &Path) -> Result<SlideImage> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let rgb = img.to_rgb8();
    SlideImage::from_rgb_bytes(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
}
