//! Reading presentation packages: a ZIP of XML parts tied together by
//! relationship files.

use std::collections::BTreeMap;
use std::io::{Cursor, Read};

use roxmltree::{Document, Node};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NS_P: &str = "http://schemas.openxmlformats.org/presentationml/2006/main";
const NS_A: &str = "http://schemas.openxmlformats.org/drawingml/2006/main";
const NS_R: &str = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";

/// Default slide size (10in x 7.5in) in EMU.
const DEFAULT_SLIDE_SIZE: (i64, i64) = (9_144_000, 6_858_000);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relationship {
    pub id: String,
    /// Last path segment of the relationship type URI, e.g. `slideLayout`.
    pub kind: String,
    /// Resolved part name for internal targets, raw target otherwise.
    pub target: String,
    pub external: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub cx: i64,
    pub cy: i64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        self.cx.max(0) as f64 * self.cy.max(0) as f64
    }

    pub fn intersect(&self, o: &Rect) -> Rect {
        let x0 = self.x.max(o.x);
        let y0 = self.y.max(o.y);
        let x1 = (self.x + self.cx).min(o.x + o.cx);
        let y1 = (self.y + self.cy).min(o.y + o.cy);
        Rect {
            x: x0,
            y: y0,
            cx: (x1 - x0).max(0),
            cy: (y1 - y0).max(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeKind {
    Shape {
        /// Preset geometry name, `custom` for freeforms, `None` without geometry.
        geometry: Option<String>,
        text_box: bool,
        placeholder: Option<String>,
        /// Paragraphs carrying visible text.
        paragraphs: usize,
    },
    Picture {
        /// Resolved part of the embedded image, if any.
        image: Option<String>,
        svg: bool,
    },
    Connector,
    Group {
        children: Vec<Shape>,
    },
    Frame {
        /// `chart`, `table`, `diagram`, `ole` or the raw graphicData URI tail.
        content: String,
        /// Relationship id of the chart part for chart frames.
        chart_rel: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub name: String,
    pub kind: ShapeKind,
    pub frame: Option<Rect>,
    /// Fill description used for duplicate detection.
    pub fill: String,
}

impl Shape {
    pub fn is_group(&self) -> bool {
        matches!(self.kind, ShapeKind::Group { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slide {
    pub index: usize,
    pub part: String,
    pub shapes: Vec<Shape>,
    /// Non-empty `a:t` runs anywhere in the slide body.
    pub text_runs: usize,
    pub has_transition: bool,
    pub has_timing: bool,
    pub layout: Option<String>,
    pub rels: Vec<Relationship>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub part: String,
    pub master: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "target", rename_all = "snake_case")]
pub enum WorkbookLink {
    /// No embedded-workbook relationship.
    Missing,
    /// Relationship points at a member that is absent or empty.
    Dangling(String),
    External(String),
    Resolved(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub slide_index: usize,
    /// Chart part name, or the unresolved target when the part is missing.
    pub part: String,
    pub present: bool,
    pub workbook: WorkbookLink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaRef {
    pub slide_index: usize,
    pub kind: String,
    pub target: String,
    pub external: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresentationPackage {
    pub slide_size: (i64, i64),
    pub slides: Vec<Slide>,
    pub layouts: BTreeMap<String, Layout>,
    pub masters: Vec<String>,
    pub charts: Vec<Chart>,
    pub media: Vec<MediaRef>,
    /// Problems in optional parts that did not stop parsing.
    pub defects: Vec<String>,
    #[serde(skip)]
    members: BTreeMap<String, Vec<u8>>,
}

impl PresentationPackage {
    pub fn member(&self, name: &str) -> Option<&[u8]> {
        self.members.get(name).map(Vec::as_slice)
    }

    pub fn slide_rect(&self) -> Rect {
        Rect {
            x: 0,
            y: 0,
            cx: self.slide_size.0,
            cy: self.slide_size.1,
        }
    }
}

fn is(node: &Node, ns: &str, name: &str) -> bool {
    node.is_element() && node.tag_name().name() == name && node.tag_name().namespace() == Some(ns)
}

fn child<'a, 'i>(node: Node<'a, 'i>, ns: &str, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| is(c, ns, name))
}

fn descendant<'a, 'i>(node: Node<'a, 'i>, ns: &str, name: &str) -> Option<Node<'a, 'i>> {
    node.descendants().find(|c| is(c, ns, name))
}

/// Resolves a relationship target against the directory of `source`.
pub fn resolve_target(source: &str, target: &str) -> String {
    let mut parts: Vec<&str> = if let Some(abs) = target.strip_prefix('/') {
        return normalize(abs.split('/'));
    } else {
        source.split('/').collect()
    };
    parts.pop();
    parts.extend(target.split('/'));
    normalize(parts.into_iter())
}

fn normalize<'a>(segments: impl Iterator<Item = &'a str>) -> String {
    let mut out: Vec<&str> = Vec::new();
    for s in segments {
        match s {
            "" | "." => {}
            ".." => {
                out.pop();
            }
            s => out.push(s),
        }
    }
    out.join("/")
}

fn rels_name(part: &str) -> String {
    match part.rsplit_once('/') {
        Some((dir, file)) => format!("{dir}/_rels/{file}.rels"),
        None => format!("_rels/{part}.rels"),
    }
}

fn xml_text<'a>(members: &'a BTreeMap<String, Vec<u8>>, name: &str) -> Option<std::result::Result<&'a str, String>> {
    members.get(name).map(|b| {
        std::str::from_utf8(b.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(b))
            .map_err(|e| format!("{name}: not UTF-8: {e}"))
    })
}

struct Reader {
    members: BTreeMap<String, Vec<u8>>,
    defects: Vec<String>,
}

impl Reader {
    /// Relationships of `part`; a missing or malformed rels file yields none.
    fn rels(&mut self, part: &str) -> Vec<Relationship> {
        let name = rels_name(part);
        let text = match xml_text(&self.members, &name) {
            None => return Vec::new(),
            Some(Err(e)) => {
                self.defects.push(e);
                return Vec::new();
            }
            Some(Ok(t)) => t,
        };
        let doc = match Document::parse(text) {
            Ok(d) => d,
            Err(e) => {
                self.defects.push(format!("{name}: {e}"));
                return Vec::new();
            }
        };
        doc.root_element()
            .children()
            .filter(|n| n.is_element() && n.tag_name().name() == "Relationship")
            .filter_map(|n| {
                let id = n.attribute("Id")?.to_string();
                let kind = n.attribute("Type")?.rsplit('/').next()?.to_string();
                let raw = n.attribute("Target")?;
                let external = n.attribute("TargetMode") == Some("External");
                let target = if external {
                    raw.to_string()
                } else {
                    resolve_target(part, raw)
                };
                Some(Relationship {
                    id,
                    kind,
                    target,
                    external,
                })
            })
            .collect()
    }

    fn parse_with<T>(&mut self, part: &str, f: impl FnOnce(&Document) -> T) -> Option<T> {
        match xml_text(&self.members, part) {
            None => {
                self.defects.push(format!("{part}: referenced part is missing"));
                None
            }
            Some(Err(e)) => {
                self.defects.push(e);
                None
            }
            Some(Ok(text)) => match Document::parse(text) {
                Ok(doc) => Some(f(&doc)),
                Err(e) => {
                    self.defects.push(format!("{part}: {e}"));
                    None
                }
            },
        }
    }
}

fn read_zip(bytes: &[u8]) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes))
        .map_err(|e| Error::CorruptPackage(format!("not a readable ZIP archive: {e}")))?;
    let mut members = BTreeMap::new();
    for i in 0..archive.len() {
        let mut file = archive
            .by_index(i)
            .map_err(|e| Error::CorruptPackage(format!("entry {i}: {e}")))?;
        if file.is_dir() {
            continue;
        }
        let name = file
            .name()
            .map_err(|e| Error::CorruptPackage(format!("entry {i}: {e}")))?
            .trim_start_matches('/')
            .to_string();
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)
            .map_err(|e| Error::CorruptPackage(format!("{name}: {e}")))?;
        members.insert(name, buf);
    }
    Ok(members)
}

fn attr_i64(node: Option<Node>, name: &str) -> Option<i64> {
    node?.attribute(name)?.parse().ok()
}

fn xfrm_rect(sp_pr: Option<Node>) -> Option<Rect> {
    let xfrm = sp_pr?.children().find(|c| c.is_element() && c.tag_name().name() == "xfrm")?;
    let off = child(xfrm, NS_A, "off");
    let ext = child(xfrm, NS_A, "ext");
    Some(Rect {
        x: attr_i64(off, "x")?,
        y: attr_i64(off, "y")?,
        cx: attr_i64(ext, "cx")?,
        cy: attr_i64(ext, "cy")?,
    })
}

fn fill_signature(sp_pr: Option<Node>, rels: &[Relationship]) -> String {
    let Some(sp_pr) = sp_pr else {
        return String::new();
    };
    for c in sp_pr.children().filter(Node::is_element) {
        match c.tag_name().name() {
            "solidFill" => {
                let colour = c
                    .children()
                    .find(Node::is_element)
                    .map(|n| format!("{}:{}", n.tag_name().name(), n.attribute("val").unwrap_or("")))
                    .unwrap_or_default();
                return format!("solid:{colour}");
            }
            "noFill" => return "none".into(),
            "gradFill" => return "gradient".into(),
            "pattFill" => return "pattern".into(),
            "blipFill" => return format!("blip:{}", blip_target(c, rels).unwrap_or_default()),
            _ => {}
        }
    }
    String::new()
}

fn blip_target(node: Node, rels: &[Relationship]) -> Option<String> {
    let blip = descendant(node, NS_A, "blip")?;
    let rid = blip.attribute((NS_R, "embed"))?;
    rels.iter().find(|r| r.id == rid).map(|r| r.target.clone())
}

fn count_paragraphs(node: Node) -> usize {
    node.descendants()
        .filter(|n| is(n, NS_A, "p"))
        .filter(|p| {
            p.descendants()
                .filter(|t| is(t, NS_A, "t"))
                .any(|t| t.text().is_some_and(|s| !s.trim().is_empty()))
        })
        .count()
}

fn parse_shape(node: Node, rels: &[Relationship]) -> Option<Shape> {
    let local = node.tag_name().name();
    if node.tag_name().namespace() != Some(NS_P) {
        return None;
    }
    let c_nv_pr = node
        .descendants()
        .find(|n| is(n, NS_P, "cNvPr"));
    let name = c_nv_pr.and_then(|n| n.attribute("name")).unwrap_or("").to_string();
    let sp_pr = child(node, NS_P, "spPr");
    let (kind, frame, fill) = match local {
        "sp" => {
            let geometry = sp_pr.and_then(|s| {
                if let Some(g) = child(s, NS_A, "prstGeom") {
                    Some(g.attribute("prst").unwrap_or("rect").to_string())
                } else {
                    child(s, NS_A, "custGeom").map(|_| "custom".to_string())
                }
            });
            let nv = child(node, NS_P, "nvSpPr");
            let text_box = nv
                .and_then(|n| child(n, NS_P, "cNvSpPr"))
                .and_then(|n| n.attribute("txBox"))
                .is_some_and(|v| v == "1" || v == "true");
            let placeholder = nv
                .and_then(|n| child(n, NS_P, "nvPr"))
                .and_then(|n| child(n, NS_P, "ph"))
                .map(|ph| ph.attribute("type").unwrap_or("body").to_string());
            let paragraphs = child(node, NS_P, "txBody").map_or(0, count_paragraphs);
            (
                ShapeKind::Shape {
                    geometry,
                    text_box,
                    placeholder,
                    paragraphs,
                },
                xfrm_rect(sp_pr),
                fill_signature(sp_pr, rels),
            )
        }
        "pic" => {
            let blip_fill = child(node, NS_P, "blipFill");
            let image = blip_fill.and_then(|b| blip_target(b, rels));
            let svg = blip_fill.is_some_and(|b| b.descendants().any(|n| n.tag_name().name() == "svgBlip"))
                || image.as_deref().is_some_and(|t| t.ends_with(".svg"));
            let fill = format!("blip:{}", image.clone().unwrap_or_default());
            (ShapeKind::Picture { image, svg }, xfrm_rect(sp_pr), fill)
        }
        "cxnSp" => (ShapeKind::Connector, xfrm_rect(sp_pr), fill_signature(sp_pr, rels)),
        "grpSp" => {
            let children = node.children().filter_map(|c| parse_shape(c, rels)).collect();
            let grp_pr = child(node, NS_P, "grpSpPr");
            (ShapeKind::Group { children }, xfrm_rect(grp_pr), String::new())
        }
        "graphicFrame" => {
            let data = descendant(node, NS_A, "graphicData");
            let uri = data.and_then(|d| d.attribute("uri")).unwrap_or("");
            let content = match uri.rsplit('/').next().unwrap_or("") {
                "chart" => "chart",
                "table" => "table",
                "diagram" => "diagram",
                "ole" => "ole",
                other => other,
            }
            .to_string();
            let chart_rel = data
                .and_then(|d| d.children().find(|c| c.is_element() && c.tag_name().name() == "chart"))
                .and_then(|c| c.attribute((NS_R, "id")))
                .map(str::to_string);
            let xfrm = child(node, NS_P, "xfrm");
            let frame = xfrm.and_then(|x| {
                let off = child(x, NS_A, "off");
                let ext = child(x, NS_A, "ext");
                Some(Rect {
                    x: attr_i64(off, "x")?,
                    y: attr_i64(off, "y")?,
                    cx: attr_i64(ext, "cx")?,
                    cy: attr_i64(ext, "cy")?,
                })
            });
            (ShapeKind::Frame { content, chart_rel }, frame, String::new())
        }
        // Markup-compatibility wrappers: take the fallback branch.
        _ => return None,
    };
    Some(Shape {
        name,
        kind,
        frame,
        fill,
    })
}

fn shapes_of(tree: Node, rels: &[Relationship]) -> Vec<Shape> {
    let mut out = Vec::new();
    for c in tree.children().filter(Node::is_element) {
        if c.tag_name().name() == "AlternateContent" {
            let branch = c
                .children()
                .find(|n| n.is_element() && n.tag_name().name() == "Fallback")
                .or_else(|| c.children().find(|n| n.is_element() && n.tag_name().name() == "Choice"));
            if let Some(b) = branch {
                out.extend(shapes_of(b, rels));
            }
        } else if let Some(s) = parse_shape(c, rels) {
            out.push(s);
        }
    }
    out
}

fn parse_slide(doc: &Document, index: usize, part: &str, rels: Vec<Relationship>) -> Slide {
    let root = doc.root_element();
    let c_sld = child(root, NS_P, "cSld");
    let shapes = c_sld
        .and_then(|c| child(c, NS_P, "spTree"))
        .map(|t| shapes_of(t, &rels))
        .unwrap_or_default();
    let text_runs = c_sld.map_or(0, |c| {
        c.descendants()
            .filter(|n| is(n, NS_A, "t"))
            .filter(|t| t.text().is_some_and(|s| !s.trim().is_empty()))
            .count()
    });
    let has_transition = root.descendants().any(|n| is(&n, NS_P, "transition"));
    // A timing tree always has a root time node; animations add more.
    let has_timing = child(root, NS_P, "timing")
        .is_some_and(|t| t.descendants().filter(|n| is(n, NS_P, "cTn")).count() > 1);
    let layout = rels.iter().find(|r| r.kind == "slideLayout" && !r.external).map(|r| r.target.clone());
    Slide {
        index,
        part: part.to_string(),
        shapes,
        text_runs,
        has_transition,
        has_timing,
        layout,
        rels,
    }
}

const MEDIA_KINDS: [&str; 3] = ["video", "audio", "media"];

pub fn open_package(bytes: &[u8]) -> Result<PresentationPackage> {
    let members = read_zip(bytes)?;
    let mut rd = Reader {
        members,
        defects: Vec::new(),
    };

    let main = rd
        .rels("")
        .into_iter()
        .find(|r| r.kind == "officeDocument" && !r.external)
        .map(|r| r.target)
        .unwrap_or_else(|| "ppt/presentation.xml".to_string());
    let pres_text = match xml_text(&rd.members, &main) {
        Some(Ok(t)) => t.to_string(),
        Some(Err(e)) => return Err(Error::CorruptPackage(e)),
        None => return Err(Error::CorruptPackage(format!("main part {main} is missing"))),
    };
    let pres = Document::parse(&pres_text)
        .map_err(|e| Error::CorruptPackage(format!("{main}: {e}")))?;
    let pres_root = pres.root_element();
    if !is(&pres_root, NS_P, "presentation") {
        return Err(Error::CorruptPackage(format!("{main} is not a presentation part")));
    }
    let pres_rels = rd.rels(&main);

    let sz = child(pres_root, NS_P, "sldSz");
    let slide_size = match (attr_i64(sz, "cx"), attr_i64(sz, "cy")) {
        (Some(cx), Some(cy)) if cx > 0 && cy > 0 => (cx, cy),
        _ => DEFAULT_SLIDE_SIZE,
    };

    let masters: Vec<String> = pres_rels
        .iter()
        .filter(|r| r.kind == "slideMaster" && !r.external)
        .map(|r| r.target.clone())
        .collect();

    let slide_targets: Vec<String> = child(pres_root, NS_P, "sldIdLst")
        .map(|l| {
            l.children()
                .filter(|n| is(n, NS_P, "sldId"))
                .filter_map(|n| n.attribute((NS_R, "id")))
                .filter_map(|rid| {
                    let t = pres_rels.iter().find(|r| r.id == rid).map(|r| r.target.clone());
                    if t.is_none() {
                        rd.defects.push(format!("{main}: slide relationship {rid} is missing"));
                    }
                    t
                })
                .collect()
        })
        .unwrap_or_default();

    let mut slides = Vec::new();
    let mut layouts = BTreeMap::new();
    let mut charts = Vec::new();
    let mut media = Vec::new();
    for (index, part) in slide_targets.iter().enumerate() {
        let rels = rd.rels(part);
        let slide = rd
            .parse_with(part, |doc| parse_slide(doc, index, part, rels.clone()))
            .unwrap_or_else(|| Slide {
                index,
                part: part.clone(),
                shapes: Vec::new(),
                text_runs: 0,
                has_transition: false,
                has_timing: false,
                layout: None,
                rels: rels.clone(),
            });

        if let Some(layout_part) = &slide.layout {
            if !layouts.contains_key(layout_part) {
                let lrels = rd.rels(layout_part);
                let master = if rd.parse_with(layout_part, |_| ()).is_some() {
                    lrels
                        .iter()
                        .find(|r| r.kind == "slideMaster" && !r.external)
                        .map(|r| r.target.clone())
                } else {
                    None
                };
                layouts.insert(
                    layout_part.clone(),
                    Layout {
                        part: layout_part.clone(),
                        master,
                    },
                );
            }
        }

        for r in &rels {
            if MEDIA_KINDS.contains(&r.kind.as_str()) {
                media.push(MediaRef {
                    slide_index: index,
                    kind: r.kind.clone(),
                    target: r.target.clone(),
                    external: r.external,
                });
            }
        }

        let chart_rels: Vec<String> = collect_chart_rels(&slide.shapes);
        for rid in chart_rels {
            let Some(rel) = rels.iter().find(|r| r.id == rid) else {
                rd.defects.push(format!("{part}: chart relationship {rid} is missing"));
                charts.push(Chart {
                    slide_index: index,
                    part: format!("{part}#{rid}"),
                    present: false,
                    workbook: WorkbookLink::Missing,
                });
                continue;
            };
            let present = rd.members.contains_key(&rel.target) && !rel.external;
            let workbook = if present {
                let crels = rd.rels(&rel.target);
                match crels.iter().find(|r| r.kind == "package" || r.kind == "oleObject") {
                    None => WorkbookLink::Missing,
                    Some(w) if w.external => WorkbookLink::External(w.target.clone()),
                    Some(w) => match rd.members.get(&w.target) {
                        Some(b) if !b.is_empty() => WorkbookLink::Resolved(w.target.clone()),
                        _ => WorkbookLink::Dangling(w.target.clone()),
                    },
                }
            } else {
                rd.defects.push(format!("{part}: chart part {} is missing", rel.target));
                WorkbookLink::Missing
            };
            charts.push(Chart {
                slide_index: index,
                part: rel.target.clone(),
                present,
                workbook,
            });
        }
        slides.push(slide);
    }

    for m in &masters {
        rd.parse_with(m, |_| ());
    }

    Ok(PresentationPackage {
        slide_size,
        slides,
        layouts,
        masters,
        charts,
        media,
        defects: rd.defects,
        members: rd.members,
    })
}

fn collect_chart_rels(shapes: &[Shape]) -> Vec<String> {
    let mut out = Vec::new();
    for s in shapes {
        match &s.kind {
            ShapeKind::Frame {
                chart_rel: Some(r), ..
            } => out.push(r.clone()),
            ShapeKind::Group { children } => out.extend(collect_chart_rels(children)),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_resolution() {
        assert_eq!(resolve_target("ppt/slides/slide1.xml", "../slideLayouts/slideLayout1.xml"), "ppt/slideLayouts/slideLayout1.xml");
        assert_eq!(resolve_target("ppt/presentation.xml", "slides/slide1.xml"), "ppt/slides/slide1.xml");
        assert_eq!(resolve_target("", "ppt/presentation.xml"), "ppt/presentation.xml");
        assert_eq!(resolve_target("ppt/slides/slide1.xml", "/ppt/media/a.png"), "ppt/media/a.png");
        assert_eq!(rels_name("ppt/slides/slide1.xml"), "ppt/slides/_rels/slide1.xml.rels");
        assert_eq!(rels_name(""), "_rels/.rels");
    }

    #[test]
    fn garbage_is_corrupt() {
        assert!(matches!(open_package(b"not a zip"), Err(Error::CorruptPackage(_))));
    }
}
