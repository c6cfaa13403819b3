//! Generator for small, structurally valid presentation packages, one per
//! editability outcome. Used by the tests and the `fixtures` subcommand.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Cursor, Read, Write};

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipArchive, ZipWriter};

use super::package::Rect;
use crate::error::{Error, Result};

const SLIDE_W: i64 = 12_192_000;
const SLIDE_H: i64 = 6_858_000;

const NS_DECL: &str = r#"xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main""#;
const REL_BASE: &str = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Text { frame: Rect, paragraphs: Vec<String> },
    Shape { frame: Rect, geometry: String, fill: String },
    Picture { frame: Rect },
    Connector { frame: Rect },
    Chart { frame: Rect, workbook: bool },
    Group { frame: Rect, children: Vec<Element> },
    Video { frame: Rect, link: MediaLink },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MediaLink {
    Embedded,
    /// Linked by path or URL outside the package.
    External(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlideSpec {
    pub elements: Vec<Element>,
    pub transition: bool,
    pub animation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeckSpec {
    pub slides: Vec<SlideSpec>,
    /// Decoration placed on the slide master.
    pub master_elements: Vec<Element>,
}

pub fn rect(x: f64, y: f64, w: f64, h: f64) -> Rect {
    Rect {
        x: (x * SLIDE_W as f64) as i64,
        y: (y * SLIDE_H as f64) as i64,
        cx: (w * SLIDE_W as f64) as i64,
        cy: (h * SLIDE_H as f64) as i64,
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn xfrm(tag: &str, f: &Rect) -> String {
    format!(
        r#"<{tag}><a:off x="{}" y="{}"/><a:ext cx="{}" cy="{}"/></{tag}>"#,
        f.x, f.y, f.cx, f.cy
    )
}

/// Per-part state while emitting shapes: ids and relationships.
struct PartWriter {
    next_id: u32,
    rels: Vec<(String, String, String, bool)>,
}

impl PartWriter {
    fn new() -> Self {
        Self {
            next_id: 2,
            rels: Vec::new(),
        }
    }

    fn id(&mut self) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn rel(&mut self, kind: &str, target: &str, external: bool) -> String {
        if let Some((rid, ..)) = self.rels.iter().find(|(_, k, t, _)| k == kind && t == target) {
            return rid.clone();
        }
        let rid = format!("rId{}", self.rels.len() + 1);
        self.rels.push((rid.clone(), kind.into(), target.into(), external));
        rid
    }

    fn rels_xml(&self) -> String {
        let mut s = String::from(
            r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">"#,
        );
        for (id, kind, target, external) in &self.rels {
            let ty = if kind == "media" {
                "http://schemas.microsoft.com/office/2007/relationships/media".to_string()
            } else {
                format!("{REL_BASE}/{kind}")
            };
            let mode = if *external { r#" TargetMode="External""# } else { "" };
            let _ = write!(s, r#"<Relationship Id="{id}" Type="{ty}" Target="{}"{mode}/>"#, esc(target));
        }
        s.push_str("</Relationships>");
        s
    }
}

struct Package {
    members: BTreeMap<String, Vec<u8>>,
    charts: usize,
    overrides: Vec<(String, &'static str)>,
}

impl Package {
    fn put(&mut self, name: &str, data: impl Into<Vec<u8>>) {
        self.members.insert(name.to_string(), data.into());
    }

    fn element(&mut self, e: &Element, w: &mut PartWriter, out: &mut String) {
        match e {
            Element::Text { frame, paragraphs } => {
                let id = w.id();
                let _ = write!(
                    out,
                    r#"<p:sp><p:nvSpPr><p:cNvPr id="{id}" name="TextBox {id}"/><p:cNvSpPr txBox="1"/><p:nvPr/></p:nvSpPr><p:spPr>{}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom><a:noFill/></p:spPr><p:txBody><a:bodyPr wrap="square"/><a:lstStyle/>"#,
                    xfrm("a:xfrm", frame)
                );
                for p in paragraphs {
                    let _ = write!(out, r#"<a:p><a:r><a:rPr lang="en-US" dirty="0"/><a:t>{}</a:t></a:r></a:p>"#, esc(p));
                }
                out.push_str("</p:txBody></p:sp>");
            }
            Element::Shape {
                frame,
                geometry,
                fill,
            } => {
                let id = w.id();
                let _ = write!(
                    out,
                    r#"<p:sp><p:nvSpPr><p:cNvPr id="{id}" name="Shape {id}"/><p:cNvSpPr/><p:nvPr/></p:nvSpPr><p:spPr>{}<a:prstGeom prst="{}"><a:avLst/></a:prstGeom><a:solidFill><a:srgbClr val="{}"/></a:solidFill></p:spPr></p:sp>"#,
                    xfrm("a:xfrm", frame),
                    esc(geometry),
                    esc(fill)
                );
            }
            Element::Picture { frame } => {
                let id = w.id();
                let rid = w.rel("image", "../media/image1.png", false);
                let _ = write!(
                    out,
                    r#"<p:pic><p:nvPicPr><p:cNvPr id="{id}" name="Picture {id}"/><p:cNvPicPr><a:picLocks noChangeAspect="1"/></p:cNvPicPr><p:nvPr/></p:nvPicPr><p:blipFill><a:blip r:embed="{rid}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill><p:spPr>{}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>"#,
                    xfrm("a:xfrm", frame)
                );
            }
            Element::Connector { frame } => {
                let id = w.id();
                let _ = write!(
                    out,
                    r#"<p:cxnSp><p:nvCxnSpPr><p:cNvPr id="{id}" name="Connector {id}"/><p:cNvCxnSpPr/><p:nvPr/></p:nvCxnSpPr><p:spPr>{}<a:prstGeom prst="line"><a:avLst/></a:prstGeom><a:ln w="12700"><a:solidFill><a:srgbClr val="404040"/></a:solidFill></a:ln></p:spPr></p:cxnSp>"#,
                    xfrm("a:xfrm", frame)
                );
            }
            Element::Chart { frame, workbook } => {
                self.charts += 1;
                let k = self.charts;
                let id = w.id();
                let rid = w.rel("chart", &format!("../charts/chart{k}.xml"), false);
                let _ = write!(
                    out,
                    r#"<p:graphicFrame><p:nvGraphicFramePr><p:cNvPr id="{id}" name="Chart {id}"/><p:cNvGraphicFramePr/><p:nvPr/></p:nvGraphicFramePr>{}<a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/chart"><c:chart xmlns:c="http://schemas.openxmlformats.org/drawingml/2006/chart" r:id="{rid}"/></a:graphicData></a:graphic></p:graphicFrame>"#,
                    xfrm("p:xfrm", frame)
                );
                self.chart_part(k, *workbook);
            }
            Element::Group { frame, children } => {
                let id = w.id();
                let _ = write!(
                    out,
                    r#"<p:grpSp><p:nvGrpSpPr><p:cNvPr id="{id}" name="Group {id}"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr><p:grpSpPr><a:xfrm><a:off x="{x}" y="{y}"/><a:ext cx="{cx}" cy="{cy}"/><a:chOff x="{x}" y="{y}"/><a:chExt cx="{cx}" cy="{cy}"/></a:xfrm></p:grpSpPr>"#,
                    x = frame.x,
                    y = frame.y,
                    cx = frame.cx,
                    cy = frame.cy
                );
                for c in children {
                    self.element(c, w, out);
                }
                out.push_str("</p:grpSp>");
            }
            Element::Video { frame, link } => {
                let id = w.id();
                let (target, external) = match link {
                    MediaLink::Embedded => {
                        self.put("ppt/media/media1.mp4", b"\0\0\0\x18ftypmp42".to_vec());
                        ("../media/media1.mp4".to_string(), false)
                    }
                    MediaLink::External(path) => (path.clone(), true),
                };
                let video = w.rel("video", &target, external);
                w.rel("media", &target, external);
                let poster = w.rel("image", "../media/image1.png", false);
                let _ = write!(
                    out,
                    r#"<p:pic><p:nvPicPr><p:cNvPr id="{id}" name="Video {id}"/><p:cNvPicPr/><p:nvPr><a:videoFile r:link="{video}"/></p:nvPr></p:nvPicPr><p:blipFill><a:blip r:embed="{poster}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill><p:spPr>{}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>"#,
                    xfrm("a:xfrm", frame)
                );
            }
        }
    }

    fn chart_part(&mut self, k: usize, workbook: bool) {
        let name = format!("ppt/charts/chart{k}.xml");
        let mut xml = String::from(
            r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><c:chartSpace xmlns:c="http://schemas.openxmlformats.org/drawingml/2006/chart" xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships"><c:chart><c:autoTitleDeleted val="1"/><c:plotArea><c:layout/><c:barChart><c:barDir val="col"/><c:grouping val="clustered"/><c:varyColors val="0"/><c:ser><c:idx val="0"/><c:order val="0"/><c:tx><c:strRef><c:f>Sheet1!$B$1</c:f><c:strCache><c:ptCount val="1"/><c:pt idx="0"><c:v>Revenue</c:v></c:pt></c:strCache></c:strRef></c:tx><c:cat><c:strRef><c:f>Sheet1!$A$2:$A$4</c:f><c:strCache><c:ptCount val="3"/><c:pt idx="0"><c:v>Q1</c:v></c:pt><c:pt idx="1"><c:v>Q2</c:v></c:pt><c:pt idx="2"><c:v>Q3</c:v></c:pt></c:strCache></c:strRef></c:cat><c:val><c:numRef><c:f>Sheet1!$B$2:$B$4</c:f><c:numCache><c:formatCode>General</c:formatCode><c:ptCount val="3"/><c:pt idx="0"><c:v>4.3</c:v></c:pt><c:pt idx="1"><c:v>2.5</c:v></c:pt><c:pt idx="2"><c:v>3.5</c:v></c:pt></c:numCache></c:numRef></c:val></c:ser><c:axId val="111"/><c:axId val="222"/></c:barChart><c:catAx><c:axId val="111"/><c:scaling><c:orientation val="minMax"/></c:scaling><c:delete val="0"/><c:axPos val="b"/><c:crossAx val="222"/></c:catAx><c:valAx><c:axId val="222"/><c:scaling><c:orientation val="minMax"/></c:scaling><c:delete val="0"/><c:axPos val="l"/><c:crossAx val="111"/></c:valAx></c:plotArea><c:plotVisOnly val="1"/></c:chart>"#,
        );
        if workbook {
            xml.push_str(r#"<c:externalData r:id="rId1"><c:autoUpdate val="0"/></c:externalData>"#);
            let wb = format!("ppt/embeddings/Microsoft_Excel_Worksheet{k}.xlsx");
            self.put(&wb, minimal_xlsx());
            let mut w = PartWriter::new();
            w.rel("package", &format!("../embeddings/Microsoft_Excel_Worksheet{k}.xlsx"), false);
            self.put(&format!("ppt/charts/_rels/chart{k}.xml.rels"), w.rels_xml());
        }
        xml.push_str("</c:chartSpace>");
        self.put(&name, xml);
        self.overrides.push((
            format!("/{name}"),
            "application/vnd.openxmlformats-officedocument.drawingml.chart+xml",
        ));
    }
}

fn sp_tree(body: &str) -> String {
    format!(
        r#"<p:cSld><p:spTree><p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr><p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/><a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>{body}</p:spTree></p:cSld>"#
    )
}

const XML_HEAD: &str = r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#;

const THEME: &str = r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><a:theme xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" name="Plain"><a:themeElements><a:clrScheme name="Plain"><a:dk1><a:srgbClr val="000000"/></a:dk1><a:lt1><a:srgbClr val="FFFFFF"/></a:lt1><a:dk2><a:srgbClr val="1F2937"/></a:dk2><a:lt2><a:srgbClr val="F3F4F6"/></a:lt2><a:accent1><a:srgbClr val="2563EB"/></a:accent1><a:accent2><a:srgbClr val="DC2626"/></a:accent2><a:accent3><a:srgbClr val="16A34A"/></a:accent3><a:accent4><a:srgbClr val="CA8A04"/></a:accent4><a:accent5><a:srgbClr val="9333EA"/></a:accent5><a:accent6><a:srgbClr val="0891B2"/></a:accent6><a:hlink><a:srgbClr val="2563EB"/></a:hlink><a:folHlink><a:srgbClr val="7C3AED"/></a:folHlink></a:clrScheme><a:fontScheme name="Plain"><a:majorFont><a:latin typeface="Calibri"/><a:ea typeface=""/><a:cs typeface=""/></a:majorFont><a:minorFont><a:latin typeface="Calibri"/><a:ea typeface=""/><a:cs typeface=""/></a:minorFont></a:fontScheme><a:fmtScheme name="Plain"><a:fillStyleLst><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:fillStyleLst><a:lnStyleLst><a:ln w="6350"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln><a:ln w="12700"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln><a:ln w="19050"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln></a:lnStyleLst><a:effectStyleLst><a:effectStyle><a:effectLst/></a:effectStyle><a:effectStyle><a:effectLst/></a:effectStyle><a:effectStyle><a:effectLst/></a:effectStyle></a:effectStyleLst><a:bgFillStyleLst><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:bgFillStyleLst></a:fmtScheme></a:themeElements></a:theme>"#;

const CLR_MAP: &str = r#"<p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" accent3="accent3" accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" folHlink="folHlink"/>"#;

fn zip_members(members: &BTreeMap<String, Vec<u8>>) -> Result<Vec<u8>> {
    let mut zw = ZipWriter::new(Cursor::new(Vec::new()));
    let opts = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default());
    // The content-types part conventionally leads the archive.
    let ordered = members
        .iter()
        .filter(|(n, _)| n.as_str() == "[Content_Types].xml")
        .chain(members.iter().filter(|(n, _)| n.as_str() != "[Content_Types].xml"));
    for (name, data) in ordered {
        zw.start_file(name.as_str(), opts)
            .map_err(|e| Error::InvalidInput(format!("zip write {name}: {e}")))?;
        zw.write_all(data)
            .map_err(|e| Error::InvalidInput(format!("zip write {name}: {e}")))?;
    }
    let cursor = zw
        .finish()
        .map_err(|e| Error::InvalidInput(format!("zip finish: {e}")))?;
    Ok(cursor.into_inner())
}

fn minimal_xlsx() -> Vec<u8> {
    let mut m = BTreeMap::new();
    m.insert("[Content_Types].xml".to_string(), br#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types"><Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/><Default Extension="xml" ContentType="application/xml"/><Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/><Override PartName="/xl/worksheets/sheet1.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/></Types>"#.to_vec());
    m.insert("_rels/.rels".to_string(), br#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships"><Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/></Relationships>"#.to_vec());
    m.insert("xl/workbook.xml".to_string(), br#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships"><sheets><sheet name="Sheet1" sheetId="1" r:id="rId1"/></sheets></workbook>"#.to_vec());
    m.insert("xl/_rels/workbook.xml.rels".to_string(), br#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships"><Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" Target="worksheets/sheet1.xml"/></Relationships>"#.to_vec());
    m.insert("xl/worksheets/sheet1.xml".to_string(), br#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main"><sheetData><row r="1"><c r="A1" t="inlineStr"><is><t>Quarter</t></is></c><c r="B1" t="inlineStr"><is><t>Revenue</t></is></c></row><row r="2"><c r="A2" t="inlineStr"><is><t>Q1</t></is></c><c r="B2"><v>4.3</v></c></row><row r="3"><c r="A3" t="inlineStr"><is><t>Q2</t></is></c><c r="B3"><v>2.5</v></c></row><row r="4"><c r="A4" t="inlineStr"><is><t>Q3</t></is></c><c r="B4"><v>3.5</v></c></row></sheetData></worksheet>"#.to_vec());
    zip_members(&m).expect("in-memory zip")
}

fn tiny_png() -> Vec<u8> {
    let img = image::RgbImage::from_fn(4, 4, |x, y| image::Rgb([(x * 60) as u8, (y * 60) as u8, 128]));
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png).expect("png encode");
    out.into_inner()
}

const TRANSITION: &str = r#"<p:transition spd="med"><p:fade/></p:transition>"#;

fn timing(target_id: u32) -> String {
    format!(
        r#"<p:timing><p:tnLst><p:par><p:cTn id="1" dur="indefinite" restart="never" nodeType="tmRoot"><p:childTnLst><p:seq concurrent="1" nextAc="seek"><p:cTn id="2" dur="indefinite" nodeType="mainSeq"><p:childTnLst><p:par><p:cTn id="3" fill="hold"><p:stCondLst><p:cond delay="indefinite"/></p:stCondLst><p:childTnLst><p:par><p:cTn id="4" presetID="10" presetClass="entr" presetSubtype="0" fill="hold" nodeType="clickEffect"><p:childTnLst><p:set><p:cBhvr><p:cTn id="5" dur="1" fill="hold"/><p:tgtEl><p:spTgt spid="{target_id}"/></p:tgtEl><p:attrNameLst><p:attrName>style.visibility</p:attrName></p:attrNameLst></p:cBhvr><p:to><p:strVal val="visible"/></p:to></p:set><p:animEffect transition="in" filter="fade"><p:cBhvr><p:cTn id="6" dur="500"/><p:tgtEl><p:spTgt spid="{target_id}"/></p:tgtEl></p:cBhvr></p:animEffect></p:childTnLst></p:cTn></p:par></p:childTnLst></p:cTn></p:par></p:childTnLst></p:cTn><p:prevCondLst><p:cond evt="onPrev" delay="0"><p:tgtEl><p:sldTgt/></p:tgtEl></p:cond></p:prevCondLst><p:nextCondLst><p:cond evt="onNext" delay="0"><p:tgtEl><p:sldTgt/></p:tgtEl></p:cond></p:nextCondLst></p:seq></p:childTnLst></p:cTn></p:par></p:tnLst></p:timing>"#
    )
}

impl DeckSpec {
    pub fn build(&self) -> Result<Vec<u8>> {
        let mut pkg = Package {
            members: BTreeMap::new(),
            charts: 0,
            overrides: Vec::new(),
        };
        pkg.put("ppt/media/image1.png", tiny_png());
        pkg.put("ppt/theme/theme1.xml", THEME);

        // Master and its single layout.
        let mut mw = PartWriter::new();
        let mut body = String::new();
        for e in &self.master_elements {
            pkg.element(e, &mut mw, &mut body);
        }
        let layout_rid = mw.rel("slideLayout", "../slideLayouts/slideLayout1.xml", false);
        mw.rel("theme", "../theme/theme1.xml", false);
        pkg.put(
            "ppt/slideMasters/slideMaster1.xml",
            format!(
                r#"{XML_HEAD}<p:sldMaster {NS_DECL}>{}{CLR_MAP}<p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="{layout_rid}"/></p:sldLayoutIdLst></p:sldMaster>"#,
                sp_tree(&body)
            ),
        );
        pkg.put("ppt/slideMasters/_rels/slideMaster1.xml.rels", mw.rels_xml());
        pkg.put(
            "ppt/slideLayouts/slideLayout1.xml",
            format!(
                r#"{XML_HEAD}<p:sldLayout {NS_DECL} type="blank" preserve="1">{}<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>"#,
                sp_tree("")
            ),
        );
        let mut lw = PartWriter::new();
        lw.rel("slideMaster", "../slideMasters/slideMaster1.xml", false);
        pkg.put("ppt/slideLayouts/_rels/slideLayout1.xml.rels", lw.rels_xml());

        let mut pw = PartWriter::new();
        let master_rid = pw.rel("slideMaster", "slideMasters/slideMaster1.xml", false);
        let mut sld_ids = String::new();
        for (i, slide) in self.slides.iter().enumerate() {
            let n = i + 1;
            let mut w = PartWriter::new();
            w.rel("slideLayout", "../slideLayouts/slideLayout1.xml", false);
            let mut body = String::new();
            for e in &slide.elements {
                pkg.element(e, &mut w, &mut body);
            }
            let mut xml = format!(r#"{XML_HEAD}<p:sld {NS_DECL}>{}<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr>"#, sp_tree(&body));
            if slide.transition {
                xml.push_str(TRANSITION);
            }
            if slide.animation {
                xml.push_str(&timing(2));
            }
            xml.push_str("</p:sld>");
            pkg.put(&format!("ppt/slides/slide{n}.xml"), xml);
            pkg.put(&format!("ppt/slides/_rels/slide{n}.xml.rels"), w.rels_xml());
            pkg.overrides.push((
                format!("/ppt/slides/slide{n}.xml"),
                "application/vnd.openxmlformats-officedocument.presentationml.slide+xml",
            ));
            let rid = pw.rel("slide", &format!("slides/slide{n}.xml"), false);
            let _ = write!(sld_ids, r#"<p:sldId id="{}" r:id="{rid}"/>"#, 255 + n);
        }
        pw.rel("theme", "theme/theme1.xml", false);
        pkg.put(
            "ppt/presentation.xml",
            format!(
                r#"{XML_HEAD}<p:presentation {NS_DECL} saveSubsetFonts="1"><p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="{master_rid}"/></p:sldMasterIdLst><p:sldIdLst>{sld_ids}</p:sldIdLst><p:sldSz cx="{SLIDE_W}" cy="{SLIDE_H}"/><p:notesSz cx="6858000" cy="9144000"/></p:presentation>"#
            ),
        );
        pkg.put("ppt/_rels/presentation.xml.rels", pw.rels_xml());

        let mut root = PartWriter::new();
        root.rel("officeDocument", "ppt/presentation.xml", false);
        pkg.put("_rels/.rels", root.rels_xml());

        let mut ct = String::from(
            r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?><Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types"><Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/><Default Extension="xml" ContentType="application/xml"/><Default Extension="png" ContentType="image/png"/><Default Extension="mp4" ContentType="video/mp4"/><Default Extension="xlsx" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet"/><Override PartName="/ppt/presentation.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"/><Override PartName="/ppt/slideMasters/slideMaster1.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml"/><Override PartName="/ppt/slideLayouts/slideLayout1.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml"/><Override PartName="/ppt/theme/theme1.xml" ContentType="application/vnd.openxmlformats-officedocument.theme+xml"/>"#,
        );
        for (part, ty) in &pkg.overrides {
            let _ = write!(ct, r#"<Override PartName="{part}" ContentType="{ty}"/>"#);
        }
        ct.push_str("</Types>");
        pkg.put("[Content_Types].xml", ct);
        zip_members(&pkg.members)
    }
}

/// Rewrites one member of a package, keeping every other byte-identical in
/// content.
pub fn rewrite_member(
    package: &[u8],
    name: &str,
    edit: impl FnOnce(&str) -> String,
) -> Result<Vec<u8>> {
    let mut archive = ZipArchive::new(Cursor::new(package))
        .map_err(|e| Error::CorruptPackage(e.to_string()))?;
    let mut members = BTreeMap::new();
    for i in 0..archive.len() {
        let mut f = archive.by_index(i).map_err(|e| Error::CorruptPackage(e.to_string()))?;
        let n = f.name().map_err(|e| Error::CorruptPackage(e.to_string()))?.to_string();
        let mut buf = Vec::new();
        f.read_to_end(&mut buf).map_err(|e| Error::CorruptPackage(e.to_string()))?;
        members.insert(n, buf);
    }
    let old = members
        .get(name)
        .ok_or_else(|| Error::InvalidInput(format!("package has no member {name}")))?;
    let text = String::from_utf8(old.clone())
        .map_err(|_| Error::InvalidInput(format!("{name} is not text")))?;
    members.insert(name.to_string(), edit(&text).into_bytes());
    zip_members(&members)
}

/// Points the first chart's workbook relationship at a member that does not
/// exist.
pub fn break_chart_workbook(package: &[u8]) -> Result<Vec<u8>> {
    rewrite_member(package, "ppt/charts/_rels/chart1.xml.rels", |s| {
        s.replace("Microsoft_Excel_Worksheet1.xlsx", "missing_workbook.xlsx")
    })
}

fn text(x: f64, y: f64, w: f64, h: f64, paragraphs: &[&str]) -> Element {
    Element::Text {
        frame: rect(x, y, w, h),
        paragraphs: paragraphs.iter().map(|s| s.to_string()).collect(),
    }
}

fn shape(x: f64, y: f64, w: f64, h: f64, geometry: &str, fill: &str) -> Element {
    Element::Shape {
        frame: rect(x, y, w, h),
        geometry: geometry.into(),
        fill: fill.into(),
    }
}

fn icon_group(x: f64, y: f64) -> Element {
    Element::Group {
        frame: rect(x, y, 0.12, 0.08),
        children: vec![
            shape(x, y, 0.05, 0.08, "ellipse", "2563EB"),
            shape(x + 0.07, y, 0.05, 0.08, "triangle", "16A34A"),
        ],
    }
}

/// Three well-structured slides that pass the text, vector and structure
/// gates.
fn structured_slides() -> Vec<SlideSpec> {
    (0..3)
        .map(|i| {
            let f = i as f64;
            SlideSpec {
                elements: vec![
                    text(0.06, 0.06, 0.8, 0.12, &[&format!("Section {}", i + 1)]),
                    text(
                        0.06,
                        0.22,
                        0.5,
                        0.5,
                        &["First point of the argument", "Second point with detail", "Closing remark"],
                    ),
                    shape(0.62 + 0.02 * f, 0.25 + 0.1 * f, 0.25, 0.2, "roundRect", "DBEAFE"),
                    icon_group(0.62, 0.7 - 0.05 * f),
                ],
                ..Default::default()
            }
        })
        .collect()
}

fn master_background() -> Vec<Element> {
    vec![shape(0.0, 0.94, 1.0, 0.06, "rect", "1F2937")]
}

fn with_chart(mut slides: Vec<SlideSpec>, workbook: bool) -> Vec<SlideSpec> {
    slides[1].elements.push(Element::Chart {
        frame: rect(0.55, 0.2, 0.4, 0.45),
        workbook,
    });
    slides
}

/// A deliberately tiny PDF: the static route never looks inside it.
pub const MINIMAL_PDF: &[u8] = b"%PDF-1.4\n1 0 obj<</Type/Catalog/Pages 2 0 R>>endobj\n2 0 obj<</Type/Pages/Kids[]/Count 0>>endobj\ntrailer<</Root 1 0 R>>\n%%EOF\n";

/// Every fixture with its file name and the level it should classify to.
pub fn fixture_set() -> Result<Vec<(String, Vec<u8>, u8)>> {
    let mut out = vec![("l0_static.pdf".to_string(), MINIMAL_PDF.to_vec(), 0)];
    let mut add = |name: &str, spec: DeckSpec, level: u8| -> Result<()> {
        out.push((name.to_string(), spec.build()?, level));
        Ok(())
    };

    let text_over_image = (0..3)
        .map(|i| SlideSpec {
            elements: vec![
                Element::Picture {
                    frame: rect(0.0, 0.0, 1.0, 1.0),
                },
                text(0.08, 0.1, 0.8, 0.15, &[&format!("Headline {}", i + 1)]),
                text(0.08, 0.3, 0.6, 0.4, &["Overlaid caption text", "A second line of caption"]),
            ],
            ..Default::default()
        })
        .collect();
    add(
        "l1_text_over_image.pptx",
        DeckSpec {
            slides: text_over_image,
            master_elements: Vec::new(),
        },
        1,
    )?;

    let mut hardcoded = structured_slides();
    for s in &mut hardcoded {
        s.elements.push(shape(0.9, 0.02, 0.08, 0.08, "ellipse", "DC2626"));
    }
    add(
        "l2_hardcoded_logo.pptx",
        DeckSpec {
            slides: hardcoded,
            master_elements: master_background(),
        },
        2,
    )?;

    let mut mimicry = structured_slides();
    for (k, h) in [0.2, 0.35, 0.28].iter().enumerate() {
        mimicry[1].elements.push(shape(0.6 + 0.1 * k as f64, 0.7 - h, 0.07, *h, "rect", "2563EB"));
    }
    add(
        "l3_geometric_chart.pptx",
        DeckSpec {
            slides: mimicry,
            master_elements: master_background(),
        },
        3,
    )?;

    add(
        "l4_native_chart.pptx",
        DeckSpec {
            slides: with_chart(structured_slides(), true),
            master_elements: master_background(),
        },
        4,
    )?;

    let mut cinematic = with_chart(structured_slides(), true);
    for s in &mut cinematic {
        s.transition = true;
    }
    cinematic[0].animation = true;
    add(
        "l5_cinematic.pptx",
        DeckSpec {
            slides: cinematic,
            master_elements: master_background(),
        },
        5,
    )?;

    // Gate-specific failures.
    let mut fragmented = structured_slides();
    for k in 0..6 {
        fragmented[0]
            .elements
            .push(text(0.06, 0.3 + 0.07 * k as f64, 0.4, 0.05, &["one line of a split paragraph"]));
    }
    add(
        "t1_fragmented.pptx",
        DeckSpec {
            slides: fragmented,
            master_elements: master_background(),
        },
        0,
    )?;

    let rasterized = (0..3)
        .map(|_| SlideSpec {
            elements: vec![Element::Picture {
                frame: rect(0.0, 0.0, 1.0, 1.0),
            }],
            ..Default::default()
        })
        .collect();
    add(
        "t1_rasterized.pptx",
        DeckSpec {
            slides: rasterized,
            master_elements: Vec::new(),
        },
        0,
    )?;

    let mut loose = structured_slides();
    for k in 0..30 {
        let (r, c) = (k / 6, k % 6);
        loose[2]
            .elements
            .push(shape(0.05 + 0.15 * c as f64, 0.3 + 0.12 * r as f64, 0.05, 0.05, "star5", "CA8A04"));
    }
    loose[2].elements.retain(|e| !matches!(e, Element::Group { .. }));
    add(
        "t3_loose_shapes.pptx",
        DeckSpec {
            slides: loose,
            master_elements: master_background(),
        },
        2,
    )?;

    add(
        "t4_broken_workbook.pptx",
        DeckSpec {
            slides: with_chart(structured_slides(), false),
            master_elements: master_background(),
        },
        3,
    )?;

    let mut external = with_chart(structured_slides(), true);
    for s in &mut external {
        s.transition = true;
    }
    external[2].elements.push(Element::Video {
        frame: rect(0.6, 0.2, 0.35, 0.3),
        link: MediaLink::External("file:///C:/Users/presenter/Videos/intro.mp4".into()),
    });
    add(
        "t5_external_video.pptx",
        DeckSpec {
            slides: external,
            master_elements: master_background(),
        },
        4,
    )?;

    let mut embedded = with_chart(structured_slides(), true);
    embedded[0].animation = true;
    embedded[2].elements.push(Element::Video {
        frame: rect(0.6, 0.2, 0.35, 0.3),
        link: MediaLink::Embedded,
    });
    add(
        "l5_embedded_video.pptx",
        DeckSpec {
            slides: embedded,
            master_elements: master_background(),
        },
        5,
    )?;

    Ok(out)
}
