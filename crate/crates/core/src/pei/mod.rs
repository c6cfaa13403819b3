//! Editability classification of presentation deliverables (levels L0 to L5).
//!
//! Inputs are triaged by format first. Static documents stop at L0 and web
//! links are recognised but left unevaluated. Native packages run the five
//! gates in order and the level is the number of leading gates passed.

pub mod fixtures;
pub mod gates;
pub mod package;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use gates::{
    gate_t1_text_integrity, gate_t2_vector, gate_t3_structure, gate_t4_parametric,
    gate_t5_cinematic, Evidence, Gate, GateResult, GateStatus, PeiConfig,
};
pub use package::{open_package, PresentationPackage};

use crate::error::{Error, Result};

const STATIC_EXT: [&str; 4] = ["pdf", "png", "jpg", "jpeg"];
const NATIVE_EXT: [&str; 2] = ["pptx", "potx"];

pub const WEB_NOTE: &str = "not evaluable: requires interactive inspection";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriageRoute {
    Static,
    Web,
    Native,
}

impl TriageRoute {
    pub fn max_level(self) -> u8 {
        match self {
            TriageRoute::Static => 0,
            TriageRoute::Web => 2,
            TriageRoute::Native => 5,
        }
    }
}

fn supported() -> String {
    let mut all: Vec<&str> = STATIC_EXT.iter().chain(&NATIVE_EXT).copied().collect();
    all.push("http(s) URL");
    all.join(", ")
}

/// Routes an input by URL scheme, extension, or failing those, the leading
/// bytes.
pub fn triage(input: &str, head: Option<&[u8]>) -> Result<TriageRoute> {
    let lower = input.trim().to_ascii_lowercase();
    if lower.starts_with("http://") || lower.starts_with("https://") {
        return Ok(TriageRoute::Web);
    }
    let ext = Path::new(&lower)
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("");
    if STATIC_EXT.contains(&ext) {
        return Ok(TriageRoute::Static);
    }
    if NATIVE_EXT.contains(&ext) {
        return Ok(TriageRoute::Native);
    }
    if let Some(h) = head {
        if h.starts_with(b"%PDF")
            || h.starts_with(b"\x89PNG\r\n\x1a\n")
            || h.starts_with(&[0xFF, 0xD8, 0xFF])
        {
            return Ok(TriageRoute::Static);
        }
        if h.starts_with(b"PK\x03\x04") && open_package(h).is_ok() {
            return Ok(TriageRoute::Native);
        }
    }
    Err(Error::UnsupportedFormat {
        found: if ext.is_empty() { input.to_string() } else { ext.to_string() },
        supported: supported(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeiReport {
    pub input: String,
    pub route: TriageRoute,
    pub max_level: u8,
    pub evaluable: bool,
    pub note: Option<String>,
    /// `None` only for inputs that cannot be evaluated.
    pub level: Option<u8>,
    pub gates: Vec<GateResult>,
    /// Dangling relationships and malformed optional parts.
    pub defects: Vec<String>,
}

fn unevaluated_gates() -> Vec<GateResult> {
    Gate::ALL.iter().map(|&g| GateResult::not_evaluated(g)).collect()
}

/// Runs the gates in order, marking everything after the first failure as
/// not evaluated.
pub fn run_gates(pkg: &PresentationPackage, cfg: &PeiConfig) -> (u8, Vec<GateResult>) {
    let mut results = Vec::with_capacity(5);
    let mut level = 0u8;
    let mut knocked_out = false;
    for gate in Gate::ALL {
        if knocked_out {
            results.push(GateResult::not_evaluated(gate));
            continue;
        }
        let r = match gate {
            Gate::T1 => gate_t1_text_integrity(pkg, cfg),
            Gate::T2 => gate_t2_vector(pkg, cfg),
            Gate::T3 => gate_t3_structure(pkg, cfg),
            Gate::T4 => gate_t4_parametric(pkg),
            Gate::T5 => gate_t5_cinematic(pkg),
        };
        if r.passed() {
            level += 1;
        } else {
            knocked_out = true;
        }
        results.push(r);
    }
    (level, results)
}

fn early_report(input: &str, route: TriageRoute) -> PeiReport {
    let (evaluable, level, note) = match route {
        TriageRoute::Static => (true, Some(0), Some("static format: no editable structure".to_string())),
        _ => (false, None, Some(WEB_NOTE.to_string())),
    };
    PeiReport {
        input: input.to_string(),
        route,
        max_level: route.max_level(),
        evaluable,
        note,
        level,
        gates: unevaluated_gates(),
        defects: Vec::new(),
    }
}

/// Classifies an in-memory deliverable. `name` supplies the extension.
pub fn evaluate_pei_bytes(name: &str, bytes: &[u8], cfg: &PeiConfig) -> Result<PeiReport> {
    cfg.validate()?;
    let route = triage(name, Some(bytes))?;
    if route != TriageRoute::Native {
        return Ok(early_report(name, route));
    }
    let pkg = open_package(bytes)?;
    let (level, gates) = run_gates(&pkg, cfg);
    Ok(PeiReport {
        input: name.to_string(),
        route,
        max_level: route.max_level(),
        evaluable: true,
        note: None,
        level: Some(level.min(route.max_level())),
        gates,
        defects: pkg.defects,
    })
}

/// Classifies a file path or URL. Static files are never read.
pub fn evaluate_pei(input: &str, cfg: &PeiConfig) -> Result<PeiReport> {
    cfg.validate()?;
    match triage(input, None) {
        Ok(TriageRoute::Native) => {}
        Ok(route) => return Ok(early_report(input, route)),
        Err(Error::UnsupportedFormat { .. }) if Path::new(input).is_file() => {}
        Err(e) => return Err(e),
    }
    let bytes = std::fs::read(input).map_err(|e| Error::io(input, e))?;
    evaluate_pei_bytes(input, &bytes, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triage_routes() {
        assert_eq!(triage("deck.pdf", None).unwrap(), TriageRoute::Static);
        assert_eq!(triage("Deck.JPEG", None).unwrap(), TriageRoute::Static);
        assert_eq!(triage("deck.pptx", None).unwrap(), TriageRoute::Native);
        assert_eq!(triage("theme.potx", None).unwrap(), TriageRoute::Native);
        assert_eq!(triage("https://example.org/d", None).unwrap(), TriageRoute::Web);
        assert_eq!(triage("blob", Some(b"%PDF-1.7")).unwrap(), TriageRoute::Static);
        match triage("deck.key", None) {
            Err(Error::UnsupportedFormat { found, supported }) => {
                assert_eq!(found, "key");
                assert!(supported.contains("pptx") && supported.contains("pdf"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn max_levels() {
        assert_eq!(TriageRoute::Static.max_level(), 0);
        assert_eq!(TriageRoute::Web.max_level(), 2);
        assert_eq!(TriageRoute::Native.max_level(), 5);
    }

    #[test]
    fn static_path_is_never_opened() {
        let r = evaluate_pei("/definitely/not/here/deck.pdf", &PeiConfig::default()).unwrap();
        assert_eq!(r.level, Some(0));
        assert!(r.gates.iter().all(|g| g.status == GateStatus::NotEvaluated));
    }

    #[test]
    fn web_is_not_evaluable() {
        let r = evaluate_pei("https://slides.example.com/x", &PeiConfig::default()).unwrap();
        assert!(!r.evaluable);
        assert_eq!(r.level, None);
        assert_eq!(r.max_level, 2);
        assert_eq!(r.note.as_deref(), Some(WEB_NOTE));
    }

    #[test]
    fn fixtures_classify_to_expected_levels() {
        let cfg = PeiConfig::default();
        for (name, bytes, expected) in fixtures::fixture_set().unwrap() {
            let r = evaluate_pei_bytes(&name, &bytes, &cfg).unwrap();
            assert_eq!(r.level, Some(expected), "{name}: {:#?}", r.gates);
            let lvl = expected as usize;
            for (i, g) in r.gates.iter().enumerate() {
                let want = if i < lvl {
                    GateStatus::Passed
                } else if i == lvl && r.route == TriageRoute::Native {
                    GateStatus::Failed
                } else {
                    GateStatus::NotEvaluated
                };
                assert_eq!(g.status, want, "{name} gate {i}");
                if g.status == GateStatus::Failed {
                    assert!(!g.evidence.is_empty());
                }
            }
        }
    }

    #[test]
    fn broken_workbook_drops_to_three() {
        let set = fixtures::fixture_set().unwrap();
        let l5 = &set.iter().find(|f| f.0 == "l5_cinematic.pptx").unwrap().1;
        let broken = fixtures::break_chart_workbook(l5).unwrap();
        let r = evaluate_pei_bytes("broken.pptx", &broken, &PeiConfig::default()).unwrap();
        assert_eq!(r.level, Some(3));
        assert_eq!(r.gates[4].status, GateStatus::NotEvaluated);
    }

    #[test]
    fn fixture_bytes_are_deterministic() {
        let a = fixtures::fixture_set().unwrap();
        let b = fixtures::fixture_set().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn minimal_package_inventory() {
        let spec = fixtures::DeckSpec {
            slides: vec![fixtures::SlideSpec::default()],
            master_elements: Vec::new(),
        };
        let pkg = open_package(&spec.build().unwrap()).unwrap();
        assert_eq!(pkg.slides.len(), 1);
        assert_eq!(pkg.layouts.len(), 1);
        assert_eq!(pkg.masters.len(), 1);
        assert!(pkg.defects.is_empty(), "{:?}", pkg.defects);
    }
}
