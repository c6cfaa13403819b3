//! Python bindings. Structured results cross the boundary as JSON strings,
//! so callers decode them with `json.loads`.

use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use deckeval::report::{emit_report, evaluate_path, Config, ReportFormat};
use deckeval::Error;

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn config(path: Option<&str>, profile: Option<&str>) -> deckeval::Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::load(Path::new(p))?,
        None => Config::default(),
    };
    if let Some(name) = profile {
        cfg.apply_profile(name)?;
    }
    Ok(cfg)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn eval_deck(
    deck: &str,
    layout_dir: Option<&str>,
    pptx: Option<&str>,
    config_path: Option<&str>,
    profile: Option<&str>,
    format: &str,
) -> deckeval::Result<String> {
    let cfg = config(config_path, profile)?;
    let format: ReportFormat = format.parse()?;
    let report = evaluate_path(
        Path::new(deck),
        layout_dir.map(Path::new),
        pptx.map(Path::new),
        &cfg,
    )?;
    Ok(String::from_utf8(emit_report(&report, format)).expect("reports are UTF-8"))
}

/// Evaluates a rendered deck (image directory or manifest) and returns the
/// report as JSON, or as a one-row CSV with `format="table"`.
#[pyfunction]
#[pyo3(signature = (deck, layout_dir=None, pptx=None, config=None, profile=None, format="struct"))]
fn evaluate_deck(
    py: Python<'_>,
    deck: &str,
    layout_dir: Option<&str>,
    pptx: Option<&str>,
    config: Option<&str>,
    profile: Option<&str>,
    format: &str,
) -> PyResult<String> {
    py.detach(|| eval_deck(deck, layout_dir, pptx, config, profile, format))
        .map_err(to_py)
}

/// Classifies a file path or URL on the L0 to L5 editability scale.
#[pyfunction]
#[pyo3(signature = (input, config=None))]
fn evaluate_pei(py: Python<'_>, input: &str, config: Option<&str>) -> PyResult<String> {
    py.detach(|| {
        let cfg = self::config(config, None)?;
        deckeval::pei::evaluate_pei(input, &cfg.pei).map(|r| to_json(&r))
    })
    .map_err(to_py)
}

/// Like `evaluate_pei`, for in-memory bytes; `name` supplies the extension.
#[pyfunction]
fn evaluate_pei_bytes(py: Python<'_>, name: &str, data: &[u8]) -> PyResult<String> {
    py.detach(|| {
        deckeval::pei::evaluate_pei_bytes(name, data, &deckeval::pei::PeiConfig::default())
            .map(|r| to_json(&r))
    })
    .map_err(to_py)
}

/// Writes the editability fixture packages; returns `(file name, level)`.
#[pyfunction]
fn write_fixtures(dir: PathBuf) -> PyResult<Vec<(String, u8)>> {
    std::fs::create_dir_all(&dir).map_err(|e| to_py(Error::io(&dir, e)))?;
    let mut out = Vec::new();
    for (name, bytes, level) in deckeval::pei::fixtures::fixture_set().map_err(to_py)? {
        let path = dir.join(&name);
        std::fs::write(&path, bytes).map_err(|e| to_py(Error::io(&path, e)))?;
        out.push((name, level));
    }
    Ok(out)
}

/// Colourfulness of a packed RGB buffer.
#[pyfunction]
fn colorfulness(width: usize, height: usize, rgb: &[u8]) -> PyResult<f64> {
    let img = deckeval::SlideImage::from_rgb_bytes(width, height, rgb).map_err(to_py)?;
    Ok(deckeval::engagement::colorfulness(&img))
}

#[pyfunction]
fn contrast_score(ratio: f64) -> PyResult<f64> {
    deckeval::usability::contrast_score(ratio).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (slide_scores, w1=5.0, w2=30.0))]
fn deck_harmony_score(slide_scores: Vec<f64>, w1: f64, w2: f64) -> PyResult<f64> {
    deckeval::harmony::deck_harmony_score(&slide_scores, w1, w2).map_err(to_py)
}

#[pyfunction]
fn rmssd(scores: Vec<f64>) -> PyResult<f64> {
    deckeval::rhythm::rmssd(&scores).map(|r| r.value).map_err(to_py)
}

/// Spearman correlation of two score vectors, ties averaged.
#[pyfunction]
fn spearman(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    use deckeval::alignment::{average_ranks, spearman};
    spearman(&average_ranks(&a, true), &average_ranks(&b, true)).map_err(to_py)
}

/// Validates quiz bank JSON text, optionally against its source document.
#[pyfunction]
#[pyo3(signature = (bank, source=None))]
fn validate_quizbank(bank: &str, source: Option<&str>) -> PyResult<String> {
    let doc = deckeval::quiz::parse_quizbank(bank).map_err(to_py)?;
    Ok(to_json(&deckeval::quiz::validate_quizbank(&doc, source)))
}

#[pymodule]
fn deckeval_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", deckeval::report::VERSION)?;
    m.add_function(wrap_pyfunction!(evaluate_deck, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_pei, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_pei_bytes, m)?)?;
    m.add_function(wrap_pyfunction!(write_fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(colorfulness, m)?)?;
    m.add_function(wrap_pyfunction!(contrast_score, m)?)?;
    m.add_function(wrap_pyfunction!(deck_harmony_score, m)?)?;
    m.add_function(wrap_pyfunction!(rmssd, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(validate_quizbank, m)?)?;
    Ok(())
}
