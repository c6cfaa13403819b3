//! Acceptance suite: one PASS/FAIL line per criterion, each with pinned
//! tolerances and a runtime budget.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use deckeval::alignment::{alignment_report, identical_ratio, parse_rankings, spearman, MetricScores};
use deckeval::engagement::colorfulness;
use deckeval::harmony::{
    best_fit, best_fit_histogram, deck_harmony_score, saturation_weighted_hue_histogram,
    HarmonyConfig, HISTOGRAM_BINS,
};
use deckeval::imaging::{hsv_to_rgb, HsvPixel};
use deckeval::layout::BoundingBox;
use deckeval::pei::{evaluate_pei_bytes, fixtures, PeiConfig};
use deckeval::quiz::{
    error_taxonomy_rollup, parse_quizbank, validate_quizbank, ErrorRecord, ErrorType, FindingKind,
};
use deckeval::report::{assemble_components, emit_report, evaluate_path, Config, ReportFormat};
use deckeval::rhythm::{
    overload_events, rmssd, steerable_pyramid, subband_entropy, visual_hrv_score, EntropyConfig,
    HrvConfig, Plane, PyramidConfig,
};
use deckeval::usability::{contrast_score, region_contrast, ContrastMode};
use deckeval::SlideImage;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

/// Sub-checks whose literal tolerance cannot be met by the correct formula.
/// Each one is reported as FAIL with its measured value.
const KNOWN_UNATTAINABLE: [&str; 1] = ["solid red M = 85.54 ± 0.01"];

struct Criterion {
    id: u8,
    title: &'static str,
    budget: Duration,
    checks: Vec<(String, bool, String)>,
}

impl Criterion {
    fn new(id: u8, title: &'static str, budget_secs: u64) -> Self {
        Self {
            id,
            title,
            budget: Duration::from_secs(budget_secs),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push((name.into(), ok, detail.into()));
    }

    fn failures(&self) -> Vec<&(String, bool, String)> {
        self.checks.iter().filter(|c| !c.1).collect()
    }
}

fn timed(mut c: Criterion, body: impl FnOnce(&mut Criterion)) -> Criterion {
    let start = Instant::now();
    body(&mut c);
    let elapsed = start.elapsed();
    let budget = c.budget;
    c.check(
        format!("runtime < {}s", budget.as_secs()),
        elapsed < budget,
        format!("{:.2}s", elapsed.as_secs_f64()),
    );
    c
}

fn image(w: usize, h: usize, f: impl FnMut(usize, usize) -> [u8; 3]) -> SlideImage {
    let mut f = f;
    let px = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
    SlideImage::new(w, h, px).unwrap()
}

fn c1_contrast() -> Criterion {
    timed(Criterion::new(1, "contrast endpoints", 1), |c| {
        let hi = contrast_score(21.0).unwrap();
        let lo = contrast_score(1.0).unwrap();
        c.check("score(21) == 1.0", hi == 1.0, format!("{hi}"));
        c.check("score(1) == 0.0", lo == 0.0, format!("{lo}"));
        let img = image(8, 8, |x, _| if x < 4 { [0, 0, 0] } else { [255, 255, 255] });
        let region = BoundingBox::new(0.0, 0.0, 8.0, 8.0).unwrap();
        let r = region_contrast(&img, &region, ContrastMode::Endpoint).unwrap();
        c.check("black/white c = 21 ± 1e-9", (r.ratio - 21.0).abs() <= 1e-9, format!("{}", r.ratio));
    })
}

/// Direct evaluation of `sqrt(var_rg + var_yb) + 0.3 sqrt(mu_rg^2 + mu_yb^2)`.
fn colorfulness_oracle(px: &[[u8; 3]]) -> f64 {
    let n = px.len() as f64;
    let rg: Vec<f64> = px.iter().map(|p| p[0] as f64 - p[1] as f64).collect();
    let yb: Vec<f64> = px.iter().map(|p| 0.5 * (p[0] as f64 + p[1] as f64) - p[2] as f64).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n
    };
    (var(&rg) + var(&yb)).sqrt() + 0.3 * (mean(&rg).powi(2) + mean(&yb).powi(2)).sqrt()
}

fn c2_colorfulness() -> Criterion {
    timed(Criterion::new(2, "colorfulness closed forms", 1), |c| {
        let gray = colorfulness(&image(16, 16, |_, _| [128, 128, 128]));
        c.check("solid gray M = 0", gray == 0.0, format!("{gray}"));

        let red = colorfulness(&image(16, 16, |_, _| [255, 0, 0]));
        let closed = 0.3 * (255f64.powi(2) + 127.5f64.powi(2)).sqrt();
        c.check(
            "solid red M = 0.3*sqrt(255^2 + 127.5^2) ± 1e-9",
            (red - closed).abs() <= 1e-9,
            format!("{red:.6}"),
        );
        c.check(
            KNOWN_UNATTAINABLE[0],
            (red - 85.54).abs() <= 0.01,
            format!("{red:.6}; the closed form itself is {closed:.6}"),
        );

        let checker = colorfulness(&image(16, 16, |x, y| {
            if (x + y) % 2 == 0 {
                [255, 0, 0]
            } else {
                [0, 255, 0]
            }
        }));
        c.check("red/green checkerboard M = 293.25 ± 0.01", (checker - 293.25).abs() <= 0.01, format!("{checker:.6}"));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for _ in 0..500 {
            let n = rng.random_range(1..=16usize);
            let px: Vec<[u8; 3]> = (0..n).map(|_| rng.random()).collect();
            let m = colorfulness(&SlideImage::new(n, 1, px.clone()).unwrap());
            worst = worst.max((m - colorfulness_oracle(&px)).abs());
        }
        c.check("oracle on <= 16 pixels within 1e-9", worst <= 1e-9, format!("max |diff| {worst:.2e}"));
    })
}

fn c3_harmony() -> Criterion {
    timed(Criterion::new(3, "harmony rotation invariance", 30), |c| {
        let cfg = HarmonyConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut worst_shift, mut worst_cycle) = (0.0f64, 0.0f64);
        for _ in 0..50 {
            // Fully saturated pixels at bin-centre hues keep their bin after
            // 8-bit quantisation, so an integer-degree rotation moves every
            // pixel exactly `k` bins.
            let k = rng.random_range(1..360u32) as f64;
            let n_hues = rng.random_range(1..=6usize);
            let hues: Vec<f64> = (0..n_hues).map(|_| rng.random_range(0..360u32) as f64 + 0.5).collect();
            let values: Vec<f64> = (0..32 * 32).map(|_| rng.random_range(0.6..1.0)).collect();
            let picks: Vec<usize> = (0..32 * 32).map(|_| rng.random_range(0..n_hues)).collect();
            let build = |shift: f64| {
                image(32, 32, |x, y| {
                    let i = y * 32 + x;
                    hsv_to_rgb(HsvPixel {
                        hue: (hues[picks[i]] + shift).rem_euclid(360.0),
                        saturation: 1.0,
                        value: values[i],
                    })
                })
            };
            let (a, b) = (build(0.0), build(k));
            let d_a = best_fit(&a, &cfg).mean_distance;
            let d_b = best_fit(&b, &cfg).mean_distance;
            worst_shift = worst_shift.max((d_a - d_b).abs());

            // Any image: cycling R->G->B rotates every hue by exactly 120 degrees.
            let noise: Vec<[u8; 3]> = (0..24 * 24).map(|_| rng.random()).collect();
            let orig = SlideImage::new(24, 24, noise.clone()).unwrap();
            let cycled = SlideImage::new(24, 24, noise.iter().map(|p| [p[2], p[0], p[1]]).collect()).unwrap();
            let d0 = best_fit(&orig, &cfg).mean_distance;
            let d1 = best_fit(&cycled, &cfg).mean_distance;
            worst_cycle = worst_cycle.max((d0 - d1).abs());

            // And the histogram itself, rotated by `k` bins.
            let hist = saturation_weighted_hue_histogram(&orig, cfg.sat_threshold);
            let mut rotated = [0.0; HISTOGRAM_BINS];
            for (i, &w) in hist.iter().enumerate() {
                rotated[(i + k as usize) % HISTOGRAM_BINS] = w;
            }
            let dh = best_fit_histogram(&rotated, &cfg).mean_distance;
            worst_shift = worst_shift.max((d0 - dh).abs());
        }
        c.check("integer-degree rotation |dD| <= 1e-9", worst_shift <= 1e-9, format!("{worst_shift:.2e}"));
        c.check("120-degree channel cycle |dD| <= 1e-9", worst_cycle <= 1e-9, format!("{worst_cycle:.2e}"));

        let mut mono_ok = true;
        for _ in 0..10 {
            let hue = rng.random_range(0..360u32) as f64 + 0.5;
            let img = image(16, 16, |x, y| {
                hsv_to_rgb(HsvPixel {
                    hue,
                    saturation: 1.0,
                    value: 0.4 + 0.6 * ((x + y) as f64 / 30.0),
                })
            });
            let fit = best_fit(&img, &cfg);
            mono_ok &= fit.mean_distance == 0.0 && fit.slide_score == 1.0;
        }
        c.check("monochromatic D = 0 and score 1.0", mono_ok, "10 hues");
    })
}

fn c4_deck_harmony() -> Criterion {
    timed(Criterion::new(4, "deck harmony formula", 1), |c| {
        let s = deck_harmony_score(&[1.0, 0.0], 5.0, 30.0).unwrap();
        c.check("[1, 0] -> -12.5 exactly", s == -12.5, format!("{s}"));
    })
}

fn c5_rmssd() -> Criterion {
    timed(Criterion::new(5, "RMSSD and overload oracles", 5), |c| {
        // Scores on a 1/64 grid keep every sum and square exact, so the
        // integer oracle and the floating-point code must agree bit for bit.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut rmssd_bad, mut overload_bad) = (0, 0);
        for _ in 0..1000 {
            let n = rng.random_range(1..=6usize);
            let k: Vec<i64> = (0..n).map(|_| rng.random_range(0..=64i64)).collect();
            let s: Vec<f64> = k.iter().map(|&v| v as f64 / 64.0).collect();

            let expect_rmssd = if n < 2 {
                0.0
            } else {
                let sq: i64 = (1..n).map(|i| (k[i] - k[i - 1]).pow(2)).sum();
                (sq as f64 / 4096.0 / (n - 1) as f64).sqrt()
            };
            if rmssd(&s).unwrap().value != expect_rmssd {
                rmssd_bad += 1;
            }
            // mean > 0.75 over three slides  <=>  sum of grid units > 144
            let expect_over = if n < 3 {
                0
            } else {
                (0..=n - 3).filter(|&i| k[i] + k[i + 1] + k[i + 2] > 144).count()
            };
            if overload_events(&s, 3, 0.75) != expect_over {
                overload_bad += 1;
            }
        }
        c.check("rmssd exact on 1000 sequences", rmssd_bad == 0, format!("{rmssd_bad} mismatches"));
        c.check("overloads exact on 1000 sequences", overload_bad == 0, format!("{overload_bad} mismatches"));

        let r = rmssd(&[0.0, 1.0, 0.0, 1.0]).unwrap().value;
        c.check("[0,1,0,1] -> 1.0", r == 1.0, format!("{r}"));

        // A flat sequence at 0.03 apart: RMSSD equals the target exactly.
        let cfg = HrvConfig::default();
        let peak = visual_hrv_score(&[0.0, 0.03], &cfg).unwrap();
        let at_target = (peak.score - 100.0).abs() < 1e-9 && peak.overloads == 0;
        c.check("banded peak 100 at RMSSD = target", at_target, format!("{} (rmssd {})", peak.score, peak.rmssd.value));
    })
}

fn c6_entropy() -> Criterion {
    timed(Criterion::new(6, "subband entropy ordering", 60), |c| {
        let (pyr, ent) = (PyramidConfig::default(), EntropyConfig::default());
        let constant = image(256, 256, |_, _| [90, 140, 200]);
        let e_const = subband_entropy(&constant, &pyr, &ent).unwrap();
        c.check("constant blank with E = 0", e_const.blank && e_const.value == 0.0, format!("{}", e_const.value));

        let mut worst_margin = f64::INFINITY;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
            let noise = image(256, 256, |_, _| rng.random());
            let e = subband_entropy(&noise, &pyr, &ent).unwrap().value;
            worst_margin = worst_margin.min(e - e_const.value);
        }
        c.check("noise > constant on 20 seeds", worst_margin > 0.0, format!("smallest margin {worst_margin:.4} bits"));

        let f = 45.0 / 256.0;
        let grating = Plane::from_fn(256, 256, |x, y| 0.5 + 0.5 * (2.0 * PI * f * (x as f64 + y as f64)).sin());
        let p = steerable_pyramid(&grating, &pyr).unwrap();
        let energy: Vec<f64> = p.bands.iter().filter(|b| b.level == 0).map(|b| b.plane.energy()).collect();
        let matched = energy[1];
        let ratio = energy
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 1)
            .map(|(_, &e)| matched / e)
            .fold(f64::INFINITY, f64::min);
        c.check("45-degree grating >= 4x in matching band", ratio >= 4.0, format!("min ratio {ratio:.1}"));
    })
}

fn c7_pei() -> Criterion {
    timed(Criterion::new(7, "PEI knockout suite", 10), |c| {
        let cfg = PeiConfig::default();
        let set = fixtures::fixture_set().unwrap();
        let mut seen = Vec::new();
        for level in 0..=5u8 {
            let (name, bytes, _) = set
                .iter()
                .find(|(n, _, l)| *l == level && n.starts_with(&format!("l{level}_")))
                .unwrap();
            let got = evaluate_pei_bytes(name, bytes, &cfg).unwrap().level;
            c.check(format!("{name} -> L{level}"), got == Some(level), format!("{got:?}"));
            seen.push(name.clone());
        }
        let l5 = &set.iter().find(|f| f.0 == "l5_cinematic.pptx").unwrap().1;
        let broken = fixtures::break_chart_workbook(l5).unwrap();
        let got = evaluate_pei_bytes("l5_broken_workbook.pptx", &broken, &cfg).unwrap().level;
        c.check("L5 with dangling workbook -> L3", got == Some(3), format!("{got:?}"));
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn c8_spearman() -> Criterion {
    timed(Criterion::new(8, "Spearman oracle", 5), |c| {
        let base: Vec<f64> = (1..=5).map(f64::from).collect();
        let perms = permutations(5);
        let mut worst = 0.0f64;
        for p in &perms {
            let other: Vec<f64> = p.iter().map(|&i| (i + 1) as f64).collect();
            let d2: f64 = base.iter().zip(&other).map(|(a, b)| (a - b).powi(2)).sum();
            let expected = 1.0 - 6.0 * d2 / (5.0 * 24.0);
            worst = worst.max((spearman(&base, &other).unwrap() - expected).abs());
        }
        c.check(format!("{} permutations within 1e-12", perms.len()), perms.len() == 120 && worst <= 1e-12, format!("{worst:.1e}"));
        let reversed: Vec<f64> = base.iter().rev().copied().collect();
        c.check("identity -> 1", spearman(&base, &base).unwrap() == 1.0, "");
        c.check("reversal -> -1", spearman(&base, &reversed).unwrap() == -1.0, "");

        let rankings = parse_rankings("t1: a, b, c\nt2: a, b, c\nt3: a, b, c\nt4: a, b, c\n").unwrap();
        let mut scores = MetricScores::new();
        for (topic, vals) in [("t1", [3.0, 2.0, 1.0]), ("t2", [1.0, 2.0, 3.0]), ("t3", [2.0, 3.0, 1.0]), ("t4", [3.0, 1.0, 2.0])] {
            let m = scores.entry(topic.into()).or_default();
            for (s, v) in ["a", "b", "c"].iter().zip(vals) {
                m.insert((*s).into(), v);
            }
        }
        let report = alignment_report(&scores, &rankings).unwrap();
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = report
            .topics
            .iter()
            .map(|t| (t.human_ranks.clone(), t.metric_ranks.clone()))
            .collect();
        let ratio = identical_ratio(&pairs).unwrap();
        c.check("4-topic fixture, 1 match -> 0.25", ratio == 0.25 && report.identical_percent == 25.0, format!("{ratio}"));
    })
}

fn c9_table_sum() -> Criterion {
    timed(Criterion::new(9, "aesthetics sum identity", 1), |c| {
        let rows: [(&str, f64, f64, f64, f64, f64); 9] = [
            ("Skywork-Banana", 5.62, 8.30, -0.47, 13.84, 27.28),
            ("Kimi-Banana", 5.72, 6.41, -0.55, 15.01, 26.58),
            ("NotebookLM", 4.13, 7.32, -0.35, 11.72, 22.82),
            ("Zhipu", 4.87, 7.52, -1.60, 11.27, 22.06),
            ("Skywork", 4.83, 7.60, -1.18, 9.44, 20.69),
            ("Kimi-Standard", 4.61, 6.28, -1.75, 10.12, 19.25),
            ("Kimi-Smart", 4.13, 7.99, -1.88, 8.06, 18.30),
            ("Gamma", 5.31, 6.31, -1.51, 6.99, 17.09),
            ("Quark", 5.03, 7.41, -1.91, 6.33, 16.86),
        ];
        for (name, u, e, h, r, printed) in rows {
            let got = assemble_components(Some(u), e, h, r).aesthetics;
            c.check(format!("{name} within ±0.02"), (got - printed).abs() <= 0.02 + 1e-9, format!("{got:.2} vs {printed:.2}"));
        }
    })
}

fn c10_quizbank() -> Criterion {
    timed(Criterion::new(10, "quiz bank validation", 5), |c| {
        let data = Path::new(DATA);
        let text = std::fs::read_to_string(data.join("quizbank_valid.json")).unwrap();
        let source = std::fs::read_to_string(data.join("quizbank_source.txt")).unwrap();
        let bank = parse_quizbank(&text).unwrap();
        let ok = validate_quizbank(&bank, Some(&source));
        c.check("5+5 bank: 0 findings", ok.findings.is_empty(), format!("{:?}", ok.findings));

        let mut nine = bank.clone();
        nine.questions.pop();
        let r = validate_quizbank(&nine, Some(&source));
        let single_count = r.findings.len() == 1 && r.findings[0].kind == FindingKind::QuestionCount;
        c.check("9 questions: one count finding", single_count, format!("{:?}", r.findings));

        let mut full = bank.clone();
        full.questions[2].correct_answer = full.questions[2].options[2].clone();
        let r = validate_quizbank(&full, Some(&source));
        let targeted = r.findings.len() == 1
            && r.findings[0].kind == FindingKind::AnswerFormat
            && r.findings[0].question_id == Some(3);
        c.check("full-text answer: one finding on that question", targeted, format!("{:?}", r.findings));

        let counts = [
            (ErrorType::MissingContent, 1541),
            (ErrorType::ValueMismatch, 547),
            (ErrorType::VlmFailure, 165),
            (ErrorType::Other, 229),
            (ErrorType::VlmMisinterp, 10),
            (ErrorType::ImplicitInfo, 7),
        ];
        let records: Vec<ErrorRecord> = counts
            .iter()
            .flat_map(|&(t, n)| {
                (0..n).map(move |i| ErrorRecord {
                    system: format!("s{}", i % 9),
                    topic: format!("t{}", i % 40),
                    question_id: (i % 10) as u32 + 1,
                    error_type: t,
                })
            })
            .collect();
        let rollup = error_taxonomy_rollup(&records);
        let share = rollup.overall.share(ErrorType::MissingContent).percent;
        c.check(
            "1541/2499 MissingContent -> 61.7% ± 0.05",
            rollup.overall.total == 2499 && (share - 61.7).abs() <= 0.05,
            format!("{share:.3}%"),
        );
    })
}

fn c11_determinism() -> Criterion {
    timed(Criterion::new(11, "sample deck determinism", 30), |c| {
        let deck = Path::new(DATA).join("sample_deck");
        let cfg = Config::default();
        let a = emit_report(&evaluate_path(&deck, None, None, &cfg).unwrap(), ReportFormat::Struct);
        let b = emit_report(&evaluate_path(&deck, None, None, &cfg).unwrap(), ReportFormat::Struct);
        c.check("6 slides, byte-identical reports", a == b, format!("{} bytes", a.len()));
        let manifest = evaluate_path(&deck.join("deck.toml"), None, None, &cfg).unwrap();
        c.check("manifest form has 6 slides", manifest.deck.slide_count == 6, "");
    })
}

#[test]
fn acceptance_criteria() {
    let results = vec![
        c1_contrast(),
        c2_colorfulness(),
        c3_harmony(),
        c4_deck_harmony(),
        c5_rmssd(),
        c6_entropy(),
        c7_pei(),
        c8_spearman(),
        c9_table_sum(),
        c10_quizbank(),
        c11_determinism(),
    ];
    let mut unexpected = Vec::new();
    for r in &results {
        let failures = r.failures();
        let status = if failures.is_empty() { "PASS" } else { "FAIL" };
        let summary = r
            .checks
            .iter()
            .map(|(name, ok, detail)| {
                let mark = if *ok { "ok" } else { "FAILED" };
                if detail.is_empty() {
                    format!("{name}: {mark}")
                } else {
                    format!("{name}: {mark} [{detail}]")
                }
            })
            .collect::<Vec<_>>()
            .join("; ");
        println!("{status} C{:02} {} ({}s budget) :: {summary}", r.id, r.title, r.budget.as_secs());
        for f in failures {
            if !KNOWN_UNATTAINABLE.contains(&f.0.as_str()) {
                unexpected.push(format!("C{:02} {}: {}", r.id, f.0, f.2));
            }
        }
    }
    assert!(unexpected.is_empty(), "unexpected failures:\n{}", unexpected.join("\n"));
}
