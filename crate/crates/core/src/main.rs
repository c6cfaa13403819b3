use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deckeval::alignment::{alignment_report, parse_rankings, MetricScores};
use deckeval::pei::{evaluate_pei, fixtures};
use deckeval::quiz::{
    aggregate_accuracy, error_taxonomy_rollup, parse_answer_set, parse_quizbank, score_quiz,
    take_exam, validate_quizbank, AccuracyRecord, ErrorRecord, HttpClient,
};
use deckeval::report::{
    emit_report, emit_table, evaluate_deck, load_deck, parse_report, Config, DeckReport,
    ReportFormat,
};
use deckeval::{Error, Result};

#[derive(Parser)]
#[command(name = "deckeval", version, about = "Slide deck quality metrics and editability checks")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in reporting profile (default, raw).
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate rendered decks (image directories or manifests).
    Eval {
        #[arg(required = true)]
        decks: Vec<PathBuf>,
        /// Directory holding layout sidecars.
        #[arg(long)]
        layout_dir: Option<PathBuf>,
        /// Native package to classify alongside the images.
        #[arg(long)]
        pptx: Option<PathBuf>,
        /// struct or table.
        #[arg(long, default_value = "struct")]
        format: String,
    },
    /// Classify the editability level of a deliverable.
    Pei {
        input: String,
        #[arg(long, default_value = "struct")]
        format: String,
    },
    /// Compare report scores with human rankings.
    Align {
        /// Rankings file, text or JSON.
        #[arg(long)]
        rankings: PathBuf,
        /// Component to rank by.
        #[arg(long, default_value = "aesthetics")]
        metric: String,
        /// Deck reports; each needs a system name.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Content tests.
    Quiz {
        #[command(subcommand)]
        command: QuizCommand,
    },
    /// Write the editability fixture packages into a directory.
    Fixtures { dir: PathBuf },
    /// Print the effective configuration.
    Config,
}

#[derive(Subcommand)]
enum QuizCommand {
    /// Check a quiz bank's structure, and its quotes against a source text.
    Validate {
        bank: PathBuf,
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Score an answer set against a bank's keys.
    Score {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        answers: PathBuf,
    },
    /// Ask the configured model to answer a bank from extracted slide text.
    Exam {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        slides: PathBuf,
    },
    /// Accuracy by purpose and difficulty from a JSON list of records.
    Aggregate {
        records: PathBuf,
        #[arg(long, default_value = "struct")]
        format: String,
    },
    /// Error-type shares from a JSON list of classified misses.
    Errors { records: PathBuf },
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| {
        Error::Parse {
            context: format!("{} line {}", path.display(), e.line()),
            message: e.to_string(),
        }
    })
}

fn json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(name) = &cli.profile {
        cfg.apply_profile(name)?;
    }
    Ok(cfg)
}

fn metric_value(r: &DeckReport, metric: &str) -> Result<f64> {
    let c = &r.components;
    match metric {
        "aesthetics" => Ok(c.aesthetics),
        "engagement" => Ok(c.engagement),
        "harmony" => Ok(c.harmony),
        "rhythm" => Ok(c.rhythm),
        "usability" => c.usability.ok_or_else(|| {
            Error::InvalidInput(format!("deck {} has no usability score", r.deck.topic))
        }),
        other => Err(Error::InvalidInput(format!(
            "unknown metric {other:?}; expected aesthetics, usability, engagement, harmony or rhythm"
        ))),
    }
}

/// Returns the bytes to print and whether the run counts as a failure.
fn run(cli: &Cli) -> Result<(Vec<u8>, bool)> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Eval {
            decks,
            layout_dir,
            pptx,
            format,
        } => {
            let format: ReportFormat = format.parse()?;
            if decks.len() > 1 && (layout_dir.is_some() || pptx.is_some()) {
                return Err(Error::InvalidInput(
                    "--layout-dir and --pptx apply to a single deck".into(),
                ));
            }
            let reports = decks
                .iter()
                .map(|d| evaluate_deck(&load_deck(d, layout_dir.as_deref(), pptx.as_deref())?, &cfg))
                .collect::<Result<Vec<_>>>()?;
            let out = match (format, reports.as_slice()) {
                (ReportFormat::Struct, [one]) => emit_report(one, format),
                (ReportFormat::Struct, many) => json(&many),
                (ReportFormat::Table, many) => emit_table(many).into_bytes(),
            };
            Ok((out, false))
        }
        Command::Pei { input, format } => {
            let report = evaluate_pei(input, &cfg.pei)?;
            let out = match format.parse::<ReportFormat>()? {
                ReportFormat::Struct => json(&report),
                ReportFormat::Table => {
                    let mut s = String::from("Gate,Status,Evidence\n");
                    for g in &report.gates {
                        let first = g.evidence.first().map_or(String::new(), |e| match e.slide {
                            Some(i) => format!("slide {}: {}", i + 1, e.finding),
                            None => e.finding.clone(),
                        });
                        s.push_str(&format!(
                            "{:?},{},\"{}\"\n",
                            g.gate,
                            serde_json::to_value(g.status).unwrap().as_str().unwrap_or(""),
                            first.replace('"', "\"\"")
                        ));
                    }
                    let level = report.level.map_or("N/A".to_string(), |l| format!("L{l}"));
                    s.push_str(&format!("Level,{level},\"{}\"\n", report.note.clone().unwrap_or_default()));
                    s.into_bytes()
                }
            };
            Ok((out, false))
        }
        Command::Align {
            rankings,
            metric,
            reports,
        } => {
            let rankings = parse_rankings(&read_text(rankings)?)?;
            let mut scores = MetricScores::new();
            for path in reports {
                let r = parse_report(&std::fs::read(path).map_err(|e| Error::io(path, e))?)?;
                let system = r.deck.system.clone().ok_or_else(|| {
                    Error::InvalidInput(format!("{}: report has no system name", path.display()))
                })?;
                let value = metric_value(&r, metric)?;
                scores.entry(r.deck.topic.clone()).or_default().insert(system, value);
            }
            Ok((json(&alignment_report(&scores, &rankings)?), false))
        }
        Command::Quiz { command } => match command {
            QuizCommand::Validate { bank, source } => {
                let doc = parse_quizbank(&read_text(bank)?)?;
                let src = source.as_deref().map(read_text).transpose()?;
                let report = validate_quizbank(&doc, src.as_deref());
                let failed = !report.is_valid();
                Ok((json(&report), failed))
            }
            QuizCommand::Score { bank, answers } => {
                let key = parse_quizbank(&read_text(bank)?)?;
                let set = parse_answer_set(&read_text(answers)?)?;
                Ok((json(&score_quiz(&set, &key)?), false))
            }
            QuizCommand::Exam { bank, slides } => {
                let key = parse_quizbank(&read_text(bank)?)?;
                let client = HttpClient::new(cfg.client.clone())?;
                let set = take_exam(&client, &key, &read_text(slides)?)?;
                let score = score_quiz(&set, &key)?;
                Ok((json(&serde_json::json!({ "answers": set, "score": score })), false))
            }
            QuizCommand::Aggregate { records, format } => {
                let records: Vec<AccuracyRecord> = read_json(records)?;
                let table = aggregate_accuracy(&records)?;
                let out = match format.parse::<ReportFormat>()? {
                    ReportFormat::Struct => json(&table),
                    ReportFormat::Table => table.to_csv().into_bytes(),
                };
                Ok((out, false))
            }
            QuizCommand::Errors { records } => {
                let records: Vec<ErrorRecord> = read_json(records)?;
                Ok((json(&error_taxonomy_rollup(&records)), false))
            }
        },
        Command::Fixtures { dir } => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let mut listing = String::from("File,ExpectedLevel\n");
            for (name, bytes, level) in fixtures::fixture_set()? {
                let path = dir.join(&name);
                std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
                listing.push_str(&format!("{name},L{level}\n"));
            }
            Ok((listing.into_bytes(), false))
        }
        Command::Config => Ok((cfg.to_toml().into_bytes(), false)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok((bytes, failed)) => {
            let written = match &cli.output {
                Some(p) => std::fs::write(p, &bytes).map_err(|e| Error::io(p, e)),
                None => std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| Error::io("<stdout>", e)),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
