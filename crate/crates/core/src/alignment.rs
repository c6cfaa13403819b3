//! Agreement between metric-induced system rankings and human rankings.
//!
//! Rankings file, text form. One topic per line, systems best first;
//! `=` joins systems tied at the same position, `#` starts a comment:
//!
//! ```text
//! # topic: best, ..., worst
//! solar_energy: sysA, sysB = sysC, sysD
//! ```
//!
//! JSON form: `{"rankings": [{"topic": "solar_energy",
//! "systems": ["sysA", ["sysB", "sysC"], "sysD"]}]}`.
//!
//! Metric scores are ranked descending: the highest score gets rank 1.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, population_std};

/// 1-based ranks with ties sharing the average of the positions they span.
/// `descending` ranks the largest value first.
pub fn average_ranks(values: &[f64], descending: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let o = values[a].total_cmp(&values[b]);
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of two rank vectors.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "rank vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Domain("spearman needs at least 2 items".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Domain("spearman undefined for constant ranks".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Fraction of pairs whose rankings agree element-wise.
pub fn identical_ratio(pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("identical_ratio needs at least one pair".into()));
    }
    let same = pairs.iter().filter(|(a, b)| a == b).count();
    Ok(same as f64 / pairs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanRanking {
    pub topic: String,
    /// Best first; each tier holds systems tied at that position.
    pub tiers: Vec<Vec<String>>,
}

impl HumanRanking {
    pub fn systems(&self) -> impl Iterator<Item = &str> {
        self.tiers.iter().flatten().map(String::as_str)
    }

    /// Rank of each system, in the order of [`HumanRanking::systems`].
    pub fn ranks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut pos = 0usize;
        for tier in &self.tiers {
            let avg = pos as f64 + (tier.len() as f64 + 1.0) / 2.0;
            out.extend(std::iter::repeat_n(avg, tier.len()));
            pos += tier.len();
        }
        out
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonTier {
    One(String),
    Tied(Vec<String>),
}

#[derive(Deserialize)]
struct JsonRanking {
    topic: String,
    systems: Vec<JsonTier>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonRankings {
    Wrapped { rankings: Vec<JsonRanking> },
    Bare(Vec<JsonRanking>),
}

fn check_ranking(r: &HumanRanking, context: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in r.systems() {
        if s.is_empty() {
            return Err(Error::parse(context, "empty system name"));
        }
        if !seen.insert(s) {
            return Err(Error::parse(context, format!("system {s:?} listed twice")));
        }
    }
    if seen.len() < 2 {
        return Err(Error::parse(context, "a ranking needs at least 2 systems"));
    }
    Ok(())
}

pub fn parse_rankings(text: &str) -> Result<Vec<HumanRanking>> {
    let trimmed = text.trim_start();
    let rankings = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let parsed: JsonRankings = serde_json::from_str(text).map_err(|e| {
            Error::parse(format!("rankings, line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        let list = match parsed {
            JsonRankings::Wrapped { rankings } | JsonRankings::Bare(rankings) => rankings,
        };
        let out: Vec<HumanRanking> = list
            .into_iter()
            .map(|r| HumanRanking {
                topic: r.topic,
                tiers: r
                    .systems
                    .into_iter()
                    .map(|t| match t {
                        JsonTier::One(s) => vec![s],
                        JsonTier::Tied(v) => v,
                    })
                    .collect(),
            })
            .collect();
        for (i, r) in out.iter().enumerate() {
            check_ranking(r, &format!("rankings[{i}]"))?;
        }
        out
    } else {
        let mut out = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let context = format!("rankings line {}", n + 1);
            let (topic, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(&context, "expected `topic: sysA, sysB, ...`"))?;
            let r = HumanRanking {
                topic: topic.trim().to_string(),
                tiers: rest
                    .split(',')
                    .map(|tier| tier.split('=').map(|s| s.trim().to_string()).collect())
                    .collect(),
            };
            if r.topic.is_empty() {
                return Err(Error::parse(&context, "empty topic"));
            }
            check_ranking(&r, &context)?;
            out.push(r);
        }
        out
    };
    let mut topics = BTreeSet::new();
    for r in &rankings {
        if !topics.insert(r.topic.as_str()) {
            return Err(Error::parse("rankings", format!("topic {:?} appears twice", r.topic)));
        }
    }
    Ok(rankings)
}

/// Metric score per topic and system.
pub type MetricScores = BTreeMap<String, BTreeMap<String, f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicAlignment {
    pub topic: String,
    pub systems: Vec<String>,
    pub human_ranks: Vec<f64>,
    pub metric_ranks: Vec<f64>,
    /// `None` when either ranking is constant.
    pub rho: Option<f64>,
    pub identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub topics: Vec<TopicAlignment>,
    pub mean_rho: f64,
    /// Population standard deviation.
    pub std_rho: f64,
    pub identical_percent: f64,
    pub undefined_rho: usize,
    /// Topics that could not be compared, with the reason.
    pub skipped: Vec<(String, String)>,
}

pub fn alignment_report(scores: &MetricScores, rankings: &[HumanRanking]) -> Result<AlignmentReport> {
    let mut topics = Vec::new();
    let mut skipped = Vec::new();
    for r in rankings {
        let Some(by_system) = scores.get(&r.topic) else {
            skipped.push((r.topic.clone(), "no metric scores for topic".into()));
            continue;
        };
        let systems: Vec<String> = r.systems().map(str::to_string).collect();
        let missing: Vec<&str> = systems
            .iter()
            .filter(|s| !by_system.contains_key(*s))
            .map(String::as_str)
            .collect();
        if !missing.is_empty() {
            skipped.push((r.topic.clone(), format!("no score for {}", missing.join(", "))));
            continue;
        }
        let values: Vec<f64> = systems.iter().map(|s| by_system[s]).collect();
        let metric_ranks = average_ranks(&values, true);
        let human_ranks = r.ranks();
        let rho = spearman(&human_ranks, &metric_ranks).ok();
        topics.push(TopicAlignment {
            topic: r.topic.clone(),
            identical: human_ranks == metric_ranks,
            systems,
            human_ranks,
            metric_ranks,
            rho,
        });
    }
    if topics.is_empty() {
        return Err(Error::Empty("no topic has both metric scores and a human ranking".into()));
    }
    let rhos: Vec<f64> = topics.iter().filter_map(|t| t.rho).collect();
    if rhos.is_empty() {
        return Err(Error::Domain("spearman is undefined on every topic".into()));
    }
    let identical = topics.iter().filter(|t| t.identical).count();
    Ok(AlignmentReport {
        mean_rho: mean(&rhos),
        std_rho: population_std(&rhos),
        identical_percent: identical as f64 / topics.len() as f64 * 100.0,
        undefined_rho: topics.len() - rhos.len(),
        topics,
        skipped,
    })
}
