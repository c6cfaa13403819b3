//! Roll-ups over many scored quizzes: accuracy tables, error taxonomy shares
//! and source richness levels.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RichnessLevel {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub system: String,
    pub topic: String,
    pub purpose: String,
    /// Difficulty is supplied explicitly rather than inferred.
    #[serde(default)]
    pub level: Option<RichnessLevel>,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemAccuracy {
    pub system: String,
    /// `None` marks a purpose the system was never evaluated on.
    pub by_purpose: BTreeMap<String, Option<f64>>,
    pub by_level: BTreeMap<RichnessLevel, Option<f64>>,
    pub overall: f64,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub purposes: Vec<String>,
    pub levels: Vec<RichnessLevel>,
    pub systems: Vec<SystemAccuracy>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn aggregate_accuracy(records: &[AccuracyRecord]) -> Result<AccuracyTable> {
    if records.is_empty() {
        return Err(Error::Empty("no accuracy records".into()));
    }
    let mut purposes: Vec<String> = records.iter().map(|r| r.purpose.clone()).collect();
    purposes.sort();
    purposes.dedup();
    let mut levels: Vec<RichnessLevel> = records.iter().filter_map(|r| r.level).collect();
    levels.sort();
    levels.dedup();

    let mut grouped: BTreeMap<&str, Vec<&AccuracyRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(&r.system).or_default().push(r);
    }
    let systems = grouped
        .into_iter()
        .map(|(system, recs)| {
            let collect = |f: &dyn Fn(&AccuracyRecord) -> bool| -> Vec<f64> {
                recs.iter().filter(|r| f(r)).map(|r| r.accuracy).collect()
            };
            SystemAccuracy {
                system: system.to_string(),
                by_purpose: purposes
                    .iter()
                    .map(|p| (p.clone(), mean(&collect(&|r| &r.purpose == p))))
                    .collect(),
                by_level: levels
                    .iter()
                    .map(|&l| (l, mean(&collect(&|r| r.level == Some(l)))))
                    .collect(),
                overall: mean(&collect(&|_| true)).expect("non-empty group"),
                records: recs.len(),
            }
        })
        .collect();
    Ok(AccuracyTable {
        purposes,
        levels,
        systems,
    })
}

impl AccuracyTable {
    /// CSV with one row per system; absent cells are written `N/A`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("System");
        for p in &self.purposes {
            let _ = write!(out, ",{p}");
        }
        for l in &self.levels {
            let _ = write!(out, ",{l:?}");
        }
        out.push_str(",Avg\n");
        let cell = |v: &Option<f64>| v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.2}"));
        for s in &self.systems {
            out.push_str(&s.system);
            for v in s.by_purpose.values() {
                let _ = write!(out, ",{}", cell(v));
            }
            for v in s.by_level.values() {
                let _ = write!(out, ",{}", cell(v));
            }
            let _ = writeln!(out, ",{:.2}", s.overall);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorType {
    MissingContent,
    VlmFailure,
    ValueMismatch,
    VlmMisinterp,
    ImplicitInfo,
    Other,
}

impl ErrorType {
    pub const ALL: [ErrorType; 6] = [
        ErrorType::MissingContent,
        ErrorType::VlmFailure,
        ErrorType::ValueMismatch,
        ErrorType::VlmMisinterp,
        ErrorType::ImplicitInfo,
        ErrorType::Other,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    #[serde(default)]
    pub system: String,
    #[serde(default)]
    pub topic: String,
    pub question_id: u32,
    pub error_type: ErrorType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeShare {
    pub error_type: ErrorType,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub total: usize,
    pub shares: Vec<TypeShare>,
}

impl ErrorBreakdown {
    fn from_counts(counts: &BTreeMap<ErrorType, usize>) -> Self {
        let total: usize = counts.values().sum();
        let shares = ErrorType::ALL
            .iter()
            .map(|&t| {
                let count = counts.get(&t).copied().unwrap_or(0);
                let percent = if total == 0 {
                    0.0
                } else {
                    count as f64 / total as f64 * 100.0
                };
                TypeShare {
                    error_type: t,
                    count,
                    percent,
                }
            })
            .collect();
        Self { total, shares }
    }

    pub fn share(&self, t: ErrorType) -> &TypeShare {
        self.shares.iter().find(|s| s.error_type == t).expect("all types listed")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRollup {
    pub overall: ErrorBreakdown,
    pub by_system: BTreeMap<String, ErrorBreakdown>,
}

pub fn error_taxonomy_rollup(records: &[ErrorRecord]) -> ErrorRollup {
    let mut overall = BTreeMap::new();
    let mut per_system: BTreeMap<&str, BTreeMap<ErrorType, usize>> = BTreeMap::new();
    for r in records {
        *overall.entry(r.error_type).or_insert(0) += 1;
        *per_system
            .entry(&r.system)
            .or_default()
            .entry(r.error_type)
            .or_insert(0) += 1;
    }
    ErrorRollup {
        overall: ErrorBreakdown::from_counts(&overall),
        by_system: per_system
            .into_iter()
            .map(|(s, c)| (s.to_string(), ErrorBreakdown::from_counts(&c)))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichnessExtrema {
    pub text_min: f64,
    pub text_max: f64,
    pub images_min: f64,
    pub images_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichnessWeights {
    pub text: f64,
    pub images: f64,
}

impl Default for RichnessWeights {
    fn default() -> Self {
        Self {
            text: 0.7,
            images: 0.3,
        }
    }
}

/// Min-max blend of text length and image count, clamped to `[0, 1]`.
pub fn richness_score(
    text_len: f64,
    images: f64,
    ext: &RichnessExtrema,
    w: &RichnessWeights,
) -> Result<f64> {
    let t_span = ext.text_max - ext.text_min;
    let i_span = ext.images_max - ext.images_min;
    if !(t_span > 0.0) || !(i_span > 0.0) {
        return Err(Error::Domain(
            "richness needs max > min for both text length and image count".into(),
        ));
    }
    let s = w.text * (text_len - ext.text_min) / t_span + w.images * (images - ext.images_min) / i_span;
    Ok(s.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichnessScore {
    pub text_length: usize,
    pub image_count: usize,
    pub score: f64,
    pub level: RichnessLevel,
}

/// Scores a corpus of `(text length, image count)` pairs and splits it into
/// rank tertiles.
pub fn richness_corpus(items: &[(usize, usize)], w: &RichnessWeights) -> Result<Vec<RichnessScore>> {
    if items.is_empty() {
        return Err(Error::Empty("richness corpus is empty".into()));
    }
    let t: Vec<f64> = items.iter().map(|&(t, _)| t as f64).collect();
    let i: Vec<f64> = items.iter().map(|&(_, i)| i as f64).collect();
    let fold = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (text_min, text_max) = fold(&t);
    let (images_min, images_max) = fold(&i);
    let ext = RichnessExtrema {
        text_min,
        text_max,
        images_min,
        images_max,
    };
    let scores = t
        .iter()
        .zip(&i)
        .map(|(&t, &i)| richness_score(t, i, &ext, w))
        .collect::<Result<Vec<f64>>>()?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let n = scores.len();
    let mut levels = vec![RichnessLevel::Low; n];
    for (rank, &idx) in order.iter().enumerate() {
        levels[idx] = if rank * 3 < n {
            RichnessLevel::Low
        } else if rank * 3 < 2 * n {
            RichnessLevel::Medium
        } else {
            RichnessLevel::High
        };
    }
    Ok(items
        .iter()
        .zip(scores.iter().zip(levels))
        .map(|(&(text_length, image_count), (&score, level))| RichnessScore {
            text_length,
            image_count,
            score,
            level,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(system: &str, topic: &str, purpose: &str, acc: f64) -> AccuracyRecord {
        AccuracyRecord {
            system: system.into(),
            topic: topic.into(),
            purpose: purpose.into(),
            level: None,
            accuracy: acc,
        }
    }

    #[test]
    fn single_record_overall() {
        let t = aggregate_accuracy(&[rec("Zhipu", "t1", "edu", 88.29)]).unwrap();
        assert_eq!(t.systems[0].overall, 88.29);
    }

    #[test]
    fn purpose_means_and_na() {
        let t = aggregate_accuracy(&[
            rec("a", "t1", "edu", 80.0),
            rec("a", "t2", "edu", 90.0),
            rec("b", "t3", "biz", 70.0),
        ])
        .unwrap();
        assert_eq!(t.systems[0].by_purpose["edu"], Some(85.0));
        assert_eq!(t.systems[0].by_purpose["biz"], None);
        let csv = t.to_csv();
        assert!(csv.starts_with("System,biz,edu,Avg\n"));
        assert!(csv.contains("a,N/A,85.00,85.00"));
        assert!(aggregate_accuracy(&[]).is_err());
    }

    #[test]
    fn error_rollup_shares() {
        let empty = error_taxonomy_rollup(&[]);
        assert_eq!(empty.overall.total, 0);
        assert!(empty.overall.shares.iter().all(|s| s.count == 0 && s.percent == 0.0));

        let one_each: Vec<ErrorRecord> = ErrorType::ALL
            .iter()
            .enumerate()
            .map(|(i, &t)| ErrorRecord {
                system: "s".into(),
                topic: String::new(),
                question_id: i as u32,
                error_type: t,
            })
            .collect();
        let r = error_taxonomy_rollup(&one_each);
        for s in &r.overall.shares {
            assert!((s.percent - 100.0 / 6.0).abs() < 1e-12);
        }
        assert_eq!(r.by_system["s"].total, 6);
    }

    #[test]
    fn richness_closed_forms() {
        let ext = RichnessExtrema {
            text_min: 100.0,
            text_max: 300.0,
            images_min: 0.0,
            images_max: 10.0,
        };
        let w = RichnessWeights::default();
        assert_eq!(richness_score(100.0, 0.0, &ext, &w).unwrap(), 0.0);
        assert_eq!(richness_score(300.0, 10.0, &ext, &w).unwrap(), 1.0);
        assert!((richness_score(200.0, 5.0, &ext, &w).unwrap() - 0.5).abs() < 1e-12);
        let flat = RichnessExtrema { text_max: 100.0, ..ext };
        assert!(richness_score(100.0, 0.0, &flat, &w).is_err());
    }

    #[test]
    fn corpus_tertiles_are_balanced() {
        let items: Vec<(usize, usize)> = (0..189).map(|k| (1000 + 37 * k, k % 25)).collect();
        let scored = richness_corpus(&items, &RichnessWeights::default()).unwrap();
        for level in [RichnessLevel::Low, RichnessLevel::Medium, RichnessLevel::High] {
            assert_eq!(scored.iter().filter(|s| s.level == level).count(), 63);
        }
    }

    proptest! {
        #[test]
        fn aggregate_matches_brute_force(
            raw in prop::collection::vec((0usize..3, 0usize..3, 0.0f64..100.0), 1..20)
        ) {
            let records: Vec<AccuracyRecord> = raw
                .iter()
                .enumerate()
                .map(|(k, &(s, p, a))| rec(&format!("s{s}"), &format!("t{k}"), &format!("p{p}"), a))
                .collect();
            let table = aggregate_accuracy(&records).unwrap();
            for row in &table.systems {
                let mine: Vec<&AccuracyRecord> = records.iter().filter(|r| r.system == row.system).collect();
                let overall = mine.iter().map(|r| r.accuracy).sum::<f64>() / mine.len() as f64;
                prop_assert!((row.overall - overall).abs() < 1e-9);
                for (p, cell) in &row.by_purpose {
                    let v: Vec<f64> = mine.iter().filter(|r| &r.purpose == p).map(|r| r.accuracy).collect();
                    match cell {
                        None => prop_assert!(v.is_empty()),
                        Some(m) => prop_assert!((m - v.iter().sum::<f64>() / v.len() as f64).abs() < 1e-9),
                    }
                }
            }
        }

        #[test]
        fn richness_monotone(t1 in 0.0f64..1000.0, t2 in 0.0f64..1000.0, i in 0.0f64..20.0) {
            let ext = RichnessExtrema { text_min: 0.0, text_max: 1000.0, images_min: 0.0, images_max: 20.0 };
            let w = RichnessWeights::default();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(richness_score(lo, i, &ext, &w).unwrap() <= richness_score(hi, i, &ext, &w).unwrap());
            prop_assert!(richness_score(t1, i, &ext, &w).unwrap() <= richness_score(t1, (i + 1.0).min(20.0), &ext, &w).unwrap());
        }
    }
}
