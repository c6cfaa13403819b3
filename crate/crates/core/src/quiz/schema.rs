//! Quiz bank documents and their validation.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

pub const OPTION_PREFIXES: [&str; 4] = ["A. ", "B. ", "C. ", "D. "];
pub const CONCEPT_QUESTIONS: usize = 5;
pub const DATA_QUESTIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionType {
    Concept,
    Data,
}

/// Question ids are integers; generators sometimes quote them.
pub(crate) fn lenient_id<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u32, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(u32),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(n) => Ok(n),
        Raw::Str(s) => s
            .trim()
            .parse()
            .map_err(|_| serde::de::Error::custom(format!("question id {s:?} is not an integer"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizQuestion {
    #[serde(deserialize_with = "lenient_id")]
    pub id: u32,
    #[serde(rename = "type")]
    pub kind: QuestionType,
    pub question: String,
    pub options: Vec<String>,
    pub correct_answer: String,
    #[serde(default)]
    pub explanation: String,
    #[serde(default)]
    pub source_quote: String,
    #[serde(default)]
    pub location: String,
}

impl QuizQuestion {
    /// The answer key as a letter, when it is well formed.
    pub fn answer_letter(&self) -> Option<char> {
        let s = self.correct_answer.trim();
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c @ 'A'..='D'), None) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizBankDoc {
    #[serde(default)]
    pub topic: String,
    #[serde(rename = "quiz_bank")]
    pub questions: Vec<QuizQuestion>,
}

pub fn parse_quizbank(text: &str) -> Result<QuizBankDoc> {
    serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("quiz bank, line {} column {}", e.line(), e.column()), e.to_string())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    /// Total count or Concept/Data split is wrong.
    QuestionCount,
    DuplicateId,
    OptionCount,
    OptionPrefix,
    AnswerFormat,
    QuoteNotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    /// `None` for bank-level findings.
    pub question_id: Option<u32>,
    pub kind: FindingKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub topic: String,
    pub questions: usize,
    pub source_checked: bool,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

pub fn validate_quizbank(doc: &QuizBankDoc, source: Option<&str>) -> ValidationReport {
    let mut findings = Vec::new();
    let concept = doc.questions.iter().filter(|q| q.kind == QuestionType::Concept).count();
    let data = doc.questions.len() - concept;
    if concept != CONCEPT_QUESTIONS || data != DATA_QUESTIONS {
        findings.push(Finding {
            question_id: None,
            kind: FindingKind::QuestionCount,
            message: format!(
                "expected {} questions ({CONCEPT_QUESTIONS} Concept + {DATA_QUESTIONS} Data), found {} ({concept} Concept + {data} Data)",
                CONCEPT_QUESTIONS + DATA_QUESTIONS,
                doc.questions.len()
            ),
        });
    }

    let mut seen = std::collections::BTreeSet::new();
    for q in &doc.questions {
        let mut push = |kind, message: String| {
            findings.push(Finding {
                question_id: Some(q.id),
                kind,
                message,
            })
        };
        if !seen.insert(q.id) {
            push(FindingKind::DuplicateId, format!("id {} appears more than once", q.id));
        }
        if q.options.len() != OPTION_PREFIXES.len() {
            push(
                FindingKind::OptionCount,
                format!("expected 4 options, found {}", q.options.len()),
            );
        }
        for (opt, prefix) in q.options.iter().zip(OPTION_PREFIXES) {
            if !opt.starts_with(prefix) {
                push(
                    FindingKind::OptionPrefix,
                    format!("option {opt:?} should start with {prefix:?}"),
                );
            }
        }
        if q.answer_letter().is_none() {
            push(
                FindingKind::AnswerFormat,
                format!("correct_answer {:?} is not a single letter A-D", q.correct_answer),
            );
        }
        if let Some(src) = source {
            if q.source_quote.is_empty() || !src.contains(q.source_quote.as_str()) {
                push(
                    FindingKind::QuoteNotFound,
                    format!("source_quote {:?} does not occur verbatim in the source", q.source_quote),
                );
            }
        }
    }

    ValidationReport {
        topic: doc.topic.clone(),
        questions: doc.questions.len(),
        source_checked: source.is_some(),
        findings,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const SOURCE: &str = "Alpha fact 0. Alpha fact 1. Alpha fact 2. Alpha fact 3. \
        Alpha fact 4. Alpha fact 5. Alpha fact 6. Alpha fact 7. Alpha fact 8. Alpha fact 9.";

    pub(crate) fn question(id: u32, kind: QuestionType) -> QuizQuestion {
        QuizQuestion {
            id,
            kind,
            question: format!("Question {id}?"),
            options: OPTION_PREFIXES.iter().map(|p| format!("{p}choice")).collect(),
            correct_answer: ["A", "B", "C", "D"][id as usize % 4].into(),
            explanation: format!("Based on Page {id}"),
            source_quote: format!("Alpha fact {}.", id - 1),
            location: format!("Page {id}"),
        }
    }

    pub(crate) fn bank() -> QuizBankDoc {
        QuizBankDoc {
            topic: "alpha".into(),
            questions: (1..=10)
                .map(|i| question(i, if i <= 5 { QuestionType::Concept } else { QuestionType::Data }))
                .collect(),
        }
    }

    #[test]
    fn well_formed_bank_passes() {
        let b = bank();
        assert!(validate_quizbank(&b, Some(SOURCE)).is_valid());
        assert!(validate_quizbank(&b, None).is_valid());
    }

    #[test]
    fn nine_questions_is_one_count_finding() {
        let mut b = bank();
        b.questions.pop();
        let r = validate_quizbank(&b, Some(SOURCE));
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].kind, FindingKind::QuestionCount);
    }

    #[test]
    fn full_text_answer_is_one_format_finding() {
        let mut b = bank();
        b.questions[2].correct_answer = "B. January 6 through February 10, 2025".into();
        let r = validate_quizbank(&b, Some(SOURCE));
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].kind, FindingKind::AnswerFormat);
        assert_eq!(r.findings[0].question_id, Some(3));
    }

    #[test]
    fn quote_and_prefix_findings() {
        let mut b = bank();
        b.questions[0].source_quote = "not in source".into();
        b.questions[1].options[3] = "D) wrong".into();
        let r = validate_quizbank(&b, Some(SOURCE));
        let kinds: Vec<_> = r.findings.iter().map(|f| f.kind).collect();
        assert_eq!(kinds, [FindingKind::QuoteNotFound, FindingKind::OptionPrefix]);
        // Without the source only the structural finding remains.
        assert_eq!(validate_quizbank(&b, None).findings.len(), 1);
    }

    #[test]
    fn parses_generator_output() {
        let text = r#"{"quiz_bank": [{
            "id": "1", "type": "Data", "question": "Q?",
            "options": ["A. a", "B. b", "C. c", "D. d"],
            "correct_answer": "B", "explanation": "Based on Page 3"}]}"#;
        let doc = parse_quizbank(text).unwrap();
        assert_eq!(doc.questions[0].id, 1);
        assert_eq!(doc.questions[0].answer_letter(), Some('B'));
        let err = parse_quizbank("{\"quiz_bank\": [}").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }
}
