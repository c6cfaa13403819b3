//! Answer sets from the open-book exam and their scoring.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::client::{llm_exchange, LlmClient};
use super::schema::{lenient_id, QuizBankDoc};
use crate::error::{Error, Result};

pub const INSUFFICIENT: &str = "insufficient information";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizAnswer {
    #[serde(deserialize_with = "lenient_id")]
    pub question_id: u32,
    pub selected_answer: String,
    #[serde(default)]
    pub reasoning: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "letter")]
pub enum Selection {
    Letter(char),
    Insufficient,
    Unrecognized,
}

impl QuizAnswer {
    /// Accepts a bare letter or a letter followed by the option text
    /// (`"B"`, `"B. January..."`, `"B)"`).
    pub fn selection(&self) -> Selection {
        let s = self.selected_answer.trim();
        if s.eq_ignore_ascii_case(INSUFFICIENT) {
            return Selection::Insufficient;
        }
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c @ 'A'..='D'), None | Some('.') | Some(')') | Some(' ')) => Selection::Letter(c),
            _ => Selection::Unrecognized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizAnswerSet {
    pub answers: Vec<QuizAnswer>,
}

/// Parses an answer set, tolerating surrounding prose or code fences around
/// the JSON object.
pub fn parse_answer_set(text: &str) -> Result<QuizAnswerSet> {
    let body = match (text.find('{'), text.rfind('}')) {
        (Some(a), Some(b)) if a < b => &text[a..=b],
        _ => return Err(Error::parse("answer set", "no JSON object in reply")),
    };
    serde_json::from_str(body).map_err(|e| {
        Error::parse(format!("answer set, line {} column {}", e.line(), e.column()), e.to_string())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question_id: u32,
    pub expected: String,
    pub selection: Selection,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizScore {
    pub topic: String,
    pub results: Vec<QuestionResult>,
    pub correct: usize,
    pub total: usize,
    /// Percentage of correct answers.
    pub accuracy: f64,
}

pub fn score_quiz(answers: &QuizAnswerSet, key: &QuizBankDoc) -> Result<QuizScore> {
    if key.questions.is_empty() {
        return Err(Error::Empty("quiz bank has no questions".into()));
    }
    let mut by_id: BTreeMap<u32, &QuizAnswer> = BTreeMap::new();
    for a in &answers.answers {
        if by_id.insert(a.question_id, a).is_some() {
            return Err(Error::InvalidInput(format!(
                "question {} answered more than once",
                a.question_id
            )));
        }
    }
    let key_ids: BTreeSet<u32> = key.questions.iter().map(|q| q.id).collect();
    let missing: Vec<String> = key_ids
        .iter()
        .filter(|id| !by_id.contains_key(id))
        .map(u32::to_string)
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no answer for question id(s) {}",
            missing.join(", ")
        )));
    }

    let results: Vec<QuestionResult> = key
        .questions
        .iter()
        .map(|q| {
            let selection = by_id[&q.id].selection();
            let correct = matches!(selection, Selection::Letter(c) if Some(c) == q.answer_letter());
            QuestionResult {
                question_id: q.id,
                expected: q.correct_answer.clone(),
                selection,
                correct,
            }
        })
        .collect();
    let correct = results.iter().filter(|r| r.correct).count();
    let total = results.len();
    Ok(QuizScore {
        topic: key.topic.clone(),
        results,
        correct,
        total,
        accuracy: correct as f64 / total as f64 * 100.0,
    })
}

/// Runs the open-book exam: the bank (without answer keys) and the extracted
/// slide contents go to the model, and its reply is parsed.
pub fn take_exam(
    client: &dyn LlmClient,
    bank: &QuizBankDoc,
    slide_contents: &str,
) -> Result<QuizAnswerSet> {
    #[derive(Serialize)]
    struct Shown<'a> {
        id: u32,
        question: &'a str,
        options: &'a [String],
    }
    let shown: Vec<Shown> = bank
        .questions
        .iter()
        .map(|q| Shown {
            id: q.id,
            question: &q.question,
            options: &q.options,
        })
        .collect();
    let questions = serde_json::to_string_pretty(&shown)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize questions: {e}")))?;
    let subs = BTreeMap::from([
        ("topic".to_string(), bank.topic.clone()),
        ("slide_contents".to_string(), slide_contents.to_string()),
        ("quiz_questions".to_string(), questions),
    ]);
    let reply = llm_exchange(client, "quiz_evaluation", &subs)?;
    parse_answer_set(&reply)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiz::client::{ClientError, MockClient};
    use crate::quiz::schema::tests::bank;
    use proptest::prelude::*;

    fn answers(letters: &[&str]) -> QuizAnswerSet {
        QuizAnswerSet {
            answers: letters
                .iter()
                .enumerate()
                .map(|(i, l)| QuizAnswer {
                    question_id: i as u32 + 1,
                    selected_answer: l.to_string(),
                    reasoning: String::new(),
                })
                .collect(),
        }
    }

    fn key_letters() -> Vec<String> {
        bank().questions.iter().map(|q| q.correct_answer.clone()).collect()
    }

    #[test]
    fn perfect_and_insufficient() {
        let key = key_letters();
        let refs: Vec<&str> = key.iter().map(String::as_str).collect();
        assert_eq!(score_quiz(&answers(&refs), &bank()).unwrap().accuracy, 100.0);
        let none = vec![INSUFFICIENT; 10];
        assert_eq!(score_quiz(&answers(&none), &bank()).unwrap().accuracy, 0.0);
    }

    #[test]
    fn seven_of_ten() {
        let mut key = key_letters();
        for k in key.iter_mut().take(3) {
            *k = if k == "A" { "B".into() } else { "A".into() };
        }
        let refs: Vec<&str> = key.iter().map(String::as_str).collect();
        let s = score_quiz(&answers(&refs), &bank()).unwrap();
        assert_eq!((s.correct, s.accuracy), (7, 70.0));
    }

    #[test]
    fn missing_question_is_error() {
        let mut a = answers(&["A"; 10]);
        a.answers.pop();
        assert!(score_quiz(&a, &bank()).unwrap_err().to_string().contains("10"));
    }

    #[test]
    fn selection_forms() {
        let mk = |s: &str| QuizAnswer {
            question_id: 1,
            selected_answer: s.into(),
            reasoning: String::new(),
        };
        assert_eq!(mk("B").selection(), Selection::Letter('B'));
        assert_eq!(mk(" C. text").selection(), Selection::Letter('C'));
        assert_eq!(mk("Insufficient Information").selection(), Selection::Insufficient);
        assert_eq!(mk("E").selection(), Selection::Unrecognized);
        assert_eq!(mk("Because").selection(), Selection::Unrecognized);
    }

    #[test]
    fn mock_exam_round_trip() {
        let reply = "```json\n{\"answers\": [{\"question_id\": 1, \"selected_answer\": \"B\", \"reasoning\": \"slide 2\"}]}\n```";
        let mock = MockClient::new(reply);
        let set = take_exam(&mock, &bank(), "# Slide 1").unwrap();
        assert_eq!(set.answers[0].selection(), Selection::Letter('B'));
        let prompt = &mock.prompts()[0];
        assert!(prompt.contains("# Slide 1"));
        assert!(!prompt.contains("correct_answer"));
    }

    #[test]
    fn reply_without_answers_is_parse_error() {
        let mock = MockClient::new("{\"result\": []}");
        let err = take_exam(&mock, &bank(), "").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        assert!(err.is_input_error());
    }

    #[test]
    fn transport_failure_propagates() {
        let mock = MockClient::failing(ClientError::Transport("timed out".into()));
        let err = take_exam(&mock, &bank(), "").unwrap_err();
        assert!(matches!(err, Error::Client(ClientError::Transport(_))));
        assert!(!err.is_input_error());
    }

    proptest! {
        #[test]
        fn accuracy_is_multiple_of_ten_and_order_free(
            picks in prop::collection::vec(0usize..5, 10),
            seed in any::<u64>(),
        ) {
            let choices = ["A", "B", "C", "D", INSUFFICIENT];
            let set = answers(&picks.iter().map(|&p| choices[p]).collect::<Vec<_>>());
            let base = score_quiz(&set, &bank()).unwrap().accuracy;
            prop_assert_eq!(base % 10.0, 0.0);
            prop_assert!((0.0..=100.0).contains(&base));

            let mut shuffled = set.clone();
            let n = shuffled.answers.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.answers.swap(i, (s >> 33) as usize % (i + 1));
            }
            let mut key = bank();
            key.questions.reverse();
            prop_assert_eq!(score_quiz(&shuffled, &key).unwrap().accuracy, base);
        }
    }
}
