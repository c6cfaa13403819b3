//! Multiple-choice content tests derived from a source document.

pub mod aggregate;
pub mod answers;
pub mod client;
pub mod schema;

pub use aggregate::{
    aggregate_accuracy, error_taxonomy_rollup, richness_corpus, richness_score, AccuracyRecord,
    AccuracyTable, ErrorRecord, ErrorRollup, ErrorType, RichnessExtrema, RichnessLevel,
    RichnessScore, RichnessWeights,
};
pub use answers::{parse_answer_set, score_quiz, take_exam, QuizAnswer, QuizAnswerSet, QuizScore};
pub use client::{llm_exchange, ClientConfig, ClientError, HttpClient, LlmClient, MockClient, PromptTemplate};
pub use schema::{parse_quizbank, validate_quizbank, Finding, FindingKind, QuizBankDoc, QuizQuestion, ValidationReport};
