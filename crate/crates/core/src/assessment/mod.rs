//! Screening batteries: generation, scoring, at-risk flagging and cohort
//! statistics.

mod battery;
mod scoring;
pub mod stats;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use battery::{
    generate_battery, Answer, BatteryConfig, Direction, Item, ItemSet, Operator, Side, Stimulus, Subtest, CARRY_ADDITIONS,
    DEFAULT_ITEMS_PER_SUBTEST,
};
pub use scoring::{
    flag_at_risk, read_external_scores, read_responses, score_all, score_responses, LowThreshold, Outcome, Profile,
    ProfileSet, Response, SubtestScore,
};
pub use stats::{cohort_stats, StatsReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubtestKind {
    NumberWriting,
    Subitizing,
    Estimation,
    Enumeration,
    MagnitudeJudgment,
    QuantityJudgment,
    NumberLineInsertion,
    BackwardCounting,
    Addition,
    Subtraction,
    Decomposition,
    AscendingOrdering,
    DescendingOrdering,
    Multiplication,
}

impl SubtestKind {
    pub const ALL: [SubtestKind; 14] = [
        SubtestKind::NumberWriting,
        SubtestKind::Subitizing,
        SubtestKind::Estimation,
        SubtestKind::Enumeration,
        SubtestKind::MagnitudeJudgment,
        SubtestKind::QuantityJudgment,
        SubtestKind::NumberLineInsertion,
        SubtestKind::BackwardCounting,
        SubtestKind::Addition,
        SubtestKind::Subtraction,
        SubtestKind::Decomposition,
        SubtestKind::AscendingOrdering,
        SubtestKind::DescendingOrdering,
        SubtestKind::Multiplication,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SubtestKind::NumberWriting => "number_writing",
            SubtestKind::Subitizing => "subitizing",
            SubtestKind::Estimation => "estimation",
            SubtestKind::Enumeration => "enumeration",
            SubtestKind::MagnitudeJudgment => "magnitude_judgment",
            SubtestKind::QuantityJudgment => "quantity_judgment",
            SubtestKind::NumberLineInsertion => "number_line_insertion",
            SubtestKind::BackwardCounting => "backward_counting",
            SubtestKind::Addition => "addition",
            SubtestKind::Subtraction => "subtraction",
            SubtestKind::Decomposition => "decomposition",
            SubtestKind::AscendingOrdering => "ascending_ordering",
            SubtestKind::DescendingOrdering => "descending_ordering",
            SubtestKind::Multiplication => "multiplication",
        }
    }
}

impl fmt::Display for SubtestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SubtestKind {
    type Err = AssessmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubtestKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| AssessmentError::UnknownSubtest(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Grade1,
    Grade2Mid,
    Grade2End,
}

impl Grade {
    pub fn name(self) -> &'static str {
        match self {
            Grade::Grade1 => "grade1",
            Grade::Grade2Mid => "grade2_mid",
            Grade::Grade2End => "grade2_end",
        }
    }

    /// Subtests in administration order.
    pub fn subtests(self) -> Vec<SubtestKind> {
        use SubtestKind::*;
        match self {
            Grade::Grade1 => SubtestKind::ALL[..10].to_vec(),
            Grade::Grade2Mid => vec![
                NumberWriting,
                Subitizing,
                Estimation,
                MagnitudeJudgment,
                BackwardCounting,
                Addition,
                Subtraction,
                Decomposition,
                AscendingOrdering,
                DescendingOrdering,
            ],
            Grade::Grade2End => {
                let mut kinds = Grade::Grade2Mid.subtests();
                kinds.push(Multiplication);
                kinds
            }
        }
    }

    fn stream_id(self) -> u64 {
        match self {
            Grade::Grade1 => 1,
            Grade::Grade2Mid => 2,
            Grade::Grade2End => 3,
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Grade {
    type Err = AssessmentError;

    /// Accepts `grade1`/`1`, `grade2_mid`/`2mid`, `grade2_end`/`2end`/`2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grade1" | "1" => Ok(Grade::Grade1),
            "grade2_mid" | "2mid" | "2-mid" => Ok(Grade::Grade2Mid),
            "grade2_end" | "2end" | "2-end" | "2" => Ok(Grade::Grade2End),
            _ => Err(AssessmentError::UnknownGrade(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssessmentError {
    #[error("unknown subtest {0:?}")]
    UnknownSubtest(String),
    #[error("unknown grade {0:?}")]
    UnknownGrade(String),
    #[error("no item {subtest}#{index} in this battery")]
    UnknownItem { subtest: String, index: usize },
    #[error("item {subtest}#{index} answered twice by {student}")]
    DuplicateResponse { student: String, subtest: SubtestKind, index: usize },
    #[error("invalid battery configuration: {0}")]
    InvalidConfig(String),
    #[error("low threshold {0} must lie strictly between 0 and 1")]
    InvalidThreshold(f64),
    #[error("cutoff {0} must lie between 0 and 1")]
    InvalidCutoff(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("groups are not comparable: {0}")]
    IncompatibleGroups(String),
    #[error("malformed responses file at line {line}: {reason}")]
    MalformedResponses { line: u64, reason: String },
}
