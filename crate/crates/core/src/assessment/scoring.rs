use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::battery::ItemSet;
use super::{AssessmentError, Grade, SubtestKind};

pub const PROFILE_SET_VERSION: u32 = 1;
/// Subtests scored low before a child is flagged.
pub const AT_RISK_LOW_SUBTESTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub student_id: String,
    pub subtest: String,
    pub item_index: usize,
    /// `None` is an omission.
    pub answer: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    Incorrect,
    Omitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtestScore {
    pub kind: SubtestKind,
    pub max: u32,
    pub correct: u32,
    pub omitted: u32,
    pub outcomes: Vec<Outcome>,
}

impl SubtestScore {
    pub fn answered(&self) -> u32 {
        self.max - self.omitted
    }
}

/// Fraction of the subtest maximum below which a score counts as low.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LowThreshold(f64);

impl LowThreshold {
    pub fn new(fraction: f64) -> Result<Self, AssessmentError> {
        if fraction > 0.0 && fraction < 1.0 {
            Ok(LowThreshold(fraction))
        } else {
            Err(AssessmentError::InvalidThreshold(fraction))
        }
    }

    pub fn fraction(self) -> f64 {
        self.0
    }

    pub fn is_low(self, correct: u32, max: u32) -> bool {
        (correct as f64) < self.0 * max as f64
    }
}

impl Default for LowThreshold {
    fn default() -> Self {
        LowThreshold(0.5)
    }
}

impl TryFrom<f64> for LowThreshold {
    type Error = AssessmentError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        LowThreshold::new(v)
    }
}

impl From<LowThreshold> for f64 {
    fn from(t: LowThreshold) -> f64 {
        t.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub student_id: String,
    pub subtests: Vec<SubtestScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_score: Option<f64>,
    pub low_threshold: LowThreshold,
    pub low: Vec<SubtestKind>,
    pub at_risk: bool,
}

impl Profile {
    pub fn total_correct(&self) -> u32 {
        self.subtests.iter().map(|s| s.correct).sum()
    }

    pub fn total_max(&self) -> u32 {
        self.subtests.iter().map(|s| s.max).sum()
    }

    pub fn total_omitted(&self) -> u32 {
        self.subtests.iter().map(|s| s.omitted).sum()
    }

    pub fn score(&self, kind: SubtestKind) -> Option<&SubtestScore> {
        self.subtests.iter().find(|s| s.kind == kind)
    }

    pub fn low_subtests(&self, threshold: LowThreshold) -> Vec<SubtestKind> {
        self.subtests
            .iter()
            .filter(|s| threshold.is_low(s.correct, s.max))
            .map(|s| s.kind)
            .collect()
    }

    /// Recomputes the derived flags at `threshold`.
    pub fn reflag(&mut self, threshold: LowThreshold) {
        self.low_threshold = threshold;
        self.low = self.low_subtests(threshold);
        self.at_risk = self.low.len() >= AT_RISK_LOW_SUBTESTS;
    }
}

/// True when at least four subtests are low at `threshold`.
pub fn flag_at_risk(profile: &Profile, threshold: LowThreshold) -> bool {
    profile.low_subtests(threshold).len() >= AT_RISK_LOW_SUBTESTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub version: u32,
    pub grade: Grade,
    pub seed: u64,
    pub profiles: Vec<Profile>,
}

impl ProfileSet {
    /// Attaches an imported external score (e.g. a standardized battery
    /// total) to each matching student.
    pub fn attach_external(&mut self, scores: &BTreeMap<String, f64>) {
        for p in &mut self.profiles {
            if let Some(s) = scores.get(&p.student_id) {
                p.external_score = Some(*s);
            }
        }
    }
}

/// Scores one student's responses. Responses for other students are an
/// error; missing items are omissions.
pub fn score_responses(
    items: &ItemSet,
    student_id: &str,
    responses: &[Response],
    threshold: LowThreshold,
) -> Result<Profile, AssessmentError> {
    let mut answers: BTreeMap<(SubtestKind, usize), Option<&str>> = BTreeMap::new();
    for r in responses {
        let unknown = || AssessmentError::UnknownItem {
            subtest: r.subtest.clone(),
            index: r.item_index,
        };
        if r.student_id != student_id {
            return Err(AssessmentError::MalformedResponses {
                line: 0,
                reason: format!("response for {} while scoring {student_id}", r.student_id),
            });
        }
        let kind: SubtestKind = r.subtest.parse().map_err(|_| unknown())?;
        items.item(kind, r.item_index).ok_or_else(unknown)?;
        if answers.insert((kind, r.item_index), r.answer.as_deref()).is_some() {
            return Err(AssessmentError::DuplicateResponse {
                student: student_id.to_string(),
                subtest: kind,
                index: r.item_index,
            });
        }
    }

    let subtests = items
        .subtests
        .iter()
        .map(|sub| {
            let outcomes: Vec<Outcome> = sub
                .items
                .iter()
                .enumerate()
                .map(|(i, item)| match answers.get(&(sub.kind, i)).copied().flatten() {
                    None => Outcome::Omitted,
                    Some(text) if text.trim().is_empty() => Outcome::Omitted,
                    Some(text) => match item.correct_answer.parse_like(text) {
                        Some(a) if a == item.correct_answer => Outcome::Correct,
                        _ => Outcome::Incorrect,
                    },
                })
                .collect();
            let count = |o| outcomes.iter().filter(|x| **x == o).count() as u32;
            SubtestScore {
                kind: sub.kind,
                max: sub.items.len() as u32,
                correct: count(Outcome::Correct),
                omitted: count(Outcome::Omitted),
                outcomes,
            }
        })
        .collect();

    let mut profile = Profile {
        student_id: student_id.to_string(),
        subtests,
        external_score: None,
        low_threshold: threshold,
        low: Vec::new(),
        at_risk: false,
    };
    profile.reflag(threshold);
    Ok(profile)
}

/// Scores every student that appears in `responses`, ordered by id.
pub fn score_all(items: &ItemSet, responses: &[Response], threshold: LowThreshold) -> Result<ProfileSet, AssessmentError> {
    let mut by_student: BTreeMap<&str, Vec<Response>> = BTreeMap::new();
    for r in responses {
        by_student.entry(&r.student_id).or_default().push(r.clone());
    }
    let profiles = by_student
        .into_iter()
        .map(|(student, rows)| score_responses(items, student, &rows, threshold))
        .collect::<Result<_, _>>()?;
    Ok(ProfileSet {
        version: PROFILE_SET_VERSION,
        grade: items.grade,
        seed: items.seed,
        profiles,
    })
}

#[derive(Deserialize)]
struct ResponseRow {
    student_id: String,
    subtest: String,
    item_index: usize,
    answer: String,
}

/// Reads `student_id,subtest,item_index,answer` rows; an empty answer is an
/// omission.
pub fn read_responses(reader: impl Read) -> Result<Vec<Response>, AssessmentError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in csv.deserialize::<ResponseRow>() {
        let row = row.map_err(|e| AssessmentError::MalformedResponses {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        out.push(Response {
            student_id: row.student_id,
            subtest: row.subtest,
            item_index: row.item_index,
            answer: (!row.answer.is_empty()).then_some(row.answer),
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct ExternalRow {
    student_id: String,
    score: f64,
}

/// Reads `student_id,score` rows.
pub fn read_external_scores(reader: impl Read) -> Result<BTreeMap<String, f64>, AssessmentError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    csv.deserialize::<ExternalRow>()
        .map(|row| {
            row.map(|r| (r.student_id, r.score))
                .map_err(|e| AssessmentError::MalformedResponses {
                    line: e.position().map(|p| p.line()).unwrap_or(0),
                    reason: e.to_string(),
                })
        })
        .collect()
}
