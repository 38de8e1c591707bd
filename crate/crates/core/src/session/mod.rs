//! Event-sourced sessions. The log is the only persisted state; the
//! session state is always a left fold over it.

mod activity;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use activity::{Activity, Catalog};

use crate::assessment::SubtestKind;
use crate::board::{BoardError, Move, StrawBoard};
use crate::rectangles::{Derivation, KnownFactBase, RectError};
use crate::transcoder::{transcode, Code, Rendering, TranscodeError, Transcription};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("unknown activity {0:?}")]
    UnknownActivity(String),
    #[error("invalid activity {id}: {reason}")]
    InvalidActivity { id: String, reason: String },
    #[error("expected sequence number {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("event for session {got} applied to session {expected}")]
    SessionMismatch { expected: String, got: String },
    #[error("session is closed")]
    SessionClosed,
    #[error("session is already open")]
    AlreadyOpen,
    #[error("item {subtest}#{index} was not presented")]
    ItemNotPresented { subtest: SubtestKind, index: usize },
    #[error("item {subtest}#{index} was already answered")]
    ItemAlreadyAnswered { subtest: SubtestKind, index: usize },
    #[error("corrupt log at event {position}: {reason}")]
    CorruptLog { position: usize, reason: String },
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error(transparent)]
    Transcode(#[from] TranscodeError),
    #[error(transparent)]
    Rect(#[from] RectError),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    SessionOpened {
        student_ref: String,
        activity_id: String,
    },
    BoardMove(Move),
    TranscodeRequest {
        from: Code,
        rendering: Rendering,
        to: Code,
    },
    /// A derivation built by the learner, checked against the facts they
    /// were allowed to use.
    DerivationStep {
        base: Vec<u32>,
        derivation: Derivation,
    },
    ItemPresented {
        subtest: SubtestKind,
        item_index: usize,
    },
    ItemAnswered {
        subtest: SubtestKind,
        item_index: usize,
        answer: Option<String>,
    },
    SessionClosed {},
}

/// `{ts, session_id, seq, kind, payload}`, one per log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Unix milliseconds; informative only, never read by replay.
    pub ts: u64,
    pub session_id: String,
    pub seq: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemRef {
    pub subtest: SubtestKind,
    pub item_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedAnswer {
    pub subtest: SubtestKind,
    pub item_index: usize,
    pub answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub student_ref: String,
    pub activity_id: String,
    pub board: StrawBoard,
    pub board_value: u32,
    pub last_transcription: Option<Transcription>,
    pub derivation: Option<Derivation>,
    pub presented: Vec<ItemRef>,
    pub answers: Vec<RecordedAnswer>,
    pub closed: bool,
    pub last_seq: u64,
}

impl SessionState {
    /// The state after `event`, or the error that keeps it from applying.
    pub fn step(prev: Option<&SessionState>, event: &SessionEvent) -> Result<SessionState, SessionError> {
        let Some(prev) = prev else {
            return match &event.body {
                EventBody::SessionOpened {
                    student_ref,
                    activity_id,
                } if event.seq == 1 => Ok(SessionState {
                    session_id: event.session_id.clone(),
                    student_ref: student_ref.clone(),
                    activity_id: activity_id.clone(),
                    board: StrawBoard::new(),
                    board_value: 0,
                    last_transcription: None,
                    derivation: None,
                    presented: Vec::new(),
                    answers: Vec::new(),
                    closed: false,
                    last_seq: 1,
                }),
                EventBody::SessionOpened { .. } => Err(SessionError::SequenceGap {
                    expected: 1,
                    got: event.seq,
                }),
                _ => Err(SessionError::CorruptLog {
                    position: 0,
                    reason: "log must start with session_opened".into(),
                }),
            };
        };

        if event.session_id != prev.session_id {
            return Err(SessionError::SessionMismatch {
                expected: prev.session_id.clone(),
                got: event.session_id.clone(),
            });
        }
        if event.seq != prev.last_seq + 1 {
            return Err(SessionError::SequenceGap {
                expected: prev.last_seq + 1,
                got: event.seq,
            });
        }
        if prev.closed {
            return Err(SessionError::SessionClosed);
        }

        let mut next = prev.clone();
        next.last_seq = event.seq;
        match &event.body {
            EventBody::SessionOpened { .. } => return Err(SessionError::AlreadyOpen),
            EventBody::BoardMove(m) => {
                next.board = prev.board.apply(*m)?;
                next.board_value = next.board.total_value();
            }
            EventBody::TranscodeRequest { from, rendering, to } => {
                let input = Transcription::parse(*from, rendering.clone())?;
                next.last_transcription = Some(transcode(&input, *to)?);
            }
            EventBody::DerivationStep { base, derivation } => {
                derivation.verify(&KnownFactBase::from_factors(base)?)?;
                next.derivation = Some(derivation.clone());
            }
            EventBody::ItemPresented { subtest, item_index } => {
                let item = ItemRef {
                    subtest: *subtest,
                    item_index: *item_index,
                };
                if !next.presented.contains(&item) {
                    next.presented.push(item);
                }
            }
            EventBody::ItemAnswered {
                subtest,
                item_index,
                answer,
            } => {
                let item = ItemRef {
                    subtest: *subtest,
                    item_index: *item_index,
                };
                if !prev.presented.contains(&item) {
                    return Err(SessionError::ItemNotPresented {
                        subtest: *subtest,
                        index: *item_index,
                    });
                }
                if prev
                    .answers
                    .iter()
                    .any(|a| a.subtest == *subtest && a.item_index == *item_index)
                {
                    return Err(SessionError::ItemAlreadyAnswered {
                        subtest: *subtest,
                        index: *item_index,
                    });
                }
                next.answers.push(RecordedAnswer {
                    subtest: *subtest,
                    item_index: *item_index,
                    answer: answer.clone(),
                });
            }
            EventBody::SessionClosed {} => next.closed = true,
        }
        Ok(next)
    }
}

/// A session's state and the log it was folded from.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    state: SessionState,
    log: Vec<SessionEvent>,
}

pub fn now_millis() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Session {
    /// Opens a session with a fresh id and an empty board.
    pub fn start(catalog: &Catalog, student_ref: &str, activity_id: &str, ts: u64) -> Result<Session, SessionError> {
        Session::start_with_id(catalog, &uuid::Uuid::new_v4().to_string(), student_ref, activity_id, ts)
    }

    /// As [`Session::start`] with a caller-chosen id.
    pub fn start_with_id(
        catalog: &Catalog,
        session_id: &str,
        student_ref: &str,
        activity_id: &str,
        ts: u64,
    ) -> Result<Session, SessionError> {
        if catalog.get(activity_id).is_none() {
            return Err(SessionError::UnknownActivity(activity_id.to_string()));
        }
        let opened = SessionEvent {
            ts,
            session_id: session_id.to_string(),
            seq: 1,
            body: EventBody::SessionOpened {
                student_ref: student_ref.to_string(),
                activity_id: activity_id.to_string(),
            },
        };
        let state = SessionState::step(None, &opened)?;
        Ok(Session {
            state,
            log: vec![opened],
        })
    }

    pub fn id(&self) -> &str {
        &self.state.session_id
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn log(&self) -> &[SessionEvent] {
        &self.log
    }

    pub fn next_seq(&self) -> u64 {
        self.state.last_seq + 1
    }

    /// An event for this session with the next sequence number.
    pub fn next_event(&self, body: EventBody, ts: u64) -> SessionEvent {
        SessionEvent {
            ts,
            session_id: self.id().to_string(),
            seq: self.next_seq(),
            body,
        }
    }

    /// Appends `event` if it applies; otherwise the session is unchanged.
    pub fn apply(&mut self, event: SessionEvent) -> Result<&SessionState, SessionError> {
        self.state = SessionState::step(Some(&self.state), &event)?;
        self.log.push(event);
        Ok(&self.state)
    }

    /// Folds a log into a session.
    pub fn replay(log: Vec<SessionEvent>) -> Result<Session, SessionError> {
        let corrupt = |position: usize, reason: String| SessionError::CorruptLog { position, reason };
        let mut state: Option<SessionState> = None;
        for (position, event) in log.iter().enumerate() {
            state = Some(SessionState::step(state.as_ref(), event).map_err(|e| match e {
                SessionError::CorruptLog { reason, .. } => corrupt(position, reason),
                other => corrupt(position, other.to_string()),
            })?);
        }
        let state = state.ok_or_else(|| corrupt(0, "empty log".into()))?;
        Ok(Session { state, log })
    }

    /// One JSON record per line.
    pub fn save(&self) -> String {
        let mut out = String::new();
        for event in &self.log {
            out.push_str(&encode_event(event));
            out.push('\n');
        }
        out
    }

    pub fn load(document: &str) -> Result<Session, SessionError> {
        Session::replay(parse_log(document)?)
    }
}

pub fn encode_event(event: &SessionEvent) -> String {
    serde_json::to_string(event).expect("events always serialize")
}

/// Parses a line-delimited log without replaying it.
pub fn parse_log(document: &str) -> Result<Vec<SessionEvent>, SessionError> {
    document
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(position, line)| {
            serde_json::from_str(line).map_err(|e| SessionError::CorruptLog {
                position,
                reason: e.to_string(),
            })
        })
        .collect()
}
