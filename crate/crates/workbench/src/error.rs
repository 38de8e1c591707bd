use std::fmt;

use numeracy_core::assessment::AssessmentError;
use numeracy_core::board::BoardError;
use numeracy_core::rectangles::RectError;
use numeracy_core::session::SessionError;
use numeracy_core::transcoder::TranscodeError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// One code per domain error variant, plus the service's own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCode {
    // board
    PreconditionViolated,
    // transcoder
    OutOfRange,
    ParseError,
    UnknownCode,
    RenderingMismatch,
    // rectangles
    OutOfHouse,
    NotDerivable,
    MalformedDerivation,
    UnknownFact,
    DepthBeyondBound,
    TooManyDerivations,
    InvalidFactor,
    // assessment
    UnknownSubtest,
    UnknownGrade,
    UnknownItem,
    DuplicateResponse,
    InvalidConfig,
    InvalidThreshold,
    InvalidCutoff,
    DegenerateInput,
    IncompatibleGroups,
    MalformedResponses,
    // sessions
    UnknownActivity,
    InvalidActivity,
    SequenceGap,
    SessionMismatch,
    SessionClosed,
    AlreadyOpen,
    ItemNotPresented,
    ItemAlreadyAnswered,
    CorruptLog,
    Io,
    // service
    NotFound,
    BadRequest,
}

impl ErrorCode {
    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    pub fn http_status(self) -> u16 {
        use ErrorCode::*;
        match self {
            NotFound | UnknownActivity => 404,
            BadRequest => 400,
            SequenceGap | SessionMismatch | SessionClosed | AlreadyOpen | ItemAlreadyAnswered => 409,
            Io | CorruptLog => 500,
            _ => 422,
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    pub context: Value,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>, context: Value) -> Self {
        ApiError {
            code,
            message: message.into(),
            context,
        }
    }

    pub fn not_found(what: &str) -> Self {
        ApiError::new(ErrorCode::NotFound, format!("{what} not found"), json!({ "resource": what }))
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::BadRequest, message, json!({}))
    }
}

impl From<BoardError> for ApiError {
    fn from(e: BoardError) -> Self {
        let message = e.to_string();
        match e {
            BoardError::PreconditionViolated { action, board, reason } => ApiError::new(
                ErrorCode::PreconditionViolated,
                message,
                json!({ "action": action, "board": board, "reason": reason }),
            ),
        }
    }
}

impl From<TranscodeError> for ApiError {
    fn from(e: TranscodeError) -> Self {
        let message = e.to_string();
        let (code, context) = match e {
            TranscodeError::OutOfRange { value } => (ErrorCode::OutOfRange, json!({ "value": value })),
            TranscodeError::ParseError { text, position } => {
                (ErrorCode::ParseError, json!({ "text": text, "position": position }))
            }
            TranscodeError::UnknownCode(code) => (ErrorCode::UnknownCode, json!({ "code": code })),
            TranscodeError::RenderingMismatch { code } => (ErrorCode::RenderingMismatch, json!({ "code": code })),
        };
        ApiError::new(code, message, context)
    }
}

impl From<RectError> for ApiError {
    fn from(e: RectError) -> Self {
        let message = e.to_string();
        let (code, context) = match e {
            RectError::OutOfHouse { rows, cols } => (ErrorCode::OutOfHouse, json!({ "rows": rows, "cols": cols })),
            RectError::NotDerivable { rect, max_depth } => {
                (ErrorCode::NotDerivable, json!({ "rect": rect, "max_depth": max_depth }))
            }
            RectError::MalformedDerivation { rect, reason } => {
                (ErrorCode::MalformedDerivation, json!({ "rect": rect, "reason": reason }))
            }
            RectError::UnknownFact(rect) => (ErrorCode::UnknownFact, json!({ "rect": rect })),
            RectError::DepthBeyondBound(depth) => (ErrorCode::DepthBeyondBound, json!({ "max_depth": depth })),
            RectError::TooManyDerivations { rect, count, limit } => (
                ErrorCode::TooManyDerivations,
                json!({ "rect": rect, "count": count, "limit": limit }),
            ),
            RectError::InvalidFactor(f) => (ErrorCode::InvalidFactor, json!({ "factor": f })),
        };
        ApiError::new(code, message, context)
    }
}

impl From<AssessmentError> for ApiError {
    fn from(e: AssessmentError) -> Self {
        let message = e.to_string();
        let (code, context) = match e {
            AssessmentError::UnknownSubtest(s) => (ErrorCode::UnknownSubtest, json!({ "subtest": s })),
            AssessmentError::UnknownGrade(g) => (ErrorCode::UnknownGrade, json!({ "grade": g })),
            AssessmentError::UnknownItem { subtest, index } => {
                (ErrorCode::UnknownItem, json!({ "subtest": subtest, "index": index }))
            }
            AssessmentError::DuplicateResponse { student, subtest, index } => (
                ErrorCode::DuplicateResponse,
                json!({ "student_id": student, "subtest": subtest, "index": index }),
            ),
            AssessmentError::InvalidConfig(why) => (ErrorCode::InvalidConfig, json!({ "reason": why })),
            AssessmentError::InvalidThreshold(t) => (ErrorCode::InvalidThreshold, json!({ "threshold": t })),
            AssessmentError::InvalidCutoff(c) => (ErrorCode::InvalidCutoff, json!({ "cutoff": c })),
            AssessmentError::DegenerateInput(why) => (ErrorCode::DegenerateInput, json!({ "reason": why })),
            AssessmentError::IncompatibleGroups(why) => (ErrorCode::IncompatibleGroups, json!({ "reason": why })),
            AssessmentError::MalformedResponses { line, reason } => {
                (ErrorCode::MalformedResponses, json!({ "line": line, "reason": reason }))
            }
        };
        ApiError::new(code, message, context)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        let (code, context) = match e {
            SessionError::UnknownActivity(id) => (ErrorCode::UnknownActivity, json!({ "activity_id": id })),
            SessionError::InvalidActivity { id, reason } => {
                (ErrorCode::InvalidActivity, json!({ "activity_id": id, "reason": reason }))
            }
            SessionError::SequenceGap { expected, got } => {
                (ErrorCode::SequenceGap, json!({ "expected": expected, "got": got }))
            }
            SessionError::SessionMismatch { expected, got } => {
                (ErrorCode::SessionMismatch, json!({ "expected": expected, "got": got }))
            }
            SessionError::SessionClosed => (ErrorCode::SessionClosed, json!({})),
            SessionError::AlreadyOpen => (ErrorCode::AlreadyOpen, json!({})),
            SessionError::ItemNotPresented { subtest, index } => {
                (ErrorCode::ItemNotPresented, json!({ "subtest": subtest, "index": index }))
            }
            SessionError::ItemAlreadyAnswered { subtest, index } => {
                (ErrorCode::ItemAlreadyAnswered, json!({ "subtest": subtest, "index": index }))
            }
            SessionError::CorruptLog { position, reason } => {
                (ErrorCode::CorruptLog, json!({ "position": position, "reason": reason }))
            }
            SessionError::Board(e) => return e.into(),
            SessionError::Transcode(e) => return e.into(),
            SessionError::Rect(e) => return e.into(),
            SessionError::Io(why) => (ErrorCode::Io, json!({ "reason": why })),
        };
        ApiError::new(code, message, context)
    }
}

impl From<serde_json::Error> for ApiError {
    fn from(e: serde_json::Error) -> Self {
        ApiError::new(
            ErrorCode::BadRequest,
            format!("malformed request: {e}"),
            json!({ "line": e.line(), "column": e.column() }),
        )
    }
}
