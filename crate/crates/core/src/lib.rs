//! Arithmetic manipulatives: a place-value straw board, a three-code number
//! transcoder, a rectangle-diagram multiplication planner, screening
//! batteries with scoring and cohort statistics, and event-sourced
//! sessions tying them together.

pub mod assessment;
pub mod board;
pub mod rectangles;
pub mod session;
pub mod transcoder;

pub use board::{Move, StrawBoard};
pub use rectangles::{Derivation, KnownFactBase, PlanOptions, RectDiagram};
pub use transcoder::{Code, Transcription};
