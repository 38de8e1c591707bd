//! The numeracy engine as an HTTP service and a batch CLI.

pub mod api;
pub mod cli;
pub mod error;
pub mod service;

pub use api::Workbench;
pub use error::{ApiError, ErrorCode};
