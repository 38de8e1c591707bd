//! The straws-in-bundles board.
//!
//! Loose straws are units, a bundle is ten straws tied together and a
//! hundred is ten bundles tied together. Regrouping never happens on its
//! own: a board with fourteen loose straws stays that way until somebody
//! ties a bundle.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest value the three-place board can hold.
pub const MAX_BOARD_VALUE: u32 = 999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct StrawBoard {
    pub loose: u32,
    pub tens: u32,
    pub hundreds: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    AddLoose { count: u32 },
    RemoveLoose { count: u32 },
    BundleTen,
    UnbundleTen,
    BundleHundred,
    UnbundleHundred,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::AddLoose { count } => write!(f, "add {count} loose"),
            Move::RemoveLoose { count } => write!(f, "remove {count} loose"),
            Move::BundleTen => f.write_str("bundle ten"),
            Move::UnbundleTen => f.write_str("unbundle ten"),
            Move::BundleHundred => f.write_str("bundle hundred"),
            Move::UnbundleHundred => f.write_str("unbundle hundred"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("cannot {action} on board {board}: {reason}")]
    PreconditionViolated {
        action: Move,
        board: StrawBoard,
        reason: &'static str,
    },
}

impl fmt::Display for StrawBoard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{loose: {}, tens: {}, hundreds: {}}}",
            self.loose, self.tens, self.hundreds
        )
    }
}

/// Result of regrouping a board, together with the moves that got there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canonicalized {
    pub board: StrawBoard,
    pub moves: Vec<Move>,
}

impl StrawBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_counts(loose: u32, tens: u32, hundreds: u32) -> Self {
        Self {
            loose,
            tens,
            hundreds,
        }
    }

    pub fn total_value(&self) -> u32 {
        self.loose + 10 * self.tens + 100 * self.hundreds
    }

    pub fn is_canonical(&self) -> bool {
        self.loose <= 9 && self.tens <= 9
    }

    pub fn apply(&self, action: Move) -> Result<StrawBoard, BoardError> {
        let fail = |reason| BoardError::PreconditionViolated {
            action,
            board: *self,
            reason,
        };
        let mut next = *self;
        match action {
            Move::AddLoose { count } => {
                if count == 0 {
                    return Err(fail("count must be at least 1"));
                }
                if self.total_value() as u64 + count as u64 > MAX_BOARD_VALUE as u64 {
                    return Err(fail("board holds at most 999"));
                }
                next.loose += count;
            }
            Move::RemoveLoose { count } => {
                if count == 0 {
                    return Err(fail("count must be at least 1"));
                }
                if self.loose < count {
                    return Err(fail("not enough loose straws"));
                }
                next.loose -= count;
            }
            Move::BundleTen => {
                if self.loose < 10 {
                    return Err(fail("a bundle needs ten loose straws"));
                }
                next.loose -= 10;
                next.tens += 1;
            }
            Move::UnbundleTen => {
                if self.tens == 0 {
                    return Err(fail("no bundle of ten to untie"));
                }
                next.tens -= 1;
                next.loose += 10;
            }
            Move::BundleHundred => {
                if self.tens < 10 {
                    return Err(fail("a hundred needs ten bundles"));
                }
                next.tens -= 10;
                next.hundreds += 1;
            }
            Move::UnbundleHundred => {
                if self.hundreds == 0 {
                    return Err(fail("no hundred to untie"));
                }
                next.hundreds -= 1;
                next.tens += 10;
            }
        }
        Ok(next)
    }

    /// Ties bundles until no place holds more than nine, recording each tie.
    pub fn canonicalize(&self) -> Canonicalized {
        let mut moves = Vec::new();
        let mut board = *self;
        while board.loose >= 10 {
            moves.push(Move::BundleTen);
            board.loose -= 10;
            board.tens += 1;
        }
        while board.tens >= 10 {
            moves.push(Move::BundleHundred);
            board.tens -= 10;
            board.hundreds += 1;
        }
        Canonicalized { board, moves }
    }
}

pub fn new_board() -> StrawBoard {
    StrawBoard::new()
}
