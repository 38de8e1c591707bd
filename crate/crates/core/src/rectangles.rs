//! Rectangle diagrams, the house of rectangles, and a planner that derives
//! unknown products from known facts.
//!
//! A derivation is a tree whose leaves are known facts and whose inner
//! nodes are one of four steps: split the rows, split the columns, extend
//! with ghost squares and take them away again, or turn the rectangle.
//! Its cost is the number of steps.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const HOUSE_SIDE: u8 = 10;
/// Deepest tree [`enumerate_derivations`] will materialize.
pub const MAX_ENUMERATION_DEPTH: u8 = 4;
/// Refuse enumerations that would produce more trees than this.
pub const ENUMERATION_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RectError {
    #[error("{rows}×{cols} does not fit the 10×10 house")]
    OutOfHouse { rows: u32, cols: u32 },
    #[error("{rect} is not derivable within depth {max_depth}")]
    NotDerivable { rect: RectDiagram, max_depth: u8 },
    #[error("malformed derivation at {rect}: {reason}")]
    MalformedDerivation { rect: RectDiagram, reason: String },
    #[error("leaf {0} is not a known fact")]
    UnknownFact(RectDiagram),
    #[error("enumeration depth {0} exceeds the bound of 4")]
    DepthBeyondBound(u8),
    #[error("enumeration of {rect} would yield {count} derivations (limit {limit})")]
    TooManyDerivations { rect: RectDiagram, count: u64, limit: u64 },
    #[error("invalid factor {0}")]
    InvalidFactor(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u32; 2]", into = "[u32; 2]")]
pub struct RectDiagram {
    rows: u8,
    cols: u8,
}

impl TryFrom<[u32; 2]> for RectDiagram {
    type Error = RectError;

    fn try_from([rows, cols]: [u32; 2]) -> Result<Self, Self::Error> {
        RectDiagram::new(rows, cols)
    }
}

impl From<RectDiagram> for [u32; 2] {
    fn from(r: RectDiagram) -> Self {
        [r.rows as u32, r.cols as u32]
    }
}

impl RectDiagram {
    pub fn new(rows: u32, cols: u32) -> Result<Self, RectError> {
        let side = 1..=HOUSE_SIDE as u32;
        if !side.contains(&rows) || !side.contains(&cols) {
            return Err(RectError::OutOfHouse { rows, cols });
        }
        Ok(RectDiagram {
            rows: rows as u8,
            cols: cols as u8,
        })
    }

    pub fn rows(&self) -> u32 {
        self.rows as u32
    }

    pub fn cols(&self) -> u32 {
        self.cols as u32
    }

    pub fn area(&self) -> u32 {
        self.rows() * self.cols()
    }

    pub fn transpose(&self) -> RectDiagram {
        RectDiagram {
            rows: self.cols,
            cols: self.rows,
        }
    }

    pub fn is_unit_strip(&self) -> bool {
        self.rows == 1 || self.cols == 1
    }

    /// Every rectangle in the house, rows-major.
    pub fn all() -> impl Iterator<Item = RectDiagram> {
        (1..=HOUSE_SIDE).flat_map(|rows| (1..=HOUSE_SIDE).map(move |cols| RectDiagram { rows, cols }))
    }

    fn sized(rows: u8, cols: u8) -> Option<RectDiagram> {
        (rows >= 1 && cols >= 1 && rows <= HOUSE_SIDE && cols <= HOUSE_SIDE)
            .then_some(RectDiagram { rows, cols })
    }
}

impl fmt::Display for RectDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}×{}", self.rows, self.cols)
    }
}

impl std::str::FromStr for RectDiagram {
    type Err = String;

    /// Accepts `7x3`, `7X3` or `7×3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (rows, cols) = s
            .split_once(['x', 'X', '×'])
            .ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
        let rows = rows.trim().parse().map_err(|_| format!("bad row count in {s:?}"))?;
        let cols = cols.trim().parse().map_err(|_| format!("bad column count in {s:?}"))?;
        RectDiagram::new(rows, cols).map_err(|e| e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Known facts and the house
// ---------------------------------------------------------------------------

/// Facts a learner can recall without deriving. Always closed under
/// transpose and always containing every n×1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownFactBase {
    facts: BTreeSet<RectDiagram>,
}

impl KnownFactBase {
    /// All n×k and k×n for each factor k, plus the ones.
    pub fn from_factors(factors: &[u32]) -> Result<Self, RectError> {
        let mut facts = Vec::new();
        for &k in factors.iter().chain(std::iter::once(&1)) {
            if !(1..=HOUSE_SIDE as u32).contains(&k) {
                return Err(RectError::InvalidFactor(k));
            }
            for n in 1..=HOUSE_SIDE as u32 {
                facts.push(RectDiagram::new(n, k)?);
            }
        }
        Ok(Self::from_facts(facts))
    }

    pub fn from_facts(facts: impl IntoIterator<Item = RectDiagram>) -> Self {
        let mut set = BTreeSet::new();
        for r in facts {
            set.insert(r);
            set.insert(r.transpose());
        }
        for n in 1..=HOUSE_SIDE {
            set.insert(RectDiagram { rows: n, cols: 1 });
            set.insert(RectDiagram { rows: 1, cols: n });
        }
        KnownFactBase { facts: set }
    }

    pub fn contains(&self, r: &RectDiagram) -> bool {
        self.facts.contains(r)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RectDiagram> {
        self.facts.iter()
    }
}

/// Multiples of 2, 5 and 10, optionally of 3, and the ones.
pub fn default_base(include_threes: bool) -> KnownFactBase {
    let factors: &[u32] = if include_threes { &[2, 3, 5, 10] } else { &[2, 5, 10] };
    KnownFactBase::from_factors(factors).expect("factors are in range")
}

/// Grid coordinate in the house: column is the number of columns, row the
/// number of rows counted upward, so 1×1 sits bottom-left and 10×10
/// top-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HousePosition {
    pub column: u32,
    pub row: u32,
}

impl HousePosition {
    pub fn mirrored(&self) -> HousePosition {
        HousePosition {
            column: self.row,
            row: self.column,
        }
    }
}

pub fn house_position(r: &RectDiagram) -> HousePosition {
    HousePosition {
        column: r.cols(),
        row: r.rows(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HouseCell {
    pub rect: RectDiagram,
    pub position: HousePosition,
    pub product: u32,
    pub known: bool,
}

/// The 100 cells, top row of the house first.
pub fn house(base: &KnownFactBase) -> Vec<HouseCell> {
    (1..=HOUSE_SIDE)
        .rev()
        .flat_map(|rows| (1..=HOUSE_SIDE).map(move |cols| RectDiagram { rows, cols }))
        .map(|rect| HouseCell {
            rect,
            position: house_position(&rect),
            product: rect.area(),
            known: base.contains(&rect),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Derivations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Rows,
    Cols,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Derivation {
    Leaf {
        rect: RectDiagram,
    },
    /// `first` has `at` rows, `second` the remaining ones.
    SplitRows {
        rect: RectDiagram,
        at: u8,
        first: Box<Derivation>,
        second: Box<Derivation>,
    },
    SplitCols {
        rect: RectDiagram,
        at: u8,
        first: Box<Derivation>,
        second: Box<Derivation>,
    },
    /// `big` is `rect` grown by `extra` along `axis`; `ghost` is the strip
    /// that has to be taken away again.
    Ghost {
        rect: RectDiagram,
        extra: u8,
        axis: Axis,
        big: Box<Derivation>,
        ghost: Box<Derivation>,
    },
    Transpose {
        rect: RectDiagram,
        inner: Box<Derivation>,
    },
}

/// Additive part of the preference order: fewer steps, then fewer leaves,
/// then fewer leaves that are 1-wide strips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
struct Summary {
    cost: u32,
    leaves: u32,
    unit_leaves: u32,
}

impl std::ops::Add for Summary {
    type Output = Summary;

    fn add(self, o: Summary) -> Summary {
        Summary {
            cost: self.cost + o.cost,
            leaves: self.leaves + o.leaves,
            unit_leaves: self.unit_leaves + o.unit_leaves,
        }
    }
}

const STEP: Summary = Summary {
    cost: 1,
    leaves: 0,
    unit_leaves: 0,
};

impl Derivation {
    pub fn leaf(rect: RectDiagram) -> Self {
        Derivation::Leaf { rect }
    }

    pub fn rect(&self) -> RectDiagram {
        match self {
            Derivation::Leaf { rect }
            | Derivation::SplitRows { rect, .. }
            | Derivation::SplitCols { rect, .. }
            | Derivation::Ghost { rect, .. }
            | Derivation::Transpose { rect, .. } => *rect,
        }
    }

    pub fn children(&self) -> Vec<&Derivation> {
        match self {
            Derivation::Leaf { .. } => vec![],
            Derivation::SplitRows { first, second, .. } | Derivation::SplitCols { first, second, .. } => {
                vec![first, second]
            }
            Derivation::Ghost { big, ghost, .. } => vec![big, ghost],
            Derivation::Transpose { inner, .. } => vec![inner],
        }
    }

    pub fn op_name(&self) -> &'static str {
        match self {
            Derivation::Leaf { .. } => "leaf",
            Derivation::SplitRows { .. } => "split_rows",
            Derivation::SplitCols { .. } => "split_cols",
            Derivation::Ghost { .. } => "ghost",
            Derivation::Transpose { .. } => "transpose",
        }
    }

    fn summary(&self) -> Summary {
        match self {
            Derivation::Leaf { rect } => Summary {
                cost: 0,
                leaves: 1,
                unit_leaves: rect.is_unit_strip() as u32,
            },
            _ => self
                .children()
                .into_iter()
                .fold(STEP, |acc, c| acc + c.summary()),
        }
    }

    /// Number of steps (non-leaf nodes).
    pub fn cost(&self) -> u32 {
        self.summary().cost
    }

    pub fn leaf_count(&self) -> u32 {
        self.summary().leaves
    }

    /// Leaf has depth 0.
    pub fn depth(&self) -> u32 {
        self.children()
            .into_iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<RectDiagram> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<RectDiagram>) {
        match self {
            Derivation::Leaf { rect } => out.push(*rect),
            _ => self.children().into_iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Operator rank and parameters, in tie-break order.
    fn local_key(&self) -> (u8, u8, u8, RectDiagram) {
        match self {
            Derivation::Leaf { rect } => (0, 0, 0, *rect),
            Derivation::SplitRows { rect, at, .. } => (1, *at, 0, *rect),
            Derivation::SplitCols { rect, at, .. } => (2, *at, 0, *rect),
            Derivation::Ghost { rect, extra, axis, .. } => (3, *axis as u8, *extra, *rect),
            Derivation::Transpose { rect, .. } => (4, 0, 0, *rect),
        }
    }

    /// Computes the product, checking every structural invariant on the way.
    pub fn evaluate(&self) -> Result<u32, RectError> {
        let rect = self.rect();
        let malformed = |reason: String| RectError::MalformedDerivation { rect, reason };
        let expect = |child: &Derivation, want: Option<RectDiagram>, role: &str| -> Result<u32, RectError> {
            match want {
                Some(want) if child.rect() == want => child.evaluate(),
                Some(want) => Err(malformed(format!(
                    "{role} should be {want}, found {}",
                    child.rect()
                ))),
                None => Err(malformed(format!("{role} does not fit the house"))),
            }
        };
        let value = match self {
            Derivation::Leaf { .. } => rect.area(),
            Derivation::SplitRows { at, first, second, .. } => {
                if *at == 0 || *at >= rect.rows {
                    return Err(malformed(format!("split point {at} outside 1..{}", rect.rows)));
                }
                expect(first, RectDiagram::sized(*at, rect.cols), "first part")?
                    + expect(second, RectDiagram::sized(rect.rows - at, rect.cols), "second part")?
            }
            Derivation::SplitCols { at, first, second, .. } => {
                if *at == 0 || *at >= rect.cols {
                    return Err(malformed(format!("split point {at} outside 1..{}", rect.cols)));
                }
                expect(first, RectDiagram::sized(rect.rows, *at), "first part")?
                    + expect(second, RectDiagram::sized(rect.rows, rect.cols - at), "second part")?
            }
            Derivation::Ghost { extra, axis, big, ghost, .. } => {
                if *extra == 0 {
                    return Err(malformed("ghost strip must be at least 1 wide".into()));
                }
                let (want_big, want_ghost) = match axis {
                    Axis::Rows => (
                        RectDiagram::sized(rect.rows + extra, rect.cols),
                        RectDiagram::sized(*extra, rect.cols),
                    ),
                    Axis::Cols => (
                        RectDiagram::sized(rect.rows, rect.cols + extra),
                        RectDiagram::sized(rect.rows, *extra),
                    ),
                };
                let big = expect(big, want_big, "extended rectangle")?;
                let ghost = expect(ghost, want_ghost, "ghost strip")?;
                big.checked_sub(ghost)
                    .ok_or_else(|| malformed("ghost larger than rectangle".into()))?
            }
            Derivation::Transpose { inner, .. } => expect(inner, Some(rect.transpose()), "turned rectangle")?,
        };
        if value != rect.area() {
            return Err(malformed(format!("evaluates to {value}, area is {}", rect.area())));
        }
        Ok(value)
    }

    /// Evaluates and checks that every leaf is a known fact.
    pub fn verify(&self, base: &KnownFactBase) -> Result<u32, RectError> {
        let value = self.evaluate()?;
        if let Some(unknown) = self.leaves().into_iter().find(|l| !base.contains(l)) {
            return Err(RectError::UnknownFact(unknown));
        }
        Ok(value)
    }

    /// Rewrites every split so the larger part comes first, the form the
    /// planner and the enumerator emit.
    pub fn canonical(&self) -> Derivation {
        match self {
            Derivation::Leaf { rect } => Derivation::Leaf { rect: *rect },
            Derivation::SplitRows { rect, at, first, second } => {
                let (first, second) = (first.canonical(), second.canonical());
                if *at * 2 < rect.rows {
                    Derivation::SplitRows {
                        rect: *rect,
                        at: rect.rows - at,
                        first: Box::new(second),
                        second: Box::new(first),
                    }
                } else {
                    Derivation::SplitRows {
                        rect: *rect,
                        at: *at,
                        first: Box::new(first),
                        second: Box::new(second),
                    }
                }
            }
            Derivation::SplitCols { rect, at, first, second } => {
                let (first, second) = (first.canonical(), second.canonical());
                if *at * 2 < rect.cols {
                    Derivation::SplitCols {
                        rect: *rect,
                        at: rect.cols - at,
                        first: Box::new(second),
                        second: Box::new(first),
                    }
                } else {
                    Derivation::SplitCols {
                        rect: *rect,
                        at: *at,
                        first: Box::new(first),
                        second: Box::new(second),
                    }
                }
            }
            Derivation::Ghost { rect, extra, axis, big, ghost } => Derivation::Ghost {
                rect: *rect,
                extra: *extra,
                axis: *axis,
                big: Box::new(big.canonical()),
                ghost: Box::new(ghost.canonical()),
            },
            Derivation::Transpose { rect, inner } => Derivation::Transpose {
                rect: *rect,
                inner: Box::new(inner.canonical()),
            },
        }
    }

    /// One line for the root step, e.g. `8×6 = 10×6 − 2×6 = 48`.
    pub fn headline(&self) -> String {
        let rect = self.rect();
        let area = rect.area();
        match self {
            Derivation::Leaf { .. } => format!("{rect} = {area} (known)"),
            Derivation::SplitRows { first, second, .. } | Derivation::SplitCols { first, second, .. } => {
                format!("{rect} = {} + {} = {area}", first.rect(), second.rect())
            }
            Derivation::Ghost { big, ghost, .. } => {
                format!("{rect} = {} − {} = {area}", big.rect(), ghost.rect())
            }
            Derivation::Transpose { inner, .. } => format!("{rect} = {} = {area}", inner.rect()),
        }
    }

    /// Indented breakdown, one line per node.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        self.explain_into(0, &mut out);
        out
    }

    fn explain_into(&self, indent: usize, out: &mut String) {
        out.push_str(&"  ".repeat(indent));
        out.push_str(&self.headline());
        out.push('\n');
        for child in self.children() {
            child.explain_into(indent + 1, out);
        }
    }
}

impl PartialOrd for Derivation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Preference order: fewer steps, fewer leaves, fewer 1-wide leaves; then
/// split rows before split columns before ghost before transpose, smaller
/// split point, rows before columns for ghosts, smaller ghost strip; then
/// the children in order.
impl Ord for Derivation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.summary()
            .cmp(&other.summary())
            .then_with(|| self.local_key().cmp(&other.local_key()))
            .then_with(|| self.children().cmp(&other.children()))
    }
}

// ---------------------------------------------------------------------------
// Wire form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
}

/// `{op, rect, params, value, children}`; `value` is informative and
/// recomputed on output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationWire {
    pub op: String,
    pub rect: RectDiagram,
    #[serde(default)]
    pub params: StepParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u32>,
    #[serde(default)]
    pub children: Vec<DerivationWire>,
}

impl From<&Derivation> for DerivationWire {
    fn from(d: &Derivation) -> Self {
        let params = match d {
            Derivation::SplitRows { at, .. } | Derivation::SplitCols { at, .. } => StepParams {
                at: Some(*at),
                ..Default::default()
            },
            Derivation::Ghost { extra, axis, .. } => StepParams {
                extra: Some(*extra),
                axis: Some(*axis),
                ..Default::default()
            },
            _ => StepParams::default(),
        };
        DerivationWire {
            op: d.op_name().to_string(),
            rect: d.rect(),
            params,
            value: d.evaluate().ok(),
            children: d.children().into_iter().map(DerivationWire::from).collect(),
        }
    }
}

impl TryFrom<DerivationWire> for Derivation {
    type Error = RectError;

    fn try_from(w: DerivationWire) -> Result<Self, Self::Error> {
        let rect = w.rect;
        let malformed = |reason: &str| RectError::MalformedDerivation {
            rect,
            reason: reason.to_string(),
        };
        let arity = match w.op.as_str() {
            "leaf" => 0,
            "transpose" => 1,
            "split_rows" | "split_cols" | "ghost" => 2,
            _ => return Err(malformed("unknown op")),
        };
        if w.children.len() != arity {
            return Err(malformed("wrong number of children"));
        }
        let mut children = w
            .children
            .into_iter()
            .map(Derivation::try_from)
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(Box::new);
        let mut next = || children.next().expect("arity checked");
        Ok(match w.op.as_str() {
            "leaf" => Derivation::Leaf { rect },
            "transpose" => Derivation::Transpose { rect, inner: next() },
            "split_rows" | "split_cols" => {
                let at = w.params.at.ok_or_else(|| malformed("split without params.at"))?;
                let (first, second) = (next(), next());
                if w.op == "split_rows" {
                    Derivation::SplitRows { rect, at, first, second }
                } else {
                    Derivation::SplitCols { rect, at, first, second }
                }
            }
            _ => Derivation::Ghost {
                rect,
                extra: w.params.extra.ok_or_else(|| malformed("ghost without params.extra"))?,
                axis: w.params.axis.ok_or_else(|| malformed("ghost without params.axis"))?,
                big: next(),
                ghost: next(),
            },
        })
    }
}

impl Serialize for Derivation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DerivationWire::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Derivation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = DerivationWire::deserialize(deserializer)?;
        Derivation::try_from(wire).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Planner
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub max_depth: u8,
    pub allow_ghost: bool,
    /// Widest ghost strip.
    pub max_ghost: u8,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            max_depth: 3,
            allow_ghost: true,
            max_ghost: 3,
        }
    }
}

impl PlanOptions {
    pub fn with_depth(max_depth: u8) -> Self {
        PlanOptions {
            max_depth,
            ..Default::default()
        }
    }
}

/// Where a node sits in the tree. A known fact below the root is always a
/// leaf, and a turned rectangle is never turned back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Position {
    Root,
    Inner,
    Turned,
}

#[derive(Debug, Clone, Copy)]
enum StepKind {
    SplitRows(u8),
    SplitCols(u8),
    Ghost(Axis, u8),
    Transpose,
}

struct Step {
    kind: StepKind,
    children: Vec<(RectDiagram, Position)>,
}

impl Step {
    fn build(&self, rect: RectDiagram, mut children: Vec<Derivation>) -> Derivation {
        let second = children.pop().map(Box::new);
        let first = children.pop().map(Box::new);
        match self.kind {
            StepKind::SplitRows(at) => Derivation::SplitRows {
                rect,
                at,
                first: first.unwrap(),
                second: second.unwrap(),
            },
            StepKind::SplitCols(at) => Derivation::SplitCols {
                rect,
                at,
                first: first.unwrap(),
                second: second.unwrap(),
            },
            StepKind::Ghost(axis, extra) => Derivation::Ghost {
                rect,
                extra,
                axis,
                big: first.unwrap(),
                ghost: second.unwrap(),
            },
            StepKind::Transpose => Derivation::Transpose {
                rect,
                inner: second.unwrap(),
            },
        }
    }
}

/// Every step that may be taken at `rect`. Splits are listed larger part
/// first, so 7 rows split as 4+3, 5+2 and 6+1.
fn steps(rect: RectDiagram, position: Position, options: &PlanOptions) -> Vec<Step> {
    let mut out = Vec::new();
    let (rows, cols) = (rect.rows, rect.cols);
    for at in rows.div_ceil(2).max(1)..rows {
        out.push(Step {
            kind: StepKind::SplitRows(at),
            children: vec![
                (RectDiagram { rows: at, cols }, Position::Inner),
                (RectDiagram { rows: rows - at, cols }, Position::Inner),
            ],
        });
    }
    for at in cols.div_ceil(2).max(1)..cols {
        out.push(Step {
            kind: StepKind::SplitCols(at),
            children: vec![
                (RectDiagram { rows, cols: at }, Position::Inner),
                (RectDiagram { rows, cols: cols - at }, Position::Inner),
            ],
        });
    }
    if options.allow_ghost {
        for axis in [Axis::Rows, Axis::Cols] {
            for extra in 1..=options.max_ghost {
                let (big, ghost) = match axis {
                    Axis::Rows => (RectDiagram::sized(rows + extra, cols), RectDiagram::sized(extra, cols)),
                    Axis::Cols => (RectDiagram::sized(rows, cols + extra), RectDiagram::sized(rows, extra)),
                };
                if let (Some(big), Some(ghost)) = (big, ghost) {
                    out.push(Step {
                        kind: StepKind::Ghost(axis, extra),
                        children: vec![(big, Position::Inner), (ghost, Position::Inner)],
                    });
                }
            }
        }
    }
    if position != Position::Turned && rows != cols {
        out.push(Step {
            kind: StepKind::Transpose,
            children: vec![(rect.transpose(), Position::Turned)],
        });
    }
    out
}

fn leaf_only(rect: &RectDiagram, position: Position, base: &KnownFactBase) -> bool {
    position != Position::Root && base.contains(rect)
}

/// Finds the preferred derivation by memoized recursion over
/// (rectangle, remaining depth, position).
pub struct Planner<'a> {
    base: &'a KnownFactBase,
    options: PlanOptions,
    memo: HashMap<(RectDiagram, u8, Position), Option<Rc<Derivation>>>,
}

impl<'a> Planner<'a> {
    pub fn new(base: &'a KnownFactBase, options: PlanOptions) -> Self {
        Planner {
            base,
            options,
            memo: HashMap::new(),
        }
    }

    pub fn derive(&mut self, rect: RectDiagram) -> Result<Derivation, RectError> {
        self.best(rect, self.options.max_depth, Position::Root)
            .map(|d| (*d).clone())
            .ok_or(RectError::NotDerivable {
                rect,
                max_depth: self.options.max_depth,
            })
    }

    fn best(&mut self, rect: RectDiagram, depth: u8, position: Position) -> Option<Rc<Derivation>> {
        if let Some(hit) = self.memo.get(&(rect, depth, position)) {
            return hit.clone();
        }
        let result = self.search(rect, depth, position).map(Rc::new);
        self.memo.insert((rect, depth, position), result.clone());
        result
    }

    fn search(&mut self, rect: RectDiagram, depth: u8, position: Position) -> Option<Derivation> {
        if self.base.contains(&rect) {
            // a leaf beats every expansion
            return Some(Derivation::leaf(rect));
        }
        if depth == 0 {
            return None;
        }
        let mut best: Option<Derivation> = None;
        for step in steps(rect, position, &self.options) {
            let mut children = Vec::with_capacity(step.children.len());
            for &(child, child_position) in &step.children {
                match self.best(child, depth - 1, child_position) {
                    Some(d) => children.push((*d).clone()),
                    None => break,
                }
            }
            if children.len() != step.children.len() {
                continue;
            }
            let candidate = step.build(rect, children);
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
        }
        best
    }
}

/// The preferred minimal-cost derivation of `rect`.
pub fn derive(rect: RectDiagram, base: &KnownFactBase, options: PlanOptions) -> Result<Derivation, RectError> {
    Planner::new(base, options).derive(rect)
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

struct Enumerator<'a> {
    base: &'a KnownFactBase,
    options: PlanOptions,
    counts: HashMap<(RectDiagram, u8, Position), u64>,
    trees: HashMap<(RectDiagram, u8, Position), Rc<Vec<Derivation>>>,
}

impl Enumerator<'_> {
    fn count(&mut self, rect: RectDiagram, depth: u8, position: Position) -> u64 {
        if let Some(&n) = self.counts.get(&(rect, depth, position)) {
            return n;
        }
        let known = self.base.contains(&rect);
        let mut n = known as u64;
        if depth > 0 && !leaf_only(&rect, position, self.base) {
            for step in steps(rect, position, &self.options) {
                let product = step
                    .children
                    .iter()
                    .fold(1u64, |acc, &(c, p)| acc.saturating_mul(self.count(c, depth - 1, p)));
                n = n.saturating_add(product);
            }
        }
        self.counts.insert((rect, depth, position), n);
        n
    }

    fn all(&mut self, rect: RectDiagram, depth: u8, position: Position) -> Rc<Vec<Derivation>> {
        if let Some(hit) = self.trees.get(&(rect, depth, position)) {
            return hit.clone();
        }
        let mut out = Vec::new();
        if self.base.contains(&rect) {
            out.push(Derivation::leaf(rect));
        }
        if depth > 0 && !leaf_only(&rect, position, self.base) {
            for step in steps(rect, position, &self.options) {
                let lists: Vec<Rc<Vec<Derivation>>> = step
                    .children
                    .iter()
                    .map(|&(c, p)| self.all(c, depth - 1, p))
                    .collect();
                match lists.as_slice() {
                    [only] => {
                        for inner in only.iter() {
                            out.push(step.build(rect, vec![inner.clone()]));
                        }
                    }
                    [left, right] => {
                        for a in left.iter() {
                            for b in right.iter() {
                                out.push(step.build(rect, vec![a.clone(), b.clone()]));
                            }
                        }
                    }
                    _ => unreachable!("steps have one or two children"),
                }
            }
        }
        let out = Rc::new(out);
        self.trees.insert((rect, depth, position), out.clone());
        out
    }
}

/// Number of derivations [`enumerate_derivations`] would return.
pub fn count_derivations(rect: RectDiagram, base: &KnownFactBase, options: PlanOptions) -> u64 {
    Enumerator {
        base,
        options,
        counts: HashMap::new(),
        trees: HashMap::new(),
    }
    .count(rect, options.max_depth, Position::Root)
}

/// Every sound derivation of `rect` within `options.max_depth`, in
/// preference order. Known facts below the root are not expanded further.
pub fn enumerate_derivations(
    rect: RectDiagram,
    base: &KnownFactBase,
    options: PlanOptions,
) -> Result<Vec<Derivation>, RectError> {
    if options.max_depth > MAX_ENUMERATION_DEPTH {
        return Err(RectError::DepthBeyondBound(options.max_depth));
    }
    let mut enumerator = Enumerator {
        base,
        options,
        counts: HashMap::new(),
        trees: HashMap::new(),
    };
    let count = enumerator.count(rect, options.max_depth, Position::Root);
    if count > ENUMERATION_LIMIT {
        return Err(RectError::TooManyDerivations {
            rect,
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let all = enumerator.all(rect, options.max_depth, Position::Root);
    drop(enumerator);
    let mut all = Rc::try_unwrap(all).unwrap_or_else(|rc| (*rc).clone());
    all.sort();
    all.dedup();
    Ok(all)
}
