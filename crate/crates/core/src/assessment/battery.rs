use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AssessmentError, Grade, SubtestKind};
use crate::transcoder::{render_verbal, to_analog, AnalogRepr};

pub const ITEM_SET_VERSION: u32 = 1;
pub const DEFAULT_ITEMS_PER_SUBTEST: usize = 8;
/// Items in an addition subtest that need a ten to be composed.
pub const CARRY_ADDITIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Plus,
    Minus,
    Times,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Ascending,
    Descending,
}

/// What the child is shown or told.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Stimulus {
    /// A number read aloud, to be written in digits.
    Dictation { spoken: String },
    /// Dots flashed briefly.
    DotFlash { dots: u32 },
    /// Two collections; which has more?
    DotCollections { left: u32, right: u32 },
    /// Dots to count and write as a numeral.
    DotCount { dots: u32 },
    /// Two numerals; which is larger?
    NumeralPair { left: u32, right: u32 },
    /// Bundles and loose straws next to a numeral; same number?
    AnalogSymbolic { analog: AnalogRepr, symbol: u32 },
    /// Place `target` on a ticked line.
    NumberLine {
        start: u32,
        end: u32,
        tick_every: u32,
        target: u32,
    },
    /// Write the `ticks` numbers before `start`, going down.
    CountBack { start: u32, ticks: u32 },
    Operation { operator: Operator, left: u32, right: u32 },
    /// Split a number into hundreds, tens and units.
    Decompose { number: u32 },
    Ordering { numbers: Vec<u32>, direction: Direction },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Number(u32),
    Same(bool),
    Side(Side),
    Sequence(Vec<u32>),
    Places(AnalogRepr),
}

impl Answer {
    /// Reads a free-text answer in the shape of `self`. `None` when the
    /// text cannot be an answer of that shape (scored as incorrect).
    pub fn parse_like(&self, text: &str) -> Option<Answer> {
        let text = text.trim().to_lowercase();
        let numbers = || -> Option<Vec<u32>> {
            text.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().ok())
                .collect()
        };
        match self {
            Answer::Number(_) => text.parse().ok().map(Answer::Number),
            Answer::Same(_) => match text.as_str() {
                "yes" | "true" | "si" | "sì" | "y" => Some(Answer::Same(true)),
                "no" | "false" | "n" => Some(Answer::Same(false)),
                _ => None,
            },
            Answer::Side(_) => match text.as_str() {
                "left" | "l" | "sinistra" => Some(Answer::Side(Side::Left)),
                "right" | "r" | "destra" => Some(Answer::Side(Side::Right)),
                _ => None,
            },
            Answer::Sequence(_) => numbers().map(Answer::Sequence),
            Answer::Places(_) => match numbers()?.as_slice() {
                &[hundreds, tens, units] => Some(Answer::Places(AnalogRepr { hundreds, tens, units })),
                _ => None,
            },
        }
    }

    /// Text form accepted back by [`Answer::parse_like`].
    pub fn to_text(&self) -> String {
        match self {
            Answer::Number(n) => n.to_string(),
            Answer::Same(b) => if *b { "yes" } else { "no" }.to_string(),
            Answer::Side(Side::Left) => "left".to_string(),
            Answer::Side(Side::Right) => "right".to_string(),
            Answer::Sequence(v) => v.iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
            Answer::Places(p) => format!("{} {} {}", p.hundreds, p.tens, p.units),
        }
    }
}

impl Stimulus {
    /// The expected answer.
    pub fn solve(&self) -> Answer {
        let larger = |left: u32, right: u32| if left > right { Side::Left } else { Side::Right };
        match self {
            Stimulus::Dictation { spoken } => Answer::Number(
                crate::transcoder::parse_verbal(spoken).expect("dictations are rendered by the transcoder"),
            ),
            Stimulus::DotFlash { dots } | Stimulus::DotCount { dots } => Answer::Number(*dots),
            Stimulus::DotCollections { left, right } | Stimulus::NumeralPair { left, right } => {
                Answer::Side(larger(*left, *right))
            }
            Stimulus::AnalogSymbolic { analog, symbol } => {
                Answer::Same(100 * analog.hundreds + 10 * analog.tens + analog.units == *symbol)
            }
            Stimulus::NumberLine { target, .. } => Answer::Number(*target),
            Stimulus::CountBack { start, ticks } => Answer::Sequence((1..=*ticks).map(|i| start - i).collect()),
            Stimulus::Operation { operator, left, right } => Answer::Number(match operator {
                Operator::Plus => left + right,
                Operator::Minus => left - right,
                Operator::Times => left * right,
            }),
            Stimulus::Decompose { number } => {
                Answer::Places(to_analog(*number).expect("decomposition targets are below 1000"))
            }
            Stimulus::Ordering { numbers, direction } => {
                let mut sorted = numbers.clone();
                sorted.sort_unstable();
                if *direction == Direction::Descending {
                    sorted.reverse();
                }
                Answer::Sequence(sorted)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub stimulus: Stimulus,
    pub correct_answer: Answer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtest {
    pub kind: SubtestKind,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemSet {
    pub version: u32,
    pub grade: Grade,
    pub seed: u64,
    pub subtests: Vec<Subtest>,
}

impl ItemSet {
    pub fn subtest(&self, kind: SubtestKind) -> Option<&Subtest> {
        self.subtests.iter().find(|s| s.kind == kind)
    }

    pub fn item(&self, kind: SubtestKind, index: usize) -> Option<&Item> {
        self.subtest(kind)?.items.get(index)
    }

    pub fn total_items(&self) -> usize {
        self.subtests.iter().map(|s| s.items.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub items_per_subtest: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            items_per_subtest: DEFAULT_ITEMS_PER_SUBTEST,
        }
    }
}

/// Number ranges for one grade. Grade 2 uses larger numbers in the kinds
/// it shares with grade 1.
struct Ranges {
    writing: (u32, u32),
    subitizing: (u32, u32),
    estimation: (u32, u32),
    magnitude: (u32, u32),
    backward_start: (u32, u32),
    addition_left: (u32, u32),
    addition_right: (u32, u32),
    subtraction_minuend: (u32, u32),
}

const GRADE1: Ranges = Ranges {
    writing: (1, 999),
    subitizing: (2, 7),
    estimation: (5, 20),
    magnitude: (0, 20),
    backward_start: (6, 20),
    addition_left: (1, 19),
    addition_right: (1, 9),
    subtraction_minuend: (2, 10),
};

const GRADE2: Ranges = Ranges {
    writing: (100, 1000),
    subitizing: (4, 7),
    estimation: (10, 40),
    magnitude: (20, 100),
    backward_start: (20, 100),
    addition_left: (10, 79),
    addition_right: (10, 19),
    subtraction_minuend: (20, 100),
};

const BACKWARD_TICKS: u32 = 5;
const ORDERING_LENGTH: usize = 5;
const NUMBER_LINE_END: u32 = 20;

fn pick(rng: &mut ChaCha8Rng, (lo, hi): (u32, u32)) -> u32 {
    rng.gen_range(lo..=hi)
}

fn distinct_pair(rng: &mut ChaCha8Rng, range: (u32, u32)) -> (u32, u32) {
    let left = pick(rng, range);
    loop {
        let right = pick(rng, range);
        if right != left {
            return (left, right);
        }
    }
}

fn distinct_values(rng: &mut ChaCha8Rng, range: (u32, u32), n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = pick(rng, range);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn addition(rng: &mut ChaCha8Rng, ranges: &Ranges, carry: bool) -> Stimulus {
    loop {
        let left = pick(rng, ranges.addition_left);
        let right = pick(rng, ranges.addition_right);
        if (left % 10 + right % 10 >= 10) == carry {
            return Stimulus::Operation {
                operator: Operator::Plus,
                left,
                right,
            };
        }
    }
}

fn stimuli(kind: SubtestKind, ranges: &Ranges, n: usize, rng: &mut ChaCha8Rng) -> Vec<Stimulus> {
    use SubtestKind::*;
    match kind {
        NumberWriting => {
            let mut values = distinct_values(rng, ranges.writing, n);
            // dictated out of order
            if values.windows(2).all(|w| w[0] < w[1]) && n > 1 {
                values.swap(0, 1);
            }
            values
                .into_iter()
                .map(|v| Stimulus::Dictation {
                    spoken: render_verbal(v).expect("writing range is within 0..=1000"),
                })
                .collect()
        }
        Subitizing => (0..n)
            .map(|_| Stimulus::DotFlash {
                dots: pick(rng, ranges.subitizing),
            })
            .collect(),
        Estimation => (0..n)
            .map(|_| {
                let (left, right) = distinct_pair(rng, ranges.estimation);
                Stimulus::DotCollections { left, right }
            })
            .collect(),
        Enumeration => (0..n).map(|_| Stimulus::DotCount { dots: pick(rng, (5, 20)) }).collect(),
        MagnitudeJudgment => (0..n)
            .map(|_| {
                let (left, right) = distinct_pair(rng, ranges.magnitude);
                Stimulus::NumeralPair { left, right }
            })
            .collect(),
        QuantityJudgment => (0..n)
            .map(|i| {
                let shown = pick(rng, (11, 89));
                let symbol = if i % 2 == 0 {
                    shown
                } else {
                    let offset = *[1i32, -1, 10, -10].choose(rng).expect("non-empty");
                    (shown as i32 + offset) as u32
                };
                Stimulus::AnalogSymbolic {
                    analog: to_analog(shown).expect("below 100"),
                    symbol,
                }
            })
            .collect(),
        NumberLineInsertion => (0..n)
            .map(|_| Stimulus::NumberLine {
                start: 0,
                end: NUMBER_LINE_END,
                tick_every: 1,
                target: pick(rng, (1, NUMBER_LINE_END - 1)),
            })
            .collect(),
        BackwardCounting => (0..n)
            .map(|_| Stimulus::CountBack {
                start: pick(rng, ranges.backward_start),
                ticks: BACKWARD_TICKS,
            })
            .collect(),
        Addition => {
            let mut items: Vec<Stimulus> = (0..n).map(|i| addition(rng, ranges, i < CARRY_ADDITIONS)).collect();
            items.shuffle(rng);
            items
        }
        Subtraction => (0..n)
            .map(|_| {
                let left = pick(rng, ranges.subtraction_minuend);
                let right = pick(rng, (1, left - 1));
                Stimulus::Operation {
                    operator: Operator::Minus,
                    left,
                    right,
                }
            })
            .collect(),
        Decomposition => (0..n)
            .map(|_| Stimulus::Decompose {
                number: pick(rng, (100, 999)),
            })
            .collect(),
        AscendingOrdering | DescendingOrdering => {
            let direction = if kind == AscendingOrdering {
                Direction::Ascending
            } else {
                Direction::Descending
            };
            (0..n)
                .map(|_| loop {
                    let numbers = distinct_values(rng, (10, 999), ORDERING_LENGTH);
                    let stimulus = Stimulus::Ordering {
                        numbers: numbers.clone(),
                        direction,
                    };
                    // never shown already in order
                    if stimulus.solve() != Answer::Sequence(numbers) {
                        break stimulus;
                    }
                })
                .collect()
        }
        Multiplication => (0..n)
            .map(|_| Stimulus::Operation {
                operator: Operator::Times,
                left: pick(rng, (2, 10)),
                right: pick(rng, (2, 10)),
            })
            .collect(),
    }
}

/// Builds the battery for `grade`. Each subtest draws from its own ChaCha
/// stream, so the two grade-2 batteries share their common subtests.
pub fn generate_battery(grade: Grade, seed: u64, config: BatteryConfig) -> Result<ItemSet, AssessmentError> {
    let n = config.items_per_subtest;
    if !(CARRY_ADDITIONS..=50).contains(&n) {
        return Err(AssessmentError::InvalidConfig(format!(
            "items_per_subtest must be in {CARRY_ADDITIONS}..=50, got {n}"
        )));
    }
    let (ranges, family) = match grade {
        Grade::Grade1 => (&GRADE1, Grade::Grade1.stream_id()),
        Grade::Grade2Mid | Grade::Grade2End => (&GRADE2, Grade::Grade2Mid.stream_id()),
    };
    let subtests = grade
        .subtests()
        .into_iter()
        .map(|kind| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((family << 8) | kind as u64);
            let items = stimuli(kind, ranges, n, &mut rng)
                .into_iter()
                .map(|stimulus| Item {
                    correct_answer: stimulus.solve(),
                    stimulus,
                })
                .collect();
            Subtest { kind, items }
        })
        .collect();
    Ok(ItemSet {
        version: ITEM_SET_VERSION,
        grade,
        seed,
        subtests,
    })
}
