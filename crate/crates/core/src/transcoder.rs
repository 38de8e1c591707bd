//! Transcoding between the verbal (Italian number words), symbolic
//! (Arabic digits) and analog (bundles and loose straws) codes, 0..=1000.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_TRANSCODE_VALUE: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Code {
    Verbal,
    Symbolic,
    Analog,
}

impl Code {
    pub const ALL: [Code; 3] = [Code::Verbal, Code::Symbolic, Code::Analog];

    pub fn name(self) -> &'static str {
        match self {
            Code::Verbal => "verbal",
            Code::Symbolic => "symbolic",
            Code::Analog => "analog",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Code {
    type Err = TranscodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "verbal" => Ok(Code::Verbal),
            "symbolic" => Ok(Code::Symbolic),
            "analog" => Ok(Code::Analog),
            _ => Err(TranscodeError::UnknownCode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscodeError {
    #[error("{value} is outside 0..=1000")]
    OutOfRange { value: u64 },
    #[error("cannot parse {text:?} at position {position}")]
    ParseError { text: String, position: usize },
    #[error("unknown code {0:?}")]
    UnknownCode(String),
    #[error("rendering does not match the {code} code")]
    RenderingMismatch { code: Code },
}

/// Hundreds, tens and units as counted on the board. May be non-canonical
/// on input; [`to_analog`] always returns units and tens at most nine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AnalogRepr {
    pub hundreds: u32,
    pub tens: u32,
    pub units: u32,
}

impl fmt::Display for AnalogRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.hundreds, self.tens, self.units)
    }
}

impl std::str::FromStr for AnalogRepr {
    type Err = TranscodeError;

    /// Parses `hundreds,tens,units`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = [0u32; 3];
        let mut offset = 0;
        let mut fields = s.split(',');
        for slot in parts.iter_mut() {
            let field = fields.next().ok_or_else(|| parse_error(s, s.len()))?;
            *slot = field
                .trim()
                .parse()
                .map_err(|_| parse_error(s, offset))?;
            offset += field.len() + 1;
        }
        if fields.next().is_some() {
            return Err(parse_error(s, offset.saturating_sub(1)));
        }
        Ok(AnalogRepr {
            hundreds: parts[0],
            tens: parts[1],
            units: parts[2],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rendering {
    Text(String),
    Analog(AnalogRepr),
}

/// A value together with its rendering in one code. Construction always
/// checks that the rendering parses back to the value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTranscription")]
pub struct Transcription {
    value: u32,
    code: Code,
    rendering: Rendering,
}

#[derive(Deserialize)]
struct RawTranscription {
    value: u32,
    code: Code,
    rendering: Rendering,
}

impl TryFrom<RawTranscription> for Transcription {
    type Error = TranscodeError;

    fn try_from(raw: RawTranscription) -> Result<Self, Self::Error> {
        let parsed = Transcription::parse(raw.code, raw.rendering)?;
        if parsed.value != raw.value {
            return Err(TranscodeError::RenderingMismatch { code: raw.code });
        }
        Ok(parsed)
    }
}

impl Transcription {
    /// Renders `value` in `code`.
    pub fn of(value: u32, code: Code) -> Result<Self, TranscodeError> {
        let rendering = match code {
            Code::Verbal => Rendering::Text(render_verbal(value)?),
            Code::Symbolic => Rendering::Text(render_symbolic(value)?),
            Code::Analog => Rendering::Analog(to_analog(value)?),
        };
        Ok(Transcription {
            value,
            code,
            rendering,
        })
    }

    /// Reads a rendering in `code`. Analog renderings are kept as given.
    pub fn parse(code: Code, rendering: Rendering) -> Result<Self, TranscodeError> {
        let value = match (&rendering, code) {
            (Rendering::Text(text), Code::Verbal) => parse_verbal(text)?,
            (Rendering::Text(text), Code::Symbolic) => parse_symbolic(text)?,
            (Rendering::Analog(repr), Code::Analog) => from_analog(repr)?,
            (Rendering::Text(text), Code::Analog) => from_analog(&text.parse()?)?,
            (Rendering::Analog(_), code) => {
                return Err(TranscodeError::RenderingMismatch { code });
            }
        };
        let rendering = match (rendering, code) {
            (Rendering::Text(text), Code::Analog) => Rendering::Analog(text.parse()?),
            (r, _) => r,
        };
        Ok(Transcription {
            value,
            code,
            rendering,
        })
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn code(&self) -> Code {
        self.code
    }

    pub fn rendering(&self) -> &Rendering {
        &self.rendering
    }

    pub fn rendering_text(&self) -> String {
        match &self.rendering {
            Rendering::Text(t) => t.clone(),
            Rendering::Analog(a) => a.to_string(),
        }
    }
}

pub fn transcode(t: &Transcription, target: Code) -> Result<Transcription, TranscodeError> {
    if t.code == target {
        return Ok(t.clone());
    }
    Transcription::of(t.value, target)
}

fn check_range(n: u32) -> Result<(), TranscodeError> {
    if n > MAX_TRANSCODE_VALUE {
        return Err(TranscodeError::OutOfRange { value: n as u64 });
    }
    Ok(())
}

fn parse_error(text: &str, position: usize) -> TranscodeError {
    TranscodeError::ParseError {
        text: text.to_string(),
        position,
    }
}

// ---------------------------------------------------------------------------
// Symbolic
// ---------------------------------------------------------------------------

pub fn render_symbolic(n: u32) -> Result<String, TranscodeError> {
    check_range(n)?;
    Ok(n.to_string())
}

pub fn parse_symbolic(text: &str) -> Result<u32, TranscodeError> {
    if text.is_empty() {
        return Err(parse_error(text, 0));
    }
    if let Some(pos) = text.bytes().position(|b| !b.is_ascii_digit()) {
        return Err(parse_error(text, pos));
    }
    if text.len() > 1 && text.starts_with('0') {
        return Err(parse_error(text, 0));
    }
    if text.len() > 4 {
        return Err(TranscodeError::OutOfRange { value: u64::MAX });
    }
    let n: u32 = text.parse().map_err(|_| parse_error(text, 0))?;
    check_range(n)?;
    Ok(n)
}

// ---------------------------------------------------------------------------
// Analog
// ---------------------------------------------------------------------------

pub fn to_analog(n: u32) -> Result<AnalogRepr, TranscodeError> {
    check_range(n)?;
    Ok(AnalogRepr {
        hundreds: n / 100,
        tens: n / 10 % 10,
        units: n % 10,
    })
}

pub fn from_analog(r: &AnalogRepr) -> Result<u32, TranscodeError> {
    let value = 100 * r.hundreds as u64 + 10 * r.tens as u64 + r.units as u64;
    if value > MAX_TRANSCODE_VALUE as u64 {
        return Err(TranscodeError::OutOfRange { value });
    }
    Ok(value as u32)
}

// ---------------------------------------------------------------------------
// Verbal
// ---------------------------------------------------------------------------

const UNITS: [&str; 10] = [
    "zero", "uno", "due", "tre", "quattro", "cinque", "sei", "sette", "otto", "nove",
];

const TEENS: [&str; 10] = [
    "dieci",
    "undici",
    "dodici",
    "tredici",
    "quattordici",
    "quindici",
    "sedici",
    "diciassette",
    "diciotto",
    "diciannove",
];

// index = tens digit
const TENS: [&str; 10] = [
    "", "", "venti", "trenta", "quaranta", "cinquanta", "sessanta", "settanta", "ottanta",
    "novanta",
];

fn starts_with_vowel(word: &str) -> bool {
    word.starts_with(['a', 'e', 'i', 'o', 'u'])
}

/// 1..=99 as it appears after a tens word or a hundreds word.
fn render_below_hundred(n: u32, out: &mut String) {
    debug_assert!((1..100).contains(&n));
    match n {
        1..=9 => out.push_str(UNITS[n as usize]),
        10..=19 => out.push_str(TEENS[n as usize - 10]),
        _ => {
            let tens = TENS[(n / 10) as usize];
            let unit = n % 10;
            if unit == 0 {
                out.push_str(tens);
            } else if starts_with_vowel(UNITS[unit as usize]) {
                out.push_str(&tens[..tens.len() - 1]);
                out.push_str(UNITS[unit as usize]);
            } else if unit == 3 {
                out.push_str(tens);
                out.push_str("tré");
            } else {
                out.push_str(tens);
                out.push_str(UNITS[unit as usize]);
            }
        }
    }
}

pub fn render_verbal(n: u32) -> Result<String, TranscodeError> {
    check_range(n)?;
    let mut out = String::new();
    match n {
        0 => out.push_str("zero"),
        1000 => out.push_str("mille"),
        1..=99 => render_below_hundred(n, &mut out),
        _ => {
            let hundreds = n / 100;
            let rest = n % 100;
            if hundreds > 1 {
                out.push_str(UNITS[hundreds as usize]);
            }
            // cento + otto/ottanta elides to centotto/centottanta
            if rest == 8 || (80..90).contains(&rest) {
                out.push_str("cent");
            } else {
                out.push_str("cento");
            }
            match rest {
                0 => {}
                3 => out.push_str("tré"),
                _ => render_below_hundred(rest, &mut out),
            }
        }
    }
    Ok(out)
}

/// A cursor over the word being parsed, remembering the furthest byte
/// offset at which a rule could still have applied.
struct WordCursor<'a> {
    text: &'a str,
}

impl WordCursor<'_> {
    fn fail(&self, position: usize) -> TranscodeError {
        parse_error(self.text, position)
    }
}

/// Parses a compound unit (2..=9) written after a tens or hundreds word,
/// where a final tre may carry an accent.
fn trailing_unit(rest: &str) -> Option<u32> {
    match rest {
        "tré" | "tre" => Some(3),
        _ => UNITS[1..]
            .iter()
            .position(|w| *w == rest)
            .map(|i| i as u32 + 1),
    }
}

/// 1..=99 spelled on its own (no accented standalone tre).
fn parse_below_hundred(s: &str, base: usize, cursor: &WordCursor<'_>) -> Result<u32, TranscodeError> {
    if let Some(i) = UNITS[1..].iter().position(|w| *w == s) {
        return Ok(i as u32 + 1);
    }
    if let Some(i) = TEENS.iter().position(|w| *w == s) {
        return Ok(i as u32 + 10);
    }
    let mut furthest = base;
    for (digit, word) in TENS.iter().enumerate().skip(2) {
        let tens = digit as u32 * 10;
        let stem = &word[..word.len() - 1];
        if let Some(rest) = s.strip_prefix(word) {
            if rest.is_empty() {
                return Ok(tens);
            }
            furthest = furthest.max(base + word.len());
            match trailing_unit(rest) {
                Some(u) if !starts_with_vowel(UNITS[u as usize]) => return Ok(tens + u),
                _ => {}
            }
        }
        if let Some(rest) = s.strip_prefix(stem) {
            furthest = furthest.max(base + stem.len());
            if rest == "uno" || rest == "otto" {
                return Ok(tens + trailing_unit(rest).unwrap_or(0));
            }
        }
    }
    Err(cursor.fail(furthest))
}

/// Parses the part after a hundreds word: either a plain 1..=99 or a
/// final accented tre.
fn parse_after_hundred(s: &str, base: usize, cursor: &WordCursor<'_>) -> Result<u32, TranscodeError> {
    if s == "tré" {
        return Ok(3);
    }
    parse_below_hundred(s, base, cursor)
}

pub fn parse_verbal(text: &str) -> Result<u32, TranscodeError> {
    let cursor = WordCursor { text };
    match text {
        "" => return Err(cursor.fail(0)),
        "zero" => return Ok(0),
        "mille" => return Ok(1000),
        _ => {}
    }

    // optional multiplier before "cento": due..nove
    let mut hundreds = 0;
    let mut after_multiplier = text;
    for (digit, word) in UNITS.iter().enumerate().skip(2) {
        if let Some(rest) = text.strip_prefix(word) {
            if rest.starts_with("cent") {
                hundreds = digit as u32;
                after_multiplier = rest;
                break;
            }
        }
    }
    let offset = text.len() - after_multiplier.len();

    if let Some(rest) = after_multiplier.strip_prefix("cent") {
        let hundreds = hundreds.max(1);
        let base = offset + 4;
        // elided: centotto, centottanta, centuno
        let elided = if rest.starts_with("ott") || rest == "uno" {
            parse_below_hundred(rest, base, &cursor).ok()
        } else {
            None
        };
        let below = match elided {
            Some(v) if v == 8 || (80..90).contains(&v) || v == 1 => v,
            _ => {
                let Some(rest) = rest.strip_prefix('o') else {
                    return Err(cursor.fail(base));
                };
                if rest.is_empty() {
                    0
                } else {
                    parse_after_hundred(rest, base + 1, &cursor)?
                }
            }
        };
        return Ok(hundreds * 100 + below);
    }
    if hundreds > 0 {
        return Err(cursor.fail(offset));
    }
    parse_below_hundred(text, 0, &cursor)
}
