//! Timed-cue transcript model and subtitle format support.
//!
//! Timestamps are stored as integer milliseconds so that parse/serialize
//! round-trips are bit-exact. Parsers accept CRLF and LF input and an
//! optional UTF-8 BOM; the serializer always emits LF.

mod srt;
mod vtt;
mod ytjson;

pub use srt::{parse as parse_srt, serialize as serialize_srt};
pub use vtt::parse as parse_vtt;
pub use ytjson::parse as parse_youtube_json;

use thiserror::Error;

/// A single timed caption unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cue {
    /// 1-based ordinal within the transcript.
    pub index: u32,
    /// Start time in milliseconds from media start.
    pub start_ms: u64,
    /// End time in milliseconds from media start.
    pub end_ms: u64,
    /// Caption text. May contain internal line breaks; never has leading or
    /// trailing whitespace after parsing.
    pub text: String,
}

impl Cue {
    pub fn new(index: u32, start_ms: u64, end_ms: u64, text: impl Into<String>) -> Self {
        Cue {
            index,
            start_ms,
            end_ms,
            text: text.into(),
        }
    }
}

/// Format a transcript was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Srt,
    Vtt,
    YtJson,
    Plain,
}

/// An ordered sequence of cues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub cues: Vec<Cue>,
    pub source_format: SourceFormat,
}

impl Transcript {
    pub fn new(cues: Vec<Cue>, source_format: SourceFormat) -> Self {
        Transcript {
            cues,
            source_format,
        }
    }

    /// Flatten cue texts into a single line: cues joined by single spaces,
    /// internal line breaks replaced by spaces, whitespace runs collapsed.
    pub fn flatten(&self) -> String {
        self.cues
            .iter()
            .flat_map(|cue| cue.text.split_whitespace())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Check the transcript invariants: cue indices strictly increasing,
    /// start times non-decreasing, start <= end per cue, and cue text in
    /// canonical form (no leading/trailing whitespace, no blank lines).
    pub fn validate(&self) -> Result<(), SubtitleError> {
        let mut prev_index: Option<u32> = None;
        let mut prev_start: Option<u64> = None;
        for cue in &self.cues {
            if let Some(prev) = prev_index {
                if cue.index <= prev {
                    return Err(SubtitleError::InvalidTranscript(format!(
                        "cue index {} does not increase over {}",
                        cue.index, prev
                    )));
                }
            }
            if let Some(prev) = prev_start {
                if cue.start_ms < prev {
                    return Err(SubtitleError::InvalidTranscript(format!(
                        "cue {} starts at {} ms, before the previous cue at {} ms",
                        cue.index, cue.start_ms, prev
                    )));
                }
            }
            if cue.start_ms > cue.end_ms {
                return Err(SubtitleError::InvalidTranscript(format!(
                    "cue {} ends at {} ms, before it starts at {} ms",
                    cue.index, cue.end_ms, cue.start_ms
                )));
            }
            if !cue.text.is_empty() {
                if cue.text != cue.text.trim() {
                    return Err(SubtitleError::InvalidTranscript(format!(
                        "cue {} text has leading or trailing whitespace",
                        cue.index
                    )));
                }
                if cue.text.lines().any(|line| line.trim().is_empty() || line != line.trim()) {
                    return Err(SubtitleError::InvalidTranscript(format!(
                        "cue {} text contains blank or untrimmed lines",
                        cue.index
                    )));
                }
            }
            prev_index = Some(cue.index);
            prev_start = Some(cue.start_ms);
        }
        Ok(())
    }
}

/// Errors raised by subtitle parsing and serialization.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubtitleError {
    #[error("input is empty")]
    EmptyInput,
    #[error("input is not valid UTF-8")]
    InvalidEncoding,
    #[error("line {line}: malformed timestamp {found:?}")]
    MalformedTimestamp { line: usize, found: String },
    #[error("line {line}: expected a cue index, found {found:?}")]
    MalformedIndex { line: usize, found: String },
    #[error("line {line}: cue block is truncated")]
    TruncatedBlock { line: usize },
    #[error("line {line}: cue index {found} does not increase over {previous}")]
    NonMonotonicIndex {
        line: usize,
        previous: u32,
        found: u32,
    },
    #[error("line {line}: cue starts at {start_ms} ms, before the previous cue at {previous_ms} ms")]
    NonMonotonicTiming {
        line: usize,
        start_ms: u64,
        previous_ms: u64,
    },
    #[error("line {line}: cue ends at {end_ms} ms, before it starts at {start_ms} ms")]
    ReversedTiming {
        line: usize,
        start_ms: u64,
        end_ms: u64,
    },
    #[error("missing WEBVTT header")]
    MissingHeader,
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("entry {entry}: missing or unusable field {field:?}")]
    MissingField { entry: usize, field: &'static str },
    #[error("invalid transcript: {0}")]
    InvalidTranscript(String),
}

/// Strip a UTF-8 byte-order mark if present and decode.
pub(crate) fn decode_utf8(data: &[u8]) -> Result<&str, SubtitleError> {
    let text = std::str::from_utf8(data).map_err(|_| SubtitleError::InvalidEncoding)?;
    Ok(text.strip_prefix('\u{feff}').unwrap_or(text))
}

/// Format milliseconds as `HH:MM:SS<sep>mmm`.
pub(crate) fn format_timestamp(ms: u64, sep: char) -> String {
    let hours = ms / 3_600_000;
    let minutes = (ms % 3_600_000) / 60_000;
    let seconds = (ms % 60_000) / 1000;
    let millis = ms % 1000;
    format!("{hours:02}:{minutes:02}:{seconds:02}{sep}{millis:03}")
}

/// Parse `HH:MM:SS<sep>mmm` (hours may exceed two digits). When
/// `hours_optional` is set, `MM:SS<sep>mmm` is also accepted.
pub(crate) fn parse_timestamp(raw: &str, sep: char, hours_optional: bool) -> Option<u64> {
    let raw = raw.trim();
    let (clock, millis) = raw.rsplit_once(sep)?;
    if millis.len() != 3 || !millis.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let millis: u64 = millis.parse().ok()?;
    let parts: Vec<&str> = clock.split(':').collect();
    let (hours, minutes, seconds) = match parts.as_slice() {
        [h, m, s] => (h.parse::<u64>().ok()?, m, s),
        [m, s] if hours_optional => (0, m, s),
        _ => return None,
    };
    for field in [parts[parts.len() - 2], parts[parts.len() - 1]] {
        if field.len() != 2 || !field.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    let minutes: u64 = minutes.parse().ok()?;
    let seconds: u64 = seconds.parse().ok()?;
    if minutes > 59 || seconds > 59 {
        return None;
    }
    Some(((hours * 60 + minutes) * 60 + seconds) * 1000 + millis)
}
