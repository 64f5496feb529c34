//! WebVTT parsing.
//!
//! Cue timings use a dot millisecond separator and hours are optional.
//! NOTE/STYLE/REGION blocks are skipped, cue identifiers are accepted and
//! discarded, and inline markup (voice/class spans, timestamp tags) is
//! stripped to plain text. Cue settings after the timing line are dropped.

use super::{decode_utf8, parse_timestamp, Cue, SourceFormat, SubtitleError, Transcript};

/// Parse WebVTT bytes into a transcript.
pub fn parse(data: &[u8]) -> Result<Transcript, SubtitleError> {
    let text = decode_utf8(data)?;
    let lines: Vec<&str> = text.lines().map(|line| line.trim_end_matches('\r')).collect();
    let header = lines.first().map(|line| line.trim()).unwrap_or("");
    if !header.starts_with("WEBVTT") {
        return Err(SubtitleError::MissingHeader);
    }

    let mut cues = Vec::new();
    let mut prev_start: Option<u64> = None;
    let mut pos = 1;

    while pos < lines.len() {
        let line = lines[pos].trim();
        if line.is_empty() {
            pos += 1;
            continue;
        }
        if line.starts_with("NOTE") || line.starts_with("STYLE") || line.starts_with("REGION") {
            while pos < lines.len() && !lines[pos].trim().is_empty() {
                pos += 1;
            }
            continue;
        }

        // Optional cue identifier line before the timing line.
        let timing_pos = if line.contains("-->") {
            pos
        } else {
            pos + 1
        };
        if timing_pos >= lines.len() || !lines[timing_pos].contains("-->") {
            return Err(SubtitleError::MalformedTimestamp {
                line: pos + 1,
                found: line.to_string(),
            });
        }
        let (start_ms, end_ms) = parse_timing(lines[timing_pos], timing_pos + 1)?;
        if let Some(prev) = prev_start {
            if start_ms < prev {
                return Err(SubtitleError::NonMonotonicTiming {
                    line: timing_pos + 1,
                    start_ms,
                    previous_ms: prev,
                });
            }
        }
        pos = timing_pos + 1;

        let mut text_lines = Vec::new();
        while pos < lines.len() && !lines[pos].trim().is_empty() {
            let cleaned = decode_entities(&strip_tags(lines[pos]));
            let cleaned = cleaned.trim();
            if !cleaned.is_empty() {
                text_lines.push(cleaned.to_string());
            }
            pos += 1;
        }
        cues.push(Cue::new(
            cues.len() as u32 + 1,
            start_ms,
            end_ms,
            text_lines.join("\n"),
        ));
        prev_start = Some(start_ms);
    }

    Ok(Transcript::new(cues, SourceFormat::Vtt))
}

fn parse_timing(line: &str, line_no: usize) -> Result<(u64, u64), SubtitleError> {
    let malformed = |found: &str| SubtitleError::MalformedTimestamp {
        line: line_no,
        found: found.trim().to_string(),
    };
    let (start_raw, rest) = line.split_once("-->").ok_or_else(|| malformed(line))?;
    // Cue settings may follow the end timestamp, separated by whitespace.
    let end_raw = rest.split_whitespace().next().unwrap_or("");
    let start_ms = parse_timestamp(start_raw, '.', true).ok_or_else(|| malformed(start_raw))?;
    let end_ms = parse_timestamp(end_raw, '.', true).ok_or_else(|| malformed(end_raw))?;
    if start_ms > end_ms {
        return Err(SubtitleError::ReversedTiming {
            line: line_no,
            start_ms,
            end_ms,
        });
    }
    Ok((start_ms, end_ms))
}

/// Remove `<...>` markup spans. An unterminated `<` is kept as literal text.
fn strip_tags(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut rest = line;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        match rest[open..].find('>') {
            Some(close) => rest = &rest[open + close + 1..],
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entities(text: &str) -> String {
    text.replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&nbsp;", " ")
}
