//! SRT (SubRip) parsing and serialization.
//!
//! Blocks are `index / HH:MM:SS,mmm --> HH:MM:SS,mmm / text lines` separated
//! by blank lines. Input indices are validated for strict monotonicity but
//! output indices are always renumbered 1..n, so serialized files are
//! canonical regardless of the source numbering.

use super::{
    decode_utf8, format_timestamp, parse_timestamp, Cue, SourceFormat, SubtitleError, Transcript,
};

/// Parse SRT bytes into a transcript.
pub fn parse(data: &[u8]) -> Result<Transcript, SubtitleError> {
    let text = decode_utf8(data)?;
    if text.trim().is_empty() {
        return Err(SubtitleError::EmptyInput);
    }

    let lines: Vec<&str> = text.lines().map(|line| line.trim_end_matches('\r')).collect();
    let mut cues = Vec::new();
    let mut prev_index: Option<u32> = None;
    let mut prev_start: Option<u64> = None;
    let mut pos = 0;

    while pos < lines.len() {
        if lines[pos].trim().is_empty() {
            pos += 1;
            continue;
        }
        let block_start = pos;
        let index_line = lines[pos].trim();
        let index: u32 = index_line
            .parse()
            .map_err(|_| SubtitleError::MalformedIndex {
                line: block_start + 1,
                found: index_line.to_string(),
            })?;
        if let Some(prev) = prev_index {
            if index <= prev {
                return Err(SubtitleError::NonMonotonicIndex {
                    line: block_start + 1,
                    previous: prev,
                    found: index,
                });
            }
        }
        pos += 1;
        if pos >= lines.len() || lines[pos].trim().is_empty() {
            return Err(SubtitleError::TruncatedBlock {
                line: block_start + 1,
            });
        }
        let (start_ms, end_ms) = parse_timing(lines[pos], pos + 1)?;
        if let Some(prev) = prev_start {
            if start_ms < prev {
                return Err(SubtitleError::NonMonotonicTiming {
                    line: pos + 1,
                    start_ms,
                    previous_ms: prev,
                });
            }
        }
        pos += 1;
        let mut text_lines = Vec::new();
        while pos < lines.len() && !lines[pos].trim().is_empty() {
            text_lines.push(lines[pos].trim());
            pos += 1;
        }
        cues.push(Cue::new(index, start_ms, end_ms, text_lines.join("\n")));
        prev_index = Some(index);
        prev_start = Some(start_ms);
    }

    Ok(Transcript::new(cues, SourceFormat::Srt))
}

/// Serialize a transcript as canonical SRT, renumbering cues 1..n.
/// An empty transcript serializes to an empty byte sequence.
pub fn serialize(transcript: &Transcript) -> Result<Vec<u8>, SubtitleError> {
    transcript.validate()?;
    let mut out = String::new();
    for (ordinal, cue) in transcript.cues.iter().enumerate() {
        out.push_str(&format!(
            "{}\n{} --> {}\n",
            ordinal + 1,
            format_timestamp(cue.start_ms, ','),
            format_timestamp(cue.end_ms, ','),
        ));
        if !cue.text.is_empty() {
            out.push_str(&cue.text);
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out.into_bytes())
}

fn parse_timing(line: &str, line_no: usize) -> Result<(u64, u64), SubtitleError> {
    let malformed = |found: &str| SubtitleError::MalformedTimestamp {
        line: line_no,
        found: found.trim().to_string(),
    };
    let (start_raw, end_raw) = line.split_once("-->").ok_or_else(|| malformed(line))?;
    let start_ms = parse_timestamp(start_raw, ',', false).ok_or_else(|| malformed(start_raw))?;
    let end_ms = parse_timestamp(end_raw, ',', false).ok_or_else(|| malformed(end_raw))?;
    if start_ms > end_ms {
        return Err(SubtitleError::ReversedTiming {
            line: line_no,
            start_ms,
            end_ms,
        });
    }
    Ok((start_ms, end_ms))
}
