//! YouTube transcript JSON ingestion.
//!
//! Accepts the array shape emitted by the YouTube transcript API: objects
//! with `text` (string), `start` and `duration` (seconds as decimal numbers).
//! Seconds are converted to integer milliseconds with half-up rounding.

use serde_json::Value;

use super::{Cue, SourceFormat, SubtitleError, Transcript};

/// Parse a YouTube transcript JSON array into a transcript.
pub fn parse(data: &[u8]) -> Result<Transcript, SubtitleError> {
    let value: Value = serde_json::from_slice(data)
        .map_err(|err| SubtitleError::MalformedJson(err.to_string()))?;
    let entries = value
        .as_array()
        .ok_or_else(|| SubtitleError::MalformedJson("expected a JSON array".to_string()))?;

    let mut cues = Vec::with_capacity(entries.len());
    let mut prev_start: Option<u64> = None;
    for (pos, entry) in entries.iter().enumerate() {
        let object = entry.as_object().ok_or_else(|| {
            SubtitleError::MalformedJson(format!("entry {pos} is not an object"))
        })?;
        let text = object
            .get("text")
            .and_then(Value::as_str)
            .ok_or(SubtitleError::MissingField {
                entry: pos,
                field: "text",
            })?;
        let start = number_field(object, pos, "start")?;
        let duration = number_field(object, pos, "duration")?;
        let start_ms = (start * 1000.0).round() as u64;
        let end_ms = ((start + duration) * 1000.0).round() as u64;
        if let Some(prev) = prev_start {
            if start_ms < prev {
                return Err(SubtitleError::NonMonotonicTiming {
                    line: pos + 1,
                    start_ms,
                    previous_ms: prev,
                });
            }
        }
        prev_start = Some(start_ms);
        cues.push(Cue::new(
            pos as u32 + 1,
            start_ms,
            end_ms,
            text.trim().to_string(),
        ));
    }

    Ok(Transcript::new(cues, SourceFormat::YtJson))
}

fn number_field(
    object: &serde_json::Map<String, Value>,
    entry: usize,
    field: &'static str,
) -> Result<f64, SubtitleError> {
    let value = object
        .get(field)
        .and_then(Value::as_f64)
        .ok_or(SubtitleError::MissingField { entry, field })?;
    if !value.is_finite() || value < 0.0 {
        return Err(SubtitleError::MissingField { entry, field });
    }
    Ok(value)
}
