//! Re-synchronize corrected text onto original cue timings.
//!
//! Correction and scoring both operate on flat text; this module is the
//! extra packaging step that lets corrected text ship back into timed
//! subtitle files without shifting a single cue boundary. No timing is
//! inferred from audio; the original cue grid is authoritative.
//!
//! Each corrected token inherits the cue of the original token it aligns to;
//! inserted tokens inherit the cue of the nearest preceding aligned token
//! (or the first cue when there is none). Output cues keep their original
//! index, start and end exactly; only the text changes, taken verbatim from
//! the corrected text.
//!
//! Alignment runs over case-preserving keys with punctuation stripped, so
//! that a correction which only touches casing or punctuation still lands in
//! its original cue. Tokens that are pure punctuation keep their raw form as
//! the key.

use std::ops::Range;

use thiserror::Error;

use crate::metrics::{align_slices, AlignOp};
use crate::subtitle::{Cue, Transcript};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResyncError {
    #[error("original transcript has no cues or no tokens")]
    EmptyOriginal,
    #[error("corrected text has no tokens")]
    EmptyCorrection,
}

/// For each original cue, the half-open range of corrected-token indices
/// assigned to it. Ranges are contiguous, non-overlapping, in cue order and
/// jointly cover every corrected token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueMap {
    pub assignments: Vec<Range<usize>>,
}

fn alignment_key(raw: &str) -> String {
    let stripped: String = raw.chars().filter(|c| c.is_alphanumeric()).collect();
    if stripped.is_empty() {
        raw.to_string()
    } else {
        stripped
    }
}

/// Compute the cue assignment for each token of `corrected_text`.
pub fn cue_map(original: &Transcript, corrected_text: &str) -> Result<CueMap, ResyncError> {
    let corrected_tokens: Vec<&str> = corrected_text.split_whitespace().collect();
    build_map(original, &corrected_tokens).map(|assignments| CueMap { assignments })
}

/// Map corrected text back onto the original transcript's cue boundaries.
/// Timings and cue count are preserved exactly; cue texts become slices of
/// the corrected tokens. Cues left without tokens (possible under heavy
/// deletion) keep their timing with empty text.
pub fn realign(original: &Transcript, corrected_text: &str) -> Result<Transcript, ResyncError> {
    let corrected_tokens: Vec<&str> = corrected_text.split_whitespace().collect();
    let assignments = build_map(original, &corrected_tokens)?;
    let cues = original
        .cues
        .iter()
        .zip(&assignments)
        .map(|(cue, range)| {
            Cue::new(
                cue.index,
                cue.start_ms,
                cue.end_ms,
                corrected_tokens[range.clone()].join(" "),
            )
        })
        .collect();
    Ok(Transcript::new(cues, original.source_format))
}

fn build_map(
    original: &Transcript,
    corrected_tokens: &[&str],
) -> Result<Vec<Range<usize>>, ResyncError> {
    if original.cues.is_empty() {
        return Err(ResyncError::EmptyOriginal);
    }
    if corrected_tokens.is_empty() {
        return Err(ResyncError::EmptyCorrection);
    }

    // Original tokens in flatten() order, each remembering its cue.
    let mut original_keys = Vec::new();
    let mut token_cue = Vec::new();
    for (cue_idx, cue) in original.cues.iter().enumerate() {
        for token in cue.text.split_whitespace() {
            original_keys.push(alignment_key(token));
            token_cue.push(cue_idx);
        }
    }
    if original_keys.is_empty() {
        return Err(ResyncError::EmptyOriginal);
    }
    let corrected_keys: Vec<String> = corrected_tokens
        .iter()
        .map(|token| alignment_key(token))
        .collect();

    let (_, path) = align_slices(&original_keys, &corrected_keys);

    let mut assigned = vec![0usize; corrected_tokens.len()];
    let mut last_cue: Option<usize> = None;
    for op in &path.ops {
        match *op {
            AlignOp::Match { ref_idx, hyp_idx } | AlignOp::Substitute { ref_idx, hyp_idx } => {
                let cue = token_cue[ref_idx];
                assigned[hyp_idx] = cue;
                last_cue = Some(cue);
            }
            AlignOp::Insert { hyp_idx } => {
                assigned[hyp_idx] = last_cue.unwrap_or(0);
            }
            AlignOp::Delete { .. } => {}
        }
    }

    // Aligned cue indices are non-decreasing along the path, so snapping to
    // contiguous ranges is a single sweep.
    let mut ranges = Vec::with_capacity(original.cues.len());
    let mut cursor = 0;
    for cue_idx in 0..original.cues.len() {
        let start = cursor;
        while cursor < assigned.len() && assigned[cursor] == cue_idx {
            cursor += 1;
        }
        ranges.push(start..cursor);
    }
    debug_assert_eq!(cursor, assigned.len());
    Ok(ranges)
}
