//! Shared deterministic generators for integration tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use capfix_core::subtitle::{Cue, SourceFormat, Transcript};

pub const VOCAB: [&str; 20] = [
    "the", "quick", "brown", "fox", "jumps", "over", "lazy", "dog", "sunny", "weather",
    "caption", "video", "sound", "today", "walking", "cooking", "travel", "news", "learn",
    "words",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_word(rng: &mut impl Rng) -> &'static str {
    VOCAB[rng.random_range(0..VOCAB.len())]
}

/// A canonical transcript: 1..=max_cues cues, non-decreasing times, 1..=8
/// words per cue, occasionally split over two lines.
pub fn random_transcript(rng: &mut impl Rng, max_cues: usize) -> Transcript {
    let cue_count = rng.random_range(1..=max_cues);
    let mut clock: u64 = 0;
    let mut cues = Vec::with_capacity(cue_count);
    for index in 0..cue_count {
        clock += rng.random_range(0..3_000);
        let duration = rng.random_range(200..6_000);
        let word_count = rng.random_range(1..=8);
        let mut words: Vec<&str> = (0..word_count).map(|_| random_word(rng)).collect();
        let text = if words.len() >= 4 && rng.random_bool(0.25) {
            let split = words.len() / 2;
            let tail = words.split_off(split);
            format!("{}\n{}", words.join(" "), tail.join(" "))
        } else {
            words.join(" ")
        };
        cues.push(Cue::new(index as u32 + 1, clock, clock + duration, text));
        clock += rng.random_range(0..duration);
    }
    Transcript::new(cues, SourceFormat::Srt)
}

/// Token-level mutation of a flat text: substitutions, insertions,
/// deletions, case flips and punctuation additions. Always leaves at least
/// one token.
pub fn mutate_text(rng: &mut impl Rng, text: &str) -> String {
    let mut out: Vec<String> = Vec::new();
    for token in text.split_whitespace() {
        match rng.random_range(0..10) {
            0 => {} // delete
            1 => {
                out.push(token.to_string());
                out.push(random_word(rng).to_string());
            }
            2 => out.push(random_word(rng).to_string()),
            3 => out.push(format!("{token}s")),
            4 => out.push(capitalize(token)),
            5 => out.push(format!("{token},")),
            _ => out.push(token.to_string()),
        }
    }
    if out.is_empty() {
        out.push(random_word(rng).to_string());
    }
    out.join(" ")
}

fn capitalize(token: &str) -> String {
    let mut chars = token.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}
