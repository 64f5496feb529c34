//! Deterministic tokenization under named per-metric policies.
//!
//! The three bundled policies deliberately disagree on punctuation: WER and
//! ROUGE strip it entirely, while BLEU keeps each edge punctuation character
//! as a standalone token. Each metric binds its own policy so the scoring
//! conventions stay reproducible side by side. All policies lowercase and
//! none of them reorders alphabetic tokens.

use std::collections::HashMap;

use thiserror::Error;

/// How a policy treats punctuation around whitespace-split tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PunctuationHandling {
    /// Leave tokens exactly as split.
    Attached,
    /// Peel leading/trailing ASCII punctuation into standalone tokens.
    SeparateToken,
    /// Remove every non-alphanumeric character, dropping emptied tokens.
    Stripped,
}

/// A named tokenization policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenPolicy {
    pub lowercase: bool,
    pub punctuation: PunctuationHandling,
}

impl TokenPolicy {
    /// Policy bound to WER: lowercase, punctuation stripped.
    pub const WER: TokenPolicy = TokenPolicy {
        lowercase: true,
        punctuation: PunctuationHandling::Stripped,
    };
    /// Policy bound to BLEU: lowercase, edge punctuation as separate tokens.
    pub const BLEU: TokenPolicy = TokenPolicy {
        lowercase: true,
        punctuation: PunctuationHandling::SeparateToken,
    };
    /// Policy bound to ROUGE: lowercase, punctuation stripped.
    pub const ROUGE: TokenPolicy = TokenPolicy {
        lowercase: true,
        punctuation: PunctuationHandling::Stripped,
    };
}

/// A normalized token sequence produced under one policy.
///
/// No token is empty and no token contains whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    tokens: Vec<String>,
    policy: TokenPolicy,
}

impl TokenStream {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn policy(&self) -> TokenPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenizeError {
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
}

/// Tokenize text under a policy. Splitting is on Unicode whitespace;
/// "alphanumeric" means Unicode letter and number categories.
pub fn tokenize(text: &str, policy: TokenPolicy) -> TokenStream {
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        let word = if policy.lowercase {
            raw.to_lowercase()
        } else {
            raw.to_string()
        };
        match policy.punctuation {
            PunctuationHandling::Attached => tokens.push(word),
            PunctuationHandling::Stripped => {
                let stripped: String = word.chars().filter(|c| c.is_alphanumeric()).collect();
                if !stripped.is_empty() {
                    tokens.push(stripped);
                }
            }
            PunctuationHandling::SeparateToken => {
                let chars: Vec<char> = word.chars().collect();
                let mut head = 0;
                let mut tail = chars.len();
                while head < tail && chars[head].is_ascii_punctuation() {
                    head += 1;
                }
                while tail > head && chars[tail - 1].is_ascii_punctuation() {
                    tail -= 1;
                }
                for c in &chars[..head] {
                    tokens.push(c.to_string());
                }
                if head < tail {
                    tokens.push(chars[head..tail].iter().collect());
                }
                for c in &chars[tail..] {
                    tokens.push(c.to_string());
                }
            }
        }
    }
    TokenStream { tokens, policy }
}

/// A multiset of n-token windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramBag {
    n: usize,
    counts: HashMap<Vec<String>, u64>,
    total: u64,
}

impl NGramBag {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Total window count: `max(0, len - n + 1)`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, gram: &[String]) -> u64 {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Clipped overlap with another bag: sum over grams of
    /// `min(count_here, count_there)`.
    pub fn clipped_overlap(&self, other: &NGramBag) -> u64 {
        self.counts
            .iter()
            .map(|(gram, &count)| count.min(other.count(gram)))
            .sum()
    }
}

/// Build the sliding-window n-gram multiset of a token stream.
/// Empty when the stream is shorter than `n`.
pub fn ngrams(stream: &TokenStream, n: usize) -> Result<NGramBag, TokenizeError> {
    if n < 1 {
        return Err(TokenizeError::InvalidOrder(n));
    }
    let mut counts: HashMap<Vec<String>, u64> = HashMap::new();
    let mut total = 0;
    if stream.len() >= n {
        for window in stream.tokens().windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
            total += 1;
        }
    }
    Ok(NGramBag { n, counts, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FOX_REF: &str = "The quick brown fox jumps over the lazy dog.";

    #[test]
    fn wer_policy_strips_punctuation() {
        let stream = tokenize(FOX_REF, TokenPolicy::WER);
        assert_eq!(stream.len(), 9);
        assert_eq!(stream.tokens().last().unwrap(), "dog");
        assert_eq!(
            stream.tokens(),
            &["the", "quick", "brown", "fox", "jumps", "over", "the", "lazy", "dog"]
        );
    }

    #[test]
    fn bleu_policy_keeps_punctuation_as_tokens() {
        let stream = tokenize(FOX_REF, TokenPolicy::BLEU);
        assert_eq!(stream.len(), 10);
        assert_eq!(&stream.tokens()[8..], &["dog", "."]);
    }

    #[test]
    fn empty_text_gives_empty_stream() {
        for policy in [TokenPolicy::WER, TokenPolicy::BLEU, TokenPolicy::ROUGE] {
            assert!(tokenize("", policy).is_empty());
        }
    }

    #[test]
    fn separate_token_peels_both_edges() {
        let stream = tokenize("(hello)... don't", TokenPolicy::BLEU);
        assert_eq!(
            stream.tokens(),
            &["(", "hello", ")", ".", ".", ".", "don't"]
        );
    }

    #[test]
    fn stripped_removes_interior_punctuation() {
        let stream = tokenize("don't stop-me", TokenPolicy::WER);
        assert_eq!(stream.tokens(), &["dont", "stopme"]);
    }

    #[test]
    fn pure_punctuation_tokens_vanish_under_stripped() {
        let stream = tokenize("a --- b", TokenPolicy::WER);
        assert_eq!(stream.tokens(), &["a", "b"]);
    }

    #[test]
    fn unicode_alphanumerics_are_kept() {
        let stream = tokenize("café №42!", TokenPolicy::WER);
        assert_eq!(stream.tokens(), &["café", "42"]);
    }

    fn stream_of(tokens: &[&str]) -> TokenStream {
        tokenize(&tokens.join(" "), TokenPolicy::WER)
    }

    #[test]
    fn bigrams_of_three_tokens() {
        let bag = ngrams(&stream_of(&["a", "b", "c"]), 2).unwrap();
        assert_eq!(bag.total(), 2);
        assert_eq!(bag.count(&["a".into(), "b".into()]), 1);
        assert_eq!(bag.count(&["b".into(), "c".into()]), 1);
    }

    #[test]
    fn unigram_multiplicity_is_counted() {
        let bag = ngrams(&stream_of(&["a", "a", "a"]), 1).unwrap();
        assert_eq!(bag.count(&["a".into()]), 3);
        assert_eq!(bag.total(), 3);
    }

    #[test]
    fn window_larger_than_stream_gives_empty_bag() {
        let bag = ngrams(&stream_of(&["a"]), 2).unwrap();
        assert_eq!(bag.total(), 0);
    }

    #[test]
    fn order_zero_is_rejected() {
        assert_eq!(
            ngrams(&stream_of(&["a"]), 0).unwrap_err(),
            TokenizeError::InvalidOrder(0)
        );
    }

    #[test]
    fn clipped_overlap_clips_at_other_count() {
        let a = ngrams(&stream_of(&["x", "x", "x"]), 1).unwrap();
        let b = ngrams(&stream_of(&["x"]), 1).unwrap();
        assert_eq!(a.clipped_overlap(&b), 1);
        assert_eq!(b.clipped_overlap(&a), 1);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent_on_rejoined_tokens(text in "[ -~]{0,60}") {
            for policy in [TokenPolicy::WER, TokenPolicy::BLEU, TokenPolicy::ROUGE] {
                let first = tokenize(&text, policy);
                let rejoined = first.tokens().join(" ");
                let second = tokenize(&rejoined, policy);
                prop_assert_eq!(first.tokens(), second.tokens());
            }
        }

        #[test]
        fn ngram_totals_match_window_count(words in prop::collection::vec("[a-c]{1,2}", 0..12), n in 1usize..5) {
            let stream = stream_of(&words.iter().map(String::as_str).collect::<Vec<_>>());
            let bag = ngrams(&stream, n).unwrap();
            let expected = stream.len().saturating_sub(n - 1) as u64;
            let expected = if stream.len() < n { 0 } else { expected };
            prop_assert_eq!(bag.total(), expected);
            prop_assert_eq!(bag.total(), bag.clipped_overlap(&bag));
        }

        #[test]
        fn policies_agree_after_stripping_punctuation(text in "[ -~]{0,60}") {
            let wer = tokenize(&text, TokenPolicy::WER);
            let bleu = tokenize(&text, TokenPolicy::BLEU);
            let projected: Vec<String> = bleu
                .tokens()
                .iter()
                .map(|t| t.chars().filter(|c| c.is_alphanumeric()).collect::<String>())
                .filter(|t| !t.is_empty())
                .collect();
            prop_assert_eq!(wer.tokens(), &projected[..]);
        }

        #[test]
        fn tokens_are_nonempty_and_whitespace_free(text in "\\PC{0,40}") {
            for policy in [TokenPolicy::WER, TokenPolicy::BLEU, TokenPolicy::ROUGE] {
                for token in tokenize(&text, policy).tokens() {
                    prop_assert!(!token.is_empty());
                    prop_assert!(!token.chars().any(char::is_whitespace));
                }
            }
        }
    }
}
