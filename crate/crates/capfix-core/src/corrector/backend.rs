//! Completion backend abstraction and the deterministic mock.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::CorrectorError;

/// One correction request. HTTP backends send the rendered prompt; the mock
/// operates on the bare caption, playing the role of a model that follows
/// the instruction.
#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub prompt: &'a str,
    pub caption: &'a str,
}

/// A pluggable completion service.
pub trait CompletionBackend: Send + Sync {
    /// Stable identifier used in results and cache keys.
    fn id(&self) -> &str;

    /// Produce the corrected caption text for one request.
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, CorrectorError>;
}

impl CompletionBackend for Box<dyn CompletionBackend> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, CorrectorError> {
        (**self).complete(request)
    }
}

/// Deterministic backend applying exact-substring replacement rules to the
/// caption, scanning left to right and preferring the longest matching rule
/// at each position. With no rules it is the identity backend.
#[derive(Debug)]
pub struct MockBackend {
    /// Sorted by key length descending (ties lexicographic) so the scan is
    /// longest-match-first and fully deterministic.
    rules: Vec<(String, String)>,
}

impl MockBackend {
    /// A mock that returns every caption unchanged.
    pub fn identity() -> Self {
        MockBackend { rules: Vec::new() }
    }

    pub fn with_rules<K, V>(rules: impl IntoIterator<Item = (K, V)>) -> Self
    where
        K: Into<String>,
        V: Into<String>,
    {
        let mut rules: Vec<(String, String)> = rules
            .into_iter()
            .map(|(k, v)| (k.into(), v.into()))
            .filter(|(k, _)| !k.is_empty())
            .collect();
        rules.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        MockBackend { rules }
    }

    /// Load rules from a JSON object mapping search strings to replacements.
    pub fn from_rules_file(path: impl AsRef<Path>) -> Result<Self, CorrectorError> {
        let data = std::fs::read_to_string(path)?;
        Self::from_rules_json(&data)
    }

    pub fn from_rules_json(json: &str) -> Result<Self, CorrectorError> {
        let map: BTreeMap<String, String> = serde_json::from_str(json)
            .map_err(|err| CorrectorError::InvalidRules(err.to_string()))?;
        Ok(Self::with_rules(map))
    }

    fn apply(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        'scan: while !rest.is_empty() {
            for (needle, replacement) in &self.rules {
                if rest.starts_with(needle.as_str()) {
                    out.push_str(replacement);
                    rest = &rest[needle.len()..];
                    continue 'scan;
                }
            }
            let ch = rest.chars().next().expect("rest is non-empty");
            out.push(ch);
            rest = &rest[ch.len_utf8()..];
        }
        out
    }
}

impl CompletionBackend for MockBackend {
    fn id(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, CorrectorError> {
        Ok(self.apply(request.caption))
    }
}

/// Wrapper counting delegated calls; used to verify cache read-through.
pub struct CountingBackend<B> {
    inner: B,
    calls: AtomicUsize,
}

impl<B: CompletionBackend> CountingBackend<B> {
    pub fn new(inner: B) -> Self {
        CountingBackend {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<B: CompletionBackend> CompletionBackend for CountingBackend<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, CorrectorError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(backend: &MockBackend, caption: &str) -> String {
        backend
            .complete(&CompletionRequest {
                prompt: caption,
                caption,
            })
            .unwrap()
    }

    #[test]
    fn identity_returns_input_unchanged() {
        let backend = MockBackend::identity();
        assert_eq!(complete(&backend, "abc def"), "abc def");
    }

    #[test]
    fn longest_match_wins_at_each_position() {
        let backend = MockBackend::with_rules([("son", "sun"), ("son y", "sunny")]);
        assert_eq!(complete(&backend, "the son y day"), "the sunny day");
        assert_eq!(complete(&backend, "the son. later"), "the sun. later");
    }

    #[test]
    fn replacements_are_not_rescanned() {
        let backend = MockBackend::with_rules([("a", "ab")]);
        assert_eq!(complete(&backend, "aa"), "abab");
    }

    #[test]
    fn rules_parse_from_json() {
        let backend = MockBackend::from_rules_json(r#"{"walkng": "walking"}"#).unwrap();
        assert_eq!(complete(&backend, "walkng home"), "walking home");
    }

    #[test]
    fn bad_rules_json_is_rejected() {
        assert!(matches!(
            MockBackend::from_rules_json("[1, 2]").unwrap_err(),
            CorrectorError::InvalidRules(_)
        ));
    }

    #[test]
    fn empty_keys_are_ignored() {
        let backend = MockBackend::with_rules([("", "x"), ("b", "c")]);
        assert_eq!(complete(&backend, "ab"), "ac");
    }

    #[test]
    fn multibyte_text_survives_scanning() {
        let backend = MockBackend::with_rules([("fizz", "phism")]);
        assert_eq!(complete(&backend, "poly ‘fizz’ em"), "poly ‘phism’ em");
    }
}
