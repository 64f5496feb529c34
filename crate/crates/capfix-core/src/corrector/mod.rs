//! Caption correction through a pluggable completion backend.
//!
//! The prompt instructs the model to fix errors without changing the word
//! sequence; the constraint checker then verifies that promise by aligning
//! the original and corrected captions. Violations are reported, never
//! rejected; callers decide what to do with offending corrections.

mod backend;
mod http;

pub use backend::{CompletionBackend, CompletionRequest, CountingBackend, MockBackend};
pub use http::HttpBackend;

use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metrics::{align, AlignmentCounts};
use crate::tokenize::{tokenize, TokenPolicy};

/// The instruction sent ahead of every caption.
pub const DEFAULT_INSTRUCTION: &str =
    "Correct the caption according to English standards. Don't change the word sequence";

/// Placeholder substituted with the caption when rendering a template.
pub const CAPTION_PLACEHOLDER: &str = "{caption}";

/// Flag captions whose token count drifts more than this fraction from the
/// original, since a large length change breaks cue synchronization.
pub const DEFAULT_SYNC_THRESHOLD: f64 = 0.2;

#[derive(Debug, Error)]
pub enum CorrectorError {
    #[error("caption is empty")]
    EmptyCaption,
    #[error("prompt template must contain the {{caption}} placeholder exactly once")]
    BadTemplate,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend refused the request: {0}")]
    BackendRefusal(String),
    #[error("backend timed out after {0} ms")]
    Timeout(u64),
    #[error("invalid mock rules: {0}")]
    InvalidRules(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CorrectorError {
    /// Whether a retry could plausibly succeed.
    pub fn is_transient(&self) -> bool {
        matches!(
            self,
            CorrectorError::BackendUnavailable(_) | CorrectorError::Timeout(_)
        )
    }
}

/// Instruction text with one `{caption}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    instruction: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            instruction: format!("{DEFAULT_INSTRUCTION}\n\n{CAPTION_PLACEHOLDER}"),
        }
    }
}

impl PromptTemplate {
    /// Build a template from instruction text containing `{caption}` exactly
    /// once.
    pub fn new(instruction: impl Into<String>) -> Result<Self, CorrectorError> {
        let instruction = instruction.into();
        if instruction.matches(CAPTION_PLACEHOLDER).count() != 1 {
            return Err(CorrectorError::BadTemplate);
        }
        Ok(PromptTemplate { instruction })
    }

    /// Substitute the caption into the placeholder. The caption must be
    /// non-empty.
    pub fn render(&self, caption: &str) -> Result<String, CorrectorError> {
        if caption.trim().is_empty() {
            return Err(CorrectorError::EmptyCaption);
        }
        Ok(self.instruction.replacen(CAPTION_PLACEHOLDER, caption, 1))
    }
}

/// Render the correction prompt for a caption.
pub fn build_prompt(caption: &str, template: &PromptTemplate) -> Result<String, CorrectorError> {
    template.render(caption)
}

/// Stable hex digest of a rendered prompt; cache entries are keyed by it.
pub fn prompt_hash(prompt: &str) -> String {
    let digest = Sha256::digest(prompt.as_bytes());
    let mut out = String::with_capacity(digest.len() * 2);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Connection and behavior settings for a completion backend.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    /// Stable backend identifier, e.g. `"mock"` or `"http-chat"`.
    pub backend_id: String,
    /// Chat-completion endpoint URL; required for HTTP backends.
    pub endpoint: Option<String>,
    pub model_name: String,
    /// Sampling temperature; 0 by default to chase determinism.
    pub temperature: f64,
    /// Retries after the first attempt on transient failures.
    pub max_retries: u32,
    pub timeout_ms: u64,
    /// Name of the environment variable holding the API key. Keys are never
    /// read from files or flags.
    pub api_key_env: Option<String>,
}

impl BackendConfig {
    pub fn mock() -> Self {
        BackendConfig {
            backend_id: "mock".to_string(),
            endpoint: None,
            model_name: "default".to_string(),
            temperature: 0.0,
            max_retries: 2,
            timeout_ms: 30_000,
            api_key_env: None,
        }
    }

    pub fn http(endpoint: impl Into<String>, model_name: impl Into<String>) -> Self {
        BackendConfig {
            backend_id: "http-chat".to_string(),
            endpoint: Some(endpoint.into()),
            model_name: model_name.into(),
            temperature: 0.0,
            max_retries: 2,
            timeout_ms: 30_000,
            api_key_env: None,
        }
    }
}

/// Diagnostics comparing a corrected caption against its original.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    /// Corrected token count over original token count.
    pub length_ratio: f64,
    /// Alignment with the original caption as reference.
    pub alignment_counts: AlignmentCounts,
    /// Set iff the alignment contains an insertion or deletion; pure
    /// substitutions never raise it.
    pub sequence_violation: bool,
    /// Set iff the length ratio drifts beyond the sync threshold.
    pub sync_risk: bool,
}

/// Outcome of one correction call.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    pub original: String,
    pub corrected: String,
    pub backend_id: String,
    pub prompt_hash: String,
    pub diagnostics: ConstraintReport,
    pub latency_ms: u64,
}

/// Check the word-sequence and synchronization constraints. Pure function of
/// its inputs; uses the WER tokenization policy.
pub fn check_constraints(original: &str, corrected: &str, sync_threshold: f64) -> ConstraintReport {
    let original_stream = tokenize(original, TokenPolicy::WER);
    let corrected_stream = tokenize(corrected, TokenPolicy::WER);
    let (counts, _) = align(&original_stream, &corrected_stream);
    let length_ratio = if original_stream.is_empty() {
        if corrected_stream.is_empty() {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        corrected_stream.len() as f64 / original_stream.len() as f64
    };
    ConstraintReport {
        length_ratio,
        sequence_violation: counts.insertions > 0 || counts.deletions > 0,
        sync_risk: (length_ratio - 1.0).abs() > sync_threshold,
        alignment_counts: counts,
    }
}

/// Correct one caption through a backend, retrying transient failures with
/// exponential backoff, and report constraint diagnostics on the result.
pub fn correct(
    caption: &str,
    backend: &dyn CompletionBackend,
    config: &BackendConfig,
    template: &PromptTemplate,
    sync_threshold: f64,
) -> Result<CorrectionResult, CorrectorError> {
    let prompt = build_prompt(caption, template)?;
    let hash = prompt_hash(&prompt);
    let request = CompletionRequest {
        prompt: &prompt,
        caption,
    };

    let started = Instant::now();
    let mut attempt = 0;
    let raw = loop {
        match backend.complete(&request) {
            Ok(raw) => break raw,
            Err(err) if err.is_transient() && attempt < config.max_retries => {
                log::debug!(
                    "backend {} attempt {} failed ({err}), retrying",
                    backend.id(),
                    attempt + 1
                );
                std::thread::sleep(backoff_delay(attempt));
                attempt += 1;
            }
            Err(err) => return Err(err),
        }
    };
    let latency_ms = started.elapsed().as_millis() as u64;

    let corrected = trim_response(&raw);
    if corrected.is_empty() {
        return Err(CorrectorError::BackendRefusal(
            "backend returned an empty response".to_string(),
        ));
    }
    let diagnostics = check_constraints(caption, &corrected, sync_threshold);
    Ok(CorrectionResult {
        original: caption.to_string(),
        corrected,
        backend_id: backend.id().to_string(),
        prompt_hash: hash,
        diagnostics,
        latency_ms,
    })
}

fn backoff_delay(attempt: u32) -> Duration {
    const BASE_MS: u64 = 50;
    const CAP_MS: u64 = 2_000;
    Duration::from_millis((BASE_MS << attempt.min(16)).min(CAP_MS))
}

/// Strip a wrapping markdown fence or one symmetric pair of double quotes
/// that some backends add around the corrected text.
fn trim_response(raw: &str) -> String {
    let mut text = raw.trim();
    if let Some(rest) = text.strip_prefix("```") {
        let rest = rest.strip_suffix("```").unwrap_or(rest);
        // Drop a language tag on the opening fence line.
        let rest = match rest.split_once('\n') {
            Some((first, body)) if !first.trim().contains(' ') && !first.trim().is_empty() => body,
            _ => rest,
        };
        text = rest.trim();
    }
    let bytes = text.as_bytes();
    if bytes.len() >= 2 && bytes[0] == b'"' && bytes[bytes.len() - 1] == b'"' {
        text = text[1..text.len() - 1].trim();
    }
    text.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    const HOMOPHONE_INPUT: &str =
        "I was walkng in the son. The day was bright and pleasant because of son y weather.";
    const HOMOPHONE_OUTPUT: &str =
        "I was walking in the sun. The day was bright and pleasant because of sunny weather.";

    fn homophone_rules() -> MockBackend {
        MockBackend::with_rules([
            ("walkng", "walking"),
            ("son", "sun"),
            ("son y", "sunny"),
        ])
    }

    #[test]
    fn default_prompt_appends_caption() {
        let prompt = build_prompt("I was walkng in the son.", &PromptTemplate::default()).unwrap();
        assert_eq!(
            prompt,
            format!("{DEFAULT_INSTRUCTION}\n\nI was walkng in the son.")
        );
    }

    #[test]
    fn empty_caption_is_rejected() {
        let err = build_prompt("", &PromptTemplate::default()).unwrap_err();
        assert!(matches!(err, CorrectorError::EmptyCaption));
        let err = build_prompt("   ", &PromptTemplate::default()).unwrap_err();
        assert!(matches!(err, CorrectorError::EmptyCaption));
    }

    #[test]
    fn custom_template_substitutes_exactly_once() {
        let template = PromptTemplate::new("Fix this: {caption} -- thanks").unwrap();
        assert_eq!(
            template.render("the text").unwrap(),
            "Fix this: the text -- thanks"
        );
    }

    #[test]
    fn template_requires_single_placeholder() {
        assert!(matches!(
            PromptTemplate::new("no placeholder").unwrap_err(),
            CorrectorError::BadTemplate
        ));
        assert!(matches!(
            PromptTemplate::new("{caption} and {caption}").unwrap_err(),
            CorrectorError::BadTemplate
        ));
    }

    #[test]
    fn prompt_hash_is_stable() {
        let template = PromptTemplate::default();
        let a = prompt_hash(&build_prompt("hello", &template).unwrap());
        let b = prompt_hash(&build_prompt("hello", &template).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        let c = prompt_hash(&build_prompt("other", &template).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn rules_mock_reproduces_homophone_correction() {
        let backend = homophone_rules();
        let result = correct(
            HOMOPHONE_INPUT,
            &backend,
            &BackendConfig::mock(),
            &PromptTemplate::default(),
            DEFAULT_SYNC_THRESHOLD,
        )
        .unwrap();
        assert_eq!(result.corrected, HOMOPHONE_OUTPUT);
        assert_eq!(result.original, HOMOPHONE_INPUT);
        // "son y" collapsing into "sunny" is a token merge, so the alignment
        // carries one deletion, but the length drift stays under the sync
        // threshold.
        assert!(!result.diagnostics.sync_risk);
    }

    #[test]
    fn identity_mock_never_violates_sequence() {
        let backend = MockBackend::identity();
        let result = correct(
            "any caption at all",
            &backend,
            &BackendConfig::mock(),
            &PromptTemplate::default(),
            DEFAULT_SYNC_THRESHOLD,
        )
        .unwrap();
        assert_eq!(result.corrected, "any caption at all");
        assert!(!result.diagnostics.sequence_violation);
        assert_eq!(result.diagnostics.length_ratio, 1.0);
    }

    #[test]
    fn rewrite_that_inserts_words_raises_sequence_violation() {
        let backend = MockBackend::with_rules([("focusing on", "with a focus on")]);
        let result = correct(
            "Today we are focusing on polymorphism.",
            &backend,
            &BackendConfig::mock(),
            &PromptTemplate::default(),
            DEFAULT_SYNC_THRESHOLD,
        )
        .unwrap();
        assert!(result.diagnostics.sequence_violation);
        assert!(result.diagnostics.alignment_counts.insertions > 0);
    }

    #[test]
    fn check_constraints_identity_has_no_flags() {
        let report = check_constraints("a b c", "a b c", DEFAULT_SYNC_THRESHOLD);
        assert_eq!(report.length_ratio, 1.0);
        assert!(!report.sequence_violation);
        assert!(!report.sync_risk);
    }

    #[test]
    fn check_constraints_flags_insertion_rewrite() {
        let report = check_constraints("focusing on x", "with a focus on x", DEFAULT_SYNC_THRESHOLD);
        assert!(report.sequence_violation);
        assert_eq!(report.length_ratio, 5.0 / 3.0);
        assert!(report.sync_risk);
    }

    #[test]
    fn pure_substitution_is_permitted() {
        let report = check_constraints("the son", "the sun", DEFAULT_SYNC_THRESHOLD);
        assert!(!report.sequence_violation);
        assert_eq!(report.alignment_counts.substitutions, 1);
        assert!(!report.sync_risk);
    }

    struct FlakyBackend {
        failures: AtomicU32,
    }

    impl CompletionBackend for FlakyBackend {
        fn id(&self) -> &str {
            "flaky"
        }

        fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, CorrectorError> {
            if self.failures.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| {
                n.checked_sub(1)
            })
            .is_ok()
            {
                Err(CorrectorError::BackendUnavailable("boom".to_string()))
            } else {
                Ok(request.caption.to_string())
            }
        }
    }

    #[test]
    fn transient_failures_are_retried() {
        let backend = FlakyBackend {
            failures: AtomicU32::new(2),
        };
        let result = correct(
            "hello there",
            &backend,
            &BackendConfig::mock(),
            &PromptTemplate::default(),
            DEFAULT_SYNC_THRESHOLD,
        );
        assert_eq!(result.unwrap().corrected, "hello there");
    }

    #[test]
    fn retries_exhaust_into_backend_unavailable() {
        let backend = FlakyBackend {
            failures: AtomicU32::new(10),
        };
        let mut config = BackendConfig::mock();
        config.max_retries = 1;
        let err = correct(
            "hello there",
            &backend,
            &config,
            &PromptTemplate::default(),
            DEFAULT_SYNC_THRESHOLD,
        )
        .unwrap_err();
        assert!(matches!(err, CorrectorError::BackendUnavailable(_)));
    }

    struct RefusingBackend;

    impl CompletionBackend for RefusingBackend {
        fn id(&self) -> &str {
            "refusing"
        }

        fn complete(&self, _request: &CompletionRequest<'_>) -> Result<String, CorrectorError> {
            Err(CorrectorError::BackendRefusal("nope".to_string()))
        }
    }

    #[test]
    fn refusals_are_not_retried() {
        let err = correct(
            "hello",
            &RefusingBackend,
            &BackendConfig::mock(),
            &PromptTemplate::default(),
            DEFAULT_SYNC_THRESHOLD,
        )
        .unwrap_err();
        assert!(matches!(err, CorrectorError::BackendRefusal(_)));
    }

    struct EchoBackend(String);

    impl CompletionBackend for EchoBackend {
        fn id(&self) -> &str {
            "echo"
        }

        fn complete(&self, _request: &CompletionRequest<'_>) -> Result<String, CorrectorError> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn empty_response_is_a_refusal() {
        let err = correct(
            "hello",
            &EchoBackend("   ".to_string()),
            &BackendConfig::mock(),
            &PromptTemplate::default(),
            DEFAULT_SYNC_THRESHOLD,
        )
        .unwrap_err();
        assert!(matches!(err, CorrectorError::BackendRefusal(_)));
    }

    #[test]
    fn wrapping_quotes_and_fences_are_trimmed() {
        assert_eq!(trim_response("\"quoted text\""), "quoted text");
        assert_eq!(trim_response("```\nfenced text\n```"), "fenced text");
        assert_eq!(trim_response("```text\nfenced text\n```"), "fenced text");
        assert_eq!(trim_response("plain \"interior\" quotes"), "plain \"interior\" quotes");
        assert_eq!(trim_response("  padded  "), "padded");
    }

    #[test]
    fn counting_backend_tracks_calls() {
        let backend = CountingBackend::new(MockBackend::identity());
        let config = BackendConfig::mock();
        let template = PromptTemplate::default();
        correct("one", &backend, &config, &template, DEFAULT_SYNC_THRESHOLD).unwrap();
        correct("two", &backend, &config, &template, DEFAULT_SYNC_THRESHOLD).unwrap();
        assert_eq!(backend.calls(), 2);
    }
}
