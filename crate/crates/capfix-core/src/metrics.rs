//! Reference/hypothesis scoring: edit-distance alignment, WER, BLEU and
//! ROUGE-1/2/L.
//!
//! The alignment machinery is exposed (`align`, `align_slices`) because cue
//! resynchronization reuses the same path computation. The convention
//! throughout is that the first argument is the reference; WER in particular
//! is not symmetric when lengths differ.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::{ngrams, tokenize, TokenPolicy, TokenStream};

/// Default highest n-gram order aggregated into BLEU.
pub const DEFAULT_BLEU_ORDER: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("reference token stream is empty")]
    EmptyReference,
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
}

/// Counts from a minimum-edit-distance alignment.
///
/// `matches + substitutions + deletions == ref_len` and
/// `matches + substitutions + insertions == hyp_len` always hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AlignmentCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub matches: usize,
    pub ref_len: usize,
}

impl AlignmentCounts {
    /// Total edit operations: S + D + I.
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    pub fn hyp_len(&self) -> usize {
        self.matches + self.substitutions + self.insertions
    }

    pub fn pool(&mut self, other: &AlignmentCounts) {
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
        self.matches += other.matches;
        self.ref_len += other.ref_len;
    }
}

/// One step of an alignment path. Indices are 0-based positions in the
/// reference and hypothesis token sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignOp {
    Match { ref_idx: usize, hyp_idx: usize },
    Substitute { ref_idx: usize, hyp_idx: usize },
    Delete { ref_idx: usize },
    Insert { hyp_idx: usize },
}

/// A full alignment path consuming every token of both sequences, with
/// reference and hypothesis indices each strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentPath {
    pub ops: Vec<AlignOp>,
}

/// Minimum-edit-distance alignment over arbitrary comparable slices with
/// unit costs. Ties are broken deterministically: diagonal moves
/// (match/substitute) are preferred over deletions, which are preferred
/// over insertions.
pub fn align_slices<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> (AlignmentCounts, AlignmentPath) {
    let n = reference.len();
    let m = hypothesis.len();
    let mut dp = vec![vec![0u32; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i as u32;
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub_cost = u32::from(reference[i - 1] != hypothesis[j - 1]);
            dp[i][j] = (dp[i - 1][j - 1] + sub_cost)
                .min(dp[i - 1][j] + 1)
                .min(dp[i][j - 1] + 1);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i][j];
        if i > 0 && j > 0 {
            let sub_cost = u32::from(reference[i - 1] != hypothesis[j - 1]);
            if dp[i - 1][j - 1] + sub_cost == here {
                ops.push(if sub_cost == 0 {
                    AlignOp::Match {
                        ref_idx: i - 1,
                        hyp_idx: j - 1,
                    }
                } else {
                    AlignOp::Substitute {
                        ref_idx: i - 1,
                        hyp_idx: j - 1,
                    }
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[i - 1][j] + 1 == here {
            ops.push(AlignOp::Delete { ref_idx: i - 1 });
            i -= 1;
            continue;
        }
        ops.push(AlignOp::Insert { hyp_idx: j - 1 });
        j -= 1;
    }
    ops.reverse();

    let mut counts = AlignmentCounts {
        ref_len: n,
        ..AlignmentCounts::default()
    };
    for op in &ops {
        match op {
            AlignOp::Match { .. } => counts.matches += 1,
            AlignOp::Substitute { .. } => counts.substitutions += 1,
            AlignOp::Delete { .. } => counts.deletions += 1,
            AlignOp::Insert { .. } => counts.insertions += 1,
        }
    }
    (counts, AlignmentPath { ops })
}

/// Align two token streams tokenized under the same policy.
pub fn align(reference: &TokenStream, hypothesis: &TokenStream) -> (AlignmentCounts, AlignmentPath) {
    debug_assert_eq!(reference.policy(), hypothesis.policy());
    align_slices(reference.tokens(), hypothesis.tokens())
}

/// Word error rate: (S + D + I) / N over the optimal alignment. May exceed
/// 1.0 when insertions are numerous. The reference must be non-empty.
pub fn wer(reference: &TokenStream, hypothesis: &TokenStream) -> Result<f64, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let (counts, _) = align(reference, hypothesis);
    Ok(counts.errors() as f64 / counts.ref_len as f64)
}

/// Clipped n-gram match and total counts feeding BLEU; poolable across a
/// corpus for micro aggregation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    matches: Vec<u64>,
    totals: Vec<u64>,
    ref_len: u64,
    hyp_len: u64,
}

impl BleuStats {
    pub fn zero(max_n: usize) -> Self {
        BleuStats {
            matches: vec![0; max_n],
            totals: vec![0; max_n],
            ref_len: 0,
            hyp_len: 0,
        }
    }

    pub fn max_n(&self) -> usize {
        self.matches.len()
    }

    pub fn pool(&mut self, other: &BleuStats) {
        debug_assert_eq!(self.max_n(), other.max_n());
        for k in 0..self.matches.len().min(other.matches.len()) {
            self.matches[k] += other.matches[k];
            self.totals[k] += other.totals[k];
        }
        self.ref_len += other.ref_len;
        self.hyp_len += other.hyp_len;
    }
}

/// Gather clipped n-gram precision counts for orders 1..=max_n.
pub fn bleu_stats(reference: &TokenStream, hypothesis: &TokenStream, max_n: usize) -> BleuStats {
    let mut stats = BleuStats::zero(max_n);
    stats.ref_len = reference.len() as u64;
    stats.hyp_len = hypothesis.len() as u64;
    for k in 1..=max_n {
        // Order k >= 1 by construction, so ngrams cannot fail.
        let ref_bag = ngrams(reference, k).expect("order is at least 1");
        let hyp_bag = ngrams(hypothesis, k).expect("order is at least 1");
        stats.matches[k - 1] = hyp_bag.clipped_overlap(&ref_bag);
        stats.totals[k - 1] = hyp_bag.total();
    }
    stats
}

/// BLEU from gathered stats: the geometric mean of clipped precisions over
/// the orders that have any hypothesis n-grams (effective order), times a
/// brevity penalty `exp(1 - ref_len/hyp_len)` when the hypothesis is
/// shorter. Zero whenever an included precision is zero; no smoothing.
pub fn bleu_from_stats(stats: &BleuStats) -> f64 {
    if stats.hyp_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut orders = 0u32;
    for k in 0..stats.max_n() {
        if stats.totals[k] == 0 {
            continue;
        }
        if stats.matches[k] == 0 {
            return 0.0;
        }
        log_sum += (stats.matches[k] as f64 / stats.totals[k] as f64).ln();
        orders += 1;
    }
    if orders == 0 {
        return 0.0;
    }
    let precision_mean = (log_sum / f64::from(orders)).exp();
    let brevity = if stats.hyp_len < stats.ref_len {
        (1.0 - stats.ref_len as f64 / stats.hyp_len as f64).exp()
    } else {
        1.0
    };
    precision_mean * brevity
}

/// Sentence BLEU against a single reference. An empty hypothesis scores 0
/// by definition.
pub fn bleu(reference: &TokenStream, hypothesis: &TokenStream, max_n: usize) -> f64 {
    bleu_from_stats(&bleu_stats(reference, hypothesis, max_n))
}

/// Overlap numerator/denominator pair behind a ROUGE score; poolable across
/// a corpus for micro aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverlapStats {
    pub overlap: u64,
    pub ref_count: u64,
    pub hyp_count: u64,
}

impl OverlapStats {
    pub fn pool(&mut self, other: &OverlapStats) {
        self.overlap += other.overlap;
        self.ref_count += other.ref_count;
        self.hyp_count += other.hyp_count;
    }

    /// Recall: overlap / reference count, 0 when the reference is empty.
    pub fn recall(&self) -> f64 {
        ratio(self.overlap, self.ref_count)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.overlap, self.hyp_count)
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Recall, precision and F1 for one ROUGE variant. The headline score
/// reported everywhere else is the recall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeScores {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl From<OverlapStats> for RougeScores {
    fn from(stats: OverlapStats) -> Self {
        RougeScores {
            recall: stats.recall(),
            precision: stats.precision(),
            f1: stats.f1(),
        }
    }
}

/// Clipped n-gram overlap counts for ROUGE-N.
pub fn rouge_n_stats(
    reference: &TokenStream,
    hypothesis: &TokenStream,
    n: usize,
) -> Result<OverlapStats, MetricsError> {
    if n < 1 {
        return Err(MetricsError::InvalidOrder(n));
    }
    let ref_bag = ngrams(reference, n).expect("order checked above");
    let hyp_bag = ngrams(hypothesis, n).expect("order checked above");
    Ok(OverlapStats {
        overlap: ref_bag.clipped_overlap(&hyp_bag),
        ref_count: ref_bag.total(),
        hyp_count: hyp_bag.total(),
    })
}

/// ROUGE-N recall: clipped n-gram overlap divided by the reference n-gram
/// count; 0 when the reference has no n-grams.
pub fn rouge_n(reference: &TokenStream, hypothesis: &TokenStream, n: usize) -> Result<f64, MetricsError> {
    Ok(rouge_n_stats(reference, hypothesis, n)?.recall())
}

/// All three ROUGE-N scores (recall, precision, F1).
pub fn rouge_n_scores(
    reference: &TokenStream,
    hypothesis: &TokenStream,
    n: usize,
) -> Result<RougeScores, MetricsError> {
    Ok(rouge_n_stats(reference, hypothesis, n)?.into())
}

/// LCS length and sequence lengths for ROUGE-L.
pub fn rouge_l_stats(reference: &TokenStream, hypothesis: &TokenStream) -> OverlapStats {
    OverlapStats {
        overlap: lcs_length(reference.tokens(), hypothesis.tokens()),
        ref_count: reference.len() as u64,
        hyp_count: hypothesis.len() as u64,
    }
}

/// ROUGE-L recall: LCS length divided by reference length; 0 when the
/// reference is empty.
pub fn rouge_l(reference: &TokenStream, hypothesis: &TokenStream) -> f64 {
    rouge_l_stats(reference, hypothesis).recall()
}

/// All three ROUGE-L scores (recall, precision, F1).
pub fn rouge_l_scores(reference: &TokenStream, hypothesis: &TokenStream) -> RougeScores {
    rouge_l_stats(reference, hypothesis).into()
}

fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> u64 {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0u64; b.len() + 1];
    let mut curr = vec![0u64; b.len() + 1];
    for item_a in a {
        for (j, item_b) in b.iter().enumerate() {
            curr[j + 1] = if item_a == item_b {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// The tokenization policy bound to each metric. Defaults reproduce the
/// bundled per-metric conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricPolicies {
    pub wer: TokenPolicy,
    pub bleu: TokenPolicy,
    pub rouge: TokenPolicy,
}

impl Default for MetricPolicies {
    fn default() -> Self {
        MetricPolicies {
            wer: TokenPolicy::WER,
            bleu: TokenPolicy::BLEU,
            rouge: TokenPolicy::ROUGE,
        }
    }
}

/// Scores for one reference/hypothesis pair.
///
/// Serializes to a flat JSON object with fields
/// `wer, bleu, rouge1, rouge2, rougeL, s, d, i, n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MetricReportWire", from = "MetricReportWire")]
pub struct MetricReport {
    pub wer: f64,
    pub bleu: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    pub counts: AlignmentCounts,
}

#[derive(Serialize, Deserialize)]
struct MetricReportWire {
    wer: f64,
    bleu: f64,
    rouge1: f64,
    rouge2: f64,
    #[serde(rename = "rougeL")]
    rouge_l: f64,
    s: usize,
    d: usize,
    i: usize,
    n: usize,
}

impl From<MetricReport> for MetricReportWire {
    fn from(report: MetricReport) -> Self {
        MetricReportWire {
            wer: report.wer,
            bleu: report.bleu,
            rouge1: report.rouge1,
            rouge2: report.rouge2,
            rouge_l: report.rouge_l,
            s: report.counts.substitutions,
            d: report.counts.deletions,
            i: report.counts.insertions,
            n: report.counts.ref_len,
        }
    }
}

impl From<MetricReportWire> for MetricReport {
    fn from(wire: MetricReportWire) -> Self {
        MetricReport {
            wer: wire.wer,
            bleu: wire.bleu,
            rouge1: wire.rouge1,
            rouge2: wire.rouge2,
            rouge_l: wire.rouge_l,
            counts: AlignmentCounts {
                substitutions: wire.s,
                deletions: wire.d,
                insertions: wire.i,
                matches: wire.n.saturating_sub(wire.s + wire.d),
                ref_len: wire.n,
            },
        }
    }
}

/// A scored pair plus the poolable per-metric counts that corpus-level
/// micro aggregation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEvaluation {
    pub report: MetricReport,
    pub bleu: BleuStats,
    pub rouge1: OverlapStats,
    pub rouge2: OverlapStats,
    pub rouge_l: OverlapStats,
}

/// Score a pair under each metric's bound policy.
pub fn evaluate_pair(ref_text: &str, hyp_text: &str) -> Result<MetricReport, MetricsError> {
    Ok(evaluate_pair_detailed(ref_text, hyp_text, &MetricPolicies::default())?.report)
}

/// Score a pair, keeping the poolable counts.
pub fn evaluate_pair_detailed(
    ref_text: &str,
    hyp_text: &str,
    policies: &MetricPolicies,
) -> Result<PairEvaluation, MetricsError> {
    let wer_ref = tokenize(ref_text, policies.wer);
    let wer_hyp = tokenize(hyp_text, policies.wer);
    if wer_ref.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let (counts, _) = align(&wer_ref, &wer_hyp);
    let wer_score = counts.errors() as f64 / counts.ref_len as f64;

    let bleu_ref = tokenize(ref_text, policies.bleu);
    let bleu_hyp = tokenize(hyp_text, policies.bleu);
    let bleu_stats = bleu_stats(&bleu_ref, &bleu_hyp, DEFAULT_BLEU_ORDER);

    let rouge_ref = tokenize(ref_text, policies.rouge);
    let rouge_hyp = tokenize(hyp_text, policies.rouge);
    let rouge1 = rouge_n_stats(&rouge_ref, &rouge_hyp, 1).expect("order 1 is valid");
    let rouge2 = rouge_n_stats(&rouge_ref, &rouge_hyp, 2).expect("order 2 is valid");
    let rouge_l = rouge_l_stats(&rouge_ref, &rouge_hyp);

    Ok(PairEvaluation {
        report: MetricReport {
            wer: wer_score,
            bleu: bleu_from_stats(&bleu_stats),
            rouge1: rouge1.recall(),
            rouge2: rouge2.recall(),
            rouge_l: rouge_l.recall(),
            counts,
        },
        bleu: bleu_stats,
        rouge1,
        rouge2,
        rouge_l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FOX_REF: &str = "The quick brown fox jumps over the lazy dog.";
    const FOX_HYP: &str = "The quick brown fox leaps over the lazy dog.";

    fn wer_stream(text: &str) -> TokenStream {
        tokenize(text, TokenPolicy::WER)
    }

    fn bleu_stream(text: &str) -> TokenStream {
        tokenize(text, TokenPolicy::BLEU)
    }

    #[test]
    fn fox_pair_is_a_single_substitution() {
        let (counts, path) = align(&wer_stream(FOX_REF), &wer_stream(FOX_HYP));
        assert_eq!(counts.substitutions, 1);
        assert_eq!(counts.deletions, 0);
        assert_eq!(counts.insertions, 0);
        assert_eq!(counts.ref_len, 9);
        assert_eq!(counts.matches, 8);
        assert!(path
            .ops
            .iter()
            .any(|op| matches!(op, AlignOp::Substitute { ref_idx: 4, hyp_idx: 4 })));
    }

    #[test]
    fn identical_streams_align_with_all_matches() {
        let stream = wer_stream("a b c");
        let (counts, _) = align(&stream, &stream);
        assert_eq!(counts.errors(), 0);
        assert_eq!(counts.matches, counts.ref_len);
    }

    #[test]
    fn empty_hypothesis_is_total_deletion() {
        let (counts, path) = align(&wer_stream("a b c"), &wer_stream(""));
        assert_eq!(counts.deletions, 3);
        assert_eq!(counts.substitutions, 0);
        assert_eq!(counts.insertions, 0);
        assert_eq!(path.ops.len(), 3);
    }

    #[test]
    fn fox_wer_is_one_ninth() {
        let score = wer(&wer_stream(FOX_REF), &wer_stream(FOX_HYP)).unwrap();
        assert_eq!(score, 1.0 / 9.0);
    }

    #[test]
    fn identical_wer_is_zero() {
        let stream = wer_stream("hello world");
        assert_eq!(wer(&stream, &stream).unwrap(), 0.0);
    }

    #[test]
    fn wer_can_exceed_one() {
        let score = wer(&wer_stream("a"), &wer_stream("b c")).unwrap();
        assert_eq!(score, 2.0);
    }

    #[test]
    fn empty_reference_is_an_error() {
        assert_eq!(
            wer(&wer_stream(""), &wer_stream("a")).unwrap_err(),
            MetricsError::EmptyReference
        );
    }

    #[test]
    fn wer_is_directional() {
        let a = wer_stream("a b c d");
        let b = wer_stream("a b");
        assert_eq!(wer(&a, &b).unwrap(), 0.5);
        assert_eq!(wer(&b, &a).unwrap(), 1.0);
    }

    #[test]
    fn fox_bleu_matches_hand_computed_precisions() {
        let score = bleu(&bleu_stream(FOX_REF), &bleu_stream(FOX_HYP), 4);
        // Precisions 9/10, 7/9, 5/8, 3/7; equal lengths so no brevity penalty.
        let expected = (9.0f64 / 10.0 * 7.0 / 9.0 * 5.0 / 8.0 * 3.0 / 7.0).powf(0.25);
        assert!((score - expected).abs() < 1e-12);
        assert!((score - 0.658).abs() < 0.001);
    }

    #[test]
    fn identical_bleu_is_one() {
        let stream = bleu_stream("the cat sat on the mat.");
        assert_eq!(bleu(&stream, &stream, 4), 1.0);
        // Streams shorter than the maximum order still score 1 via effective order.
        let short = bleu_stream("a");
        assert_eq!(bleu(&short, &short, 4), 1.0);
    }

    #[test]
    fn disjoint_unigrams_give_zero_bleu() {
        assert_eq!(bleu(&bleu_stream("a b"), &bleu_stream("c d"), 4), 0.0);
    }

    #[test]
    fn empty_hypothesis_gives_zero_bleu() {
        assert_eq!(bleu(&bleu_stream("a b"), &bleu_stream(""), 4), 0.0);
    }

    #[test]
    fn brevity_penalty_applies_when_hypothesis_is_shorter() {
        let reference = bleu_stream("a b c d");
        let hypothesis = bleu_stream("a b");
        let expected = 1.0f64 * (1.0 - 4.0 / 2.0f64).exp();
        assert!((bleu(&reference, &hypothesis, 2) - expected).abs() < 1e-12);
    }

    #[test]
    fn fox_rouge_scores_match_expected_fractions() {
        let reference = wer_stream(FOX_REF);
        let hypothesis = wer_stream(FOX_HYP);
        assert_eq!(rouge_n(&reference, &hypothesis, 1).unwrap(), 8.0 / 9.0);
        assert_eq!(rouge_n(&reference, &hypothesis, 2).unwrap(), 6.0 / 8.0);
        assert_eq!(rouge_l(&reference, &hypothesis), 8.0 / 9.0);
    }

    #[test]
    fn identical_rouge_is_one() {
        let stream = wer_stream("a b c");
        assert_eq!(rouge_n(&stream, &stream, 1).unwrap(), 1.0);
        assert_eq!(rouge_n(&stream, &stream, 2).unwrap(), 1.0);
        assert_eq!(rouge_l(&stream, &stream), 1.0);
    }

    #[test]
    fn disjoint_rouge_is_zero() {
        let reference = wer_stream("a b");
        let hypothesis = wer_stream("c d");
        assert_eq!(rouge_n(&reference, &hypothesis, 1).unwrap(), 0.0);
        assert_eq!(rouge_l(&reference, &hypothesis), 0.0);
    }

    #[test]
    fn rouge_invalid_order_is_rejected() {
        let stream = wer_stream("a");
        assert_eq!(
            rouge_n(&stream, &stream, 0).unwrap_err(),
            MetricsError::InvalidOrder(0)
        );
    }

    #[test]
    fn rouge_recall_and_f1_coincide_on_equal_lengths() {
        let scores = rouge_n_scores(&wer_stream(FOX_REF), &wer_stream(FOX_HYP), 1).unwrap();
        assert_eq!(scores.recall, scores.precision);
        assert!((scores.f1 - scores.recall).abs() < 1e-12);
    }

    #[test]
    fn evaluate_pair_reproduces_worked_example() {
        let report = evaluate_pair(FOX_REF, FOX_HYP).unwrap();
        assert_eq!(report.wer, 1.0 / 9.0);
        assert!((report.bleu - 0.66).abs() <= 0.01);
        assert!((report.rouge1 - 0.89).abs() <= 0.01);
        assert_eq!(report.rouge2, 0.75);
        assert!((report.rouge_l - 0.89).abs() <= 0.01);
        assert_eq!(report.counts.substitutions, 1);
    }

    #[test]
    fn evaluate_pair_on_identical_text_is_all_perfect() {
        let report = evaluate_pair("a", "a").unwrap();
        assert_eq!(report.wer, 0.0);
        assert_eq!(report.bleu, 1.0);
        assert_eq!(report.rouge1, 1.0);
        assert_eq!(report.rouge_l, 1.0);
    }

    #[test]
    fn evaluate_pair_rejects_empty_reference() {
        assert_eq!(
            evaluate_pair("...", "words").unwrap_err(),
            MetricsError::EmptyReference
        );
    }

    #[test]
    fn metric_report_serializes_flat() {
        let report = evaluate_pair(FOX_REF, FOX_HYP).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["s"], 1);
        assert_eq!(json["d"], 0);
        assert_eq!(json["i"], 0);
        assert_eq!(json["n"], 9);
        assert!(json["rougeL"].is_number());
        assert!(json.get("counts").is_none());
        let back: MetricReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }

    fn naive_edit_distance(a: &[&str], b: &[&str]) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        let sub = naive_edit_distance(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
        let del = naive_edit_distance(&a[1..], b) + 1;
        let ins = naive_edit_distance(a, &b[1..]) + 1;
        sub.min(del).min(ins)
    }

    proptest! {
        #[test]
        fn alignment_counts_identities_hold(
            ref_words in prop::collection::vec("[a-d]", 0..16),
            hyp_words in prop::collection::vec("[a-d]", 0..16),
        ) {
            let (counts, path) = align_slices(&ref_words, &hyp_words);
            prop_assert_eq!(counts.matches + counts.substitutions + counts.deletions, ref_words.len());
            prop_assert_eq!(counts.matches + counts.substitutions + counts.insertions, hyp_words.len());
            prop_assert_eq!(path.ops.len(), counts.matches + counts.substitutions + counts.deletions + counts.insertions);
        }

        #[test]
        fn alignment_matches_exhaustive_recursion(
            ref_words in prop::collection::vec("[a-c]", 0..7),
            hyp_words in prop::collection::vec("[a-c]", 0..7),
        ) {
            let (counts, _) = align_slices(&ref_words, &hyp_words);
            let refs: Vec<&str> = ref_words.iter().map(String::as_str).collect();
            let hyps: Vec<&str> = hyp_words.iter().map(String::as_str).collect();
            prop_assert_eq!(counts.errors(), naive_edit_distance(&refs, &hyps));
        }

        #[test]
        fn single_substitution_wer_is_one_over_n(
            words in prop::collection::vec("[a-f]{2,5}", 1..12),
            position in 0usize..12,
        ) {
            let position = position % words.len();
            let mut mutated = words.clone();
            mutated[position] = format!("{}zz", mutated[position]);
            let reference = wer_stream(&words.join(" "));
            let hypothesis = wer_stream(&mutated.join(" "));
            prop_assert_eq!(wer(&reference, &hypothesis).unwrap(), 1.0 / words.len() as f64);
        }

        #[test]
        fn scores_stay_in_range(
            ref_text in "[a-d ]{1,30}",
            hyp_text in "[a-d ]{0,30}",
        ) {
            let reference = wer_stream(&ref_text);
            let hypothesis = wer_stream(&hyp_text);
            prop_assume!(!reference.is_empty());
            let b = bleu(&reference, &hypothesis, 4);
            prop_assert!((0.0..=1.0).contains(&b));
            let r1 = rouge_n(&reference, &hypothesis, 1).unwrap();
            prop_assert!((0.0..=1.0).contains(&r1));
            let rl = rouge_l(&reference, &hypothesis);
            prop_assert!((0.0..=1.0).contains(&rl));
            let w = wer(&reference, &hypothesis).unwrap();
            let bound = (reference.len() + hypothesis.len()) as f64 / reference.len() as f64;
            prop_assert!(w >= 0.0 && w <= bound);
        }
    }
}
