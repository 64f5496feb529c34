//! Dataset loading, batch correction with caching, and corpus-level
//! aggregation.
//!
//! Both aggregation modes are always computed, because published corpus
//! numbers rarely say which one they used: `micro` pools the underlying
//! counts across videos (error counts for WER, clipped n-gram counts for
//! BLEU, overlap counts for ROUGE), while `macro` is the unweighted mean of
//! per-video scores. The two coincide when every reference has the same
//! length. A third interpretation, scoring the whole corpus as one
//! concatenated string, is not built.

mod cache;
mod report;

pub use cache::{CacheError, CorrectionCache};
pub use report::{render_report, ReportFormat};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corrector::{
    build_prompt, check_constraints, correct, prompt_hash, BackendConfig, CompletionBackend,
    CorrectorError, PromptTemplate,
};
use crate::metrics::{
    bleu_from_stats, evaluate_pair_detailed, BleuStats, MetricPolicies, MetricReport,
    MetricsError, OverlapStats, DEFAULT_BLEU_ORDER,
};
use crate::parallel::try_map_ordered;

/// System label used for uncorrected ASR captions.
pub const BASELINE_LABEL: &str = "Youtube-ASR-Caption";

/// One dataset row: a video's ASR caption and its manual transcription.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub video_id: u64,
    pub url: String,
    pub youtube_caption: String,
    pub ground_truth_caption: String,
    pub domain: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("duplicate video id {0}")]
    DuplicateVideoId(u64),
    #[error("row {row}: empty {column:?} field")]
    EmptyCaptionField { row: usize, column: String },
    #[error("row {row}: invalid video id {value:?}")]
    InvalidVideoId { row: usize, value: String },
    #[error("CSV error: {0}")]
    Csv(String),
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("no cached correction for video ids {}", format_ids(.0))]
    MissingCorrections(Vec<u64>),
    #[error("video {video_id}: {source}")]
    Metrics {
        video_id: u64,
        source: MetricsError,
    },
    #[error("video {video_id}: {source}")]
    Backend {
        video_id: u64,
        source: CorrectorError,
    },
    #[error(transparent)]
    Cache(#[from] CacheError),
}

fn format_ids(ids: &[u64]) -> String {
    ids.iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

const COLUMNS: [(&str, &str); 5] = [
    ("videoid", "VideoID"),
    ("url", "URL"),
    ("youtubecaption", "Youtube_Caption"),
    ("groundtruthcaption", "Ground Truth_Caption"),
    ("domain", "Domain"),
];

fn canonical(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Load dataset records from CSV (RFC 4180, header row required, column
/// order insensitive) or JSONL with matching field names. Unknown extra
/// columns are ignored with a warning.
pub fn load_dataset(data: &[u8], format: DatasetFormat) -> Result<Vec<DatasetRecord>, DatasetError> {
    let records = match format {
        DatasetFormat::Csv => load_csv(data)?,
        DatasetFormat::Jsonl => load_jsonl(data)?,
    };
    let mut seen = std::collections::HashSet::new();
    for record in &records {
        if !seen.insert(record.video_id) {
            return Err(DatasetError::DuplicateVideoId(record.video_id));
        }
    }
    Ok(records)
}

fn load_csv(data: &[u8]) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(data);
    let headers = reader
        .headers()
        .map_err(|err| DatasetError::Csv(err.to_string()))?
        .clone();

    let mut indices = [usize::MAX; 5];
    for (pos, header) in headers.iter().enumerate() {
        let canon = canonical(header);
        match COLUMNS.iter().position(|(key, _)| *key == canon) {
            Some(slot) => indices[slot] = pos,
            None => log::warn!("ignoring unknown dataset column {header:?}"),
        }
    }
    for (slot, (_, display)) in COLUMNS.iter().enumerate() {
        if indices[slot] == usize::MAX {
            return Err(DatasetError::MissingColumn(display.to_string()));
        }
    }

    let mut records = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let row = row.map_err(|err| DatasetError::Csv(err.to_string()))?;
        let field = |slot: usize| row.get(indices[slot]).unwrap_or("").trim().to_string();
        records.push(build_record(
            row_idx + 1,
            field(0),
            field(1),
            field(2),
            field(3),
            field(4),
        )?);
    }
    Ok(records)
}

fn load_jsonl(data: &[u8]) -> Result<Vec<DatasetRecord>, DatasetError> {
    let text = std::str::from_utf8(data).map_err(|err| DatasetError::Json {
        line: 0,
        message: err.to_string(),
    })?;
    let mut records = Vec::new();
    let mut row_idx = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        row_idx += 1;
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|err| DatasetError::Json {
                line: lineno + 1,
                message: err.to_string(),
            })?;
        let object = value.as_object().ok_or_else(|| DatasetError::Json {
            line: lineno + 1,
            message: "expected a JSON object".to_string(),
        })?;

        let mut fields: [Option<String>; 5] = Default::default();
        for (key, value) in object {
            let canon = canonical(key);
            match COLUMNS.iter().position(|(k, _)| *k == canon) {
                Some(slot) => {
                    let text = match value {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    fields[slot] = Some(text);
                }
                None => log::warn!("ignoring unknown dataset field {key:?}"),
            }
        }
        for (slot, (_, display)) in COLUMNS.iter().enumerate() {
            if fields[slot].is_none() {
                return Err(DatasetError::MissingColumn(display.to_string()));
            }
        }
        let [video_id, url, caption, ground_truth, domain] =
            fields.map(|f| f.expect("checked above").trim().to_string());
        records.push(build_record(
            row_idx,
            video_id,
            url,
            caption,
            ground_truth,
            domain,
        )?);
    }
    Ok(records)
}

fn build_record(
    row: usize,
    video_id: String,
    url: String,
    youtube_caption: String,
    ground_truth_caption: String,
    domain: String,
) -> Result<DatasetRecord, DatasetError> {
    let video_id = video_id
        .parse()
        .map_err(|_| DatasetError::InvalidVideoId {
            row,
            value: video_id.clone(),
        })?;
    if youtube_caption.is_empty() {
        return Err(DatasetError::EmptyCaptionField {
            row,
            column: "Youtube_Caption".to_string(),
        });
    }
    if ground_truth_caption.is_empty() {
        return Err(DatasetError::EmptyCaptionField {
            row,
            column: "Ground Truth_Caption".to_string(),
        });
    }
    Ok(DatasetRecord {
        video_id,
        url,
        youtube_caption,
        ground_truth_caption,
        domain,
    })
}

/// Where hypothesis captions come from when scoring a corpus.
pub enum HypothesisSource<'a> {
    /// Score the raw ASR captions.
    YoutubeCaption,
    /// Score previously cached corrections; every record must have a cache
    /// entry.
    CachedCorrection {
        cache: &'a CorrectionCache,
        backend_id: &'a str,
        model_name: &'a str,
        template: &'a PromptTemplate,
    },
}

/// Per-video scores plus corpus aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoScore {
    pub video_id: u64,
    pub domain: String,
    pub metrics: MetricReport,
}

/// Mean of per-video metric values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub wer: f64,
    pub bleu: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
}

/// Constraint diagnostics aggregated over a correction run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintStats {
    pub sequence_violations: usize,
    pub sync_risks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub system_label: String,
    pub per_video: Vec<VideoScore>,
    /// Aggregate over pooled counts; its WER equals pooled (S+D+I)/N.
    pub micro: MetricReport,
    /// Unweighted mean of per-video metrics.
    #[serde(rename = "macro")]
    pub macro_avg: MetricSummary,
    /// Macro aggregates per domain; records with an empty domain are left
    /// out.
    pub per_domain: BTreeMap<String, MetricSummary>,
    /// Present only for correction runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintStats>,
}

/// Score a corpus of records against ground truth.
pub fn evaluate_corpus(
    records: &[DatasetRecord],
    source: HypothesisSource<'_>,
) -> Result<CorpusReport, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let (label, hypotheses) = match source {
        HypothesisSource::YoutubeCaption => (
            BASELINE_LABEL.to_string(),
            records
                .iter()
                .map(|r| r.youtube_caption.clone())
                .collect::<Vec<_>>(),
        ),
        HypothesisSource::CachedCorrection {
            cache,
            backend_id,
            model_name,
            template,
        } => {
            let mut hypotheses = Vec::with_capacity(records.len());
            let mut missing = Vec::new();
            for record in records {
                let prompt = build_prompt(&record.youtube_caption, template).map_err(|source| {
                    CorpusError::Backend {
                        video_id: record.video_id,
                        source,
                    }
                })?;
                match cache.get(backend_id, model_name, &prompt_hash(&prompt)) {
                    Some(corrected) => hypotheses.push(corrected),
                    None => missing.push(record.video_id),
                }
            }
            if !missing.is_empty() {
                return Err(CorpusError::MissingCorrections(missing));
            }
            (backend_id.to_string(), hypotheses)
        }
    };
    build_report(records, &hypotheses, label, None)
}

/// Correct every record through the backend (cache read-through, progress
/// persisted per entry) and score the corrections against ground truth.
pub fn run_benchmark(
    records: &[DatasetRecord],
    backend: &dyn CompletionBackend,
    config: &BackendConfig,
    template: &PromptTemplate,
    cache: &CorrectionCache,
    sync_threshold: f64,
) -> Result<CorpusReport, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }

    let outcomes = try_map_ordered(records, |record| -> Result<_, CorpusError> {
        let prompt =
            build_prompt(&record.youtube_caption, template).map_err(|source| CorpusError::Backend {
                video_id: record.video_id,
                source,
            })?;
        let hash = prompt_hash(&prompt);
        if let Some(corrected) = cache.get(backend.id(), &config.model_name, &hash) {
            let diagnostics = check_constraints(&record.youtube_caption, &corrected, sync_threshold);
            return Ok((corrected, diagnostics));
        }
        let result = correct(&record.youtube_caption, backend, config, template, sync_threshold)
            .map_err(|source| CorpusError::Backend {
                video_id: record.video_id,
                source,
            })?;
        cache.insert(backend.id(), &config.model_name, &hash, &result.corrected)?;
        Ok((result.corrected, result.diagnostics))
    })?;

    let hypotheses: Vec<String> = outcomes.iter().map(|(text, _)| text.clone()).collect();
    let constraints = ConstraintStats {
        sequence_violations: outcomes
            .iter()
            .filter(|(_, d)| d.sequence_violation)
            .count(),
        sync_risks: outcomes.iter().filter(|(_, d)| d.sync_risk).count(),
    };
    build_report(
        records,
        &hypotheses,
        backend.id().to_string(),
        Some(constraints),
    )
}

fn build_report(
    records: &[DatasetRecord],
    hypotheses: &[String],
    system_label: String,
    constraints: Option<ConstraintStats>,
) -> Result<CorpusReport, CorpusError> {
    debug_assert_eq!(records.len(), hypotheses.len());
    let policies = MetricPolicies::default();
    let pairs: Vec<(&DatasetRecord, &str)> = records
        .iter()
        .zip(hypotheses.iter().map(String::as_str))
        .collect();
    let evaluations = try_map_ordered(&pairs, |&(record, hypothesis)| {
        evaluate_pair_detailed(&record.ground_truth_caption, hypothesis, &policies).map_err(
            |source| CorpusError::Metrics {
                video_id: record.video_id,
                source,
            },
        )
    })?;

    let per_video: Vec<VideoScore> = records
        .iter()
        .zip(&evaluations)
        .map(|(record, evaluation)| VideoScore {
            video_id: record.video_id,
            domain: record.domain.clone(),
            metrics: evaluation.report.clone(),
        })
        .collect();

    // Micro: pool the counts behind every metric, then rescore.
    let mut counts = crate::metrics::AlignmentCounts::default();
    let mut bleu = BleuStats::zero(DEFAULT_BLEU_ORDER);
    let mut rouge1 = OverlapStats::default();
    let mut rouge2 = OverlapStats::default();
    let mut rouge_l = OverlapStats::default();
    for evaluation in &evaluations {
        counts.pool(&evaluation.report.counts);
        bleu.pool(&evaluation.bleu);
        rouge1.pool(&evaluation.rouge1);
        rouge2.pool(&evaluation.rouge2);
        rouge_l.pool(&evaluation.rouge_l);
    }
    let micro = MetricReport {
        wer: counts.errors() as f64 / counts.ref_len as f64,
        bleu: bleu_from_stats(&bleu),
        rouge1: rouge1.recall(),
        rouge2: rouge2.recall(),
        rouge_l: rouge_l.recall(),
        counts,
    };

    let macro_avg = summarize(per_video.iter().map(|v| &v.metrics));

    let mut domains: BTreeMap<String, Vec<&MetricReport>> = BTreeMap::new();
    for video in &per_video {
        if !video.domain.is_empty() {
            domains
                .entry(video.domain.clone())
                .or_default()
                .push(&video.metrics);
        }
    }
    let per_domain = domains
        .into_iter()
        .map(|(domain, reports)| (domain, summarize(reports.into_iter())))
        .collect();

    Ok(CorpusReport {
        system_label,
        per_video,
        micro,
        macro_avg,
        per_domain,
        constraints,
    })
}

fn summarize<'a>(reports: impl Iterator<Item = &'a MetricReport>) -> MetricSummary {
    let mut summary = MetricSummary {
        wer: 0.0,
        bleu: 0.0,
        rouge1: 0.0,
        rouge2: 0.0,
        rouge_l: 0.0,
    };
    let mut count = 0usize;
    for report in reports {
        summary.wer += report.wer;
        summary.bleu += report.bleu;
        summary.rouge1 += report.rouge1;
        summary.rouge2 += report.rouge2;
        summary.rouge_l += report.rouge_l;
        count += 1;
    }
    if count > 0 {
        let n = count as f64;
        summary.wer /= n;
        summary.bleu /= n;
        summary.rouge1 /= n;
        summary.rouge2 /= n;
        summary.rouge_l /= n;
    }
    summary
}
