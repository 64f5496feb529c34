//! Command-line front end: subtitle conversion, pairwise evaluation,
//! caption correction and corpus benchmarking.
//!
//! Exit codes are stable: 0 success, 2 input/parse error, 3 backend error,
//! 4 strict constraint violation. Machine output goes to stdout,
//! diagnostics to stderr.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use capfix_core::corpus::{
    evaluate_corpus, load_dataset, render_report, run_benchmark, CorpusError, CorrectionCache,
    DatasetFormat, HypothesisSource, ReportFormat,
};
use capfix_core::corrector::{
    correct, BackendConfig, CompletionBackend, CorrectionResult, CorrectorError, CountingBackend,
    HttpBackend, MockBackend, PromptTemplate, DEFAULT_SYNC_THRESHOLD,
};
use capfix_core::metrics::{evaluate_pair_detailed, MetricPolicies, MetricReport, MetricsError};
use capfix_core::parallel::with_worker_count;
use capfix_core::subtitle::{
    parse_srt, parse_vtt, parse_youtube_json, serialize_srt, SubtitleError, Transcript,
};
use capfix_core::tokenize::{PunctuationHandling, TokenPolicy};

use config::FileConfig;

const EXIT_INPUT: u8 = 2;
const EXIT_BACKEND: u8 = 3;
const EXIT_CONSTRAINT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "capfix",
    version,
    about = "Correct ASR captions through a completion backend and score them with WER, BLEU and ROUGE"
)]
struct Cli {
    /// Enable debug logging on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    /// Flat key-value config file mirroring long flag names; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between subtitle formats or flatten to plain text.
    Convert(ConvertArgs),
    /// Score a hypothesis caption against a reference.
    Eval(EvalArgs),
    /// Correct one caption, optionally resynchronizing onto cue timings.
    Correct(CorrectArgs),
    /// Run correction and scoring over a whole dataset.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InFormat {
    Srt,
    Vtt,
    Ytjson,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Srt,
    Txt,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input subtitle file.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_enum)]
    in_format: InFormat,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    out_format: OutFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PunctArg {
    /// Keep punctuation attached to words.
    Attached,
    /// Peel edge punctuation into standalone tokens.
    Separate,
    /// Strip punctuation entirely.
    Stripped,
}

impl PunctArg {
    fn apply(self, policy: &mut TokenPolicy) {
        policy.punctuation = match self {
            PunctArg::Attached => PunctuationHandling::Attached,
            PunctArg::Separate => PunctuationHandling::SeparateToken,
            PunctArg::Stripped => PunctuationHandling::Stripped,
        };
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Reference caption: literal text, or @path to read a file.
    #[arg(long = "ref", value_name = "TEXT|@PATH")]
    reference: String,
    /// Hypothesis caption: literal text, or @path to read a file.
    #[arg(long = "hyp", value_name = "TEXT|@PATH")]
    hypothesis: String,
    /// Override the punctuation handling of the WER tokenization policy.
    #[arg(long, value_enum)]
    wer_policy: Option<PunctArg>,
    /// Override the punctuation handling of the BLEU tokenization policy.
    #[arg(long, value_enum)]
    bleu_policy: Option<PunctArg>,
    /// Override the punctuation handling of the ROUGE tokenization policy.
    #[arg(long, value_enum)]
    rouge_policy: Option<PunctArg>,
    /// Emit the report as JSON instead of the human table.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Mock,
    Http,
}

#[derive(Args)]
struct BackendArgs {
    /// Completion backend to use.
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// JSON file of exact-substring replacement rules for the mock backend.
    #[arg(long, value_name = "PATH")]
    mock_rules: Option<PathBuf>,
    /// Chat-completion endpoint URL (http backend).
    #[arg(long, value_name = "URL")]
    endpoint: Option<String>,
    /// Model name sent in requests.
    #[arg(long, value_name = "NAME")]
    model: Option<String>,
    /// Environment variable holding the API key, sent as a bearer token.
    #[arg(long, value_name = "NAME")]
    api_key_env: Option<String>,
    /// Sampling temperature.
    #[arg(long, value_name = "T")]
    temperature: Option<f64>,
    /// Retries after the first attempt on transient failures.
    #[arg(long, value_name = "N")]
    max_retries: Option<u32>,
    /// Per-request timeout in milliseconds.
    #[arg(long, value_name = "MS")]
    timeout_ms: Option<u64>,
    /// Length-drift fraction beyond which sync risk is flagged.
    #[arg(long, value_name = "RATIO")]
    sync_threshold: Option<f64>,
}

#[derive(Args)]
struct CorrectArgs {
    /// Caption to correct: literal text, or @path to read a file. Not needed
    /// with --resync, where the timed transcript supplies the text.
    #[arg(long = "in", value_name = "TEXT|@PATH")]
    input: Option<String>,
    #[command(flatten)]
    backend: BackendArgs,
    /// Exit with status 4 when the correction violates the word-sequence
    /// constraint.
    #[arg(long)]
    strict_sequence: bool,
    /// Re-synchronize the corrected text onto the cue timings of the
    /// transcript given by --timed-in and emit SRT.
    #[arg(long)]
    resync: bool,
    /// Timed transcript whose cue boundaries are preserved.
    #[arg(long, value_name = "PATH", requires = "resync")]
    timed_in: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "srt")]
    timed_format: InFormat,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Md,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DatasetFormatArg {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset file (CSV or JSONL with the five schema columns).
    #[arg(long, value_name = "PATH")]
    dataset: PathBuf,
    /// Dataset format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    dataset_format: Option<DatasetFormatArg>,
    #[command(flatten)]
    backend: BackendArgs,
    /// Correction cache JSONL file; in-memory when omitted.
    #[arg(long, value_name = "PATH")]
    cache: Option<PathBuf>,
    /// Report output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Skip correction and score the raw ASR captions.
    #[arg(long)]
    baseline_only: bool,
    /// Worker thread cap for per-record evaluation and backend calls.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn backend(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_BACKEND,
            message: message.into(),
        }
    }
}

impl From<SubtitleError> for CliError {
    fn from(err: SubtitleError) -> Self {
        CliError::input(err.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(err: MetricsError) -> Self {
        CliError::input(err.to_string())
    }
}

impl From<CorrectorError> for CliError {
    fn from(err: CorrectorError) -> Self {
        match err {
            CorrectorError::BackendUnavailable(_)
            | CorrectorError::BackendRefusal(_)
            | CorrectorError::Timeout(_) => CliError::backend(err.to_string()),
            _ => CliError::input(err.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(err: CorpusError) -> Self {
        match err {
            CorpusError::MissingCorrections(_) | CorpusError::Backend { .. } => {
                CliError::backend(err.to_string())
            }
            _ => CliError::input(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.verbose {
        "debug"
    } else {
        "warn"
    }))
    .init();

    let file_config = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(config) => config,
            Err(message) => {
                eprintln!("error: {message}");
                return ExitCode::from(EXIT_INPUT);
            }
        },
        None => FileConfig::default(),
    };

    let result = match cli.command {
        Command::Convert(args) => cmd_convert(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Correct(args) => cmd_correct(args, &file_config),
        Command::Bench(args) => cmd_bench(args, &file_config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

/// Resolve a literal-or-path argument: `@path` reads the file, anything
/// else is taken verbatim.
fn resolve_input(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|err| CliError::input(format!("cannot read {path}: {err}"))),
        None => Ok(arg.to_string()),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|err| CliError::input(format!("cannot read {}: {err}", path.display())))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|err| CliError::input(format!("cannot write {}: {err}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|()| stdout.flush())
                .map_err(|err| CliError::input(format!("cannot write to stdout: {err}")))
        }
    }
}

fn parse_transcript(data: &[u8], format: InFormat) -> Result<Transcript, CliError> {
    let transcript = match format {
        InFormat::Srt => parse_srt(data)?,
        InFormat::Vtt => parse_vtt(data)?,
        InFormat::Ytjson => parse_youtube_json(data)?,
    };
    Ok(transcript)
}

fn cmd_convert(args: ConvertArgs) -> Result<(), CliError> {
    let data = read_file(&args.input)?;
    let transcript = parse_transcript(&data, args.in_format)?;
    let output = match args.out_format {
        OutFormat::Srt => serialize_srt(&transcript)?,
        OutFormat::Txt => {
            let mut text = transcript.flatten();
            text.push('\n');
            text.into_bytes()
        }
    };
    write_output(args.out.as_deref(), &output)
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let reference = resolve_input(&args.reference)?;
    let hypothesis = resolve_input(&args.hypothesis)?;
    let mut policies = MetricPolicies::default();
    if let Some(punct) = args.wer_policy {
        punct.apply(&mut policies.wer);
    }
    if let Some(punct) = args.bleu_policy {
        punct.apply(&mut policies.bleu);
    }
    if let Some(punct) = args.rouge_policy {
        punct.apply(&mut policies.rouge);
    }
    let report = evaluate_pair_detailed(&reference, &hypothesis, &policies)?.report;
    let output = if args.json {
        let mut json = serde_json::to_string_pretty(&report)
            .expect("metric report serialization cannot fail");
        json.push('\n');
        json
    } else {
        format_metric_report(&report)
    };
    write_output(None, output.as_bytes())
}

fn format_metric_report(report: &MetricReport) -> String {
    format!(
        "WER      {:.2}%  (S={} D={} I={} N={})\nBLEU     {:.2}\nROUGE-1  {:.2}\nROUGE-2  {:.2}\nROUGE-L  {:.2}\n",
        report.wer * 100.0,
        report.counts.substitutions,
        report.counts.deletions,
        report.counts.insertions,
        report.counts.ref_len,
        report.bleu,
        report.rouge1,
        report.rouge2,
        report.rouge_l,
    )
}

/// Backend settings merged from flags, then the config file, then defaults.
struct ResolvedBackend {
    backend: CountingBackend<Box<dyn CompletionBackend>>,
    config: BackendConfig,
    sync_threshold: f64,
}

fn resolve_backend(args: &BackendArgs, file: &FileConfig) -> Result<ResolvedBackend, CliError> {
    let kind = match args.backend {
        Some(kind) => kind,
        None => match file.get_str("backend").as_deref() {
            Some("mock") => BackendKind::Mock,
            Some("http") => BackendKind::Http,
            Some(other) => {
                return Err(CliError::input(format!(
                    "config key \"backend\" must be mock or http, got {other:?}"
                )))
            }
            None => BackendKind::Mock,
        },
    };
    let mock_rules = args
        .mock_rules
        .clone()
        .or_else(|| file.get_str("mock-rules").map(PathBuf::from));
    let endpoint = args.endpoint.clone().or_else(|| file.get_str("endpoint"));
    let model = args.model.clone().or_else(|| file.get_str("model"));
    let api_key_env = args
        .api_key_env
        .clone()
        .or_else(|| file.get_str("api-key-env"));
    let temperature = merge(args.temperature, file, "temperature")?;
    let max_retries = merge(args.max_retries, file, "max-retries")?;
    let timeout_ms = merge(args.timeout_ms, file, "timeout-ms")?;
    let sync_threshold =
        merge(args.sync_threshold, file, "sync-threshold")?.unwrap_or(DEFAULT_SYNC_THRESHOLD);

    let mut config = match kind {
        BackendKind::Mock => BackendConfig::mock(),
        BackendKind::Http => {
            let endpoint = endpoint.ok_or_else(|| {
                CliError::input("the http backend requires --endpoint (or `endpoint` in the config file)")
            })?;
            let model = model.clone().ok_or_else(|| {
                CliError::input("the http backend requires --model (or `model` in the config file)")
            })?;
            BackendConfig::http(endpoint, model)
        }
    };
    if let Some(model) = model {
        config.model_name = model;
    }
    if let Some(temperature) = temperature {
        config.temperature = temperature;
    }
    if let Some(max_retries) = max_retries {
        config.max_retries = max_retries;
    }
    if let Some(timeout_ms) = timeout_ms {
        config.timeout_ms = timeout_ms;
    }
    config.api_key_env = api_key_env;

    let backend: Box<dyn CompletionBackend> = match kind {
        BackendKind::Mock => match &mock_rules {
            Some(path) => Box::new(MockBackend::from_rules_file(path).map_err(|err| {
                CliError::input(format!("cannot load mock rules {}: {err}", path.display()))
            })?),
            None => Box::new(MockBackend::identity()),
        },
        BackendKind::Http => Box::new(HttpBackend::from_config(&config)?),
    };
    Ok(ResolvedBackend {
        backend: CountingBackend::new(backend),
        config,
        sync_threshold,
    })
}

fn merge<T: std::str::FromStr>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
) -> Result<Option<T>, CliError> {
    match flag {
        Some(value) => Ok(Some(value)),
        None => file.get(key).map_err(CliError::input),
    }
}

fn cmd_correct(args: CorrectArgs, file: &FileConfig) -> Result<(), CliError> {
    let resolved = resolve_backend(&args.backend, file)?;
    let template = PromptTemplate::default();

    let timed = match (&args.resync, &args.timed_in) {
        (true, Some(path)) => Some(parse_transcript(&read_file(path)?, args.timed_format)?),
        (true, None) => return Err(CliError::input("--resync requires --timed-in")),
        (false, _) => None,
    };
    let caption = match (&timed, &args.input) {
        (Some(transcript), _) => transcript.flatten(),
        (None, Some(input)) => resolve_input(input)?,
        (None, None) => return Err(CliError::input("--in is required without --resync")),
    };

    let result = correct(
        &caption,
        &resolved.backend,
        &resolved.config,
        &template,
        resolved.sync_threshold,
    )?;
    print_diagnostics(&result);

    let output = match &timed {
        Some(transcript) => {
            let resynced = capfix_core::resync::realign(transcript, &result.corrected)
                .map_err(|err| CliError::input(err.to_string()))?;
            serialize_srt(&resynced)?
        }
        None => {
            let mut text = result.corrected.clone();
            text.push('\n');
            text.into_bytes()
        }
    };
    write_output(args.out.as_deref(), &output)?;

    if args.strict_sequence && result.diagnostics.sequence_violation {
        return Err(CliError {
            code: EXIT_CONSTRAINT,
            message: "word-sequence constraint violated (alignment contains insertions or deletions)"
                .to_string(),
        });
    }
    Ok(())
}

fn print_diagnostics(result: &CorrectionResult) {
    let d = &result.diagnostics;
    eprintln!("backend: {}", result.backend_id);
    eprintln!("prompt hash: {}", result.prompt_hash);
    eprintln!("latency: {} ms", result.latency_ms);
    eprintln!("length ratio: {:.3}", d.length_ratio);
    eprintln!(
        "alignment: S={} D={} I={} N={}",
        d.alignment_counts.substitutions,
        d.alignment_counts.deletions,
        d.alignment_counts.insertions,
        d.alignment_counts.ref_len,
    );
    eprintln!("sequence violation: {}", d.sequence_violation);
    eprintln!("sync risk: {}", d.sync_risk);
}

fn cmd_bench(args: BenchArgs, file: &FileConfig) -> Result<(), CliError> {
    let data = read_file(&args.dataset)?;
    let format = match args
        .dataset_format
        .or(match file.get_str("dataset-format").as_deref() {
            Some("csv") => Some(DatasetFormatArg::Csv),
            Some("jsonl") => Some(DatasetFormatArg::Jsonl),
            _ => None,
        }) {
        Some(DatasetFormatArg::Csv) => DatasetFormat::Csv,
        Some(DatasetFormatArg::Jsonl) => DatasetFormat::Jsonl,
        None => infer_dataset_format(&args.dataset),
    };
    let records = load_dataset(&data, format).map_err(|err| CliError::input(err.to_string()))?;

    let report_format = match args.format.or(match file.get_str("format").as_deref() {
        Some("text") => Some(FormatArg::Text),
        Some("md") => Some(FormatArg::Md),
        Some("json") => Some(FormatArg::Json),
        _ => None,
    }) {
        Some(FormatArg::Text) | None => ReportFormat::Text,
        Some(FormatArg::Md) => ReportFormat::Markdown,
        Some(FormatArg::Json) => ReportFormat::Json,
    };
    let jobs = merge(args.jobs, file, "jobs")?;

    let report = if args.baseline_only {
        with_worker_count(jobs, || {
            evaluate_corpus(&records, HypothesisSource::YoutubeCaption)
        })?
    } else {
        let resolved = resolve_backend(&args.backend, file)?;
        let cache_path = args
            .cache
            .clone()
            .or_else(|| file.get_str("cache").map(PathBuf::from));
        let cache = match &cache_path {
            Some(path) => CorrectionCache::open(path)
                .map_err(|err| CliError::input(err.to_string()))?,
            None => CorrectionCache::in_memory(),
        };
        let template = PromptTemplate::default();
        let report = with_worker_count(jobs, || {
            run_benchmark(
                &records,
                &resolved.backend,
                &resolved.config,
                &template,
                &cache,
                resolved.sync_threshold,
            )
        })?;
        eprintln!("backend calls: {}", resolved.backend.calls());
        report
    };

    write_output(args.report.as_deref(), &render_report(&report, report_format))
}

fn infer_dataset_format(path: &Path) -> DatasetFormat {
    match path.extension().and_then(|ext| ext.to_str()) {
        Some("jsonl") | Some("ndjson") | Some("json") => DatasetFormat::Jsonl,
        _ => DatasetFormat::Csv,
    }
}
