//! Caption correction and evaluation toolkit.
//!
//! The crate ingests ASR-generated subtitle files (SRT, WebVTT, YouTube
//! transcript JSON), sends the flattened caption text through a pluggable
//! completion backend for correction, re-synchronizes the corrected text onto
//! the original cue timings, and scores hypothesis captions against ground
//! truth with WER, BLEU and ROUGE.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`subtitle`]: timed-cue model, format parsers and the SRT serializer
//! - [`tokenize`]: per-metric tokenization policies and n-gram bags
//! - [`metrics`]: edit-distance alignment, WER, BLEU, ROUGE-1/2/L
//! - [`corrector`]: prompt construction, completion backends, constraint checks
//! - [`resync`]: mapping corrected text back onto original cue timings
//! - [`corpus`]: dataset loading, batch runs with caching, report rendering
//!
//! Per-record corpus work runs on a rayon pool when the default `parallel`
//! feature is enabled; without it every code path is sequential.

pub mod corpus;
pub mod corrector;
pub mod metrics;
pub mod parallel;
pub mod resync;
pub mod subtitle;
pub mod tokenize;

pub use metrics::{evaluate_pair, MetricReport};
pub use subtitle::{Cue, Transcript};
