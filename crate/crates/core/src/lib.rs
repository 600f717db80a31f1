//! Scoring and evaluation engine for publication corpora graded by a linear
//! combination of citation and journal-metric percentiles.
//!
//! The crate covers the full pipeline: corpus ingestion, stratified mid-rank
//! percentiles, the combined C-J indicator with per-panel slopes, five-region
//! A-E grading, best-k selection per researcher, and a comparison harness
//! that measures how well short-window indicators predict a long-window
//! citation benchmark. A seeded synthetic generator provides desk-scale
//! corpora for experiments.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod grading;
pub mod indicator;
pub mod io;
pub mod percentile;
pub mod pipeline;
pub mod selection;
pub mod stats;
pub mod synth;

pub use corpus::{corpus_summary, ingest, ingest_files, Corpus, CorpusSummary, IngestOptions};
pub use error::{Error, Result};
pub use eval::{diff_stats, evaluation_report, grade_confusion, DiffStats, EvaluationReport};
pub use grading::{grade, Grade, GradeCutoffs, GradeTable, Indicator};
pub use indicator::{combined_score, score_corpus, PanelConfig, PanelSet, ScoreTable};
pub use percentile::{PercentileEngine, PercentileTable};
pub use selection::{intersection_ratio, select_best_k, SelectionSet};
pub use synth::{generate, replication_experiment, GenModel};
