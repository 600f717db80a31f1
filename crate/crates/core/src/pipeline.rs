//! In-memory composition of the full pipeline: percentiles, scoring,
//! grading, best-k selection, and the comparison report.

use std::collections::BTreeMap;

use crate::corpus::{corpus_summary, Corpus, CorpusSummary};
use crate::error::{Error, Result};
use crate::eval::{evaluation_report, EvaluationReport};
use crate::grading::{grade_corpus, GradeTable, Indicator, ReferenceDistributions};
use crate::indicator::{score_corpus, PanelSet, ScoreTable};
use crate::percentile::{PercentileEngine, PercentileTable};
use crate::selection::{select_best_k, SelectionSet};

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Census labels designated short and long; default first and last.
    pub short_census: Option<String>,
    pub long_census: Option<String>,
    /// Best-k selection size.
    pub k: u32,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            short_census: None,
            long_census: None,
            k: 2,
        }
    }
}

pub struct PipelineRun {
    pub summary: CorpusSummary,
    pub percentiles_short: PercentileTable,
    pub percentiles_long: PercentileTable,
    pub scores: ScoreTable,
    pub grades: GradeTable,
    pub selections: BTreeMap<Indicator, SelectionSet>,
    pub report: EvaluationReport,
}

/// Resolves the short/long census labels against the corpus ordering.
pub fn resolve_censuses(
    corpus: &Corpus,
    short: Option<&str>,
    long: Option<&str>,
) -> Result<(String, String)> {
    let labels = corpus.census_labels();
    let short = short.map_or_else(|| labels[0].clone(), str::to_string);
    let long = long.map_or_else(|| labels[labels.len() - 1].clone(), str::to_string);
    let si = corpus.census_index(&short)?;
    let li = corpus.census_index(&long)?;
    if si >= li {
        return Err(Error::InvalidCorpus(format!(
            "short census '{short}' must precede long census '{long}' in corpus order"
        )));
    }
    Ok((short, long))
}

/// Runs every stage over an in-memory corpus.
pub fn run_pipeline(
    corpus: &Corpus,
    panels: &PanelSet,
    options: &PipelineOptions,
) -> Result<PipelineRun> {
    let (short, long) = resolve_censuses(
        corpus,
        options.short_census.as_deref(),
        options.long_census.as_deref(),
    )?;
    let engine = PercentileEngine::new(corpus);
    let percentiles_short = engine.percentile_table(&short)?;
    let percentiles_long = engine.percentile_table(&long)?;
    let scores = score_corpus(corpus, &percentiles_short, &percentiles_long, panels)?;
    let refdist = ReferenceDistributions::build(corpus, &engine, &scores, panels)?;
    let grades = grade_corpus(corpus, &scores, &refdist, panels, &Indicator::ALL)?;
    let mut selections = BTreeMap::new();
    for indicator in Indicator::ALL {
        selections.insert(indicator, select_best_k(corpus, &scores, indicator, options.k)?);
    }
    let report = evaluation_report(corpus, &scores, &grades, &selections)?;
    Ok(PipelineRun {
        summary: corpus_summary(corpus),
        percentiles_short,
        percentiles_long,
        scores,
        grades,
        selections,
        report,
    })
}
