//! Stratified mid-rank percentiles for citation counts and journal metrics.
//!
//! A stratum is every value observed for one (year, subject category) pair,
//! reference corpus included. Percentiles are mid-rank (tied values share the
//! average of their positional percentiles), oriented 0 = worst, 100 = best,
//! with the target excluded from its own comparison set. Publications and
//! journals listed under several categories take the maximum across their
//! categories (most favorable). A stratum whose only member is the target
//! yields an explicit undefined-percentile error, never a silent default.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// A computed percentile together with the stratum that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileResult {
    /// pub_id or journal_id.
    pub id: String,
    /// In [0, 100].
    pub value: f64,
    pub year: i32,
    /// The most favorable subject category.
    pub subject_category: String,
    /// Census label for citation percentiles; `None` for journal metrics.
    pub census_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PercentileIssue {
    pub pub_id: String,
    pub census_label: String,
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentileRow {
    pub pub_id: String,
    pub c_percentile: f64,
    pub j_percentile: f64,
}

/// Batch percentiles for every assessed (non-reference-only) publication at
/// one census label. Undefined cases are collected, not fatal.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileTable {
    pub census_label: String,
    pub rows: Vec<PercentileRow>,
    pub issues: Vec<PercentileIssue>,
}

/// Mid-rank percentile of a value that is itself a member of the stratum.
/// `None` when the member has no peers (stratum of size <= 1).
pub(crate) fn midrank_member_u64(sorted: &[u64], value: u64) -> Option<f64> {
    let n = sorted.len();
    if n < 2 {
        return None;
    }
    let fewer = sorted.partition_point(|&x| x < value);
    let upto = sorted.partition_point(|&x| x <= value);
    debug_assert!(upto > fewer, "member value must be present in its stratum");
    let equal = upto - fewer - 1;
    Some(100.0 * (fewer as f64 + 0.5 * (equal as f64)) / ((n - 1) as f64))
}

pub(crate) fn midrank_member_f64(sorted: &[f64], value: f64) -> Option<f64> {
    let n = sorted.len();
    if n < 2 {
        return None;
    }
    let fewer = sorted.partition_point(|&x| x < value);
    let upto = sorted.partition_point(|&x| x <= value);
    debug_assert!(upto > fewer, "member value must be present in its stratum");
    let equal = upto - fewer - 1;
    Some(100.0 * (fewer as f64 + 0.5 * (equal as f64)) / ((n - 1) as f64))
}

/// Mid-rank percentile of an outside value against a stratum it does not
/// belong to. `None` for an empty stratum.
#[allow(dead_code)]
pub(crate) fn midrank_external_f64(sorted: &[f64], value: f64) -> Option<f64> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let fewer = sorted.partition_point(|&x| x < value);
    let upto = sorted.partition_point(|&x| x <= value);
    let equal = upto - fewer;
    Some(100.0 * (fewer as f64 + 0.5 * (equal as f64)) / (n as f64))
}

/// Shared strata index over a corpus. Build once, query many times; all
/// queries are read-only and thread-safe.
pub struct PercentileEngine<'a> {
    corpus: &'a Corpus,
    /// census label -> (year, category) -> sorted citation counts
    citation_strata: BTreeMap<String, BTreeMap<(i32, String), Vec<u64>>>,
    /// (year, category) -> sorted journal metric values
    journal_strata: BTreeMap<(i32, String), Vec<f64>>,
    /// (journal_id, year) -> (category, metric) entries
    journal_entries: BTreeMap<(String, i32), Vec<(String, f64)>>,
}

impl<'a> PercentileEngine<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        let mut citation_strata: BTreeMap<String, BTreeMap<(i32, String), Vec<u64>>> =
            BTreeMap::new();
        for (idx, label) in corpus.census_labels().iter().enumerate() {
            let strata = citation_strata.entry(label.clone()).or_default();
            for p in corpus.publications() {
                for cat in &p.subject_categories {
                    strata
                        .entry((p.year, cat.clone()))
                        .or_default()
                        .push(p.citations[idx]);
                }
            }
        }
        for strata in citation_strata.values_mut() {
            for values in strata.values_mut() {
                values.sort_unstable();
            }
        }

        let mut journal_strata: BTreeMap<(i32, String), Vec<f64>> = BTreeMap::new();
        let mut journal_entries: BTreeMap<(String, i32), Vec<(String, f64)>> = BTreeMap::new();
        for e in corpus.journal_metrics() {
            journal_strata
                .entry((e.year, e.subject_category.clone()))
                .or_default()
                .push(e.metric_value);
            journal_entries
                .entry((e.journal_id.clone(), e.year))
                .or_default()
                .push((e.subject_category.clone(), e.metric_value));
        }
        for values in journal_strata.values_mut() {
            values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
        }

        PercentileEngine {
            corpus,
            citation_strata,
            journal_strata,
            journal_entries,
        }
    }

    pub fn corpus(&self) -> &Corpus {
        self.corpus
    }

    /// Citation percentile of a publication at one census, taking the most
    /// favorable of its subject categories.
    pub fn citation_percentile(&self, pub_id: &str, census_label: &str) -> Result<PercentileResult> {
        let publication = self.corpus.publication(pub_id)?;
        let census_idx = self.corpus.census_index(census_label)?;
        let strata = &self.citation_strata[census_label];
        let value = publication.citations[census_idx];

        let mut best: Option<(f64, &str)> = None;
        for cat in &publication.subject_categories {
            let sorted = &strata[&(publication.year, cat.clone())];
            if let Some(pct) = midrank_member_u64(sorted, value) {
                if best.map_or(true, |(b, _)| pct > b) {
                    best = Some((pct, cat));
                }
            }
        }
        match best {
            Some((value, cat)) => Ok(PercentileResult {
                id: pub_id.to_string(),
                value,
                year: publication.year,
                subject_category: cat.to_string(),
                census_label: Some(census_label.to_string()),
            }),
            None => Err(Error::UndefinedPercentile {
                kind: "publication",
                id: pub_id.to_string(),
                detail: format!(
                    "every (year {}, category) stratum contains only this publication",
                    publication.year
                ),
            }),
        }
    }

    /// Journal metric percentile for one year, most favorable across the
    /// categories the journal is listed under that year.
    pub fn journal_percentile(&self, journal_id: &str, year: i32) -> Result<PercentileResult> {
        let Some(entries) = self.journal_entries.get(&(journal_id.to_string(), year)) else {
            let known = self
                .journal_entries
                .keys()
                .any(|(id, _)| id == journal_id);
            return Err(if known {
                Error::MissingJournalMetric {
                    journal_id: journal_id.to_string(),
                    year,
                }
            } else {
                Error::UnknownJournal(journal_id.to_string())
            });
        };

        let mut best: Option<(f64, &str)> = None;
        for (cat, value) in entries {
            let sorted = &self.journal_strata[&(year, cat.clone())];
            if let Some(pct) = midrank_member_f64(sorted, *value) {
                if best.map_or(true, |(b, _)| pct > b) {
                    best = Some((pct, cat));
                }
            }
        }
        match best {
            Some((value, cat)) => Ok(PercentileResult {
                id: journal_id.to_string(),
                value,
                year,
                subject_category: cat.to_string(),
                census_label: None,
            }),
            None => Err(Error::UndefinedPercentile {
                kind: "journal",
                id: journal_id.to_string(),
                detail: format!("alone in every (year {year}, category) stratum"),
            }),
        }
    }

    /// Batch (C, J) percentiles for every assessed publication. Strata are
    /// computed once and shared; undefined cases become issues. Rows are
    /// ordered by pub_id regardless of input order or parallelism.
    pub fn percentile_table(&self, census_label: &str) -> Result<PercentileTable> {
        self.corpus.census_index(census_label)?;
        let mut items: Vec<(String, std::result::Result<PercentileRow, PercentileIssue>)> = self
            .corpus
            .publications()
            .par_iter()
            .filter(|p| !p.reference_only)
            .map(|p| {
                let outcome = self
                    .citation_percentile(&p.pub_id, census_label)
                    .and_then(|c| {
                        let j = self.journal_percentile(&p.journal_id, p.year)?;
                        Ok(PercentileRow {
                            pub_id: p.pub_id.clone(),
                            c_percentile: c.value,
                            j_percentile: j.value,
                        })
                    })
                    .map_err(|e| PercentileIssue {
                        pub_id: p.pub_id.clone(),
                        census_label: census_label.to_string(),
                        code: e.code(),
                        message: e.to_string(),
                    });
                (p.pub_id.clone(), outcome)
            })
            .collect();
        items.sort_by(|a, b| a.0.cmp(&b.0));

        let mut rows = Vec::new();
        let mut issues = Vec::new();
        for (_, outcome) in items {
            match outcome {
                Ok(row) => rows.push(row),
                Err(issue) => issues.push(issue),
            }
        }
        Ok(PercentileTable {
            census_label: census_label.to_string(),
            rows,
            issues,
        })
    }

    /// Per-publication percentiles for the whole corpus, reference
    /// publications included. Used to build world reference distributions
    /// for grading. `None` marks undefined values.
    pub fn full_percentiles(&self, census_label: &str) -> Result<Vec<FullPercentileRow>> {
        self.corpus.census_index(census_label)?;
        Ok(self
            .corpus
            .publications()
            .par_iter()
            .enumerate()
            .map(|(idx, p)| FullPercentileRow {
                pub_index: idx,
                c_percentile: self
                    .citation_percentile(&p.pub_id, census_label)
                    .ok()
                    .map(|r| r.value),
                j_percentile: self
                    .journal_percentile(&p.journal_id, p.year)
                    .ok()
                    .map(|r| r.value),
            })
            .collect())
    }
}

/// Percentiles of one publication (by corpus index), `None` when undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullPercentileRow {
    pub pub_index: usize,
    pub c_percentile: Option<f64>,
    pub j_percentile: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        Authorship, IngestOptions, JournalMetricEntry, PublicationRecord, Researcher,
    };

    fn single_stratum_corpus(counts: &[u64]) -> Corpus {
        // One (2011, SC1) stratum; publication Pi has counts[i] short
        // citations. Long census mirrors short so monotonicity holds.
        let pubs: Vec<PublicationRecord> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| PublicationRecord {
                pub_id: format!("P{i}"),
                year: 2011,
                subject_categories: vec!["SC1".into()],
                journal_id: "J0".into(),
                reference_only: i > 0,
                citations: vec![c, c],
            })
            .collect();
        let journals = vec![
            JournalMetricEntry {
                journal_id: "J0".into(),
                year: 2011,
                subject_category: "SC1".into(),
                metric_value: 1.0,
            },
            JournalMetricEntry {
                journal_id: "J1".into(),
                year: 2011,
                subject_category: "SC1".into(),
                metric_value: 2.0,
            },
        ];
        let researchers = vec![Researcher {
            researcher_id: "R0".into(),
            panel_id: "2".into(),
            institution_id: "I0".into(),
        }];
        let authorships = vec![Authorship {
            researcher_id: "R0".into(),
            pub_id: "P0".into(),
        }];
        Corpus::new(
            vec!["short".into(), "long".into()],
            pubs,
            journals,
            researchers,
            authorships,
            &IngestOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn top_of_stratum_is_100() {
        // stratum [0,2,5,5,10], target 10 -> 100*4/4
        let corpus = single_stratum_corpus(&[10, 0, 2, 5, 5]);
        let engine = PercentileEngine::new(&corpus);
        let r = engine.citation_percentile("P0", "short").unwrap();
        assert_eq!(r.value, 100.0);
        assert_eq!(r.subject_category, "SC1");
    }

    #[test]
    fn tied_value_takes_midrank() {
        // stratum [0,2,5,5,10], target 5 -> 100*(2+0.5)/4 = 62.5
        let corpus = single_stratum_corpus(&[5, 0, 2, 5, 10]);
        let engine = PercentileEngine::new(&corpus);
        let r = engine.citation_percentile("P0", "short").unwrap();
        assert_eq!(r.value, 62.5);
    }

    #[test]
    fn all_tied_members_sit_at_50() {
        let corpus = single_stratum_corpus(&[7, 7, 7, 7]);
        let engine = PercentileEngine::new(&corpus);
        for i in 0..4 {
            let r = engine
                .citation_percentile(&format!("P{i}"), "short")
                .unwrap();
            assert_eq!(r.value, 50.0);
        }
    }

    #[test]
    fn lone_member_stratum_is_undefined() {
        let corpus = single_stratum_corpus(&[3]);
        let engine = PercentileEngine::new(&corpus);
        let err = engine.citation_percentile("P0", "short").unwrap_err();
        assert!(matches!(err, Error::UndefinedPercentile { kind: "publication", .. }));
    }

    #[test]
    fn missing_census_label_is_an_error() {
        let corpus = single_stratum_corpus(&[1, 2]);
        let engine = PercentileEngine::new(&corpus);
        assert!(matches!(
            engine.citation_percentile("P0", "nope"),
            Err(Error::UnknownCensus(_))
        ));
    }

    fn journal_corpus() -> Corpus {
        // Three journals in SC1 (metrics 1,2,3); JM also listed in SC2 where
        // it ranks lower; JU alone in SC3.
        let journals = vec![
            ("JA", 2011, "SC1", 1.0),
            ("JB", 2011, "SC1", 2.0),
            ("JM", 2011, "SC1", 3.0),
            ("JM", 2011, "SC2", 1.0),
            ("JC", 2011, "SC2", 4.0),
            ("JD", 2011, "SC2", 9.0),
            ("JU", 2011, "SC3", 5.0),
        ]
        .into_iter()
        .map(|(j, y, c, m)| JournalMetricEntry {
            journal_id: j.into(),
            year: y,
            subject_category: c.into(),
            metric_value: m,
        })
        .collect();
        let pubs = vec![PublicationRecord {
            pub_id: "P0".into(),
            year: 2011,
            subject_categories: vec!["SC1".into()],
            journal_id: "JA".into(),
            reference_only: false,
            citations: vec![1, 1],
        }];
        Corpus::new(
            vec!["short".into(), "long".into()],
            pubs,
            journals,
            vec![],
            vec![],
            &IngestOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn top_metric_journal_is_100_in_its_category() {
        let corpus = journal_corpus();
        let engine = PercentileEngine::new(&corpus);
        // In SC1, JM has the top metric of three -> 100. In SC2 it is the
        // lowest of three -> 0. Most favorable wins.
        let r = engine.journal_percentile("JM", 2011).unwrap();
        assert_eq!(r.value, 100.0);
        assert_eq!(r.subject_category, "SC1");
    }

    #[test]
    fn multi_category_journal_takes_most_favorable() {
        let corpus = journal_corpus();
        let engine = PercentileEngine::new(&corpus);
        // JA: only SC1, lowest of [1,2,3] -> 0.
        let r = engine.journal_percentile("JA", 2011).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn journal_alone_in_stratum_is_undefined() {
        let corpus = journal_corpus();
        let engine = PercentileEngine::new(&corpus);
        let err = engine.journal_percentile("JU", 2011).unwrap_err();
        assert!(matches!(err, Error::UndefinedPercentile { kind: "journal", .. }));
    }

    #[test]
    fn journal_without_entry_for_year_is_an_error() {
        let corpus = journal_corpus();
        let engine = PercentileEngine::new(&corpus);
        assert!(matches!(
            engine.journal_percentile("JA", 2012),
            Err(Error::MissingJournalMetric { .. })
        ));
        assert!(matches!(
            engine.journal_percentile("NOPE", 2011),
            Err(Error::UnknownJournal(_))
        ));
    }

    #[test]
    fn batch_table_lists_assessed_pubs_and_collects_issues() {
        let corpus = single_stratum_corpus(&[10, 0, 2, 5, 5]);
        let engine = PercentileEngine::new(&corpus);
        let table = engine.percentile_table("short").unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].pub_id, "P0");
        assert_eq!(table.rows[0].c_percentile, 100.0);
        assert!(table.issues.is_empty());
    }

    #[test]
    fn batch_table_matches_per_item_calls() {
        let corpus = single_stratum_corpus(&[4, 0, 0, 2, 9, 4, 4]);
        let engine = PercentileEngine::new(&corpus);
        let table = engine.percentile_table("short").unwrap();
        for row in &table.rows {
            let c = engine.citation_percentile(&row.pub_id, "short").unwrap();
            assert_eq!(c.value, row.c_percentile);
        }
    }

    #[test]
    fn external_midrank_formula() {
        let sorted = [1.0, 2.0, 2.0, 5.0];
        // fewer=1, equal=2 -> 100*(1+1)/4 = 50
        assert_eq!(midrank_external_f64(&sorted, 2.0), Some(50.0));
        assert_eq!(midrank_external_f64(&[], 2.0), None);
    }

    #[test]
    fn member_midrank_mean_is_exactly_50() {
        let mut sorted = vec![0u64, 0, 1, 3, 3, 3, 9, 12];
        sorted.sort_unstable();
        let sum: f64 = sorted
            .iter()
            .map(|&v| midrank_member_u64(&sorted, v).unwrap())
            .sum();
        assert!((sum / sorted.len() as f64 - 50.0).abs() < 1e-12);
    }
}
