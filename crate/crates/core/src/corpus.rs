//! Domain model and validated CSV ingestion of publications, journals,
//! researchers, and authorships.
//!
//! A [`Corpus`] is immutable after construction and safe to share across
//! threads. Citation counts are recorded at a fixed ordered list of census
//! labels (earliest first); counts must be non-decreasing along that order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One indexed publication with citation counts at every census label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    /// Non-empty, duplicate-free subject categories.
    pub subject_categories: Vec<String>,
    pub journal_id: String,
    /// Part of the world reference corpus; authored by no assessed researcher.
    pub reference_only: bool,
    /// Citation counts aligned with [`Corpus::census_labels`].
    pub citations: Vec<u64>,
}

/// A journal's metric value for one year and subject category.
#[derive(Debug, Clone, PartialEq)]
pub struct JournalMetricEntry {
    pub journal_id: String,
    pub year: i32,
    pub subject_category: String,
    pub metric_value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Researcher {
    pub researcher_id: String,
    pub panel_id: String,
    pub institution_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Authorship {
    pub researcher_id: String,
    pub pub_id: String,
}

/// Optional ingestion constraints beyond the structural invariants.
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Inclusive (min, max) publication-year window; unbounded when `None`.
    pub assessment_window: Option<(i32, i32)>,
    /// Panel ids researchers may reference; unchecked when `None` (the
    /// scoring stage re-validates against the panel configuration).
    pub known_panels: Option<BTreeSet<String>>,
}

/// Validated, immutable collection of all input data.
#[derive(Debug, Clone)]
pub struct Corpus {
    census_labels: Vec<String>,
    publications: Vec<PublicationRecord>,
    journal_metrics: Vec<JournalMetricEntry>,
    researchers: Vec<Researcher>,
    authorships: Vec<Authorship>,
    pub_index: HashMap<String, usize>,
    researcher_index: HashMap<String, usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.census_labels == other.census_labels
            && self.publications == other.publications
            && self.journal_metrics == other.journal_metrics
            && self.researchers == other.researchers
            && self.authorships == other.authorships
    }
}

impl Corpus {
    /// Builds a corpus, checking every structural invariant. Errors name the
    /// offending identifier.
    pub fn new(
        census_labels: Vec<String>,
        publications: Vec<PublicationRecord>,
        journal_metrics: Vec<JournalMetricEntry>,
        researchers: Vec<Researcher>,
        authorships: Vec<Authorship>,
        options: &IngestOptions,
    ) -> Result<Self> {
        if census_labels.len() < 2 {
            return Err(Error::InvalidCorpus(format!(
                "need at least two census labels (a short and a long window), got {}",
                census_labels.len()
            )));
        }
        {
            let mut seen = HashSet::new();
            for label in &census_labels {
                if label.is_empty() {
                    return Err(Error::InvalidCorpus("empty census label".into()));
                }
                if !seen.insert(label.as_str()) {
                    return Err(Error::DuplicateId {
                        kind: "census label",
                        id: label.clone(),
                    });
                }
            }
        }

        let mut pub_index = HashMap::with_capacity(publications.len());
        for (i, p) in publications.iter().enumerate() {
            if p.pub_id.is_empty() {
                return Err(Error::InvalidPublication {
                    pub_id: String::from("<empty>"),
                    message: "empty pub_id".into(),
                });
            }
            if pub_index.insert(p.pub_id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "publication",
                    id: p.pub_id.clone(),
                });
            }
            if p.subject_categories.is_empty() {
                return Err(Error::InvalidPublication {
                    pub_id: p.pub_id.clone(),
                    message: "subject_categories must be non-empty".into(),
                });
            }
            let mut cats = HashSet::new();
            for c in &p.subject_categories {
                if c.is_empty() {
                    return Err(Error::InvalidPublication {
                        pub_id: p.pub_id.clone(),
                        message: "empty subject category".into(),
                    });
                }
                if !cats.insert(c.as_str()) {
                    return Err(Error::InvalidPublication {
                        pub_id: p.pub_id.clone(),
                        message: format!("duplicate subject category '{c}'"),
                    });
                }
            }
            if p.journal_id.is_empty() {
                return Err(Error::InvalidPublication {
                    pub_id: p.pub_id.clone(),
                    message: "empty journal_id".into(),
                });
            }
            if p.citations.len() != census_labels.len() {
                return Err(Error::InvalidPublication {
                    pub_id: p.pub_id.clone(),
                    message: format!(
                        "expected {} citation counts, got {}",
                        census_labels.len(),
                        p.citations.len()
                    ),
                });
            }
            for w in p.citations.windows(2).enumerate() {
                let (idx, pair) = w;
                if pair[0] > pair[1] {
                    return Err(Error::CitationOrder {
                        pub_id: p.pub_id.clone(),
                        earlier: census_labels[idx].clone(),
                        earlier_count: pair[0],
                        later: census_labels[idx + 1].clone(),
                        later_count: pair[1],
                    });
                }
            }
            if let Some((lo, hi)) = options.assessment_window {
                if p.year < lo || p.year > hi {
                    return Err(Error::InvalidPublication {
                        pub_id: p.pub_id.clone(),
                        message: format!(
                            "year {} outside assessment window {lo}..={hi}",
                            p.year
                        ),
                    });
                }
            }
        }

        let mut journal_ids = HashSet::new();
        let mut journal_keys = HashSet::new();
        for j in &journal_metrics {
            if j.journal_id.is_empty() {
                return Err(Error::InvalidJournal {
                    journal_id: String::from("<empty>"),
                    message: "empty journal_id".into(),
                });
            }
            if !(j.metric_value.is_finite() && j.metric_value >= 0.0) {
                return Err(Error::InvalidJournal {
                    journal_id: j.journal_id.clone(),
                    message: format!(
                        "metric_value must be finite and >= 0, got {}",
                        j.metric_value
                    ),
                });
            }
            if !journal_keys.insert((j.journal_id.as_str(), j.year, j.subject_category.as_str())) {
                return Err(Error::InvalidJournal {
                    journal_id: j.journal_id.clone(),
                    message: format!(
                        "duplicate metric entry for year {} category '{}'",
                        j.year, j.subject_category
                    ),
                });
            }
            journal_ids.insert(j.journal_id.as_str());
        }

        for p in &publications {
            if !journal_ids.contains(p.journal_id.as_str()) {
                return Err(Error::UnknownReference {
                    kind: "journal",
                    id: p.journal_id.clone(),
                    context: format!("publication '{}'", p.pub_id),
                });
            }
        }

        let mut researcher_index = HashMap::with_capacity(researchers.len());
        for (i, r) in researchers.iter().enumerate() {
            if r.researcher_id.is_empty() {
                return Err(Error::InvalidResearcher {
                    researcher_id: String::from("<empty>"),
                    message: "empty researcher_id".into(),
                });
            }
            if researcher_index.insert(r.researcher_id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "researcher",
                    id: r.researcher_id.clone(),
                });
            }
            if r.panel_id.is_empty() {
                return Err(Error::InvalidResearcher {
                    researcher_id: r.researcher_id.clone(),
                    message: "empty panel_id".into(),
                });
            }
            if let Some(known) = &options.known_panels {
                if !known.contains(&r.panel_id) {
                    return Err(Error::UnknownReference {
                        kind: "panel",
                        id: r.panel_id.clone(),
                        context: format!("researcher '{}'", r.researcher_id),
                    });
                }
            }
        }

        let mut pairs = HashSet::with_capacity(authorships.len());
        for a in &authorships {
            if !researcher_index.contains_key(&a.researcher_id) {
                return Err(Error::UnknownReference {
                    kind: "researcher",
                    id: a.researcher_id.clone(),
                    context: format!("authorship of publication '{}'", a.pub_id),
                });
            }
            let Some(&pi) = pub_index.get(&a.pub_id) else {
                return Err(Error::UnknownReference {
                    kind: "publication",
                    id: a.pub_id.clone(),
                    context: format!("authorship by researcher '{}'", a.researcher_id),
                });
            };
            if publications[pi].reference_only {
                return Err(Error::InvalidPublication {
                    pub_id: a.pub_id.clone(),
                    message: format!(
                        "marked reference_only but authored by researcher '{}'",
                        a.researcher_id
                    ),
                });
            }
            if !pairs.insert((a.researcher_id.as_str(), a.pub_id.as_str())) {
                return Err(Error::DuplicateId {
                    kind: "authorship",
                    id: format!("({}, {})", a.researcher_id, a.pub_id),
                });
            }
        }

        Ok(Corpus {
            census_labels,
            publications,
            journal_metrics,
            researchers,
            authorships,
            pub_index,
            researcher_index,
        })
    }

    pub fn census_labels(&self) -> &[String] {
        &self.census_labels
    }

    pub fn census_index(&self, label: &str) -> Result<usize> {
        self.census_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownCensus(label.to_string()))
    }

    pub fn publications(&self) -> &[PublicationRecord] {
        &self.publications
    }

    pub fn journal_metrics(&self) -> &[JournalMetricEntry] {
        &self.journal_metrics
    }

    pub fn researchers(&self) -> &[Researcher] {
        &self.researchers
    }

    pub fn authorships(&self) -> &[Authorship] {
        &self.authorships
    }

    pub fn publication(&self, pub_id: &str) -> Result<&PublicationRecord> {
        self.pub_index
            .get(pub_id)
            .map(|&i| &self.publications[i])
            .ok_or_else(|| Error::UnknownPublication(pub_id.to_string()))
    }

    pub fn researcher(&self, researcher_id: &str) -> Result<&Researcher> {
        self.researcher_index
            .get(researcher_id)
            .map(|&i| &self.researchers[i])
            .ok_or_else(|| Error::UnknownResearcher(researcher_id.to_string()))
    }

    /// Distinct (pub_id, panel_id) pairs from authorships, sorted. One row
    /// per panel even when several co-authors share it; cross-panel
    /// co-authorship yields one row per panel.
    pub fn analysis_pairs(&self) -> Vec<(String, String)> {
        let mut set = BTreeSet::new();
        for a in &self.authorships {
            let r = &self.researchers[self.researcher_index[&a.researcher_id]];
            set.insert((a.pub_id.clone(), r.panel_id.clone()));
        }
        set.into_iter().collect()
    }
}

/// One panel's row of the corpus summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelCounts {
    pub panel_id: String,
    pub researchers: u64,
    pub authorships: u64,
    pub distinct_publications: u64,
}

/// Per-panel counts plus a grand total in which publications co-authored
/// across panels are counted once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSummary {
    pub rows: Vec<PanelCounts>,
    pub total_researchers: u64,
    pub total_authorships: u64,
    pub total_distinct_publications: u64,
}

pub fn corpus_summary(corpus: &Corpus) -> CorpusSummary {
    let mut per_panel: BTreeMap<&str, (u64, u64, BTreeSet<&str>)> = BTreeMap::new();
    for r in corpus.researchers() {
        per_panel.entry(r.panel_id.as_str()).or_default().0 += 1;
    }
    let mut all_pubs: BTreeSet<&str> = BTreeSet::new();
    for a in corpus.authorships() {
        let r = corpus.researcher(&a.researcher_id).expect("validated");
        let entry = per_panel.entry(r.panel_id.as_str()).or_default();
        entry.1 += 1;
        entry.2.insert(a.pub_id.as_str());
        all_pubs.insert(a.pub_id.as_str());
    }
    let mut rows: Vec<PanelCounts> = per_panel
        .into_iter()
        .map(|(panel, (researchers, authorships, pubs))| PanelCounts {
            panel_id: panel.to_string(),
            researchers,
            authorships,
            distinct_publications: pubs.len() as u64,
        })
        .collect();
    rows.sort_by(|a, b| panel_order_key(&a.panel_id).cmp(&panel_order_key(&b.panel_id)));
    CorpusSummary {
        total_researchers: corpus.researchers().len() as u64,
        total_authorships: corpus.authorships().len() as u64,
        total_distinct_publications: all_pubs.len() as u64,
        rows,
    }
}

/// Sort key giving panels their natural order: numeric prefix first, then
/// any suffix ("1" < "2" < ... < "8a" < "8b" < "9" < "11b").
pub fn panel_order_key(panel_id: &str) -> (u64, String) {
    let digits: String = panel_id.chars().take_while(|c| c.is_ascii_digit()).collect();
    match digits.parse::<u64>() {
        Ok(n) => (n, panel_id[digits.len()..].to_string()),
        Err(_) => (u64::MAX, panel_id.to_string()),
    }
}

// ---------------------------------------------------------------------------
// CSV ingestion and export
// ---------------------------------------------------------------------------

const CITES_PREFIX: &str = "cites_";

/// Reads the four fixed-name corpus files from `dir`.
pub fn ingest(dir: &Path, options: &IngestOptions) -> Result<Corpus> {
    ingest_files(
        &dir.join("publications.csv"),
        &dir.join("journals.csv"),
        &dir.join("researchers.csv"),
        &dir.join("authorships.csv"),
        options,
    )
}

/// Reads and validates a corpus from the four CSV files.
pub fn ingest_files(
    publication_file: &Path,
    journal_file: &Path,
    researcher_file: &Path,
    authorship_file: &Path,
    options: &IngestOptions,
) -> Result<Corpus> {
    let (census_labels, publications) = read_publications(publication_file)?;
    let journal_metrics = read_journals(journal_file)?;
    let researchers = read_researchers(researcher_file)?;
    let authorships = read_authorships(authorship_file)?;
    Corpus::new(
        census_labels,
        publications,
        journal_metrics,
        researchers,
        authorships,
        options,
    )
}

struct RowCursor<'a> {
    file: String,
    headers: &'a csv::StringRecord,
    record: &'a csv::StringRecord,
    line: u64,
}

impl<'a> RowCursor<'a> {
    fn field(&self, column: &str) -> Result<&'a str> {
        let idx = self
            .headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| Error::MissingColumn {
                file: self.file.clone(),
                column: column.to_string(),
            })?;
        self.record.get(idx).ok_or_else(|| Error::MalformedRow {
            file: self.file.clone(),
            line: self.line,
            column: column.to_string(),
            message: "row has too few fields".into(),
        })
    }

    fn malformed(&self, column: &str, message: impl Into<String>) -> Error {
        Error::MalformedRow {
            file: self.file.clone(),
            line: self.line,
            column: column.to_string(),
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, column: &str, kind: &str) -> Result<T> {
        let raw = self.field(column)?;
        raw.parse::<T>()
            .map_err(|_| self.malformed(column, format!("expected {kind}, got '{raw}'")))
    }
}

fn open_reader(path: &Path) -> Result<(csv::Reader<std::fs::File>, csv::StringRecord, String)> {
    let file_name = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Artifact {
            file: file_name.clone(),
            message: e.to_string(),
        })?;
    let headers = rdr.headers()?.clone();
    Ok((rdr, headers, file_name))
}

fn read_publications(path: &Path) -> Result<(Vec<String>, Vec<PublicationRecord>)> {
    let (mut rdr, headers, file) = open_reader(path)?;
    for required in ["pub_id", "year", "subject_categories", "journal_id", "reference_only"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::MissingColumn {
                file,
                column: required.to_string(),
            });
        }
    }
    let census_labels: Vec<String> = headers
        .iter()
        .filter_map(|h| h.strip_prefix(CITES_PREFIX))
        .map(str::to_string)
        .collect();
    if census_labels.len() < 2 {
        return Err(Error::MissingColumn {
            file,
            column: format!("{CITES_PREFIX}<label> (need at least two)"),
        });
    }

    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 2);
        let row = RowCursor {
            file: file.clone(),
            headers: &headers,
            record: &record,
            line,
        };
        let pub_id = row.field("pub_id")?.to_string();
        let year: i32 = row.parse("year", "an integer year")?;
        let cats_raw = row.field("subject_categories")?;
        let subject_categories: Vec<String> = cats_raw
            .split('|')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let journal_id = row.field("journal_id")?.to_string();
        let reference_only = match row.field("reference_only")? {
            "0" => false,
            "1" => true,
            other => {
                return Err(row.malformed("reference_only", format!("expected 0 or 1, got '{other}'")))
            }
        };
        let mut citations = Vec::with_capacity(census_labels.len());
        for label in &census_labels {
            let column = format!("{CITES_PREFIX}{label}");
            let count: u64 = row.parse(&column, "a non-negative integer")?;
            citations.push(count);
        }
        out.push(PublicationRecord {
            pub_id,
            year,
            subject_categories,
            journal_id,
            reference_only,
            citations,
        });
    }
    Ok((census_labels, out))
}

fn read_journals(path: &Path) -> Result<Vec<JournalMetricEntry>> {
    let (mut rdr, headers, file) = open_reader(path)?;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 2);
        let row = RowCursor {
            file: file.clone(),
            headers: &headers,
            record: &record,
            line,
        };
        out.push(JournalMetricEntry {
            journal_id: row.field("journal_id")?.to_string(),
            year: row.parse("year", "an integer year")?,
            subject_category: row.field("subject_category")?.to_string(),
            metric_value: row.parse("metric_value", "a finite non-negative number")?,
        });
    }
    Ok(out)
}

fn read_researchers(path: &Path) -> Result<Vec<Researcher>> {
    let (mut rdr, headers, file) = open_reader(path)?;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 2);
        let row = RowCursor {
            file: file.clone(),
            headers: &headers,
            record: &record,
            line,
        };
        out.push(Researcher {
            researcher_id: row.field("researcher_id")?.to_string(),
            panel_id: row.field("panel_id")?.to_string(),
            institution_id: row.field("institution_id")?.to_string(),
        });
    }
    Ok(out)
}

fn read_authorships(path: &Path) -> Result<Vec<Authorship>> {
    let (mut rdr, headers, file) = open_reader(path)?;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 2);
        let row = RowCursor {
            file: file.clone(),
            headers: &headers,
            record: &record,
            line,
        };
        out.push(Authorship {
            researcher_id: row.field("researcher_id")?.to_string(),
            pub_id: row.field("pub_id")?.to_string(),
        });
    }
    Ok(out)
}

/// Writes the four corpus CSVs into `dir` in canonical form. Re-ingesting
/// the output yields an equal corpus.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("publications.csv"))?;
    let mut header = vec![
        "pub_id".to_string(),
        "year".to_string(),
        "subject_categories".to_string(),
        "journal_id".to_string(),
        "reference_only".to_string(),
    ];
    header.extend(corpus.census_labels().iter().map(|l| format!("{CITES_PREFIX}{l}")));
    w.write_record(&header)?;
    for p in corpus.publications() {
        let mut rec = vec![
            p.pub_id.clone(),
            p.year.to_string(),
            p.subject_categories.join("|"),
            p.journal_id.clone(),
            if p.reference_only { "1" } else { "0" }.to_string(),
        ];
        rec.extend(p.citations.iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("journals.csv"))?;
    w.write_record(["journal_id", "year", "subject_category", "metric_value"])?;
    for j in corpus.journal_metrics() {
        w.write_record([
            j.journal_id.as_str(),
            &j.year.to_string(),
            j.subject_category.as_str(),
            &j.metric_value.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("researchers.csv"))?;
    w.write_record(["researcher_id", "panel_id", "institution_id"])?;
    for r in corpus.researchers() {
        w.write_record([r.researcher_id.as_str(), r.panel_id.as_str(), r.institution_id.as_str()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("authorships.csv"))?;
    w.write_record(["researcher_id", "pub_id"])?;
    for a in corpus.authorships() {
        w.write_record([a.researcher_id.as_str(), a.pub_id.as_str()])?;
    }
    w.flush()?;

    Ok(())
}

/// Writes the Table-2 shaped summary (one row per panel plus a TOTAL row).
pub fn write_summary(summary: &CorpusSummary, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "panel_id,researchers,authorships,distinct_publications")
        .expect("write to vec");
    for row in &summary.rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.panel_id, row.researchers, row.authorships, row.distinct_publications
        )
        .expect("write to vec");
    }
    writeln!(
        out,
        "TOTAL,{},{},{}",
        summary.total_researchers, summary.total_authorships, summary.total_distinct_publications
    )
    .expect("write to vec");
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_parts() -> (
        Vec<String>,
        Vec<PublicationRecord>,
        Vec<JournalMetricEntry>,
        Vec<Researcher>,
        Vec<Authorship>,
    ) {
        let labels = vec!["short".to_string(), "long".to_string()];
        let pubs = vec![
            publication("P1", 2011, &["SC1"], "J1", false, &[2, 5]),
            publication("P2", 2011, &["SC1"], "J1", false, &[0, 1]),
            publication("P3", 2012, &["SC1", "SC2"], "J2", true, &[3, 3]),
        ];
        let journals = vec![
            metric("J1", 2011, "SC1", 1.5),
            metric("J2", 2011, "SC1", 2.5),
            metric("J2", 2012, "SC2", 2.0),
        ];
        let researchers = vec![researcher("R1", "2"), researcher("R2", "2")];
        let authorships = vec![
            authorship("R1", "P1"),
            authorship("R1", "P2"),
            authorship("R2", "P1"),
        ];
        (labels, pubs, journals, researchers, authorships)
    }

    fn publication(
        id: &str,
        year: i32,
        cats: &[&str],
        journal: &str,
        reference_only: bool,
        cites: &[u64],
    ) -> PublicationRecord {
        PublicationRecord {
            pub_id: id.into(),
            year,
            subject_categories: cats.iter().map(|s| s.to_string()).collect(),
            journal_id: journal.into(),
            reference_only,
            citations: cites.to_vec(),
        }
    }

    fn metric(journal: &str, year: i32, cat: &str, value: f64) -> JournalMetricEntry {
        JournalMetricEntry {
            journal_id: journal.into(),
            year,
            subject_category: cat.into(),
            metric_value: value,
        }
    }

    fn researcher(id: &str, panel: &str) -> Researcher {
        Researcher {
            researcher_id: id.into(),
            panel_id: panel.into(),
            institution_id: "I1".into(),
        }
    }

    fn authorship(r: &str, p: &str) -> Authorship {
        Authorship {
            researcher_id: r.into(),
            pub_id: p.into(),
        }
    }

    #[test]
    fn valid_toy_corpus_round_counts() {
        let (l, p, j, r, a) = toy_parts();
        let corpus = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap();
        assert_eq!(corpus.publications().len(), 3);
        assert_eq!(corpus.journal_metrics().len(), 3);
        assert_eq!(corpus.researchers().len(), 2);
        assert_eq!(corpus.authorships().len(), 3);
    }

    #[test]
    fn citation_monotonicity_violation_names_pub() {
        let (l, mut p, j, r, a) = toy_parts();
        p[0].citations = vec![5, 3];
        let err = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap_err();
        match err {
            Error::CitationOrder { pub_id, .. } => assert_eq!(pub_id, "P1"),
            other => panic!("expected CitationOrder, got {other:?}"),
        }
    }

    #[test]
    fn authorship_to_unknown_pub_is_integrity_error() {
        let (l, p, j, r, mut a) = toy_parts();
        a.push(authorship("R1", "NOPE"));
        let err = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap_err();
        match err {
            Error::UnknownReference { kind, id, .. } => {
                assert_eq!(kind, "publication");
                assert_eq!(id, "NOPE");
            }
            other => panic!("expected UnknownReference, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_authorship_rejected() {
        let (l, p, j, r, mut a) = toy_parts();
        a.push(authorship("R1", "P1"));
        let err = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { kind: "authorship", .. }));
    }

    #[test]
    fn reference_only_with_authorship_rejected() {
        let (l, p, j, r, mut a) = toy_parts();
        a.push(authorship("R2", "P3"));
        let err = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidPublication { .. }));
    }

    #[test]
    fn duplicate_category_rejected() {
        let (l, mut p, j, r, a) = toy_parts();
        p[0].subject_categories = vec!["SC1".into(), "SC1".into()];
        let err = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidPublication { .. }));
    }

    #[test]
    fn year_window_enforced_when_configured() {
        let (l, p, j, r, a) = toy_parts();
        let opts = IngestOptions {
            assessment_window: Some((2011, 2011)),
            ..Default::default()
        };
        let err = Corpus::new(l, p, j, r, a, &opts).unwrap_err();
        assert!(matches!(err, Error::InvalidPublication { .. }));
    }

    #[test]
    fn summary_counts_by_hand() {
        // 2 researchers in panel 2, 3 authorships, 2 distinct pubs.
        let (l, p, j, r, a) = toy_parts();
        let corpus = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap();
        let s = corpus_summary(&corpus);
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].panel_id, "2");
        assert_eq!(s.rows[0].researchers, 2);
        assert_eq!(s.rows[0].authorships, 3);
        assert_eq!(s.rows[0].distinct_publications, 2);
        assert_eq!(s.total_distinct_publications, 2);
    }

    #[test]
    fn summary_dedups_cross_panel_pub_in_total_only() {
        let (l, p, j, mut r, mut a) = toy_parts();
        r.push(researcher("R3", "5"));
        a.push(authorship("R3", "P1"));
        let corpus = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap();
        let s = corpus_summary(&corpus);
        // P1 appears in both panel rows but once in the total.
        let by_panel: BTreeMap<_, _> = s
            .rows
            .iter()
            .map(|row| (row.panel_id.as_str(), row.distinct_publications))
            .collect();
        assert_eq!(by_panel["2"], 2);
        assert_eq!(by_panel["5"], 1);
        assert_eq!(s.total_distinct_publications, 2);
        assert!(s.total_distinct_publications <= by_panel.values().sum::<u64>());
    }

    #[test]
    fn empty_corpus_summary_is_all_zero() {
        let labels = vec!["short".to_string(), "long".to_string()];
        let corpus =
            Corpus::new(labels, vec![], vec![], vec![], vec![], &IngestOptions::default())
                .unwrap();
        let s = corpus_summary(&corpus);
        assert!(s.rows.is_empty());
        assert_eq!(s.total_researchers, 0);
        assert_eq!(s.total_authorships, 0);
        assert_eq!(s.total_distinct_publications, 0);
    }

    #[test]
    fn panel_natural_order() {
        let mut ids = vec!["11b", "2", "8b", "1", "9", "8a"];
        ids.sort_by_key(|i| panel_order_key(i));
        assert_eq!(ids, vec!["1", "2", "8a", "8b", "9", "11b"]);
    }

    #[test]
    fn csv_round_trip_preserves_corpus() {
        let (l, p, j, r, a) = toy_parts();
        let corpus = Corpus::new(l, p, j, r, a, &IngestOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_corpus(&corpus, dir.path()).unwrap();
        let back = ingest(dir.path(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus, back);
    }

    #[test]
    fn malformed_csv_names_file_line_column() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("publications.csv"),
            "pub_id,year,subject_categories,journal_id,reference_only,cites_a,cites_b\n\
             P1,not_a_year,SC1,J1,0,1,2\n",
        )
        .unwrap();
        std::fs::write(
            dir.path().join("journals.csv"),
            "journal_id,year,subject_category,metric_value\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("researchers.csv"), "researcher_id,panel_id,institution_id\n")
            .unwrap();
        std::fs::write(dir.path().join("authorships.csv"), "researcher_id,pub_id\n").unwrap();
        let err = ingest(dir.path(), &IngestOptions::default()).unwrap_err();
        match err {
            Error::MalformedRow { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "year");
            }
            other => panic!("expected MalformedRow, got {other:?}"),
        }
    }
}
