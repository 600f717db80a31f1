//! CSV and JSON artifact formats for the staged pipeline.
//!
//! Every stage writes plain CSV (and the compare stage one JSON report) and
//! later stages read those files back, so a pipeline can resume from any
//! prefix. Floats are written with Rust's shortest round-trip formatting;
//! parsing a written value recovers it bit-exactly, which keeps resumed
//! pipelines byte-identical to in-memory runs.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::eval::{ConfusionSummary, DiffStats, EvaluationReport, ResearcherReportRow};
use crate::grading::{Grade, GradeIssue, GradeTable, GradedRow, Indicator};
use crate::indicator::{ScoreRow, ScoreTable};
use crate::percentile::{PercentileRow, PercentileTable};
use crate::selection::{SelectedPub, SelectionSet};

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn artifact_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Artifact {
        file: path.display().to_string(),
        message: message.into(),
    }
}

fn reader_with_headers(path: &Path, expected: &[&str]) -> Result<csv::Reader<File>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| artifact_err(path, e.to_string()))?;
    let headers = rdr.headers()?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(artifact_err(
            path,
            format!("unexpected columns {got:?}, expected {expected:?}"),
        ));
    }
    Ok(rdr)
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    column: &str,
    raw: &str,
) -> Result<T> {
    raw.parse::<T>().map_err(|_| Error::MalformedRow {
        file: path.display().to_string(),
        line,
        column: column.to_string(),
        message: format!("cannot parse '{raw}'"),
    })
}

// ---------------------------------------------------------------------------
// percentiles.csv
// ---------------------------------------------------------------------------

const PERCENTILE_COLUMNS: [&str; 4] = ["pub_id", "census_label", "c_percentile", "j_percentile"];

/// Writes both census tables into one file, short rows first.
pub fn write_percentiles(tables: &[&PercentileTable], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PERCENTILE_COLUMNS)?;
    for table in tables {
        for row in &table.rows {
            w.write_record([
                row.pub_id.as_str(),
                table.census_label.as_str(),
                &fmt_f64(row.c_percentile),
                &fmt_f64(row.j_percentile),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_percentile_issues(tables: &[&PercentileTable], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pub_id", "census_label", "code", "message"])?;
    for table in tables {
        for issue in &table.issues {
            w.write_record([
                issue.pub_id.as_str(),
                issue.census_label.as_str(),
                issue.code,
                issue.message.as_str(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads percentile tables back, grouped by census label (in first-seen
/// order). Issue files are not re-read; resumed stages only need the rows.
pub fn read_percentiles(path: &Path) -> Result<Vec<PercentileTable>> {
    let mut rdr = reader_with_headers(path, &PERCENTILE_COLUMNS)?;
    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Vec<PercentileRow>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let census = record[1].to_string();
        if !grouped.contains_key(&census) {
            order.push(census.clone());
        }
        grouped.entry(census).or_default().push(PercentileRow {
            pub_id: record[0].to_string(),
            c_percentile: parse_field(path, line, "c_percentile", &record[2])?,
            j_percentile: parse_field(path, line, "j_percentile", &record[3])?,
        });
    }
    Ok(order
        .into_iter()
        .map(|census_label| PercentileTable {
            rows: grouped.remove(&census_label).unwrap_or_default(),
            census_label,
            issues: Vec::new(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// scores.csv
// ---------------------------------------------------------------------------

const SCORE_COLUMNS: [&str; 10] = [
    "pub_id",
    "panel_id",
    "year",
    "slope",
    "short_census",
    "long_census",
    "c_short",
    "c_long",
    "j_percentile",
    "cj_score",
];

pub fn write_scores(scores: &ScoreTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SCORE_COLUMNS)?;
    for r in &scores.rows {
        w.write_record([
            r.pub_id.as_str(),
            r.panel_id.as_str(),
            &r.year.to_string(),
            &fmt_f64(r.slope),
            scores.short_census.as_str(),
            scores.long_census.as_str(),
            &fmt_f64(r.c_short),
            &fmt_f64(r.c_long),
            &fmt_f64(r.j_percentile),
            &fmt_f64(r.cj),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_score_issues(scores: &ScoreTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pub_id", "panel_id", "message"])?;
    for issue in &scores.issues {
        w.write_record([issue.pub_id.as_str(), issue.panel_id.as_str(), issue.message.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scores(path: &Path) -> Result<ScoreTable> {
    let mut rdr = reader_with_headers(path, &SCORE_COLUMNS)?;
    let mut rows = Vec::new();
    let mut censuses: Option<(String, String)> = None;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let pair = (record[4].to_string(), record[5].to_string());
        match &censuses {
            None => censuses = Some(pair),
            Some(existing) if *existing == pair => {}
            Some(existing) => {
                return Err(artifact_err(
                    path,
                    format!("mixed census labels: {existing:?} vs {pair:?}"),
                ))
            }
        }
        rows.push(ScoreRow {
            pub_id: record[0].to_string(),
            panel_id: record[1].to_string(),
            year: parse_field(path, line, "year", &record[2])?,
            slope: parse_field(path, line, "slope", &record[3])?,
            c_short: parse_field(path, line, "c_short", &record[6])?,
            c_long: parse_field(path, line, "c_long", &record[7])?,
            j_percentile: parse_field(path, line, "j_percentile", &record[8])?,
            cj: parse_field(path, line, "cj_score", &record[9])?,
        });
    }
    let (short_census, long_census) = censuses
        .ok_or_else(|| artifact_err(path, "no score rows; run the score stage first"))?;
    Ok(ScoreTable {
        short_census,
        long_census,
        rows,
        issues: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// grades.csv
// ---------------------------------------------------------------------------

const GRADE_COLUMNS: [&str; 8] = [
    "pub_id",
    "panel_id",
    "indicator",
    "value",
    "world_percentile",
    "letter",
    "score",
    "peer_flag",
];

pub fn write_grades(grades: &GradeTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(GRADE_COLUMNS)?;
    for r in &grades.rows {
        w.write_record([
            r.pub_id.as_str(),
            r.panel_id.as_str(),
            r.indicator.as_str(),
            &fmt_f64(r.value),
            &fmt_f64(r.world_percentile),
            &r.grade.to_string(),
            &fmt_f64(r.grade.score()),
            if r.peer_flag { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grade_issues(issues: &[GradeIssue], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pub_id", "panel_id", "indicator", "message"])?;
    for issue in issues {
        w.write_record([
            issue.pub_id.as_str(),
            issue.panel_id.as_str(),
            issue.indicator.as_str(),
            issue.message.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grades(path: &Path) -> Result<GradeTable> {
    let mut rdr = reader_with_headers(path, &GRADE_COLUMNS)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let indicator: Indicator = record[2]
            .parse()
            .map_err(|_| artifact_err(path, format!("line {line}: unknown indicator '{}'", &record[2])))?;
        let grade: Grade = record[5]
            .parse()
            .map_err(|_| artifact_err(path, format!("line {line}: unknown grade '{}'", &record[5])))?;
        rows.push(GradedRow {
            pub_id: record[0].to_string(),
            panel_id: record[1].to_string(),
            indicator,
            value: parse_field(path, line, "value", &record[3])?,
            world_percentile: parse_field(path, line, "world_percentile", &record[4])?,
            grade,
            peer_flag: &record[7] == "1",
        });
    }
    Ok(GradeTable {
        rows,
        issues: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// selections.csv
// ---------------------------------------------------------------------------

const SELECTION_COLUMNS: [&str; 5] = ["indicator", "researcher_id", "rank", "pub_id", "value"];

pub fn write_selections(selections: &BTreeMap<Indicator, SelectionSet>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SELECTION_COLUMNS)?;
    for (indicator, set) in selections {
        for (researcher, pubs) in &set.per_researcher {
            for (rank, p) in pubs.iter().enumerate() {
                w.write_record([
                    indicator.as_str(),
                    researcher.as_str(),
                    &(rank + 1).to_string(),
                    p.pub_id.as_str(),
                    &fmt_f64(p.value),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_selection_summary(
    selections: &BTreeMap<Indicator, SelectionSet>,
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["indicator", "k", "researchers", "researchers_empty", "total_selected"])?;
    for (indicator, set) in selections {
        w.write_record([
            indicator.as_str(),
            &set.k.to_string(),
            &set.per_researcher.len().to_string(),
            &set.empty_researchers.len().to_string(),
            &set.selected_count().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds per-indicator selection sets. The corpus supplies the full
/// researcher list (researchers absent from the file selected nothing);
/// `k` must match the selection stage's value.
pub fn read_selections(
    path: &Path,
    corpus: &Corpus,
    k: u32,
) -> Result<BTreeMap<Indicator, SelectionSet>> {
    let mut rdr = reader_with_headers(path, &SELECTION_COLUMNS)?;
    let mut picked: BTreeMap<Indicator, BTreeMap<String, Vec<(u32, SelectedPub)>>> =
        BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let indicator: Indicator = record[0]
            .parse()
            .map_err(|_| artifact_err(path, format!("line {line}: unknown indicator '{}'", &record[0])))?;
        let rank: u32 = parse_field(path, line, "rank", &record[2])?;
        if rank == 0 || rank > k {
            return Err(artifact_err(
                path,
                format!("line {line}: rank {rank} outside 1..={k}; was the file built with a different k?"),
            ));
        }
        picked
            .entry(indicator)
            .or_default()
            .entry(record[1].to_string())
            .or_default()
            .push((
                rank,
                SelectedPub {
                    pub_id: record[3].to_string(),
                    value: parse_field(path, line, "value", &record[4])?,
                },
            ));
    }

    let mut out = BTreeMap::new();
    for (indicator, mut by_researcher) in picked {
        let mut per_researcher = BTreeMap::new();
        let mut empty_researchers = Vec::new();
        for r in corpus.researchers() {
            match by_researcher.remove(&r.researcher_id) {
                Some(mut pubs) => {
                    pubs.sort_by_key(|(rank, _)| *rank);
                    per_researcher.insert(
                        r.researcher_id.clone(),
                        pubs.into_iter().map(|(_, p)| p).collect(),
                    );
                }
                None => {
                    empty_researchers.push(r.researcher_id.clone());
                    per_researcher.insert(r.researcher_id.clone(), Vec::new());
                }
            }
        }
        if let Some((researcher, _)) = by_researcher.into_iter().next() {
            return Err(artifact_err(
                path,
                format!("selection references researcher '{researcher}' not in the corpus"),
            ));
        }
        empty_researchers.sort();
        out.insert(
            indicator,
            SelectionSet {
                indicator,
                k,
                per_researcher,
                empty_researchers,
            },
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// report.json and flat tables
// ---------------------------------------------------------------------------

pub fn write_report_json(report: &EvaluationReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| artifact_err(path, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

const DIFF_COLUMNS: [&str; 13] = [
    "n",
    "pearson",
    "spearman",
    "mean_abs_diff",
    "median_abs_diff",
    "mode_bucket",
    "mode_share",
    "std_dev",
    "kurtosis",
    "skewness",
    "min",
    "max",
    "pair",
];

fn diff_record(prefix: &[String], stats: &DiffStats, pair: &str) -> Vec<String> {
    let mut rec = prefix.to_vec();
    rec.extend([
        stats.n.to_string(),
        fmt_opt(stats.pearson),
        fmt_opt(stats.spearman),
        fmt_f64(stats.mean_abs_diff),
        fmt_f64(stats.median_abs_diff),
        format!("{}-{}", stats.mode_bucket.lo, stats.mode_bucket.hi),
        fmt_f64(stats.mode_bucket.share),
        fmt_opt(stats.std_dev),
        fmt_opt(stats.kurtosis),
        fmt_opt(stats.skewness),
        fmt_f64(stats.min),
        fmt_f64(stats.max),
        pair.to_string(),
    ]);
    rec
}

/// Writes the flat CSV tables next to report.json.
pub fn write_report_tables(report: &EvaluationReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("diffstats_overall.csv"))?;
    let mut header = vec!["basis"];
    header.extend(DIFF_COLUMNS);
    w.write_record(&header)?;
    for (basis, pair) in [
        ("analysis_rows", &report.overall),
        ("authorship_rows", &report.overall_authorship),
    ] {
        w.write_record(diff_record(&[basis.to_string()], &pair.cj_vs_clong, "C-J_vs_C_long"))?;
        w.write_record(diff_record(
            &[basis.to_string()],
            &pair.cshort_vs_clong,
            "C_short_vs_C_long",
        ))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("diffstats_by_year.csv"))?;
    let mut header = vec!["year"];
    header.extend(DIFF_COLUMNS);
    w.write_record(&header)?;
    for row in &report.by_year {
        let prefix = vec![row.year.to_string()];
        w.write_record(diff_record(&prefix, &row.stats.cj_vs_clong, "C-J_vs_C_long"))?;
        w.write_record(diff_record(&prefix, &row.stats.cshort_vs_clong, "C_short_vs_C_long"))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("diffstats_by_panel.csv"))?;
    let mut header = vec!["panel_id"];
    header.extend(DIFF_COLUMNS);
    w.write_record(&header)?;
    for row in &report.by_panel {
        let prefix = vec![row.panel_id.clone()];
        w.write_record(diff_record(&prefix, &row.stats.cj_vs_clong, "C-J_vs_C_long"))?;
        w.write_record(diff_record(&prefix, &row.stats.cshort_vs_clong, "C_short_vs_C_long"))?;
    }
    w.flush()?;

    for (name, matrix) in [
        ("confusion_all_cshort.csv", &report.confusion_all_cshort),
        ("confusion_all_cj.csv", &report.confusion_all_cj),
        ("confusion_best_cshort.csv", &report.confusion_best_cshort),
        ("confusion_best_cj.csv", &report.confusion_best_cj),
    ] {
        write_confusion(matrix, &dir.join(name))?;
    }

    let mut w = csv::Writer::from_path(dir.join("grading_shares.csv"))?;
    let mut header = vec!["row".to_string()];
    header.extend(report.shares.columns.iter().map(|c| c.label.clone()));
    w.write_record(&header)?;
    for (label, pick) in [
        ("n", None),
        ("correct_pct", Some(0usize)),
        ("overgrading_pct", Some(1)),
        ("undergrading_pct", Some(2)),
    ] {
        let mut rec = vec![label.to_string()];
        for col in &report.shares.columns {
            rec.push(match pick {
                None => col.n.to_string(),
                Some(0) => fmt_f64(col.correct_pct),
                Some(1) => fmt_f64(col.over_pct),
                _ => fmt_f64(col.under_pct),
            });
        }
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("intersections.csv"))?;
    w.write_record(["panel_id", "selected", "cj_vs_clong", "cshort_vs_clong"])?;
    for row in report
        .intersections
        .per_panel
        .iter()
        .chain(std::iter::once(&report.intersections.total))
    {
        w.write_record([
            row.panel_id.as_str(),
            &row.selected.to_string(),
            &fmt_opt(row.cj_vs_clong),
            &fmt_opt(row.cshort_vs_clong),
        ])?;
    }
    w.flush()?;

    Ok(())
}

fn write_confusion(m: &ConfusionSummary, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["predictor", "A", "B", "C", "D", "E"])?;
    for (i, letter) in ["A", "B", "C", "D", "E"].iter().enumerate() {
        let mut rec = vec![letter.to_string()];
        rec.extend(m.counts[i].iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_researcher_report(rows: &[ResearcherReportRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pub_id", "c_long", "cj_minus_clong", "cshort_minus_clong"])?;
    for r in rows {
        w.write_record([
            r.pub_id.as_str(),
            &fmt_f64(r.c_long),
            &fmt_f64(r.cj_minus_clong),
            &fmt_f64(r.cshort_minus_clong),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::Grade;

    #[test]
    fn float_formatting_round_trips_exactly() {
        for v in [62.5, 100.0 * 2.5 / 4.0, 1.0 / 3.0, 170.0 / 2.7, 0.0, 99.999] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn scores_round_trip() {
        let table = ScoreTable {
            short_census: "short".into(),
            long_census: "long".into(),
            rows: vec![ScoreRow {
                pub_id: "P1".into(),
                panel_id: "8a".into(),
                year: 2012,
                slope: -0.9,
                c_short: 62.5,
                c_long: 70.0,
                j_percentile: 1.0 / 3.0 * 100.0,
                cj: 55.25,
            }],
            issues: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        write_scores(&table, &path).unwrap();
        let back = read_scores(&path).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn grades_round_trip() {
        let table = GradeTable {
            rows: vec![GradedRow {
                pub_id: "P1".into(),
                panel_id: "2".into(),
                indicator: Indicator::CJ,
                value: 77.125,
                world_percentile: 90.0,
                grade: Grade::A,
                peer_flag: true,
            }],
            issues: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grades.csv");
        write_grades(&table, &path).unwrap();
        let back = read_grades(&path).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_scores(&path), Err(Error::Artifact { .. })));
    }
}
