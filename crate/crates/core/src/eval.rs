//! Predictive-power comparison of the short-window indicators against the
//! long-window citation benchmark: correlations, difference distributions,
//! confusion matrices, grading-accuracy shares, and per-researcher reports.
//!
//! Two row bases appear throughout. Correlation and difference tables use
//! analysis rows, one per (publication, panel) with cross-panel duplicates
//! retained. Confusion matrices and best-k shares use authorship rows, one
//! per (researcher, publication). The overall difference statistics are
//! reported on both bases, labeled.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::grading::{Grade, GradeTable, Indicator};
use crate::indicator::ScoreTable;
use crate::selection::{authorship_rows, intersection_ratio, SelectionSet};
use crate::stats::{pearson, spearman, Moments};

/// The width-10 interval [lo, hi) holding the largest share of |differences|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeBucket {
    pub lo: u32,
    pub hi: u32,
    /// Frequency share in (0, 1].
    pub share: f64,
}

/// Correlations plus descriptive statistics of d = |predictor - benchmark|.
///
/// Kurtosis is sample excess kurtosis and skewness the adjusted
/// Fisher-Pearson coefficient; both are `None` below four observations.
/// Correlations are `None` when either side has zero variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffStats {
    pub n: u64,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub mean_abs_diff: f64,
    pub median_abs_diff: f64,
    pub mode_bucket: ModeBucket,
    pub std_dev: Option<f64>,
    pub kurtosis: Option<f64>,
    pub skewness: Option<f64>,
    pub min: f64,
    pub max: f64,
}

/// Computes [`DiffStats`] over paired percentile-scale values in [0, 100].
pub fn diff_stats(predictor: &[f64], benchmark: &[f64]) -> Result<DiffStats> {
    if predictor.len() != benchmark.len() {
        return Err(Error::LengthMismatch {
            left: predictor.len(),
            right: benchmark.len(),
        });
    }
    if predictor.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    for &v in predictor.iter().chain(benchmark) {
        if !(0.0..=100.0).contains(&v) || !v.is_finite() {
            return Err(Error::PercentileOutOfRange(v));
        }
    }

    let relaxed = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroVariance(_)) | Err(Error::TooFewObservations { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let pearson = relaxed(pearson(predictor, benchmark))?;
    let spearman = relaxed(spearman(predictor, benchmark))?;

    let mut diffs: Vec<f64> = predictor
        .iter()
        .zip(benchmark)
        .map(|(p, b)| (p - b).abs())
        .collect();
    let mut moments = Moments::new();
    // Buckets [0,10), [10,20), ..., [90,100), plus [100,110) which can only
    // hold d = 100 exactly.
    let mut buckets = [0u64; 11];
    for &d in &diffs {
        moments.push(d);
        buckets[(d / 10.0).floor() as usize] += 1;
    }
    diffs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite diffs"));
    let n = diffs.len();
    let median = if n % 2 == 1 {
        diffs[n / 2]
    } else {
        (diffs[n / 2 - 1] + diffs[n / 2]) / 2.0
    };
    // Lowest bucket wins ties, deterministically.
    let mode_idx = (0..buckets.len()).max_by_key(|&i| (buckets[i], buckets.len() - i)).unwrap();

    Ok(DiffStats {
        n: n as u64,
        pearson,
        spearman,
        mean_abs_diff: moments.mean(),
        median_abs_diff: median,
        mode_bucket: ModeBucket {
            lo: mode_idx as u32 * 10,
            hi: mode_idx as u32 * 10 + 10,
            share: buckets[mode_idx] as f64 / n as f64,
        },
        std_dev: moments.sample_std(),
        kurtosis: moments.excess_kurtosis(),
        skewness: moments.skewness(),
        min: moments.min(),
        max: moments.max(),
    })
}

// ---------------------------------------------------------------------------
// Confusion matrices
// ---------------------------------------------------------------------------

/// 5x5 grade confusion: rows = predictor grade A..E, columns = benchmark
/// grade A..E. Cells above the main diagonal are overgrading (the predictor
/// grades strictly better than the benchmark), cells below are undergrading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 5]; 5],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        ConfusionMatrix { counts: [[0; 5]; 5] }
    }

    pub fn add(&mut self, predictor: Grade, benchmark: Grade) {
        self.counts[predictor.rank()][benchmark.rank()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct_count(&self) -> u64 {
        (0..5).map(|i| self.counts[i][i]).sum()
    }

    /// Predictor strictly better than the benchmark.
    pub fn over_count(&self) -> u64 {
        let mut sum = 0;
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if j > i {
                    sum += c;
                }
            }
        }
        sum
    }

    pub fn under_count(&self) -> u64 {
        self.total() - self.correct_count() - self.over_count()
    }

    /// (correct, over, under) percentage shares; zeros for an empty matrix.
    pub fn shares(&self) -> (f64, f64, f64) {
        let total = self.total();
        if total == 0 {
            return (0.0, 0.0, 0.0);
        }
        let t = total as f64;
        (
            100.0 * self.correct_count() as f64 / t,
            100.0 * self.over_count() as f64 / t,
            100.0 * self.under_count() as f64 / t,
        )
    }
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        Self::new()
    }
}

/// Counts paired grades over identical rows.
pub fn grade_confusion(predictor: &[Grade], benchmark: &[Grade]) -> Result<ConfusionMatrix> {
    if predictor.len() != benchmark.len() {
        return Err(Error::LengthMismatch {
            left: predictor.len(),
            right: benchmark.len(),
        });
    }
    let mut m = ConfusionMatrix::new();
    for (&p, &b) in predictor.iter().zip(benchmark) {
        m.add(p, b);
    }
    Ok(m)
}

/// Confusion matrix plus its derived counts and shares, as reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionSummary {
    pub counts: [[u64; 5]; 5],
    pub n: u64,
    pub correct: u64,
    pub over: u64,
    pub under: u64,
    pub correct_pct: f64,
    pub over_pct: f64,
    pub under_pct: f64,
}

impl From<&ConfusionMatrix> for ConfusionSummary {
    fn from(m: &ConfusionMatrix) -> Self {
        let (correct_pct, over_pct, under_pct) = m.shares();
        ConfusionSummary {
            counts: m.counts,
            n: m.total(),
            correct: m.correct_count(),
            over: m.over_count(),
            under: m.under_count(),
            correct_pct,
            over_pct,
            under_pct,
        }
    }
}

/// One column of the grading-accuracy share table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareColumn {
    pub label: String,
    pub n: u64,
    pub correct_pct: f64,
    pub over_pct: f64,
    pub under_pct: f64,
}

/// Four-column correct/over/under share table: all publications and best-k
/// subsets, each under C_short and C-J against the C_long benchmark. Every
/// column sums to 100% by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareTable {
    pub columns: Vec<ShareColumn>,
}

pub fn grading_share_table(
    all_cshort: &ConfusionMatrix,
    all_cj: &ConfusionMatrix,
    best_cshort: &ConfusionMatrix,
    best_cj: &ConfusionMatrix,
) -> ShareTable {
    let column = |label: &str, m: &ConfusionMatrix| {
        let (correct_pct, over_pct, under_pct) = m.shares();
        ShareColumn {
            label: label.to_string(),
            n: m.total(),
            correct_pct,
            over_pct,
            under_pct,
        }
    };
    ShareTable {
        columns: vec![
            column("all_C_short", all_cshort),
            column("all_C-J", all_cj),
            column("best_k_C_short", best_cshort),
            column("best_k_C-J", best_cj),
        ],
    }
}

// ---------------------------------------------------------------------------
// Full evaluation report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffPair {
    pub cj_vs_clong: DiffStats,
    pub cshort_vs_clong: DiffStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearBreakdownRow {
    pub year: i32,
    pub n: u64,
    pub stats: DiffPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelBreakdownRow {
    pub panel_id: String,
    pub n: u64,
    pub stats: DiffPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionSummaryRow {
    pub panel_id: String,
    pub selected: u64,
    /// |best-by-C-J intersect best-by-C_long| / |best-by-C-J|.
    pub cj_vs_clong: Option<f64>,
    /// |best-by-C_short intersect best-by-C_long| / |best-by-C_short|.
    pub cshort_vs_clong: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionTable {
    pub per_panel: Vec<IntersectionSummaryRow>,
    pub total: IntersectionSummaryRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub short_census: String,
    pub long_census: String,
    pub k: u32,
    /// (publication, panel) analysis rows.
    pub n_analysis_rows: u64,
    /// (researcher, publication) rows with a scored (pub, panel) pair.
    pub n_authorship_rows: u64,
    /// Difference statistics on analysis rows.
    pub overall: DiffPair,
    /// The same statistics on authorship rows.
    pub overall_authorship: DiffPair,
    pub by_year: Vec<YearBreakdownRow>,
    pub by_panel: Vec<PanelBreakdownRow>,
    pub confusion_all_cshort: ConfusionSummary,
    pub confusion_all_cj: ConfusionSummary,
    pub confusion_best_cshort: ConfusionSummary,
    pub confusion_best_cj: ConfusionSummary,
    pub shares: ShareTable,
    pub intersections: IntersectionTable,
}

fn diff_pair(cshort: &[f64], cj: &[f64], clong: &[f64]) -> Result<DiffPair> {
    Ok(DiffPair {
        cj_vs_clong: diff_stats(cj, clong)?,
        cshort_vs_clong: diff_stats(cshort, clong)?,
    })
}

/// Assembles the full comparison report. `selections` must contain one
/// best-k set per indicator, all built with the same k.
pub fn evaluation_report(
    corpus: &Corpus,
    scores: &ScoreTable,
    grades: &GradeTable,
    selections: &BTreeMap<Indicator, SelectionSet>,
) -> Result<EvaluationReport> {
    if scores.rows.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    for ind in Indicator::ALL {
        if !selections.contains_key(&ind) {
            return Err(Error::IncompatibleSelections(format!(
                "missing best-k selection for {ind}"
            )));
        }
    }
    let k = selections[&Indicator::CShort].k;

    // --- analysis-row (pub, panel) vectors ---
    let cshort: Vec<f64> = scores.rows.iter().map(|r| r.c_short).collect();
    let clong: Vec<f64> = scores.rows.iter().map(|r| r.c_long).collect();
    let cj: Vec<f64> = scores.rows.iter().map(|r| r.cj).collect();
    let overall = diff_pair(&cshort, &cj, &clong)?;

    let mut by_year_groups: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    let mut by_panel_groups: BTreeMap<(u64, String), (String, Vec<usize>)> = BTreeMap::new();
    for (i, row) in scores.rows.iter().enumerate() {
        by_year_groups.entry(row.year).or_default().push(i);
        by_panel_groups
            .entry(crate::corpus::panel_order_key(&row.panel_id))
            .or_insert_with(|| (row.panel_id.clone(), Vec::new()))
            .1
            .push(i);
    }
    let take = |idx: &[usize], v: &[f64]| -> Vec<f64> { idx.iter().map(|&i| v[i]).collect() };
    let mut by_year = Vec::new();
    for (year, idx) in &by_year_groups {
        by_year.push(YearBreakdownRow {
            year: *year,
            n: idx.len() as u64,
            stats: diff_pair(&take(idx, &cshort), &take(idx, &cj), &take(idx, &clong))?,
        });
    }
    let mut by_panel = Vec::new();
    for (_, (panel_id, idx)) in &by_panel_groups {
        by_panel.push(PanelBreakdownRow {
            panel_id: panel_id.clone(),
            n: idx.len() as u64,
            stats: diff_pair(&take(idx, &cshort), &take(idx, &cj), &take(idx, &clong))?,
        });
    }

    // --- authorship-level rows ---
    let grade_cshort = grades.by_pub_panel(Indicator::CShort);
    let grade_clong = grades.by_pub_panel(Indicator::CLong);
    let grade_cj = grades.by_pub_panel(Indicator::CJ);

    let mut auth_cshort = Vec::new();
    let mut auth_clong = Vec::new();
    let mut auth_cj = Vec::new();
    let mut confusion_all_cshort = ConfusionMatrix::new();
    let mut confusion_all_cj = ConfusionMatrix::new();
    for row in authorship_rows(corpus) {
        let key = (row.pub_id.as_str(), row.panel_id.as_str());
        let (Some(gs), Some(gl), Some(gj)) = (
            grade_cshort.get(&key),
            grade_clong.get(&key),
            grade_cj.get(&key),
        ) else {
            continue;
        };
        auth_cshort.push(gs.value);
        auth_clong.push(gl.value);
        auth_cj.push(gj.value);
        confusion_all_cshort.add(gs.grade, gl.grade);
        confusion_all_cj.add(gj.grade, gl.grade);
    }
    if auth_cshort.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    let overall_authorship = diff_pair(&auth_cshort, &auth_cj, &auth_clong)?;
    let n_authorship_rows = auth_cshort.len() as u64;

    // --- best-k confusion: restrict to each predictor's own selection ---
    let mut confusion_best_cshort = ConfusionMatrix::new();
    let mut confusion_best_cj = ConfusionMatrix::new();
    for (indicator, matrix, grade_map) in [
        (Indicator::CShort, &mut confusion_best_cshort, &grade_cshort),
        (Indicator::CJ, &mut confusion_best_cj, &grade_cj),
    ] {
        let selection = &selections[&indicator];
        for (researcher, pubs) in &selection.per_researcher {
            let panel = corpus.researcher(researcher)?.panel_id.clone();
            for p in pubs {
                let key = (p.pub_id.as_str(), panel.as_str());
                let (Some(gp), Some(gl)) = (grade_map.get(&key), grade_clong.get(&key)) else {
                    continue;
                };
                matrix.add(gp.grade, gl.grade);
            }
        }
    }

    let shares = grading_share_table(
        &confusion_all_cshort,
        &confusion_all_cj,
        &confusion_best_cshort,
        &confusion_best_cj,
    );

    // --- best-k intersections against the benchmark selection ---
    let inter_cj = intersection_ratio(
        &selections[&Indicator::CJ],
        &selections[&Indicator::CLong],
        corpus,
    )?;
    let inter_cshort = intersection_ratio(
        &selections[&Indicator::CShort],
        &selections[&Indicator::CLong],
        corpus,
    )?;
    let cj_by_panel: BTreeMap<&str, &crate::selection::IntersectionRow> = inter_cj
        .per_panel
        .iter()
        .map(|r| (r.panel_id.as_str(), r))
        .collect();
    let mut per_panel = Vec::new();
    for row in &inter_cshort.per_panel {
        let cj_row = cj_by_panel.get(row.panel_id.as_str());
        per_panel.push(IntersectionSummaryRow {
            panel_id: row.panel_id.clone(),
            selected: row.selected_a,
            cj_vs_clong: cj_row.and_then(|r| r.ratio),
            cshort_vs_clong: row.ratio,
        });
    }
    let intersections = IntersectionTable {
        per_panel,
        total: IntersectionSummaryRow {
            panel_id: "TOTAL".to_string(),
            selected: inter_cshort.total.selected_a,
            cj_vs_clong: inter_cj.total.ratio,
            cshort_vs_clong: inter_cshort.total.ratio,
        },
    };

    Ok(EvaluationReport {
        short_census: scores.short_census.clone(),
        long_census: scores.long_census.clone(),
        k,
        n_analysis_rows: scores.rows.len() as u64,
        n_authorship_rows,
        overall,
        overall_authorship,
        by_year,
        by_panel,
        confusion_all_cshort: (&confusion_all_cshort).into(),
        confusion_all_cj: (&confusion_all_cj).into(),
        confusion_best_cshort: (&confusion_best_cshort).into(),
        confusion_best_cj: (&confusion_best_cj).into(),
        shares,
        intersections,
    })
}

// ---------------------------------------------------------------------------
// Per-researcher report
// ---------------------------------------------------------------------------

/// One plot-ready row: the benchmark value and the signed shifts of the two
/// short-window indicators from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResearcherReportRow {
    pub pub_id: String,
    pub c_long: f64,
    pub cj_minus_clong: f64,
    pub cshort_minus_clong: f64,
}

/// Rows for every scored publication of one researcher, sorted by
/// descending benchmark value.
pub fn researcher_report(
    corpus: &Corpus,
    scores: &ScoreTable,
    researcher_id: &str,
) -> Result<Vec<ResearcherReportRow>> {
    let researcher = corpus.researcher(researcher_id)?;
    let mut rows = Vec::new();
    for a in corpus.authorships() {
        if a.researcher_id != researcher_id {
            continue;
        }
        let Some(row) = scores.row(&a.pub_id, &researcher.panel_id) else {
            continue;
        };
        rows.push(ResearcherReportRow {
            pub_id: a.pub_id.clone(),
            c_long: row.c_long,
            cj_minus_clong: row.cj - row.c_long,
            cshort_minus_clong: row.c_short - row.c_long,
        });
    }
    rows.sort_by(|a, b| {
        b.c_long
            .partial_cmp(&a.c_long)
            .expect("finite percentiles")
            .then(a.pub_id.cmp(&b.pub_id))
    });
    Ok(rows)
}
