//! Five-region A-E grading of scored publications, with peer-review corner
//! flagging.
//!
//! A publication's indicator value is first converted to a world percentile:
//! the mid-rank percentile of that value among the indicator values of every
//! publication (reference corpus included) in the publication's most
//! favorable (year, category) stratum. Grade regions then cut the percentile
//! axis at 90/70/50/20, so over a tie-free reference population the five
//! regions hold exactly the top 10%, next 20%, next 20%, next 30%, and
//! bottom 20%. The same machinery grades by C_short, C_long, or C-J, which
//! puts the three indicators on identical footing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{panel_order_key, Corpus};
use crate::error::{Error, Result};
use crate::indicator::{combine, PanelSet, ScoreTable};
use crate::percentile::{midrank_member_f64, PercentileEngine};

/// Grade letter with its fixed score and label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
    E,
}

impl Grade {
    pub const ALL: [Grade; 5] = [Grade::A, Grade::B, Grade::C, Grade::D, Grade::E];

    pub fn score(self) -> f64 {
        match self {
            Grade::A => 1.0,
            Grade::B => 0.7,
            Grade::C => 0.4,
            Grade::D => 0.1,
            Grade::E => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Grade::A => "Excellent",
            Grade::B => "Good",
            Grade::C => "Adequate",
            Grade::D => "Poor",
            Grade::E => "Very poor",
        }
    }

    /// Position in the ordering A > B > C > D > E (A = 0).
    pub fn rank(self) -> usize {
        match self {
            Grade::A => 0,
            Grade::B => 1,
            Grade::C => 2,
            Grade::D => 3,
            Grade::E => 4,
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Grade::A => "A",
            Grade::B => "B",
            Grade::C => "C",
            Grade::D => "D",
            Grade::E => "E",
        };
        f.write_str(c)
    }
}

impl FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Grade::A),
            "B" => Ok(Grade::B),
            "C" => Ok(Grade::C),
            "D" => Ok(Grade::D),
            "E" => Ok(Grade::E),
            other => Err(Error::Config(format!("unknown grade '{other}'"))),
        }
    }
}

/// Lower percentile bounds of regions A-D (E takes the rest). Boundaries
/// are inclusive upward: percentile exactly 90 grades A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradeCutoffs {
    pub a_min: f64,
    pub b_min: f64,
    pub c_min: f64,
    pub d_min: f64,
}

impl Default for GradeCutoffs {
    fn default() -> Self {
        GradeCutoffs {
            a_min: 90.0,
            b_min: 70.0,
            c_min: 50.0,
            d_min: 20.0,
        }
    }
}

impl GradeCutoffs {
    pub fn validate(&self) -> Result<()> {
        let c = [self.a_min, self.b_min, self.c_min, self.d_min];
        if c.iter().any(|v| !v.is_finite() || *v <= 0.0 || *v > 100.0) {
            return Err(Error::Config(format!("grade cutoffs out of (0, 100]: {c:?}")));
        }
        if !(self.a_min > self.b_min && self.b_min > self.c_min && self.c_min > self.d_min) {
            return Err(Error::Config(format!(
                "grade cutoffs must strictly decrease: {c:?}"
            )));
        }
        Ok(())
    }
}

/// Grades a world percentile.
pub fn grade(percentile: f64, cutoffs: &GradeCutoffs) -> Result<Grade> {
    if !(0.0..=100.0).contains(&percentile) || !percentile.is_finite() {
        return Err(Error::PercentileOutOfRange(percentile));
    }
    Ok(if percentile >= cutoffs.a_min {
        Grade::A
    } else if percentile >= cutoffs.b_min {
        Grade::B
    } else if percentile >= cutoffs.c_min {
        Grade::C
    } else if percentile >= cutoffs.d_min {
        Grade::D
    } else {
        Grade::E
    })
}

/// Extents of the two peer-review corner regions in the (C, J) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerBounds {
    /// Top-left corner: C >= high_c_min and J <= low_j_max.
    pub high_c_min: f64,
    pub low_j_max: f64,
    /// Bottom-right corner: C <= low_c_max and J >= high_j_min.
    pub low_c_max: f64,
    pub high_j_min: f64,
}

impl Default for CornerBounds {
    fn default() -> Self {
        CornerBounds {
            high_c_min: 90.0,
            low_j_max: 20.0,
            low_c_max: 20.0,
            high_j_min: 90.0,
        }
    }
}

impl CornerBounds {
    pub fn validate(&self) -> Result<()> {
        let v = [self.high_c_min, self.low_j_max, self.low_c_max, self.high_j_min];
        if v.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > 100.0) {
            return Err(Error::Config(format!("corner bounds out of [0, 100]: {v:?}")));
        }
        Ok(())
    }
}

/// True when (C, J) lies in either corner where the metrics disagree so
/// strongly that the exercise routed the publication to informed peer
/// review. The flag is advisory; flagged publications keep their grade.
pub fn flag_peer_review_corners(c_percentile: f64, j_percentile: f64, bounds: &CornerBounds) -> bool {
    (c_percentile >= bounds.high_c_min && j_percentile <= bounds.low_j_max)
        || (c_percentile <= bounds.low_c_max && j_percentile >= bounds.high_j_min)
}

/// The three indicators graded and compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Indicator {
    /// Citation percentile at the short census.
    CShort,
    /// Citation percentile at the long census (the benchmark).
    CLong,
    /// Combined citation/journal score at the short census.
    CJ,
}

impl Indicator {
    pub const ALL: [Indicator; 3] = [Indicator::CShort, Indicator::CLong, Indicator::CJ];

    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::CShort => "C_short",
            Indicator::CLong => "C_long",
            Indicator::CJ => "C-J",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C_short" | "cshort" | "c_short" => Ok(Indicator::CShort),
            "C_long" | "clong" | "c_long" => Ok(Indicator::CLong),
            "C-J" | "cj" | "c-j" => Ok(Indicator::CJ),
            other => Err(Error::Config(format!(
                "unknown indicator '{other}' (expected cshort, clong, or cj)"
            ))),
        }
    }
}

/// One graded (publication, panel, indicator) row.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedRow {
    pub pub_id: String,
    pub panel_id: String,
    pub indicator: Indicator,
    pub value: f64,
    pub world_percentile: f64,
    pub grade: Grade,
    pub peer_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradeIssue {
    pub pub_id: String,
    pub panel_id: String,
    pub indicator: Indicator,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradeTable {
    pub rows: Vec<GradedRow>,
    pub issues: Vec<GradeIssue>,
}

impl GradeTable {
    /// Lookup map keyed by (pub_id, panel_id) for one indicator.
    pub fn by_pub_panel(&self, indicator: Indicator) -> BTreeMap<(&str, &str), &GradedRow> {
        self.rows
            .iter()
            .filter(|r| r.indicator == indicator)
            .map(|r| ((r.pub_id.as_str(), r.panel_id.as_str()), r))
            .collect()
    }
}

/// World reference distributions of indicator values, per stratum.
///
/// For C_short and C_long the distribution of a (year, category) stratum is
/// one sorted list. The C-J distribution additionally depends on the slope,
/// so it is keyed by panel and built for the (panel, stratum) pairs in use.
pub struct ReferenceDistributions {
    cshort: BTreeMap<(i32, String), Vec<f64>>,
    clong: BTreeMap<(i32, String), Vec<f64>>,
    cj: BTreeMap<(String, i32, String), Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
struct PubPercentiles {
    c_short: Option<f64>,
    c_long: Option<f64>,
    j: Option<f64>,
}

impl ReferenceDistributions {
    /// Builds distributions for every stratum, plus C-J distributions for
    /// every (panel, year) slope that `scores` actually uses.
    pub fn build(
        corpus: &Corpus,
        engine: &PercentileEngine,
        scores: &ScoreTable,
        panels: &PanelSet,
    ) -> Result<Self> {
        let short_rows = engine.full_percentiles(&scores.short_census)?;
        let long_rows = engine.full_percentiles(&scores.long_census)?;
        let per_pub: Vec<PubPercentiles> = short_rows
            .iter()
            .zip(&long_rows)
            .map(|(s, l)| PubPercentiles {
                c_short: s.c_percentile,
                c_long: l.c_percentile,
                j: s.j_percentile,
            })
            .collect();

        let mut cshort: BTreeMap<(i32, String), Vec<f64>> = BTreeMap::new();
        let mut clong: BTreeMap<(i32, String), Vec<f64>> = BTreeMap::new();
        for (idx, p) in corpus.publications().iter().enumerate() {
            for cat in &p.subject_categories {
                let key = (p.year, cat.clone());
                if let Some(v) = per_pub[idx].c_short {
                    cshort.entry(key.clone()).or_default().push(v);
                }
                if let Some(v) = per_pub[idx].c_long {
                    clong.entry(key).or_default().push(v);
                }
            }
        }

        // Panels in use, with the slopes validated up front.
        let mut panel_slopes: BTreeMap<(String, i32), f64> = BTreeMap::new();
        for row in &scores.rows {
            panel_slopes
                .entry((row.panel_id.clone(), row.year))
                .or_insert(panels.slope(&row.panel_id, row.year)?);
        }
        let mut cj: BTreeMap<(String, i32, String), Vec<f64>> = BTreeMap::new();
        let wanted: BTreeSet<&str> = panel_slopes.keys().map(|(p, _)| p.as_str()).collect();
        for panel_id in wanted {
            for (idx, p) in corpus.publications().iter().enumerate() {
                let Some(&slope) = panel_slopes.get(&(panel_id.to_string(), p.year)) else {
                    continue;
                };
                let (Some(c), Some(j)) = (per_pub[idx].c_short, per_pub[idx].j) else {
                    continue;
                };
                let value = combine(c, j, slope);
                for cat in &p.subject_categories {
                    cj.entry((panel_id.to_string(), p.year, cat.clone()))
                        .or_default()
                        .push(value);
                }
            }
        }

        for values in cshort.values_mut().chain(clong.values_mut()).chain(cj.values_mut()) {
            values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite percentiles"));
        }

        Ok(ReferenceDistributions { cshort, clong, cj })
    }

    /// World percentile of `value` for the publication's most favorable
    /// stratum under `indicator` (and `panel_id` for C-J).
    fn world_percentile(
        &self,
        corpus: &Corpus,
        pub_id: &str,
        panel_id: &str,
        indicator: Indicator,
        value: f64,
    ) -> Result<f64> {
        let publication = corpus.publication(pub_id)?;
        let mut best: Option<f64> = None;
        for cat in &publication.subject_categories {
            let sorted = match indicator {
                Indicator::CShort => self.cshort.get(&(publication.year, cat.clone())),
                Indicator::CLong => self.clong.get(&(publication.year, cat.clone())),
                Indicator::CJ => {
                    self.cj
                        .get(&(panel_id.to_string(), publication.year, cat.clone()))
                }
            };
            if let Some(pct) = sorted.and_then(|s| midrank_member_f64(s, value)) {
                if best.map_or(true, |b| pct > b) {
                    best = Some(pct);
                }
            }
        }
        best.ok_or_else(|| Error::UndefinedPercentile {
            kind: "publication",
            id: pub_id.to_string(),
            detail: format!("no non-trivial reference distribution for {indicator}"),
        })
    }
}

/// Grades every score row under the requested indicators. The indicator
/// value (citation percentile or combined score) is converted to a world
/// percentile against the reference distribution, then graded with the
/// panel's cutoffs. Peer-review corners are flagged from the (C, J) pair at
/// the indicator's census.
pub fn grade_corpus(
    corpus: &Corpus,
    scores: &ScoreTable,
    refdist: &ReferenceDistributions,
    panels: &PanelSet,
    indicators: &[Indicator],
) -> Result<GradeTable> {
    let mut rows = Vec::new();
    let mut issues = Vec::new();

    for &indicator in indicators {
        let outcomes: Vec<std::result::Result<GradedRow, GradeIssue>> = scores
            .rows
            .par_iter()
            .map(|row| {
                let value = match indicator {
                    Indicator::CShort => row.c_short,
                    Indicator::CLong => row.c_long,
                    Indicator::CJ => row.cj,
                };
                let panel = panels.get(&row.panel_id).map_err(|e| GradeIssue {
                    pub_id: row.pub_id.clone(),
                    panel_id: row.panel_id.clone(),
                    indicator,
                    message: e.to_string(),
                })?;
                let world = refdist
                    .world_percentile(corpus, &row.pub_id, &row.panel_id, indicator, value)
                    .map_err(|e| GradeIssue {
                        pub_id: row.pub_id.clone(),
                        panel_id: row.panel_id.clone(),
                        indicator,
                        message: e.to_string(),
                    })?;
                let letter = grade(world, &panel.grading).map_err(|e| GradeIssue {
                    pub_id: row.pub_id.clone(),
                    panel_id: row.panel_id.clone(),
                    indicator,
                    message: e.to_string(),
                })?;
                let c_basis = match indicator {
                    Indicator::CLong => row.c_long,
                    _ => row.c_short,
                };
                Ok(GradedRow {
                    pub_id: row.pub_id.clone(),
                    panel_id: row.panel_id.clone(),
                    indicator,
                    value,
                    world_percentile: world,
                    grade: letter,
                    peer_flag: flag_peer_review_corners(c_basis, row.j_percentile, &panel.corners),
                })
            })
            .collect();
        for outcome in outcomes {
            match outcome {
                Ok(row) => rows.push(row),
                Err(issue) => issues.push(issue),
            }
        }
    }

    rows.sort_by(|a, b| {
        (a.indicator, a.pub_id.as_str(), panel_order_key(&a.panel_id)).cmp(&(
            b.indicator,
            b.pub_id.as_str(),
            panel_order_key(&b.panel_id),
        ))
    });
    Ok(GradeTable { rows, issues })
}
