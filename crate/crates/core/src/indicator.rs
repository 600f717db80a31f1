//! The combined citation/journal indicator and per-panel slope configuration.
//!
//! Grading thresholds in the (J, C) plane are straight lines of slope `a`
//! (one slope per panel and year). Collapsing the line family to a score
//! gives
//!
//! ```text
//! score = (C - a*J) / (1 - a) = 1/(1-a) * C + (-a)/(1-a) * J
//! ```
//!
//! a convex combination of the two percentiles for a <= 0: the weights are
//! non-negative and sum to one, the score is increasing in both C and J, and
//! two points score equally exactly when they lie on one threshold line.
//! Slopes must satisfy a < 1; a = 0 reduces the score to the citation
//! percentile alone.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use crate::corpus::{panel_order_key, Corpus};
use crate::error::{Error, Result};
use crate::grading::{CornerBounds, GradeCutoffs};
use crate::percentile::PercentileTable;

/// The two indicator weights derived from a threshold-line slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub on_c: f64,
    pub on_j: f64,
}

/// Weights 1/(1-a) on C and -a/(1-a) on J; requires a < 1.
pub fn weights(slope: f64) -> Result<Weights> {
    if !(slope < 1.0) || !slope.is_finite() {
        return Err(Error::InvalidSlope(slope));
    }
    Ok(Weights {
        on_c: 1.0 / (1.0 - slope),
        on_j: -slope / (1.0 - slope),
    })
}

/// One scored (C, J) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedScore {
    pub c_percentile: f64,
    pub j_percentile: f64,
    pub slope: f64,
    pub weight_on_c: f64,
    pub weight_on_j: f64,
    pub value: f64,
}

/// Scores a (C, J) percentile pair under threshold slope `a`.
pub fn combined_score(c_percentile: f64, j_percentile: f64, slope: f64) -> Result<CombinedScore> {
    for p in [c_percentile, j_percentile] {
        if !(0.0..=100.0).contains(&p) || !p.is_finite() {
            return Err(Error::PercentileOutOfRange(p));
        }
    }
    let w = weights(slope)?;
    Ok(CombinedScore {
        c_percentile,
        j_percentile,
        slope,
        weight_on_c: w.on_c,
        weight_on_j: w.on_j,
        value: combine(c_percentile, j_percentile, slope),
    })
}

/// The bare scoring formula; inputs are assumed validated. Kept as a single
/// expression so every call site produces bit-identical values.
pub(crate) fn combine(c: f64, j: f64, slope: f64) -> f64 {
    (c - slope * j) / (1.0 - slope)
}

// ---------------------------------------------------------------------------
// Panel configuration
// ---------------------------------------------------------------------------

/// One panel's evaluation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelConfig {
    pub panel_id: String,
    pub name: Option<String>,
    /// Threshold-line slope per publication year.
    pub slopes: BTreeMap<i32, f64>,
    pub grading: GradeCutoffs,
    pub corners: CornerBounds,
}

/// All configured panels, keyed by panel id.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSet {
    panels: BTreeMap<String, PanelConfig>,
}

/// The slopes used in the 2011-2014 Italian assessment exercise, by panel
/// (GEV) and publication year, as published by the panels themselves.
const DEFAULT_SLOPES: &[(&str, &str, [f64; 3])] = &[
    ("1", "Mathematics and computer science", [-1.1, -1.4, -1.7]),
    ("2", "Physics", [-0.4, -0.6, -0.9]),
    ("3", "Chemistry", [-0.4, -0.6, -0.8]),
    ("4", "Earth sciences", [-0.4, -0.6, -0.9]),
    ("5", "Biology", [-0.4, -0.6, -0.8]),
    ("6", "Medicine", [-0.4, -0.6, -0.8]),
    ("7", "Agricultural and veterinary sciences", [-0.7, -0.9, -1.5]),
    ("8a", "Civil engineering", [-0.6, -0.9, -1.5]),
    ("8b", "Architecture", [-0.7, -0.9, -1.5]),
    ("9", "Industrial and information engineering", [-0.4, -0.6, -0.9]),
    ("11b", "Psychology", [-0.4, -0.6, -1.0]),
];

const DEFAULT_YEARS: [i32; 3] = [2011, 2012, 2013];

impl PanelSet {
    pub fn new(panels: Vec<PanelConfig>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for panel in panels {
            if panel.panel_id.is_empty() {
                return Err(Error::Config("empty panel id".into()));
            }
            for (&year, &slope) in &panel.slopes {
                if !(slope < 1.0) || !slope.is_finite() {
                    return Err(Error::Config(format!(
                        "panel '{}' year {year}: slope {slope} must be finite and < 1",
                        panel.panel_id
                    )));
                }
            }
            panel.grading.validate()?;
            panel.corners.validate()?;
            if map.insert(panel.panel_id.clone(), panel).is_some() {
                return Err(Error::Config("duplicate panel id".into()));
            }
        }
        Ok(PanelSet { panels: map })
    }

    /// The built-in default: the published per-panel slopes for 2011-2013
    /// with standard grading cutoffs and corner bounds.
    pub fn builtin_default() -> Self {
        let panels = DEFAULT_SLOPES
            .iter()
            .map(|(id, name, slopes)| PanelConfig {
                panel_id: id.to_string(),
                name: Some(name.to_string()),
                slopes: DEFAULT_YEARS.iter().copied().zip(slopes.iter().copied()).collect(),
                grading: GradeCutoffs::default(),
                corners: CornerBounds::default(),
            })
            .collect();
        PanelSet::new(panels).expect("builtin defaults are valid")
    }

    pub fn get(&self, panel_id: &str) -> Result<&PanelConfig> {
        self.panels
            .get(panel_id)
            .ok_or_else(|| Error::UnknownPanel(panel_id.to_string()))
    }

    pub fn slope(&self, panel_id: &str, year: i32) -> Result<f64> {
        let panel = self.get(panel_id)?;
        panel.slopes.get(&year).copied().ok_or(Error::MissingSlope {
            panel_id: panel_id.to_string(),
            year,
        })
    }

    pub fn panel_ids(&self) -> BTreeSet<String> {
        self.panels.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PanelConfig> {
        self.panels.values()
    }

    /// Returns a copy with every slope replaced by `slope`.
    pub fn with_uniform_slope(&self, slope: f64) -> Self {
        let mut out = self.clone();
        for panel in out.panels.values_mut() {
            for v in panel.slopes.values_mut() {
                *v = slope;
            }
        }
        out
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: PanelsFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("panels file: {e}")))?;
        let default_grading = match &file.grading {
            Some(g) => g.to_cutoffs()?,
            None => GradeCutoffs::default(),
        };
        let default_corners = match &file.corners {
            Some(c) => c.to_bounds(),
            None => CornerBounds::default(),
        };
        let mut panels = Vec::new();
        for (id, spec) in file.panels {
            let mut slopes = BTreeMap::new();
            for (year_key, slope) in spec.slopes {
                let year: i32 = year_key.parse().map_err(|_| {
                    Error::Config(format!("panel '{id}': year key '{year_key}' is not an integer"))
                })?;
                slopes.insert(year, slope);
            }
            panels.push(PanelConfig {
                panel_id: id,
                name: spec.name,
                slopes,
                grading: match &spec.grading {
                    Some(g) => g.to_cutoffs()?,
                    None => default_grading,
                },
                corners: match &spec.corners {
                    Some(c) => c.to_bounds(),
                    None => default_corners,
                },
            });
        }
        PanelSet::new(panels)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Artifact {
            file: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Deserialize)]
struct PanelsFile {
    grading: Option<GradingToml>,
    corners: Option<CornersToml>,
    panels: BTreeMap<String, PanelToml>,
}

#[derive(Debug, Deserialize)]
struct PanelToml {
    name: Option<String>,
    slopes: BTreeMap<String, f64>,
    grading: Option<GradingToml>,
    corners: Option<CornersToml>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct GradingToml {
    a_min: f64,
    b_min: f64,
    c_min: f64,
    d_min: f64,
}

impl GradingToml {
    fn to_cutoffs(self) -> Result<GradeCutoffs> {
        let cutoffs = GradeCutoffs {
            a_min: self.a_min,
            b_min: self.b_min,
            c_min: self.c_min,
            d_min: self.d_min,
        };
        cutoffs.validate()?;
        Ok(cutoffs)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct CornersToml {
    high_c_min: f64,
    low_j_max: f64,
    low_c_max: f64,
    high_j_min: f64,
}

impl CornersToml {
    fn to_bounds(self) -> CornerBounds {
        CornerBounds {
            high_c_min: self.high_c_min,
            low_j_max: self.low_j_max,
            low_c_max: self.low_c_max,
            high_j_min: self.high_j_min,
        }
    }
}

// ---------------------------------------------------------------------------
// Corpus scoring
// ---------------------------------------------------------------------------

/// One analysis row: a publication under one panel's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub pub_id: String,
    pub panel_id: String,
    pub year: i32,
    pub slope: f64,
    pub c_short: f64,
    pub c_long: f64,
    pub j_percentile: f64,
    pub cj: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreIssue {
    pub pub_id: String,
    pub panel_id: String,
    pub message: String,
}

/// Scored analysis rows: one per (publication, panel) pair, so a publication
/// co-authored across panels is scored once per panel while co-authors within
/// one panel contribute a single row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub short_census: String,
    pub long_census: String,
    pub rows: Vec<ScoreRow>,
    pub issues: Vec<ScoreIssue>,
}

impl ScoreTable {
    pub fn row(&self, pub_id: &str, panel_id: &str) -> Option<&ScoreRow> {
        let key = (pub_id, panel_order_key(panel_id));
        self.rows
            .binary_search_by(|r| {
                (r.pub_id.as_str(), panel_order_key(&r.panel_id)).cmp(&key)
            })
            .ok()
            .map(|i| &self.rows[i])
    }
}

/// Builds the score table from percentile tables at the short and long
/// censuses. Publications with undefined percentiles become issues; a
/// missing slope for a (panel, year) actually in use is a hard error.
pub fn score_corpus(
    corpus: &Corpus,
    short_table: &PercentileTable,
    long_table: &PercentileTable,
    panels: &PanelSet,
) -> Result<ScoreTable> {
    let short_idx = corpus.census_index(&short_table.census_label)?;
    let long_idx = corpus.census_index(&long_table.census_label)?;
    if short_idx >= long_idx {
        return Err(Error::InvalidCorpus(format!(
            "short census '{}' must precede long census '{}'",
            short_table.census_label, long_table.census_label
        )));
    }

    let short_map: BTreeMap<&str, (f64, f64)> = short_table
        .rows
        .iter()
        .map(|r| (r.pub_id.as_str(), (r.c_percentile, r.j_percentile)))
        .collect();
    let long_map: BTreeMap<&str, (f64, f64)> = long_table
        .rows
        .iter()
        .map(|r| (r.pub_id.as_str(), (r.c_percentile, r.j_percentile)))
        .collect();

    let mut rows = Vec::new();
    let mut issues = Vec::new();
    for (pub_id, panel_id) in corpus.analysis_pairs() {
        let publication = corpus.publication(&pub_id)?;
        let slope = panels.slope(&panel_id, publication.year)?;
        let (Some(&(c_short, j_short)), Some(&(c_long, _))) =
            (short_map.get(pub_id.as_str()), long_map.get(pub_id.as_str()))
        else {
            issues.push(ScoreIssue {
                pub_id,
                panel_id,
                message: "undefined percentile at one or both censuses".into(),
            });
            continue;
        };
        rows.push(ScoreRow {
            cj: combine(c_short, j_short, slope),
            pub_id,
            panel_id,
            year: publication.year,
            slope,
            c_short,
            c_long,
            j_percentile: j_short,
        });
    }
    rows.sort_by(|a, b| {
        (a.pub_id.as_str(), panel_order_key(&a.panel_id))
            .cmp(&(b.pub_id.as_str(), panel_order_key(&b.panel_id)))
    });
    Ok(ScoreTable {
        short_census: short_table.census_label.clone(),
        long_census: long_table.census_label.clone(),
        rows,
        issues,
    })
}
