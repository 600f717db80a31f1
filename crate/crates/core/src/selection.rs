//! Best-k publication selection per researcher, authorship-level dedup, and
//! selection-set intersection ratios.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{panel_order_key, Corpus};
use crate::error::{Error, Result};
use crate::grading::Indicator;
use crate::indicator::ScoreTable;

/// One selected publication with its indicator value.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedPub {
    pub pub_id: String,
    pub value: f64,
}

/// Per-researcher best-k selection under one indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSet {
    pub indicator: Indicator,
    pub k: u32,
    /// researcher -> up to k publications, best first.
    pub per_researcher: BTreeMap<String, Vec<SelectedPub>>,
    /// Researchers with no scored publication at all; reported, not an error.
    pub empty_researchers: Vec<String>,
}

impl SelectionSet {
    /// Authorship-level (researcher, pub) pairs of the selection.
    pub fn pairs(&self) -> BTreeSet<(&str, &str)> {
        self.per_researcher
            .iter()
            .flat_map(|(r, pubs)| pubs.iter().map(move |p| (r.as_str(), p.pub_id.as_str())))
            .collect()
    }

    pub fn selected_count(&self) -> u64 {
        self.per_researcher.values().map(|v| v.len() as u64).sum()
    }
}

/// Picks each researcher's top k publications by indicator value.
///
/// Ties break deterministically: higher citation percentile at the
/// indicator's census first, then lexicographic pub_id. Researchers with
/// fewer than k scored publications contribute all of them.
pub fn select_best_k(
    corpus: &Corpus,
    scores: &ScoreTable,
    indicator: Indicator,
    k: u32,
) -> Result<SelectionSet> {
    if k == 0 {
        return Err(Error::InvalidK);
    }

    let mut authored: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for a in corpus.authorships() {
        authored.entry(a.researcher_id.as_str()).or_default().push(a.pub_id.as_str());
    }

    let mut per_researcher = BTreeMap::new();
    let mut empty_researchers = Vec::new();
    for r in corpus.researchers() {
        let mut candidates: Vec<(f64, f64, &str)> = Vec::new();
        if let Some(pubs) = authored.get(r.researcher_id.as_str()) {
            for &pub_id in pubs {
                let Some(row) = scores.row(pub_id, &r.panel_id) else {
                    continue;
                };
                let (value, c_tiebreak) = match indicator {
                    Indicator::CShort => (row.c_short, row.c_short),
                    Indicator::CLong => (row.c_long, row.c_long),
                    Indicator::CJ => (row.cj, row.c_short),
                };
                candidates.push((value, c_tiebreak, pub_id));
            }
        }
        if candidates.is_empty() {
            empty_researchers.push(r.researcher_id.clone());
            per_researcher.insert(r.researcher_id.clone(), Vec::new());
            continue;
        }
        candidates.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .expect("finite indicator values")
                .then(b.1.partial_cmp(&a.1).expect("finite percentiles"))
                .then(a.2.cmp(b.2))
        });
        candidates.truncate(k as usize);
        per_researcher.insert(
            r.researcher_id.clone(),
            candidates
                .into_iter()
                .map(|(value, _, pub_id)| SelectedPub {
                    pub_id: pub_id.to_string(),
                    value,
                })
                .collect(),
        );
    }
    empty_researchers.sort();

    Ok(SelectionSet {
        indicator,
        k,
        per_researcher,
        empty_researchers,
    })
}

/// One authorship joined with the researcher's panel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorshipRow {
    pub researcher_id: String,
    pub pub_id: String,
    pub panel_id: String,
}

/// All authorships with panels attached, sorted by (researcher, pub).
pub fn authorship_rows(corpus: &Corpus) -> Vec<AuthorshipRow> {
    let mut rows: Vec<AuthorshipRow> = corpus
        .authorships()
        .iter()
        .map(|a| {
            let r = corpus.researcher(&a.researcher_id).expect("validated");
            AuthorshipRow {
                researcher_id: a.researcher_id.clone(),
                pub_id: a.pub_id.clone(),
                panel_id: r.panel_id.clone(),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.researcher_id.as_str(), a.pub_id.as_str())
            .cmp(&(b.researcher_id.as_str(), b.pub_id.as_str()))
    });
    rows
}

/// Collapses authorship rows to one row per (publication, panel): double
/// counts within a panel are eliminated, cross-panel co-authorships are
/// kept because each panel applies its own parameters.
pub fn dedup_within_panel(rows: &[AuthorshipRow]) -> Vec<(String, String)> {
    let set: BTreeSet<(&str, &str)> = rows
        .iter()
        .map(|r| (r.pub_id.as_str(), r.panel_id.as_str()))
        .collect();
    set.into_iter()
        .map(|(p, g)| (p.to_string(), g.to_string()))
        .collect()
}

/// Intersection sizes and ratio for one panel (or the total row).
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionRow {
    pub panel_id: String,
    pub selected_a: u64,
    pub selected_b: u64,
    pub shared: u64,
    /// |A intersect B| / |A|; `None` when A is empty.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionReport {
    pub per_panel: Vec<IntersectionRow>,
    pub total: IntersectionRow,
}

/// |A intersect B| / |A| over authorship-level selections, per panel and
/// overall. Both sets must come from the same corpus with the same k.
pub fn intersection_ratio(
    a: &SelectionSet,
    b: &SelectionSet,
    corpus: &Corpus,
) -> Result<IntersectionReport> {
    if a.k != b.k {
        return Err(Error::IncompatibleSelections(format!(
            "k differs: {} vs {}",
            a.k, b.k
        )));
    }
    let researchers_a: BTreeSet<&String> = a.per_researcher.keys().collect();
    let researchers_b: BTreeSet<&String> = b.per_researcher.keys().collect();
    if researchers_a != researchers_b {
        return Err(Error::IncompatibleSelections(
            "researcher sets differ".into(),
        ));
    }

    let pairs_b = b.pairs();
    let mut per_panel: BTreeMap<String, (u64, u64, u64)> = BTreeMap::new();
    let mut total = (0u64, 0u64, 0u64);

    for (researcher, pubs) in &a.per_researcher {
        let panel = corpus.researcher(researcher)?.panel_id.clone();
        let entry = per_panel.entry(panel).or_default();
        for p in pubs {
            entry.0 += 1;
            total.0 += 1;
            if pairs_b.contains(&(researcher.as_str(), p.pub_id.as_str())) {
                entry.2 += 1;
                total.2 += 1;
            }
        }
    }
    for (researcher, pubs) in &b.per_researcher {
        let panel = corpus.researcher(researcher)?.panel_id.clone();
        per_panel.entry(panel).or_default().1 += pubs.len() as u64;
        total.1 += pubs.len() as u64;
    }

    let row = |panel_id: String, (na, nb, shared): (u64, u64, u64)| IntersectionRow {
        panel_id,
        selected_a: na,
        selected_b: nb,
        shared,
        ratio: (na > 0).then(|| shared as f64 / na as f64),
    };
    let mut rows: Vec<IntersectionRow> = per_panel
        .into_iter()
        .map(|(panel, counts)| row(panel, counts))
        .collect();
    rows.sort_by(|a, b| panel_order_key(&a.panel_id).cmp(&panel_order_key(&b.panel_id)));

    Ok(IntersectionReport {
        per_panel: rows,
        total: row("TOTAL".to_string(), total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        Authorship, IngestOptions, JournalMetricEntry, PublicationRecord, Researcher,
    };
    use crate::indicator::ScoreRow;

    fn corpus_with(
        researchers: &[(&str, &str)],
        authorships: &[(&str, &str)],
        pubs: &[&str],
    ) -> Corpus {
        let publications = pubs
            .iter()
            .map(|id| PublicationRecord {
                pub_id: id.to_string(),
                year: 2011,
                subject_categories: vec!["SC1".into()],
                journal_id: "J1".into(),
                reference_only: false,
                citations: vec![1, 2],
            })
            .collect();
        let journals = vec![
            JournalMetricEntry {
                journal_id: "J1".into(),
                year: 2011,
                subject_category: "SC1".into(),
                metric_value: 1.0,
            },
            JournalMetricEntry {
                journal_id: "J2".into(),
                year: 2011,
                subject_category: "SC1".into(),
                metric_value: 2.0,
            },
        ];
        Corpus::new(
            vec!["short".into(), "long".into()],
            publications,
            journals,
            researchers
                .iter()
                .map(|(id, panel)| Researcher {
                    researcher_id: id.to_string(),
                    panel_id: panel.to_string(),
                    institution_id: "I1".into(),
                })
                .collect(),
            authorships
                .iter()
                .map(|(r, p)| Authorship {
                    researcher_id: r.to_string(),
                    pub_id: p.to_string(),
                })
                .collect(),
            &IngestOptions::default(),
        )
        .unwrap()
    }

    fn score_table(rows: &[(&str, &str, f64, f64, f64)]) -> ScoreTable {
        // (pub, panel, c_short, c_long, cj)
        let mut rows: Vec<ScoreRow> = rows
            .iter()
            .map(|(p, g, cs, cl, cj)| ScoreRow {
                pub_id: p.to_string(),
                panel_id: g.to_string(),
                year: 2011,
                slope: -0.4,
                c_short: *cs,
                c_long: *cl,
                j_percentile: 50.0,
                cj: *cj,
            })
            .collect();
        rows.sort_by(|a, b| {
            (a.pub_id.as_str(), panel_order_key(&a.panel_id))
                .cmp(&(b.pub_id.as_str(), panel_order_key(&b.panel_id)))
        });
        ScoreTable {
            short_census: "short".into(),
            long_census: "long".into(),
            rows,
            issues: vec![],
        }
    }

    #[test]
    fn top_two_of_three() {
        let corpus = corpus_with(
            &[("R1", "2")],
            &[("R1", "P1"), ("R1", "P2"), ("R1", "P3")],
            &["P1", "P2", "P3"],
        );
        let scores = score_table(&[
            ("P1", "2", 80.0, 0.0, 0.0),
            ("P2", "2", 60.0, 0.0, 0.0),
            ("P3", "2", 40.0, 0.0, 0.0),
        ]);
        let sel = select_best_k(&corpus, &scores, Indicator::CShort, 2).unwrap();
        let picked: Vec<&str> = sel.per_researcher["R1"].iter().map(|p| p.pub_id.as_str()).collect();
        assert_eq!(picked, vec!["P1", "P2"]);
    }

    #[test]
    fn researcher_with_fewer_than_k_contributes_all() {
        let corpus = corpus_with(&[("R1", "2")], &[("R1", "P1")], &["P1", "P2"]);
        let scores = score_table(&[("P1", "2", 80.0, 0.0, 0.0)]);
        let sel = select_best_k(&corpus, &scores, Indicator::CShort, 2).unwrap();
        assert_eq!(sel.per_researcher["R1"].len(), 1);
        assert_eq!(sel.selected_count(), 1);
    }

    #[test]
    fn zero_scored_researcher_is_reported_not_fatal() {
        let corpus = corpus_with(&[("R1", "2"), ("R2", "2")], &[("R1", "P1")], &["P1"]);
        let scores = score_table(&[("P1", "2", 80.0, 0.0, 0.0)]);
        let sel = select_best_k(&corpus, &scores, Indicator::CShort, 2).unwrap();
        assert_eq!(sel.empty_researchers, vec!["R2".to_string()]);
        assert!(sel.per_researcher["R2"].is_empty());
    }

    #[test]
    fn k_zero_rejected() {
        let corpus = corpus_with(&[("R1", "2")], &[("R1", "P1")], &["P1"]);
        let scores = score_table(&[("P1", "2", 80.0, 0.0, 0.0)]);
        assert!(matches!(
            select_best_k(&corpus, &scores, Indicator::CShort, 0),
            Err(Error::InvalidK)
        ));
    }

    #[test]
    fn monotone_transforms_select_identically() {
        let corpus = corpus_with(
            &[("R1", "2")],
            &[("R1", "P1"), ("R1", "P2"), ("R1", "P3")],
            &["P1", "P2", "P3"],
        );
        let scores = score_table(&[
            ("P1", "2", 80.0, 0.0, 0.0),
            ("P2", "2", 60.0, 0.0, 0.0),
            ("P3", "2", 40.0, 0.0, 0.0),
        ]);
        // c_long = strictly increasing transform of c_short
        let transformed = score_table(&[
            ("P1", "2", 80.0, 0.9, 0.0),
            ("P2", "2", 60.0, 0.7, 0.0),
            ("P3", "2", 40.0, 0.1, 0.0),
        ]);
        let by_cshort = select_best_k(&corpus, &scores, Indicator::CShort, 2).unwrap();
        let by_transform = select_best_k(&corpus, &transformed, Indicator::CLong, 2).unwrap();
        let ids = |s: &SelectionSet| -> Vec<String> {
            s.per_researcher["R1"].iter().map(|p| p.pub_id.clone()).collect()
        };
        assert_eq!(ids(&by_cshort), ids(&by_transform));
    }

    #[test]
    fn tie_break_prefers_higher_c_then_pub_id() {
        let corpus = corpus_with(
            &[("R1", "2")],
            &[("R1", "P1"), ("R1", "P2"), ("R1", "P3")],
            &["P1", "P2", "P3"],
        );
        // Equal C-J values; c_short decides; then pub_id.
        let scores = score_table(&[
            ("P1", "2", 30.0, 0.0, 55.0),
            ("P2", "2", 70.0, 0.0, 55.0),
            ("P3", "2", 30.0, 0.0, 55.0),
        ]);
        let sel = select_best_k(&corpus, &scores, Indicator::CJ, 2).unwrap();
        let picked: Vec<&str> = sel.per_researcher["R1"].iter().map(|p| p.pub_id.as_str()).collect();
        assert_eq!(picked, vec!["P2", "P1"]);
    }

    #[test]
    fn dedup_keeps_one_row_per_panel() {
        // Three co-authors in panel 6 -> one row; panels 5 and 6 -> two rows.
        let rows = vec![
            AuthorshipRow { researcher_id: "R1".into(), pub_id: "P1".into(), panel_id: "6".into() },
            AuthorshipRow { researcher_id: "R2".into(), pub_id: "P1".into(), panel_id: "6".into() },
            AuthorshipRow { researcher_id: "R3".into(), pub_id: "P1".into(), panel_id: "6".into() },
            AuthorshipRow { researcher_id: "R4".into(), pub_id: "P2".into(), panel_id: "5".into() },
            AuthorshipRow { researcher_id: "R5".into(), pub_id: "P2".into(), panel_id: "6".into() },
            AuthorshipRow { researcher_id: "R6".into(), pub_id: "P3".into(), panel_id: "5".into() },
        ];
        let deduped = dedup_within_panel(&rows);
        assert_eq!(
            deduped,
            vec![
                ("P1".to_string(), "6".to_string()),
                ("P2".to_string(), "5".to_string()),
                ("P2".to_string(), "6".to_string()),
                ("P3".to_string(), "5".to_string()),
            ]
        );
    }

    #[test]
    fn intersection_identity_disjoint_and_partial() {
        let corpus = corpus_with(
            &[("R1", "2"), ("R2", "5")],
            &[("R1", "P1"), ("R1", "P2"), ("R2", "P3"), ("R2", "P4")],
            &["P1", "P2", "P3", "P4"],
        );
        let scores = score_table(&[
            ("P1", "2", 80.0, 10.0, 30.0),
            ("P2", "2", 60.0, 20.0, 40.0),
            ("P3", "5", 40.0, 30.0, 10.0),
            ("P4", "5", 20.0, 40.0, 20.0),
        ]);
        let a = select_best_k(&corpus, &scores, Indicator::CShort, 2).unwrap();
        let same = intersection_ratio(&a, &a, &corpus).unwrap();
        assert_eq!(same.total.ratio, Some(1.0));

        // A of size 4 sharing 3 pairs with B: flip one researcher's picks to
        // a single different pub by using k=1 -> incompatible; instead build
        // B by CLong which reverses R1's order (same pubs) and keeps R2's
        // pubs, so shared pairs = 4 of 4. For a partial overlap drop P4 from
        // scores and reselect.
        let scores_b = score_table(&[
            ("P1", "2", 80.0, 10.0, 30.0),
            ("P2", "2", 60.0, 20.0, 40.0),
            ("P3", "5", 40.0, 30.0, 10.0),
        ]);
        let b = select_best_k(&corpus, &scores_b, Indicator::CShort, 2).unwrap();
        let partial = intersection_ratio(&a, &b, &corpus).unwrap();
        assert_eq!(partial.total.selected_a, 4);
        assert_eq!(partial.total.shared, 3);
        assert_eq!(partial.total.ratio, Some(0.75));
        let by_panel: BTreeMap<&str, &IntersectionRow> = partial
            .per_panel
            .iter()
            .map(|r| (r.panel_id.as_str(), r))
            .collect();
        assert_eq!(by_panel["2"].ratio, Some(1.0));
        assert_eq!(by_panel["5"].ratio, Some(0.5));
    }

    #[test]
    fn empty_a_side_is_undefined() {
        let corpus = corpus_with(&[("R1", "2")], &[("R1", "P1")], &["P1"]);
        let empty_scores = score_table(&[]);
        let scores = score_table(&[("P1", "2", 80.0, 10.0, 30.0)]);
        let a = select_best_k(&corpus, &empty_scores, Indicator::CShort, 2).unwrap();
        let b = select_best_k(&corpus, &scores, Indicator::CShort, 2).unwrap();
        let report = intersection_ratio(&a, &b, &corpus).unwrap();
        assert_eq!(report.total.ratio, None);
    }

    #[test]
    fn permuting_authorship_input_order_is_stable() {
        let corpus1 = corpus_with(
            &[("R1", "2")],
            &[("R1", "P1"), ("R1", "P2"), ("R1", "P3")],
            &["P1", "P2", "P3"],
        );
        let corpus2 = corpus_with(
            &[("R1", "2")],
            &[("R1", "P3"), ("R1", "P1"), ("R1", "P2")],
            &["P2", "P3", "P1"],
        );
        let scores = score_table(&[
            ("P1", "2", 50.0, 0.0, 55.0),
            ("P2", "2", 50.0, 0.0, 55.0),
            ("P3", "2", 50.0, 0.0, 55.0),
        ]);
        let s1 = select_best_k(&corpus1, &scores, Indicator::CJ, 2).unwrap();
        let s2 = select_best_k(&corpus2, &scores, Indicator::CJ, 2).unwrap();
        assert_eq!(s1.per_researcher, s2.per_researcher);
    }
}
