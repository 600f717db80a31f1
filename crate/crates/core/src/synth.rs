//! Seeded synthetic corpus generation and the directional replication
//! experiment.
//!
//! Publications draw a lognormal latent quality. Short-window citations are
//! a Poisson readout of a noise-perturbed view of that quality; long-window
//! citations add a further Poisson accrual driven by the quality itself, so
//! counts never decrease across censuses. Journals carry a metric whose
//! rank within the category tracks latent quality with configurable
//! informativeness. Everything is driven by a single ChaCha stream, so one
//! seed yields byte-identical corpora.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Deserialize;

use crate::corpus::{
    Authorship, Corpus, IngestOptions, JournalMetricEntry, PublicationRecord, Researcher,
};
use crate::error::{Error, Result};
use crate::indicator::PanelSet;
use crate::pipeline::{run_pipeline, PipelineOptions};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatentModel {
    /// Mean of log quality.
    pub log_mean: f64,
    /// Spread of log quality; larger values give heavier citation tails.
    pub log_sigma: f64,
}

impl Default for LatentModel {
    fn default() -> Self {
        LatentModel {
            log_mean: 0.3,
            log_sigma: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CitationModel {
    /// Scale of expected short-window citations.
    pub short_base_rate: f64,
    /// Std-dev of the latent perturbation visible in the short window.
    pub short_noise: f64,
    /// Scale of expected additional long-window citations; 0 makes the long
    /// census identical to the short one.
    pub growth: f64,
    /// Std-dev of the latent perturbation in the accrual phase.
    pub accumulation_noise: f64,
}

impl Default for CitationModel {
    fn default() -> Self {
        CitationModel {
            short_base_rate: 1.0,
            short_noise: 0.9,
            growth: 6.0,
            accumulation_noise: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JournalModel {
    /// Correlation of the journal signal with latent quality, in [0, 1].
    pub informativeness: f64,
}

impl Default for JournalModel {
    fn default() -> Self {
        JournalModel {
            informativeness: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResearcherModel {
    pub panels: Vec<String>,
    pub per_panel: u32,
    /// Publications per researcher, uniform in pubs_min..=pubs_max.
    pub pubs_min: u32,
    pub pubs_max: u32,
}

impl Default for ResearcherModel {
    fn default() -> Self {
        ResearcherModel {
            panels: ["1", "2", "3", "4", "5", "6", "7", "8a", "8b", "9", "11b"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            per_panel: 100,
            pubs_min: 1,
            pubs_max: 8,
        }
    }
}

/// Generative model for a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenModel {
    pub seed: u64,
    pub n_publications: u32,
    pub n_journals: u32,
    pub years: Vec<i32>,
    pub categories: Vec<String>,
    /// Exactly two labels: short then long.
    pub census_labels: Vec<String>,
    pub latent: LatentModel,
    pub citations: CitationModel,
    pub journal: JournalModel,
    pub researchers: ResearcherModel,
}

impl Default for GenModel {
    fn default() -> Self {
        GenModel {
            seed: 1,
            n_publications: 10_000,
            n_journals: 240,
            years: vec![2011, 2012, 2013],
            categories: (1..=6).map(|i| format!("SC{i:02}")).collect(),
            census_labels: vec!["short".to_string(), "long".to_string()],
            latent: LatentModel::default(),
            citations: CitationModel::default(),
            journal: JournalModel::default(),
            researchers: ResearcherModel::default(),
        }
    }
}

impl GenModel {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InfeasibleModel(msg));
        if self.n_publications == 0 {
            return fail("n_publications must be >= 1".into());
        }
        if self.years.is_empty() || self.categories.is_empty() {
            return fail("years and categories must be non-empty".into());
        }
        if self.n_journals < 2 * self.categories.len() as u32 {
            return fail(format!(
                "need at least {} journals (two per category) so journal percentiles are defined",
                2 * self.categories.len()
            ));
        }
        if self.census_labels.len() != 2 || self.census_labels[0] == self.census_labels[1] {
            return fail("census_labels must be two distinct labels (short, long)".into());
        }
        if !(self.latent.log_sigma >= 0.0) {
            return fail("latent.log_sigma must be >= 0".into());
        }
        let c = &self.citations;
        if !(c.short_base_rate > 0.0) {
            return fail("citations.short_base_rate must be > 0".into());
        }
        if !(c.short_noise >= 0.0 && c.growth >= 0.0 && c.accumulation_noise >= 0.0) {
            return fail("citation noise levels and growth must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.journal.informativeness) {
            return fail("journal.informativeness must lie in [0, 1]".into());
        }
        let r = &self.researchers;
        if r.panels.is_empty() || r.per_panel == 0 {
            return fail("researchers.panels must be non-empty with per_panel >= 1".into());
        }
        if r.pubs_min == 0 || r.pubs_min > r.pubs_max {
            return fail("researchers.pubs_min must satisfy 1 <= pubs_min <= pubs_max".into());
        }
        if r.pubs_max > self.n_publications {
            return fail(format!(
                "pubs_max {} exceeds n_publications {}; more publications per researcher than exist",
                r.pubs_max, self.n_publications
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let model: GenModel =
            toml::from_str(text).map_err(|e| Error::Config(format!("generator model: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Artifact {
            file: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }
}

/// Standard normal CDF via the Abramowitz-Stegun 26.2.17 polynomial
/// (|error| < 7.5e-8), enough to place journal picks in rank buckets.
pub(crate) fn standard_normal_cdf(z: f64) -> f64 {
    if z < 0.0 {
        return 1.0 - standard_normal_cdf(-z);
    }
    let t = 1.0 / (1.0 + 0.231_641_9 * z);
    let poly = t
        * (0.319_381_530
            + t * (-0.356_563_782 + t * (1.781_477_937 + t * (-1.821_255_978 + t * 1.330_274_429))));
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    1.0 - pdf * poly
}

fn poisson_draw(rng: &mut ChaCha8Rng, rate: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let capped = rate.min(1.0e9);
    let draw: f64 = Poisson::new(capped).expect("positive rate").sample(rng);
    draw as u64
}

/// Generates a corpus from the model. Deterministic given the seed.
pub fn generate(model: &GenModel) -> Result<Corpus> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let n_cats = model.categories.len();

    // Journals: round-robin over categories; within a category the metric
    // strictly increases with the journal's list position, so position is
    // the prestige rank.
    let mut journals_by_cat: Vec<Vec<usize>> = vec![Vec::new(); n_cats];
    let mut journal_ids = Vec::with_capacity(model.n_journals as usize);
    let mut journal_cats = Vec::with_capacity(model.n_journals as usize);
    for j in 0..model.n_journals as usize {
        let cat = j % n_cats;
        journals_by_cat[cat].push(j);
        journal_ids.push(format!("J{j:05}"));
        journal_cats.push(cat);
    }
    let mut journal_metric = vec![0.0f64; model.n_journals as usize];
    for journals in &journals_by_cat {
        let m = journals.len() as f64;
        for (rank, &j) in journals.iter().enumerate() {
            let q = (rank as f64 + 0.5) / m;
            journal_metric[j] = 20.0 * q * q;
        }
    }

    // Publications.
    let rho = model.journal.informativeness;
    let rho_rest = (1.0 - rho * rho).sqrt();
    let sigma = model.latent.log_sigma;
    let mu = model.latent.log_mean;
    let mut publications = Vec::with_capacity(model.n_publications as usize);
    for i in 0..model.n_publications as usize {
        let year = model.years[rng.random_range(0..model.years.len())];
        let cat = rng.random_range(0..n_cats);
        let quality: f64 = rng.sample(StandardNormal);

        let journal_signal: f64 = {
            let noise: f64 = rng.sample(StandardNormal);
            rho * quality + rho_rest * noise
        };
        let cat_journals = &journals_by_cat[cat];
        let slot = (standard_normal_cdf(journal_signal) * cat_journals.len() as f64) as usize;
        let journal = cat_journals[slot.min(cat_journals.len() - 1)];

        let short_view = {
            let noise: f64 = rng.sample(StandardNormal);
            quality + model.citations.short_noise * noise
        };
        let short_rate = model.citations.short_base_rate * (mu + sigma * short_view).exp();
        let cites_short = poisson_draw(&mut rng, short_rate);

        let accrual_view = {
            let noise: f64 = rng.sample(StandardNormal);
            quality + model.citations.accumulation_noise * noise
        };
        let accrual_rate = model.citations.growth * (mu + sigma * accrual_view).exp();
        let cites_long = cites_short + poisson_draw(&mut rng, accrual_rate);

        publications.push(PublicationRecord {
            pub_id: format!("P{i:06}"),
            year,
            subject_categories: vec![model.categories[cat].clone()],
            journal_id: journal_ids[journal].clone(),
            reference_only: true, // flipped below for authored publications
            citations: vec![cites_short, cites_long],
        });
    }

    // Researchers and authorships.
    let mut researchers = Vec::new();
    let mut authorships = Vec::new();
    let mut authored = vec![false; publications.len()];
    let mut researcher_counter = 0usize;
    for panel in &model.researchers.panels {
        for _ in 0..model.researchers.per_panel {
            let researcher_id = format!("R{panel}_{researcher_counter:05}");
            researchers.push(Researcher {
                researcher_id: researcher_id.clone(),
                panel_id: panel.clone(),
                institution_id: format!("I{:02}", researcher_counter % 10),
            });
            researcher_counter += 1;

            let n_pubs = rng
                .random_range(model.researchers.pubs_min..=model.researchers.pubs_max)
                as usize;
            let mut picks: Vec<usize> =
                rand::seq::index::sample(&mut rng, publications.len(), n_pubs).into_vec();
            picks.sort_unstable();
            for pick in picks {
                authored[pick] = true;
                authorships.push(Authorship {
                    researcher_id: researcher_id.clone(),
                    pub_id: publications[pick].pub_id.clone(),
                });
            }
        }
    }
    for (p, &is_authored) in publications.iter_mut().zip(&authored) {
        p.reference_only = !is_authored;
    }

    // Journal metric entries: every journal, every year, constant value.
    let mut journal_metrics = Vec::new();
    for j in 0..model.n_journals as usize {
        for &year in &model.years {
            journal_metrics.push(JournalMetricEntry {
                journal_id: journal_ids[j].clone(),
                year,
                subject_category: model.categories[journal_cats[j]].clone(),
                metric_value: journal_metric[j],
            });
        }
    }

    Corpus::new(
        model.census_labels.clone(),
        publications,
        journal_metrics,
        researchers,
        authorships,
        &IngestOptions::default(),
    )
}

// ---------------------------------------------------------------------------
// Replication experiment
// ---------------------------------------------------------------------------

/// Headline numbers from one generated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub seed: u64,
    pub pearson_cshort: Option<f64>,
    pub pearson_cj: Option<f64>,
    pub correct_share_cshort: f64,
    pub correct_share_cj: f64,
}

/// Win rates for one grid point. A run counts as a C_short win when its
/// statistic strictly exceeds the C-J one; exact equality (or two undefined
/// correlations) counts half.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPointSummary {
    pub model_index: usize,
    pub runs: u64,
    pub pearson_win_rate: f64,
    pub grading_win_rate: f64,
    pub outcomes: Vec<RunOutcome>,
}

fn win_rate(pairs: impl Iterator<Item = (Option<f64>, Option<f64>)>, runs: u64) -> f64 {
    let mut score = 0.0;
    for (a, b) in pairs {
        score += match (a, b) {
            (Some(a), Some(b)) if a > b => 1.0,
            (Some(a), Some(b)) if a < b => 0.0,
            _ => 0.5,
        };
    }
    score / runs as f64
}

/// Runs the full pipeline over `runs_per_model` seeds for each grid point
/// and reports how often C_short beats C-J at predicting C_long, by Pearson
/// correlation and by correct-grading share.
pub fn replication_experiment(
    models: &[GenModel],
    panels: &PanelSet,
    runs_per_model: u64,
) -> Result<Vec<GridPointSummary>> {
    let mut summaries = Vec::new();
    for (model_index, base) in models.iter().enumerate() {
        let outcomes: Result<Vec<RunOutcome>> = (0..runs_per_model)
            .into_par_iter()
            .map(|run| {
                let mut model = base.clone();
                model.seed = base.seed.wrapping_add(run);
                let corpus = generate(&model)?;
                let pipe = run_pipeline(&corpus, panels, &PipelineOptions::default())?;
                let overall = &pipe.report.overall;
                let shares = &pipe.report.shares;
                Ok(RunOutcome {
                    seed: model.seed,
                    pearson_cshort: overall.cshort_vs_clong.pearson,
                    pearson_cj: overall.cj_vs_clong.pearson,
                    correct_share_cshort: shares.columns[0].correct_pct,
                    correct_share_cj: shares.columns[1].correct_pct,
                })
            })
            .collect();
        let outcomes = outcomes?;
        summaries.push(GridPointSummary {
            model_index,
            runs: runs_per_model,
            pearson_win_rate: win_rate(
                outcomes.iter().map(|o| (o.pearson_cshort, o.pearson_cj)),
                runs_per_model,
            ),
            grading_win_rate: win_rate(
                outcomes
                    .iter()
                    .map(|o| (Some(o.correct_share_cshort), Some(o.correct_share_cj))),
                runs_per_model,
            ),
            outcomes,
        });
    }
    Ok(summaries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_matches_reference_points() {
        let cases = [
            (-3.5, 0.000_232_629_079_035_525),
            (-2.0, 0.022_750_131_948_179_195),
            (-1.0, 0.158_655_253_931_457_07),
            (-0.5, 0.308_537_538_725_986_9),
            (0.0, 0.5),
            (0.3, 0.617_911_422_188_952_6),
            (1.0, 0.841_344_746_068_542_9),
            (1.96, 0.975_002_104_851_779_5),
            (3.0, 0.998_650_101_968_369_9),
        ];
        for (z, expected) in cases {
            assert!(
                (standard_normal_cdf(z) - expected).abs() < 1e-7,
                "cdf({z}) = {} vs {expected}",
                standard_normal_cdf(z)
            );
        }
    }

    #[test]
    fn infeasible_models_rejected() {
        let mut m = GenModel::default();
        m.researchers.pubs_max = m.n_publications + 1;
        assert!(matches!(m.validate(), Err(Error::InfeasibleModel(_))));

        let mut m = GenModel::default();
        m.n_journals = m.categories.len() as u32; // one journal per category
        assert!(matches!(m.validate(), Err(Error::InfeasibleModel(_))));

        let mut m = GenModel::default();
        m.journal.informativeness = 1.2;
        assert!(matches!(m.validate(), Err(Error::InfeasibleModel(_))));
    }

    #[test]
    fn toml_defaults_round_trip() {
        let parsed = GenModel::from_toml_str("").unwrap();
        assert_eq!(parsed, GenModel::default());
        let parsed = GenModel::from_toml_str("seed = 9\n[journal]\ninformativeness = 0.0\n").unwrap();
        assert_eq!(parsed.seed, 9);
        assert_eq!(parsed.journal.informativeness, 0.0);
        assert_eq!(parsed.n_publications, GenModel::default().n_publications);
        assert!(GenModel::from_toml_str("unknown_knob = 3").is_err());
    }

    fn small_model(seed: u64) -> GenModel {
        let mut m = GenModel::default();
        m.seed = seed;
        m.n_publications = 600;
        m.n_journals = 48;
        m.categories = (1..=3).map(|i| format!("SC{i:02}")).collect();
        m.researchers.per_panel = 6;
        m.researchers.pubs_max = 5;
        m
    }

    #[test]
    fn same_seed_produces_identical_corpora() {
        let m = small_model(7);
        let a = generate(&m).unwrap();
        let b = generate(&m).unwrap();
        assert_eq!(a, b);
        let c = generate(&small_model(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_growth_makes_censuses_identical() {
        let mut m = small_model(11);
        m.citations.short_noise = 0.0;
        m.citations.growth = 0.0;
        let corpus = generate(&m).unwrap();
        for p in corpus.publications() {
            assert_eq!(p.citations[0], p.citations[1]);
        }
        // identical counts mean identical percentile tables
        let engine = crate::percentile::PercentileEngine::new(&corpus);
        let short = engine.percentile_table("short").unwrap();
        let long = engine.percentile_table("long").unwrap();
        for (s, l) in short.rows.iter().zip(&long.rows) {
            assert_eq!(s.pub_id, l.pub_id);
            assert_eq!(s.c_percentile, l.c_percentile);
        }
    }

    #[test]
    fn counts_are_monotone_across_censuses() {
        let corpus = generate(&small_model(13)).unwrap();
        for p in corpus.publications() {
            assert!(p.citations[0] <= p.citations[1], "{}", p.pub_id);
        }
    }
}
