//! Panel scoring: turns a product and its routing into a merit score.

mod profile;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use thiserror::Error;

pub use profile::{AgeBand, ClassificationMatrix, GevProfile, MeritOutcome, ProfileSet, SourcePolicy};

use crate::corpus::{admissibility, Admissibility, Corpus, IndexRecord, Product, ProductKind, YearRange};
use crate::reference::{classify, DocSplit, Indicator, IndicatorClass, ReferenceError, ReferenceLibrary};
use crate::score::Score;

#[derive(Debug, Error)]
pub enum GevError {
    #[error("UDA {0} is evaluated by peer review only and cannot be scored bibliometrically")]
    PeerReviewOnly(u8),
    #[error("no profile configured for GEV {0}")]
    UnknownGev(u8),
    #[error("profile {profile} used to score a product routed to GEV {routing}")]
    ProfileMismatch { profile: u8, routing: u8 },
    #[error("GEV {gev_id} age bands do not cover year {year} of window {window}")]
    WindowNotCovered {
        gev_id: u8,
        year: i32,
        window: YearRange,
    },
    #[error("record has no journal metric")]
    MissingMetric,
    #[error("product '{product_id}': {source}")]
    Reference {
        product_id: String,
        #[source]
        source: ReferenceError,
    },
    #[error("invalid profile configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// How a product's score was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Matrix(MeritOutcome),
    /// Review in a journal the panel routes straight to peer review.
    ForcedIr,
    /// Indexed, but the journal has neither a metric nor a listed class.
    NoMetricFallback,
    /// No usable index record under the panel's source policy.
    NonIndexedFallback,
    Inadmissible,
    Fraud,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Matrix(m) => m.as_str(),
            Outcome::ForcedIr => "forced-ir",
            Outcome::NoMetricFallback => "no-metric",
            Outcome::NonIndexedFallback => "non-indexed",
            Outcome::Inadmissible => "inadmissible",
            Outcome::Fraud => "fraud",
        }
    }

    pub fn is_definite(self) -> bool {
        matches!(self, Outcome::Matrix(m) if m != MeritOutcome::IR)
    }

    /// Score this outcome carries under `profile`.
    pub fn score(self, profile: &GevProfile) -> Score {
        match self {
            Outcome::Matrix(m) => m.fixed_score().unwrap_or(profile.ir_assumed_score),
            Outcome::ForcedIr => profile.ir_assumed_score,
            Outcome::NoMetricFallback => profile.no_metric_score,
            Outcome::NonIndexedFallback => profile.non_indexed_score,
            Outcome::Inadmissible => Score::INADMISSIBLE,
            Outcome::Fraud => Score::FRAUD,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoredProduct {
    pub product_id: String,
    pub routing_gev: u8,
    pub outcome: Outcome,
    pub score: Score,
    /// True only for matrix outcomes A, B, C and D.
    pub definite: bool,
}

impl ScoredProduct {
    pub fn new(product_id: &str, routing_gev: u8, outcome: Outcome, score: Score) -> Self {
        ScoredProduct {
            product_id: product_id.to_string(),
            routing_gev,
            outcome,
            score,
            definite: outcome.is_definite(),
        }
    }
}

fn scored(product: &Product, profile: &GevProfile, outcome: Outcome) -> ScoredProduct {
    ScoredProduct::new(&product.id, profile.gev_id, outcome, outcome.score(profile))
}

/// Citation distribution a product kind is compared against.
pub fn citation_split(profile: &GevProfile, kind: ProductKind) -> DocSplit {
    match (profile.split_citation_doctype, kind) {
        (false, _) => DocSplit::Any,
        (true, ProductKind::Review) => DocSplit::Review,
        (true, _) => DocSplit::Article,
    }
}

/// Classifies a record against every one of its subject categories and keeps
/// the best class. Categories without a distribution are skipped; the lookup
/// error is returned only when none resolves.
pub fn multi_category_class(
    record: &IndexRecord,
    indicator: Indicator,
    library: &ReferenceLibrary,
    profile: &GevProfile,
    year: i32,
    doc_split: DocSplit,
) -> Result<IndicatorClass, GevError> {
    let value = match indicator {
        Indicator::Citations => record.citations as f64,
        Indicator::JournalMetric => record.journal_metric.ok_or(GevError::MissingMetric)?,
    };
    let mut best: Option<IndicatorClass> = None;
    let mut first_missing = None;
    for category in &record.subject_categories {
        let found = if profile.category_groups {
            library.lookup(indicator, category, year, doc_split)
        } else {
            library.lookup_direct(indicator, category, year, doc_split)
        };
        match found {
            Ok(thresholds) => {
                let class = classify(value, thresholds);
                best = Some(best.map_or(class, |b| b.min(class)));
            }
            Err(e) => {
                first_missing.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| GevError::Reference {
        product_id: String::new(),
        source: first_missing.unwrap_or_else(|| {
            ReferenceError::MissingDistribution(crate::reference::DistributionKey::new(
                indicator, "", year, doc_split,
            ))
        }),
    })
}

fn evaluate_record(
    product: &Product,
    record: &IndexRecord,
    profile: &GevProfile,
    library: &ReferenceLibrary,
) -> Result<Outcome, GevError> {
    let listed = profile.listed_journal_class(record.journal_id.as_deref());
    if record.journal_metric.is_none() && listed.is_none() {
        return Ok(Outcome::NoMetricFallback);
    }
    let ir = match listed {
        Some(class) => class,
        None => multi_category_class(
            record,
            Indicator::JournalMetric,
            library,
            profile,
            product.year,
            DocSplit::Any,
        )?,
    };
    let ic = multi_category_class(
        record,
        Indicator::Citations,
        library,
        profile,
        product.year,
        citation_split(profile, product.kind),
    )?;
    let matrix = profile.matrix_for(product.year).ok_or(GevError::WindowNotCovered {
        gev_id: profile.gev_id,
        year: product.year,
        window: YearRange::new(product.year, product.year),
    })?;
    Ok(Outcome::Matrix(matrix.lookup(ic, ir)))
}

/// Scores one product under the panel it is routed to.
///
/// Order of rules: fraud, admissibility, forced peer review for listed
/// review journals, index-record selection by source policy, the no-metric
/// fallback, then the classification matrix of the product's age band.
/// With `BestOfBoth` each record is evaluated and the higher score wins,
/// WoS on ties.
pub fn score_product(
    product: &Product,
    routing_gev: u8,
    profile: &GevProfile,
    library: &ReferenceLibrary,
    window: YearRange,
) -> Result<ScoredProduct, GevError> {
    if (10..=14).contains(&routing_gev) {
        return Err(GevError::PeerReviewOnly(routing_gev));
    }
    if profile.gev_id != routing_gev {
        return Err(GevError::ProfileMismatch {
            profile: profile.gev_id,
            routing: routing_gev,
        });
    }
    if product.fraud {
        return Ok(scored(product, profile, Outcome::Fraud));
    }
    if let Admissibility::Inadmissible(reason) = admissibility(product, profile, window) {
        log::debug!("product '{}' inadmissible: {reason}", product.id);
        return Ok(scored(product, profile, Outcome::Inadmissible));
    }

    let records: Vec<&IndexRecord> = match profile.source_policy {
        SourcePolicy::WosOnly => product.wos.iter().collect(),
        SourcePolicy::BestOfBoth => product.wos.iter().chain(product.scopus.iter()).collect(),
    };
    if product.kind == ProductKind::Review
        && records.iter().any(|r| profile.forces_review(r.journal_id.as_deref()))
    {
        return Ok(scored(product, profile, Outcome::ForcedIr));
    }
    if records.is_empty() {
        return Ok(scored(product, profile, Outcome::NonIndexedFallback));
    }

    let mut best: Option<ScoredProduct> = None;
    for record in records {
        let outcome = evaluate_record(product, record, profile, library).map_err(|e| match e {
            GevError::Reference { source, .. } => GevError::Reference {
                product_id: product.id.clone(),
                source,
            },
            other => other,
        })?;
        let candidate = scored(product, profile, outcome);
        if best.as_ref().is_none_or(|b| candidate.score > b.score) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one record evaluated"))
}

/// Scores of every authorship, keyed by (researcher id, product id).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoredSet {
    entries: BTreeMap<(String, String), ScoredProduct>,
}

impl ScoredSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, researcher_id: &str, scored: ScoredProduct) {
        self.entries
            .insert((researcher_id.to_string(), scored.product_id.clone()), scored);
    }

    pub fn get(&self, researcher_id: &str, product_id: &str) -> Option<&ScoredProduct> {
        self.entries
            .get(&(researcher_id.to_string(), product_id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in (researcher id, product id) order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &ScoredProduct)> {
        self.entries.iter().map(|((r, _), s)| (r.as_str(), s))
    }

    /// Writes `product_id,researcher_id,routing_gev,outcome,score,definite`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["product_id", "researcher_id", "routing_gev", "outcome", "score", "definite"])?;
        for (researcher, s) in self.iter() {
            w.write_record([
                s.product_id.as_str(),
                researcher,
                &s.routing_gev.to_string(),
                s.outcome.as_str(),
                &s.score.to_string(),
                if s.definite { "true" } else { "false" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scores every authorship of the corpus under its routing panel. A product
/// routed to the same panel by several co-authors is scored once.
pub fn score_corpus(
    corpus: &Corpus,
    profiles: &ProfileSet,
    library: &ReferenceLibrary,
) -> Result<ScoredSet, GevError> {
    let window = corpus.window();
    let mut checked = BTreeSet::new();
    let mut cache: BTreeMap<(&str, u8), ScoredProduct> = BTreeMap::new();
    let mut out = ScoredSet::new();
    for a in corpus.authorships() {
        let gev = corpus.routing_gev(a);
        let profile = profiles.get(gev)?;
        if checked.insert(gev) {
            profile.check_window(window)?;
        }
        let product = corpus.product(&a.product_id).expect("validated corpus");
        let key = (product.id.as_str(), gev);
        let s = match cache.get(&key) {
            Some(s) => s.clone(),
            None => {
                let s = score_product(product, gev, profile, library, window)?;
                cache.insert(key, s.clone());
                s
            }
        };
        out.insert(&a.researcher_id, s);
    }
    Ok(out)
}
