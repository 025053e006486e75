use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use super::{canonical_order, CandidateSet, SelectionError};
use crate::corpus::Corpus;
use crate::gev::{Outcome, ScoredSet};
use crate::score::Score;

/// A product as seen from one of its authors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub product_id: String,
    /// Score under this author's routing panel.
    pub score: Score,
    pub outcome: Outcome,
    pub definite: bool,
    pub citations: u64,
    pub year: i32,
    /// Declared priority; `None` for unproposed products.
    pub priority: Option<u32>,
}

impl Candidate {
    pub fn is_inadmissible(&self) -> bool {
        self.outcome == Outcome::Inadmissible
    }

    pub fn is_nil(&self) -> bool {
        self.score == Score::ZERO
    }
}

/// Sets A, B, D and E of one researcher (C is A and B together).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResearcherSets {
    pub researcher_id: String,
    pub uda: u8,
    pub quota: u32,
    /// A, by ascending declared priority.
    pub proposed: Vec<Candidate>,
    /// B, in canonical order.
    pub unproposed: Vec<Candidate>,
    /// D: ids of the quota-many top-priority proposals.
    pub declared: Vec<String>,
    /// E: ids of the quota-many best products of C, canonical order.
    pub best: Vec<String>,
}

impl ResearcherSets {
    pub fn new(
        researcher_id: &str,
        uda: u8,
        quota: u32,
        mut proposed: Vec<Candidate>,
        mut unproposed: Vec<Candidate>,
    ) -> Self {
        proposed.sort_by_key(|c| (c.priority.unwrap_or(u32::MAX), c.product_id.clone()));
        unproposed.sort_by(canonical_order);
        let declared = proposed
            .iter()
            .take(quota as usize)
            .map(|c| c.product_id.clone())
            .collect();
        let mut all: Vec<&Candidate> = proposed.iter().chain(unproposed.iter()).collect();
        all.sort_by(|a, b| canonical_order(a, b));
        let best = all
            .into_iter()
            .take(quota as usize)
            .map(|c| c.product_id.clone())
            .collect();
        ResearcherSets {
            researcher_id: researcher_id.to_string(),
            uda,
            quota,
            proposed,
            unproposed,
            declared,
            best,
        }
    }

    /// A or C, in no particular order.
    pub fn candidates(&self, set: CandidateSet) -> impl Iterator<Item = &Candidate> {
        let extra: &[Candidate] = match set {
            CandidateSet::Proposed => &[],
            CandidateSet::All => &self.unproposed,
        };
        self.proposed.iter().chain(extra.iter())
    }

    pub fn candidate(&self, product_id: &str) -> Option<&Candidate> {
        self.candidates(CandidateSet::All)
            .find(|c| c.product_id == product_id)
    }

    pub fn is_proposed(&self, product_id: &str) -> bool {
        self.proposed.iter().any(|c| c.product_id == product_id)
    }

    fn declared_candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.declared.iter().filter_map(|id| self.candidate(id))
    }

    fn best_candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.best.iter().filter_map(|id| self.candidate(id))
    }

    /// Scores of D and E, for averaging.
    pub fn declared_scores(&self) -> impl Iterator<Item = &Candidate> {
        self.declared_candidates()
    }

    pub fn best_scores(&self) -> impl Iterator<Item = &Candidate> {
        self.best_candidates()
    }
}

/// Portfolio sets of every researcher, keyed by researcher id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PortfolioSets {
    researchers: BTreeMap<String, ResearcherSets>,
}

impl PortfolioSets {
    pub fn from_researchers(researchers: impl IntoIterator<Item = ResearcherSets>) -> Self {
        PortfolioSets {
            researchers: researchers
                .into_iter()
                .map(|r| (r.researcher_id.clone(), r))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &ResearcherSets> {
        self.researchers.values()
    }

    /// Researchers with a non-zero quota; the only ones selection engines
    /// consider.
    pub fn active(&self) -> impl Iterator<Item = &ResearcherSets> {
        self.researchers.values().filter(|r| r.quota > 0)
    }

    pub fn get(&self, researcher_id: &str) -> Option<&ResearcherSets> {
        self.researchers.get(researcher_id)
    }
}

/// Materialises sets A to E for every researcher.
///
/// B holds the researcher's unproposed products that are WoS-indexed and
/// fall inside the evaluation window.
pub fn build_sets(corpus: &Corpus, scored: &ScoredSet) -> Result<PortfolioSets, SelectionError> {
    let window = corpus.window();
    let mut out = Vec::new();
    for r in corpus.researchers() {
        let mut proposed = Vec::new();
        let mut unproposed = Vec::new();
        for a in corpus.authorships_of(&r.id) {
            let product = corpus.product(&a.product_id).expect("validated corpus");
            if a.declared_priority.is_none()
                && !(product.is_wos_indexed() && window.contains(product.year))
            {
                continue;
            }
            let s = scored
                .get(&r.id, &a.product_id)
                .ok_or_else(|| SelectionError::Unscored {
                    researcher_id: r.id.clone(),
                    product_id: a.product_id.clone(),
                })?;
            let c = Candidate {
                product_id: product.id.clone(),
                score: s.score,
                outcome: s.outcome,
                definite: s.definite,
                citations: product.citation_count(),
                year: product.year,
                priority: a.declared_priority,
            };
            if c.priority.is_some() {
                proposed.push(c);
            } else {
                unproposed.push(c);
            }
        }
        out.push(ResearcherSets::new(&r.id, r.uda, r.quota, proposed, unproposed));
    }
    Ok(PortfolioSets::from_researchers(out))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResearcherErrors {
    pub researcher_id: String,
    pub uda: u8,
    pub quota: u32,
    pub declared: usize,
    pub best: usize,
    pub inadmissible_in_d: usize,
    pub nil_in_d: usize,
    pub nil_in_e: usize,
    /// D minus (D and E).
    pub overvalued: Vec<String>,
    /// E within proposed-but-not-declared.
    pub undervalued: Vec<String>,
    /// E minus (A and E).
    pub omitted: Vec<String>,
}

/// Counts summed over researchers; a co-authored product counts once per
/// author.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub products_due: u64,
    pub declared: u64,
    pub best: u64,
    pub inadmissible_in_d: u64,
    pub nil_in_d: u64,
    pub nil_in_e: u64,
    pub overvalued: u64,
    pub undervalued: u64,
    pub omitted: u64,
}

impl ErrorCounts {
    fn add(&mut self, r: &ResearcherErrors) {
        self.products_due += u64::from(r.quota);
        self.declared += r.declared as u64;
        self.best += r.best as u64;
        self.inadmissible_in_d += r.inadmissible_in_d as u64;
        self.nil_in_d += r.nil_in_d as u64;
        self.nil_in_e += r.nil_in_e as u64;
        self.overvalued += r.overvalued.len() as u64;
        self.undervalued += r.undervalued.len() as u64;
        self.omitted += r.omitted.len() as u64;
    }

    fn share(part: u64, whole: u64) -> Option<f64> {
        (whole > 0).then(|| part as f64 / whole as f64 * 100.0)
    }

    /// Over-valued as a percentage of D.
    pub fn overvalued_share(&self) -> Option<f64> {
        Self::share(self.overvalued, self.declared)
    }

    /// Under-valued as a percentage of E.
    pub fn undervalued_share(&self) -> Option<f64> {
        Self::share(self.undervalued, self.best)
    }

    /// Omitted as a percentage of E.
    pub fn omitted_share(&self) -> Option<f64> {
        Self::share(self.omitted, self.best)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub researchers: Vec<ResearcherErrors>,
    pub per_uda: BTreeMap<u8, ErrorCounts>,
    pub total: ErrorCounts,
}

/// Over-valued, under-valued and omitted products per researcher, plus the
/// inadmissible and nil-score counts of D and E.
pub fn error_metrics(sets: &PortfolioSets) -> ErrorReport {
    let mut report = ErrorReport::default();
    for r in sets.iter() {
        let d: BTreeSet<&str> = r.declared.iter().map(String::as_str).collect();
        let e: BTreeSet<&str> = r.best.iter().map(String::as_str).collect();
        let a: BTreeSet<&str> = r.proposed.iter().map(|c| c.product_id.as_str()).collect();
        let owned = |it: Vec<&str>| it.into_iter().map(str::to_string).collect::<Vec<_>>();

        let errors = ResearcherErrors {
            researcher_id: r.researcher_id.clone(),
            uda: r.uda,
            quota: r.quota,
            declared: d.len(),
            best: e.len(),
            inadmissible_in_d: r.declared_candidates().filter(|c| c.is_inadmissible()).count(),
            nil_in_d: r.declared_candidates().filter(|c| c.is_nil()).count(),
            nil_in_e: r.best_candidates().filter(|c| c.is_nil()).count(),
            overvalued: owned(d.difference(&e).copied().collect()),
            undervalued: owned(e.iter().filter(|p| a.contains(*p) && !d.contains(*p)).copied().collect()),
            omitted: owned(e.difference(&a).copied().collect()),
        };
        report.total.add(&errors);
        report.per_uda.entry(r.uda).or_default().add(&errors);
        report.researchers.push(errors);
    }
    report
}

impl ErrorReport {
    /// Writes `researcher_id,uda,inadmissible_in_D,nil_in_D,overvalued,undervalued,omitted`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "researcher_id",
            "uda",
            "inadmissible_in_D",
            "nil_in_D",
            "overvalued",
            "undervalued",
            "omitted",
        ])?;
        for r in &self.researchers {
            w.write_record([
                r.researcher_id.clone(),
                r.uda.to_string(),
                r.inadmissible_in_d.to_string(),
                r.nil_in_d.to_string(),
                r.overvalued.len().to_string(),
                r.undervalued.len().to_string(),
                r.omitted.len().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
