//! Institutional data model: researchers, their products and authorships.
//!
//! A [`Corpus`] is built either from the three CSV files described in
//! [`io`] or programmatically through [`Corpus::from_parts`]. Both routes run
//! the same structural validation, and every violation carries the file and
//! line it would occupy on disk.

pub mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gev::GevProfile;

pub use io::{load_corpus, write_corpus, CorpusPaths};

/// Largest per-person product quota (research-institution ceiling).
pub const MAX_QUOTA: u32 = 6;
/// Quota used when a roster row leaves it blank.
pub const DEFAULT_QUOTA: u32 = 3;
/// UDAs evaluated bibliometrically; 10 to 14 are peer-review only.
pub const BIBLIOMETRIC_UDAS: std::ops::RangeInclusive<u8> = 1..=9;

pub const RESEARCHERS_FILE: &str = "researchers.csv";
pub const PRODUCTS_FILE: &str = "products.csv";
pub const AUTHORSHIPS_FILE: &str = "authorships.csv";

/// Inclusive range of publication years.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub const fn new(start: i32, end: i32) -> Self {
        YearRange { start, end }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn is_empty(&self) -> bool {
        self.start > self.end
    }

    pub fn overlaps(&self, other: &YearRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl Default for YearRange {
    fn default() -> Self {
        YearRange::new(2004, 2010)
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for YearRange {
    type Err = String;

    /// Parses `2004:2010` (a single year `2010` is also accepted).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| format!("invalid year '{}' in range '{s}'", t.trim()))
        };
        let range = match s.split_once(':') {
            Some((a, b)) => YearRange::new(parse(a)?, parse(b)?),
            None => {
                let y = parse(s)?;
                YearRange::new(y, y)
            }
        };
        if range.is_empty() {
            return Err(format!("year range '{s}' is empty"));
        }
        Ok(range)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductKind {
    JournalArticle,
    Review,
    ConferenceProceeding,
    Book,
    Chapter,
    Patent,
    Other,
}

impl ProductKind {
    pub const ALL: [ProductKind; 7] = [
        ProductKind::JournalArticle,
        ProductKind::Review,
        ProductKind::ConferenceProceeding,
        ProductKind::Book,
        ProductKind::Chapter,
        ProductKind::Patent,
        ProductKind::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProductKind::JournalArticle => "journal-article",
            ProductKind::Review => "review",
            ProductKind::ConferenceProceeding => "conference-proceeding",
            ProductKind::Book => "book",
            ProductKind::Chapter => "chapter",
            ProductKind::Patent => "patent",
            ProductKind::Other => "other",
        }
    }
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProductKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProductKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown product kind '{s}'"))
    }
}

/// One bibliographic index entry (WoS or Scopus) for a product.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexRecord {
    pub subject_categories: Vec<String>,
    /// Impact factor (WoS) or SJR (Scopus).
    pub journal_metric: Option<f64>,
    /// Citation count at the corpus snapshot date, self-citations included.
    pub citations: u64,
    pub journal_id: Option<String>,
}

impl IndexRecord {
    pub fn new(categories: &[&str], journal_metric: Option<f64>, citations: u64) -> Self {
        IndexRecord {
            subject_categories: categories.iter().map(|c| c.to_string()).collect(),
            journal_metric,
            citations,
            journal_id: None,
        }
    }

    pub fn with_journal(mut self, journal_id: &str) -> Self {
        self.journal_id = Some(journal_id.to_string());
        self
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.subject_categories.is_empty()
            || self.subject_categories.iter().any(|c| c.trim().is_empty())
        {
            out.push("subject category list must be non-empty".to_string());
        }
        if let Some(m) = self.journal_metric {
            if !m.is_finite() || m < 0.0 {
                out.push(format!("journal metric {m} must be a non-negative number"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    pub id: String,
    pub kind: ProductKind,
    pub year: i32,
    pub wos: Option<IndexRecord>,
    pub scopus: Option<IndexRecord>,
    pub fraud: bool,
}

impl Product {
    pub fn new(id: &str, kind: ProductKind, year: i32) -> Self {
        Product {
            id: id.to_string(),
            kind,
            year,
            wos: None,
            scopus: None,
            fraud: false,
        }
    }

    pub fn with_wos(mut self, record: IndexRecord) -> Self {
        self.wos = Some(record);
        self
    }

    pub fn with_scopus(mut self, record: IndexRecord) -> Self {
        self.scopus = Some(record);
        self
    }

    pub fn is_wos_indexed(&self) -> bool {
        self.wos.is_some()
    }

    /// Largest citation count across index records; 0 when not indexed.
    pub fn citation_count(&self) -> u64 {
        self.wos
            .iter()
            .chain(self.scopus.iter())
            .map(|r| r.citations)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Researcher {
    pub id: String,
    /// Scientific disciplinary sector, e.g. `CHIM/03`. May be empty.
    pub sds: String,
    pub uda: u8,
    pub quota: u32,
}

impl Researcher {
    pub fn new(id: &str, sds: &str, uda: u8, quota: u32) -> Self {
        Researcher {
            id: id.to_string(),
            sds: sds.to_string(),
            uda,
            quota,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Authorship {
    pub researcher_id: String,
    pub product_id: String,
    /// 1 is the highest priority; `None` means the product was not proposed.
    pub declared_priority: Option<u32>,
    /// Panel the researcher routed this product to, overriding their own UDA.
    pub gev_override: Option<u8>,
}

impl Authorship {
    pub fn new(researcher_id: &str, product_id: &str, declared_priority: Option<u32>) -> Self {
        Authorship {
            researcher_id: researcher_id.to_string(),
            product_id: product_id.to_string(),
            declared_priority,
            gev_override: None,
        }
    }

    pub fn proposed(&self) -> bool {
        self.declared_priority.is_some()
    }
}

/// Validated, immutable institutional data set.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    researchers: BTreeMap<String, Researcher>,
    products: BTreeMap<String, Product>,
    authorships: Vec<Authorship>,
    snapshot_date: NaiveDate,
    window: YearRange,
}

pub fn default_snapshot_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2011, 12, 31).expect("valid date")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    DuplicateKey,
    UnknownKey,
    DuplicatePriority,
    OutOfRange,
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub file: String,
    pub line: u64,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file, self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },
    #[error("{} validation error(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

impl CorpusError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            CorpusError::Invalid(v) => v,
            _ => &[],
        }
    }
}

/// A row together with the file position it came from.
#[derive(Clone, Debug)]
pub(crate) struct Located<T> {
    pub line: u64,
    pub item: T,
}

pub(crate) fn synthetic_lines<T>(items: Vec<T>) -> Vec<Located<T>> {
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| Located {
            line: i as u64 + 2,
            item,
        })
        .collect()
}

impl Corpus {
    /// Builds and validates a corpus from in-memory rows. Violations are
    /// reported against the line each row would occupy in its CSV file.
    pub fn from_parts(
        researchers: Vec<Researcher>,
        products: Vec<Product>,
        authorships: Vec<Authorship>,
        snapshot_date: NaiveDate,
        window: YearRange,
    ) -> Result<Corpus, CorpusError> {
        Corpus::from_located(
            synthetic_lines(researchers),
            synthetic_lines(products),
            synthetic_lines(authorships),
            snapshot_date,
            window,
        )
    }

    pub(crate) fn from_located(
        researchers: Vec<Located<Researcher>>,
        products: Vec<Located<Product>>,
        authorships: Vec<Located<Authorship>>,
        snapshot_date: NaiveDate,
        window: YearRange,
    ) -> Result<Corpus, CorpusError> {
        let mut violations = Vec::new();
        let mut push = |file: &str, line: u64, kind: ViolationKind, message: String| {
            violations.push(Violation {
                file: file.to_string(),
                line,
                kind,
                message,
            })
        };

        if window.is_empty() {
            push(
                "corpus.json",
                1,
                ViolationKind::OutOfRange,
                format!("evaluation window {window} is empty"),
            );
        }

        let mut researcher_map = BTreeMap::new();
        for Located { line, item: r } in researchers {
            if r.id.trim().is_empty() {
                push(RESEARCHERS_FILE, line, ViolationKind::OutOfRange, "empty researcher id".into());
                continue;
            }
            if r.quota > MAX_QUOTA {
                push(
                    RESEARCHERS_FILE,
                    line,
                    ViolationKind::OutOfRange,
                    format!("researcher '{}' quota {} exceeds {MAX_QUOTA}", r.id, r.quota),
                );
            }
            if !(1..=14).contains(&r.uda) {
                push(
                    RESEARCHERS_FILE,
                    line,
                    ViolationKind::OutOfRange,
                    format!("researcher '{}' uda {} outside 1-14", r.id, r.uda),
                );
            } else if let Some(expected) = uda_for_sds(&r.sds) {
                if expected != r.uda {
                    push(
                        RESEARCHERS_FILE,
                        line,
                        ViolationKind::Inconsistent,
                        format!(
                            "researcher '{}' sds '{}' belongs to uda {expected}, not {}",
                            r.id, r.sds, r.uda
                        ),
                    );
                }
            }
            if researcher_map.contains_key(&r.id) {
                push(
                    RESEARCHERS_FILE,
                    line,
                    ViolationKind::DuplicateKey,
                    format!("duplicate researcher id '{}'", r.id),
                );
            } else {
                researcher_map.insert(r.id.clone(), r);
            }
        }

        let mut product_map = BTreeMap::new();
        for Located { line, item: p } in products {
            if p.id.trim().is_empty() {
                push(PRODUCTS_FILE, line, ViolationKind::OutOfRange, "empty product id".into());
                continue;
            }
            for (label, record) in [("wos", &p.wos), ("scopus", &p.scopus)] {
                if let Some(record) = record {
                    for problem in record.problems() {
                        push(
                            PRODUCTS_FILE,
                            line,
                            ViolationKind::OutOfRange,
                            format!("product '{}' {label} record: {problem}", p.id),
                        );
                    }
                }
            }
            if product_map.contains_key(&p.id) {
                push(
                    PRODUCTS_FILE,
                    line,
                    ViolationKind::DuplicateKey,
                    format!("duplicate product id '{}'", p.id),
                );
            } else {
                product_map.insert(p.id.clone(), p);
            }
        }

        let mut pairs = BTreeSet::new();
        let mut priorities: BTreeSet<(String, u32)> = BTreeSet::new();
        let mut kept = Vec::new();
        for Located { line, item: a } in authorships {
            let mut ok = true;
            if !researcher_map.contains_key(&a.researcher_id) {
                push(
                    AUTHORSHIPS_FILE,
                    line,
                    ViolationKind::UnknownKey,
                    format!("unknown researcher id '{}'", a.researcher_id),
                );
                ok = false;
            }
            if !product_map.contains_key(&a.product_id) {
                push(
                    AUTHORSHIPS_FILE,
                    line,
                    ViolationKind::UnknownKey,
                    format!("unknown product id '{}'", a.product_id),
                );
                ok = false;
            }
            if let Some(g) = a.gev_override {
                if !BIBLIOMETRIC_UDAS.contains(&g) {
                    push(
                        AUTHORSHIPS_FILE,
                        line,
                        ViolationKind::OutOfRange,
                        format!("gev_override {g} outside 1-9"),
                    );
                    ok = false;
                }
            }
            match a.declared_priority {
                Some(0) => {
                    push(
                        AUTHORSHIPS_FILE,
                        line,
                        ViolationKind::OutOfRange,
                        "declared_priority must be a positive integer".into(),
                    );
                    ok = false;
                }
                Some(p) if !priorities.insert((a.researcher_id.clone(), p)) => {
                    push(
                        AUTHORSHIPS_FILE,
                        line,
                        ViolationKind::DuplicatePriority,
                        format!(
                            "researcher '{}' declares priority {p} more than once",
                            a.researcher_id
                        ),
                    );
                    ok = false;
                }
                _ => {}
            }
            if !pairs.insert((a.researcher_id.clone(), a.product_id.clone())) {
                push(
                    AUTHORSHIPS_FILE,
                    line,
                    ViolationKind::DuplicateKey,
                    format!(
                        "duplicate authorship ('{}', '{}')",
                        a.researcher_id, a.product_id
                    ),
                );
                ok = false;
            }
            if ok {
                kept.push(a);
            }
        }

        if !violations.is_empty() {
            return Err(CorpusError::Invalid(violations));
        }
        Ok(Corpus {
            researchers: researcher_map,
            products: product_map,
            authorships: kept,
            snapshot_date,
            window,
        })
    }

    pub fn researchers(&self) -> impl Iterator<Item = &Researcher> {
        self.researchers.values()
    }

    pub fn products(&self) -> impl Iterator<Item = &Product> {
        self.products.values()
    }

    pub fn authorships(&self) -> &[Authorship] {
        &self.authorships
    }

    pub fn researcher(&self, id: &str) -> Option<&Researcher> {
        self.researchers.get(id)
    }

    pub fn product(&self, id: &str) -> Option<&Product> {
        self.products.get(id)
    }

    pub fn snapshot_date(&self) -> NaiveDate {
        self.snapshot_date
    }

    pub fn window(&self) -> YearRange {
        self.window
    }

    /// Same data evaluated over a different window.
    pub fn with_window(mut self, window: YearRange) -> Self {
        self.window = window;
        self
    }

    /// Panel a researcher's product is routed to.
    pub fn routing_gev(&self, authorship: &Authorship) -> u8 {
        authorship.gev_override.unwrap_or_else(|| {
            self.researchers
                .get(&authorship.researcher_id)
                .map(|r| r.uda)
                .unwrap_or(0)
        })
    }

    /// Authorships of one researcher, in file order.
    pub fn authorships_of<'a>(&'a self, researcher_id: &'a str) -> impl Iterator<Item = &'a Authorship> {
        self.authorships
            .iter()
            .filter(move |a| a.researcher_id == researcher_id)
    }
}

/// Outcome of the panel admissibility rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    Inadmissible(InadmissibleReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InadmissibleReason {
    OutOfWindow { year: i32, window: YearRange },
    KindNotAllowed(ProductKind),
}

impl fmt::Display for InadmissibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InadmissibleReason::OutOfWindow { year, window } => {
                write!(f, "out-of-window: year {year} outside {window}")
            }
            InadmissibleReason::KindNotAllowed(kind) => write!(f, "kind-not-allowed: {kind}"),
        }
    }
}

/// Checks the year window and the panel's allowed product kinds. Fraud is
/// not an admissibility question and is handled by the scorer.
pub fn admissibility(product: &Product, profile: &GevProfile, window: YearRange) -> Admissibility {
    if !window.contains(product.year) {
        return Admissibility::Inadmissible(InadmissibleReason::OutOfWindow {
            year: product.year,
            window,
        });
    }
    if !profile.allowed_kinds.contains(&product.kind) {
        return Admissibility::Inadmissible(InadmissibleReason::KindNotAllowed(product.kind));
    }
    Admissibility::Admissible
}

/// UDA implied by a sector code prefix, when the prefix is recognised.
pub fn uda_for_sds(sds: &str) -> Option<u8> {
    let prefix = sds.split('/').next()?.trim();
    if prefix.is_empty() {
        return None;
    }
    let uda = match prefix {
        "MAT" | "INF" => 1,
        "FIS" => 2,
        "CHIM" => 3,
        "GEO" => 4,
        "BIO" => 5,
        "MED" => 6,
        "AGR" | "VET" => 7,
        "ICAR" => 8,
        "ING-IND" | "ING-INF" => 9,
        "L-ANT" | "L-ART" | "L-FIL-LET" | "L-LIN" | "L-OR" => 10,
        "M-STO" | "M-FIL" | "M-PED" | "M-PSI" | "M-GGR" | "M-DEA" | "M-EDF" => 11,
        "IUS" => 12,
        "SECS-P" | "SECS-S" => 13,
        "SPS" => 14,
        _ => return None,
    };
    Some(uda)
}

/// Display name of a university disciplinary area.
pub fn uda_name(uda: u8) -> &'static str {
    match uda {
        1 => "Mathematics and computer science",
        2 => "Physics",
        3 => "Chemistry",
        4 => "Earth sciences",
        5 => "Biology",
        6 => "Medicine",
        7 => "Agricultural and veterinary sciences",
        8 => "Civil engineering and architecture",
        9 => "Industrial and information engineering",
        10 => "Ancient history, philology, literature and art",
        11 => "History, philosophy, pedagogy and psychology",
        12 => "Law",
        13 => "Economics and statistics",
        14 => "Political and social sciences",
        _ => "Unknown",
    }
}
