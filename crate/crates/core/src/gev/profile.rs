//! Panel rule sets and their JSON configuration format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GevError;
use crate::corpus::{ProductKind, YearRange, BIBLIOMETRIC_UDAS};
use crate::reference::{class_index, IndicatorClass};
use crate::score::Score;

/// Built-in profile pack, one entry per bibliometric panel.
const DEFAULT_PACK: &str = include_str!("../../data/profiles.json");

/// Merit judgement from a classification matrix cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeritOutcome {
    A,
    B,
    C,
    D,
    /// Routed to informed peer review.
    IR,
}

impl MeritOutcome {
    /// Fixed score of a definite judgement; `None` for peer review.
    pub fn fixed_score(self) -> Option<Score> {
        match self {
            MeritOutcome::A => Some(Score::EXCELLENT),
            MeritOutcome::B => Some(Score::GOOD),
            MeritOutcome::C => Some(Score::ACCEPTABLE),
            MeritOutcome::D => Some(Score::LIMITED),
            MeritOutcome::IR => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeritOutcome::A => "A",
            MeritOutcome::B => "B",
            MeritOutcome::C => "C",
            MeritOutcome::D => "D",
            MeritOutcome::IR => "IR",
        }
    }
}

impl fmt::Display for MeritOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// 4x4 table from (citation class, journal class) to a merit outcome.
/// Rows are citation classes 1-4, columns journal classes 1-4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassificationMatrix {
    cells: [[MeritOutcome; 4]; 4],
}

impl ClassificationMatrix {
    pub const fn new(cells: [[MeritOutcome; 4]; 4]) -> Self {
        ClassificationMatrix { cells }
    }

    pub fn lookup(&self, ic: IndicatorClass, ir: IndicatorClass) -> MeritOutcome {
        self.cells[class_index(ic)][class_index(ir)]
    }

    /// Chemistry matrix for mature products (2004-2008): citations dominate.
    pub const fn chemistry_mature() -> Self {
        use MeritOutcome::*;
        ClassificationMatrix::new([
            [A, A, A, IR],
            [B, B, B, IR],
            [IR, C, C, C],
            [IR, D, D, D],
        ])
    }

    /// Chemistry matrix for recent products (2009-2010): journal impact
    /// dominates.
    pub const fn chemistry_recent() -> Self {
        use MeritOutcome::*;
        ClassificationMatrix::new([
            [A, IR, IR, IR],
            [A, B, C, D],
            [A, B, C, D],
            [IR, IR, IR, D],
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourcePolicy {
    /// Only the WoS record counts.
    WosOnly,
    /// Evaluate WoS and Scopus records and keep the better result.
    BestOfBoth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeBand {
    pub years: YearRange,
    pub matrix: ClassificationMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GevProfile {
    pub gev_id: u8,
    pub name: String,
    pub allowed_kinds: BTreeSet<ProductKind>,
    pub age_bands: Vec<AgeBand>,
    pub source_policy: SourcePolicy,
    /// Separate citation distributions for articles and reviews.
    pub split_citation_doctype: bool,
    /// Resolve subject categories through the library merge map.
    pub category_groups: bool,
    /// Published journal classes that replace the journal-metric percentile.
    pub ir_journal_class_list: Option<BTreeMap<String, IndicatorClass>>,
    /// Journals whose reviews go straight to peer review.
    pub forced_ir_journals: Option<BTreeSet<String>>,
    pub no_metric_score: Score,
    pub non_indexed_score: Score,
    pub ir_assumed_score: Score,
}

impl GevProfile {
    pub fn band_for(&self, year: i32) -> Option<&AgeBand> {
        self.age_bands.iter().find(|b| b.years.contains(year))
    }

    pub fn matrix_for(&self, year: i32) -> Option<&ClassificationMatrix> {
        self.band_for(year).map(|b| &b.matrix)
    }

    pub fn listed_journal_class(&self, journal_id: Option<&str>) -> Option<IndicatorClass> {
        let list = self.ir_journal_class_list.as_ref()?;
        list.get(journal_id?).copied()
    }

    pub fn forces_review(&self, journal_id: Option<&str>) -> bool {
        match (&self.forced_ir_journals, journal_id) {
            (Some(set), Some(j)) => set.contains(j),
            _ => false,
        }
    }

    /// Age bands must jointly cover every year of `window`.
    pub fn check_window(&self, window: YearRange) -> Result<(), GevError> {
        match (window.start..=window.end).find(|&y| self.band_for(y).is_none()) {
            Some(year) => Err(GevError::WindowNotCovered {
                gev_id: self.gev_id,
                year,
                window,
            }),
            None => Ok(()),
        }
    }

    fn check(&self) -> Result<(), String> {
        if !BIBLIOMETRIC_UDAS.contains(&self.gev_id) {
            return Err(format!("gev_id {} outside 1-9", self.gev_id));
        }
        if self.age_bands.is_empty() {
            return Err("at least one age band is required".into());
        }
        for (i, a) in self.age_bands.iter().enumerate() {
            if a.years.is_empty() {
                return Err(format!("age band {} is empty", a.years));
            }
            if let Some(b) = self.age_bands[i + 1..].iter().find(|b| a.years.overlaps(&b.years)) {
                return Err(format!("age bands {} and {} overlap", a.years, b.years));
            }
        }
        if ![0, 250, 500].contains(&self.no_metric_score.milli()) {
            return Err(format!(
                "no_metric_score {} must be one of 0, 0.25, 0.5",
                self.no_metric_score
            ));
        }
        for (label, s) in [
            ("non_indexed_score", self.non_indexed_score),
            ("ir_assumed_score", self.ir_assumed_score),
        ] {
            if s < Score::ZERO || s > Score::EXCELLENT {
                return Err(format!("{label} {s} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Profiles for panels 1-9, keyed by panel id.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSet {
    profiles: BTreeMap<u8, GevProfile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    profiles: Vec<ProfileConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileConfig {
    gev_id: u8,
    #[serde(default)]
    name: String,
    allowed_kinds: BTreeSet<ProductKind>,
    age_bands: Vec<AgeBand>,
    #[serde(default = "default_policy")]
    source_policy: SourcePolicy,
    #[serde(default)]
    split_citation_doctype: bool,
    #[serde(default)]
    category_groups: bool,
    #[serde(default)]
    ir_journal_class_list: Option<BTreeMap<String, IndicatorClass>>,
    #[serde(default)]
    forced_ir_journals: Option<BTreeSet<String>>,
    #[serde(default = "quarter")]
    no_metric_score: f64,
    #[serde(default = "quarter")]
    non_indexed_score: f64,
    #[serde(default = "half")]
    ir_assumed_score: f64,
}

fn default_policy() -> SourcePolicy {
    SourcePolicy::BestOfBoth
}

fn quarter() -> f64 {
    0.25
}

fn half() -> f64 {
    0.5
}

impl ProfileConfig {
    fn into_profile(self) -> Result<GevProfile, String> {
        let score = |label: &str, v: f64| {
            Score::from_decimal(v)
                .ok_or_else(|| format!("{label} {v} is not a multiple of 0.001"))
        };
        let profile = GevProfile {
            gev_id: self.gev_id,
            name: self.name,
            allowed_kinds: self.allowed_kinds,
            age_bands: self.age_bands,
            source_policy: self.source_policy,
            split_citation_doctype: self.split_citation_doctype,
            category_groups: self.category_groups,
            ir_journal_class_list: self.ir_journal_class_list,
            forced_ir_journals: self.forced_ir_journals,
            no_metric_score: score("no_metric_score", self.no_metric_score)?,
            non_indexed_score: score("non_indexed_score", self.non_indexed_score)?,
            ir_assumed_score: score("ir_assumed_score", self.ir_assumed_score)?,
        };
        profile.check()?;
        Ok(profile)
    }
}

impl ProfileSet {
    pub fn from_json(text: &str) -> Result<Self, GevError> {
        let file: ProfileFile =
            serde_json::from_str(text).map_err(|e| GevError::Config(e.to_string()))?;
        let mut profiles = BTreeMap::new();
        for config in file.profiles {
            let id = config.gev_id;
            let profile = config
                .into_profile()
                .map_err(|m| GevError::Config(format!("profile {id}: {m}")))?;
            if profiles.insert(id, profile).is_some() {
                return Err(GevError::Config(format!("profile {id} defined twice")));
            }
        }
        Ok(ProfileSet { profiles })
    }

    pub fn load(path: &Path) -> Result<Self, GevError> {
        let text = std::fs::read_to_string(path).map_err(|source| GevError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ProfileSet::from_json(&text)
    }

    /// The shipped pack. Only the Chemistry matrices are published; the other
    /// panels reuse them as stand-ins.
    pub fn default_pack() -> Self {
        ProfileSet::from_json(DEFAULT_PACK).expect("built-in profile pack is valid")
    }

    pub fn default_pack_json() -> &'static str {
        DEFAULT_PACK
    }

    pub fn from_profiles(profiles: impl IntoIterator<Item = GevProfile>) -> Result<Self, GevError> {
        let mut map = BTreeMap::new();
        for p in profiles {
            p.check()
                .map_err(|m| GevError::Config(format!("profile {}: {m}", p.gev_id)))?;
            map.insert(p.gev_id, p);
        }
        Ok(ProfileSet { profiles: map })
    }

    pub fn get(&self, gev: u8) -> Result<&GevProfile, GevError> {
        if (10..=14).contains(&gev) {
            return Err(GevError::PeerReviewOnly(gev));
        }
        self.profiles.get(&gev).ok_or(GevError::UnknownGev(gev))
    }

    pub fn get_mut(&mut self, gev: u8) -> Option<&mut GevProfile> {
        self.profiles.get_mut(&gev)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GevProfile> {
        self.profiles.values()
    }
}
