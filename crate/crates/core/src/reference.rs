//! World reference distributions and percentile classes.
//!
//! Each distribution is summarised by its 50th, 60th and 80th percentiles
//! (nearest-rank rule). A value is then placed in class 1 (top 20%), 2
//! (60-80%), 3 (50-60%) or 4 (bottom half). Ties at a boundary fall into the
//! lower class: a value equal to `p80` is class 2.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{file_label, read_rows, Row, TableError};

pub const THRESHOLDS_FILE: &str = "thresholds.csv";
pub const WORLDVALUES_FILE: &str = "worldvalues.csv";
pub const MERGEMAP_FILE: &str = "mergemap.csv";

const WORLDVALUES_HEADER: [&str; 5] = ["indicator", "category_group", "year", "doc_split", "value"];
const THRESHOLDS_HEADER: [&str; 8] = [
    "indicator",
    "category_group",
    "year",
    "doc_split",
    "p50",
    "p60",
    "p80",
    "n",
];
const MERGEMAP_HEADER: [&str; 2] = ["category", "category_group"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Indicator {
    /// Journal impact (impact factor or SJR).
    JournalMetric,
    /// Citations received by the product.
    Citations,
}

impl Indicator {
    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::JournalMetric => "journal-metric",
            Indicator::Citations => "citations",
        }
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "journal-metric" | "IR" | "I_R" => Ok(Indicator::JournalMetric),
            "citations" | "IC" | "I_C" => Ok(Indicator::Citations),
            _ => Err(format!("unknown indicator '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocSplit {
    Any,
    Article,
    Review,
}

impl DocSplit {
    pub fn as_str(self) -> &'static str {
        match self {
            DocSplit::Any => "any",
            DocSplit::Article => "article",
            DocSplit::Review => "review",
        }
    }
}

impl FromStr for DocSplit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" | "" => Ok(DocSplit::Any),
            "article" => Ok(DocSplit::Article),
            "review" => Ok(DocSplit::Review),
            _ => Err(format!("unknown doc_split '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DistributionKey {
    pub indicator: Indicator,
    pub category_group: String,
    pub year: i32,
    pub doc_split: DocSplit,
}

impl DistributionKey {
    pub fn new(indicator: Indicator, category_group: &str, year: i32, doc_split: DocSplit) -> Self {
        DistributionKey {
            indicator,
            category_group: category_group.to_string(),
            year,
            doc_split,
        }
    }
}

impl fmt::Display for DistributionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.indicator.as_str(),
            self.category_group,
            self.year,
            self.doc_split.as_str()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassThresholds {
    pub p50: f64,
    pub p60: f64,
    pub p80: f64,
    /// Number of world values the thresholds were computed from.
    pub n: u64,
}

impl ClassThresholds {
    pub fn new(p50: f64, p60: f64, p80: f64, n: u64) -> Result<Self, ReferenceError> {
        let t = ClassThresholds { p50, p60, p80, n };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<(), ReferenceError> {
        let finite = [self.p50, self.p60, self.p80].iter().all(|v| v.is_finite());
        if !finite || !(self.p50 <= self.p60 && self.p60 <= self.p80) || self.n == 0 {
            return Err(ReferenceError::BadThresholds(*self));
        }
        Ok(())
    }
}

/// Percentile class of an indicator value; smaller is better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndicatorClass {
    Top = 1,
    Second = 2,
    Third = 3,
    Bottom = 4,
}

impl IndicatorClass {
    pub const ALL: [IndicatorClass; 4] = [
        IndicatorClass::Top,
        IndicatorClass::Second,
        IndicatorClass::Third,
        IndicatorClass::Bottom,
    ];

    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn from_rank(rank: u8) -> Option<Self> {
        match rank {
            1 => Some(IndicatorClass::Top),
            2 => Some(IndicatorClass::Second),
            3 => Some(IndicatorClass::Third),
            4 => Some(IndicatorClass::Bottom),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize - 1
    }
}

impl Serialize for IndicatorClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.rank())
    }
}

impl<'de> Deserialize<'de> for IndicatorClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rank = u8::deserialize(d)?;
        IndicatorClass::from_rank(rank)
            .ok_or_else(|| serde::de::Error::custom(format!("class {rank} outside 1-4")))
    }
}

pub(crate) fn class_index(class: IndicatorClass) -> usize {
    class.index()
}

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("cannot build thresholds from an empty distribution")]
    Empty,
    #[error("world value {0} is negative or not finite")]
    BadValue(f64),
    #[error("thresholds {0:?} violate p50 <= p60 <= p80 or n >= 1")]
    BadThresholds(ClassThresholds),
    #[error("missing reference distribution for key {0}")]
    MissingDistribution(DistributionKey),
    #[error("{file}:{line}: duplicate distribution key {key}")]
    DuplicateKey {
        file: String,
        line: u64,
        key: DistributionKey,
    },
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
}

impl From<TableError> for ReferenceError {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Io { path, source } => ReferenceError::Io { path, source },
            TableError::Parse { file, line, message } => ReferenceError::Parse { file, line, message },
        }
    }
}

/// 1-based nearest rank of quantile `percent`/100 in a sample of `n`:
/// `ceil(percent * n / 100)`, computed exactly.
fn nearest_rank(percent: u64, n: u64) -> u64 {
    (percent * n).div_ceil(100).max(1)
}

/// Empirical 50th, 60th and 80th percentiles by the nearest-rank rule.
pub fn build_thresholds(values: &[f64]) -> Result<ClassThresholds, ReferenceError> {
    if values.is_empty() {
        return Err(ReferenceError::Empty);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(ReferenceError::BadValue(bad));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as u64;
    let at = |percent| sorted[(nearest_rank(percent, n) - 1) as usize];
    Ok(ClassThresholds {
        p50: at(50),
        p60: at(60),
        p80: at(80),
        n,
    })
}

pub fn classify(value: f64, thresholds: &ClassThresholds) -> IndicatorClass {
    if value > thresholds.p80 {
        IndicatorClass::Top
    } else if value > thresholds.p60 {
        IndicatorClass::Second
    } else if value > thresholds.p50 {
        IndicatorClass::Third
    } else {
        IndicatorClass::Bottom
    }
}

/// Threshold table keyed by distribution, plus the category merge map used
/// by panels that pool subject categories into larger groups.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReferenceLibrary {
    thresholds: BTreeMap<DistributionKey, ClassThresholds>,
    merge_map: BTreeMap<String, String>,
}

impl ReferenceLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: DistributionKey, thresholds: ClassThresholds) {
        self.thresholds.insert(key, thresholds);
    }

    pub fn map_category(&mut self, category: &str, group: &str) {
        self.merge_map.insert(category.to_string(), group.to_string());
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DistributionKey, &ClassThresholds)> {
        self.thresholds.iter()
    }

    /// Group a category belongs to after applying the merge map.
    pub fn group_of<'a>(&'a self, category: &'a str) -> &'a str {
        self.merge_map.get(category).map(String::as_str).unwrap_or(category)
    }

    pub fn get(&self, key: &DistributionKey) -> Result<&ClassThresholds, ReferenceError> {
        self.thresholds
            .get(key)
            .ok_or_else(|| ReferenceError::MissingDistribution(key.clone()))
    }

    /// Applies the merge map to `category`, then resolves the key.
    pub fn lookup(
        &self,
        indicator: Indicator,
        category: &str,
        year: i32,
        doc_split: DocSplit,
    ) -> Result<&ClassThresholds, ReferenceError> {
        self.get(&DistributionKey::new(indicator, self.group_of(category), year, doc_split))
    }

    /// Resolves the key with the category taken verbatim.
    pub fn lookup_direct(
        &self,
        indicator: Indicator,
        category: &str,
        year: i32,
        doc_split: DocSplit,
    ) -> Result<&ClassThresholds, ReferenceError> {
        self.get(&DistributionKey::new(indicator, category, year, doc_split))
    }

    /// Computes thresholds for every distribution in a world-values file.
    pub fn from_world_values(path: &Path) -> Result<Self, ReferenceError> {
        let mut values: BTreeMap<DistributionKey, Vec<f64>> = BTreeMap::new();
        for row in read_rows(path, &WORLDVALUES_HEADER)? {
            let key = parse_key(&row).map_err(|m| parse_err(path, &row, m))?;
            let value: f64 = row.parse(4, "value").map_err(|m| parse_err(path, &row, m))?;
            if !value.is_finite() || value < 0.0 {
                return Err(parse_err(path, &row, format!("value {value} must be non-negative")));
            }
            values.entry(key).or_default().push(value);
        }
        let mut lib = ReferenceLibrary::new();
        for (key, vals) in values {
            let t = build_thresholds(&vals)?;
            lib.insert(key, t);
        }
        Ok(lib)
    }

    /// Reads a precomputed thresholds file; values are trusted as given
    /// apart from the ordering invariant.
    pub fn from_thresholds_file(path: &Path) -> Result<Self, ReferenceError> {
        let mut lib = ReferenceLibrary::new();
        for row in read_rows(path, &THRESHOLDS_HEADER)? {
            let key = parse_key(&row).map_err(|m| parse_err(path, &row, m))?;
            let fields = (|| -> Result<ClassThresholds, String> {
                Ok(ClassThresholds {
                    p50: row.parse(4, "p50")?,
                    p60: row.parse(5, "p60")?,
                    p80: row.parse(6, "p80")?,
                    n: row.parse(7, "n")?,
                })
            })()
            .map_err(|m| parse_err(path, &row, m))?;
            fields
                .check()
                .map_err(|e| parse_err(path, &row, e.to_string()))?;
            if lib.thresholds.contains_key(&key) {
                return Err(ReferenceError::DuplicateKey {
                    file: file_label(path),
                    line: row.line,
                    key,
                });
            }
            lib.insert(key, fields);
        }
        Ok(lib)
    }

    pub fn load_merge_map(&mut self, path: &Path) -> Result<(), ReferenceError> {
        for row in read_rows(path, &MERGEMAP_HEADER)? {
            let (category, group) = (row.field(0), row.field(1));
            if category.is_empty() || group.is_empty() {
                return Err(parse_err(path, &row, "empty category or group".into()));
            }
            if self.merge_map.contains_key(category) {
                return Err(parse_err(path, &row, format!("category '{category}' mapped twice")));
            }
            self.map_category(category, group);
        }
        Ok(())
    }

    /// Loads a reference directory: `thresholds.csv` and/or
    /// `worldvalues.csv`, plus an optional `mergemap.csv`. A key present in
    /// both threshold sources is an error.
    pub fn load_dir(dir: &Path) -> Result<Self, ReferenceError> {
        let thresholds = dir.join(THRESHOLDS_FILE);
        let world = dir.join(WORLDVALUES_FILE);
        let merge = dir.join(MERGEMAP_FILE);
        if !thresholds.exists() && !world.exists() {
            return Err(ReferenceError::Io {
                path: dir.display().to_string(),
                source: std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("neither {THRESHOLDS_FILE} nor {WORLDVALUES_FILE} found"),
                ),
            });
        }
        let mut lib = if thresholds.exists() {
            ReferenceLibrary::from_thresholds_file(&thresholds)?
        } else {
            ReferenceLibrary::new()
        };
        if world.exists() {
            for (key, t) in ReferenceLibrary::from_world_values(&world)?.thresholds {
                if lib.thresholds.contains_key(&key) {
                    return Err(ReferenceError::DuplicateKey {
                        file: WORLDVALUES_FILE.to_string(),
                        line: 0,
                        key,
                    });
                }
                lib.insert(key, t);
            }
        }
        if merge.exists() {
            lib.load_merge_map(&merge)?;
        }
        Ok(lib)
    }

    /// Writes the threshold table in `thresholds.csv` layout, keys sorted.
    pub fn write_thresholds<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(THRESHOLDS_HEADER)?;
        for (key, t) in &self.thresholds {
            w.write_record([
                key.indicator.as_str().to_string(),
                key.category_group.clone(),
                key.year.to_string(),
                key.doc_split.as_str().to_string(),
                t.p50.to_string(),
                t.p60.to_string(),
                t.p80.to_string(),
                t.n.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_key(row: &Row) -> Result<DistributionKey, String> {
    let group = row.field(1);
    if group.is_empty() {
        return Err("missing category_group".into());
    }
    Ok(DistributionKey {
        indicator: row.field(0).parse()?,
        category_group: group.to_string(),
        year: row.parse(2, "year")?,
        doc_split: row.field(3).parse()?,
    })
}

fn parse_err(path: &Path, row: &Row, message: String) -> ReferenceError {
    ReferenceError::Parse {
        file: file_label(path),
        line: row.line,
        message,
    }
}
