//! CSV loading and writing for corpora.
//!
//! ```text
//! researchers.csv   id,sds,uda,quota
//! products.csv      id,kind,year,fraud_flag,wos_categories,wos_metric,wos_citations,
//!                   wos_journal_id,scopus_categories,scopus_metric,scopus_citations,
//!                   scopus_journal_id
//! authorships.csv   researcher_id,product_id,declared_priority,gev_override
//! corpus.json       optional {"snapshot_date": "2011-12-31",
//!                             "evaluation_window": {"start": 2004, "end": 2010}}
//! ```
//!
//! Empty fields mean "absent"; category lists are `;`-separated.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use csv::Writer;
use serde::{Deserialize, Serialize};

use super::{
    default_snapshot_date, Authorship, Corpus, CorpusError, IndexRecord, Located, Product,
    ProductKind, Researcher, YearRange, AUTHORSHIPS_FILE, DEFAULT_QUOTA, PRODUCTS_FILE,
    RESEARCHERS_FILE,
};
use crate::table::{file_label, join_list, read_rows, split_list, Row, TableError};

pub const META_FILE: &str = "corpus.json";

const RESEARCHER_HEADER: [&str; 4] = ["id", "sds", "uda", "quota"];
const PRODUCT_HEADER: [&str; 12] = [
    "id",
    "kind",
    "year",
    "fraud_flag",
    "wos_categories",
    "wos_metric",
    "wos_citations",
    "wos_journal_id",
    "scopus_categories",
    "scopus_metric",
    "scopus_citations",
    "scopus_journal_id",
];
const AUTHORSHIP_HEADER: [&str; 4] = ["researcher_id", "product_id", "declared_priority", "gev_override"];

#[derive(Clone, Debug)]
pub struct CorpusPaths {
    pub researchers: PathBuf,
    pub products: PathBuf,
    pub authorships: PathBuf,
    pub meta: Option<PathBuf>,
}

impl CorpusPaths {
    /// Standard file names inside `dir`; the metadata file is optional.
    pub fn in_dir(dir: &Path) -> Self {
        let meta = dir.join(META_FILE);
        CorpusPaths {
            researchers: dir.join(RESEARCHERS_FILE),
            products: dir.join(PRODUCTS_FILE),
            authorships: dir.join(AUTHORSHIPS_FILE),
            meta: meta.exists().then_some(meta),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusMeta {
    #[serde(default = "default_snapshot_date")]
    snapshot_date: NaiveDate,
    #[serde(default)]
    evaluation_window: YearRange,
}

impl From<TableError> for CorpusError {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Io { path, source } => CorpusError::Io { path, source },
            TableError::Parse { file, line, message } => CorpusError::Parse { file, line, message },
        }
    }
}

fn row_error(path: &Path, row: &Row, message: String) -> CorpusError {
    CorpusError::Parse {
        file: file_label(path),
        line: row.line,
        message,
    }
}

pub fn load_corpus(paths: &CorpusPaths) -> Result<Corpus, CorpusError> {
    let meta = match &paths.meta {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
            serde_json::from_str::<CorpusMeta>(&text).map_err(|e| CorpusError::Parse {
                file: file_label(path),
                line: e.line() as u64,
                message: e.to_string(),
            })?
        }
        None => CorpusMeta {
            snapshot_date: default_snapshot_date(),
            evaluation_window: YearRange::default(),
        },
    };

    let researchers = read_rows(&paths.researchers, &RESEARCHER_HEADER)?
        .iter()
        .map(|row| {
            parse_researcher(row)
                .map(|item| Located { line: row.line, item })
                .map_err(|m| row_error(&paths.researchers, row, m))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let products = read_rows(&paths.products, &PRODUCT_HEADER)?
        .iter()
        .map(|row| {
            parse_product(row)
                .map(|item| Located { line: row.line, item })
                .map_err(|m| row_error(&paths.products, row, m))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let authorships = read_rows(&paths.authorships, &AUTHORSHIP_HEADER)?
        .iter()
        .map(|row| {
            parse_authorship(row)
                .map(|item| Located { line: row.line, item })
                .map_err(|m| row_error(&paths.authorships, row, m))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let corpus = Corpus::from_located(
        researchers,
        products,
        authorships,
        meta.snapshot_date,
        meta.evaluation_window,
    )?;
    log::info!(
        "loaded corpus: {} researchers, {} products, {} authorships",
        corpus.researchers.len(),
        corpus.products.len(),
        corpus.authorships.len()
    );
    Ok(corpus)
}

fn parse_researcher(row: &Row) -> Result<Researcher, String> {
    Ok(Researcher {
        id: row.field(0).to_string(),
        sds: row.field(1).to_string(),
        uda: row.parse(2, "uda")?,
        quota: row.parse_opt(3, "quota")?.unwrap_or(DEFAULT_QUOTA),
    })
}

fn parse_bool(raw: &str) -> Result<bool, String> {
    match raw.to_ascii_lowercase().as_str() {
        "" | "false" | "0" | "no" => Ok(false),
        "true" | "1" | "yes" => Ok(true),
        _ => Err(format!("invalid fraud_flag '{raw}'")),
    }
}

fn parse_record(row: &Row, first: usize, label: &str) -> Result<Option<IndexRecord>, String> {
    let fields = first..first + 4;
    if fields.clone().all(|i| row.opt(i).is_none()) {
        return Ok(None);
    }
    let categories = split_list(row.field(first));
    let citations = row
        .parse_opt::<u64>(first + 2, &format!("{label}_citations"))?
        .ok_or_else(|| format!("{label} record present but {label}_citations is empty"))?;
    Ok(Some(IndexRecord {
        subject_categories: categories,
        journal_metric: row.parse_opt(first + 1, &format!("{label}_metric"))?,
        citations,
        journal_id: row.opt(first + 3).map(str::to_string),
    }))
}

fn parse_product(row: &Row) -> Result<Product, String> {
    Ok(Product {
        id: row.field(0).to_string(),
        kind: row.field(1).parse::<ProductKind>()?,
        year: row.parse(2, "year")?,
        fraud: parse_bool(row.field(3))?,
        wos: parse_record(row, 4, "wos")?,
        scopus: parse_record(row, 8, "scopus")?,
    })
}

fn parse_authorship(row: &Row) -> Result<Authorship, String> {
    Ok(Authorship {
        researcher_id: row.field(0).to_string(),
        product_id: row.field(1).to_string(),
        declared_priority: row.parse_opt(2, "declared_priority")?,
        gev_override: row.parse_opt(3, "gev_override")?,
    })
}

fn record_fields(record: &Option<IndexRecord>) -> [String; 4] {
    match record {
        None => Default::default(),
        Some(r) => [
            join_list(&r.subject_categories),
            r.journal_metric.map(|m| m.to_string()).unwrap_or_default(),
            r.citations.to_string(),
            r.journal_id.clone().unwrap_or_default(),
        ],
    }
}

fn opt_string<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the corpus in the layout [`CorpusPaths::in_dir`] expects.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |e: csv::Error| CorpusError::Io {
            path,
            source: e.into(),
        }
    };
    fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    })?;

    let path = dir.join(RESEARCHERS_FILE);
    let mut w = Writer::from_path(&path).map_err(io_err(&path))?;
    w.write_record(RESEARCHER_HEADER).map_err(io_err(&path))?;
    for r in corpus.researchers() {
        w.write_record([r.id.clone(), r.sds.clone(), r.uda.to_string(), r.quota.to_string()])
            .map_err(io_err(&path))?;
    }
    w.flush().map_err(|e| io_err(&path)(e.into()))?;

    let path = dir.join(PRODUCTS_FILE);
    let mut w = Writer::from_path(&path).map_err(io_err(&path))?;
    w.write_record(PRODUCT_HEADER).map_err(io_err(&path))?;
    for p in corpus.products() {
        let mut fields = vec![
            p.id.clone(),
            p.kind.to_string(),
            p.year.to_string(),
            p.fraud.to_string(),
        ];
        fields.extend(record_fields(&p.wos));
        fields.extend(record_fields(&p.scopus));
        w.write_record(&fields).map_err(io_err(&path))?;
    }
    w.flush().map_err(|e| io_err(&path)(e.into()))?;

    let path = dir.join(AUTHORSHIPS_FILE);
    let mut w = Writer::from_path(&path).map_err(io_err(&path))?;
    w.write_record(AUTHORSHIP_HEADER).map_err(io_err(&path))?;
    for a in corpus.authorships() {
        w.write_record([
            a.researcher_id.clone(),
            a.product_id.clone(),
            opt_string(a.declared_priority),
            opt_string(a.gev_override),
        ])
        .map_err(io_err(&path))?;
    }
    w.flush().map_err(|e| io_err(&path)(e.into()))?;

    let meta = CorpusMeta {
        snapshot_date: corpus.snapshot_date(),
        evaluation_window: corpus.window(),
    };
    let path = dir.join(META_FILE);
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&path, text + "\n").map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}
