//! Comparison tables: scenario totals per UDA, selection errors and
//! average scores of the declared and best sets.
//!
//! Every table renders to markdown and CSV from the same cells, so both
//! outputs carry identical numbers. Rounding is half away from zero
//! throughout and computed on exact integers.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::corpus::uda_name;
use crate::score::{div_round_half_away, format_tenths};
use crate::selection::{ErrorCounts, ErrorReport, PortfolioSets, ScenarioTag, Selection};
use crate::Score;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("no selections to report")]
    Empty,
    #[error("scenario {0} appears more than once")]
    DuplicateScenario(ScenarioTag),
    #[error("scenario {0} was computed on a different corpus (slots due differ)")]
    MismatchedCorpus(ScenarioTag),
}

/// Percentage change from `from` to `to` in tenths of a percent, or `None`
/// when `from` is zero.
pub fn delta_tenths(from: Score, to: Score) -> Option<i128> {
    let from = i128::from(from.milli());
    let to = i128::from(to.milli());
    (from != 0).then(|| div_round_half_away((to - from) * 1000, from))
}

/// Renders a percentage change as "+25.9%", "-0.9%", "0.0%", or "—" when
/// undefined.
pub fn format_delta(tenths: Option<i128>) -> String {
    match tenths {
        None => "—".to_string(),
        Some(0) => "0.0%".to_string(),
        Some(t) if t > 0 => format!("+{}%", format_tenths(t)),
        Some(t) => format!("{}%", format_tenths(t)),
    }
}

/// `format_delta(delta_tenths(from, to))`.
pub fn render_delta(from: Score, to: Score) -> String {
    format_delta(delta_tenths(from, to))
}

/// Header plus rows of already-rendered cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Pipe table with a title line; the first column is left-aligned and
    /// the rest right-aligned.
    pub fn to_markdown(&self) -> String {
        let width = |s: &str| s.chars().count();
        let mut widths: Vec<usize> = self.header.iter().map(|h| width(h).max(3)).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(width(cell));
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, &w))| {
                    let pad = " ".repeat(w - width(c));
                    if i == 0 {
                        format!("{c}{pad}")
                    } else {
                        format!("{pad}{c}")
                    }
                })
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let mut out = format!("## {}\n\n", self.title);
        out.push_str(&line(&self.header));
        let rule: Vec<String> = widths
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                if i == 0 {
                    format!(":{}", "-".repeat(w - 1))
                } else {
                    format!("{}:", "-".repeat(w - 1))
                }
            })
            .collect();
        out.push_str(&format!("| {} |\n", rule.join(" | ")));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn uda_label(uda: u8) -> String {
    format!("{uda} - {}", uda_name(uda))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioRow {
    /// `None` for the Total row.
    pub uda: Option<u8>,
    pub products_due: u32,
    pub scores: BTreeMap<ScenarioTag, Score>,
}

impl ScenarioRow {
    /// Percentage change between two scenarios, if both were run.
    pub fn delta(&self, from: ScenarioTag, to: ScenarioTag) -> Option<Option<i128>> {
        Some(delta_tenths(*self.scores.get(&from)?, *self.scores.get(&to)?))
    }
}

/// Scenario totals per UDA and overall.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioTable {
    pub tags: Vec<ScenarioTag>,
    pub rows: Vec<ScenarioRow>,
    pub total: ScenarioRow,
}

const DELTAS: [(ScenarioTag, ScenarioTag, &str); 3] = [
    (ScenarioTag::Scenario1, ScenarioTag::Scenario2, "1 vs 2"),
    (ScenarioTag::Scenario2, ScenarioTag::Scenario3, "2 vs 3"),
    (ScenarioTag::Scenario1, ScenarioTag::Scenario3, "1 vs 3"),
];

/// Collects selections into per-UDA rows. All selections must cover the
/// same researchers, which shows in identical slots due per UDA.
pub fn scenario_table(selections: &[Selection]) -> Result<ScenarioTable, ReportError> {
    let first = selections.first().ok_or(ReportError::Empty)?;
    let mut by_tag: BTreeMap<ScenarioTag, &Selection> = BTreeMap::new();
    for s in selections {
        if s.products_due != first.products_due {
            return Err(ReportError::MismatchedCorpus(s.tag));
        }
        if by_tag.insert(s.tag, s).is_some() {
            return Err(ReportError::DuplicateScenario(s.tag));
        }
    }
    let rows = first
        .products_due
        .iter()
        .map(|(&uda, &due)| ScenarioRow {
            uda: Some(uda),
            products_due: due,
            scores: by_tag
                .iter()
                .map(|(&t, s)| (t, s.per_uda.get(&uda).copied().unwrap_or_default()))
                .collect(),
        })
        .collect::<Vec<_>>();
    let total = ScenarioRow {
        uda: None,
        products_due: first.products_due.values().sum(),
        scores: by_tag
            .keys()
            .map(|&t| (t, rows.iter().map(|r| r.scores[&t]).sum()))
            .collect(),
    };
    Ok(ScenarioTable {
        tags: by_tag.keys().copied().collect(),
        rows,
        total,
    })
}

impl ScenarioTable {
    fn deltas(&self) -> impl Iterator<Item = &(ScenarioTag, ScenarioTag, &'static str)> {
        DELTAS
            .iter()
            .filter(|(a, b, _)| self.tags.contains(a) && self.tags.contains(b))
    }

    pub fn table(&self) -> Table {
        let mut header = vec!["UDA".to_string(), "Products due".to_string()];
        header.extend(self.tags.iter().map(|t| match t {
            ScenarioTag::Scenario1 | ScenarioTag::Scenario2 | ScenarioTag::Scenario3 => {
                format!("Scen. {t}")
            }
            _ => format!("Opt. {}", &t.as_str()[6..]),
        }));
        header.extend(self.deltas().map(|(_, _, label)| label.to_string()));
        let render = |row: &ScenarioRow| {
            let mut cells = vec![
                row.uda.map_or_else(|| "Total".to_string(), uda_label),
                row.products_due.to_string(),
            ];
            cells.extend(self.tags.iter().map(|t| row.scores[t].format_1dp()));
            cells.extend(
                self.deltas()
                    .map(|&(a, b, _)| format_delta(row.delta(a, b).flatten())),
            );
            cells
        };
        let mut rows: Vec<Vec<String>> = self.rows.iter().map(render).collect();
        rows.push(render(&self.total));
        Table {
            title: "Total score by selection scenario".to_string(),
            header,
            rows,
        }
    }
}

fn share_cell(part: u64, whole: u64, of: &str) -> String {
    if whole == 0 {
        return format!("{part} (— of {of})");
    }
    let tenths = div_round_half_away(i128::from(part) * 1000, i128::from(whole));
    format!("{part} ({}% of {of})", format_tenths(tenths))
}

/// Errors and omissions in the researchers' own selections, overall and by
/// UDA.
pub fn error_table(report: &ErrorReport) -> Table {
    let mut columns: Vec<(String, &ErrorCounts)> = vec![("Total".to_string(), &report.total)];
    columns.extend(report.per_uda.iter().map(|(&u, c)| (uda_label(u), c)));

    type Cell = fn(&ErrorCounts) -> String;
    let lines: [(&str, Cell); 9] = [
        ("Products to be submitted", |c| c.products_due.to_string()),
        ("Number of products in set D", |c| c.declared.to_string()),
        ("Of which inadmissible", |c| c.inadmissible_in_d.to_string()),
        ("Of which with nil score", |c| c.nil_in_d.to_string()),
        ("Of which over-valued", |c| share_cell(c.overvalued, c.declared, "D")),
        ("Number of products in set E", |c| c.best.to_string()),
        ("Of which with nil score", |c| c.nil_in_e.to_string()),
        ("Of which under-valued", |c| share_cell(c.undervalued, c.best, "E")),
        ("Of which omitted", |c| share_cell(c.omitted, c.best, "E")),
    ];
    let mut header = vec![String::new()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));
    let rows = lines
        .iter()
        .map(|(label, cell)| {
            let mut row = vec![label.to_string()];
            row.extend(columns.iter().map(|(_, c)| cell(c)));
            row
        })
        .collect();
    Table {
        title: "Errors and omissions in researchers' selections".to_string(),
        header,
        rows,
    }
}

/// Sum and count of scores, kept exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Mean {
    pub sum: Score,
    pub count: u64,
}

impl Mean {
    fn push(&mut self, s: Score) {
        self.sum += s;
        self.count += 1;
    }

    pub fn value(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum.as_f64() / self.count as f64)
    }

    /// Two decimals, or "—" for an empty set.
    pub fn render(&self) -> String {
        if self.count == 0 {
            return "—".to_string();
        }
        let hundredths = div_round_half_away(
            i128::from(self.sum.milli()),
            i128::from(self.count) * 10,
        );
        format_hundredths(hundredths)
    }
}

fn format_hundredths(h: i128) -> String {
    let sign = if h < 0 { "-" } else { "" };
    let abs = h.unsigned_abs();
    format!("{sign}{}.{:02}", abs / 100, abs % 100)
}

/// Mean scores of D and E for one column family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MeanPair {
    pub declared: Mean,
    pub best: Mean,
}

impl MeanPair {
    /// Mean difference E − D in milli-points, as a numerator over
    /// `declared.count * best.count`.
    fn diff_numerator(&self) -> i128 {
        i128::from(self.best.sum.milli()) * i128::from(self.declared.count)
            - i128::from(self.declared.sum.milli()) * i128::from(self.best.count)
    }

    /// Difference of the unrounded means, two decimals.
    pub fn render_difference(&self) -> String {
        if self.declared.count == 0 || self.best.count == 0 {
            return "—".to_string();
        }
        let den = i128::from(self.declared.count) * i128::from(self.best.count) * 10;
        format_hundredths(div_round_half_away(self.diff_numerator(), den))
    }

    /// Increase from D to E in whole percent, signed.
    pub fn render_increase(&self) -> String {
        if self.declared.count == 0 || self.best.count == 0 || self.declared.sum == Score::ZERO {
            return "—".to_string();
        }
        let den = i128::from(self.declared.sum.milli()) * i128::from(self.best.count);
        let pct = div_round_half_away(self.diff_numerator() * 100, den);
        if pct < 0 {
            format!("{pct}%")
        } else {
            format!("+{pct}%")
        }
    }
}

/// Mean scores of the declared (D) and best (E) sets, over all products and
/// over products with a definite bibliometric score only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AverageScoreTable {
    pub all: MeanPair,
    pub definite: MeanPair,
}

/// Averages over authorships, so a co-authored product counts once per
/// author.
pub fn average_table(sets: &PortfolioSets) -> AverageScoreTable {
    let mut t = AverageScoreTable::default();
    for r in sets.iter() {
        for c in r.declared_scores() {
            t.all.declared.push(c.score);
            if c.definite {
                t.definite.declared.push(c.score);
            }
        }
        for c in r.best_scores() {
            t.all.best.push(c.score);
            if c.definite {
                t.definite.best.push(c.score);
            }
        }
    }
    t
}

impl AverageScoreTable {
    pub fn table(&self) -> Table {
        let header = ["", "All products", "Those with definite score"]
            .map(String::from)
            .to_vec();
        let row = |label: &str, f: &dyn Fn(&MeanPair) -> String| {
            vec![label.to_string(), f(&self.all), f(&self.definite)]
        };
        Table {
            title: "Average score of products in sets D and E".to_string(),
            header,
            rows: vec![
                row("Products in set D", &|p| p.declared.render()),
                row("Products in set E", &|p| p.best.render()),
                row("Difference", &|p| p.render_difference()),
                row("Increase", &|p| p.render_increase()),
            ],
        }
    }
}

/// The full markdown report: scenario totals (when any scenario was run),
/// selection errors and average scores.
pub fn render_markdown(
    scenarios: Option<&ScenarioTable>,
    errors: &ErrorReport,
    averages: &AverageScoreTable,
) -> String {
    let mut out = String::from("# Selection report\n\n");
    if let Some(s) = scenarios {
        out.push_str(&s.table().to_markdown());
        out.push('\n');
    }
    out.push_str(&error_table(errors).to_markdown());
    out.push('\n');
    out.push_str(&averages.table().to_markdown());
    out
}
