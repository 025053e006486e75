//! Portfolio sets, selection-error taxonomy, institutional selection
//! scenarios and the exact optimum.

mod exact;
mod flow;
mod greedy;
mod sets;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

pub use exact::optimize_exact;
pub use flow::MinCostFlow;
pub use greedy::{scenario1, scenario2, scenario3, scenario_greedy};
pub use sets::{build_sets, error_metrics, Candidate, ErrorCounts, ErrorReport, PortfolioSets, ResearcherErrors, ResearcherSets};

use crate::score::Score;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("authorship ('{researcher_id}', '{product_id}') has no score")]
    Unscored {
        researcher_id: String,
        product_id: String,
    },
}

/// Which products a researcher may be assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CandidateSet {
    /// Set A: products the researcher proposed.
    Proposed,
    /// Set C: proposed plus indexed-but-unproposed products.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioTag {
    Scenario1,
    Scenario2,
    Scenario3,
    ExactA,
    ExactC,
}

impl ScenarioTag {
    pub const ALL: [ScenarioTag; 5] = [
        ScenarioTag::Scenario1,
        ScenarioTag::Scenario2,
        ScenarioTag::Scenario3,
        ScenarioTag::ExactA,
        ScenarioTag::ExactC,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioTag::Scenario1 => "1",
            ScenarioTag::Scenario2 => "2",
            ScenarioTag::Scenario3 => "3",
            ScenarioTag::ExactA => "exact-A",
            ScenarioTag::ExactC => "exact-C",
        }
    }
}

impl fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" | "scenario1" => Ok(ScenarioTag::Scenario1),
            "2" | "scenario2" => Ok(ScenarioTag::Scenario2),
            "3" | "scenario3" => Ok(ScenarioTag::Scenario3),
            "exact-A" | "exact-a" => Ok(ScenarioTag::ExactA),
            "exact-C" | "exact-c" => Ok(ScenarioTag::ExactC),
            other => Err(format!(
                "unknown scenario '{other}' (expected 1, 2, 3, exact-A or exact-C)"
            )),
        }
    }
}

/// Runs the engine behind a scenario tag.
pub fn run_scenario(tag: ScenarioTag, sets: &PortfolioSets) -> Selection {
    match tag {
        ScenarioTag::Scenario1 => scenario1(sets),
        ScenarioTag::Scenario2 => scenario2(sets),
        ScenarioTag::Scenario3 => scenario3(sets),
        ScenarioTag::ExactA => optimize_exact(sets, CandidateSet::Proposed),
        ScenarioTag::ExactC => optimize_exact(sets, CandidateSet::All),
    }
}

/// Orders candidates best first: score descending, then citations
/// descending, year ascending and product id ascending.
pub fn canonical_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .cmp(&a.score)
        .then(b.citations.cmp(&a.citations))
        .then(a.year.cmp(&b.year))
        .then_with(|| a.product_id.cmp(&b.product_id))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assigned {
    pub product_id: String,
    pub score: Score,
}

/// Products assigned to researcher slots, with shortfall penalties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub tag: ScenarioTag,
    pub assignment: BTreeMap<String, Vec<Assigned>>,
    pub shortfall: BTreeMap<String, u32>,
    /// Assigned scores minus 0.5 per empty slot.
    pub total_score: Score,
    /// Subtotals by the researcher's UDA.
    pub per_uda: BTreeMap<u8, Score>,
    /// Slots due by UDA.
    pub products_due: BTreeMap<u8, u32>,
}

impl Selection {
    /// Completes an assignment (researcher id to chosen product ids) into a
    /// scored selection. Researchers with quota 0 are left out.
    pub(crate) fn from_assignment(
        tag: ScenarioTag,
        sets: &PortfolioSets,
        chosen: &BTreeMap<&str, Vec<&Candidate>>,
    ) -> Selection {
        let mut assignment = BTreeMap::new();
        let mut shortfall = BTreeMap::new();
        let mut per_uda: BTreeMap<u8, Score> = BTreeMap::new();
        let mut products_due: BTreeMap<u8, u32> = BTreeMap::new();
        for r in sets.active() {
            let picks: Vec<Assigned> = chosen
                .get(r.researcher_id.as_str())
                .map(|v| {
                    v.iter()
                        .map(|c| Assigned {
                            product_id: c.product_id.clone(),
                            score: c.score,
                        })
                        .collect()
                })
                .unwrap_or_default();
            debug_assert!(picks.len() as u32 <= r.quota);
            let missing = r.quota - picks.len() as u32;
            let subtotal: Score =
                picks.iter().map(|a| a.score).sum::<Score>() + Score::MISSING * i64::from(missing);
            *per_uda.entry(r.uda).or_default() += subtotal;
            *products_due.entry(r.uda).or_default() += r.quota;
            assignment.insert(r.researcher_id.clone(), picks);
            shortfall.insert(r.researcher_id.clone(), missing);
        }
        Selection {
            tag,
            total_score: per_uda.values().sum(),
            assignment,
            shortfall,
            per_uda,
            products_due,
        }
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.values().map(Vec::len).sum()
    }

    /// Checks the structural invariants against the sets the selection was
    /// drawn from: each product used once, slots plus shortfall equal quota,
    /// every pick in the allowed candidate set with its recorded score, and
    /// the total consistent with picks and penalties.
    pub fn check_feasible(&self, sets: &PortfolioSets, allowed: CandidateSet) -> Result<(), String> {
        let mut used = BTreeSet::new();
        let mut total = Score::ZERO;
        for r in sets.active() {
            let picks = self
                .assignment
                .get(&r.researcher_id)
                .ok_or_else(|| format!("researcher '{}' missing", r.researcher_id))?;
            let missing = self.shortfall.get(&r.researcher_id).copied().unwrap_or(0);
            if picks.len() as u32 + missing != r.quota {
                return Err(format!(
                    "researcher '{}': {} picks + {missing} shortfall != quota {}",
                    r.researcher_id,
                    picks.len(),
                    r.quota
                ));
            }
            for a in picks {
                if !used.insert(a.product_id.clone()) {
                    return Err(format!("product '{}' assigned twice", a.product_id));
                }
                let c = r
                    .candidates(allowed)
                    .find(|c| c.product_id == a.product_id)
                    .ok_or_else(|| {
                        format!("'{}' not a candidate of '{}'", a.product_id, r.researcher_id)
                    })?;
                if c.score != a.score {
                    return Err(format!("score mismatch for '{}'", a.product_id));
                }
                total += a.score;
            }
            total += Score::MISSING * i64::from(missing);
        }
        if self.assignment.len() != sets.active().count() {
            return Err("selection covers researchers outside the active roster".into());
        }
        if total != self.total_score {
            return Err(format!("total {} != recomputed {total}", self.total_score));
        }
        Ok(())
    }
}

/// Writes `scenario,researcher_id,slot,product_id_or_EMPTY,score_or_penalty`,
/// one row per slot.
pub fn write_selection_csv<W: Write>(selections: &[Selection], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "researcher_id", "slot", "product_id_or_EMPTY", "score_or_penalty"])?;
    for sel in selections {
        for (researcher, picks) in &sel.assignment {
            let missing = sel.shortfall.get(researcher).copied().unwrap_or(0) as usize;
            let rows = picks
                .iter()
                .map(|a| (a.product_id.as_str(), a.score))
                .chain(std::iter::repeat_n(("EMPTY", Score::MISSING), missing));
            for (slot, (product, score)) in rows.enumerate() {
                w.write_record([
                    sel.tag.as_str(),
                    researcher,
                    &(slot + 1).to_string(),
                    product,
                    &score.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::testkit::*;
    use super::*;

    #[test]
    fn scenario_tags_parse() {
        for tag in ScenarioTag::ALL {
            assert_eq!(tag.as_str().parse::<ScenarioTag>(), Ok(tag));
        }
        assert!("4".parse::<ScenarioTag>().is_err());
    }

    #[test]
    fn canonical_order_breaks_ties() {
        let mut a = cand("b", 0.8, None);
        let mut b = cand("a", 0.8, None);
        assert_eq!(canonical_order(&a, &b), Ordering::Greater);
        a.citations = 5;
        assert_eq!(canonical_order(&a, &b), Ordering::Less);
        b.citations = 5;
        b.year = 2009;
        assert_eq!(canonical_order(&a, &b), Ordering::Less);
        assert_eq!(canonical_order(&cand("z", 1.0, None), &a), Ordering::Less);
    }

    #[test]
    fn selection_csv_lists_empty_slots() {
        let s = sets(vec![researcher("r1", 3, 3, &[("p1", 1.0), ("p2", 0.8)], &[])]);
        let sel = scenario1(&s);
        let mut buf = Vec::new();
        write_selection_csv(&[sel], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "scenario,researcher_id,slot,product_id_or_EMPTY,score_or_penalty\n\
             1,r1,1,p1,1.0\n1,r1,2,p2,0.8\n1,r1,3,EMPTY,-0.5\n"
        );
    }

    #[test]
    fn feasibility_check_catches_duplicates() {
        let s = sets(vec![
            researcher("r1", 3, 1, &[("p", 1.0)], &[]),
            researcher("r2", 3, 1, &[("p", 1.0)], &[]),
        ]);
        let mut sel = scenario1(&s);
        sel.check_feasible(&s, CandidateSet::Proposed).unwrap();
        sel.assignment.get_mut("r2").unwrap().push(Assigned {
            product_id: "p".into(),
            score: Score::EXCELLENT,
        });
        sel.shortfall.insert("r2".into(), 0);
        assert!(sel.check_feasible(&s, CandidateSet::Proposed).is_err());
    }
}
