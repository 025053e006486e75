use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::{canonical_order, Candidate, CandidateSet, PortfolioSets, ScenarioTag, Selection};

/// Scenario 1: every researcher's own priorities, with contested products
/// going to the co-author who ranked them higher.
///
/// Each round, every researcher with free slots claims their next
/// unconsumed proposal. A product claimed by several researchers goes to the
/// smallest declared priority, then to the claimant with fewer unconsumed
/// proposals left, then to the smaller researcher id. Losers try their next
/// proposal in the following round. Proposals are taken whatever their
/// score.
pub fn scenario1(sets: &PortfolioSets) -> Selection {
    let researchers: Vec<_> = sets.active().collect();
    let mut consumed: BTreeSet<&str> = BTreeSet::new();
    let mut chosen: BTreeMap<&str, Vec<&Candidate>> = BTreeMap::new();
    let mut cursor = vec![0usize; researchers.len()];

    loop {
        // (product, priority, remaining, researcher id, researcher index)
        let mut claims: BTreeMap<&str, Vec<(u32, usize, &str, usize)>> = BTreeMap::new();
        for (i, r) in researchers.iter().enumerate() {
            let taken = chosen.get(r.researcher_id.as_str()).map_or(0, Vec::len);
            if taken as u32 >= r.quota {
                continue;
            }
            while cursor[i] < r.proposed.len()
                && consumed.contains(r.proposed[cursor[i]].product_id.as_str())
            {
                cursor[i] += 1;
            }
            let Some(c) = r.proposed.get(cursor[i]) else {
                continue;
            };
            let remaining = r.proposed[cursor[i]..]
                .iter()
                .filter(|c| !consumed.contains(c.product_id.as_str()))
                .count();
            claims.entry(c.product_id.as_str()).or_default().push((
                c.priority.unwrap_or(u32::MAX),
                remaining,
                r.researcher_id.as_str(),
                i,
            ));
        }
        if claims.is_empty() {
            break;
        }
        for (product, claimants) in claims {
            let &(_, _, _, winner) = claimants.iter().min().expect("non-empty claim list");
            let r = researchers[winner];
            chosen
                .entry(r.researcher_id.as_str())
                .or_default()
                .push(&r.proposed[cursor[winner]]);
            consumed.insert(product);
        }
    }
    Selection::from_assignment(ScenarioTag::Scenario1, sets, &chosen)
}

/// Scenario 2: the institution picks greedily from the proposals (set A).
pub fn scenario2(sets: &PortfolioSets) -> Selection {
    scenario_greedy(sets, CandidateSet::Proposed, ScenarioTag::Scenario2)
}

/// Scenario 3: the institution picks greedily from all products (set C).
pub fn scenario3(sets: &PortfolioSets) -> Selection {
    scenario_greedy(sets, CandidateSet::All, ScenarioTag::Scenario3)
}

/// Greedy institutional selection.
///
/// The best remaining (researcher, product) pair in canonical order is
/// examined next. Every researcher with free slots who could still take that
/// product is a claimant; it goes to the claimant whose best other remaining
/// candidate scores lowest (no alternative at all counts as lowest), ties to
/// the smaller researcher id. Products whose slot gain is not positive are
/// never picked, so such slots stay empty.
pub fn scenario_greedy(sets: &PortfolioSets, set: CandidateSet, tag: ScenarioTag) -> Selection {
    struct Queue<'a> {
        id: &'a str,
        quota: usize,
        candidates: Vec<&'a Candidate>,
    }

    let queues: Vec<Queue> = sets
        .active()
        .map(|r| {
            let mut candidates: Vec<&Candidate> = r
                .candidates(set)
                .filter(|c| c.score.slot_gain() > 0)
                .collect();
            candidates.sort_by(|a, b| canonical_order(a, b));
            Queue {
                id: &r.researcher_id,
                quota: r.quota as usize,
                candidates,
            }
        })
        .collect();

    let mut consumed: BTreeSet<&str> = BTreeSet::new();
    let mut chosen: BTreeMap<&str, Vec<&Candidate>> = BTreeMap::new();
    let has_capacity =
        |q: &Queue, chosen: &BTreeMap<&str, Vec<&Candidate>>| chosen.get(q.id).map_or(0, Vec::len) < q.quota;

    loop {
        let mut best: Option<&Candidate> = None;
        for q in queues.iter().filter(|q| has_capacity(q, &chosen)) {
            let head = q
                .candidates
                .iter()
                .find(|c| !consumed.contains(c.product_id.as_str()));
            if let Some(&c) = head {
                if best.is_none_or(|b| canonical_order(c, b) == Ordering::Less) {
                    best = Some(c);
                }
            }
        }
        let Some(best) = best else { break };
        let product = best.product_id.as_str();

        let mut winner: Option<(Option<crate::Score>, &Queue, &Candidate)> = None;
        for q in queues.iter().filter(|q| has_capacity(q, &chosen)) {
            let Some(&own) = q
                .candidates
                .iter()
                .find(|c| c.product_id == product)
            else {
                continue;
            };
            let alternative = q
                .candidates
                .iter()
                .find(|c| c.product_id != product && !consumed.contains(c.product_id.as_str()))
                .map(|c| c.score);
            // Queues iterate in id order, so strict comparison keeps the smaller id on ties.
            if winner.as_ref().is_none_or(|(alt, _, _)| alternative < *alt) {
                winner = Some((alternative, q, own));
            }
        }
        let (_, q, own) = winner.expect("the best pair's owner is a claimant");
        chosen.entry(q.id).or_default().push(own);
        consumed.insert(product);
    }
    Selection::from_assignment(tag, sets, &chosen)
}

#[cfg(test)]
mod tests {
    use super::super::testkit::*;
    use super::*;
    use crate::Score;

    fn picks(sel: &Selection, r: &str) -> Vec<String> {
        sel.assignment[r].iter().map(|a| a.product_id.clone()).collect()
    }

    #[test]
    fn scenario1_follows_declared_order() {
        let s = sets(vec![
            researcher("r1", 3, 1, &[("p", 1.0), ("q", 0.5)], &[]),
            researcher("r2", 3, 1, &[("x", 0.8), ("p", 1.0)], &[]),
        ]);
        // r2 claims x in round 1, p is uncontested
        let sel = scenario1(&s);
        assert_eq!(picks(&sel, "r1"), ["p"]);
        assert_eq!(picks(&sel, "r2"), ["x"]);

        let s = sets(vec![
            researcher("r1", 3, 2, &[("p", 1.0), ("q", 0.5)], &[]),
            researcher("r2", 3, 2, &[("x", 0.8), ("p", 1.0)], &[]),
        ]);
        let sel = scenario1(&s);
        assert_eq!(picks(&sel, "r1"), ["p", "q"]);
        assert_eq!(picks(&sel, "r2"), ["x"]);
        assert_eq!(sel.shortfall["r2"], 1);
    }

    #[test]
    fn scenario1_contest_on_declared_priority() {
        // r2 declares p at priority 2 but reaches it in round 1 after r1 does
        let mut r2 = researcher("r2", 3, 1, &[("p", 1.0)], &[]);
        r2.proposed[0].priority = Some(2);
        let s = sets(vec![researcher("r1", 3, 1, &[("p", 1.0), ("q", 0.5)], &[]), r2]);
        let sel = scenario1(&s);
        assert_eq!(picks(&sel, "r1"), ["p"]);
        assert!(picks(&sel, "r2").is_empty());
        assert_eq!(sel.total_score, Score::from_milli(500));
    }

    #[test]
    fn scenario1_shortfall_penalty() {
        let s = sets(vec![researcher("r", 3, 3, &[("p1", 1.0), ("p2", 0.8)], &[])]);
        let sel = scenario1(&s);
        assert_eq!(sel.shortfall["r"], 1);
        assert_eq!(sel.total_score, Score::from_milli(1300));
    }

    #[test]
    fn scenario1_equal_priority_tie_breaks() {
        // fewer remaining proposals wins
        let s = sets(vec![
            researcher("r1", 3, 1, &[("p", 1.0), ("q", 0.5)], &[]),
            researcher("r2", 3, 1, &[("p", 1.0)], &[]),
        ]);
        let sel = scenario1(&s);
        assert_eq!(picks(&sel, "r2"), ["p"]);
        assert_eq!(picks(&sel, "r1"), ["q"]);
        // then the smaller id
        let s = sets(vec![
            researcher("r2", 3, 1, &[("p", 1.0), ("y", 0.5)], &[]),
            researcher("r1", 3, 1, &[("p", 1.0), ("x", 0.5)], &[]),
        ]);
        let sel = scenario1(&s);
        assert_eq!(picks(&sel, "r1"), ["p"]);
        assert_eq!(picks(&sel, "r2"), ["y"]);
    }

    #[test]
    fn scenario1_takes_inadmissible_proposals() {
        let s = sets(vec![researcher("r", 3, 1, &[("bad", -1.0), ("good", 1.0)], &[])]);
        let sel = scenario1(&s);
        assert_eq!(picks(&sel, "r"), ["bad"]);
        assert_eq!(sel.total_score, Score::INADMISSIBLE);
    }

    #[test]
    fn greedy_conflict_goes_to_weaker_alternative() {
        let s = sets(vec![
            researcher("r1", 3, 1, &[("shared", 1.0), ("q", 0.8)], &[]),
            researcher("r2", 3, 1, &[("shared", 1.0)], &[]),
        ]);
        let sel = scenario2(&s);
        assert_eq!(picks(&sel, "r2"), ["shared"]);
        assert_eq!(picks(&sel, "r1"), ["q"]);
        assert_eq!(sel.total_score, Score::from_milli(1800));
    }

    #[test]
    fn greedy_without_conflicts_takes_top_quota() {
        let s = sets(vec![
            researcher("r1", 3, 2, &[("a", 0.5), ("b", 1.0), ("c", 0.8)], &[]),
            researcher("r2", 6, 1, &[("d", 0.25), ("e", 0.5)], &[]),
        ]);
        let sel = scenario2(&s);
        assert_eq!(picks(&sel, "r1"), ["b", "c"]);
        assert_eq!(picks(&sel, "r2"), ["e"]);
    }

    #[test]
    fn scenario3_uses_unproposed_products() {
        let s = sets(vec![researcher("r", 3, 1, &[("a", 0.5), ("b", 0.5)], &[("x", 1.0)])]);
        assert_eq!(picks(&scenario2(&s), "r"), ["a"]);
        assert_eq!(picks(&scenario3(&s), "r"), ["x"]);
    }

    #[test]
    fn greedy_skips_non_positive_gain() {
        let s = sets(vec![researcher("r", 3, 2, &[("bad", -1.0), ("fraud", -2.0)], &[])]);
        let sel = scenario2(&s);
        assert!(picks(&sel, "r").is_empty());
        assert_eq!(sel.total_score, Score::from_milli(-1000));
    }

    #[test]
    fn greedy_tie_on_alternative_goes_to_smaller_id() {
        let s = sets(vec![
            researcher("r2", 3, 1, &[("p", 1.0), ("x", 0.5)], &[]),
            researcher("r1", 3, 1, &[("p", 1.0), ("y", 0.5)], &[]),
        ]);
        let sel = scenario2(&s);
        assert_eq!(picks(&sel, "r1"), ["p"]);
        assert_eq!(picks(&sel, "r2"), ["x"]);
    }
}
