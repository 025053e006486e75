use std::collections::BTreeMap;

use super::{canonical_order, Candidate, CandidateSet, MinCostFlow, PortfolioSets, ScenarioTag, Selection};

/// Best possible selection from the given candidate set.
///
/// Solved as a capacitated bipartite matching: source to researcher with the
/// quota as capacity, researcher to product with the slot gain (score + 0.5)
/// as profit, product to sink with capacity 1. Only positive-gain edges are
/// built, so a slot is left empty whenever that is at least as good. Ties
/// between optima favour more-cited, older, lexicographically smaller
/// products through a secondary bonus that never outweighs one milli-point.
pub fn optimize_exact(sets: &PortfolioSets, set: CandidateSet) -> Selection {
    let tag = match set {
        CandidateSet::Proposed => ScenarioTag::ExactA,
        CandidateSet::All => ScenarioTag::ExactC,
    };
    let researchers: Vec<_> = sets.active().collect();

    // Global product order for the tie-break bonus.
    let mut products: BTreeMap<&str, &Candidate> = BTreeMap::new();
    for r in &researchers {
        for c in r.candidates(set).filter(|c| c.score.slot_gain() > 0) {
            products.entry(&c.product_id).or_insert(c);
        }
    }
    let mut ranked: Vec<&Candidate> = products.values().copied().collect();
    ranked.sort_by(|a, b| {
        b.citations
            .cmp(&a.citations)
            .then(a.year.cmp(&b.year))
            .then_with(|| a.product_id.cmp(&b.product_id))
    });
    let index: BTreeMap<&str, usize> = ranked
        .iter()
        .enumerate()
        .map(|(i, c)| (c.product_id.as_str(), i))
        .collect();
    let p = ranked.len() as i128;
    let scale = p * (p + 1) / 2 + 1;

    let source = 0;
    let sink = 1;
    let r_node = |i: usize| 2 + i;
    let p_node = |j: usize| 2 + researchers.len() + j;
    let mut g = MinCostFlow::new(2 + researchers.len() + ranked.len());
    for (j, _) in ranked.iter().enumerate() {
        g.add_edge(p_node(j), sink, 1, 0);
    }
    let mut edges: Vec<(usize, usize, &Candidate)> = Vec::new();
    for (i, r) in researchers.iter().enumerate() {
        g.add_edge(source, r_node(i), i64::from(r.quota), 0);
        for c in r.candidates(set).filter(|c| c.score.slot_gain() > 0) {
            let j = index[c.product_id.as_str()];
            let bonus = p - j as i128;
            let cost = -(i128::from(c.score.slot_gain()) * scale + bonus);
            edges.push((g.add_edge(r_node(i), p_node(j), 1, cost), i, c));
        }
    }
    g.min_cost_any_flow(source, sink);

    let mut chosen: BTreeMap<&str, Vec<&Candidate>> = BTreeMap::new();
    for (e, i, c) in edges {
        if g.flow_on(e) > 0 {
            chosen.entry(researchers[i].researcher_id.as_str()).or_default().push(c);
        }
    }
    for picks in chosen.values_mut() {
        picks.sort_by(|a, b| canonical_order(a, b));
    }
    Selection::from_assignment(tag, sets, &chosen)
}

#[cfg(test)]
mod tests {
    use super::super::testkit::*;
    use super::*;
    use crate::Score;

    #[test]
    fn single_researcher_with_shortfall() {
        let s = sets(vec![researcher("r", 3, 3, &[("a", 1.0), ("b", 0.8)], &[])]);
        let sel = optimize_exact(&s, CandidateSet::Proposed);
        assert_eq!(sel.total_score, Score::from_milli(1300));
        assert_eq!(sel.shortfall["r"], 1);
    }

    #[test]
    fn shared_product_instance() {
        let s = sets(vec![
            researcher("r1", 3, 1, &[("shared", 1.0), ("q", 0.8)], &[]),
            researcher("r2", 3, 1, &[("shared", 1.0)], &[]),
        ]);
        let sel = optimize_exact(&s, CandidateSet::Proposed);
        assert_eq!(sel.total_score, Score::from_milli(1800));
        sel.check_feasible(&s, CandidateSet::Proposed).unwrap();
    }

    #[test]
    fn inadmissible_candidate_left_out() {
        let s = sets(vec![researcher("r", 3, 2, &[("ok", 0.5), ("bad", -1.0)], &[])]);
        let sel = optimize_exact(&s, CandidateSet::Proposed);
        assert_eq!(sel.assignment["r"].len(), 1);
        assert_eq!(sel.total_score, Score::ZERO);
    }

    #[test]
    fn nil_products_beat_empty_slots() {
        let s = sets(vec![researcher("r", 3, 1, &[("nil", 0.0)], &[])]);
        let sel = optimize_exact(&s, CandidateSet::Proposed);
        assert_eq!(sel.assignment["r"].len(), 1);
        assert_eq!(sel.total_score, Score::ZERO);
    }

    #[test]
    fn ties_prefer_cited_products() {
        let mut a = cand("a", 0.8, Some(1));
        let mut b = cand("b", 0.8, Some(2));
        a.citations = 1;
        b.citations = 9;
        let r = super::super::ResearcherSets::new("r", 3, 1, vec![a, b], vec![]);
        let sel = optimize_exact(&sets(vec![r]), CandidateSet::Proposed);
        assert_eq!(sel.assignment["r"][0].product_id, "b");
    }

    #[test]
    fn quota_zero_researchers_are_ignored() {
        let s = sets(vec![
            researcher("r0", 3, 0, &[("p", 1.0)], &[]),
            researcher("r1", 3, 1, &[("p", 1.0)], &[]),
        ]);
        let sel = optimize_exact(&s, CandidateSet::Proposed);
        assert!(!sel.assignment.contains_key("r0"));
        assert_eq!(sel.assignment["r1"][0].product_id, "p");
    }
}
