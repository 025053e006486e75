//! Shared helpers for integration tests: an exhaustive assignment oracle,
//! a random instance generator and paths to the committed fixtures.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use assess_opt::gev::{MeritOutcome, Outcome};
use assess_opt::selection::{Candidate, CandidateSet, PortfolioSets, ResearcherSets};
use assess_opt::Score;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini_university")
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_assess-opt"))
}

pub fn score(x: f64) -> Score {
    Score::from_decimal(x).expect("representable score")
}

pub fn cand(id: &str, s: f64, priority: Option<u32>, citations: u64) -> Candidate {
    Candidate {
        product_id: id.to_string(),
        score: score(s),
        outcome: Outcome::Matrix(MeritOutcome::A),
        definite: true,
        citations,
        year: 2006,
        priority,
    }
}

/// Best achievable total, by exhaustive search over every way of giving each
/// product to at most one eligible researcher. Searches connected
/// components (researchers linked through shared candidates) separately and
/// memoises on remaining capacities, which keeps it exact.
pub fn brute_force_best(sets: &PortfolioSets, allowed: CandidateSet) -> Score {
    let researchers: Vec<&ResearcherSets> = sets.iter().filter(|r| r.quota > 0).collect();
    let n = researchers.len();

    // product -> [(researcher index, score)]
    let mut by_product: BTreeMap<String, Vec<(usize, i64)>> = BTreeMap::new();
    for (i, r) in researchers.iter().enumerate() {
        for c in r.candidates(allowed) {
            by_product
                .entry(c.product_id.clone())
                .or_default()
                .push((i, c.score.milli()));
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let root = find(p, p[x]);
            p[x] = root;
        }
        p[x]
    }
    for owners in by_product.values() {
        for w in owners.windows(2) {
            let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
            parent[a] = b;
        }
    }
    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }

    let mut total = 0i64;
    for members in components.values() {
        let local: HashMap<usize, usize> = members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let products: Vec<Vec<(usize, i64)>> = by_product
            .values()
            .filter(|o| local.contains_key(&o[0].0))
            .map(|o| o.iter().map(|&(i, s)| (local[&i], s)).collect())
            .collect();
        let caps: Vec<u32> = members.iter().map(|&i| researchers[i].quota).collect();
        let mut memo = HashMap::new();
        total += search(&products, 0, &mut caps.clone(), &mut memo);
    }
    Score::from_milli(total)
}

/// Best sum of picks from product `k` on, minus 0.5 per slot left free.
fn search(
    products: &[Vec<(usize, i64)>],
    k: usize,
    caps: &mut Vec<u32>,
    memo: &mut HashMap<(usize, Vec<u32>), i64>,
) -> i64 {
    if k == products.len() {
        return caps.iter().map(|&c| -500 * i64::from(c)).sum();
    }
    if let Some(&v) = memo.get(&(k, caps.clone())) {
        return v;
    }
    let mut best = search(products, k + 1, caps, memo);
    for &(r, s) in &products[k] {
        if caps[r] > 0 {
            caps[r] -= 1;
            best = best.max(s + search(products, k + 1, caps, memo));
            caps[r] += 1;
        }
    }
    memo.insert((k, caps.clone()), best);
    best
}

const SCORES: [f64; 8] = [-2.0, -1.0, 0.0, 0.25, 0.5, 0.5, 0.8, 1.0];

/// Random instance: up to `max_r` researchers, `max_p` products, quotas
/// 0..=3, each product with one to three authors who each propose it with
/// probability 0.6. Co-authors usually share a score but may see a
/// different one (different panels).
pub fn random_instance<R: Rng>(rng: &mut R, max_r: usize, max_p: usize) -> PortfolioSets {
    let nr = rng.gen_range(1..=max_r);
    let np = rng.gen_range(1..=max_p);
    let mut proposed: Vec<Vec<Candidate>> = vec![Vec::new(); nr];
    let mut unproposed: Vec<Vec<Candidate>> = vec![Vec::new(); nr];
    for p in 0..np {
        let id = format!("p{p:02}");
        let base = SCORES[rng.gen_range(0..SCORES.len())];
        let citations = rng.gen_range(0..30);
        let year = rng.gen_range(2004..=2010);
        let mut authors: Vec<usize> = (0..nr).collect();
        authors.shuffle(rng);
        authors.truncate(rng.gen_range(1..=3.min(nr)));
        for a in authors {
            let s = if rng.gen_bool(0.8) { base } else { SCORES[rng.gen_range(0..SCORES.len())] };
            let mut c = cand(&id, s, None, citations);
            c.year = year;
            c.definite = rng.gen_bool(0.8);
            if rng.gen_bool(0.6) {
                proposed[a].push(c);
            } else {
                unproposed[a].push(c);
            }
        }
    }
    let researchers = (0..nr).map(|i| {
        let mut a = std::mem::take(&mut proposed[i]);
        a.shuffle(rng);
        for (k, c) in a.iter_mut().enumerate() {
            c.priority = Some(k as u32 + 1);
        }
        let quota = rng.gen_range(0..=3);
        ResearcherSets::new(&format!("r{i}"), [3u8, 6, 9][i % 3], quota, a, std::mem::take(&mut unproposed[i]))
    });
    PortfolioSets::from_researchers(researchers.collect::<Vec<_>>())
}

/// Three researchers where greedy selection over all products does worse
/// than greedy selection over the proposals alone.
///
/// r1 proposes p (1.0) and q (0.8); r2 proposes p and also wrote x (1.0)
/// without proposing it; r3 proposes x. From the proposals, p goes to r2
/// (no alternative), x to r3 and q to r1: 2.8. With x visible to r2, p goes
/// to r1 (weaker alternative), x to r2 on the id tie, and r3 is left empty:
/// 1.5. Both optima are 2.8.
pub fn greedy_regression_fixture() -> PortfolioSets {
    PortfolioSets::from_researchers([
        ResearcherSets::new("r1", 3, 1, vec![cand("p", 1.0, Some(1), 20), cand("q", 0.8, Some(2), 5)], vec![]),
        ResearcherSets::new("r2", 3, 1, vec![cand("p", 1.0, Some(1), 20)], vec![cand("x", 1.0, None, 10)]),
        ResearcherSets::new("r3", 3, 1, vec![cand("x", 1.0, Some(1), 10)], vec![]),
    ])
}

/// Taxonomy identities for every researcher; returns the first violation.
pub fn check_error_identities(sets: &PortfolioSets) -> Result<(), String> {
    let report = assess_opt::selection::error_metrics(sets);
    for (r, e) in sets.iter().zip(&report.researchers) {
        let d: BTreeSet<&str> = r.declared.iter().map(String::as_str).collect();
        let best: BTreeSet<&str> = r.best.iter().map(String::as_str).collect();
        let a: BTreeSet<&str> = r.proposed.iter().map(|c| c.product_id.as_str()).collect();
        let b: BTreeSet<&str> = r.unproposed.iter().map(|c| c.product_id.as_str()).collect();
        let over: BTreeSet<&str> = e.overvalued.iter().map(String::as_str).collect();
        let under: BTreeSet<&str> = e.undervalued.iter().map(String::as_str).collect();
        let omitted: BTreeSet<&str> = e.omitted.iter().map(String::as_str).collect();
        let fail = |what: &str| Err(format!("researcher {}: {what}", r.researcher_id));
        if !over.is_subset(&d) {
            return fail("overvalued not within D");
        }
        if !under.iter().all(|p| a.contains(p) && !d.contains(p)) {
            return fail("undervalued not within A - D");
        }
        if !omitted.is_subset(&b) {
            return fail("omitted not within B");
        }
        if !under.is_disjoint(&omitted) {
            return fail("undervalued and omitted overlap");
        }
        if d.intersection(&best).count() + over.len() != d.len() {
            return fail("|D ∩ E| + |overvalued| != |D|");
        }
        let missing: BTreeSet<&str> = best.difference(&d).copied().collect();
        let union: BTreeSet<&str> = under.union(&omitted).copied().collect();
        if missing != union {
            return fail("undervalued ∪ omitted != E - (D ∩ E)");
        }
        if !d.is_subset(&a) || !best.iter().all(|p| a.contains(p) || b.contains(p)) {
            return fail("D ⊄ A or E ⊄ C");
        }
        let c_len = a.len() + b.len();
        if best.len() != (r.quota as usize).min(c_len) || d.len() > r.quota as usize {
            return fail("set sizes");
        }
    }
    Ok(())
}
