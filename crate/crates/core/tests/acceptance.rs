//! Acceptance criteria. Each test prints one PASS/FAIL line (straight to
//! stderr, so it shows even when the test passes) and then asserts.

mod common;

use std::fs;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use assess_opt::gev::{MeritOutcome, Outcome, ProfileSet};
use assess_opt::reference::{build_thresholds, classify, ClassThresholds, IndicatorClass};
use assess_opt::report::render_delta;
use assess_opt::selection::{
    optimize_exact, scenario1, scenario2, scenario3, CandidateSet, PortfolioSets,
};
use assess_opt::Score;
use common::{bin, brute_force_best, check_error_identities, fixture_dir, random_instance, score};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn run(number: u32, name: &str, budget: Duration, body: impl FnOnce() -> Check) {
    let start = Instant::now();
    let mut result = body();
    let elapsed = start.elapsed();
    if result.is_ok() && elapsed > budget {
        result = Err(format!("took {elapsed:?}, budget {budget:?}"));
    }
    let line = match &result {
        Ok(()) => format!("criterion {number} [{name}]: PASS ({elapsed:.2?})\n"),
        Err(e) => format!("criterion {number} [{name}]: FAIL ({elapsed:.2?}): {e}\n"),
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
    if let Err(e) = result {
        panic!("criterion {number} failed: {e}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn outcome(s: &str) -> MeritOutcome {
    match s {
        "A" => MeritOutcome::A,
        "B" => MeritOutcome::B,
        "C" => MeritOutcome::C,
        "D" => MeritOutcome::D,
        _ => MeritOutcome::IR,
    }
}

#[test]
fn criterion_1_matrix_fidelity() {
    // rows: citation class 1..4, columns: journal class 1..4
    let mature = [
        ["A", "A", "A", "IR"],
        ["B", "B", "B", "IR"],
        ["IR", "C", "C", "C"],
        ["IR", "D", "D", "D"],
    ];
    let recent = [
        ["A", "IR", "IR", "IR"],
        ["A", "B", "C", "D"],
        ["A", "B", "C", "D"],
        ["IR", "IR", "IR", "D"],
    ];
    run(1, "matrix fidelity", Duration::from_secs(1), || {
        let pack = ProfileSet::default_pack();
        let chem = pack.get(3).map_err(|e| e.to_string())?;
        for year in 2004..=2010 {
            let expected = if year <= 2008 { &mature } else { &recent };
            let matrix = chem.matrix_for(year).ok_or(format!("no matrix for {year}"))?;
            for ic in 1..=4u8 {
                for ir in 1..=4u8 {
                    let got = matrix.lookup(
                        IndicatorClass::from_rank(ic).unwrap(),
                        IndicatorClass::from_rank(ir).unwrap(),
                    );
                    let want = outcome(expected[ic as usize - 1][ir as usize - 1]);
                    ensure(got == want, || format!("year {year} ic={ic} ir={ir}: {got:?} != {want:?}"))?;
                }
            }
        }
        let cell = |year, ic, ir| {
            chem.matrix_for(year)
                .unwrap()
                .lookup(IndicatorClass::from_rank(ic).unwrap(), IndicatorClass::from_rank(ir).unwrap())
        };
        ensure(cell(2006, 1, 3) == MeritOutcome::A, || "(1,3,2006)".into())?;
        ensure(cell(2006, 4, 1) == MeritOutcome::IR, || "(4,1,2006)".into())?;
        ensure(cell(2010, 2, 1) == MeritOutcome::A, || "(2,1,2010)".into())
    });
}

#[test]
fn criterion_2_score_map() {
    run(2, "score map", Duration::from_secs(1), || {
        let pack = ProfileSet::default_pack();
        let fixed = [
            (MeritOutcome::A, 1.0),
            (MeritOutcome::B, 0.8),
            (MeritOutcome::C, 0.5),
            (MeritOutcome::D, 0.0),
        ];
        for gev in 1..=9u8 {
            let p = pack.get(gev).map_err(|e| e.to_string())?;
            let checks = [
                (Outcome::Matrix(MeritOutcome::IR), 0.5),
                (Outcome::ForcedIr, 0.5),
                (Outcome::Fraud, -2.0),
                (Outcome::Inadmissible, -1.0),
                (Outcome::NonIndexedFallback, 0.25),
                (
                    Outcome::NoMetricFallback,
                    match gev {
                        5 | 6 => 0.0,
                        9 => 0.5,
                        _ => 0.25,
                    },
                ),
            ];
            for (m, s) in fixed {
                ensure(Outcome::Matrix(m).score(p) == score(s), || format!("GEV {gev} {m:?}"))?;
            }
            for (o, s) in checks {
                let got = o.score(p);
                ensure(got == score(s), || format!("GEV {gev} {o:?}: {got} != {s}"))?;
            }
        }
        ensure(Score::MISSING == score(-0.5), || "missing slot penalty".into())
    });
}

#[test]
fn criterion_3_delta_arithmetic() {
    run(3, "delta arithmetic", Duration::from_secs(1), || {
        let (s1, s2, s3) = (score(598.9), score(753.9), score(791.4));
        let got = [render_delta(s1, s2), render_delta(s2, s3), render_delta(s1, s3)];
        let want = ["+25.9%", "+5.0%", "+32.2%"];
        let wrong: Vec<String> = ["1 vs 2", "2 vs 3", "1 vs 3"]
            .iter()
            .zip(got.iter().zip(want))
            .filter(|(_, (g, w))| g.as_str() != *w)
            .map(|(label, (g, w))| format!("{label}: got {g}, expected {w}"))
            .collect();
        ensure(wrong.is_empty(), || wrong.join("; "))
    });
}

const SEED: u64 = 0x5eed_2011;
const INSTANCES: usize = 300;

fn instances() -> impl Iterator<Item = (usize, PortfolioSets)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..INSTANCES).map(move |i| (i, random_instance(&mut rng, 6, 10)))
}

#[test]
fn criterion_4_oracle_equivalence() {
    run(4, "oracle equivalence", Duration::from_secs(60), || {
        for (i, sets) in instances() {
            for allowed in [CandidateSet::Proposed, CandidateSet::All] {
                let sel = optimize_exact(&sets, allowed);
                sel.check_feasible(&sets, allowed)
                    .map_err(|e| format!("instance {i}: {e}"))?;
                let oracle = brute_force_best(&sets, allowed);
                ensure(sel.total_score == oracle, || {
                    format!("instance {i} {allowed:?}: exact {} != oracle {oracle}", sel.total_score)
                })?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_5_monotonicity() {
    run(5, "monotonicity", Duration::from_secs(60), || {
        for (i, sets) in instances() {
            let exact_c = optimize_exact(&sets, CandidateSet::All).total_score;
            let exact_a = optimize_exact(&sets, CandidateSet::Proposed).total_score;
            let s1 = scenario1(&sets);
            let s2 = scenario2(&sets);
            let s3 = scenario3(&sets);
            for (sel, allowed) in [(&s1, CandidateSet::Proposed), (&s2, CandidateSet::Proposed), (&s3, CandidateSet::All)] {
                sel.check_feasible(&sets, allowed)
                    .map_err(|e| format!("instance {i} scenario {}: {e}", sel.tag))?;
            }
            ensure(exact_c >= exact_a, || format!("instance {i}: exact-C {exact_c} < exact-A {exact_a}"))?;
            ensure(exact_a >= s1.total_score, || format!("instance {i}: exact-A {exact_a} < scenario 1 {}", s1.total_score))?;
            ensure(exact_a >= s2.total_score, || format!("instance {i}: exact-A {exact_a} < scenario 2 {}", s2.total_score))?;
            ensure(exact_c >= s3.total_score, || format!("instance {i}: exact-C {exact_c} < scenario 3 {}", s3.total_score))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_6_greedy_non_monotonicity() {
    run(6, "greedy non-monotonicity witness", Duration::from_secs(1), || {
        let sets = common::greedy_regression_fixture();
        let s2 = scenario2(&sets).total_score;
        let s3 = scenario3(&sets).total_score;
        let exact_a = optimize_exact(&sets, CandidateSet::Proposed).total_score;
        let exact_c = optimize_exact(&sets, CandidateSet::All).total_score;
        ensure(s2 == score(2.8) && s3 == score(1.5), || format!("scenario 2 {s2}, scenario 3 {s3}"))?;
        ensure(s3 < s2, || "scenario 3 not below scenario 2".into())?;
        ensure(exact_c >= exact_a, || format!("exact-C {exact_c} < exact-A {exact_a}"))?;
        ensure(exact_a == brute_force_best(&sets, CandidateSet::Proposed), || "exact-A off oracle".into())?;
        ensure(exact_c == brute_force_best(&sets, CandidateSet::All), || "exact-C off oracle".into())
    });
}

#[test]
fn criterion_7_error_taxonomy_identities() {
    run(7, "error-taxonomy identities", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
        for i in 0..1000 {
            let sets = random_instance(&mut rng, 6, 12);
            check_error_identities(&sets).map_err(|e| format!("instance {i}: {e}"))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_8_classification_properties() {
    run(8, "classification properties", Duration::from_secs(5), || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
        for i in 0..1000 {
            let mut t = [rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0)];
            t.sort_by(f64::total_cmp);
            let th = ClassThresholds::new(t[0], t[1], t[2], 100).map_err(|e| e.to_string())?;
            let (a, b) = (rng.gen_range(0.0..60.0f64), rng.gen_range(0.0..60.0f64));
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            ensure(classify(hi, &th).rank() <= classify(lo, &th).rank(), || {
                format!("pair {i}: {hi} vs {lo} under {th:?}")
            })?;
            // exactly one class, given by the half-open intervals
            let v = lo;
            let expected = if v > th.p80 {
                1
            } else if v > th.p60 {
                2
            } else if v > th.p50 {
                3
            } else {
                4
            };
            ensure(classify(v, &th).rank() == expected, || format!("pair {i}: partition at {v}"))?;
        }
        let ten: Vec<f64> = (1..=10).map(f64::from).collect();
        let t = build_thresholds(&ten).map_err(|e| e.to_string())?;
        ensure((t.p50, t.p60, t.p80, t.n) == (5.0, 6.0, 8.0, 10), || format!("[1..10] -> {t:?}"))?;
        let t = build_thresholds(&[7.0]).map_err(|e| e.to_string())?;
        ensure((t.p50, t.p60, t.p80) == (7.0, 7.0, 7.0), || format!("[7] -> {t:?}"))?;
        let t = build_thresholds(&[0.0; 4]).map_err(|e| e.to_string())?;
        ensure((t.p50, t.p60, t.p80) == (0.0, 0.0, 0.0), || format!("zeros -> {t:?}"))?;
        ensure(build_thresholds(&[]).is_err(), || "empty input accepted".into())?;
        let th = ClassThresholds::new(10.0, 14.0, 25.0, 100).unwrap();
        ensure(classify(30.0, &th) == IndicatorClass::from_rank(1).unwrap(), || "30 -> 1".into())?;
        ensure(classify(10.0, &th) == IndicatorClass::from_rank(4).unwrap(), || "10 -> 4".into())?;
        ensure(classify(14.0, &th) == IndicatorClass::from_rank(3).unwrap(), || "14 -> 3".into())?;
        ensure(classify(25.0, &th) == IndicatorClass::from_rank(2).unwrap(), || "25 -> 2".into())
    });
}

#[test]
fn criterion_9_end_to_end_determinism() {
    run(9, "end-to-end determinism", Duration::from_secs(5), || {
        let dir = fixture_dir();
        let golden = dir.join("golden");
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let out = tempfile::tempdir().map_err(|e| e.to_string())?;
            let status = Command::new(bin())
                .arg("simulate")
                .arg("--corpus")
                .arg(dir.join("corpus"))
                .arg("--profiles")
                .arg(dir.join("profiles.json"))
                .arg("--ref")
                .arg(dir.join("ref"))
                .args(["--scenarios", "1,2,3,exact-C", "-o"])
                .arg(out.path())
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || format!("simulate exited with {status}"))?;
            outputs.push(out);
        }
        for name in ["scored.csv", "selection.csv", "errors.csv", "report.md", "report.csv"] {
            let read = |p: &std::path::Path| fs::read(p.join(name)).map_err(|e| format!("{name}: {e}"));
            let first = read(outputs[0].path())?;
            ensure(first == read(outputs[1].path())?, || format!("{name} differs between runs"))?;
            ensure(first == read(&golden)?, || format!("{name} differs from golden copy"))?;
        }
        Ok(())
    });
}
