//! Acceptance suite. One test per criterion; each prints a PASS line with
//! the measured quantities so a full run reads as a checklist.

use std::sync::OnceLock;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use scfo::boolfun::{
    all_transforms, apply_transform, named_function, npn_canonical, npn_classes, TruthTable,
};
use scfo::encoding::{IlpInstance, IlpRow};
use scfo::optimize::{solve_min_insertion, SolveLimits, SolveOutcome};
use scfo::report::render_certificate;
use scfo::search::{run_table2, search_scfo, RunKind, SearchOptions, Table2Report};
use scfo::verify::{fixtures, verify_protocol, Assignment, Verdict};
use scfo::words::{CardWord, InsertionVector};

fn shared_table2() -> &'static Table2Report {
    static TABLE: OnceLock<Table2Report> = OnceLock::new();
    TABLE.get_or_init(|| run_table2(&SearchOptions::default()))
}

/// Criterion 1: the existence column of the summary table, reproduced
/// exactly, with every searched function inside the runtime envelope.
#[test]
fn criterion_1_table2_existence_column() {
    let expected: [(&str, bool); 12] = [
        ("and2", true),
        ("xor2", true),
        ("and3", false),
        ("xor3", false),
        ("eq3", true),
        ("maj3", false),
        ("one3", false),
        ("xorand3", false),
        ("mux3", false),
        ("andxor3", false),
        ("chain3", false),
        ("and_or3", false),
    ];
    let table = shared_table2();
    assert!(table.certifying(), "run contained indeterminate outcomes");
    assert_eq!(table.rows.len(), expected.len());
    for (row, (name, exists)) in table.rows.iter().zip(expected) {
        assert_eq!(row.name, name);
        assert_eq!(
            row.exists, exists,
            "existence mismatch for {name}: got {}, expected {exists}",
            row.exists
        );
        assert!(
            row.wall < Duration::from_secs(3600),
            "{name} exceeded the runtime envelope: {:?}",
            row.wall
        );
        if row.vars == 3 {
            // 720 arrangements times 729 shift vectors.
            assert_eq!(row.stats.instances_total, 524_880, "{name}");
        }
        if !exists {
            // Every impossible row rests on pure infeasibility, so the
            // verdict holds for any number of additional clubs.
            assert_eq!(
                row.stats.correctness_failed, 0,
                "{name} impossibility must not depend on the correctness filter"
            );
        }
    }
    let slowest = table
        .rows
        .iter()
        .map(|r| r.wall)
        .max()
        .unwrap_or(Duration::ZERO);
    println!(
        "ACCEPTANCE 1: PASS - existence column matches for all 12 rows, slowest function {:?}",
        slowest
    );
}

/// Criterion 2: minimal additional-club counts for the three known
/// protocols.
#[test]
fn criterion_2_minimal_card_counts() {
    let table = shared_table2();
    let clubs = |name: &str| -> Option<u32> {
        table
            .rows
            .iter()
            .find(|r| r.name == name)
            .expect("row present")
            .minimal_clubs
    };
    assert_eq!(clubs("xor2"), Some(0));
    assert_eq!(clubs("and2"), Some(1));
    assert_eq!(clubs("eq3"), Some(0));
    println!("ACCEPTANCE 2: PASS - minimal clubs xor2=0, and2=1, eq3=0");
}

/// Criterion 3: the six bundled protocols verify valid with their declared
/// opening patterns; the four-card AND control is rejected with the
/// expected witness.
#[test]
fn criterion_3_fixture_suite() {
    for fixture in fixtures::all_valid() {
        assert!(
            fixture.template.outputs().is_some(),
            "{} must declare its opening patterns",
            fixture.name
        );
        let verdict = verify_protocol(&fixture.template, &fixture.function).unwrap();
        assert!(verdict.is_valid(), "{}: {verdict}", fixture.name);
    }
    let control = fixtures::and_two_without_heart();
    let verdict = verify_protocol(&control.template, &control.function).unwrap();
    match verdict {
        Verdict::CorrectnessViolation { witness, .. } => {
            assert_eq!(witness.0, Assignment(vec![false, false]));
            assert_eq!(witness.1, Assignment(vec![true, true]));
        }
        other => panic!("control not rejected for correctness: {other}"),
    }
    println!("ACCEPTANCE 3: PASS - 6 fixtures valid, negative control rejected at ((0,0),(1,1))");
}

fn random_word(rng: &mut StdRng, len: usize) -> CardWord {
    loop {
        let bits: Vec<u8> = (0..len).map(|_| rng.random_range(0..=1) as u8).collect();
        if bits.contains(&1) {
            return CardWord::new(bits).unwrap();
        }
    }
}

fn shuffled(rng: &mut StdRng, word: &CardWord) -> CardWord {
    let mut bits = word.bits().to_vec();
    for i in (1..bits.len()).rev() {
        let j = rng.random_range(0..=i);
        bits.swap(i, j);
    }
    CardWord::new(bits).unwrap()
}

/// Criterion 4: gap-vector rotation equality agrees with word-level cyclic
/// equality on 10,000 random pairs, and the insertion/gap commutation law
/// holds on 10,000 random pairs.
#[test]
fn criterion_4_words_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(0x5cf0_0004);
    let mut equal_cases = 0u32;
    for _ in 0..10_000 {
        let len = rng.random_range(1..=12);
        let a = random_word(&mut rng, len);
        let b = shuffled(&mut rng, &a);
        let by_words = a.cyclically_equal(&b);
        let by_gaps = a
            .gap_vector()
            .unwrap()
            .cyclically_equal(&b.gap_vector().unwrap());
        assert_eq!(by_words, by_gaps, "disagreement on {a} vs {b}");
        if by_words {
            equal_cases += 1;
        }
    }
    assert!(equal_cases > 0, "sample never produced a cyclic match");

    for _ in 0..10_000 {
        let len = rng.random_range(1..=8);
        let w = random_word(&mut rng, len);
        let y = InsertionVector::new((0..len).map(|_| rng.random_range(0..=3)).collect());
        let inserted = w.apply_insertion(&y).unwrap();
        assert_eq!(inserted.ones(), w.ones());
        assert_eq!(inserted.len(), w.len() + y.total() as usize);
        let before = w.gap_vector().unwrap();
        let after = inserted.gap_vector().unwrap();
        for j in 0..before.len() {
            let added: u32 = (0..w.len())
                .filter(|&i| w.segment_of_position(i).unwrap() == j)
                .map(|i| y.counts()[i])
                .sum();
            assert_eq!(after.zeros()[j], before.zeros()[j] + added);
        }
    }
    println!(
        "ACCEPTANCE 4: PASS - 10000 pair equivalences ({equal_cases} cyclic matches) and 10000 commutation checks exact"
    );
}

/// Plain iterative-deepening oracle: complete composition enumeration with
/// substitution at the leaves, no shared machinery with the solver.
mod oracle {
    use scfo::encoding::IlpRow;

    pub struct OracleAnswer {
        pub optimal: Option<(u32, Vec<Vec<u32>>)>,
    }

    pub fn iterative_deepening(vars: usize, rows: &[IlpRow], bound: u32) -> OracleAnswer {
        for total in 0..=bound {
            let mut found = Vec::new();
            let mut current = vec![0u32; vars];
            compositions(vars, total, 0, &mut current, &mut |candidate: &[u32]| {
                let ok = rows.iter().all(|row| {
                    let lhs: i64 = row
                        .coeffs
                        .iter()
                        .zip(candidate)
                        .map(|(&c, &v)| c * v as i64)
                        .sum();
                    lhs == row.rhs
                });
                if ok {
                    found.push(candidate.to_vec());
                }
            });
            if !found.is_empty() {
                return OracleAnswer {
                    optimal: Some((total, found)),
                };
            }
        }
        OracleAnswer { optimal: None }
    }

    fn compositions(
        vars: usize,
        remaining: u32,
        index: usize,
        current: &mut Vec<u32>,
        visit: &mut impl FnMut(&[u32]),
    ) {
        if index + 1 == vars {
            current[index] = remaining;
            visit(current);
            return;
        }
        for v in 0..=remaining {
            current[index] = v;
            compositions(vars, remaining - v, index + 1, current, visit);
        }
    }
}

/// Criterion 5: the layered solver agrees with the brute-force oracle on
/// 1,000 random instances, for status, optimum and the entire optimal set,
/// with zero indeterminate outcomes.
#[test]
fn criterion_5_solver_exactness() {
    let mut rng = StdRng::seed_from_u64(0x5cf0_0005);
    let limits = SolveLimits::default();
    let base_bound = 16u32;
    let mut feasible = 0u32;
    let mut infeasible = 0u32;
    for case in 0..1_000 {
        let vars = rng.random_range(2..=6);
        let row_count = rng.random_range(1..=6);
        let rows: Vec<IlpRow> = (0..row_count)
            .map(|_| IlpRow {
                coeffs: (0..vars).map(|_| rng.random_range(-1..=1)).collect(),
                rhs: rng.random_range(-6..=6),
            })
            .collect();
        let inst = IlpInstance::from_rows(vars, rows.clone());
        let outcome = solve_min_insertion(&inst, &limits)
            .unwrap_or_else(|e| panic!("case {case}: indeterminate outcome {e}"));
        match outcome {
            SolveOutcome::Infeasible { .. } => {
                infeasible += 1;
                let oracle = oracle::iterative_deepening(vars, &rows, base_bound);
                assert!(
                    oracle.optimal.is_none(),
                    "case {case}: solver infeasible but oracle found a solution"
                );
            }
            SolveOutcome::Optimal {
                total, solutions, ..
            } => {
                feasible += 1;
                let oracle =
                    oracle::iterative_deepening(vars, &rows, total.max(base_bound));
                let (oracle_total, oracle_solutions) = oracle
                    .optimal
                    .unwrap_or_else(|| panic!("case {case}: solver feasible, oracle not"));
                assert_eq!(total, oracle_total, "case {case}: optimum mismatch");
                let got: Vec<Vec<u32>> = solutions
                    .iter()
                    .map(|s| s.counts().to_vec())
                    .collect();
                let mut want = oracle_solutions;
                want.sort();
                assert_eq!(got, want, "case {case}: optimal set mismatch");
            }
        }
    }
    println!(
        "ACCEPTANCE 5: PASS - 1000 random instances agree with the oracle ({feasible} feasible, {infeasible} infeasible), zero indeterminate"
    );
}

/// Criterion 6: the three-variable classification has exactly 14 classes
/// partitioning all 256 functions, and canonicalization is invariant under
/// 1,000 random transforms.
#[test]
fn criterion_6_npn_classification() {
    let classes = npn_classes(3).unwrap();
    assert_eq!(classes.len(), 14);
    for raw in 0..=255u16 {
        let f = TruthTable::new(3, raw).unwrap();
        let canon = npn_canonical(&f);
        assert_eq!(
            classes.iter().filter(|c| **c == canon).count(),
            1,
            "function {raw:#010b} not covered exactly once"
        );
    }
    let transforms = all_transforms(3);
    let mut rng = StdRng::seed_from_u64(0x5cf0_0006);
    for _ in 0..1_000 {
        let f = TruthTable::new(3, rng.random_range(0..=255) as u16).unwrap();
        let t = &transforms[rng.random_range(0..transforms.len())];
        let g = apply_transform(&f, t).unwrap();
        assert_eq!(npn_canonical(&f), npn_canonical(&g));
    }
    println!("ACCEPTANCE 6: PASS - 14 classes partition all 256 functions, 1000 invariance checks exact");
}

/// Criterion 7: one worker and eight workers produce byte-identical
/// certificates and statistics for the full equality-function search.
#[test]
fn criterion_7_worker_determinism() {
    let f = named_function("eq3").unwrap();
    let run_with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| search_scfo(&f, Some("eq3"), &SearchOptions::default()))
    };
    let one = run_with(1);
    let eight = run_with(8);
    let best = one.certificate().expect("protocol exists");
    assert!(
        scfo::verify::certificate_is_consistent(&best),
        "search-produced certificate failed independent verification"
    );
    let cert_one = render_certificate(&best);
    let cert_eight = render_certificate(&eight.certificate().expect("protocol exists"));
    assert_eq!(cert_one, cert_eight, "certificates differ across pools");
    let (stats_one, entries_one) = match &one.kind {
        RunKind::Searched(r) => (r.stats.render(), r.entries.clone()),
        _ => unreachable!(),
    };
    let (stats_eight, entries_eight) = match &eight.kind {
        RunKind::Searched(r) => (r.stats.render(), r.entries.clone()),
        _ => unreachable!(),
    };
    assert_eq!(stats_one, stats_eight, "statistics differ across pools");
    assert_eq!(entries_one, entries_eight, "entry lists differ across pools");
    println!("ACCEPTANCE 7: PASS - 1-worker and 8-worker runs byte-identical");
}
