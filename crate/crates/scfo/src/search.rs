//! Exhaustive search for single-cut full-open protocols whose additional
//! cards are all clubs.
//!
//! For a function over `n` inputs the space is every arrangement of the
//! `2n` dealt cards crossed with every shift vector. Each point yields an
//! integer program; a feasible optimum gives candidate insertions, and the
//! survivors of the correctness filter become verified protocol entries.
//! An exhausted space with no entries and no indeterminate solver outcome
//! certifies that no such protocol exists, for any number of added clubs.
//!
//! Work is split over arrangements; shift vectors iterate innermost so the
//! per-arrangement constants are computed once. Results and statistics are
//! merged in arrangement order, so the outcome is identical for any worker
//! count.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::boolfun::{permutations_lex, TruthTable};
use crate::encoding::{
    input_words, permute_classing, Arrangement, IlpRow, PreparedClassing, ShiftVector,
    WordClassing,
};
use crate::optimize::{
    enumerate_at, may_be_feasible, solve_min_sum, SolveError, SolveLimits, SolveOutcome,
};
use crate::verify;
use crate::words::{CardWord, InsertionVector};

/// Run configuration for one search.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Sweep the whole space (required for impossibility claims). When
    /// false, the run stops at the first verified protocol.
    pub exhaustive: bool,
    /// Skip arrangements whose word classes are a simultaneous rotation of
    /// an already-scheduled arrangement's. Audited optimization, off by
    /// default.
    pub prune: bool,
    /// Additionally enumerate insertions up to this many clubs beyond each
    /// instance optimum; finds are reported separately and never affect the
    /// main verdict.
    pub explore_delta: u32,
    pub limits: SolveLimits,
    /// Collect one audit line per solved instance.
    pub collect_trace: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            exhaustive: true,
            prune: false,
            explore_delta: 0,
            limits: SolveLimits::default(),
            collect_trace: false,
        }
    }
}

/// Outcome counters over solved instances. Skipped-by-filter instances are
/// counted infeasible, which is what solving them would conclude.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub permutations: u64,
    pub shift_space: u64,
    pub instances_total: u64,
    pub infeasible: u64,
    pub correctness_failed: u64,
    pub accepted_instances: u64,
    pub accepted_entries: u64,
    pub exploratory_entries: u64,
    pub indeterminate: u64,
}

impl SearchStats {
    fn absorb(&mut self, other: &SearchStats) {
        self.instances_total += other.instances_total;
        self.infeasible += other.infeasible;
        self.correctness_failed += other.correctness_failed;
        self.accepted_instances += other.accepted_instances;
        self.accepted_entries += other.accepted_entries;
        self.exploratory_entries += other.exploratory_entries;
        self.indeterminate += other.indeterminate;
    }

    /// Deterministic rendering used in documents and determinism checks;
    /// wall time deliberately excluded.
    pub fn render(&self) -> String {
        format!(
            "permutations: {}\nshift-vectors-per-permutation: {}\ninstances-total: {}\n\
             instances-infeasible: {}\ninstances-correctness-failed: {}\n\
             instances-accepted: {}\nentries-accepted: {}\nentries-exploratory: {}\n\
             indeterminate: {}",
            self.permutations,
            self.shift_space,
            self.instances_total,
            self.infeasible,
            self.correctness_failed,
            self.accepted_instances,
            self.accepted_entries,
            self.exploratory_entries,
            self.indeterminate,
        )
    }
}

/// One verified protocol found by the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptedEntry {
    pub arrangement: Arrangement,
    pub shifts: ShiftVector,
    pub insertion: InsertionVector,
    pub additional_clubs: u32,
    pub opening_pattern_0: CardWord,
    pub opening_pattern_1: CardWord,
}

impl AcceptedEntry {
    /// The permuted word classes this entry was found on.
    pub fn classing(&self, f: &TruthTable) -> WordClassing {
        permute_classing(&input_words(f), &self.arrangement)
            .expect("entry arrangement matches the function arity")
    }

    fn sort_key(&self) -> (u32, InsertionVector, Vec<usize>, ShiftVector) {
        (
            self.additional_clubs,
            self.insertion.clone(),
            self.arrangement.map().to_vec(),
            self.shifts.clone(),
        )
    }
}

/// Everything a finished (non-trivial) search produced.
#[derive(Clone, Debug)]
pub struct SearchResultSet {
    /// Verified entries sorted by (clubs, insertion, arrangement, shifts).
    pub entries: Vec<AcceptedEntry>,
    /// Beyond-optimal finds when `explore_delta > 0`, same order.
    pub exploratory: Vec<AcceptedEntry>,
    pub stats: SearchStats,
    /// No indeterminate solver outcome occurred.
    pub certifying: bool,
    /// The whole space was covered (false after a first-hit stop).
    pub completed: bool,
    pub wall: Duration,
    pub trace: Vec<String>,
}

/// Result of `search_scfo`.
#[derive(Clone, Debug)]
pub struct SearchRun {
    pub function_name: Option<String>,
    pub table: TruthTable,
    pub options_echo: OptionsEcho,
    pub kind: RunKind,
}

#[derive(Clone, Debug)]
pub enum RunKind {
    /// Constant functions need no cards at all; nothing is searched.
    TriviallyComputable { value: bool },
    Searched(SearchResultSet),
}

/// The option fields that are echoed into every output document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptionsEcho {
    pub exhaustive: bool,
    pub prune: bool,
    pub explore_delta: u32,
}

impl OptionsEcho {
    pub fn mode_str(&self) -> &'static str {
        if self.exhaustive {
            "exhaustive"
        } else {
            "first-hit"
        }
    }
}

/// A found protocol in certificate form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolCertificate {
    pub function_name: Option<String>,
    pub table: TruthTable,
    pub arrangement: Arrangement,
    pub insertion: InsertionVector,
    pub additional_clubs: u32,
    pub final_length: u32,
    pub opening_pattern_0: CardWord,
    pub opening_pattern_1: CardWord,
    pub mode: String,
    pub prune: bool,
    pub explore_delta: u32,
    /// Outcome tallies of the producing run; absent after a first-hit stop,
    /// whose partial tallies depend on scheduling.
    pub tallies: Option<SearchStats>,
}

/// A completed search with an empty result set, or a trivial/non-certifying
/// outcome, in report form.
#[derive(Clone, Debug)]
pub struct ImpossibilityReport {
    pub function_name: Option<String>,
    pub table: TruthTable,
    pub conclusion: Conclusion,
    pub stats: SearchStats,
    pub certifying: bool,
    pub mode: String,
    pub prune: bool,
    pub explore_delta: u32,
    /// Wall time of the run; shown in summaries, never serialized, so that
    /// report files stay byte-identical across runs and worker counts.
    pub wall: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conclusion {
    /// Every instance was infeasible: the security condition is
    /// unachievable by any insertion of any size, so no protocol exists for
    /// any number of additional clubs.
    NoProtocol,
    /// Some instances admitted insertions but every instance-optimal one
    /// failed the correctness filter. Protocols built on non-minimal
    /// insertions are not excluded by such a run; the exploratory flag can
    /// probe for them.
    NoProtocolAtOptima,
    TriviallyComputable { value: bool },
    NonCertifying,
}

impl Conclusion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Conclusion::NoProtocol => "no-protocol",
            Conclusion::NoProtocolAtOptima => "no-protocol-at-instance-optima",
            Conclusion::TriviallyComputable { value: false } => "trivially-computable-0",
            Conclusion::TriviallyComputable { value: true } => "trivially-computable-1",
            Conclusion::NonCertifying => "non-certifying",
        }
    }
}

impl SearchRun {
    /// The minimal certificate, when the run found protocols.
    pub fn certificate(&self) -> Option<ProtocolCertificate> {
        let RunKind::Searched(result) = &self.kind else {
            return None;
        };
        let best = result.entries.first()?;
        Some(ProtocolCertificate {
            function_name: self.function_name.clone(),
            table: self.table,
            arrangement: best.arrangement.clone(),
            insertion: best.insertion.clone(),
            additional_clubs: best.additional_clubs,
            final_length: (self.table.vars() * 2) as u32 + best.additional_clubs,
            opening_pattern_0: best.opening_pattern_0.clone(),
            opening_pattern_1: best.opening_pattern_1.clone(),
            mode: self.options_echo.mode_str().to_string(),
            prune: self.options_echo.prune,
            explore_delta: self.options_echo.explore_delta,
            tallies: if result.completed {
                Some(result.stats.clone())
            } else {
                None
            },
        })
    }

    /// The report, when the run ended without a certificate.
    pub fn impossibility_report(&self) -> Option<ImpossibilityReport> {
        match &self.kind {
            RunKind::TriviallyComputable { value } => Some(ImpossibilityReport {
                function_name: self.function_name.clone(),
                table: self.table,
                conclusion: Conclusion::TriviallyComputable { value: *value },
                stats: SearchStats::default(),
                certifying: true,
                mode: self.options_echo.mode_str().to_string(),
                prune: self.options_echo.prune,
                explore_delta: self.options_echo.explore_delta,
                wall: Duration::ZERO,
            }),
            RunKind::Searched(result) => {
                if !result.entries.is_empty() {
                    return None;
                }
                let conclusion = if !result.certifying {
                    Conclusion::NonCertifying
                } else if result.stats.correctness_failed == 0 {
                    // Pure infeasibility everywhere, which no insertion of
                    // any size can overcome.
                    Conclusion::NoProtocol
                } else {
                    Conclusion::NoProtocolAtOptima
                };
                Some(ImpossibilityReport {
                    function_name: self.function_name.clone(),
                    table: self.table,
                    conclusion,
                    stats: result.stats.clone(),
                    certifying: result.certifying,
                    mode: self.options_echo.mode_str().to_string(),
                    prune: self.options_echo.prune,
                    explore_delta: self.options_echo.explore_delta,
                    wall: result.wall,
                })
            }
        }
    }

    pub fn is_certifying(&self) -> bool {
        match &self.kind {
            RunKind::TriviallyComputable { .. } => true,
            RunKind::Searched(result) => result.certifying,
        }
    }

    /// Minimal number of additional clubs over all found protocols.
    pub fn minimal_clubs(&self) -> Option<u32> {
        match &self.kind {
            RunKind::TriviallyComputable { .. } => None,
            RunKind::Searched(result) => {
                result.entries.first().map(|e| e.additional_clubs)
            }
        }
    }
}

/// Correctness filter: after the insertion, the two class references must
/// not be cyclically equal. Computed both on the words and on their gap
/// vectors; the two views must agree.
pub fn correctness_check(y: &InsertionVector, w0: &CardWord, w1: &CardWord) -> bool {
    let a = w0.apply_insertion(y).expect("insertion dimensioned");
    let b = w1.apply_insertion(y).expect("insertion dimensioned");
    let by_words = !a.cyclically_equal(&b);
    if let (Ok(ga), Ok(gb)) = (a.gap_vector(), b.gap_vector()) {
        let by_gaps = !ga.cyclically_equal(&gb);
        assert_eq!(
            by_words, by_gaps,
            "gap-level and word-level correctness disagree for {a} vs {b}"
        );
    }
    by_words
}

/// Input-complement counterpart: a protocol whose extra cards are all
/// hearts exists for `f` exactly when an all-clubs protocol exists for this
/// function (output labels swap under the color swap).
pub fn dual_function(f: &TruthTable) -> TruthTable {
    let n = f.vars();
    let mask = (1usize << n) - 1;
    TruthTable::from_fn(n, |x| {
        let idx: usize = x
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        f.eval_index(idx ^ mask)
    })
    .expect("same arity")
}

struct PermOutcome {
    stats: SearchStats,
    entries: Vec<AcceptedEntry>,
    exploratory: Vec<AcceptedEntry>,
    indeterminate_detail: Option<String>,
    trace: Vec<String>,
}

/// Searches the full arrangement and shift space of `f`.
pub fn search_scfo(f: &TruthTable, name: Option<&str>, opts: &SearchOptions) -> SearchRun {
    let echo = OptionsEcho {
        exhaustive: opts.exhaustive,
        prune: opts.prune,
        explore_delta: opts.explore_delta,
    };
    if let Some(value) = f.constant_value() {
        return SearchRun {
            function_name: name.map(str::to_string),
            table: *f,
            options_echo: echo,
            kind: RunKind::TriviallyComputable { value },
        };
    }

    let started = Instant::now();
    let n = f.vars();
    let base = input_words(f);
    let (k0, k1) = base.class_sizes();
    let shift_digits = (k0 - 1) + (k1 - 1);
    let shift_space = (n as u64).pow(shift_digits as u32);

    let perms = permutations_lex(2 * n);
    let scheduled: Vec<Arrangement> = if opts.prune {
        dedup_rotated_classings(&base, &perms)
    } else {
        perms
            .iter()
            .map(|p| Arrangement::new(p.clone()).expect("lex permutation"))
            .collect()
    };

    if !opts.exhaustive {
        // First-hit mode: the first arrangement in order that yields a
        // verified protocol wins, which keeps the output independent of
        // scheduling. When nothing is found the exhaustive path below runs
        // and produces the full report.
        let found = scheduled.par_iter().find_map_first(|pi| {
            let out = process_arrangement(f, &base, pi, opts);
            (!out.entries.is_empty()).then_some(out)
        });
        if let Some(out) = found {
            let mut stats = SearchStats {
                permutations: scheduled.len() as u64,
                shift_space,
                ..SearchStats::default()
            };
            stats.absorb(&out.stats);
            let mut entries = out.entries;
            entries.sort_by_key(AcceptedEntry::sort_key);
            return SearchRun {
                function_name: name.map(str::to_string),
                table: *f,
                options_echo: echo,
                kind: RunKind::Searched(SearchResultSet {
                    entries,
                    exploratory: out.exploratory,
                    stats,
                    certifying: out.stats.indeterminate == 0,
                    completed: false,
                    wall: started.elapsed(),
                    trace: out.trace,
                }),
            };
        }
    }

    let outcomes: Vec<PermOutcome> = scheduled
        .par_iter()
        .map(|pi| process_arrangement(f, &base, pi, opts))
        .collect();

    let mut stats = SearchStats {
        permutations: scheduled.len() as u64,
        shift_space,
        ..SearchStats::default()
    };
    let mut entries = Vec::new();
    let mut exploratory = Vec::new();
    let mut trace = Vec::new();
    for out in &outcomes {
        stats.absorb(&out.stats);
        entries.extend(out.entries.iter().cloned());
        exploratory.extend(out.exploratory.iter().cloned());
        trace.extend(out.trace.iter().cloned());
    }
    entries.sort_by_key(AcceptedEntry::sort_key);
    exploratory.sort_by_key(AcceptedEntry::sort_key);

    let completed = opts.exhaustive || entries.is_empty();
    if completed && !opts.prune {
        debug_assert_eq!(
            stats.instances_total,
            stats.permutations * stats.shift_space
        );
    }
    let certifying = stats.indeterminate == 0;
    SearchRun {
        function_name: name.map(str::to_string),
        table: *f,
        options_echo: echo,
        kind: RunKind::Searched(SearchResultSet {
            entries,
            exploratory,
            stats,
            certifying,
            completed,
            wall: started.elapsed(),
            trace,
        }),
    }
}

/// Arrangements surviving the rotation-dedup filter, one representative per
/// simultaneous-rotation family of word classings, in arrangement order.
fn dedup_rotated_classings(base: &WordClassing, perms: &[Vec<usize>]) -> Vec<Arrangement> {
    use std::collections::HashSet;
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for p in perms {
        let pi = Arrangement::new(p.clone()).expect("lex permutation");
        let c = permute_classing(base, &pi).expect("dimension matches");
        let len = c.positions();
        let mut family_min: Option<String> = None;
        for r in 0..len {
            let mut key = String::new();
            for b in 0..2 {
                let mut rotated: Vec<String> = c
                    .class(b)
                    .iter()
                    .map(|w| w.rotate(r).expect("r < len").to_string())
                    .collect();
                rotated.sort();
                key.push_str(&rotated.join(","));
                key.push(';');
            }
            family_min = Some(match family_min {
                None => key,
                Some(prev) => prev.min(key),
            });
        }
        if seen.insert(family_min.expect("len > 0")) {
            kept.push(pi);
        }
    }
    kept
}

fn process_arrangement(
    f: &TruthTable,
    base: &WordClassing,
    pi: &Arrangement,
    opts: &SearchOptions,
) -> PermOutcome {
    let classing = permute_classing(base, pi).expect("dimension matches");
    let prep = PreparedClassing::new(classing);
    let positions = prep.positions();
    let segments = prep.segments();
    let slots = prep.pair_slots();

    let mut out = PermOutcome {
        stats: SearchStats::default(),
        entries: Vec::new(),
        exploratory: Vec::new(),
        indeterminate_detail: None,
        trace: Vec::new(),
    };

    // Per-pair feasibility filter: a shift digit whose own block is
    // infeasible dooms every combination containing it, so those
    // combinations are counted infeasible wholesale.
    let mut feasible: Vec<Vec<u8>> = Vec::with_capacity(slots.len());
    for &(b, k) in &slots {
        let digits: Vec<u8> = (0..segments as u8)
            .filter(|&sigma| may_be_feasible(positions, &prep.pair_rows(b, k, sigma)))
            .collect();
        feasible.push(digits);
    }
    let total_combos = (segments as u64).pow(slots.len() as u32);
    let live: u64 = feasible.iter().map(|d| d.len() as u64).product();
    out.stats.instances_total += total_combos;
    out.stats.infeasible += total_combos - live;
    if live == 0 {
        return out;
    }

    let w0_ref = prep.classing().class(0)[0].clone();
    let w1_ref = prep.classing().class(1)[0].clone();
    let split = prep.classing().class(0).len() - 1;

    let mut idx = vec![0usize; slots.len()];
    let mut rows: Vec<IlpRow> = Vec::new();
    'combos: loop {
        if !opts.exhaustive && !out.entries.is_empty() {
            // First-hit mode: remaining combinations stay unsolved. The
            // run is marked incomplete and its tallies never enter a
            // document.
            break;
        }
        let digits: Vec<u8> = (0..slots.len())
            .map(|s| feasible[s][idx[s]])
            .collect();
        let shifts = ShiftVector::new(digits[..split].to_vec(), digits[split..].to_vec());
        rows.clear();
        for (s, &(b, k)) in slots.iter().enumerate() {
            rows.extend(prep.pair_rows(b, k, digits[s]));
        }

        match solve_min_sum(positions, &rows, &opts.limits) {
            Err(SolveError::Indeterminate { detail }) => {
                out.stats.indeterminate += 1;
                out.indeterminate_detail = Some(detail.clone());
                if opts.collect_trace {
                    out.trace
                        .push(format!("pi=[{}] s={} indeterminate: {}", pi, shifts, detail));
                }
            }
            Ok(SolveOutcome::Infeasible { layer }) => {
                out.stats.infeasible += 1;
                if opts.collect_trace {
                    out.trace
                        .push(format!("pi=[{}] s={} infeasible by {}", pi, shifts, layer));
                }
            }
            Ok(SolveOutcome::Optimal {
                total,
                solutions,
                layer,
            }) => {
                let mut accepted_here = 0u64;
                for y in &solutions {
                    if correctness_check(y, &w0_ref, &w1_ref) {
                        accepted_here += 1;
                        out.entries.push(
                            build_entry(f, pi, &shifts, y, &w0_ref, &w1_ref),
                        );
                    }
                }
                if accepted_here > 0 {
                    out.stats.accepted_instances += 1;
                    out.stats.accepted_entries += accepted_here;
                } else {
                    out.stats.correctness_failed += 1;
                }
                if opts.collect_trace {
                    out.trace.push(format!(
                        "pi=[{}] s={} optimal t={} solutions={} accepted={} by {}",
                        pi,
                        shifts,
                        total,
                        solutions.len(),
                        accepted_here,
                        layer
                    ));
                }
                for extra in 1..=opts.explore_delta {
                    for y in enumerate_at(positions, &rows, total + extra) {
                        if correctness_check(&y, &w0_ref, &w1_ref) {
                            out.stats.exploratory_entries += 1;
                            out.exploratory.push(
                                build_entry(f, pi, &shifts, &y, &w0_ref, &w1_ref),
                            );
                        }
                    }
                }
            }
        }

        // Odometer over the surviving digits, rightmost fastest.
        let mut pos = slots.len();
        loop {
            if pos == 0 {
                break 'combos;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < feasible[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
    out
}

fn build_entry(
    f: &TruthTable,
    pi: &Arrangement,
    shifts: &ShiftVector,
    y: &InsertionVector,
    w0_ref: &CardWord,
    w1_ref: &CardWord,
) -> AcceptedEntry {
    let open0 = w0_ref
        .apply_insertion(y)
        .expect("dimension checked")
        .canonical_rotation();
    let open1 = w1_ref
        .apply_insertion(y)
        .expect("dimension checked")
        .canonical_rotation();
    let verdict = verify::entry_verdict(f, pi, y, &open0, &open1)
        .expect("entry pieces are well formed");
    assert!(
        verdict.is_valid(),
        "accepted tuple failed independent simulation: {verdict}"
    );
    AcceptedEntry {
        arrangement: pi.clone(),
        shifts: shifts.clone(),
        insertion: y.clone(),
        additional_clubs: y.total(),
        opening_pattern_0: open0,
        opening_pattern_1: open1,
    }
}

/// One row of the summary table over the standard two- and three-variable
/// representatives.
#[derive(Clone, Debug)]
pub struct Table2Row {
    pub name: &'static str,
    pub formula: &'static str,
    pub vars: usize,
    pub exists: bool,
    pub minimal_clubs: Option<u32>,
    pub certifying: bool,
    pub wall: Duration,
    pub stats: SearchStats,
}

#[derive(Clone, Debug)]
pub struct Table2Report {
    pub rows: Vec<Table2Row>,
}

impl Table2Report {
    pub fn certifying(&self) -> bool {
        self.rows.iter().all(|r| r.certifying)
    }
}

/// The representative functions of the summary table, in display order.
pub fn table2_functions() -> Vec<(&'static str, &'static str)> {
    vec![
        ("and2", "x1 & x2"),
        ("xor2", "x1 ^ x2"),
        ("and3", "x1 & x2 & x3"),
        ("xor3", "x1 ^ x2 ^ x3"),
        ("eq3", "(x1 = x2 = x3)"),
        ("maj3", "(x1 + x2 + x3 >= 2)"),
        ("one3", "(x1 + x2 + x3 = 1)"),
        ("xorand3", "x1 ^ (x2 & x3)"),
        ("mux3", "(x1 & x2) | (~x1 & x3)"),
        ("andxor3", "x1 & (x2 ^ x3)"),
        ("chain3", "(x1 | x2) & (x1 ^ x3)"),
        ("and_or3", "x1 & (x2 | x3)"),
    ]
}

/// Runs the full search on every summary-table representative.
pub fn run_table2(opts: &SearchOptions) -> Table2Report {
    let mut rows = Vec::new();
    for (name, formula) in table2_functions() {
        let f = crate::boolfun::named_function(name).expect("catalog name");
        let run = search_scfo(&f, Some(name), opts);
        let (exists, minimal_clubs, certifying, wall, stats) = match &run.kind {
            RunKind::TriviallyComputable { .. } => {
                (true, None, true, Duration::ZERO, SearchStats::default())
            }
            RunKind::Searched(result) => (
                !result.entries.is_empty(),
                run.minimal_clubs(),
                result.certifying,
                result.wall,
                result.stats.clone(),
            ),
        };
        rows.push(Table2Row {
            name,
            formula,
            vars: f.vars(),
            exists,
            minimal_clubs,
            certifying,
            wall,
            stats,
        });
    }
    Table2Report { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfun::named_function;

    fn opts() -> SearchOptions {
        SearchOptions::default()
    }

    fn searched(run: &SearchRun) -> &SearchResultSet {
        match &run.kind {
            RunKind::Searched(r) => r,
            other => panic!("expected searched run, got {other:?}"),
        }
    }

    #[test]
    fn xor2_search_finds_zero_club_protocol() {
        let f = named_function("xor2").unwrap();
        let run = search_scfo(&f, Some("xor2"), &opts());
        let result = searched(&run);
        assert!(result.certifying && result.completed);
        assert_eq!(run.minimal_clubs(), Some(0));
        assert_eq!(
            result.stats.instances_total,
            result.stats.permutations * result.stats.shift_space
        );
        // Every instance lands in exactly one outcome bucket.
        let s = &result.stats;
        assert_eq!(
            s.infeasible + s.correctness_failed + s.accepted_instances + s.indeterminate,
            s.instances_total
        );
        assert_eq!(result.stats.permutations, 24);
        assert_eq!(result.stats.shift_space, 4);
        let cert = run.certificate().unwrap();
        assert!(crate::verify::certificate_is_consistent(&cert));
    }

    #[test]
    fn and2_search_needs_exactly_one_club() {
        let f = named_function("and2").unwrap();
        let run = search_scfo(&f, Some("and2"), &opts());
        let result = searched(&run);
        assert!(result.certifying && result.completed);
        assert_eq!(run.minimal_clubs(), Some(1));
        let cert = run.certificate().unwrap();
        assert_eq!(cert.final_length, 5);
        assert!(crate::verify::certificate_is_consistent(&cert));
    }

    #[test]
    fn dictator_gets_the_optimum_scoped_verdict() {
        // Every instance of the one-variable dictator is feasible at zero
        // insertions, where the two classes coincide. The verdict must say
        // "nothing at the optima", not claim full impossibility.
        let f = TruthTable::from_fn(1, |x| x[0]).unwrap();
        let run = search_scfo(&f, None, &opts());
        let result = searched(&run);
        assert!(result.entries.is_empty());
        assert!(result.certifying);
        assert!(result.stats.correctness_failed > 0);
        let report = run.impossibility_report().unwrap();
        assert_eq!(report.conclusion, Conclusion::NoProtocolAtOptima);
    }

    #[test]
    fn pure_infeasibility_yields_the_strong_verdict() {
        // Three-variable XOR: every instance is infeasible, which rules the
        // protocol out for any number of additional clubs.
        let f = named_function("xor3").unwrap();
        let run = search_scfo(&f, Some("xor3"), &opts());
        let result = searched(&run);
        assert!(result.entries.is_empty());
        assert_eq!(result.stats.correctness_failed, 0);
        let report = run.impossibility_report().unwrap();
        assert_eq!(report.conclusion, Conclusion::NoProtocol);
    }

    #[test]
    fn constants_short_circuit() {
        let f = TruthTable::from_fn(2, |_| true).unwrap();
        let run = search_scfo(&f, None, &opts());
        assert!(matches!(
            run.kind,
            RunKind::TriviallyComputable { value: true }
        ));
        let report = run.impossibility_report().unwrap();
        assert_eq!(
            report.conclusion,
            Conclusion::TriviallyComputable { value: true }
        );
    }

    #[test]
    fn correctness_check_examples() {
        let y = InsertionVector::zero(4);
        let w0: CardWord = "0101".parse().unwrap();
        let w1: CardWord = "0110".parse().unwrap();
        assert!(correctness_check(&y, &w0, &w1));
        assert!(!correctness_check(&y, &w0, &w0));
        // A five-card pair that opens distinguishably.
        let y5 = InsertionVector::zero(5);
        let a: CardWord = "10101".parse().unwrap();
        let b: CardWord = "11100".parse().unwrap();
        assert!(correctness_check(&y5, &a, &b));
    }

    #[test]
    fn dual_function_examples() {
        let xor2 = named_function("xor2").unwrap();
        assert_eq!(dual_function(&xor2), xor2);
        let and2 = named_function("and2").unwrap();
        let dual = dual_function(&and2);
        let expected = TruthTable::from_fn(2, |x| !x[0] & !x[1]).unwrap();
        assert_eq!(dual, expected);
        for bits in [0u16, 5, 37, 201, 255] {
            let f = TruthTable::new(3, bits).unwrap();
            assert_eq!(dual_function(&dual_function(&f)), f);
        }
    }

    #[test]
    fn first_hit_mode_agrees_on_existence() {
        // First-hit promises some verified protocol, not a minimal one.
        let f = named_function("xor2").unwrap();
        let first = SearchOptions {
            exhaustive: false,
            ..opts()
        };
        let run = search_scfo(&f, Some("xor2"), &first);
        assert!(run.minimal_clubs().is_some());
        let cert = run.certificate().unwrap();
        assert!(cert.tallies.is_none());
        assert!(crate::verify::certificate_is_consistent(&cert));
    }

    #[test]
    fn pruned_run_finds_the_same_protocols_up_to_rotation() {
        for name in ["xor2", "and2"] {
            let f = named_function(name).unwrap();
            let plain = search_scfo(&f, None, &opts());
            let pruned = search_scfo(
                &f,
                None,
                &SearchOptions {
                    prune: true,
                    ..opts()
                },
            );
            let observable = |run: &SearchRun| -> std::collections::BTreeSet<(u32, String, String)> {
                searched(run)
                    .entries
                    .iter()
                    .map(|e| {
                        (
                            e.additional_clubs,
                            e.opening_pattern_0.to_string(),
                            e.opening_pattern_1.to_string(),
                        )
                    })
                    .collect()
            };
            assert_eq!(observable(&plain), observable(&pruned), "{name}");
            assert!(
                searched(&pruned).stats.permutations <= searched(&plain).stats.permutations
            );
        }
    }

    #[test]
    fn entries_reverify_and_sort_deterministically() {
        let f = named_function("xor2").unwrap();
        let run = search_scfo(&f, None, &opts());
        let result = searched(&run);
        assert!(!result.entries.is_empty());
        let mut keys: Vec<_> = result.entries.iter().map(|e| e.sort_key()).collect();
        let sorted = {
            let mut k = keys.clone();
            k.sort();
            k
        };
        assert_eq!(keys, sorted);
        keys.dedup();
        assert_eq!(keys.len(), result.entries.len());
        for e in &result.entries {
            let classing = e.classing(&f);
            assert_eq!(classing.class_sizes(), (2, 2));
        }
    }

    #[test]
    fn trace_lines_cover_all_solved_instances() {
        let f = named_function("xor2").unwrap();
        let run = search_scfo(
            &f,
            None,
            &SearchOptions {
                collect_trace: true,
                ..opts()
            },
        );
        let result = searched(&run);
        let solved = result.stats.instances_total - bulk_skipped(result);
        assert_eq!(result.trace.len() as u64, solved);
    }

    fn bulk_skipped(result: &SearchResultSet) -> u64 {
        // Instances decided by the pair filter leave no trace line; count
        // them as the difference between totals and traced lines is checked
        // against. Reconstruct from the stats: every non-traced instance is
        // infeasible, so solved = total - (infeasible - traced_infeasible).
        let traced_infeasible = result
            .trace
            .iter()
            .filter(|l| l.contains("infeasible"))
            .count() as u64;
        result.stats.infeasible - traced_infeasible
    }
}
