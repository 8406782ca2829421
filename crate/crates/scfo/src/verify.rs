//! Independent protocol verification by exhaustive simulation.
//!
//! A template describes the face-down sequence a protocol deals in its first
//! step: one slot per card, each slot a literal over the inputs or a
//! constant card. Because a random cut turns every word into a uniform draw
//! from its cyclic class, the opened distribution is fully determined by the
//! class, and the verifier can work with canonical rotations instead of
//! sampling. A protocol is valid when all inputs with the same output open
//! into one cyclic class, the two classes differ, and they match the
//! template's declared output patterns if any are given.

use std::fmt;

use thiserror::Error;

use crate::boolfun::{assignment_of_index, TruthTable};
use crate::encoding::Arrangement;
use crate::search::ProtocolCertificate;
use crate::words::{CardWord, InsertionVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("template mentions variable x{0} beyond its declared arity")]
    VariableOutOfRange(usize),
    #[error("input x{0} never appears in a slot")]
    UnusedVariable(usize),
    #[error("declared output patterns are cyclically equal")]
    OutputPatternsCollide,
    #[error("template has {template} variables, function has {function}")]
    ArityMismatch { template: usize, function: usize },
    #[error("certificate is malformed: {0}")]
    MalformedCertificate(String),
}

/// One card slot of a protocol's dealt sequence.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Slot {
    /// The literal `x(var)` or its negation, 0-based variable index.
    Lit { var: usize, negated: bool },
    Club,
    Heart,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Lit { var, negated } => {
                write!(f, "{}x{}", if *negated { "!" } else { "" }, var + 1)
            }
            Slot::Club => write!(f, "C"),
            Slot::Heart => write!(f, "H"),
        }
    }
}

/// A dealt-sequence description plus an optional output rule.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProtocolTemplate {
    n: usize,
    slots: Vec<Slot>,
    /// Canonical words labelled with output 0 / output 1. When absent the
    /// verifier derives the classes from the simulation itself.
    outputs: Option<(CardWord, CardWord)>,
}

impl ProtocolTemplate {
    pub fn new(
        n: usize,
        slots: Vec<Slot>,
        outputs: Option<(CardWord, CardWord)>,
    ) -> Result<Self, VerifyError> {
        let mut used = vec![false; n];
        for slot in &slots {
            if let Slot::Lit { var, .. } = slot {
                if *var >= n {
                    return Err(VerifyError::VariableOutOfRange(*var + 1));
                }
                used[*var] = true;
            }
        }
        if let Some(missing) = used.iter().position(|&u| !u) {
            return Err(VerifyError::UnusedVariable(missing + 1));
        }
        if let Some((p0, p1)) = &outputs {
            if p0.cyclically_equal(p1) {
                return Err(VerifyError::OutputPatternsCollide);
            }
        }
        Ok(ProtocolTemplate { n, slots, outputs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn outputs(&self) -> Option<&(CardWord, CardWord)> {
        self.outputs.as_ref()
    }

    /// The face-down word dealt for an assignment, before the cut.
    pub fn simulate(&self, assignment: &[bool]) -> CardWord {
        debug_assert_eq!(assignment.len(), self.n);
        let bits = self
            .slots
            .iter()
            .map(|slot| match slot {
                Slot::Lit { var, negated } => u8::from(assignment[*var] ^ negated),
                Slot::Club => 0,
                Slot::Heart => 1,
            })
            .collect();
        CardWord::new(bits).expect("templates have at least one slot")
    }
}

/// An input assignment, for witness reporting.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Assignment(pub Vec<bool>);

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, &b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, ")")
    }
}

/// Verification verdict. Violations carry a concrete witness pair of
/// assignments.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Valid,
    CorrectnessViolation {
        witness: (Assignment, Assignment),
        detail: String,
    },
    SecurityViolation {
        witness: (Assignment, Assignment),
        detail: String,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::CorrectnessViolation { witness, detail } => write!(
                f,
                "correctness-violation witness {} vs {}: {}",
                witness.0, witness.1, detail
            ),
            Verdict::SecurityViolation { witness, detail } => write!(
                f,
                "security-violation witness {} vs {}: {}",
                witness.0, witness.1, detail
            ),
        }
    }
}

/// Simulates every assignment and checks the two protocol conditions.
///
/// Correctness violations are reported before security violations, and the
/// first witness in assignment order wins, so verdicts are deterministic.
pub fn verify_protocol(t: &ProtocolTemplate, f: &TruthTable) -> Result<Verdict, VerifyError> {
    if t.n() != f.vars() {
        return Err(VerifyError::ArityMismatch {
            template: t.n(),
            function: f.vars(),
        });
    }
    let n = f.vars();
    let mut classes: [Vec<(Assignment, CardWord)>; 2] = [Vec::new(), Vec::new()];
    for index in 0..f.rows() {
        let assignment = assignment_of_index(n, index);
        let word = t.simulate(&assignment);
        classes[usize::from(f.eval_index(index))].push((Assignment(assignment), word));
    }

    // Correctness: no cross-class pair may share a cyclic class.
    for (a0, w0) in &classes[0] {
        for (a1, w1) in &classes[1] {
            if w0.cyclically_equal(w1) {
                return Ok(Verdict::CorrectnessViolation {
                    witness: (a0.clone(), a1.clone()),
                    detail: format!("{} ~ {}", w0, w1),
                });
            }
        }
    }

    // Security: each class must collapse to a single cyclic class.
    for class in &classes {
        if let Some((a0, w0)) = class.first() {
            for (a, w) in &class[1..] {
                if !w0.cyclically_equal(w) {
                    return Ok(Verdict::SecurityViolation {
                        witness: (a0.clone(), a.clone()),
                        detail: format!("{} !~ {}", w0, w),
                    });
                }
            }
        }
    }

    // Declared output patterns must match the simulated classes.
    if let Some((p0, p1)) = t.outputs() {
        for (b, pattern) in [(0usize, p0), (1, p1)] {
            if let Some((a, w)) = classes[b].first() {
                if !w.cyclically_equal(pattern) {
                    let other = classes[1 - b]
                        .first()
                        .map(|(a2, _)| a2.clone())
                        .unwrap_or_else(|| a.clone());
                    let witness = if b == 0 {
                        (a.clone(), other)
                    } else {
                        (other, a.clone())
                    };
                    return Ok(Verdict::CorrectnessViolation {
                        witness,
                        detail: format!(
                            "output-{} words open as {} which is not the declared pattern {}",
                            b,
                            w.canonical_rotation(),
                            pattern
                        ),
                    });
                }
            }
        }
    }

    Ok(Verdict::Valid)
}

/// Rebuilds the dealt sequence a certificate describes and verifies it.
///
/// The certificate's arrangement permutes the standard commitment order
/// `x1 !x1 x2 !x2 ...`; the insertion then adds clubs after target
/// positions. The certificate's opening patterns must match the simulated
/// classes.
pub fn verify_certificate(cert: &ProtocolCertificate) -> Result<Verdict, VerifyError> {
    let t = certificate_template(cert)?;
    verify_protocol(&t, &cert.table)
}

/// The template induced by a certificate's arrangement and insertion.
pub fn certificate_template(cert: &ProtocolCertificate) -> Result<ProtocolTemplate, VerifyError> {
    let n = cert.table.vars();
    if cert.arrangement.len() != 2 * n {
        return Err(VerifyError::MalformedCertificate(format!(
            "arrangement has {} positions, expected {}",
            cert.arrangement.len(),
            2 * n
        )));
    }
    if cert.insertion.len() != 2 * n {
        return Err(VerifyError::MalformedCertificate(format!(
            "insertion has {} positions, expected {}",
            cert.insertion.len(),
            2 * n
        )));
    }
    let mut slots = Vec::with_capacity(2 * n + cert.insertion.total() as usize);
    for q in 0..2 * n {
        let p = cert.arrangement.source_of(q);
        slots.push(Slot::Lit {
            var: p / 2,
            negated: p % 2 == 1,
        });
        for _ in 0..cert.insertion.counts()[q] {
            slots.push(Slot::Club);
        }
    }
    ProtocolTemplate::new(
        n,
        slots,
        Some((
            cert.opening_pattern_0.clone(),
            cert.opening_pattern_1.clone(),
        )),
    )
}

/// Full consistency audit of a certificate: field arithmetic plus the
/// simulation verdict.
pub fn certificate_is_consistent(cert: &ProtocolCertificate) -> bool {
    let n = cert.table.vars();
    cert.final_length as usize == 2 * n + cert.additional_clubs as usize
        && cert.insertion.total() == cert.additional_clubs
        && !cert
            .opening_pattern_0
            .cyclically_equal(&cert.opening_pattern_1)
        && matches!(verify_certificate(cert), Ok(Verdict::Valid))
}

/// Verdict for an accepted search tuple, before it becomes a certificate.
pub fn entry_verdict(
    table: &TruthTable,
    pi: &Arrangement,
    y: &InsertionVector,
    open0: &CardWord,
    open1: &CardWord,
) -> Result<Verdict, VerifyError> {
    let n = table.vars();
    let mut slots = Vec::with_capacity(2 * n + y.total() as usize);
    for q in 0..2 * n {
        let p = pi.source_of(q);
        slots.push(Slot::Lit {
            var: p / 2,
            negated: p % 2 == 1,
        });
        for _ in 0..y.counts()[q] {
            slots.push(Slot::Club);
        }
    }
    let t = ProtocolTemplate::new(n, slots, Some((open0.clone(), open1.clone())))?;
    verify_protocol(&t, table)
}

/// The bundled protocol fixtures, each a known protocol stated as a
/// template plus the function it computes.
pub mod fixtures {
    use super::*;
    use crate::boolfun::named_function;

    pub struct Fixture {
        pub name: &'static str,
        pub template: ProtocolTemplate,
        pub function: TruthTable,
    }

    fn lit(var: usize, negated: bool) -> Slot {
        Slot::Lit { var, negated }
    }

    fn word(s: &str) -> CardWord {
        s.parse().expect("fixture pattern")
    }

    /// Four-card protocol for the two-variable XOR.
    pub fn xor_two() -> Fixture {
        Fixture {
            name: "xor2-4cards",
            template: ProtocolTemplate::new(
                2,
                vec![lit(0, false), lit(0, true), lit(1, false), lit(1, true)],
                Some((word("1010"), word("1100"))),
            )
            .expect("fixture"),
            function: named_function("xor2").expect("catalog"),
        }
    }

    /// Five-card protocol for the two-variable AND, one extra heart.
    pub fn and_two() -> Fixture {
        Fixture {
            name: "and2-5cards",
            template: ProtocolTemplate::new(
                2,
                vec![
                    lit(0, true),
                    lit(0, false),
                    Slot::Heart,
                    lit(1, false),
                    lit(1, true),
                ],
                Some((word("10101"), word("11100"))),
            )
            .expect("fixture"),
            function: named_function("and2").expect("catalog"),
        }
    }

    /// Six-card protocol for the three-variable equality predicate.
    ///
    /// Equal inputs deal an alternating word, unequal inputs a blocky one,
    /// so the alternating class carries output 1.
    pub fn equality_three() -> Fixture {
        Fixture {
            name: "eq3-6cards",
            template: ProtocolTemplate::new(
                3,
                vec![
                    lit(0, false),
                    lit(1, true),
                    lit(2, false),
                    lit(0, true),
                    lit(1, false),
                    lit(2, true),
                ],
                Some((word("111000"), word("101010"))),
            )
            .expect("fixture"),
            function: named_function("eq3").expect("catalog"),
        }
    }

    /// Eight-card protocol for the two-to-one multiplexer, one extra card of
    /// each color.
    pub fn mux_three() -> Fixture {
        Fixture {
            name: "mux3-8cards",
            template: ProtocolTemplate::new(
                3,
                vec![
                    lit(1, false),
                    lit(0, true),
                    lit(2, true),
                    Slot::Heart,
                    lit(1, true),
                    lit(0, false),
                    lit(2, false),
                    Slot::Club,
                ],
                Some((word("11110000"), word("00101101"))),
            )
            .expect("fixture"),
            function: named_function("mux3").expect("catalog"),
        }
    }

    /// Eight-card protocol for the three-variable XOR; not in commitment
    /// order, the first input appears twice.
    pub fn xor_three() -> Fixture {
        Fixture {
            name: "xor3-8cards",
            template: ProtocolTemplate::new(
                3,
                vec![
                    lit(0, false),
                    lit(1, false),
                    lit(0, true),
                    lit(2, false),
                    lit(0, false),
                    lit(1, true),
                    lit(0, true),
                    lit(2, true),
                ],
                Some((word("00100111"), word("11011000"))),
            )
            .expect("fixture"),
            function: named_function("xor3").expect("catalog"),
        }
    }

    /// Eight-card protocol for a four-variable function, inputs dealt as
    /// positive literals then negative literals.
    pub fn four_variable() -> Fixture {
        Fixture {
            name: "fourvar-8cards",
            template: ProtocolTemplate::new(
                4,
                vec![
                    lit(0, false),
                    lit(1, false),
                    lit(2, false),
                    lit(3, false),
                    lit(0, true),
                    lit(1, true),
                    lit(2, true),
                    lit(3, true),
                ],
                Some((word("11110000"), word("00101101"))),
            )
            .expect("fixture"),
            function: "0010111001110100".parse().expect("fixture table"),
        }
    }

    /// The AND template with its heart removed: a known-broken protocol used
    /// as a negative control.
    pub fn and_two_without_heart() -> Fixture {
        Fixture {
            name: "and2-4cards-broken",
            template: ProtocolTemplate::new(
                2,
                vec![lit(0, true), lit(0, false), lit(1, false), lit(1, true)],
                None,
            )
            .expect("fixture"),
            function: named_function("and2").expect("catalog"),
        }
    }

    pub fn all_valid() -> Vec<Fixture> {
        vec![
            xor_two(),
            and_two(),
            equality_three(),
            mux_three(),
            xor_three(),
            four_variable(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use std::collections::HashMap;

    fn assignments(n: usize) -> Vec<Vec<bool>> {
        (0..1usize << n)
            .map(|i| assignment_of_index(n, i))
            .collect()
    }

    #[test]
    fn simulate_matches_dealt_sequences() {
        let eq3 = equality_three();
        assert_eq!(
            eq3.template.simulate(&[false, false, false]).to_string(),
            "010101"
        );
        let and2 = and_two();
        assert_eq!(and2.template.simulate(&[true, true]).to_string(), "01110");
        let xor2 = xor_two();
        assert_eq!(xor2.template.simulate(&[false, false]).to_string(), "0101");
    }

    #[test]
    fn all_fixtures_verify_valid() {
        for fixture in all_valid() {
            let verdict = verify_protocol(&fixture.template, &fixture.function).unwrap();
            assert!(verdict.is_valid(), "{}: {}", fixture.name, verdict);
        }
    }

    #[test]
    fn negative_control_fails_correctness_with_expected_witness() {
        let broken = and_two_without_heart();
        let verdict = verify_protocol(&broken.template, &broken.function).unwrap();
        match verdict {
            Verdict::CorrectnessViolation { witness, .. } => {
                assert_eq!(witness.0, Assignment(vec![false, false]));
                assert_eq!(witness.1, Assignment(vec![true, true]));
            }
            other => panic!("expected correctness violation, got {other}"),
        }
    }

    #[test]
    fn swapped_output_patterns_are_detected() {
        let good = xor_two();
        let (p0, p1) = good.template.outputs().unwrap().clone();
        let swapped =
            ProtocolTemplate::new(2, good.template.slots().to_vec(), Some((p1, p0))).unwrap();
        let verdict = verify_protocol(&swapped, &good.function).unwrap();
        assert!(
            matches!(verdict, Verdict::CorrectnessViolation { .. }),
            "{verdict}"
        );
    }

    #[test]
    fn colliding_patterns_rejected_at_construction() {
        let err = ProtocolTemplate::new(
            1,
            vec![
                Slot::Lit {
                    var: 0,
                    negated: false,
                },
                Slot::Lit {
                    var: 0,
                    negated: true,
                },
            ],
            Some(("10".parse().unwrap(), "01".parse().unwrap())),
        );
        assert_eq!(err.unwrap_err(), VerifyError::OutputPatternsCollide);
    }

    #[test]
    fn unused_variable_rejected() {
        let err = ProtocolTemplate::new(
            2,
            vec![Slot::Lit {
                var: 0,
                negated: false,
            }],
            None,
        );
        assert_eq!(err.unwrap_err(), VerifyError::UnusedVariable(2));
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let f3 = crate::boolfun::named_function("xor3").unwrap();
        assert!(verify_protocol(&xor_two().template, &f3).is_err());
    }

    /// Distribution oracle: the random cut's output distribution is the
    /// uniform distribution over rotations. Two words induce the same
    /// distribution exactly when they are cyclically equal.
    fn cut_distribution(w: &CardWord) -> HashMap<String, u32> {
        let mut dist = HashMap::new();
        for rot in w.rotations() {
            *dist.entry(rot.to_string()).or_insert(0) += 1;
        }
        dist
    }

    #[test]
    fn verdicts_agree_with_distribution_comparison() {
        for fixture in all_valid() {
            let n = fixture.function.vars();
            let mut by_output: [Vec<CardWord>; 2] = [Vec::new(), Vec::new()];
            for a in assignments(n) {
                let w = fixture.template.simulate(&a);
                by_output[usize::from(fixture.function.eval(&a))].push(w);
            }
            // Same-output pairs must induce identical distributions,
            // cross-output pairs distinct ones.
            for b in 0..2 {
                if let Some(first) = by_output[b].first() {
                    let d0 = cut_distribution(first);
                    for w in &by_output[b][1..] {
                        assert_eq!(&d0, &cut_distribution(w), "{}", fixture.name);
                    }
                }
            }
            if let (Some(w0), Some(w1)) = (by_output[0].first(), by_output[1].first()) {
                assert_ne!(
                    cut_distribution(w0),
                    cut_distribution(w1),
                    "{}",
                    fixture.name
                );
            }
        }
    }

    #[test]
    fn mutated_certificates_are_detected() {
        use crate::search::{search_scfo, SearchOptions};
        let f = crate::boolfun::named_function("xor2").unwrap();
        let run = search_scfo(&f, Some("xor2"), &SearchOptions::default());
        let cert = run.certificate().unwrap();
        assert!(certificate_is_consistent(&cert));

        // One extra club in the first slot breaks the opening patterns.
        let mut perturbed = cert.clone();
        let mut counts = perturbed.insertion.counts().to_vec();
        counts[0] += 1;
        perturbed.insertion = InsertionVector::new(counts);
        let verdict = verify_certificate(&perturbed).unwrap();
        assert!(!verdict.is_valid(), "perturbed insertion went undetected");
        assert!(!certificate_is_consistent(&perturbed));

        // Swapped output labels are a correctness mismatch.
        let mut swapped = cert.clone();
        std::mem::swap(
            &mut swapped.opening_pattern_0,
            &mut swapped.opening_pattern_1,
        );
        let verdict = verify_certificate(&swapped).unwrap();
        assert!(
            matches!(verdict, Verdict::CorrectnessViolation { .. }),
            "{verdict}"
        );
    }

    #[test]
    fn single_swap_mutations_are_mostly_rejected() {
        let mut total = 0u32;
        let mut rejected = 0u32;
        let mut report = Vec::new();
        for fixture in all_valid() {
            let slots = fixture.template.slots().to_vec();
            let outputs = fixture.template.outputs().cloned();
            let mut fixture_rejected = 0u32;
            let mut fixture_total = 0u32;
            for i in 0..slots.len() {
                for j in (i + 1)..slots.len() {
                    if slots[i] == slots[j] {
                        continue;
                    }
                    let mut mutated = slots.clone();
                    mutated.swap(i, j);
                    let t =
                        ProtocolTemplate::new(fixture.function.vars(), mutated, outputs.clone())
                            .expect("swap keeps every variable present");
                    let verdict = verify_protocol(&t, &fixture.function).unwrap();
                    fixture_total += 1;
                    if !verdict.is_valid() {
                        fixture_rejected += 1;
                    }
                }
            }
            report.push((fixture.name, fixture_rejected, fixture_total));
            total += fixture_total;
            rejected += fixture_rejected;
        }
        // The rejection set is recorded, not pinned; only the aggregate rate
        // is asserted.
        for (name, r, t) in &report {
            eprintln!("mutation rejection {name}: {r}/{t}");
        }
        assert!(total > 0);
        assert!(
            rejected as f64 >= 0.95 * total as f64,
            "rejected {rejected} of {total} single-swap mutants"
        );
    }
}
