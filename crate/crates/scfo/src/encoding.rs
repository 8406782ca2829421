//! Builds the objects the search runs on: the input word classes of a
//! function, their images under an arrangement, and the equality system that
//! a zero insertion must satisfy for all same-output words to fall into one
//! cyclic class.
//!
//! The input template is fixed: assignment `x` becomes the word
//! `x1 !x1 x2 !x2 ... xn !xn`, so every word has length `2n` and exactly `n`
//! hearts. An arrangement then moves the card at source position `p` to
//! target position `pi(p)`.

use std::fmt;

use thiserror::Error;

use crate::boolfun::{assignment_of_index, TruthTable};
use crate::words::{CardWord, GapVector, InsertionVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("arrangement is not a bijection on 0..{0}")]
    NotABijection(usize),
    #[error("arrangement dimensioned for {arrangement} cards, words have {words}")]
    ArrangementDimension { arrangement: usize, words: usize },
    #[error("shift vector sized {got0}/{got1}, classes need {want0}/{want1}")]
    ShiftDimension {
        got0: usize,
        got1: usize,
        want0: usize,
        want1: usize,
    },
    #[error("shift entry {entry} out of range, segments = {segments}")]
    ShiftEntryRange { entry: u8, segments: usize },
    #[error("word classing invariant violated: {0}")]
    ClassingInvariant(String),
}

/// A permutation of card positions: the card at source position `p` moves to
/// target position `map[p]`. Positions are 0-based in code and 1-based in
/// the text formats.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrangement {
    map: Vec<usize>,
}

impl Arrangement {
    pub fn new(map: Vec<usize>) -> Result<Self, EncodingError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &p in &map {
            if p >= n || seen[p] {
                return Err(EncodingError::NotABijection(n));
            }
            seen[p] = true;
        }
        Ok(Arrangement { map })
    }

    pub fn identity(len: usize) -> Self {
        Arrangement {
            map: (0..len).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Target position of source position `p`.
    pub fn target_of(&self, p: usize) -> usize {
        self.map[p]
    }

    /// Source position that lands on target position `q`.
    pub fn source_of(&self, q: usize) -> usize {
        self.map
            .iter()
            .position(|&t| t == q)
            .expect("bijection invariant")
    }

    pub fn apply(&self, word: &CardWord) -> Result<CardWord, EncodingError> {
        if word.len() != self.map.len() {
            return Err(EncodingError::ArrangementDimension {
                arrangement: self.map.len(),
                words: word.len(),
            });
        }
        let mut bits = vec![0u8; word.len()];
        for (p, &b) in word.bits().iter().enumerate() {
            bits[self.map[p]] = b;
        }
        Ok(CardWord::new(bits).expect("permutation of a valid word"))
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.map.iter().map(|&p| p + 1).collect()
    }

    pub fn from_one_based(map: Vec<usize>) -> Result<Self, EncodingError> {
        let n = map.len();
        let mut zero = Vec::with_capacity(n);
        for p in map {
            if p == 0 || p > n {
                return Err(EncodingError::NotABijection(n));
            }
            zero.push(p - 1);
        }
        Arrangement::new(zero)
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.one_based().iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", p)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Arrangement({})", self)
    }
}

/// The words of a function grouped by output value, each class sorted
/// lexicographically so the first word is the fixed reference.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WordClassing {
    n: usize,
    classes: [Vec<CardWord>; 2],
}

impl WordClassing {
    fn validated(n: usize, classes: [Vec<CardWord>; 2]) -> Result<Self, EncodingError> {
        let total = classes[0].len() + classes[1].len();
        if total != 1 << n {
            return Err(EncodingError::ClassingInvariant(format!(
                "expected {} words, found {}",
                1 << n,
                total
            )));
        }
        for class in &classes {
            for w in class {
                if w.len() != 2 * n || w.ones() != n {
                    return Err(EncodingError::ClassingInvariant(format!(
                        "word {} must have length {} and {} hearts",
                        w,
                        2 * n,
                        n
                    )));
                }
            }
        }
        let mut all: Vec<&CardWord> = classes.iter().flatten().collect();
        all.sort();
        if all.windows(2).any(|p| p[0] == p[1]) {
            return Err(EncodingError::ClassingInvariant(
                "duplicate word across classes".to_string(),
            ));
        }
        Ok(WordClassing { n, classes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Word length, which is also the number of insertion positions.
    pub fn positions(&self) -> usize {
        2 * self.n
    }

    /// Hearts per word, which is also the number of segments.
    pub fn segments(&self) -> usize {
        self.n
    }

    pub fn class(&self, b: usize) -> &[CardWord] {
        &self.classes[b]
    }

    pub fn class_sizes(&self) -> (usize, usize) {
        (self.classes[0].len(), self.classes[1].len())
    }
}

/// Step 1: one word per assignment, grouped by output value.
pub fn input_words(f: &TruthTable) -> WordClassing {
    let n = f.vars();
    let mut classes = [Vec::new(), Vec::new()];
    for index in 0..f.rows() {
        let assignment = assignment_of_index(n, index);
        let mut bits = Vec::with_capacity(2 * n);
        for &x in &assignment {
            bits.push(u8::from(x));
            bits.push(u8::from(!x));
        }
        let word = CardWord::new(bits).expect("2n bits");
        classes[usize::from(f.eval_index(index))].push(word);
    }
    classes[0].sort();
    classes[1].sort();
    WordClassing::validated(n, classes).expect("template words satisfy the invariants")
}

/// Step 2: apply an arrangement to every word of a classing.
pub fn permute_classing(
    c: &WordClassing,
    pi: &Arrangement,
) -> Result<WordClassing, EncodingError> {
    if pi.len() != c.positions() {
        return Err(EncodingError::ArrangementDimension {
            arrangement: pi.len(),
            words: c.positions(),
        });
    }
    let mut classes = [Vec::new(), Vec::new()];
    for b in 0..2 {
        for w in c.class(b) {
            classes[b].push(pi.apply(w)?);
        }
        classes[b].sort();
    }
    WordClassing::validated(c.n(), classes)
}

/// Rotation offsets aligning each class member's post-insertion gap vector
/// with the class reference word. Entry `k` of `class\[b\]` is the shift of
/// word `k + 1` relative to word 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ShiftVector {
    class0: Vec<u8>,
    class1: Vec<u8>,
}

impl ShiftVector {
    pub fn new(class0: Vec<u8>, class1: Vec<u8>) -> Self {
        ShiftVector { class0, class1 }
    }

    pub fn class(&self, b: usize) -> &[u8] {
        match b {
            0 => &self.class0,
            _ => &self.class1,
        }
    }

    pub fn entry_count(&self) -> usize {
        self.class0.len() + self.class1.len()
    }
}

impl fmt::Display for ShiftVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u8]| {
            v.iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "[{}] [{}]", join(&self.class0), join(&self.class1))
    }
}

/// One linear equation `sum(coeffs[i] * y[i]) = rhs` over the insertion
/// counts.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IlpRow {
    pub coeffs: Vec<i64>,
    pub rhs: i64,
}

impl IlpRow {
    pub fn evaluate(&self, y: &[i64]) -> i64 {
        self.coeffs
            .iter()
            .zip(y)
            .map(|(&c, &v)| c * v)
            .sum::<i64>()
    }

    pub fn satisfied_by(&self, y: &[i64]) -> bool {
        self.evaluate(y) == self.rhs
    }
}

/// The equality system of one search instance, after eliminating the
/// post-insertion gap variables by substitution. Only the insertion counts
/// remain as unknowns.
#[derive(Clone, Debug)]
pub struct IlpInstance {
    /// Number of insertion positions, the word length.
    pub positions: usize,
    /// Segments per word, the heart count.
    pub segments: usize,
    /// Class sizes (K0, K1).
    pub class_sizes: (usize, usize),
    pub rows: Vec<IlpRow>,
    /// Gap constants per class and word.
    pub gaps: [Vec<GapVector>; 2],
    /// Segment index per class, word and insertion position.
    pub segment_of: [Vec<Vec<u8>>; 2],
    pub shifts: ShiftVector,
}

impl IlpInstance {
    /// A bare instance carrying only the equality system. Used when the
    /// system of interest does not come from a word classing, e.g. in the
    /// solver's randomized test harness.
    pub fn from_rows(positions: usize, rows: Vec<IlpRow>) -> Self {
        IlpInstance {
            positions,
            segments: 0,
            class_sizes: (0, 0),
            rows,
            gaps: [Vec::new(), Vec::new()],
            segment_of: [Vec::new(), Vec::new()],
            shifts: ShiftVector::new(Vec::new(), Vec::new()),
        }
    }

    /// One equation per line, for inspection.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut first = true;
            for (i, &c) in row.coeffs.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let sign = if c < 0 {
                    "- "
                } else if first {
                    ""
                } else {
                    "+ "
                };
                let mag = c.abs();
                if mag == 1 {
                    out.push_str(&format!("{}y{} ", sign, i + 1));
                } else {
                    out.push_str(&format!("{}{}*y{} ", sign, mag, i + 1));
                }
                first = false;
            }
            if first {
                out.push_str("0 ");
            }
            out.push_str(&format!("= {}\n", row.rhs));
        }
        out
    }
}

/// Per-word constants of a classing, computed once and shared by every
/// shift vector built on top of it.
#[derive(Clone, Debug)]
pub struct PreparedClassing {
    classing: WordClassing,
    gaps: [Vec<GapVector>; 2],
    segment_of: [Vec<Vec<u8>>; 2],
}

impl PreparedClassing {
    pub fn new(classing: WordClassing) -> Self {
        let mut gaps = [Vec::new(), Vec::new()];
        let mut segment_of = [Vec::new(), Vec::new()];
        for b in 0..2 {
            for w in classing.class(b) {
                gaps[b].push(w.gap_vector().expect("classing words have n hearts"));
                let segs: Vec<u8> = (0..w.len())
                    .map(|i| w.segment_of_position(i).expect("position in range") as u8)
                    .collect();
                segment_of[b].push(segs);
            }
        }
        PreparedClassing {
            classing,
            gaps,
            segment_of,
        }
    }

    pub fn classing(&self) -> &WordClassing {
        &self.classing
    }

    pub fn positions(&self) -> usize {
        self.classing.positions()
    }

    pub fn segments(&self) -> usize {
        self.classing.segments()
    }

    /// Pair slots in shift-vector order: class 0 pairs first, then class 1.
    /// Slot `(b, k)` pairs word `k` of class `b` with word 0.
    pub fn pair_slots(&self) -> Vec<(usize, usize)> {
        let mut slots = Vec::new();
        for b in 0..2 {
            for k in 1..self.classing.class(b).len() {
                slots.push((b, k));
            }
        }
        slots
    }

    /// The `J` equations forcing word `k` of class `b`, shifted by `shift`,
    /// to share its post-insertion gap vector with word 0 of the class.
    pub fn pair_rows(&self, b: usize, k: usize, shift: u8) -> Vec<IlpRow> {
        let j_count = self.segments();
        let positions = self.positions();
        let seg_ref = &self.segment_of[b][0];
        let seg_k = &self.segment_of[b][k];
        let gaps_ref = &self.gaps[b][0];
        let gaps_k = &self.gaps[b][k];
        let mut rows = Vec::with_capacity(j_count);
        for j in 0..j_count {
            let jp = (j + shift as usize) % j_count;
            let mut coeffs = vec![0i64; positions];
            for i in 0..positions {
                if seg_ref[i] as usize == j {
                    coeffs[i] += 1;
                }
                if seg_k[i] as usize == jp {
                    coeffs[i] -= 1;
                }
            }
            let rhs = gaps_k.zeros()[jp] as i64 - gaps_ref.zeros()[j] as i64;
            rows.push(IlpRow { coeffs, rhs });
        }
        rows
    }

    pub fn build_instance(&self, shifts: &ShiftVector) -> Result<IlpInstance, EncodingError> {
        let (k0, k1) = self.classing.class_sizes();
        let want0 = k0.saturating_sub(1);
        let want1 = k1.saturating_sub(1);
        if shifts.class(0).len() != want0 || shifts.class(1).len() != want1 {
            return Err(EncodingError::ShiftDimension {
                got0: shifts.class(0).len(),
                got1: shifts.class(1).len(),
                want0,
                want1,
            });
        }
        let j_count = self.segments();
        let mut rows = Vec::with_capacity(j_count * (want0 + want1));
        for b in 0..2 {
            for (idx, &shift) in shifts.class(b).iter().enumerate() {
                if shift as usize >= j_count {
                    return Err(EncodingError::ShiftEntryRange {
                        entry: shift,
                        segments: j_count,
                    });
                }
                rows.extend(self.pair_rows(b, idx + 1, shift));
            }
        }
        Ok(IlpInstance {
            positions: self.positions(),
            segments: j_count,
            class_sizes: (k0, k1),
            rows,
            gaps: self.gaps.clone(),
            segment_of: self.segment_of.clone(),
            shifts: shifts.clone(),
        })
    }
}

/// Builds the equality system for a classing and shift vector.
pub fn build_ilp(c: &WordClassing, shifts: &ShiftVector) -> Result<IlpInstance, EncodingError> {
    PreparedClassing::new(c.clone()).build_instance(shifts)
}

/// Checks the gap-vector equalities of an instance against a concrete
/// insertion, going back to the words themselves: every word of a class must
/// be cyclically equal to the class reference after insertion.
pub fn insertion_equalizes_classes(c: &WordClassing, y: &InsertionVector) -> bool {
    for b in 0..2 {
        let class = c.class(b);
        if class.is_empty() {
            continue;
        }
        let reference = class[0]
            .apply_insertion(y)
            .expect("insertion dimensioned for word length");
        for w in &class[1..] {
            let inserted = w.apply_insertion(y).expect("dimension checked");
            if !inserted.cyclically_equal(&reference) {
                return false;
            }
        }
    }
    true
}
