//! Binary card words and their cyclic structure.
//!
//! A word is a finite sequence over {0, 1}, one symbol per card, clubs
//! written as 0 and hearts as 1. A random cut only exposes a word up to
//! rotation, so everything here revolves around cyclic structure: rotations,
//! cyclic equality, the gap vector (zero counts of the segments between
//! consecutive hearts, leftmost and rightmost runs joined) and zero
//! insertion. For words of equal length and equal heart count, the gap
//! vector taken up to rotation is a complete cyclic invariant.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised by word-level operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("rotation offset {offset} out of range for word of length {len}")]
    RotationOutOfRange { offset: usize, len: usize },
    #[error("word contains no hearts, gap structure is undefined")]
    NoHearts,
    #[error("position {pos} out of range for word of length {len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("insertion vector has {got} entries, word has length {want}")]
    InsertionLength { got: usize, want: usize },
    #[error("words must be nonempty")]
    Empty,
    #[error("invalid symbol {0:?}, expected '0' or '1'")]
    BadSymbol(char),
}

/// A face-up card sequence, one bit per card (club = 0, heart = 1).
///
/// Words are immutable values with structural equality. Identity up to
/// rotation is always expressed through [`CardWord::canonical_rotation`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CardWord {
    bits: Vec<u8>,
}

impl CardWord {
    /// Builds a word from raw bits. Every entry must be 0 or 1.
    pub fn new(bits: Vec<u8>) -> Result<Self, WordError> {
        if bits.is_empty() {
            return Err(WordError::Empty);
        }
        for &b in &bits {
            if b > 1 {
                return Err(WordError::BadSymbol((b'0' + b) as char));
            }
        }
        Ok(CardWord { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, pos: usize) -> Result<u8, WordError> {
        self.bits
            .get(pos)
            .copied()
            .ok_or(WordError::PositionOutOfRange {
                pos,
                len: self.len(),
            })
    }

    /// Number of hearts.
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Cyclic left shift: `rotate(w, r)` starts at symbol `r`.
    pub fn rotate(&self, offset: usize) -> Result<CardWord, WordError> {
        if offset >= self.len() {
            return Err(WordError::RotationOutOfRange {
                offset,
                len: self.len(),
            });
        }
        let mut bits = Vec::with_capacity(self.len());
        bits.extend_from_slice(&self.bits[offset..]);
        bits.extend_from_slice(&self.bits[..offset]);
        Ok(CardWord { bits })
    }

    /// All rotations of the word in offset order.
    pub fn rotations(&self) -> impl Iterator<Item = CardWord> + '_ {
        (0..self.len()).map(move |r| self.rotate(r).expect("offset < len"))
    }

    /// True when the two words are rotations of one another.
    pub fn cyclically_equal(&self, other: &CardWord) -> bool {
        if self.len() != other.len() {
            return false;
        }
        self.rotations().any(|w| w == *other)
    }

    /// Lexicographically least rotation, the canonical representative of the
    /// cyclic class.
    pub fn canonical_rotation(&self) -> CardWord {
        let mut best = 0usize;
        for cand in 1..self.len() {
            if self.rotation_less(cand, best) {
                best = cand;
            }
        }
        self.rotate(best).expect("offset < len")
    }

    fn rotation_less(&self, a: usize, b: usize) -> bool {
        let n = self.len();
        for i in 0..n {
            let x = self.bits[(a + i) % n];
            let y = self.bits[(b + i) % n];
            if x != y {
                return x < y;
            }
        }
        false
    }

    /// Zero count per segment. Segment `j` (0-based) is the run of zeros
    /// following the `j`-th heart boundary, with the run before the first
    /// heart and the run after the last heart joined into segment 0.
    pub fn gap_vector(&self) -> Result<GapVector, WordError> {
        let ones: Vec<usize> = (0..self.len()).filter(|&i| self.bits[i] == 1).collect();
        if ones.is_empty() {
            return Err(WordError::NoHearts);
        }
        let j = ones.len();
        let mut zeros = Vec::with_capacity(j);
        zeros.push((ones[0] + (self.len() - 1 - ones[j - 1])) as u32);
        for t in 1..j {
            zeros.push((ones[t] - ones[t - 1] - 1) as u32);
        }
        Ok(GapVector { zeros })
    }

    /// Segment owning insertion position `pos` (0-based, insertion lands
    /// immediately after symbol `pos`). Equals the heart count of the prefix
    /// through `pos`, reduced mod the total heart count.
    pub fn segment_of_position(&self, pos: usize) -> Result<usize, WordError> {
        if pos >= self.len() {
            return Err(WordError::PositionOutOfRange {
                pos,
                len: self.len(),
            });
        }
        let total = self.ones();
        if total == 0 {
            return Err(WordError::NoHearts);
        }
        let prefix = self.bits[..=pos].iter().filter(|&&b| b == 1).count();
        Ok(prefix % total)
    }

    /// Inserts `y[i]` zeros immediately after symbol `i`.
    pub fn apply_insertion(&self, y: &InsertionVector) -> Result<CardWord, WordError> {
        if y.len() != self.len() {
            return Err(WordError::InsertionLength {
                got: y.len(),
                want: self.len(),
            });
        }
        let mut bits = Vec::with_capacity(self.len() + y.total() as usize);
        for (i, &b) in self.bits.iter().enumerate() {
            bits.push(b);
            bits.extend(std::iter::repeat_n(0u8, y.counts[i] as usize));
        }
        Ok(CardWord { bits })
    }

    /// Club and heart glyph rendering for reports.
    pub fn glyphs(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b == 0 { '\u{2663}' } else { '\u{2665}' })
            .collect()
    }
}

impl fmt::Display for CardWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for CardWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CardWord({})", self)
    }
}

impl FromStr for CardWord {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => return Err(WordError::BadSymbol(other)),
            }
        }
        CardWord::new(bits)
    }
}

/// Per-segment zero counts of a word, indexed by segment.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GapVector {
    zeros: Vec<u32>,
}

impl GapVector {
    pub fn new(zeros: Vec<u32>) -> Self {
        GapVector { zeros }
    }

    /// Number of segments, equal to the heart count of the source word.
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn zeros(&self) -> &[u32] {
        &self.zeros
    }

    pub fn total_zeros(&self) -> u64 {
        self.zeros.iter().map(|&z| z as u64).sum()
    }

    /// Cyclic left shift by `s` segments.
    pub fn rotate(&self, s: usize) -> GapVector {
        let j = self.zeros.len();
        let s = s % j;
        let mut zeros = Vec::with_capacity(j);
        zeros.extend_from_slice(&self.zeros[s..]);
        zeros.extend_from_slice(&self.zeros[..s]);
        GapVector { zeros }
    }

    /// All shifts `s` with `self[j] == other[(j + s) mod J]` for every `j`.
    ///
    /// A length mismatch yields no shifts rather than an error: vectors with
    /// different segment counts are simply not cyclically equal.
    pub fn matching_shifts(&self, other: &GapVector) -> Vec<usize> {
        if self.zeros.len() != other.zeros.len() {
            return Vec::new();
        }
        let j = self.zeros.len();
        (0..j)
            .filter(|&s| (0..j).all(|k| self.zeros[k] == other.zeros[(k + s) % j]))
            .collect()
    }

    pub fn cyclically_equal(&self, other: &GapVector) -> bool {
        !self.matching_shifts(other).is_empty()
    }
}

impl fmt::Display for GapVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.zeros.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", z)?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for GapVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GapVector{}", self)
    }
}

/// Zero-insertion plan: entry `i` is the number of clubs inserted
/// immediately after symbol `i` of the target word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InsertionVector {
    counts: Vec<u32>,
}

impl InsertionVector {
    pub fn new(counts: Vec<u32>) -> Self {
        InsertionVector { counts }
    }

    pub fn zero(len: usize) -> Self {
        InsertionVector {
            counts: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Total number of inserted clubs.
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

impl fmt::Display for InsertionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", c)?;
        }
        Ok(())
    }
}

impl fmt::Debug for InsertionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InsertionVector({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> CardWord {
        s.parse().unwrap()
    }

    #[test]
    fn rotate_basic() {
        assert_eq!(w("10110").rotate(2).unwrap(), w("11010"));
        assert_eq!(w("10110").rotate(0).unwrap(), w("10110"));
        assert_eq!(w("0101").rotate(2).unwrap(), w("0101"));
    }

    #[test]
    fn rotate_out_of_range() {
        assert_eq!(
            w("101").rotate(3),
            Err(WordError::RotationOutOfRange { offset: 3, len: 3 })
        );
    }

    #[test]
    fn cyclic_equality() {
        assert!(w("10110").cyclically_equal(&w("11010")));
        assert!(w("10110").cyclically_equal(&w("10110")));
        // Oracle: list every rotation of 10100 and check 11000 is absent.
        let all: Vec<CardWord> = w("10100").rotations().collect();
        assert_eq!(all.len(), 5);
        assert!(!all.contains(&w("11000")));
        assert!(!w("10100").cyclically_equal(&w("11000")));
        assert!(!w("101").cyclically_equal(&w("1010")));
    }

    #[test]
    fn canonical_rotation_is_minimum() {
        // Oracle: explicit minimum over the five rotations.
        let mut rots: Vec<CardWord> = w("11010").rotations().collect();
        rots.sort();
        assert_eq!(rots[0], w("01011"));
        assert_eq!(w("11010").canonical_rotation(), w("01011"));
        assert_eq!(w("0000").canonical_rotation(), w("0000"));
        assert_eq!(w("10").canonical_rotation(), w("01"));
    }

    #[test]
    fn gap_vector_examples() {
        assert_eq!(w("01100110").gap_vector().unwrap().zeros(), &[2, 0, 2, 0]);
        assert_eq!(w("1111").gap_vector().unwrap().zeros(), &[0, 0, 0, 0]);
        assert_eq!(w("10101").gap_vector().unwrap().zeros(), &[0, 1, 1]);
        assert_eq!(w("0000").gap_vector(), Err(WordError::NoHearts));
    }

    #[test]
    fn segment_of_position_examples() {
        // Positions are 0-based, segments 0-based.
        assert_eq!(w("01100110").segment_of_position(3).unwrap(), 2);
        assert_eq!(w("01100110").segment_of_position(7).unwrap(), 0);
        assert_eq!(w("1").segment_of_position(0).unwrap(), 0);
        assert_eq!(w("00").segment_of_position(1), Err(WordError::NoHearts));
        assert!(w("01").segment_of_position(2).is_err());
    }

    #[test]
    fn apply_insertion_examples() {
        let id = InsertionVector::zero(4);
        assert_eq!(w("0101").apply_insertion(&id).unwrap(), w("0101"));
        let y = InsertionVector::new(vec![2, 1]);
        assert_eq!(w("01").apply_insertion(&y).unwrap(), w("00010"));
        let y = InsertionVector::new(vec![0, 0, 0, 1, 0, 0, 0, 0]);
        assert_eq!(w("01100110").apply_insertion(&y).unwrap(), w("011000110"));
        let bad = InsertionVector::zero(3);
        assert_eq!(
            w("0101").apply_insertion(&bad),
            Err(WordError::InsertionLength { got: 3, want: 4 })
        );
    }

    #[test]
    fn matching_shifts_examples() {
        let g = |v: &[u32]| GapVector::new(v.to_vec());
        assert_eq!(g(&[2, 0]).matching_shifts(&g(&[0, 2])), vec![1]);
        assert_eq!(g(&[1, 1]).matching_shifts(&g(&[1, 1])), vec![0, 1]);
        assert!(g(&[2, 0, 2, 0])
            .matching_shifts(&g(&[2, 2, 0, 0]))
            .is_empty());
        assert!(g(&[1, 1]).matching_shifts(&g(&[1, 1, 0])).is_empty());
    }

    #[test]
    fn parse_and_display_round() {
        let word = w("0011011");
        assert_eq!(word.to_string(), "0011011");
        assert_eq!(word.glyphs(), "\u{2663}\u{2663}\u{2665}\u{2665}\u{2663}\u{2665}\u{2665}");
        assert!("01x1".parse::<CardWord>().is_err());
        assert!("".parse::<CardWord>().is_err());
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = CardWord> {
        proptest::collection::vec(0u8..=1, 1..=max_len)
            .prop_map(|bits| CardWord::new(bits).unwrap())
    }

    fn arb_word_with_heart(max_len: usize) -> impl Strategy<Value = CardWord> {
        arb_word(max_len).prop_filter("needs a heart", |w| w.ones() > 0)
    }

    proptest! {
        #[test]
        fn rotation_preserves_multiset(word in arb_word(12), r in 0usize..12) {
            let r = r % word.len();
            let rotated = word.rotate(r).unwrap();
            prop_assert_eq!(rotated.len(), word.len());
            prop_assert_eq!(rotated.ones(), word.ones());
        }

        #[test]
        fn gap_vector_rotates_with_word(word in arb_word_with_heart(12), r in 0usize..12) {
            let r = r % word.len();
            let shift = word.bits()[..r].iter().filter(|&&b| b == 1).count();
            let expected = word.gap_vector().unwrap().rotate(shift);
            prop_assert_eq!(word.rotate(r).unwrap().gap_vector().unwrap(), expected);
        }

        #[test]
        fn cyclic_equality_matches_gap_equality(
            pair in proptest::collection::vec(0u8..=1, 1..=10)
                .prop_filter("needs a heart", |b| b.contains(&1))
                .prop_flat_map(|bits| {
                    let a = CardWord::new(bits.clone()).unwrap();
                    Just(bits).prop_shuffle().prop_map(move |sh| {
                        (a.clone(), CardWord::new(sh).unwrap())
                    })
                }),
        ) {
            let (a, b) = pair;
            let by_words = a.cyclically_equal(&b);
            let by_gaps = a.gap_vector().unwrap().cyclically_equal(&b.gap_vector().unwrap());
            prop_assert_eq!(by_words, by_gaps);
        }

        #[test]
        fn canonical_rotation_is_class_invariant(word in arb_word(10), r in 0usize..10) {
            let r = r % word.len();
            let canon = word.canonical_rotation();
            prop_assert_eq!(canon.canonical_rotation(), canon.clone());
            prop_assert_eq!(word.rotate(r).unwrap().canonical_rotation(), canon.clone());
            prop_assert!(word.cyclically_equal(&canon));
        }

        #[test]
        fn insertion_commutes_with_gaps(
            word in arb_word_with_heart(8),
            raw in proptest::collection::vec(0u32..4, 8),
        ) {
            let y = InsertionVector::new(raw[..word.len()].to_vec());
            let inserted = word.apply_insertion(&y).unwrap();
            prop_assert_eq!(inserted.ones(), word.ones());
            prop_assert_eq!(inserted.len(), word.len() + y.total() as usize);

            let before = word.gap_vector().unwrap();
            let after = inserted.gap_vector().unwrap();
            for j in 0..before.len() {
                let added: u32 = (0..word.len())
                    .filter(|&i| word.segment_of_position(i).unwrap() == j)
                    .map(|i| y.counts()[i])
                    .sum();
                prop_assert_eq!(after.zeros()[j], before.zeros()[j] + added);
            }
        }
    }
}
