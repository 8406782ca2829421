//! Boolean functions as truth tables, NPN classification, and the built-in
//! catalog of named functions.
//!
//! A table over `n` variables stores `2^n` output bits. Row index `i`
//! encodes the assignment with `x1` as the most significant bit, so for
//! `n = 2` the indices run through the assignments 00, 01, 10, 11 and the
//! two-variable AND is written `0001`. Every text format in this crate uses
//! that order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub const MAX_VARS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoolFunError {
    #[error("variable count {0} out of range, supported range is 1..=4")]
    VarsOutOfRange(usize),
    #[error("truth table text must be {want} characters of 0/1 for n = {n}, got {got:?}")]
    BadTableText { n: usize, want: usize, got: String },
    #[error("truth table length {0} is not a power of two in 2..=16")]
    BadTableLength(usize),
    #[error("transform dimensioned for {transform} variables, function has {function}")]
    TransformDimension { transform: usize, function: usize },
    #[error("transform input permutation is not a bijection")]
    NotAPermutation,
    #[error("unknown function name {name:?}, valid names: {valid}")]
    UnknownName { name: String, valid: String },
}

/// An `n`-variable Boolean function, `1 <= n <= 4`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    bits: u16,
}

impl TruthTable {
    pub fn new(n: usize, bits: u16) -> Result<Self, BoolFunError> {
        if n == 0 || n > MAX_VARS {
            return Err(BoolFunError::VarsOutOfRange(n));
        }
        let rows = 1u32 << n;
        let mask = if rows == 16 { u16::MAX } else { (1u16 << rows) - 1 };
        Ok(TruthTable {
            n,
            bits: bits & mask,
        })
    }

    /// Builds a table by evaluating `f` on every assignment, given as a
    /// slice of variable values `[x1, ..., xn]`.
    pub fn from_fn(n: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self, BoolFunError> {
        if n == 0 || n > MAX_VARS {
            return Err(BoolFunError::VarsOutOfRange(n));
        }
        let mut bits = 0u16;
        for index in 0..(1usize << n) {
            let assignment = assignment_of_index(n, index);
            if f(&assignment) {
                bits |= 1 << index;
            }
        }
        Ok(TruthTable { n, bits })
    }

    pub fn vars(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        1 << self.n
    }

    /// Output for the row index (x1 most significant).
    pub fn eval_index(&self, index: usize) -> bool {
        debug_assert!(index < self.rows());
        (self.bits >> index) & 1 == 1
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        debug_assert_eq!(assignment.len(), self.n);
        self.eval_index(index_of_assignment(assignment))
    }

    /// Some(value) when the function is constant.
    pub fn constant_value(&self) -> Option<bool> {
        let rows = self.rows();
        let all = if rows == 16 { u16::MAX } else { (1u16 << rows) - 1 };
        if self.bits == 0 {
            Some(false)
        } else if self.bits == all {
            Some(true)
        } else {
            None
        }
    }

    pub fn complement(&self) -> TruthTable {
        let rows = self.rows();
        let all = if rows == 16 { u16::MAX } else { (1u16 << rows) - 1 };
        TruthTable {
            n: self.n,
            bits: self.bits ^ all,
        }
    }

    /// Table text in row-index order, e.g. `0001` for the two-variable AND.
    pub fn table_text(&self) -> String {
        (0..self.rows())
            .map(|i| if self.eval_index(i) { '1' } else { '0' })
            .collect()
    }

    /// Key under which tables are ordered: the table text read as a binary
    /// number, row 0 most significant. Lexicographic on the text.
    fn lex_key(&self) -> u32 {
        let rows = self.rows();
        let mut key = 0u32;
        for i in 0..rows {
            key = (key << 1) | u32::from(self.eval_index(i));
        }
        key
    }
}

impl PartialOrd for TruthTable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TruthTable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.lex_key()).cmp(&(other.n, other.lex_key()))
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.table_text())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable(n={}, {})", self.n, self.table_text())
    }
}

impl FromStr for TruthTable {
    type Err = BoolFunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let len = s.len();
        let n = match len {
            2 => 1,
            4 => 2,
            8 => 3,
            16 => 4,
            _ => return Err(BoolFunError::BadTableLength(len)),
        };
        let mut bits = 0u16;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => {
                    return Err(BoolFunError::BadTableText {
                        n,
                        want: len,
                        got: s.to_string(),
                    })
                }
            }
        }
        TruthTable::new(n, bits)
    }
}

/// Assignment `[x1, ..., xn]` for a row index.
pub fn assignment_of_index(n: usize, index: usize) -> Vec<bool> {
    (0..n).map(|v| (index >> (n - 1 - v)) & 1 == 1).collect()
}

/// Row index of an assignment `[x1, ..., xn]`.
pub fn index_of_assignment(assignment: &[bool]) -> usize {
    assignment
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
}

/// A negate-permute-negate transform: `(Tf)(x) = o ^ f(y)` where
/// `y[j] = x[perm[j]] ^ neg[j]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NpnTransform {
    perm: Vec<usize>,
    input_neg: u8,
    output_neg: bool,
}

impl NpnTransform {
    pub fn new(perm: Vec<usize>, input_neg: u8, output_neg: bool) -> Result<Self, BoolFunError> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(BoolFunError::NotAPermutation);
            }
            seen[p] = true;
        }
        Ok(NpnTransform {
            perm,
            input_neg,
            output_neg,
        })
    }

    pub fn identity(n: usize) -> Self {
        NpnTransform {
            perm: (0..n).collect(),
            input_neg: 0,
            output_neg: false,
        }
    }

    pub fn vars(&self) -> usize {
        self.perm.len()
    }

    /// The transform equal to applying `self` first and `after` second.
    pub fn then(&self, after: &NpnTransform) -> NpnTransform {
        let n = self.perm.len();
        debug_assert_eq!(n, after.perm.len());
        let mut perm = vec![0usize; n];
        let mut input_neg = 0u8;
        for j in 0..n {
            perm[j] = after.perm[self.perm[j]];
            let m = ((after.input_neg >> self.perm[j]) & 1) ^ ((self.input_neg >> j) & 1);
            input_neg |= m << j;
        }
        NpnTransform {
            perm,
            input_neg,
            output_neg: self.output_neg ^ after.output_neg,
        }
    }
}

/// Applies a transform to a table.
pub fn apply_transform(f: &TruthTable, t: &NpnTransform) -> Result<TruthTable, BoolFunError> {
    if t.vars() != f.vars() {
        return Err(BoolFunError::TransformDimension {
            transform: t.vars(),
            function: f.vars(),
        });
    }
    let n = f.vars();
    let mut bits = 0u16;
    for index in 0..f.rows() {
        let mut y_index = 0usize;
        for j in 0..n {
            let xv = (index >> (n - 1 - t.perm[j])) & 1;
            let bit = xv ^ ((t.input_neg >> j) as usize & 1);
            y_index |= bit << (n - 1 - j);
        }
        if t.output_neg ^ f.eval_index(y_index) {
            bits |= 1 << index;
        }
    }
    Ok(TruthTable { n, bits })
}

/// Every transform for `n` variables, in a fixed deterministic order.
pub fn all_transforms(n: usize) -> Vec<NpnTransform> {
    let perms = permutations_lex(n);
    let mut out = Vec::with_capacity(perms.len() * (1 << n) * 2);
    for perm in &perms {
        for neg in 0..(1u8 << n) {
            for out_neg in [false, true] {
                out.push(NpnTransform {
                    perm: perm.clone(),
                    input_neg: neg,
                    output_neg: out_neg,
                });
            }
        }
    }
    out
}

/// Permutations of `0..n` in lexicographic order.
pub fn permutations_lex(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Lexicographically least table reachable by any transform.
pub fn npn_canonical(f: &TruthTable) -> TruthTable {
    let mut best = *f;
    for t in all_transforms(f.vars()) {
        let candidate = apply_transform(f, &t).expect("dimension matches");
        if candidate < best {
            best = candidate;
        }
    }
    best
}

/// One canonical representative per equivalence class, sorted, covering all
/// `2^(2^n)` functions.
pub fn npn_classes(n: usize) -> Result<Vec<TruthTable>, BoolFunError> {
    if n == 0 || n > MAX_VARS {
        return Err(BoolFunError::VarsOutOfRange(n));
    }
    let transforms = all_transforms(n);
    let mut canonicals = BTreeSet::new();
    for raw in 0..(1u32 << (1 << n)) {
        let f = TruthTable::new(n, raw as u16)?;
        let mut best = f;
        for t in &transforms {
            let candidate = apply_transform(&f, t)?;
            if candidate < best {
                best = candidate;
            }
        }
        canonicals.insert(best);
    }
    Ok(canonicals.into_iter().collect())
}

/// A named function from the built-in catalog.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub table: TruthTable,
}

fn t(n: usize, text: &str) -> TruthTable {
    let table: TruthTable = text.parse().expect("catalog table text");
    assert_eq!(table.vars(), n);
    table
}

/// The built-in catalog. Two-variable entries come first, then the
/// three-variable representatives, then constants and dictators.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry { name: "and2", formula: "x1 & x2", table: t(2, "0001") },
        CatalogEntry { name: "xor2", formula: "x1 ^ x2", table: t(2, "0110") },
        CatalogEntry { name: "and3", formula: "x1 & x2 & x3", table: t(3, "00000001") },
        CatalogEntry { name: "xor3", formula: "x1 ^ x2 ^ x3", table: t(3, "01101001") },
        CatalogEntry { name: "eq3", formula: "(x1 = x2 = x3)", table: t(3, "10000001") },
        CatalogEntry { name: "maj3", formula: "(x1 + x2 + x3 >= 2)", table: t(3, "00010111") },
        CatalogEntry { name: "one3", formula: "(x1 + x2 + x3 = 1)", table: t(3, "01101000") },
        CatalogEntry { name: "xorand3", formula: "x1 ^ (x2 & x3)", table: t(3, "00011110") },
        CatalogEntry { name: "mux3", formula: "(x1 & x2) | (~x1 & x3)", table: t(3, "01010011") },
        CatalogEntry { name: "andxor3", formula: "x1 & (x2 ^ x3)", table: t(3, "00000110") },
        CatalogEntry { name: "chain3", formula: "(x1 | x2) & (x1 ^ x3)", table: t(3, "00011010") },
        CatalogEntry { name: "and_or3", formula: "x1 & (x2 | x3)", table: t(3, "00000111") },
        CatalogEntry { name: "const0", formula: "0", table: t(3, "00000000") },
        CatalogEntry { name: "const1", formula: "1", table: t(3, "11111111") },
        CatalogEntry { name: "x1", formula: "x1", table: t(3, "00001111") },
        CatalogEntry { name: "x2", formula: "x2", table: t(3, "00110011") },
        CatalogEntry { name: "x3", formula: "x3", table: t(3, "01010101") },
    ]
}

/// Looks a function up by catalog name.
pub fn named_function(name: &str) -> Result<TruthTable, BoolFunError> {
    let entries = catalog();
    for e in &entries {
        if e.name == name {
            return Ok(e.table);
        }
    }
    let valid = entries
        .iter()
        .map(|e| e.name)
        .collect::<Vec<_>>()
        .join(", ");
    Err(BoolFunError::UnknownName {
        name: name.to_string(),
        valid,
    })
}

/// Map from canonical table to a human label, covering the classes that a
/// catalog function, constant or dictator of the given arity lands in.
/// Canonicalizes each named table once.
pub fn class_labels(n: usize) -> std::collections::BTreeMap<TruthTable, String> {
    let mut named: Vec<(String, TruthTable)> = Vec::new();
    for e in catalog() {
        if e.table.vars() == n {
            named.push((format!("{} ({})", e.name, e.formula), e.table));
        }
    }
    // Low-arity catalog entries also exist at higher arity with unused
    // variables; give those classes a readable label too.
    for e in catalog() {
        if e.table.vars() < n {
            let src = e.table;
            let lifted =
                TruthTable::from_fn(n, |x| src.eval(&x[..src.vars()])).expect("n validated");
            named.push((
                format!("{} ({}), lifted to {} vars", e.name, e.formula, n),
                lifted,
            ));
        }
    }
    if n > 1 {
        named.push((
            "const0 (0)".to_string(),
            TruthTable::from_fn(n, |_| false).expect("n validated"),
        ));
        named.push((
            "x1 (x1)".to_string(),
            TruthTable::from_fn(n, |x| x[0]).expect("n validated"),
        ));
    }
    let mut labels = std::collections::BTreeMap::new();
    for (label, table) in named {
        labels.entry(npn_canonical(&table)).or_insert(label);
    }
    labels
}

/// Label for a single canonical class. Prefer [`class_labels`] when looking
/// up more than one class.
pub fn class_label(n: usize, canonical: &TruthTable) -> Option<String> {
    class_labels(n).remove(canonical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_text_round_trip() {
        let and2: TruthTable = "0001".parse().unwrap();
        assert_eq!(and2.vars(), 2);
        assert!(and2.eval(&[true, true]));
        assert!(!and2.eval(&[true, false]));
        assert_eq!(and2.table_text(), "0001");
        assert!("001".parse::<TruthTable>().is_err());
        assert!("00x1".parse::<TruthTable>().is_err());
    }

    #[test]
    fn apply_transform_examples() {
        let and2 = named_function("and2").unwrap();
        let id = NpnTransform::identity(2);
        assert_eq!(apply_transform(&and2, &id).unwrap(), and2);

        let negate_out = NpnTransform::new(vec![0, 1], 0, true).unwrap();
        let nand = apply_transform(&and2, &negate_out).unwrap();
        assert_eq!(nand.table_text(), "1110");

        let swap = NpnTransform::new(vec![1, 0], 0, false).unwrap();
        assert_eq!(apply_transform(&and2, &swap).unwrap(), and2);

        let wrong = NpnTransform::identity(3);
        assert!(apply_transform(&and2, &wrong).is_err());
    }

    #[test]
    fn transform_validation() {
        assert!(NpnTransform::new(vec![0, 0], 0, false).is_err());
        assert!(NpnTransform::new(vec![2, 0], 0, false).is_err());
    }

    #[test]
    fn canonical_merges_complement_pairs() {
        let xor3 = named_function("xor3").unwrap();
        assert_eq!(npn_canonical(&xor3), npn_canonical(&xor3.complement()));
        let c0 = named_function("const0").unwrap();
        let c1 = named_function("const1").unwrap();
        assert_eq!(npn_canonical(&c0), npn_canonical(&c1));
    }

    #[test]
    fn class_counts_small() {
        assert_eq!(npn_classes(1).unwrap().len(), 2);
        assert_eq!(npn_classes(2).unwrap().len(), 4);
        assert_eq!(npn_classes(3).unwrap().len(), 14);
        assert!(npn_classes(0).is_err());
        assert!(npn_classes(5).is_err());
    }

    #[test]
    #[ignore = "enumerates all 65536 four-variable functions, slow in CI"]
    fn class_count_four_vars() {
        assert_eq!(npn_classes(4).unwrap().len(), 222);
    }

    #[test]
    fn classes_partition_all_functions() {
        let classes = npn_classes(2).unwrap();
        for raw in 0..16u16 {
            let f = TruthTable::new(2, raw).unwrap();
            let canon = npn_canonical(&f);
            assert_eq!(classes.iter().filter(|c| **c == canon).count(), 1);
        }
    }

    #[test]
    fn catalog_formulas_match_tables() {
        // Oracle: evaluate each formula directly per assignment.
        let cases: Vec<(&str, fn(&[bool]) -> bool)> = vec![
            ("and2", |x| x[0] & x[1]),
            ("xor2", |x| x[0] ^ x[1]),
            ("and3", |x| x[0] & x[1] & x[2]),
            ("xor3", |x| x[0] ^ x[1] ^ x[2]),
            ("eq3", |x| x[0] == x[1] && x[1] == x[2]),
            ("maj3", |x| {
                (x[0] as u8 + x[1] as u8 + x[2] as u8) >= 2
            }),
            ("one3", |x| (x[0] as u8 + x[1] as u8 + x[2] as u8) == 1),
            ("xorand3", |x| x[0] ^ (x[1] & x[2])),
            ("mux3", |x| (x[0] & x[1]) | (!x[0] & x[2])),
            ("andxor3", |x| x[0] & (x[1] ^ x[2])),
            ("chain3", |x| (x[0] | x[1]) & (x[0] ^ x[2])),
            ("and_or3", |x| x[0] & (x[1] | x[2])),
        ];
        for (name, f) in cases {
            let table = named_function(name).unwrap();
            let expected = TruthTable::from_fn(table.vars(), f).unwrap();
            assert_eq!(table, expected, "catalog entry {name}");
        }
    }

    #[test]
    fn eq3_has_ones_at_constant_assignments() {
        let eq3 = named_function("eq3").unwrap();
        for i in 0..8 {
            assert_eq!(eq3.eval_index(i), i == 0 || i == 7);
        }
    }

    #[test]
    fn unknown_name_lists_catalog() {
        let err = named_function("nope").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("eq3") && msg.contains("and2"));
    }

    #[test]
    fn three_var_representatives_are_pairwise_inequivalent() {
        let names = [
            "and3", "xor3", "eq3", "maj3", "one3", "xorand3", "mux3", "andxor3", "chain3",
            "and_or3",
        ];
        let canons: Vec<TruthTable> = names
            .iter()
            .map(|n| npn_canonical(&named_function(n).unwrap()))
            .collect();
        for i in 0..canons.len() {
            for j in (i + 1)..canons.len() {
                assert_ne!(canons[i], canons[j], "{} vs {}", names[i], names[j]);
            }
        }
    }

    fn arb_transform(n: usize) -> impl Strategy<Value = NpnTransform> {
        (0usize..24, 0u8..(1 << n), any::<bool>()).prop_map(move |(p, neg, out)| {
            let perms = permutations_lex(n);
            NpnTransform::new(perms[p % perms.len()].clone(), neg, out).unwrap()
        })
    }

    proptest! {
        #[test]
        fn canonical_is_transform_invariant(bits in 0u16..=255, t in arb_transform(3)) {
            let f = TruthTable::new(3, bits).unwrap();
            let g = apply_transform(&f, &t).unwrap();
            prop_assert_eq!(npn_canonical(&f), npn_canonical(&g));
        }

        #[test]
        fn transforms_compose(bits in 0u16..=255, a in arb_transform(3), b in arb_transform(3)) {
            let f = TruthTable::new(3, bits).unwrap();
            let step = apply_transform(&apply_transform(&f, &a).unwrap(), &b).unwrap();
            let fused = apply_transform(&f, &a.then(&b)).unwrap();
            prop_assert_eq!(step, fused);
        }

        #[test]
        fn inverse_recovers_identity(bits in 0u16..=255, p in 0usize..6, neg in 0u8..8, out in any::<bool>()) {
            let perms = permutations_lex(3);
            let perm = perms[p].clone();
            let t = NpnTransform::new(perm.clone(), neg, out).unwrap();
            // Build the inverse by hand.
            let mut inv_perm = vec![0usize; 3];
            for (j, &pj) in perm.iter().enumerate() {
                inv_perm[pj] = j;
            }
            let mut inv_neg = 0u8;
            for j in 0..3 {
                inv_neg |= ((neg >> inv_perm[j]) & 1) << j;
            }
            let inv = NpnTransform::new(inv_perm, inv_neg, out).unwrap();
            let f = TruthTable::new(3, bits).unwrap();
            let round = apply_transform(&apply_transform(&f, &t).unwrap(), &inv).unwrap();
            prop_assert_eq!(round, f);
        }
    }
}
