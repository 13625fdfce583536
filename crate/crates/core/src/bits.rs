//! Variables, tuples and question objects over at most [`MAX_ARITY`] Boolean
//! variables, plus the lattice moves the learners use.
//!
//! Variable `x_{i+1}` is stored as bit `i`. Bitstrings are written with `x_1`
//! as the leftmost character, so `"100110"` has `x1`, `x4` and `x5` true.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::QhornError;

/// Largest supported number of variables.
pub const MAX_ARITY: usize = 20;

pub(crate) fn check_arity(n: usize) -> Result<(), QhornError> {
    if (1..=MAX_ARITY).contains(&n) {
        Ok(())
    } else {
        Err(QhornError::ArityOutOfRange(n))
    }
}

fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Zero-based variable index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u8);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// From 1-based numbering (`x1` is `VarId(0)`).
    pub fn from_one_based(i: usize) -> Option<VarId> {
        if (1..=MAX_ARITY).contains(&i) {
            Some(VarId((i - 1) as u8))
        } else {
            None
        }
    }

    pub fn one_based(self) -> usize {
        self.0 as usize + 1
    }

    fn bit(self) -> u32 {
        1 << self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.one_based())
    }
}

/// A set of variables as a bitmask. Iterates in ascending index order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(u32);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn from_bits(bits: u32) -> VarSet {
        VarSet(bits)
    }

    pub fn full(n: usize) -> VarSet {
        VarSet(full_mask(n))
    }

    pub fn singleton(v: VarId) -> VarSet {
        VarSet(v.bit())
    }

    /// Builds a set from 1-based variable numbers, e.g. `[1, 4, 5]`.
    pub fn from_one_based(vars: &[usize]) -> VarSet {
        vars.iter()
            .map(|&i| VarId::from_one_based(i).expect("variable number in 1..=20"))
            .collect()
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: VarId) -> bool {
        self.0 & v.bit() != 0
    }

    pub fn insert(&mut self, v: VarId) {
        self.0 |= v.bit();
    }

    pub fn remove(&mut self, v: VarId) {
        self.0 &= !v.bit();
    }

    pub fn with(self, v: VarId) -> VarSet {
        VarSet(self.0 | v.bit())
    }

    pub fn without(self, v: VarId) -> VarSet {
        VarSet(self.0 & !v.bit())
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset(self, other: VarSet) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    /// True when every member is below `n`.
    pub fn within(self, n: usize) -> bool {
        self.0 & !full_mask(n) == 0
    }

    pub fn first(self) -> Option<VarId> {
        (self.0 != 0).then(|| VarId(self.0.trailing_zeros() as u8))
    }

    pub fn iter(self) -> impl Iterator<Item = VarId> + Clone {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            Some(VarId(i as u8))
        })
    }

    /// Splits into the lower-indexed `k` members and the rest.
    pub fn split_at(self, k: usize) -> (VarSet, VarSet) {
        let low: VarSet = self.iter().take(k).collect();
        (low, self.difference(low))
    }

    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(VarId::one_based).collect()
    }
}

impl FromIterator<VarId> for VarSet {
    fn from_iter<I: IntoIterator<Item = VarId>>(iter: I) -> Self {
        VarSet(iter.into_iter().fold(0, |acc, v| acc | v.bit()))
    }
}

impl fmt::Display for VarSet {
    /// Shorthand form, `x1x4x5`; the empty set prints as `T`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("T");
        }
        for v in self.iter() {
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// One Boolean tuple: a truth assignment to `n` variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tuple {
    bits: u32,
    n: u8,
}

impl Tuple {
    pub fn new(n: usize, true_vars: VarSet) -> Result<Tuple, QhornError> {
        check_arity(n)?;
        if !true_vars.within(n) {
            return Err(QhornError::VarOutOfRange { set: true_vars.to_one_based(), n });
        }
        Ok(Tuple { bits: true_vars.bits(), n: n as u8 })
    }

    pub(crate) fn from_set_unchecked(n: usize, true_vars: VarSet) -> Tuple {
        debug_assert!(true_vars.within(n));
        Tuple { bits: true_vars.bits(), n: n as u8 }
    }

    /// The tuple `1^n`.
    pub fn all_true(n: usize) -> Result<Tuple, QhornError> {
        check_arity(n)?;
        Ok(Tuple { bits: full_mask(n), n: n as u8 })
    }

    pub fn arity(self) -> usize {
        self.n as usize
    }

    pub fn true_set(self) -> VarSet {
        VarSet(self.bits)
    }

    pub fn false_set(self) -> VarSet {
        VarSet::full(self.arity()).difference(self.true_set())
    }

    pub fn is_true(self, v: VarId) -> bool {
        self.true_set().contains(v)
    }

    pub fn is_all_true(self) -> bool {
        self.bits == full_mask(self.arity())
    }

    /// Clears every variable in `vars`.
    pub fn with_false(self, vars: VarSet) -> Result<Tuple, QhornError> {
        if !vars.within(self.arity()) {
            return Err(QhornError::VarOutOfRange { set: vars.to_one_based(), n: self.arity() });
        }
        Ok(Tuple { bits: self.bits & !vars.bits(), n: self.n })
    }

    pub(crate) fn cleared(self, vars: VarSet) -> Tuple {
        Tuple { bits: self.bits & !vars.bits(), n: self.n }
    }

    /// Lattice children: one per true variable in `allowed`, with that
    /// variable cleared, ordered by ascending variable index.
    pub fn children(self, allowed: VarSet) -> Vec<Tuple> {
        self.true_set()
            .intersection(allowed)
            .iter()
            .map(|v| Tuple { bits: self.bits & !v.bit(), n: self.n })
            .collect()
    }

    /// `self` is in the upset of `other` (every true bit of `other` is true here).
    pub fn dominates(self, other: Tuple) -> Result<bool, QhornError> {
        if self.n != other.n {
            return Err(QhornError::ArityMismatch { expected: self.arity(), found: other.arity() });
        }
        Ok(self.covers(other))
    }

    pub(crate) fn covers(self, other: Tuple) -> bool {
        other.bits & !self.bits == 0
    }

    /// Comparison key matching lexicographic bitstring order.
    fn lex_key(self) -> u32 {
        self.bits.reverse_bits() >> (32 - self.n as u32)
    }
}

impl Ord for Tuple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.lex_key().cmp(&other.lex_key()))
    }
}

impl PartialOrd for Tuple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.bits & (1 << i) != 0 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Tuple {
    type Err = QhornError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = s.chars().count();
        if !(1..=MAX_ARITY).contains(&n) {
            return Err(QhornError::InvalidTuple(s.to_string()));
        }
        let mut bits = 0u32;
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1 << i,
                '0' => {}
                _ => return Err(QhornError::InvalidTuple(s.to_string())),
            }
        }
        Ok(Tuple { bits, n: n as u8 })
    }
}

pub fn parse_tuple(s: &str) -> Result<Tuple, QhornError> {
    s.parse()
}

pub fn format_tuple(t: Tuple) -> String {
    t.to_string()
}

impl Serialize for Tuple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tuple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A membership question: a deduplicated, canonically ordered set of tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Question {
    n: u8,
    tuples: BTreeSet<Tuple>,
}

impl Question {
    pub fn empty(n: usize) -> Result<Question, QhornError> {
        check_arity(n)?;
        Ok(Question { n: n as u8, tuples: BTreeSet::new() })
    }

    pub fn new<I: IntoIterator<Item = Tuple>>(n: usize, tuples: I) -> Result<Question, QhornError> {
        let mut q = Question::empty(n)?;
        for t in tuples {
            q.insert(t)?;
        }
        Ok(q)
    }

    pub(crate) fn from_tuples_unchecked<I: IntoIterator<Item = Tuple>>(n: usize, tuples: I) -> Question {
        Question { n: n as u8, tuples: tuples.into_iter().collect() }
    }

    /// Parses bitstrings; arity is taken from the first one.
    pub fn parse<S: AsRef<str>>(tuples: &[S]) -> Result<Question, QhornError> {
        let parsed = tuples.iter().map(|s| s.as_ref().parse()).collect::<Result<Vec<Tuple>, _>>()?;
        let n = parsed.first().map(|t| t.arity()).ok_or(QhornError::EmptyQuestion)?;
        Question::new(n, parsed)
    }

    pub fn insert(&mut self, t: Tuple) -> Result<(), QhornError> {
        if t.arity() != self.arity() {
            return Err(QhornError::ArityMismatch { expected: self.arity(), found: t.arity() });
        }
        self.tuples.insert(t);
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.n as usize
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: Tuple) -> bool {
        self.tuples.contains(&t)
    }

    pub fn iter(&self) -> impl Iterator<Item = Tuple> + Clone + '_ {
        self.tuples.iter().copied()
    }

    pub fn tuples(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.iter().map(|t| t.to_string()).collect()
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}

#[derive(Serialize, Deserialize)]
struct QuestionJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    tuples: Vec<Tuple>,
}

impl Serialize for Question {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        QuestionJson { n: self.tuples.is_empty().then_some(self.arity()), tuples: self.tuples.iter().copied().collect() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Question {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = QuestionJson::deserialize(deserializer)?;
        let n = match (raw.n, raw.tuples.first()) {
            (Some(n), _) => n,
            (None, Some(t)) => t.arity(),
            (None, None) => return Err(serde::de::Error::custom("empty question needs an explicit \"n\"")),
        };
        Question::new(n, raw.tuples).map_err(serde::de::Error::custom)
    }
}
