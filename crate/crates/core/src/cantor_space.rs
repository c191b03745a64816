//! Clopen subsets of the binary Cantor set `{0,1}^∞` and eventually periodic points.
//!
//! Every clopen set is a finite union of cylinders `[w]`, so it is stored as a
//! canonical antichain of words: no word is a prefix of another, sibling pairs
//! `w0, w1` are merged into `w`, and the words are sorted. Two clopen sets are
//! equal exactly when their canonical word lists are equal.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors from parsing or refining Cantor-space values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CantorError {
    #[error("invalid symbol {0:?}: words are over the alphabet {{0,1}}")]
    InvalidSymbol(char),
    #[error("malformed point {0:?}: expected pre(per), e.g. 01(10)")]
    MalformedPoint(String),
    #[error("a point needs a nonempty period")]
    EmptyPeriod,
    #[error("malformed clopen set {0:?}: expected {{w1,w2,...}}")]
    MalformedSet(String),
    #[error("depth {depth} is smaller than the longest word ({longest})")]
    DepthTooSmall { depth: usize, longest: usize },
}

/// A finite binary word. The empty word names the whole space.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from symbols; anything nonzero counts as `1`.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        Word(bits.into_iter().map(|b| u8::from(b != 0)).collect())
    }

    /// The little-endian binary digits of `value`, padded to `len` symbols.
    pub fn from_int(value: u64, len: usize) -> Self {
        Word((0..len).map(|i| ((value >> i) & 1) as u8).collect())
    }

    /// Reads the word as a little-endian binary integer.
    pub fn to_int(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Whether one of the two words is a prefix of the other, i.e. the
    /// cylinders intersect.
    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Word(bits)
    }

    pub fn child(&self, bit: u8) -> Word {
        let mut bits = self.0.clone();
        bits.push(u8::from(bit != 0));
        Word(bits)
    }

    pub fn parent(&self) -> Option<Word> {
        let (_, rest) = self.0.split_last()?;
        Some(Word(rest.to_vec()))
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// The word with its final symbol flipped.
    pub fn sibling(&self) -> Option<Word> {
        let mut bits = self.0.clone();
        let last = bits.last_mut()?;
        *last ^= 1;
        Some(Word(bits))
    }

    /// The part of `self` after `prefix`, if `prefix` is a prefix.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|s| Word(s.to_vec()))
    }

    pub fn truncate(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    /// All `2^len` words of length `len`, in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = Word> {
        (0..1u64 << len).map(move |i| {
            // most significant bit first so that iteration order is lexicographic
            Word((0..len).map(|j| ((i >> (len - 1 - j)) & 1) as u8).collect())
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = CantorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(CantorError::InvalidSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// An eventually periodic sequence `pre · per · per · …` in canonical form:
/// the period is primitive and the preperiod is as short as possible.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pre: Word,
    per: Word,
}

impl Point {
    pub fn new(pre: Word, per: Word) -> Result<Self, CantorError> {
        if per.is_empty() {
            return Err(CantorError::EmptyPeriod);
        }
        Ok(Self::canonical(pre.0, per.0))
    }

    /// `0^∞`
    pub fn min() -> Self {
        Point { pre: Word::empty(), per: Word(vec![0]) }
    }

    /// `1^∞`
    pub fn max() -> Self {
        Point { pre: Word::empty(), per: Word(vec![1]) }
    }

    /// `w · 0^∞`, the leftmost point of the cylinder `[w]`.
    pub fn left_of(w: &Word) -> Self {
        Self::canonical(w.0.clone(), vec![0])
    }

    /// `w · 1^∞`, the rightmost point of the cylinder `[w]`.
    pub fn right_of(w: &Word) -> Self {
        Self::canonical(w.0.clone(), vec![1])
    }

    fn canonical(mut pre: Vec<u8>, mut per: Vec<u8>) -> Self {
        let n = per.len();
        if let Some(p) = (1..=n).find(|&p| n.is_multiple_of(p) && (p..n).all(|i| per[i] == per[i - p])) {
            per.truncate(p);
        }
        while let (Some(&a), Some(&b)) = (pre.last(), per.last()) {
            if a != b {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Point { pre: Word(pre), per: Word(per) }
    }

    pub fn preperiod(&self) -> &Word {
        &self.pre
    }

    pub fn period(&self) -> &Word {
        &self.per
    }

    /// `|pre| + |per|` of the canonical form.
    pub fn description_len(&self) -> usize {
        self.pre.len() + self.per.len()
    }

    pub fn bit(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre.0[i]
        } else {
            self.per.0[(i - self.pre.len()) % self.per.len()]
        }
    }

    /// The first `n` symbols.
    pub fn prefix(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.bit(i)).collect())
    }

    pub fn has_prefix(&self, w: &Word) -> bool {
        w.0.iter().enumerate().all(|(i, &b)| self.bit(i) == b)
    }

    /// The shifted sequence with the first `k` symbols removed.
    pub fn drop_prefix(&self, k: usize) -> Point {
        if k <= self.pre.len() {
            return Self::canonical(self.pre.0[k..].to_vec(), self.per.0.clone());
        }
        let mut per = self.per.0.clone();
        let shift = (k - self.pre.len()) % per.len();
        per.rotate_left(shift);
        Self::canonical(Vec::new(), per)
    }

    /// `w · self`
    pub fn prepend(&self, w: &Word) -> Point {
        let mut pre = w.0.clone();
        pre.extend_from_slice(&self.pre.0);
        Self::canonical(pre, self.per.0.clone())
    }

    /// Replaces the prefix `from` (which must be a prefix of `self`) with `to`.
    pub fn replace_prefix(&self, from: &Word, to: &Word) -> Option<Point> {
        self.has_prefix(from).then(|| self.drop_prefix(from.len()).prepend(to))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pre = if self.pre.is_empty() { String::new() } else { self.pre.to_string() };
        write!(f, "{}({})", pre, self.per)
    }
}

impl FromStr for Point {
    type Err = CantorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let malformed = || CantorError::MalformedPoint(s.to_string());
        let open = s.find('(').ok_or_else(malformed)?;
        let body = s[open + 1..].strip_suffix(')').ok_or_else(malformed)?;
        let pre: Word = if open == 0 { Word::empty() } else { s[..open].parse()? };
        if body.is_empty() {
            return Err(CantorError::EmptyPeriod);
        }
        Point::new(pre, body.parse()?)
    }
}

/// A clopen subset of the Cantor set as a canonical antichain of cylinders.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClopenSet {
    words: Vec<Word>,
}

impl ClopenSet {
    pub fn empty() -> Self {
        ClopenSet { words: Vec::new() }
    }

    pub fn full() -> Self {
        ClopenSet { words: vec![Word::empty()] }
    }

    pub fn cylinder(w: Word) -> Self {
        ClopenSet { words: vec![w] }
    }

    /// Canonicalizes an arbitrary finite family of cylinders. Idempotent and
    /// union-preserving.
    pub fn normalize<I: IntoIterator<Item = Word>>(words: I) -> Self {
        let mut set: BTreeSet<Word> = words.into_iter().collect();
        // absorption: in sorted order a prefix precedes all its extensions
        let mut kept: Vec<Word> = Vec::with_capacity(set.len());
        for w in std::mem::take(&mut set) {
            if kept.last().is_some_and(|k: &Word| k.is_prefix_of(&w)) {
                continue;
            }
            kept.push(w);
        }
        let mut set: BTreeSet<Word> = kept.into_iter().collect();
        // sibling merge, deepest words first
        let mut pending: Vec<Word> = set.iter().cloned().collect();
        pending.sort_by_key(|w| w.len());
        while let Some(w) = pending.pop() {
            if !set.contains(&w) {
                continue;
            }
            let Some(sib) = w.sibling() else { continue };
            if set.contains(&sib) {
                set.remove(&w);
                set.remove(&sib);
                let parent = w.parent().expect("nonempty word");
                set.insert(parent.clone());
                pending.push(parent);
            }
        }
        ClopenSet { words: set.into_iter().collect() }
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.words.len() == 1 && self.words[0].is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        ClopenSet::normalize(self.words.iter().chain(&other.words).cloned())
    }

    pub fn intersect(&self, other: &ClopenSet) -> ClopenSet {
        let mut out = Vec::new();
        for a in &self.words {
            for b in &other.words {
                if a.is_prefix_of(b) {
                    out.push(b.clone());
                } else if b.is_prefix_of(a) {
                    out.push(a.clone());
                }
            }
        }
        ClopenSet::normalize(out)
    }

    pub fn complement(&self) -> ClopenSet {
        // walk the binary tree; a node is either inside a word, disjoint from
        // all words, or has words strictly below it
        fn walk(node: Word, words: &[Word], out: &mut Vec<Word>) {
            let below: Vec<Word> = words.iter().filter(|w| node.comparable(w)).cloned().collect();
            if below.is_empty() {
                out.push(node);
            } else if below.iter().any(|w| w.is_prefix_of(&node)) {
                // covered
            } else {
                walk(node.child(0), &below, out);
                walk(node.child(1), &below, out);
            }
        }
        let mut out = Vec::new();
        walk(Word::empty(), &self.words, &mut out);
        ClopenSet::normalize(out)
    }

    pub fn difference(&self, other: &ClopenSet) -> ClopenSet {
        self.intersect(&other.complement())
    }

    pub fn is_subset(&self, other: &ClopenSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn intersects(&self, other: &ClopenSet) -> bool {
        self.words.iter().any(|a| other.words.iter().any(|b| a.comparable(b)))
    }

    pub fn contains_word(&self, w: &Word) -> bool {
        self.words.iter().any(|u| u.is_prefix_of(w))
    }

    pub fn contains_point(&self, x: &Point) -> bool {
        let unrolled = x.prefix(self.max_len());
        self.contains_word(&unrolled)
    }

    /// All depth-`d` words whose cylinders lie inside the set.
    pub fn refine_to_depth(&self, d: usize) -> Result<Vec<Word>, CantorError> {
        let longest = self.max_len();
        if d < longest && !self.is_empty() {
            return Err(CantorError::DepthTooSmall { depth: d, longest });
        }
        let mut out = Vec::new();
        for w in &self.words {
            for tail in Word::all_of_length(d - w.len()) {
                out.push(w.concat(&tail));
            }
        }
        out.sort();
        Ok(out)
    }
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for ClopenSet {
    type Err = CantorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let body = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| CantorError::MalformedSet(s.to_string()))?;
        if body.trim().is_empty() {
            return Ok(ClopenSet::empty());
        }
        let words = body
            .split(',')
            .map(|w| w.trim().parse())
            .collect::<Result<Vec<Word>, _>>()?;
        Ok(ClopenSet::normalize(words))
    }
}

macro_rules! text_serde {
    ($ty:ty) => {
        impl serde::Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> serde::Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = <std::borrow::Cow<'de, str>>::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

text_serde!(Word);
text_serde!(Point);
text_serde!(ClopenSet);
