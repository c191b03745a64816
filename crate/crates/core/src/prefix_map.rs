//! Partial homeomorphisms of the Cantor set given by prefix-rewrite rules.
//!
//! A rule `u -> v` sends `u·w` to `v·w` for every infinite tail `w`. A family of
//! rules whose sources and targets are both antichains is an injective open map
//! with clopen domain and clopen range; [`PrefixMap`] stores such a family in a
//! canonical form (sibling rules `u0 -> v0, u1 -> v1` merged into `u -> v`), so
//! two maps are equal exactly when they agree as partial functions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cantor_space::{CantorError, ClopenSet, Point, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("sources {0} and {1} overlap (one is a prefix of the other)")]
    SourcesOverlap(Word, Word),
    #[error("targets {0} and {1} overlap (one is a prefix of the other)")]
    TargetsOverlap(Word, Word),
    #[error("point {0} is not in the domain of the map")]
    NotInDomain(Point),
    #[error("malformed rule {0:?}: expected u->v")]
    MalformedRule(String),
    #[error(transparent)]
    Cantor(#[from] CantorError),
}

/// `source·w ↦ target·w`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrefixRule {
    pub source: Word,
    pub target: Word,
}

impl PrefixRule {
    pub fn new(source: Word, target: Word) -> Self {
        PrefixRule { source, target }
    }
}

impl fmt::Display for PrefixRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

impl FromStr for PrefixRule {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (u, v) = s.split_once("->").ok_or_else(|| MapError::MalformedRule(s.to_string()))?;
        Ok(PrefixRule::new(u.trim().parse()?, v.trim().parse()?))
    }
}

/// Checks that sources and targets each form an antichain. The error names the
/// first offending pair in rule order.
pub fn validate(rules: &[PrefixRule]) -> Result<(), MapError> {
    for (i, a) in rules.iter().enumerate() {
        for b in &rules[i + 1..] {
            if a.source.comparable(&b.source) {
                return Err(MapError::SourcesOverlap(a.source.clone(), b.source.clone()));
            }
        }
    }
    for (i, a) in rules.iter().enumerate() {
        for b in &rules[i + 1..] {
            if a.target.comparable(&b.target) {
                return Err(MapError::TargetsOverlap(a.target.clone(), b.target.clone()));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PrefixMap {
    // source -> target, canonical
    rules: BTreeMap<Word, Word>,
}

impl PrefixMap {
    pub fn new(rules: Vec<PrefixRule>) -> Result<Self, MapError> {
        validate(&rules)?;
        Ok(Self::from_valid(rules.into_iter().map(|r| (r.source, r.target))))
    }

    /// The map `{ε -> ε}`.
    pub fn identity() -> Self {
        Self::identity_on(&ClopenSet::full())
    }

    /// The identity restricted to a clopen set.
    pub fn identity_on(set: &ClopenSet) -> Self {
        PrefixMap { rules: set.words().iter().map(|w| (w.clone(), w.clone())).collect() }
    }

    pub fn empty() -> Self {
        PrefixMap::default()
    }

    fn from_valid<I: IntoIterator<Item = (Word, Word)>>(pairs: I) -> Self {
        let mut rules: BTreeMap<Word, Word> = pairs.into_iter().collect();
        let mut pending: Vec<Word> = rules.keys().cloned().collect();
        pending.sort_by_key(Word::len);
        while let Some(src) = pending.pop() {
            let Some(tgt) = rules.get(&src) else { continue };
            let (Some(sib), Some(bit)) = (src.sibling(), src.last()) else { continue };
            let Some(sib_tgt) = rules.get(&sib) else { continue };
            // u0 -> v0 and u1 -> v1 merge into u -> v
            if tgt.last() == Some(bit)
                && tgt.sibling().as_ref() == Some(sib_tgt)
            {
                let parent_tgt = tgt.parent().expect("nonempty target");
                rules.remove(&src);
                rules.remove(&sib);
                let parent = src.parent().expect("nonempty source");
                rules.insert(parent.clone(), parent_tgt);
                pending.push(parent);
            }
        }
        PrefixMap { rules }
    }

    pub fn rules(&self) -> impl Iterator<Item = PrefixRule> + '_ {
        self.rules.iter().map(|(s, t)| PrefixRule::new(s.clone(), t.clone()))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn domain(&self) -> ClopenSet {
        ClopenSet::normalize(self.rules.keys().cloned())
    }

    pub fn range(&self) -> ClopenSet {
        ClopenSet::normalize(self.rules.values().cloned())
    }

    /// Whether every rule keeps word length.
    pub fn is_length_preserving(&self) -> bool {
        self.rules.iter().all(|(s, t)| s.len() == t.len())
    }

    fn rule_for_point(&self, x: &Point) -> Option<(&Word, &Word)> {
        self.rules.iter().find(|(s, _)| x.has_prefix(s))
    }

    pub fn apply_point(&self, x: &Point) -> Result<Point, MapError> {
        let (s, t) = self.rule_for_point(x).ok_or_else(|| MapError::NotInDomain(x.clone()))?;
        Ok(x.replace_prefix(s, t).expect("rule source is a prefix"))
    }

    pub fn contains_point(&self, x: &Point) -> bool {
        self.rule_for_point(x).is_some()
    }

    /// The image of `[w]` when `[w]` sits inside a single rule cylinder.
    pub fn cell_image(&self, w: &Word) -> Option<Word> {
        self.rules
            .iter()
            .find(|(s, _)| s.is_prefix_of(w))
            .map(|(s, t)| t.concat(&w.strip_prefix(s).expect("prefix")))
    }

    /// `m(s ∩ dom m)`
    pub fn image_set(&self, s: &ClopenSet) -> ClopenSet {
        Self::push(self.rules.iter(), s)
    }

    /// `m⁻¹(s)`
    pub fn preimage_set(&self, s: &ClopenSet) -> ClopenSet {
        Self::push(self.rules.iter().map(|(a, b)| (b, a)), s)
    }

    fn push<'a, I: Iterator<Item = (&'a Word, &'a Word)>>(rules: I, s: &ClopenSet) -> ClopenSet {
        let mut out = Vec::new();
        for (u, v) in rules {
            for w in s.words() {
                if let Some(z) = w.strip_prefix(u) {
                    out.push(v.concat(&z));
                } else if w.is_prefix_of(u) {
                    out.push(v.clone());
                }
            }
        }
        ClopenSet::normalize(out)
    }

    /// `self ∘ first`
    pub fn compose(&self, first: &PrefixMap) -> PrefixMap {
        let mut out = Vec::new();
        for (u, v) in &first.rules {
            for (p, q) in &self.rules {
                if let Some(z) = p.strip_prefix(v) {
                    out.push((u.concat(&z), q.clone()));
                } else if let Some(z) = v.strip_prefix(p) {
                    out.push((u.clone(), q.concat(&z)));
                }
            }
        }
        PrefixMap::from_valid(out)
    }

    pub fn inverse(&self) -> PrefixMap {
        PrefixMap::from_valid(self.rules.iter().map(|(s, t)| (t.clone(), s.clone())))
    }

    /// `m^n`; negative powers iterate the inverse and `m^0` is the identity on X.
    pub fn power(&self, n: i64) -> PrefixMap {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = PrefixMap::identity();
        for _ in 0..n.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    pub fn restrict(&self, set: &ClopenSet) -> PrefixMap {
        self.compose(&PrefixMap::identity_on(set))
    }

    /// A point on which two maps disagree (including one being undefined), or
    /// `None` when they are equal as partial functions.
    pub fn disagreement(&self, other: &PrefixMap) -> Option<Point> {
        if self == other {
            return None;
        }
        let domain_gap = self.domain().difference(&other.domain()).union(&other.domain().difference(&self.domain()));
        if let Some(w) = domain_gap.words().first() {
            return Some(Point::left_of(w));
        }
        for (s, t) in &self.rules {
            for (s2, t2) in &other.rules {
                if !s.comparable(s2) {
                    continue;
                }
                let cell = if s.len() >= s2.len() { s } else { s2 };
                for x in [Point::left_of(cell), Point::right_of(cell)] {
                    let a = x.replace_prefix(s, t);
                    let b = x.replace_prefix(s2, t2);
                    if a != b {
                        return Some(x);
                    }
                }
            }
        }
        None
    }
}

impl fmt::Display for PrefixMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (s, t)) in self.rules.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}->{t}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for PrefixMap {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let body = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| MapError::MalformedRule(s.to_string()))?;
        if body.trim().is_empty() {
            return Ok(PrefixMap::empty());
        }
        let rules = body.split(',').map(str::parse).collect::<Result<Vec<PrefixRule>, _>>()?;
        PrefixMap::new(rules)
    }
}

/// How the countable rule family of a [`GeneratedMap`] is produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratedKind {
    /// Add one with carry: `1^i0 -> 0^i1` for every `i ≥ 0`.
    Odometer,
    /// An explicit, finite enumeration.
    Explicit(Vec<PrefixRule>),
}

/// A partial homeomorphism with an open (possibly non-closed) domain, presented
/// by an enumeration of rules with pairwise disjoint sources and targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedMap {
    kind: GeneratedKind,
}

impl GeneratedMap {
    pub fn odometer() -> Self {
        GeneratedMap { kind: GeneratedKind::Odometer }
    }

    pub fn explicit(rules: Vec<PrefixRule>) -> Result<Self, MapError> {
        validate(&rules)?;
        Ok(GeneratedMap { kind: GeneratedKind::Explicit(rules) })
    }

    pub fn kind(&self) -> &GeneratedKind {
        &self.kind
    }

    /// Number of rules when the enumeration is finite.
    pub fn rule_count(&self) -> Option<usize> {
        match &self.kind {
            GeneratedKind::Odometer => None,
            GeneratedKind::Explicit(r) => Some(r.len()),
        }
    }

    pub fn rule(&self, i: usize) -> Option<PrefixRule> {
        match &self.kind {
            GeneratedKind::Odometer => {
                let mut src = vec![1u8; i];
                src.push(0);
                let mut tgt = vec![0u8; i];
                tgt.push(1);
                Some(PrefixRule::new(Word::from_bits(src), Word::from_bits(tgt)))
            }
            GeneratedKind::Explicit(r) => r.get(i).cloned(),
        }
    }

    /// Rules `0..=k`.
    pub fn truncation(&self, k: usize) -> PrefixMap {
        let rules = (0..=k).map_while(|i| self.rule(i)).map(|r| (r.source, r.target));
        PrefixMap::from_valid(rules)
    }

    /// `U_k`, the domain of the level-`k` truncation.
    pub fn exhaustion(&self, k: usize) -> ClopenSet {
        self.truncation(k).domain()
    }

    /// Applies the full map, searching at most `cap` rules.
    pub fn apply_point(&self, x: &Point, cap: usize) -> Option<Point> {
        (0..=cap)
            .map_while(|i| self.rule(i))
            .find(|r| x.has_prefix(&r.source))
            .map(|r| x.replace_prefix(&r.source, &r.target).expect("prefix"))
    }

    /// Applies the inverse of the full map, searching at most `cap` rules.
    pub fn apply_inverse_point(&self, x: &Point, cap: usize) -> Option<Point> {
        (0..=cap)
            .map_while(|i| self.rule(i))
            .find(|r| x.has_prefix(&r.target))
            .map(|r| x.replace_prefix(&r.target, &r.source).expect("prefix"))
    }

    /// Least rule index needed to apply the map (or its inverse) at `x`.
    pub fn rule_index(&self, x: &Point, inverse: bool, cap: usize) -> Option<usize> {
        (0..=cap).map_while(|i| self.rule(i).map(|r| (i, r))).find_map(|(i, r)| {
            let w = if inverse { &r.target } else { &r.source };
            x.has_prefix(w).then_some(i)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> PrefixMap {
        s.parse().unwrap()
    }

    fn p(s: &str) -> Point {
        s.parse().unwrap()
    }

    fn set(s: &str) -> ClopenSet {
        s.parse().unwrap()
    }

    fn rules(s: &[(&str, &str)]) -> Vec<PrefixRule> {
        s.iter().map(|(u, v)| PrefixRule::new(u.parse().unwrap(), v.parse().unwrap())).collect()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&rules(&[("0", "1")])).is_ok());
        assert!(matches!(
            validate(&rules(&[("0", "1"), ("00", "11")])),
            Err(MapError::SourcesOverlap(..))
        ));
        assert!(matches!(
            validate(&rules(&[("0", "1"), ("10", "1")])),
            Err(MapError::TargetsOverlap(..))
        ));
    }

    #[test]
    fn odometer_application() {
        let odo = GeneratedMap::odometer();
        let t1 = odo.truncation(1);
        assert_eq!(t1.apply_point(&p("01(0)")).unwrap(), p("11(0)"));
        let t2 = odo.truncation(2);
        assert_eq!(t2.apply_point(&p("110(0)")).unwrap(), p("001(0)"));
        assert!(matches!(t2.apply_point(&Point::max()), Err(MapError::NotInDomain(_))));
    }

    #[test]
    fn image_and_preimage() {
        let f = m("[0->1]");
        assert_eq!(f.image_set(&ClopenSet::full()), set("{1}"));
        assert_eq!(f.preimage_set(&set("{11}")), set("{01}"));
        assert!(f.image_set(&ClopenSet::empty()).is_empty());
    }

    #[test]
    fn compose_examples() {
        let f = m("[0->1]");
        assert!(f.compose(&f).is_empty());
        assert_eq!(PrefixMap::identity().compose(&f), f);
        assert_eq!(f.compose(&PrefixMap::identity()), f);
        let t1 = GeneratedMap::odometer().truncation(1);
        let twice = t1.compose(&t1);
        // add two: 0w -> 1w -> 01w... worked by hand: 00 -> 01 and 10 -> 11
        assert_eq!(twice, m("[00->01,10->11]"));
        for x in ["00(1)", "(01)", "10(0)", "1(0)", "0(1)"] {
            let x = p(x);
            let pointwise = t1.apply_point(&x).and_then(|y| t1.apply_point(&y));
            assert_eq!(pointwise.ok(), twice.apply_point(&x).ok(), "{x}");
        }
    }

    #[test]
    fn canonical_merge() {
        assert_eq!(m("[00->10,01->11]"), m("[0->1]"));
        // targets not siblings in the same order: no merge
        assert_eq!(m("[00->11,01->10]").len(), 2);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(m("[0->1]").inverse(), m("[1->0]"));
        let t3 = GeneratedMap::odometer().truncation(3);
        assert_eq!(t3.inverse(), m("[1->0,01->10,001->110,0001->1110]"));
        assert_eq!(t3.inverse().inverse(), t3);
    }

    #[test]
    fn power_examples() {
        let f = m("[0->1]");
        assert!(f.power(2).is_empty());
        assert_eq!(f.power(0), PrefixMap::identity());
        assert_eq!(f.power(-1), m("[1->0]"));
        let t1 = GeneratedMap::odometer().truncation(1);
        assert_eq!(t1.power(1).domain(), set("{0,10}"));
        assert_eq!(t1.power(2).domain(), set("{00,10}"));
    }

    #[test]
    fn truncations() {
        let odo = GeneratedMap::odometer();
        assert_eq!(odo.truncation(0), m("[0->1]"));
        assert_eq!(odo.truncation(1), m("[0->1,10->01]"));
        assert_eq!(odo.exhaustion(0), set("{0}"));
        assert_eq!(odo.exhaustion(1), set("{0,10}"));
        for k in 0..6 {
            assert!(odo.exhaustion(k).is_subset(&odo.exhaustion(k + 1)));
            assert_eq!(odo.exhaustion(k).complement(), ClopenSet::cylinder(Word::from_bits(vec![1; k + 1])));
        }
        let ex = GeneratedMap::explicit(rules(&[("00", "01"), ("10", "11")])).unwrap();
        assert_eq!(ex.truncation(0), m("[00->01]"));
        assert_eq!(ex.truncation(5), m("[00->01,10->11]"));
    }

    #[test]
    fn disagreement_witness() {
        let a = m("[0->1]");
        let b = m("[0->10]");
        let x = a.disagreement(&b).unwrap();
        assert_ne!(a.apply_point(&x).ok(), b.apply_point(&x).ok());
        assert!(a.disagreement(&a.clone()).is_none());
        let c = m("[00->1]");
        let y = a.disagreement(&c).unwrap();
        assert_ne!(a.apply_point(&y).ok(), c.apply_point(&y).ok());
    }

    #[test]
    fn generated_pointwise() {
        let odo = GeneratedMap::odometer();
        assert_eq!(odo.apply_point(&p("111(0)"), 64), Some(p("0001(0)")));
        assert_eq!(odo.apply_point(&Point::max(), 64), None);
        assert_eq!(odo.apply_inverse_point(&Point::min(), 64), None);
        assert_eq!(odo.rule_index(&p("110(0)"), false, 64), Some(2));
    }
}
