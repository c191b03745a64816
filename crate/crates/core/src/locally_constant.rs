//! Compactly supported locally constant functions on the Cantor set, with exact
//! scalar values.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::cantor_space::{ClopenSet, Point, Word};
use crate::prefix_map::PrefixMap;
use crate::scalar::Scalar;

/// A function constant on each cylinder of a finite antichain and zero
/// elsewhere. Canonical: values are nonzero and equal-valued sibling pieces are
/// merged, so structural equality is equality of functions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PiecewiseConstant {
    pieces: BTreeMap<Word, Scalar>,
}

/// A cell of the common refinement of two antichains with the values each
/// function takes there.
struct OverlayCell<'a> {
    word: Word,
    left: Option<&'a Scalar>,
    right: Option<&'a Scalar>,
}

fn has_strictly_below(map: &BTreeMap<Word, Scalar>, w: &Word) -> bool {
    map.range(w.clone()..)
        .take_while(|(k, _)| w.is_prefix_of(k))
        .any(|(k, _)| k.len() > w.len())
}

fn overlay<'a>(a: &'a BTreeMap<Word, Scalar>, b: &'a BTreeMap<Word, Scalar>) -> Vec<OverlayCell<'a>> {
    fn walk<'a>(
        node: Word,
        a: &'a BTreeMap<Word, Scalar>,
        b: &'a BTreeMap<Word, Scalar>,
        inherited_a: Option<&'a Scalar>,
        inherited_b: Option<&'a Scalar>,
        out: &mut Vec<OverlayCell<'a>>,
    ) {
        let va = a.get(&node).or(inherited_a);
        let vb = b.get(&node).or(inherited_b);
        let deeper_a = has_strictly_below(a, &node);
        let deeper_b = has_strictly_below(b, &node);
        if !deeper_a && !deeper_b {
            if va.is_some() || vb.is_some() {
                out.push(OverlayCell { word: node, left: va, right: vb });
            }
            return;
        }
        walk(node.child(0), a, b, va, vb, out);
        walk(node.child(1), a, b, va, vb, out);
    }
    let mut out = Vec::new();
    walk(Word::empty(), a, b, None, None, &mut out);
    out
}

impl PiecewiseConstant {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a function from pieces on an antichain. Zero values are dropped.
    ///
    /// # Panics
    /// If the words do not form an antichain.
    pub fn from_pieces<I: IntoIterator<Item = (Word, Scalar)>>(pieces: I) -> Self {
        let pieces: Vec<(Word, Scalar)> = pieces.into_iter().collect();
        for (i, (a, _)) in pieces.iter().enumerate() {
            for (b, _) in &pieces[i + 1..] {
                assert!(!a.comparable(b), "pieces {a} and {b} overlap");
            }
        }
        Self::canonical(pieces)
    }

    /// `c · 1_S`
    pub fn constant_on(set: &ClopenSet, c: Scalar) -> Self {
        Self::canonical(set.words().iter().map(|w| (w.clone(), c.clone())).collect())
    }

    pub fn indicator(set: &ClopenSet) -> Self {
        Self::constant_on(set, Scalar::one())
    }

    fn canonical(pieces: Vec<(Word, Scalar)>) -> Self {
        let mut map: BTreeMap<Word, Scalar> =
            pieces.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        let mut pending: Vec<Word> = map.keys().cloned().collect();
        pending.sort_by_key(Word::len);
        while let Some(w) = pending.pop() {
            let Some(sib) = w.sibling() else { continue };
            match (map.get(&w), map.get(&sib)) {
                (Some(a), Some(b)) if a == b => {
                    let v = a.clone();
                    map.remove(&w);
                    map.remove(&sib);
                    let parent = w.parent().expect("nonempty");
                    map.insert(parent.clone(), v);
                    pending.push(parent);
                }
                _ => {}
            }
        }
        PiecewiseConstant { pieces: map }
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.pieces.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn support(&self) -> ClopenSet {
        ClopenSet::normalize(self.pieces.keys().cloned())
    }

    pub fn max_len(&self) -> usize {
        self.pieces.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &Point) -> Scalar {
        self.pieces
            .iter()
            .find(|(w, _)| x.has_prefix(w))
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let cells = overlay(&self.pieces, &other.pieces);
        Self::canonical(
            cells
                .into_iter()
                .map(|c| {
                    let v = match (c.left, c.right) {
                        (Some(a), Some(b)) => a + b,
                        (Some(a), None) | (None, Some(a)) => a.clone(),
                        (None, None) => Scalar::zero(),
                    };
                    (c.word, v)
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let cells = overlay(&self.pieces, &other.pieces);
        Self::canonical(
            cells
                .into_iter()
                .filter_map(|c| Some((c.word, c.left? * c.right?)))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::canonical(self.pieces.iter().map(|(w, v)| (w.clone(), v * c)).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::real(-1))
    }

    pub fn conj(&self) -> Self {
        Self::canonical(self.pieces.iter().map(|(w, v)| (w.clone(), v.conj())).collect())
    }

    pub fn restrict(&self, set: &ClopenSet) -> Self {
        self.mul(&Self::indicator(set))
    }

    /// `f ∘ m`, defined on `dom m` and zero elsewhere.
    pub fn compose_map(&self, m: &PrefixMap) -> Self {
        let mut out = Vec::new();
        for (w, v) in &self.pieces {
            for u in m.preimage_set(&ClopenSet::cylinder(w.clone())).words() {
                out.push((u.clone(), v.clone()));
            }
        }
        // preimages of disjoint cylinders under an injective map are disjoint
        Self::canonical(out)
    }

    /// `sup |f|²`
    pub fn sup_norm_sqr(&self) -> BigRational {
        self.pieces
            .values()
            .map(Scalar::norm_sqr)
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

impl fmt::Display for PiecewiseConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (w, v)) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}: {v}")?;
        }
        f.write_str("}")
    }
}
