//! Seeded random generators for points, maps, relation instances and algebra
//! elements. All randomness flows through a caller-supplied RNG; the CLI and
//! tests use `ChaCha8Rng::seed_from_u64`, so a seed fixes the whole trial
//! sequence on every platform.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cantor_space::{ClopenSet, Point, Word};
use crate::convolution::{Algebra, ConvolutionError, GroupoidFunction, KernelElement};
use crate::envelope::{Arrow, GermPair};
use crate::locally_constant::PiecewiseConstant;
use crate::partial_action::index::{left_quotient, right_quotient};
use crate::partial_action::{ActionError, ZPartialAction};
use crate::prefix_map::{PrefixMap, PrefixRule};
use crate::scalar::Scalar;

pub fn random_word<R: Rng>(rng: &mut R, len: usize) -> Word {
    Word::from_bits((0..len).map(|_| rng.gen_range(0..=1u8)))
}

/// An eventually periodic point with `|pre| + |per| ≤ max_desc`.
pub fn random_point<R: Rng>(rng: &mut R, max_desc: usize) -> Point {
    let max_desc = max_desc.max(1);
    let total = rng.gen_range(1..=max_desc);
    let per_len = rng.gen_range(1..=total);
    let pre = random_word(rng, total - per_len);
    let per = random_word(rng, per_len);
    Point::new(pre, per).expect("nonempty period")
}

/// A point of a nonempty clopen set.
pub fn random_point_in<R: Rng>(rng: &mut R, set: &ClopenSet, max_desc: usize) -> Option<Point> {
    let w = set.words().choose(rng)?;
    Some(random_point(rng, max_desc).prepend(w))
}

/// Leaves of a random complete prefix code with words of length at most
/// `max_depth`.
pub fn random_partition<R: Rng>(rng: &mut R, max_depth: usize) -> Vec<Word> {
    let mut leaves = Vec::new();
    let mut stack = vec![Word::empty()];
    while let Some(w) = stack.pop() {
        let split = w.len() < max_depth && (w.is_empty() || rng.gen_bool(0.55));
        if split && max_depth > 0 {
            stack.push(w.child(1));
            stack.push(w.child(0));
        } else {
            leaves.push(w);
        }
    }
    leaves
}

/// A valid map pairing random cells of two random partitions.
pub fn random_prefix_map<R: Rng>(rng: &mut R, max_depth: usize) -> PrefixMap {
    let mut sources = random_partition(rng, max_depth);
    let mut targets = random_partition(rng, max_depth);
    sources.shuffle(rng);
    targets.shuffle(rng);
    let m = rng.gen_range(1..=sources.len().min(targets.len()));
    let rules = sources.into_iter().zip(targets).take(m).map(|(u, v)| PrefixRule::new(u, v)).collect();
    PrefixMap::new(rules).expect("cells of partitions form antichains")
}

pub fn random_germ<R: Rng>(rng: &mut R, bound: i64, max_desc: usize) -> GermPair {
    GermPair::new(rng.gen_range(-bound..=bound), random_point(rng, max_desc))
}

/// `(r, x) ~ (s, y)` at `level`, with `|r|, |s| ≤ bound`.
pub fn random_related_pair<R: Rng>(
    rng: &mut R,
    a: &ZPartialAction,
    level: Option<usize>,
    bound: i64,
    max_desc: usize,
) -> Result<(GermPair, GermPair), ActionError> {
    let z = random_arrow(rng, a, level, bound, max_desc)?;
    let y = a.apply(left_quotient(z.source, z.range), &z.point, level)?.expect("arrow in R′");
    Ok((GermPair::new(z.range, z.point), GermPair::new(z.source, y)))
}

/// An arrow `(x, r, s)` of `R′` with `|r|, |s| ≤ bound`.
pub fn random_arrow<R: Rng>(
    rng: &mut R,
    a: &ZPartialAction,
    level: Option<usize>,
    bound: i64,
    max_desc: usize,
) -> Result<Arrow, ActionError> {
    loop {
        let r = rng.gen_range(-bound..=bound);
        let s = rng.gen_range(-bound..=bound);
        let domain = a.domain(left_quotient(r, s), level)?;
        if let Some(x) = random_point_in(rng, &domain, max_desc) {
            return Ok(Arrow::new(x, r, s));
        }
    }
}

/// Three arrows `z₁, z₂, z₃` with `z₁z₂` and `z₂z₃` defined.
pub fn random_composable_triple<R: Rng>(
    rng: &mut R,
    a: &ZPartialAction,
    level: Option<usize>,
    bound: i64,
    max_desc: usize,
) -> Result<[Arrow; 3], ActionError> {
    let first = random_arrow(rng, a, level, bound, max_desc)?;
    let second = continue_arrow(rng, a, level, bound, &first)?;
    let third = continue_arrow(rng, a, level, bound, &second)?;
    Ok([first, second, third])
}

fn continue_arrow<R: Rng>(
    rng: &mut R,
    a: &ZPartialAction,
    level: Option<usize>,
    bound: i64,
    z: &Arrow,
) -> Result<Arrow, ActionError> {
    let y = a.apply(left_quotient(z.source, z.range), &z.point, level)?.expect("arrow in R′");
    let mut options = Vec::new();
    for u in -bound..=bound {
        if a.domain(left_quotient(z.source, u), level)?.contains_point(&y) {
            options.push(u);
        }
    }
    let u = *options.choose(rng).expect("the unit index always works");
    Ok(Arrow::new(y, z.source, u))
}

/// `a/b + (c/d)i` with small numerators and denominators.
pub fn random_scalar<R: Rng>(rng: &mut R) -> Scalar {
    Scalar::from_parts(rng.gen_range(-3..=3), rng.gen_range(1..=3), rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

/// A function supported in `set`, constant on cells of depth at most
/// `max_depth` (or on the cells of `set` when those are deeper).
pub fn random_function_on<R: Rng>(rng: &mut R, set: &ClopenSet, max_depth: usize) -> PiecewiseConstant {
    let mut pieces = Vec::new();
    for w in set.words() {
        let room = max_depth.saturating_sub(w.len());
        for z in random_partition(rng, room) {
            if rng.gen_bool(0.85) {
                pieces.push((w.concat(&z), random_scalar(rng)));
            }
        }
    }
    PiecewiseConstant::from_pieces(pieces)
}

/// Shape of random algebra elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementShape {
    /// Block indices satisfy `|r|, |s| ≤ support`.
    pub support: i64,
    pub depth: usize,
    pub max_blocks: usize,
}

impl Default for ElementShape {
    fn default() -> Self {
        ElementShape { support: 3, depth: 6, max_blocks: 3 }
    }
}

fn random_blocks<R: Rng>(
    rng: &mut R,
    alg: &Algebra<'_>,
    shape: ElementShape,
    index: fn(i64, i64) -> i64,
) -> Result<Vec<((i64, i64), PiecewiseConstant)>, ConvolutionError> {
    let n = shape.support;
    let mut candidates = Vec::new();
    for r in -n..=n {
        for s in -n..=n {
            let domain = alg.domain(index(r, s))?;
            if !domain.is_empty() {
                candidates.push(((r, s), domain));
            }
        }
    }
    let count = rng.gen_range(1..=shape.max_blocks.max(1));
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let ((r, s), domain) = candidates.choose(rng).expect("the diagonal is never empty");
        out.push(((*r, *s), random_function_on(rng, domain, shape.depth)));
    }
    Ok(out)
}

pub fn random_groupoid_function<R: Rng>(
    rng: &mut R,
    alg: &Algebra<'_>,
    shape: ElementShape,
) -> Result<GroupoidFunction, ConvolutionError> {
    Ok(GroupoidFunction::new(random_blocks(rng, alg, shape, left_quotient)?))
}

pub fn random_kernel<R: Rng>(
    rng: &mut R,
    alg: &Algebra<'_>,
    shape: ElementShape,
) -> Result<KernelElement, ConvolutionError> {
    Ok(KernelElement::new(random_blocks(rng, alg, shape, right_quotient)?))
}
