//! The envelope relation `(r,x) ~ (s,y) ⟺ x ∈ X_{r⁻¹s} and h_{s⁻¹r}(x) = y`,
//! Hausdorffness certificates, and structural probes of the étale relation `R`
//! and its groupoid model `R′`.
//!
//! For generated maps every query is made at an explicit truncation level, and
//! Hausdorffness is only ever semi-decided: the search either finds a limit
//! point outside some `X_t` or reports that its depth budget ran out.

use serde::Serialize;
use thiserror::Error;

use crate::cantor_space::{ClopenSet, Point, Word};
use crate::filtration::{self, FiltrationError};
use crate::partial_action::index::{inv, left_quotient};
use crate::partial_action::{ActionError, Generator, ZPartialAction};
use crate::prefix_map::GeneratedKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("no non-clopen witness for X_{t} within depth {depth}")]
    NoWitness { t: i64, depth: usize },
    #[error("base {base} is not inside X_{index} = {domain}")]
    BaseNotInDomain { index: i64, base: ClopenSet, domain: ClopenSet },
}

/// A point `(r, x)` of `ℤ × X`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GermPair {
    pub index: i64,
    pub point: Point,
}

impl GermPair {
    pub fn new(index: i64, point: Point) -> Self {
        GermPair { index, point }
    }
}

impl std::fmt::Display for GermPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.index, self.point)
    }
}

impl std::str::FromStr for GermPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (r, x) = s.split_once(':').ok_or_else(|| format!("expected r:point, got {s:?}"))?;
        let index = r.trim().parse().map_err(|e| format!("bad index {r:?}: {e}"))?;
        let point = x.parse().map_err(|e| format!("{e}"))?;
        Ok(GermPair { index, point })
    }
}

/// The two steps behind one `related` query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelatedTrace {
    /// `r⁻¹s`
    pub domain_index: i64,
    pub domain: ClopenSet,
    pub in_domain: bool,
    /// `s⁻¹r`
    pub map_index: i64,
    pub image: Option<Point>,
    pub related: bool,
}

pub fn related_trace(
    a: &ZPartialAction,
    level: Option<usize>,
    p: &GermPair,
    q: &GermPair,
) -> Result<RelatedTrace, ActionError> {
    let domain_index = left_quotient(p.index, q.index);
    let map_index = left_quotient(q.index, p.index);
    let domain = a.domain(domain_index, level)?;
    let in_domain = domain.contains_point(&p.point);
    let image = if in_domain { a.apply(map_index, &p.point, level)? } else { None };
    let related = image.as_ref() == Some(&q.point);
    Ok(RelatedTrace { domain_index, domain, in_domain, map_index, image, related })
}

pub fn related(
    a: &ZPartialAction,
    level: Option<usize>,
    p: &GermPair,
    q: &GermPair,
) -> Result<bool, ActionError> {
    Ok(related_trace(a, level, p, q)?.related)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub germs: usize,
    pub related_pairs: usize,
    pub reflexive_failures: Vec<GermPair>,
    pub symmetric_failures: Vec<(GermPair, GermPair)>,
    pub transitive_failures: Vec<(GermPair, GermPair, GermPair)>,
}

impl EquivalenceReport {
    pub fn is_ok(&self) -> bool {
        self.reflexive_failures.is_empty()
            && self.symmetric_failures.is_empty()
            && self.transitive_failures.is_empty()
    }
}

/// Checks reflexivity, symmetry and transitivity of `~` on a finite germ set.
pub fn symmetry_transitivity_probe(
    a: &ZPartialAction,
    level: Option<usize>,
    germs: &[GermPair],
) -> Result<EquivalenceReport, ActionError> {
    let n = germs.len();
    let mut rel = vec![vec![false; n]; n];
    let mut report = EquivalenceReport { germs: n, ..Default::default() };
    for i in 0..n {
        for j in 0..n {
            rel[i][j] = related(a, level, &germs[i], &germs[j])?;
            if rel[i][j] && i != j {
                report.related_pairs += 1;
            }
        }
    }
    for i in 0..n {
        if !rel[i][i] {
            report.reflexive_failures.push(germs[i].clone());
        }
        for j in 0..n {
            if rel[i][j] && !rel[j][i] {
                report.symmetric_failures.push((germs[i].clone(), germs[j].clone()));
            }
            if !rel[i][j] {
                continue;
            }
            for k in 0..n {
                if rel[j][k] && !rel[i][k] {
                    report.transitive_failures.push((
                        germs[i].clone(),
                        germs[j].clone(),
                        germs[k].clone(),
                    ));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum HausdorffCertificate {
    /// Every `X_t` with `|t| ≤ bound` was computed as a clopen set.
    Clopen { bound: i64 },
    /// `limit ∉ X_t` at every checked level while each of its cylinders up to
    /// the checked depth meets `X_t`.
    NonClopenWitness { t: i64, point: Point },
    Unknown { depth: usize },
}

/// Largest explicit level needed to see the whole rule list of a finite
/// enumeration.
fn exhausted_level(a: &ZPartialAction) -> Option<Option<usize>> {
    match a.generator() {
        Generator::Finite(_) => Some(None),
        Generator::Generated(g) => match g.kind() {
            GeneratedKind::Odometer => None,
            GeneratedKind::Explicit(rules) => Some(Some(rules.len().saturating_sub(1))),
        },
    }
}

/// Order in which indices are searched for a witness: `-1, 1, -2, 2, …`.
fn search_order(bound: i64) -> impl Iterator<Item = i64> {
    (1..=bound.max(1)).flat_map(|m| [-m, m])
}

/// Decides whether the envelope space is Hausdorff, up to the given bounds.
pub fn hausdorff_decide(
    a: &ZPartialAction,
    bound: i64,
    depth: usize,
) -> Result<HausdorffCertificate, ActionError> {
    if let Some(level) = exhausted_level(a) {
        for t in -bound..=bound {
            // materialized as canonical clopen sets
            a.domain(t, level)?;
        }
        return Ok(HausdorffCertificate::Clopen { bound });
    }
    for t in search_order(bound) {
        if let Some(point) = residual_witness(a, t, depth)? {
            return Ok(HausdorffCertificate::NonClopenWitness { t, point });
        }
    }
    Ok(HausdorffCertificate::Unknown { depth })
}

/// The eventually periodic point of least description length whose expansion
/// starts with `w`, provided it is determined by at least two full periods'
/// worth of evidence.
pub fn extrapolate(w: &Word) -> Option<Point> {
    let n = w.len();
    for total in 1..=n / 2 {
        for per_len in 1..=total {
            let pre_len = total - per_len;
            let pre = w.truncate(pre_len);
            let per = w.strip_prefix(&pre).expect("prefix").truncate(per_len);
            let x = Point::new(pre, per).expect("nonempty period");
            if x.has_prefix(w) {
                return Some(x);
            }
        }
    }
    None
}

/// Looks for a limit point of `X_t` outside `X_t` from the residuals
/// `X \ X^k_t`, `k ≤ depth`. Only chains of single, strictly nested cylinders
/// are recognized.
pub fn residual_witness(a: &ZPartialAction, t: i64, depth: usize) -> Result<Option<Point>, ActionError> {
    if a.is_clopen() || depth == 0 {
        return Ok(None);
    }
    let mut chain: Vec<Word> = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let residual = a.domain(t, Some(k))?.complement();
        let [w] = residual.words() else { return Ok(None) };
        if let Some(prev) = chain.last() {
            if !(prev.is_prefix_of(w) && w.len() > prev.len()) {
                return Ok(None);
            }
        }
        chain.push(w.clone());
    }
    let Some(x) = extrapolate(chain.last().expect("depth + 1 residuals")) else {
        return Ok(None);
    };
    let top = a.domain(t, Some(depth))?;
    for k in 0..=depth {
        if a.domain(t, Some(k))?.contains_point(&x) {
            return Ok(None);
        }
    }
    for j in 0..=depth {
        if !ClopenSet::cylinder(x.prefix(j)).intersects(&top) {
            return Ok(None);
        }
    }
    Ok(Some(x))
}

/// Two envelope points that no pair of open sets separates, with the
/// approximating sequence that shows it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonSeparablePair {
    pub t: i64,
    pub level: usize,
    pub first: GermPair,
    pub second: GermPair,
    /// `(x_j, h_{t⁻¹}(x_j))` with `x_j ∈ X_t` and `x_j → first.point`.
    pub approach: Vec<(Point, Point)>,
}

impl NonSeparablePair {
    /// Whether for every depth `d ≤ max_depth` the last approach pair agrees
    /// with both limits on the first `d` symbols.
    pub fn converges_to_depth(&self, max_depth: usize) -> bool {
        (0..=max_depth).all(|d| {
            let x = self.first.point.prefix(d);
            let y = self.second.point.prefix(d);
            let agrees = |(a, b): &(Point, Point)| a.prefix(d) == x && b.prefix(d) == y;
            self.approach.last().is_some_and(agrees)
        })
    }

    /// Whether every approach pair is related: `(t⁻¹, x_j) ~ (0, y_j)` at the
    /// recorded level.
    pub fn approach_related(&self, a: &ZPartialAction) -> Result<bool, ActionError> {
        for (x, y) in &self.approach {
            let p = GermPair::new(self.first.index, x.clone());
            let q = GermPair::new(self.second.index, y.clone());
            if !related(a, Some(self.level), &p, &q)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds the pair `[t⁻¹, x]`, `[0, y]` from a residual witness for `X_t`.
pub fn nonseparable_pair(a: &ZPartialAction, t: i64, depth: usize) -> Result<NonSeparablePair, EnvelopeError> {
    let x = residual_witness(a, t, depth)?.ok_or(EnvelopeError::NoWitness { t, depth })?;
    let level = Some(depth);
    let top = a.domain(t, level)?;
    let back = a.map(inv(t), level)?;
    let mut approach = Vec::with_capacity(depth);
    for j in 1..=depth {
        let near = top.intersect(&ClopenSet::cylinder(x.prefix(j)));
        // the shallowest cell keeps x_j as close to the cylinder boundary as the level allows
        let cell = near.words().iter().min_by_key(|w| w.len()).ok_or(EnvelopeError::NoWitness { t, depth })?;
        let xj = Point::left_of(cell);
        let yj = back.apply_point(&xj).map_err(|_| EnvelopeError::NoWitness { t, depth })?;
        approach.push((xj, yj));
    }
    // the images converge; read off their common prefix over the second half
    let probe = 2 * depth + 2;
    let tail = &approach[depth / 2..];
    let mut common = tail[0].1.prefix(probe);
    for (_, y) in &tail[1..] {
        let w = y.prefix(probe);
        let lcp = common.bits().iter().zip(w.bits()).take_while(|(a, b)| a == b).count();
        common = common.truncate(lcp);
    }
    let y = extrapolate(&common).ok_or(EnvelopeError::NoWitness { t, depth })?;
    Ok(NonSeparablePair {
        t,
        level: depth,
        first: GermPair::new(inv(t), x),
        second: GermPair::new(0, y),
        approach,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EtaleReport {
    pub t: i64,
    pub s: i64,
    pub base: ClopenSet,
    /// Image of the basic open under the range map, `(t, base)`.
    pub range_image: ClopenSet,
    /// Image under the source map, `(s, h_{s⁻¹t}(base))`.
    pub source_image: ClopenSet,
    pub range_bijective: bool,
    pub source_bijective: bool,
    /// Representative points of each base cylinder give related germs.
    pub pointwise_related: bool,
}

impl EtaleReport {
    pub fn is_ok(&self) -> bool {
        self.range_bijective && self.source_bijective && self.pointwise_related
    }
}

/// Checks the range and source maps on the basic open
/// `U = {(t, x, s, h_{s⁻¹t}(x)) : x ∈ base}`.
pub fn etale_probe(
    a: &ZPartialAction,
    level: Option<usize>,
    t: i64,
    s: i64,
    base: &ClopenSet,
) -> Result<EtaleReport, EnvelopeError> {
    let index = left_quotient(t, s);
    let domain = a.domain(index, level)?;
    if !base.is_subset(&domain) {
        return Err(EnvelopeError::BaseNotInDomain { index, base: base.clone(), domain });
    }
    let h = a.map(left_quotient(s, t), level)?;
    let source_image = h.image_set(base);
    // the range map is the identity on the x coordinate; the source map is h,
    // which is injective on its domain, so bijectivity onto the image reduces
    // to recovering the base from the image
    let source_bijective = h.preimage_set(&source_image) == *base;
    let mut pointwise_related = true;
    for w in base.words() {
        for x in [Point::left_of(w), Point::right_of(w)] {
            let y = h.apply_point(&x).ok();
            let ok = match &y {
                Some(y) => related(a, level, &GermPair::new(t, x.clone()), &GermPair::new(s, y.clone()))?,
                None => false,
            };
            pointwise_related &= ok;
        }
    }
    Ok(EtaleReport {
        t,
        s,
        base: base.clone(),
        range_image: base.clone(),
        source_image,
        range_bijective: true,
        source_bijective,
        pointwise_related,
    })
}

/// The diagonal `Δ` is covered by the basic opens `U_{t,X,t}`, on which range
/// and source agree.
pub fn diagonal_probe(a: &ZPartialAction, level: Option<usize>, bound: i64) -> Result<bool, EnvelopeError> {
    for t in -bound..=bound {
        let report = etale_probe(a, level, t, t, &ClopenSet::full())?;
        if !(report.is_ok() && report.source_image.is_full()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An arrow `(x, r, s)` of the groupoid `R′`, standing for `(r, x, s, h_{s⁻¹r}(x)) ∈ R`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Arrow {
    pub point: Point,
    pub range: i64,
    pub source: i64,
}

impl Arrow {
    pub fn new(point: Point, range: i64, source: i64) -> Self {
        Arrow { point, range, source }
    }

    pub fn unit(point: Point, index: i64) -> Self {
        Arrow { point, range: index, source: index }
    }
}

/// The groupoid operations of `R′` at one level of the action.
pub struct Groupoid<'a> {
    action: &'a ZPartialAction,
    level: Option<usize>,
}

impl<'a> Groupoid<'a> {
    pub fn new(action: &'a ZPartialAction, level: Option<usize>) -> Self {
        Groupoid { action, level }
    }

    /// `x ∈ X_{r⁻¹s}`
    pub fn contains(&self, z: &Arrow) -> Result<bool, ActionError> {
        Ok(self.action.domain(left_quotient(z.range, z.source), self.level)?.contains_point(&z.point))
    }

    /// `h_{s⁻¹r}(x)`, the point of the source germ.
    pub fn source_point(&self, z: &Arrow) -> Result<Option<Point>, ActionError> {
        self.action.apply(left_quotient(z.source, z.range), &z.point, self.level)
    }

    /// `(x,r,s)·(y,t,u) = (x,r,u)`, defined iff `s = t` and `y = h_{s⁻¹r}(x)`.
    pub fn compose(&self, a: &Arrow, b: &Arrow) -> Result<Option<Arrow>, ActionError> {
        if a.source != b.range {
            return Ok(None);
        }
        let y = self.source_point(a)?;
        Ok((y.as_ref() == Some(&b.point)).then(|| Arrow::new(a.point.clone(), a.range, b.source)))
    }

    /// `(x,r,s)⁻¹ = (h_{s⁻¹r}(x), s, r)`
    pub fn inverse(&self, z: &Arrow) -> Result<Option<Arrow>, ActionError> {
        Ok(self.source_point(z)?.map(|y| Arrow::new(y, z.source, z.range)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GroupoidReport {
    pub samples: usize,
    pub composable_pairs: usize,
    pub associative_triples: usize,
    pub violations: Vec<String>,
}

/// Checks composability, associativity and the inverse laws on sample
/// triples. Products computed in `R′` are cross-checked against the
/// four-coordinate picture `(r,x,s,y)·(s,y,u,z) = (r,x,u,z)` of `R`.
pub fn groupoid_probe(
    a: &ZPartialAction,
    level: Option<usize>,
    samples: &[[Arrow; 3]],
) -> Result<GroupoidReport, ActionError> {
    let g = Groupoid::new(a, level);
    let mut report = GroupoidReport { samples: samples.len(), ..Default::default() };
    let mut violations = Vec::new();
    for triple in samples {
        for z in triple {
            if !g.contains(z)? {
                violations.push(format!("{z:?} is not in R′"));
                continue;
            }
            let y = g.source_point(z)?.expect("member of R′");
            let zi = g.inverse(z)?.expect("member of R′");
            if !g.contains(&zi)? || g.inverse(&zi)?.as_ref() != Some(z) {
                violations.push(format!("inverse of {z:?} is not an involution"));
            }
            let range_unit = Arrow::unit(z.point.clone(), z.range);
            let source_unit = Arrow::unit(y, z.source);
            if g.compose(z, &zi)? != Some(range_unit.clone()) {
                violations.push(format!("z·z⁻¹ is not the range unit for {z:?}"));
            }
            if g.compose(&zi, z)? != Some(source_unit) {
                violations.push(format!("z⁻¹·z is not the source unit for {z:?}"));
            }
            if g.compose(&range_unit, &range_unit)? != Some(range_unit.clone()) {
                violations.push(format!("unit {range_unit:?} is not idempotent"));
            }
        }
        let [p, q, r] = triple;
        let pq = g.compose(p, q)?;
        let qr = g.compose(q, r)?;
        // composable in R iff source germ of p equals range germ of q
        let expect_pq = p.source == q.range && g.source_point(p)?.as_ref() == Some(&q.point);
        if pq.is_some() != expect_pq {
            violations.push(format!("composability mismatch for {p:?}, {q:?}"));
        }
        if let Some(pq) = &pq {
            report.composable_pairs += 1;
            let four = (
                GermPair::new(p.range, p.point.clone()),
                GermPair::new(q.source, g.source_point(q)?.expect("member of R′")),
            );
            if !related(a, level, &four.0, &four.1)? || g.source_point(pq)?.as_ref() != Some(&four.1.point) {
                violations.push(format!("product {pq:?} disagrees with R"));
            }
        }
        if let (Some(pq), Some(qr)) = (&pq, &qr) {
            let left = g.compose(pq, r)?;
            let right = g.compose(p, qr)?;
            if left.is_none() || left != right {
                violations.push(format!("associativity fails on {p:?}, {q:?}, {r:?}"));
            } else {
                report.associative_triples += 1;
            }
        }
    }
    report.violations = violations;
    Ok(report)
}

/// Classes of the cell-level envelope relation on `{(t, w) : |t| ≤ bound, |w| = depth}`.
pub fn quotient_decomposition(
    a: &ZPartialAction,
    level: Option<usize>,
    bound: i64,
    depth: usize,
) -> Result<Vec<Vec<(i64, Word)>>, FiltrationError> {
    let rel = filtration::cell_relation(a, level, bound, depth)?;
    Ok(rel.class_units())
}
