//! Partial actions of ℤ generated by a single partial homeomorphism.
//!
//! The action generated by `h` has `h_n = h^n` on `X_{-n} = dom(h^n)`, so `h_t`
//! maps `X_{-t}` onto `X_t`. For a [`GeneratedMap`] only the restricted actions
//! `θ_k` generated by the level-`k` truncation are materialized.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::cantor_space::{ClopenSet, Point, Word};
use crate::locally_constant::PiecewiseConstant;
use crate::prefix_map::{GeneratedMap, PrefixMap};

/// Group-notation index formulas in additive ℤ. Every formula written with
/// inverses (`r⁻¹s`, `rs⁻¹`, `t⁻¹`) goes through here.
pub mod index {
    /// `t⁻¹`
    pub fn inv(t: i64) -> i64 {
        -t
    }

    /// `r⁻¹s`
    pub fn left_quotient(r: i64, s: i64) -> i64 {
        s - r
    }

    /// `rs⁻¹`
    pub fn right_quotient(r: i64, s: i64) -> i64 {
        r - s
    }

    /// `rs`
    pub fn product(r: i64, s: i64) -> i64 {
        r + s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("a truncation level is required for a generated (non-clopen) map")]
    LevelRequired,
    #[error("function is not supported inside X_{t}: {support} ⊄ {domain}")]
    SupportViolation { t: i64, support: ClopenSet, domain: ClopenSet },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    Finite(PrefixMap),
    Generated(GeneratedMap),
}

/// The partial action `({X_t}, {h_t})` of ℤ generated by one map.
pub struct ZPartialAction {
    generator: Generator,
    powers: RwLock<HashMap<(Option<usize>, i64), Arc<PrefixMap>>>,
}

impl fmt::Debug for ZPartialAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZPartialAction").field("generator", &self.generator).finish()
    }
}

impl Clone for ZPartialAction {
    fn clone(&self) -> Self {
        ZPartialAction::new(self.generator.clone())
    }
}

impl ZPartialAction {
    pub fn new(generator: Generator) -> Self {
        ZPartialAction { generator, powers: RwLock::new(HashMap::new()) }
    }

    pub fn from_map(m: PrefixMap) -> Self {
        Self::new(Generator::Finite(m))
    }

    pub fn from_generated(g: GeneratedMap) -> Self {
        Self::new(Generator::Generated(g))
    }

    /// `θ_k`: the clopen action generated by the first `k+1` rules.
    pub fn restrict(g: &GeneratedMap, k: usize) -> Self {
        Self::from_map(g.truncation(k))
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn is_clopen(&self) -> bool {
        matches!(self.generator, Generator::Finite(_))
    }

    /// The generating map at the requested level.
    pub fn base_map(&self, level: Option<usize>) -> Result<PrefixMap, ActionError> {
        match (&self.generator, level) {
            (Generator::Finite(m), _) => Ok(m.clone()),
            (Generator::Generated(g), Some(k)) => Ok(g.truncation(k)),
            (Generator::Generated(_), None) => Err(ActionError::LevelRequired),
        }
    }

    /// `h_t` (at level `k` for generated maps).
    pub fn map(&self, t: i64, level: Option<usize>) -> Result<Arc<PrefixMap>, ActionError> {
        let key = match self.generator {
            Generator::Finite(_) => (None, t),
            Generator::Generated(_) => (Some(level.ok_or(ActionError::LevelRequired)?), t),
        };
        if let Some(m) = self.powers.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(m));
        }
        // build from the neighbour one step closer to zero
        let m = if t == 0 {
            PrefixMap::identity()
        } else {
            let base = self.base_map(level)?;
            let step = if t > 0 { base } else { base.inverse() };
            let prev = self.map(t - t.signum(), level)?;
            step.compose(&prev)
        };
        let m = Arc::new(m);
        self.powers.write().expect("cache lock").insert(key, Arc::clone(&m));
        Ok(m)
    }

    /// `X_t = ran h_t = dom h_{-t}`.
    pub fn domain(&self, t: i64, level: Option<usize>) -> Result<ClopenSet, ActionError> {
        Ok(self.map(t, level)?.range())
    }

    /// `h_t(x)` if `x ∈ X_{-t}`.
    pub fn apply(&self, t: i64, x: &Point, level: Option<usize>) -> Result<Option<Point>, ActionError> {
        Ok(self.map(t, level)?.apply_point(x).ok())
    }

    /// The explicit family `{X_t, h_t}` for `|t| ≤ n`.
    pub fn family(&self, n: i64, level: Option<usize>) -> Result<ExplicitFamily, ActionError> {
        let mut members = Vec::new();
        for t in -n..=n {
            members.push((self.domain(t, level)?, (*self.map(t, level)?).clone()));
        }
        Ok(ExplicitFamily { bound: n, members })
    }

    /// `α_t(f) = f ∘ h_t⁻¹` for `f` vanishing outside `X_{t⁻¹}`.
    pub fn dual_pullback(
        &self,
        f: &PiecewiseConstant,
        t: i64,
        level: Option<usize>,
    ) -> Result<PiecewiseConstant, ActionError> {
        let source = self.domain(index::inv(t), level)?;
        let support = f.support();
        if !support.is_subset(&source) {
            return Err(ActionError::SupportViolation { t: index::inv(t), support, domain: source });
        }
        let back = self.map(index::inv(t), level)?;
        Ok(f.compose_map(&back))
    }
}

/// A family `{Δ_t, h_t}_{|t| ≤ bound}` given explicitly, for axiom checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitFamily {
    pub bound: i64,
    // index t + bound
    members: Vec<(ClopenSet, PrefixMap)>,
}

impl ExplicitFamily {
    pub fn new(bound: i64, members: Vec<(ClopenSet, PrefixMap)>) -> Self {
        assert_eq!(members.len() as i64, 2 * bound + 1, "one member per index");
        ExplicitFamily { bound, members }
    }

    pub fn delta(&self, t: i64) -> &ClopenSet {
        &self.members[(t + self.bound) as usize].0
    }

    pub fn h(&self, t: i64) -> &PrefixMap {
        &self.members[(t + self.bound) as usize].1
    }

    pub fn set_delta(&mut self, t: i64, set: ClopenSet) {
        self.members[(t + self.bound) as usize].0 = set;
    }

    pub fn set_h(&mut self, t: i64, m: PrefixMap) {
        self.members[(t + self.bound) as usize].1 = m;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Axiom {
    /// `Δ_e = Ω` and `h_e = id`
    Unit,
    /// `h_t` is a bijection `Δ_{t⁻¹} → Δ_t`
    Bijection,
    /// `h_t(Δ_{t⁻¹} ∩ Δ_s) = Δ_t ∩ Δ_{ts}`
    ImageIdentity,
    /// `h_t ∘ h_s = h_{ts}` on `Δ_{s⁻¹} ∩ Δ_{s⁻¹t⁻¹}`
    Composition,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    None,
    Sets { left: ClopenSet, right: ClopenSet },
    Point(Point),
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub t: i64,
    pub s: i64,
    pub witness: Witness,
}

/// Checks the partial-action axioms on every pair `|t|, |s|, |t+s| ≤ bound`.
/// Returns all violations found; an empty list means the family passes.
pub fn axioms_check(family: &ExplicitFamily) -> Vec<AxiomViolation> {
    use index::{inv, product};
    let n = family.bound;
    let mut out = Vec::new();
    if !family.delta(0).is_full() || *family.h(0) != PrefixMap::identity() {
        out.push(AxiomViolation { axiom: Axiom::Unit, t: 0, s: 0, witness: Witness::None });
    }
    for t in -n..=n {
        let h = family.h(t);
        if h.domain() != *family.delta(inv(t)) || h.range() != *family.delta(t) {
            out.push(AxiomViolation {
                axiom: Axiom::Bijection,
                t,
                s: 0,
                witness: Witness::Sets { left: h.domain(), right: family.delta(inv(t)).clone() },
            });
        }
    }
    for t in -n..=n {
        for s in -n..=n {
            let ts = product(t, s);
            if ts.abs() > n {
                continue;
            }
            let left = family.h(t).image_set(&family.delta(inv(t)).intersect(family.delta(s)));
            let right = family.delta(t).intersect(family.delta(ts));
            if left != right {
                out.push(AxiomViolation {
                    axiom: Axiom::ImageIdentity,
                    t,
                    s,
                    witness: Witness::Sets { left, right },
                });
            }
        }
    }
    for t in -n..=n {
        for s in -n..=n {
            let ts = product(t, s);
            if ts.abs() > n {
                continue;
            }
            let on = family.delta(inv(s)).intersect(family.delta(inv(ts)));
            let composed = family.h(t).compose(family.h(s)).restrict(&on);
            let direct = family.h(ts).restrict(&on);
            if let Some(x) = composed.disagreement(&direct) {
                out.push(AxiomViolation { axiom: Axiom::Composition, t, s, witness: Witness::Point(x) });
            }
        }
    }
    out
}

/// A representative point per cylinder: `w·0^∞`.
pub fn representative(w: &Word) -> Point {
    Point::left_of(w)
}
