//! Finitely supported models of the convolution algebra `C_c(R′)` and the
//! kernel algebra `k_c(D)`, the isomorphism `ψ` between them, corner
//! projections, translation actions and the kernel norm.
//!
//! Everything is exact. Group indices are additive, so `rs⁻¹` is `r − s` and
//! a kernel entry at `(r, s)` carries the tag `δ_{r−s}` implicitly.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cantor_space::{ClopenSet, Word};
use crate::locally_constant::PiecewiseConstant;
use crate::partial_action::index::{inv, left_quotient, right_quotient};
use crate::partial_action::{ActionError, ZPartialAction};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvolutionError {
    #[error("block ({r},{s}) has support {support} outside {domain}")]
    SupportViolation { r: i64, s: i64, support: ClopenSet, domain: ClopenSet },
    #[error(transparent)]
    Action(#[from] ActionError),
}

type Blocks = BTreeMap<(i64, i64), PiecewiseConstant>;

fn accumulate(out: &mut Blocks, key: (i64, i64), value: PiecewiseConstant) {
    if value.is_zero() {
        return;
    }
    let entry = out.entry(key).or_default();
    *entry = entry.add(&value);
    if entry.is_zero() {
        out.remove(&key);
    }
}

fn add_blocks(a: &Blocks, b: &Blocks) -> Blocks {
    let mut out = a.clone();
    for (k, v) in b {
        accumulate(&mut out, *k, v.clone());
    }
    out
}

fn shift_blocks(b: &Blocks, t: i64) -> Blocks {
    b.iter().map(|(&(r, s), v)| ((r - t, s - t), v.clone())).collect()
}

fn prune(blocks: Blocks) -> Blocks {
    blocks.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// An element of `C_c(R′)`: block `(r, s)` is the restriction to
/// `R′_{r,s} = {(x, r, s) : x ∈ X_{r⁻¹s}}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupoidFunction {
    blocks: Blocks,
}

/// An element of `k_c(D)`: entry `(r, s)` is `f δ_{rs⁻¹}` with `f` supported
/// in `X_{rs⁻¹}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KernelElement {
    entries: Blocks,
}

macro_rules! block_container {
    ($ty:ident, $field:ident) => {
        impl $ty {
            pub fn zero() -> Self {
                Self::default()
            }

            /// Zero blocks are dropped.
            pub fn new<I: IntoIterator<Item = ((i64, i64), PiecewiseConstant)>>(items: I) -> Self {
                let mut $field = Blocks::new();
                for (k, v) in items {
                    accumulate(&mut $field, k, v);
                }
                $ty { $field }
            }

            pub fn single(r: i64, s: i64, f: PiecewiseConstant) -> Self {
                Self::new([((r, s), f)])
            }

            pub fn get(&self, r: i64, s: i64) -> Option<&PiecewiseConstant> {
                self.$field.get(&(r, s))
            }

            pub fn iter(&self) -> impl Iterator<Item = (&(i64, i64), &PiecewiseConstant)> {
                self.$field.iter()
            }

            pub fn indices(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
                self.$field.keys().copied()
            }

            pub fn len(&self) -> usize {
                self.$field.len()
            }

            pub fn is_zero(&self) -> bool {
                self.$field.is_empty()
            }

            pub fn add(&self, other: &Self) -> Self {
                $ty { $field: add_blocks(&self.$field, &other.$field) }
            }

            pub fn scale(&self, c: &Scalar) -> Self {
                $ty { $field: prune(self.$field.iter().map(|(k, v)| (*k, v.scale(c))).collect()) }
            }

            pub fn neg(&self) -> Self {
                self.scale(&Scalar::real(-1))
            }

            /// Only the block at `(r, s)`.
            pub fn restrict_to(&self, r: i64, s: i64) -> Self {
                Self::new(self.get(r, s).cloned().map(|v| ((r, s), v)))
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
                let items: Vec<((i64, i64), BTreeMap<String, String>)> = self
                    .$field
                    .iter()
                    .map(|(&(r, s), v)| ((r, s), v.pieces().map(|(w, c)| (w.to_string(), c.to_string())).collect()))
                    .collect();
                items.serialize(ser)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
                let items: Vec<((i64, i64), BTreeMap<String, String>)> = Vec::deserialize(de)?;
                let mut out = Vec::with_capacity(items.len());
                for (key, pieces) in items {
                    let mut parsed = Vec::with_capacity(pieces.len());
                    for (w, c) in pieces {
                        let w: Word = w.parse().map_err(D::Error::custom)?;
                        let c: Scalar = c.parse().map_err(D::Error::custom)?;
                        parsed.push((w, c));
                    }
                    for (i, (a, _)) in parsed.iter().enumerate() {
                        if parsed[i + 1..].iter().any(|(b, _)| a.comparable(b)) {
                            return Err(D::Error::custom(format!("overlapping pieces in block {key:?}")));
                        }
                    }
                    out.push((key, PiecewiseConstant::from_pieces(parsed)));
                }
                Ok(Self::new(out))
            }
        }
    };
}

block_container!(GroupoidFunction, blocks);
block_container!(KernelElement, entries);

/// The algebras attached to one partial action, at a fixed level for
/// generated maps.
#[derive(Debug, Clone)]
pub struct Algebra<'a> {
    action: &'a ZPartialAction,
    level: Option<usize>,
}

impl<'a> Algebra<'a> {
    pub fn new(action: &'a ZPartialAction, level: Option<usize>) -> Self {
        Algebra { action, level }
    }

    pub fn action(&self) -> &ZPartialAction {
        self.action
    }

    pub fn level(&self) -> Option<usize> {
        self.level
    }

    pub fn domain(&self, t: i64) -> Result<ClopenSet, ConvolutionError> {
        Ok(self.action.domain(t, self.level)?)
    }

    fn check(&self, blocks: &Blocks, index: impl Fn(i64, i64) -> i64) -> Result<(), ConvolutionError> {
        for (&(r, s), v) in blocks {
            let domain = self.domain(index(r, s))?;
            let support = v.support();
            if !support.is_subset(&domain) {
                return Err(ConvolutionError::SupportViolation { r, s, support, domain });
            }
        }
        Ok(())
    }

    /// Block `(r, s)` must vanish outside `X_{r⁻¹s}`.
    pub fn check_function(&self, f: &GroupoidFunction) -> Result<(), ConvolutionError> {
        self.check(&f.blocks, left_quotient)
    }

    /// Entry `(r, s)` must vanish outside `X_{rs⁻¹}`.
    pub fn check_kernel(&self, k: &KernelElement) -> Result<(), ConvolutionError> {
        self.check(&k.entries, right_quotient)
    }

    /// `g ∘ h_t`
    fn pull(&self, g: &PiecewiseConstant, t: i64) -> Result<PiecewiseConstant, ConvolutionError> {
        Ok(g.compose_map(&*self.action.map(t, self.level)?))
    }

    /// `(f*g)(x, r, u) = Σ_s f(x, r, s) g(h_{s⁻¹r}(x), s, u)`
    pub fn cc_convolve(&self, f: &GroupoidFunction, g: &GroupoidFunction) -> Result<GroupoidFunction, ConvolutionError> {
        self.check_function(f)?;
        self.check_function(g)?;
        let mut out = Blocks::new();
        for (&(r, s), fv) in &f.blocks {
            for (&(_, u), gv) in g.blocks.range((s, i64::MIN)..=(s, i64::MAX)) {
                let moved = self.pull(gv, left_quotient(s, r))?;
                accumulate(&mut out, (r, u), fv.mul(&moved));
            }
        }
        Ok(GroupoidFunction { blocks: out })
    }

    /// `f*(x, r, s) = conj f(h_{s⁻¹r}(x), s, r)`
    pub fn cc_involution(&self, f: &GroupoidFunction) -> Result<GroupoidFunction, ConvolutionError> {
        self.check_function(f)?;
        let mut out = Blocks::new();
        for (&(a, b), v) in &f.blocks {
            // new block (b, a) reads the old one through h_{b - a}
            accumulate(&mut out, (b, a), self.pull(&v.conj(), left_quotient(a, b))?);
        }
        Ok(GroupoidFunction { blocks: out })
    }

    /// `α_t(f) = f ∘ h_t⁻¹` on functions supported in `X_{t⁻¹}`.
    fn alpha(&self, f: &PiecewiseConstant, t: i64) -> Result<PiecewiseConstant, ConvolutionError> {
        Ok(self.action.dual_pullback(f, t, self.level)?)
    }

    /// `fδ_p · gδ_q = α_p(α_{p⁻¹}(f) g) δ_{pq}`
    pub fn fiber_product(
        &self,
        f: &PiecewiseConstant,
        p: i64,
        g: &PiecewiseConstant,
    ) -> Result<PiecewiseConstant, ConvolutionError> {
        let pulled = self.alpha(f, inv(p))?;
        self.alpha(&pulled.mul(g), p)
    }

    /// `(k₁k₂)(r, s) = Σ_t k₁(r, t) k₂(t, s)`
    pub fn kernel_multiply(&self, k1: &KernelElement, k2: &KernelElement) -> Result<KernelElement, ConvolutionError> {
        self.check_kernel(k1)?;
        self.check_kernel(k2)?;
        let mut out = Blocks::new();
        for (&(r, t), f) in &k1.entries {
            for (&(_, s), g) in k2.entries.range((t, i64::MIN)..=(t, i64::MAX)) {
                accumulate(&mut out, (r, s), self.fiber_product(f, right_quotient(r, t), g)?);
            }
        }
        Ok(KernelElement { entries: out })
    }

    /// `k*(r, s) = k(s, r)*` with `(fδ_p)* = α_{p⁻¹}(f̄) δ_{p⁻¹}`.
    pub fn kernel_involution(&self, k: &KernelElement) -> Result<KernelElement, ConvolutionError> {
        self.check_kernel(k)?;
        let mut out = Blocks::new();
        for (&(a, b), f) in &k.entries {
            let p = right_quotient(a, b);
            accumulate(&mut out, (b, a), self.alpha(&f.conj(), inv(p))?);
        }
        Ok(KernelElement { entries: out })
    }

    /// `ψ(f)(r, s) = f_{r⁻¹, s⁻¹} δ_{rs⁻¹}`
    pub fn psi(&self, f: &GroupoidFunction) -> Result<KernelElement, ConvolutionError> {
        self.check_function(f)?;
        Ok(KernelElement { entries: f.blocks.iter().map(|(&(a, b), v)| ((inv(a), inv(b)), v.clone())).collect() })
    }

    pub fn psi_inverse(&self, k: &KernelElement) -> Result<GroupoidFunction, ConvolutionError> {
        self.check_kernel(k)?;
        Ok(GroupoidFunction { blocks: k.entries.iter().map(|(&(r, s), v)| ((inv(r), inv(s)), v.clone())).collect() })
    }
}

/// `L_t`: keeps the entries in row `t`.
pub fn left_corner(k: &KernelElement, t: i64) -> KernelElement {
    KernelElement { entries: k.entries.range((t, i64::MIN)..=(t, i64::MAX)).map(|(a, b)| (*a, b.clone())).collect() }
}

/// `R_t`: keeps the entries in column `t`.
pub fn right_corner(k: &KernelElement, t: i64) -> KernelElement {
    KernelElement { entries: k.entries.iter().filter(|((_, s), _)| *s == t).map(|(a, b)| (*a, b.clone())).collect() }
}

/// `p_r k p_s`
pub fn corner(k: &KernelElement, r: i64, s: i64) -> KernelElement {
    right_corner(&left_corner(k, r), s)
}

/// `β_t(k)(r, s) = k(rt, st)`
pub fn beta_shift(k: &KernelElement, t: i64) -> KernelElement {
    KernelElement { entries: shift_blocks(&k.entries, t) }
}

/// `α_t(f)(r, x, s, y) = f(rt, x, st, y)`
pub fn alpha_shift(f: &GroupoidFunction, t: i64) -> GroupoidFunction {
    GroupoidFunction { blocks: shift_blocks(&f.blocks, t) }
}

/// `‖k‖² = Σ_{r,s} ‖k(r, s)‖²` with the sup norm on each entry.
pub fn norm_squared(k: &KernelElement) -> BigRational {
    k.entries.values().fold(BigRational::zero(), |acc, v| acc + v.sup_norm_sqr())
}

/// Signs `ε ∈ {1, −1}` with `ψ ∘ α_t = β_{εt} ∘ ψ` on `f`.
pub fn equivariance_signs(alg: &Algebra<'_>, f: &GroupoidFunction, t: i64) -> Result<Vec<i64>, ConvolutionError> {
    let lhs = alg.psi(&alpha_shift(f, t))?;
    let image = alg.psi(f)?;
    Ok([1, -1].into_iter().filter(|&e| beta_shift(&image, e * t) == lhs).collect())
}

/// Parameters of the randomized identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub shape: crate::sampling::ElementShape,
}

/// The first failing identity with the elements that broke it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub identity: &'static str,
    pub f: GroupoidFunction,
    pub g: GroupoidFunction,
    pub lhs: KernelElement,
    pub rhs: KernelElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub trials: usize,
    pub seed: u64,
    pub passed: usize,
    pub failure: Option<Counterexample>,
    /// Signs compatible with every tested `ψ ∘ α_t = β_{εt} ∘ ψ`.
    pub equivariance_signs: Vec<i64>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks `ψ(f*g) = ψ(f)ψ(g)`, `ψ(f*) = ψ(f)*` and `ψ⁻¹ψ(f) = f` on random
/// pairs drawn from `ChaCha8Rng::seed_from_u64(seed)`, stopping at the first
/// failure.
pub fn identity_suite(alg: &Algebra<'_>, config: SuiteConfig) -> Result<SuiteReport, ConvolutionError> {
    use rand::SeedableRng;
    use crate::sampling::random_groupoid_function;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = SuiteReport {
        trials: config.trials,
        seed: config.seed,
        passed: 0,
        failure: None,
        equivariance_signs: vec![1, -1],
    };
    for trial in 0..config.trials {
        let f = random_groupoid_function(&mut rng, alg, config.shape)?;
        let g = random_groupoid_function(&mut rng, alg, config.shape)?;
        let (pf, pg) = (alg.psi(&f)?, alg.psi(&g)?);
        let fail = |identity, lhs, rhs| Counterexample { trial, identity, f: f.clone(), g: g.clone(), lhs, rhs };
        let lhs = alg.psi(&alg.cc_convolve(&f, &g)?)?;
        let rhs = alg.kernel_multiply(&pf, &pg)?;
        if lhs != rhs {
            report.failure = Some(fail("psi(f*g) = psi(f)psi(g)", lhs, rhs));
            break;
        }
        let lhs = alg.psi(&alg.cc_involution(&f)?)?;
        let rhs = alg.kernel_involution(&pf)?;
        if lhs != rhs {
            report.failure = Some(fail("psi(f^*) = psi(f)^*", lhs, rhs));
            break;
        }
        if alg.psi_inverse(&pf)? != f {
            report.failure = Some(fail("psi^-1(psi(f)) = f", pf.clone(), alg.psi(&alg.psi_inverse(&pf)?)?));
            break;
        }
        for t in [-1, 1] {
            let signs = equivariance_signs(alg, &f, t)?;
            report.equivariance_signs.retain(|e| signs.contains(e));
        }
        report.passed += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(s: &str) -> PiecewiseConstant {
        PiecewiseConstant::indicator(&s.parse().unwrap())
    }

    fn flip() -> ZPartialAction {
        ZPartialAction::from_map("[0->1]".parse().unwrap())
    }

    #[test]
    fn convolution_examples() {
        let a = flip();
        let alg = Algebra::new(&a, None);
        let f = GroupoidFunction::single(1, 0, ind("{0}"));
        let g = GroupoidFunction::single(0, 1, ind("{1}"));
        assert_eq!(alg.cc_convolve(&f, &g).unwrap(), GroupoidFunction::single(1, 1, ind("{0}")));
        // blocks (0,1) and (1,2): the product lands in (0,2), whose domain X_2 is empty
        let f = GroupoidFunction::single(0, 1, ind("{1}"));
        let g = GroupoidFunction::single(1, 2, ind("{1}"));
        assert!(alg.cc_convolve(&f, &g).unwrap().is_zero());
        assert!(alg.cc_convolve(&f, &GroupoidFunction::zero()).unwrap().is_zero());
        let bad = GroupoidFunction::single(1, 2, ind("{0}"));
        assert!(matches!(alg.cc_convolve(&f, &bad), Err(ConvolutionError::SupportViolation { r: 1, s: 2, .. })));
    }

    #[test]
    fn involution_examples() {
        let a = flip();
        let alg = Algebra::new(&a, None);
        let f = GroupoidFunction::single(1, 0, ind("{0}"));
        let star = alg.cc_involution(&f).unwrap();
        assert_eq!(star, GroupoidFunction::single(0, 1, ind("{1}")));
        assert_eq!(alg.cc_involution(&star).unwrap(), f);
        let diag = GroupoidFunction::single(2, 2, ind("{01}").scale(&Scalar::real(3)));
        assert_eq!(alg.cc_involution(&diag).unwrap(), diag);
    }

    #[test]
    fn kernel_examples() {
        let a = flip();
        let alg = Algebra::new(&a, None);
        let k1 = KernelElement::single(0, -1, ind("{1}"));
        let k2 = KernelElement::single(-1, 0, ind("{0}"));
        assert_eq!(alg.kernel_multiply(&k1, &k2).unwrap(), KernelElement::single(0, 0, ind("{1}")));
        let k3 = KernelElement::single(2, 2, ind("{ε}"));
        assert!(alg.kernel_multiply(&k1, &k3).unwrap().is_zero());
    }

    #[test]
    fn psi_examples() {
        let a = flip();
        let alg = Algebra::new(&a, None);
        let f = GroupoidFunction::single(0, 1, ind("{1}"));
        let k = alg.psi(&f).unwrap();
        assert_eq!(k, KernelElement::single(0, -1, ind("{1}")));
        assert_eq!(alg.psi_inverse(&k).unwrap(), f);
        assert!(alg.psi(&GroupoidFunction::zero()).unwrap().is_zero());
    }

    #[test]
    fn corners_shifts_norms() {
        let k = KernelElement::new([((0, 0), ind("{ε}")), ((0, 1), ind("{0}"))]);
        assert_eq!(corner(&k, 0, 1), KernelElement::single(0, 1, ind("{0}")));
        assert_eq!(corner(&k, 0, 0).add(&corner(&k, 0, 1)), k);
        let moved = beta_shift(&KernelElement::single(0, 1, ind("{0}")), 1);
        assert_eq!(moved, KernelElement::single(-1, 0, ind("{0}")));
        assert_eq!(beta_shift(&k, 0), k);
        assert_eq!(norm_squared(&KernelElement::single(0, 0, ind("{ε}"))), BigRational::from_integer(1.into()));
        let two = KernelElement::new([
            ((0, 0), ind("{ε}")),
            ((1, 1), PiecewiseConstant::from_pieces([("0".parse().unwrap(), Scalar::real(2)), ("1".parse().unwrap(), Scalar::real(1))])),
        ]);
        assert_eq!(norm_squared(&two), BigRational::from_integer(5.into()));
        assert_eq!(norm_squared(&beta_shift(&two, 3)), norm_squared(&two));
    }

    #[test]
    fn json_shape() {
        let f = GroupoidFunction::single(1, 0, ind("{0}").scale(&Scalar::from_parts(1, 2, -1, 3)));
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"[[[1,0],{"0":"1/2-1/3 i"}]]"#);
        let back: GroupoidFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }
}
