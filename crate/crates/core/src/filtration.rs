//! Clopen exhaustions `U_k` of the domain of a generated map, the restricted
//! actions `θ_k`, cell-level truncations `R_kⁿ` of the envelope relation, and
//! the Bratteli diagrams assembled from them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor_space::{Point, Word};
use crate::partial_action::index::left_quotient;
use crate::partial_action::{ActionError, ZPartialAction};
use crate::prefix_map::GeneratedMap;
use crate::union_find::UnionFind;

/// Largest cell depth `adapted_depth` will consider by default.
pub const DEFAULT_DEPTH_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiltrationError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("depth {depth} is below the adapted depth {required}")]
    DepthTooSmall { depth: usize, required: usize },
    #[error("cell partition did not stabilize within depth {cap}")]
    NotStabilized { cap: usize },
    #[error("no exhaustion level up to {cap} contains the orbit segment")]
    CapExceeded { cap: usize },
    #[error("({r}, {x}) and ({s}, {y}) are not related")]
    NotRelated { r: i64, x: Point, s: i64, y: Point },
    #[error("cell relation is not transitive: {0}")]
    NotEquivalence(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("diagram parse error: {0}")]
    Parse(String),
}

/// `U_0 ⊆ U_1 ⊆ …`, where `U_k` is the domain of the first `count(k)` rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exhaustion {
    generated: GeneratedMap,
    counts: Option<Vec<usize>>,
}

impl Exhaustion {
    /// `U_k` = union of the first `k + 1` rule cylinders.
    pub fn new(generated: GeneratedMap) -> Self {
        Exhaustion { generated, counts: None }
    }

    /// Explicit rule counts per level; levels past the list reuse its last
    /// entry plus one per level.
    pub fn with_counts(generated: GeneratedMap, counts: Vec<usize>) -> Result<Self, FiltrationError> {
        if counts.first() == Some(&0) || counts.windows(2).any(|w| w[0] > w[1]) {
            return Err(FiltrationError::Schedule(format!("rule counts must be positive and nondecreasing: {counts:?}")));
        }
        Ok(Exhaustion { generated, counts: Some(counts) })
    }

    pub fn generated(&self) -> &GeneratedMap {
        &self.generated
    }

    pub fn rule_count(&self, k: usize) -> usize {
        let n = match self.counts.as_deref() {
            None | Some([]) => k + 1,
            Some(c) => match c.get(k) {
                Some(&n) => n,
                None => c[c.len() - 1] + (k + 1 - c.len()),
            },
        };
        match self.generated.rule_count() {
            Some(total) => n.min(total),
            None => n,
        }
    }

    /// `θ_k`, the clopen action generated by the rules making up `U_k`.
    pub fn restrict(&self, k: usize) -> ZPartialAction {
        ZPartialAction::from_map(self.generated.truncation(self.rule_count(k) - 1))
    }

    /// Least level whose rules include rule `index`.
    fn level_of_rule(&self, index: usize, cap: usize) -> Option<usize> {
        (0..=cap).find(|&k| self.rule_count(k) > index)
    }
}

/// Least `K ≤ cap` with `(r,x,s,y) ∈ R_K`: every point of the orbit segment
/// from `x` to `y` is moved by a rule of `U_K`.
pub fn inclusion_witness(
    e: &Exhaustion,
    r: i64,
    x: &Point,
    s: i64,
    y: &Point,
    cap: usize,
) -> Result<usize, FiltrationError> {
    let g = e.generated();
    let steps = left_quotient(s, r);
    let inverse = steps < 0;
    let mut current = x.clone();
    let mut needed = 0usize;
    let not_related = || FiltrationError::NotRelated { r, x: x.clone(), s, y: y.clone() };
    let rule_cap = e.rule_count(cap).saturating_sub(1);
    for _ in 0..steps.unsigned_abs() {
        let Some(i) = g.rule_index(&current, inverse, rule_cap) else {
            // either outside the full domain or beyond the cap
            return Err(if g.rule_index(&current, inverse, rule_cap + 64).is_some() {
                FiltrationError::CapExceeded { cap }
            } else {
                not_related()
            });
        };
        needed = needed.max(i);
        current = if inverse {
            g.apply_inverse_point(&current, i).expect("rule found")
        } else {
            g.apply_point(&current, i).expect("rule found")
        };
    }
    if current != *y {
        return Err(not_related());
    }
    let k = e.level_of_rule(needed, cap).ok_or(FiltrationError::CapExceeded { cap })?;
    let holds = crate::envelope::related(
        &e.restrict(k),
        None,
        &crate::envelope::GermPair::new(r, x.clone()),
        &crate::envelope::GermPair::new(s, y.clone()),
    )?;
    if !holds {
        return Err(not_related());
    }
    Ok(k)
}

/// Least `d ≤ cap` such that every `X_t` with `|t| ≤ 2n` is a union of
/// depth-`d` cells and every `h_t` with `|t| ≤ n` carries depth-`d` cells onto
/// depth-`d` cells.
///
/// Same-sign powers compose exactly, so `h_t` for `n < |t| ≤ 2n` then also
/// maps cells to cells.
pub fn adapted_depth(a: &ZPartialAction, level: Option<usize>, n: i64, cap: usize) -> Result<usize, FiltrationError> {
    let n = n.abs();
    let mut d = 0usize;
    for t in -2 * n..=2 * n {
        d = d.max(a.domain(t, level)?.max_len());
    }
    for t in -n..=n {
        let h = a.map(t, level)?;
        if !h.is_length_preserving() {
            return Err(FiltrationError::NotStabilized { cap });
        }
        d = d.max(h.rules().map(|r| r.source.len()).max().unwrap_or(0));
    }
    if d > cap {
        return Err(FiltrationError::NotStabilized { cap });
    }
    Ok(d)
}

/// The cell-level relation on `{(t, w) : |t| ≤ n, |w| = d}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedRelation {
    pub k: Option<usize>,
    pub n: i64,
    pub d: usize,
    /// Ordered by index, then lexicographically by cell.
    pub units: Vec<(i64, Word)>,
    /// Unit positions per class, classes ordered by least member.
    pub classes: Vec<Vec<usize>>,
}

impl TruncatedRelation {
    pub fn unit_position(&self, t: i64, w: &Word) -> Option<usize> {
        if t.abs() > self.n || w.len() != self.d {
            return None;
        }
        let per_index = 1usize << self.d;
        Some((t + self.n) as usize * per_index + w.to_int() as usize)
    }

    pub fn class_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.units.len()];
        for (c, members) in self.classes.iter().enumerate() {
            for &u in members {
                out[u] = c;
            }
        }
        out
    }

    pub fn class_units(&self) -> Vec<Vec<(i64, Word)>> {
        self.classes
            .iter()
            .map(|c| c.iter().map(|&u| self.units[u].clone()).collect())
            .collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

fn cells(d: usize) -> Vec<Word> {
    // ordered so that a cell's position equals its integer value
    (0..1u64 << d).map(|v| Word::from_int(v, d)).collect()
}

/// Builds the cell relation of `a` at `level` and checks it is an
/// equivalence before closing it under union-find.
pub fn cell_relation(
    a: &ZPartialAction,
    level: Option<usize>,
    n: i64,
    d: usize,
) -> Result<TruncatedRelation, FiltrationError> {
    let n = n.abs();
    let required = adapted_depth(a, level, n, d.max(DEFAULT_DEPTH_CAP))?;
    if d < required {
        return Err(FiltrationError::DepthTooSmall { depth: d, required });
    }
    let words = cells(d);
    let mut units = Vec::with_capacity((2 * n as usize + 1) * words.len());
    for t in -n..=n {
        for w in &words {
            units.push((t, w.clone()));
        }
    }
    let mut rel = TruncatedRelation { k: level, n, d, units, classes: Vec::new() };
    let mut direct = std::collections::BTreeSet::new();
    for r in -n..=n {
        for s in -n..=n {
            let domain = a.domain(left_quotient(r, s), level)?;
            let h = a.map(left_quotient(s, r), level)?;
            for w in &words {
                if !domain.contains_word(w) {
                    continue;
                }
                let image = h.cell_image(w).expect("cell inside the domain");
                let i = rel.unit_position(r, w).expect("unit");
                let j = rel.unit_position(s, &image).expect("cell image has depth d");
                direct.insert((i, j));
            }
        }
    }
    let mut uf = UnionFind::new(rel.units.len());
    for &(i, j) in &direct {
        uf.union(i, j);
    }
    rel.classes = uf.classes();
    for class in &rel.classes {
        for &i in class {
            for &j in class {
                if !direct.contains(&(i, j)) {
                    let (r, w) = &rel.units[i];
                    let (s, w2) = &rel.units[j];
                    return Err(FiltrationError::NotEquivalence(format!("({r},{w}) and ({s},{w2})")));
                }
            }
        }
    }
    Ok(rel)
}

/// `R_kⁿ` at depth `d`.
pub fn truncated_relation(e: &Exhaustion, k: usize, n: i64, d: usize) -> Result<TruncatedRelation, FiltrationError> {
    let mut rel = cell_relation(&e.restrict(k), None, n, d)?;
    rel.k = Some(k);
    Ok(rel)
}

/// Every related pair of `coarse` stays related in `fine` after refining
/// cells to the finer depth. Returns the first pair that does not.
pub fn inclusion_violation(
    coarse: &TruncatedRelation,
    fine: &TruncatedRelation,
) -> Option<((i64, Word), (i64, Word))> {
    if fine.d < coarse.d || fine.n < coarse.n {
        return coarse.units.first().map(|u| (u.clone(), u.clone()));
    }
    let fine_class = fine.class_of();
    let extensions = cells(fine.d - coarse.d);
    for class in &coarse.classes {
        for &i in class {
            for &j in class {
                let (r, w) = &coarse.units[i];
                let (s, w2) = &coarse.units[j];
                for z in &extensions {
                    let a = fine.unit_position(*r, &w.concat(z)).expect("refined unit");
                    let b = fine.unit_position(*s, &w2.concat(z)).expect("refined unit");
                    if fine_class[a] != fine_class[b] {
                        return Some(((*r, w.clone()), (*s, w2.clone())));
                    }
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelParams {
    pub k: usize,
    pub n: i64,
    pub d: usize,
}

/// `m ↦ (k(m), n(m), d(m))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    /// `m ↦ (m, m + 1, adapted depth)`, depths kept nondecreasing.
    Default,
    Explicit(Vec<LevelParams>),
}

impl Schedule {
    /// Resolves the first `levels` triples, filling in adapted depths.
    pub fn resolve(&self, e: &Exhaustion, levels: usize) -> Result<Vec<LevelParams>, FiltrationError> {
        let out = match self {
            Schedule::Default => {
                let mut out: Vec<LevelParams> = Vec::with_capacity(levels);
                for m in 0..levels {
                    let n = m as i64 + 1;
                    let d = adapted_depth(&e.restrict(m), None, n, DEFAULT_DEPTH_CAP)?;
                    let d = out.last().map_or(d, |p| d.max(p.d));
                    out.push(LevelParams { k: m, n, d });
                }
                out
            }
            Schedule::Explicit(list) => {
                if list.len() < levels {
                    return Err(FiltrationError::Schedule(format!(
                        "{} levels requested but the schedule has {}",
                        levels,
                        list.len()
                    )));
                }
                list[..levels].to_vec()
            }
        };
        for w in out.windows(2) {
            if w[1].k < w[0].k || w[1].n < w[0].n || w[1].d < w[0].d {
                return Err(FiltrationError::Schedule(format!("not nondecreasing: {:?} then {:?}", w[0], w[1])));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub size: usize,
    pub fresh: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub m: usize,
    pub params: LevelParams,
    pub vertices: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub mult: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BratteliDiagram {
    pub levels: Vec<Level>,
    pub edges: Vec<Edge>,
}

/// Levels `0..levels` of the diagram of `schedule`.
pub fn bratteli_build(e: &Exhaustion, schedule: &Schedule, levels: usize) -> Result<BratteliDiagram, FiltrationError> {
    let params = schedule.resolve(e, levels)?;
    let relations = params
        .iter()
        .map(|p| truncated_relation(e, p.k, p.n, p.d))
        .collect::<Result<Vec<_>, _>>()?;
    let mut diagram = BratteliDiagram::default();
    for (m, rel) in relations.iter().enumerate() {
        let vertices = rel
            .classes
            .iter()
            .enumerate()
            .map(|(id, c)| Vertex { id, size: c.len(), fresh: c.len() })
            .collect();
        diagram.levels.push(Level { m, params: params[m], vertices });
    }
    for m in 0..relations.len().saturating_sub(1) {
        let (coarse, fine) = (&relations[m], &relations[m + 1]);
        let fine_class = fine.class_of();
        let extensions = cells(fine.d - coarse.d);
        let mut mult = vec![vec![0usize; fine.classes.len()]; coarse.classes.len()];
        for (o, class) in coarse.classes.iter().enumerate() {
            for z in &extensions {
                let targets: std::collections::BTreeSet<usize> = class
                    .iter()
                    .map(|&u| {
                        let (t, w) = &coarse.units[u];
                        fine_class[fine.unit_position(*t, &w.concat(z)).expect("refined unit")]
                    })
                    .collect();
                let [target] = targets.into_iter().collect::<Vec<_>>()[..] else {
                    return Err(FiltrationError::Schedule(format!(
                        "a refined copy of class {o} at level {m} splits at level {}",
                        m + 1
                    )));
                };
                mult[o][target] += 1;
            }
        }
        for (o, row) in mult.iter().enumerate() {
            for (o2, &k) in row.iter().enumerate() {
                if k > 0 {
                    diagram.edges.push(Edge { from: (m, o), to: (m + 1, o2), mult: k });
                }
            }
        }
        for (o2, v) in diagram.levels[m + 1].vertices.iter_mut().enumerate() {
            let inherited: usize = (0..coarse.classes.len()).map(|o| mult[o][o2] * coarse.classes[o].len()).sum();
            v.fresh = v.size - inherited;
        }
    }
    Ok(diagram)
}

impl BratteliDiagram {
    pub fn multiplicity(&self, from: (usize, usize), to: (usize, usize)) -> usize {
        self.edges
            .iter()
            .find(|e| e.from == from && e.to == to)
            .map_or(0, |e| e.mult)
    }

    /// Levels at which `size(O′) = Σ mult(O→O′)·size(O) + fresh(O′)` fails.
    pub fn dimension_identity_failures(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (m, level) in self.levels.iter().enumerate() {
            for v in &level.vertices {
                let inherited: usize = match m.checked_sub(1) {
                    None => 0,
                    Some(prev) => self.levels[prev]
                        .vertices
                        .iter()
                        .map(|o| self.multiplicity((prev, o.id), (m, v.id)) * o.size)
                        .sum(),
                };
                if v.size != inherited + v.fresh {
                    out.push((m, v.id));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FiltrationError> {
        serde_json::from_str(text).map_err(|e| FiltrationError::Parse(e.to_string()))
    }

    /// Ranks top to bottom by level; multiplicity-zero edges never appear.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph bratteli {\n  rankdir=TB;\n");
        for level in &self.levels {
            let _ = write!(s, "  {{ rank=same;");
            for v in &level.vertices {
                let _ = write!(s, " v{}_{} [label=\"{}\"];", level.m, v.id, v.size);
            }
            s.push_str(" }\n");
        }
        for e in self.edges.iter().filter(|e| e.mult > 0) {
            let _ = writeln!(s, "  v{}_{} -> v{}_{} [label=\"{}\"];", e.from.0, e.from.1, e.to.0, e.to.1, e.mult);
        }
        s.push_str("}\n");
        s
    }
}
