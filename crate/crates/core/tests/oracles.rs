//! Independent recomputations of the cell relation and Bratteli diagrams.

mod common;

use std::collections::BTreeSet;

use common::{all_units, brute_classes, odometer_related, Unit};
use envelope_core::filtration::{
    adapted_depth, bratteli_build, inclusion_violation, truncated_relation, Exhaustion, Schedule,
};
use envelope_core::{GeneratedMap, Word};

fn engine_classes(e: &Exhaustion, k: usize, n: i64, d: usize) -> BTreeSet<BTreeSet<Unit>> {
    truncated_relation(e, k, n, d)
        .unwrap()
        .class_units()
        .into_iter()
        .map(|c| c.into_iter().collect())
        .collect()
}

#[test]
fn flip_classes_match_brute_force() {
    let e = Exhaustion::new(GeneratedMap::explicit(vec!["0->1".parse().unwrap()]).unwrap());
    // {0 -> 1} on cells of depth 1: only [0] moves, onto [1]
    let related = |(r, w): &Unit, (s, w2): &Unit| match r - s {
        0 => w == w2,
        1 => w.bits() == [0] && w2.bits() == [1],
        -1 => w.bits() == [1] && w2.bits() == [0],
        _ => false,
    };
    let oracle = brute_classes(&all_units(1, 1), related);
    let engine = engine_classes(&e, 0, 1, 1);
    assert_eq!(engine, oracle);
    let mut sizes: Vec<usize> = engine.iter().map(BTreeSet::len).collect();
    sizes.sort();
    assert_eq!(sizes, vec![1, 1, 2, 2]);
}

#[test]
fn odometer_classes_match_integer_oracle() {
    let e = Exhaustion::new(GeneratedMap::odometer());
    for k in 0..=3 {
        for n in 0..=3 {
            let d = adapted_depth(&e.restrict(k), None, n, 16).unwrap();
            assert!(d > k || n == 0);
            let oracle = brute_classes(&all_units(n, d), |a, b| odometer_related(k, a, b));
            assert_eq!(engine_classes(&e, k, n, d), oracle, "k={k} n={n} d={d}");
        }
    }
}

#[test]
fn adapted_depth_is_least() {
    let e = Exhaustion::new(GeneratedMap::odometer());
    for k in 0..=3 {
        for n in 1..=3 {
            let d = adapted_depth(&e.restrict(k), None, n, 16).unwrap();
            assert!(truncated_relation(&e, k, n, d).is_ok());
            assert!(truncated_relation(&e, k, n, d - 1).is_err());
        }
    }
}

#[test]
fn monotone_inclusion() {
    let e = Exhaustion::new(GeneratedMap::odometer());
    for k in 0..=3 {
        for n in 0..=3i64 {
            let d = adapted_depth(&e.restrict(k), None, n, 16).unwrap();
            let d2 = adapted_depth(&e.restrict(k + 1), None, n + 1, 16).unwrap().max(d);
            let coarse = truncated_relation(&e, k, n, d).unwrap();
            let fine = truncated_relation(&e, k + 1, n + 1, d2).unwrap();
            assert_eq!(inclusion_violation(&coarse, &fine), None, "k={k} n={n}");
        }
    }
}

#[test]
fn deeper_cells_only_duplicate_classes() {
    let e = Exhaustion::new(GeneratedMap::odometer());
    for k in 0..=2 {
        for n in 1..=2i64 {
            let d = adapted_depth(&e.restrict(k), None, n, 16).unwrap();
            let base = truncated_relation(&e, k, n, d).unwrap();
            let deeper = truncated_relation(&e, k, n, d + 1).unwrap();
            assert_eq!(deeper.classes.len(), 2 * base.classes.len());
            let mut expected: Vec<usize> = base.class_sizes().into_iter().flat_map(|s| [s, s]).collect();
            let mut got = deeper.class_sizes();
            expected.sort();
            got.sort();
            assert_eq!(got, expected);
        }
    }
}

#[test]
fn bratteli_matches_recomputation() {
    let e = Exhaustion::new(GeneratedMap::odometer());
    let diagram = bratteli_build(&e, &Schedule::Default, 4).unwrap();
    assert_eq!(diagram.levels.len(), 4);
    let mut previous: Option<(Vec<BTreeSet<Unit>>, usize)> = None;
    for level in &diagram.levels {
        let p = level.params;
        assert_eq!((p.k, p.n), (level.m, level.m as i64 + 1));
        let classes: Vec<BTreeSet<Unit>> = {
            let mut c: Vec<_> =
                brute_classes(&all_units(p.n, p.d), |a, b| odometer_related(p.k, a, b)).into_iter().collect();
            c.sort_by_key(|class| {
                let (t, w) = class.iter().next().unwrap().clone();
                (t, w.to_int())
            });
            c
        };
        let sizes: Vec<usize> = classes.iter().map(BTreeSet::len).collect();
        let got: Vec<usize> = level.vertices.iter().map(|v| v.size).collect();
        assert_eq!(got, sizes, "level {}", level.m);
        if let Some((old, old_d)) = &previous {
            for (o, class) in old.iter().enumerate() {
                for (o2, target) in classes.iter().enumerate() {
                    let mut mult = 0;
                    for v in 0..1u64 << (p.d - old_d) {
                        let z = Word::from_int(v, p.d - old_d);
                        if class.iter().all(|(t, w)| target.contains(&(*t, w.concat(&z)))) {
                            mult += 1;
                        }
                    }
                    assert_eq!(diagram.multiplicity((level.m - 1, o), (level.m, o2)), mult);
                }
            }
            for (o2, target) in classes.iter().enumerate() {
                let fresh = target.iter().filter(|(t, _)| t.abs() > p.n - 1).count();
                assert_eq!(level.vertices[o2].fresh, fresh);
            }
        }
        previous = Some((classes, p.d));
    }
    assert!(diagram.dimension_identity_failures().is_empty());
}
