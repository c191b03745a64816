//! Brute-force oracles shared by the integration tests.
//!
//! The odometer oracle works on integers: a depth-`d` cell is a residue
//! `v mod 2^d` read little-endian, and the level-`k` generator adds one when
//! some of the low `k + 1` bits is zero.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use envelope_core::Word;

pub type Unit = (i64, Word);

pub fn odometer_step(v: u64, k: usize, d: usize, forward: bool) -> Option<u64> {
    let low = v & ((1 << (k + 1)) - 1);
    let modulus = 1u64 << d;
    if forward {
        (low != (1 << (k + 1)) - 1).then(|| (v + 1) % modulus)
    } else {
        (low != 0).then(|| (v + modulus - 1) % modulus)
    }
}

/// `h^{r−s}` applied step by step to the integer of `w`.
pub fn odometer_related(k: usize, (r, w): &Unit, (s, w2): &Unit) -> bool {
    let d = w.len();
    let steps = r - s;
    let mut v = w.to_int();
    for _ in 0..steps.unsigned_abs() {
        match odometer_step(v, k, d, steps > 0) {
            Some(next) => v = next,
            None => return false,
        }
    }
    v == w2.to_int()
}

/// Partition by repeated label minimization over the full pairwise relation.
pub fn brute_classes(units: &[Unit], related: impl Fn(&Unit, &Unit) -> bool) -> BTreeSet<BTreeSet<Unit>> {
    let mut label: Vec<usize> = (0..units.len()).collect();
    loop {
        let mut changed = false;
        for i in 0..units.len() {
            for j in 0..units.len() {
                if related(&units[i], &units[j]) && label[j] > label[i] {
                    label[j] = label[i];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut by_label: BTreeMap<usize, BTreeSet<Unit>> = BTreeMap::new();
    for (u, l) in units.iter().zip(label) {
        by_label.entry(l).or_default().insert(u.clone());
    }
    by_label.into_values().collect()
}

pub fn all_units(n: i64, d: usize) -> Vec<Unit> {
    let mut out = Vec::new();
    for t in -n..=n {
        for v in 0..1u64 << d {
            out.push((t, Word::from_int(v, d)));
        }
    }
    out
}

