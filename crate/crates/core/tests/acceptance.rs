//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{all_units, brute_classes, odometer_related, Unit};
use envelope_core::convolution::{
    alpha_shift, beta_shift, corner, equivariance_signs, identity_suite, left_corner, right_corner, Algebra,
    KernelElement, SuiteConfig,
};
use envelope_core::envelope::{
    diagonal_probe, etale_probe, groupoid_probe, hausdorff_decide, nonseparable_pair, related,
    HausdorffCertificate,
};
use envelope_core::filtration::{
    adapted_depth, bratteli_build, inclusion_violation, inclusion_witness, truncated_relation, BratteliDiagram,
    Exhaustion, Schedule,
};
use envelope_core::partial_action::axioms_check;
use envelope_core::sampling::{
    random_composable_triple, random_groupoid_function, random_kernel, random_prefix_map, random_related_pair,
    ElementShape,
};
use envelope_core::{ClopenSet, GeneratedMap, Point, PrefixMap, ZPartialAction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const AXIOM_BOUND: i64 = 4;
const RANDOM_MAPS: usize = 50;
const RANDOM_MAP_DEPTH: usize = 4;
const CRITERION_1_BUDGET: Duration = Duration::from_secs(10);
const CLOPEN_BOUND: i64 = 6;
const WITNESS_DEPTH: usize = 10;
const CONVERGENCE_DEPTH: usize = 8;
const ETALE_BOUND: i64 = 3;
const GROUPOID_SAMPLES: usize = 1000;
const INCLUSION_SAMPLES: usize = 100;
const INCLUSION_BOUND: i64 = 4;
const MAX_DESCRIPTION: usize = 8;
const MAX_SAMPLING_LEVEL: usize = 5;
const INCLUSION_CAP: usize = 64;
const FILTRATION_MAX: usize = 3;
const BRATTELI_LEVELS: usize = 4;
const PSI_TRIALS: usize = 500;
const PSI_SHAPE: ElementShape = ElementShape { support: 3, depth: 6, max_blocks: 3 };
const ODOMETER_ALGEBRA_LEVEL: usize = 2;
const CRITERION_7_BUDGET: Duration = Duration::from_secs(60);
const EQUIVARIANCE_ELEMENTS: usize = 100;
const EQUIVARIANCE_SHIFT: i64 = 3;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn flip() -> ZPartialAction {
    ZPartialAction::from_map("[0->1]".parse().unwrap())
}

fn odometer() -> ZPartialAction {
    ZPartialAction::from_generated(GeneratedMap::odometer())
}

fn random_maps() -> Vec<PrefixMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..RANDOM_MAPS).map(|_| random_prefix_map(&mut rng, RANDOM_MAP_DEPTH)).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let odo = GeneratedMap::odometer();
    let actions = random_maps().into_iter().chain((0..=3).map(|k| odo.truncation(k)));
    for m in actions {
        let family = ZPartialAction::from_map(m.clone()).family(AXIOM_BOUND, None).map_err(|e| e.to_string())?;
        let violations = axioms_check(&family);
        ensure(violations.is_empty(), || format!("{m}: {:?}", violations[0]))?;
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < CRITERION_1_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} families, N = {AXIOM_BOUND}, zero violations in {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let mut maps = random_maps();
    maps.push("[0->1]".parse().unwrap());
    for m in &maps {
        let a = ZPartialAction::from_map(m.clone());
        let cert = hausdorff_decide(&a, CLOPEN_BOUND, WITNESS_DEPTH).map_err(|e| e.to_string())?;
        ensure(cert == HausdorffCertificate::Clopen { bound: CLOPEN_BOUND }, || format!("{m}: {cert:?}"))?;
        for t in -CLOPEN_BOUND..=CLOPEN_BOUND {
            let x = a.domain(t, None).map_err(|e| e.to_string())?;
            ensure(ClopenSet::normalize(x.words().to_vec()) == x, || format!("X_{t} of {m} not canonical"))?;
        }
    }
    let odo = odometer();
    let cert = hausdorff_decide(&odo, CLOPEN_BOUND, WITNESS_DEPTH).map_err(|e| e.to_string())?;
    let expected = HausdorffCertificate::NonClopenWitness { t: -1, point: Point::max() };
    ensure(cert == expected, || format!("odometer: {cert:?}"))?;
    let pair = nonseparable_pair(&odo, -1, WITNESS_DEPTH).map_err(|e| e.to_string())?;
    ensure(pair.approach_related(&odo).map_err(|e| e.to_string())?, || "approach pair not related".into())?;
    ensure(pair.converges_to_depth(CONVERGENCE_DEPTH), || "approach does not converge".into())?;
    Ok(format!(
        "{} clopen systems, |t| <= {CLOPEN_BOUND}; odometer witness (-1, (1)), pair [{}], [{}]",
        maps.len(),
        pair.first,
        pair.second
    ))
}

fn criterion_3() -> Outcome {
    let mut opens = 0;
    for (a, level) in [(flip(), None), (odometer(), Some(1))] {
        for t in -ETALE_BOUND..=ETALE_BOUND {
            for s in -ETALE_BOUND..=ETALE_BOUND {
                let domain = a.domain(s - t, level).map_err(|e| e.to_string())?;
                let mut bases = vec![domain.clone()];
                bases.extend(domain.words().iter().map(|w| ClopenSet::cylinder(w.clone())));
                let fine = domain.refine_to_depth(domain.max_len() + 2).map_err(|e| e.to_string())?;
                bases.extend(fine.into_iter().map(ClopenSet::cylinder));
                for base in bases {
                    let r = etale_probe(&a, level, t, s, &base).map_err(|e| e.to_string())?;
                    ensure(r.is_ok(), || format!("({t},{base},{s}): {r:?}"))?;
                    opens += 1;
                }
            }
        }
        ensure(diagonal_probe(&a, level, ETALE_BOUND).map_err(|e| e.to_string())?, || "diagonal".into())?;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let samples = (0..GROUPOID_SAMPLES)
            .map(|_| random_composable_triple(&mut rng, &a, level, ETALE_BOUND, MAX_DESCRIPTION))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let report = groupoid_probe(&a, level, &samples).map_err(|e| e.to_string())?;
        ensure(report.violations.is_empty(), || report.violations[0].clone())?;
        ensure(report.associative_triples == GROUPOID_SAMPLES, || format!("{report:?}"))?;
    }
    Ok(format!("{opens} basic opens bijective; 2 x {GROUPOID_SAMPLES} groupoid samples, zero violations"))
}

fn criterion_4() -> Outcome {
    let e = Exhaustion::new(GeneratedMap::odometer());
    let odo = odometer();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_k = 0;
    for _ in 0..INCLUSION_SAMPLES {
        let level = rng.gen_range(0..=MAX_SAMPLING_LEVEL);
        let (p, q) = random_related_pair(&mut rng, &odo, Some(level), INCLUSION_BOUND, MAX_DESCRIPTION)
            .map_err(|e| e.to_string())?;
        let k = inclusion_witness(&e, p.index, &p.point, q.index, &q.point, INCLUSION_CAP)
            .map_err(|err| format!("{p} ~ {q}: {err}"))?;
        ensure(k <= level, || format!("{p} ~ {q}: K = {k} above sampling level {level}"))?;
        ensure(related(&odo, Some(k), &p, &q).map_err(|e| e.to_string())?, || format!("{p} !~ {q} at {k}"))?;
        if k > 0 {
            let below = related(&odo, Some(k - 1), &p, &q).map_err(|e| e.to_string())?;
            ensure(!below, || format!("{p} ~ {q} already at level {}", k - 1))?;
        }
        max_k = max_k.max(k);
    }
    let mut pairs = 0;
    for k in 0..=FILTRATION_MAX {
        for n in 0..=FILTRATION_MAX as i64 {
            let coarse_d = adapted_depth(&e.restrict(k), None, n, 16).map_err(|e| e.to_string())?;
            let fine_d = adapted_depth(&e.restrict(k + 1), None, n + 1, 16).map_err(|e| e.to_string())?.max(coarse_d);
            let coarse = truncated_relation(&e, k, n, coarse_d).map_err(|e| e.to_string())?;
            let fine = truncated_relation(&e, k + 1, n + 1, fine_d).map_err(|e| e.to_string())?;
            let bad = inclusion_violation(&coarse, &fine);
            ensure(bad.is_none(), || format!("k={k} n={n}: {bad:?}"))?;
            pairs += coarse.classes.iter().map(|c| c.len() * c.len()).sum::<usize>();
        }
    }
    Ok(format!("{INCLUSION_SAMPLES} witnesses (max K = {max_k}); {pairs} related unit pairs kept under inclusion"))
}

fn engine_classes(e: &Exhaustion, k: usize, n: i64, d: usize) -> Result<BTreeSet<BTreeSet<Unit>>, String> {
    Ok(truncated_relation(e, k, n, d)
        .map_err(|e| e.to_string())?
        .class_units()
        .into_iter()
        .map(|c| c.into_iter().collect())
        .collect())
}

fn criterion_5() -> Outcome {
    let flip_e = Exhaustion::new(GeneratedMap::explicit(vec!["0->1".parse().unwrap()]).unwrap());
    let engine = engine_classes(&flip_e, 0, 1, 1)?;
    let flip_related = |(r, w): &Unit, (s, w2): &Unit| match r - s {
        0 => w == w2,
        1 => w.bits() == [0] && w2.bits() == [1],
        -1 => w.bits() == [1] && w2.bits() == [0],
        _ => false,
    };
    let oracle = brute_classes(&all_units(1, 1), flip_related);
    let mut sizes: Vec<usize> = engine.iter().map(BTreeSet::len).collect();
    sizes.sort();
    ensure(engine == oracle, || format!("{{0->1}}: engine {engine:?} oracle {oracle:?}"))?;
    ensure(sizes == [1, 1, 2, 2], || format!("{{0->1}} sizes {sizes:?}"))?;
    let e = Exhaustion::new(GeneratedMap::odometer());
    let mut cases = 0;
    for k in 0..=FILTRATION_MAX {
        for n in 0..=FILTRATION_MAX as i64 {
            let d = adapted_depth(&e.restrict(k), None, n, 16).map_err(|e| e.to_string())?;
            let engine = engine_classes(&e, k, n, d)?;
            let oracle = brute_classes(&all_units(n, d), |a, b| odometer_related(k, a, b));
            ensure(engine == oracle, || format!("odometer k={k} n={n} d={d}"))?;
            cases += 1;
        }
    }
    Ok(format!("{{0->1}} at (0,1,1): 4 classes {{2,2,1,1}}; odometer matches oracle on {cases} (k,n) cases"))
}

fn criterion_6() -> Outcome {
    let e = Exhaustion::new(GeneratedMap::odometer());
    let d1 = bratteli_build(&e, &Schedule::Default, BRATTELI_LEVELS).map_err(|e| e.to_string())?;
    let d2 = bratteli_build(&e, &Schedule::Default, BRATTELI_LEVELS).map_err(|e| e.to_string())?;
    let failures = d1.dimension_identity_failures();
    ensure(failures.is_empty(), || format!("identity fails at {failures:?}"))?;
    ensure(d1.levels.len() == BRATTELI_LEVELS, || "level count".into())?;
    ensure(d1.to_json() == d2.to_json() && d1.to_dot() == d2.to_dot(), || "export differs".into())?;
    let json = d1.to_json();
    let reparsed = BratteliDiagram::from_json(&json).map_err(|e| e.to_string())?;
    ensure(reparsed.to_json() == json, || "JSON round trip differs".into())?;
    let vertices: usize = d1.levels.iter().map(|l| l.vertices.len()).sum();
    Ok(format!("{BRATTELI_LEVELS} levels, {vertices} vertices, {} edges; exports byte-identical", d1.edges.len()))
}

fn algebra_systems() -> Vec<(&'static str, ZPartialAction, Option<usize>)> {
    vec![("{0->1}", flip(), None), ("odometer", odometer(), Some(ODOMETER_ALGEBRA_LEVEL))]
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    for (name, a, level) in algebra_systems() {
        let alg = Algebra::new(&a, level);
        let config = SuiteConfig { trials: PSI_TRIALS, seed: SEED, shape: PSI_SHAPE };
        let report = identity_suite(&alg, config).map_err(|e| e.to_string())?;
        ensure(report.ok() && report.passed == PSI_TRIALS, || {
            format!("{name}: {}", serde_json::to_string(&report.failure).unwrap())
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for _ in 0..100 {
            let k = random_kernel(&mut rng, &alg, PSI_SHAPE).map_err(|e| e.to_string())?;
            let mut sum = KernelElement::zero();
            for (r, s) in k.indices() {
                sum = sum.add(&corner(&k, r, s));
            }
            ensure(sum == k, || format!("{name}: corners do not reconstruct"))?;
            // p_t k p_t sits on the diagonal entry with tag δ_0 and is closed under products
            let k2 = random_kernel(&mut rng, &alg, PSI_SHAPE).map_err(|e| e.to_string())?;
            for t in -PSI_SHAPE.support..=PSI_SHAPE.support {
                let c1 = corner(&k, t, t);
                let c2 = corner(&k2, t, t);
                ensure(c1.indices().all(|ix| ix == (t, t)), || format!("{name}: corner ({t},{t})"))?;
                let x = alg.domain(0).map_err(|e| e.to_string())?;
                ensure(c1.iter().all(|(_, f)| f.support().is_subset(&x)), || "support".into())?;
                let prod = alg.kernel_multiply(&c1, &c2).map_err(|e| e.to_string())?;
                ensure(prod.indices().all(|ix| ix == (t, t)), || format!("{name}: corner product"))?;
                ensure(right_corner(&left_corner(&k, t), t) == c1, || "L/R".into())?;
            }
        }
        details.push(format!("{name} {}/{PSI_TRIALS}", report.passed));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < CRITERION_7_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("psi multiplicative and *-preserving: {} in {elapsed:.2?}", details.join(", ")))
}

fn criterion_8() -> Outcome {
    let mut common_signs: Vec<i64> = vec![1, -1];
    for (name, a, level) in algebra_systems() {
        let alg = Algebra::new(&a, level);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut system_signs: Vec<i64> = vec![1, -1];
        for _ in 0..EQUIVARIANCE_ELEMENTS {
            let f = random_groupoid_function(&mut rng, &alg, PSI_SHAPE).map_err(|e| e.to_string())?;
            for t in -EQUIVARIANCE_SHIFT..=EQUIVARIANCE_SHIFT {
                let signs = equivariance_signs(&alg, &f, t).map_err(|e| e.to_string())?;
                system_signs.retain(|s| signs.contains(s));
                // the shifted element stays in the algebra
                alg.check_function(&alpha_shift(&f, t)).map_err(|e| e.to_string())?;
                alg.check_kernel(&beta_shift(&alg.psi(&f).map_err(|e| e.to_string())?, t))
                    .map_err(|e| e.to_string())?;
            }
        }
        ensure(system_signs.len() == 1, || format!("{name}: signs {system_signs:?}"))?;
        common_signs.retain(|s| system_signs.contains(s));
    }
    ensure(common_signs.len() == 1, || format!("signs differ across systems: {common_signs:?}"))?;
    Ok(format!("epsilon = {} on both systems, |t| <= {EQUIVARIANCE_SHIFT}", common_signs[0]))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("partial-action axioms", criterion_1),
        ("Hausdorff certificates", criterion_2),
        ("etale and groupoid structure", criterion_3),
        ("filtration witnesses and inclusion", criterion_4),
        ("truncated relation oracle", criterion_5),
        ("Bratteli dimension identity", criterion_6),
        ("psi at finite support", criterion_7),
        ("equivariance sign", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
