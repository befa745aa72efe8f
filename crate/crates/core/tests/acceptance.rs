//! Acceptance suite: one PASS/FAIL line per criterion, each under its time
//! budget. Runs as a plain binary so the lines are always printed.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use acqmatch::fixtures;
use acqmatch::generate::{Family, PrefMode, QuotaMode};
use acqmatch::graph::{degeneracy_ordering, is_single_peaked_on_decomposition, is_single_peaked_on_tree};
use acqmatch::mechanisms::{
    b_lt2, b_lt2_on_underlying_tree, b_lt_k_plus_1, deferred_acceptance, sd_degeneracy, BltOptions, MasterList,
    MechanismConfig, SelectionPolicy,
};
use acqmatch::oracle::{
    check_lattice_closure, decide_lee, enumerate_matchings, for_each_feasible, is_pe_by_enumeration,
    reduce_sd_feasibility_to_lee, rural_hospitals_check, sd_feasible_brute_force, verify_strategyproofness, Limits,
    MatchingFilter, SdFeasibility,
};
use acqmatch::properties::{
    is_locally_envy_free, is_locally_stable, is_mutually_best, is_pareto_efficient, pareto_dominates,
};
use acqmatch::{MarketInstance, Matching, StudentId};
use common::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn show(inst: &MarketInstance, y: &Matching) -> String {
    y.display(inst).to_string()
}

fn filter(text: &str) -> MatchingFilter {
    text.parse().expect("valid filter")
}

fn fixture(name: &str) -> MarketInstance {
    fixtures::by_name(name).unwrap_or_else(|| panic!("fixture {name}")).instance
}

fn set(inst: &MarketInstance, ms: &[&[&str]]) -> BTreeSet<Matching> {
    ms.iter().map(|m| inst.matching(m).expect("valid matching")).collect()
}

fn enumerate(inst: &MarketInstance, f: &str) -> Result<BTreeSet<Matching>, String> {
    let e = enumerate_matchings(inst, &filter(f), None, &Limits::default()).map_err(|e| e.to_string())?;
    Ok(e.matchings.into_iter().collect())
}

fn pe_oracle(inst: &MarketInstance, y: &Matching) -> Result<bool, String> {
    is_pe_by_enumeration(inst, y, &Limits::default()).map_err(|e| e.to_string())
}

fn path_market_no_lef_pe() -> Outcome {
    let inst = fixture("path-no-lef-pe");
    let want = set(&inst, &[&["s1", "s2", "s3"], &["s1", "s3", "s2"], &["s2", "s3", "s1"], &["s3", "s2", "s1"]]);
    let got = enumerate(&inst, "pe")?;
    ensure(got == want, || format!("PE set {:?}", got.iter().map(|y| show(&inst, y)).collect::<Vec<_>>()))?;
    // envious student, envied neighbour, per matching in the order above
    let named = [("i3", "i2"), ("i2", "i1"), ("i2", "i3"), ("i1", "i2")];
    let rows = [["s1", "s2", "s3"], ["s1", "s3", "s2"], ["s2", "s3", "s1"], ["s3", "s2", "s1"]];
    for (row, (a, b)) in rows.iter().zip(named) {
        let y = inst.matching(row).unwrap();
        let (a, b) = (inst.student_id(a).unwrap(), inst.student_id(b).unwrap());
        ensure(inst.graph().are_adjacent(a, b) && envies(&inst, &y, a, b), || {
            format!("{row:?}: no envy {a:?}->{b:?}")
        })?;
        ensure(!is_locally_envy_free(&inst, &y), || format!("{row:?} reported LEF"))?;
    }
    let lee = decide_lee(&inst, &Limits::default()).map_err(|e| e.to_string())?;
    ensure(lee.is_none(), || "decide_lee found a matching".into())?;
    Ok("4 PE matchings, each with the expected local envy; no LEF and PE matching".into())
}

fn manipulation_profiles() -> Outcome {
    let cases: [(&str, &[&[&str]]); 3] = [
        ("sp-manipulation-profile1", &[&["s3", "s1", "s2"]]),
        ("sp-manipulation-profile2", &[&["s3", "s1", "s2"], &["s2", "s3", "s1"]]),
        ("sp-manipulation-profile3", &[&["s2", "s3", "s1"]]),
    ];
    let mut witnesses = 0;
    for (name, table) in cases {
        let inst = fixture(name);
        let got = enumerate(&inst, "pe+lef")?;
        ensure(got == set(&inst, table), || format!("{name}: PE and LEF set differs"))?;
        let check = verify_strategyproofness(&inst, &MechanismConfig::BLt2(BltOptions::default()), &Limits::default())
            .map_err(|e| e.to_string())?;
        if let Some(w) = check.witness {
            let misreported = inst.with_student_pref(w.student, &w.misreport);
            let (y, _) = b_lt2(&misreported, &BltOptions::default()).map_err(|e| e.to_string())?;
            ensure(y.school_of(w.student) == w.manipulated_outcome, || format!("{name}: witness does not replay"))?;
            ensure(inst.prefers_outcome(w.student, w.manipulated_outcome, w.honest_outcome), || {
                format!("{name}: witness is not profitable")
            })?;
            witnesses += 1;
        }
    }
    ensure(witnesses > 0, || "no profile admits a manipulation".into())?;
    Ok(format!("table reproduced; manipulable profiles: {witnesses}"))
}

fn locally_top_vs_da() -> Outcome {
    let inst = fixture("blt2-vs-da");
    let da_out = inst.matching(&["s3", "s1", "s4", "s2", "s5"]).unwrap();
    let top_out = inst.matching(&["s2", "s1", "s4", "s3", "s5"]).unwrap();
    ensure(deferred_acceptance(&inst) == da_out, || "DA output differs".into())?;
    let mut policies = vec![SelectionPolicy::Declared];
    policies.extend((0..100).map(SelectionPolicy::Seeded));
    for p in permutations(inst.num_students()) {
        let order = p.into_iter().map(StudentId).collect();
        policies.push(SelectionPolicy::Explicit(MasterList::new(&inst, order).unwrap()));
    }
    for p in &policies {
        let (y, _) = b_lt2(&inst, &BltOptions::with_policy(p.clone())).map_err(|e| e.to_string())?;
        ensure(y == top_out, || format!("{p:?}: got {}", show(&inst, &y)))?;
    }
    ensure(!pareto_dominates(&inst, &top_out, &da_out), || "locally-top output dominates the DA output".into())?;
    for y in [&da_out, &top_out] {
        ensure(is_pareto_efficient(&inst, y).unwrap() && pe_oracle(&inst, y)?, || {
            format!("{} not PE", show(&inst, y))
        })?;
    }
    Ok(format!("both outputs reproduced under {} policies, both PE, no dominance", policies.len()))
}

fn tree_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for t in 0..1000 {
        let (n, m) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let g = gen(&spec(Family::RandomTree, n, m, 1, rng.gen(), PrefMode::SinglePeakedTree, QuotaMode::Unit));
        let inst = &g.instance;
        let (y, _) = b_lt2(inst, &BltOptions::default()).map_err(|e| format!("instance {t}: {e}"))?;
        let ok = pe_oracle(inst, &y)? && locally_envy_free(inst, &y) && is_mutually_best(inst, &y);
        ensure(ok, || format!("instance {t}: {} fails PE/LEF/MB", show(inst, &y)))?;
    }
    Ok("1000 tree markets: no stall, all PE, LEF and MB".into())
}

fn decomposition_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 0..500 {
        let k = rng.gen_range(2..=3);
        let (n, m) = (rng.gen_range(k + 1..=8), rng.gen_range(1..=8));
        let s = spec(Family::PartialKTree, n, m, k, rng.gen(), PrefMode::SinglePeakedDecomposition, QuotaMode::Unit);
        let inst = &gen(&s).instance;
        let (y, _) = b_lt_k_plus_1(inst, k, &BltOptions::default()).map_err(|e| format!("instance {t}: {e}"))?;
        let (_, _, _, local_erf) = envy_levels(inst, &y);
        let ok = pe_oracle(inst, &y)? && local_erf < k && is_mutually_best(inst, &y);
        ensure(ok, || format!("instance {t} (k={k}): {} fails", show(inst, &y)))?;
    }
    Ok("500 partial k-tree markets: all PE, MB, local ERF-(k-1)".into())
}

fn degeneracy_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let config = |reversed| MechanismConfig::SdDegeneracy { reversed };
    let limits = Limits::default();
    let mut reports = 0;
    for t in 0..1000 {
        let n = rng.gen_range(1..=8);
        let (m, quota) = if rng.gen_bool(0.5) {
            (rng.gen_range(1..=8), QuotaMode::Unit)
        } else {
            (rng.gen_range(1..=5), QuotaMode::RandomBounded)
        };
        let inst = random_market(&mut rng, n, m, quota);
        let k = degeneracy_ordering(inst.graph()).k;
        let fwd = sd_degeneracy(&inst, false).matching;
        let rev = sd_degeneracy(&inst, true).matching;
        ensure(envy_levels(&inst, &fwd).3 <= k, || format!("instance {t}: forward local ERF above {k}"))?;
        ensure(envy_levels(&inst, &rev).2 <= k, || format!("instance {t}: reversed local EF above {k}"))?;
        ensure(pe_oracle(&inst, &fwd)? && pe_oracle(&inst, &rev)?, || format!("instance {t}: not PE"))?;

        let (sn, sm) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let small = random_market(&mut rng, sn, sm, QuotaMode::Unit);
        for reversed in [false, true] {
            let check = verify_strategyproofness(&small, &config(reversed), &limits).map_err(|e| e.to_string())?;
            ensure(check.witness.is_none(), || format!("instance {t}: manipulation {:?}", check.witness))?;
            reports += check.reports_tried;
        }
    }
    Ok(format!("1000 random markets within the bounds; {reports} misreports tried, none profitable"))
}

fn bounded_degree_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in 0..300 {
        let k = rng.gen_range(2..=4);
        let (n, m) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let g = gen(&spec(Family::TreePlusChords, n, m, k, rng.gen(), PrefMode::SinglePeakedTree, QuotaMode::Unit));
        let inst = &g.instance;
        let tree = g.tree.as_ref().expect("tree-plus-chords ships its tree");
        let (y, _) =
            b_lt2_on_underlying_tree(inst, tree, &BltOptions::default()).map_err(|e| format!("instance {t}: {e}"))?;
        let (_, _, local_ef, local_erf) = envy_levels(inst, &y);
        let ok = pe_oracle(inst, &y)? && local_ef < k && local_erf < k;
        ensure(ok, || format!("instance {t} (k={k}): {} fails", show(inst, &y)))?;
    }
    Ok("300 tree-plus-chords markets: all PE, local EF and ERF below the degree cap".into())
}

fn lattice_and_size() -> Outcome {
    let limits = Limits::default();
    let start = Instant::now();
    let inst = fixture("lattice-failure");
    let report = check_lattice_closure(&inst, &limits).map_err(|e| e.to_string())?;
    let a = inst.matching(&["s1", "s2", "s3"]).unwrap();
    let b = inst.matching(&["s1", "s3", "s2"]).unwrap();
    let pos = |y: &Matching| report.lef.iter().position(|z| z == y);
    let (Some(x), Some(z)) = (pos(&a), pos(&b)) else { return Err("pair not LEF".into()) };
    ensure(report.no_common_dominator.contains(&(x.min(z), x.max(z))), || "pair has a common dominator".into())?;
    ensure(report.student_optimal.is_none(), || "student-optimal LEF matching exists".into())?;
    let lattice_time = start.elapsed();

    let start = Instant::now();
    let inst = fixture("rural-failure");
    let sizes = rural_hospitals_check(&inst, &limits).map_err(|e| e.to_string())?.lef_pe_sizes();
    ensure(sizes == BTreeSet::from([2, 3]), || format!("sizes {sizes:?}"))?;
    let rural_time = start.elapsed();
    let limit = Duration::from_secs(1);
    ensure(lattice_time < limit && rural_time < limit, || "a regression exceeded 1 s".into())?;
    Ok(format!("no common LEF dominator, no optimum ({lattice_time:.1?}); sizes {{2, 3}} ({rural_time:.1?})"))
}

fn reduction_pair(problem: &SdFeasibility) -> Result<(), String> {
    let reduced = reduce_sd_feasibility_to_lee(problem);
    let inst = &reduced.instance;
    let lee = decide_lee(inst, &Limits::default()).map_err(|e| e.to_string())?.is_some();
    let feasible = sd_feasible_brute_force(problem);
    ensure(lee == feasible, || format!("{problem:?}: LEE {lee}, SD-feasible {feasible}"))?;
    let full = inst.num_students();
    let mut bad = None;
    for_each_feasible(inst, |y| {
        if y.size() == full {
            let contains = y.school_of(reduced.target_student) == Some(reduced.target_school)
                && y.school_of(reduced.extra_student) == Some(reduced.extra_school);
            if locally_envy_free(inst, y) != contains {
                bad = Some(show(inst, y));
                return false;
            }
        }
        true
    });
    ensure(bad.is_none(), || format!("{problem:?}: characterization fails at {bad:?}"))
}

fn problem(prefs: Vec<Vec<usize>>, target: (usize, usize)) -> SdFeasibility {
    let n = prefs.len();
    SdFeasibility::new(
        (1..=n).map(|v| format!("a{v}")).collect(),
        (1..=n).map(|v| format!("o{v}")).collect(),
        prefs,
        target,
    )
    .expect("valid problem")
}

fn reduction_suite() -> Outcome {
    let mut checked = 0;
    for n in 1..=3 {
        let perms = permutations(n);
        let profiles = perms.len().pow(n as u32);
        for code in 0..profiles {
            let mut c = code;
            let prefs: Vec<Vec<usize>> = (0..n)
                .map(|_| {
                    let p = perms[c % perms.len()].clone();
                    c /= perms.len();
                    p
                })
                .collect();
            for a in 0..n {
                for o in 0..n {
                    reduction_pair(&problem(prefs.clone(), (a, o)))?;
                    checked += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let prefs = (0..4)
            .map(|_| {
                let mut p: Vec<usize> = (0..4).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        reduction_pair(&problem(prefs, (rng.gen_range(0..4), rng.gen_range(0..4))))?;
        checked += 1;
    }
    Ok(format!("{checked} SD-feasibility questions agree with the reduced LEE answer"))
}

fn rank_and_degeneracy_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for t in 0..1000 {
        let n = rng.gen_range(1..=12);
        let inst =
            gen(&spec(Family::RandomTree, n, 1, 1, rng.gen(), PrefMode::SinglePeakedTree, QuotaMode::Unit)).instance;
        let pref = inst.school_pref(acqmatch::SchoolId(0));
        ensure(is_single_peaked_on_tree(pref, inst.graph()).unwrap(), || format!("tree {t}: not single-peaked"))?;
        let r = closed_neighborhood_rank(pref, inst.graph());
        ensure(r <= 2, || format!("tree {t}: neighbourhood rank {r}"))?;
    }
    for t in 0..500 {
        let k = rng.gen_range(1..=3);
        let n = rng.gen_range(k + 1..=12);
        let s = spec(Family::PartialKTree, n, 1, k, rng.gen(), PrefMode::SinglePeakedDecomposition, QuotaMode::Unit);
        let g = gen(&s);
        let (inst, td) = (&g.instance, g.decomposition.as_ref().unwrap());
        let pref = inst.school_pref(acqmatch::SchoolId(0));
        let sp = is_single_peaked_on_decomposition(pref, inst.graph(), td).map_err(|e| e.to_string())?;
        ensure(sp, || format!("decomposition {t}: verifier rejects the generated preference"))?;
        let r = closed_neighborhood_rank(pref, inst.graph());
        ensure(r <= k + 1, || format!("decomposition {t}: neighbourhood rank {r} > {}", k + 1))?;
    }
    let mut exhaustive = 0;
    for t in 0..600 {
        let n = rng.gen_range(1..=8);
        let graph = if t % 2 == 0 || n < 2 {
            random_market(&mut rng, n, 1, QuotaMode::Unit).graph().clone()
        } else {
            let k = rng.gen_range(1..n.min(4));
            let s = spec(Family::PartialKTree, n, 1, k, rng.gen(), PrefMode::General, QuotaMode::Unit);
            gen(&s).instance.graph().clone()
        };
        let d = degeneracy_ordering(&graph);
        let later = later_neighbors(&graph, &d.order);
        ensure(later <= d.k, || format!("graph {t}: {later} later neighbours, k = {}", d.k))?;
        let best = min_degeneracy_exhaustive(&graph);
        ensure(best == d.k, || format!("graph {t}: k = {}, exhaustive minimum {best}", d.k))?;
        exhaustive += 1;
    }
    Ok(format!("1000 tree and 500 decomposition preferences within bounds; {exhaustive} orderings minimal"))
}

fn appendix_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0usize;
    for t in 0..200 {
        let (n, m) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let inst = random_market(&mut rng, n, m, QuotaMode::Unit);
        let mut bad = None;
        for_each_feasible(&inst, |y| {
            compared += 1;
            if is_locally_stable(&inst, y) != locally_envy_free(&inst, y) {
                bad = Some(show(&inst, y));
            }
            bad.is_none()
        });
        ensure(bad.is_none(), || format!("unit instance {t}: LS and LEF disagree at {bad:?}"))?;
    }
    let mut quota_two = 0;
    while quota_two < 200 {
        let (n, m) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let inst = random_market(&mut rng, n, m, QuotaMode::RandomBounded);
        if inst.quotas().iter().all(|&q| q < 2) {
            continue;
        }
        quota_two += 1;
        let mut bad = None;
        for_each_feasible(&inst, |y| {
            if is_locally_stable(&inst, y) && !locally_envy_free(&inst, y) {
                bad = Some(show(&inst, y));
            }
            bad.is_none()
        });
        ensure(bad.is_none(), || format!("quota-two instance {quota_two}: LS but not LEF at {bad:?}"))?;
    }
    let a2 = fixture("lef-not-ls-quota2");
    let y = a2.matching(&["s1", "s2"]).unwrap();
    ensure(is_locally_envy_free(&a2, &y) && !is_locally_stable(&a2, &y) && !pe_oracle(&a2, &y)?, || {
        "quota-two pair: expected LEF, not LS, not PE".into()
    })?;
    let y = a2.matching(&["-", "-"]).unwrap();
    ensure(is_locally_stable(&a2, &y) && !pe_oracle(&a2, &y)?, || "empty matching: expected LS, not PE".into())?;
    let a4 = fixture("lefpe-not-ls");
    let y = a4.matching(&["s1", "s2", "s2"]).unwrap();
    ensure(is_locally_envy_free(&a4, &y) && pe_oracle(&a4, &y)? && !is_locally_stable(&a4, &y), || {
        "expected LEF and PE but not LS".into()
    })?;
    Ok(format!("LS = LEF on {compared} unit-quota matchings; LS implies LEF on 200 quota-two markets; examples hold"))
}

fn triangle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut with = 0;
    for t in 0..200 {
        let s = spec(Family::Complete, 3, 3, 1, rng.gen(), PrefMode::General, QuotaMode::Unit);
        let inst = gen(&s).instance;
        let lee = decide_lee(&inst, &Limits::default()).map_err(|e| e.to_string())?;
        let both = enumerate(&inst, "pe+lef")?;
        ensure(lee.is_some() == !both.is_empty(), || format!("profile {t}: decide_lee and enumeration disagree"))?;
        if let Some(y) = lee {
            ensure(both.contains(&y), || format!("profile {t}: witness {} not enumerated", show(&inst, &y)))?;
            with += 1;
        }
    }
    Ok(format!("200 triangle profiles agree ({with} with a LEF and PE matching)"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "path market has no LEF and PE matching",
            budget: secs(1),
            run: path_market_no_lef_pe,
        },
        Criterion { id: 2, name: "manipulation profiles", budget: secs(5), run: manipulation_profiles },
        Criterion {
            id: 3,
            name: "locally-top mechanism vs deferred acceptance",
            budget: secs(5),
            run: locally_top_vs_da,
        },
        Criterion { id: 4, name: "B-LT2 on single-peaked trees", budget: secs(120), run: tree_suite },
        Criterion { id: 5, name: "B-LT(k+1) on decompositions", budget: secs(120), run: decomposition_suite },
        Criterion { id: 6, name: "SD along degeneracy orderings", budget: secs(300), run: degeneracy_suite },
        Criterion { id: 7, name: "B-LT2 on bounded-degree graphs", budget: secs(60), run: bounded_degree_suite },
        Criterion { id: 8, name: "lattice and size regressions", budget: secs(2), run: lattice_and_size },
        Criterion { id: 9, name: "SD-feasibility reduction", budget: secs(120), run: reduction_suite },
        Criterion {
            id: 10,
            name: "neighbourhood rank and degeneracy bounds",
            budget: secs(120),
            run: rank_and_degeneracy_bounds,
        },
        Criterion { id: 11, name: "local stability vs local envy-freeness", budget: secs(60), run: appendix_suite },
        Criterion {
            id: 12,
            name: "decide_lee agrees with enumeration on triangles",
            budget: secs(60),
            run: triangle_agreement,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > c.budget => Err(format!("{msg}; took {took:.2?}, budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {:>2} {} [{took:.2?}]: {msg}", c.id, c.name),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {} [{took:.2?}]: {msg}", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
