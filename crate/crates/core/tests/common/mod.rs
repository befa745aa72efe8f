//! Test-side oracles written straight from the definitions, kept apart from
//! the library so the two implementations check each other.
#![allow(dead_code)]

use acqmatch::generate::{generate, Family, Generated, GeneratorSpec, PrefMode, QuotaMode};
use acqmatch::{AcquaintanceGraph, MarketInstance, Matching, StudentId};
use rand::Rng;

pub fn position<T: PartialEq>(list: &[T], x: &T) -> Option<usize> {
    list.iter().position(|y| y == x)
}

/// `i` has justified envy towards `j`: `j` holds a school `i` ranks above her
/// own outcome, and that school ranks `i` above `j`.
pub fn envies(inst: &MarketInstance, y: &Matching, i: StudentId, j: StudentId) -> bool {
    if i == j {
        return false;
    }
    let Some(s) = y.assignment()[j.0] else { return false };
    let spref = inst.student_pref(i);
    let Some(want) = position(spref, &s) else { return false };
    let better = match y.assignment()[i.0] {
        None => true,
        Some(own) => position(spref, &own).is_none_or(|p| want < p),
    };
    let cpref = inst.school_pref(s);
    let Some(pi) = position(cpref, &i) else { return false };
    better && position(cpref, &j).is_none_or(|pj| pi < pj)
}

/// (ef, erf, local ef, local erf) levels.
pub fn envy_levels(inst: &MarketInstance, y: &Matching) -> (usize, usize, usize, usize) {
    let n = inst.num_students();
    let g = inst.graph();
    let mut out = [0usize; 4];
    for a in 0..n {
        let mut counts = [0usize; 4];
        for b in 0..n {
            let adjacent = g.are_adjacent(StudentId(a), StudentId(b));
            if envies(inst, y, StudentId(a), StudentId(b)) {
                counts[0] += 1;
                counts[2] += adjacent as usize;
            }
            if envies(inst, y, StudentId(b), StudentId(a)) {
                counts[1] += 1;
                counts[3] += adjacent as usize;
            }
        }
        for t in 0..4 {
            out[t] = out[t].max(counts[t]);
        }
    }
    (out[0], out[1], out[2], out[3])
}

pub fn locally_envy_free(inst: &MarketInstance, y: &Matching) -> bool {
    envy_levels(inst, y).2 == 0
}

/// Smallest achievable maximum number of later neighbours over all vertex
/// orderings, by branch and bound over orderings.
pub fn min_degeneracy_exhaustive(g: &AcquaintanceGraph) -> usize {
    fn search(g: &AcquaintanceGraph, placed: &mut Vec<bool>, left: usize, cur: usize, best: &mut usize) {
        if cur >= *best {
            return;
        }
        if left == 0 {
            *best = cur;
            return;
        }
        for v in 0..placed.len() {
            if placed[v] {
                continue;
            }
            let later = g.neighbors(StudentId(v)).iter().filter(|w| !placed[w.0]).count();
            placed[v] = true;
            search(g, placed, left - 1, cur.max(later), best);
            placed[v] = false;
        }
    }
    let n = g.vertex_count();
    let mut best = n;
    search(g, &mut vec![false; n], n, 0, &mut best);
    best
}

pub fn later_neighbors(g: &AcquaintanceGraph, order: &[StudentId]) -> usize {
    let mut pos = vec![0; order.len()];
    for (p, v) in order.iter().enumerate() {
        pos[v.0] = p;
    }
    order.iter().map(|&v| g.neighbors(v).iter().filter(|w| pos[w.0] > pos[v.0]).count()).max().unwrap_or(0)
}

/// Largest rank (1 = top) of a student within its closed neighbourhood.
pub fn closed_neighborhood_rank(pref: &[StudentId], g: &AcquaintanceGraph) -> usize {
    pref.iter()
        .enumerate()
        .map(|(p, &i)| 1 + g.neighbors(i).iter().filter(|w| position(pref, w).unwrap() < p).count())
        .max()
        .unwrap_or(0)
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn spec(
    family: Family,
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
    pref: PrefMode,
    quota: QuotaMode,
) -> GeneratorSpec {
    GeneratorSpec { m, k, pref_mode: pref, quota_mode: quota, ..GeneratorSpec::new(family, n, seed) }
}

pub fn gen(spec: &GeneratorSpec) -> Generated {
    generate(spec).unwrap_or_else(|e| panic!("{spec:?}: {e}"))
}

/// Random graph market with general preferences.
pub fn random_market(rng: &mut impl Rng, n: usize, m: usize, quota: QuotaMode) -> MarketInstance {
    let mut s = spec(Family::Random, n, m, 1, rng.gen(), PrefMode::General, quota);
    s.edge_percent = rng.gen_range(0..=100);
    gen(&s).instance
}
