//! Fairness, efficiency and stability predicates on matchings.
//!
//! All predicates assume a feasible matching built against the same
//! instance; [`check_properties`] verifies that up front.

use thiserror::Error;

use crate::model::{is_feasible, MarketInstance, Matching, ModelError, SchoolId, StudentId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropertyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("matching is not feasible")]
    Infeasible,
    #[error("instance has {students} students; exact Pareto search is limited to {limit}")]
    TooLarge { students: usize, limit: usize },
}

/// Student-count limit of the exact Pareto-improvement search.
pub const DEFAULT_PE_STUDENT_LIMIT: usize = 24;

/// `i` has justified envy toward `j`: `j` holds a school `s` that `i`
/// prefers to her own assignment and `s` prefers `i` to `j`.
pub fn has_justified_envy(inst: &MarketInstance, y: &Matching, i: StudentId, j: StudentId) -> bool {
    if i == j {
        return false;
    }
    match y.school_of(j) {
        Some(s) => inst.student_prefers(i, s, y.school_of(i)) && inst.school_prefers(s, i, j),
        None => false,
    }
}

/// Envy sets per student, sorted by student index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyReport {
    /// `Ev(Y, i)`: students `i` envies.
    pub envies: Vec<Vec<StudentId>>,
    /// `Evr(Y, i)`: students envying `i`.
    pub envied_by: Vec<Vec<StudentId>>,
    pub local_envies: Vec<Vec<StudentId>>,
    pub local_envied_by: Vec<Vec<StudentId>>,
}

fn max_len(sets: &[Vec<StudentId>]) -> usize {
    sets.iter().map(Vec::len).max().unwrap_or(0)
}

impl EnvyReport {
    /// Smallest `k` with the matching EF-`k`.
    pub fn ef_level(&self) -> usize {
        max_len(&self.envies)
    }

    pub fn erf_level(&self) -> usize {
        max_len(&self.envied_by)
    }

    pub fn local_ef_level(&self) -> usize {
        max_len(&self.local_envies)
    }

    pub fn local_erf_level(&self) -> usize {
        max_len(&self.local_envied_by)
    }

    pub fn is_fair(&self) -> bool {
        self.ef_level() == 0
    }

    pub fn is_locally_envy_free(&self) -> bool {
        self.local_ef_level() == 0
    }

    /// First local envy pair `(envier, envied)` in index order.
    pub fn first_local_envy(&self) -> Option<(StudentId, StudentId)> {
        self.local_envies.iter().enumerate().find_map(|(i, set)| set.first().map(|&j| (StudentId(i), j)))
    }

    pub fn first_envy(&self) -> Option<(StudentId, StudentId)> {
        self.envies.iter().enumerate().find_map(|(i, set)| set.first().map(|&j| (StudentId(i), j)))
    }
}

pub fn envy_report(inst: &MarketInstance, y: &Matching) -> EnvyReport {
    let n = inst.num_students();
    let g = inst.graph();
    let mut report = EnvyReport {
        envies: vec![Vec::new(); n],
        envied_by: vec![Vec::new(); n],
        local_envies: vec![Vec::new(); n],
        local_envied_by: vec![Vec::new(); n],
    };
    for i in inst.students() {
        for j in inst.students() {
            if has_justified_envy(inst, y, i, j) {
                report.envies[i.idx()].push(j);
                report.envied_by[j.idx()].push(i);
                if g.are_adjacent(i, j) {
                    report.local_envies[i.idx()].push(j);
                    report.local_envied_by[j.idx()].push(i);
                }
            }
        }
    }
    report
}

pub fn is_fair(inst: &MarketInstance, y: &Matching) -> bool {
    inst.students().all(|i| inst.students().all(|j| !has_justified_envy(inst, y, i, j)))
}

pub fn is_locally_envy_free(inst: &MarketInstance, y: &Matching) -> bool {
    let g = inst.graph();
    inst.students().all(|i| g.neighbors(i).iter().all(|&j| !has_justified_envy(inst, y, i, j)))
}

/// A student and a school with a free seat she prefers to her assignment.
pub fn claimed_seat(inst: &MarketInstance, y: &Matching) -> Option<(StudentId, SchoolId)> {
    let occ = y.occupancy(inst.num_schools());
    inst.students().find_map(|i| {
        inst.student_pref(i)
            .iter()
            .copied()
            .take_while(|&s| Some(s) != y.school_of(i))
            .find(|s| occ[s.idx()] < inst.quota(*s))
            .map(|s| (i, s))
    })
}

pub fn is_nonwasteful(inst: &MarketInstance, y: &Matching) -> bool {
    claimed_seat(inst, y).is_none()
}

pub fn is_stable(inst: &MarketInstance, y: &Matching) -> bool {
    is_fair(inst, y) && is_nonwasteful(inst, y)
}

/// `a` weakly Pareto dominates `b` for every student, strictly for one.
pub fn pareto_dominates(inst: &MarketInstance, a: &Matching, b: &Matching) -> bool {
    let mut strict = false;
    for i in inst.students() {
        let (x, y) = (a.school_of(i), b.school_of(i));
        if x == y {
            continue;
        }
        if inst.prefers_outcome(i, x, y) {
            strict = true;
        } else {
            return false;
        }
    }
    strict
}

/// Searches for a feasible matching that Pareto dominates `y`, restricting
/// each student to schools weakly better than her current one.
pub fn pareto_improvement(
    inst: &MarketInstance,
    y: &Matching,
    limit: usize,
) -> Result<Option<Matching>, PropertyError> {
    if inst.num_students() > limit {
        return Err(PropertyError::TooLarge { students: inst.num_students(), limit });
    }
    // a free seat is an immediate improvement
    if let Some((i, s)) = claimed_seat(inst, y) {
        return Ok(Some(y.with(i, Some(s))));
    }
    let options: Vec<Vec<Option<SchoolId>>> = inst
        .students()
        .map(|i| {
            let current = y.school_of(i);
            let mut opts: Vec<Option<SchoolId>> =
                inst.student_pref(i).iter().copied().take_while(|&s| Some(s) != current).map(Some).collect();
            opts.push(current);
            opts
        })
        .collect();
    let mut search = ImprovementSearch {
        inst,
        options: &options,
        seats: inst.quotas().to_vec(),
        current: vec![None; inst.num_students()],
    };
    Ok(search.run(0, false).then(|| Matching::from_vec_unchecked(search.current)))
}

struct ImprovementSearch<'a> {
    inst: &'a MarketInstance,
    options: &'a [Vec<Option<SchoolId>>],
    seats: Vec<u32>,
    current: Vec<Option<SchoolId>>,
}

impl ImprovementSearch<'_> {
    fn run(&mut self, i: usize, improved: bool) -> bool {
        if i == self.inst.num_students() {
            return improved;
        }
        let last = self.options[i].len() - 1;
        for (k, &opt) in self.options[i].iter().enumerate() {
            if let Some(s) = opt {
                if self.seats[s.idx()] == 0 {
                    continue;
                }
                self.seats[s.idx()] -= 1;
            }
            self.current[i] = opt;
            let found = self.run(i + 1, improved || k < last);
            if let Some(s) = opt {
                self.seats[s.idx()] += 1;
            }
            if found {
                return true;
            }
        }
        false
    }
}

pub fn is_pareto_efficient(inst: &MarketInstance, y: &Matching) -> Result<bool, PropertyError> {
    Ok(pareto_improvement(inst, y, DEFAULT_PE_STUDENT_LIMIT)?.is_none())
}

/// Pairs `(i, s)` where each is the other's unique top choice among
/// contracts. Schools with quota 0 never form such a pair.
pub fn mutually_best_pairs(inst: &MarketInstance) -> Vec<(StudentId, SchoolId)> {
    inst.students()
        .filter_map(|i| {
            let &s = inst.student_pref(i).first()?;
            (inst.school_pref(s).first() == Some(&i) && inst.quota(s) > 0).then_some((i, s))
        })
        .collect()
}

pub fn is_mutually_best(inst: &MarketInstance, y: &Matching) -> bool {
    mutually_best_pairs(inst).into_iter().all(|(i, s)| y.school_of(i) == Some(s))
}

/// `(i, s)` blocks when `s ≻_i Y_i` and `i ≻_s min(Y_s)`; `min(Y_s)` is the
/// outside option while `s` has a free seat.
pub fn is_blocking_pair(inst: &MarketInstance, y: &Matching, i: StudentId, s: SchoolId) -> bool {
    if !inst.student_prefers(i, s, y.school_of(i)) {
        return false;
    }
    let q = inst.quota(s);
    if q == 0 {
        return false;
    }
    let holders: Vec<StudentId> = y.students_at(s).collect();
    if (holders.len() as u32) < q {
        return inst.is_contract(i, s);
    }
    let worst = holders
        .iter()
        .copied()
        .max_by_key(|&h| inst.school_rank(s, h).unwrap_or(u32::MAX))
        .expect("full school with positive quota has holders");
    inst.school_prefers(s, i, worst)
}

/// A blocking pair `(i, s)` together with a neighbor of `i` held by `s`.
pub fn local_stability_violation(inst: &MarketInstance, y: &Matching) -> Option<(StudentId, SchoolId, StudentId)> {
    let g = inst.graph();
    for i in inst.students() {
        for s in inst.schools() {
            if !is_blocking_pair(inst, y, i, s) {
                continue;
            }
            if let Some(&j) = g.neighbors(i).iter().find(|&&j| y.school_of(j) == Some(s)) {
                return Some((i, s, j));
            }
        }
    }
    None
}

pub fn is_locally_stable(inst: &MarketInstance, y: &Matching) -> bool {
    local_stability_violation(inst, y).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub fair: bool,
    pub lef: bool,
    pub nonwasteful: bool,
    pub stable: bool,
    pub pareto_efficient: bool,
    pub mutually_best: bool,
    pub locally_stable: bool,
    pub envy: EnvyReport,
    pub envy_witness: Option<(StudentId, StudentId)>,
    pub local_envy_witness: Option<(StudentId, StudentId)>,
    pub claimed_seat: Option<(StudentId, SchoolId)>,
    pub dominating: Option<Matching>,
    pub blocking: Option<(StudentId, SchoolId, StudentId)>,
}

/// Evaluates every predicate on a feasible matching.
pub fn check_properties(inst: &MarketInstance, y: &Matching) -> Result<PropertyReport, PropertyError> {
    if !is_feasible(inst, y)? {
        return Err(PropertyError::Infeasible);
    }
    let envy = envy_report(inst, y);
    let claimed = claimed_seat(inst, y);
    let dominating = pareto_improvement(inst, y, DEFAULT_PE_STUDENT_LIMIT)?;
    let blocking = local_stability_violation(inst, y);
    Ok(PropertyReport {
        fair: envy.is_fair(),
        lef: envy.is_locally_envy_free(),
        nonwasteful: claimed.is_none(),
        stable: envy.is_fair() && claimed.is_none(),
        pareto_efficient: dominating.is_none(),
        mutually_best: is_mutually_best(inst, y),
        locally_stable: blocking.is_none(),
        envy_witness: envy.first_envy(),
        local_envy_witness: envy.first_local_envy(),
        envy,
        claimed_seat: claimed,
        dominating,
        blocking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sid(inst: &MarketInstance, name: &str) -> StudentId {
        inst.student_id(name).unwrap()
    }

    #[test]
    fn path_instance_first_pe_matching_has_local_envy() {
        let inst = fixtures::by_name("path-no-lef-pe").unwrap().instance;
        let y1 = inst.matching(&["s1", "s2", "s3"]).unwrap();
        assert!(has_justified_envy(&inst, &y1, sid(&inst, "i3"), sid(&inst, "i2")));
        let report = envy_report(&inst, &y1);
        assert_eq!(report.local_ef_level(), 1);
        assert_eq!(report.local_envies[2], vec![sid(&inst, "i2")]);
        assert!(!report.is_locally_envy_free());
    }

    #[test]
    fn top_school_holder_envies_nobody() {
        let inst = fixtures::by_name("path-no-lef-pe").unwrap().instance;
        let y = inst.matching(&["s1", "s3", "s2"]).unwrap();
        let i1 = sid(&inst, "i1");
        assert!(inst.students().all(|j| !has_justified_envy(&inst, &y, i1, j)));
    }

    #[test]
    fn envy_of_the_preferred_student() {
        let inst = fixtures::by_name("envy-example").unwrap().instance;
        let y = inst.matching(&["-", "s1"]).unwrap();
        assert!(has_justified_envy(&inst, &y, sid(&inst, "i1"), sid(&inst, "i2")));
        assert!(!is_mutually_best(&inst, &y));
        assert!(is_locally_envy_free(&inst, &y));
        assert!(!is_fair(&inst, &y));
    }

    #[test]
    fn mutual_tops_give_zero_levels() {
        let inst = crate::io::parse_instance(
            "students: a b\nschools: x y\nquota: x=1 y=1\npref a: x > y\npref b: y > x\npref x: a > b\npref y: b > a\nedges: a-b\n",
        )
        .unwrap()
        .0;
        let y = inst.matching(&["x", "y"]).unwrap();
        let r = envy_report(&inst, &y);
        assert_eq!((r.ef_level(), r.erf_level(), r.local_ef_level(), r.local_erf_level()), (0, 0, 0, 0));
        assert_eq!(mutually_best_pairs(&inst).len(), 2);
    }

    #[test]
    fn wastefulness() {
        let fx = fixtures::by_name("rural-failure").unwrap();
        let inst = &fx.instance;
        let y1 = inst.matching(&["s1", "-", "s2"]).unwrap();
        assert!(is_nonwasteful(inst, &y1));
        let empty = Matching::empty(3);
        assert!(!is_nonwasteful(inst, &empty));
        let a2 = fixtures::by_name("lef-not-ls-quota2").unwrap().instance;
        let y = a2.matching(&["s1", "s2"]).unwrap();
        // s2 has a free seat that i1 prefers
        assert_eq!(claimed_seat(&a2, &y), Some((sid(&a2, "i1"), a2.school_id("s2").unwrap())));
    }

    #[test]
    fn pareto_witness_for_quota_two_example() {
        let inst = fixtures::by_name("lef-not-ls-quota2").unwrap().instance;
        let y = inst.matching(&["s1", "s2"]).unwrap();
        let better = pareto_improvement(&inst, &y, 8).unwrap().unwrap();
        assert_eq!(better, inst.matching(&["s2", "s2"]).unwrap());
        assert!(pareto_dominates(&inst, &better, &y));
    }

    #[test]
    fn pe_of_blt2_and_da_outputs() {
        let inst = fixtures::by_name("blt2-vs-da").unwrap().instance;
        let da = inst.matching(&["s3", "s1", "s4", "s2", "s5"]).unwrap();
        let blt = inst.matching(&["s2", "s1", "s4", "s3", "s5"]).unwrap();
        assert!(is_pareto_efficient(&inst, &da).unwrap());
        assert!(is_pareto_efficient(&inst, &blt).unwrap());
        assert!(!pareto_dominates(&inst, &blt, &da));
        // MB-pair (i2, s1) is matched in both
        assert_eq!(mutually_best_pairs(&inst), vec![(sid(&inst, "i2"), inst.school_id("s1").unwrap())]);
        assert!(is_mutually_best(&inst, &blt));
    }

    #[test]
    fn local_stability_examples() {
        let a2 = fixtures::by_name("lef-not-ls-quota2").unwrap().instance;
        let y = a2.matching(&["s1", "s2"]).unwrap();
        assert!(is_locally_envy_free(&a2, &y));
        assert_eq!(
            local_stability_violation(&a2, &y),
            Some((sid(&a2, "i1"), a2.school_id("s2").unwrap(), sid(&a2, "i2")))
        );

        let a4 = fixtures::by_name("lefpe-not-ls").unwrap().instance;
        let y = a4.matching(&["s1", "s2", "s2"]).unwrap();
        let r = check_properties(&a4, &y).unwrap();
        assert!(r.lef && r.pareto_efficient && !r.locally_stable);

        let a3 = fixtures::by_name("ls-empty").unwrap().instance;
        let empty = Matching::empty(a3.num_students());
        let r = check_properties(&a3, &empty).unwrap();
        assert!(r.locally_stable && !r.pareto_efficient);
    }

    #[test]
    fn infeasible_matching_is_rejected() {
        let inst = fixtures::by_name("lef-not-ls-quota2").unwrap().instance;
        let y = inst.matching(&["s1", "s1"]).unwrap();
        assert_eq!(check_properties(&inst, &y), Err(PropertyError::Infeasible));
    }

    #[test]
    fn zero_quota_school_blocks_nobody() {
        let inst = crate::io::parse_instance(
            "students: a\nschools: x y\nquota: x=0 y=1\npref a: x > y\npref x: a\npref y: a\nedges:\n",
        )
        .unwrap()
        .0;
        let y = inst.matching(&["y"]).unwrap();
        assert!(!is_blocking_pair(&inst, &y, StudentId(0), SchoolId(0)));
        assert!(mutually_best_pairs(&inst).is_empty());
        assert!(is_pareto_efficient(&inst, &y).unwrap());
    }
}
