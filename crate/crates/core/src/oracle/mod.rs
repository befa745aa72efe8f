//! Exhaustive ground truth at desk scale: matching enumeration, the LEE
//! decision problem, lattice and rural-hospitals checks, misreport scans
//! and the SD-feasibility reduction.

mod reduction;
mod sp;
mod structure;

pub use reduction::{reduce_sd_feasibility_to_lee, sd_feasible_brute_force, ReducedMarket, SdFeasibility};
pub use sp::{verify_strategyproofness, ManipulationWitness, SpCheck};
pub use structure::{check_lattice_closure, rural_hospitals_check, LatticeReport, RuralEntry, RuralReport};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::mechanisms::MechanismError;
use crate::model::{is_feasible, MarketInstance, Matching, SchoolId};
use crate::properties::{
    envy_report, is_locally_stable, is_mutually_best, is_nonwasteful, is_pareto_efficient, pareto_dominates,
    PropertyError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} is {value}, above the enumeration bound {limit}")]
    BoundExceeded { what: &'static str, value: u64, limit: u64 },
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Size bounds for exhaustive engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_students: usize,
    pub max_schools: usize,
    pub max_total_quota: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_students: 8, max_schools: 8, max_total_quota: 10 }
    }
}

impl Limits {
    pub fn check(&self, inst: &MarketInstance) -> Result<(), OracleError> {
        let checks = [
            ("student count", inst.num_students() as u64, self.max_students as u64),
            ("school count", inst.num_schools() as u64, self.max_schools as u64),
            ("total quota", inst.total_quota(), self.max_total_quota),
        ];
        for (what, value, limit) in checks {
            if value > limit {
                return Err(OracleError::BoundExceeded { what, value, limit });
            }
        }
        Ok(())
    }
}

/// Calls `visit` on every feasible matching. Students are assigned in
/// declared order, each trying the outside option first and then her
/// acceptable schools by index. `visit` returns `false` to stop early.
pub fn for_each_feasible(inst: &MarketInstance, mut visit: impl FnMut(&Matching) -> bool) {
    let options: Vec<Vec<SchoolId>> = inst
        .students()
        .map(|i| {
            let mut v = inst.student_pref(i).to_vec();
            v.sort();
            v
        })
        .collect();
    let mut seats = inst.quotas().to_vec();
    let mut current = Matching::empty(inst.num_students());
    walk(0, &options, &mut seats, &mut current, &mut visit);
}

fn walk(
    i: usize,
    options: &[Vec<SchoolId>],
    seats: &mut [u32],
    current: &mut Matching,
    visit: &mut impl FnMut(&Matching) -> bool,
) -> bool {
    if i == options.len() {
        return visit(current);
    }
    current.set(i, None);
    if !walk(i + 1, options, seats, current, visit) {
        return false;
    }
    for &s in &options[i] {
        if seats[s.idx()] == 0 {
            continue;
        }
        seats[s.idx()] -= 1;
        current.set(i, Some(s));
        let go_on = walk(i + 1, options, seats, current, visit);
        seats[s.idx()] += 1;
        if !go_on {
            current.set(i, None);
            return false;
        }
    }
    current.set(i, None);
    true
}

/// One property a listed matching must have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    Feasible,
    Pe,
    Lef,
    Fair,
    Stable,
    Nonwasteful,
    Mb,
    Ls,
    EfAtMost(usize),
    ErfAtMost(usize),
    LocalEfAtMost(usize),
    LocalErfAtMost(usize),
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::Feasible => f.write_str("feasible"),
            Requirement::Pe => f.write_str("pe"),
            Requirement::Lef => f.write_str("lef"),
            Requirement::Fair => f.write_str("fair"),
            Requirement::Stable => f.write_str("stable"),
            Requirement::Nonwasteful => f.write_str("nonwasteful"),
            Requirement::Mb => f.write_str("mb"),
            Requirement::Ls => f.write_str("ls"),
            Requirement::EfAtMost(k) => write!(f, "ef<={k}"),
            Requirement::ErfAtMost(k) => write!(f, "erf<={k}"),
            Requirement::LocalEfAtMost(k) => write!(f, "local-ef<={k}"),
            Requirement::LocalErfAtMost(k) => write!(f, "local-erf<={k}"),
        }
    }
}

impl FromStr for Requirement {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((name, k)) = s.split_once("<=").or_else(|| s.split_once(':')) {
            let k: usize = k.trim().parse().map_err(|_| OracleError::Invalid(format!("bad bound in `{s}`")))?;
            return match name.trim() {
                "ef" => Ok(Requirement::EfAtMost(k)),
                "erf" => Ok(Requirement::ErfAtMost(k)),
                "local-ef" => Ok(Requirement::LocalEfAtMost(k)),
                "local-erf" => Ok(Requirement::LocalErfAtMost(k)),
                other => Err(OracleError::Invalid(format!("unknown bounded property `{other}`"))),
            };
        }
        Ok(match s {
            "feasible" => Requirement::Feasible,
            "pe" => Requirement::Pe,
            "lef" => Requirement::Lef,
            "fair" => Requirement::Fair,
            "stable" => Requirement::Stable,
            "nonwasteful" | "nw" => Requirement::Nonwasteful,
            "mb" => Requirement::Mb,
            "ls" => Requirement::Ls,
            other => return Err(OracleError::Invalid(format!("unknown property `{other}`"))),
        })
    }
}

/// Conjunction of requirements, written `pe+lef+local-erf<=1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchingFilter {
    pub requirements: Vec<Requirement>,
}

impl MatchingFilter {
    pub fn new(requirements: impl IntoIterator<Item = Requirement>) -> Self {
        MatchingFilter { requirements: requirements.into_iter().collect() }
    }

    fn needs_pe(&self) -> bool {
        self.requirements.contains(&Requirement::Pe)
    }

    /// Every requirement other than PE, which needs the whole feasible set.
    fn local_match(&self, inst: &MarketInstance, y: &Matching) -> bool {
        let needs_envy = self.requirements.iter().any(|r| {
            !matches!(
                r,
                Requirement::Feasible | Requirement::Pe | Requirement::Nonwasteful | Requirement::Mb | Requirement::Ls
            )
        });
        let envy = needs_envy.then(|| envy_report(inst, y));
        let envy = || envy.as_ref().expect("computed when needed");
        self.requirements.iter().all(|r| match *r {
            Requirement::Feasible | Requirement::Pe => true,
            Requirement::Lef => envy().is_locally_envy_free(),
            Requirement::Fair => envy().is_fair(),
            Requirement::Stable => envy().is_fair() && is_nonwasteful(inst, y),
            Requirement::Nonwasteful => is_nonwasteful(inst, y),
            Requirement::Mb => is_mutually_best(inst, y),
            Requirement::Ls => is_locally_stable(inst, y),
            Requirement::EfAtMost(k) => envy().ef_level() <= k,
            Requirement::ErfAtMost(k) => envy().erf_level() <= k,
            Requirement::LocalEfAtMost(k) => envy().local_ef_level() <= k,
            Requirement::LocalErfAtMost(k) => envy().local_erf_level() <= k,
        })
    }
}

impl fmt::Display for MatchingFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.requirements.is_empty() {
            return f.write_str("feasible");
        }
        let parts: Vec<String> = self.requirements.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for MatchingFilter {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let requirements = s.split('+').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<_, _>>()?;
        Ok(MatchingFilter { requirements })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub matchings: Vec<Matching>,
    /// More matchings passed the filter than the limit allowed.
    pub truncated: bool,
}

/// Rank vectors of all feasible matchings, flattened, with the unmatched
/// outcome ranked just below every acceptable school.
struct FeasibleSet {
    n: usize,
    ranks: Vec<u8>,
    matchings: Vec<Matching>,
}

impl FeasibleSet {
    fn collect(inst: &MarketInstance) -> Self {
        let n = inst.num_students();
        let mut set = FeasibleSet { n, ranks: Vec::new(), matchings: Vec::new() };
        for_each_feasible(inst, |y| {
            for i in inst.students() {
                let r = match y.school_of(i) {
                    Some(s) => inst.student_rank(i, s).expect("contract"),
                    None => inst.student_pref(i).len() as u32,
                };
                set.ranks.push(r as u8);
            }
            set.matchings.push(y.clone());
            true
        });
        set
    }

    fn ranks(&self, k: usize) -> &[u8] {
        &self.ranks[k * self.n..(k + 1) * self.n]
    }

    /// Pareto-efficiency flag per matching. A dominated matching is dominated
    /// by some efficient one with a strictly smaller rank sum, so scanning in
    /// rank-sum order only needs to compare against the efficient front.
    fn pareto_flags(&self) -> Vec<bool> {
        let count = self.matchings.len();
        let mut order: Vec<usize> = (0..count).collect();
        let sums: Vec<u32> = (0..count).map(|k| self.ranks(k).iter().map(|&r| r as u32).sum()).collect();
        order.sort_by_key(|&k| sums[k]);
        let mut flags = vec![false; count];
        let mut front: Vec<usize> = Vec::new();
        for k in order {
            let rk = self.ranks(k);
            let dominated = front.iter().any(|&f| {
                let rf = self.ranks(f);
                sums[f] < sums[k] && rf.iter().zip(rk).all(|(a, b)| a <= b)
            });
            if !dominated {
                flags[k] = true;
                front.push(k);
            }
        }
        flags
    }
}

/// Lists every feasible matching satisfying `filter` in enumeration order,
/// keeping at most `limit`.
pub fn enumerate_matchings(
    inst: &MarketInstance,
    filter: &MatchingFilter,
    limit: Option<usize>,
    limits: &Limits,
) -> Result<Enumeration, OracleError> {
    limits.check(inst)?;
    let mut out = Enumeration { matchings: Vec::new(), truncated: false };
    let mut push = |y: &Matching| -> bool {
        if limit.is_some_and(|l| out.matchings.len() >= l) {
            out.truncated = true;
            return false;
        }
        out.matchings.push(y.clone());
        true
    };
    if filter.needs_pe() {
        let set = FeasibleSet::collect(inst);
        let flags = set.pareto_flags();
        for (y, pe) in set.matchings.iter().zip(flags) {
            if pe && filter.local_match(inst, y) && !push(y) {
                break;
            }
        }
    } else {
        for_each_feasible(inst, |y| !filter.local_match(inst, y) || push(y));
    }
    Ok(out)
}

/// Whether one feasible matching meets every requirement; PE is decided by
/// the improvement search.
pub fn satisfies(inst: &MarketInstance, y: &Matching, filter: &MatchingFilter) -> Result<bool, OracleError> {
    if !is_feasible(inst, y).map_err(PropertyError::from)? {
        return Ok(false);
    }
    if !filter.local_match(inst, y) {
        return Ok(false);
    }
    Ok(!filter.needs_pe() || is_pareto_efficient(inst, y)?)
}

/// Pareto efficiency by scanning every feasible matching for a dominator.
pub fn is_pe_by_enumeration(inst: &MarketInstance, y: &Matching, limits: &Limits) -> Result<bool, OracleError> {
    limits.check(inst)?;
    if !is_feasible(inst, y).map_err(PropertyError::from)? {
        return Err(PropertyError::Infeasible.into());
    }
    let mut efficient = true;
    for_each_feasible(inst, |z| {
        efficient = !pareto_dominates(inst, z, y);
        efficient
    });
    Ok(efficient)
}

/// A matching that is both locally envy-free and Pareto efficient, if any.
pub fn decide_lee(inst: &MarketInstance, limits: &Limits) -> Result<Option<Matching>, OracleError> {
    limits.check(inst)?;
    let lef = MatchingFilter::new([Requirement::Lef]);
    let mut found = None;
    let mut failure = None;
    for_each_feasible(inst, |y| {
        if !lef.local_match(inst, y) {
            return true;
        }
        match is_pareto_efficient(inst, y) {
            Ok(true) => {
                found = Some(y.clone());
                false
            }
            Ok(false) => true,
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    });
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(found),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn names(inst: &MarketInstance, ys: &[Matching]) -> Vec<String> {
        ys.iter().map(|y| y.display(inst).to_string()).collect()
    }

    #[test]
    fn path_instance_pe_set() {
        let inst = fixtures::by_name("path-no-lef-pe").unwrap().instance;
        let pe = enumerate_matchings(&inst, &"pe".parse().unwrap(), None, &Limits::default()).unwrap();
        let mut got = names(&inst, &pe.matchings);
        got.sort();
        assert_eq!(got, ["[s1, s2, s3]", "[s1, s3, s2]", "[s2, s3, s1]", "[s3, s2, s1]"]);
        let both = enumerate_matchings(&inst, &"pe+lef".parse().unwrap(), None, &Limits::default()).unwrap();
        assert!(both.matchings.is_empty());
        assert_eq!(decide_lee(&inst, &Limits::default()).unwrap(), None);
    }

    #[test]
    fn envy_example_lef_set() {
        let inst = fixtures::by_name("envy-example").unwrap().instance;
        let lef = enumerate_matchings(&inst, &"lef".parse().unwrap(), None, &Limits::default()).unwrap();
        assert_eq!(names(&inst, &lef.matchings), ["[-, -]", "[-, s1]", "[s1, -]"]);
        let stable = enumerate_matchings(&inst, &"stable".parse().unwrap(), None, &Limits::default()).unwrap();
        assert_eq!(names(&inst, &stable.matchings), ["[s1, -]"]);
    }

    #[test]
    fn single_pair_market() {
        let inst =
            crate::io::parse_instance("students: i1\nschools: s1\nquota: s1=1\npref i1: s1\npref s1: i1\nedges:\n")
                .unwrap()
                .0;
        assert_eq!(decide_lee(&inst, &Limits::default()).unwrap(), Some(inst.matching(&["s1"]).unwrap()));
    }

    #[test]
    fn limit_truncates() {
        let inst = fixtures::by_name("path-no-lef-pe").unwrap().instance;
        let e = enumerate_matchings(&inst, &MatchingFilter::default(), Some(3), &Limits::default()).unwrap();
        assert_eq!(e.matchings.len(), 3);
        assert!(e.truncated);
    }

    #[test]
    fn bounds_are_enforced() {
        let inst = fixtures::by_name("path-no-lef-pe").unwrap().instance;
        let tight = Limits { max_students: 2, ..Limits::default() };
        assert!(matches!(
            enumerate_matchings(&inst, &MatchingFilter::default(), None, &tight),
            Err(OracleError::BoundExceeded { what: "student count", value: 3, limit: 2 })
        ));
    }

    #[test]
    fn filter_syntax() {
        let f: MatchingFilter = "pe+lef+local-erf<=1+ef:2".parse().unwrap();
        assert_eq!(f.to_string(), "pe+lef+local-erf<=1+ef<=2");
        assert!("pe+bogus".parse::<MatchingFilter>().is_err());
        assert!("ef<=x".parse::<MatchingFilter>().is_err());
    }

    #[test]
    fn enumeration_pe_agrees_with_search_engine() {
        for name in ["path-no-lef-pe", "rural-failure", "blt2-vs-da", "lefpe-not-ls"] {
            let inst = fixtures::by_name(name).unwrap().instance;
            let pe = enumerate_matchings(&inst, &"pe".parse().unwrap(), None, &Limits::default()).unwrap();
            let all = enumerate_matchings(&inst, &MatchingFilter::default(), None, &Limits::default()).unwrap();
            for y in &all.matchings {
                let by_search = is_pareto_efficient(&inst, y).unwrap();
                assert_eq!(pe.matchings.contains(y), by_search, "{name} {}", y.display(&inst));
                assert_eq!(is_pe_by_enumeration(&inst, y, &Limits::default()).unwrap(), by_search);
            }
        }
    }
}
