use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::is_tree;
use crate::model::{AcquaintanceGraph, MarketInstance, Matching, SchoolId, StudentId};
use crate::properties::mutually_best_pairs;

use super::{MechanismError, MechanismTrace, SelectionPolicy, TraceEvent, TraceStep};

/// Handling of the "exactly k attackers" condition of the B-LT(k+1)
/// pair step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CertificationMode {
    /// Any other attacker count is a [`MechanismError::PreconditionViolation`].
    #[default]
    Certified,
    /// Record a note in the trace and continue with any mutually attacking pair.
    Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BltOptions {
    pub policy: SelectionPolicy,
    pub mode: CertificationMode,
}

impl BltOptions {
    pub fn with_policy(policy: SelectionPolicy) -> Self {
        BltOptions { policy, mode: CertificationMode::Certified }
    }
}

/// Best-to-locally-top-2. Runs on any input; without a tree and
/// single-peaked school preferences the pair step may stall.
pub fn b_lt2(inst: &MarketInstance, options: &BltOptions) -> Result<(Matching, MechanismTrace), MechanismError> {
    LocallyTop::new(inst, inst.graph(), 1, options, false).run()
}

/// Best-to-locally-top-(k+1). A student is assigned directly when at most
/// `k - 1` of her unassigned neighbors are preferred to her by her best
/// remaining school. `k = 1` is [`b_lt2`].
pub fn b_lt_k_plus_1(
    inst: &MarketInstance,
    k: usize,
    options: &BltOptions,
) -> Result<(Matching, MechanismTrace), MechanismError> {
    match k {
        0 => Err(MechanismError::InvalidK),
        1 => b_lt2(inst, options),
        _ => LocallyTop::new(inst, inst.graph(), k, options, true).run(),
    }
}

/// Runs [`b_lt2`] against a spanning tree of the acquaintance graph.
pub fn b_lt2_on_underlying_tree(
    inst: &MarketInstance,
    tree: &AcquaintanceGraph,
    options: &BltOptions,
) -> Result<(Matching, MechanismTrace), MechanismError> {
    if tree.vertex_count() != inst.num_students() {
        return Err(MechanismError::InvalidTree(format!(
            "tree has {} vertices, instance has {} students",
            tree.vertex_count(),
            inst.num_students()
        )));
    }
    if !is_tree(tree) {
        return Err(MechanismError::InvalidTree("not a tree".into()));
    }
    if !tree.is_subgraph_of(inst.graph()) {
        return Err(MechanismError::InvalidTree("not a subgraph of the acquaintance graph".into()));
    }
    LocallyTop::new(inst, tree, 1, options, false).run()
}

enum Chooser {
    Declared,
    Priority(Vec<usize>),
    Seeded(Box<ChaCha8Rng>),
}

impl Chooser {
    fn new(policy: &SelectionPolicy) -> Chooser {
        match policy {
            SelectionPolicy::Declared => Chooser::Declared,
            SelectionPolicy::Explicit(ml) => {
                let mut pos = vec![0; ml.order().len()];
                for (p, i) in ml.order().iter().enumerate() {
                    pos[i.idx()] = p;
                }
                Chooser::Priority(pos)
            }
            SelectionPolicy::Seeded(seed) => Chooser::Seeded(Box::new(ChaCha8Rng::seed_from_u64(*seed))),
        }
    }

    /// Picks one of the non-empty candidate list; `key` maps a candidate to
    /// the students it involves.
    fn pick<T: Copy>(&mut self, candidates: &[T], key: impl Fn(T) -> Vec<StudentId>) -> T {
        match self {
            Chooser::Declared => *candidates
                .iter()
                .min_by_key(|&&c| sorted(key(c).into_iter().map(|i| i.idx()).collect()))
                .expect("non-empty"),
            Chooser::Priority(pos) => *candidates
                .iter()
                .min_by_key(|&&c| sorted(key(c).into_iter().map(|i| pos[i.idx()]).collect()))
                .expect("non-empty"),
            Chooser::Seeded(rng) => candidates[rng.gen_range(0..candidates.len())],
        }
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

struct LocallyTop<'a> {
    inst: &'a MarketInstance,
    graph: &'a AcquaintanceGraph,
    k: usize,
    mode: CertificationMode,
    check_attack_count: bool,
    chooser: Chooser,
    assigned: Vec<bool>,
    assignment: Vec<Option<SchoolId>>,
    seats: Vec<u32>,
    trace: MechanismTrace,
}

impl<'a> LocallyTop<'a> {
    fn new(
        inst: &'a MarketInstance,
        graph: &'a AcquaintanceGraph,
        k: usize,
        options: &BltOptions,
        check_attack_count: bool,
    ) -> Self {
        LocallyTop {
            inst,
            graph,
            k,
            mode: options.mode,
            check_attack_count,
            chooser: Chooser::new(&options.policy),
            assigned: vec![false; inst.num_students()],
            assignment: vec![None; inst.num_students()],
            seats: inst.quotas().to_vec(),
            trace: MechanismTrace::default(),
        }
    }

    fn assign(&mut self, i: StudentId, school: Option<SchoolId>, step: TraceStep, iteration: usize) {
        if let Some(s) = school {
            self.seats[s.idx()] -= 1;
        }
        self.assigned[i.idx()] = true;
        self.assignment[i.idx()] = school;
        self.trace.events.push(TraceEvent { step, student: i, school, iteration });
    }

    fn best_available(&self, i: StudentId) -> Option<SchoolId> {
        self.inst.student_pref(i).iter().copied().find(|s| self.seats[s.idx()] > 0)
    }

    /// Unassigned neighbors of `i` that `s` prefers to `i`.
    fn attackers(&self, i: StudentId, s: SchoolId) -> Vec<StudentId> {
        self.graph
            .neighbors(i)
            .iter()
            .copied()
            .filter(|&j| !self.assigned[j.idx()] && self.inst.school_prefers(s, j, i))
            .collect()
    }

    fn unassigned(&self) -> Vec<StudentId> {
        self.inst.students().filter(|i| !self.assigned[i.idx()]).collect()
    }

    fn run(mut self) -> Result<(Matching, MechanismTrace), MechanismError> {
        for (i, s) in mutually_best_pairs(self.inst) {
            self.assign(i, Some(s), TraceStep::MutuallyBest, 0);
        }
        let mut iteration = 1;
        loop {
            self.direct_fixpoint(iteration);
            let open = self.unassigned();
            if open.is_empty() {
                break;
            }
            self.assign_attack_pair(&open, iteration)?;
            iteration += 1;
        }
        Ok((Matching::from_vec_unchecked(self.assignment), self.trace))
    }

    fn direct_fixpoint(&mut self, iteration: usize) {
        loop {
            let candidates: Vec<(StudentId, Option<SchoolId>)> = self
                .unassigned()
                .into_iter()
                .filter_map(|i| match self.best_available(i) {
                    None => Some((i, None)),
                    Some(s) => (self.attackers(i, s).len() < self.k).then_some((i, Some(s))),
                })
                .collect();
            if candidates.is_empty() {
                return;
            }
            let (i, s) = self.chooser.pick(&candidates, |(i, _)| vec![i]);
            let step = if s.is_some() { TraceStep::Direct } else { TraceStep::Exhausted };
            self.assign(i, s, step, iteration);
        }
    }

    fn assign_attack_pair(&mut self, open: &[StudentId], iteration: usize) -> Result<(), MechanismError> {
        let best: Vec<Option<SchoolId>> = self.inst.students().map(|i| self.best_available(i)).collect();
        let mut attacks = Vec::new();
        for &i in open {
            let s = best[i.idx()].expect("students without a seat were exhausted");
            let attackers = self.attackers(i, s);
            if self.check_attack_count && attackers.len() != self.k {
                match self.mode {
                    CertificationMode::Certified => {
                        return Err(MechanismError::PreconditionViolation {
                            student: i,
                            attackers: attackers.len(),
                            expected: self.k,
                        })
                    }
                    CertificationMode::Diagnostics => self.trace.notes.push(format!(
                        "iteration {iteration}: {} attacked by {} unassigned neighbors, expected {}",
                        self.inst.student_name(i),
                        attackers.len(),
                        self.k
                    )),
                }
            }
            attacks.extend(attackers.into_iter().map(|j| (j, i)));
        }
        let mutual: Vec<(StudentId, StudentId)> =
            attacks.iter().copied().filter(|&(a, b)| a < b && attacks.contains(&(b, a))).collect();
        if mutual.is_empty() {
            return Err(MechanismError::Stall { unassigned: open.len(), attacks });
        }
        let (a, b) = self.chooser.pick(&mutual, |(a, b)| vec![a, b]);
        let (sa, sb) = (best[a.idx()].expect("open"), best[b.idx()].expect("open"));
        // a mutual attack implies sa != sb under strict priorities
        if sa == sb && self.seats[sa.idx()] < 2 {
            return Err(MechanismError::Conflict { first: a, second: b, school: sa });
        }
        self.assign(a, Some(sa), TraceStep::AttackPair, iteration);
        self.assign(b, Some(sb), TraceStep::AttackPair, iteration);
        Ok(())
    }
}
