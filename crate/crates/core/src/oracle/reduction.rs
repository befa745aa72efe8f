use thiserror::Error;

use crate::model::{AcquaintanceGraph, MarketInstance, SchoolId, StudentId, RESERVED_CHARS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid SD-feasibility instance: {0}")]
pub struct SdFeasibilityError(String);

/// House allocation question: is there a serial order under which serial
/// dictatorship gives `target.0` the object `target.1`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdFeasibility {
    pub agents: Vec<String>,
    pub objects: Vec<String>,
    /// Complete strict preferences, object indices best first.
    pub prefs: Vec<Vec<usize>>,
    pub target: (usize, usize),
}

impl SdFeasibility {
    pub fn new(
        agents: Vec<String>,
        objects: Vec<String>,
        prefs: Vec<Vec<usize>>,
        target: (usize, usize),
    ) -> Result<Self, SdFeasibilityError> {
        let err = |m: String| Err(SdFeasibilityError(m));
        if agents.is_empty() {
            return err("no agents".into());
        }
        if agents.len() != objects.len() {
            return err(format!("{} agents but {} objects", agents.len(), objects.len()));
        }
        let mut names: Vec<&String> = agents.iter().chain(&objects).collect();
        if let Some(bad) =
            names.iter().find(|n| n.is_empty() || n.contains(RESERVED_CHARS) || n.contains(char::is_whitespace))
        {
            return err(format!("invalid identifier `{bad}`"));
        }
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return err(format!("duplicate identifier `{}`", w[0]));
        }
        if prefs.len() != agents.len() {
            return err("one preference per agent required".into());
        }
        for (a, p) in prefs.iter().enumerate() {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if sorted != (0..objects.len()).collect::<Vec<_>>() {
                return err(format!("preference of `{}` is not a strict complete order", agents[a]));
            }
        }
        if target.0 >= agents.len() || target.1 >= objects.len() {
            return err("target pair out of range".into());
        }
        Ok(SdFeasibility { agents, objects, prefs, target })
    }

    /// Object each agent receives under serial dictatorship in `order`.
    pub fn serial_dictatorship(&self, order: &[usize]) -> Vec<usize> {
        let mut taken = vec![false; self.objects.len()];
        let mut got = vec![usize::MAX; self.agents.len()];
        for &a in order {
            let o = *self.prefs[a].iter().find(|&&o| !taken[o]).expect("as many objects as agents");
            taken[o] = true;
            got[a] = o;
        }
        got
    }
}

/// Tries every serial order.
pub fn sd_feasible_brute_force(problem: &SdFeasibility) -> bool {
    let mut order: Vec<usize> = (0..problem.agents.len()).collect();
    let (a, o) = problem.target;
    loop {
        if problem.serial_dictatorship(&order)[a] == o {
            return true;
        }
        if !next_permutation(&mut order) {
            return false;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// The constructed market with its distinguished participants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedMarket {
    pub instance: MarketInstance,
    pub target_student: StudentId,
    pub target_school: SchoolId,
    pub extra_student: StudentId,
    pub extra_school: SchoolId,
}

fn fresh(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    let mut n = 2;
    while taken.contains(&name) {
        name = format!("{base}{n}");
        n += 1;
    }
    name
}

/// Builds the LEE market whose answer equals the SD-feasibility answer:
/// one extra student and one extra school ranked last by every agent, unit
/// quotas, the target school ranking the target agent first, every other
/// school ranking her last, and a graph where the target agent and the
/// extra student know everyone while the remaining agents know nobody else.
pub fn reduce_sd_feasibility_to_lee(problem: &SdFeasibility) -> ReducedMarket {
    let n = problem.agents.len();
    let (ta, to) = problem.target;
    let all: Vec<String> = problem.agents.iter().chain(&problem.objects).cloned().collect();
    let extra_student_name = fresh("i_tilde", &all);
    let extra_school_name = fresh("s_tilde", &all);

    let mut students = problem.agents.clone();
    students.push(extra_student_name);
    let mut schools = problem.objects.clone();
    schools.push(extra_school_name);
    let extra_student = StudentId(n);
    let extra_school = SchoolId(n);

    let mut student_prefs: Vec<Vec<SchoolId>> =
        problem.prefs.iter().map(|p| p.iter().map(|&o| SchoolId(o)).chain([extra_school]).collect()).collect();
    student_prefs.push((0..=n).map(SchoolId).collect());

    let others: Vec<StudentId> = (0..n).filter(|&a| a != ta).map(StudentId).collect();
    let school_prefs: Vec<Vec<StudentId>> = (0..=n)
        .map(|o| {
            if o == to {
                [StudentId(ta)].into_iter().chain(others.iter().copied()).chain([extra_student]).collect()
            } else {
                others.iter().copied().chain([extra_student, StudentId(ta)]).collect()
            }
        })
        .collect();

    let mut edges = vec![(StudentId(ta), extra_student)];
    for &o in &others {
        edges.push((StudentId(ta), o));
        edges.push((extra_student, o));
    }
    let graph = AcquaintanceGraph::from_edges(n + 1, edges).expect("distinct endpoints");
    let instance = MarketInstance::from_parts(students, schools, student_prefs, school_prefs, vec![1; n + 1], graph)
        .expect("names validated by SdFeasibility::new");
    ReducedMarket { instance, target_student: StudentId(ta), target_school: SchoolId(to), extra_student, extra_school }
}
