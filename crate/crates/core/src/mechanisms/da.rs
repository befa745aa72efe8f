use crate::model::{MarketInstance, Matching, SchoolId, StudentId};

/// Student-proposing deferred acceptance, round based: every free student
/// proposes to her next school, each school keeps its `q_s` best
/// proposers so far.
pub fn deferred_acceptance(inst: &MarketInstance) -> Matching {
    let n = inst.num_students();
    let mut next = vec![0usize; n];
    let mut held: Vec<Vec<StudentId>> = vec![Vec::new(); inst.num_schools()];
    let mut assignment: Vec<Option<SchoolId>> = vec![None; n];
    loop {
        let proposers: Vec<StudentId> = inst
            .students()
            .filter(|&i| assignment[i.idx()].is_none() && next[i.idx()] < inst.student_pref(i).len())
            .collect();
        if proposers.is_empty() {
            break;
        }
        let mut touched = Vec::new();
        for i in proposers {
            let s = inst.student_pref(i)[next[i.idx()]];
            next[i.idx()] += 1;
            held[s.idx()].push(i);
            assignment[i.idx()] = Some(s);
            touched.push(s);
        }
        touched.sort();
        touched.dedup();
        for s in touched {
            let pool = &mut held[s.idx()];
            pool.sort_by_key(|&i| inst.school_rank(s, i).expect("proposals follow contracts"));
            let q = inst.quota(s) as usize;
            for rejected in pool.drain(q.min(pool.len())..) {
                assignment[rejected.idx()] = None;
            }
        }
    }
    Matching::from_vec_unchecked(assignment)
}
