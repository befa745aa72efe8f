use crate::graph::{degeneracy_ordering, DegeneracyOrdering};
use crate::model::{MarketInstance, Matching};

use super::MasterList;

/// Each student in master-list order takes her best acceptable school that
/// still has a seat, or stays unmatched.
pub fn serial_dictatorship(inst: &MarketInstance, ml: &MasterList) -> Matching {
    let mut seats = inst.quotas().to_vec();
    let mut assignment = vec![None; inst.num_students()];
    for &i in ml.order() {
        if let Some(&s) = inst.student_pref(i).iter().find(|s| seats[s.idx()] > 0) {
            seats[s.idx()] -= 1;
            assignment[i.idx()] = Some(s);
        }
    }
    Matching::from_vec_unchecked(assignment)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdDegeneracyOutcome {
    pub matching: Matching,
    pub ordering: DegeneracyOrdering,
    pub master_list: MasterList,
}

/// Serial dictatorship on the degeneracy ordering (or its reverse). With
/// `k` the degeneracy, the forward order bounds local envy received by `k`
/// and the reverse bounds local envy held by `k`.
pub fn sd_degeneracy(inst: &MarketInstance, reversed: bool) -> SdDegeneracyOutcome {
    let ordering = degeneracy_ordering(inst.graph());
    let order = if reversed { ordering.reversed() } else { ordering.order.clone() };
    let master_list = MasterList(order);
    SdDegeneracyOutcome { matching: serial_dictatorship(inst, &master_list), ordering, master_list }
}
