use crate::mechanisms::{run_mechanism, MechanismConfig};
use crate::model::{MarketInstance, SchoolId, StudentId};

use super::{Limits, OracleError};

/// A profitable unilateral misreport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManipulationWitness {
    pub student: StudentId,
    pub truthful: Vec<SchoolId>,
    pub misreport: Vec<SchoolId>,
    pub honest_outcome: Option<SchoolId>,
    pub manipulated_outcome: Option<SchoolId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpCheck {
    pub witness: Option<ManipulationWitness>,
    pub reports_tried: usize,
    /// Misreports on which the mechanism returned an error; these are skipped.
    pub mechanism_errors: usize,
}

/// Every strict order over every subset of `schools`, including the empty
/// list, in length-then-lexicographic order.
fn ordered_subsets(schools: &[SchoolId]) -> Vec<Vec<SchoolId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..schools.len() {
        let mut next = Vec::new();
        for prefix in &frontier {
            for &s in schools {
                if !prefix.contains(&s) {
                    let mut v: Vec<SchoolId> = prefix.clone();
                    v.push(s);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Tries every report over each student's acceptable schools, permutations
/// and truncations alike, and returns the first one that gets the student a
/// school she truly prefers.
pub fn verify_strategyproofness(
    inst: &MarketInstance,
    config: &MechanismConfig,
    limits: &Limits,
) -> Result<SpCheck, OracleError> {
    limits.check(inst)?;
    let (honest, _) = run_mechanism(inst, config)?;
    let mut check = SpCheck { witness: None, reports_tried: 0, mechanism_errors: 0 };
    for i in inst.students() {
        let truthful = inst.student_pref(i).to_vec();
        let mut acceptable = truthful.clone();
        acceptable.sort();
        for report in ordered_subsets(&acceptable) {
            if report == truthful {
                continue;
            }
            check.reports_tried += 1;
            let lied = inst.with_student_pref(i, &report);
            let outcome = match run_mechanism(&lied, config) {
                Ok((y, _)) => y.school_of(i),
                Err(_) => {
                    check.mechanism_errors += 1;
                    continue;
                }
            };
            if inst.prefers_outcome(i, outcome, honest.school_of(i)) {
                check.witness = Some(ManipulationWitness {
                    student: i,
                    truthful,
                    misreport: report,
                    honest_outcome: honest.school_of(i),
                    manipulated_outcome: outcome,
                });
                return Ok(check);
            }
        }
    }
    Ok(check)
}
