use std::collections::BTreeSet;

use crate::model::{MarketInstance, Matching};

use super::{enumerate_matchings, Limits, MatchingFilter, OracleError, Requirement};

/// Cap on the number of LEF matchings the cubic join/meet scan accepts.
pub const MAX_LATTICE_SIZE: usize = 400;

/// Lattice structure of the LEF matchings under the students' weak Pareto
/// order (`a ≥ b` when every student weakly prefers her school in `a`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeReport {
    pub lef: Vec<Matching>,
    /// Index pairs into `lef` with no common upper bound at all.
    pub no_common_dominator: Vec<(usize, usize)>,
    /// Index pairs whose upper bounds have no least element.
    pub no_join: Vec<(usize, usize)>,
    /// Index pairs whose lower bounds have no greatest element.
    pub no_meet: Vec<(usize, usize)>,
    /// Index of the LEF matching every student weakly prefers to all others.
    pub student_optimal: Option<usize>,
}

impl LatticeReport {
    pub fn is_lattice(&self) -> bool {
        self.no_join.is_empty() && self.no_meet.is_empty()
    }
}

fn weakly_above(inst: &MarketInstance, a: &Matching, b: &Matching) -> bool {
    inst.students().all(|i| a.school_of(i) == b.school_of(i) || inst.prefers_outcome(i, a.school_of(i), b.school_of(i)))
}

pub fn check_lattice_closure(inst: &MarketInstance, limits: &Limits) -> Result<LatticeReport, OracleError> {
    let lef = enumerate_matchings(inst, &MatchingFilter::new([Requirement::Lef]), Some(MAX_LATTICE_SIZE), limits)?;
    if lef.truncated {
        return Err(OracleError::BoundExceeded {
            what: "LEF matching count",
            value: MAX_LATTICE_SIZE as u64 + 1,
            limit: MAX_LATTICE_SIZE as u64,
        });
    }
    let ys = lef.matchings;
    let count = ys.len();
    let above: Vec<Vec<bool>> =
        (0..count).map(|a| (0..count).map(|b| weakly_above(inst, &ys[a], &ys[b])).collect()).collect();
    let mut report = LatticeReport {
        lef: Vec::new(),
        no_common_dominator: Vec::new(),
        no_join: Vec::new(),
        no_meet: Vec::new(),
        student_optimal: (0..count).find(|&a| (0..count).all(|b| above[a][b])),
    };
    for a in 0..count {
        for b in a + 1..count {
            let upper: Vec<usize> = (0..count).filter(|&z| above[z][a] && above[z][b]).collect();
            let lower: Vec<usize> = (0..count).filter(|&z| above[a][z] && above[b][z]).collect();
            if upper.is_empty() {
                report.no_common_dominator.push((a, b));
            }
            if !upper.iter().any(|&z| upper.iter().all(|&u| above[u][z])) {
                report.no_join.push((a, b));
            }
            if !lower.iter().any(|&z| lower.iter().all(|&l| above[z][l])) {
                report.no_meet.push((a, b));
            }
        }
    }
    report.lef = ys;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuralEntry {
    pub matching: Matching,
    pub size: usize,
    pub fill: Vec<u32>,
}

/// Sizes and per-school fill vectors of the LEF∧PE matchings, and of the
/// LEF∧nonwasteful matchings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuralReport {
    pub lef_pe: Vec<RuralEntry>,
    pub lef_nonwasteful: Vec<RuralEntry>,
}

impl RuralReport {
    pub fn lef_pe_sizes(&self) -> BTreeSet<usize> {
        self.lef_pe.iter().map(|e| e.size).collect()
    }

    pub fn lef_nonwasteful_sizes(&self) -> BTreeSet<usize> {
        self.lef_nonwasteful.iter().map(|e| e.size).collect()
    }

    /// Every LEF∧PE matching fills every school equally.
    pub fn lef_pe_uniform(&self) -> bool {
        self.lef_pe.windows(2).all(|w| w[0].fill == w[1].fill)
    }

    pub fn lef_nonwasteful_uniform(&self) -> bool {
        self.lef_nonwasteful.windows(2).all(|w| w[0].fill == w[1].fill)
    }
}

pub fn rural_hospitals_check(inst: &MarketInstance, limits: &Limits) -> Result<RuralReport, OracleError> {
    let entries = |filter: MatchingFilter| -> Result<Vec<RuralEntry>, OracleError> {
        Ok(enumerate_matchings(inst, &filter, None, limits)?
            .matchings
            .into_iter()
            .map(|y| RuralEntry { size: y.size(), fill: y.occupancy(inst.num_schools()), matching: y })
            .collect())
    };
    Ok(RuralReport {
        lef_pe: entries(MatchingFilter::new([Requirement::Lef, Requirement::Pe]))?,
        lef_nonwasteful: entries(MatchingFilter::new([Requirement::Lef, Requirement::Nonwasteful]))?,
    })
}
