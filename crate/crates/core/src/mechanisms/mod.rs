//! Assignment mechanisms: student-proposing deferred acceptance, serial
//! dictatorship, the locally-top family (B-LT2 and B-LT(k+1)) and serial
//! dictatorship driven by a degeneracy ordering.

mod blt;
mod da;
mod sd;

pub use blt::{b_lt2, b_lt2_on_underlying_tree, b_lt_k_plus_1, BltOptions, CertificationMode};
pub use da::deferred_acceptance;
pub use sd::{sd_degeneracy, serial_dictatorship, SdDegeneracyOutcome};

use std::fmt;

use thiserror::Error;

use crate::model::{AcquaintanceGraph, MarketInstance, Matching, ModelError, SchoolId, StudentId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MechanismError {
    #[error("no mutually attacking pair among {unassigned} unassigned students (attack edges: {attacks:?})")]
    Stall { unassigned: usize, attacks: Vec<(StudentId, StudentId)> },
    #[error("students {first:?} and {second:?} both need the last seat of school {school:?}")]
    Conflict { first: StudentId, second: StudentId, school: SchoolId },
    #[error("student {student:?} is attacked by {attackers} unassigned neighbors, expected {expected}")]
    PreconditionViolation { student: StudentId, attackers: usize, expected: usize },
    #[error("master-list is not a permutation of the students")]
    InvalidMasterList,
    #[error("k must be positive")]
    InvalidK,
    #[error("underlying tree: {0}")]
    InvalidTree(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Serial order over all students.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterList(Vec<StudentId>);

impl MasterList {
    pub fn new(inst: &MarketInstance, order: Vec<StudentId>) -> Result<MasterList, MechanismError> {
        let n = inst.num_students();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|i| i.idx() >= n || std::mem::replace(&mut seen[i.idx()], true)) {
            return Err(MechanismError::InvalidMasterList);
        }
        Ok(MasterList(order))
    }

    pub fn declared(inst: &MarketInstance) -> MasterList {
        MasterList(inst.students().collect())
    }

    pub fn from_names(inst: &MarketInstance, names: &[&str]) -> Result<MasterList, MechanismError> {
        let order = names
            .iter()
            .map(|n| inst.student_id(n).ok_or_else(|| ModelError::UnknownStudent(n.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(inst, order)
    }

    pub fn order(&self) -> &[StudentId] {
        &self.0
    }
}

/// How the "arbitrary" choices of the locally-top mechanisms are resolved.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SelectionPolicy {
    /// Declared student order.
    #[default]
    Declared,
    /// Priority given by an explicit master-list.
    Explicit(MasterList),
    /// Uniform choice among the candidates, from a seeded generator.
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStep {
    MutuallyBest,
    Direct,
    AttackPair,
    Exhausted,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceStep::MutuallyBest => "MB",
            TraceStep::Direct => "direct",
            TraceStep::AttackPair => "attack-pair",
            TraceStep::Exhausted => "exhausted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: TraceStep,
    pub student: StudentId,
    pub school: Option<SchoolId>,
    pub iteration: usize,
}

/// Ordered log of assignment events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MechanismTrace {
    pub events: Vec<TraceEvent>,
    /// Diagnostic notes, e.g. attack counts that differ from the expected one.
    pub notes: Vec<String>,
}

impl MechanismTrace {
    /// Rebuilds the matching from the events alone.
    pub fn replay(&self, num_students: usize) -> Matching {
        let mut assignment = vec![None; num_students];
        for e in &self.events {
            assignment[e.student.idx()] = e.school;
        }
        Matching::from_vec_unchecked(assignment)
    }

    /// Students in the order they were assigned.
    pub fn assignment_order(&self) -> Vec<StudentId> {
        self.events.iter().map(|e| e.student).collect()
    }
}

/// A mechanism together with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MechanismConfig {
    DeferredAcceptance,
    SerialDictatorship(MasterList),
    BLt2(BltOptions),
    BLtK { k: usize, options: BltOptions },
    SdDegeneracy { reversed: bool },
    BLt2OnTree { tree: AcquaintanceGraph, options: BltOptions },
}

impl MechanismConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MechanismConfig::DeferredAcceptance => "da",
            MechanismConfig::SerialDictatorship(_) => "sd",
            MechanismConfig::BLt2(_) => "blt2",
            MechanismConfig::BLtK { .. } => "bltk",
            MechanismConfig::SdDegeneracy { reversed: false } => "sd-ld",
            MechanismConfig::SdDegeneracy { reversed: true } => "sd-ldrev",
            MechanismConfig::BLt2OnTree { .. } => "blt2-tree",
        }
    }
}

/// Runs the configured mechanism; the trace is present for the locally-top
/// family only.
pub fn run_mechanism(
    inst: &MarketInstance,
    config: &MechanismConfig,
) -> Result<(Matching, Option<MechanismTrace>), MechanismError> {
    Ok(match config {
        MechanismConfig::DeferredAcceptance => (deferred_acceptance(inst), None),
        MechanismConfig::SerialDictatorship(ml) => (serial_dictatorship(inst, ml), None),
        MechanismConfig::BLt2(options) => {
            let (y, t) = b_lt2(inst, options)?;
            (y, Some(t))
        }
        MechanismConfig::BLtK { k, options } => {
            let (y, t) = b_lt_k_plus_1(inst, *k, options)?;
            (y, Some(t))
        }
        MechanismConfig::SdDegeneracy { reversed } => (sd_degeneracy(inst, *reversed).matching, None),
        MechanismConfig::BLt2OnTree { tree, options } => {
            let (y, t) = b_lt2_on_underlying_tree(inst, tree, options)?;
            (y, Some(t))
        }
    })
}
