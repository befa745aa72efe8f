//! Structural summary of a market: graph shape, degeneracy,
//! single-peakedness of every school and the mutually-best pairs.

use crate::graph::{
    degeneracy_ordering, is_tree, neighbor_rank_bound, single_peaked_prefix_on_decomposition,
    single_peaked_prefix_on_tree, validate_tree_decomposition, DegeneracyOrdering, GraphError, TreeDecomposition,
};
use crate::io::KeyValueBlock;
use crate::model::{MarketInstance, SchoolId, StudentId};
use crate::properties::mutually_best_pairs;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchoolStructure {
    pub school: SchoolId,
    /// Single-peaked on the graph when it is a tree; `None` otherwise.
    pub single_peaked_tree: Option<bool>,
    /// Single-peaked on the supplied decomposition.
    pub single_peaked_decomposition: Option<bool>,
    /// Worst rank of a student within its closed neighborhood.
    pub neighbor_rank_bound: usize,
    /// The list omits some students, so only its prefix was checked.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub is_tree: bool,
    pub max_degree: usize,
    pub degeneracy: DegeneracyOrdering,
    pub decomposition_width: Option<usize>,
    pub schools: Vec<SchoolStructure>,
    pub mutually_best: Vec<(StudentId, SchoolId)>,
}

pub fn analyze(inst: &MarketInstance, td: Option<&TreeDecomposition>) -> Result<StructureReport, GraphError> {
    let g = inst.graph();
    let tree = is_tree(g);
    let width = td.map(|td| validate_tree_decomposition(g, td)).transpose()?;
    let schools = inst
        .schools()
        .map(|s| {
            let pref = inst.school_pref(s);
            Ok(SchoolStructure {
                school: s,
                single_peaked_tree: if tree { Some(single_peaked_prefix_on_tree(pref, g)?) } else { None },
                single_peaked_decomposition: td
                    .map(|td| single_peaked_prefix_on_decomposition(pref, g, td))
                    .transpose()?,
                neighbor_rank_bound: neighbor_rank_bound(pref, g),
                partial: pref.len() < inst.num_students(),
            })
        })
        .collect::<Result<_, GraphError>>()?;
    Ok(StructureReport {
        is_tree: tree,
        max_degree: g.max_degree(),
        degeneracy: degeneracy_ordering(g),
        decomposition_width: width,
        schools,
        mutually_best: mutually_best_pairs(inst),
    })
}

fn opt(v: Option<impl ToString>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

pub fn format_structure_report(inst: &MarketInstance, r: &StructureReport) -> KeyValueBlock {
    let mut kv = KeyValueBlock::default();
    kv.push("is_tree", r.is_tree);
    kv.push("max_degree", r.max_degree);
    kv.push("degeneracy", r.degeneracy.k);
    kv.push("degeneracy_order", r.degeneracy.order.iter().map(|&i| inst.student_name(i)).collect::<Vec<_>>().join(","));
    kv.push("decomposition_width", opt(r.decomposition_width));
    for s in &r.schools {
        let name = inst.school_name(s.school);
        kv.push(format!("single_peaked_tree.{name}"), opt(s.single_peaked_tree));
        kv.push(format!("single_peaked_decomposition.{name}"), opt(s.single_peaked_decomposition));
        kv.push(format!("neighbor_rank_bound.{name}"), s.neighbor_rank_bound);
        if s.partial {
            kv.push(format!("warning.{name}"), "incomplete preference; checked the acceptable prefix only");
        }
    }
    let mb: Vec<String> =
        r.mutually_best.iter().map(|&(i, s)| format!("{}@{}", inst.student_name(i), inst.school_name(s))).collect();
    kv.push("mb_pairs", if mb.is_empty() { "-".to_string() } else { mb.join(",") });
    kv
}
