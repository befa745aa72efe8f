//! Structural graph analytics: tree detection, degeneracy orderings,
//! tree-decomposition validation and single-peakedness recognition.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::model::{AcquaintanceGraph, StudentId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph is not a tree")]
    NotATree,
    #[error("preference covers {got} of {expected} students")]
    PartialPreference { expected: usize, got: usize },
    #[error("preference mentions student {0} twice or out of range")]
    InvalidPreference(usize),
    #[error("decomposition has no bags")]
    NoBags,
    #[error("bag tree is not a tree over the {0} bags")]
    BagTreeNotATree(usize),
    #[error("bag index {0} out of range")]
    BagOutOfRange(usize),
    #[error("bag {bag} mentions student {student} which is not a vertex")]
    UnknownStudent { bag: usize, student: usize },
    #[error("coverage violated: student {0} is in no bag")]
    UncoveredStudent(usize),
    #[error("connectivity violated: bags containing student {0} are not connected")]
    DisconnectedStudent(usize),
    #[error("edge coverage violated: edge {0}-{1} is in no bag")]
    UncoveredEdge(usize, usize),
    #[error("too many bags ({0}) for exact single-peakedness search")]
    TooManyBags(usize),
}

/// True iff `g` is connected with `|E| = |V| - 1`.
pub fn is_tree(g: &AcquaintanceGraph) -> bool {
    let n = g.vertex_count();
    n > 0 && g.edge_count() == n - 1 && is_connected(g)
}

pub fn is_connected(g: &AcquaintanceGraph) -> bool {
    let n = g.vertex_count();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([StudentId(0)]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if !seen[w.idx()] {
                seen[w.idx()] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == n
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracyOrdering {
    pub order: Vec<StudentId>,
    /// Smallest `k` such that every vertex has at most `k` neighbors after it.
    pub k: usize,
}

impl DegeneracyOrdering {
    pub fn reversed(&self) -> Vec<StudentId> {
        self.order.iter().rev().copied().collect()
    }
}

/// Number of neighbors of each vertex placed after it in `order`, maximized.
pub fn max_later_neighbors(g: &AcquaintanceGraph, order: &[StudentId]) -> usize {
    let mut pos = vec![usize::MAX; g.vertex_count()];
    for (p, v) in order.iter().enumerate() {
        pos[v.idx()] = p;
    }
    order.iter().map(|&v| g.neighbors(v).iter().filter(|w| pos[w.idx()] > pos[v.idx()]).count()).max().unwrap_or(0)
}

/// Repeatedly removes a minimum-degree vertex (lowest index on ties). The
/// removal order has at most `k` later neighbors per vertex, and `k` is the
/// degeneracy.
pub fn degeneracy_ordering(g: &AcquaintanceGraph) -> DegeneracyOrdering {
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(StudentId(v))).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut k = 0;
    for _ in 0..n {
        let v = (0..n).filter(|&v| !removed[v]).min_by_key(|&v| (degree[v], v)).expect("vertex remains");
        k = k.max(degree[v]);
        removed[v] = true;
        order.push(StudentId(v));
        for w in g.neighbors(StudentId(v)) {
            if !removed[w.idx()] {
                degree[w.idx()] -= 1;
            }
        }
    }
    DegeneracyOrdering { order, k }
}

/// Bags over students joined by a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    /// Display names; may be empty, in which case bags print as `B1..Bℓ`.
    pub bag_names: Vec<String>,
    pub bags: Vec<Vec<StudentId>>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn new(bags: Vec<Vec<StudentId>>, tree_edges: Vec<(usize, usize)>) -> Self {
        TreeDecomposition { bag_names: Vec::new(), bags, tree_edges }
    }

    pub fn bag_name(&self, j: usize) -> String {
        self.bag_names.get(j).cloned().unwrap_or_else(|| format!("B{}", j + 1))
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    fn bag_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.tree_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

/// Checks the bag tree, then coverage of students, connectivity of each
/// student's bags, and coverage of edges, in that order. Returns the width.
pub fn validate_tree_decomposition(g: &AcquaintanceGraph, td: &TreeDecomposition) -> Result<usize, GraphError> {
    let l = td.bags.len();
    if l == 0 {
        return Err(GraphError::NoBags);
    }
    for &(a, b) in &td.tree_edges {
        if a >= l || b >= l {
            return Err(GraphError::BagOutOfRange(a.max(b)));
        }
    }
    let bag_tree = AcquaintanceGraph::from_edges(l, td.tree_edges.iter().map(|&(a, b)| (StudentId(a), StudentId(b))))
        .map_err(|_| GraphError::BagTreeNotATree(l))?;
    if !is_tree(&bag_tree) {
        return Err(GraphError::BagTreeNotATree(l));
    }
    let n = g.vertex_count();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, bag) in td.bags.iter().enumerate() {
        for &i in bag {
            if i.idx() >= n {
                return Err(GraphError::UnknownStudent { bag: j, student: i.idx() });
            }
            holders[i.idx()].push(j);
        }
    }
    if let Some(i) = holders.iter().position(Vec::is_empty) {
        return Err(GraphError::UncoveredStudent(i));
    }
    let adj = td.bag_adjacency();
    for (i, hs) in holders.iter().enumerate() {
        if !induces_connected(&adj, hs) {
            return Err(GraphError::DisconnectedStudent(i));
        }
    }
    let bag_sets: Vec<HashSet<StudentId>> = td.bags.iter().map(|b| b.iter().copied().collect()).collect();
    for (a, b) in g.edges() {
        if !bag_sets.iter().any(|set| set.contains(&a) && set.contains(&b)) {
            return Err(GraphError::UncoveredEdge(a.idx(), b.idx()));
        }
    }
    Ok(td.width())
}

fn induces_connected(adj: &[Vec<usize>], nodes: &[usize]) -> bool {
    let Some(&start) = nodes.first() else { return true };
    let inside: HashSet<usize> = nodes.iter().copied().collect();
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if inside.contains(&w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == inside.len()
}

fn check_pref(pref: &[StudentId], n: usize) -> Result<(), GraphError> {
    let mut seen = vec![false; n];
    for &i in pref {
        if i.idx() >= n || std::mem::replace(&mut seen[i.idx()], true) {
            return Err(GraphError::InvalidPreference(i.idx()));
        }
    }
    Ok(())
}

fn check_complete(pref: &[StudentId], n: usize) -> Result<(), GraphError> {
    check_pref(pref, n)?;
    if pref.len() != n {
        return Err(GraphError::PartialPreference { expected: n, got: pref.len() });
    }
    Ok(())
}

/// Every prefix of a complete `pref` induces a connected subgraph of the
/// tree `g`.
pub fn is_single_peaked_on_tree(pref: &[StudentId], g: &AcquaintanceGraph) -> Result<bool, GraphError> {
    check_complete(pref, g.vertex_count())?;
    single_peaked_prefix_on_tree(pref, g)
}

/// Same test restricted to the listed students, for preferences that leave
/// some students unacceptable.
pub fn single_peaked_prefix_on_tree(pref: &[StudentId], g: &AcquaintanceGraph) -> Result<bool, GraphError> {
    if !is_tree(g) {
        return Err(GraphError::NotATree);
    }
    check_pref(pref, g.vertex_count())?;
    let mut ranked = vec![false; g.vertex_count()];
    for (p, &i) in pref.iter().enumerate() {
        // in a tree, a connected prefix grows by a neighbor of the prefix
        if p > 0 && !g.neighbors(i).iter().any(|w| ranked[w.idx()]) {
            return Ok(false);
        }
        ranked[i.idx()] = true;
    }
    Ok(true)
}

/// Bag-count limit for the exact search; chosen-bag sets are bitmasks.
pub const MAX_SEARCH_BAGS: usize = 24;

/// Whether a complete `pref` can be produced by choosing bags one at a
/// time, each adjacent to an already chosen bag, ranking the newly covered
/// students of each chosen bag right after those ranked before.
pub fn is_single_peaked_on_decomposition(
    pref: &[StudentId],
    g: &AcquaintanceGraph,
    td: &TreeDecomposition,
) -> Result<bool, GraphError> {
    check_complete(pref, g.vertex_count())?;
    single_peaked_prefix_on_decomposition(pref, g, td)
}

/// Prefix variant: true iff `pref` is a prefix of some producible ranking.
pub fn single_peaked_prefix_on_decomposition(
    pref: &[StudentId],
    g: &AcquaintanceGraph,
    td: &TreeDecomposition,
) -> Result<bool, GraphError> {
    validate_tree_decomposition(g, td)?;
    check_pref(pref, g.vertex_count())?;
    let l = td.bags.len();
    if l > MAX_SEARCH_BAGS {
        return Err(GraphError::TooManyBags(l));
    }
    let mut search = BagSearch {
        pref,
        pos: {
            let mut pos = vec![usize::MAX; g.vertex_count()];
            for (p, i) in pref.iter().enumerate() {
                pos[i.idx()] = p;
            }
            pos
        },
        bags: &td.bags,
        adj: td.bag_adjacency(),
        failed: HashSet::new(),
    };
    Ok(search.run())
}

struct BagSearch<'a> {
    pref: &'a [StudentId],
    pos: Vec<usize>,
    bags: &'a [Vec<StudentId>],
    adj: Vec<Vec<usize>>,
    failed: HashSet<u64>,
}

impl BagSearch<'_> {
    fn run(&mut self) -> bool {
        if self.pref.is_empty() {
            return true;
        }
        (0..self.bags.len()).any(|j| self.try_bag(0, 0, j))
    }

    /// Students of bag `j` not covered by `chosen`.
    fn fresh(&self, chosen: u64, j: usize) -> Vec<StudentId> {
        self.bags[j]
            .iter()
            .copied()
            .filter(|i| !(0..self.bags.len()).any(|b| chosen & (1 << b) != 0 && self.bags[b].contains(i)))
            .collect()
    }

    /// Extends state (`chosen`, `ranked` prefix length) with bag `j`.
    fn try_bag(&mut self, chosen: u64, ranked: usize, j: usize) -> bool {
        let fresh = self.fresh(chosen, j);
        let remaining = self.pref.len() - ranked;
        // every fresh student must sit in the next segment of the preference
        // (or be unranked when this bag overruns the end of a partial one)
        let in_segment = fresh.iter().filter(|i| {
            let p = self.pos[i.idx()];
            p != usize::MAX && p >= ranked && p < ranked + fresh.len()
        });
        let hits = in_segment.count();
        if fresh.len() >= remaining {
            // last segment: the rest of pref must be drawn from this bag
            let rest: HashSet<StudentId> = self.pref[ranked..].iter().copied().collect();
            return rest.iter().all(|i| fresh.contains(i));
        }
        if hits != fresh.len() {
            return false;
        }
        self.search(chosen | (1 << j), ranked + fresh.len())
    }

    fn search(&mut self, chosen: u64, ranked: usize) -> bool {
        if ranked == self.pref.len() {
            return true;
        }
        if self.failed.contains(&chosen) {
            return false;
        }
        let frontier: Vec<usize> = (0..self.bags.len())
            .filter(|&j| chosen & (1 << j) == 0 && self.adj[j].iter().any(|&b| chosen & (1 << b) != 0))
            .collect();
        for j in frontier {
            if self.try_bag(chosen, ranked, j) {
                return true;
            }
        }
        self.failed.insert(chosen);
        false
    }
}

/// Maximum over listed students `i` of the rank of `i` within `{i} ∪ N(i)`
/// (1 = top). Students missing from `pref` rank below all listed ones.
pub fn neighbor_rank_bound(pref: &[StudentId], g: &AcquaintanceGraph) -> usize {
    let mut pos = vec![usize::MAX; g.vertex_count()];
    for (p, i) in pref.iter().enumerate() {
        pos[i.idx()] = p;
    }
    pref.iter().map(|&i| 1 + g.neighbors(i).iter().filter(|w| pos[w.idx()] < pos[i.idx()]).count()).max().unwrap_or(0)
}
