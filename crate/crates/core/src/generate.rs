//! Seeded random markets whose graphs and school preferences meet the
//! structural preconditions of the mechanisms.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::TreeDecomposition;
use crate::model::{AcquaintanceGraph, MarketInstance, SchoolId, StudentId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("inconsistent generator spec: {0}")]
    Inconsistent(String),
    #[error("unknown {kind} `{value}`")]
    Unknown { kind: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Path,
    RandomTree,
    /// k-tree grown vertex by vertex, then random edge deletion; ships the
    /// width-k decomposition.
    PartialKTree,
    /// Random tree with maximum degree `k` plus random chords keeping the cap;
    /// ships the tree.
    TreePlusChords,
    Complete,
    /// Each pair adjacent independently with probability `edge_percent`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefMode {
    /// Uniform random complete school preferences.
    General,
    /// Every prefix connected in the tree.
    SinglePeakedTree,
    /// Produced by a random bag order of the decomposition.
    SinglePeakedDecomposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotaMode {
    Unit,
    /// Uniform in `1..=2`.
    RandomBounded,
}

macro_rules! named_enum {
    ($ty:ident, $kind:literal, $($variant:ident => $name:literal),+) => {
        impl FromStr for $ty {
            type Err = GeneratorError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    _ => Err(GeneratorError::Unknown { kind: $kind, value: s.to_string() }),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name,)+ })
            }
        }
    };
}

named_enum!(Family, "family",
    Path => "path", RandomTree => "random-tree", PartialKTree => "partial-k-tree",
    TreePlusChords => "tree-plus-chords", Complete => "complete", Random => "random");
named_enum!(PrefMode, "preference mode",
    General => "general", SinglePeakedTree => "single-peaked-tree",
    SinglePeakedDecomposition => "single-peaked-decomposition");
named_enum!(QuotaMode, "quota mode", Unit => "unit", RandomBounded => "random-bounded");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    /// Width for partial k-trees, degree cap for tree-plus-chords.
    pub k: usize,
    pub seed: u64,
    pub pref_mode: PrefMode,
    pub quota_mode: QuotaMode,
    /// Edge probability of the `random` family, in percent.
    pub edge_percent: u32,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            family,
            n,
            m: n,
            k: 1,
            seed,
            pref_mode: PrefMode::General,
            quota_mode: QuotaMode::Unit,
            edge_percent: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub instance: MarketInstance,
    pub decomposition: Option<TreeDecomposition>,
    /// Underlying spanning tree for tree families and tree-plus-chords.
    pub tree: Option<AcquaintanceGraph>,
}

fn inconsistent(msg: impl Into<String>) -> GeneratorError {
    GeneratorError::Inconsistent(msg.into())
}

fn sid(v: usize) -> StudentId {
    StudentId(v)
}

/// Random recursive tree over a shuffled labelling, optionally with a
/// degree cap.
fn random_tree(n: usize, cap: Option<usize>, rng: &mut ChaCha8Rng) -> AcquaintanceGraph {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut degree = vec![0usize; n];
    let mut g = AcquaintanceGraph::empty(n);
    for v in 1..n {
        let open: Vec<usize> = (0..v).filter(|&u| cap.is_none_or(|c| degree[u] < c)).collect();
        let u = open[rng.gen_range(0..open.len())];
        degree[u] += 1;
        degree[v] += 1;
        g.add_edge(sid(labels[u]), sid(labels[v])).expect("fresh edge");
    }
    g
}

fn partial_k_tree(n: usize, k: usize, rng: &mut ChaCha8Rng) -> (AcquaintanceGraph, TreeDecomposition) {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut edges = Vec::new();
    let mut bags: Vec<Vec<usize>> = vec![(0..=k).collect()];
    for a in 0..=k {
        for b in a + 1..=k {
            edges.push((a, b));
        }
    }
    let mut tree_edges = Vec::new();
    for v in k + 1..n {
        let parent = rng.gen_range(0..bags.len());
        let mut bag = bags[parent].clone();
        bag.remove(rng.gen_range(0..bag.len()));
        edges.extend(bag.iter().map(|&u| (u, v)));
        bag.push(v);
        bags.push(bag);
        tree_edges.push((parent, bags.len() - 1));
    }
    let mut g = AcquaintanceGraph::empty(n);
    for (a, b) in edges {
        // keep roughly seven in ten edges
        if rng.gen_range(0..10) < 7 {
            g.add_edge(sid(labels[a]), sid(labels[b])).expect("fresh edge");
        }
    }
    let bags = bags
        .into_iter()
        .map(|b| {
            let mut b: Vec<StudentId> = b.into_iter().map(|v| sid(labels[v])).collect();
            b.sort();
            b
        })
        .collect();
    (g, TreeDecomposition::new(bags, tree_edges))
}

fn add_chords(tree: &AcquaintanceGraph, cap: usize, rng: &mut ChaCha8Rng) -> AcquaintanceGraph {
    let n = tree.vertex_count();
    let mut g = tree.clone();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let wanted = rng.gen_range(0..=n);
    let mut added = 0;
    for (a, b) in pairs {
        if added == wanted {
            break;
        }
        let (a, b) = (sid(a), sid(b));
        if !g.are_adjacent(a, b) && g.degree(a) < cap && g.degree(b) < cap {
            g.add_edge(a, b).expect("checked non-adjacent");
            added += 1;
        }
    }
    g
}

fn single_peaked_on_tree(tree: &AcquaintanceGraph, rng: &mut ChaCha8Rng) -> Vec<StudentId> {
    let n = tree.vertex_count();
    let mut ranked = vec![false; n];
    let mut pref = vec![sid(rng.gen_range(0..n))];
    ranked[pref[0].idx()] = true;
    while pref.len() < n {
        let mut frontier: Vec<StudentId> =
            pref.iter().flat_map(|&i| tree.neighbors(i).iter().copied()).filter(|j| !ranked[j.idx()]).collect();
        frontier.sort();
        frontier.dedup();
        let next = frontier[rng.gen_range(0..frontier.len())];
        ranked[next.idx()] = true;
        pref.push(next);
    }
    pref
}

fn single_peaked_on_decomposition(n: usize, td: &TreeDecomposition, rng: &mut ChaCha8Rng) -> Vec<StudentId> {
    let l = td.bags.len();
    let mut chosen = vec![false; l];
    let mut ranked = vec![false; n];
    let mut pref = Vec::with_capacity(n);
    let mut take = |bag: usize, chosen: &mut Vec<bool>, rng: &mut ChaCha8Rng| {
        chosen[bag] = true;
        let mut fresh: Vec<StudentId> = td.bags[bag].iter().copied().filter(|i| !ranked[i.idx()]).collect();
        fresh.shuffle(rng);
        for &i in &fresh {
            ranked[i.idx()] = true;
        }
        pref.extend(fresh);
    };
    take(rng.gen_range(0..l), &mut chosen, rng);
    while chosen.iter().any(|c| !c) {
        let options: Vec<usize> = td
            .tree_edges
            .iter()
            .filter_map(|&(a, b)| match (chosen[a], chosen[b]) {
                (true, false) => Some(b),
                (false, true) => Some(a),
                _ => None,
            })
            .collect();
        let next = options[rng.gen_range(0..options.len())];
        take(next, &mut chosen, rng);
    }
    pref
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated, GeneratorError> {
    let GeneratorSpec { family, n, m, k, .. } = *spec;
    if n == 0 {
        return Err(inconsistent("n must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (graph, decomposition, tree) = match family {
        Family::Path => {
            let g = AcquaintanceGraph::from_edges(n, (1..n).map(|v| (sid(v - 1), sid(v)))).expect("path");
            (g.clone(), None, Some(g))
        }
        Family::RandomTree => {
            let g = random_tree(n, None, &mut rng);
            (g.clone(), None, Some(g))
        }
        Family::PartialKTree => {
            if k == 0 || n < k + 1 {
                return Err(inconsistent(format!("partial k-tree needs 1 <= k < n, got k={k}, n={n}")));
            }
            let (g, td) = partial_k_tree(n, k, &mut rng);
            (g, Some(td), None)
        }
        Family::TreePlusChords => {
            if k < 2 && n > 2 {
                return Err(inconsistent("a spanning tree on more than two vertices needs degree cap k >= 2"));
            }
            let t = random_tree(n, Some(k), &mut rng);
            (add_chords(&t, k, &mut rng), None, Some(t))
        }
        Family::Complete => (AcquaintanceGraph::complete(n), None, None),
        Family::Random => {
            let mut g = AcquaintanceGraph::empty(n);
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_range(0..100) < spec.edge_percent {
                        g.add_edge(sid(a), sid(b)).expect("fresh edge");
                    }
                }
            }
            (g, None, None)
        }
    };

    let school_prefs: Vec<Vec<StudentId>> = (0..m)
        .map(|_| match spec.pref_mode {
            PrefMode::General => {
                let mut p: Vec<StudentId> = (0..n).map(sid).collect();
                p.shuffle(&mut rng);
                Ok(p)
            }
            PrefMode::SinglePeakedTree => tree.as_ref().map(|t| single_peaked_on_tree(t, &mut rng)).ok_or_else(|| {
                inconsistent(format!("single-peaked-tree preferences need a tree family, got {family}"))
            }),
            PrefMode::SinglePeakedDecomposition => decomposition
                .as_ref()
                .map(|td| single_peaked_on_decomposition(n, td, &mut rng))
                .ok_or_else(|| inconsistent(format!("decomposition preferences need partial-k-tree, got {family}"))),
        })
        .collect::<Result<_, _>>()?;
    let student_prefs: Vec<Vec<SchoolId>> = (0..n)
        .map(|_| {
            let mut p: Vec<SchoolId> = (0..m).map(SchoolId).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let quotas: Vec<u32> = (0..m)
        .map(|_| match spec.quota_mode {
            QuotaMode::Unit => 1,
            QuotaMode::RandomBounded => rng.gen_range(1..=2),
        })
        .collect();

    let instance = MarketInstance::from_parts(
        (1..=n).map(|v| format!("i{v}")).collect(),
        (1..=m).map(|v| format!("s{v}")).collect(),
        student_prefs,
        school_prefs,
        quotas,
        graph,
    )
    .expect("generated parts are consistent");
    Ok(Generated { instance, decomposition, tree })
}
