//! Market data model: students, schools, contracts, strict preferences,
//! quotas and the student acquaintance graph.
//!
//! A [`MarketInstance`] is always normalized: a contract `(i, s)` exists iff
//! `s` appears in `i`'s list and `i` appears in `s`'s list, and both lists
//! only mention mutually acceptable partners. Raw, possibly inconsistent
//! input lives in [`RawInstance`] until [`MarketInstance::from_raw`]
//! validates and prunes it.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StudentId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchoolId(pub usize);

impl StudentId {
    pub fn idx(self) -> usize {
        self.0
    }
}

impl SchoolId {
    pub fn idx(self) -> usize {
        self.0
    }
}

/// Characters with a structural meaning in the text formats.
pub const RESERVED_CHARS: &[char] = &['=', '>', '-', ',', ':', '{', '}', '#'];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown student `{0}`")]
    UnknownStudent(String),
    #[error("unknown school `{0}`")]
    UnknownSchool(String),
    #[error("matching covers {got} students but the instance has {expected}")]
    MatchingSize { expected: usize, got: usize },
    #[error("pair ({student}, {school}) is not a contract")]
    NotAContract { student: String, school: String },
    #[error("student `{0}` is assigned more than once")]
    DuplicateAssignment(String),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("edge endpoint {0} out of range")]
    VertexOutOfRange(usize),
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
}

/// Undirected simple graph over students.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcquaintanceGraph {
    adj: Vec<Vec<StudentId>>,
    edge_count: usize,
}

impl AcquaintanceGraph {
    pub fn empty(n: usize) -> Self {
        AcquaintanceGraph { adj: vec![Vec::new(); n], edge_count: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (StudentId(a), StudentId(b))));
        Self::from_edges(n, edges).expect("complete graph is simple")
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (StudentId, StudentId)>,
    {
        let mut g = Self::empty(n);
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: StudentId, b: StudentId) -> Result<(), ModelError> {
        let n = self.adj.len();
        for v in [a, b] {
            if v.0 >= n {
                return Err(ModelError::VertexOutOfRange(v.0));
            }
        }
        if a == b {
            return Err(ModelError::SelfLoop(a.0));
        }
        if self.are_adjacent(a, b) {
            return Err(ModelError::DuplicateEdge(a.0.min(b.0), a.0.max(b.0)));
        }
        insert_sorted(&mut self.adj[a.0], b);
        insert_sorted(&mut self.adj[b.0], a);
        self.edge_count += 1;
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Neighbors of `v`, sorted by index.
    pub fn neighbors(&self, v: StudentId) -> &[StudentId] {
        &self.adj[v.0]
    }

    pub fn degree(&self, v: StudentId) -> usize {
        self.adj[v.0].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn are_adjacent(&self, a: StudentId, b: StudentId) -> bool {
        self.adj[a.0].binary_search(&b).is_ok()
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(StudentId, StudentId)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |b| b.0 > a).map(move |&b| (StudentId(a), b)))
            .collect()
    }

    /// True iff every edge of `self` is an edge of `other` (same vertex set).
    pub fn is_subgraph_of(&self, other: &AcquaintanceGraph) -> bool {
        self.vertex_count() == other.vertex_count() && self.edges().into_iter().all(|(a, b)| other.are_adjacent(a, b))
    }
}

fn insert_sorted(v: &mut Vec<StudentId>, x: StudentId) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

/// Unvalidated instance as written in a file, identifiers kept as strings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub students: Vec<String>,
    pub schools: Vec<String>,
    pub quotas: Vec<(String, u32)>,
    /// `(owner, ranked list)`; owner may be a student or a school.
    pub prefs: Vec<(String, Vec<String>)>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Note,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Note => "note",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        !self.issues.iter().any(|i| i.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    fn push(&mut self, severity: Severity, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue { severity, location: location.into(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, issue) in self.issues.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} at {}: {}", issue.severity, issue.location, issue.message)?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `raw` and reports the contract
/// closure pruning that [`MarketInstance::from_raw`] would perform.
pub fn validate_instance(raw: &RawInstance) -> ValidationReport {
    Normalizer::run(raw).1
}

/// Validated, normalized matching market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketInstance {
    students: Vec<String>,
    schools: Vec<String>,
    student_prefs: Vec<Vec<SchoolId>>,
    school_prefs: Vec<Vec<StudentId>>,
    // rank tables, `None` = not a contract
    student_rank: Vec<Vec<Option<u32>>>,
    school_rank: Vec<Vec<Option<u32>>>,
    quotas: Vec<u32>,
    graph: AcquaintanceGraph,
}

impl MarketInstance {
    /// Validates `raw` and builds the normalized instance. Warnings and notes
    /// (e.g. pruned one-sided listings) are returned alongside.
    pub fn from_raw(raw: &RawInstance) -> Result<(MarketInstance, ValidationReport), ModelError> {
        match Normalizer::run(raw) {
            (Some(inst), report) if report.ok() => Ok((inst, report)),
            (_, report) => Err(ModelError::Invalid(report)),
        }
    }

    /// Builds an instance from index-based parts. One-sided listings are
    /// pruned silently; out-of-range or duplicate entries are rejected.
    pub fn from_parts(
        students: Vec<String>,
        schools: Vec<String>,
        student_prefs: Vec<Vec<SchoolId>>,
        school_prefs: Vec<Vec<StudentId>>,
        quotas: Vec<u32>,
        graph: AcquaintanceGraph,
    ) -> Result<MarketInstance, ModelError> {
        let raw = RawInstance {
            prefs: student_prefs
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let names = p.iter().map(|s| schools.get(s.0).cloned().unwrap_or_else(|| format!("#{}", s.0)));
                    (students[i].clone(), names.collect())
                })
                .chain(school_prefs.iter().enumerate().map(|(s, p)| {
                    let names = p.iter().map(|i| students.get(i.0).cloned().unwrap_or_else(|| format!("#{}", i.0)));
                    (schools[s].clone(), names.collect())
                }))
                .collect(),
            quotas: schools.iter().cloned().zip(quotas.iter().copied()).collect(),
            edges: graph.edges().into_iter().map(|(a, b)| (students[a.0].clone(), students[b.0].clone())).collect(),
            students,
            schools,
        };
        if student_prefs.len() != raw.students.len() || school_prefs.len() != raw.schools.len() {
            return Err(ModelError::Invalid(ValidationReport {
                issues: vec![Issue {
                    severity: Severity::Error,
                    location: "prefs".into(),
                    message: "one preference list per agent required".into(),
                }],
            }));
        }
        Self::from_raw(&raw).map(|(inst, _)| inst)
    }

    pub fn num_students(&self) -> usize {
        self.students.len()
    }

    pub fn num_schools(&self) -> usize {
        self.schools.len()
    }

    pub fn students(&self) -> impl Iterator<Item = StudentId> + Clone {
        (0..self.students.len()).map(StudentId)
    }

    pub fn schools(&self) -> impl Iterator<Item = SchoolId> + Clone {
        (0..self.schools.len()).map(SchoolId)
    }

    pub fn student_name(&self, i: StudentId) -> &str {
        &self.students[i.0]
    }

    pub fn school_name(&self, s: SchoolId) -> &str {
        &self.schools[s.0]
    }

    pub fn student_names(&self) -> &[String] {
        &self.students
    }

    pub fn school_names(&self) -> &[String] {
        &self.schools
    }

    pub fn student_id(&self, name: &str) -> Option<StudentId> {
        self.students.iter().position(|n| n == name).map(StudentId)
    }

    pub fn school_id(&self, name: &str) -> Option<SchoolId> {
        self.schools.iter().position(|n| n == name).map(SchoolId)
    }

    /// Acceptable schools of `i`, best first.
    pub fn student_pref(&self, i: StudentId) -> &[SchoolId] {
        &self.student_prefs[i.0]
    }

    /// Acceptable students of `s`, best first.
    pub fn school_pref(&self, s: SchoolId) -> &[StudentId] {
        &self.school_prefs[s.0]
    }

    pub fn quota(&self, s: SchoolId) -> u32 {
        self.quotas[s.0]
    }

    pub fn quotas(&self) -> &[u32] {
        &self.quotas
    }

    pub fn total_quota(&self) -> u64 {
        self.quotas.iter().map(|&q| q as u64).sum()
    }

    pub fn graph(&self) -> &AcquaintanceGraph {
        &self.graph
    }

    pub fn is_contract(&self, i: StudentId, s: SchoolId) -> bool {
        self.student_rank[i.0][s.0].is_some()
    }

    pub fn contracts(&self) -> impl Iterator<Item = (StudentId, SchoolId)> + '_ {
        self.students().flat_map(move |i| self.student_prefs[i.0].iter().map(move |&s| (i, s)))
    }

    /// Position of `s` in `i`'s list (0 = best).
    pub fn student_rank(&self, i: StudentId, s: SchoolId) -> Option<u32> {
        self.student_rank[i.0][s.0]
    }

    /// Position of `i` in `s`'s list (0 = best).
    pub fn school_rank(&self, s: SchoolId, i: StudentId) -> Option<u32> {
        self.school_rank[s.0][i.0]
    }

    /// `s ≻_i current`, where `current = None` is the outside option.
    pub fn student_prefers(&self, i: StudentId, s: SchoolId, current: Option<SchoolId>) -> bool {
        match (self.student_rank(i, s), current) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(r), Some(c)) => match self.student_rank(i, c) {
                Some(rc) => r < rc,
                None => true,
            },
        }
    }

    /// Strict preference of `i` between two outcomes, `None` = unmatched.
    pub fn prefers_outcome(&self, i: StudentId, a: Option<SchoolId>, b: Option<SchoolId>) -> bool {
        match a {
            Some(s) if a != b => self.student_prefers(i, s, b),
            _ => false,
        }
    }

    /// `i ≻_s j`. False whenever `i` is not acceptable to `s`; an acceptable
    /// student beats an unacceptable one.
    pub fn school_prefers(&self, s: SchoolId, i: StudentId, j: StudentId) -> bool {
        match (self.school_rank(s, i), self.school_rank(s, j)) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(a), Some(b)) => a < b,
        }
    }

    /// Same market with `i`'s reported list replaced. Schools outside `i`'s
    /// current contracts are ignored.
    pub fn with_student_pref(&self, i: StudentId, pref: &[SchoolId]) -> MarketInstance {
        let mut next = self.clone();
        let kept: Vec<SchoolId> = pref.iter().copied().filter(|&s| self.is_contract(i, s)).collect();
        for s in self.schools() {
            next.student_rank[i.0][s.0] = None;
        }
        for (r, &s) in kept.iter().enumerate() {
            next.student_rank[i.0][s.0] = Some(r as u32);
        }
        // schools drop i when it no longer lists them
        for s in self.schools() {
            if self.is_contract(i, s) && !kept.contains(&s) {
                next.school_prefs[s.0].retain(|&x| x != i);
                next.rebuild_school_rank(s);
            }
        }
        next.student_prefs[i.0] = kept;
        next
    }

    /// Same market with a different acquaintance graph.
    pub fn with_graph(&self, graph: AcquaintanceGraph) -> MarketInstance {
        assert_eq!(graph.vertex_count(), self.num_students(), "graph must span the students");
        MarketInstance { graph, ..self.clone() }
    }

    fn rebuild_school_rank(&mut self, s: SchoolId) {
        let row = &mut self.school_rank[s.0];
        row.iter_mut().for_each(|r| *r = None);
        for (r, &i) in self.school_prefs[s.0].iter().enumerate() {
            row[i.0] = Some(r as u32);
        }
    }

    /// Convenience constructor of a matching from per-student school names,
    /// `"-"` meaning unmatched.
    pub fn matching(&self, schools: &[&str]) -> Result<Matching, ModelError> {
        if schools.len() != self.num_students() {
            return Err(ModelError::MatchingSize { expected: self.num_students(), got: schools.len() });
        }
        let assignment = schools
            .iter()
            .map(|&name| {
                if name == "-" {
                    Ok(None)
                } else {
                    self.school_id(name).map(Some).ok_or_else(|| ModelError::UnknownSchool(name.to_string()))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Matching::new(self, assignment)
    }
}

struct Normalizer;

impl Normalizer {
    fn run(raw: &RawInstance) -> (Option<MarketInstance>, ValidationReport) {
        let mut report = ValidationReport::default();
        let mut student_idx: HashMap<&str, usize> = HashMap::new();
        let mut school_idx: HashMap<&str, usize> = HashMap::new();

        for (kind, names, idx) in
            [("students", &raw.students, &mut student_idx), ("schools", &raw.schools, &mut school_idx)]
        {
            for name in names {
                check_identifier(&mut report, kind, name);
                if idx.insert(name.as_str(), idx.len()).is_some() {
                    report.push(Severity::Error, kind, format!("duplicate identifier `{name}`"));
                }
            }
        }
        for name in raw.students.iter().filter(|n| school_idx.contains_key(n.as_str())) {
            report.push(Severity::Error, "schools", format!("`{name}` declared as both student and school"));
        }
        // duplicate declarations make the index maps unreliable
        if !report.ok() {
            return (None, report);
        }
        let n = raw.students.len();
        let m = raw.schools.len();

        let mut quotas: Vec<Option<u32>> = vec![None; m];
        for (name, q) in &raw.quotas {
            match school_idx.get(name.as_str()) {
                Some(&s) => {
                    if quotas[s].replace(*q).is_some() {
                        report.push(Severity::Error, "quota", format!("quota for `{name}` given twice"));
                    }
                }
                None => report.push(Severity::Error, "quota", format!("unknown school `{name}`")),
            }
        }
        for (s, q) in quotas.iter().enumerate() {
            if q.is_none() {
                report.push(Severity::Error, "quota", format!("missing quota for school `{}`", raw.schools[s]));
            }
        }

        let mut student_lists: Vec<Option<Vec<usize>>> = vec![None; n];
        let mut school_lists: Vec<Option<Vec<usize>>> = vec![None; m];
        for (owner, list) in &raw.prefs {
            let location = format!("pref {owner}");
            let (target_idx, slot) = if let Some(&i) = student_idx.get(owner.as_str()) {
                (&school_idx, &mut student_lists[i])
            } else if let Some(&s) = school_idx.get(owner.as_str()) {
                (&student_idx, &mut school_lists[s])
            } else {
                report.push(Severity::Error, location, format!("unknown agent `{owner}`"));
                continue;
            };
            if slot.is_some() {
                report.push(Severity::Error, location, "preference given twice");
                continue;
            }
            let mut seen = HashSet::new();
            let mut resolved = Vec::with_capacity(list.len());
            for entry in list {
                match target_idx.get(entry.as_str()) {
                    Some(&x) => {
                        if !seen.insert(x) {
                            report.push(Severity::Error, location.clone(), format!("`{entry}` listed twice"));
                        }
                        resolved.push(x);
                    }
                    None => report.push(
                        Severity::Error,
                        location.clone(),
                        format!("`{entry}` is not a declared partner of `{owner}`"),
                    ),
                }
            }
            *slot = Some(resolved);
        }

        let mut graph = AcquaintanceGraph::empty(n);
        for (a, b) in &raw.edges {
            let location = format!("edges {a}-{b}");
            let ends = (student_idx.get(a.as_str()), student_idx.get(b.as_str()));
            match ends {
                (Some(&x), Some(&y)) => {
                    if let Err(e) = graph.add_edge(StudentId(x), StudentId(y)) {
                        let message = match e {
                            ModelError::SelfLoop(_) => "self-loop".to_string(),
                            ModelError::DuplicateEdge(..) => "duplicate edge".to_string(),
                            other => other.to_string(),
                        };
                        report.push(Severity::Error, location, message);
                    }
                }
                _ => {
                    for end in [a, b] {
                        if !student_idx.contains_key(end.as_str()) {
                            report.push(Severity::Error, location.clone(), format!("undeclared student `{end}`"));
                        }
                    }
                }
            }
        }

        if !report.ok() {
            return (None, report);
        }

        let student_lists: Vec<Vec<usize>> = student_lists.into_iter().map(Option::unwrap_or_default).collect();
        let school_lists: Vec<Vec<usize>> = school_lists.into_iter().map(Option::unwrap_or_default).collect();
        let listed_by_school: HashSet<(usize, usize)> =
            school_lists.iter().enumerate().flat_map(|(s, l)| l.iter().map(move |&i| (i, s))).collect();
        let listed_by_student: HashSet<(usize, usize)> =
            student_lists.iter().enumerate().flat_map(|(i, l)| l.iter().map(move |&s| (i, s))).collect();

        let mut pruned = BTreeSet::new();
        let student_prefs: Vec<Vec<SchoolId>> = student_lists
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.iter()
                    .filter(|&&s| {
                        let keep = listed_by_school.contains(&(i, s));
                        if !keep {
                            pruned.insert((i, s));
                        }
                        keep
                    })
                    .map(|&s| SchoolId(s))
                    .collect()
            })
            .collect();
        let school_prefs: Vec<Vec<StudentId>> = school_lists
            .iter()
            .enumerate()
            .map(|(s, l)| {
                l.iter()
                    .filter(|&&i| {
                        let keep = listed_by_student.contains(&(i, s));
                        if !keep {
                            pruned.insert((i, s));
                        }
                        keep
                    })
                    .map(|&i| StudentId(i))
                    .collect()
            })
            .collect();
        for (i, s) in pruned {
            report.push(
                Severity::Warning,
                format!("contract ({}, {})", raw.students[i], raw.schools[s]),
                "listed by only one side; removed from contracts",
            );
        }

        let mut student_rank = vec![vec![None; m]; n];
        for (i, l) in student_prefs.iter().enumerate() {
            for (r, s) in l.iter().enumerate() {
                student_rank[i][s.0] = Some(r as u32);
            }
        }
        let mut school_rank = vec![vec![None; n]; m];
        for (s, l) in school_prefs.iter().enumerate() {
            for (r, i) in l.iter().enumerate() {
                school_rank[s][i.0] = Some(r as u32);
            }
        }
        let inst = MarketInstance {
            students: raw.students.clone(),
            schools: raw.schools.clone(),
            student_prefs,
            school_prefs,
            student_rank,
            school_rank,
            quotas: quotas.into_iter().map(|q| q.unwrap_or(0)).collect(),
            graph,
        };
        (Some(inst), report)
    }
}

fn check_identifier(report: &mut ValidationReport, kind: &str, name: &str) {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || RESERVED_CHARS.contains(&c)) {
        report.push(Severity::Error, kind, format!("invalid identifier `{name}`"));
    }
}

/// Partial assignment of students to schools; `None` is the outside option.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assignment: Vec<Option<SchoolId>>,
}

impl Matching {
    /// Checks that every assigned pair is a contract of `inst`.
    pub fn new(inst: &MarketInstance, assignment: Vec<Option<SchoolId>>) -> Result<Matching, ModelError> {
        if assignment.len() != inst.num_students() {
            return Err(ModelError::MatchingSize { expected: inst.num_students(), got: assignment.len() });
        }
        for (i, slot) in assignment.iter().enumerate() {
            if let Some(s) = *slot {
                if s.0 >= inst.num_schools() {
                    return Err(ModelError::UnknownSchool(format!("#{}", s.0)));
                }
                if !inst.is_contract(StudentId(i), s) {
                    return Err(ModelError::NotAContract {
                        student: inst.student_name(StudentId(i)).to_string(),
                        school: inst.school_name(s).to_string(),
                    });
                }
            }
        }
        Ok(Matching { assignment })
    }

    pub(crate) fn from_vec_unchecked(assignment: Vec<Option<SchoolId>>) -> Matching {
        Matching { assignment }
    }

    pub fn empty(n: usize) -> Matching {
        Matching { assignment: vec![None; n] }
    }

    pub(crate) fn set(&mut self, i: usize, s: Option<SchoolId>) {
        self.assignment[i] = s;
    }

    pub fn school_of(&self, i: StudentId) -> Option<SchoolId> {
        self.assignment[i.0]
    }

    pub fn assignment(&self) -> &[Option<SchoolId>] {
        &self.assignment
    }

    pub fn len_students(&self) -> usize {
        self.assignment.len()
    }

    /// Number of matched students.
    pub fn size(&self) -> usize {
        self.assignment.iter().filter(|s| s.is_some()).count()
    }

    /// `Y_s`, in student index order.
    pub fn students_at(&self, s: SchoolId) -> impl Iterator<Item = StudentId> + '_ {
        self.assignment.iter().enumerate().filter(move |(_, x)| **x == Some(s)).map(|(i, _)| StudentId(i))
    }

    /// Seats used per school.
    pub fn occupancy(&self, num_schools: usize) -> Vec<u32> {
        let mut occ = vec![0u32; num_schools];
        for s in self.assignment.iter().flatten() {
            occ[s.0] += 1;
        }
        occ
    }

    /// Copy of `self` with student `i` moved to `s`.
    pub fn with(&self, i: StudentId, s: Option<SchoolId>) -> Matching {
        let mut next = self.clone();
        next.assignment[i.0] = s;
        next
    }

    /// Compact rendering `[s3, s1, -]`.
    pub fn display<'a>(&'a self, inst: &'a MarketInstance) -> impl fmt::Display + 'a {
        MatchingDisplay { inst, y: self }
    }
}

struct MatchingDisplay<'a> {
    inst: &'a MarketInstance,
    y: &'a Matching,
}

impl fmt::Display for MatchingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (n, s) in self.y.assignment.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            match s {
                Some(s) => f.write_str(self.inst.school_name(*s))?,
                None => f.write_str("-")?,
            }
        }
        f.write_str("]")
    }
}

/// True iff no school holds more students than its quota.
pub fn is_feasible(inst: &MarketInstance, y: &Matching) -> Result<bool, ModelError> {
    if y.len_students() != inst.num_students() {
        return Err(ModelError::MatchingSize { expected: inst.num_students(), got: y.len_students() });
    }
    if let Some(s) = y.assignment().iter().flatten().find(|s| s.0 >= inst.num_schools()) {
        return Err(ModelError::UnknownSchool(format!("#{}", s.0)));
    }
    Ok(y.occupancy(inst.num_schools()).iter().zip(inst.quotas()).all(|(used, q)| used <= q))
}
