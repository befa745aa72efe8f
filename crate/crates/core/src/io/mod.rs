//! Line-based text formats for instances, matchings and tree
//! decompositions, plus report emitters.
//!
//! Instance files list their sections in a fixed order:
//!
//! ```text
//! students: i1 i2 i3
//! schools: s1 s2 s3
//! quota: s1=1 s2=1 s3=2
//! pref i1: s1 > s2            # best first; omitted = unacceptable
//! pref s1: i2 > i1 > i3
//! edges: i1-i2 i2-i3
//! ```

mod report;

pub use report::{
    format_envy_report, format_property_report, format_trace, property_csv_header, property_csv_row, KeyValueBlock,
};

use std::fmt;

use thiserror::Error;

use crate::graph::TreeDecomposition;
use crate::model::{MarketInstance, Matching, ModelError, RawInstance, SchoolId, StudentId};
use crate::oracle::SdFeasibility;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A comment-stripped, non-empty line with its 1-based number.
struct Line<'a> {
    number: usize,
    text: &'a str,
    // byte offset of `text` in the original line
    offset: usize,
}

impl<'a> Line<'a> {
    fn err(&self, at: &str, message: impl Into<String>) -> ParseError {
        let column = self.column_of(at);
        ParseError { line: self.number, column, message: message.into() }
    }

    fn column_of(&self, at: &str) -> usize {
        let base = self.text.as_ptr() as usize;
        let p = at.as_ptr() as usize;
        let within = if p >= base && p <= base + self.text.len() { p - base } else { 0 };
        self.offset + within + 1
    }

    /// Splits `key: rest`, returning `(key, rest)`.
    fn header(&self) -> Option<(&'a str, &'a str)> {
        let colon = self.text.find(':')?;
        Some((self.text[..colon].trim(), &self.text[colon + 1..]))
    }
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(n, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim_start();
        let offset = body.len() - trimmed.len();
        let trimmed = trimmed.trim_end();
        (!trimmed.is_empty()).then_some(Line { number: n + 1, text: trimmed, offset })
    })
}

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split_whitespace()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Students,
    Schools,
    Quota,
    Prefs,
    Edges,
}

/// Parses the instance text without semantic validation.
pub fn parse_raw_instance(text: &str) -> Result<RawInstance, ParseError> {
    let mut raw = RawInstance::default();
    let mut last: Option<Section> = None;
    let mut eof = ParseError { line: 1, column: 1, message: "missing `students:` section".into() };
    for line in lines(text) {
        eof.line = line.number + 1;
        let Some((key, rest)) = line.header() else {
            return Err(line.err(line.text, "expected `key: value`"));
        };
        let section = match key {
            "students" => Section::Students,
            "schools" => Section::Schools,
            "quota" => Section::Quota,
            "edges" => Section::Edges,
            k if k.starts_with("pref") && k[4..].starts_with(char::is_whitespace) => Section::Prefs,
            _ => return Err(line.err(line.text, format!("unknown section `{key}`"))),
        };
        let in_order = match last {
            None => section == Section::Students,
            Some(prev) if section == Section::Prefs => prev == Section::Prefs || prev == Section::Quota,
            Some(prev) => section as u8 == prev as u8 + 1 || (prev == Section::Quota && section == Section::Edges),
        };
        if !in_order {
            return Err(line.err(line.text, format!("section `{key}` out of order")));
        }
        last = Some(section);
        match section {
            Section::Students => raw.students = tokens(rest).map(str::to_string).collect(),
            Section::Schools => raw.schools = tokens(rest).map(str::to_string).collect(),
            Section::Quota => {
                for tok in tokens(rest) {
                    let (name, value) = tok
                        .split_once('=')
                        .ok_or_else(|| line.err(tok, format!("expected `school=quota`, got `{tok}`")))?;
                    let q: u32 = value.parse().map_err(|_| line.err(tok, format!("malformed quota `{value}`")))?;
                    if name.is_empty() {
                        return Err(line.err(tok, "missing school name"));
                    }
                    raw.quotas.push((name.to_string(), q));
                }
            }
            Section::Prefs => {
                let owner = key[4..].trim();
                if owner.is_empty() || owner.contains(char::is_whitespace) {
                    return Err(line.err(line.text, "expected `pref <agent>:`"));
                }
                let mut list = Vec::new();
                if !rest.trim().is_empty() {
                    for entry in rest.split('>') {
                        let name = entry.trim();
                        if name.is_empty() || name.contains(char::is_whitespace) {
                            return Err(line.err(entry, "expected one identifier between `>`"));
                        }
                        list.push(name.to_string());
                    }
                }
                raw.prefs.push((owner.to_string(), list));
            }
            Section::Edges => {
                for tok in tokens(rest) {
                    match tok.split_once('-') {
                        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains('-') => {
                            raw.edges.push((a.to_string(), b.to_string()))
                        }
                        _ => return Err(line.err(tok, format!("malformed edge `{tok}`"))),
                    }
                }
            }
        }
    }
    match last {
        None => Err(eof),
        Some(s) if s < Section::Quota => {
            eof.message = "missing `quota:` section".into();
            Err(eof)
        }
        _ => Ok(raw),
    }
}

/// Parses and validates an instance. Warnings from normalization are
/// returned with the instance.
pub fn parse_instance(text: &str) -> Result<(MarketInstance, crate::model::ValidationReport), IoError> {
    let raw = parse_raw_instance(text)?;
    Ok(MarketInstance::from_raw(&raw)?)
}

/// Canonical text form; `parse_instance(serialize_instance(x)) == x`.
pub fn serialize_instance(inst: &MarketInstance) -> String {
    let mut out = String::new();
    out.push_str(&format!("students: {}\n", inst.student_names().join(" ")));
    out.push_str(&format!("schools: {}\n", inst.school_names().join(" ")));
    let quotas: Vec<String> = inst.schools().map(|s| format!("{}={}", inst.school_name(s), inst.quota(s))).collect();
    out.push_str(&format!("quota: {}\n", quotas.join(" ")));
    for i in inst.students() {
        let list: Vec<&str> = inst.student_pref(i).iter().map(|&s| inst.school_name(s)).collect();
        push_pref(&mut out, inst.student_name(i), &list);
    }
    for s in inst.schools() {
        let list: Vec<&str> = inst.school_pref(s).iter().map(|&i| inst.student_name(i)).collect();
        push_pref(&mut out, inst.school_name(s), &list);
    }
    let edges: Vec<String> = inst
        .graph()
        .edges()
        .into_iter()
        .map(|(a, b)| format!("{}-{}", inst.student_name(a), inst.student_name(b)))
        .collect();
    if edges.is_empty() {
        out.push_str("edges:\n");
    } else {
        out.push_str(&format!("edges: {}\n", edges.join(" ")));
    }
    out
}

fn push_pref(out: &mut String, owner: &str, list: &[&str]) {
    if list.is_empty() {
        out.push_str(&format!("pref {owner}:\n"));
    } else {
        out.push_str(&format!("pref {owner}: {}\n", list.join(" > ")));
    }
}

/// Parses `match: i1=s1 i2=- i3=s2`. Students not mentioned are unmatched.
pub fn parse_matching(inst: &MarketInstance, text: &str) -> Result<Matching, IoError> {
    let mut assignment: Vec<Option<SchoolId>> = vec![None; inst.num_students()];
    let mut seen = vec![false; inst.num_students()];
    let mut found = false;
    for line in lines(text) {
        let Some(("match", rest)) = line.header() else {
            return Err(line.err(line.text, "expected `match:` line").into());
        };
        if found {
            return Err(line.err(line.text, "more than one `match:` line").into());
        }
        found = true;
        for tok in tokens(rest) {
            let (student, school) =
                tok.split_once('=').ok_or_else(|| line.err(tok, format!("expected `student=school`, got `{tok}`")))?;
            let i = inst.student_id(student).ok_or_else(|| ModelError::UnknownStudent(student.to_string()))?;
            if std::mem::replace(&mut seen[i.idx()], true) {
                return Err(ModelError::DuplicateAssignment(student.to_string()).into());
            }
            assignment[i.idx()] = if school == "-" {
                None
            } else {
                Some(inst.school_id(school).ok_or_else(|| ModelError::UnknownSchool(school.to_string()))?)
            };
        }
    }
    if !found {
        return Err(ParseError { line: 1, column: 1, message: "missing `match:` line".into() }.into());
    }
    Ok(Matching::new(inst, assignment)?)
}

pub fn format_matching(inst: &MarketInstance, y: &Matching) -> String {
    let parts: Vec<String> = inst
        .students()
        .map(|i| {
            let school = y.school_of(i).map_or("-", |s| inst.school_name(s));
            format!("{}={}", inst.student_name(i), school)
        })
        .collect();
    format!("match: {}", parts.join(" "))
}

/// Parses
///
/// ```text
/// bags: B1={i3,i4,i5} B2={i2,i3,i4}
/// tree: B1-B2
/// ```
pub fn parse_decomposition(inst: &MarketInstance, text: &str) -> Result<TreeDecomposition, IoError> {
    let mut names: Vec<String> = Vec::new();
    let mut bags: Vec<Vec<StudentId>> = Vec::new();
    let mut tree_edges = Vec::new();
    let mut have_bags = false;
    for line in lines(text) {
        match line.header() {
            Some(("bags", rest)) if !have_bags => {
                have_bags = true;
                let mut cursor = rest;
                loop {
                    cursor = cursor.trim_start();
                    if cursor.is_empty() {
                        break;
                    }
                    let eq = cursor.find('=').ok_or_else(|| line.err(cursor, "expected `name={...}`"))?;
                    let name = cursor[..eq].trim();
                    let after = cursor[eq + 1..].trim_start();
                    if name.is_empty() || !after.starts_with('{') {
                        return Err(line.err(cursor, "expected `name={...}`").into());
                    }
                    let close = after.find('}').ok_or_else(|| line.err(after, "unterminated bag"))?;
                    let mut bag = Vec::new();
                    for member in after[1..close].split(',') {
                        let member = member.trim();
                        if member.is_empty() {
                            continue;
                        }
                        let i =
                            inst.student_id(member).ok_or_else(|| ModelError::UnknownStudent(member.to_string()))?;
                        if bag.contains(&i) {
                            return Err(line.err(member, format!("`{member}` repeated in bag `{name}`")).into());
                        }
                        bag.push(i);
                    }
                    if names.iter().any(|n| n == name) {
                        return Err(line.err(cursor, format!("duplicate bag `{name}`")).into());
                    }
                    names.push(name.to_string());
                    bags.push(bag);
                    cursor = &after[close + 1..];
                }
            }
            Some(("tree", rest)) if have_bags => {
                for tok in tokens(rest) {
                    let (a, b) =
                        tok.split_once('-').ok_or_else(|| line.err(tok, format!("malformed tree edge `{tok}`")))?;
                    let find = |n: &str| names.iter().position(|x| x == n);
                    match (find(a), find(b)) {
                        (Some(x), Some(y)) => tree_edges.push((x, y)),
                        _ => return Err(line.err(tok, format!("tree edge `{tok}` names an unknown bag")).into()),
                    }
                }
            }
            _ => return Err(line.err(line.text, "expected `bags:` then `tree:`").into()),
        }
    }
    if !have_bags {
        return Err(ParseError { line: 1, column: 1, message: "missing `bags:` line".into() }.into());
    }
    Ok(TreeDecomposition { bag_names: names, bags, tree_edges })
}

pub fn serialize_decomposition(inst: &MarketInstance, td: &TreeDecomposition) -> String {
    let bags: Vec<String> = td
        .bags
        .iter()
        .enumerate()
        .map(|(j, bag)| {
            let members: Vec<&str> = bag.iter().map(|&i| inst.student_name(i)).collect();
            format!("{}={{{}}}", td.bag_name(j), members.join(","))
        })
        .collect();
    let tree: Vec<String> =
        td.tree_edges.iter().map(|&(a, b)| format!("{}-{}", td.bag_name(a), td.bag_name(b))).collect();
    format!("bags: {}\ntree: {}\n", bags.join(" "), tree.join(" "))
}

/// Parses an object-allocation instance:
///
/// ```text
/// agents: a1 a2
/// objects: o1 o2
/// pref a1: o2 > o1
/// pref a2: o1 > o2
/// ```
pub fn parse_sd_feasibility(text: &str, pair: (&str, &str)) -> Result<SdFeasibility, IoError> {
    let mut agents: Vec<String> = Vec::new();
    let mut objects: Vec<String> = Vec::new();
    let mut prefs: Vec<Option<Vec<usize>>> = Vec::new();
    let mut stage = 0;
    for line in lines(text) {
        let Some((key, rest)) = line.header() else {
            return Err(line.err(line.text, "expected `key: value`").into());
        };
        match (stage, key) {
            (0, "agents") => {
                agents = tokens(rest).map(str::to_string).collect();
                prefs = vec![None; agents.len()];
                stage = 1;
            }
            (1, "objects") => {
                objects = tokens(rest).map(str::to_string).collect();
                stage = 2;
            }
            (2, k) if k.starts_with("pref ") => {
                let owner = k[5..].trim();
                let a = agents
                    .iter()
                    .position(|x| x == owner)
                    .ok_or_else(|| line.err(k, format!("unknown agent `{owner}`")))?;
                let mut list = Vec::new();
                for entry in rest.split('>') {
                    let name = entry.trim();
                    let o = objects
                        .iter()
                        .position(|x| x == name)
                        .ok_or_else(|| line.err(entry, format!("unknown object `{name}`")))?;
                    list.push(o);
                }
                if prefs[a].replace(list).is_some() {
                    return Err(line.err(k, format!("preference for `{owner}` given twice")).into());
                }
            }
            _ => return Err(line.err(line.text, "expected `agents:`, `objects:`, then `pref` lines").into()),
        }
    }
    let agent =
        agents.iter().position(|x| x == pair.0).ok_or_else(|| ModelError::UnknownStudent(pair.0.to_string()))?;
    let object =
        objects.iter().position(|x| x == pair.1).ok_or_else(|| ModelError::UnknownSchool(pair.1.to_string()))?;
    let prefs = prefs
        .into_iter()
        .enumerate()
        .map(|(a, p)| {
            p.ok_or_else(|| ParseError {
                line: 1,
                column: 1,
                message: format!("missing preference for `{}`", agents[a]),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    SdFeasibility::new(agents, objects, prefs, (agent, object))
        .map_err(|e| IoError::Parse(ParseError { line: 1, column: 1, message: e.to_string() }))
}

pub fn serialize_sd_feasibility(problem: &SdFeasibility) -> String {
    let mut out = format!("agents: {}\nobjects: {}\n", problem.agents.join(" "), problem.objects.join(" "));
    for (a, list) in problem.prefs.iter().enumerate() {
        let names: Vec<&str> = list.iter().map(|&o| problem.objects[o].as_str()).collect();
        out.push_str(&format!("pref {}: {}\n", problem.agents[a], names.join(" > ")));
    }
    out
}

impl fmt::Display for KeyValueBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
