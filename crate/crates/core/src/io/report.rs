use crate::mechanisms::MechanismTrace;
use crate::model::{MarketInstance, Matching, SchoolId, StudentId};
use crate::properties::{EnvyReport, PropertyReport};

use super::format_matching;

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValueBlock {
    pub entries: Vec<(String, String)>,
}

impl KeyValueBlock {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn students(inst: &MarketInstance, set: &[StudentId]) -> String {
    set.iter().map(|&i| inst.student_name(i)).collect::<Vec<_>>().join(",")
}

fn pair(inst: &MarketInstance, p: Option<(StudentId, StudentId)>) -> String {
    p.map_or_else(|| "-".into(), |(a, b)| format!("{}>{}", inst.student_name(a), inst.student_name(b)))
}

fn seat(inst: &MarketInstance, p: Option<(StudentId, SchoolId)>) -> String {
    p.map_or_else(|| "-".into(), |(i, s)| format!("{}@{}", inst.student_name(i), inst.school_name(s)))
}

fn assignment(inst: &MarketInstance, y: &Matching) -> String {
    format_matching(inst, y).trim_start_matches("match:").trim().to_string()
}

pub fn format_property_report(inst: &MarketInstance, y: &Matching, report: &PropertyReport) -> KeyValueBlock {
    let mut kv = KeyValueBlock::default();
    kv.push("matching", assignment(inst, y));
    kv.push("size", y.size());
    kv.push("fair", report.fair);
    kv.push("lef", report.lef);
    kv.push("nonwasteful", report.nonwasteful);
    kv.push("stable", report.stable);
    kv.push("pe", report.pareto_efficient);
    kv.push("mb", report.mutually_best);
    kv.push("ls", report.locally_stable);
    kv.push("ef_level", report.envy.ef_level());
    kv.push("erf_level", report.envy.erf_level());
    kv.push("local_ef_level", report.envy.local_ef_level());
    kv.push("local_erf_level", report.envy.local_erf_level());
    kv.push("envy_witness", pair(inst, report.envy_witness));
    kv.push("local_envy_witness", pair(inst, report.local_envy_witness));
    kv.push("claimed_seat", seat(inst, report.claimed_seat));
    kv.push("dominating", report.dominating.as_ref().map_or_else(|| "-".into(), |d| assignment(inst, d)));
    kv.push(
        "blocking",
        report.blocking.map_or_else(
            || "-".into(),
            |(i, s, j)| format!("{}@{}/{}", inst.student_name(i), inst.school_name(s), inst.student_name(j)),
        ),
    );
    kv
}

const CSV_COLUMNS: &str =
    "matching,size,fair,lef,nonwasteful,stable,pe,mb,ls,ef_level,erf_level,local_ef_level,local_erf_level";

/// Fixed column order of [`property_csv_row`].
pub fn property_csv_header() -> &'static str {
    CSV_COLUMNS
}

pub fn property_csv_row(inst: &MarketInstance, y: &Matching, report: &PropertyReport) -> String {
    let kv = format_property_report(inst, y, report);
    CSV_COLUMNS.split(',').map(|c| kv.get(c).unwrap_or("")).collect::<Vec<_>>().join(",")
}

pub fn format_envy_report(inst: &MarketInstance, envy: &EnvyReport) -> KeyValueBlock {
    let mut kv = KeyValueBlock::default();
    kv.push("ef_level", envy.ef_level());
    kv.push("erf_level", envy.erf_level());
    kv.push("local_ef_level", envy.local_ef_level());
    kv.push("local_erf_level", envy.local_erf_level());
    for i in inst.students() {
        let name = inst.student_name(i);
        kv.push(format!("ev.{name}"), students(inst, &envy.envies[i.idx()]));
        kv.push(format!("evr.{name}"), students(inst, &envy.envied_by[i.idx()]));
        kv.push(format!("loc_ev.{name}"), students(inst, &envy.local_envies[i.idx()]));
        kv.push(format!("loc_evr.{name}"), students(inst, &envy.local_envied_by[i.idx()]));
    }
    kv
}

/// One `event step=... student=... school=... iter=...` line per event,
/// followed by `note ...` lines.
pub fn format_trace(inst: &MarketInstance, trace: &MechanismTrace) -> String {
    let mut out = String::new();
    for e in &trace.events {
        let school = e.school.map_or("-", |s| inst.school_name(s));
        out.push_str(&format!(
            "event step={} student={} school={} iter={}\n",
            e.step,
            inst.student_name(e.student),
            school,
            e.iteration
        ));
    }
    for note in &trace.notes {
        out.push_str(&format!("note {note}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mechanisms::{b_lt2, BltOptions};
    use crate::properties::check_properties;

    #[test]
    fn property_block_and_csv_agree() {
        let inst = fixtures::by_name("lef-not-ls-quota2").unwrap().instance;
        let y = inst.matching(&["s1", "s2"]).unwrap();
        let r = check_properties(&inst, &y).unwrap();
        let kv = format_property_report(&inst, &y, &r);
        assert_eq!(kv.get("lef"), Some("true"));
        assert_eq!(kv.get("ls"), Some("false"));
        assert_eq!(kv.get("dominating"), Some("i1=s2 i2=s2"));
        assert_eq!(kv.get("blocking"), Some("i1@s2/i2"));
        let row = property_csv_row(&inst, &y, &r);
        assert_eq!(row.split(',').count(), property_csv_header().split(',').count());
        assert!(row.starts_with("i1=s1 i2=s2,2,"));
        assert!(kv.to_string().contains("pe=false\n"));
    }

    #[test]
    fn trace_lines() {
        let inst = fixtures::by_name("blt2-vs-da").unwrap().instance;
        let (_, trace) = b_lt2(&inst, &BltOptions::default()).unwrap();
        let text = format_trace(&inst, &trace);
        assert_eq!(text.lines().next(), Some("event step=MB student=i2 school=s1 iter=0"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn envy_block_lists_sets() {
        let inst = fixtures::by_name("path-no-lef-pe").unwrap().instance;
        let y = inst.matching(&["s1", "s2", "s3"]).unwrap();
        let kv = format_envy_report(&inst, &crate::properties::envy_report(&inst, &y));
        assert_eq!(kv.get("loc_ev.i3"), Some("i2"));
        assert_eq!(kv.get("local_ef_level"), Some("1"));
    }
}
