//! Named regression markets with their expected artifacts. [`verify`]
//! re-derives every expectation with the mechanisms and oracles.

use crate::graph::TreeDecomposition;
use crate::io::{parse_decomposition, parse_instance, serialize_instance};
use crate::mechanisms::{b_lt2, b_lt_k_plus_1, deferred_acceptance, serial_dictatorship, BltOptions, MasterList};
use crate::model::{MarketInstance, Matching};
use crate::oracle::{
    check_lattice_closure, decide_lee, enumerate_matchings, reduce_sd_feasibility_to_lee, rural_hospitals_check,
    satisfies, Limits, MatchingFilter, SdFeasibility,
};

/// Mechanism referenced by an expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureMechanism {
    Da,
    Blt2,
    BltK(usize),
    Sd(&'static [&'static str]),
}

/// Matchings are written per student in declared order, `"-"` = unmatched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    /// The full set of matchings passing `filter`, in any order.
    Matchings {
        filter: &'static str,
        expected: Vec<&'static [&'static str]>,
    },
    Output {
        mechanism: FixtureMechanism,
        expected: &'static [&'static str],
    },
    OutputSatisfies {
        mechanism: FixtureMechanism,
        filter: &'static str,
    },
    /// Whether `matching` meets every requirement of `filter`.
    Holds {
        matching: &'static [&'static str],
        filter: &'static str,
        expected: bool,
    },
    /// Whether a locally envy-free and Pareto-efficient matching exists.
    LeeExists(bool),
    LefPeSizes(&'static [usize]),
    /// Two LEF matchings without a common LEF upper bound, and no
    /// student-optimal LEF matching.
    LatticeFailure {
        a: &'static [&'static str],
        b: &'static [&'static str],
    },
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    /// The claim the fixture regresses, in words.
    pub claim: &'static str,
    pub instance: MarketInstance,
    pub decomposition: Option<TreeDecomposition>,
    pub expectations: Vec<Expectation>,
}

impl Fixture {
    pub fn text(&self) -> String {
        serialize_instance(&self.instance)
    }
}

const PATH_NO_LEF_PE: &str = "\
students: i1 i2 i3
schools: s1 s2 s3
quota: s1=1 s2=1 s3=1
pref i1: s1 > s2 > s3
pref i2: s2 > s1 > s3
pref i3: s1 > s2 > s3
pref s1: i2 > i1 > i3
pref s2: i1 > i3 > i2
pref s3: i1 > i2 > i3
edges: i1-i2 i2-i3
";

const SP_SCHOOLS: &str = "\
pref s1: i3 > i2 > i1
pref s2: i1 > i2 > i3
pref s3: i1 > i2 > i3
edges: i1-i2 i2-i3
";

const SP_HEADER: &str = "students: i1 i2 i3\nschools: s1 s2 s3\nquota: s1=1 s2=1 s3=1\n";

const BLT2_VS_DA: &str = "\
students: i1 i2 i3 i4 i5
schools: s1 s2 s3 s4 s5
quota: s1=1 s2=1 s3=1 s4=1 s5=1
pref i1: s2 > s3 > s4 > s1 > s5
pref i2: s1 > s2 > s3 > s4 > s5
pref i3: s4 > s3 > s2 > s1 > s5
pref i4: s2 > s3 > s4 > s1 > s5
pref i5: s3 > s5 > s1 > s2 > s4
pref s1: i2 > i1 > i3 > i4 > i5
pref s2: i5 > i4 > i3 > i2 > i1
pref s3: i1 > i2 > i3 > i4 > i5
pref s4: i4 > i3 > i2 > i1 > i5
pref s5: i1 > i2 > i3 > i4 > i5
edges: i1-i2 i2-i3 i3-i4 i4-i5
";

const LATTICE_FAILURE: &str = "\
students: i1 i2 i3
schools: s1 s2 s3
quota: s1=1 s2=1 s3=1
pref i1: s1 > s2 > s3
pref i2: s1 > s2 > s3
pref i3: s1 > s2 > s3
pref s1: i1 > i2 > i3
pref s2: i1 > i2 > i3
pref s3: i1 > i2 > i3
edges: i1-i2 i1-i3
";

// i2 only accepts s2, so the schools' lists omit it elsewhere
const RURAL_FAILURE: &str = "\
students: i1 i2 i3
schools: s1 s2 s3
quota: s1=1 s2=1 s3=1
pref i1: s1 > s2 > s3
pref i2: s2
pref i3: s1 > s2 > s3
pref s1: i1 > i3
pref s2: i3 > i2 > i1
pref s3: i1 > i3
edges: i1-i2 i2-i3
";

const ENVY_EXAMPLE: &str = "\
students: i1 i2
schools: s1
quota: s1=1
pref i1: s1
pref i2: s1
pref s1: i1 > i2
edges:
";

const QUOTA_TWO_PAIR: &str = "\
students: i1 i2
schools: s1 s2
quota: s1=1 s2=2
pref i1: s2 > s1
pref i2: s2 > s1
pref s1: i1 > i2
pref s2: i2 > i1
edges: i1-i2
";

const LEFPE_NOT_LS: &str = "\
students: i1 i2 i3
schools: s1 s2
quota: s1=1 s2=2
pref i1: s2 > s1
pref i2: s2 > s1
pref i3: s2 > s1
pref s1: i1 > i2 > i3
pref s2: i2 > i1 > i3
edges: i1-i2 i2-i3
";

const TREEWIDTH2_MARKET: &str = "\
students: i1 i2 i3 i4 i5 i6 i7
schools: s1 s2 s3 s4 s5 s6 s7
quota: s1=1 s2=1 s3=1 s4=1 s5=1 s6=1 s7=1
pref i1: s2 > s7 > s5 > s1 > s3 > s4 > s6
pref i2: s1 > s5 > s2 > s7 > s6 > s3 > s4
pref i3: s1 > s4 > s7 > s2 > s5 > s3 > s6
pref i4: s3 > s1 > s6 > s5 > s2 > s4 > s7
pref i5: s6 > s3 > s4 > s1 > s2 > s5 > s7
pref i6: s3 > s6 > s1 > s4 > s2 > s5 > s7
pref i7: s4 > s2 > s1 > s3 > s5 > s6 > s7
pref s1: i4 > i3 > i5 > i2 > i1 > i7 > i6
pref s2: i1 > i2 > i3 > i4 > i5 > i7 > i6
pref s3: i6 > i5 > i4 > i3 > i7 > i2 > i1
pref s4: i7 > i3 > i5 > i4 > i6 > i2 > i1
pref s5: i2 > i3 > i4 > i1 > i5 > i6 > i7
pref s6: i5 > i4 > i3 > i6 > i7 > i2 > i1
pref s7: i3 > i1 > i2 > i4 > i5 > i7 > i6
edges: i1-i2 i1-i3 i2-i3 i2-i4 i3-i4 i3-i5 i3-i7 i4-i5 i4-i6 i5-i6 i5-i7
";

const TREEWIDTH2_DECOMPOSITION: &str = "\
bags: B1={i3,i4,i5} B2={i2,i3,i4} B3={i1,i2,i3} B4={i3,i5,i7} B5={i4,i5,i6}
tree: B1-B2 B2-B3 B1-B4 B1-B5
";

// s1 has two peaks on the path but is single-peaked on the decomposition
const DOUBLE_PEAKED: &str = "\
students: i1 i2 i3 i4 i5
schools: s1 s2
quota: s1=1 s2=1
pref i1: s1 > s2
pref i2: s1 > s2
pref i3: s2 > s1
pref i4: s1 > s2
pref i5: s2 > s1
pref s1: i2 > i4 > i3 > i1 > i5
pref s2: i3 > i2 > i4 > i1 > i5
edges: i1-i2 i2-i3 i3-i4 i4-i5
";

const DOUBLE_PEAKED_DECOMPOSITION: &str = "\
bags: B1={i1,i2} B2={i2,i3,i4} B3={i4,i5}
tree: B1-B2 B2-B3
";

fn parse(text: &str) -> MarketInstance {
    parse_instance(text).expect("fixture text is valid").0
}

fn sp_profile(i1: &str, i2: &str, i3: &str) -> MarketInstance {
    parse(&format!("{SP_HEADER}pref i1: {i1}\npref i2: {i2}\npref i3: {i3}\n{SP_SCHOOLS}"))
}

fn fixture(
    name: &'static str,
    claim: &'static str,
    instance: MarketInstance,
    expectations: Vec<Expectation>,
) -> Fixture {
    Fixture { name, claim, instance, decomposition: None, expectations }
}

/// The SD-feasibility question behind the reduction template.
pub fn reduction_template_problem() -> SdFeasibility {
    SdFeasibility::new(
        vec!["a1".into(), "a2".into(), "a3".into()],
        vec!["o1".into(), "o2".into(), "o3".into()],
        vec![vec![0, 1, 2], vec![0, 1, 2], vec![1, 0, 2]],
        (0, 1),
    )
    .expect("valid template")
}

pub fn all() -> Vec<Fixture> {
    use Expectation::*;
    use FixtureMechanism::*;
    const ORDER_1: &str = "s1 > s2 > s3";
    const ORDER_2: &str = "s2 > s1 > s3";

    let treewidth2 = parse(TREEWIDTH2_MARKET);
    let td = parse_decomposition(&treewidth2, TREEWIDTH2_DECOMPOSITION).expect("valid decomposition");
    let double = parse(DOUBLE_PEAKED);
    let double_td = parse_decomposition(&double, DOUBLE_PEAKED_DECOMPOSITION).expect("valid decomposition");

    vec![
        fixture(
            "path-no-lef-pe",
            "on a three-student path no matching is both locally envy-free and Pareto efficient",
            parse(PATH_NO_LEF_PE),
            vec![
                Matchings {
                    filter: "pe",
                    expected: vec![&["s1", "s2", "s3"], &["s1", "s3", "s2"], &["s2", "s3", "s1"], &["s3", "s2", "s1"]],
                },
                Matchings { filter: "pe+lef", expected: vec![] },
                LeeExists(false),
            ],
        ),
        fixture(
            "sp-manipulation-profile1",
            "first profile of a family where a PE and LEF mechanism must be manipulable",
            sp_profile(ORDER_1, ORDER_1, ORDER_2),
            vec![Matchings { filter: "pe+lef", expected: vec![&["s3", "s1", "s2"]] }],
        ),
        fixture(
            "sp-manipulation-profile2",
            "second profile: two PE and LEF matchings",
            sp_profile(ORDER_2, ORDER_1, ORDER_2),
            vec![Matchings { filter: "pe+lef", expected: vec![&["s3", "s1", "s2"], &["s2", "s3", "s1"]] }],
        ),
        fixture(
            "sp-manipulation-profile3",
            "third profile: unique PE and LEF matching",
            sp_profile(ORDER_2, ORDER_2, ORDER_2),
            vec![Matchings { filter: "pe+lef", expected: vec![&["s2", "s3", "s1"]] }],
        ),
        fixture(
            "blt2-vs-da",
            "the locally-top mechanism does not Pareto dominate deferred acceptance",
            parse(BLT2_VS_DA),
            vec![
                Output { mechanism: Da, expected: &["s3", "s1", "s4", "s2", "s5"] },
                Output { mechanism: Blt2, expected: &["s2", "s1", "s4", "s3", "s5"] },
                Holds { matching: &["s3", "s1", "s4", "s2", "s5"], filter: "pe+stable", expected: true },
                Holds { matching: &["s2", "s1", "s4", "s3", "s5"], filter: "pe+lef+mb", expected: true },
            ],
        ),
        fixture(
            "lattice-failure",
            "LEF matchings need not form a lattice and no student-optimal LEF matching need exist",
            parse(LATTICE_FAILURE),
            vec![
                Output { mechanism: Sd(&["i1", "i2", "i3"]), expected: &["s1", "s2", "s3"] },
                Output { mechanism: Sd(&["i1", "i3", "i2"]), expected: &["s1", "s3", "s2"] },
                Holds { matching: &["s1", "s2", "s3"], filter: "lef+pe", expected: true },
                Holds { matching: &["s1", "s3", "s2"], filter: "lef+pe", expected: true },
                LatticeFailure { a: &["s1", "s2", "s3"], b: &["s1", "s3", "s2"] },
            ],
        ),
        fixture(
            "rural-failure",
            "LEF and PE matchings can differ in size",
            parse(RURAL_FAILURE),
            vec![
                Matchings { filter: "pe+lef", expected: vec![&["s1", "-", "s2"], &["s3", "s2", "s1"]] },
                // the other two efficient matchings carry local envy
                Matchings {
                    filter: "pe",
                    expected: vec![&["s1", "-", "s2"], &["s3", "s2", "s1"], &["s1", "s2", "s3"], &["s2", "-", "s1"]],
                },
                LefPeSizes(&[2, 3]),
            ],
        ),
        fixture(
            "envy-example",
            "local envy-freeness is weaker than fairness without acquaintances",
            parse(ENVY_EXAMPLE),
            vec![
                Matchings { filter: "stable", expected: vec![&["s1", "-"]] },
                Matchings { filter: "lef", expected: vec![&["s1", "-"], &["-", "s1"], &["-", "-"]] },
                Output { mechanism: Da, expected: &["s1", "-"] },
            ],
        ),
        fixture(
            "lef-not-ls-quota2",
            "with a quota of two, a LEF matching can be neither locally stable nor Pareto efficient",
            parse(QUOTA_TWO_PAIR),
            vec![
                Holds { matching: &["s1", "s2"], filter: "lef", expected: true },
                Holds { matching: &["s1", "s2"], filter: "ls", expected: false },
                Holds { matching: &["s1", "s2"], filter: "pe", expected: false },
            ],
        ),
        fixture(
            "ls-empty",
            "the empty matching is locally stable but not Pareto efficient",
            parse(QUOTA_TWO_PAIR),
            vec![
                Holds { matching: &["-", "-"], filter: "ls", expected: true },
                Holds { matching: &["-", "-"], filter: "pe", expected: false },
            ],
        ),
        fixture(
            "lefpe-not-ls",
            "a LEF and Pareto-efficient matching need not be locally stable",
            parse(LEFPE_NOT_LS),
            vec![
                Holds { matching: &["s1", "s2", "s2"], filter: "lef+pe", expected: true },
                Holds { matching: &["s1", "s2", "s2"], filter: "ls", expected: false },
            ],
        ),
        Fixture {
            name: "treewidth2-market",
            claim: "width-2 decomposition with single-peaked school preferences; B-LT3 gives PE, local ERF-1 and MB",
            instance: treewidth2,
            decomposition: Some(td),
            expectations: vec![OutputSatisfies { mechanism: BltK(2), filter: "pe+local-erf<=1+mb" }],
        },
        Fixture {
            name: "double-peaked",
            claim: "double-peaked on a path yet single-peaked on a width-2 decomposition",
            instance: double,
            decomposition: Some(double_td),
            expectations: vec![OutputSatisfies { mechanism: BltK(2), filter: "pe+local-erf<=1+mb" }],
        },
        fixture(
            "lee-reduction-template",
            "market built from a feasible SD-feasibility question has a LEF and PE matching",
            reduce_sd_feasibility_to_lee(&reduction_template_problem()).instance,
            vec![LeeExists(true)],
        ),
    ]
}

pub fn names() -> Vec<&'static str> {
    all().iter().map(|f| f.name).collect()
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}

fn matching(inst: &MarketInstance, names: &[&str]) -> Result<Matching, String> {
    inst.matching(names).map_err(|e| e.to_string())
}

fn run(inst: &MarketInstance, mechanism: FixtureMechanism) -> Result<Matching, String> {
    let options = BltOptions::default();
    match mechanism {
        FixtureMechanism::Da => Ok(deferred_acceptance(inst)),
        FixtureMechanism::Blt2 => b_lt2(inst, &options).map(|r| r.0).map_err(|e| e.to_string()),
        FixtureMechanism::BltK(k) => b_lt_k_plus_1(inst, k, &options).map(|r| r.0).map_err(|e| e.to_string()),
        FixtureMechanism::Sd(order) => {
            let ml = MasterList::from_names(inst, order).map_err(|e| e.to_string())?;
            Ok(serial_dictatorship(inst, &ml))
        }
    }
}

fn filter(text: &str) -> Result<MatchingFilter, String> {
    text.parse().map_err(|e: crate::oracle::OracleError| e.to_string())
}

fn check(fx: &Fixture, e: &Expectation) -> Result<(), String> {
    let inst = &fx.instance;
    let limits = Limits::default();
    let show = |y: &Matching| y.display(inst).to_string();
    match e {
        Expectation::Matchings { filter: f, expected } => {
            let mut got: Vec<Matching> =
                enumerate_matchings(inst, &filter(f)?, None, &limits).map_err(|e| e.to_string())?.matchings;
            let mut want = expected.iter().map(|m| matching(inst, m)).collect::<Result<Vec<_>, _>>()?;
            got.sort();
            want.sort();
            if got != want {
                return Err(format!(
                    "{f}: expected {:?}, got {:?}",
                    want.iter().map(show).collect::<Vec<_>>(),
                    got.iter().map(show).collect::<Vec<_>>()
                ));
            }
        }
        Expectation::Output { mechanism, expected } => {
            let y = run(inst, *mechanism)?;
            let want = matching(inst, expected)?;
            if y != want {
                return Err(format!("{mechanism:?}: expected {}, got {}", show(&want), show(&y)));
            }
        }
        Expectation::OutputSatisfies { mechanism, filter: f } => {
            let y = run(inst, *mechanism)?;
            if !satisfies(inst, &y, &filter(f)?).map_err(|e| e.to_string())? {
                return Err(format!("{mechanism:?} output {} fails {f}", show(&y)));
            }
        }
        Expectation::Holds { matching: m, filter: f, expected } => {
            let y = matching(inst, m)?;
            let got = satisfies(inst, &y, &filter(f)?).map_err(|e| e.to_string())?;
            if got != *expected {
                return Err(format!("{} {f}: expected {expected}, got {got}", show(&y)));
            }
        }
        Expectation::LeeExists(expected) => {
            let got = decide_lee(inst, &limits).map_err(|e| e.to_string())?.is_some();
            if got != *expected {
                return Err(format!("LEE: expected {expected}, got {got}"));
            }
        }
        Expectation::LefPeSizes(sizes) => {
            let got: Vec<usize> =
                rural_hospitals_check(inst, &limits).map_err(|e| e.to_string())?.lef_pe_sizes().into_iter().collect();
            if got != *sizes {
                return Err(format!("LEF and PE sizes: expected {sizes:?}, got {got:?}"));
            }
        }
        Expectation::LatticeFailure { a, b } => {
            let report = check_lattice_closure(inst, &limits).map_err(|e| e.to_string())?;
            let pos = |m: &[&str]| -> Result<usize, String> {
                let y = matching(inst, m)?;
                report.lef.iter().position(|z| *z == y).ok_or_else(|| format!("{} is not LEF", show(&y)))
            };
            let (x, y) = (pos(a)?, pos(b)?);
            if !report.no_common_dominator.contains(&(x.min(y), x.max(y))) {
                return Err("pair has a common LEF upper bound".into());
            }
            if report.student_optimal.is_some() {
                return Err("a student-optimal LEF matching exists".into());
            }
        }
    }
    Ok(())
}

/// Re-derives every expectation; returns one message per mismatch.
pub fn verify(fx: &Fixture) -> Vec<String> {
    fx.expectations.iter().filter_map(|e| check(fx, e).err()).map(|m| format!("{}: {m}", fx.name)).collect()
}
