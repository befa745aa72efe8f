use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acqmatch::analyze::{analyze, format_structure_report};
use acqmatch::fixtures;
use acqmatch::generate::{generate, Family, GeneratorSpec, PrefMode, QuotaMode};
use acqmatch::io::{
    format_envy_report, format_matching, format_property_report, format_trace, parse_decomposition, parse_instance,
    parse_matching, parse_sd_feasibility, property_csv_header, property_csv_row, serialize_decomposition,
    serialize_instance, KeyValueBlock,
};
use acqmatch::mechanisms::{
    run_mechanism, BltOptions, CertificationMode, MasterList, MechanismConfig, SelectionPolicy,
};
use acqmatch::oracle::{
    check_lattice_closure, decide_lee, enumerate_matchings, reduce_sd_feasibility_to_lee, rural_hospitals_check,
    satisfies, verify_strategyproofness, Limits, MatchingFilter, RuralEntry,
};
use acqmatch::properties::check_properties;
use acqmatch::{AcquaintanceGraph, MarketInstance, Matching};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "acqmatch", version, about = "School choice with student acquaintance graphs")]
struct Cli {
    /// Market instance file.
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for `gen`, and the selection seed of `solve`/`verify-sp` when no
    /// `--policy` is given.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Raise the student bound of the exhaustive engines.
    #[arg(long, global = true)]
    max_students: Option<usize>,
    #[arg(long, global = true)]
    max_schools: Option<usize>,
    #[arg(long, global = true)]
    max_total_quota: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism and print the matching.
    Solve {
        #[command(flatten)]
        mech: MechArgs,
        /// Append the locally-top trace.
        #[arg(long)]
        trace: bool,
    },
    /// Report the properties of the matchings in a matching file.
    Check {
        #[arg(long)]
        matching: PathBuf,
        /// Fail (exit 1) unless every matching satisfies this filter, e.g. `pe+lef`.
        #[arg(long)]
        require: Option<String>,
        /// Also list the envy sets of every student.
        #[arg(long)]
        envy: bool,
    },
    /// List the feasible matchings passing a filter.
    Enumerate {
        #[arg(long)]
        filter: String,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Decide whether a locally envy-free and Pareto-efficient matching exists.
    Lee,
    /// Join/meet structure of the LEF matchings.
    Lattice,
    /// Sizes and fill vectors of the LEF and PE (and LEF and nonwasteful) matchings.
    Rural,
    /// Search for a profitable misreport; exit 1 if one exists.
    VerifySp {
        #[command(flatten)]
        mech: MechArgs,
    },
    /// Reductions between decision problems.
    Reduce {
        #[command(subcommand)]
        problem: ReduceCommand,
    },
    /// Generate a random market.
    Gen(GenArgs),
    /// Structural report: tree, degeneracy, single-peakedness, MB-pairs.
    Analyze {
        #[arg(long)]
        decomposition: Option<PathBuf>,
    },
    /// Named regression markets.
    Fixtures {
        #[command(subcommand)]
        action: FixtureCommand,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Build the LEE market for an SD-feasibility question.
    SdFeasibility {
        #[arg(long)]
        input: PathBuf,
        /// Target `agent,object`.
        #[arg(long)]
        pair: String,
    },
}

#[derive(Subcommand)]
enum FixtureCommand {
    List,
    /// Print the instance (and decomposition) of a fixture.
    Show {
        name: String,
    },
    /// Re-derive the expectations of one or all fixtures; exit 1 on drift.
    Verify {
        name: Option<String>,
    },
    /// Write every fixture as `<name>.txt` (and `<name>.td`) into a directory.
    Export {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mech {
    Da,
    Sd,
    Blt2,
    Bltk,
    SdLd,
    SdLdrev,
    Blt2Tree,
}

#[derive(Args)]
struct MechArgs {
    #[arg(long, value_enum)]
    mech: Mech,
    /// Serial order for `sd`, comma separated; declared order by default.
    #[arg(long)]
    master_list: Option<String>,
    /// Width parameter of `bltk`, which runs B-LT(k+1).
    #[arg(long)]
    k: Option<usize>,
    /// `declared`, `order:i1,i2,...` or `seed:N`.
    #[arg(long)]
    policy: Option<String>,
    /// Spanning tree for `blt2-tree`: a file with an `edges:` line.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Continue past a failed attacker-count check, recording a trace note.
    #[arg(long)]
    diagnostics: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    /// Number of schools; defaults to `n`.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value = "general")]
    pref: String,
    #[arg(long, default_value = "unit")]
    quota: String,
    /// Edge probability of the `random` family.
    #[arg(long, default_value_t = 40)]
    edge_percent: u32,
    #[arg(long)]
    decomposition_out: Option<PathBuf>,
    #[arg(long)]
    tree_out: Option<PathBuf>,
}

/// A successful run that may still report a failed property check.
enum Status {
    Ok,
    PropertyFailure,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::PropertyFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl Cli {
    fn instance(&self) -> Result<MarketInstance> {
        let path = self.instance.as_deref().ok_or_else(|| anyhow!("--instance is required"))?;
        let (inst, report) = parse_instance(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        for w in report.warnings() {
            eprintln!("warning: {}: {}", w.location, w.message);
        }
        Ok(inst)
    }

    fn limits(&self) -> Limits {
        let d = Limits::default();
        let limits = Limits {
            max_students: self.max_students.unwrap_or(d.max_students),
            max_schools: self.max_schools.unwrap_or(d.max_schools),
            max_total_quota: self.max_total_quota.unwrap_or(d.max_total_quota),
        };
        if limits != d {
            eprintln!(
                "warning: enumeration bounds overridden to n <= {}, m <= {}, total quota <= {}; runs may take very long",
                limits.max_students, limits.max_schools, limits.max_total_quota
            );
        }
        limits
    }

    fn block(&self, kv: &KeyValueBlock) -> String {
        match self.format {
            Format::Text => kv.to_string(),
            Format::Csv => {
                let mut out = String::from("key,value\n");
                for (k, v) in &kv.entries {
                    out.push_str(&format!("{k},{}\n", csv_field(v)));
                }
                out
            }
        }
    }
}

fn csv_field(v: &str) -> String {
    if v.contains(',') || v.contains('"') {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

fn names(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_policy(inst: &MarketInstance, text: &str) -> Result<SelectionPolicy> {
    if text == "declared" {
        return Ok(SelectionPolicy::Declared);
    }
    if let Some(order) = text.strip_prefix("order:") {
        return Ok(SelectionPolicy::Explicit(MasterList::from_names(inst, &names(order))?));
    }
    if let Some(seed) = text.strip_prefix("seed:") {
        return Ok(SelectionPolicy::Seeded(seed.parse().with_context(|| format!("bad seed in `{text}`"))?));
    }
    bail!("unknown policy `{text}`; expected declared, order:i1,i2,... or seed:N")
}

/// Reads the `edges:` line of a tree file.
fn parse_tree(inst: &MarketInstance, text: &str) -> Result<AcquaintanceGraph> {
    let line = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find_map(|l| l.strip_prefix("edges:"))
        .ok_or_else(|| anyhow!("tree file has no `edges:` line"))?;
    let mut edges = Vec::new();
    for tok in line.split_whitespace() {
        let (a, b) = tok.split_once('-').ok_or_else(|| anyhow!("malformed edge `{tok}`"))?;
        let id = |n: &str| inst.student_id(n).ok_or_else(|| anyhow!("unknown student `{n}` in tree"));
        edges.push((id(a)?, id(b)?));
    }
    Ok(AcquaintanceGraph::from_edges(inst.num_students(), edges)?)
}

fn mechanism(cli: &Cli, inst: &MarketInstance, m: &MechArgs) -> Result<MechanismConfig> {
    let policy = match (&m.policy, cli.seed) {
        (Some(p), _) => parse_policy(inst, p)?,
        (None, Some(seed)) => SelectionPolicy::Seeded(seed),
        (None, None) => SelectionPolicy::Declared,
    };
    let mode = if m.diagnostics { CertificationMode::Diagnostics } else { CertificationMode::Certified };
    let options = BltOptions { policy, mode };
    Ok(match m.mech {
        Mech::Da => MechanismConfig::DeferredAcceptance,
        Mech::Sd => MechanismConfig::SerialDictatorship(match &m.master_list {
            Some(list) => MasterList::from_names(inst, &names(list))?,
            None => MasterList::declared(inst),
        }),
        Mech::Blt2 => MechanismConfig::BLt2(options),
        Mech::Bltk => MechanismConfig::BLtK { k: m.k.ok_or_else(|| anyhow!("bltk needs --k"))?, options },
        Mech::SdLd => MechanismConfig::SdDegeneracy { reversed: false },
        Mech::SdLdrev => MechanismConfig::SdDegeneracy { reversed: true },
        Mech::Blt2Tree => {
            let path = m.tree.as_deref().ok_or_else(|| anyhow!("blt2-tree needs --tree"))?;
            MechanismConfig::BLt2OnTree { tree: parse_tree(inst, &read(path)?)?, options }
        }
    })
}

fn property_rows(inst: &MarketInstance, ys: &[Matching]) -> Result<String> {
    let mut out = format!("{}\n", property_csv_header());
    for y in ys {
        out.push_str(&property_csv_row(inst, y, &check_properties(inst, y)?));
        out.push('\n');
    }
    Ok(out)
}

fn matching_lines(inst: &MarketInstance, text: &str) -> Result<Vec<Matching>> {
    let ys = text
        .lines()
        .filter(|l| !l.split('#').next().unwrap_or("").trim().is_empty())
        .enumerate()
        .map(|(n, l)| parse_matching(inst, l).with_context(|| format!("matching {}", n + 1)))
        .collect::<Result<Vec<_>>>()?;
    if ys.is_empty() {
        bail!("no `match:` line found");
    }
    Ok(ys)
}

fn rural_block(kv: &mut KeyValueBlock, inst: &MarketInstance, prefix: &str, entries: &[RuralEntry], uniform: bool) {
    let sizes: std::collections::BTreeSet<usize> = entries.iter().map(|e| e.size).collect();
    kv.push(format!("{prefix}.count"), entries.len());
    kv.push(format!("{prefix}.sizes"), sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    kv.push(format!("{prefix}.uniform"), uniform);
    for (n, e) in entries.iter().enumerate() {
        kv.push(
            format!("{prefix}.{}.matching", n + 1),
            format_matching(inst, &e.matching).trim_start_matches("match: "),
        );
        kv.push(format!("{prefix}.{}.size", n + 1), e.size);
        kv.push(format!("{prefix}.{}.fill", n + 1), e.fill.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
    }
}

fn run(cli: &Cli) -> Result<Status> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Solve { mech, trace } => {
            let inst = cli.instance()?;
            let config = mechanism(cli, &inst, mech)?;
            let (y, t) = run_mechanism(&inst, &config)?;
            let mut text = match cli.format {
                Format::Text => format!("{}\n", format_matching(&inst, &y)),
                Format::Csv => property_rows(&inst, std::slice::from_ref(&y))?,
            };
            if *trace {
                match &t {
                    Some(t) => text.push_str(&format_trace(&inst, t)),
                    None => eprintln!("note: {} records no trace", config.name()),
                }
            }
            emit(out, &text)?;
        }
        Command::Check { matching, require, envy } => {
            let inst = cli.instance()?;
            let ys = matching_lines(&inst, &read(matching)?)?;
            let filter: Option<MatchingFilter> = require.as_deref().map(str::parse).transpose()?;
            let mut text = String::new();
            let mut failed = false;
            if cli.format == Format::Csv {
                text = property_rows(&inst, &ys)?;
            }
            for (n, y) in ys.iter().enumerate() {
                let report = check_properties(&inst, y)?;
                let mut kv = format_property_report(&inst, y, &report);
                if let Some(f) = &filter {
                    let ok = satisfies(&inst, y, f)?;
                    failed |= !ok;
                    kv.push("requirement", f.to_string());
                    kv.push("satisfied", ok);
                }
                if *envy {
                    kv.entries.extend(format_envy_report(&inst, &report.envy).entries.into_iter().skip(4));
                }
                if cli.format == Format::Text {
                    if n > 0 {
                        text.push('\n');
                    }
                    text.push_str(&kv.to_string());
                }
            }
            emit(out, &text)?;
            if failed {
                return Ok(Status::PropertyFailure);
            }
        }
        Command::Enumerate { filter, limit } => {
            let inst = cli.instance()?;
            let filter: MatchingFilter = filter.parse()?;
            let e = enumerate_matchings(&inst, &filter, *limit, &cli.limits())?;
            if e.truncated {
                eprintln!("note: stopped after {} matchings", e.matchings.len());
            }
            let text = match cli.format {
                Format::Text => e.matchings.iter().map(|y| format!("{}\n", format_matching(&inst, y))).collect(),
                Format::Csv => property_rows(&inst, &e.matchings)?,
            };
            emit(out, &text)?;
        }
        Command::Lee => {
            let inst = cli.instance()?;
            let found = decide_lee(&inst, &cli.limits())?;
            let mut kv = KeyValueBlock::default();
            kv.push("lee", found.is_some());
            kv.push(
                "matching",
                found.map_or_else(|| "-".into(), |y| format_matching(&inst, &y).replace("match: ", "")),
            );
            emit(out, &cli.block(&kv))?;
        }
        Command::Lattice => {
            let inst = cli.instance()?;
            let r = check_lattice_closure(&inst, &cli.limits())?;
            let pairs = |ps: &[(usize, usize)]| {
                if ps.is_empty() {
                    "-".to_string()
                } else {
                    ps.iter().map(|(a, b)| format!("{}/{}", a + 1, b + 1)).collect::<Vec<_>>().join(",")
                }
            };
            let mut kv = KeyValueBlock::default();
            kv.push("lef_count", r.lef.len());
            for (n, y) in r.lef.iter().enumerate() {
                kv.push(format!("lef.{}", n + 1), format_matching(&inst, y).trim_start_matches("match: "));
            }
            kv.push("is_lattice", r.is_lattice());
            kv.push("no_common_dominator", pairs(&r.no_common_dominator));
            kv.push("no_join", pairs(&r.no_join));
            kv.push("no_meet", pairs(&r.no_meet));
            kv.push("student_optimal", r.student_optimal.map_or_else(|| "-".into(), |i| (i + 1).to_string()));
            emit(out, &cli.block(&kv))?;
        }
        Command::Rural => {
            let inst = cli.instance()?;
            let r = rural_hospitals_check(&inst, &cli.limits())?;
            let mut kv = KeyValueBlock::default();
            rural_block(&mut kv, &inst, "lef_pe", &r.lef_pe, r.lef_pe_uniform());
            rural_block(&mut kv, &inst, "lef_nonwasteful", &r.lef_nonwasteful, r.lef_nonwasteful_uniform());
            emit(out, &cli.block(&kv))?;
        }
        Command::VerifySp { mech } => {
            let inst = cli.instance()?;
            let config = mechanism(cli, &inst, mech)?;
            let check = verify_strategyproofness(&inst, &config, &cli.limits())?;
            let list = |l: &[acqmatch::SchoolId]| {
                if l.is_empty() {
                    "-".to_string()
                } else {
                    l.iter().map(|&s| inst.school_name(s)).collect::<Vec<_>>().join(">")
                }
            };
            let outcome = |s: Option<acqmatch::SchoolId>| s.map_or("-", |s| inst.school_name(s)).to_string();
            let mut kv = KeyValueBlock::default();
            kv.push("mechanism", config.name());
            kv.push("manipulable", check.witness.is_some());
            kv.push("reports_tried", check.reports_tried);
            kv.push("mechanism_errors", check.mechanism_errors);
            if let Some(w) = &check.witness {
                kv.push("student", inst.student_name(w.student));
                kv.push("truthful", list(&w.truthful));
                kv.push("misreport", list(&w.misreport));
                kv.push("honest_outcome", outcome(w.honest_outcome));
                kv.push("manipulated_outcome", outcome(w.manipulated_outcome));
            }
            emit(out, &cli.block(&kv))?;
            if check.witness.is_some() {
                return Ok(Status::PropertyFailure);
            }
        }
        Command::Reduce { problem: ReduceCommand::SdFeasibility { input, pair } } => {
            let (agent, object) = pair.split_once(',').ok_or_else(|| anyhow!("--pair expects `agent,object`"))?;
            let problem = parse_sd_feasibility(&read(input)?, (agent.trim(), object.trim()))
                .with_context(|| format!("parsing {}", input.display()))?;
            let reduced = reduce_sd_feasibility_to_lee(&problem);
            let inst = &reduced.instance;
            emit(out, &serialize_instance(inst))?;
            if out.is_some() {
                let mut kv = KeyValueBlock::default();
                kv.push(
                    "target",
                    format!(
                        "{}@{}",
                        inst.student_name(reduced.target_student),
                        inst.school_name(reduced.target_school)
                    ),
                );
                kv.push(
                    "extra",
                    format!("{}@{}", inst.student_name(reduced.extra_student), inst.school_name(reduced.extra_school)),
                );
                print!("{}", cli.block(&kv));
            }
        }
        Command::Gen(g) => {
            let seed = cli.seed.ok_or_else(|| anyhow!("gen needs --seed"))?;
            let spec = GeneratorSpec {
                family: g.family.parse::<Family>()?,
                n: g.n,
                m: g.m.unwrap_or(g.n),
                k: g.k,
                seed,
                pref_mode: g.pref.parse::<PrefMode>()?,
                quota_mode: g.quota.parse::<QuotaMode>()?,
                edge_percent: g.edge_percent,
            };
            let generated = generate(&spec)?;
            emit(out, &serialize_instance(&generated.instance))?;
            if let Some(path) = &g.decomposition_out {
                let td = generated
                    .decomposition
                    .as_ref()
                    .ok_or_else(|| anyhow!("{} ships no decomposition", spec.family))?;
                emit(Some(path), &serialize_decomposition(&generated.instance, td))?;
            }
            if let Some(path) = &g.tree_out {
                let tree = generated.tree.as_ref().ok_or_else(|| anyhow!("{} ships no tree", spec.family))?;
                let inst = generated.instance.with_graph(tree.clone());
                let edges =
                    serialize_instance(&inst).lines().find(|l| l.starts_with("edges:")).unwrap_or("edges:").to_string();
                emit(Some(path), &format!("{edges}\n"))?;
            }
        }
        Command::Analyze { decomposition } => {
            let inst = cli.instance()?;
            let td = decomposition
                .as_deref()
                .map(|p| parse_decomposition(&inst, &read(p)?).with_context(|| format!("parsing {}", p.display())))
                .transpose()?;
            let report = analyze(&inst, td.as_ref())?;
            emit(out, &cli.block(&format_structure_report(&inst, &report)))?;
        }
        Command::Fixtures { action } => return fixture_command(cli, action),
    }
    Ok(Status::Ok)
}

fn fixture_command(cli: &Cli, action: &FixtureCommand) -> Result<Status> {
    let out = cli.out.as_deref();
    let lookup = |name: &str| fixtures::by_name(name).ok_or_else(|| anyhow!("unknown fixture `{name}`"));
    match action {
        FixtureCommand::List => {
            let mut kv = KeyValueBlock::default();
            for fx in fixtures::all() {
                kv.push(fx.name, fx.claim);
            }
            emit(out, &cli.block(&kv))?;
        }
        FixtureCommand::Show { name } => {
            let fx = lookup(name)?;
            let mut text = fx.text();
            if let Some(td) = &fx.decomposition {
                text.push_str(&serialize_decomposition(&fx.instance, td));
            }
            emit(out, &text)?;
        }
        FixtureCommand::Verify { name } => {
            let all = match name {
                Some(n) => vec![lookup(n)?],
                None => fixtures::all(),
            };
            let mut failed = false;
            let mut text = String::new();
            for fx in &all {
                let problems = fixtures::verify(fx);
                failed |= !problems.is_empty();
                text.push_str(&format!("{} {}\n", if problems.is_empty() { "ok" } else { "FAILED" }, fx.name));
                for p in problems {
                    text.push_str(&format!("  {p}\n"));
                }
            }
            emit(out, &text)?;
            if failed {
                return Ok(Status::PropertyFailure);
            }
        }
        FixtureCommand::Export { dir } => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for fx in fixtures::all() {
                emit(Some(&dir.join(format!("{}.txt", fx.name))), &fx.text())?;
                if let Some(td) = &fx.decomposition {
                    emit(Some(&dir.join(format!("{}.td", fx.name))), &serialize_decomposition(&fx.instance, td))?;
                }
            }
        }
    }
    Ok(Status::Ok)
}
