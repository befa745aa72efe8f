mod common;

use acqmatch::fixtures;
use acqmatch::generate::{Family, PrefMode, QuotaMode};
use acqmatch::io::{
    format_matching, parse_decomposition, parse_instance, parse_matching, parse_sd_feasibility,
    serialize_decomposition, serialize_instance, serialize_sd_feasibility, IoError,
};
use acqmatch::oracle::{for_each_feasible, SdFeasibility};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn instance_round_trip(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=6, p in 0u32..=100, bounded in any::<bool>()) {
        let quota = if bounded { QuotaMode::RandomBounded } else { QuotaMode::Unit };
        let mut s = spec(Family::Random, n, m, 1, seed, PrefMode::General, quota);
        s.edge_percent = p;
        let inst = gen(&s).instance;
        let text = serialize_instance(&inst);
        let (back, report) = parse_instance(&text).unwrap();
        prop_assert!(report.ok() && report.warnings().next().is_none());
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn matching_round_trip(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=3) {
        let inst = gen(&spec(Family::RandomTree, n, m, 1, seed, PrefMode::General, QuotaMode::Unit)).instance;
        let mut ok = true;
        for_each_feasible(&inst, |y| {
            ok &= parse_matching(&inst, &format_matching(&inst, y)).ok().as_ref() == Some(y);
            ok
        });
        prop_assert!(ok);
    }

    #[test]
    fn decomposition_round_trip(seed in any::<u64>(), k in 1usize..=3, extra in 0usize..=6) {
        let g = gen(&spec(Family::PartialKTree, k + 1 + extra, 1, k, seed, PrefMode::General, QuotaMode::Unit));
        let td = g.decomposition.unwrap();
        let text = serialize_decomposition(&g.instance, &td);
        let back = parse_decomposition(&g.instance, &text).unwrap();
        prop_assert_eq!(&back.bags, &td.bags);
        prop_assert_eq!(&back.tree_edges, &td.tree_edges);
        prop_assert_eq!(serialize_decomposition(&g.instance, &back), text);
    }

    #[test]
    fn sd_feasibility_round_trip(prefs in prop::collection::vec(Just((0usize..4).collect::<Vec<_>>()).prop_shuffle(), 4), a in 0usize..4, o in 0usize..4) {
        let names = |p: &str| (1..=4).map(|v| format!("{p}{v}")).collect::<Vec<_>>();
        let problem = SdFeasibility::new(names("a"), names("o"), prefs, (a, o)).unwrap();
        let text = serialize_sd_feasibility(&problem);
        let (agent, object) = (format!("a{}", a + 1), format!("o{}", o + 1));
        prop_assert_eq!(parse_sd_feasibility(&text, (&agent, &object)).unwrap(), problem);
    }
}

#[test]
fn every_fixture_round_trips() {
    for fx in fixtures::all() {
        let text = fx.text();
        let (back, report) = parse_instance(&text).unwrap();
        assert!(report.ok(), "{}", fx.name);
        assert_eq!(back, fx.instance, "{}", fx.name);
        assert_eq!(serialize_instance(&back), text, "{}", fx.name);
        if let Some(td) = &fx.decomposition {
            let back = parse_decomposition(&fx.instance, &serialize_decomposition(&fx.instance, td)).unwrap();
            assert_eq!(back.bags, td.bags, "{}", fx.name);
        }
    }
}

#[test]
fn malformed_quota_reports_its_location() {
    let text = "students: i1\nschools: s1\nquota: s1=x\npref i1: s1\npref s1: i1\nedges:\n";
    match parse_instance(text) {
        Err(IoError::Parse(e)) => {
            assert_eq!(e.line, 3);
            assert_eq!(e.column, 8);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}
