use proptest::prelude::*;

use hypernet::corpus::TermGen;
use hypernet::diagrams::{constants, insertion_sorter, output_constants, sorting_rules, sorting_signature, tree};
use hypernet::foliation::dag_map;
use hypernet::machine::{applicable_rules, run, run_with, Outcome, RunConfig};
use hypernet::readback::{comparable, readback};
use hypernet::rewrite::check as check_match;
use hypernet::typeinfer::build_constraints;
use hypernet::{
    apply_rewrite, check_globalized, compose_seq, convert, defoliate, eval_reverse, find_matches, foliate, fuse,
    hoist, infer, iso_check, normalize, parse_hypernet, print_hypernet, rad_term, translate_untyped,
    validate_hypernet, EdgeLabel, Hypernet, RdTable, Term,
};

fn closed(seed: u64, depth: usize) -> Hypernet {
    translate_untyped(&TermGen::new(seed).closed(depth))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn translations_are_valid_and_serialize(seed in any::<u64>()) {
        let g = closed(seed, 5);
        prop_assert_eq!(validate_hypernet(&g), vec![]);
        let text = print_hypernet(&g);
        let back = parse_hypernet(&text).unwrap();
        prop_assert!(iso_check(&g, &back).is_some());
        prop_assert_eq!(print_hypernet(&back), text);
    }

    #[test]
    fn foliation_round_trip(seed in any::<u64>()) {
        let g = closed(seed, 5);
        let f = foliate(&g).unwrap();
        f.check().unwrap();
        prop_assert!(iso_check(&defoliate(&f).unwrap(), &g).is_some());
        let fused = fuse(&f);
        prop_assert!(fused.slices.len() <= f.slices.len());
        prop_assert!(iso_check(&defoliate(&fused).unwrap(), &g).is_some());
    }

    #[test]
    fn alpha_variants_are_isomorphic(seed in any::<u64>()) {
        let mut gen = TermGen::new(seed);
        let t = gen.closed(5);
        let (g, h) = (translate_untyped(&t), translate_untyped(&gen.alpha_variant(&t)));
        let w = iso_check(&g, &h).unwrap();
        prop_assert!(w.verify(&g, &h));
        prop_assert!(w.inverse().verify(&h, &g));
    }

    #[test]
    fn dag_map_is_functorial(height in 0usize..4, seed in any::<u64>()) {
        let suffix = |s: &str| format!("{s}'");
        let upper = |s: &str| s.to_uppercase();
        for g in [tree(height), closed(seed, 4)] {
            let f = foliate(&g).unwrap();
            prop_assert_eq!(dag_map(&|s: &str| s.to_string(), &f), f.clone());
            let both = dag_map(&|s: &str| suffix(&upper(s)), &f);
            prop_assert_eq!(dag_map(&suffix, &dag_map(&upper, &f)), both.clone());
            prop_assert_eq!(both.slices.len(), f.slices.len());
        }
    }

    #[test]
    fn type_inference_is_deterministic_and_linear(seed in any::<u64>()) {
        let g = translate_untyped(&TermGen::new(seed).pcf_term(5));
        let c = build_constraints(&g).unwrap();
        prop_assert!(c.visits.values().all(|v| *v <= 2));
        prop_assert_eq!(format!("{:?}", infer(&g)), format!("{:?}", infer(&g)));
    }

    #[test]
    fn reverse_ad_is_linear_in_the_seed(seed in any::<u64>(), k in 1usize..4, scale in -3.0f64..3.0) {
        let (vars, t) = TermGen::new(seed).straight_line(k, 4);
        let r = rad_term(&t, &vars, &RdTable::default()).unwrap();
        let xs: Vec<f64> = (0..k).map(|i| 0.25 + i as f64).collect();
        let one = eval_reverse(&r, &xs, 1.0).unwrap();
        let scaled = eval_reverse(&r, &xs, scale).unwrap();
        prop_assert_eq!(one.len(), k);
        for (a, b) in one.iter().zip(&scaled) {
            prop_assert!((a * scale - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
        prop_assert_eq!(r.reverse.left().len(), r.saved + r.primal_outputs);
        prop_assert_eq!(r.reverse.right().len(), k);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn machine_is_deterministic(seed in any::<u64>()) {
        let g = closed(seed, 5);
        let r = run_with(&g, RunConfig { budget: 150, detect_cycles: false, record_states: true }).unwrap();
        for (s, e) in r.states.iter().zip(&r.trace) {
            prop_assert_eq!(applicable_rules(s), vec![e.rule]);
        }
    }

    #[test]
    fn hoisting_globalizes(seed in any::<u64>()) {
        let g = closed(seed, 5);
        let h = hoist(&convert(&g).unwrap()).unwrap();
        prop_assert_eq!(validate_hypernet(&h), vec![]);
        prop_assert!(check_globalized(&h));
        prop_assert_eq!(hoist(&h).unwrap(), h.clone());
        let (a, b) = (run(&g, 400, false).unwrap().outcome, run(&h, 1200, false).unwrap().outcome);
        if let (Outcome::Value(x), Outcome::Value(y)) = (&a, &b) {
            let (x, y) = (comparable(&readback(&x.graph).unwrap()), comparable(&readback(&y.graph).unwrap()));
            if matches!(x, Term::Const(_)) {
                prop_assert_eq!(x, y);
            }
        }
        if matches!(a, Outcome::Value(_)) {
            prop_assert!(!matches!(b, Outcome::Stuck(..)), "{:?}", b);
        }
    }

    #[test]
    fn sorting_networks_sort(values in prop::collection::vec(1u32..=5, 1..=5)) {
        let sig = sorting_signature(5);
        let g = compose_seq(&constants(&sig, &values), &insertion_sorter(&sig, values.len())).unwrap();
        let rules = sorting_rules(5);
        // The redexes are the sorters fed by two constants.
        let inc = g.incidence();
        let ready = g
            .edges()
            .filter(|(_, e)| e.label == EdgeLabel::gen("s2"))
            .filter(|(_, e)| e.ins.iter().all(|n| inc.producer(*n).is_some_and(|(p, _)| g.edge(p).ins.is_empty())))
            .count();
        let mut found = 0;
        for rule in &rules {
            for m in find_matches(rule, &g) {
                check_match(rule, &g, &m).unwrap();
                prop_assert_eq!(validate_hypernet(&apply_rewrite(rule, &m, &g).unwrap()), vec![]);
                found += 1;
            }
        }
        prop_assert_eq!(found, ready);
        let (nf, _) = normalize(&rules, &g, 100).unwrap();
        let mut want = values.clone();
        want.sort_unstable_by(|a, b| b.cmp(a));
        let want: Vec<String> = want.iter().map(|v| format!("k{v}")).collect();
        prop_assert_eq!(output_constants(&nf), Some(want));
    }
}
