mod common;

use fuseforge::pi::{normalize, Name, Process, Universe};
use fuseforge::rng;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn congruence_axioms_hold(seed in any::<u64>()) {
        common::check_congruence(seed).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn partitioners_cover_disjointly(seed in any::<u64>()) {
        common::check_partition_cover(seed).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn pushdown_folds_regroup(seed in any::<u64>()) {
        common::check_fold_regrouping(seed).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn merged_order_does_not_matter(a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        common::check_double_buffer(a, b).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn gol_block_and_blinker() {
    common::check_gol_patterns().unwrap();
}

#[test]
fn pagerank_three_cycle_converges() {
    let (to_one, to_oracle) = common::pagerank_triangle(100);
    assert!(to_one <= 1e-6, "{to_one}");
    assert!(to_oracle <= 1e-12, "{to_oracle}");
}

#[test]
fn generator_reaches_depth_and_normal_forms_separate() {
    let u = Universe::new();
    let mut sizes = Vec::new();
    let mut forms = std::collections::HashSet::new();
    for seed in 0..200 {
        let p = common::random_process(&mut rng::keyed(seed, 0xC0), 5, ["x", "y"]);
        sizes.push(p.size());
        forms.insert(normalize(&p, &u).unwrap());
    }
    assert!(sizes.iter().any(|&s| s >= 20), "{sizes:?}");
    assert!(forms.len() > 100, "only {} distinct normal forms", forms.len());

    let (a, x) = (Name::user("a"), Name::user("x"));
    let recv = Process::input(a, vec![x], Process::output(x, vec![], Process::Nil));
    let send = Process::output(a, vec![a], Process::Nil);
    assert_ne!(
        normalize(&Process::par(recv.clone(), send.clone()), &u).unwrap(),
        normalize(&Process::choice(recv, send), &u).unwrap()
    );
}
