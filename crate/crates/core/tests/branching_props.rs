mod common;

use descriptor_net::branching::{foliate, make_pvm, Outcome};
use rand::Rng;

#[test]
fn split_unitary_identities() {
    let mut rng = common::rng(31);
    for case in 0..150 {
        let d = common::split_case(&mut rng);
        assert!(d <= 1e-10, "case {case}: {d:e}");
    }
}

#[test]
fn relative_expectations_match_conditional_expectations() {
    let mut rng = common::rng(32);
    for case in 0..100 {
        let d = common::conditional_gap(&mut rng);
        assert!(d <= 1e-10, "case {case}: {d:e}");
    }
}

#[test]
fn pvms_are_complete_and_weights_sum_to_one() {
    let mut rng = common::rng(33);
    let mut foliated = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=4);
        let depth = rng.gen_range(1..=10);
        let net = common::random_network(&mut rng, n, depth);
        let b = rng.gen_range(1..=n);
        let pvm = make_pvm(&net, b).unwrap();
        assert!(pvm.algebra_deviation() <= 1e-12);
        let a = (b % n) + 1;
        if let Ok((plus, minus)) = foliate(&net, a, &pvm) {
            assert_eq!((plus.label(), minus.label()), (Outcome::Plus, Outcome::Minus));
            assert!((plus.weight() + minus.weight() - 1.0).abs() <= 1e-12);
            assert!(plus.pauli_deviation() <= 1e-10 && minus.pauli_deviation() <= 1e-10);
            assert!(plus.unit_deviation() <= 1e-10 && minus.unit_deviation() <= 1e-10);
            foliated += 1;
        }
    }
    assert!(foliated > 50);
}
