mod common;

use descriptor_net::network::{apply_gate, cnot_closed_form, init_network, GateSpec};
use rand::Rng;

#[test]
fn descriptor_and_state_vector_pictures_agree() {
    let mut rng = common::rng(11);
    for case in 0..40 {
        let n = rng.gen_range(1..=6);
        let depth = rng.gen_range(0..=20);
        let psi = common::random_state(&mut rng, n);
        let gates = common::random_circuit(&mut rng, n, depth);
        let gap = common::picture_gap(&psi, &gates);
        assert!(gap <= 1e-10, "case {case}: n={n} depth={depth} gap={gap:e}");
    }
}

#[test]
fn algebra_is_conserved_gate_by_gate() {
    let mut rng = common::rng(12);
    for case in 0..30 {
        let n = rng.gen_range(1..=5);
        let depth = rng.gen_range(1..=20);
        let psi = common::random_state(&mut rng, n);
        let gates = common::random_circuit(&mut rng, n, depth);
        let gap = common::conservation_gap(&psi, &gates);
        assert!(gap <= 1e-10, "case {case}: {gap:e}");
    }
}

#[test]
fn cnot_matches_closed_form_on_random_networks() {
    let mut rng = common::rng(13);
    for _ in 0..50 {
        let n = rng.gen_range(2..=4);
        let depth = rng.gen_range(0..=10);
        let net = common::random_network(&mut rng, n, depth);
        let c = rng.gen_range(1..=n);
        let t = (c % n) + 1;
        let built = apply_gate(&net, &GateSpec::cnot(c, t)).unwrap();
        let closed = cnot_closed_form(&net, c, t).unwrap();
        for q in 1..=n {
            assert!(built.triple(q).unwrap().max_dist(closed.triple(q).unwrap()) <= 1e-12);
        }
    }
}

#[test]
fn gates_advance_time_by_one() {
    let net = init_network(2, None, common::tol()).unwrap();
    let net = apply_gate(&net, &GateSpec::hadamard(1)).unwrap();
    let net = apply_gate(&net, &GateSpec::cnot(1, 2)).unwrap();
    assert_eq!(net.t(), 2);
}
