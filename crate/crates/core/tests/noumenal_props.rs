mod common;

use descriptor_net::noumenal::{
    noumenal_product, project_noumenal, separability_deviation, verify_separability, NoumenalState,
};
use descriptor_net::oracle::{separability_gap, StateVector};
use rand::Rng;

#[test]
fn remote_descriptors_ignore_local_gates() {
    let mut rng = common::rng(21);
    for case in 0..300 {
        let d = common::no_action_case(&mut rng);
        assert!(d <= 1e-12, "case {case}: {d:e}");
    }
}

#[test]
fn product_of_operations_law() {
    let mut rng = common::rng(22);
    for case in 0..200 {
        let d = common::product_law_case(&mut rng);
        assert!(d <= 1e-10, "case {case}: {d:e}");
    }
}

#[test]
fn every_partition_recombines() {
    let mut rng = common::rng(23);
    for _ in 0..6 {
        let n = rng.gen_range(2..=4);
        let net = common::random_network(&mut rng, n, 15);
        for partition in common::set_partitions(n) {
            assert!(verify_separability(&net, &partition).unwrap(), "{partition:?}");
            assert!(separability_deviation(&net, &partition).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn projection_round_trip() {
    let mut rng = common::rng(24);
    for _ in 0..20 {
        let n = rng.gen_range(2..=4);
        let net = common::random_network(&mut rng, n, 10);
        let full = NoumenalState::of_network(&net);
        for mask in 1..(1u32 << n) - 1 {
            let s: Vec<usize> = (1..=n).filter(|q| mask & (1 << (q - 1)) != 0).collect();
            let rest: Vec<usize> = (1..=n).filter(|q| !s.contains(q)).collect();
            let ps = project_noumenal(&full, &s).unwrap();
            let joined = noumenal_product(&ps, &project_noumenal(&full, &rest).unwrap(), common::tol()).unwrap();
            let back = project_noumenal(&joined, &s).unwrap();
            assert!(back.max_dist(&ps).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn bell_density_matrices_do_not_recombine() {
    assert!(separability_gap(&StateVector::bell(), &[1]).unwrap() > 0.4);
}
