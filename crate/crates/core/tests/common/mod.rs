#![allow(dead_code)]

use descriptor_net::network::{apply_gate, init_network, GateSpec, Network, PauliCoeffs};
use descriptor_net::operator::{Operator, Tolerance, C64};
use descriptor_net::oracle::StateVector;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tol() -> Tolerance {
    Tolerance::default()
}

/// `e^{iφ}(cos(θ/2)·1 − i sin(θ/2)·n̂·σ)` with random φ, θ and axis.
pub fn random_coeffs(rng: &mut impl Rng) -> PauliCoeffs {
    let phase = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut axis = [0.0f64; 3];
    loop {
        for a in &mut axis {
            *a = rng.gen_range(-1.0..1.0);
        }
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-3 {
            axis.iter_mut().for_each(|a| *a /= norm);
            break;
        }
    }
    let s = C64::new(0.0, -(theta / 2.0).sin()) * phase;
    PauliCoeffs::new(phase * (theta / 2.0).cos(), s * axis[0], s * axis[1], s * axis[2])
}

/// Unitary from the QR factorization of a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> Operator {
    let m = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let q = m.qr().q();
    Operator::from_fn(dim, |(i, j)| q[(i, j)]).unwrap()
}

pub fn random_single(rng: &mut impl Rng, qubit: usize) -> GateSpec {
    match rng.gen_range(0..6) {
        0 => GateSpec::hadamard(qubit),
        1 => GateSpec::pauli(qubit, descriptor_net::Axis::ALL[rng.gen_range(0..3)]),
        2 => GateSpec::Raw { unitary: random_unitary(rng, 2), support: vec![qubit] },
        _ => GateSpec::single(qubit, random_coeffs(rng)),
    }
}

/// Mix of named, coefficient-form and raw single-qubit gates, CNOTs and raw two-qubit gates.
pub fn random_gate(rng: &mut impl Rng, n: usize) -> GateSpec {
    if n < 2 || rng.gen_bool(0.55) {
        let q = rng.gen_range(1..=n);
        return random_single(rng, q);
    }
    let mut qs: Vec<usize> = (1..=n).collect();
    qs.shuffle(rng);
    if rng.gen_bool(0.8) {
        GateSpec::cnot(qs[0], qs[1])
    } else {
        GateSpec::Raw { unitary: random_unitary(rng, 4), support: vec![qs[0], qs[1]] }
    }
}

pub fn random_circuit(rng: &mut impl Rng, n: usize, depth: usize) -> Vec<GateSpec> {
    (0..depth).map(|_| random_gate(rng, n)).collect()
}

/// Random normalized amplitudes, or `|0…0⟩` half the time.
pub fn random_state(rng: &mut impl Rng, n: usize) -> StateVector {
    if rng.gen_bool(0.5) {
        return StateVector::zero(n);
    }
    let amps: Vec<C64> = (0..1 << n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::new(amps.into_iter().map(|z| z / norm).collect(), tol()).unwrap()
}

pub fn evolve(net: Network, gates: &[GateSpec]) -> Network {
    gates.iter().fold(net, |acc, g| apply_gate(&acc, g).unwrap())
}

/// Random network of `n` qubits after `depth` random gates.
pub fn random_network(rng: &mut impl Rng, n: usize, depth: usize) -> Network {
    let psi = random_state(rng, n);
    let net = init_network(n, Some(psi.amps()), tol()).unwrap();
    let gates = random_circuit(rng, n, depth);
    evolve(net, &gates)
}

/// Every set partition of `1..=n`, blocks in increasing order of their first element.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for q in 1..=n {
        let mut next = Vec::new();
        for p in &out {
            for i in 0..p.len() {
                let mut extended = p.clone();
                extended[i].push(q);
                next.push(extended);
            }
            let mut fresh = p.clone();
            fresh.push(vec![q]);
            next.push(fresh);
        }
        out = next;
    }
    out
}

/// Schmidt rank of `psi` across `cut | rest` from the singular values of the
/// reshaped amplitude matrix.
pub fn schmidt_rank(psi: &StateVector, cut: &[usize], eps: f64) -> usize {
    let n = psi.n();
    let rest: Vec<usize> = (1..=n).filter(|q| !cut.contains(q)).collect();
    let index = |qs: &[usize], full: usize| -> usize {
        qs.iter().fold(0, |acc, &q| (acc << 1) | ((full >> (n - q)) & 1))
    };
    let mut m = DMatrix::<C64>::zeros(1 << cut.len(), 1 << rest.len());
    for (full, amp) in psi.amps().iter().enumerate() {
        m[(index(cut, full), index(&rest, full))] = *amp;
    }
    m.singular_values().iter().filter(|s| **s > eps).count()
}

use descriptor_net::branching::{
    apply_relative, decomposition_deviation, foliate, make_pvm, relative_expectation, relative_recombine, split_unitary,
    Outcome,
};
use descriptor_net::network::{build_gate, expectation, phenomenal_state};
use descriptor_net::noumenal::{
    product_law_deviation, project_noumenal, verify_no_action, NoumenalState,
};
use descriptor_net::oracle::{conditional_expectation, pauli_expectation, sv_run};
use descriptor_net::Axis;

/// Largest gap between descriptor and state-vector expectations of every
/// single- and two-qubit Pauli observable after `gates`.
pub fn picture_gap(psi: &StateVector, gates: &[GateSpec]) -> f64 {
    let n = psi.n();
    let net = evolve(init_network(n, Some(psi.amps()), tol()).unwrap(), gates);
    let out = sv_run(psi, gates, tol()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 1..=n {
        for a in Axis::ALL {
            let qi = net.descriptor(i, a).unwrap();
            let heis = expectation(&net, qi).unwrap();
            worst = worst.max((heis - pauli_expectation(&out, &[(i, a)])).abs());
            for j in i + 1..=n {
                for b in Axis::ALL {
                    let prod = qi * net.descriptor(j, b).unwrap();
                    let heis = expectation(&net, &prod).unwrap();
                    worst = worst.max((heis - pauli_expectation(&out, &[(i, a), (j, b)])).abs());
                }
            }
        }
    }
    worst
}

/// Worst invariant deviation over every step of `gates`, with the state held
/// fixed and every Bloch vector inside the ball.
pub fn conservation_gap(psi: &StateVector, gates: &[GateSpec]) -> f64 {
    let mut net = init_network(psi.n(), Some(psi.amps()), tol()).unwrap();
    let rho0 = net.rho().clone();
    let mut worst = net.check_invariants().max();
    for g in gates {
        net = apply_gate(&net, g).unwrap();
        worst = worst.max(net.check_invariants().max());
        assert_eq!(net.rho(), &rho0, "Heisenberg state changed");
        for q in 1..=net.n() {
            let norm = phenomenal_state(&net, q).unwrap().norm();
            assert!(norm <= 1.0 + 1e-10, "Bloch norm {norm}");
        }
    }
    worst
}

/// A random network and a random single-qubit gate; returns how far the other qubits moved.
pub fn no_action_case(rng: &mut impl Rng) -> f64 {
    let n = rng.gen_range(2..=5);
    let depth = rng.gen_range(0..=12);
    let net = random_network(rng, n, depth);
    let k = rng.gen_range(1..=n);
    let remote: Vec<usize> = (1..=n).filter(|&q| q != k).collect();
    verify_no_action(&net, &random_single(rng, k), &remote).unwrap()
}

/// `V` on a random block A, `W` on its complement; returns the product-law deviation.
pub fn product_law_case(rng: &mut impl Rng) -> f64 {
    let n = rng.gen_range(2..=5);
    let depth = rng.gen_range(0..=12);
    let net = random_network(rng, n, depth);
    let mut qs: Vec<usize> = (1..=n).collect();
    qs.shuffle(rng);
    let split = rng.gen_range(1..n);
    let (mut a, mut b) = (qs[..split].to_vec(), qs[split..].to_vec());
    a.sort_unstable();
    b.sort_unstable();
    let local = |rng: &mut dyn rand::RngCore, block: &[usize]| -> GateSpec {
        let mut rng = rng;
        if block.len() >= 2 && rng.gen_bool(0.5) {
            let mut s = block.to_vec();
            s.shuffle(&mut rng);
            GateSpec::cnot(s[0], s[1])
        } else {
            let q = block[rng.gen_range(0..block.len())];
            random_single(&mut rng, q)
        }
    };
    let v = build_gate(&net, &local(rng, &a)).unwrap();
    let w = build_gate(&net, &local(rng, &b)).unwrap();
    let full = NoumenalState::of_network(&net);
    let na = project_noumenal(&full, &a).unwrap();
    let nb = project_noumenal(&full, &b).unwrap();
    product_law_deviation(&v, &na, &w, &nb, tol()).unwrap()
}

/// Worst deviation of the split-unitary identities for one random network and
/// one unitary commuting with the branching observable.
pub fn split_case(rng: &mut impl Rng) -> f64 {
    loop {
        let n = rng.gen_range(2..=4);
        let depth = rng.gen_range(1..=10);
        let mut net = random_network(rng, n, depth);
        // Make sure the branching qubit is not sharp.
        let b = rng.gen_range(1..=n);
        net = apply_gate(&net, &GateSpec::single(b, random_coeffs(rng))).unwrap();
        let a = loop {
            let a = rng.gen_range(1..=n);
            if a != b {
                break a;
            }
        };
        let pvm = make_pvm(&net, b).unwrap();
        let weight = net.heisenberg_state().trace_with(pvm.projector(Outcome::Plus)).re;
        if !(1e-6..=1.0 - 1e-6).contains(&weight) {
            continue;
        }
        let (plus, minus) = foliate(&net, a, &pvm).unwrap();

        // U = Π₊W₊ + Π₋W₋ with W± acting away from b.
        let others: Vec<usize> = (1..=n).filter(|&q| q != b).collect();
        let pick = |rng: &mut dyn rand::RngCore| -> GateSpec {
            let mut rng = rng;
            if others.len() >= 2 && rng.gen_bool(0.3) {
                let mut s = others.clone();
                s.shuffle(&mut rng);
                GateSpec::cnot(s[0], s[1])
            } else {
                GateSpec::single(others[rng.gen_range(0..others.len())], random_coeffs(&mut rng))
            }
        };
        let w_plus = build_gate(&net, &pick(rng)).unwrap();
        let w_minus = build_gate(&net, &pick(rng)).unwrap();
        let u = &(pvm.projector(Outcome::Plus) * &w_plus) + &(pvm.projector(Outcome::Minus) * &w_minus);

        let rel = split_unitary(&u, &pvm, tol()).unwrap();
        let absolute = net.triple(a).unwrap();
        let mut worst = decomposition_deviation(&u, &rel, (&plus, &minus), absolute);

        let recombined = relative_recombine(&plus, &minus, tol()).unwrap();
        let abs_state = project_noumenal(&NoumenalState::of_network(&net), &[a]).unwrap();
        worst = worst.max(recombined.max_dist(&abs_state).unwrap());

        let evolved = apply_relative(&rel, (&plus, &minus), tol()).unwrap();
        let direct = absolute.conjugate_by(&u);
        worst = worst.max(evolved.triple(a).unwrap().max_dist(&direct));
        worst = worst.max(plus.pauli_deviation()).max(minus.pauli_deviation());
        return worst;
    }
}

/// Relative expectations against state-vector conditional expectations for a
/// random circuit followed by a measurement CNOT of `b` onto `a`.
pub fn conditional_gap(rng: &mut impl Rng) -> f64 {
    loop {
        let n = rng.gen_range(2..=4);
        let depth = rng.gen_range(0..=8);
        let mut gates = random_circuit(rng, n, depth);
        let mut qs: Vec<usize> = (1..=n).collect();
        qs.shuffle(rng);
        let (a, b) = (qs[0], qs[1]);
        gates.push(GateSpec::single(b, random_coeffs(rng)));
        gates.push(GateSpec::cnot(b, a));
        let psi0 = random_state(rng, n);
        let net = evolve(init_network(n, Some(psi0.amps()), tol()).unwrap(), &gates);
        let psi = sv_run(&psi0, &gates, tol()).unwrap();
        let pvm = make_pvm(&net, b).unwrap();
        let weight = net.heisenberg_state().trace_with(pvm.projector(Outcome::Plus)).re;
        if !(1e-6..=1.0 - 1e-6).contains(&weight) {
            continue;
        }
        let (plus, minus) = foliate(&net, a, &pvm).unwrap();
        let z_b = Operator::embed(&Operator::pauli(Axis::Z), b, n).unwrap();
        let unit = Operator::identity(z_b.dim());
        let mut worst: f64 = 0.0;
        for branch in [&plus, &minus] {
            let sign = C64::new(branch.label().value(), 0.0);
            let proj = (&unit + &z_b.scale(sign)).scale(C64::new(0.5, 0.0));
            for axis in Axis::ALL {
                let obs = Operator::embed(&Operator::pauli(axis), a, n).unwrap();
                let want = conditional_expectation(&psi, &proj, &obs, tol()).unwrap();
                let got = relative_expectation(branch, axis, tol()).unwrap();
                worst = worst.max((want - got).abs());
            }
        }
        return worst;
    }
}
