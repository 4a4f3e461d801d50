//! Heisenberg-picture qubit networks.
//!
//! Each qubit is a triple of Hermitian operators (its descriptors) that obey
//! the Pauli algebra; distinct qubits' descriptors commute. The network's
//! state vector never moves: it is frozen into a constant Heisenberg state
//! `ρ = |ψ₀⟩⟨ψ₀|` and all dynamics happen by conjugating descriptors.
//!
//! Gates are built as polynomials in the descriptors *current* at the time
//! they act, so a Hadamard at t = 5 is `(q_x(5) + q_z(5))/√2`, not a fixed
//! matrix. The Schrödinger-picture [`oracle`](crate::oracle) checks that this
//! reproduces ordinary circuit semantics.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    check_qubit, commutator, dist, hermiticity_deviation, projector_deviation, unitarity_deviation,
    Axis, Operator, Tolerance, C64, ONE, ZERO,
};

/// The three descriptors `(q_x, q_y, q_z)` of one qubit at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorTriple {
    qubit: usize,
    components: [Operator; 3],
}

impl DescriptorTriple {
    pub fn new(qubit: usize, qx: Operator, qy: Operator, qz: Operator) -> Self {
        DescriptorTriple { qubit, components: [qx, qy, qz] }
    }

    pub fn qubit(&self) -> usize {
        self.qubit
    }

    pub fn component(&self, axis: Axis) -> &Operator {
        &self.components[axis.index()]
    }

    pub fn components(&self) -> &[Operator; 3] {
        &self.components
    }

    pub fn conjugate_by(&self, u: &Operator) -> Self {
        DescriptorTriple {
            qubit: self.qubit,
            components: self.components.each_ref().map(|q| q.conjugate_by(u)),
        }
    }

    /// Largest component-wise Frobenius distance to `other`.
    pub fn max_dist(&self, other: &DescriptorTriple) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| dist(a, b))
            .fold(0.0, f64::max)
    }

    pub fn pauli_deviation(&self) -> f64 {
        let unit = Operator::identity(self.components[0].dim());
        pauli_algebra_deviation(&self.components, &unit)
    }
}

/// Largest violation of `q_i q_j = δ_ij·unit + i ε_ijk q_k` over all `i, j`.
///
/// `unit` is the identity for absolute descriptors and the branch projector
/// for relative ones.
pub fn pauli_algebra_deviation(triple: &[Operator; 3], unit: &Operator) -> f64 {
    let mut worst: f64 = 0.0;
    for i in Axis::ALL {
        for j in Axis::ALL {
            let lhs = &triple[i.index()] * &triple[j.index()];
            let rhs = match Axis::levi_civita(i, j) {
                None => unit.clone(),
                Some((k, sign)) => triple[k.index()].scale(C64::new(0.0, sign)),
            };
            worst = worst.max(dist(&lhs, &rhs));
        }
    }
    worst
}

/// The constant dyadic `ρ = |ψ₀⟩⟨ψ₀|` supplying every expectation value.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergState {
    rho: Operator,
}

impl HeisenbergState {
    pub fn from_vector(psi: &[C64], tol: Tolerance) -> Result<Self> {
        if !psi.len().is_power_of_two() || psi.len() < 2 {
            return Err(Error::InvalidState(format!(
                "state vector length {} is not 2^n for n >= 1",
                psi.len()
            )));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !tol.accepts((norm - 1.0).abs()) {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(HeisenbergState { rho: Operator::dyadic(psi)? })
    }

    /// Wraps an existing rank-one projector with unit trace.
    pub fn from_operator(rho: Operator, tol: Tolerance) -> Result<Self> {
        let dev = projector_deviation(&rho);
        let tr = rho.trace();
        if !tol.accepts(dev) || !tol.accepts((tr - ONE).norm()) {
            return Err(Error::InvalidState(format!(
                "not a unit-trace projector (projector deviation {dev:.3e}, trace {tr})"
            )));
        }
        Ok(HeisenbergState { rho })
    }

    pub fn rho(&self) -> &Operator {
        &self.rho
    }

    /// `Tr(obs · ρ)` with no Hermiticity check.
    pub fn trace_with(&self, obs: &Operator) -> C64 {
        obs.trace_product(&self.rho)
    }
}

/// Coefficients of `c0·1 + cx·q_x + cy·q_y + cz·q_z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliCoeffs {
    pub c0: C64,
    pub cx: C64,
    pub cy: C64,
    pub cz: C64,
}

impl PauliCoeffs {
    pub fn new(c0: C64, cx: C64, cy: C64, cz: C64) -> Self {
        PauliCoeffs { c0, cx, cy, cz }
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ZERO)
    }

    pub fn hadamard() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(ZERO, h, ZERO, h)
    }

    pub fn pauli(axis: Axis) -> Self {
        let mut c = Self::new(ZERO, ZERO, ZERO, ZERO);
        *c.coeff_mut(axis) = ONE;
        c
    }

    /// `exp(-i·angle/2·σ_axis)`.
    pub fn rotation(axis: Axis, angle: f64) -> Self {
        let mut c = Self::new(C64::new((angle / 2.0).cos(), 0.0), ZERO, ZERO, ZERO);
        *c.coeff_mut(axis) = C64::new(0.0, -(angle / 2.0).sin());
        c
    }

    pub fn coeff(&self, axis: Axis) -> C64 {
        match axis {
            Axis::X => self.cx,
            Axis::Y => self.cy,
            Axis::Z => self.cz,
        }
    }

    fn coeff_mut(&mut self, axis: Axis) -> &mut C64 {
        match axis {
            Axis::X => &mut self.cx,
            Axis::Y => &mut self.cy,
            Axis::Z => &mut self.cz,
        }
    }

    /// The polynomial evaluated on the Pauli matrices, i.e. the 2×2 gate at t = 0.
    pub fn matrix2(&self) -> Operator {
        self.assemble(
            &Operator::identity(2),
            [&Operator::pauli(Axis::X), &Operator::pauli(Axis::Y), &Operator::pauli(Axis::Z)],
        )
    }

    fn assemble(&self, unit: &Operator, q: [&Operator; 3]) -> Operator {
        let mut u = unit.scale(self.c0);
        for axis in Axis::ALL {
            let c = self.coeff(axis);
            if c != ZERO {
                u = &u + &q[axis.index()].scale(c);
            }
        }
        u
    }
}

/// A gate, described independently of the time at which it is applied.
#[derive(Clone, Debug, PartialEq)]
pub enum GateSpec {
    Single { qubit: usize, coeffs: PauliCoeffs },
    Cnot { control: usize, target: usize },
    /// A unitary on `support`, written in the t = 0 computational basis with
    /// `support[0]` as its leftmost factor.
    Raw { unitary: Operator, support: Vec<usize> },
}

impl GateSpec {
    pub fn single(qubit: usize, coeffs: PauliCoeffs) -> Self {
        GateSpec::Single { qubit, coeffs }
    }

    pub fn hadamard(qubit: usize) -> Self {
        Self::single(qubit, PauliCoeffs::hadamard())
    }

    pub fn pauli(qubit: usize, axis: Axis) -> Self {
        Self::single(qubit, PauliCoeffs::pauli(axis))
    }

    pub fn rotation(qubit: usize, axis: Axis, angle: f64) -> Self {
        Self::single(qubit, PauliCoeffs::rotation(axis, angle))
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateSpec::Cnot { control, target }
    }

    pub fn support(&self) -> Vec<usize> {
        match self {
            GateSpec::Single { qubit, .. } => vec![*qubit],
            GateSpec::Cnot { control, target } => vec![*control, *target],
            GateSpec::Raw { support, .. } => support.clone(),
        }
    }

    /// Validates indices against an `n`-qubit network.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            GateSpec::Single { qubit, .. } => check_qubit(*qubit, n),
            GateSpec::Cnot { control, target } => {
                check_qubit(*control, n)?;
                check_qubit(*target, n)?;
                if control == target {
                    return Err(Error::InvalidSubsystem(format!(
                        "cnot control and target are both qubit {control}"
                    )));
                }
                Ok(())
            }
            GateSpec::Raw { unitary, support } => {
                for &q in support {
                    check_qubit(q, n)?;
                }
                let mut s = support.clone();
                s.sort_unstable();
                s.dedup();
                if s.len() != support.len() || support.is_empty() {
                    return Err(Error::InvalidSubsystem(format!("bad raw gate support {support:?}")));
                }
                if unitary.dim() != 1 << support.len() {
                    return Err(Error::DimMismatch { left: unitary.dim(), right: 1 << support.len() });
                }
                Ok(())
            }
        }
    }
}

/// Bloch vector `(⟨q_x⟩, ⟨q_y⟩, ⟨q_z⟩)` of one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhenomenalState {
    pub bloch: [f64; 3],
}

impl PhenomenalState {
    pub fn norm(&self) -> f64 {
        self.bloch.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn get(&self, axis: Axis) -> f64 {
        self.bloch[axis.index()]
    }
}

/// Worst-case violations of the network's algebraic invariants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct InvariantDeviations {
    pub pauli: f64,
    pub commutation: f64,
    pub hermiticity: f64,
    pub tracelessness: f64,
}

impl InvariantDeviations {
    pub fn max(&self) -> f64 {
        self.pauli.max(self.commutation).max(self.hermiticity).max(self.tracelessness)
    }
}

/// An n-qubit network at one instant: n descriptor triples plus the shared
/// Heisenberg state.
#[derive(Clone, Debug)]
pub struct Network {
    n: usize,
    triples: Vec<DescriptorTriple>,
    rho: Arc<HeisenbergState>,
    t: usize,
    tol: Tolerance,
}

/// Dense 2^n operators stop being practical past this size.
pub const MAX_QUBITS: usize = 10;

/// A fresh network with descriptors `I⊗…⊗σ_j⊗…⊗I`; `psi0` defaults to `|0…0⟩`.
pub fn init_network(n: usize, psi0: Option<&[C64]>, tol: Tolerance) -> Result<Network> {
    if n < 1 {
        return Err(Error::InvalidArg("a network needs at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::InvalidArg(format!("{n} qubits exceeds the dense-operator limit of {MAX_QUBITS}")));
    }
    let dim = 1usize << n;
    let rho = match psi0 {
        Some(psi) => {
            if psi.len() != dim {
                return Err(Error::InvalidState(format!(
                    "state vector has {} amplitudes, expected {dim}",
                    psi.len()
                )));
            }
            HeisenbergState::from_vector(psi, tol)?
        }
        None => {
            let mut psi = vec![ZERO; dim];
            psi[0] = ONE;
            HeisenbergState::from_vector(&psi, tol)?
        }
    };
    let triples = (1..=n)
        .map(|a| {
            let [qx, qy, qz] =
                Axis::ALL.map(|axis| Operator::embed(&Operator::pauli(axis), a, n).expect("valid slot"));
            DescriptorTriple::new(a, qx, qy, qz)
        })
        .collect();
    Ok(Network { n, triples, rho: Arc::new(rho), t: 0, tol })
}

impl Network {
    /// `n` qubits in `|0…0⟩` with the default tolerance.
    pub fn new(n: usize) -> Result<Self> {
        init_network(n, None, Tolerance::default())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn unit(&self) -> Operator {
        Operator::identity(self.dim())
    }

    pub fn triples(&self) -> &[DescriptorTriple] {
        &self.triples
    }

    pub fn triple(&self, qubit: usize) -> Result<&DescriptorTriple> {
        check_qubit(qubit, self.n)?;
        Ok(&self.triples[qubit - 1])
    }

    pub fn descriptor(&self, qubit: usize, axis: Axis) -> Result<&Operator> {
        Ok(self.triple(qubit)?.component(axis))
    }

    pub fn heisenberg_state(&self) -> &Arc<HeisenbergState> {
        &self.rho
    }

    pub fn rho(&self) -> &Operator {
        self.rho.rho()
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn check_invariants(&self) -> InvariantDeviations {
        let mut dev = InvariantDeviations::default();
        for triple in &self.triples {
            dev.pauli = dev.pauli.max(triple.pauli_deviation());
            for q in triple.components() {
                dev.hermiticity = dev.hermiticity.max(hermiticity_deviation(q));
                dev.tracelessness = dev.tracelessness.max(q.trace().norm());
            }
        }
        dev.commutation = self.commutation_deviation();
        dev
    }

    /// Largest `‖[q_ai, q_bj]‖` over all `a ≠ b` and all components.
    pub fn commutation_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (ia, ta) in self.triples.iter().enumerate() {
            for tb in &self.triples[ia + 1..] {
                for qa in ta.components() {
                    for qb in tb.components() {
                        worst = worst.max(commutator(qa, qb).frobenius_norm());
                    }
                }
            }
        }
        worst
    }

    pub(crate) fn from_parts(
        n: usize,
        triples: Vec<DescriptorTriple>,
        rho: Arc<HeisenbergState>,
        t: usize,
        tol: Tolerance,
    ) -> Self {
        Network { n, triples, rho, t, tol }
    }
}

/// Assembles the gate's unitary from the descriptors current at `net.t()`.
pub fn build_gate(net: &Network, spec: &GateSpec) -> Result<Operator> {
    spec.validate(net.n)?;
    let unit = net.unit();
    let u = match spec {
        GateSpec::Single { qubit, coeffs } => {
            let q = net.triple(*qubit)?.components();
            coeffs.assemble(&unit, [&q[0], &q[1], &q[2]])
        }
        GateSpec::Cnot { control, target } => {
            let zb = net.descriptor(*control, Axis::Z)?;
            let xa = net.descriptor(*target, Axis::X)?;
            let half = C64::new(0.5, 0.0);
            let p_plus = (&unit + zb).scale(half);
            let p_minus = (&unit - zb).scale(half);
            &p_plus + &(&p_minus * xa)
        }
        GateSpec::Raw { unitary, support } => {
            let dev = unitarity_deviation(unitary);
            if !net.tol.accepts(dev) {
                return Err(Error::NotUnitary { deviation: dev });
            }
            assemble_raw(net, unitary, support)
        }
    };
    let dev = unitarity_deviation(&u);
    if !net.tol.accepts(dev) {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(polish_unitary(u, dev))
}

/// Newton–Schulz steps `U ← U + ½U(1 − U†U)` towards the nearest unitary.
///
/// The gate polynomial inherits the rounding error of the descriptors it is
/// built from; conjugating by a slightly non-unitary `U` feeds that error back
/// into the Pauli algebra, which then grows geometrically with circuit depth.
fn polish_unitary(mut u: Operator, mut dev: f64) -> Operator {
    let unit = Operator::identity(u.dim());
    let half = C64::new(0.5, 0.0);
    for _ in 0..3 {
        if dev == 0.0 {
            break;
        }
        let defect = &unit - &(&u.dagger() * &u);
        let next = &u + &(&u * &defect).scale(half);
        let next_dev = unitarity_deviation(&next);
        if next_dev >= dev {
            break;
        }
        u = next;
        dev = next_dev;
    }
    u
}

/// Expands `m` over Pauli strings on `support` and substitutes the current
/// descriptors for the Pauli matrices.
fn assemble_raw(net: &Network, m: &Operator, support: &[usize]) -> Operator {
    let k = support.len();
    let local_dim = 1usize << k;
    let mut u = Operator::zeros(net.dim());
    for code in 0..(1usize << (2 * k)) {
        // Base-4 digits, most significant first: 0 = 1, 1 = x, 2 = y, 3 = z.
        let letters: Vec<usize> = (0..k).map(|p| (code >> (2 * (k - 1 - p))) & 3).collect();
        let local = letters.iter().fold(Operator::identity(1), |acc, &l| {
            let f = match l {
                0 => Operator::identity(2),
                l => Operator::pauli(Axis::ALL[l - 1]),
            };
            crate::operator::kron(&acc, &f)
        });
        let c = local.trace_product(m) / local_dim as f64;
        if c.norm() < 1e-15 {
            continue;
        }
        let mut term = net.unit().scale(c);
        for (&q, &l) in support.iter().zip(&letters) {
            if l > 0 {
                term = &term * net.triples[q - 1].component(Axis::ALL[l - 1]);
            }
        }
        u = &u + &term;
    }
    u
}

/// Conjugates every descriptor of every qubit by the gate's unitary and
/// advances time by one step.
pub fn apply_gate(net: &Network, spec: &GateSpec) -> Result<Network> {
    let u = build_gate(net, spec)?;
    Ok(conjugate_network(net, &u))
}

pub(crate) fn conjugate_network(net: &Network, u: &Operator) -> Network {
    let triples = net.triples.iter().map(|tr| tr.conjugate_by(u)).collect();
    Network::from_parts(net.n, triples, Arc::clone(&net.rho), net.t + 1, net.tol)
}

/// CNOT by its closed-form action on descriptors, with `control` the measured
/// qubit b and `target` the measurer a:
/// `q_a → (q_ax, q_ay q_bz, q_az q_bz)`, `q_b → (q_bx q_ax, q_by q_ax, q_bz)`.
pub fn cnot_closed_form(net: &Network, control: usize, target: usize) -> Result<Network> {
    GateSpec::cnot(control, target).validate(net.n)?;
    let qa = net.triple(target)?.components();
    let qb = net.triple(control)?.components();
    let new_a = DescriptorTriple::new(target, qa[0].clone(), &qa[1] * &qb[2], &qa[2] * &qb[2]);
    let new_b = DescriptorTriple::new(control, &qb[0] * &qa[0], &qb[1] * &qa[0], qb[2].clone());
    let mut triples = net.triples.clone();
    triples[target - 1] = new_a;
    triples[control - 1] = new_b;
    Ok(Network::from_parts(net.n, triples, Arc::clone(&net.rho), net.t + 1, net.tol))
}

/// `Tr(obs · ρ)` for a Hermitian `obs`.
pub fn expectation(net: &Network, obs: &Operator) -> Result<f64> {
    if obs.dim() != net.dim() {
        return Err(Error::DimMismatch { left: obs.dim(), right: net.dim() });
    }
    let dev = hermiticity_deviation(obs);
    if !net.tol.accepts(dev) {
        return Err(Error::NotObservable { deviation: dev });
    }
    Ok(net.rho.trace_with(obs).re)
}

/// `⟨O²⟩ − ⟨O⟩²`, clamped at zero.
pub fn variance(net: &Network, obs: &Operator) -> Result<f64> {
    let mean = expectation(net, obs)?;
    let second = net.rho.trace_with(&(obs * obs)).re;
    Ok((second - mean * mean).max(0.0))
}

/// A sharp observable has zero variance within tolerance.
pub fn is_sharp(net: &Network, obs: &Operator) -> Result<bool> {
    Ok(net.tol.accepts(variance(net, obs)?))
}

pub fn phenomenal_state(net: &Network, qubit: usize) -> Result<PhenomenalState> {
    let triple = net.triple(qubit)?;
    let mut bloch = [0.0; 3];
    for axis in Axis::ALL {
        bloch[axis.index()] = expectation(net, triple.component(axis))?;
    }
    Ok(PhenomenalState { bloch })
}
