//! Relative descriptors and local branching.
//!
//! After qubit b has been entangled with qubit a, the two-outcome PVM
//! `Π_±1 = ½(1 ± q_bz(t₀))` foliates a's descriptors into one relative triple
//! per outcome, `q_{a,θ}(t) = Π_θ(t₀)·q_a(t)`. Each relative triple obeys the
//! Pauli algebra with `Π_θ` playing the unit, its expectations are
//! conditioned on the outcome, and the two triples add back to the absolute one.
//! Only qubit a is foliated; nothing about any other qubit changes.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{pauli_algebra_deviation, DescriptorTriple, HeisenbergState, Network};
use crate::noumenal::NoumenalState;
use crate::operator::{
    check_qubit, commutator, dist, projector_deviation, unitarity_deviation, Axis, Operator, Tolerance, C64,
};

/// Branch label: the eigenvalue of the branching observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Outcome {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        })
    }
}

/// Where a PVM came from: `axis` of `qubit` at time `time`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PvmSource {
    pub qubit: usize,
    pub axis: Axis,
    pub time: usize,
}

/// Two orthogonal projectors summing to the unit.
#[derive(Clone, Debug)]
pub struct Pvm {
    plus: Operator,
    minus: Operator,
    source: Option<PvmSource>,
}

impl Pvm {
    /// Accepts an arbitrary pair after re-checking the projector algebra.
    pub fn from_projectors(plus: Operator, minus: Operator, tol: Tolerance) -> Result<Self> {
        if plus.dim() != minus.dim() {
            return Err(Error::DimMismatch { left: plus.dim(), right: minus.dim() });
        }
        let pvm = Pvm { plus, minus, source: None };
        let dev = pvm.algebra_deviation();
        if !tol.accepts(dev) {
            return Err(Error::InvalidArg(format!("projectors violate the PVM algebra by {dev:.3e}")));
        }
        Ok(pvm)
    }

    pub fn projector(&self, outcome: Outcome) -> &Operator {
        match outcome {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
        }
    }

    pub fn source(&self) -> Option<PvmSource> {
        self.source
    }

    /// `Π₊₁ − Π₋₁`, the observable being branched on.
    pub fn observable(&self) -> Operator {
        &self.plus - &self.minus
    }

    /// Worst violation of `Π_α Π_β = δ_αβ Π_α`, Hermiticity, and `Π₊₁ + Π₋₁ = 1`.
    pub fn algebra_deviation(&self) -> f64 {
        let unit = Operator::identity(self.plus.dim());
        let mut worst = dist(&(&self.plus + &self.minus), &unit);
        for p in [&self.plus, &self.minus] {
            worst = worst.max(projector_deviation(p));
        }
        worst = worst.max((&self.plus * &self.minus).frobenius_norm());
        worst.max((&self.minus * &self.plus).frobenius_norm())
    }
}

/// `Π_±1(t₀) = ½(1 ± q_bz(t₀))` at the network's current time.
pub fn make_pvm(net: &Network, b: usize) -> Result<Pvm> {
    check_qubit(b, net.n())?;
    let qz = net.descriptor(b, Axis::Z)?;
    let unit = net.unit();
    let half = C64::new(0.5, 0.0);
    Ok(Pvm {
        plus: (&unit + qz).scale(half),
        minus: (&unit - qz).scale(half),
        source: Some(PvmSource { qubit: b, axis: Axis::Z, time: net.t() }),
    })
}

/// One Everettian instance of a qubit: `(Π_θ·q_a, ρ)` plus its unit and weight.
#[derive(Clone, Debug)]
pub struct RelativeBranch {
    qubit: usize,
    label: Outcome,
    triple: [Operator; 3],
    unit: Operator,
    weight: f64,
    rho: Arc<HeisenbergState>,
}

impl RelativeBranch {
    pub fn qubit(&self) -> usize {
        self.qubit
    }

    pub fn label(&self) -> Outcome {
        self.label
    }

    pub fn component(&self, axis: Axis) -> &Operator {
        &self.triple[axis.index()]
    }

    pub fn components(&self) -> &[Operator; 3] {
        &self.triple
    }

    /// The projector acting as this branch's unit observable.
    pub fn unit(&self) -> &Operator {
        &self.unit
    }

    /// `⟨Π_θ⟩`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn heisenberg_state(&self) -> &Arc<HeisenbergState> {
        &self.rho
    }

    /// Worst violation of `q_iθ q_jθ = δ_ij Π_θ + i ε_ijk q_kθ`.
    pub fn pauli_deviation(&self) -> f64 {
        pauli_algebra_deviation(&self.triple, &self.unit)
    }

    /// Worst violation of `q_iθ Π_θ = Π_θ q_iθ = q_iθ`.
    pub fn unit_deviation(&self) -> f64 {
        self.triple
            .iter()
            .map(|q| dist(&(q * &self.unit), q).max(dist(&(&self.unit * q), q)))
            .fold(0.0, f64::max)
    }

    /// `U_θ ⋆ (q_θ, ρ)`.
    pub fn evolve(&self, u_theta: &Operator) -> RelativeBranch {
        let ud = u_theta.dagger();
        let conj = |q: &Operator| &(&ud * q) * u_theta;
        RelativeBranch {
            qubit: self.qubit,
            label: self.label,
            triple: self.triple.each_ref().map(conj),
            unit: conj(&self.unit),
            weight: self.weight,
            rho: Arc::clone(&self.rho),
        }
    }

    pub fn max_dist(&self, other: &RelativeBranch) -> f64 {
        self.triple
            .iter()
            .zip(&other.triple)
            .map(|(a, b)| dist(a, b))
            .fold(dist(&self.unit, &other.unit), f64::max)
    }
}

/// Foliates qubit `a` into its two relative triples, `(+1 branch, −1 branch)`.
///
/// Valid only while each projector commutes with every component of `q_a(t)`
/// and both branch weights are non-zero.
pub fn foliate(net: &Network, a: usize, pvm: &Pvm) -> Result<(RelativeBranch, RelativeBranch)> {
    let triple = net.triple(a)?;
    if pvm.plus.dim() != net.dim() {
        return Err(Error::DimMismatch { left: pvm.plus.dim(), right: net.dim() });
    }
    if let Some(src) = pvm.source {
        if net.t() < src.time {
            return Err(Error::InvalidArg(format!(
                "cannot foliate at t = {} on a PVM built at t0 = {}",
                net.t(),
                src.time
            )));
        }
    }
    let tol = net.tol();
    let mut norm: f64 = 0.0;
    for outcome in Outcome::ALL {
        for q in triple.components() {
            norm = norm.max(commutator(pvm.projector(outcome), q).frobenius_norm());
        }
    }
    if !tol.accepts(norm) {
        return Err(Error::NonCommutingFoliation { norm });
    }
    let rho = net.heisenberg_state();
    let branch = |outcome: Outcome| -> Result<RelativeBranch> {
        let p = pvm.projector(outcome);
        let weight = rho.trace_with(p).re;
        if weight <= tol.eps() {
            return Err(Error::ZeroWeightBranch { weight });
        }
        Ok(RelativeBranch {
            qubit: a,
            label: outcome,
            triple: triple.components().each_ref().map(|q| p * q),
            unit: p.clone(),
            weight,
            rho: Arc::clone(rho),
        })
    };
    Ok((branch(Outcome::Plus)?, branch(Outcome::Minus)?))
}

fn checked_weight(branch: &RelativeBranch, tol: Tolerance) -> Result<f64> {
    let w = branch.rho.trace_with(&branch.unit).re;
    if w <= tol.eps() {
        return Err(Error::ZeroWeightBranch { weight: w });
    }
    Ok(w)
}

/// `⟨q_iθ⟩ / ⟨Π_θ⟩`.
pub fn relative_expectation(branch: &RelativeBranch, axis: Axis, tol: Tolerance) -> Result<f64> {
    let w = checked_weight(branch, tol)?;
    Ok(branch.rho.trace_with(branch.component(axis)).re / w)
}

/// `⟨q_iθ²⟩_θ − ⟨q_iθ⟩_θ²`, clamped at zero.
pub fn relative_variance(branch: &RelativeBranch, axis: Axis, tol: Tolerance) -> Result<f64> {
    let w = checked_weight(branch, tol)?;
    let q = branch.component(axis);
    let mean = branch.rho.trace_with(q).re / w;
    let second = branch.rho.trace_with(&(q * q)).re / w;
    Ok((second - mean * mean).max(0.0))
}

/// Relative Bloch vector of a branch.
pub fn relative_bloch(branch: &RelativeBranch, tol: Tolerance) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for axis in Axis::ALL {
        out[axis.index()] = relative_expectation(branch, axis, tol)?;
    }
    Ok(out)
}

fn check_pair(b1: &RelativeBranch, b2: &RelativeBranch, tol: Tolerance) -> Result<()> {
    if b1.qubit != b2.qubit {
        return Err(Error::MismatchedBranches(format!("qubits {} and {}", b1.qubit, b2.qubit)));
    }
    if b1.label == b2.label {
        return Err(Error::MismatchedBranches(format!("both branches are labelled {}", b1.label)));
    }
    if !Arc::ptr_eq(&b1.rho, &b2.rho) && !tol.accepts(dist(b1.rho.rho(), b2.rho.rho())) {
        return Err(Error::MismatchedBranches("different Heisenberg states".into()));
    }
    let unit = Operator::identity(b1.unit.dim());
    let d = dist(&(&b1.unit + &b2.unit), &unit);
    if !tol.accepts(d) {
        return Err(Error::MismatchedBranches(format!("branch units miss the unit by {d:.3e}")));
    }
    Ok(())
}

/// `⊙_R`: adds the two relative triples back into an absolute noumenal state.
pub fn relative_recombine(b1: &RelativeBranch, b2: &RelativeBranch, tol: Tolerance) -> Result<NoumenalState> {
    check_pair(b1, b2, tol)?;
    let [qx, qy, qz] = [0, 1, 2].map(|k| &b1.triple[k] + &b2.triple[k]);
    NoumenalState::new(vec![DescriptorTriple::new(b1.qubit, qx, qy, qz)], Arc::clone(&b1.rho))
}

/// `U₊₁ = U Π₊₁`, `U₋₁ = U Π₋₁`.
#[derive(Clone, Debug)]
pub struct RelativeUnitaries {
    pub plus: Operator,
    pub minus: Operator,
}

impl RelativeUnitaries {
    pub fn get(&self, outcome: Outcome) -> &Operator {
        match outcome {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
        }
    }

    /// `U₋₁ ×_R U₊₁`, which acts on the absolute state as `U₋₁ + U₊₁`.
    pub fn relative_product(&self) -> Operator {
        &self.minus + &self.plus
    }
}

/// Splits `u` along the PVM. `u` must commute with the branching observable.
pub fn split_unitary(u: &Operator, pvm: &Pvm, tol: Tolerance) -> Result<RelativeUnitaries> {
    if u.dim() != pvm.plus.dim() {
        return Err(Error::DimMismatch { left: u.dim(), right: pvm.plus.dim() });
    }
    let dev = unitarity_deviation(u);
    if !tol.accepts(dev) {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let norm = commutator(u, &pvm.observable()).frobenius_norm();
    if !tol.accepts(norm) {
        return Err(Error::NonCommutingGate { norm });
    }
    Ok(RelativeUnitaries { plus: u * &pvm.plus, minus: u * &pvm.minus })
}

/// Evolves each branch by its own relative unitary and recombines:
/// `(U₋₁ ⋆ N₋₁) ⊙_R (U₊₁ ⋆ N₊₁)`.
pub fn apply_relative(
    rel: &RelativeUnitaries,
    branches: (&RelativeBranch, &RelativeBranch),
    tol: Tolerance,
) -> Result<NoumenalState> {
    let (b1, b2) = branches;
    check_pair(b1, b2, tol)?;
    let e1 = b1.evolve(rel.get(b1.label));
    let e2 = b2.evolve(rel.get(b2.label));
    relative_recombine(&e1, &e2, tol)
}

/// Largest gap in `Σ_θ U_θ† q_θ U_θ = U† q U` and `U₊₁ + U₋₁ = U`.
pub fn decomposition_deviation(
    u: &Operator,
    rel: &RelativeUnitaries,
    branches: (&RelativeBranch, &RelativeBranch),
    absolute: &DescriptorTriple,
) -> f64 {
    let (b1, b2) = branches;
    let mut worst = dist(&(&rel.plus + &rel.minus), u);
    let e1 = b1.evolve(rel.get(b1.label));
    let e2 = b2.evolve(rel.get(b2.label));
    for axis in Axis::ALL {
        let lhs = e1.component(axis) + e2.component(axis);
        let rhs = absolute.component(axis).conjugate_by(u);
        worst = worst.max(dist(&lhs, &rhs));
    }
    worst
}
