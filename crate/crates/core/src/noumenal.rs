//! Noumenal states of qubit subsets and the local-realism axioms on them.
//!
//! A noumenal state is a set of descriptor triples together with the shared
//! Heisenberg state. Projection `π_S` keeps the triples of `S`; the product
//! `⊙` takes the union of two compatible states; `U ⋆ N` conjugates every
//! triple of `N` by `U`. Separability is `π_A(N) ⊙ π_B(N) = N` and the
//! absence of action at a distance is `(V×W) ⋆ (N_A ⊙ N_B) = (V ⋆ N_A) ⊙ (W ⋆ N_B)`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::network::{apply_gate, DescriptorTriple, GateSpec, HeisenbergState, Network, PhenomenalState};
use crate::operator::{commutator, dist, unitarity_deviation, Axis, Operator, Tolerance};

#[derive(Clone, Debug)]
pub struct NoumenalState {
    triples: Vec<DescriptorTriple>,
    rho: Arc<HeisenbergState>,
}

impl NoumenalState {
    /// The state of the whole network.
    pub fn of_network(net: &Network) -> Self {
        NoumenalState {
            triples: net.triples().to_vec(),
            rho: Arc::clone(net.heisenberg_state()),
        }
    }

    /// Builds a state from triples of distinct qubits; they are stored in qubit order.
    pub fn new(mut triples: Vec<DescriptorTriple>, rho: Arc<HeisenbergState>) -> Result<Self> {
        triples.sort_by_key(DescriptorTriple::qubit);
        if triples.windows(2).any(|w| w[0].qubit() == w[1].qubit()) {
            return Err(Error::InvalidSubsystem("repeated qubit in noumenal state".into()));
        }
        let dim = rho.rho().dim();
        if let Some(t) = triples.iter().find(|t| t.component(Axis::X).dim() != dim) {
            return Err(Error::DimMismatch { left: t.component(Axis::X).dim(), right: dim });
        }
        Ok(NoumenalState { triples, rho })
    }

    pub fn subset(&self) -> Vec<usize> {
        self.triples.iter().map(DescriptorTriple::qubit).collect()
    }

    pub fn triples(&self) -> &[DescriptorTriple] {
        &self.triples
    }

    pub fn triple(&self, qubit: usize) -> Option<&DescriptorTriple> {
        self.triples.iter().find(|t| t.qubit() == qubit)
    }

    pub fn heisenberg_state(&self) -> &Arc<HeisenbergState> {
        &self.rho
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Largest component-wise distance to `other`, or `None` if the two
    /// states describe different qubits.
    pub fn max_dist(&self, other: &NoumenalState) -> Option<f64> {
        if self.subset() != other.subset() {
            return None;
        }
        let rho_dev = dist(self.rho.rho(), other.rho.rho());
        Some(
            self.triples
                .iter()
                .zip(&other.triples)
                .map(|(a, b)| a.max_dist(b))
                .fold(rho_dev, f64::max),
        )
    }

    /// The locally observable content of one qubit: its Bloch vector.
    pub fn phenomenal(&self, qubit: usize) -> Result<PhenomenalState> {
        let triple = self
            .triple(qubit)
            .ok_or_else(|| Error::InvalidSubsystem(format!("qubit {qubit} not in {:?}", self.subset())))?;
        let bloch = Axis::ALL.map(|a| self.rho.trace_with(triple.component(a)).re);
        Ok(PhenomenalState { bloch })
    }

    /// Worst Pauli-algebra deviation within triples and worst commutator norm between them.
    pub fn algebra_deviation(&self) -> (f64, f64) {
        let pauli = self.triples.iter().map(DescriptorTriple::pauli_deviation).fold(0.0, f64::max);
        let mut comm: f64 = 0.0;
        for (i, a) in self.triples.iter().enumerate() {
            for b in &self.triples[i + 1..] {
                comm = comm.max(cross_commutation(a, b));
            }
        }
        (pauli, comm)
    }
}

fn cross_commutation(a: &DescriptorTriple, b: &DescriptorTriple) -> f64 {
    let mut worst: f64 = 0.0;
    for qa in a.components() {
        for qb in b.components() {
            worst = worst.max(commutator(qa, qb).frobenius_norm());
        }
    }
    worst
}

/// Outcome of the compatibility test that gates [`noumenal_product`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityWitness {
    pub ok: bool,
    pub reason: String,
}

impl CompatibilityWitness {
    fn pass() -> Self {
        CompatibilityWitness { ok: true, reason: String::new() }
    }

    fn fail(reason: String) -> Self {
        CompatibilityWitness { ok: false, reason }
    }
}

/// `π_S`: keeps the triples of `subset`.
pub fn project_noumenal(state: &NoumenalState, subset: &[usize]) -> Result<NoumenalState> {
    let wanted: BTreeSet<usize> = subset.iter().copied().collect();
    if wanted.len() != subset.len() {
        return Err(Error::InvalidSubsystem(format!("repeated qubit in {subset:?}")));
    }
    let mut triples = Vec::with_capacity(wanted.len());
    for q in wanted {
        let t = state.triple(q).ok_or_else(|| {
            Error::InvalidSubsystem(format!("qubit {q} not in source subset {:?}", state.subset()))
        })?;
        triples.push(t.clone());
    }
    Ok(NoumenalState { triples, rho: Arc::clone(&state.rho) })
}

/// Decides whether two states can be joined: disjoint qubits, the same
/// Heisenberg state, and mutually commuting descriptors.
pub fn compatibility(na: &NoumenalState, nb: &NoumenalState, tol: Tolerance) -> CompatibilityWitness {
    let sa: BTreeSet<usize> = na.subset().into_iter().collect();
    let overlap: Vec<usize> = nb.subset().into_iter().filter(|q| sa.contains(q)).collect();
    if !overlap.is_empty() {
        return CompatibilityWitness::fail(format!("subsets overlap on {overlap:?}"));
    }
    if !Arc::ptr_eq(&na.rho, &nb.rho) {
        let d = dist(na.rho.rho(), nb.rho.rho());
        if !tol.accepts(d) {
            return CompatibilityWitness::fail(format!("Heisenberg states differ by {d:.3e}"));
        }
    }
    for a in &na.triples {
        for b in &nb.triples {
            let c = cross_commutation(a, b);
            if !tol.accepts(c) {
                return CompatibilityWitness::fail(format!(
                    "descriptors of qubits {} and {} fail to commute ({c:.3e})",
                    a.qubit(),
                    b.qubit()
                ));
            }
        }
    }
    CompatibilityWitness::pass()
}

/// `⊙`: joins two compatible states.
pub fn noumenal_product(na: &NoumenalState, nb: &NoumenalState, tol: Tolerance) -> Result<NoumenalState> {
    let w = compatibility(na, nb, tol);
    if !w.ok {
        return Err(Error::Incompatible(w.reason));
    }
    let mut triples: Vec<DescriptorTriple> = na.triples.iter().chain(&nb.triples).cloned().collect();
    triples.sort_by_key(DescriptorTriple::qubit);
    Ok(NoumenalState { triples, rho: Arc::clone(&na.rho) })
}

/// `U ⋆ N`: conjugates every triple of `N` by `U`.
pub fn apply_to_noumenal(u: &Operator, ns: &NoumenalState, tol: Tolerance) -> Result<NoumenalState> {
    let dev = unitarity_deviation(u);
    if !tol.accepts(dev) {
        return Err(Error::NotUnitary { deviation: dev });
    }
    if u.dim() != ns.rho.rho().dim() {
        return Err(Error::DimMismatch { left: u.dim(), right: ns.rho.rho().dim() });
    }
    Ok(NoumenalState {
        triples: ns.triples.iter().map(|t| t.conjugate_by(u)).collect(),
        rho: Arc::clone(&ns.rho),
    })
}

/// `V × W` for operations on disjoint systems: the matrix product, provided the two commute.
pub fn product_of_operations(ua: &Operator, ub: &Operator, tol: Tolerance) -> Result<Operator> {
    for u in [ua, ub] {
        let dev = unitarity_deviation(u);
        if !tol.accepts(dev) {
            return Err(Error::NotUnitary { deviation: dev });
        }
    }
    let norm = commutator(ua, ub).frobenius_norm();
    if !tol.accepts(norm) {
        return Err(Error::NonCommutingSupports { norm });
    }
    Ok(ua * ub)
}

/// Largest component-wise gap between `(V×W) ⋆ (N_A ⊙ N_B)` and
/// `(V ⋆ N_A) ⊙ (W ⋆ N_B)`.
///
/// `V` must commute with the descriptors of `N_B` and `W` with those of `N_A`.
pub fn product_law_deviation(
    v: &Operator,
    na: &NoumenalState,
    w: &Operator,
    nb: &NoumenalState,
    tol: Tolerance,
) -> Result<f64> {
    for (op, other) in [(v, nb), (w, na)] {
        for t in other.triples() {
            for q in t.components() {
                let norm = commutator(op, q).frobenius_norm();
                if !tol.accepts(norm) {
                    return Err(Error::NonCommutingSupports { norm });
                }
            }
        }
    }
    let joint = product_of_operations(v, w, tol)?;
    let lhs = apply_to_noumenal(&joint, &noumenal_product(na, nb, tol)?, tol)?;
    let rhs = noumenal_product(&apply_to_noumenal(v, na, tol)?, &apply_to_noumenal(w, nb, tol)?, tol)?;
    Ok(lhs.max_dist(&rhs).expect("both sides cover the same qubits"))
}

/// Applies `spec` and reports how far the descriptors of `remote` moved.
pub fn verify_no_action(net: &Network, spec: &GateSpec, remote: &[usize]) -> Result<f64> {
    let support = spec.support();
    if let Some(q) = remote.iter().find(|q| support.contains(q)) {
        return Err(Error::InvalidArg(format!("remote qubit {q} is in the gate support {support:?}")));
    }
    let after = apply_gate(net, spec)?;
    let mut worst: f64 = 0.0;
    for &q in remote {
        worst = worst.max(after.triple(q)?.max_dist(net.triple(q)?));
    }
    Ok(worst)
}

fn check_partition(partition: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = BTreeSet::new();
    for block in partition {
        for &q in block {
            if q == 0 || q > n {
                return Err(Error::InvalidArg(format!("qubit {q} outside 1..={n}")));
            }
            if !seen.insert(q) {
                return Err(Error::InvalidArg(format!("qubit {q} appears in two blocks")));
            }
        }
    }
    if seen.len() != n {
        return Err(Error::InvalidArg(format!("partition {partition:?} does not cover 1..={n}")));
    }
    Ok(())
}

/// Folds `⊙` over the projections onto each block and returns the largest
/// component-wise distance from the full state.
pub fn separability_deviation(net: &Network, partition: &[Vec<usize>]) -> Result<f64> {
    check_partition(partition, net.n())?;
    let full = NoumenalState::of_network(net);
    let tol = net.tol();
    let mut acc: Option<NoumenalState> = None;
    for block in partition {
        let part = project_noumenal(&full, block)?;
        acc = Some(match acc {
            None => part,
            Some(prev) => noumenal_product(&prev, &part, tol)?,
        });
    }
    let joined = acc.expect("non-empty partition of n >= 1 qubits");
    Ok(joined.max_dist(&full).expect("partition covers every qubit"))
}

/// `true` iff projecting onto the blocks and recombining reproduces the network state.
pub fn verify_separability(net: &Network, partition: &[Vec<usize>]) -> Result<bool> {
    match separability_deviation(net, partition) {
        Ok(d) => Ok(net.tol().accepts(d)),
        Err(Error::Incompatible(_)) => Ok(false),
        Err(e) => Err(e),
    }
}
