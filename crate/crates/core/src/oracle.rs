//! Schrödinger-picture reference simulator.
//!
//! Gates act on amplitudes with their fixed t = 0 matrices, applied by
//! direct index arithmetic rather than through the operator layer, so the
//! descriptor picture can be checked against an independent route.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::network::{GateSpec, PauliCoeffs};
use crate::operator::{
    commutator, frob_dist, hermiticity_deviation, kron, partial_trace, permute_qubits, projector_deviation,
    unitarity_deviation, Axis, Operator, Tolerance, C64, I, ONE, ZERO,
};

/// Normalized amplitudes of an n-qubit register, qubit 1 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>, tol: Tolerance) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::InvalidState(format!("{} amplitudes is not 2^n for n >= 1", amps.len())));
        }
        let sv = StateVector { n: amps.len().trailing_zeros() as usize, amps };
        let norm = sv.norm();
        if !tol.accepts((norm - 1.0).abs()) {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(sv)
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        StateVector { n, amps }
    }

    /// Product state from one symbol per qubit: `0`, `1`, `+` or `-`.
    pub fn product(spec: &str) -> Result<Self> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![ONE];
        for ch in spec.chars() {
            let local = match ch {
                '0' => [ONE, ZERO],
                '1' => [ZERO, ONE],
                '+' => [C64::new(h, 0.0), C64::new(h, 0.0)],
                '-' => [C64::new(h, 0.0), C64::new(-h, 0.0)],
                other => return Err(Error::InvalidState(format!("unknown qubit state '{other}'"))),
            };
            amps = amps.iter().flat_map(|&a| [a * local[0], a * local[1]]).collect();
        }
        if amps.len() < 2 {
            return Err(Error::InvalidState("empty product state".into()));
        }
        Ok(StateVector { n: spec.chars().count(), amps })
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        StateVector { n: 2, amps: vec![h, ZERO, ZERO, h] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n - qubit)
    }

    fn apply_local(&mut self, qubit: usize, m: [[C64; 2]; 2]) {
        let mask = self.mask(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cm, tm) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn apply_raw(&mut self, m: &Operator, support: &[usize]) {
        let masks: Vec<usize> = support.iter().map(|&q| self.mask(q)).collect();
        let all: usize = masks.iter().sum();
        let k = support.len();
        let offset = |local: usize| -> usize {
            masks.iter().enumerate().filter(|(p, _)| (local >> (k - 1 - p)) & 1 == 1).map(|(_, m)| m).sum()
        };
        let offsets: Vec<usize> = (0..1 << k).map(offset).collect();
        let mut buf = vec![ZERO; 1 << k];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                buf[l] = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                self.amps[base + off] = (0..1 << k).map(|c| m.get(r, c) * buf[c]).sum();
            }
        }
    }

    fn apply(&mut self, gate: &GateSpec, tol: Tolerance) -> Result<()> {
        gate.validate(self.n).map_err(|e| match e {
            Error::InvalidSubsystem(_) => Error::DimMismatch {
                left: gate.support().into_iter().max().unwrap_or(0),
                right: self.n,
            },
            other => other,
        })?;
        match gate {
            GateSpec::Single { qubit, coeffs } => {
                let m = single_matrix(coeffs);
                let dev = unitarity_deviation(&Operator::from_fn(2, |(i, j)| m[i][j])?);
                if !tol.accepts(dev) {
                    return Err(Error::NotUnitary { deviation: dev });
                }
                self.apply_local(*qubit, m);
            }
            GateSpec::Cnot { control, target } => self.apply_cnot(*control, *target),
            GateSpec::Raw { unitary, support } => {
                let dev = unitarity_deviation(unitary);
                if !tol.accepts(dev) {
                    return Err(Error::NotUnitary { deviation: dev });
                }
                self.apply_raw(unitary, support);
            }
        }
        Ok(())
    }
}

/// `c0·1 + cx·σx + cy·σy + cz·σz` written out entry by entry.
fn single_matrix(c: &PauliCoeffs) -> [[C64; 2]; 2] {
    [[c.c0 + c.cz, c.cx - I * c.cy], [c.cx + I * c.cy, c.c0 - c.cz]]
}

/// `ψ_out = U_k ⋯ U_1 ψ₀` with each gate's fixed t = 0 matrix.
pub fn sv_run(psi0: &StateVector, gates: &[GateSpec], tol: Tolerance) -> Result<StateVector> {
    let mut psi = psi0.clone();
    for g in gates {
        psi.apply(g, tol)?;
    }
    Ok(psi)
}

/// Applies a single gate, for step-by-step co-simulation.
pub fn sv_step(psi: &StateVector, gate: &GateSpec, tol: Tolerance) -> Result<StateVector> {
    sv_run(psi, std::slice::from_ref(gate), tol)
}

fn apply_operator(obs: &Operator, psi: &StateVector) -> Result<Vec<C64>> {
    if obs.dim() != psi.amps.len() {
        return Err(Error::DimMismatch { left: obs.dim(), right: psi.amps.len() });
    }
    let d = obs.dim();
    Ok((0..d).map(|i| (0..d).map(|j| obs.get(i, j) * psi.amps[j]).sum()).collect())
}

/// `⟨ψ|O|ψ⟩` for Hermitian `O`.
pub fn sv_expectation(psi: &StateVector, obs: &Operator, tol: Tolerance) -> Result<f64> {
    let dev = hermiticity_deviation(obs);
    if !tol.accepts(dev) {
        return Err(Error::NotObservable { deviation: dev });
    }
    let o_psi = apply_operator(obs, psi)?;
    let v: C64 = psi.amps.iter().zip(&o_psi).map(|(a, b)| a.conj() * b).sum();
    Ok(v.re)
}

/// `⟨ψ| σ_{a₁} ⊗ σ_{a₂} ⊗ … |ψ⟩` for a Pauli string on distinct qubits,
/// computed on amplitudes without building any matrix.
pub fn pauli_expectation(psi: &StateVector, factors: &[(usize, Axis)]) -> f64 {
    let mut phi = psi.amps.clone();
    for &(q, axis) in factors {
        let mask = psi.mask(q);
        let prev = phi.clone();
        for (j, out) in phi.iter_mut().enumerate() {
            let bit_set = j & mask != 0;
            *out = match axis {
                Axis::X => prev[j ^ mask],
                Axis::Y => (if bit_set { I } else { -I }) * prev[j ^ mask],
                Axis::Z => (if bit_set { -ONE } else { ONE }) * prev[j],
            };
        }
    }
    psi.amps.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum::<C64>().re
}

/// `⟨ψ|Π O Π|ψ⟩ / ⟨ψ|Π|ψ⟩`: the expectation of `O` in the relative state picked out by `Π`.
pub fn conditional_expectation(psi: &StateVector, proj: &Operator, obs: &Operator, tol: Tolerance) -> Result<f64> {
    let dev = projector_deviation(proj);
    if !tol.accepts(dev) {
        return Err(Error::InvalidArg(format!("not a projector (deviation {dev:.3e})")));
    }
    let norm = commutator(proj, obs).frobenius_norm();
    if !tol.accepts(norm) {
        return Err(Error::NonCommutingFoliation { norm });
    }
    let weight = sv_expectation(psi, proj, tol)?;
    if weight <= tol.eps() {
        return Err(Error::ZeroWeightBranch { weight });
    }
    let sandwiched = &(proj * obs) * proj;
    Ok(sv_expectation(psi, &sandwiched, tol)? / weight)
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: Operator,
}

impl DensityMatrix {
    pub fn new(rho: Operator, tol: Tolerance) -> Result<Self> {
        let herm = hermiticity_deviation(&rho);
        if !tol.accepts(herm) {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = rho.trace();
        if !tol.accepts((tr - ONE).norm()) {
            return Err(Error::InvalidState(format!("density matrix has trace {tr}")));
        }
        let min_eig = min_eigenvalue(&rho);
        if min_eig < -tol.eps() {
            return Err(Error::InvalidState(format!("density matrix has eigenvalue {min_eig:.3e}")));
        }
        Ok(DensityMatrix { rho })
    }

    pub fn pure(psi: &StateVector) -> Self {
        DensityMatrix { rho: Operator::dyadic(&psi.amps).expect("normalized vector") }
    }

    /// Reduced state of `keep` (traced over the rest).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.rho.n_qubits();
        Ok(DensityMatrix { rho: partial_trace(&self.rho, keep, n)? })
    }

    pub fn operator(&self) -> &Operator {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        self.rho.trace_product(&self.rho).re
    }
}

fn min_eigenvalue(rho: &Operator) -> f64 {
    let d = rho.dim();
    let m = DMatrix::from_fn(d, d, |i, j| rho.get(i, j));
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `‖ρ_A ⊗ ρ_B − ρ_AB‖_F` across the cut `A | rest`.
pub fn separability_gap(psi: &StateVector, cut: &[usize]) -> Result<f64> {
    let n = psi.n;
    let mut a = cut.to_vec();
    a.sort_unstable();
    a.dedup();
    if a.len() != cut.len() || a.iter().any(|&q| q == 0 || q > n) {
        return Err(Error::InvalidArg(format!("{cut:?} is not a subset of 1..={n}")));
    }
    let b: Vec<usize> = (1..=n).filter(|q| !a.contains(q)).collect();
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArg(format!("{cut:?} does not split {n} qubits into two parts")));
    }
    let rho = DensityMatrix::pure(psi);
    let rho_a = rho.reduced(&a)?;
    let rho_b = rho.reduced(&b)?;
    let order: Vec<usize> = a.iter().chain(&b).copied().collect();
    let rho_ab = permute_qubits(&rho.rho, &order)?;
    frob_dist(&kron(&rho_a.rho, &rho_b.rho), &rho_ab)
}
