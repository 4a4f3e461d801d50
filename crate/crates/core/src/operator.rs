//! Dense complex operators on the 2^n-dimensional space of an n-qubit network.
//!
//! Every descriptor, gate, projector and Heisenberg state in the crate is an
//! [`Operator`]. Qubits are numbered from 1 and qubit 1 is the leftmost tensor
//! factor, i.e. the most significant bit of a computational-basis index.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Absolute tolerance used by every algebraic predicate.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-10;

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps >= 0.0 {
            Ok(Tolerance(eps))
        } else {
            Err(Error::InvalidArg(format!("tolerance must be finite and non-negative, got {eps}")))
        }
    }

    pub fn eps(self) -> f64 {
        self.0
    }

    pub fn accepts(self, deviation: f64) -> bool {
        deviation <= self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(Self::DEFAULT_EPS)
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.0)
    }
}

/// One of the three descriptor components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `(k, sign)` with `sign = ε_ijk` for `i != j`, `None` when `i == j`.
    pub fn levi_civita(i: Axis, j: Axis) -> Option<(Axis, f64)> {
        use Axis::*;
        match (i, j) {
            (X, Y) => Some((Z, 1.0)),
            (Y, Z) => Some((X, 1.0)),
            (Z, X) => Some((Y, 1.0)),
            (Y, X) => Some((Z, -1.0)),
            (Z, Y) => Some((X, -1.0)),
            (X, Z) => Some((Y, -1.0)),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_symbol(s: &str) -> Option<Axis> {
        match s {
            "x" | "X" => Some(Axis::X),
            "y" | "Y" => Some(Axis::Y),
            "z" | "Z" => Some(Axis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl serde::Serialize for Axis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_char(self.symbol())
    }
}

/// Algebraic property tested by [`check_property`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Hermitian,
    Unitary,
    Projector,
}

/// Square complex matrix whose side is a power of two.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: Array2<C64>,
}

impl Operator {
    /// Wraps a matrix, rejecting non-square, non-power-of-two or non-finite input.
    pub fn from_array(m: Array2<C64>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::DimMismatch { left: r, right: c });
        }
        if !r.is_power_of_two() {
            return Err(Error::InvalidArg(format!("dimension {r} is not a power of two")));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArg("operator has non-finite entries".into()));
        }
        Ok(Operator { m })
    }

    pub(crate) fn from_array_unchecked(m: Array2<C64>) -> Self {
        debug_assert!(m.is_square() && m.nrows().is_power_of_two());
        Operator { m }
    }

    pub fn from_fn(dim: usize, f: impl FnMut((usize, usize)) -> C64) -> Result<Self> {
        Self::from_array(Array2::from_shape_fn((dim, dim), f))
    }

    /// Builds an operator from row-major real entries; handy for small literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArg("rows must form a square matrix".into()));
        }
        Self::from_fn(d, |(i, j)| C64::new(rows[i][j], 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Operator::from_array_unchecked(Array2::eye(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Operator::from_array_unchecked(Array2::zeros((dim, dim)))
    }

    /// The 2×2 Pauli matrix for `axis`.
    pub fn pauli(axis: Axis) -> Self {
        let m = match axis {
            Axis::X => [[ZERO, ONE], [ONE, ZERO]],
            Axis::Y => [[ZERO, -I], [I, ZERO]],
            Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        Operator::from_array_unchecked(Array2::from_shape_fn((2, 2), |(i, j)| m[i][j]))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn dyadic(psi: &[C64]) -> Result<Self> {
        Self::from_fn(psi.len(), |(i, j)| psi[i] * psi[j].conj())
    }

    /// `I ⊗ … ⊗ local ⊗ … ⊗ I` with `local` (2×2) in slot `qubit` of `n`.
    pub fn embed(local: &Operator, qubit: usize, n: usize) -> Result<Self> {
        if local.dim() != 2 {
            return Err(Error::DimMismatch { left: local.dim(), right: 2 });
        }
        check_qubit(qubit, n)?;
        let left = Operator::identity(1 << (qubit - 1));
        let right = Operator::identity(1 << (n - qubit));
        Ok(kron(&kron(&left, local), &right))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.m
    }

    pub fn into_array(self) -> Array2<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[[row, col]]
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator::from_array_unchecked(&self.m * c)
    }

    pub fn dagger(&self) -> Operator {
        Operator::from_array_unchecked(self.m.t().mapv(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.m.diag().sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> C64 {
        assert_eq!(self.dim(), other.dim(), "trace_product dimension mismatch");
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.m[[i, k]] * other.m[[k, i]];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `U† · self · U`.
    pub fn conjugate_by(&self, u: &Operator) -> Operator {
        let ud = u.dagger();
        Operator::from_array_unchecked(ud.m.dot(&self.m).dot(&u.m))
    }

    /// `self · v`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimMismatch { left: self.dim(), right: v.len() });
        }
        Ok(self.m.dot(&ndarray::ArrayView1::from(v)).to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::from_array_unchecked(self.m.dot(&rhs.m))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator::from_array_unchecked(&self.m + &rhs.m)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator::from_array_unchecked(&self.m - &rhs.m)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator::from_array_unchecked(-&self.m)
    }
}

impl Mul<&Operator> for C64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

pub(crate) fn check_qubit(qubit: usize, n: usize) -> Result<()> {
    if qubit == 0 || qubit > n {
        Err(Error::InvalidSubsystem(format!("qubit {qubit} outside 1..={n}")))
    } else {
        Ok(())
    }
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (da, db) = (a.dim(), b.dim());
    let mut out = Array2::<C64>::zeros((da * db, da * db));
    for i in 0..da {
        for j in 0..da {
            let aij = a.m[[i, j]];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[[i * db + k, j * db + l]] = aij * b.m[[k, l]];
                }
            }
        }
    }
    Operator::from_array_unchecked(out)
}

pub fn dagger(a: &Operator) -> Operator {
    a.dagger()
}

pub fn trace_full(a: &Operator) -> C64 {
    a.trace()
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    &(a * b) - &(b * a)
}

/// Frobenius norm of `a - b`.
pub fn frob_dist(a: &Operator, b: &Operator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(a.m
        .iter()
        .zip(b.m.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

pub(crate) fn dist(a: &Operator, b: &Operator) -> f64 {
    frob_dist(a, b).expect("operands share a dimension")
}

pub fn hermiticity_deviation(a: &Operator) -> f64 {
    let d = a.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (a.m[[i, j]] - a.m[[j, i]].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Larger of `‖U†U − 1‖` and `‖UU† − 1‖`.
pub fn unitarity_deviation(a: &Operator) -> f64 {
    let id = Operator::identity(a.dim());
    let ad = a.dagger();
    dist(&(&ad * a), &id).max(dist(&(a * &ad), &id))
}

pub fn projector_deviation(a: &Operator) -> f64 {
    hermiticity_deviation(a).max(dist(&(a * a), a))
}

pub fn check_property(a: &Operator, kind: Property, tol: Tolerance) -> bool {
    let deviation = match kind {
        Property::Hermitian => hermiticity_deviation(a),
        Property::Unitary => unitarity_deviation(a),
        Property::Projector => projector_deviation(a),
    };
    tol.accepts(deviation)
}

fn bit_of(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - qubit)) & 1
}

fn validate_subset(subset: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() {
        return Err(Error::InvalidSubsystem(format!("repeated qubit in {subset:?}")));
    }
    for &q in &sorted {
        check_qubit(q, n)?;
    }
    Ok(sorted)
}

/// Traces out every qubit not in `keep`. Kept qubits retain their relative
/// order, so the result is indexed with the lowest-numbered kept qubit leftmost.
pub fn partial_trace(a: &Operator, keep: &[usize], n: usize) -> Result<Operator> {
    if a.dim() != 1 << n {
        return Err(Error::DimMismatch { left: a.dim(), right: 1 << n });
    }
    let keep = validate_subset(keep, n)?;
    let traced: Vec<usize> = (1..=n).filter(|q| !keep.contains(q)).collect();
    let split = |idx: usize| -> (usize, usize) {
        let k = keep.iter().fold(0, |acc, &q| (acc << 1) | bit_of(idx, q, n));
        let t = traced.iter().fold(0, |acc, &q| (acc << 1) | bit_of(idx, q, n));
        (k, t)
    };
    let parts: Vec<(usize, usize)> = (0..a.dim()).map(split).collect();
    let dk = 1 << keep.len();
    let mut out = Array2::<C64>::zeros((dk, dk));
    for (i, &(ki, ti)) in parts.iter().enumerate() {
        for (j, &(kj, tj)) in parts.iter().enumerate() {
            if ti == tj {
                out[[ki, kj]] += a.m[[i, j]];
            }
        }
    }
    Ok(Operator::from_array_unchecked(out))
}

/// Reorders tensor factors: qubit `order[p]` of `a` becomes qubit `p + 1` of the result.
pub fn permute_qubits(a: &Operator, order: &[usize]) -> Result<Operator> {
    let n = a.n_qubits();
    if order.len() != n {
        return Err(Error::InvalidSubsystem(format!("permutation {order:?} is not over {n} qubits")));
    }
    validate_subset(order, n)?;
    let old_index = |new: usize| -> usize {
        order.iter().enumerate().fold(0, |acc, (p, &q)| {
            acc | (bit_of(new, p + 1, n) << (n - q))
        })
    };
    let map: Vec<usize> = (0..a.dim()).map(old_index).collect();
    Ok(Operator::from_array_unchecked(Array2::from_shape_fn(
        (a.dim(), a.dim()),
        |(i, j)| a.m[[map[i], map[j]]],
    )))
}
