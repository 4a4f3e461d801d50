//! Heisenberg-picture descriptors for qubit networks.
//!
//! Each qubit carries a time-dependent triple of Hermitian operators evolving
//! in the Heisenberg picture, while the state `ρ = |ψ₀⟩⟨ψ₀|` stays fixed. The
//! crate builds gates from the current descriptors, checks the locality and
//! separability properties of that description, foliates descriptors into
//! relative branches, and cross-checks everything against a plain
//! state-vector simulator.

pub mod branching;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod network;
pub mod noumenal;
pub mod operator;
pub mod oracle;
pub mod scenarios;

pub use error::{Error, Result};
pub use network::{apply_gate, init_network, GateSpec, Network, PauliCoeffs};
pub use operator::{Axis, Operator, Tolerance, C64};
