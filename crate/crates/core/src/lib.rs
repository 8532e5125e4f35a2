//! Spectrum discovery for qubit Hamiltonians by variational imaginary-time
//! evolution with sequential eigenstate deflation.
//!
//! The crate is organised bottom-up:
//!
//! - [`statevec`]: exact complex statevectors, gates and Pauli strings.
//! - [`hamiltonian`]: Pauli-sum Hamiltonians, text and DIMACS parsing, the
//!   3SAT penalty Hamiltonian and dense materialization.
//! - [`linalg`]: dense Hermitian eigensolvers and degeneracy grouping.
//! - [`ansatz`]: parameterized circuits and their parameter derivatives.
//! - [`varqite`]: the evolution engine (McLachlan system, Tikhonov solve,
//!   Euler stepping, convergence, deflation) plus the gradient-descent
//!   baseline.
//! - [`swaptest`]: circuit-level swap tests and the Hadamard test, used to
//!   check the inner-product shortcuts the engine takes.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod statevec;
pub mod swaptest;
pub mod varqite;

pub use ansatz::{Ansatz, AnsatzFamily, DerivativeMode, DerivativeVector};
pub use error::{Error, Result};
pub use hamiltonian::{Pauli, PauliSum, PauliTerm, SatFormula};
pub use linalg::{Eigen, HermitianMatrix, Level};
pub use num_complex::Complex64;
pub use statevec::{Gate, GateKind, StateVector};
pub use varqite::{
    DeflationEntry, Engine, EngineConfig, EvolutionState, Method, ResetMode, SpectrumReport,
    SpectrumRun, TrajectoryEvent, TrajectoryRecord,
};
