//! Exact simulation of overlap and Hadamard-test circuits.
//!
//! Two-register layouts put the first state on the low `L` qubits and the
//! second on the next `L`; an ancilla, when present, sits above both.

use num_complex::Complex64;

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::statevec::{inner, Gate, StateVector};

const MINUS_BRANCH_TOL: f64 = 1e-12;
const INVARIANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SwapTestOutcome {
    /// `Tr(rho sigma)`, clamped to `[0, 1]`.
    pub overlap_estimate: f64,
    /// For each qubit pair `n`, probabilities of reading `(psi_n, phi_n)` as
    /// `00, 01, 10, 11` after the circuit.
    pub per_qubit_distribution: Option<Vec<[f64; 4]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConventionalSwap {
    pub p_ancilla_0: f64,
    pub register_plus: StateVector,
    /// Absent when that branch has (numerically) zero weight.
    pub register_minus: Option<StateVector>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub is_invariant: bool,
    /// `<S_tot>` on the register.
    pub value: f64,
    /// `<S_tot^2> - <S_tot>^2`.
    pub deviation: f64,
}

fn check_pair(psi: &StateVector, phi: &StateVector) -> Result<usize> {
    if psi.num_qubits() != phi.num_qubits() {
        return Err(Error::validation(format!(
            "swap test registers differ: {} vs {} qubits",
            psi.num_qubits(),
            phi.num_qubits()
        )));
    }
    Ok(psi.num_qubits())
}

/// Constant-depth destructive swap test: transversal CNOTs from `psi` into
/// `phi`, Hadamards on `psi`, then the exact expectation of the product of
/// per-pair observables that are `-1` on `11` and `+1` otherwise.
pub fn shallow_swap_overlap(psi: &StateVector, phi: &StateVector) -> Result<SwapTestOutcome> {
    let l = check_pair(psi, phi)?;
    let mut joint = psi.tensor(phi)?;
    for n in 0..l {
        joint.apply_gate(&Gate::cnot(n, l + n), None)?;
    }
    for n in 0..l {
        joint.apply_gate(&Gate::h(n), None)?;
    }
    let low = (1usize << l) - 1;
    let mut total = 0.0;
    let mut table = vec![[0.0; 4]; l];
    for (b, a) in joint.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        let (x, y) = (b & low, b >> l);
        total += if (x & y).count_ones() % 2 == 0 { p } else { -p };
        for (n, row) in table.iter_mut().enumerate() {
            row[((x >> n) & 1) << 1 | ((y >> n) & 1)] += p;
        }
    }
    Ok(SwapTestOutcome {
        overlap_estimate: total.clamp(0.0, 1.0),
        per_qubit_distribution: Some(table),
    })
}

/// Ancilla-controlled SWAP between the two registers, sandwiched by
/// Hadamards on the ancilla. Returns the ancilla statistics and the
/// normalized register state for each outcome.
pub fn conventional_swap(psi: &StateVector, phi: &StateVector) -> Result<ConventionalSwap> {
    let l = check_pair(psi, phi)?;
    let anc = 2 * l;
    let mut s = psi.tensor(phi)?.tensor(&StateVector::init_zero(1)?)?;
    s.apply_gate(&Gate::h(anc), None)?;
    for n in 0..l {
        let (a, b) = (n, l + n);
        s.apply_gate(&Gate::cnot(b, a), None)?;
        s.apply_gate_with_controls(&Gate::cnot(a, b), None, 1 << anc)?;
        s.apply_gate(&Gate::cnot(b, a), None)?;
    }
    s.apply_gate(&Gate::h(anc), None)?;

    let half = 1usize << anc;
    let amps = s.amplitudes();
    let (zero, one) = amps.split_at(half);
    let p0: f64 = zero.iter().map(|a| a.norm_sqr()).sum();
    let p1: f64 = one.iter().map(|a| a.norm_sqr()).sum();
    let branch = |part: &[Complex64], p: f64| -> Result<StateVector> {
        let scale = 1.0 / p.sqrt();
        StateVector::from_amplitudes(part.iter().map(|a| a * scale).collect())
    };
    Ok(ConventionalSwap {
        p_ancilla_0: p0,
        register_plus: branch(zero, p0)?,
        register_minus: if p1.sqrt() < MINUS_BRANCH_TOL {
            None
        } else {
            Some(branch(one, p1)?)
        },
    })
}

/// Mean and variance of `S (x) I + I (x) S` on a two-register state.
pub fn symmetry_check(register: &StateVector, s: &PauliSum) -> Result<SymmetryCheck> {
    let l = s.num_qubits();
    if register.num_qubits() != 2 * l {
        return Err(Error::validation(format!(
            "register has {} qubits, symmetry acts on 2 x {l}",
            register.num_qubits()
        )));
    }
    let total = s.embed(2 * l, 0)?.plus(&s.embed(2 * l, l)?)?;
    let applied = total.apply(register)?;
    let value = inner(register.amplitudes(), applied.amplitudes()).re;
    let deviation = (applied.norm_sqr() - value * value).max(0.0);
    Ok(SymmetryCheck {
        is_invariant: deviation < INVARIANCE_TOL,
        value,
        deviation,
    })
}

/// Ancilla `<Z>` of the Hadamard test for `V = ansatz(theta)`, with the
/// ancilla prepared as `(|0> + e^{i phase}|1>)/sqrt 2`. Equals
/// `Re(e^{i phase} <0|V|0>)`.
pub fn hadamard_test(ansatz: &Ansatz, theta: &[f64], phase: f64) -> Result<f64> {
    if theta.len() != ansatz.num_params() {
        return Err(Error::validation(format!(
            "{} parameters supplied, circuit has {}",
            theta.len(),
            ansatz.num_params()
        )));
    }
    let n = ansatz.num_qubits();
    let mut s = StateVector::init_zero(n + 1)?;
    s.apply_gate(&Gate::h(n), None)?;
    // RZ differs from diag(1, e^{i phase}) by a global phase only.
    s.apply_gate(&Gate::rz(n, 0), Some(phase))?;
    for g in ansatz.gates() {
        s.apply_gate_with_controls(g, g.param.map(|p| theta[p]), 1 << n)?;
    }
    s.apply_gate(&Gate::h(n), None)?;
    Ok(1.0 - 2.0 * s.probability_one(n))
}
