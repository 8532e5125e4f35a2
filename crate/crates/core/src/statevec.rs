//! Exact statevector simulation.
//!
//! Qubit 0 is the least-significant bit of the amplitude index, so the basis
//! state `|q_{n-1} ... q_1 q_0>` lives at index `sum_k q_k 2^k`. Rotations use
//! the `exp(-i theta G / 2)` convention for `G` in {X, Y, Z}.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register this crate will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Bit masks describing a Pauli string: `P|b> = i^{n_y} (-1)^{|b & z|} |b ^ x>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PauliMasks {
    pub x: usize,
    pub z: usize,
    pub phase: Complex64,
}

impl PauliMasks {
    pub fn new(ops: &[(usize, Pauli)]) -> Self {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut n_y = 0u32;
        for &(q, p) in ops {
            let bit = 1usize << q;
            match p {
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    n_y += 1;
                }
            }
        }
        let phase = match n_y % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        PauliMasks { x, z, phase }
    }

    /// Coefficient of `|b ^ x>` in `P|b>`.
    #[inline]
    pub fn sign(&self, b: usize) -> Complex64 {
        if (b & self.z).count_ones() % 2 == 1 {
            -self.phase
        } else {
            self.phase
        }
    }
}

/// Checks qubit indices are in range and pairwise distinct.
pub(crate) fn check_pauli_ops(ops: &[(usize, Pauli)], num_qubits: usize) -> Result<()> {
    let mut seen = 0usize;
    for &(q, _) in ops {
        if q >= num_qubits {
            return Err(Error::Index {
                index: q,
                num_qubits,
            });
        }
        if seen & (1 << q) != 0 {
            return Err(Error::validation(format!(
                "qubit {q} appears twice in Pauli string"
            )));
        }
        seen |= 1 << q;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    /// Controlled RY; qubits are `[control, target]`.
    Cry,
    /// Controlled RZ; qubits are `[control, target]`.
    Crz,
    Cz,
    /// Qubits are `[control, target]`.
    Cnot,
    H,
    X,
}

impl GateKind {
    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cry | GateKind::Crz
        )
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::H | GateKind::X => 1,
            GateKind::Cry | GateKind::Crz | GateKind::Cz | GateKind::Cnot => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cry => "CRY",
            GateKind::Crz => "CRZ",
            GateKind::Cz => "CZ",
            GateKind::Cnot => "CNOT",
            GateKind::H => "H",
            GateKind::X => "X",
        }
    }

    pub fn from_name(s: &str) -> Option<GateKind> {
        Some(match s {
            "RX" => GateKind::Rx,
            "RY" => GateKind::Ry,
            "RZ" => GateKind::Rz,
            "CRY" => GateKind::Cry,
            "CRZ" => GateKind::Crz,
            "CZ" => GateKind::Cz,
            "CNOT" | "CX" => GateKind::Cnot,
            "H" => GateKind::H,
            "X" => GateKind::X,
            _ => return None,
        })
    }

    /// Pauli generator of a rotation kind.
    pub fn generator(self) -> Option<Pauli> {
        match self {
            GateKind::Rx => Some(Pauli::X),
            GateKind::Ry | GateKind::Cry => Some(Pauli::Y),
            GateKind::Rz | GateKind::Crz => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// One gate of a circuit. For two-qubit kinds `qubits[0]` is the control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    /// Index into the circuit's parameter vector, for rotation kinds only.
    pub param: Option<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, param: Option<usize>) -> Self {
        Gate {
            kind,
            qubits,
            param,
        }
    }

    pub fn rx(q: usize, p: usize) -> Self {
        Gate::new(GateKind::Rx, vec![q], Some(p))
    }
    pub fn ry(q: usize, p: usize) -> Self {
        Gate::new(GateKind::Ry, vec![q], Some(p))
    }
    pub fn rz(q: usize, p: usize) -> Self {
        Gate::new(GateKind::Rz, vec![q], Some(p))
    }
    pub fn cry(control: usize, target: usize, p: usize) -> Self {
        Gate::new(GateKind::Cry, vec![control, target], Some(p))
    }
    pub fn crz(control: usize, target: usize, p: usize) -> Self {
        Gate::new(GateKind::Crz, vec![control, target], Some(p))
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Cz, vec![a, b], None)
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, vec![control, target], None)
    }
    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![q], None)
    }
    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![q], None)
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::validation(format!(
                "{} acts on {} qubit(s), got {}",
                self.kind.name(),
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        for &q in &self.qubits {
            if q >= num_qubits {
                return Err(Error::Index {
                    index: q,
                    num_qubits,
                });
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::validation(format!(
                "{} control and target coincide (qubit {})",
                self.kind.name(),
                self.qubits[0]
            )));
        }
        match (self.kind.is_parameterized(), self.param) {
            (true, None) => Err(Error::validation(format!(
                "{} requires a parameter index",
                self.kind.name()
            ))),
            (false, Some(_)) => Err(Error::validation(format!(
                "{} takes no parameter",
                self.kind.name()
            ))),
            _ => Ok(()),
        }
    }

    fn target(&self) -> usize {
        *self.qubits.last().expect("gate has qubits")
    }

    fn control_mask(&self) -> usize {
        match self.kind {
            GateKind::Cry | GateKind::Crz | GateKind::Cz | GateKind::Cnot => 1 << self.qubits[0],
            _ => 0,
        }
    }

    /// The 2x2 block acting on the target when all control bits are set.
    fn matrix(&self, theta: f64) -> Mat2 {
        let (s, c) = (theta / 2.0).sin_cos();
        match self.kind {
            GateKind::Rx => [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ],
            GateKind::Ry | GateKind::Cry => [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
            GateKind::Rz | GateKind::Crz => {
                [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]]
            }
            GateKind::Cz => [[ONE, ZERO], [ZERO, -ONE]],
            GateKind::Cnot | GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::H => {
                let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[r, r], [r, -r]]
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        for q in &self.qubits {
            write!(f, " q{q}")?;
        }
        if let Some(p) = self.param {
            write!(f, " p{p}")?;
        }
        Ok(())
    }
}

/// Pure state of `num_qubits` qubits stored as `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn init_zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "num_qubits",
                value: num_qubits,
                limit: MAX_QUBITS,
            });
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::validation(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the length must be a power of two `>= 2`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::validation(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "num_qubits",
                value: num_qubits,
                limit: MAX_QUBITS,
            });
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Numeric(format!(
                "cannot normalize state of norm {n}"
            )));
        }
        let inv = 1.0 / n;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    /// `<self|other>`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::validation(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn apply_gate(&mut self, gate: &Gate, theta: Option<f64>) -> Result<()> {
        self.apply_gate_with_controls(gate, theta, 0)
    }

    /// Applies `gate` only on the subspace where every bit of `extra_controls`
    /// is set. Used by the Hadamard test to build controlled-V.
    pub fn apply_gate_with_controls(
        &mut self,
        gate: &Gate,
        theta: Option<f64>,
        extra_controls: usize,
    ) -> Result<()> {
        gate.validate(self.num_qubits)?;
        if extra_controls >> self.num_qubits != 0 {
            return Err(Error::validation("control mask exceeds register"));
        }
        let theta = match (gate.kind.is_parameterized(), theta) {
            (true, Some(t)) => t,
            (false, None) => 0.0,
            (true, None) => {
                return Err(Error::validation(format!(
                    "{} applied without an angle",
                    gate.kind.name()
                )))
            }
            (false, Some(_)) => {
                return Err(Error::validation(format!(
                    "{} applied with an angle",
                    gate.kind.name()
                )))
            }
        };
        let target = gate.target();
        let mask = gate.control_mask() | extra_controls;
        if mask & (1 << target) != 0 {
            return Err(Error::validation("control overlaps gate target"));
        }
        apply_1q(&mut self.amplitudes, target, &gate.matrix(theta), mask);
        Ok(())
    }

    /// Replaces the state by `G|state>` where `G` is the rotation generator of
    /// `gate` (for controlled rotations, `|1><1|_c (x) P_t`). No `-i/2` factor.
    pub fn apply_generator(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let pauli = gate.kind.generator().ok_or_else(|| {
            Error::Unsupported(format!("{} has no rotation generator", gate.kind.name()))
        })?;
        let target = gate.target();
        let ctrl = gate.control_mask();
        let masks = PauliMasks::new(&[(target, pauli)]);
        let amps = &mut self.amplitudes;
        if ctrl != 0 {
            for (i, a) in amps.iter_mut().enumerate() {
                if i & ctrl != ctrl {
                    *a = ZERO;
                }
            }
        }
        apply_masks_in_place(amps, &masks);
        Ok(())
    }

    pub fn apply_pauli_string(&self, ops: &[(usize, Pauli)]) -> Result<StateVector> {
        check_pauli_ops(ops, self.num_qubits)?;
        let mut out = self.clone();
        apply_masks_in_place(&mut out.amplitudes, &PauliMasks::new(ops));
        Ok(out)
    }

    /// Probability that qubit `q` reads 1.
    pub fn probability_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `|a> (x) |b>` with `self` on the low qubits and `high` on the high qubits.
    pub fn tensor(&self, high: &StateVector) -> Result<StateVector> {
        let n = self.num_qubits + high.num_qubits;
        if n > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "num_qubits",
                value: n,
                limit: MAX_QUBITS,
            });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for h in &high.amplitudes {
            amps.extend(self.amplitudes.iter().map(|l| l * h));
        }
        StateVector::from_amplitudes(amps)
    }
}

/// `sum_k conj(a_k) b_k`.
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn apply_masks_in_place(amps: &mut [Complex64], m: &PauliMasks) {
    if m.x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= m.sign(b);
        }
        return;
    }
    // Pairs (b, b ^ x) with b the member whose highest x-bit is clear.
    let hi = 1usize << (usize::BITS - 1 - m.x.leading_zeros());
    for b in 0..amps.len() {
        if b & hi != 0 {
            continue;
        }
        let c = b ^ m.x;
        let (ab, ac) = (amps[b], amps[c]);
        amps[c] = m.sign(b) * ab;
        amps[b] = m.sign(c) * ac;
    }
}

fn apply_1q(amps: &mut [Complex64], target: usize, u: &Mat2, ctrl_mask: usize) {
    let stride = 1usize << target;
    let len = amps.len();
    let mut base = 0;
    while base < len {
        for i in base..base + stride {
            if i & ctrl_mask != ctrl_mask {
                continue;
            }
            let j = i | stride;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = u[0][0] * a0 + u[0][1] * a1;
            amps[j] = u[1][0] * a0 + u[1][1] * a1;
        }
        base += 2 * stride;
    }
}
