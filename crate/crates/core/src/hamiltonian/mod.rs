//! Pauli-sum Hamiltonians.
//!
//! Text format, one item per line:
//!
//! ```text
//! # comment
//! qubits 3
//! -0.5
//! 0.25 X0 Y1
//! 1.0 Z0 Z2
//! ```
//!
//! The header must come first. Each term line is a real coefficient followed
//! by Pauli factors `<X|Y|Z><qubit>` with strictly increasing qubit indices;
//! a bare coefficient is the identity term. Terms on the same Pauli string are
//! merged by adding coefficients.

mod sat;

pub use sat::{generate_unique_3sat, Literal, SatFormula};

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, MAX_DENSE_DIM};
pub use crate::statevec::Pauli;
use crate::statevec::{check_pauli_ops, inner, PauliMasks, StateVector, MAX_QUBITS};

/// Largest register [`PauliSum::materialize_dense`] accepts.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Tolerance on the imaginary part of `<psi|H|psi>`.
const HERMITIAN_IMAG_TOL: f64 = 1e-10;

/// `coefficient * prod_i sigma_i`, with qubits strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, mut ops: Vec<(usize, Pauli)>) -> Result<Self> {
        ops.sort_by_key(|&(q, _)| q);
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::validation("duplicate qubit within a Pauli term"));
        }
        Ok(PauliTerm { coefficient, ops })
    }

    pub fn identity(coefficient: f64) -> Self {
        PauliTerm {
            coefficient,
            ops: vec![],
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.ops.iter().all(|&(_, p)| p == Pauli::Z)
    }
}

/// `H = sum_j h_j P_j` with real `h_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
    masks: Vec<PauliMasks>,
    /// Diagonal in the computational basis, when known to be exact.
    diagonal: Option<Vec<f64>>,
}

impl PauliSum {
    /// Builds a sum, merging terms on identical strings (first occurrence wins
    /// the position).
    pub fn new(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "num_qubits",
                value: num_qubits,
                limit: MAX_QUBITS,
            });
        }
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            check_pauli_ops(&t.ops, num_qubits)?;
            if !t.coefficient.is_finite() {
                return Err(Error::validation("non-finite coefficient"));
            }
            if t.ops.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::validation(
                    "qubit indices within a term must be strictly increasing",
                ));
            }
            match merged.iter_mut().find(|m| m.ops == t.ops) {
                Some(m) => m.coefficient += t.coefficient,
                None => merged.push(t),
            }
        }
        let masks = merged.iter().map(|t| PauliMasks::new(&t.ops)).collect();
        Ok(PauliSum {
            num_qubits,
            terms: merged,
            masks,
            diagonal: None,
        })
    }

    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, vec![])
    }

    /// Attaches a precomputed computational-basis diagonal. Only valid when
    /// every term is a Z-string; the diagonal is checked against the terms.
    pub fn with_diagonal(mut self, diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.len() != 1 << self.num_qubits {
            return Err(Error::validation("diagonal length does not match 2^n"));
        }
        if !self.terms.iter().all(PauliTerm::is_diagonal) {
            return Err(Error::validation(
                "diagonal fast path requires a Z-only Hamiltonian",
            ));
        }
        let from_terms = self.diagonal_from_terms();
        if let Some((i, (a, b))) = from_terms
            .iter()
            .zip(&diagonal)
            .enumerate()
            .find(|(_, (a, b))| (*a - *b).abs() > 1e-12)
        {
            return Err(Error::Consistency(format!(
                "diagonal entry {i} is {b} but terms give {a}"
            )));
        }
        self.diagonal = Some(diagonal);
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    /// Drops the diagonal fast path, forcing term-by-term evaluation.
    pub fn without_diagonal(&self) -> PauliSum {
        PauliSum {
            diagonal: None,
            ..self.clone()
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(PauliTerm::is_diagonal)
    }

    /// Sum of `|h_j|`, an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    fn diagonal_from_terms(&self) -> Vec<f64> {
        let dim = 1usize << self.num_qubits;
        let mut d = vec![0.0; dim];
        for (t, m) in self.terms.iter().zip(&self.masks) {
            if m.x != 0 {
                continue;
            }
            for (b, x) in d.iter_mut().enumerate() {
                *x += t.coefficient * m.sign(b).re;
            }
        }
        d
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::validation(format!(
                "{}-qubit state for a {}-qubit Hamiltonian",
                state.num_qubits(),
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// `H|state>` (not normalized).
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_state(state)?;
        let amps = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        if let Some(d) = &self.diagonal {
            for ((o, a), x) in out.iter_mut().zip(amps).zip(d) {
                *o = a * x;
            }
        } else {
            for (t, m) in self.terms.iter().zip(&self.masks) {
                let h = t.coefficient;
                for (b, a) in amps.iter().enumerate() {
                    out[b ^ m.x] += h * m.sign(b) * a;
                }
            }
        }
        StateVector::from_amplitudes(out)
    }

    /// `<state|H|state>`; the imaginary part must vanish within 1e-10.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        self.check_state(state)?;
        let amps = state.amplitudes();
        if let Some(d) = &self.diagonal {
            return Ok(amps.iter().zip(d).map(|(a, x)| a.norm_sqr() * x).sum());
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (t, m) in self.terms.iter().zip(&self.masks) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, a) in amps.iter().enumerate() {
                acc += amps[b ^ m.x].conj() * m.sign(b) * a;
            }
            total += t.coefficient * acc;
        }
        let scale = self.one_norm().max(1.0);
        if total.im.abs() >= HERMITIAN_IMAG_TOL * scale {
            return Err(Error::Consistency(format!(
                "expectation has imaginary part {:e}",
                total.im
            )));
        }
        Ok(total.re)
    }

    /// `||(H - E)|state>||` with `E = <state|H|state>`.
    pub fn eigen_residual(&self, state: &StateVector) -> Result<f64> {
        let e = self.expectation(state)?;
        let h = self.apply(state)?;
        Ok(h.amplitudes()
            .iter()
            .zip(state.amplitudes())
            .map(|(x, y)| (x - e * y).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Dense `2^n x 2^n` matrix; limited to 12 qubits.
    pub fn materialize_dense(&self) -> Result<HermitianMatrix> {
        if self.num_qubits > MAX_DENSE_QUBITS {
            return Err(Error::Capacity {
                what: "dense qubits",
                value: self.num_qubits,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << self.num_qubits;
        debug_assert!(dim <= MAX_DENSE_DIM);
        let mut m = HermitianMatrix::zeros(dim);
        for (t, mask) in self.terms.iter().zip(&self.masks) {
            for b in 0..dim {
                // column b, row b ^ x
                m.add_to(b ^ mask.x, b, t.coefficient * mask.sign(b));
            }
        }
        let dev = m.hermiticity_error();
        if dev >= 1e-12 {
            return Err(Error::Consistency(format!(
                "materialized matrix not Hermitian ({dev:e})"
            )));
        }
        Ok(m)
    }

    /// Parses the line-oriented text format described in the module docs.
    pub fn parse(text: &str) -> Result<PauliSum> {
        let mut num_qubits: Option<usize> = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let first = tokens.next().expect("non-empty line");
            let n = match num_qubits {
                None => {
                    if first != "qubits" {
                        return Err(Error::parse(
                            line_no,
                            "expected header `qubits <n>` before any term",
                        ));
                    }
                    let n: usize = tokens
                        .next()
                        .ok_or_else(|| Error::parse(line_no, "missing qubit count"))?
                        .parse()
                        .map_err(|_| Error::parse(line_no, "malformed qubit count"))?;
                    if tokens.next().is_some() {
                        return Err(Error::parse(line_no, "trailing tokens after qubit count"));
                    }
                    if n == 0 || n > MAX_QUBITS {
                        return Err(Error::parse(
                            line_no,
                            format!("qubit count {n} outside 1..={MAX_QUBITS}"),
                        ));
                    }
                    num_qubits = Some(n);
                    continue;
                }
                Some(n) => n,
            };
            if first == "qubits" {
                return Err(Error::parse(line_no, "duplicate `qubits` header"));
            }
            let coefficient: f64 = first
                .parse()
                .map_err(|_| Error::parse(line_no, format!("malformed coefficient `{first}`")))?;
            if !coefficient.is_finite() {
                return Err(Error::parse(line_no, "coefficient must be finite"));
            }
            let mut ops: Vec<(usize, Pauli)> = Vec::new();
            for tok in tokens {
                let mut chars = tok.chars();
                let letter = chars.next().expect("token non-empty");
                let pauli = Pauli::from_char(letter).ok_or_else(|| {
                    Error::parse(
                        line_no,
                        format!("unknown Pauli letter `{letter}` in `{tok}`"),
                    )
                })?;
                let q: usize = chars.as_str().parse().map_err(|_| {
                    Error::parse(line_no, format!("malformed qubit index in `{tok}`"))
                })?;
                if q >= n {
                    return Err(Error::parse(
                        line_no,
                        format!("qubit {q} out of range for {n} qubits"),
                    ));
                }
                if ops.iter().any(|&(p, _)| p == q) {
                    return Err(Error::parse(
                        line_no,
                        format!("duplicate qubit {q} in term"),
                    ));
                }
                if ops.last().is_some_and(|&(p, _)| p > q) {
                    return Err(Error::parse(
                        line_no,
                        "qubit indices must be strictly increasing",
                    ));
                }
                ops.push((q, pauli));
            }
            terms.push(PauliTerm { coefficient, ops });
        }
        let n = num_qubits.ok_or_else(|| Error::parse(1, "missing `qubits <n>` header"))?;
        PauliSum::new(n, terms).map_err(|e| Error::parse(0, e.to_string()))
    }

    /// Inverse of [`PauliSum::parse`]; coefficients use shortest round-trip
    /// formatting so `parse(serialize(h)) == h`.
    pub fn serialize(&self) -> String {
        let mut s = format!("qubits {}\n", self.num_qubits);
        for t in &self.terms {
            write!(s, "{:?}", t.coefficient).unwrap();
            for (q, p) in &t.ops {
                write!(s, " {p}{q}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// The same operator acting on qubits `offset..offset + n` of a larger
    /// register.
    pub fn embed(&self, total_qubits: usize, offset: usize) -> Result<PauliSum> {
        if offset + self.num_qubits > total_qubits {
            return Err(Error::validation("embedding exceeds target register"));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm {
                coefficient: t.coefficient,
                ops: t.ops.iter().map(|&(q, p)| (q + offset, p)).collect(),
            })
            .collect();
        PauliSum::new(total_qubits, terms)
    }

    /// Term-wise sum of two operators on the same register.
    pub fn plus(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::validation("adding Hamiltonians of different sizes"));
        }
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        PauliSum::new(self.num_qubits, terms)
    }
}

/// `hd + sum_j alpha_j |e_j><e_j|`.
pub fn deflate_dense(
    hd: &HermitianMatrix,
    states: &[StateVector],
    alphas: &[f64],
) -> Result<HermitianMatrix> {
    if states.len() != alphas.len() {
        return Err(Error::validation(format!(
            "{} states but {} excitation strengths",
            states.len(),
            alphas.len()
        )));
    }
    let mut out = hd.clone();
    for (s, &a) in states.iter().zip(alphas) {
        out.add_projector(s.amplitudes(), a)?;
    }
    Ok(out)
}

/// `<a|H|b>`, used for cross-checks.
pub fn matrix_element(h: &PauliSum, a: &StateVector, b: &StateVector) -> Result<Complex64> {
    let hb = h.apply(b)?;
    if a.num_qubits() != hb.num_qubits() {
        return Err(Error::validation("state size mismatch"));
    }
    Ok(inner(a.amplitudes(), hb.amplitudes()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::eigh;
    use crate::statevec::Gate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let amps = (0..1 << n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.normalize().unwrap();
        s
    }

    pub(crate) fn random_pauli_sum(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> PauliSum {
        let ts = (0..terms)
            .map(|_| {
                let ops = (0..n)
                    .filter_map(|q| match rng.gen_range(0..4) {
                        1 => Some((q, Pauli::X)),
                        2 => Some((q, Pauli::Y)),
                        3 => Some((q, Pauli::Z)),
                        _ => None,
                    })
                    .collect();
                PauliTerm {
                    coefficient: rng.gen_range(-1.0..1.0),
                    ops,
                }
            })
            .collect();
        PauliSum::new(n, ts).unwrap()
    }

    #[test]
    fn parse_examples() {
        let h = PauliSum::parse("qubits 2\n0.5 Z0\n-0.25 X0 X1").unwrap();
        assert_eq!(h.num_qubits(), 2);
        assert_eq!(
            h.terms(),
            &[
                PauliTerm {
                    coefficient: 0.5,
                    ops: vec![(0, Pauli::Z)]
                },
                PauliTerm {
                    coefficient: -0.25,
                    ops: vec![(0, Pauli::X), (1, Pauli::X)]
                },
            ]
        );
        let id = PauliSum::parse("qubits 1\n1.0").unwrap();
        assert_eq!(id.terms(), &[PauliTerm::identity(1.0)]);
        let mut s = StateVector::init_zero(1).unwrap();
        s.apply_gate(&Gate::ry(0, 0), Some(1.3)).unwrap();
        assert!((id.expectation(&s).unwrap() - 1.0).abs() < 1e-15);
        let merged = PauliSum::parse("qubits 1\n0.5 Z0\n0.5 Z0").unwrap();
        assert_eq!(
            merged.terms(),
            &[PauliTerm {
                coefficient: 1.0,
                ops: vec![(0, Pauli::Z)]
            }]
        );
        let empty = PauliSum::parse("# nothing\nqubits 3\n\n").unwrap();
        assert!(empty.terms().is_empty());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("qubits 2\nabc Z0", 2),
            ("qubits 2\n1.0 Q0", 2),
            ("qubits 2\n# c\n1.0 Z0 X0", 3),
            ("qubits 2\n1.0 Z2", 2),
            ("qubits 2\n1.0 Z1 X0", 2),
            ("1.0 Z0", 1),
            ("qubits 2\n1+2i Z0", 2),
            ("qubits 2\nqubits 3", 2),
        ];
        for (text, line) in cases {
            match PauliSum::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let zero = StateVector::init_zero(1).unwrap();
        let z = PauliSum::parse("qubits 1\n1 Z0").unwrap();
        assert_eq!(z.expectation(&zero).unwrap(), 1.0);
        let x = PauliSum::parse("qubits 1\n0.5 X0").unwrap();
        assert_eq!(x.expectation(&zero).unwrap(), 0.0);
        let mut plus = zero.clone();
        plus.apply_gate(&Gate::h(0), None).unwrap();
        let x1 = PauliSum::parse("qubits 1\n1 X0").unwrap();
        assert!((x1.expectation(&plus).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_examples() {
        let z = PauliSum::parse("qubits 1\n1 Z0")
            .unwrap()
            .materialize_dense()
            .unwrap();
        assert_eq!(z.entries(), &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let x = PauliSum::parse("qubits 1\n1 X0")
            .unwrap()
            .materialize_dense()
            .unwrap();
        assert_eq!(x.entries(), &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let y = PauliSum::parse("qubits 1\n1 Y0")
            .unwrap()
            .materialize_dense()
            .unwrap();
        assert_eq!(y.entries(), &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let big = PauliSum::zero(13).unwrap();
        assert!(matches!(
            big.materialize_dense(),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn expectation_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=6 {
            let h = random_pauli_sum(n, 3 * n, &mut rng);
            let d = h.materialize_dense().unwrap();
            for _ in 0..5 {
                let s = random_state(n, &mut rng);
                let hv = d.mul_vec(s.amplitudes());
                let dense: Complex64 = inner(s.amplitudes(), &hv);
                assert!((dense.re - h.expectation(&s).unwrap()).abs() < 1e-10);
                let applied = h.apply(&s).unwrap();
                for (a, b) in applied.amplitudes().iter().zip(&hv) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn deflate_dense_examples() {
        let z = PauliSum::parse("qubits 1\n1 Z0")
            .unwrap()
            .materialize_dense()
            .unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let d = deflate_dense(&z, std::slice::from_ref(&one), &[10.0]).unwrap();
        let vals = eigh(&d).unwrap().values;
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 9.0).abs() < 1e-12);
        assert_eq!(
            deflate_dense(&z, std::slice::from_ref(&one), &[0.0]).unwrap(),
            z
        );
        assert!(deflate_dense(&z, &[one], &[]).is_err());
        let two = StateVector::init_zero(2).unwrap();
        assert!(deflate_dense(&z, &[two], &[1.0]).is_err());
    }

    #[test]
    fn deflating_exact_ground_shifts_only_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_pauli_sum(3, 10, &mut rng)
            .materialize_dense()
            .unwrap();
        let e = eigh(&h).unwrap();
        let g = StateVector::from_amplitudes(e.vectors[0].clone()).unwrap();
        let after = eigh(&deflate_dense(&h, &[g], &[10.0]).unwrap())
            .unwrap()
            .values;
        let mut want = e.values[1..].to_vec();
        want.push(e.values[0] + 10.0);
        want.sort_by(f64::total_cmp);
        for (a, b) in after.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn serialize_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..6 {
            let h = random_pauli_sum(n, 8, &mut rng);
            let back = PauliSum::parse(&h.serialize()).unwrap();
            assert_eq!(back, h);
        }
    }

    #[test]
    fn residual_zero_on_eigenstate() {
        let h = PauliSum::parse("qubits 2\n1 Z0 Z1\n0.3 Z1").unwrap();
        let s = StateVector::basis(2, 2).unwrap();
        assert!(h.eigen_residual(&s).unwrap() < 1e-15);
        let mut p = StateVector::init_zero(2).unwrap();
        p.apply_gate(&Gate::h(0), None).unwrap();
        assert!(h.eigen_residual(&p).unwrap() > 0.1);
    }
}
