//! 3SAT formulas and their clause-penalty Hamiltonians.
//!
//! Variable `i` maps to qubit `i`; bit value 1 means true. The Hamiltonian is
//! diagonal with entry `j` equal to the number of clauses the assignment
//! encoded by `j` violates.

use std::fmt::Write as _;

use rand::Rng;

use super::{PauliSum, PauliTerm};
use crate::error::{Error, Result};
use crate::statevec::{Pauli, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn new(var: usize, negated: bool) -> Self {
        Literal { var, negated }
    }

    /// Truth value under the assignment packed into `bits`.
    #[inline]
    pub fn holds(self, bits: u64) -> bool {
        ((bits >> self.var) & 1 == 1) != self.negated
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatFormula {
    num_vars: usize,
    clauses: Vec<[Literal; 3]>,
}

impl SatFormula {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        if num_vars == 0 || num_vars > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "num_vars",
                value: num_vars,
                limit: MAX_QUBITS,
            });
        }
        for (i, cl) in clauses.iter().enumerate() {
            for l in cl {
                if l.var >= num_vars {
                    return Err(Error::validation(format!(
                        "clause {i}: variable {} out of range for {num_vars} variables",
                        l.var
                    )));
                }
            }
            if cl[0].var == cl[1].var || cl[0].var == cl[2].var || cl[1].var == cl[2].var {
                return Err(Error::validation(format!(
                    "clause {i}: literals must use distinct variables"
                )));
            }
        }
        Ok(SatFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    /// Parses DIMACS CNF (`p cnf <vars> <clauses>`, 1-based literals, each
    /// clause terminated by `0`). Every clause must have exactly 3 literals.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<(i64, usize)> = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(Error::parse(line_no, "duplicate problem line"));
                }
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                    return Err(Error::parse(line_no, "expected `p cnf <vars> <clauses>`"));
                }
                let v = toks[2]
                    .parse()
                    .map_err(|_| Error::parse(line_no, "malformed variable count"))?;
                let c = toks[3]
                    .parse()
                    .map_err(|_| Error::parse(line_no, "malformed clause count"))?;
                header = Some((v, c));
                continue;
            }
            let (num_vars, _) =
                header.ok_or_else(|| Error::parse(line_no, "clause before `p cnf` line"))?;
            for tok in line.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("malformed literal `{tok}`")))?;
                if lit == 0 {
                    clauses.push(finish_clause(&current, line_no)?);
                    current.clear();
                    continue;
                }
                let var = lit.unsigned_abs() as usize;
                if var > num_vars {
                    return Err(Error::parse(
                        line_no,
                        format!("variable {var} exceeds declared count {num_vars}"),
                    ));
                }
                current.push((lit, line_no));
            }
        }
        if !current.is_empty() {
            return Err(Error::parse(
                last_line,
                "last clause is not terminated by 0",
            ));
        }
        let (num_vars, declared) =
            header.ok_or_else(|| Error::parse(last_line.max(1), "missing `p cnf` line"))?;
        if declared != clauses.len() {
            return Err(Error::parse(
                last_line.max(1),
                format!("declared {declared} clauses, found {}", clauses.len()),
            ));
        }
        SatFormula::new(num_vars, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for cl in &self.clauses {
            for l in cl {
                let v = l.var as i64 + 1;
                write!(s, "{} ", if l.negated { -v } else { v }).unwrap();
            }
            s.push_str("0\n");
        }
        s
    }

    /// Clauses with all three literals false. `assignment[i]` is variable `i`.
    pub fn violated_clauses(&self, assignment: &[bool]) -> Result<usize> {
        if assignment.len() != self.num_vars {
            return Err(Error::validation(format!(
                "assignment of length {} for {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        let bits = assignment
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        Ok(self.violated_by_index(bits))
    }

    /// As [`SatFormula::violated_clauses`] with the assignment packed as bits.
    pub fn violated_by_index(&self, bits: u64) -> usize {
        self.clauses
            .iter()
            .filter(|cl| cl.iter().all(|l| !l.holds(bits)))
            .count()
    }

    /// Number of satisfying assignments, stopping once `limit` is reached.
    pub fn count_solutions(&self, limit: usize) -> usize {
        let mut found = 0;
        for bits in 0..1u64 << self.num_vars {
            if self
                .clauses
                .iter()
                .all(|cl| cl.iter().any(|l| l.holds(bits)))
            {
                found += 1;
                if found >= limit {
                    break;
                }
            }
        }
        found
    }

    /// Diagonal penalty Hamiltonian. Each clause contributes the projector
    /// onto its unique violating assignment, `prod (I +/- Z)/2`, expanded into
    /// Z-strings; the violated-clause diagonal is attached as a fast path.
    pub fn to_hamiltonian(&self) -> Result<PauliSum> {
        let mut terms: Vec<PauliTerm> = Vec::new();
        for cl in &self.clauses {
            let mut lits = *cl;
            lits.sort_by_key(|l| l.var);
            for subset in 0u8..8 {
                let mut coefficient = 0.125;
                let mut ops = Vec::new();
                for (k, l) in lits.iter().enumerate() {
                    if subset & (1 << k) != 0 {
                        // x false <=> bit 0 <=> projector (I + Z)/2; negated flips the sign.
                        if l.negated {
                            coefficient = -coefficient;
                        }
                        ops.push((l.var, Pauli::Z));
                    }
                }
                match terms.iter_mut().find(|t| t.ops == ops) {
                    Some(t) => t.coefficient += coefficient,
                    None => terms.push(PauliTerm { coefficient, ops }),
                }
            }
        }
        terms.retain(|t| t.coefficient != 0.0);
        let diag = (0..1u64 << self.num_vars)
            .map(|j| self.violated_by_index(j) as f64)
            .collect();
        PauliSum::new(self.num_vars, terms)?.with_diagonal(diag)
    }
}

fn finish_clause(lits: &[(i64, usize)], line_no: usize) -> Result<[Literal; 3]> {
    if lits.len() != 3 {
        return Err(Error::parse(
            line_no,
            format!("clause has {} literals, expected 3", lits.len()),
        ));
    }
    let mk = |(l, _): (i64, usize)| Literal::new(l.unsigned_abs() as usize - 1, l < 0);
    let out = [mk(lits[0]), mk(lits[1]), mk(lits[2])];
    if out[0].var == out[1].var || out[0].var == out[2].var || out[1].var == out[2].var {
        return Err(Error::parse(line_no, "clause repeats a variable"));
    }
    Ok(out)
}

/// Rejection-samples random 3-clause formulas until one has exactly one
/// satisfying assignment. Fails with a configuration error after
/// `max_attempts` draws.
pub fn generate_unique_3sat<R: Rng>(
    num_vars: usize,
    num_clauses: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<SatFormula> {
    if !(3..=20).contains(&num_vars) {
        return Err(Error::Configuration(format!(
            "num_vars must lie in 3..=20 for exhaustive uniqueness checks, got {num_vars}"
        )));
    }
    for _ in 0..max_attempts {
        let clauses = (0..num_clauses)
            .map(|_| {
                let mut vars = [0usize; 3];
                let mut k = 0;
                while k < 3 {
                    let v = rng.gen_range(0..num_vars);
                    if !vars[..k].contains(&v) {
                        vars[k] = v;
                        k += 1;
                    }
                }
                vars.map(|v| Literal::new(v, rng.gen_bool(0.5)))
            })
            .collect();
        let f = SatFormula::new(num_vars, clauses)?;
        if f.count_solutions(2) == 1 {
            return Ok(f);
        }
    }
    Err(Error::Configuration(format!(
        "no single-solution instance with {num_vars} variables and {num_clauses} clauses \
         after {max_attempts} attempts; try more clauses"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;
    use crate::statevec::StateVector;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pos(v: usize) -> Literal {
        Literal::new(v, false)
    }
    fn neg(v: usize) -> Literal {
        Literal::new(v, true)
    }

    #[test]
    fn parse_dimacs_examples() {
        let f = SatFormula::parse_dimacs("p cnf 3 1\n1 2 3 0").unwrap();
        assert_eq!(f.clauses(), &[[pos(0), pos(1), pos(2)]]);
        let f = SatFormula::parse_dimacs("c comment\np cnf 3 1\n-1 2 3 0\n").unwrap();
        assert_eq!(f.clauses(), &[[neg(0), pos(1), pos(2)]]);
        assert!(matches!(
            SatFormula::parse_dimacs("p cnf 3 1\n1 2 0"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            SatFormula::parse_dimacs("p cnf 3 1\n1 2 4 0"),
            Err(Error::Parse { line: 2, .. })
        ));
        // clause split across lines
        let f = SatFormula::parse_dimacs("p cnf 4 2\n1 -2\n 3 0 2 3 4 0").unwrap();
        assert_eq!(f.clauses().len(), 2);
    }

    #[test]
    fn dimacs_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = generate_unique_3sat(5, 24, &mut rng, 100_000).unwrap();
        assert_eq!(SatFormula::parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn violated_examples() {
        let f = SatFormula::new(3, vec![[pos(0), pos(1), pos(2)]]).unwrap();
        assert_eq!(f.violated_clauses(&[false, false, false]).unwrap(), 1);
        assert_eq!(f.violated_clauses(&[true, false, false]).unwrap(), 0);
        let g = SatFormula::new(3, vec![[neg(0), pos(1), pos(2)]]).unwrap();
        assert_eq!(g.violated_clauses(&[true, true, true]).unwrap(), 0);
        assert!(f.violated_clauses(&[true]).is_err());
    }

    #[test]
    fn single_clause_hamiltonian() {
        let f = SatFormula::new(3, vec![[pos(0), pos(1), pos(2)]]).unwrap();
        let h = f.to_hamiltonian().unwrap();
        assert_eq!(h.diagonal().unwrap(), &[1., 0., 0., 0., 0., 0., 0., 0.]);
        let empty = SatFormula::new(2, vec![])
            .unwrap()
            .to_hamiltonian()
            .unwrap();
        assert!(empty.terms().is_empty());
        assert_eq!(empty.diagonal().unwrap(), &[0.0; 4]);
    }

    /// Brute-force oracle: walk every assignment and count violated clauses
    /// directly from the literal definitions.
    fn brute_force_diag(f: &SatFormula) -> Vec<f64> {
        (0..1usize << f.num_vars())
            .map(|j| {
                let assignment: Vec<bool> = (0..f.num_vars()).map(|i| (j >> i) & 1 == 1).collect();
                f.clauses()
                    .iter()
                    .filter(|cl| {
                        cl.iter().all(|l| {
                            if l.negated {
                                assignment[l.var]
                            } else {
                                !assignment[l.var]
                            }
                        })
                    })
                    .count() as f64
            })
            .collect()
    }

    fn random_formula(n: usize, m: usize, rng: &mut ChaCha8Rng) -> SatFormula {
        use rand::Rng;
        let clauses = (0..m)
            .map(|_| {
                let mut vs: Vec<usize> = (0..n).collect();
                for i in 0..3 {
                    let j = rng.gen_range(i..n);
                    vs.swap(i, j);
                }
                [0, 1, 2].map(|k| Literal::new(vs[k], rng.gen_bool(0.5)))
            })
            .collect();
        SatFormula::new(n, clauses).unwrap()
    }

    #[test]
    fn diagonal_and_dense_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = random_formula(4, 16, &mut rng);
        let h = f.to_hamiltonian().unwrap();
        let oracle = brute_force_diag(&f);
        assert_eq!(h.diagonal().unwrap(), oracle.as_slice());
        // Pauli expansion alone, dense
        let dense = h.without_diagonal().materialize_dense().unwrap();
        for (j, want) in oracle.iter().enumerate() {
            assert!((dense.get(j, j).re - want).abs() < 1e-12);
        }
        // 3-qubit spectrum equals sorted clause counts
        let f3 = random_formula(3, 5, &mut rng);
        let mut want = brute_force_diag(&f3);
        want.sort_by(f64::total_cmp);
        let got = eigh(&f3.to_hamiltonian().unwrap().materialize_dense().unwrap())
            .unwrap()
            .values;
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_zero_iff_satisfiable() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [3, 5, 8, 12, 16] {
            for m in [n, 4 * n, 8 * n] {
                let f = random_formula(n, m, &mut rng);
                let h = f.to_hamiltonian().unwrap();
                let min = h
                    .diagonal()
                    .unwrap()
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(min == 0.0, f.count_solutions(1) == 1, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn z_expansion_matches_fast_path_on_random_states() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = random_formula(5, 20, &mut rng);
        let fast = f.to_hamiltonian().unwrap();
        let slow = fast.without_diagonal();
        for _ in 0..200 {
            let amps = (0..32)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut s = StateVector::from_amplitudes(amps).unwrap();
            s.normalize().unwrap();
            let a = fast.expectation(&s).unwrap();
            let b = slow.expectation(&s).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn generator_yields_unique_solution_and_is_deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        let a = generate_unique_3sat(4, 18, &mut r1, 100_000).unwrap();
        let b = generate_unique_3sat(4, 18, &mut r2, 100_000).unwrap();
        assert_eq!(a, b);
        let zeros = a
            .to_hamiltonian()
            .unwrap()
            .diagonal()
            .unwrap()
            .iter()
            .filter(|&&x| x == 0.0)
            .count();
        assert_eq!(zeros, 1);
        let mut r = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            generate_unique_3sat(10, 2, &mut r, 50),
            Err(Error::Configuration(_))
        ));
    }
}
