//! Parameterized trial circuits `|phi(theta)> = U_M(theta) ... U_1(theta) |0>`
//! and their parameter derivatives.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{Gate, GateKind, StateVector};

/// Default parameters per qubit of the compact ansatz.
pub const COMPACT_PARAMS_PER_QUBIT: usize = 7;

/// Default finite-difference step in radians.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzFamily {
    Compact,
    Lowdepth,
    Custom,
}

/// How `d|phi>/d theta_i` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Fourth-order central differences with step `step`.
    FiniteDifference { step: f64 },
    /// Generator insertion, exact up to rounding.
    Analytic,
}

impl Default for DerivativeMode {
    fn default() -> Self {
        DerivativeMode::FiniteDifference {
            step: DEFAULT_FD_STEP,
        }
    }
}

/// Unnormalized `d|phi>/d theta_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeVector {
    pub param_index: usize,
    pub components: Vec<Complex64>,
}

impl DerivativeVector {
    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    num_qubits: usize,
    num_params: usize,
    gates: Vec<Gate>,
    family: AnsatzFamily,
}

impl Ansatz {
    /// Validates gates against the register and parameter count. Parameters
    /// that no gate uses are allowed; they contribute zero derivatives.
    pub fn new(
        num_qubits: usize,
        num_params: usize,
        gates: Vec<Gate>,
        family: AnsatzFamily,
    ) -> Result<Self> {
        StateVector::init_zero(num_qubits)?;
        for g in &gates {
            g.validate(num_qubits)?;
            if let Some(p) = g.param {
                if p >= num_params {
                    return Err(Error::validation(format!(
                        "gate `{g}` uses parameter {p} but only {num_params} declared"
                    )));
                }
            }
        }
        Ok(Ansatz {
            num_qubits,
            num_params,
            gates,
            family,
        })
    }

    /// Layered hardware-efficient circuit: alternating RY and RZ layers on
    /// every qubit, with a nearest-neighbour CZ chain after each RZ layer
    /// except the last. `params_per_qubit` rotation layers in total. A single
    /// qubit gets the rotations alone.
    pub fn compact(num_qubits: usize, params_per_qubit: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::Configuration(
                "compact ansatz needs at least 1 qubit".into(),
            ));
        }
        if params_per_qubit == 0 {
            return Err(Error::Configuration(
                "params_per_qubit must be positive".into(),
            ));
        }
        let mut gates = Vec::new();
        let mut p = 0;
        for layer in 0..params_per_qubit {
            let ry = layer % 2 == 0;
            for q in 0..num_qubits {
                gates.push(if ry { Gate::ry(q, p) } else { Gate::rz(q, p) });
                p += 1;
            }
            if !ry && layer + 1 < params_per_qubit {
                gates.extend((0..num_qubits - 1).map(|q| Gate::cz(q, q + 1)));
            }
        }
        Ansatz::new(num_qubits, p, gates, AnsatzFamily::Compact)
    }

    /// Brick-wall circuit of nearest-neighbour blocks, alternating even and odd
    /// pairs. A block on `(a, b)` is `RY(a) RY(b) CRY(a -> b) CRZ(b -> a)`.
    /// Gates are emitted until exactly `target_params` parameters exist, so the
    /// final block may be partial.
    pub fn lowdepth(num_qubits: usize, target_params: usize) -> Result<Self> {
        if num_qubits < 2 {
            return Err(Error::Configuration(
                "low-depth ansatz needs at least 2 qubits".into(),
            ));
        }
        if target_params == 0 {
            return Err(Error::Configuration(
                "low-depth ansatz needs at least one parameter".into(),
            ));
        }
        let mut gates = Vec::new();
        let mut p = 0;
        let mut layer = 0;
        'outer: loop {
            let start = if num_qubits == 2 { 0 } else { layer % 2 };
            let mut a = start;
            while a + 1 < num_qubits {
                let b = a + 1;
                let block = [
                    Gate::ry(a, p),
                    Gate::ry(b, p + 1),
                    Gate::cry(a, b, p + 2),
                    Gate::crz(b, a, p + 3),
                ];
                for (k, g) in block.into_iter().enumerate() {
                    if p + k == target_params {
                        break 'outer;
                    }
                    gates.push(g);
                }
                p += 4;
                if p == target_params {
                    break 'outer;
                }
                a += 2;
            }
            layer += 1;
        }
        Ansatz::new(num_qubits, target_params, gates, AnsatzFamily::Lowdepth)
    }

    /// Parses a custom gate list:
    ///
    /// ```text
    /// qubits 3
    /// params 2
    /// RY q0 p0
    /// CZ q0 q1
    /// CRY q1 q2 p1
    /// ```
    ///
    /// Every declared parameter must be used by some gate.
    pub fn parse(text: &str) -> Result<Self> {
        let mut num_qubits: Option<usize> = None;
        let mut num_params: Option<usize> = None;
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let header_value = |toks: &[&str]| -> Result<usize> {
                if toks.len() != 2 {
                    return Err(Error::parse(line_no, format!("expected `{} <n>`", toks[0])));
                }
                toks[1]
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("malformed count `{}`", toks[1])))
            };
            match toks[0] {
                "qubits" => {
                    if num_qubits.replace(header_value(&toks)?).is_some() {
                        return Err(Error::parse(line_no, "duplicate `qubits` header"));
                    }
                    continue;
                }
                "params" => {
                    if num_params.replace(header_value(&toks)?).is_some() {
                        return Err(Error::parse(line_no, "duplicate `params` header"));
                    }
                    continue;
                }
                _ => {}
            }
            let (n, np) = match (num_qubits, num_params) {
                (Some(n), Some(p)) => (n, p),
                _ => {
                    return Err(Error::parse(
                        line_no,
                        "`qubits` and `params` headers must precede gates",
                    ))
                }
            };
            let kind = GateKind::from_name(toks[0])
                .ok_or_else(|| Error::parse(line_no, format!("unknown gate `{}`", toks[0])))?;
            let mut qubits = Vec::new();
            let mut param = None;
            for tok in &toks[1..] {
                if let Some(q) = tok.strip_prefix('q') {
                    qubits.push(
                        q.parse().map_err(|_| {
                            Error::parse(line_no, format!("malformed qubit `{tok}`"))
                        })?,
                    );
                } else if let Some(p) = tok.strip_prefix('p') {
                    if param.is_some() {
                        return Err(Error::parse(line_no, "gate has more than one parameter"));
                    }
                    let p: usize = p.parse().map_err(|_| {
                        Error::parse(line_no, format!("malformed parameter `{tok}`"))
                    })?;
                    if p >= np {
                        return Err(Error::parse(
                            line_no,
                            format!("parameter {p} out of range for {np} params"),
                        ));
                    }
                    param = Some(p);
                } else {
                    return Err(Error::parse(line_no, format!("unexpected token `{tok}`")));
                }
            }
            let g = Gate::new(kind, qubits, param);
            g.validate(n)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            gates.push(g);
        }
        let (n, np) = match (num_qubits, num_params) {
            (Some(n), Some(p)) => (n, p),
            _ => return Err(Error::parse(1, "missing `qubits`/`params` headers")),
        };
        let mut used = vec![false; np];
        for g in &gates {
            if let Some(p) = g.param {
                used[p] = true;
            }
        }
        if let Some(p) = used.iter().position(|u| !u) {
            return Err(Error::parse(
                text.lines().count().max(1),
                format!("parameter {p} is declared but never used"),
            ));
        }
        Ansatz::new(n, np, gates, AnsatzFamily::Custom)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn family(&self) -> AnsatzFamily {
        self.family
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params {
            return Err(Error::validation(format!(
                "{} parameters supplied, ansatz has {}",
                theta.len(),
                self.num_params
            )));
        }
        Ok(())
    }

    fn apply_range(&self, state: &mut StateVector, theta: &[f64], gates: &[Gate]) -> Result<()> {
        for g in gates {
            state.apply_gate(g, g.param.map(|p| theta[p]))?;
        }
        Ok(())
    }

    /// `|phi(theta)>`.
    pub fn evaluate(&self, theta: &[f64]) -> Result<StateVector> {
        self.check_theta(theta)?;
        let mut s = StateVector::init_zero(self.num_qubits)?;
        self.apply_range(&mut s, theta, &self.gates)?;
        Ok(s)
    }

    /// `[-phi(t+2h) + 8 phi(t+h) - 8 phi(t-h) + phi(t-2h)] / 12h` in
    /// parameter `i`.
    pub fn derivative_fd(&self, theta: &[f64], i: usize, step: f64) -> Result<DerivativeVector> {
        self.check_theta(theta)?;
        self.check_index(i)?;
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::validation(format!(
                "finite-difference step {step} must be > 0"
            )));
        }
        let mut shifted = theta.to_vec();
        let mut at = |delta: f64| -> Result<StateVector> {
            shifted[i] = theta[i] + delta;
            self.evaluate(&shifted)
        };
        let p2 = at(2.0 * step)?;
        let p1 = at(step)?;
        let m1 = at(-step)?;
        let m2 = at(-2.0 * step)?;
        let inv = 1.0 / (12.0 * step);
        let components = (0..p2.dim())
            .map(|k| {
                ((m2.amplitudes()[k] - p2.amplitudes()[k])
                    + 8.0 * (p1.amplitudes()[k] - m1.amplitudes()[k]))
                    * inv
            })
            .collect();
        Ok(DerivativeVector {
            param_index: i,
            components,
        })
    }

    /// Sum over the gates using parameter `i` of the circuit with
    /// `-(i/2) G` inserted immediately before that gate.
    pub fn derivative_analytic(&self, theta: &[f64], i: usize) -> Result<DerivativeVector> {
        self.check_theta(theta)?;
        self.check_index(i)?;
        let dim = 1usize << self.num_qubits;
        let mut components = vec![Complex64::new(0.0, 0.0); dim];
        let mut prefix = StateVector::init_zero(self.num_qubits)?;
        let factor = Complex64::new(0.0, -0.5);
        for (k, g) in self.gates.iter().enumerate() {
            if g.param == Some(i) {
                if g.kind.generator().is_none() {
                    return Err(Error::Unsupported(format!(
                        "parameter {i} drives non-rotation gate {}",
                        g.kind.name()
                    )));
                }
                let mut branch = prefix.clone();
                branch.apply_generator(g)?;
                branch.scale(factor);
                self.apply_range(&mut branch, theta, &self.gates[k..])?;
                for (c, b) in components.iter_mut().zip(branch.amplitudes()) {
                    *c += b;
                }
            }
            prefix.apply_gate(g, g.param.map(|p| theta[p]))?;
        }
        Ok(DerivativeVector {
            param_index: i,
            components,
        })
    }

    pub fn derivative(
        &self,
        theta: &[f64],
        i: usize,
        mode: DerivativeMode,
    ) -> Result<DerivativeVector> {
        match mode {
            DerivativeMode::FiniteDifference { step } => self.derivative_fd(theta, i, step),
            DerivativeMode::Analytic => self.derivative_analytic(theta, i),
        }
    }

    /// All parameter derivatives, computed in parallel; the result is ordered
    /// by parameter index and identical to a sequential evaluation.
    pub fn derivatives(
        &self,
        theta: &[f64],
        mode: DerivativeMode,
    ) -> Result<Vec<DerivativeVector>> {
        self.check_theta(theta)?;
        (0..self.num_params)
            .into_par_iter()
            .map(|i| self.derivative(theta, i, mode))
            .collect()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.num_params {
            return Err(Error::validation(format!(
                "parameter index {i} out of range for {} params",
                self.num_params
            )));
        }
        Ok(())
    }
}
