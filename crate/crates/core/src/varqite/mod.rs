//! Variational imaginary-time evolution with deflation.
//!
//! Each step builds `M_ij = Re<d_i phi|d_j phi>` and the force
//! `V_i = -Re<d_i phi|H_eff|phi>`, solves the regularized system for the
//! parameter velocity and takes an Euler step. `H_eff` adds
//! `alpha_j |e_j><e_j|` for every recorded eigenstate, so the effective
//! energy `<H> + sum_j alpha_j |<e_j|phi>|^2` decreases along the flow.

mod spectrum;
mod tikhonov;
mod trajectory;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{Ansatz, DerivativeMode, DerivativeVector};
use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::statevec::{inner, StateVector};

pub use spectrum::{
    compare_methods, exact_spectrum, run_spectrum, Diagnostics, DiscoveredState, MethodComparison,
    SpectrumReport, SpectrumRun,
};
pub use tikhonov::{
    select_lambda, tikhonov_solve, Tikhonov, DEFAULT_LAMBDA_MAX, DEFAULT_LAMBDA_MIN,
};
pub use trajectory::{trajectory_csv, TrajectoryEvent, TrajectoryRecord, TRAJECTORY_HEADER};

/// Velocities below this norm while the force is nonzero count as a stall.
const STALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Solve `M theta_dot = V` (regularized) each step.
    Imaginary,
    /// `theta += eta V`, i.e. `M` replaced by the identity.
    Gradient,
}

/// What happens to the parameters after an eigenstate is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetMode {
    /// Fresh draw from `U[0, 2 pi)`.
    Rerandomize,
    /// Back to the run's initial parameters.
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub method: Method,
    pub dtau: f64,
    pub eta: f64,
    pub derivative: DerivativeMode,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub alpha: f64,
    pub conv_threshold: f64,
    pub conv_window: usize,
    /// Step budget for the whole run, across all states.
    pub max_iterations: usize,
    pub num_states: usize,
    pub seed: u64,
    pub reset_mode: ResetMode,
    pub oracle: bool,
    pub degeneracy_tol: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            method: Method::Imaginary,
            dtau: 0.1,
            eta: 0.1,
            derivative: DerivativeMode::default(),
            lambda_min: DEFAULT_LAMBDA_MIN,
            lambda_max: DEFAULT_LAMBDA_MAX,
            alpha: 10.0,
            conv_threshold: 1e-2,
            conv_window: 3,
            max_iterations: 10_000,
            num_states: 1,
            seed: 0,
            reset_mode: ResetMode::Rerandomize,
            oracle: true,
            degeneracy_tol: crate::linalg::DEGENERACY_TOL,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Configuration(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("dtau", self.dtau)?;
        positive("eta", self.eta)?;
        positive("conv_threshold", self.conv_threshold)?;
        if let DerivativeMode::FiniteDifference { step } = self.derivative {
            positive("fd_step", step)?;
        }
        if !(self.lambda_min >= 0.0
            && self.lambda_min <= self.lambda_max
            && self.lambda_max.is_finite())
        {
            return Err(Error::Configuration(format!(
                "invalid lambda range [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Configuration(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if self.conv_window == 0 {
            return Err(Error::Configuration(
                "conv_window must be at least 1".into(),
            ));
        }
        if !(self.degeneracy_tol >= 0.0) {
            return Err(Error::Configuration("degeneracy_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Parameters and cached statevector at one point of an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub theta: Vec<f64>,
    pub tau: f64,
    pub last_delta_norm: f64,
    /// Regularization of the last solve; NaN before the first step and for
    /// gradient steps.
    pub last_lambda: f64,
    /// `<phi|H|phi>` without deflation terms.
    pub energy: f64,
    pub state: StateVector,
}

/// A recorded eigenstate and the penalty it adds to the Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflationEntry {
    pub state: StateVector,
    pub alpha: f64,
    pub energy: f64,
    pub discovered_at_iteration: usize,
}

/// Result of one update, before it is committed.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next: EvolutionState,
    pub theta_dot_norm: f64,
    pub force_norm: f64,
    /// Zero velocity while the force is not zero.
    pub stalled: bool,
}

/// `M_ij = Re<d_i|d_j>`, row-major. Exactly symmetric.
pub fn assemble_m(derivs: &[DerivativeVector]) -> Result<Vec<f64>> {
    let p = derivs.len();
    if let Some(first) = derivs.first() {
        if derivs
            .iter()
            .any(|d| d.components.len() != first.components.len())
        {
            return Err(Error::validation("derivative vectors differ in dimension"));
        }
    }
    let rows: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|i| {
            (i..p)
                .map(|j| inner(&derivs[i].components, &derivs[j].components).re)
                .collect()
        })
        .collect();
    let mut m = vec![0.0; p * p];
    for (i, row) in rows.into_iter().enumerate() {
        for (k, val) in row.into_iter().enumerate() {
            let j = i + k;
            m[i * p + j] = val;
            m[j * p + i] = val;
        }
    }
    Ok(m)
}

fn check_deflations(phi: &StateVector, deflations: &[DeflationEntry]) -> Result<()> {
    for (k, d) in deflations.iter().enumerate() {
        if d.state.num_qubits() != phi.num_qubits() {
            return Err(Error::validation(format!(
                "deflation entry {k} has {} qubits, state has {}",
                d.state.num_qubits(),
                phi.num_qubits()
            )));
        }
    }
    Ok(())
}

/// `V_i = -Re<d_i|H|phi> - sum_j alpha_j Re(<d_i|e_j><e_j|phi>)`, i.e.
/// `-(1/2) dE_eff/d theta_i`.
pub fn assemble_v(
    derivs: &[DerivativeVector],
    phi: &StateVector,
    h: &PauliSum,
    deflations: &[DeflationEntry],
) -> Result<Vec<f64>> {
    check_deflations(phi, deflations)?;
    let hphi = h.apply(phi)?;
    let overlaps: Vec<_> = deflations
        .iter()
        .map(|d| inner(d.state.amplitudes(), phi.amplitudes()))
        .collect();
    derivs
        .par_iter()
        .map(|d| {
            if d.components.len() != phi.dim() {
                return Err(Error::validation(
                    "derivative and state differ in dimension",
                ));
            }
            let mut v = -inner(&d.components, hphi.amplitudes()).re;
            for (e, ov) in deflations.iter().zip(&overlaps) {
                v -= e.alpha * (inner(&d.components, e.state.amplitudes()) * ov).re;
            }
            Ok(v)
        })
        .collect()
}

/// Forward-difference estimate of `(1/2) d|<phi|target>|^2 / d theta_i`.
pub fn overlap_penalty_grad_fd(
    ansatz: &Ansatz,
    theta: &[f64],
    i: usize,
    target: &StateVector,
    dtheta: f64,
) -> Result<f64> {
    if !(dtheta > 0.0) {
        return Err(Error::validation(format!("dtheta {dtheta} must be > 0")));
    }
    if i >= theta.len() {
        return Err(Error::validation(format!(
            "parameter index {i} out of range"
        )));
    }
    let base = ansatz.evaluate(theta)?.inner_product(target)?.norm_sqr();
    let mut shifted = theta.to_vec();
    shifted[i] += dtheta;
    let moved = ansatz.evaluate(&shifted)?.inner_product(target)?.norm_sqr();
    Ok(0.5 * (moved - base) / dtheta)
}

/// Same as [`assemble_v`] but with each deflation addend taken from
/// [`overlap_penalty_grad_fd`].
pub fn assemble_v_fd_penalty(
    ansatz: &Ansatz,
    theta: &[f64],
    derivs: &[DerivativeVector],
    h: &PauliSum,
    deflations: &[DeflationEntry],
    dtheta: f64,
) -> Result<Vec<f64>> {
    let phi = ansatz.evaluate(theta)?;
    let mut v = assemble_v(derivs, &phi, h, &[])?;
    check_deflations(&phi, deflations)?;
    for (i, vi) in v.iter_mut().enumerate() {
        for d in deflations {
            *vi -= d.alpha * overlap_penalty_grad_fd(ansatz, theta, i, &d.state, dtheta)?;
        }
    }
    Ok(v)
}

/// `<phi|H|phi> + sum_j alpha_j |<e_j|phi>|^2`.
pub fn effective_energy(
    phi: &StateVector,
    h: &PauliSum,
    deflations: &[DeflationEntry],
) -> Result<f64> {
    check_deflations(phi, deflations)?;
    let mut e = h.expectation(phi)?;
    for d in deflations {
        e += d.alpha * inner(d.state.amplitudes(), phi.amplitudes()).norm_sqr();
    }
    Ok(e)
}

/// True iff the last `window` entries exist and are all below `threshold`.
pub fn detect_convergence(history: &[f64], threshold: f64, window: usize) -> bool {
    window >= 1
        && history.len() >= window
        && history[history.len() - window..]
            .iter()
            .all(|&d| d < threshold)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn random_theta<R: Rng>(num_params: usize, rng: &mut R) -> Vec<f64> {
    (0..num_params)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect()
}

/// Evolution of one ansatz under one Hamiltonian.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    ansatz: &'a Ansatz,
    hamiltonian: &'a PauliSum,
    config: EngineConfig,
}

impl<'a> Engine<'a> {
    pub fn new(
        ansatz: &'a Ansatz,
        hamiltonian: &'a PauliSum,
        config: EngineConfig,
    ) -> Result<Self> {
        config.validate()?;
        if ansatz.num_qubits() != hamiltonian.num_qubits() {
            return Err(Error::validation(format!(
                "ansatz acts on {} qubits, Hamiltonian on {}",
                ansatz.num_qubits(),
                hamiltonian.num_qubits()
            )));
        }
        Ok(Engine {
            ansatz,
            hamiltonian,
            config,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn ansatz(&self) -> &Ansatz {
        self.ansatz
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        self.hamiltonian
    }

    pub fn state_at(&self, theta: Vec<f64>, tau: f64) -> Result<EvolutionState> {
        let state = self.ansatz.evaluate(&theta)?;
        let energy = self.hamiltonian.expectation(&state)?;
        Ok(EvolutionState {
            theta,
            tau,
            last_delta_norm: f64::NAN,
            last_lambda: f64::NAN,
            energy,
            state,
        })
    }

    /// `M` and `V` at the current parameters.
    pub fn mclachlan(
        &self,
        es: &EvolutionState,
        deflations: &[DeflationEntry],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let derivs = self.ansatz.derivatives(&es.theta, self.config.derivative)?;
        let m = assemble_m(&derivs)?;
        let v = assemble_v(&derivs, &es.state, self.hamiltonian, deflations)?;
        Ok((m, v))
    }

    fn advance(
        &self,
        es: &EvolutionState,
        velocity: &[f64],
        scale: f64,
        lambda: f64,
    ) -> Result<EvolutionState> {
        let theta: Vec<f64> = es
            .theta
            .iter()
            .zip(velocity)
            .map(|(t, v)| t + scale * v)
            .collect();
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Numeric("parameter update is not finite".into()));
        }
        let mut next = self.state_at(theta, es.tau + self.config.dtau)?;
        next.last_delta_norm = scale * norm(velocity);
        next.last_lambda = lambda;
        Ok(next)
    }

    /// One Euler step in imaginary time: `theta += dtau theta_dot` with
    /// `theta_dot` the regularized solution of `M theta_dot = V`.
    pub fn step(&self, es: &EvolutionState, deflations: &[DeflationEntry]) -> Result<StepOutcome> {
        let (m, v) = self.mclachlan(es, deflations)?;
        let system = Tikhonov::new(&m, &v)?;
        let lambda = system.select_lambda(self.config.lambda_min, self.config.lambda_max);
        let theta_dot = system.solve(lambda)?;
        let (tn, vn) = (norm(&theta_dot), norm(&v));
        let stalled = tn < STALL_TOL && vn > STALL_TOL;
        if stalled {
            log::warn!("stalled evolution: |theta_dot| = {tn:e} with |V| = {vn:e}");
        }
        Ok(StepOutcome {
            next: self.advance(es, &theta_dot, self.config.dtau, lambda)?,
            theta_dot_norm: tn,
            force_norm: vn,
            stalled,
        })
    }

    /// Baseline update `theta += eta V`.
    pub fn gradient_descent_step(
        &self,
        es: &EvolutionState,
        deflations: &[DeflationEntry],
    ) -> Result<StepOutcome> {
        let derivs = self.ansatz.derivatives(&es.theta, self.config.derivative)?;
        let v = assemble_v(&derivs, &es.state, self.hamiltonian, deflations)?;
        let vn = norm(&v);
        Ok(StepOutcome {
            next: self.advance(es, &v, self.config.eta, f64::NAN)?,
            theta_dot_norm: vn,
            force_norm: vn,
            stalled: false,
        })
    }

    pub fn step_with_method(
        &self,
        es: &EvolutionState,
        deflations: &[DeflationEntry],
    ) -> Result<StepOutcome> {
        match self.config.method {
            Method::Imaginary => self.step(es, deflations),
            Method::Gradient => self.gradient_descent_step(es, deflations),
        }
    }

    /// Records the current state as an eigenstate and returns fresh
    /// parameters according to the reset mode.
    pub fn deflate_current<R: Rng>(
        &self,
        es: &EvolutionState,
        iteration: usize,
        initial_theta: &[f64],
        rng: &mut R,
    ) -> (DeflationEntry, Vec<f64>) {
        let entry = DeflationEntry {
            state: es.state.clone(),
            alpha: self.config.alpha,
            energy: es.energy,
            discovered_at_iteration: iteration,
        };
        let theta = match self.config.reset_mode {
            ResetMode::Rerandomize => random_theta(self.ansatz.num_params(), rng),
            ResetMode::Reset => initial_theta.to_vec(),
        };
        (entry, theta)
    }
}
