use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    detect_convergence, random_theta, DeflationEntry, Engine, EngineConfig, EvolutionState, Method,
    ResetMode, TrajectoryEvent, TrajectoryRecord,
};
use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::hamiltonian::{PauliSum, MAX_DENSE_QUBITS};
use crate::linalg::{eigvalsh, group_degeneracies, Level};

/// Energy changes below this, with `|delta theta|` still above the
/// convergence threshold, count as plateau drift.
const PLATEAU_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscoveredState {
    pub energy: f64,
    /// `||(H - E)|phi>||`.
    pub residual: f64,
    /// Steps spent in the phase that found this state.
    pub iterations: usize,
    pub discovered_at_iteration: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub stalled_steps: usize,
    pub plateau_drift_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// In discovery order.
    pub states: Vec<DiscoveredState>,
    /// Discovered energies, ascending and grouped.
    pub levels: Vec<Level>,
    pub oracle_energies: Option<Vec<f64>>,
    pub oracle_levels: Option<Vec<Level>>,
    pub complete: bool,
    pub total_iterations: usize,
    pub num_qubits: usize,
    pub num_params: usize,
    pub diagnostics: Diagnostics,
    pub config: EngineConfig,
}

#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub report: SpectrumReport,
    pub trajectory: Vec<TrajectoryRecord>,
    /// Entries recorded by this run, excluding any supplied up front.
    pub deflations: Vec<DeflationEntry>,
    pub final_state: EvolutionState,
}

struct Recorder {
    rows: Vec<TrajectoryRecord>,
}

impl Recorder {
    fn push(&mut self, es: &EvolutionState, n_deflations: usize, event: TrajectoryEvent) {
        self.push_values(
            es.tau,
            es.energy,
            es.last_delta_norm,
            es.last_lambda,
            n_deflations,
            event,
        );
    }

    fn push_values(
        &mut self,
        tau: f64,
        energy: f64,
        delta: f64,
        lambda: f64,
        n_deflations: usize,
        event: TrajectoryEvent,
    ) {
        self.rows.push(TrajectoryRecord {
            iter: self.rows.len(),
            tau,
            energy,
            delta_theta_norm: delta,
            lambda,
            n_deflations,
            event,
        });
    }
}

/// Exact eigenvalues, ascending. Diagonal Hamiltonians use their diagonal;
/// others are diagonalized densely, up to the dense limit.
pub fn exact_spectrum(h: &PauliSum) -> Result<Vec<f64>> {
    if h.num_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            what: "qubits for exact diagonalization",
            value: h.num_qubits(),
            limit: MAX_DENSE_QUBITS,
        });
    }
    if let Some(d) = h.diagonal() {
        let mut v = d.to_vec();
        v.sort_by(f64::total_cmp);
        return Ok(v);
    }
    eigvalsh(&h.materialize_dense()?)
}

/// Evolve, record on convergence, deflate, reset parameters; repeat until
/// `num_states` new states are recorded or the step budget runs out.
/// `prior` entries penalize the Hamiltonian from the start.
pub fn run_spectrum(
    ansatz: &Ansatz,
    h: &PauliSum,
    config: &EngineConfig,
    prior: &[DeflationEntry],
) -> Result<SpectrumRun> {
    let engine = Engine::new(ansatz, h, config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = random_theta(ansatz.num_params(), &mut rng);
    let mut es = engine.state_at(initial.clone(), 0.0)?;
    if let Some(d) = prior
        .iter()
        .find(|d| d.state.num_qubits() != ansatz.num_qubits())
    {
        return Err(Error::validation(format!(
            "supplied eigenstate has {} qubits, ansatz has {}",
            d.state.num_qubits(),
            ansatz.num_qubits()
        )));
    }
    let mut deflations = prior.to_vec();
    let mut found = Vec::new();
    let mut rec = Recorder { rows: Vec::new() };
    let mut history: Vec<f64> = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut iterations = 0;
    let mut phase_start = 0;

    while found.len() < config.num_states && iterations < config.max_iterations {
        let out = engine.step_with_method(&es, &deflations)?;
        iterations += 1;
        if out.stalled {
            diagnostics.stalled_steps += 1;
        }
        let next = out.next;
        if (next.energy - es.energy).abs() < PLATEAU_TOL
            && next.last_delta_norm >= config.conv_threshold
        {
            diagnostics.plateau_drift_steps += 1;
        }
        es = next;
        history.push(es.last_delta_norm);
        rec.push(&es, deflations.len(), TrajectoryEvent::Step);

        if !detect_convergence(&history, config.conv_threshold, config.conv_window) {
            continue;
        }
        rec.push(&es, deflations.len(), TrajectoryEvent::Converged);
        let residual = h.eigen_residual(&es.state)?;
        log::info!(
            "state {} converged at step {iterations}: E = {:.10}, residual = {residual:.3e}",
            found.len(),
            es.energy
        );
        found.push(DiscoveredState {
            energy: es.energy,
            residual,
            iterations: iterations - phase_start,
            discovered_at_iteration: iterations,
        });
        let (entry, theta) = engine.deflate_current(&es, iterations, &initial, &mut rng);
        deflations.push(entry);
        rec.push_values(
            es.tau,
            es.energy,
            f64::NAN,
            f64::NAN,
            deflations.len(),
            TrajectoryEvent::Deflated,
        );
        history.clear();
        phase_start = iterations;
        if found.len() < config.num_states {
            let jump = theta
                .iter()
                .zip(&es.theta)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            es = engine.state_at(theta, es.tau)?;
            let event = match config.reset_mode {
                ResetMode::Rerandomize => TrajectoryEvent::Rerandomized,
                ResetMode::Reset => TrajectoryEvent::Reset,
            };
            rec.push_values(es.tau, es.energy, jump, f64::NAN, deflations.len(), event);
        }
    }

    let complete = found.len() >= config.num_states;
    if !complete {
        log::warn!(
            "step budget of {} exhausted after {} of {} states",
            config.max_iterations,
            found.len(),
            config.num_states
        );
    }
    let mut energies: Vec<f64> = found.iter().map(|s| s.energy).collect();
    energies.sort_by(f64::total_cmp);
    let oracle_energies = if config.oracle && h.num_qubits() <= MAX_DENSE_QUBITS {
        Some(exact_spectrum(h)?)
    } else {
        None
    };
    let oracle_levels = oracle_energies
        .as_ref()
        .map(|e| group_degeneracies(e, config.degeneracy_tol));
    let report = SpectrumReport {
        levels: group_degeneracies(&energies, config.degeneracy_tol),
        states: found,
        oracle_energies,
        oracle_levels,
        complete,
        total_iterations: iterations,
        num_qubits: ansatz.num_qubits(),
        num_params: ansatz.num_params(),
        diagnostics,
        config: config.clone(),
    };
    Ok(SpectrumRun {
        report,
        trajectory: rec.rows,
        deflations: deflations.split_off(prior.len()),
        final_state: es,
    })
}

/// Ground-state residuals reached by imaginary-time evolution and by
/// gradient descent from the same seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodComparison {
    pub seeds: Vec<u64>,
    pub imaginary_residuals: Vec<f64>,
    pub gradient_residuals: Vec<f64>,
    pub imaginary_energies: Vec<f64>,
    pub gradient_energies: Vec<f64>,
    pub imaginary_median: f64,
    pub gradient_median: f64,
    /// Fraction of runs ending with residual above `eigen_tol`.
    pub imaginary_non_eigenstate_fraction: f64,
    pub gradient_non_eigenstate_fraction: f64,
    pub eigen_tol: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    match s.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => s[n / 2],
        n => 0.5 * (s[n / 2 - 1] + s[n / 2]),
    }
}

/// Runs both methods for one state from each seed. A run that exhausts its
/// budget contributes the residual of its final parameters.
pub fn compare_methods(
    ansatz: &Ansatz,
    h: &PauliSum,
    base: &EngineConfig,
    seeds: &[u64],
    eigen_tol: f64,
) -> Result<MethodComparison> {
    let one = |method: Method, seed: u64| -> Result<(f64, f64)> {
        let cfg = EngineConfig {
            method,
            seed,
            num_states: 1,
            oracle: false,
            ..base.clone()
        };
        let run = run_spectrum(ansatz, h, &cfg, &[])?;
        match run.report.states.first() {
            Some(s) => Ok((s.residual, s.energy)),
            None => Ok((
                h.eigen_residual(&run.final_state.state)?,
                run.final_state.energy,
            )),
        }
    };
    let results: Vec<((f64, f64), (f64, f64))> = seeds
        .par_iter()
        .map(|&s| Ok((one(Method::Imaginary, s)?, one(Method::Gradient, s)?)))
        .collect::<Result<_>>()?;
    let (imag, grad): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let frac = |r: &[(f64, f64)]| {
        r.iter().filter(|x| x.0 > eigen_tol).count() as f64 / r.len().max(1) as f64
    };
    let res = |r: &[(f64, f64)]| r.iter().map(|x| x.0).collect::<Vec<_>>();
    let en = |r: &[(f64, f64)]| r.iter().map(|x| x.1).collect::<Vec<_>>();
    Ok(MethodComparison {
        seeds: seeds.to_vec(),
        imaginary_median: median(&res(&imag)),
        gradient_median: median(&res(&grad)),
        imaginary_non_eigenstate_fraction: frac(&imag),
        gradient_non_eigenstate_fraction: frac(&grad),
        imaginary_residuals: res(&imag),
        gradient_residuals: res(&grad),
        imaginary_energies: en(&imag),
        gradient_energies: en(&grad),
        eigen_tol,
    })
}
