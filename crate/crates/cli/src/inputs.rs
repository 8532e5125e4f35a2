use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqspec_core::hamiltonian::generate_unique_3sat;
use vqspec_core::{Ansatz, DeflationEntry, Error, PauliSum, SatFormula};

use crate::args::{AnsatzArgs, AnsatzKind, SatSpec, SourceArgs};
use crate::eigenstate;
use crate::error::{CliError, CliResult};

/// Rejection-sampling budget for generated instances.
pub const GEN3SAT_ATTEMPTS: usize = 100_000;

/// A loaded Hamiltonian and where it came from.
#[derive(Debug, Clone)]
pub struct Source {
    /// Short name used in output directory names.
    pub name: String,
    /// Path or generator arguments, for reports.
    pub origin: String,
    pub hamiltonian: PauliSum,
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn stem(path: &Path) -> String {
    let s = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into());
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn load_pauli(path: &Path) -> CliResult<Source> {
    let text = read_text(path)?;
    let hamiltonian = PauliSum::parse(&text).map_err(|e| CliError::input(path, e))?;
    Ok(Source {
        name: stem(path),
        origin: path.display().to_string(),
        hamiltonian,
    })
}

pub fn load_cnf(path: &Path) -> CliResult<Source> {
    let text = read_text(path)?;
    let formula = SatFormula::parse_dimacs(&text).map_err(|e| CliError::input(path, e))?;
    let hamiltonian = formula
        .to_hamiltonian()
        .map_err(|e| CliError::input(path, e))?;
    Ok(Source {
        name: stem(path),
        origin: path.display().to_string(),
        hamiltonian,
    })
}

/// Single-solution instance from the seeded generator. Running out of
/// attempts is reported as a budget failure.
pub fn generate(spec: SatSpec, max_attempts: usize) -> CliResult<SatFormula> {
    if !(3..=20).contains(&spec.vars) {
        return Err(CliError::Usage(format!(
            "variable count must lie in 3..=20, got {}",
            spec.vars
        )));
    }
    if spec.clauses == 0 {
        return Err(CliError::Usage("clause count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    generate_unique_3sat(spec.vars, spec.clauses, &mut rng, max_attempts).map_err(|e| match e {
        Error::Configuration(msg) => CliError::Budget(msg),
        other => CliError::Core(other),
    })
}

pub fn load_sources(args: &SourceArgs) -> CliResult<Vec<Source>> {
    if let Some(path) = &args.cnf {
        return Ok(vec![load_cnf(path)?]);
    }
    if let Some(spec) = args.random3sat {
        let formula = generate(spec, GEN3SAT_ATTEMPTS)?;
        return Ok(vec![Source {
            name: format!("random3sat-{}-{}-{}", spec.vars, spec.clauses, spec.seed),
            origin: format!("random3sat {}:{}:{}", spec.vars, spec.clauses, spec.seed),
            hamiltonian: formula.to_hamiltonian()?,
        }]);
    }
    args.pauli.iter().map(|p| load_pauli(p)).collect()
}

/// Builds the requested ansatz for an `n`-qubit Hamiltonian.
pub fn build_ansatz(args: &AnsatzArgs, n: usize) -> CliResult<Ansatz> {
    match args.ansatz {
        AnsatzKind::Compact => Ok(Ansatz::compact(n, args.params_per_qubit)?),
        AnsatzKind::Lowdepth => Ok(Ansatz::lowdepth(n, args.params.unwrap_or(7 * n))?),
        AnsatzKind::Custom => {
            let path: &PathBuf = args
                .ansatz_file
                .as_ref()
                .ok_or_else(|| CliError::Usage("--ansatz custom needs --ansatz-file".into()))?;
            let ansatz = Ansatz::parse(&read_text(path)?).map_err(|e| CliError::input(path, e))?;
            if ansatz.num_qubits() != n {
                return Err(CliError::input(
                    path,
                    Error::Validation(format!(
                        "ansatz acts on {} qubits but the Hamiltonian has {n}",
                        ansatz.num_qubits()
                    )),
                ));
            }
            Ok(ansatz)
        }
    }
}

/// Eigenstates from earlier runs, deflated with strength `alpha`.
pub fn load_deflations(
    paths: &[PathBuf],
    h: &PauliSum,
    alpha: f64,
) -> CliResult<Vec<DeflationEntry>> {
    paths
        .iter()
        .map(|p| {
            let state = eigenstate::read(p)?;
            if state.num_qubits() != h.num_qubits() {
                return Err(CliError::input(
                    p,
                    Error::Validation(format!(
                        "state has {} qubits but the Hamiltonian has {}",
                        state.num_qubits(),
                        h.num_qubits()
                    )),
                ));
            }
            let energy = h.expectation(&state)?;
            Ok(DeflationEntry {
                state,
                alpha,
                energy,
                discovered_at_iteration: 0,
            })
        })
        .collect()
}
