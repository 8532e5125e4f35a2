//! Binary eigenstate files: an 8-byte magic, the qubit count as a
//! little-endian `u64`, then `2^n` amplitudes as interleaved little-endian
//! `f64` real and imaginary parts.

use std::fs;
use std::path::Path;

use vqspec_core::{Complex64, Error, StateVector};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 8] = b"VQSPECSV";

/// Largest tolerated deviation of a loaded state's norm from one.
const NORM_TOL: f64 = 1e-8;

pub fn encode(state: &StateVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 16 * state.dim());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(state.num_qubits() as u64).to_le_bytes());
    for a in state.amplitudes() {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> vqspec_core::Result<StateVector> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(Error::Validation(
            "not an eigenstate file (bad magic)".into(),
        ));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    if n == 0 || n > vqspec_core::statevec::MAX_QUBITS as u64 {
        return Err(Error::Capacity {
            what: "num_qubits",
            value: n as usize,
            limit: vqspec_core::statevec::MAX_QUBITS,
        });
    }
    let dim = 1usize << n;
    let body = &bytes[16..];
    if body.len() != 16 * dim {
        return Err(Error::Validation(format!(
            "expected {} amplitude bytes for {n} qubits, found {}",
            16 * dim,
            body.len()
        )));
    }
    let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let amps = (0..dim)
        .map(|k| Complex64::new(f(2 * k), f(2 * k + 1)))
        .collect();
    let mut state = StateVector::from_amplitudes(amps)?;
    let norm = state.norm();
    let normalized = (norm - 1.0).abs() <= NORM_TOL;
    if !normalized {
        return Err(Error::Validation(format!("state norm {norm} is not 1")));
    }
    state.normalize()?;
    Ok(state)
}

pub fn write(path: &Path, state: &StateVector) -> CliResult<()> {
    fs::write(path, encode(state)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> CliResult<StateVector> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|e| CliError::input(path, e))
}
