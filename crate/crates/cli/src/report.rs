//! Merged run reports: a key-value text document and a JSON mirror.

use std::fmt::Write as _;

use serde::Serialize;
use vqspec_core::{DeflationEntry, Level, SpectrumReport};

/// One completed run of a sweep or repeat.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub hamiltonian: String,
    pub seed: u64,
    pub output_dir: String,
    pub ansatz: String,
    /// Largest `|<e_i|e_j>|^2` between states recorded in this run.
    pub max_pairwise_overlap: f64,
    /// Per state, distance to the nearest exact eigenvalue.
    pub oracle_errors: Option<Vec<f64>>,
    pub report: SpectrumReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct MergedReport {
    pub complete: bool,
    pub runs: Vec<RunSummary>,
}

pub fn max_pairwise_overlap(entries: &[DeflationEntry]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            let o = a
                .state
                .inner_product(&b.state)
                .map(|z| z.norm_sqr())
                .unwrap_or(f64::NAN);
            worst = worst.max(o);
        }
    }
    worst
}

pub fn oracle_errors(report: &SpectrumReport) -> Option<Vec<f64>> {
    let exact = report.oracle_energies.as_ref()?;
    Some(
        report
            .states
            .iter()
            .map(|s| {
                exact
                    .iter()
                    .map(|e| (e - s.energy).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect(),
    )
}

/// Fixed decimals with trailing zeros trimmed; negative zero prints as `0`.
pub fn format_energy(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Level listing, one `<energy> (x<degeneracy>)` per line. Positive energies
/// carry a `+` when the listing also has negative ones, so columns line up.
pub fn format_levels(levels: &[Level]) -> String {
    let energies: Vec<String> = levels.iter().map(|l| format_energy(l.energy)).collect();
    let signed = energies.iter().any(|e| e.starts_with('-'));
    let mut out = String::new();
    for (e, l) in energies.iter().zip(levels) {
        let plus = if signed && !e.starts_with('-') && e != "0" {
            "+"
        } else {
            ""
        };
        let _ = writeln!(out, "{plus}{e} (x{})", l.degeneracy);
    }
    out
}

fn sci(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.3e}")
    }
}

pub fn render_text(merged: &MergedReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "runs: {}", merged.runs.len());
    let _ = writeln!(out, "complete: {}", merged.complete);
    for run in &merged.runs {
        let r = &run.report;
        let c = &r.config;
        let _ = writeln!(out);
        let _ = writeln!(out, "[run {}]", run.name);
        let _ = writeln!(out, "hamiltonian: {}", run.hamiltonian);
        let _ = writeln!(out, "output_dir: {}", run.output_dir);
        let _ = writeln!(out, "seed: {}", run.seed);
        let _ = writeln!(out, "qubits: {}", r.num_qubits);
        let _ = writeln!(out, "ansatz: {} ({} params)", run.ansatz, r.num_params);
        let _ = writeln!(out, "method: {}", format!("{:?}", c.method).to_lowercase());
        let _ = writeln!(out, "dtau: {}", c.dtau);
        let _ = writeln!(out, "alpha: {}", c.alpha);
        let _ = writeln!(out, "conv_threshold: {}", c.conv_threshold);
        let _ = writeln!(out, "states_requested: {}", c.num_states);
        let _ = writeln!(out, "states_found: {}", r.states.len());
        let _ = writeln!(out, "complete: {}", r.complete);
        let _ = writeln!(out, "total_iterations: {}", r.total_iterations);
        let _ = writeln!(out, "stalled_steps: {}", r.diagnostics.stalled_steps);
        let _ = writeln!(
            out,
            "plateau_drift_steps: {}",
            r.diagnostics.plateau_drift_steps
        );
        let _ = writeln!(
            out,
            "max_pairwise_overlap: {}",
            sci(run.max_pairwise_overlap)
        );
        let _ = writeln!(
            out,
            "{:>5}  {:>18}  {:>10}  {:>10}  {:>10}  {:>11}",
            "state", "energy", "residual", "iterations", "found_at", "exact_error"
        );
        for (k, s) in r.states.iter().enumerate() {
            let err = run
                .oracle_errors
                .as_ref()
                .map(|e| sci(e[k]))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{k:>5}  {:>18.12}  {:>10}  {:>10}  {:>10}  {err:>11}",
                s.energy,
                sci(s.residual),
                s.iterations,
                s.discovered_at_iteration
            );
        }
        let _ = writeln!(out, "levels (tol {}):", c.degeneracy_tol);
        out.push_str(&indent(&format_levels(&r.levels)));
        if let Some(levels) = &r.oracle_levels {
            let _ = writeln!(out, "exact levels:");
            out.push_str(&indent(&format_levels(levels)));
        }
    }
    out
}

fn indent(block: &str) -> String {
    block.lines().map(|l| format!("  {l}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(energy: f64, degeneracy: usize) -> Level {
        Level { energy, degeneracy }
    }

    #[test]
    fn energies_are_trimmed() {
        assert_eq!(format_energy(1.0), "1");
        assert_eq!(format_energy(-0.0), "0");
        assert_eq!(format_energy(-1e-13), "0");
        assert_eq!(format_energy(0.25), "0.25");
        assert_eq!(format_energy(-2.5), "-2.5");
    }

    #[test]
    fn level_listing_examples() {
        assert_eq!(
            format_levels(&[lv(-1.0, 1), lv(1.0, 1)]),
            "-1 (x1)\n+1 (x1)\n"
        );
        assert_eq!(format_levels(&[lv(0.0, 7), lv(1.0, 1)]), "0 (x7)\n1 (x1)\n");
    }
}
