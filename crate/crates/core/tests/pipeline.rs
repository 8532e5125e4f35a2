//! End-to-end use of the public API: text inputs in, spectra out.

use vqspec_core::varqite::{exact_spectrum, run_spectrum};
use vqspec_core::{Ansatz, DerivativeMode, EngineConfig, PauliSum, SatFormula};

#[test]
fn text_hamiltonian_spectrum_matches_exact_levels() {
    let h = PauliSum::parse("qubits 2\n1.0 Z0\n0.5 Z1\n0.2 X0 X1\n").unwrap();
    let exact = exact_spectrum(&h).unwrap();
    let ansatz = Ansatz::compact(2, 7).unwrap();
    let config = EngineConfig {
        num_states: 3,
        conv_threshold: 1e-3,
        ..EngineConfig::default()
    };
    let run = run_spectrum(&ansatz, &h, &config, &[]).unwrap();
    assert!(run.report.complete);
    for s in &run.report.states {
        let err = exact
            .iter()
            .map(|e| (e - s.energy).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            err < 2e-2,
            "energy {} is {err:e} from the exact spectrum",
            s.energy
        );
    }
    assert_eq!(run.report.oracle_energies.as_deref(), Some(&exact[..]));
    for (i, a) in run.deflations.iter().enumerate() {
        for b in &run.deflations[i + 1..] {
            assert!(a.state.inner_product(&b.state).unwrap().norm_sqr() < 1e-3);
        }
    }
}

#[test]
fn dimacs_instance_has_its_violation_counts_as_spectrum() {
    let f = SatFormula::parse_dimacs("c two clauses\np cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n").unwrap();
    let exact = exact_spectrum(&f.to_hamiltonian().unwrap()).unwrap();
    // 000 and 111 each violate one clause; the other six satisfy both.
    assert_eq!(exact, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
}

#[test]
fn custom_ansatz_text_supports_both_derivative_modes() {
    let a =
        Ansatz::parse("qubits 2\nparams 3\nRY q0 p0\nRY q1 p1\nCZ q0 q1\nCRY q0 q1 p2\n").unwrap();
    let theta = [0.3, -1.1, 2.0];
    let fd = a.derivatives(&theta, DerivativeMode::default()).unwrap();
    let an = a.derivatives(&theta, DerivativeMode::Analytic).unwrap();
    for (x, y) in fd.iter().zip(&an) {
        for (u, v) in x.components.iter().zip(&y.components) {
            assert!((u - v).norm() < 1e-7);
        }
    }
}
