//! Fast invariant suite behind `vqspec verify`.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqspec_core::hamiltonian::deflate_dense;
use vqspec_core::linalg::{eigh, eigvalsh};
use vqspec_core::swaptest::{conventional_swap, hadamard_test, shallow_swap_overlap};
use vqspec_core::varqite::{assemble_m, assemble_v, random_theta, Tikhonov};
use vqspec_core::{
    Ansatz, Complex64, DerivativeMode, Engine, EngineConfig, Pauli, PauliSum, PauliTerm,
    StateVector,
};

pub struct Property {
    pub name: &'static str,
    pub outcome: Result<String, String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub flip_v_sign: bool,
}

type Check = fn(&mut ChaCha8Rng, VerifyOptions) -> Result<String, String>;

pub fn run_all(opts: VerifyOptions) -> Vec<Property> {
    let checks: [(&'static str, Check); 6] = [
        ("swap-test identities", swap_identities),
        ("Hadamard-test identity", hadamard_identity),
        ("finite-difference vs analytic derivatives", derivatives),
        ("Tikhonov vs normal equations", tikhonov_oracle),
        ("deflation spectrum shift", deflation_shift),
        ("monotonic energy decay", monotonicity),
    ];
    checks
        .iter()
        .enumerate()
        .map(|(k, (name, f))| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
            Property {
                name,
                outcome: f(&mut rng, opts),
            }
        })
        .collect()
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut s = StateVector::from_amplitudes(amps).expect("valid dimension");
    s.normalize().expect("nonzero state");
    s
}

fn random_pauli_sum(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> PauliSum {
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
            PauliTerm::new(rng.gen_range(-1.0..1.0), ops).expect("valid term")
        })
        .collect();
    PauliSum::new(n, ts).expect("valid sum")
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn swap_identities(rng: &mut ChaCha8Rng, _: VerifyOptions) -> Result<String, String> {
    let mut worst = 0.0f64;
    for k in 0..40 {
        let l = 1 + k % 3;
        let (a, b) = (random_state(l, rng), random_state(l, rng));
        let exact = a.inner_product(&b).map_err(|e| e.to_string())?.norm_sqr();
        let shallow = shallow_swap_overlap(&a, &b).map_err(|e| e.to_string())?;
        let conv = conventional_swap(&a, &b).map_err(|e| e.to_string())?;
        let d = (shallow.overlap_estimate - exact)
            .abs()
            .max((2.0 * conv.p_ancilla_0 - 1.0 - exact).abs());
        check(d < 1e-12, || format!("pair {k}: deviation {d:.1e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("40 pairs, max deviation {worst:.1e}"))
}

fn hadamard_identity(rng: &mut ChaCha8Rng, _: VerifyOptions) -> Result<String, String> {
    let mut worst = 0.0f64;
    for k in 0..20 {
        let a = Ansatz::lowdepth(3, 1 + k).map_err(|e| e.to_string())?;
        let th = random_theta(a.num_params(), rng);
        let amp = a.evaluate(&th).map_err(|e| e.to_string())?.amplitudes()[0];
        let re = hadamard_test(&a, &th, 0.0).map_err(|e| e.to_string())?;
        let im = -hadamard_test(&a, &th, FRAC_PI_2).map_err(|e| e.to_string())?;
        let d = (Complex64::new(re, im) - amp).norm();
        check(d < 1e-12, || format!("circuit {k}: deviation {d:.1e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("20 circuits, max deviation {worst:.1e}"))
}

fn derivatives(rng: &mut ChaCha8Rng, _: VerifyOptions) -> Result<String, String> {
    let mut worst = 0.0f64;
    for n in 1..=4 {
        let a = Ansatz::compact(n, 4).map_err(|e| e.to_string())?;
        let th: Vec<f64> = (0..a.num_params())
            .map(|_| rng.gen_range(0.0..TAU))
            .collect();
        let fd = a
            .derivatives(&th, DerivativeMode::default())
            .map_err(|e| e.to_string())?;
        let an = a
            .derivatives(&th, DerivativeMode::Analytic)
            .map_err(|e| e.to_string())?;
        for (x, y) in fd.iter().zip(&an) {
            for (u, v) in x.components.iter().zip(&y.components) {
                worst = worst.max((u - v).norm());
            }
        }
    }
    check(worst < 1e-7, || {
        format!("componentwise deviation {worst:.1e}")
    })?;
    Ok(format!("max componentwise deviation {worst:.1e}"))
}

/// `(M^2 + lambda I) x = M v` by Cholesky.
fn normal_equations(m: &[f64], v: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let n = v.len();
    let mm = DMatrix::from_row_slice(n, n, m);
    let lhs = &mm * &mm + DMatrix::identity(n, n) * lambda;
    let rhs = &mm * DVector::from_column_slice(v);
    Some(lhs.cholesky()?.solve(&rhs).iter().copied().collect())
}

fn tikhonov_oracle(rng: &mut ChaCha8Rng, _: VerifyOptions) -> Result<String, String> {
    let mut worst = 0.0f64;
    for n in 1..=20 {
        let cols = n + rng.gen_range(0..=n);
        let b: Vec<f64> = (0..n * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = (0..cols).map(|k| b[i * cols + k] * b[j * cols + k]).sum();
            }
        }
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let system = Tikhonov::new(&m, &v).map_err(|e| e.to_string())?;
        let lambda = system.select_lambda(1e-4, 1e-2);
        check((1e-4..=1e-2).contains(&lambda), || {
            format!("n = {n}: lambda {lambda:e} outside the grid")
        })?;
        let x = system.solve(lambda).map_err(|e| e.to_string())?;
        let y = normal_equations(&m, &v, lambda).ok_or("oracle factorization failed")?;
        let diff = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let rel = diff / y.iter().map(|b| b * b).sum::<f64>().sqrt();
        check(rel < 1e-9, || format!("n = {n}: relative error {rel:.1e}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("20 systems, max relative error {worst:.1e}"))
}

fn deflation_shift(rng: &mut ChaCha8Rng, _: VerifyOptions) -> Result<String, String> {
    let alpha = 10.0;
    let mut worst = 0.0f64;
    for k in 0..5 {
        let h = random_pauli_sum(3, 8, rng)
            .materialize_dense()
            .map_err(|e| e.to_string())?;
        let eig = eigh(&h).map_err(|e| e.to_string())?;
        let ground =
            StateVector::from_amplitudes(eig.vectors[0].clone()).map_err(|e| e.to_string())?;
        let deflated = deflate_dense(&h, &[ground], &[alpha]).map_err(|e| e.to_string())?;
        let got = eigvalsh(&deflated).map_err(|e| e.to_string())?;
        let mut want = eig.values.clone();
        want[0] += alpha;
        want.sort_by(f64::total_cmp);
        let d = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        check(d < 1e-9, || format!("matrix {k}: deviation {d:.1e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("5 matrices, max deviation {worst:.1e}"))
}

/// Imaginary-time steps never raise the energy. The step is assembled by
/// hand so the force can be sign-flipped as a mutation check.
fn monotonicity(rng: &mut ChaCha8Rng, opts: VerifyOptions) -> Result<String, String> {
    let ansatz = Ansatz::compact(3, 4).map_err(|e| e.to_string())?;
    let config = EngineConfig::default();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..3 {
        let h = random_pauli_sum(3, 6, rng);
        let engine = Engine::new(&ansatz, &h, config.clone()).map_err(|e| e.to_string())?;
        let mut theta = random_theta(ansatz.num_params(), rng);
        let mut energy = engine
            .state_at(theta.clone(), 0.0)
            .map_err(|e| e.to_string())?
            .energy;
        for step in 0..20 {
            let state = ansatz.evaluate(&theta).map_err(|e| e.to_string())?;
            let derivs = ansatz
                .derivatives(&theta, config.derivative)
                .map_err(|e| e.to_string())?;
            let m = assemble_m(&derivs).map_err(|e| e.to_string())?;
            let mut v = assemble_v(&derivs, &state, &h, &[]).map_err(|e| e.to_string())?;
            if opts.flip_v_sign {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let system = Tikhonov::new(&m, &v).map_err(|e| e.to_string())?;
            let lambda = system.select_lambda(config.lambda_min, config.lambda_max);
            let theta_dot = system.solve(lambda).map_err(|e| e.to_string())?;
            for (t, d) in theta.iter_mut().zip(&theta_dot) {
                *t += config.dtau * d;
            }
            let next = engine
                .state_at(theta.clone(), 0.0)
                .map_err(|e| e.to_string())?
                .energy;
            let rise = next - energy;
            check(rise <= 1e-6, || {
                format!("hamiltonian {k}, step {step}: energy rose by {rise:.1e}")
            })?;
            worst = worst.max(rise);
            energy = next;
        }
    }
    Ok(format!("60 steps, largest change {worst:.1e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_suite_passes() {
        for p in run_all(VerifyOptions::default()) {
            assert!(p.outcome.is_ok(), "{}: {:?}", p.name, p.outcome);
        }
    }

    #[test]
    fn sign_flip_breaks_monotonicity_only() {
        let props = run_all(VerifyOptions {
            seed: 0,
            flip_v_sign: true,
        });
        for p in props {
            assert_eq!(
                p.outcome.is_ok(),
                p.name != "monotonic energy decay",
                "{}",
                p.name
            );
        }
    }
}
