//! Dense Hermitian eigendecomposition and degeneracy grouping.
//!
//! [`eigh`] reduces the matrix to real symmetric tridiagonal form with
//! complex Householder reflections, then diagonalizes the tridiagonal with
//! implicit-shift QL. [`eigh_jacobi`] is an independent cyclic Jacobi solver
//! for small matrices, kept as a cross-check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dense dimension accepted (12 qubits).
pub const MAX_DENSE_DIM: usize = 4096;

/// Hermiticity tolerance on `max |A - A^dagger|`.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major, Hermitian within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::validation(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        if dim > MAX_DENSE_DIM {
            return Err(Error::Capacity {
                what: "matrix dimension",
                value: dim,
                limit: MAX_DENSE_DIM,
            });
        }
        let m = HermitianMatrix { dim, entries };
        let dev = m.hermiticity_error();
        if !(dev < HERMITIAN_TOL) {
            return Err(Error::validation(format!(
                "matrix is not Hermitian (max |A - A^dagger| = {dev:e})"
            )));
        }
        Ok(m)
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn from_real_symmetric(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub(crate) fn add_to(&mut self, row: usize, col: usize, v: Complex64) {
        self.entries[row * self.dim + col] += v;
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                if !(d <= worst) {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| {
                self.entries[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `self + alpha |v><v|`.
    pub fn add_projector(&mut self, v: &[Complex64], alpha: f64) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::validation(format!(
                "projector of length {} on a {}-dimensional matrix",
                v.len(),
                self.dim
            )));
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.entries[i * self.dim + j] += alpha * v[i] * v[j].conj();
            }
        }
        Ok(())
    }
}

/// Eigenvalues ascending with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]`; its largest-magnitude component is
    /// real and positive.
    pub vectors: Vec<Vec<Complex64>>,
}

pub fn eigh(a: &HermitianMatrix) -> Result<Eigen> {
    let (values, vectors) = tridiagonal_eigen(a, true)?;
    Ok(finish(values, vectors.expect("vectors requested")))
}

/// Eigenvalues only, ascending. Skips the `O(n^3)` vector accumulation.
pub fn eigvalsh(a: &HermitianMatrix) -> Result<Vec<f64>> {
    let (mut values, _) = tridiagonal_eigen(a, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigendecomposition of a real symmetric matrix stored row-major.
/// Returns eigenvalues ascending and real eigenvectors (`vectors[k]`).
pub fn symmetric_eigen(dim: usize, entries: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let h = HermitianMatrix::from_real_symmetric(dim, entries)?;
    let e = eigh(&h)?;
    // Real input keeps every reflection, phase and rotation real.
    let vectors = e
        .vectors
        .into_iter()
        .map(|v| v.into_iter().map(|z| z.re).collect())
        .collect();
    Ok((e.values, vectors))
}

/// Cyclic Jacobi eigensolver for Hermitian matrices up to dimension 64.
pub fn eigh_jacobi(a: &HermitianMatrix) -> Result<Eigen> {
    let n = a.dim;
    if n > 64 {
        return Err(Error::Capacity {
            what: "Jacobi dimension",
            value: n,
            limit: 64,
        });
    }
    let mut m = a.entries.clone();
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = ONE;
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut converged = n < 2;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale * n as f64 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let (app, aqq) = (m[p * n + p].re, m[q * n + q].re);
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on (p, q).
                let u00 = Complex64::new(c, 0.0);
                let u01 = Complex64::new(s, 0.0);
                let u10 = -s * phase.conj();
                let u11 = c * phase.conj();
                for k in 0..n {
                    let (x, y) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = x * u00 + y * u10;
                    m[k * n + q] = x * u01 + y * u11;
                }
                for k in 0..n {
                    let (x, y) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = u00.conj() * x + u10.conj() * y;
                    m[q * n + k] = u01.conj() * x + u11.conj() * y;
                }
                m[p * n + q] = ZERO;
                m[q * n + p] = ZERO;
                for k in 0..n {
                    let (x, y) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = x * u00 + y * u10;
                    v[k * n + q] = x * u01 + y * u11;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numeric("Jacobi iteration did not converge".into()));
    }
    let values = (0..n).map(|i| m[i * n + i].re).collect();
    let vectors = (0..n)
        .map(|k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    Ok(finish(values, vectors))
}

fn finish(values: Vec<f64>, vectors: Vec<Vec<Complex64>>) -> Eigen {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let values = order.iter().map(|&i| values[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = vectors[i].clone();
            fix_phase(&mut v);
            v
        })
        .collect();
    Eigen { values, vectors }
}

fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let ph = v[best].conj() / v[best].norm();
        v.iter_mut().for_each(|z| *z *= ph);
        v[best] = Complex64::new(v[best].re, 0.0);
    }
}

type Vectors = Vec<Vec<Complex64>>;

/// Householder tridiagonalization followed by implicit QL.
/// Returns unsorted eigenvalues and, when requested, eigenvectors.
fn tridiagonal_eigen(
    a: &HermitianMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Vectors>)> {
    let n = a.dim;
    if n == 0 {
        return Ok((vec![], want_vectors.then(Vec::new)));
    }
    if a.entries
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let mut m = a.entries.clone();
    let mut q = if want_vectors {
        let mut q = vec![ZERO; n * n];
        for i in 0..n {
            q[i * n + i] = ONE;
        }
        Some(q)
    } else {
        None
    };

    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let len = n - lo;
        let tail: f64 = (lo + 1..n).map(|i| m[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = m[lo * n + k];
        let xnorm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let vv = &mut v[..len];
        for (t, i) in (lo..n).enumerate() {
            vv[t] = m[i * n + k];
        }
        vv[0] -= alpha;
        let vnorm2: f64 = vv.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = tau * A22 v ; K = tau/2 * v^dagger p ; w = p - K v
        let pp = &mut p[..len];
        for (r, i) in (lo..n).enumerate() {
            let row = &m[i * n + lo..i * n + n];
            pp[r] = tau
                * row
                    .iter()
                    .zip(vv.iter())
                    .map(|(x, y)| x * y)
                    .sum::<Complex64>();
        }
        let vp: Complex64 = vv.iter().zip(pp.iter()).map(|(x, y)| x.conj() * y).sum();
        let kk = 0.5 * tau * vp.re;
        for r in 0..len {
            pp[r] -= kk * vv[r];
        }
        // A22 -= v w^dagger + w v^dagger
        for (r, i) in (lo..n).enumerate() {
            let (vr, wr) = (vv[r], pp[r]);
            let row = &mut m[i * n + lo..i * n + n];
            for (c, z) in row.iter_mut().enumerate() {
                *z -= vr * pp[c].conj() + wr * vv[c].conj();
            }
        }
        m[lo * n + k] = alpha;
        m[k * n + lo] = alpha.conj();
        for i in lo + 1..n {
            m[i * n + k] = ZERO;
            m[k * n + i] = ZERO;
        }
        if let Some(q) = q.as_mut() {
            // Q[:, lo..] -= tau (Q[:, lo..] v) v^dagger
            for row in 0..n {
                let qr = &mut q[row * n + lo..row * n + n];
                let s: Complex64 = qr.iter().zip(vv.iter()).map(|(x, y)| x * y).sum();
                let s = tau * s;
                for (z, vc) in qr.iter_mut().zip(vv.iter()) {
                    *z -= s * vc.conj();
                }
            }
        }
    }

    let mut d: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for i in 0..n - 1 {
        let sub = m[(i + 1) * n + i];
        let r = sub.norm();
        e[i] = r;
        phases[i + 1] = if r == 0.0 {
            phases[i]
        } else {
            phases[i] * (sub / r)
        };
    }

    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    tridiagonal_ql(&mut d, &mut e, z.as_deref_mut())?;

    let vectors = match (q, z) {
        (Some(q), Some(z)) => {
            // eigenvector k = Q D z[:, k]
            let mut out = Vec::with_capacity(n);
            let mut dz = vec![ZERO; n];
            for k in 0..n {
                for j in 0..n {
                    dz[j] = phases[j] * z[j * n + k];
                }
                let col: Vec<Complex64> = (0..n)
                    .map(|i| {
                        q[i * n..(i + 1) * n]
                            .iter()
                            .zip(dz.iter())
                            .map(|(a, b)| a * b)
                            .sum()
                    })
                    .collect();
                out.push(col);
            }
            Some(out)
        }
        _ => None,
    };
    Ok((d, vectors))
}

/// Implicit-shift QL on a symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i + 1`; `e[n-1]` is ignored).
/// Rotations are accumulated into the row-major `z` when given.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numeric(
                    "tridiagonal QL did not converge in 60 iterations".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// One energy level: the mean of a cluster of nearby values and its size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: usize,
}

/// Tolerance used to merge nearby energies into one degenerate level.
pub const DEGENERACY_TOL: f64 = 5e-3;

/// Greedy left-to-right clustering of ascending `values`: a value joins the
/// current group when it lies within `tol` of the group's running mean.
pub fn group_degeneracies(values: &[f64], tol: f64) -> Vec<Level> {
    let mut out: Vec<Level> = Vec::new();
    let mut sum = 0.0;
    for &v in values {
        match out.last_mut() {
            Some(level) if (v - level.energy).abs() <= tol => {
                sum += v;
                level.degeneracy += 1;
                level.energy = sum / level.degeneracy as f64;
            }
            _ => {
                sum = v;
                out.push(Level {
                    energy: v,
                    degeneracy: 1,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let mut e = vec![ZERO; n * n];
        for i in 0..n {
            e[i * n + i] = c(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                e[i * n + j] = z;
                e[j * n + i] = z.conj();
            }
        }
        HermitianMatrix::new(n, e).unwrap()
    }

    fn check_decomposition(a: &HermitianMatrix, eig: &Eigen) {
        let n = a.dim();
        let scale = a.max_abs().max(1.0);
        for (lam, v) in eig.values.iter().zip(&eig.vectors) {
            let av = a.mul_vec(v);
            let res: f64 = av
                .iter()
                .zip(v)
                .map(|(x, y)| (x - lam * y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-9 * scale * n as f64, "residual {res}");
        }
        for i in 0..n {
            for j in 0..n {
                let ip: Complex64 = eig.vectors[i]
                    .iter()
                    .zip(&eig.vectors[j])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-9, "orthonormality {i} {j}: {ip}");
            }
        }
        // reconstruction A = V L V^dagger
        for r in 0..n {
            for col in 0..n {
                let s: Complex64 = (0..n)
                    .map(|k| eig.values[k] * eig.vectors[k][r] * eig.vectors[k][col].conj())
                    .sum();
                assert!((s - a.get(r, col)).norm() < 1e-8);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pauli_z_and_x() {
        let z = HermitianMatrix::new(2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap();
        let e = eigh(&z).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        let x = HermitianMatrix::new(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let e = eigh(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // |-> with phase fixed so the largest (first, on ties) component is positive.
        assert!((e.vectors[0][0] - c(h, 0.)).norm() < 1e-12);
        assert!((e.vectors[0][1] - c(-h, 0.)).norm() < 1e-12);
        assert!((e.vectors[1][0] - c(h, 0.)).norm() < 1e-12);
        assert!((e.vectors[1][1] - c(h, 0.)).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let r = HermitianMatrix::new(2, vec![c(0., 0.), c(1., 0.), c(2., 0.), c(0., 0.)]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn random_matrices_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 5, 8, 17, 64, 256] {
            let a = random_hermitian(n, &mut rng);
            let e = eigh(&a).unwrap();
            check_decomposition(&a, &e);
            let vals = eigvalsh(&a).unwrap();
            for (x, y) in vals.iter().zip(&e.values) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_agrees_with_householder_ql() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 4, 9, 32] {
            let a = random_hermitian(n, &mut rng);
            let j = eigh_jacobi(&a).unwrap();
            check_decomposition(&a, &j);
            let h = eigh(&a).unwrap();
            for (x, y) in j.values.iter().zip(&h.values) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // diag(1,1,1,0) conjugated by a Householder-like unitary stays degenerate.
        let mut a = HermitianMatrix::zeros(4);
        for i in 0..3 {
            a.add_to(i, i, ONE);
        }
        let v = [c(0.5, 0.), c(0.5, 0.1), c(-0.5, 0.), c(0.4, -0.3)];
        a.add_projector(&v, 2.0).unwrap();
        let e = eigh(&a).unwrap();
        check_decomposition(&a, &e);
    }

    #[test]
    fn symmetric_eigen_is_real() {
        let m = [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(3, &m).unwrap();
        let s2 = 2f64.sqrt();
        for (x, y) in vals.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((x - y).abs() < 1e-12);
        }
        for (lam, v) in vals.iter().zip(&vecs) {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| m[i * 3 + j] * v[j]).sum();
                assert!((av - lam * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deflated_eigenvector_shifts_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(8, &mut rng);
        let e = eigh(&a).unwrap();
        let mut b = a.clone();
        b.add_projector(&e.vectors[0], 10.0).unwrap();
        let mut want: Vec<f64> = e.values[1..].to_vec();
        want.push(e.values[0] + 10.0);
        want.sort_by(f64::total_cmp);
        let got = eigh(&b).unwrap().values;
        for (x, y) in got.iter().zip(&want) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn grouping_examples() {
        assert_eq!(
            group_degeneracies(&[0.0, 1.0, 1.0, 2.0], 5e-3),
            vec![
                Level {
                    energy: 0.0,
                    degeneracy: 1
                },
                Level {
                    energy: 1.0,
                    degeneracy: 2
                },
                Level {
                    energy: 2.0,
                    degeneracy: 1
                },
            ]
        );
        let g = group_degeneracies(&[0.0, 0.004], 5e-3);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].degeneracy, 2);
        assert!((g[0].energy - 0.002).abs() < 1e-15);
        assert_eq!(group_degeneracies(&[0.0, 0.006], 5e-3).len(), 2);
        assert!(group_degeneracies(&[], 5e-3).is_empty());
    }
}
