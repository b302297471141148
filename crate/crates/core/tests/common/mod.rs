//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's linear algebra: the oracle works on
//! plain nested vectors so that agreement is evidence, not tautology.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<C64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with independent uniform real and imaginary parts in [-1, 1).
pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Dense {
    (0..rows)
        .map(|_| (0..cols).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect()
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `M = A·A⁺`.
pub fn gram(a: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[i].iter().zip(&a[j]).map(|(x, y)| x * y.conj()).sum()).collect())
        .collect()
}

fn matvec(m: &Dense, v: &[C64]) -> Vec<C64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of a Hermitian positive semidefinite matrix by power iteration
/// with Hotelling deflation, largest first.
///
/// Each eigenpair is iterated until the residual `‖Mv − μv‖` falls below
/// `1e-14·‖M‖` or the iteration budget runs out; the Rayleigh quotient then
/// carries roughly twice the digits of the vector.
pub fn power_deflation_eigenvalues(m: &Dense) -> Vec<f64> {
    let n = m.len();
    let scale = frobenius(m).max(f64::MIN_POSITIVE);
    let mut work = m.clone();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // deterministic start vector with components on every axis
        let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.1 * i as f64, 0.05 * (i + k) as f64)).collect();
        let nv = vnorm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        let mut mu = 0.0;
        for _ in 0..200_000 {
            let w = matvec(&work, &v);
            mu = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum::<C64>().re;
            let resid = w.iter().zip(&v).map(|(a, b)| (a - b * mu).norm_sqr()).sum::<f64>().sqrt();
            let nw = vnorm(&w);
            if nw <= 1e-300 {
                mu = 0.0;
                break;
            }
            v = w.into_iter().map(|z| z / nw).collect();
            if resid <= 1e-14 * scale {
                break;
            }
        }
        out.push(mu.max(0.0));
        for i in 0..n {
            for j in 0..n {
                work[i][j] -= v[i] * v[j].conj() * mu;
            }
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Schmidt weights of `a` (any scale) from the eigenvalues of `A·A⁺`.
pub fn oracle_weights(a: &Dense) -> Vec<f64> {
    let ev = power_deflation_eigenvalues(&gram(a));
    let total: f64 = ev.iter().sum();
    ev.into_iter().map(|x| x / total).collect()
}

/// Orthonormalized columns of a random complex matrix (Gram–Schmidt), i.e. a
/// random unitary.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    let g = random_dense(rng, n, n);
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for j in 0..n {
        let mut v: Vec<C64> = (0..n).map(|i| g[i][j]).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nv = vnorm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        cols.push(v);
    }
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

pub fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..p).map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}
