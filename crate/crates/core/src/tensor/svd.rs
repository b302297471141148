use num_complex::Complex64 as C64;

use super::CMatrix;
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Singular value decomposition `A = U·S·V`.
///
/// `u` has orthonormal columns, `v` has orthonormal rows and
/// `singular_values` is non-negative and non-increasing. Note that `v` is the
/// right factor itself (what is usually written `V⁺`), so row `k` of `v` is
/// the k-th right singular vector as it appears in `A = Σ s_k u_k v_k`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    /// Rebuilds `U·S·V` from the leading `rank` terms.
    pub fn reconstruct(&self, rank: usize) -> CMatrix {
        let n = self.u.rows();
        let m = self.v.cols();
        let r = rank.min(self.singular_values.len());
        let mut out = CMatrix::zeros(n, m);
        for k in 0..r {
            let s = self.singular_values[k];
            let vk = self.v.row(k);
            for i in 0..n {
                let a = self.u[(i, k)] * s;
                if a == ZERO {
                    continue;
                }
                for (j, b) in vk.iter().enumerate() {
                    out[(i, j)] += a * b;
                }
            }
        }
        out
    }
}

/// Column-major scratch matrix: column `j` is `data[j*n..(j+1)*n]`.
struct Cols {
    n: usize,
    data: Vec<C64>,
}

impl Cols {
    fn identity(n: usize) -> Self {
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = ONE;
        }
        Cols { n, data }
    }

    fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    fn pair_mut(&mut self, i: usize, j: usize) -> (&mut [C64], &mut [C64]) {
        debug_assert!(i != j);
        let n = self.n;
        if i < j {
            let (a, b) = self.data.split_at_mut(j * n);
            (&mut a[i * n..(i + 1) * n], &mut b[..n])
        } else {
            let (a, b) = self.data.split_at_mut(i * n);
            (&mut b[..n], &mut a[j * n..(j + 1) * n])
        }
    }

    /// Real plane rotation of columns `i`, `j`:
    /// `x_i ← c·x_i + s·x_j`, `x_j ← −s·x_i + c·x_j`.
    fn rotate(&mut self, i: usize, j: usize, c: f64, s: f64) {
        let (xi, xj) = self.pair_mut(i, j);
        for (a, b) in xi.iter_mut().zip(xj.iter_mut()) {
            let t = *a * c + *b * s;
            *b = *b * c - *a * s;
            *a = t;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        let (xi, xj) = self.pair_mut(i, j);
        xi.swap_with_slice(xj);
    }
}

/// Hermitian Householder reflector `H = I − β·w·w⁺` with `H·x = α·e₁`.
struct Reflector {
    w: Vec<C64>,
    beta: f64,
    alpha: C64,
}

impl Reflector {
    /// `None` when `x` already has the form `α·e₁`.
    fn new(x: &[C64]) -> Option<Reflector> {
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            return None;
        }
        let head = x[0].norm();
        let norm = (head * head + tail).sqrt();
        let phase = if head > 0.0 { x[0] / head } else { ONE };
        let alpha = -phase * norm;
        let mut w = x.to_vec();
        w[0] -= alpha;
        let wn: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        Some(Reflector { w, beta: 2.0 / wn, alpha })
    }

    /// `y ← H·y` for a vector with the reflector's length.
    fn apply(&self, y: &mut [C64]) {
        let s: C64 = self.w.iter().zip(y.iter()).map(|(w, y)| w.conj() * y).sum();
        if s == ZERO {
            return;
        }
        let f = s * self.beta;
        for (y, w) in y.iter_mut().zip(&self.w) {
            *y -= f * w;
        }
    }
}

/// Singular value decomposition of a square complex matrix.
///
/// Householder reflections reduce `A` to upper bidiagonal form, diagonal
/// phase matrices make the bidiagonal real, and implicit-shift QR sweeps
/// (Golub–Kahan, with the deflation logic of LINPACK's `dsvdc`) diagonalize
/// it. All rotations after the phase step are real and are accumulated into
/// the complex singular vectors directly.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    if let Some((row, col)) = a.find_non_finite() {
        return Err(Error::NonFiniteEntry { row, col });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Svd { u: CMatrix::zeros(0, 0), singular_values: vec![], v: CMatrix::zeros(0, 0) });
    }

    let mut work = Cols { n, data: vec![ZERO; n * n] };
    for i in 0..n {
        for j in 0..n {
            work.data[j * n + i] = a[(i, j)];
        }
    }

    let (d, e, mut u, mut v) = bidiagonalize(work);
    let (s, e) = make_real(&d, &e, &mut u, &mut v);
    let s = diagonalize(s, e, &mut u, &mut v)?;

    let u_out = CMatrix::from_fn(n, n, |i, k| u.col(k)[i]);
    let v_out = CMatrix::from_fn(n, n, |k, j| v.col(k)[j].conj());
    Ok(Svd { u: u_out, singular_values: s, v: v_out })
}

/// `A = U·B·V⁺` with `B` upper bidiagonal (diagonal `d`, superdiagonal `e`).
fn bidiagonalize(mut a: Cols) -> (Vec<C64>, Vec<C64>, Cols, Cols) {
    let n = a.n;
    let mut d = vec![ZERO; n];
    let mut e = vec![ZERO; n.saturating_sub(1)];
    let mut left: Vec<Option<Reflector>> = Vec::with_capacity(n);
    let mut right: Vec<Option<Reflector>> = Vec::with_capacity(n);
    let mut t = vec![ZERO; n];

    for k in 0..n {
        // column k, rows k..n
        let h = Reflector::new(&a.col(k)[k..]);
        match &h {
            Some(h) => {
                for c in k + 1..n {
                    h.apply(&mut a.col_mut(c)[k..]);
                }
                d[k] = h.alpha;
            }
            None => d[k] = a.col(k)[k],
        }
        left.push(h);

        if k + 1 >= n {
            right.push(None);
            continue;
        }
        // row k, columns k+1..n; reflect the conjugated row so that
        // row_k · P = conj(α)·e₁ᵀ
        let row: Vec<C64> = (k + 1..n).map(|j| a.col(j)[k].conj()).collect();
        let h = if k + 2 < n { Reflector::new(&row) } else { None };
        match &h {
            Some(h) => {
                // rows r > k:  row_r ← row_r − β (row_r · z) z⁺
                let t = &mut t[k + 1..n];
                t.iter_mut().for_each(|x| *x = ZERO);
                for (jj, z) in h.w.iter().enumerate() {
                    let col = a.col(k + 1 + jj);
                    for (x, y) in t.iter_mut().zip(&col[k + 1..]) {
                        *x += y * z;
                    }
                }
                for (jj, z) in h.w.iter().enumerate() {
                    let f = z.conj() * h.beta;
                    let col = a.col_mut(k + 1 + jj);
                    for (y, x) in col[k + 1..].iter_mut().zip(t.iter()) {
                        *y -= x * f;
                    }
                }
                e[k] = h.alpha.conj();
            }
            None => e[k] = a.col(k + 1)[k],
        }
        right.push(h);
    }

    // U = H_0 H_1 … H_{n-1},  V = P_0 P_1 … P_{n-3}
    let mut u = Cols::identity(n);
    for k in (0..n).rev() {
        if let Some(h) = &left[k] {
            for c in k..n {
                h.apply(&mut u.col_mut(c)[k..]);
            }
        }
    }
    let mut v = Cols::identity(n);
    for k in (0..n).rev() {
        if let Some(h) = &right[k] {
            for c in k + 1..n {
                h.apply(&mut v.col_mut(c)[k + 1..]);
            }
        }
    }
    (d, e, u, v)
}

/// Rephases rows and columns so the bidiagonal becomes real and
/// non-negative, folding the phases into `u` and `v`.
fn make_real(d: &[C64], e: &[C64], u: &mut Cols, v: &mut Cols) -> (Vec<f64>, Vec<f64>) {
    let n = d.len();
    let mut s = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut r = ONE;
    for i in 0..n {
        if r != ONE {
            v.col_mut(i).iter_mut().for_each(|x| *x *= r);
        }
        let x = d[i] * r;
        let m = x.norm();
        let l = if m > 0.0 { x / m } else { ONE };
        if l != ONE {
            u.col_mut(i).iter_mut().for_each(|y| *y *= l);
        }
        s[i] = m;
        if i + 1 < n {
            let y = l.conj() * e[i];
            let my = y.norm();
            r = if my > 0.0 { y.conj() / my } else { ONE };
            sup[i] = my;
        }
    }
    (s, sup)
}

/// Implicit-shift QR on the real bidiagonal `(s, e)`.
fn diagonalize(mut s: Vec<f64>, mut e: Vec<f64>, u: &mut Cols, v: &mut Cols) -> Result<Vec<f64>> {
    let n = s.len();
    let eps = f64::EPSILON;
    let tiny = 2f64.powi(-966);
    let max_iter = 75 * n.max(1);
    let mut iter_total = 0usize;
    let mut p = n;

    while p > 0 {
        iter_total += 1;
        if iter_total > max_iter {
            return Err(Error::Convergence(format!(
                "SVD did not converge after {max_iter} QR iterations (n = {n})"
            )));
        }

        // Locate the active block. kase:
        // 1: s[p-1] negligible, 2: s[k] negligible, 3: QR step, 4: converged.
        let mut k = p as isize - 2;
        while k >= 0 {
            let ku = k as usize;
            if e[ku].abs() <= tiny + eps * (s[ku].abs() + s[ku + 1].abs()) {
                e[ku] = 0.0;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p as isize - 2 {
            kase = 4;
        } else {
            let mut ks = p as isize - 1;
            while ks > k {
                let ksu = ks as usize;
                let t = (if ksu != p { e[ksu].abs() } else { 0.0 })
                    + (if ks != k + 1 { e[ksu - 1].abs() } else { 0.0 });
                if s[ksu].abs() <= tiny + eps * t {
                    s[ksu] = 0.0;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p as isize - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        let k = (k + 1) as usize;

        match kase {
            1 => {
                let mut f = e[p - 2];
                e[p - 2] = 0.0;
                for j in (k..=p - 2).rev() {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != k {
                        f = -sn * e[j - 1];
                        e[j - 1] *= cs;
                    }
                    v.rotate(j, p - 1, cs, sn);
                }
            }
            2 => {
                let mut f = e[k - 1];
                e[k - 1] = 0.0;
                for j in k..p {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] *= cs;
                    u.rotate(j, k - 1, cs, sn);
                }
            }
            3 => {
                let scale = s[p - 1]
                    .abs()
                    .max(s[p - 2].abs())
                    .max(e[p - 2].abs())
                    .max(s[k].abs())
                    .max(e[k].abs());
                let sp = s[p - 1] / scale;
                let spm1 = s[p - 2] / scale;
                let epm1 = e[p - 2] / scale;
                let sk = s[k] / scale;
                let ek = e[k] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = 0.0;
                if b != 0.0 || c != 0.0 {
                    shift = (b * b + c).sqrt();
                    if b < 0.0 {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                for j in k..p - 1 {
                    let t = f.hypot(g);
                    let cs = f / t;
                    let sn = g / t;
                    if j != k {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] *= cs;
                    v.rotate(j, j + 1, cs, sn);

                    let t = f.hypot(g);
                    let cs = f / t;
                    let sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] *= cs;
                    u.rotate(j, j + 1, cs, sn);
                }
                e[p - 2] = f;
            }
            _ => {
                let mut k = k;
                if s[k] <= 0.0 {
                    s[k] = if s[k] < 0.0 { -s[k] } else { 0.0 };
                    v.col_mut(k).iter_mut().for_each(|x| *x = -*x);
                }
                while k + 1 < n && s[k] < s[k + 1] {
                    s.swap(k, k + 1);
                    v.swap(k, k + 1);
                    u.swap(k, k + 1);
                    k += 1;
                }
                p -= 1;
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn check(a: &CMatrix, tol: f64) -> Svd {
        let r = svd(a).unwrap();
        let n = a.rows();
        let rec = r.reconstruct(n).sub(a).unwrap().frobenius_norm();
        assert!(rec <= tol * a.frobenius_norm().max(1e-300), "reconstruction {rec}");
        let uu = r.u.adjoint().matmul(&r.u).unwrap().sub(&CMatrix::identity(n)).unwrap().max_abs();
        let vv = r.v.matmul(&r.v.adjoint()).unwrap().sub(&CMatrix::identity(n)).unwrap().max_abs();
        assert!(uu < 1e-12 && vv < 1e-12, "orthonormality {uu} {vv}");
        assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(r.singular_values.iter().all(|&x| x >= 0.0));
        r
    }

    #[test]
    fn signs_absorbed_into_modes() {
        let a = CMatrix::from_real(2, 2, &[2.0, 0.0, 0.0, -1.0]).unwrap();
        let r = check(&a, 1e-15);
        assert_eq!(r.singular_values, vec![2.0, 1.0]);
    }

    #[test]
    fn rank_one_outer_product() {
        let x = [c(0.6, 0.0), c(0.0, 0.8)];
        let y = [c(0.0, 1.0 / 2f64.sqrt()), c(1.0 / 2f64.sqrt(), 0.0)];
        let a = CMatrix::from_fn(2, 2, |i, j| x[i] * y[j]);
        let r = check(&a, 1e-14);
        assert!((r.singular_values[0] - 1.0).abs() < 1e-15);
        assert!(r.singular_values[1].abs() < 1e-15);
    }

    #[test]
    fn trivial_sizes() {
        let a = CMatrix::from_rows(&[vec![c(0.0, -3.0)]]).unwrap();
        let r = check(&a, 1e-15);
        assert_eq!(r.singular_values, vec![3.0]);
        let z = CMatrix::zeros(4, 4);
        let r = svd(&z).unwrap();
        assert!(r.singular_values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn structured_matrices() {
        // Hilbert-like, ill-conditioned
        let h = CMatrix::from_fn(12, 12, |i, j| c(1.0 / (i + j + 1) as f64, 0.0));
        check(&h, 1e-13);
        // complex Toeplitz
        let t = CMatrix::from_fn(9, 9, |i, j| {
            let d = i as f64 - j as f64;
            c((-d * d / 4.0).exp(), 0.3 * d)
        });
        check(&t, 1e-13);
        // repeated singular values
        let mut q = CMatrix::zeros(6, 6);
        for i in 0..6 {
            q[(i, 5 - i)] = c(0.0, 1.0);
        }
        let r = check(&q, 1e-14);
        assert!(r.singular_values.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn non_square_rejected() {
        assert!(svd(&CMatrix::zeros(2, 3)).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(1, 1)] = c(f64::INFINITY, 0.0);
        assert!(matches!(svd(&m), Err(Error::NonFiniteEntry { row: 1, col: 1 })));
    }
}
