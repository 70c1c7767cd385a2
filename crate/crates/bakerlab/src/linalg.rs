//! Dense complex linear algebra on column-major buffers.
//!
//! Thin wrappers over BLAS/LAPACK (zgemm, zgees, zgeqp3/zungqr) plus the
//! handful of vector helpers the rest of the crate needs. Matrices are
//! column-major so LAPACK calls work on the buffers directly.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("lapack {routine} failed with info={info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Dense column-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CMat({}x{})", self.rows, self.cols)
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let ncols = cols.len();
        assert!(ncols > 0);
        let rows = cols[0].len();
        let mut data = Vec::with_capacity(rows * ncols);
        for c in cols {
            assert_eq!(c.len(), rows);
            data.extend_from_slice(c);
        }
        Self { rows, cols: ncols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn col(&self, c: usize) -> &[C64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [C64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Columns `lo..hi` as a new matrix.
    pub fn col_range(&self, lo: usize, hi: usize) -> CMat {
        assert!(lo <= hi && hi <= self.cols);
        CMat {
            rows: self.rows,
            cols: hi - lo,
            data: self.data[lo * self.rows..hi * self.rows].to_vec(),
        }
    }

    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn conj_in_place(&mut self) {
        for z in &mut self.data {
            *z = z.conj();
        }
    }

    pub fn scale(&mut self, alpha: C64) {
        for z in &mut self.data {
            *z *= alpha;
        }
    }

    /// self += alpha * other
    pub fn axpy(&mut self, alpha: C64, other: &CMat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (z, w) in self.data.iter_mut().zip(other.data.iter()) {
            *z += alpha * w;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |A - A^dagger|, zero for Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for c in 0..self.cols {
            for r in 0..=c {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![ZERO; self.rows];
        unsafe {
            blas::zgemv(
                b'N',
                self.rows as i32,
                self.cols as i32,
                ONE,
                &self.data,
                self.rows as i32,
                x,
                1,
                ZERO,
                &mut y,
                1,
            );
        }
        y
    }

    /// adjoint(self) * x
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![ZERO; self.cols];
        unsafe {
            blas::zgemv(
                b'C',
                self.rows as i32,
                self.cols as i32,
                ONE,
                &self.data,
                self.rows as i32,
                x,
                1,
                ZERO,
                &mut y,
                1,
            );
        }
        y
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[c * self.rows + r]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[c * self.rows + r]
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Op {
    None,
    Adjoint,
}

impl Op {
    fn flag(self) -> u8 {
        match self {
            Op::None => b'N',
            Op::Adjoint => b'C',
        }
    }
}

/// op(a) * op(b) via zgemm.
pub fn matmul(a: &CMat, opa: Op, b: &CMat, opb: Op) -> CMat {
    let (m, k1) = match opa {
        Op::None => (a.rows, a.cols),
        Op::Adjoint => (a.cols, a.rows),
    };
    let (k2, n) = match opb {
        Op::None => (b.rows, b.cols),
        Op::Adjoint => (b.cols, b.rows),
    };
    assert_eq!(k1, k2, "inner dimensions must agree");
    let mut c = CMat::zeros(m, n);
    unsafe {
        blas::zgemm(
            opa.flag(),
            opb.flag(),
            m as i32,
            n as i32,
            k1 as i32,
            ONE,
            &a.data,
            a.rows as i32,
            &b.data,
            b.rows as i32,
            ZERO,
            &mut c.data,
            m as i32,
        );
    }
    c
}

/// Schur factorization A = Z T Z^dagger of a square complex matrix (zgees).
///
/// Returns the eigenvalues (diagonal of T) and the unitary Z. For a normal
/// matrix T is diagonal to machine precision, so the columns of Z are
/// orthonormal eigenvectors; callers are expected to verify residuals.
pub fn schur(a: &CMat) -> Result<(Vec<C64>, CMat), LinalgError> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let ni = n as i32;
    let mut work_a = a.data.clone();
    let mut w = vec![ZERO; n];
    let mut vs = CMat::zeros(n, n);
    let mut sdim = 0i32;
    let lwork = (8 * n.max(1)) as i32;
    let mut work = vec![ZERO; lwork as usize];
    let mut rwork = vec![0.0f64; n.max(1)];
    let mut bwork = vec![0i32; n.max(1)];
    let mut info = 0i32;
    unsafe {
        lapack::zgees(
            b'V', b'N', None, ni, &mut work_a, ni, &mut sdim, &mut w, &mut vs.data, ni,
            &mut work, lwork, &mut rwork, &mut bwork, &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "zgees", info });
    }
    Ok((w, vs))
}

/// Column-pivoted QR (zgeqp3). Returns the explicit Q (m x kmax), the
/// absolute values of the R diagonal, and the pivot order (0-based).
pub fn pivoted_qr(a: &CMat, kmax: usize) -> Result<(CMat, Vec<f64>, Vec<usize>), LinalgError> {
    let (m, n) = (a.rows, a.cols);
    let k = kmax.min(m.min(n));
    let mut work_a = a.data.clone();
    let mut jpvt = vec![0i32; n];
    let mut tau = vec![ZERO; m.min(n)];
    let lwork = ((n + 1) * 64).max(1) as i32;
    let mut work = vec![ZERO; lwork as usize];
    let mut rwork = vec![0.0f64; 2 * n.max(1)];
    let mut info = 0i32;
    unsafe {
        lapack::zgeqp3(
            m as i32, n as i32, &mut work_a, m as i32, &mut jpvt, &mut tau, &mut work, lwork,
            &mut rwork, &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "zgeqp3", info });
    }
    let rdiag: Vec<f64> = (0..m.min(n)).map(|i| work_a[i * m + i].norm()).collect();
    let pivots: Vec<usize> = jpvt.iter().map(|&p| (p - 1) as usize).collect();
    let mut info = 0i32;
    unsafe {
        lapack::zungqr(
            m as i32,
            k as i32,
            k as i32,
            &mut work_a,
            m as i32,
            &tau,
            &mut work,
            lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "zungqr", info });
    }
    work_a.truncate(m * k);
    Ok((CMat { rows: m, cols: k, data: work_a }, rdiag, pivots))
}

/// Unpivoted QR with the phase fix that makes the R diagonal positive.
/// Applied to an iid complex-gaussian square matrix this samples the Haar
/// measure on U(n).
pub fn qr_haar_fix(a: &CMat) -> Result<CMat, LinalgError> {
    let (m, n) = (a.rows, a.cols);
    assert!(m >= n);
    let mut work_a = a.data.clone();
    let mut tau = vec![ZERO; n];
    let lwork = ((n + 1) * 64).max(1) as i32;
    let mut work = vec![ZERO; lwork as usize];
    let mut info = 0i32;
    unsafe {
        lapack::zgeqrf(m as i32, n as i32, &mut work_a, m as i32, &mut tau, &mut work, lwork, &mut info);
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "zgeqrf", info });
    }
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = work_a[i * m + i];
            if d.norm() == 0.0 { ONE } else { d / d.norm() }
        })
        .collect();
    let mut info = 0i32;
    unsafe {
        lapack::zungqr(m as i32, n as i32, n as i32, &mut work_a, m as i32, &tau, &mut work, lwork, &mut info);
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "zungqr", info });
    }
    let mut q = CMat { rows: m, cols: n, data: work_a };
    for j in 0..n {
        let ph = phases[j];
        for z in q.col_mut(j) {
            *z *= ph;
        }
    }
    Ok(q)
}

/// Operator 2-norm (largest singular value) by power iteration on A^dagger A.
/// Deterministic start vector; geometric convergence is plenty for the
/// defect-sized thresholds this backs.
pub fn spectral_norm(a: &CMat) -> f64 {
    let n = a.cols;
    if n == 0 || a.rows == 0 {
        return 0.0;
    }
    // fixed pseudo-random start so runs are reproducible
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            let x = ((i as f64 + 1.0) * 0.754877666).fract() - 0.5;
            let y = ((i as f64 + 1.0) * 0.569840296).fract() - 0.5;
            C64::new(x + 0.1, y)
        })
        .collect();
    normalize(&mut v);
    let mut lambda = 0.0f64;
    for _ in 0..500 {
        let w = a.matvec(&v);
        let mut u = a.adjoint_matvec(&w);
        let new_lambda = norm2(&u);
        if new_lambda == 0.0 {
            return 0.0;
        }
        for z in &mut u {
            *z /= new_lambda;
        }
        let delta = (new_lambda - lambda).abs();
        v = u;
        lambda = new_lambda;
        if delta <= 1e-13 * lambda.max(1e-300) {
            break;
        }
    }
    lambda.sqrt()
}

pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(x: &mut [C64]) {
    let n = norm2(x);
    if n > 0.0 {
        for z in x.iter_mut() {
            *z /= n;
        }
    }
}

/// Modified Gram-Schmidt on the given columns, in place.
pub fn mgs_orthonormalize(cols: &mut [Vec<C64>]) {
    for i in 0..cols.len() {
        for j in 0..i {
            let (left, right) = cols.split_at_mut(i);
            let proj = dot(&left[j], &right[0]);
            for (z, w) in right[0].iter_mut().zip(left[j].iter()) {
                *z -= proj * w;
            }
        }
        normalize(&mut cols[i]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn matmul_identity() {
        let a = CMat::from_fn(3, 3, |r, c| C64::new((r * 3 + c) as f64, 0.3 * r as f64));
        let i = CMat::identity(3);
        assert!(matmul(&a, Op::None, &i, Op::None).max_abs_diff(&a) < 1e-15);
        // adjoint flags: (A^H A) is Hermitian
        let h = matmul(&a, Op::Adjoint, &a, Op::None);
        assert!(h.hermitian_defect() < 1e-12);
    }

    #[test]
    fn schur_of_unitary_gives_unit_modulus_eigenvalues() {
        // 4x4 DFT is unitary with eigenvalues in {1,-1,i,-i}
        let n = 4usize;
        let f = CMat::from_fn(n, n, |r, c| {
            let ph = -2.0 * std::f64::consts::PI * (r * c) as f64 / n as f64;
            C64::new(ph.cos(), ph.sin()) / (n as f64).sqrt()
        });
        let (w, z) = schur(&f).unwrap();
        for lam in &w {
            assert!(approx(lam.norm(), 1.0, 1e-12));
        }
        let ztz = matmul(&z, Op::Adjoint, &z, Op::None);
        assert!(ztz.max_abs_diff(&CMat::identity(n)) < 1e-12);
    }

    #[test]
    fn pivoted_qr_recovers_rank() {
        // rank-2 matrix from two independent columns repeated
        let c1: Vec<C64> = (0..6).map(|i| C64::new(1.0 + i as f64, 0.2)).collect();
        let c2: Vec<C64> = (0..6).map(|i| C64::new((i as f64).sin(), -0.1 * i as f64)).collect();
        let mut c3 = c1.clone();
        for (z, w) in c3.iter_mut().zip(c2.iter()) {
            *z = *z * C64::new(0.5, 0.0) + w;
        }
        let a = CMat::from_columns(&[c1, c2, c3]);
        let (q, rdiag, _piv) = pivoted_qr(&a, 3).unwrap();
        assert!(rdiag[2] < 1e-10 * rdiag[0]);
        let qtq = matmul(&q, Op::Adjoint, &q, Op::None);
        assert!(qtq.max_abs_diff(&CMat::identity(3)) < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_known_case() {
        // diag(3, 1, 0.5) has operator norm 3
        let mut a = CMat::zeros(3, 3);
        a[(0, 0)] = C64::new(3.0, 0.0);
        a[(1, 1)] = C64::new(1.0, 0.0);
        a[(2, 2)] = C64::new(0.5, 0.0);
        assert!(approx(spectral_norm(&a), 3.0, 1e-9));
    }

    #[test]
    fn mgs_produces_orthonormal_set() {
        let mut cols: Vec<Vec<C64>> = (0..3)
            .map(|j| {
                (0..5)
                    .map(|i| {
                        C64::new(
                            ((i * i + 3 * j * i) as f64 * 0.17).sin() + 0.5,
                            ((i + 2 * j) as f64 * 0.43).cos(),
                        )
                    })
                    .collect()
            })
            .collect();
        mgs_orthonormalize(&mut cols);
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&cols[i], &cols[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(approx(d.re, expect, 1e-12) && approx(d.im, 0.0, 1e-12));
            }
        }
    }
}
