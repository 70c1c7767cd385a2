//! The Balazs-Voros unitary B_N = F_N^{-1} diag(F_{N/2}, F_{N/2}): fast
//! factorized application, dense powers, and the full spectral decomposition.

use crate::interval::AngleInterval;
use crate::linalg::{self, matmul, norm2, CMat, C64, Op};
use crate::torus::{dft_matrix, fft_plan};
use rustfft::Fft;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BakerError {
    #[error("the Balazs-Voros quantization requires N in 2N (even), got N={0}")]
    OddDimension(usize),
    #[error("dimension mismatch: operator is {expected}, vector is {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigensolve residual {residual:.3e} exceeds 1e-8 at eigenvector {index}")]
    ResidualTooLarge { index: usize, residual: f64 },
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad spectral dump: {0}")]
    BadDump(String),
}

/// Factorized form of B_N; unitary, applied in O(N log N) per step.
pub struct BvOperator {
    n: usize,
    fwd_full: Arc<dyn Fft<f64>>,
    inv_full: Arc<dyn Fft<f64>>,
    fwd_half: Arc<dyn Fft<f64>>,
    inv_half: Arc<dyn Fft<f64>>,
}

impl BvOperator {
    pub fn new(n: usize) -> Result<Self, BakerError> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(BakerError::OddDimension(n));
        }
        Ok(Self {
            n,
            fwd_full: fft_plan(n, false),
            inv_full: fft_plan(n, true),
            fwd_half: fft_plan(n / 2, false),
            inv_half: fft_plan(n / 2, true),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// One application of B: block DFTs on the halves, then F_N^{-1}.
    fn one_step(&self, v: &mut [C64]) {
        let n = self.n;
        let h = n / 2;
        let sh = 1.0 / (h as f64).sqrt();
        self.fwd_half.process(&mut v[..h]);
        self.fwd_half.process(&mut v[h..]);
        for z in v.iter_mut() {
            *z *= sh;
        }
        self.inv_full.process(v);
        let sn = 1.0 / (n as f64).sqrt();
        for z in v.iter_mut() {
            *z *= sn;
        }
    }

    /// One application of B^dagger = diag(F^dagger, F^dagger) F_N.
    fn one_step_adjoint(&self, v: &mut [C64]) {
        let n = self.n;
        let h = n / 2;
        let sn = 1.0 / (n as f64).sqrt();
        self.fwd_full.process(v);
        for z in v.iter_mut() {
            *z *= sn;
        }
        let sh = 1.0 / (h as f64).sqrt();
        self.inv_half.process(&mut v[..h]);
        self.inv_half.process(&mut v[h..]);
        for z in v.iter_mut() {
            *z *= sh;
        }
    }

    /// B^power v by |power| factorized applications (adjoint for power < 0).
    pub fn apply(&self, v: &[C64], power: i64) -> Result<Vec<C64>, BakerError> {
        if v.len() != self.n {
            return Err(BakerError::DimensionMismatch { expected: self.n, got: v.len() });
        }
        let mut out = v.to_vec();
        if power >= 0 {
            for _ in 0..power {
                self.one_step(&mut out);
            }
        } else {
            for _ in 0..(-power) {
                self.one_step_adjoint(&mut out);
            }
        }
        Ok(out)
    }

    /// Apply B^power to every column of a dense matrix in place.
    pub fn apply_to_columns(&self, m: &mut CMat, power: i64) {
        assert_eq!(m.rows(), self.n);
        let n = self.n;
        crate::par::for_each_chunk_mut(m.data_mut(), n, |_c, col| {
            if power >= 0 {
                for _ in 0..power {
                    self.one_step(col);
                }
            } else {
                for _ in 0..(-power) {
                    self.one_step_adjoint(col);
                }
            }
        });
    }

    /// Dense materialization of B^k (k=1 gives B itself).
    pub fn power_matrix(&self, k: i64) -> CMat {
        let mut m = CMat::identity(self.n);
        self.apply_to_columns(&mut m, k);
        m
    }

    pub fn dense(&self) -> CMat {
        self.power_matrix(1)
    }

    /// Full spectral decomposition via a Schur factorization. B is normal, so
    /// the Schur vectors are orthonormal eigenvectors; eigenvalue moduli are
    /// renormalized to 1, near-degenerate angle clusters (within 1e-8) are
    /// re-orthonormalized, and residuals above 1e-8 are a hard failure.
    pub fn spectral_decompose(&self) -> Result<SpectralData, BakerError> {
        let dense = self.dense();
        let (w, z) = linalg::schur(&dense)?;
        let n = self.n;
        let mut order: Vec<usize> = (0..n).collect();
        let angles_raw: Vec<f64> = w
            .iter()
            .map(|lam| {
                // principal argument with explicit wrap of negatives
                let a = lam.arg();
                if a < 0.0 { a + 2.0 * PI } else { a }
            })
            .collect();
        order.sort_by(|&a, &b| angles_raw[a].total_cmp(&angles_raw[b]));
        let angles: Vec<f64> = order.iter().map(|&j| angles_raw[j]).collect();
        let mut cols: Vec<Vec<C64>> = order.iter().map(|&j| z.col(j).to_vec()).collect();

        // re-orthonormalize clusters of nearly equal angles, including the
        // wrap-around pair at 0 / 2 pi
        let tol = 1e-8;
        let mut boundaries = vec![0usize];
        for i in 1..n {
            if angles[i] - angles[i - 1] >= tol {
                boundaries.push(i);
            }
        }
        boundaries.push(n);
        let wrapped = n > 1 && (angles[0] + 2.0 * PI - angles[n - 1]) < tol;
        for w in boundaries.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if wrapped && (lo == 0 || hi == n) {
                continue; // handled below as one merged cluster
            }
            if hi - lo > 1 {
                linalg::mgs_orthonormalize(&mut cols[lo..hi]);
            }
        }
        if wrapped {
            let first_hi = boundaries[1];
            let last_lo = boundaries[boundaries.len() - 2];
            let mut merged: Vec<Vec<C64>> = cols[last_lo..n].to_vec();
            merged.extend_from_slice(&cols[0..first_hi]);
            linalg::mgs_orthonormalize(&mut merged);
            for (i, c) in merged.iter().enumerate() {
                if i < n - last_lo {
                    cols[last_lo + i] = c.clone();
                } else {
                    cols[i - (n - last_lo)] = c.clone();
                }
            }
        }

        let vectors = CMat::from_columns(&cols);
        let sd = SpectralData { n, angles, vectors, max_residual: 0.0 };
        let mut worst = (0usize, 0.0f64);
        for j in 0..n {
            let r = sd.residual(self, j)?;
            if r > worst.1 {
                worst = (j, r);
            }
        }
        if worst.1 > 1e-8 {
            return Err(BakerError::ResidualTooLarge { index: worst.0, residual: worst.1 });
        }
        Ok(SpectralData { max_residual: worst.1, ..sd })
    }
}

/// Eigenangles on [0, 2 pi) (sorted) plus an orthonormal eigenvector system.
pub struct SpectralData {
    pub n: usize,
    pub angles: Vec<f64>,
    pub vectors: CMat,
    pub max_residual: f64,
}

impl SpectralData {
    fn residual(&self, op: &BvOperator, j: usize) -> Result<f64, BakerError> {
        let v = self.vectors.col(j);
        let bv = op.apply(v, 1)?;
        let lam = C64::from_polar(1.0, self.angles[j]);
        let diff: Vec<C64> = bv.iter().zip(v.iter()).map(|(a, b)| a - lam * b).collect();
        Ok(norm2(&diff))
    }

    /// Indices of eigenangles in the half-open window.
    pub fn indices_in(&self, window: &AngleInterval) -> Vec<usize> {
        (0..self.n).filter(|&j| window.contains(self.angles[j])).collect()
    }

    /// Minimum cyclic gap between consecutive eigenangles.
    pub fn min_angle_gap(&self) -> f64 {
        let n = self.n;
        if n < 2 {
            return 2.0 * PI;
        }
        let mut gap = self.angles[0] + 2.0 * PI - self.angles[n - 1];
        for i in 1..n {
            gap = gap.min(self.angles[i] - self.angles[i - 1]);
        }
        gap
    }

    /// Binary dump: magic "BVSD", version u32, N u64, N little-endian f64
    /// angles, then N^2 interleaved (re, im) f64 eigenvector entries in
    /// column-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), BakerError> {
        w.write_all(b"BVSD")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for a in &self.angles {
            w.write_all(&a.to_le_bytes())?;
        }
        for z in self.vectors.data() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, BakerError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"BVSD" {
            return Err(BakerError::BadDump("missing BVSD magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != 1 {
            return Err(BakerError::BadDump(format!("unsupported version {version}")));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let mut angles = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8)?;
            angles.push(f64::from_le_bytes(b8));
        }
        let mut vectors = CMat::zeros(n, n);
        for z in vectors.data_mut() {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            *z = C64::new(re, im);
        }
        Ok(SpectralData { n, angles, vectors, max_residual: f64::NAN })
    }
}

/// Conjugation to the momentum basis: F_N M F_N^{-1} (equal to M^T for
/// M = B_N).
pub fn to_momentum_basis(m: &CMat) -> CMat {
    let f = dft_matrix(m.rows());
    matmul(&matmul(&f, Op::None, m, Op::None), Op::None, &f, Op::Adjoint)
}

/// Inverse of [`to_momentum_basis`].
pub fn from_momentum_basis(m: &CMat) -> CMat {
    let f = dft_matrix(m.rows());
    matmul(&matmul(&f, Op::Adjoint, m, Op::None), Op::None, &f, Op::None)
}

/// Row index of the largest-modulus entry in each column.
pub fn column_argmax_rows(m: &CMat) -> Vec<usize> {
    (0..m.cols())
        .map(|c| {
            let col = m.col(c);
            (0..m.rows()).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn bv_requires_even_dimension() {
        assert!(matches!(BvOperator::new(3), Err(BakerError::OddDimension(3))));
        assert!(matches!(BvOperator::new(0), Err(BakerError::OddDimension(0))));
        assert!(BvOperator::new(2).is_ok());
    }

    #[test]
    fn bv2_is_hadamard() {
        let op = BvOperator::new(2).unwrap();
        let b = op.dense();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((b[(0, 0)].re - s).abs() < 1e-14);
        assert!((b[(0, 1)].re - s).abs() < 1e-14);
        assert!((b[(1, 0)].re - s).abs() < 1e-14);
        assert!((b[(1, 1)].re + s).abs() < 1e-14);
    }

    #[test]
    fn bv_unitary() {
        for n in [4usize, 100, 256] {
            let b = BvOperator::new(n).unwrap().dense();
            let prod = matmul(&b, Op::Adjoint, &b, Op::None);
            assert!(prod.max_abs_diff(&CMat::identity(n)) <= 1e-13, "n={n}");
        }
    }

    #[test]
    fn dense_matches_factorized_application() {
        let n = 100;
        let op = BvOperator::new(n).unwrap();
        let b = op.dense();
        let mut rng = crate::rng::stream(21);
        for _ in 0..20 {
            let v = crate::rng::complex_gaussian_vec(&mut rng, n);
            let via_dense = b.matvec(&v);
            let via_fft = op.apply(&v, 1).unwrap();
            let err: f64 =
                via_dense.iter().zip(via_fft.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-12);
        }
    }

    #[test]
    fn apply_power_zero_and_inverse() {
        let n = 64;
        let op = BvOperator::new(n).unwrap();
        let mut rng = crate::rng::stream(7);
        let v = crate::rng::complex_gaussian_vec(&mut rng, n);
        let same = op.apply(&v, 0).unwrap();
        assert_eq!(same, v);
        let back = op.apply(&op.apply(&v, 1).unwrap(), -1).unwrap();
        let err: f64 = back.iter().zip(v.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12);
    }

    #[test]
    fn first_row_identity_power_of_two() {
        // (B^k)_{0y} = 2^{-k/2} iff y is a multiple of N/2^k, else 0
        let n = 1024usize;
        let op = BvOperator::new(n).unwrap();
        let mut e0 = vec![ZERO; n];
        e0[0] = ONE;
        // first row of B^k equals conj(B^{dagger k} e_0)
        for k in 1..=6i64 {
            let row = op.apply(&e0, -k).unwrap();
            let stride = n >> k as usize;
            let target = 0.5f64.powf(k as f64 / 2.0);
            for (y, entry) in row.iter().enumerate() {
                let expect = if y % stride == 0 { target } else { 0.0 };
                assert!(
                    (entry.conj().norm() - expect).abs() <= 1e-10,
                    "k={k} y={y} got {} want {}",
                    entry.norm(),
                    expect
                );
            }
        }
        // spec instance: power=5 applied to e_0, entry 0 is 2^{-5/2}
        let fwd = op.apply(&e0, 5).unwrap();
        assert!((fwd[0] - C64::new(0.5f64.powf(2.5), 0.0)).norm() <= 1e-10);
    }

    #[test]
    fn power_matrix_consistency() {
        let n = 64;
        let op = BvOperator::new(n).unwrap();
        let b1 = op.power_matrix(1);
        assert!(b1.max_abs_diff(&op.dense()) == 0.0);
        let p2 = op.power_matrix(2);
        let p3 = op.power_matrix(3);
        let p5 = op.power_matrix(5);
        let prod = matmul(&p2, Op::None, &p3, Op::None);
        assert!(prod.max_abs_diff(&p5) <= 1e-9);
    }

    #[test]
    fn powers_trace_classical_map() {
        // argmax row per column tracks x = 2^k y mod N away from the
        // discontinuity strips (threshold frozen from an oracle run)
        let n = 100usize;
        let op = BvOperator::new(n).unwrap();
        let k = 3usize;
        let m = op.power_matrix(k as i64);
        let arg = column_argmax_rows(&m);
        let delta = 0.02;
        let mut good = 0usize;
        let mut total = 0usize;
        for y in 0..n {
            let frac = y as f64 / n as f64;
            let near_strip = (0..=(1 << k))
                .any(|j| (frac - j as f64 / (1 << k) as f64).abs() <= delta);
            if near_strip {
                continue;
            }
            total += 1;
            let target = (y << k) % n;
            let dist = arg[y].abs_diff(target);
            if dist.min(n - dist) <= 1 {
                good += 1;
            }
        }
        assert!(total > 50);
        assert!(good as f64 >= 0.9 * total as f64, "{good}/{total}");
    }

    #[test]
    fn spectral_decompose_small() {
        let op = BvOperator::new(2).unwrap();
        let sd = op.spectral_decompose().unwrap();
        assert!((sd.angles[0] - 0.0).abs() < 1e-12);
        assert!((sd.angles[1] - PI).abs() < 1e-12);
    }

    #[test]
    fn spectral_reconstruction_and_orthonormality() {
        let n = 128;
        let op = BvOperator::new(n).unwrap();
        let sd = op.spectral_decompose().unwrap();
        let u = &sd.vectors;
        let utu = matmul(u, Op::Adjoint, u, Op::None);
        assert!(utu.max_abs_diff(&CMat::identity(n)) <= 1e-8);
        // U diag(e^{i theta}) U^dagger reconstructs B
        let mut scaled = u.clone();
        for j in 0..n {
            let lam = C64::from_polar(1.0, sd.angles[j]);
            for z in scaled.col_mut(j) {
                *z *= lam;
            }
        }
        let recon = matmul(&scaled, Op::None, u, Op::Adjoint);
        assert!(recon.max_abs_diff(&op.dense()) <= 1e-7);
        assert!(sd.min_angle_gap() > 0.0);
        assert!(sd.max_residual <= 1e-8);
    }

    #[test]
    fn momentum_basis_is_transpose() {
        let op2 = BvOperator::new(2).unwrap().dense();
        let conj2 = to_momentum_basis(&op2);
        assert!(conj2.max_abs_diff(&op2.transpose()) <= 1e-12);
        let n = 64;
        let b = BvOperator::new(n).unwrap().dense();
        let conj = to_momentum_basis(&b);
        assert!(conj.max_abs_diff(&b.transpose()) <= 1e-10);
        // conjugating there and back returns the original
        let back = from_momentum_basis(&conj);
        assert!(back.max_abs_diff(&b) <= 1e-10);
    }

    #[test]
    fn spectral_dump_round_trip() {
        let op = BvOperator::new(16).unwrap();
        let sd = op.spectral_decompose().unwrap();
        let mut buf = Vec::new();
        sd.write_binary(&mut buf).unwrap();
        let sd2 = SpectralData::read_binary(&buf[..]).unwrap();
        assert_eq!(sd.n, sd2.n);
        assert_eq!(sd.angles, sd2.angles);
        assert_eq!(sd.vectors.data(), sd2.vectors.data());
    }
}
