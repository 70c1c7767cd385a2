//! Torus Hilbert-space conventions: DFT, phase translations, Weyl
//! quantization of observables, torus coherent states, and the classical
//! baker dynamics with its cocycle phase.
//!
//! Dimension N means hbar = 1/(2*pi*N). All sign conventions are frozen:
//! the DFT matrix is (1/sqrt(N)) exp(-2*pi*i*j*k/N) and observable Fourier
//! coefficients use f~(k) = integral of f(q,p) exp(-2*pi*i*(q*k2 - p*k1)).

use crate::linalg::{CMat, C64, ZERO};
use rustfft::{Fft, FftPlanner};
use std::collections::BTreeMap;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("grid of {m} points cannot resolve cutoff K={k}: need M >= 2K+2")]
    GridTooSmall { m: usize, k: usize },
    #[error("grid side must be a power of two, got {0}")]
    GridNotPowerOfTwo(usize),
    #[error("coefficients violate reality: f~(-k) != conj(f~(k)) at k=({0},{1})")]
    NotReal(i64, i64),
    #[error("baker iterate {step} lands at q={q:.6}, within delta={delta} of a discontinuity")]
    ThetaDiscontinuity { step: u32, q: f64, delta: f64 },
    #[error("{0}")]
    BadParam(String),
}

// ---------------------------------------------------------------------------
// FFT plan cache
// ---------------------------------------------------------------------------

type FftCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn fft_cache() -> &'static FftCache {
    static CACHE: OnceLock<FftCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = fft_cache().lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Point on the unit torus, both coordinates reduced mod 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub q: f64,
    pub p: f64,
}

impl TorusPoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q: q.rem_euclid(1.0), p: p.rem_euclid(1.0) }
    }
}

/// Momentum/position translation integers (k1, k2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseIndex {
    pub k1: i64,
    pub k2: i64,
}

/// Classical function on the torus as a finite Fourier dictionary.
#[derive(Debug, Clone)]
pub struct Observable {
    coeffs: BTreeMap<(i64, i64), C64>,
    real: bool,
}

impl Observable {
    pub fn from_coeffs(coeffs: BTreeMap<(i64, i64), C64>) -> Self {
        Self { coeffs, real: false }
    }

    /// Declared-real observable; requires f~(-k) = conj(f~(k)) on the support.
    pub fn real_from_coeffs(coeffs: BTreeMap<(i64, i64), C64>) -> Result<Self, TorusError> {
        for (&(k1, k2), &v) in &coeffs {
            let other = coeffs.get(&(-k1, -k2)).copied().unwrap_or(ZERO);
            if (v - other.conj()).norm() > 1e-12 * (1.0 + v.norm()) {
                return Err(TorusError::NotReal(k1, k2));
            }
        }
        Ok(Self { coeffs, real: true })
    }

    pub fn constant(c: C64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((0, 0), c);
        Self { coeffs, real: c.im == 0.0 }
    }

    /// cos(2*pi*q) = (1/2) e^{2 pi i q} + (1/2) e^{-2 pi i q}.
    pub fn cos_2pi_q() -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((0, 1), C64::new(0.5, 0.0));
        coeffs.insert((0, -1), C64::new(0.5, 0.0));
        Self { coeffs, real: true }
    }

    pub fn coeff(&self, k1: i64, k2: i64) -> C64 {
        self.coeffs.get(&(k1, k2)).copied().unwrap_or(ZERO)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(i64, i64), &C64)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Torus integral, i.e. the (0,0) coefficient.
    pub fn mean(&self) -> C64 {
        self.coeff(0, 0)
    }

    pub fn max_freq(&self) -> i64 {
        self.coeffs.keys().map(|&(k1, k2)| k1.abs().max(k2.abs())).max().unwrap_or(0)
    }

    /// f(q,p) = sum_k f~(k) exp(2*pi*i*(q*k2 - p*k1)).
    pub fn eval(&self, q: f64, p: f64) -> C64 {
        let mut acc = ZERO;
        for (&(k1, k2), &c) in &self.coeffs {
            let ph = 2.0 * PI * (q * k2 as f64 - p * k1 as f64);
            acc += c * C64::new(ph.cos(), ph.sin());
        }
        acc
    }

    pub fn subtract_mean(&self) -> Observable {
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(&(0, 0));
        Self { coeffs, real: self.real }
    }

    pub fn scaled(&self, alpha: C64) -> Observable {
        let coeffs = self.coeffs.iter().map(|(&k, &v)| (k, alpha * v)).collect();
        Self { coeffs, real: self.real && alpha.im == 0.0 }
    }

    /// Drop coefficients below `eps` in modulus (conjugate pairs together,
    /// so declared-real observables stay real).
    pub fn truncated(&self, eps: f64) -> Observable {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&(k1, k2), &v)| {
                v.norm() > eps || self.coeff(-k1, -k2).norm() > eps
            })
            .map(|(&k, &v)| (k, v))
            .collect();
        Self { coeffs, real: self.real }
    }
}

/// Coherent state parameters: center and squeezing.
#[derive(Debug, Clone, Copy)]
pub struct CoherentParams {
    pub center: TorusPoint,
    pub sigma: f64,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// (F_N)_{jk} = (1/sqrt(N)) exp(-2 pi i j k / N).
pub fn dft_matrix(n: usize) -> CMat {
    assert!(n >= 1);
    let s = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |j, k| {
        let ph = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
        C64::new(ph.cos(), ph.sin()) * s
    })
}

/// T(k1,k2)|x> = exp(-pi i k1 k2/N) exp(2 pi i k2 (x+k1)/N) |x+k1 mod N>,
/// extended linearly.
pub fn phase_translation(k: PhaseIndex, v: &[C64]) -> Vec<C64> {
    let n = v.len();
    let ni = n as i64;
    let global = -PI * (k.k1 as f64) * (k.k2 as f64) / n as f64;
    let mut out = vec![ZERO; n];
    for (x, &vx) in v.iter().enumerate() {
        let target = (x as i64 + k.k1).rem_euclid(ni) as usize;
        let ph = global + 2.0 * PI * (k.k2 as f64) * ((x as i64 + k.k1) as f64) / n as f64;
        out[target] += vx * C64::new(ph.cos(), ph.sin());
    }
    out
}

/// Weyl quantization Op(f) = sum_k f~(k) T(k) as a dense N x N matrix.
pub fn weyl_quantize(f: &Observable, n: usize) -> CMat {
    assert!(n >= 1);
    let ni = n as i64;
    let mut m = CMat::zeros(n, n);
    for (&(k1, k2), &c) in f.coeffs.iter() {
        let global = -PI * (k1 as f64) * (k2 as f64) / n as f64;
        for x in 0..n {
            let row = (x as i64 + k1).rem_euclid(ni) as usize;
            let ph = global + 2.0 * PI * (k2 as f64) * ((x as i64 + k1) as f64) / n as f64;
            m[(row, x)] += c * C64::new(ph.cos(), ph.sin());
        }
    }
    m
}

/// 2D DFT of an M x M grid (rows index q, columns index p), unnormalized.
fn fft2(grid: &CMat) -> CMat {
    let m = grid.rows();
    assert_eq!(grid.cols(), m);
    let plan = fft_plan(m, false);
    let mut a = grid.clone();
    for c in 0..m {
        plan.process(a.col_mut(c));
    }
    let mut at = a.transpose();
    for c in 0..m {
        plan.process(at.col_mut(c));
    }
    at.transpose()
}

/// Recover a Fourier dictionary on |k1|,|k2| <= K from samples of f on the
/// uniform M x M grid (entry (i,j) = f(i/M, j/M)). Exact for trigonometric
/// polynomials of degree <= K when M > 2K.
pub fn observable_from_grid(samples: &CMat, k_cut: usize) -> Result<Observable, TorusError> {
    let m = samples.rows();
    if samples.cols() != m {
        return Err(TorusError::BadParam("grid must be square".into()));
    }
    if !m.is_power_of_two() {
        return Err(TorusError::GridNotPowerOfTwo(m));
    }
    if m < 2 * k_cut + 2 {
        return Err(TorusError::GridTooSmall { m, k: k_cut });
    }
    let spec = fft2(samples);
    let scale = 1.0 / (m * m) as f64;
    let kc = k_cut as i64;
    let mi = m as i64;
    let mut coeffs = BTreeMap::new();
    for k1 in -kc..=kc {
        for k2 in -kc..=kc {
            let a = k2.rem_euclid(mi) as usize;
            let b = (-k1).rem_euclid(mi) as usize;
            let v = spec[(a, b)] * scale;
            if v.norm() > 1e-14 {
                coeffs.insert((k1, k2), v);
            }
        }
    }
    // a numerically real grid gives a declared-real observable, with the
    // conjugate symmetry enforced exactly
    let imag_max = samples.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let abs_max = samples.max_abs().max(1e-300);
    if imag_max <= 1e-13 * abs_max {
        let keys: Vec<(i64, i64)> = coeffs.keys().copied().collect();
        for k in keys {
            let v = coeffs.get(&k).copied().unwrap_or(ZERO);
            let w = coeffs.get(&(-k.0, -k.1)).copied().unwrap_or(ZERO);
            let sym = (v + w.conj()) * C64::new(0.5, 0.0);
            coeffs.insert(k, sym);
            coeffs.insert((-k.0, -k.1), sym.conj());
        }
        coeffs.retain(|_, v| v.norm() > 1e-14);
        return Ok(Observable { coeffs, real: true });
    }
    Ok(Observable { coeffs, real: false })
}

/// Evaluate an observable on the uniform M x M grid (inverse of
/// `observable_from_grid` on trig polynomials).
pub fn evaluate_on_grid(f: &Observable, m: usize) -> CMat {
    evaluate_on_rect_grid(f, m, m)
}

/// Evaluate on an n_q x n_p rectangular grid via zero-padded inverse FFTs:
/// entry (i, j) = f(i/n_q, j/n_p). Exact whenever the support fits, i.e.
/// n_q > 2 max|k2| and n_p > 2 max|k1|.
pub fn evaluate_on_rect_grid(f: &Observable, n_q: usize, n_p: usize) -> CMat {
    let kmax = f.max_freq() as usize;
    assert!(n_q > 2 * kmax && n_p > 2 * kmax, "grid too coarse for the support");
    // spectral layout: S[k2 mod n_q, (-k1) mod n_p]
    let mut spec = CMat::zeros(n_q, n_p);
    for (&(k1, k2), &c) in f.coeffs.iter() {
        let a = k2.rem_euclid(n_q as i64) as usize;
        let b = (-k1).rem_euclid(n_p as i64) as usize;
        spec[(a, b)] += c;
    }
    let plan_q = fft_plan(n_q, true);
    for c in 0..n_p {
        plan_q.process(spec.col_mut(c));
    }
    let mut t = spec.transpose();
    let plan_p = fft_plan(n_p, true);
    for c in 0..n_q {
        plan_p.process(t.col_mut(c));
    }
    t.transpose()
}

/// t-fold baker iterate: B(q,p) = (2q mod 1, (p + floor(2q))/2), inverse
/// B^{-1}(q,p) = ((q + floor(2p))/2, 2p mod 1).
pub fn classical_baker(x: TorusPoint, t: i64) -> TorusPoint {
    let mut q = x.q;
    let mut p = x.p;
    if t >= 0 {
        for _ in 0..t {
            let two_q = 2.0 * q;
            let bit = two_q.floor();
            q = two_q - bit;
            p = (p + bit) / 2.0;
        }
    } else {
        for _ in 0..(-t) {
            let two_p = 2.0 * p;
            let bit = two_p.floor();
            p = two_p - bit;
            q = (q + bit) / 2.0;
        }
    }
    TorusPoint::new(q, p)
}

fn theta_branch(x: TorusPoint, delta: f64, step: u32) -> Result<f64, TorusError> {
    let q = x.q;
    if q > delta && q < 0.5 - delta {
        Ok(0.0)
    } else if q > 0.5 + delta && q < 1.0 - delta {
        Ok(q + (x.p + 1.0) / 2.0)
    } else {
        Err(TorusError::ThetaDiscontinuity { step, q, delta })
    }
}

/// Accumulated cocycle Theta_k(x) = sum_{l=0}^{k-1} Theta(B^l x), where
/// Theta is 0 on the left branch and q + (p+1)/2 on the right branch.
/// Refuses when an iterate lands within delta of a discontinuity line.
pub fn theta_phase(x: TorusPoint, k: u32, delta: f64) -> Result<f64, TorusError> {
    let mut acc = 0.0;
    let mut pt = x;
    for step in 0..k {
        acc += theta_branch(pt, delta, step)?;
        pt = classical_baker(pt, 1);
    }
    Ok(acc)
}

/// Plane coherent state Psi_{x,sigma}(q) from the gaussian wavepacket
/// formula, as a complex value.
pub fn plane_coherent(c: &CoherentParams, n: usize, q: f64) -> C64 {
    let nf = n as f64;
    let amp = (2.0 * nf * c.sigma).powf(0.25);
    let ph = -PI * nf * c.center.q * c.center.p + 2.0 * PI * nf * c.center.p * q;
    let gauss = (-c.sigma * nf * PI * (q - c.center.q) * (q - c.center.q)).exp();
    C64::new(ph.cos(), ph.sin()) * amp * gauss
}

/// Torus coherent state: Psi(j) = (1/sqrt(N)) sum_{|z| <= trunc}
/// Psi_{x,sigma}(j/N + z). Not normalized; see `normalized_coherent_state`.
pub fn coherent_state(c: &CoherentParams, n: usize, trunc: i64) -> Vec<C64> {
    assert!(trunc >= 1);
    let nf = n as f64;
    (0..n)
        .map(|j| {
            let mut acc = ZERO;
            for z in -trunc..=trunc {
                acc += plane_coherent(c, n, j as f64 / nf + z as f64);
            }
            acc / nf.sqrt()
        })
        .collect()
}

pub fn normalized_coherent_state(c: &CoherentParams, n: usize, trunc: i64) -> Vec<C64> {
    let mut v = coherent_state(c, n, trunc);
    crate::linalg::normalize(&mut v);
    v
}

// ---------------------------------------------------------------------------
// Cutoff functions (smoothed indicators)
// ---------------------------------------------------------------------------

const BUMP_TABLE_SIZE: usize = 8192;

/// Cumulative integral table of the bump eta(x) = c exp(-1/(1-4x^2)) on
/// [-1/2, 1/2], normalized to unit mass. Composite Simpson is effectively
/// exact here since all derivatives vanish at the endpoints.
fn bump_cdf_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let m = BUMP_TABLE_SIZE;
        let h = 1.0 / m as f64;
        let eta = |x: f64| {
            let s = 1.0 - 4.0 * x * x;
            if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() }
        };
        // composite Simpson prefix sums on pairs of intervals
        let mut cum = vec![0.0f64; m + 1];
        for i in (2..=m).step_by(2) {
            let x0 = -0.5 + (i - 2) as f64 * h;
            let seg = h / 3.0 * (eta(x0) + 4.0 * eta(x0 + h) + eta(x0 + 2.0 * h));
            cum[i] = cum[i - 2] + seg;
        }
        for i in (1..m).step_by(2) {
            let x0 = -0.5 + (i - 1) as f64 * h;
            let seg = h / 6.0 * (eta(x0) + 4.0 * eta(x0 + 0.5 * h) + eta(x0 + h));
            cum[i] = cum[i - 1] + seg;
        }
        let total = cum[m];
        for v in &mut cum {
            *v /= total;
        }
        cum
    })
}

/// H(t) = integral of the unit-mass bump over (-inf, t].
fn bump_cdf(t: f64) -> f64 {
    if t <= -0.5 {
        return 0.0;
    }
    if t >= 0.5 {
        return 1.0;
    }
    let table = bump_cdf_table();
    let u = (t + 0.5) * BUMP_TABLE_SIZE as f64;
    let i = (u.floor() as usize).min(BUMP_TABLE_SIZE - 1);
    let frac = u - i as f64;
    table[i] * (1.0 - frac) + table[i + 1] * frac
}

/// Mollified indicator chi~_beta = 1_{[3 beta/2, 1-3 beta/2]} * eta_beta on
/// the circle: zero on [-beta, beta], one on [2 beta, 1-2 beta].
pub fn chi_tilde(beta: f64, x: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    // support of the mollified ramp lies in (0,1) for beta < 1/4, so the
    // periodization needs no extra images
    bump_cdf((x - 1.5 * beta) / beta) - bump_cdf((x - (1.0 - 1.5 * beta)) / beta)
}

/// chi_{beta,n}(q,p) = chi~_beta(2^n q) chi~_beta(p) as a Fourier dictionary
/// via grid sampling.
pub fn cutoff_observable(beta: f64, n_scale: u32, k_cut: usize) -> Result<Observable, TorusError> {
    if !(beta > 0.0 && beta < 0.25) {
        return Err(TorusError::BadParam(format!("beta must lie in (0, 1/4), got {beta}")));
    }
    let m = 512usize.max((2 * k_cut + 2).next_power_of_two());
    let scale = (1u64 << n_scale) as f64;
    let grid = CMat::from_fn(m, m, |i, j| {
        let q = i as f64 / m as f64;
        let p = j as f64 / m as f64;
        C64::new(chi_tilde(beta, scale * q) * chi_tilde(beta, p), 0.0)
    });
    observable_from_grid(&grid, k_cut)
}

/// Grid L^2 distance of the Birkhoff average (1/T) sum f o B^{-t} from the
/// mean of f: returns the grid average of |[f]_T - integral(f)|^2.
pub fn ergodic_average_classical(f: &Observable, t_steps: usize, m: usize) -> f64 {
    assert!(t_steps >= 1);
    let mean = f.mean();
    let mf = m as f64;
    // golden-ratio grid offset: on the exact lattice j/M the momentum digits
    // run out after log2(M) backward iterates and the Birkhoff average
    // degenerates; a fixed irrational shift keeps the quadrature exact for
    // trig polynomials while avoiding that
    let alpha = 0.618_033_988_749_894_9_f64;
    let sums = crate::par::map_indexed(m, |i| {
        let mut row_acc = 0.0;
        for j in 0..m {
            let mut pt = TorusPoint::new((i as f64 + alpha) / mf, (j as f64 + alpha) / mf);
            let mut acc = ZERO;
            for t in 0..t_steps {
                if t > 0 {
                    pt = classical_baker(pt, -1);
                }
                acc += f.eval(pt.q, pt.p);
            }
            row_acc += (acc / t_steps as f64 - mean).norm_sqr();
        }
        row_acc
    });
    sums.iter().sum::<f64>() / (mf * mf)
}

/// Pointwise composition a o B^{-t} returned as a Fourier dictionary via
/// grid evaluation (default M=512, K=64 elsewhere in the crate).
///
/// The backward iterates of the uniform M x M grid lie on the finer
/// (2^t M) x M grid (each inverse step halves q onto a refined lattice and
/// doubles p within the same lattice), so `a` is evaluated there once by
/// FFT and gathered.
pub fn compose_with_inverse_baker(
    a: &Observable,
    t: i64,
    m: usize,
    k_cut: usize,
) -> Result<Observable, TorusError> {
    if t < 0 {
        return Err(TorusError::BadParam("composition steps must be >= 0".into()));
    }
    let tu = t as u32;
    if tu > 12 {
        return Err(TorusError::BadParam(format!("composition horizon t={tu} too long")));
    }
    let fine_q = m << tu;
    let fine = evaluate_on_rect_grid(a, fine_q, m);
    let mf = m as f64;
    let mut grid = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let pt = classical_baker(TorusPoint::new(i as f64 / mf, j as f64 / mf), -t);
            let qi = (pt.q * fine_q as f64).round() as usize % fine_q;
            let pj = (pt.p * mf).round() as usize % m;
            grid[(i, j)] = fine[(qi, pj)];
        }
    }
    observable_from_grid(&grid, k_cut)
}
