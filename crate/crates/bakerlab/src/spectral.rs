//! Spectral projectors P_I, generalized spectral functions Q_{N,I},
//! eigenvalue counting, windowed local Weyl law, windowed quantum variance,
//! and Egorov / coherent-evolution defects.

use crate::baker::{BakerError, BvOperator, SpectralData};
use crate::exclusion::{diag_exclusions, excluded, in_good_region, ExclusionParams};
use crate::interval::AngleInterval;
use crate::linalg::{self, matmul, norm2, CMat, C64, Op, ZERO};
use crate::selberg::{self, BvPowers, TrigPoly};
use crate::torus::{
    classical_baker, compose_with_inverse_baker, normalized_coherent_state, theta_phase,
    weyl_quantize, CoherentParams, Observable, TorusError, TorusPoint,
};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("window contains no eigenangles")]
    EmptyWindow,
    #[error("coherent center (q={q}, p={p}) outside the good region for k={k}")]
    OutsideGoodRegion { q: f64, p: f64, k: u32 },
    #[error("evolution horizon too long: need 2^k <= sqrt(N sigma), got k={k}, N={n}")]
    HorizonTooLong { k: u32, n: usize },
    #[error("observable support leaves the good region at (q={q:.4}, p={p:.4})")]
    SupportViolation { q: f64, p: f64 },
    #[error(transparent)]
    Baker(#[from] BakerError),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// Orthogonal projector onto a spectral window.
pub struct ProjectorMatrix {
    pub mat: CMat,
    pub window: AngleInterval,
    pub rank: usize,
}

impl ProjectorMatrix {
    /// (hermitian defect, idempotence defect, |trace - rank|).
    pub fn axiom_defects(&self) -> (f64, f64, f64) {
        let herm = self.mat.hermitian_defect();
        let sq = matmul(&self.mat, Op::None, &self.mat, Op::None);
        let idem = sq.max_abs_diff(&self.mat);
        let tr = (self.mat.trace() - C64::new(self.rank as f64, 0.0)).norm();
        (herm, idem, tr)
    }
}

/// P = sum over eigenangles in the window of |v><v|.
pub fn projector(sd: &SpectralData, window: &AngleInterval) -> ProjectorMatrix {
    let idx = sd.indices_in(window);
    let n = sd.n;
    if idx.is_empty() {
        return ProjectorMatrix { mat: CMat::zeros(n, n), window: *window, rank: 0 };
    }
    let cols: Vec<Vec<C64>> = idx.iter().map(|&j| sd.vectors.col(j).to_vec()).collect();
    let v = CMat::from_columns(&cols);
    let mat = matmul(&v, Op::None, &v, Op::Adjoint);
    ProjectorMatrix { mat, window: *window, rank: idx.len() }
}

/// Q = sum over the window of q(theta) |v><v|.
pub fn q_operator(sd: &SpectralData, window: &AngleInterval, q: impl Fn(f64) -> C64) -> CMat {
    let idx = sd.indices_in(window);
    let n = sd.n;
    if idx.is_empty() {
        return CMat::zeros(n, n);
    }
    let cols: Vec<Vec<C64>> = idx.iter().map(|&j| sd.vectors.col(j).to_vec()).collect();
    let v = CMat::from_columns(&cols);
    let mut scaled = v.clone();
    for (c, &j) in idx.iter().enumerate() {
        let qv = q(sd.angles[j]);
        for z in scaled.col_mut(c) {
            *z *= qv;
        }
    }
    matmul(&scaled, Op::None, &v, Op::Adjoint)
}

/// Fourier-route cross-check for Q_{N,I}: approximate q by its Fourier
/// partial sum up to degree floor(J/2), multiply by the Selberg majorant of
/// the window at the same degree, and apply the product polynomial through
/// matrix powers. Returns the matrix and the max diagonal deviation from the
/// exact eigendecomposition route.
pub fn fourier_q_route(
    op: &BvOperator,
    sd: &SpectralData,
    window: &AngleInterval,
    q: &dyn Fn(f64) -> C64,
    j_deg: f64,
) -> Result<(CMat, f64), SpectralError> {
    let half = (j_deg / 2.0).floor();
    let pair = selberg::selberg_pair(window, half).map_err(|_| SpectralError::EmptyWindow)?;
    // Fourier partial sum of q up to degree floor(J/2)
    let grid = 8192usize;
    let samples: Vec<C64> =
        (0..grid).map(|m| q(2.0 * PI * m as f64 / grid as f64)).collect();
    let q_partial = TrigPoly::from_samples(&samples, half as i64);
    let product = q_partial.mul(&pair.plus);
    let powers = selberg::bv_powers(op, product.deg as usize);
    let approx = selberg::apply_trig_poly(&product, &powers, op.dim());
    let exact = q_operator(sd, window, q);
    let mut max_dev = 0.0f64;
    for x in 0..op.dim() {
        max_dev = max_dev.max((approx[(x, x)] - exact[(x, x)]).norm());
    }
    Ok((approx, max_dev))
}

#[derive(Debug, Clone, Serialize)]
pub struct RateDiagnostics {
    /// 1/(|I| J) with the schedule J
    pub one_over_interval_j: f64,
    /// r(N) = N^{-1/12} + exp(-(pi/2) N^{2 eps}) with all constants set to 1
    pub r_n: f64,
    pub flag: &'static str,
}

/// Diagonal/off-diagonal statistics of a projector against the exclusion
/// sets; matches the JSON report schema.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub interval: AngleInterval,
    pub rank: usize,
    pub diag_mean: f64,
    pub diag_median: f64,
    pub diag_target: f64,
    pub frac_within_band: f64,
    pub band: f64,
    pub offdiag_max_outside: f64,
    pub offdiag_max_inside: f64,
    pub weyl_ratio: f64,
    pub excluded_diag_count: usize,
    pub exclusions_cover_all: bool,
    pub rate_diagnostics: RateDiagnostics,
}

pub fn projection_stats(
    p: &ProjectorMatrix,
    params: &ExclusionParams,
    band: f64,
) -> SpectralReport {
    let n = p.mat.rows();
    let target = p.window.length / (2.0 * PI);
    let da = diag_exclusions(params);
    let da_set: std::collections::HashSet<usize> = da.iter().copied().collect();
    // a degenerate (small-N) schedule can exclude every coordinate; fall
    // back to all-coordinate statistics in that case and flag it
    let exclusions_cover_all = da_set.len() >= n;
    let mut diags: Vec<f64> = (0..n)
        .filter(|x| exclusions_cover_all || !da_set.contains(x))
        .map(|x| p.mat[(x, x)].re)
        .collect();
    diags.sort_by(f64::total_cmp);
    let mean = diags.iter().sum::<f64>() / diags.len().max(1) as f64;
    let median = if diags.is_empty() { f64::NAN } else { diags[diags.len() / 2] };
    let within =
        diags.iter().filter(|&&v| (v - target).abs() <= band).count() as f64 / diags.len().max(1) as f64;

    let rows = crate::par::map_indexed(n, |x| {
        let mut outside = 0.0f64;
        let mut inside = 0.0f64;
        for y in 0..n {
            if x == y {
                continue;
            }
            let v = p.mat[(x, y)].norm();
            if excluded(x, y, params, true) {
                inside = inside.max(v);
            } else {
                outside = outside.max(v);
            }
        }
        (outside, inside)
    });
    let offdiag_max_outside = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let offdiag_max_inside = rows.iter().map(|r| r.1).fold(0.0, f64::max);

    let nf = n as f64;
    let r_n = nf.powf(-1.0 / 12.0)
        + (-(PI / 2.0) * nf.powf(2.0 * params.eps_n.max(0.0))).exp();
    SpectralReport {
        n,
        interval: p.window,
        rank: p.rank,
        diag_mean: mean,
        diag_median: median,
        diag_target: target,
        frac_within_band: within,
        band,
        offdiag_max_outside,
        offdiag_max_inside,
        weyl_ratio: p.rank as f64 * 2.0 * PI / (nf * p.window.length),
        excluded_diag_count: da.len(),
        exclusions_cover_all,
        rate_diagnostics: RateDiagnostics {
            one_over_interval_j: 1.0 / (p.window.length * params.j.max(f64::MIN_POSITIVE)),
            r_n,
            flag: "heuristic",
        },
    }
}

/// Windowed local Weyl average (2 pi / (N |I|)) trace(P_I Op(f)).
pub fn windowed_weyl_sum(
    sd: &SpectralData,
    window: &AngleInterval,
    f: &Observable,
) -> Result<C64, SpectralError> {
    let idx = sd.indices_in(window);
    if idx.is_empty() {
        return Err(SpectralError::EmptyWindow);
    }
    let op = weyl_quantize(f, sd.n);
    let mut acc = ZERO;
    for &j in &idx {
        let v = sd.vectors.col(j);
        let w = op.matvec(v);
        acc += linalg::dot(v, &w);
    }
    Ok(acc * C64::new(2.0 * PI / (sd.n as f64 * window.length), 0.0))
}

/// Windowed quantum variance (2 pi / (N |I|)) sum over the window of
/// |<v|Op(a)|v> - mean(a)|^2 for a real observable.
pub fn quantum_variance(
    sd: &SpectralData,
    window: &AngleInterval,
    a: &Observable,
) -> Result<f64, SpectralError> {
    let idx = sd.indices_in(window);
    if idx.is_empty() {
        return Err(SpectralError::EmptyWindow);
    }
    let mean = a.mean();
    let op = weyl_quantize(a, sd.n);
    let mut acc = 0.0;
    for &j in &idx {
        let v = sd.vectors.col(j);
        let w = op.matvec(v);
        acc += (linalg::dot(v, &w) - mean).norm_sqr();
    }
    Ok(acc * 2.0 * PI / (sd.n as f64 * window.length))
}

/// || B^k Psi_{x,sigma} - e^{i N pi Theta_k(x)} Psi_{B^k x, sigma/4^k} ||_2
/// with both states normalized.
pub fn coherent_evolution_defect(
    c: &CoherentParams,
    k: u32,
    n: usize,
    delta: f64,
    gamma: f64,
) -> Result<f64, SpectralError> {
    if !in_good_region(c.center, k as f64, delta, gamma) && k > 0 {
        return Err(SpectralError::OutsideGoodRegion { q: c.center.q, p: c.center.p, k });
    }
    if 2f64.powi(k as i32) > (n as f64 * c.sigma).sqrt() {
        return Err(SpectralError::HorizonTooLong { k, n });
    }
    let op = BvOperator::new(n)?;
    let psi = normalized_coherent_state(c, n, 3);
    let evolved = op.apply(&psi, k as i64)?;
    let theta = theta_phase(c.center, k, delta)?;
    let phase = C64::from_polar(1.0, n as f64 * PI * theta);
    let target_params = CoherentParams {
        center: classical_baker(c.center, k as i64),
        sigma: c.sigma / 4f64.powi(k as i32),
    };
    let target = normalized_coherent_state(&target_params, n, 3);
    let diff: Vec<C64> =
        evolved.iter().zip(target.iter()).map(|(a, b)| a - phase * b).collect();
    Ok(norm2(&diff))
}

/// Operator-norm Egorov defect || B^t Op(a) B^{-t} - Op(a o B^{-t}) ||.
/// The observable's numerical support (relative threshold `support_tol`)
/// must lie in the good region G_{t,delta,gamma}.
#[allow(clippy::too_many_arguments)]
pub fn egorov_defect(
    a: &Observable,
    t: u32,
    n: usize,
    delta: f64,
    gamma: f64,
    grid_m: usize,
    k_cut: usize,
    support_tol: f64,
) -> Result<f64, SpectralError> {
    let mf = grid_m as f64;
    let grid = crate::torus::evaluate_on_grid(a, grid_m);
    let amax = grid.max_abs().max(1e-300);
    for i in 0..grid_m {
        for j in 0..grid_m {
            if grid[(i, j)].norm() > support_tol * amax {
                let pt = TorusPoint::new(i as f64 / mf, j as f64 / mf);
                if !in_good_region(pt, t as f64, delta, gamma) {
                    return Err(SpectralError::SupportViolation { q: pt.q, p: pt.p });
                }
            }
        }
    }
    let op = BvOperator::new(n)?;
    // B^t Op(a) B^{-t}: right-multiplication by B^{-t} goes through the
    // adjoint, (M B^{-t})^dagger = B^t M^dagger
    let mut left = weyl_quantize(a, n);
    op.apply_to_columns(&mut left, t as i64);
    let mut right = left.adjoint();
    op.apply_to_columns(&mut right, t as i64);
    let mut conj = right.adjoint();
    let comp = compose_with_inverse_baker(a, t as i64, grid_m, k_cut)?;
    let op_comp = weyl_quantize(&comp, n);
    conj.axpy(C64::new(-1.0, 0.0), &op_comp);
    Ok(linalg::spectral_norm(&conj))
}

/// Selberg-powers helper re-exported for callers that combine the
/// functional-calculus route with projectors.
pub fn powers_for_degree(op: &BvOperator, degree: f64) -> BvPowers {
    selberg::bv_powers(op, degree.floor() as usize)
}
