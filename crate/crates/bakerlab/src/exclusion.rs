//! Combinatorial geometry of the coordinate sets to avoid: discontinuity
//! strips, classical sets around x = 2^k y mod N, their union, diagonal
//! exclusions, the good region in the torus, and the parameter schedule.

use crate::torus::TorusPoint;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExclusionError {
    #[error("interval length must be positive, got {0}")]
    BadIntervalLength(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Rule for the epsilon(N) factor in the Ehrenfest-like time J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsRule {
    /// 1 / (|I| ln N)^{1/2}
    PowerHalf,
    /// 1 / ln(|I| ln N)
    LogReciprocal,
    /// fixed value, clipped into (0, 1]
    Custom(f64),
}

/// The (J, delta, gamma, W, eps) schedule: J = log2(N) eps,
/// delta = 10 sqrt(log2(N)/N), gamma = N^{-1/3}, W = N^{1/2 + 2 eps}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExclusionParams {
    pub n: usize,
    pub j: f64,
    pub delta: f64,
    pub gamma: f64,
    pub w: f64,
    pub eps_n: f64,
    pub delta_clipped: bool,
    pub warnings: Vec<String>,
}

impl ExclusionParams {
    /// Explicit parameters, bypassing the schedule (used by small-N tests).
    pub fn explicit(n: usize, j: f64, delta: f64, gamma: f64, w: f64) -> Self {
        Self { n, j, delta, gamma, w, eps_n: f64::NAN, delta_clipped: false, warnings: Vec::new() }
    }

    /// Ceiling of J for loop bounds (conservative exclusion).
    pub fn j_ceil(&self) -> u32 {
        self.j.ceil().max(1.0) as u32
    }
}

pub fn param_schedule(
    n: usize,
    interval_len: f64,
    rule: EpsRule,
) -> Result<ExclusionParams, ExclusionError> {
    if interval_len <= 0.0 {
        return Err(ExclusionError::BadIntervalLength(interval_len));
    }
    let nf = n as f64;
    let mut warnings = Vec::new();
    if interval_len * nf.ln() <= 1.0 {
        warnings.push(format!(
            "|I| ln N = {:.3} <= 1: asymptotic regime not entered",
            interval_len * nf.ln()
        ));
    }
    let eps = match rule {
        EpsRule::PowerHalf => 1.0 / (interval_len * nf.ln()).max(f64::MIN_POSITIVE).sqrt(),
        EpsRule::LogReciprocal => 1.0 / (interval_len * nf.ln()).max(f64::MIN_POSITIVE).ln(),
        EpsRule::Custom(v) => v.clamp(f64::MIN_POSITIVE, 1.0),
    };
    let log2n = nf.log2();
    let j = log2n * eps;
    let mut delta = 10.0 * (log2n / nf).sqrt();
    let mut delta_clipped = false;
    if delta >= 0.5 {
        warnings.push(format!("delta schedule value {delta:.4} >= 1/2 clipped (small-N regime)"));
        delta = 0.4999;
        delta_clipped = true;
    }
    let gamma = nf.powf(-1.0 / 3.0);
    let w = nf.powf(0.5 + 2.0 * eps);
    Ok(ExclusionParams { n, j, delta, gamma, w, eps_n: eps, delta_clipped, warnings })
}

/// Discontinuity set: |y/N - k/2^J| <= delta for some integer k, or
/// x/N <= gamma, or x/N >= 1 - gamma.
pub fn in_discontinuity_set(x: usize, y: usize, p: &ExclusionParams) -> bool {
    let nf = p.n as f64;
    let xf = x as f64 / nf;
    if xf <= p.gamma || xf >= 1.0 - p.gamma {
        return true;
    }
    let scale = 2f64.powf(p.j);
    let t = y as f64 / nf * scale;
    (t - t.round()).abs() <= p.delta * scale
}

fn pow2_mod(k: u32, n: u64) -> u64 {
    let mut acc = 1u64 % n;
    for _ in 0..k {
        acc = (acc * 2) % n;
    }
    acc
}

/// Classical set C^W_{k,N}: cyclic distance d(x, 2^k y mod N) <= W.
pub fn in_classical_set(x: usize, y: usize, k: u32, w: f64, n: usize) -> bool {
    let nu = n as u64;
    let target = (pow2_mod(k, nu) as u128 * y as u128 % nu as u128) as u64;
    let d = (x as u64).abs_diff(target);
    let d = d.min(nu - d);
    (d as f64) <= w
}

/// Union A = B cup (union over k in [1, ceil(J)] of C^W_k); the symmetrized
/// version adds transposes and diagonal memberships.
pub fn excluded(x: usize, y: usize, p: &ExclusionParams, symmetrized: bool) -> bool {
    if in_union_set(x, y, p) {
        return true;
    }
    if symmetrized {
        in_union_set(y, x, p) || in_union_set(x, x, p) || in_union_set(y, y, p)
    } else {
        false
    }
}

fn in_union_set(x: usize, y: usize, p: &ExclusionParams) -> bool {
    if in_discontinuity_set(x, y, p) {
        return true;
    }
    (1..=p.j_ceil()).any(|k| in_classical_set(x, y, k, p.w, p.n))
}

/// Diagonal exclusions DA = { x : (x,x) in A }, sorted.
pub fn diag_exclusions(p: &ExclusionParams) -> Vec<usize> {
    (0..p.n).filter(|&x| in_union_set(x, x, p)).collect()
}

/// Good region in the torus: |q - l/2^J| > delta for all integers l and
/// p in (gamma, 1 - gamma).
pub fn in_good_region(x: TorusPoint, j: f64, delta: f64, gamma: f64) -> bool {
    if x.p <= gamma || x.p >= 1.0 - gamma {
        return false;
    }
    let scale = 2f64.powf(j);
    let t = x.q * scale;
    (t - t.round()).abs() > delta * scale
}

/// CSV dump of coordinate pairs ("x,y" rows) with a JSON parameter sidecar.
pub fn write_pairs_csv<W: Write>(
    mut w: W,
    pairs: &[(usize, usize)],
) -> Result<(), ExclusionError> {
    writeln!(w, "x,y")?;
    for &(x, y) in pairs {
        writeln!(w, "{x},{y}")?;
    }
    Ok(())
}

/// CSV dump of diagonal coordinates ("x" rows).
pub fn write_diag_csv<W: Write>(mut w: W, xs: &[usize]) -> Result<(), ExclusionError> {
    writeln!(w, "x")?;
    for &x in xs {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

pub fn params_sidecar_json(p: &ExclusionParams) -> String {
    serde_json::to_string_pretty(p).expect("params serialize")
}
