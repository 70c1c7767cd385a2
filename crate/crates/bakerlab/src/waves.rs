//! Random band-limited waves from a spectral window and the statistics of
//! their value distribution, moments, autocorrelations, l^p norms, and sign
//! changes.

use crate::baker::SpectralData;
use crate::interval::AngleInterval;
use crate::linalg::{self, matmul, CMat, C64, Op};
use crate::rng;
use crate::torus::{weyl_quantize, Observable};
use serde::Serialize;
use statrs::function::erf::erf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WavesError {
    #[error("window contains no eigenangles")]
    EmptyWindow,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

/// A draw psi = (1/sqrt(dim_S)) sum g_j v_j with g_j iid complex standard
/// normal (E|g|^2 = 1), tagged with its seed.
#[derive(Debug, Clone)]
pub struct WaveSample {
    pub psi: Vec<C64>,
    pub window: AngleInterval,
    pub dim_s: usize,
    pub seed: u64,
}

pub fn sample_wave(
    sd: &SpectralData,
    window: &AngleInterval,
    seed: u64,
) -> Result<WaveSample, WavesError> {
    let idx = sd.indices_in(window);
    if idx.is_empty() {
        return Err(WavesError::EmptyWindow);
    }
    let mut rng = rng::stream(seed);
    let g = rng::complex_gaussian_vec(&mut rng, idx.len());
    let scale = 1.0 / (idx.len() as f64).sqrt();
    let n = sd.n;
    let mut psi = vec![C64::new(0.0, 0.0); n];
    for (c, &j) in idx.iter().enumerate() {
        let gj = g[c] * scale;
        let col = sd.vectors.col(j);
        for (z, &v) in psi.iter_mut().zip(col.iter()) {
            *z += gj * v;
        }
    }
    Ok(WaveSample { psi, window: *window, dim_s: idx.len(), seed })
}

/// Kolmogorov-Smirnov distance of a sample against a CDF.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// CDF of N(0, 1/2): (1 + erf(x)) / 2 (sigma sqrt(2) = 1).
pub fn normal_half_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x))
}

/// KS distances of {sqrt(N) Re psi(x)} and {sqrt(N) Im psi(x)} against
/// N(0, 1/2).
pub fn value_statistics(w: &WaveSample) -> (f64, f64) {
    let scale = (w.psi.len() as f64).sqrt();
    let re: Vec<f64> = w.psi.iter().map(|z| scale * z.re).collect();
    let im: Vec<f64> = w.psi.iter().map(|z| scale * z.im).collect();
    (ks_statistic(&re, normal_half_cdf), ks_statistic(&im, normal_half_cdf))
}

/// ||psi||_p^p for finite p; the max modulus for p = infinity.
pub fn lp_norms(w: &WaveSample, ps: &[f64]) -> Vec<(f64, f64)> {
    ps.iter()
        .map(|&p| {
            assert!(p > 0.0);
            let v = if p.is_infinite() {
                w.psi.iter().map(|z| z.norm()).fold(0.0, f64::max)
            } else {
                w.psi.iter().map(|z| z.norm().powf(p)).sum()
            };
            (p, v)
        })
        .collect()
}

fn count_sign_changes(values: impl Iterator<Item = f64> + Clone, n: usize) -> usize {
    let vals: Vec<f64> = values.collect();
    let mut count = 0;
    for x in 0..n {
        let a = vals[x];
        let b = vals[(x + 1) % n];
        // x with a zero value on either side is not counted
        if a != 0.0 && b != 0.0 && (a > 0.0) != (b > 0.0) {
            count += 1;
        }
    }
    count
}

/// Cyclic sign-change counts of Re psi and Im psi (zeros skipped).
pub fn sign_changes(w: &WaveSample) -> (usize, usize) {
    let n = w.psi.len();
    (
        count_sign_changes(w.psi.iter().map(|z| z.re), n),
        count_sign_changes(w.psi.iter().map(|z| z.im), n),
    )
}

/// Locations x/N of real-part sign changes.
pub fn sign_change_locations(w: &WaveSample) -> Vec<f64> {
    let n = w.psi.len();
    (0..n)
        .filter(|&x| {
            let a = w.psi[x].re;
            let b = w.psi[(x + 1) % n].re;
            a != 0.0 && b != 0.0 && (a > 0.0) != (b > 0.0)
        })
        .map(|x| x as f64 / n as f64)
        .collect()
}

/// Mean empirical measure (2/N) E|Z^r| of the real-part sign-change
/// locations, binned over [0,1]. Requires at least 20 samples.
pub fn sign_change_distribution(
    samples: &[WaveSample],
    bins: usize,
) -> Result<Vec<f64>, WavesError> {
    if samples.len() < 20 {
        return Err(WavesError::TooFewSamples { need: 20, got: samples.len() });
    }
    let mut hist = vec![0.0f64; bins];
    for w in samples {
        let n = w.psi.len() as f64;
        for loc in sign_change_locations(w) {
            let b = ((loc * bins as f64) as usize).min(bins - 1);
            hist[b] += 2.0 / n;
        }
    }
    for h in &mut hist {
        *h /= samples.len() as f64;
    }
    Ok(hist)
}

/// Monte-Carlo moments at coordinates x (and cross-moment with y) together
/// with the Isserlis closed forms computed from the projector entries.
#[derive(Debug, Clone, Serialize)]
pub struct AutocorrReport {
    pub x: usize,
    pub y: usize,
    pub n_samples: usize,
    /// E |sqrt(N) psi(x)|^2, Monte Carlo
    pub m2_x: f64,
    /// E |sqrt(N) psi(x)|^4, Monte Carlo
    pub m4_x: f64,
    /// E [N^2 |psi(x)|^2 |psi(y)|^2], Monte Carlo
    pub cross_xy: f64,
    pub closed_m2_x: f64,
    pub closed_m4_x: f64,
    pub closed_cross_xy: f64,
    /// Monte-Carlo standard errors for the three estimates
    pub se_m2: f64,
    pub se_m4: f64,
    pub se_cross: f64,
}

pub fn autocorrelation(
    sd: &SpectralData,
    window: &AngleInterval,
    x: usize,
    y: usize,
    n_samples: usize,
    seed: u64,
) -> Result<AutocorrReport, WavesError> {
    let idx = sd.indices_in(window);
    if idx.is_empty() {
        return Err(WavesError::EmptyWindow);
    }
    let d = idx.len() as f64;
    let n = sd.n as f64;
    // projector entries from the eigenvector columns
    let mut pxx = 0.0f64;
    let mut pyy = 0.0f64;
    let mut pxy = C64::new(0.0, 0.0);
    for &j in &idx {
        let col = sd.vectors.col(j);
        pxx += col[x].norm_sqr();
        pyy += col[y].norm_sqr();
        pxy += col[x] * col[y].conj();
    }
    let closed_m2 = n * pxx / d;
    let closed_m4 = 2.0 * closed_m2 * closed_m2;
    let closed_cross = n * n * (pxx * pyy + pxy.norm_sqr()) / (d * d);

    // Monte Carlo over derived substreams; only the x and y components of
    // psi are needed
    let vx: Vec<C64> = idx.iter().map(|&j| sd.vectors.col(j)[x]).collect();
    let vy: Vec<C64> = idx.iter().map(|&j| sd.vectors.col(j)[y]).collect();
    let stats = crate::par::map_indexed(n_samples, |i| {
        let mut r = rng::substream(seed, i as u64);
        let mut px = C64::new(0.0, 0.0);
        let mut py = C64::new(0.0, 0.0);
        for c in 0..idx.len() {
            let g = rng::complex_gaussian(&mut r);
            px += g * vx[c];
            py += g * vy[c];
        }
        let sx = px.norm_sqr() / d;
        let sy = py.norm_sqr() / d;
        (n * sx, n * n * sx * sx, n * n * sx * sy)
    });
    let ns = n_samples as f64;
    let mean =
        stats.iter().fold((0.0, 0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1, a.2 + s.2));
    let mean = (mean.0 / ns, mean.1 / ns, mean.2 / ns);
    let var = stats.iter().fold((0.0, 0.0, 0.0), |a, s| {
        (
            a.0 + (s.0 - mean.0) * (s.0 - mean.0),
            a.1 + (s.1 - mean.1) * (s.1 - mean.1),
            a.2 + (s.2 - mean.2) * (s.2 - mean.2),
        )
    });
    Ok(AutocorrReport {
        x,
        y,
        n_samples,
        m2_x: mean.0,
        m4_x: mean.1,
        cross_xy: mean.2,
        closed_m2_x: closed_m2,
        closed_m4_x: closed_m4,
        closed_cross_xy: closed_cross,
        se_m2: (var.0 / (ns * (ns - 1.0))).sqrt(),
        se_m4: (var.1 / (ns * (ns - 1.0))).sqrt(),
        se_cross: (var.2 / (ns * (ns - 1.0))).sqrt(),
    })
}

/// Distribution of <psi|Op(a)|psi> - mean(a) across samples.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub n_samples: usize,
    pub deviations: Vec<f64>,
    pub frac_within_band: f64,
    pub band: f64,
    pub quantiles: Vec<(f64, f64)>,
}

pub fn matrix_element_concentration(
    sd: &SpectralData,
    window: &AngleInterval,
    a: &Observable,
    n_samples: usize,
    seed: u64,
    band: f64,
) -> Result<ConcentrationReport, WavesError> {
    let idx = sd.indices_in(window);
    if idx.is_empty() {
        return Err(WavesError::EmptyWindow);
    }
    let op = weyl_quantize(a, sd.n);
    let mean = a.mean().re;
    // Op compressed to the window subspace: M = V^dagger Op V (dim_S x dim_S)
    let cols: Vec<Vec<C64>> = idx.iter().map(|&j| sd.vectors.col(j).to_vec()).collect();
    let v = CMat::from_columns(&cols);
    let ov = matmul(&op, Op::None, &v, Op::None);
    let m = matmul(&v, Op::Adjoint, &ov, Op::None);
    let d = idx.len();
    let devs = crate::par::map_indexed(n_samples, |i| {
        let mut r = rng::substream(seed, i as u64);
        let g = rng::complex_gaussian_vec(&mut r, d);
        let mg = m.matvec(&g);
        let val = linalg::dot(&g, &mg).re / d as f64;
        val - mean
    });
    let within = devs.iter().filter(|v| v.abs() <= band).count() as f64 / n_samples as f64;
    let mut sorted = devs.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = [0.05, 0.25, 0.5, 0.75, 0.95]
        .iter()
        .map(|&q| {
            let i = ((q * n_samples as f64) as usize).min(n_samples - 1);
            (q, sorted[i])
        })
        .collect();
    Ok(ConcentrationReport {
        n_samples,
        deviations: devs,
        frac_within_band: within,
        band,
        quantiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baker::BvOperator;

    fn sd_for(n: usize) -> SpectralData {
        BvOperator::new(n).unwrap().spectral_decompose().unwrap()
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let sd = sd_for(32);
        let i = AngleInterval::new(0.0, 2.0);
        let a = sample_wave(&sd, &i, 99).unwrap();
        let b = sample_wave(&sd, &i, 99).unwrap();
        assert_eq!(a.psi, b.psi);
        let c = sample_wave(&sd, &i, 100).unwrap();
        assert_ne!(a.psi, c.psi);
    }

    #[test]
    fn expected_norm_is_one() {
        let sd = sd_for(64);
        let i = AngleInterval::new(0.5, 2.5);
        let n_draws = 1000usize;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for s in 0..n_draws {
            let w = sample_wave(&sd, &i, s as u64).unwrap();
            let n2 = linalg::norm2(&w.psi).powi(2);
            acc += n2;
            acc2 += n2 * n2;
        }
        let mean = acc / n_draws as f64;
        let var = (acc2 / n_draws as f64 - mean * mean).max(0.0);
        let se = (var / n_draws as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se + 1e-3, "mean {mean}, se {se}");
    }

    #[test]
    fn covariance_matches_projector() {
        let sd = sd_for(128);
        let i = AngleInterval::new(1.0, 1.0);
        let idx = sd.indices_in(&i);
        let d = idx.len() as f64;
        assert!(d >= 10.0);
        let pairs = [(3usize, 3usize), (3, 77), (50, 51)];
        let n_draws = 10_000usize;
        let mut acc = vec![C64::new(0.0, 0.0); pairs.len()];
        let mut acc_sq = vec![0.0f64; pairs.len()];
        for s in 0..n_draws {
            let w = sample_wave(&sd, &i, s as u64).unwrap();
            for (k, &(x, y)) in pairs.iter().enumerate() {
                let v = w.psi[x] * w.psi[y].conj();
                acc[k] += v;
                acc_sq[k] += v.norm_sqr();
            }
        }
        for (k, &(x, y)) in pairs.iter().enumerate() {
            let emp = acc[k] / n_draws as f64;
            let mut pxy = C64::new(0.0, 0.0);
            for &j in &idx {
                pxy += sd.vectors.col(j)[x] * sd.vectors.col(j)[y].conj();
            }
            let expect = pxy / d;
            let var = (acc_sq[k] / n_draws as f64 - emp.norm_sqr()).max(0.0);
            let se = (var / n_draws as f64).sqrt();
            assert!(
                (emp - expect).norm() <= 5.0 * se + 1e-6,
                "pair {:?}: |{:?} - {:?}| vs se {se}",
                (x, y),
                emp,
                expect
            );
        }
    }

    #[test]
    fn ks_of_synthetic_gaussian_is_small() {
        let mut r = rng::stream(4);
        let vals: Vec<f64> =
            (0..4096).map(|_| rng::complex_gaussian(&mut r).re).collect();
        let ks = ks_statistic(&vals, normal_half_cdf);
        assert!(ks < 0.03, "ks = {ks}");
        // uniform values against the gaussian CDF are far
        let unif: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        assert!(ks_statistic(&unif, normal_half_cdf) > 0.1);
    }

    #[test]
    fn ks_distribution_stable_under_global_phase() {
        let sd = sd_for(128);
        let i = AngleInterval::new(0.0, 2.0);
        let phase = C64::from_polar(1.0, 0.7);
        let mut plain = 0.0;
        let mut rotated = 0.0;
        let seeds = 20;
        for s in 0..seeds {
            let w = sample_wave(&sd, &i, s).unwrap();
            let (a, _) = value_statistics(&w);
            plain += a;
            let mut w2 = w.clone();
            for z in &mut w2.psi {
                *z *= phase;
            }
            let (b, _) = value_statistics(&w2);
            rotated += b;
        }
        plain /= seeds as f64;
        rotated /= seeds as f64;
        assert!((plain - rotated).abs() < 0.02, "{plain} vs {rotated}");
    }

    #[test]
    fn lp_and_sign_change_basics() {
        let w = WaveSample {
            psi: vec![
                C64::new(1.0, -1.0),
                C64::new(-1.0, 1.0),
                C64::new(1.0, -1.0),
                C64::new(-1.0, 1.0),
            ],
            window: AngleInterval::full_circle(),
            dim_s: 1,
            seed: 0,
        };
        let lp = lp_norms(&w, &[2.0, 4.0, f64::INFINITY]);
        assert!((lp[0].1 - 8.0).abs() < 1e-12); // sum |z|^2 = 4 * 2
        assert!((lp[1].1 - 16.0).abs() < 1e-12); // sum |z|^4 = 4 * 4
        assert!((lp[2].1 - 2.0f64.sqrt()).abs() < 1e-12);
        let (r, i) = sign_changes(&w);
        assert_eq!(r, 4); // alternating real part, cyclic
        assert_eq!(i, 4);
        let constant = WaveSample {
            psi: vec![C64::new(1.0, 2.0); 8],
            window: AngleInterval::full_circle(),
            dim_s: 1,
            seed: 0,
        };
        assert_eq!(sign_changes(&constant), (0, 0));
        // zeros are skipped, not counted
        let zeros = WaveSample {
            psi: vec![C64::new(1.0, 1.0), C64::new(0.0, 0.0), C64::new(-1.0, 1.0)],
            window: AngleInterval::full_circle(),
            dim_s: 1,
            seed: 0,
        };
        let (r, _) = sign_changes(&zeros);
        assert_eq!(r, 1); // only the (-1) -> 1 wraparound pair counts
    }

    #[test]
    fn sign_change_histogram_mass() {
        let sd = sd_for(128);
        let i = AngleInterval::new(0.0, 2.0);
        let samples: Vec<WaveSample> =
            (0..40).map(|s| sample_wave(&sd, &i, s).unwrap()).collect();
        let hist = sign_change_distribution(&samples, 16).unwrap();
        let total: f64 = hist.iter().sum();
        // total mass = (2/N) mean count, which is ~1 for these windows
        assert!((total - 1.0).abs() < 0.15, "total {total}");
        assert!(sign_change_distribution(&samples[..5], 16).is_err());
    }

    #[test]
    fn autocorrelation_closed_forms() {
        let sd = sd_for(128);
        let i = AngleInterval::new(1.0, 1.5);
        let rep = autocorrelation(&sd, &i, 17, 63, 2000, 5).unwrap();
        // gaussian fourth moment: closed m4 = 2 (closed m2)^2
        assert!((rep.closed_m4_x - 2.0 * rep.closed_m2_x * rep.closed_m2_x).abs() < 1e-12);
        // Monte Carlo agrees with Isserlis within 5 standard errors
        assert!((rep.m2_x - rep.closed_m2_x).abs() <= 5.0 * rep.se_m2 + 1e-9);
        assert!((rep.m4_x - rep.closed_m4_x).abs() <= 5.0 * rep.se_m4 + 1e-9);
        assert!((rep.cross_xy - rep.closed_cross_xy).abs() <= 5.0 * rep.se_cross + 1e-9);
    }

    #[test]
    fn concentration_for_constant_observable() {
        let sd = sd_for(64);
        let i = AngleInterval::new(0.0, 3.0);
        let a = Observable::constant(C64::new(0.5, 0.0));
        let rep = matrix_element_concentration(&sd, &i, &a, 50, 3, 0.2).unwrap();
        // deviation = 0.5 (||psi||^2 - 1), concentrated near zero
        assert!(rep.frac_within_band >= 0.9, "frac {}", rep.frac_within_band);
    }
}
