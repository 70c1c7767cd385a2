//! Beurling function, Selberg majorant/minorant trigonometric polynomials,
//! and functional calculus of these polynomials applied to the baker unitary.
//!
//! Coefficients are produced exactly the "sampling" way: the periodized
//! majorant is a trig polynomial of degree <= floor(K), so sampling it on
//! 2 floor(K) + 2 grid points and applying a DFT recovers the Fourier
//! coefficients without aliasing. The periodization itself has an O(1/J)
//! tail if summed term by term, so the sampler splits off the sharp
//! indicator and periodizes only the error part B - sgn, whose lattice sums
//! collapse to polygamma values.

use crate::baker::BvOperator;
use crate::interval::AngleInterval;
use crate::linalg::{CMat, C64, ZERO};
use crate::torus::fft_plan;
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SelbergError {
    #[error("degree K must satisfy K/(2 pi) >= 1, got K={0}")]
    DegreeTooSmall(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Beurling function
// ---------------------------------------------------------------------------

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-9 {
        let s = PI * t;
        1.0 - s * s / 6.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Beurling's extremal majorant of sgn, evaluated by its partial-fraction
/// series. Pairing the n and -n terms makes the truncation tail
/// O(|z|/M^2); M is chosen so the certified bound 0.4(|z|+1)/M^2 <= tol.
pub fn beurling(z: f64, tol: f64) -> f64 {
    assert!(tol > 0.0);
    if z == 0.0 {
        return 1.0;
    }
    let za = z.abs();
    let m_tail = (0.4 * (za + 1.0) / tol).sqrt().ceil() as i64;
    let m = (2 * (za.ceil() as i64) + 4).max(m_tail);
    // sum_{n=1}^{M} [sinc^2(z-n) - sinc^2(z+n)] computed smallest-first
    let mut paired = 0.0f64;
    for n in (1..=m).rev() {
        let a = sinc(z - n as f64);
        let b = sinc(z + n as f64);
        paired += a * a - b * b;
    }
    let s0 = sinc(z);
    let spz = (PI * z).sin();
    paired + s0 * s0 + 2.0 * spz * spz / (PI * PI * z)
}

// ---------------------------------------------------------------------------
// Polygamma helpers (series acceleration for the periodized error part)
// ---------------------------------------------------------------------------

/// Trigamma psi_1(x) for x > 0: recurrence up to x >= 8, then the Bernoulli
/// asymptotic series.
fn trigamma(mut x: f64) -> f64 {
    assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 8.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9) + 5/(66x^11)
    let series = inv
        + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * (5.0 / 66.0)))));
    acc + series
}

/// Tetragamma psi_2(x) for x > 0 (same scheme; psi_2 < 0).
fn tetragamma(mut x: f64) -> f64 {
    assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 8.0 {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // -1/x^2 - 1/x^3 - 1/(2x^4) + 1/(6x^6) - 1/(6x^8) + 3/(10x^10)
    let series = -inv2
        - inv * inv2
        - inv2 * inv2 * (0.5 + inv2 * (-1.0 / 6.0 + inv2 * (1.0 / 6.0 + inv2 * (-3.0 / 10.0))));
    acc + series
}

/// E(t) = B(t) - 1 for t >= 0 in closed form: the two one-sided lattice sums
/// of the Beurling series collapse to trigamma, giving
/// E(t) = (2/pi^2) sin^2(pi t) (1/t - psi_1(t+1)).
fn beurling_err(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let s = (PI * t).sin();
    2.0 / (PI * PI) * s * s * (1.0 / t - trigamma(t + 1.0))
}

/// Fejer-type kernel K(t) = sinc^2(t); B(t) + B(-t) = 2 K(t).
fn fejer(t: f64) -> f64 {
    let s = sinc(t);
    s * s
}

/// E extended to all of R: E(t) = B(t) - sgn(t), via E(-t) = 2K(t) - E(t).
fn beurling_err_full(t: f64) -> f64 {
    if t >= 0.0 {
        beurling_err(t)
    } else {
        2.0 * fejer(t) - beurling_err(-t)
    }
}

const PERIODIZE_DIRECT: i64 = 64;

/// Periodization P_E(u) = sum_j E(u + d j). For integer d the tails beyond
/// |j| = 64 are summed in closed form through polygamma values (the sin^2
/// factor is j-independent then); otherwise direct summation runs to a cap
/// with a documented O(1/(d^2 Jcap)) remainder.
fn periodized_err(u: f64, d: f64) -> f64 {
    let u = u.rem_euclid(d);
    let j0 = PERIODIZE_DIRECT;
    let mut acc = 0.0;
    for j in -j0..=j0 {
        acc += beurling_err_full(u + d * j as f64);
    }
    let integer_d = (d - d.round()).abs() < 1e-9;
    if integer_d {
        let s = (PI * u).sin();
        let s2 = s * s / (PI * PI);
        // rho(t) = 1/t^2 - 1/(3 t^3) + O(1/t^5); lattice sums of 1/t^2 and
        // 1/t^3 are trigamma / tetragamma values
        let a = j0 as f64 + 1.0 + u / d;
        let sum_pos = trigamma(a) / (d * d) + tetragamma(a) / (6.0 * d * d * d);
        let b = j0 as f64 + 1.0 - u / d;
        let sum_neg = trigamma(b) / (d * d) - tetragamma(b) / (6.0 * d * d * d);
        acc + s2 * (sum_pos + sum_neg)
    } else {
        let cap = ((2.0 / (PI * PI)) / (d * d * 1e-10)).ceil() as i64;
        let cap = cap.min(3_000_000);
        for j in (j0 + 1)..=cap {
            acc += beurling_err_full(u + d * j as f64);
            acc += beurling_err_full(u - d * j as f64);
        }
        acc
    }
}

/// Periodized Selberg majorant of the arc [a, a+len) evaluated at x, split
/// as sharp indicator + half the periodized error parts of the two Beurling
/// factors. Exact (to machine precision) for integer degree d.
fn majorant_value(x: f64, start: f64, len: f64, d: f64) -> f64 {
    let c = d / (2.0 * PI);
    let dist = (x - start).rem_euclid(2.0 * PI);
    // periodized closed-interval indicator: for len = 2 pi the seam point
    // x = start is hit by both endpoints, so it counts twice
    let mut chi = if dist <= len { 1.0 } else { 0.0 };
    if len >= 2.0 * PI && dist == 0.0 {
        chi = 2.0;
    }
    let t_right = c * (len - dist); // c (b - x) mod lattice handled inside
    let t_left = c * dist; // c (x - a)
    chi + 0.5 * periodized_err(t_right, d) + 0.5 * periodized_err(t_left, d)
}

// ---------------------------------------------------------------------------
// Trigonometric polynomials and the Selberg pair
// ---------------------------------------------------------------------------

/// Coefficients c_l for |l| <= deg of a trigonometric polynomial
/// sum_l c_l e^{i l theta}.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    pub deg: i64,
    coeffs: Vec<C64>, // index l + deg
}

impl TrigPoly {
    pub fn from_coeffs(deg: i64, coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), (2 * deg + 1) as usize);
        Self { deg, coeffs }
    }

    pub fn coeff(&self, l: i64) -> C64 {
        if l.abs() > self.deg {
            ZERO
        } else {
            self.coeffs[(l + self.deg) as usize]
        }
    }

    pub fn eval(&self, theta: f64) -> C64 {
        let mut acc = ZERO;
        for l in -self.deg..=self.deg {
            acc += self.coeff(l) * C64::from_polar(1.0, l as f64 * theta);
        }
        acc
    }

    /// Product of two polynomials (coefficient convolution).
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let deg = self.deg + other.deg;
        let mut coeffs = vec![ZERO; (2 * deg + 1) as usize];
        for a in -self.deg..=self.deg {
            let ca = self.coeff(a);
            if ca == ZERO {
                continue;
            }
            for b in -other.deg..=other.deg {
                coeffs[(a + b + deg) as usize] += ca * other.coeff(b);
            }
        }
        TrigPoly { deg, coeffs }
    }

    /// Recover coefficients |l| <= deg by DFT of uniform samples; exact when
    /// the sampled function is a trig polynomial of degree <= deg and
    /// n_samples >= 2 deg + 2.
    pub fn from_samples(values: &[C64], deg: i64) -> TrigPoly {
        let n = values.len();
        assert!(n as i64 > 2 * deg);
        let plan = fft_plan(n, false);
        let mut buf = values.to_vec();
        plan.process(&mut buf);
        let mut coeffs = vec![ZERO; (2 * deg + 1) as usize];
        for l in -deg..=deg {
            let idx = l.rem_euclid(n as i64) as usize;
            coeffs[(l + deg) as usize] = buf[idx] / n as f64;
        }
        TrigPoly { deg, coeffs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Fourier coefficients of the Selberg majorant (plus) and minorant (minus)
/// of an arc, both of degree floor(K).
#[derive(Debug, Clone)]
pub struct SelbergPair {
    pub interval: AngleInterval,
    pub degree: f64,
    pub minus: TrigPoly,
    pub plus: TrigPoly,
}

impl SelbergPair {
    pub fn side(&self, side: Side) -> &TrigPoly {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// CSV dump with rows "ell,re,im,side".
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), SelbergError> {
        writeln!(w, "ell,re,im,side")?;
        for (poly, name) in [(&self.minus, "minus"), (&self.plus, "plus")] {
            for l in -poly.deg..=poly.deg {
                let c = poly.coeff(l);
                writeln!(w, "{l},{},{},{name}", c.re, c.im)?;
            }
        }
        Ok(())
    }
}

/// Build the Selberg pair for an arc at degree K: the majorant is sampled
/// and transformed; the minorant is 1 - (majorant of the complementary arc).
pub fn selberg_pair(interval: &AngleInterval, k_deg: f64) -> Result<SelbergPair, SelbergError> {
    if k_deg / (2.0 * PI) < 1.0 {
        return Err(SelbergError::DegreeTooSmall(k_deg));
    }
    let deg = k_deg.floor() as i64;
    let n_g = (2 * deg + 2) as usize;
    let sample = |start: f64, len: f64| -> Vec<C64> {
        crate::par::map_indexed(n_g, |m| {
            let x = 2.0 * PI * m as f64 / n_g as f64;
            C64::new(majorant_value(x, start, len, k_deg), 0.0)
        })
    };
    let plus = TrigPoly::from_samples(&sample(interval.start, interval.length), deg);
    // complement arc may be degenerate (length 0) when the window is the
    // whole circle; the majorant construction still applies
    let comp_start = interval.start + interval.length;
    let comp_len = 2.0 * PI - interval.length;
    let comp = TrigPoly::from_samples(&sample(comp_start, comp_len), deg);
    let mut minus_coeffs = vec![ZERO; (2 * deg + 1) as usize];
    for l in -deg..=deg {
        let base = if l == 0 { C64::new(1.0, 0.0) } else { ZERO };
        minus_coeffs[(l + deg) as usize] = base - comp.coeff(l);
    }
    let minus = TrigPoly::from_coeffs(deg, minus_coeffs);
    Ok(SelbergPair { interval: *interval, degree: k_deg, minus, plus })
}

// ---------------------------------------------------------------------------
// Functional calculus
// ---------------------------------------------------------------------------

/// Dense forward powers B^1 .. B^L of the baker unitary; negative powers are
/// taken as adjoints of these.
pub struct BvPowers {
    pub forward: Vec<CMat>,
}

pub fn bv_powers(op: &BvOperator, l: usize) -> BvPowers {
    let mut forward = Vec::with_capacity(l);
    let mut cur = CMat::identity(op.dim());
    for _ in 0..l {
        op.apply_to_columns(&mut cur, 1);
        forward.push(cur.clone());
    }
    BvPowers { forward }
}

/// F(B) = c_0 Id + sum_{l=1}^{deg} (c_l B^l + c_{-l} B^{-l}), with
/// B^{-l} = (B^l)^dagger by unitarity.
pub fn apply_trig_poly(poly: &TrigPoly, powers: &BvPowers, n: usize) -> CMat {
    assert!(powers.forward.len() as i64 >= poly.deg, "missing powers");
    let mut acc = CMat::identity(n);
    acc.scale(poly.coeff(0));
    for l in 1..=poly.deg {
        let p = &powers.forward[(l - 1) as usize];
        acc.axpy(poly.coeff(l), p);
        let pd = p.adjoint();
        acc.axpy(poly.coeff(-l), &pd);
    }
    acc
}

/// One side of the Selberg pair applied to the baker unitary.
pub fn functional_calculus(pair: &SelbergPair, side: Side, powers: &BvPowers, n: usize) -> CMat {
    apply_trig_poly(pair.side(side), powers, n)
}

/// Diagonal sandwich report for F^- <= P <= F^+.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SandwichReport {
    pub n: usize,
    pub slack: f64,
    /// max over x of (F^-)_{xx} - P_{xx} (should be <= slack)
    pub max_lower_violation: f64,
    /// max over x of P_{xx} - (F^+)_{xx} (should be <= slack)
    pub max_upper_violation: f64,
    pub diag_violations: usize,
    /// max over sampled pairs of |(F^+ - P)_{xy}| - sqrt((F^+-P)_{xx} (F^+-P)_{yy})
    pub cauchy_schwarz_max_excess: f64,
}

pub fn sandwich_check(
    f_minus: &CMat,
    p: &CMat,
    f_plus: &CMat,
    slack: f64,
    n_pairs: usize,
    seed: u64,
) -> SandwichReport {
    let n = p.rows();
    let mut max_lower: f64 = f64::NEG_INFINITY;
    let mut max_upper: f64 = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for x in 0..n {
        let lo = f_minus[(x, x)].re;
        let mid = p[(x, x)].re;
        let hi = f_plus[(x, x)].re;
        max_lower = max_lower.max(lo - mid);
        max_upper = max_upper.max(mid - hi);
        if lo - mid > slack || mid - hi > slack {
            violations += 1;
        }
    }
    let mut rng = crate::rng::stream(seed);
    use rand::Rng;
    let mut cs_excess: f64 = f64::NEG_INFINITY;
    for _ in 0..n_pairs {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        if x == y {
            continue;
        }
        let off = (f_plus[(x, y)] - p[(x, y)]).norm();
        let dx = (f_plus[(x, x)] - p[(x, x)]).re.max(0.0);
        let dy = (f_plus[(y, y)] - p[(y, y)]).re.max(0.0);
        cs_excess = cs_excess.max(off - (dx * dy).sqrt());
    }
    SandwichReport {
        n,
        slack,
        max_lower_violation: max_lower,
        max_upper_violation: max_upper,
        diag_violations: violations,
        cauchy_schwarz_max_excess: cs_excess,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beurling_at_zero_and_integers() {
        assert_eq!(beurling(0.0, 1e-12), 1.0);
        // oracle for the removable singularity: average of nearby values
        let near = 0.5 * (beurling(1e-6, 1e-10) + beurling(-1e-6, 1e-10));
        assert!((near - 1.0).abs() < 1e-5);
        for n in [1.0f64, 2.0, 5.0] {
            assert!((beurling(n, 1e-10) - 1.0).abs() < 1e-9, "B({n})");
            assert!((beurling(-n, 1e-10) + 1.0).abs() < 1e-9, "B(-{n})");
        }
    }

    #[test]
    fn beurling_majorizes_sign() {
        for i in 0..10_000 {
            let x = -20.0 + 40.0 * i as f64 / 10_000.0;
            let b = beurling(x, 1e-8);
            let sgn = if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            };
            assert!(b >= sgn - 1e-8, "B({x}) = {b}");
        }
    }

    #[test]
    fn closed_form_error_matches_series() {
        for &t in &[0.3f64, 0.5, 1.7, 2.25, 7.9, 15.4] {
            let series = beurling(t, 1e-11) - 1.0;
            let closed = beurling_err(t);
            assert!((series - closed).abs() < 1e-9, "t={t}: {series} vs {closed}");
            // reflection identity B(t) + B(-t) = 2 K(t)
            let reflect = beurling(-t, 1e-11);
            assert!((series + 1.0 + reflect - 2.0 * fejer(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn beurling_extremal_mass() {
        // integral of B - sgn over R equals 1; [-200, 200] leaves ~5e-4 in
        // the tails. The integrand jumps at 0, so Simpson runs on each half.
        let r = 200.0;
        let steps = 40_000usize; // even
        let h = r / steps as f64;
        let simpson_half = |sign: f64| {
            let f = |x: f64| beurling_err_full(sign * x);
            let mut acc = f(0.0) + f(r);
            for i in 1..steps {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(i as f64 * h);
            }
            acc * h / 3.0
        };
        // left half starts from the interior limit E(0-) = 2
        let left = {
            let f = |x: f64| if x == 0.0 { 2.0 } else { beurling_err_full(-x) };
            let mut acc = f(0.0) + f(r);
            for i in 1..steps {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(i as f64 * h);
            }
            acc * h / 3.0
        };
        let mass = simpson_half(1.0) + left;
        assert!((mass - 1.0).abs() <= 1e-3, "mass = {mass}");
    }

    #[test]
    fn periodized_error_matches_brute_force() {
        let d = 40.0;
        for &u in &[0.0f64, 0.37, 7.4, 19.99, 39.2] {
            let fast = periodized_err(u, d);
            let mut brute = 0.0;
            for j in (-2_000_000i64..=2_000_000).rev() {
                brute += beurling_err_full(u + d * j as f64);
            }
            assert!((fast - brute).abs() < 1e-9, "u={u}: {fast} vs {brute}");
        }
    }

    #[test]
    fn selberg_pair_constant_terms() {
        // ghat(0) = (len +- 2 pi / K) / (2 pi), spec instance 0.19324
        let i = AngleInterval::new(2.1, 0.9);
        let pair = selberg_pair(&i, 20.0).unwrap();
        let expect_plus = (0.9 + 2.0 * PI / 20.0) / (2.0 * PI);
        let expect_minus = (0.9 - 2.0 * PI / 20.0) / (2.0 * PI);
        assert!((pair.plus.coeff(0).re - expect_plus).abs() < 5e-10);
        assert!((pair.plus.coeff(0).re - 0.19324).abs() < 5e-6);
        assert!((pair.minus.coeff(0).re - expect_minus).abs() < 5e-10);
        assert!(pair.plus.coeff(0).im.abs() < 1e-12);
    }

    #[test]
    fn selberg_pair_sandwiches_indicator() {
        let i = AngleInterval::new(2.1, 0.9);
        let pair = selberg_pair(&i, 40.0).unwrap();
        for m in 0..10_000 {
            let theta = 2.0 * PI * m as f64 / 10_000.0;
            let chi = if i.contains(theta) { 1.0 } else { 0.0 };
            let lo = pair.minus.eval(theta).re;
            let hi = pair.plus.eval(theta).re;
            assert!(lo <= chi + 1e-9, "theta={theta}: minorant {lo} > {chi}");
            assert!(hi >= chi - 1e-9, "theta={theta}: majorant {hi} < {chi}");
        }
    }

    #[test]
    fn selberg_coefficients_bounded() {
        let i = AngleInterval::new(0.4, 1.7);
        let k = 25.0;
        let pair = selberg_pair(&i, k).unwrap();
        let bound = (1.7 + 2.0 * PI / k) / (2.0 * PI) + 1e-12;
        for l in -(pair.plus.deg)..=pair.plus.deg {
            assert!(pair.plus.coeff(l).norm() <= bound, "plus l={l}");
            assert!(pair.minus.coeff(l).norm() <= bound, "minus l={l}");
        }
        // real polynomials: conjugate-symmetric coefficients
        for l in 1..=pair.plus.deg {
            let diff = (pair.plus.coeff(l) - pair.plus.coeff(-l).conj()).norm();
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn selberg_rejects_degree_below_one_period() {
        let i = AngleInterval::new(0.0, 1.0);
        assert!(matches!(selberg_pair(&i, 4.0), Err(SelbergError::DegreeTooSmall(_))));
    }

    #[test]
    fn full_circle_pair() {
        let i = AngleInterval::full_circle();
        let pair = selberg_pair(&i, 20.0).unwrap();
        // majorant of the full circle stays >= 1, minorant <= 1
        for m in 0..1000 {
            let theta = 2.0 * PI * m as f64 / 1000.0;
            assert!(pair.plus.eval(theta).re >= 1.0 - 1e-9);
            assert!(pair.minus.eval(theta).re <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn trig_poly_mul_and_samples() {
        // (e^{i t} + e^{-i t})^2 = e^{2it} + 2 + e^{-2it}
        let p = TrigPoly::from_coeffs(1, vec![C64::new(1.0, 0.0), ZERO, C64::new(1.0, 0.0)]);
        let sq = p.mul(&p);
        assert!((sq.coeff(0) - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((sq.coeff(2) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(sq.coeff(1).norm() < 1e-15);
        // sampling round trip
        let n = 16usize;
        let vals: Vec<C64> = (0..n)
            .map(|m| sq.eval(2.0 * PI * m as f64 / n as f64))
            .collect();
        let rec = TrigPoly::from_samples(&vals, 2);
        for l in -2..=2 {
            assert!((rec.coeff(l) - sq.coeff(l)).norm() < 1e-12);
        }
    }

    #[test]
    fn functional_calculus_identity_piece() {
        let op = BvOperator::new(16).unwrap();
        let powers = bv_powers(&op, 0);
        let c = C64::new(0.35, 0.0);
        let poly = TrigPoly::from_coeffs(0, vec![c]);
        let m = apply_trig_poly(&poly, &powers, 16);
        let mut expect = CMat::identity(16);
        expect.scale(c);
        assert!(m.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn sandwich_check_on_identity_projector() {
        // P = Id comes from the full-circle window; F^- <= Id <= F^+ on diag
        let n = 32;
        let op = BvOperator::new(n).unwrap();
        let i = AngleInterval::full_circle();
        let pair = selberg_pair(&i, 20.0).unwrap();
        let powers = bv_powers(&op, pair.plus.deg as usize);
        let fm = functional_calculus(&pair, Side::Minus, &powers, n);
        let fp = functional_calculus(&pair, Side::Plus, &powers, n);
        assert!(fm.hermitian_defect() < 1e-10);
        assert!(fp.hermitian_defect() < 1e-10);
        let p = CMat::identity(n);
        let report = sandwich_check(&fm, &p, &fp, 1e-8, 500, 7);
        assert_eq!(report.diag_violations, 0);
        assert!(report.max_lower_violation <= 1e-8);
        assert!(report.max_upper_violation <= 1e-8);
    }

    #[test]
    fn csv_dump_has_both_sides() {
        let pair = selberg_pair(&AngleInterval::new(1.0, 1.0), 10.0).unwrap();
        let mut buf = Vec::new();
        pair.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("ell,re,im,side\n"));
        assert!(s.contains(",minus") && s.contains(",plus"));
    }
}

