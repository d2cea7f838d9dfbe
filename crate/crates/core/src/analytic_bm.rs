//! Closed forms for the first-passage time from below of Brownian motion with
//! constant drift `μ`, reflected at `a` (and `b`, which a path started below
//! `S ≤ b` cannot reach before `S`).
//!
//! All quantities are translation invariant, so they are evaluated in the
//! shifted coordinates `u = x − a`, `L = S − a`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::domain;
use crate::special::{cosh_ratio, phi2};
use crate::{Error, Result};

/// Below this value of `|μ|·max(S − a, S − x, 1)` the transform is evaluated
/// with the driftless formula. The drifted form is stable down to `μ = 0`,
/// so the cutoff only guards the `μ → 0` limit itself.
pub const DRIFTLESS_CUTOFF: f64 = 1e-9;

/// For `|μ|(S − a)` below this band the second moment is summed from its
/// Taylor series in `μ`; above it the closed form has no harmful cancellation.
pub const SECOND_MOMENT_SERIES_BAND: f64 = 0.1;

const SERIES_ORDER: usize = 14;
const SPECTRAL_MAX_TERMS: usize = 10_000;
const SPECTRAL_REL_TOL: f64 = 1e-14;

/// Brownian motion with drift `mu` reflected on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedBmSpec {
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

impl ReflectedBmSpec {
    pub fn new(mu: f64, a: f64, b: f64) -> Result<Self> {
        if !(mu.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(domain("drift and boundaries must be finite"));
        }
        if a >= b {
            return Err(domain(alloc::format!("need a < b, got a = {a}, b = {b}")));
        }
        Ok(Self { mu, a, b })
    }

    pub fn driftless(a: f64, b: f64) -> Result<Self> {
        Self::new(0.0, a, b)
    }

    fn check(&self, x: f64, s: f64) -> Result<()> {
        if !(s >= self.a && s <= self.b) {
            return Err(domain(alloc::format!(
                "barrier S = {s} outside [{}, {}]",
                self.a,
                self.b
            )));
        }
        if !(x >= self.a && x <= s) {
            return Err(domain(alloc::format!(
                "start x = {x} outside [{}, {s}]",
                self.a
            )));
        }
        Ok(())
    }

    fn is_driftless(&self, x: f64, s: f64) -> bool {
        let scale = (s - self.a).max(s - x).max(1.0);
        libm::fabs(self.mu) * scale < DRIFTLESS_CUTOFF
    }
}

/// A truncated series value with its convergence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub converged: bool,
}

/// `E[exp(−θ τ_S(x))]` for the reflected drifted BM.
pub fn laplace_fpt_below(spec: &ReflectedBmSpec, x: f64, s: f64, theta: f64) -> Result<f64> {
    spec.check(x, s)?;
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(domain(alloc::format!(
            "theta = {theta} must be finite and >= 0"
        )));
    }
    if theta == 0.0 || x == s {
        return Ok(1.0);
    }
    let v = laplace_below_complex(spec, x, s, Complex64::new(theta, 0.0)).re;
    if !v.is_finite() {
        return Err(Error::Overflow("laplace_fpt_below"));
    }
    Ok(v)
}

/// The analytic continuation of [`laplace_fpt_below`] to complex `θ`.
/// No argument validation.
pub fn laplace_below_complex(
    spec: &ReflectedBmSpec,
    x: f64,
    s: f64,
    theta: Complex64,
) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if theta == Complex64::new(0.0, 0.0) || x == s {
        return one;
    }
    let u = x - spec.a;
    let l = s - spec.a;
    if spec.is_driftless(x, s) {
        return cosh_ratio(u, l, (2.0 * theta).sqrt());
    }
    let mu = spec.mu;
    let r = (mu * mu + 2.0 * theta).sqrt();
    let lead = (-(s - x) * (r - mu)).exp();
    let eu = (-2.0 * u * r).exp();
    let el = (-2.0 * l * r).exp();
    if mu >= 0.0 {
        let c = mu * mu + theta + mu * r;
        lead * (theta * eu + c) / (theta * el + c)
    } else {
        // Same value with the conjugate constant; avoids 0/0 at θ → 0.
        let d = mu * mu + theta - mu * r;
        lead * (theta + d * eu) / (theta + d * el)
    }
}

/// The driftless transform `cosh((x−a)√2θ) / cosh((S−a)√2θ)`.
pub fn laplace_fpt_below_driftless(a: f64, s: f64, x: f64, theta: f64) -> Result<f64> {
    if !(a <= x && x <= s) {
        return Err(domain(alloc::format!(
            "need a <= x <= S, got {a}, {x}, {s}"
        )));
    }
    if !(theta >= 0.0) {
        return Err(domain("theta must be >= 0"));
    }
    Ok(cosh_ratio(x - a, s - a, Complex64::new(libm::sqrt(2.0 * theta), 0.0)).re)
}

/// Eigenfunction series for the driftless FPT density with reflection at 0.
///
/// Terms are summed until the next term's envelope falls below
/// `1e-14·(|sum| + 1)`, capped at 10 000 terms. For `t < 1e-6·S²` the
/// result is flagged as not converged.
pub fn spectral_density(x: f64, s: f64, t: f64) -> Result<SeriesValue> {
    if !(s > 0.0 && x >= 0.0 && x <= s) {
        return Err(domain(alloc::format!(
            "need 0 <= x <= S, S > 0; got x = {x}, S = {s}"
        )));
    }
    if !(t > 0.0) {
        return Err(domain("t must be > 0"));
    }
    if x == s {
        return Ok(SeriesValue {
            value: 0.0,
            converged: true,
        });
    }
    let rate = PI * PI * t / (2.0 * s * s);
    let mut sum = 0.0;
    let mut converged = false;
    for k in 0..SPECTRAL_MAX_TERMS {
        let kh = k as f64 + 0.5;
        let envelope = kh * libm::exp(-kh * kh * rate);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * envelope * libm::cos(kh * PI * x / s);
        let next = (kh + 1.0) * libm::exp(-(kh + 1.0) * (kh + 1.0) * rate);
        if next < SPECTRAL_REL_TOL * (libm::fabs(sum) + 1.0) {
            converged = true;
            break;
        }
    }
    Ok(SeriesValue {
        value: PI / (s * s) * sum,
        converged: converged && t >= 1e-6 * s * s,
    })
}

/// `P(τ_S(x) ≤ t)` for driftless BM reflected at `a`.
///
/// Uses the image expansion for `t ≤ (S−a)²` and the eigenfunction expansion
/// beyond; both converge in a handful of terms in their range.
pub fn fpt_cdf_driftless(a: f64, s: f64, x: f64, t: f64) -> Result<f64> {
    if !(a <= x && x <= s && a < s) {
        return Err(domain(alloc::format!(
            "need a <= x <= S, a < S; got {a}, {x}, {s}"
        )));
    }
    if t <= 0.0 {
        return Ok(if x == s { 1.0 } else { 0.0 });
    }
    if x == s {
        return Ok(1.0);
    }
    let l = s - a;
    let u = x - a;
    if t <= l * l {
        let scale = libm::sqrt(2.0 * t);
        let mut sum = 0.0;
        for n in 0..200 {
            let c1 = ((2 * n + 1) as f64 * l - u) / scale;
            let c2 = ((2 * n + 1) as f64 * l + u) / scale;
            let term = libm::erfc(c1) + libm::erfc(c2);
            sum += if n % 2 == 0 { term } else { -term };
            if term < 1e-17 {
                break;
            }
        }
        Ok(sum.clamp(0.0, 1.0))
    } else {
        let rate = PI * PI * t / (2.0 * l * l);
        let mut tail = 0.0;
        for k in 0..SPECTRAL_MAX_TERMS {
            let kh = k as f64 + 0.5;
            let w = 2.0 / (kh * PI) * libm::exp(-kh * kh * rate);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            tail += sign * w * libm::cos(kh * PI * u / l);
            if w < 1e-17 {
                break;
            }
        }
        Ok((1.0 - tail).clamp(0.0, 1.0))
    }
}

/// Mean first-passage time `T₁(x)`.
///
/// Written as `2(L² φ(−2μL) − u² φ(−2μu))` with `φ(z) = (eᶻ − 1 − z)/z²`,
/// which equals the textbook form for `μ ≠ 0` and reduces to
/// `(S−a)² − (x−a)²` at `μ = 0` without cancellation.
pub fn mean_fpt(spec: &ReflectedBmSpec, x: f64, s: f64) -> Result<f64> {
    spec.check(x, s)?;
    if x == s {
        return Ok(0.0);
    }
    let u = x - spec.a;
    let l = s - spec.a;
    if spec.is_driftless(x, s) {
        return Ok(l * l - u * u);
    }
    let m = spec.mu;
    let v = 2.0 * (l * l * phi2(-2.0 * m * l) - u * u * phi2(-2.0 * m * u));
    finite(v, "mean_fpt")
}

/// `−x² + 2ax + S(S − 2a)`.
pub fn mean_fpt_driftless(a: f64, s: f64, x: f64) -> f64 {
    -x * x + 2.0 * a * x + s * (s - 2.0 * a)
}

/// Second moment `T₂(x)` of the first-passage time.
pub fn second_moment_fpt(spec: &ReflectedBmSpec, x: f64, s: f64) -> Result<f64> {
    spec.check(x, s)?;
    if x == s {
        return Ok(0.0);
    }
    let u = x - spec.a;
    let l = s - spec.a;
    let m = spec.mu;
    if spec.is_driftless(x, s) {
        return Ok(second_moment_driftless(spec.a, s, x));
    }
    if libm::fabs(m) * l < SECOND_MOMENT_SERIES_BAND {
        let table = MomentSeries::new(2, SERIES_ORDER);
        return Ok(table.eval(2, m * l, u / l) * l * l * l * l);
    }
    let el = libm::exp(-2.0 * m * l);
    let eu = libm::exp(-2.0 * m * u);
    let m2 = m * m;
    let m3 = m2 * m;
    let c2 = (-el - 2.0 - 2.0 * l * m) / (2.0 * m2 * m2);
    let c1 = -c2 * el + l / m3 * (2.0 * el + 1.0 + l * m);
    let v = u * u / m2 - u / m3 * (el + 1.0 + 2.0 * l * m + eu) + c1 + c2 * eu;
    finite(v, "second_moment_fpt")
}

/// `x⁴/3 − (4/3)a x³ − 2S(S − 2a)x² + A x + B` with the constants
/// `A = (8/3)a³ + 4aS(S − 2a)` and
/// `B = (5/3)S⁴ − (20/3)aS³ + 8S²a² − (8/3)a³S`.
pub fn second_moment_driftless(a: f64, s: f64, x: f64) -> f64 {
    let big_a = 8.0 / 3.0 * a * a * a + 4.0 * a * s * (s - 2.0 * a);
    let big_b = 5.0 / 3.0 * (s * s * s * s) - 20.0 / 3.0 * a * s * s * s + 8.0 * s * s * a * a
        - 8.0 / 3.0 * a * a * a * s;
    (x * x * x * x) / 3.0 - 4.0 / 3.0 * a * x * x * x - 2.0 * s * (s - 2.0 * a) * x * x
        + big_a * x
        + big_b
}

/// `(mean, variance)` of `τ_S(x)`.
pub fn fpt_moment_pair(spec: &ReflectedBmSpec, x: f64, s: f64) -> Result<(f64, f64)> {
    let t1 = mean_fpt(spec, x, s)?;
    let t2 = second_moment_fpt(spec, x, s)?;
    Ok((t1, (t2 - t1 * t1).max(0.0)))
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(what))
    }
}

/// Taylor coefficients in `m = μL` of the scaled moments on `[0, 1]`.
///
/// `T_n = Σ_k m^k p_{n,k}(s)` solves `½T'' + mT' = −nT_{n−1}`,
/// `T'(0) = 0`, `T(1) = 0`; matching powers of `m` gives
/// `p_{n,k}'' = −2(n p_{n−1,k} + p_{n,k−1}')`, integrated exactly on
/// polynomial coefficients.
struct MomentSeries {
    // coeffs[n][k] = ascending polynomial coefficients of p_{n,k}
    coeffs: Vec<Vec<Vec<f64>>>,
}

impl MomentSeries {
    fn new(max_n: usize, order: usize) -> Self {
        let mut coeffs = vec![vec![Vec::new(); order + 1]; max_n + 1];
        coeffs[0][0] = vec![1.0];
        for n in 1..=max_n {
            for k in 0..=order {
                let mut second = scale(&coeffs[n - 1][k], -2.0 * n as f64);
                if k > 0 {
                    let d = derivative(&coeffs[n][k - 1]);
                    add_into(&mut second, &scale(&d, -2.0));
                }
                let first = antiderivative(&second);
                let mut p = antiderivative(&first);
                let at_one = eval_poly(&p, 1.0);
                if p.is_empty() {
                    p.push(0.0);
                }
                p[0] -= at_one;
                coeffs[n][k] = p;
            }
        }
        Self { coeffs }
    }

    fn eval(&self, n: usize, m: f64, s: f64) -> f64 {
        self.coeffs[n]
            .iter()
            .rev()
            .fold(0.0, |acc, p| acc * m + eval_poly(p, s))
    }
}

fn scale(p: &[f64], c: f64) -> Vec<f64> {
    p.iter().map(|v| v * c).collect()
}

fn add_into(acc: &mut Vec<f64>, p: &[f64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, v) in acc.iter_mut().zip(p) {
        *a += v;
    }
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

fn antiderivative(p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(0.0);
    out.extend(p.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
    out
}

fn eval_poly(p: &[f64], s: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bm(mu: f64, a: f64, b: f64) -> ReflectedBmSpec {
        ReflectedBmSpec::new(mu, a, b).unwrap()
    }

    #[test]
    fn barrier_start_is_immediate() {
        let spec = bm(0.8, -1.0, 3.0);
        assert_eq!(laplace_fpt_below(&spec, 1.2, 1.2, 3.7).unwrap(), 1.0);
        assert_eq!(mean_fpt(&spec, 1.2, 1.2).unwrap(), 0.0);
        assert_eq!(second_moment_fpt(&spec, 1.2, 1.2).unwrap(), 0.0);
        assert_eq!(fpt_moment_pair(&spec, 1.2, 1.2).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rejects_out_of_range_arguments() {
        let spec = bm(0.0, 0.0, 2.0);
        assert!(matches!(
            laplace_fpt_below(&spec, 1.5, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            laplace_fpt_below(&spec, 0.5, 2.5, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            laplace_fpt_below(&spec, 0.5, 1.0, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(mean_fpt(&spec, -0.1, 1.0), Err(Error::Domain(_))));
        assert!(ReflectedBmSpec::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn driftless_cosh_ratio() {
        let spec = bm(0.0, 0.0, 2.0);
        let v = laplace_fpt_below(&spec, 0.5, 1.0, 1.0).unwrap();
        let expected = libm::cosh(0.5 * libm::sqrt(2.0)) / libm::cosh(libm::sqrt(2.0));
        assert_abs_diff_eq!(v, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.5787, epsilon = 1e-4);
    }

    #[test]
    fn negative_drift_is_finite_near_zero_theta() {
        let spec = bm(-1.3, 0.0, 2.0);
        for &th in &[1e-14, 1e-10, 1e-6] {
            let v = laplace_fpt_below(&spec, 0.3, 1.0, th).unwrap();
            assert!(v <= 1.0 && v > 0.99, "theta={th}: {v}");
        }
    }

    #[test]
    fn wide_interval_does_not_overflow() {
        let spec = bm(0.5, -400.0, 2.0);
        let v = laplace_fpt_below(&spec, 0.0, 1.0, 800.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn mean_values() {
        // T1^(0)(0) with a = 0, S = 1
        assert_eq!(mean_fpt(&bm(0.0, 0.0, 2.0), 0.0, 1.0).unwrap(), 1.0);
        let v = mean_fpt(&bm(1.0, 0.0, 2.0), 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, (libm::exp(-2.0) - 1.0) / 2.0 + 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 0.5677, epsilon = 1e-4);
    }

    #[test]
    fn mean_matches_textbook_form_away_from_zero_drift() {
        for &(mu, a, s, x) in &[
            (0.7, 0.3, 1.1, 0.5),
            (-1.4, -1.0, 0.5, -0.2),
            (3.0, 0.0, 2.0, 1.9),
        ] {
            let direct = (libm::exp(2.0 * mu * (a - s)) - libm::exp(2.0 * mu * (a - x)))
                / (2.0 * mu * mu)
                + (s - x) / mu;
            let v = mean_fpt(&bm(mu, a, s + 1.0), x, s).unwrap();
            assert_abs_diff_eq!(v, direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn second_moment_driftless_values() {
        assert_abs_diff_eq!(
            second_moment_driftless(0.0, 1.0, 0.0),
            5.0 / 3.0,
            epsilon = 1e-15
        );
        let (m, v) = fpt_moment_pair(&bm(0.0, 0.0, 2.0), 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-14);
        let (m, v) = fpt_moment_pair(&bm(0.0, 0.0, 2.0), 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(m, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.625, epsilon = 1e-14);
    }

    #[test]
    fn series_reproduces_driftless_polynomials() {
        let table = MomentSeries::new(2, 4);
        for &s in &[0.0, 0.3, 0.9] {
            assert_abs_diff_eq!(table.eval(1, 0.0, s), 1.0 - s * s, epsilon = 1e-15);
            assert_abs_diff_eq!(
                table.eval(2, 0.0, s),
                second_moment_driftless(0.0, 1.0, s),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn second_moment_is_continuous_across_series_band() {
        let l = 1.0;
        for &x in &[0.0, 0.4, 0.8] {
            for sign in [-1.0, 1.0] {
                let below = sign * (SECOND_MOMENT_SERIES_BAND - 1e-12) / l;
                let above = sign * (SECOND_MOMENT_SERIES_BAND + 1e-12) / l;
                let t_below = second_moment_fpt(&bm(below, 0.0, 2.0), x, 1.0).unwrap();
                let t_above = second_moment_fpt(&bm(above, 0.0, 2.0), x, 1.0).unwrap();
                assert!(
                    (t_below - t_above).abs() < 1e-9,
                    "x={x}: {t_below} vs {t_above}"
                );
            }
        }
    }

    #[test]
    fn general_a_second_moment_is_translation_invariant() {
        let mu = 0.9;
        let t_shifted = second_moment_fpt(&bm(mu, 0.3, 2.0), 0.6, 1.3).unwrap();
        let t_origin = second_moment_fpt(&bm(mu, 0.0, 2.0), 0.3, 1.0).unwrap();
        assert_abs_diff_eq!(t_shifted, t_origin, epsilon = 1e-12);
    }

    #[test]
    fn spectral_density_on_barrier_is_zero() {
        let v = spectral_density(1.0, 1.0, 0.3).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.converged);
    }

    #[test]
    fn spectral_density_flags_tiny_times() {
        let v = spectral_density(0.0, 1.0, 1e-7).unwrap();
        assert!(!v.converged);
        assert!(spectral_density(0.0, 1.0, 0.1).unwrap().converged);
    }

    #[test]
    fn cdf_branches_agree_at_switch() {
        for &x in &[0.0, 0.5, 0.95] {
            let l = 1.0;
            let lo = fpt_cdf_driftless(0.0, l, x, l * l * (1.0 - 1e-12)).unwrap();
            let hi = fpt_cdf_driftless(0.0, l, x, l * l * (1.0 + 1e-12)).unwrap();
            assert!((lo - hi).abs() < 1e-12, "x={x}: {lo} {hi}");
        }
    }
}
