//! Numerical Laplace inversion, forward transforms of sampled densities and
//! moments read off a transform at the origin.
//!
//! Three inversion methods are available:
//!
//! - Gaver–Stehfest on the real axis, for smooth functions on `(0, ∞)`;
//! - fixed Talbot, for analytic transforms of smooth functions of time;
//! - a filtered Fourier series on a known bounded support `[lo, hi]`, for
//!   analytic transforms of compactly supported densities. The series
//!   coefficients are the transform on the imaginary axis, so the method
//!   has no trouble with the `e^{−lo·θ}` and `e^{−hi·θ}` factors that make
//!   real-axis methods fail on such densities.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::integrate;
use crate::{DensityOnInterval, Error, Result, TransformFn};

pub const DEFAULT_STEHFEST_ORDER: usize = 14;
pub const DEFAULT_TALBOT_NODES: usize = 24;
pub const DEFAULT_HARMONICS: usize = 2048;
pub const DEFAULT_FILTER_ORDER: u32 = 8;

/// Absolute tolerance of [`transform_of_samples`].
pub const SAMPLE_TRANSFORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InversionMethod {
    GaverStehfest {
        order: usize,
    },
    Talbot {
        nodes: usize,
    },
    FourierSeries {
        lo: f64,
        hi: f64,
        harmonics: usize,
        filter_order: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub method: InversionMethod,
}

impl InversionConfig {
    pub fn stehfest(order: usize) -> Self {
        Self {
            method: InversionMethod::GaverStehfest { order },
        }
    }

    pub fn talbot(nodes: usize) -> Self {
        Self {
            method: InversionMethod::Talbot { nodes },
        }
    }

    pub fn fourier(lo: f64, hi: f64) -> Self {
        Self {
            method: InversionMethod::FourierSeries {
                lo,
                hi,
                harmonics: DEFAULT_HARMONICS,
                filter_order: DEFAULT_FILTER_ORDER,
            },
        }
    }
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self::stehfest(DEFAULT_STEHFEST_ORDER)
    }
}

/// Approximates the original function of `f` at `t`.
pub fn invert(f: &TransformFn, t: f64, cfg: &InversionConfig) -> Result<f64> {
    let mut out = invert_grid(f, &[t], cfg)?;
    Ok(out.pop().unwrap_or(f64::NAN))
}

/// Inverts at every abscissa of `grid`. The Fourier method computes its
/// coefficients once for the whole grid.
pub fn invert_grid(f: &TransformFn, grid: &[f64], cfg: &InversionConfig) -> Result<Vec<f64>> {
    match cfg.method {
        InversionMethod::GaverStehfest { order } => {
            let w = stehfest_weights(order)?;
            grid.iter().map(|&t| stehfest_at(f, t, &w)).collect()
        }
        InversionMethod::Talbot { nodes } => grid.iter().map(|&t| talbot_at(f, t, nodes)).collect(),
        InversionMethod::FourierSeries {
            lo,
            hi,
            harmonics,
            filter_order,
        } => {
            let inv = FourierInverter::new(f, lo, hi, harmonics, filter_order)?;
            Ok(grid.iter().map(|&x| inv.eval(x)).collect())
        }
    }
}

/// Stehfest weights `V_k`, `k = 1..=n`.
pub fn stehfest_weights(n: usize) -> Result<Vec<f64>> {
    if n < 2 || !n.is_multiple_of(2) || n > 20 {
        return Err(Error::MethodUnsuitable(format!(
            "Stehfest order must be even and in 2..=20, got {n}"
        )));
    }
    let half = n / 2;
    let fact = |m: usize| (1..=m).fold(1.0f64, |acc, j| acc * j as f64);
    let mut w = Vec::with_capacity(n);
    for k in 1..=n {
        let mut sum = 0.0;
        for j in k.div_ceil(2)..=k.min(half) {
            sum += libm::pow(j as f64, half as f64) * fact(2 * j)
                / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        }
        let sign = if (k + half).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        w.push(sign * sum);
    }
    Ok(w)
}

fn stehfest_at(f: &TransformFn, t: f64, w: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(crate::error::domain("Stehfest inversion needs t > 0"));
    }
    let ln2t = core::f64::consts::LN_2 / t;
    if ln2t < f.domain_min() {
        return Err(Error::MethodUnsuitable(format!(
            "transform not defined at the Stehfest abscissa {ln2t}"
        )));
    }
    let sum: f64 = w
        .iter()
        .enumerate()
        .map(|(i, wk)| wk * f.eval((i + 1) as f64 * ln2t))
        .sum();
    let v = sum * ln2t;
    if !v.is_finite() {
        return Err(Error::MethodUnsuitable("Stehfest sum is not finite".into()));
    }
    Ok(v)
}

fn talbot_at(f: &TransformFn, t: f64, m: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(crate::error::domain("Talbot inversion needs t > 0"));
    }
    if m < 2 {
        return Err(Error::MethodUnsuitable(
            "Talbot needs at least 2 nodes".into(),
        ));
    }
    let func = f.complex_fn().ok_or_else(|| {
        Error::MethodUnsuitable("Talbot inversion needs an analytic transform".into())
    })?;
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut sum = 0.5 * func(Complex64::new(r, 0.0)).re * libm::exp(r * t);
    for k in 1..m {
        let th = k as f64 * PI / m as f64;
        let cot = libm::cos(th) / libm::sin(th);
        let node = Complex64::new(r * th * cot, r * th);
        let sigma = th + (th * cot - 1.0) * cot;
        let term = (node * t).exp() * func(node) * Complex64::new(1.0, sigma);
        sum += term.re;
    }
    let v = sum * r / m as f64;
    if !v.is_finite() {
        return Err(Error::MethodUnsuitable("Talbot sum is not finite".into()));
    }
    Ok(v)
}

/// Filtered Fourier series of a density supported in `[lo, hi]`, built
/// from its transform on the imaginary axis.
///
/// With `P = hi − lo` and `ωₙ = 2πn/P`, the coefficients are
/// `cₙ = e^{iωₙ lo} F(iωₙ) / P` and the series is damped by the exponential
/// filter `exp(−36 (n/N)^p)`.
#[derive(Debug, Clone)]
pub struct FourierInverter {
    lo: f64,
    hi: f64,
    coeffs: Vec<Complex64>,
}

impl FourierInverter {
    pub fn new(
        f: &TransformFn,
        lo: f64,
        hi: f64,
        harmonics: usize,
        filter_order: u32,
    ) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Support(format!("invalid support [{lo}, {hi}]")));
        }
        if harmonics == 0 || filter_order == 0 {
            return Err(Error::MethodUnsuitable(
                "Fourier inversion needs harmonics > 0 and filter order > 0".into(),
            ));
        }
        let func = f.complex_fn().ok_or_else(|| {
            Error::MethodUnsuitable("Fourier inversion needs an analytic transform".into())
        })?;
        let period = hi - lo;
        let mut coeffs = Vec::with_capacity(harmonics + 1);
        for n in 0..=harmonics {
            let w = 2.0 * PI * n as f64 / period;
            let shift = Complex64::new(0.0, w * lo).exp();
            let c = shift * func(Complex64::new(0.0, w)) / period;
            let damp =
                libm::exp(-36.0 * libm::pow(n as f64 / harmonics as f64, filter_order as f64));
            let c = c * damp;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::MethodUnsuitable(format!(
                    "transform is not finite at the harmonic iω = {w}i"
                )));
            }
            coeffs.push(c);
        }
        Ok(Self { lo, hi, coeffs })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Mass of the series over its support.
    pub fn mass(&self) -> f64 {
        self.coeffs[0].re * (self.hi - self.lo)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        let period = self.hi - self.lo;
        let step = Complex64::new(0.0, 2.0 * PI * (x - self.lo) / period).exp();
        let mut phase = Complex64::new(1.0, 0.0);
        let mut sum = 0.0;
        for c in &self.coeffs[1..] {
            phase *= step;
            sum += (c * phase).re;
        }
        self.coeffs[0].re + 2.0 * sum
    }

    /// Laplace transform of the (filtered) series itself at real `θ`.
    pub fn transform_at(&self, theta: f64) -> f64 {
        let period = self.hi - self.lo;
        let z = Complex64::new(theta * period, 0.0);
        let base = libm::exp(-theta * self.lo);
        let mut sum = self.coeffs[0].re * period * crate::special::one_minus_exp_over(z).re;
        let edge = 1.0 - libm::exp(-theta * period);
        for (n, c) in self.coeffs.iter().enumerate().skip(1) {
            let w = 2.0 * PI * n as f64 / period;
            sum += 2.0 * (c * edge / Complex64::new(theta, -w)).re;
        }
        base * sum
    }
}

/// `∫ e^{−θx} g(x) dx` over the support of `g`, to absolute tolerance 1e−10.
pub fn transform_of_samples(density: &DensityOnInterval, theta: f64) -> Result<f64> {
    let (lo, hi) = density.support();
    Ok(integrate(
        |x| libm::exp(-theta * x) * density.eval(x),
        lo,
        hi,
        SAMPLE_TRANSFORM_TOL,
    )?
    .value)
}

/// Moments extracted from a transform at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    /// `E[X^k]` for `k = 1..=max_order`.
    pub values: Vec<f64>,
    /// Set when the last two Richardson levels of some order disagree by
    /// more than 1e−3 relative.
    pub indeterminate: bool,
}

const RICHARDSON_LEVELS: usize = 5;

fn base_step(order: usize) -> f64 {
    match order {
        1 => 1e-2,
        2 => 2e-2,
        3 => 5e-2,
        _ => 1e-1,
    }
}

/// `E[X^k] = (−1)^k F^{(k)}(0)` by Richardson-extrapolated finite
/// differences.
///
/// Central stencils are used when the transform can be evaluated at
/// negative arguments (every analytic transform, or a real one with
/// `domain_min < 0`); otherwise forward stencils on `θ ≥ 0`. The base step
/// grows with the order so that rounding (`~ε/h^k`) stays below the
/// truncation error; it assumes the transform varies on an `O(1)` scale.
pub fn moments_from_transform(f: &TransformFn, max_order: usize) -> Result<MomentEstimate> {
    let central = f.is_analytic() || f.domain_min() < -1.0;
    let mut values = Vec::with_capacity(max_order);
    let mut indeterminate = false;
    for k in 1..=max_order {
        let h0 = base_step(k);
        let mut table: Vec<Vec<f64>> = Vec::with_capacity(RICHARDSON_LEVELS);
        for level in 0..RICHARDSON_LEVELS {
            let h = h0 / libm::pow(2.0, level as f64);
            let d = if central {
                central_difference(f, k, h)
            } else {
                forward_difference(f, k, h)
            };
            let mut row = Vec::with_capacity(level + 1);
            row.push(d);
            for j in 1..=level {
                // central stencils expand in h², forward ones in h
                let p = if central { 2 * j } else { j } as f64;
                let factor = libm::pow(2.0, p);
                let prev = &table[level - 1];
                row.push((factor * row[j - 1] - prev[j - 1]) / (factor - 1.0));
            }
            table.push(row);
        }
        let last = table[RICHARDSON_LEVELS - 1][RICHARDSON_LEVELS - 1];
        let before = table[RICHARDSON_LEVELS - 2][RICHARDSON_LEVELS - 2];
        if !last.is_finite() {
            return Err(Error::NotConverged(format!(
                "moment of order {k} is not finite"
            )));
        }
        if libm::fabs(last - before) > 1e-3 * libm::fabs(last).max(1e-8) {
            indeterminate = true;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        values.push(sign * last);
    }
    Ok(MomentEstimate {
        values,
        indeterminate,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn central_difference(f: &TransformFn, k: usize, h: f64) -> f64 {
    let mut sum = 0.0;
    for j in 0..=k {
        let x = (j as f64 - k as f64 / 2.0) * h;
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binomial(k, j) * f.eval(x);
    }
    sum / libm::pow(h, k as f64)
}

fn forward_difference(f: &TransformFn, k: usize, h: f64) -> f64 {
    let start = f.domain_min().max(0.0);
    let mut sum = 0.0;
    for j in 0..=k {
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binomial(k, j) * f.eval(start + j as f64 * h);
    }
    sum / libm::pow(h, k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{beta_kernel, one_minus_exp_over, tanhc};
    use approx::assert_abs_diff_eq;

    fn exp_pair() -> TransformFn {
        TransformFn::analytic(|z| 1.0 / (z + 1.0))
    }

    fn uniform_hat() -> TransformFn {
        TransformFn::analytic(one_minus_exp_over)
    }

    #[test]
    fn stehfest_weights_sum_to_zero() {
        let w = stehfest_weights(14).unwrap();
        assert!(w.iter().sum::<f64>().abs() < 1e-6);
        assert!(matches!(
            stehfest_weights(13),
            Err(Error::MethodUnsuitable(_))
        ));
        assert!(matches!(
            stehfest_weights(22),
            Err(Error::MethodUnsuitable(_))
        ));
    }

    #[test]
    fn stehfest_exponential() {
        let v = invert(&exp_pair(), 1.0, &InversionConfig::default()).unwrap();
        assert_abs_diff_eq!(v, libm::exp(-1.0), epsilon = 1e-6);
    }

    #[test]
    fn talbot_exponential() {
        let v = invert(
            &exp_pair(),
            1.0,
            &InversionConfig::talbot(DEFAULT_TALBOT_NODES),
        )
        .unwrap();
        assert_abs_diff_eq!(v, libm::exp(-1.0), epsilon = 1e-8);
    }

    #[test]
    fn talbot_rejects_real_only_transform() {
        let f = TransformFn::real(|t| 1.0 / (t + 1.0), 0.0);
        assert!(matches!(
            invert(&f, 1.0, &InversionConfig::talbot(24)),
            Err(Error::MethodUnsuitable(_))
        ));
    }

    #[test]
    fn fourier_uniform_interior() {
        let v = invert(&uniform_hat(), 0.5, &InversionConfig::fourier(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn fourier_sine_density() {
        let pi2 = PI * PI;
        let f = TransformFn::analytic(move |z| 0.5 * pi2 * (1.0 + (-z).exp()) / (z * z + pi2));
        let inv =
            FourierInverter::new(&f, 0.0, 1.0, DEFAULT_HARMONICS, DEFAULT_FILTER_ORDER).unwrap();
        assert_abs_diff_eq!(inv.eval(0.5), PI / 2.0, epsilon = 1e-6);
        for i in 1..20 {
            let x = i as f64 / 20.0;
            assert_abs_diff_eq!(inv.eval(x), PI / 2.0 * libm::sin(PI * x), epsilon = 1e-6);
        }
    }

    #[test]
    fn fourier_series_transform_round_trip() {
        let f = TransformFn::analytic(|z| 6.0 * beta_kernel(z));
        let inv =
            FourierInverter::new(&f, 0.0, 1.0, DEFAULT_HARMONICS, DEFAULT_FILTER_ORDER).unwrap();
        assert_abs_diff_eq!(inv.mass(), 1.0, epsilon = 1e-12);
        for &th in &[0.1, 1.0, 3.0] {
            assert_abs_diff_eq!(inv.transform_at(th), f.eval(th), epsilon = 1e-9);
        }
    }

    #[test]
    fn fourier_on_shifted_support() {
        let inv = FourierInverter::new(
            &TransformFn::analytic(|z| (-2.0 * z).exp() * one_minus_exp_over(3.0 * z)),
            2.0,
            5.0,
            DEFAULT_HARMONICS,
            DEFAULT_FILTER_ORDER,
        )
        .unwrap();
        assert_abs_diff_eq!(inv.eval(3.3), 1.0 / 3.0, epsilon = 1e-10);
        assert_eq!(inv.eval(5.5), 0.0);
    }

    #[test]
    fn sample_transforms() {
        let u = DensityOnInterval::uniform(0.0, 1.0);
        assert_abs_diff_eq!(
            transform_of_samples(&u, 1.0).unwrap(),
            1.0 - libm::exp(-1.0),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(transform_of_samples(&u, 0.0).unwrap(), 1.0, epsilon = 1e-10);
        let beta = DensityOnInterval::new(0.0, 1.0, |x| 6.0 * x * (1.0 - x));
        assert_abs_diff_eq!(
            transform_of_samples(&beta, 2.0).unwrap(),
            3.0 * libm::exp(-2.0),
            epsilon = 1e-10
        );
    }

    #[test]
    fn moments_of_example_one() {
        let f = TransformFn::analytic(|z| tanhc(2.0 * z));
        let m = moments_from_transform(&f, 3).unwrap();
        assert!(!m.indeterminate);
        assert_abs_diff_eq!(m.values[0], 2.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.values[1], 16.0 / 15.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.values[2], 272.0 / 105.0, epsilon = 1e-6);
    }

    #[test]
    fn moments_of_point_mass() {
        let c = 0.8;
        let f = TransformFn::analytic(move |z| (-c * z).exp());
        let m = moments_from_transform(&f, 2).unwrap();
        assert_abs_diff_eq!(m.values[0], c, epsilon = 1e-10);
        assert_abs_diff_eq!(m.values[1], c * c, epsilon = 1e-9);
    }

    #[test]
    fn forward_differences_on_real_transform() {
        let f = TransformFn::real(|t| 1.0 / (1.0 + t), 0.0);
        let m = moments_from_transform(&f, 2).unwrap();
        assert_abs_diff_eq!(m.values[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.values[1], 2.0, epsilon = 1e-5);
    }

    #[test]
    fn moments_match_quadrature_of_samples() {
        let beta = DensityOnInterval::new(0.0, 1.0, |x| 6.0 * x * (1.0 - x));
        let b2 = beta.clone();
        let f = TransformFn::real(
            move |t| transform_of_samples(&b2, t).unwrap(),
            f64::NEG_INFINITY,
        );
        let m = moments_from_transform(&f, 2).unwrap();
        assert_abs_diff_eq!(m.values[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(m.values[1], 0.3, epsilon = 1e-6);
    }
}
