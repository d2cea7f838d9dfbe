//! Worked first-passage laws and initial densities for reflected BM.
//!
//! Every transform here is analytic and written in a form that only stores
//! bounded exponentials for `Re √θ ≥ 0`, so the same closure serves real
//! evaluation, moment extraction and inversion along the imaginary axis.

use alloc::sync::Arc;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::analytic_bm::fpt_cdf_driftless;
use crate::special::{
    beta_kernel, cosh_ratio, one_minus_exp_over, power_exp_integral, sinhc, tanhc, tanhc_defect,
};
use crate::{DensityOnInterval, Error, Result, TransformFn};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `1/cosh(z)` through `e^{−|z|}`.
fn sech(z: Complex64) -> Complex64 {
    let z = if z.re < 0.0 { -z } else { z };
    let e = (-z).exp();
    2.0 * e / (ONE + e * e)
}

/// Uniform start on `(a, S)`: `f̂(θ) = tanh(L√2θ)/(L√2θ)`, `L = S − a`.
pub fn example1_fhat(a: f64, s: f64) -> TransformFn {
    let l2 = (s - a) * (s - a);
    TransformFn::analytic(move |z| tanhc(2.0 * l2 * z))
}

pub fn example1_ghat(a: f64, s: f64) -> TransformFn {
    let l = s - a;
    TransformFn::analytic(move |z| (-a * z).exp() * one_minus_exp_over(l * z))
}

pub fn example1_density(a: f64, s: f64) -> DensityOnInterval {
    DensityOnInterval::uniform(a, s)
}

/// First-passage density `L⁻² Σ exp(−(k+½)²π²t/(2L²))` of the uniform start.
pub fn example1_fpt_density(a: f64, s: f64, t: f64) -> f64 {
    let l = s - a;
    let tau = t / (l * l);
    if tau <= 0.0 {
        return 0.0;
    }
    let v = if tau < 1.0 {
        // theta-function form of the same series, fast for small times
        let mut sum = 1.0;
        for n in 1..20 {
            let term = 2.0 * libm::exp(-2.0 * (n * n) as f64 / tau);
            sum += if n % 2 == 0 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        sum / libm::sqrt(2.0 * PI * tau)
    } else {
        let mut sum = 0.0;
        for k in 0..1000 {
            let kh = k as f64 + 0.5;
            let term = libm::exp(-kh * kh * PI * PI * tau / 2.0);
            sum += term;
            if term < 1e-18 {
                break;
            }
        }
        sum
    };
    v / (l * l)
}

/// CDF of the first-passage time of the uniform start.
pub fn example1_cdf(a: f64, s: f64, t: f64) -> f64 {
    let l = s - a;
    let tau = t / (l * l);
    if tau <= 0.0 {
        return 0.0;
    }
    let v = if tau < 1.0 {
        let mut v = libm::sqrt(2.0 * tau / PI);
        for n in 1..20 {
            let nf = n as f64;
            let term = 2.0 / libm::sqrt(2.0 * PI)
                * (2.0 * libm::sqrt(tau) * libm::exp(-2.0 * nf * nf / tau)
                    - 2.0 * libm::sqrt(2.0 * PI) * nf * libm::erfc(nf * libm::sqrt(2.0 / tau)));
            v += if n % 2 == 0 { term } else { -term };
            if libm::fabs(term) < 1e-18 {
                break;
            }
        }
        v
    } else {
        let mut tail = 0.0;
        for k in 0..1000 {
            let kh = k as f64 + 0.5;
            let term = 2.0 / (kh * kh * PI * PI) * libm::exp(-kh * kh * PI * PI * tau / 2.0);
            tail += term;
            if term < 1e-18 {
                break;
            }
        }
        1.0 - tail
    };
    v.clamp(0.0, 1.0)
}

/// Sine start `(π/2S) sin(πx/S)` on `(0, S)`.
pub fn example2_fhat(s: f64) -> TransformFn {
    let pi2 = PI * PI;
    TransformFn::analytic(move |z| {
        let r = (2.0 * z).sqrt();
        let den = 2.0 * z * s * s + pi2;
        if den.norm() < 1e-6 {
            // removable: 1 + cosh(S r) vanishes with the denominator
            return example2_fhat_near_pole(s, z);
        }
        0.5 * pi2 * (ONE + sech(s * r)) / den
    })
}

fn example2_fhat_near_pole(s: f64, z: Complex64) -> Complex64 {
    // average of two points symmetric about the removable point
    let z0 = Complex64::new(-PI * PI / (2.0 * s * s), 0.0);
    let h = 1e-4 / (s * s);
    let eval = |w: Complex64| {
        let r = (2.0 * w).sqrt();
        0.5 * PI * PI * (ONE + sech(s * r)) / (2.0 * w * s * s + PI * PI)
    };
    let (fm, fp) = (eval(z0 - h), eval(z0 + h));
    fm + (fp - fm) * ((z - z0) / (2.0 * h) + 0.5)
}

pub fn example2_ghat(s: f64) -> TransformFn {
    let pi2 = PI * PI;
    TransformFn::analytic(move |z| {
        let den = z * z * s * s + pi2;
        if den.norm() < 1e-8 {
            // removable at θ = ±iπ/S: value is the derivative ratio
            let num_d = -s * (-z * s).exp();
            let den_d = 2.0 * z * s * s;
            return 0.5 * pi2 * num_d / den_d;
        }
        0.5 * pi2 * (ONE + (-z * s).exp()) / den
    })
}

pub fn example2_density(s: f64) -> DensityOnInterval {
    DensityOnInterval::new(0.0, s, move |x| PI / (2.0 * s) * libm::sin(PI * x / s))
}

/// Triangular start on `(0, 1)`.
pub fn example3_fhat() -> TransformFn {
    TransformFn::analytic(|z| {
        let r = (2.0 * z).sqrt();
        let half = one_minus_exp_over(0.5 * r);
        (ONE + (-r).exp()) * half * half / (ONE + (-2.0 * r).exp())
    })
}

pub fn example3_ghat() -> TransformFn {
    TransformFn::analytic(|z| {
        let h = one_minus_exp_over(0.5 * z);
        h * h
    })
}

/// `4x` on `[0, ½]` and `4(1 − x)` on `(½, 1]`.
pub fn example3_density() -> DensityOnInterval {
    DensityOnInterval::new(
        0.0,
        1.0,
        |x| if x <= 0.5 { 4.0 * x } else { 4.0 * (1.0 - x) },
    )
}

/// Beta(2, 2) start `6x(1 − x)` on `(0, 1)`.
pub fn example4_fhat() -> TransformFn {
    TransformFn::analytic(|z| {
        let r = (2.0 * z).sqrt();
        6.0 * beta_kernel(r) * (ONE + (-r).exp()) / (ONE + (-2.0 * r).exp())
    })
}

pub fn example4_ghat() -> TransformFn {
    TransformFn::analytic(|z| 6.0 * beta_kernel(z))
}

pub fn example4_density() -> DensityOnInterval {
    DensityOnInterval::new(0.0, 1.0, |x| 6.0 * x * (1.0 - x))
}

/// Uniform start on `(0, S)` with catastrophe rate `λ`:
/// `(θ·tanh(S√(2(λ+θ)))/(S√(2(λ+θ))) + λ)/(λ + θ)`, written as
/// `1 − 2S²θ·(1 − tanhc)/u` with `u = 2S²(λ + θ)` so that `θ = −λ` is regular.
pub fn example5_fbar_hat(lambda: f64, s: f64) -> TransformFn {
    let c = 2.0 * s * s;
    TransformFn::analytic(move |z| ONE - z * c * tanhc_defect(c * (z + lambda)))
}

/// CDF of the catastrophe first-passage time of the uniform start.
pub fn example5_cdf(lambda: f64, s: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let survive = libm::exp(-lambda * t);
    example1_cdf(0.0, s, t) * survive + (1.0 - survive)
}

/// Gamma(α, λ) first-passage law `(λ/(θ + λ))^α`.
pub fn gamma_fhat(alpha: f64, lambda: f64) -> TransformFn {
    TransformFn::analytic(move |z| (lambda / (z + lambda)).powf(alpha))
}

/// The start density concentrated at `S`: `ĝ(θ) = e^{−Sθ}`, `f̂ ≡ 1`.
pub fn point_mass_ghat(s: f64) -> TransformFn {
    TransformFn::analytic(move |z| (-s * z).exp())
}

pub fn immediate_fhat() -> TransformFn {
    TransformFn::analytic(|_| ONE)
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("the g2k family needs k >= 1".into()));
    }
    Ok(())
}

/// `g_{2k}(x) = (1 + 1/(2k))(1 − (2x − 1)^{2k})` on `(0, 1)`.
pub fn g2k_density(k: u32) -> Result<DensityOnInterval> {
    check_k(k)?;
    let c = 1.0 + 0.5 / k as f64;
    Ok(DensityOnInterval::new(0.0, 1.0, move |x| {
        c * (1.0 - libm::pow(2.0 * x - 1.0, 2.0 * k as f64))
    }))
}

/// `ĝ_{2k}(θ) = c e^{−θ/2} [sinh(θ/2)/(θ/2) − ½ I_{2k}(θ/2)]`.
pub fn g2k_ghat(k: u32) -> Result<TransformFn> {
    check_k(k)?;
    let c = 1.0 + 0.5 / k as f64;
    Ok(TransformFn::analytic(move |z| {
        let h = 0.5 * z;
        c * (-h).exp() * (sinhc(h) - 0.5 * power_exp_integral(2 * k, h))
    }))
}

/// `f̂_{2k}(θ) = c cosh(s)/cosh(2s) [sinh(s)/s − ½ I_{2k}(s)]`, `s = √(θ/2)`.
pub fn g2k_fhat(k: u32) -> Result<TransformFn> {
    check_k(k)?;
    let c = 1.0 + 0.5 / k as f64;
    Ok(TransformFn::analytic(move |z| {
        let s = (0.5 * z).sqrt();
        c * cosh_ratio(1.0, 2.0, s) * (sinhc(s) - 0.5 * power_exp_integral(2 * k, s))
    }))
}

/// Conditional first-passage CDF of driftless reflected BM started at `x`,
/// as a shareable closure for goodness-of-fit tests.
pub fn driftless_conditional_cdf(a: f64, s: f64, x: f64) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    Arc::new(move |t| fpt_cdf_driftless(a, s, x, t).unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::{moments_from_transform, transform_of_samples};
    use crate::quadrature::{integrate, integrate_to_infinity};
    use approx::assert_abs_diff_eq;

    #[test]
    fn transforms_are_normalized() {
        let all = [
            example1_fhat(0.0, 1.0),
            example1_ghat(0.3, 1.4),
            example2_fhat(1.0),
            example2_ghat(1.5),
            example3_fhat(),
            example3_ghat(),
            example4_fhat(),
            example4_ghat(),
            example5_fbar_hat(0.7, 1.0),
            gamma_fhat(1.0, 2.0),
            g2k_fhat(2).unwrap(),
            g2k_ghat(3).unwrap(),
        ];
        for f in &all {
            assert_abs_diff_eq!(f.eval(0.0), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn example_one_value() {
        let v = example1_fhat(0.0, 1.0).eval(1.0);
        assert_abs_diff_eq!(
            v,
            libm::tanh(libm::sqrt(2.0)) / libm::sqrt(2.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(v, 0.62818, epsilon = 1e-5);
    }

    #[test]
    fn example_two_matches_printed_form() {
        let s = 1.3;
        for &th in &[0.05, 0.7, 4.0] {
            let r = libm::sqrt(2.0 * th);
            let c = libm::cosh(s * r);
            let printed = PI * PI / 2.0 * (1.0 + c) / (c * (2.0 * th * s * s + PI * PI));
            assert_abs_diff_eq!(example2_fhat(s).eval(th), printed, epsilon = 1e-14);
        }
    }

    #[test]
    fn example_two_removable_points() {
        let s = 1.0;
        let f = example2_fhat(s);
        let z0 = -PI * PI / 2.0;
        let near = f.eval(z0 + 1e-3);
        let at = f.eval(z0);
        assert!((near - at).abs() < 1e-2 && at.is_finite());
        let g = example2_ghat(s);
        let at = g.eval_complex(Complex64::new(0.0, PI)).unwrap();
        let near = g.eval_complex(Complex64::new(0.0, PI + 1e-5)).unwrap();
        assert!((at - near).norm() < 1e-4);
    }

    #[test]
    fn example_three_matches_printed_form() {
        for &th in &[0.05, 0.7, 4.0] {
            let r = libm::sqrt(2.0 * th);
            let er = libm::exp(r);
            let printed = (1.0 + er) * (er - 2.0 * libm::exp(libm::sqrt(th / 2.0)) + 1.0)
                / (th * libm::cosh(r) * er);
            assert_abs_diff_eq!(example3_fhat().eval(th), printed, epsilon = 1e-13);
        }
    }

    #[test]
    fn example_three_transform_pins_triangle() {
        let g = example3_density();
        for &th in &[0.1, 1.0, 5.0, 20.0] {
            assert_abs_diff_eq!(
                transform_of_samples(&g, th).unwrap(),
                example3_ghat().eval(th),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn example_four_matches_printed_form() {
        for &th in &[0.05, 0.5, 4.0] {
            let r = libm::sqrt(2.0 * th);
            let printed = 3.0 * (1.0 + libm::exp(r)) * (libm::exp(-r) * (r + 2.0) + r - 2.0)
                / (th * r * (libm::exp(r) + libm::exp(-r)));
            assert_abs_diff_eq!(example4_fhat().eval(th), printed, epsilon = 1e-12);
        }
        let m = moments_from_transform(&example4_fhat(), 2).unwrap();
        assert_abs_diff_eq!(m.values[0], 0.7, epsilon = 1e-7);
        assert_abs_diff_eq!(m.values[1], 39.0 / 35.0, epsilon = 1e-6);
    }

    #[test]
    fn example_five_matches_printed_form() {
        let (lambda, s) = (0.7, 1.0);
        let th = 1.3;
        let u = s * libm::sqrt(2.0 * (lambda + th));
        let printed = (th * libm::tanh(u) / u + lambda) / (lambda + th);
        assert_abs_diff_eq!(
            example5_fbar_hat(lambda, s).eval(th),
            printed,
            epsilon = 1e-14
        );
    }

    #[test]
    fn example_one_law_is_consistent() {
        // density integrates to the CDF and to the transform
        for &(a, s) in &[(0.0, 1.0), (0.5, 2.0)] {
            for &t in &[0.05, 0.4, 1.0, 2.5] {
                let lhs = integrate(|u| example1_fpt_density(a, s, u), 0.0, t, 1e-10)
                    .unwrap()
                    .value;
                assert_abs_diff_eq!(lhs, example1_cdf(a, s, t), epsilon = 1e-9);
            }
            let th = 0.9;
            let lt = integrate_to_infinity(
                |u| libm::exp(-th * u) * example1_fpt_density(a, s, u),
                0.0,
                1e-10,
            )
            .unwrap()
            .value;
            assert_abs_diff_eq!(lt, example1_fhat(a, s).eval(th), epsilon = 1e-9);
        }
    }

    #[test]
    fn g2k_family_k1_is_beta() {
        let f = g2k_fhat(1).unwrap();
        let g = g2k_ghat(1).unwrap();
        for &th in &[0.01, 0.5, 3.0, 30.0] {
            assert_abs_diff_eq!(f.eval(th), example4_fhat().eval(th), epsilon = 1e-10);
            assert_abs_diff_eq!(g.eval(th), example4_ghat().eval(th), epsilon = 1e-10);
        }
        assert!(g2k_density(0).is_err());
    }

    #[test]
    fn g2k_transform_matches_quadrature() {
        for k in 1..=3 {
            let d = g2k_density(k).unwrap();
            let g = g2k_ghat(k).unwrap();
            for &th in &[0.3, 2.0, 15.0] {
                assert_abs_diff_eq!(
                    transform_of_samples(&d, th).unwrap(),
                    g.eval(th),
                    epsilon = 1e-10
                );
            }
        }
    }
}
