//! Entire and meromorphic helper functions with removable singularities
//! handled by short Taylor series.
//!
//! Every complex helper that takes a square root uses the principal branch
//! (`Re √u ≥ 0`), which keeps the stored exponentials bounded. The functions
//! of `u` below are even in `√u`, so the branch never changes the value.

use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(e^z − 1 − z) / z²`, accurate through `z = 0`.
pub fn phi2(z: f64) -> f64 {
    if libm::fabs(z) < 0.1 {
        // Σ z^k / (k+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 1..12 {
            term *= z / (k as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (libm::expm1(z) - z) / (z * z)
    }
}

/// `tanh(√u) / √u`.
pub fn tanhc(u: Complex64) -> Complex64 {
    if u.norm() < 1e-2 {
        let c = [
            1.0,
            -1.0 / 3.0,
            2.0 / 15.0,
            -17.0 / 315.0,
            62.0 / 2835.0,
            -1382.0 / 155_925.0,
        ];
        return horner(&c, u);
    }
    let z = u.sqrt();
    tanh(z) / z
}

/// `(1 − tanh(√u)/√u) / u`.
pub fn tanhc_defect(u: Complex64) -> Complex64 {
    if u.norm() < 1e-2 {
        let c = [
            1.0 / 3.0,
            -2.0 / 15.0,
            17.0 / 315.0,
            -62.0 / 2835.0,
            1382.0 / 155_925.0,
            -21_844.0 / 6_081_075.0,
        ];
        return horner(&c, u);
    }
    (ONE - tanhc(u)) / u
}

/// `tanh(z)` through `e^{−2z}` or `e^{2z}`, whichever is bounded.
pub fn tanh(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        let t = (-2.0 * z).exp();
        (ONE - t) / (ONE + t)
    } else {
        let t = (2.0 * z).exp();
        (t - ONE) / (t + ONE)
    }
}

/// `cosh(p·r) / cosh(q·r)` for real `p, q` without forming large exponentials.
pub fn cosh_ratio(p: f64, q: f64, r: Complex64) -> Complex64 {
    let r = if r.re < 0.0 { -r } else { r };
    let (p, q) = (libm::fabs(p), libm::fabs(q));
    ((p - q) * r).exp() * (ONE + (-2.0 * p * r).exp()) / (ONE + (-2.0 * q * r).exp())
}

/// `(1 − e^{−z}) / z`.
pub fn one_minus_exp_over(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        // Σ (−z)^k / (k+1)!
        let mut term = ONE;
        let mut sum = ONE;
        for k in 1..10 {
            term = term * (-z) / (k as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (ONE - (-z).exp()) / z
    }
}

/// `sinh(z) / z`.
pub fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let z2 = z * z;
        let mut term = ONE;
        let mut sum = ONE;
        for k in 1..8 {
            term = term * z2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    } else {
        z.sinh() / z
    }
}

/// `((z + 2) e^{−z} + z − 2) / z³`, the shape of the transform of `x(1 − x)`
/// on `(0, 1)` up to a factor 6.
pub fn beta_kernel(z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        // Σ_{m≥3} (−1)^m (2 − m) / m! · z^{m−3}
        let mut sum = Complex64::new(0.0, 0.0);
        let mut zp = ONE;
        let mut fact = 6.0;
        for m in 3..26u32 {
            if m > 3 {
                fact *= m as f64;
                zp *= z;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sum += zp * (sign * (2.0 - m as f64) / fact);
        }
        sum
    } else {
        ((z + 2.0) * (-z).exp() + z - 2.0) / (z * z * z)
    }
}

/// `∫_{−1}^{1} x^k e^{−s x} dx`.
///
/// Uses the Taylor series for moderate `|s|` and the upward recursion
/// `I_k = ((−1)^k e^s − e^{−s})/s + (k/s) I_{k−1}` beyond it, where the
/// recursion is stable.
pub fn power_exp_integral(k: u32, s: Complex64) -> Complex64 {
    if s.norm() <= k as f64 + 12.0 {
        // Σ_j (−s)^j / j! · ∫ x^{j+k}, keeping only j + k even.
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = ONE; // (−s)^j / j!
        for j in 0..400u32 {
            if (j + k).is_multiple_of(2) {
                sum += term * (2.0 / (j + k + 1) as f64);
            }
            term = term * (-s) / (j + 1) as f64;
            if j > k + 2 && term.norm() < 1e-18 * (1.0 + sum.norm()) {
                break;
            }
        }
        sum
    } else {
        let es = s.exp();
        let ems = (-s).exp();
        let mut ik = (es - ems) / s;
        for j in 1..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            ik = (es * sign - ems) / s + ik * (j as f64) / s;
        }
        ik
    }
}

fn horner(coeffs: &[f64], u: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
}
