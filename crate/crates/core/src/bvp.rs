//! Finite-difference solvers for the first-passage ODE problems of a
//! diffusion `dX = μ(X)dt + σ(X)dB` reflected on `[a, b]`.
//!
//! With `𝓛 = ½σ²∂² + μ∂`:
//!
//! - the Laplace transform from below is `u(x)/u(S)` where `𝓛u = θu` on
//!   `(a, S)` and `u′(a) = 0`; from above, `v(x)/v(S)` with `v′(b) = 0`;
//! - the moments `Tₙ(x) = E[τ_S(x)ⁿ]` solve `𝓛Tₙ = −nTₙ₋₁`, `T₀ = 1`,
//!   `Tₙ(S) = 0` and the same reflecting condition.
//!
//! The ratio `u/u(S)` is computed directly as the solution of the Dirichlet
//! problem `u(S) = 1`. Problems from above are mirrored with `x ↦ −x`.
//!
//! Discretization: uniform grid, second-order central differences, ghost
//! node for the reflecting end. When `σ` vanishes at the reflecting end the
//! ODE itself is imposed there, with a one-sided second-order first
//! derivative. By default one Richardson step (grids `h` and `h/2`) is
//! applied.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::analytic_bm::ReflectedBmSpec;
use crate::error::domain;
use crate::{Error, Result};

type CoefFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A diffusion with reflecting boundaries `a < b`.
#[derive(Clone)]
pub struct DiffusionSpec {
    mu: CoefFn,
    sigma: CoefFn,
    pub a: f64,
    pub b: f64,
}

impl DiffusionSpec {
    pub fn new<M, S>(mu: M, sigma: S, a: f64, b: f64) -> Result<Self>
    where
        M: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(domain(alloc::format!(
                "need finite a < b, got a = {a}, b = {b}"
            )));
        }
        Ok(Self {
            mu: Arc::new(mu),
            sigma: Arc::new(sigma),
            a,
            b,
        })
    }

    pub fn from_bm(bm: &ReflectedBmSpec) -> Self {
        let mu = bm.mu;
        Self {
            mu: Arc::new(move |_| mu),
            sigma: Arc::new(|_| 1.0),
            a: bm.a,
            b: bm.b,
        }
    }

    pub fn drift(&self, x: f64) -> f64 {
        (self.mu)(x)
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        (self.sigma)(x)
    }

    /// The image under `x ↦ −x`: drift `−μ(−y)`, coefficient `σ(−y)`.
    pub fn mirrored(&self) -> Self {
        let mu = self.mu.clone();
        let sigma = self.sigma.clone();
        Self {
            mu: Arc::new(move |y| -mu(-y)),
            sigma: Arc::new(move |y| sigma(-y)),
            a: -self.b,
            b: -self.a,
        }
    }
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("a", &self.a)
            .field("b", &self.b)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpConfig {
    /// Grid nodes including both ends; at least 5.
    pub nodes: usize,
    /// Combine grids `h` and `h/2` to cancel the `h²` error term.
    pub richardson: bool,
}

impl Default for BvpConfig {
    fn default() -> Self {
        Self {
            nodes: 2001,
            richardson: true,
        }
    }
}

/// Grid values of a solution with cubic interpolation in between.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl BvpSolution {
    /// Interpolated value at `x`, clamped to the grid range. Exact at nodes.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.grid.len();
        let lo = self.grid[0];
        let hi = self.grid[n - 1];
        if n == 1 {
            return self.values[0];
        }
        let x = x.clamp(lo, hi);
        let h = (hi - lo) / (n - 1) as f64;
        let pos = (x - lo) / h;
        let i = (libm::floor(pos) as usize).min(n - 2);
        if x == self.grid[i] {
            return self.values[i];
        }
        if x == self.grid[i + 1] {
            return self.values[i + 1];
        }
        if n < 4 {
            let w = (x - self.grid[i]) / h;
            return self.values[i] * (1.0 - w) + self.values[i + 1] * w;
        }
        let start = i.saturating_sub(1).min(n - 4);
        let mut acc = 0.0;
        for j in start..start + 4 {
            let mut w = 1.0;
            for k in start..start + 4 {
                if k != j {
                    w *= (x - self.grid[k]) / (self.grid[j] - self.grid[k]);
                }
            }
            acc += self.values[j] * w;
        }
        acc
    }

    /// `value_at(x)/value_at(S)` where `S` is the Dirichlet end.
    pub fn ratio_at(&self, x: f64) -> f64 {
        self.value_at(x)
    }
}

struct Grid {
    x: Vec<f64>,
    h: f64,
}

fn grid(lo: f64, hi: f64, n: usize) -> Grid {
    let h = (hi - lo) / (n - 1) as f64;
    let mut x: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
    x[n - 1] = hi;
    Grid { x, h }
}

/// Solves `½σ²w″ + μw′ − θw = rhs` on `[lo, hi]` with reflection at `lo`
/// and `w(hi) = dirichlet`.
fn solve_linear(
    spec: &DiffusionSpec,
    g: &Grid,
    theta: f64,
    rhs: &[f64],
    dirichlet: f64,
) -> Result<Vec<f64>> {
    let n = g.x.len();
    let h = g.h;
    let m = n - 1; // unknowns 0..m-1
    let mut sub = alloc::vec![0.0; m];
    let mut diag = alloc::vec![0.0; m];
    let mut sup = alloc::vec![0.0; m];
    let mut r: Vec<f64> = rhs[..m].to_vec();

    let coef = |x: f64| -> Result<(f64, f64)> {
        let s = spec.diffusion(x);
        let mu = spec.drift(x);
        if !s.is_finite() || !mu.is_finite() {
            return Err(domain(alloc::format!("coefficients not finite at x = {x}")));
        }
        Ok((0.5 * s * s / (h * h), mu / (2.0 * h)))
    };

    for i in 1..m {
        let (p, q) = coef(g.x[i])?;
        if p <= 0.0 {
            return Err(Error::DegenerateCoefficient { x: g.x[i] });
        }
        sub[i] = p - q;
        diag[i] = -2.0 * p - theta;
        sup[i] = p + q;
    }

    let (p0, _) = coef(g.x[0])?;
    let scale = (1..m).map(|i| sub[i] + sup[i]).fold(0.0f64, f64::max);
    if p0 > 1e-12 * scale {
        // ghost node w₋₁ = w₁
        diag[0] = -2.0 * p0 - theta;
        sup[0] = 2.0 * p0;
    } else {
        // σ vanishes at the reflecting end: impose μw′ − θw = rhs there
        // with w′ ≈ (−3w₀ + 4w₁ − w₂)/2h and w₂ taken from row 1.
        let k = spec.drift(g.x[0]) / (2.0 * h);
        if k == 0.0 {
            return Err(Error::DegenerateCoefficient { x: g.x[0] });
        }
        let (p1q1_sub, p1_diag, p1q1_sup) = (sub[1], diag[1], sup[1]);
        let r1 = if m > 2 {
            r[1]
        } else {
            r[1] - p1q1_sup * dirichlet
        };
        diag[0] = -3.0 * k + k * p1q1_sub / p1q1_sup - theta;
        sup[0] = 4.0 * k + k * p1_diag / p1q1_sup;
        r[0] += k * r1 / p1q1_sup;
    }
    r[m - 1] -= sup[m - 1] * dirichlet;

    // Thomas algorithm
    let mut c = alloc::vec![0.0; m];
    let mut d = alloc::vec![0.0; m];
    let tiny = 1e-300_f64.max(1e-14 * diag[0].abs());
    if diag[0].abs() <= tiny {
        return Err(Error::Singular("zero pivot at the reflecting end".into()));
    }
    c[0] = sup[0] / diag[0];
    d[0] = r[0] / diag[0];
    for i in 1..m {
        let piv = diag[i] - sub[i] * c[i - 1];
        if piv.abs() <= 1e-14 * diag[i].abs().max(1e-300) {
            return Err(Error::Singular(alloc::format!(
                "zero pivot at x = {}",
                g.x[i]
            )));
        }
        c[i] = sup[i] / piv;
        d[i] = (r[i] - sub[i] * d[i - 1]) / piv;
    }
    let mut w = alloc::vec![0.0; n];
    w[n - 1] = dirichlet;
    w[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        w[i] = d[i] - c[i] * w[i + 1];
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("solution is not finite".into()));
    }
    Ok(w)
}

fn check_cfg(cfg: &BvpConfig) -> Result<()> {
    if cfg.nodes < 5 {
        return Err(Error::Config(alloc::format!(
            "need at least 5 grid nodes, got {}",
            cfg.nodes
        )));
    }
    Ok(())
}

fn with_richardson<F>(lo: f64, hi: f64, cfg: &BvpConfig, solve: F) -> Result<BvpSolution>
where
    F: Fn(&Grid) -> Result<Vec<f64>>,
{
    check_cfg(cfg)?;
    let coarse = grid(lo, hi, cfg.nodes);
    let mut values = solve(&coarse)?;
    if cfg.richardson {
        let fine = grid(lo, hi, 2 * cfg.nodes - 1);
        let fv = solve(&fine)?;
        for (i, v) in values.iter_mut().enumerate() {
            *v = (4.0 * fv[2 * i] - *v) / 3.0;
        }
    }
    Ok(BvpSolution {
        grid: coarse.x,
        values,
    })
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(domain(alloc::format!(
            "theta = {theta} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// `u(·)/u(S)` on the grid of `[a, S]`.
pub fn laplace_solution_below(
    spec: &DiffusionSpec,
    s: f64,
    theta: f64,
    cfg: &BvpConfig,
) -> Result<BvpSolution> {
    check_theta(theta)?;
    if !(s > spec.a && s <= spec.b) {
        return Err(domain(alloc::format!(
            "barrier S = {s} must lie in ({}, {}]",
            spec.a,
            spec.b
        )));
    }
    with_richardson(spec.a, s, cfg, |g| {
        let zero = alloc::vec![0.0; g.x.len()];
        solve_linear(spec, g, theta, &zero, 1.0)
    })
}

/// `E[e^{−θτ_S(x)}]` from below, `a ≤ x ≤ S`.
pub fn laplace_via_bvp_below(spec: &DiffusionSpec, s: f64, theta: f64, x: f64) -> Result<f64> {
    laplace_via_bvp_below_with(spec, s, theta, x, &BvpConfig::default())
}

pub fn laplace_via_bvp_below_with(
    spec: &DiffusionSpec,
    s: f64,
    theta: f64,
    x: f64,
    cfg: &BvpConfig,
) -> Result<f64> {
    if !(x >= spec.a && x <= s) {
        return Err(domain(alloc::format!(
            "start x = {x} outside [{}, {s}]",
            spec.a
        )));
    }
    check_theta(theta)?;
    if x == s {
        return Ok(1.0);
    }
    Ok(laplace_solution_below(spec, s, theta, cfg)?.ratio_at(x))
}

/// `E[e^{−θτ_S(x)}]` from above, `S ≤ x ≤ b`.
pub fn laplace_via_bvp_above(spec: &DiffusionSpec, s: f64, theta: f64, x: f64) -> Result<f64> {
    laplace_via_bvp_above_with(spec, s, theta, x, &BvpConfig::default())
}

pub fn laplace_via_bvp_above_with(
    spec: &DiffusionSpec,
    s: f64,
    theta: f64,
    x: f64,
    cfg: &BvpConfig,
) -> Result<f64> {
    if !(x >= s && x <= spec.b) {
        return Err(domain(alloc::format!(
            "start x = {x} outside [{s}, {}]",
            spec.b
        )));
    }
    check_theta(theta)?;
    if x == s {
        return Ok(1.0);
    }
    laplace_via_bvp_below_with(&spec.mirrored(), -s, theta, -x, cfg)
}

/// `T₁, …, T_n` on the grid of `[a, S]` (below) or `[S, b]` (above).
pub fn moment_solutions(
    spec: &DiffusionSpec,
    s: f64,
    n: u32,
    from_below: bool,
    cfg: &BvpConfig,
) -> Result<Vec<BvpSolution>> {
    if n == 0 {
        return Err(domain("moment order must be >= 1"));
    }
    if !from_below {
        let mut out = moment_solutions(&spec.mirrored(), -s, n, true, cfg)?;
        for sol in &mut out {
            sol.grid = sol.grid.iter().rev().map(|y| -y).collect();
            sol.values.reverse();
        }
        return Ok(out);
    }
    if !(s > spec.a && s <= spec.b) {
        return Err(domain(alloc::format!(
            "barrier S = {s} must lie in ({}, {}]",
            spec.a,
            spec.b
        )));
    }
    let mut all: Vec<Vec<f64>> = Vec::new();
    let per_order = |g: &Grid, order: usize, prev: &[f64]| -> Result<Vec<f64>> {
        let rhs: Vec<f64> = prev.iter().map(|v| -(order as f64) * v).collect();
        solve_linear(spec, g, 0.0, &rhs, 0.0)
    };
    let solve_chain = |g: &Grid| -> Result<Vec<Vec<f64>>> {
        let mut prev = alloc::vec![1.0; g.x.len()];
        let mut chain = Vec::with_capacity(n as usize);
        for order in 1..=n as usize {
            let t = per_order(g, order, &prev)?;
            prev = t.clone();
            chain.push(t);
        }
        Ok(chain)
    };
    check_cfg(cfg)?;
    let coarse = grid(spec.a, s, cfg.nodes);
    let mut chain = solve_chain(&coarse)?;
    if cfg.richardson {
        let fine = grid(spec.a, s, 2 * cfg.nodes - 1);
        let fchain = solve_chain(&fine)?;
        for (c, f) in chain.iter_mut().zip(&fchain) {
            for (i, v) in c.iter_mut().enumerate() {
                *v = (4.0 * f[2 * i] - *v) / 3.0;
            }
        }
    }
    all.extend(chain);
    Ok(all
        .into_iter()
        .map(|values| BvpSolution {
            grid: coarse.x.clone(),
            values,
        })
        .collect())
}

/// `E[τ_S(x)ⁿ]`.
pub fn moments_via_bvp(
    spec: &DiffusionSpec,
    s: f64,
    n: u32,
    x: f64,
    from_below: bool,
) -> Result<f64> {
    moments_via_bvp_with(spec, s, n, x, from_below, &BvpConfig::default())
}

pub fn moments_via_bvp_with(
    spec: &DiffusionSpec,
    s: f64,
    n: u32,
    x: f64,
    from_below: bool,
    cfg: &BvpConfig,
) -> Result<f64> {
    let inside = if from_below {
        x >= spec.a && x <= s
    } else {
        x >= s && x <= spec.b
    };
    if !inside {
        return Err(domain(alloc::format!(
            "start x = {x} on the wrong side of S = {s}"
        )));
    }
    if n == 0 {
        return Err(domain("moment order must be >= 1"));
    }
    if x == s {
        return Ok(0.0);
    }
    let sols = moment_solutions(spec, s, n, from_below, cfg)?;
    Ok(sols[n as usize - 1].value_at(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic_bm::{laplace_fpt_below, mean_fpt, second_moment_fpt};
    use approx::assert_abs_diff_eq;

    fn bm(mu: f64, a: f64, b: f64) -> DiffusionSpec {
        DiffusionSpec::from_bm(&ReflectedBmSpec::new(mu, a, b).unwrap())
    }

    #[test]
    fn matches_closed_form_drifted() {
        let spec = ReflectedBmSpec::new(0.5, 0.0, 2.0).unwrap();
        let v = laplace_via_bvp_below(&DiffusionSpec::from_bm(&spec), 1.0, 0.8, 0.2).unwrap();
        let exact = laplace_fpt_below(&spec, 0.2, 1.0, 0.8).unwrap();
        assert_abs_diff_eq!(v, exact, epsilon = 1e-6);
    }

    #[test]
    fn barrier_and_small_theta() {
        let spec = bm(0.3, 0.0, 2.0);
        assert_eq!(laplace_via_bvp_below(&spec, 1.0, 2.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            laplace_via_bvp_below(&spec, 1.0, 1e-8, 0.1).unwrap(),
            1.0,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            laplace_via_bvp_above(&spec, 1.0, 1e-8, 1.9).unwrap(),
            1.0,
            epsilon = 1e-6
        );
        assert_eq!(laplace_via_bvp_above(&spec, 1.0, 2.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn above_by_symmetry() {
        let v = laplace_via_bvp_above(&bm(0.0, 0.0, 1.0), 0.0, 1.0, 0.5).unwrap();
        let exact = libm::cosh(0.5 * libm::sqrt(2.0)) / libm::cosh(libm::sqrt(2.0));
        assert_abs_diff_eq!(v, exact, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 0.5787, epsilon = 1e-4);
    }

    #[test]
    fn ratio_is_one_at_barrier_and_in_unit_interval() {
        let sol =
            laplace_solution_below(&bm(-0.4, 0.0, 2.0), 1.0, 3.0, &BvpConfig::default()).unwrap();
        assert_eq!(sol.ratio_at(1.0), 1.0);
        assert!(sol.values.iter().all(|v| *v > 0.0 && *v <= 1.0));
    }

    #[test]
    fn moments_match_closed_forms() {
        assert_abs_diff_eq!(
            moments_via_bvp(&bm(0.0, 0.0, 2.0), 1.0, 1, 0.0, true).unwrap(),
            1.0,
            epsilon = 1e-6
        );
        assert_eq!(
            moments_via_bvp(&bm(0.0, 0.0, 2.0), 1.0, 1, 1.0, true).unwrap(),
            0.0
        );
        let spec = ReflectedBmSpec::new(1.0, 0.0, 2.0).unwrap();
        let t2 = moments_via_bvp(&DiffusionSpec::from_bm(&spec), 1.0, 2, 0.0, true).unwrap();
        assert_abs_diff_eq!(
            t2,
            second_moment_fpt(&spec, 0.0, 1.0).unwrap(),
            epsilon = 1e-5
        );
    }

    #[test]
    fn moments_from_above_mirror_below() {
        let t = moments_via_bvp(&bm(0.7, 0.0, 2.0), 1.0, 1, 1.6, false).unwrap();
        let mirrored = ReflectedBmSpec::new(-0.7, -2.0, 0.0).unwrap();
        assert_abs_diff_eq!(t, mean_fpt(&mirrored, -1.6, -1.0).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn second_order_convergence() {
        let spec = ReflectedBmSpec::new(1.0, 0.0, 2.0).unwrap();
        let d = DiffusionSpec::from_bm(&spec);
        let exact = laplace_fpt_below(&spec, 0.3, 1.0, 2.0).unwrap();
        let err = |n: usize| {
            let cfg = BvpConfig {
                nodes: n,
                richardson: false,
            };
            (laplace_via_bvp_below_with(&d, 1.0, 2.0, 0.3, &cfg).unwrap() - exact).abs()
        };
        let order = libm::log2(err(101) / err(201));
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn mean_is_minus_theta_derivative() {
        let d = bm(0.6, 0.0, 2.0);
        let h = 1e-4;
        let f = |t: f64| laplace_via_bvp_below(&d, 1.0, t, 0.25).unwrap();
        let deriv = (f(2.0 * h) - 4.0 * f(h) + 3.0 * f(0.0)) / (2.0 * h);
        let t1 = moments_via_bvp(&d, 1.0, 1, 0.25, true).unwrap();
        assert_abs_diff_eq!(t1, deriv, epsilon = 1e-4);
    }

    #[test]
    fn degenerate_endpoint_cir() {
        // conjugated to BM by V(x) = 2√x
        let spec = DiffusionSpec::new(|_| 0.25, libm::sqrt, 0.0, 2.0).unwrap();
        let theta: f64 = 0.9;
        let r = libm::sqrt(2.0 * theta);
        for &x in &[0.0, 0.04, 0.5] {
            let v = laplace_via_bvp_below(&spec, 1.0, theta, x).unwrap();
            let exact = libm::cosh(2.0 * libm::sqrt(x) * r) / libm::cosh(2.0 * r);
            assert_abs_diff_eq!(v, exact, epsilon = 1e-5);
        }
    }

    #[test]
    fn interior_degeneracy_is_reported() {
        let spec = DiffusionSpec::new(|_| 0.0, |x| libm::fabs(x - 0.5), 0.0, 2.0).unwrap();
        let cfg = BvpConfig {
            nodes: 11,
            richardson: false,
        };
        let e = laplace_via_bvp_below_with(&spec, 1.0, 1.0, 0.2, &cfg).unwrap_err();
        assert!(matches!(e, Error::DegenerateCoefficient { .. }));
    }

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let grid: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let values = grid.iter().map(|x| x * x * x - x).collect();
        let sol = BvpSolution { grid, values };
        for &x in &[0.03, 0.47, 0.99] {
            assert_abs_diff_eq!(sol.value_at(x), x * x * x - x, epsilon = 1e-14);
        }
    }
}
