//! The inverse first-passage problem for reflected BM: given the Laplace
//! transform `f̂` of a first-passage law, find the transform `ĝ` (and the
//! density `g`) of a random starting point producing it.
//!
//! The forward map from `ĝ` to `f̂` is exact for any drift. Solving it is
//! done for the driftless case with a density symmetric about the midpoint
//! of its support, where `ĝ(θ) = e^{−mθ}·cosh(dθ)/cosh(dθ/2)·f̂(θ²/2)`
//! with `m` the midpoint and `d` the length of the support.
//!
//! Candidate solutions are checked numerically and a failed check is
//! reported as [`Verdict::NoSolution`] rather than as an error.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::analytic_bm::{ReflectedBmSpec, DRIFTLESS_CUTOFF};
use crate::error::domain;
use crate::laplace::{
    moments_from_transform, FourierInverter, DEFAULT_FILTER_ORDER, DEFAULT_HARMONICS,
};
use crate::special::cosh_ratio;
use crate::{presets, DensityOnInterval, Error, Result, TransformFn};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// θ-grid for round-trip and symmetry checks.
pub const CHECK_THETAS: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FromBelow,
    FromAbove,
}

#[derive(Debug, Clone)]
pub struct IfptProblem {
    pub bm: ReflectedBmSpec,
    pub s: f64,
    pub fhat: TransformFn,
    pub direction: Direction,
}

impl IfptProblem {
    pub fn new(
        bm: ReflectedBmSpec,
        s: f64,
        fhat: TransformFn,
        direction: Direction,
    ) -> Result<Self> {
        if !(s >= bm.a && s <= bm.b) {
            return Err(domain(alloc::format!(
                "barrier S = {s} outside [{}, {}]",
                bm.a,
                bm.b
            )));
        }
        let at_zero = fhat.eval(0.0);
        if !(libm::fabs(at_zero - 1.0) <= 1e-10) {
            return Err(domain(alloc::format!(
                "target transform has f(0) = {at_zero}, expected 1"
            )));
        }
        Ok(Self {
            bm,
            s,
            fhat,
            direction,
        })
    }

    /// Support of the sought starting density.
    pub fn support(&self) -> (f64, f64) {
        match self.direction {
            Direction::FromBelow => (self.bm.a, self.s),
            Direction::FromAbove => (self.s, self.bm.b),
        }
    }
}

/// Moment relations a starting law must satisfy for the problem to be
/// solvable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatReport {
    /// `E(τ)` implied by the starting law.
    pub mean_tau: f64,
    pub mean_eta: f64,
    pub second_moment_eta: f64,
    /// `E(e^{−2μη})`.
    pub exp_moment_eta: f64,
    /// `E(τ) ≥ 0`.
    pub mean_nonnegative: bool,
    /// `E(τ) ≤ E(S − η)/μ` for `μ > 0`; vacuous otherwise.
    pub drift_upper_bound: bool,
    /// `μE(τ) ≥ −e^{2μa} E(e^{−2μη} − e^{−2μS})/(2μ)`; vacuous at `μ = 0`.
    pub drift_lower_bound: bool,
    /// `−E(η²) + 2aE(η) + S(S − 2a) ≥ 0` at `μ = 0`; vacuous otherwise.
    pub driftless_condition: bool,
    /// Moments could not be extracted reliably; flags are then not trusted.
    pub indeterminate: bool,
}

impl CompatReport {
    pub fn all_hold(&self) -> bool {
        self.mean_nonnegative
            && self.drift_upper_bound
            && self.drift_lower_bound
            && self.driftless_condition
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoSolutionReason {
    TransformNotFinite(String),
    NegativeDensity {
        min: f64,
    },
    MassDefect {
        error: f64,
    },
    SecondMomentNonpositive {
        value: f64,
    },
    /// `E[(η − lo)(hi − η)] ≤ 0`: only point masses at the support ends
    /// could produce the moments.
    MomentsOutsideSupport {
        value: f64,
    },
    TransformMismatch {
        residual: f64,
    },
    CompatibilityViolated,
}

impl fmt::Display for NoSolutionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TransformNotFinite(m) => write!(f, "candidate transform not finite: {m}"),
            Self::NegativeDensity { min } => write!(f, "negative density (min {min:.3e})"),
            Self::MassDefect { error } => write!(f, "mass defect ({error:.3e})"),
            Self::SecondMomentNonpositive { value } => {
                write!(f, "second moment nonpositive (E eta^2 = {value:.3e})")
            }
            Self::MomentsOutsideSupport { value } => {
                write!(
                    f,
                    "moments outside the range of a density on the support ({value:.3e})"
                )
            }
            Self::TransformMismatch { residual } => {
                write!(f, "recovered density does not reproduce the transform (rel. residual {residual:.3e})")
            }
            Self::CompatibilityViolated => write!(f, "compatibility condition violated"),
        }
    }
}

impl NoSolutionReason {
    /// Stable short identifier for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Self::TransformNotFinite(_) => "transform_not_finite",
            Self::NegativeDensity { .. } => "negative_density",
            Self::MassDefect { .. } => "mass_defect",
            Self::SecondMomentNonpositive { .. } => "second_moment_nonpositive",
            Self::MomentsOutsideSupport { .. } => "moments_outside_support",
            Self::TransformMismatch { .. } => "transform_mismatch",
            Self::CompatibilityViolated => "compatibility_violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Valid,
    NoSolution(Vec<NoSolutionReason>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub mass_error: f64,
    /// Minimum of the recovered density over the interior check points.
    pub min_density: f64,
    pub compatibility: CompatReport,
    /// `(k, E ηᵏ)` read from `ĝ`.
    pub moment_table: Vec<(u32, f64)>,
    /// Max relative deviation from `ĝ(−θ) = e^{(lo+hi)θ}ĝ(θ)`.
    pub symmetry_residual: f64,
    /// Max relative deviation between `ĝ` and the transform of the
    /// recovered density.
    pub transform_residual: f64,
    pub verdict: Verdict,
}

/// Tolerances and resolution of the density recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    pub harmonics: usize,
    pub filter_order: u32,
    pub check_points: usize,
    pub negative_tol: f64,
    pub mass_tol: f64,
    pub transform_tol: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            harmonics: DEFAULT_HARMONICS,
            filter_order: DEFAULT_FILTER_ORDER,
            check_points: 201,
            negative_tol: 1e-6,
            mass_tol: 1e-6,
            transform_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IfptSolution {
    pub ghat: TransformFn,
    pub density: DensityOnInterval,
    /// Check points and the recovered density there.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl IfptSolution {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.verdict == Verdict::Valid
    }

    pub fn reasons(&self) -> &[NoSolutionReason] {
        match &self.diagnostics.verdict {
            Verdict::Valid => &[],
            Verdict::NoSolution(r) => r,
        }
    }
}

fn validate_theta(theta: f64) -> Result<()> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(domain(alloc::format!(
            "theta = {theta} must be finite and >= 0"
        )));
    }
    Ok(())
}

fn ghat_fn(ghat: &TransformFn) -> Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync> {
    match ghat.complex_fn() {
        Some(f) => f,
        None => {
            let g = ghat.clone();
            Arc::new(move |z: Complex64| Complex64::new(g.eval(z.re), 0.0))
        }
    }
}

/// `f̂(θ) = ∫ f̂(θ|x) g(x) dx` for reflected drifted BM started from `η ~ g`
/// on `[a, S]`, in closed form in terms of `ĝ`.
///
/// For `μ ≠ 0`, with `R = √(μ² + 2θ)` and `C = μ² + θ + μR`,
/// `f̂ = e^{−S(R−μ)} [θ e^{2aR} ĝ(R+μ) + C ĝ(μ−R)] / (θ e^{−2(S−a)R} + C)`;
/// at `μ = 0` it is
/// `[ĝ(r) e^{−(S−2a)r} + ĝ(−r) e^{−Sr}] / (1 + e^{−2(S−a)r})`, `r = √2θ`.
pub fn forward_fhat(ghat: &TransformFn, bm: &ReflectedBmSpec, s: f64, theta: f64) -> Result<f64> {
    validate_theta(theta)?;
    if !(s >= bm.a && s <= bm.b) {
        return Err(domain(alloc::format!(
            "barrier S = {s} outside [{}, {}]",
            bm.a,
            bm.b
        )));
    }
    if theta == 0.0 {
        return Ok(ghat.eval(0.0));
    }
    if !ghat.is_analytic()
        && ghat.domain_min() > -libm::sqrt(bm.mu * bm.mu + 2.0 * theta) + bm.mu.min(0.0)
    {
        return Err(domain(
            "forward map needs the start transform at negative arguments",
        ));
    }
    let g = ghat_fn(ghat);
    let v = forward_complex(&*g, bm, s, Complex64::new(theta, 0.0)).re;
    if !v.is_finite() {
        return Err(Error::Overflow("forward_fhat"));
    }
    Ok(v)
}

fn forward_complex(
    g: &dyn Fn(Complex64) -> Complex64,
    bm: &ReflectedBmSpec,
    s: f64,
    theta: Complex64,
) -> Complex64 {
    let a = bm.a;
    let mu = bm.mu;
    if libm::fabs(mu) * (s - a).max(1.0) < DRIFTLESS_CUTOFF {
        let r = (2.0 * theta).sqrt();
        let num = g(r) * ((2.0 * a - s) * r).exp() + g(-r) * (-s * r).exp();
        return num / (ONE + (-2.0 * (s - a) * r).exp());
    }
    let r = (mu * mu + 2.0 * theta).sqrt();
    let lead = (-s * (r - mu)).exp();
    let up = (2.0 * a * r).exp() * g(r + mu);
    let down = g(mu - r);
    let el = (-2.0 * (s - a) * r).exp();
    if mu >= 0.0 {
        let c = mu * mu + theta + mu * r;
        lead * (theta * up + c * down) / (theta * el + c)
    } else {
        let d = mu * mu + theta - mu * r;
        lead * (d * up + theta * down) / (d * el + theta)
    }
}

/// The forward map as a transform, analytic whenever `ĝ` is.
pub fn forward_transform(ghat: &TransformFn, bm: ReflectedBmSpec, s: f64) -> TransformFn {
    let g = ghat_fn(ghat);
    TransformFn::analytic(move |z| {
        if z == Complex64::new(0.0, 0.0) {
            return g(z);
        }
        forward_complex(&*g, &bm, s, z)
    })
}

/// Driftless forward map from above: `η ~ g` on `[S, b]`,
/// `f̂ = [ĝ(r) e^{Sr} + ĝ(−r) e^{−(2b−S)r}] / (1 + e^{−2(b−S)r})`.
pub fn forward_fhat_above(ghat: &TransformFn, b: f64, s: f64, theta: f64) -> Result<f64> {
    validate_theta(theta)?;
    if theta == 0.0 {
        return Ok(ghat.eval(0.0));
    }
    let g = ghat_fn(ghat);
    let r = Complex64::new(libm::sqrt(2.0 * theta), 0.0);
    let num = g(r) * (s * r).exp() + g(-r) * (-(2.0 * b - s) * r).exp();
    let v = (num / (ONE + (-2.0 * (b - s) * r).exp())).re;
    if !v.is_finite() {
        return Err(Error::Overflow("forward_fhat_above"));
    }
    Ok(v)
}

/// `|forward_fhat(ĝ)(θ) − f̂(θ)|` on the given θ-grid: the residual of a
/// candidate start transform for any drift.
pub fn forward_residual(
    ghat: &TransformFn,
    bm: &ReflectedBmSpec,
    s: f64,
    fhat: &TransformFn,
    thetas: &[f64],
) -> Result<Vec<f64>> {
    thetas
        .iter()
        .map(|&t| Ok(libm::fabs(forward_fhat(ghat, bm, s, t)? - fhat.eval(t))))
        .collect()
}

/// Transform of the symmetric solution on `[lo, hi]`:
/// `ĝ(θ) = e^{−lo·θ}(1 + w²)/(1 + w)·f̂(θ²/2)`, `w = e^{−(hi−lo)θ}`.
pub fn symmetric_ghat(lo: f64, hi: f64, fhat: &TransformFn) -> Result<TransformFn> {
    let f = fhat.complex_fn().ok_or_else(|| {
        Error::MethodUnsuitable("symmetric solution needs an analytic target transform".into())
    })?;
    let mid = 0.5 * (lo + hi);
    let d = hi - lo;
    Ok(TransformFn::analytic(move |z| {
        (-mid * z).exp() * cosh_ratio(d, 0.5 * d, z) * f(0.5 * z * z)
    }))
}

/// Symmetric driftless solution from below on `[a, S]`.
pub fn solve_symmetric(problem: &IfptProblem) -> Result<IfptSolution> {
    solve_symmetric_with(problem, &RecoveryConfig::default())
}

pub fn solve_symmetric_with(problem: &IfptProblem, cfg: &RecoveryConfig) -> Result<IfptSolution> {
    require_driftless(&problem.bm)?;
    if problem.direction != Direction::FromBelow {
        return Err(domain("solve_symmetric handles the problem from below"));
    }
    let (lo, hi) = problem.support();
    let ghat = symmetric_ghat(lo, hi, &problem.fhat)?;
    recover(ghat, &problem.bm, problem.s, Direction::FromBelow, cfg)
}

/// Symmetric driftless solution from above on `[S, b]`.
pub fn solve_symmetric_above(problem: &IfptProblem) -> Result<IfptSolution> {
    solve_symmetric_above_with(problem, &RecoveryConfig::default())
}

pub fn solve_symmetric_above_with(
    problem: &IfptProblem,
    cfg: &RecoveryConfig,
) -> Result<IfptSolution> {
    require_driftless(&problem.bm)?;
    if problem.direction != Direction::FromAbove {
        return Err(domain(
            "solve_symmetric_above handles the problem from above",
        ));
    }
    let (lo, hi) = problem.support();
    let ghat = symmetric_ghat(lo, hi, &problem.fhat)?;
    recover(ghat, &problem.bm, problem.s, Direction::FromAbove, cfg)
}

fn require_driftless(bm: &ReflectedBmSpec) -> Result<()> {
    if libm::fabs(bm.mu) >= DRIFTLESS_CUTOFF {
        return Err(domain(
            "the symmetric inverse solution is only available for zero drift",
        ));
    }
    Ok(())
}

fn mirror(ghat: &TransformFn) -> TransformFn {
    let g = ghat_fn(ghat);
    TransformFn::analytic(move |z| g(-z))
}

/// Moment relations of the starting law `ĝ` for the problem from below.
pub fn compatibility_check(
    ghat: &TransformFn,
    bm: &ReflectedBmSpec,
    s: f64,
) -> Result<CompatReport> {
    if !(s >= bm.a && s <= bm.b) {
        return Err(domain(alloc::format!(
            "barrier S = {s} outside [{}, {}]",
            bm.a,
            bm.b
        )));
    }
    let a = bm.a;
    let mu = bm.mu;
    let l = s - a;
    let g = ghat_fn(ghat);
    let g_u = {
        let g = g.clone();
        TransformFn::analytic(move |z| (a * z).exp() * g(z))
    };
    let m = moments_from_transform(&g_u, 4)?;
    let (eu, eu2) = (m.values[0], m.values[1]);
    let mean_eta = a + eu;
    let second_moment_eta = eu2 + 2.0 * a * eu + a * a;
    let exp_moment_eta = g(Complex64::new(2.0 * mu, 0.0)).re;
    let tol = 1e-8 * l.max(1.0) * l.max(1.0);

    let driftless = libm::fabs(mu) * l.max(1.0) < DRIFTLESS_CUTOFF;
    let mean_tau = if driftless {
        l * l - eu2
    } else if libm::fabs(mu) * l < 1e-3 {
        // E[2L²φ(−2μL) − 2u²φ(−2μu)] to second order in μ
        let c = [1.0, -2.0 / 3.0, 1.0 / 3.0];
        (0..3)
            .map(|j| {
                let pw = libm::pow(l, (j + 2) as f64);
                c[j] * libm::pow(mu, j as f64) * (pw - m.values[j + 1])
            })
            .sum()
    } else {
        let gu2 = g_u.eval(2.0 * mu);
        (l - eu) / mu - (gu2 - libm::exp(-2.0 * mu * l)) / (2.0 * mu * mu)
    };
    if !mean_tau.is_finite() {
        return Err(Error::Overflow("compatibility_check"));
    }

    let (drift_upper_bound, drift_lower_bound) = if driftless {
        (true, true)
    } else {
        let upper = mu <= 0.0 || mean_tau <= (s - mean_eta) / mu + tol;
        let gu2 = g_u.eval(2.0 * mu);
        let lower = mu * mean_tau >= -(gu2 - libm::exp(-2.0 * mu * l)) / (2.0 * mu) - tol;
        (upper, lower)
    };
    let driftless_condition =
        !driftless || -second_moment_eta + 2.0 * a * mean_eta + s * (s - 2.0 * a) >= -tol;
    Ok(CompatReport {
        mean_tau,
        mean_eta,
        second_moment_eta,
        exp_moment_eta,
        mean_nonnegative: mean_tau >= -tol,
        drift_upper_bound,
        drift_lower_bound,
        driftless_condition,
        indeterminate: m.indeterminate,
    })
}

/// Moment relations for the problem from above, by mirroring `x ↦ −x`.
pub fn compatibility_check_above(
    ghat: &TransformFn,
    bm: &ReflectedBmSpec,
    s: f64,
) -> Result<CompatReport> {
    let mirrored = ReflectedBmSpec::new(-bm.mu, -bm.b, -bm.a)?;
    let mut r = compatibility_check(&mirror(ghat), &mirrored, -s)?;
    r.mean_eta = -r.mean_eta;
    Ok(r)
}

fn recover(
    ghat: TransformFn,
    bm: &ReflectedBmSpec,
    s: f64,
    direction: Direction,
    cfg: &RecoveryConfig,
) -> Result<IfptSolution> {
    let (lo, hi) = match direction {
        Direction::FromBelow => (bm.a, s),
        Direction::FromAbove => (s, bm.b),
    };
    if !(lo < hi) {
        return Err(Error::Support(alloc::format!("empty support [{lo}, {hi}]")));
    }
    let mut reasons = Vec::new();
    let n = cfg.check_points.max(3);
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();

    let inverter = match FourierInverter::new(&ghat, lo, hi, cfg.harmonics, cfg.filter_order) {
        Ok(inv) => Some(Arc::new(inv)),
        Err(e) => {
            reasons.push(NoSolutionReason::TransformNotFinite(alloc::format!("{e}")));
            None
        }
    };
    let values: Vec<f64> = match &inverter {
        Some(inv) => grid.iter().map(|&x| inv.eval(x)).collect(),
        None => vec![f64::NAN; n],
    };
    let density = match &inverter {
        Some(inv) => {
            let inv = inv.clone();
            DensityOnInterval::new(lo, hi, move |x| inv.eval(x))
        }
        None => DensityOnInterval::new(lo, hi, |_| f64::NAN),
    };

    let min_density = values[1..n - 1]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_density < -cfg.negative_tol {
        reasons.push(NoSolutionReason::NegativeDensity { min: min_density });
    }
    let mass_error = ghat.eval(0.0) - 1.0;
    if !(libm::fabs(mass_error) <= cfg.mass_tol) {
        reasons.push(NoSolutionReason::MassDefect { error: mass_error });
    }

    let compat = match direction {
        Direction::FromBelow => compatibility_check(&ghat, bm, s)?,
        Direction::FromAbove => compatibility_check_above(&ghat, bm, s)?,
    };
    let e2 = compat.second_moment_eta;
    if e2 <= 1e-8 {
        reasons.push(NoSolutionReason::SecondMomentNonpositive { value: e2 });
    }
    let spread = (lo + hi) * compat.mean_eta - lo * hi - e2;
    if spread <= 1e-8 * (hi - lo) * (hi - lo) {
        reasons.push(NoSolutionReason::MomentsOutsideSupport { value: spread });
    }
    if !compat.indeterminate && !compat.all_hold() {
        reasons.push(NoSolutionReason::CompatibilityViolated);
    }

    let mut transform_residual = 0.0f64;
    if let Some(inv) = &inverter {
        for &th in &CHECK_THETAS[..5] {
            let target = ghat.eval(th);
            let got = inv.transform_at(th);
            transform_residual =
                transform_residual.max(libm::fabs(got - target) / libm::fabs(target));
        }
        if !(transform_residual <= cfg.transform_tol) {
            reasons.push(NoSolutionReason::TransformMismatch {
                residual: transform_residual,
            });
        }
    }

    let mut symmetry_residual = 0.0f64;
    for &th in &CHECK_THETAS {
        let lhs = ghat.eval(-th);
        let rhs = libm::exp((lo + hi) * th) * ghat.eval(th);
        symmetry_residual =
            symmetry_residual.max(libm::fabs(lhs - rhs) / libm::fabs(lhs).max(1e-300));
    }

    let moment_table = vec![(1, compat.mean_eta), (2, compat.second_moment_eta)];
    let verdict = if reasons.is_empty() {
        Verdict::Valid
    } else {
        Verdict::NoSolution(reasons)
    };
    Ok(IfptSolution {
        ghat,
        density,
        grid,
        values,
        diagnostics: Diagnostics {
            mass_error,
            min_density,
            compatibility: compat,
            moment_table,
            symmetry_residual,
            transform_residual,
            verdict,
        },
    })
}

/// The sufficient-existence family on `[0, 1]`: the first-passage transform
/// `f̂_{2k}` and its start density `g_{2k}`.
pub fn g2k_family(k: u32) -> Result<(TransformFn, DensityOnInterval)> {
    Ok((presets::g2k_fhat(k)?, presets::g2k_density(k)?))
}

/// First-passage transform with a catastrophe at rate `λ`, for a driftless
/// start `η ~ g` on `[0, S]` symmetric about `S/2`:
/// `(θ ĝ(r)(1 + e^{Sr})/(2cosh(Sr)) + λ)/(λ + θ)`, `r = √(2(λ+θ))`.
pub fn jump_forward(ghat: &TransformFn, lambda: f64, s: f64, theta: f64) -> Result<f64> {
    validate_theta(theta)?;
    if !(lambda >= 0.0) {
        return Err(domain("catastrophe rate must be >= 0"));
    }
    if theta == 0.0 {
        return Ok(1.0);
    }
    let r = libm::sqrt(2.0 * (lambda + theta));
    let shape = (1.0 + libm::exp(-s * r)) / (1.0 + libm::exp(-2.0 * s * r));
    let v = (theta * ghat.eval(r) * shape + lambda) / (lambda + theta);
    if !v.is_finite() {
        return Err(Error::Overflow("jump_forward"));
    }
    Ok(v)
}

/// `[z f̄̂(z − λ) − λ]/(z − λ)` with the removable point `z = λ` bridged by
/// cubic interpolation on nearby samples.
fn jump_quotient(f: &dyn Fn(Complex64) -> Complex64, lambda: f64, z: Complex64) -> Complex64 {
    let raw = |w: Complex64| (w * f(w - lambda) - lambda) / (w - lambda);
    let z0 = Complex64::new(lambda, 0.0);
    let scale = 1.0 + lambda;
    if (z - z0).norm() >= 1e-4 * scale {
        return raw(z);
    }
    let d = 1e-3 * scale;
    let nodes = [-2.0 * d, -d, d, 2.0 * d];
    let vals: Vec<Complex64> = nodes.iter().map(|&o| raw(z0 + o)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, xi) in nodes.iter().enumerate() {
        let mut w = ONE;
        for (j, xj) in nodes.iter().enumerate() {
            if i != j {
                w *= (z - z0 - xj) / (xi - xj);
            }
        }
        acc += vals[i] * w;
    }
    acc
}

/// Start transform for the catastrophe variant, symmetric about `S/2`:
/// `ĝ(θ) = 2cosh(Sθ)/((θ²/2 − λ)(1 + e^{Sθ}))·[(θ²/2) f̄̂(θ²/2 − λ) − λ]`.
pub fn jump_ghat(fbar_hat: &TransformFn, lambda: f64, s: f64) -> Result<TransformFn> {
    let f = fbar_hat.complex_fn().ok_or_else(|| {
        Error::MethodUnsuitable("catastrophe solution needs an analytic target transform".into())
    })?;
    let mid = 0.5 * s;
    Ok(TransformFn::analytic(move |z| {
        (-mid * z).exp() * cosh_ratio(s, 0.5 * s, z) * jump_quotient(&*f, lambda, 0.5 * z * z)
    }))
}

/// Symmetric start density on `(0, S)` for the catastrophe variant.
pub fn jump_solve_symmetric(fbar_hat: &TransformFn, lambda: f64, s: f64) -> Result<IfptSolution> {
    jump_solve_symmetric_with(fbar_hat, lambda, s, &RecoveryConfig::default())
}

pub fn jump_solve_symmetric_with(
    fbar_hat: &TransformFn,
    lambda: f64,
    s: f64,
    cfg: &RecoveryConfig,
) -> Result<IfptSolution> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain("catastrophe rate must be > 0"));
    }
    if !(s > 0.0) {
        return Err(domain("barrier must be > 0"));
    }
    let ghat = jump_ghat(fbar_hat, lambda, s)?;
    let bm = ReflectedBmSpec::new(0.0, 0.0, s)?;
    recover(ghat, &bm, s, Direction::FromBelow, cfg)
}
