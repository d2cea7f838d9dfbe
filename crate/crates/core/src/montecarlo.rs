//! Euler–Maruyama simulation of reflected diffusions and first-passage
//! samplers.
//!
//! Each step is `x + μ(x)dt + σ(x)√dt Z` followed by folding the overshoot
//! back into `[a, b]`. Paths draw their randomness from a ChaCha8 stream
//! selected by `(seed, path_index)`, so a sample set does not depend on the
//! order in which its paths are run.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::bvp::DiffusionSpec;
use crate::error::domain;
use crate::quadrature::integrate;
use crate::{DensityOnInterval, Error, Result};

/// Censoring fraction above which a sample set is flagged.
pub const CENSORING_WARN_FRACTION: f64 = 1e-3;

/// Horizon as a multiple of the expected hitting time.
pub const HORIZON_MEAN_MULTIPLE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Also count barrier crossings inside a step, using the Brownian bridge
    /// crossing probability with the coefficient frozen at the step start.
    pub bridge_correction: bool,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            dt,
            horizon,
            n_paths,
            seed,
            bridge_correction: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Horizon set to a fixed multiple of `mean_fpt`.
    pub fn for_mean(dt: f64, mean_fpt: f64, n_paths: usize, seed: u64) -> Result<Self> {
        Self::new(
            dt,
            (HORIZON_MEAN_MULTIPLE * mean_fpt).max(dt),
            n_paths,
            seed,
        )
    }

    pub fn without_bridge(mut self) -> Self {
        self.bridge_correction = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(alloc::format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon >= self.dt) || !self.horizon.is_finite() {
            return Err(Error::Config(alloc::format!(
                "horizon must be finite and at least dt, got {}",
                self.horizon
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        libm::ceil(self.horizon / self.dt - 1e-9) as usize
    }
}

/// Random generator for path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Law of the starting point.
#[derive(Debug, Clone)]
pub enum InitialLaw {
    Point(f64),
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Inverse-CDF sampling from a tabulated distribution function.
    Tabulated {
        grid: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl InitialLaw {
    /// Tabulates the distribution function of `density` on `nodes` points.
    pub fn from_density(density: &DensityOnInterval, nodes: usize) -> Result<Self> {
        let (lo, hi) = density.support();
        if nodes < 2 {
            return Err(domain("need at least two nodes"));
        }
        let h = (hi - lo) / (nodes - 1) as f64;
        let grid: Vec<f64> = (0..nodes).map(|i| lo + h * i as f64).collect();
        let mut cdf = vec![0.0; nodes];
        for i in 1..nodes {
            let piece = integrate(|x| density.eval(x), grid[i - 1], grid[i], 1e-12)?.value;
            cdf[i] = cdf[i - 1] + piece.max(0.0);
        }
        let total = cdf[nodes - 1];
        if !(total > 0.0) || !total.is_finite() {
            return Err(domain("density has no mass"));
        }
        for c in &mut cdf {
            *c /= total;
        }
        Ok(Self::Tabulated { grid, cdf })
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Point(x) => (*x, *x),
            Self::Uniform { lo, hi } => (*lo, *hi),
            Self::Tabulated { grid, .. } => (grid[0], grid[grid.len() - 1]),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Point(x) => *x,
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Self::Tabulated { grid, cdf } => {
                let u: f64 = rng.random();
                let i = cdf.partition_point(|&c| c < u).clamp(1, grid.len() - 1);
                let (c0, c1) = (cdf[i - 1], cdf[i]);
                let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                grid[i - 1] + w * (grid[i] - grid[i - 1])
            }
        }
    }
}

/// States on the time grid `k·dt` with the reflection pushes of each step.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectedPath {
    pub dt: f64,
    pub states: Vec<f64>,
    /// Displacement added at the lower boundary during step `k`.
    pub lower_pushes: Vec<f64>,
    /// Displacement removed at the upper boundary during step `k`.
    pub upper_pushes: Vec<f64>,
}

impl ReflectedPath {
    pub fn lower_regulator(&self) -> f64 {
        self.lower_pushes.iter().sum()
    }

    pub fn upper_regulator(&self) -> f64 {
        self.upper_pushes.iter().sum()
    }
}

/// Folds `x` into `[a, b]`; returns the folded point and the lower and upper
/// displacements.
fn fold(mut x: f64, a: f64, b: f64) -> (f64, f64, f64) {
    let (mut lo_push, mut hi_push) = (0.0, 0.0);
    let width = b - a;
    if x < a - 2.0 * width || x > b + 2.0 * width {
        // reduce modulo the period 2(b − a) first
        let p = 2.0 * width;
        let r = libm::fmod(x - a, p);
        let r = if r < 0.0 { r + p } else { r };
        let y = if r <= width { a + r } else { a + p - r };
        if x < a {
            lo_push = y - x;
        } else {
            hi_push = x - y;
        }
        return (y, lo_push, hi_push);
    }
    loop {
        if x < a {
            lo_push += 2.0 * (a - x);
            x = 2.0 * a - x;
        } else if x > b {
            hi_push += 2.0 * (x - b);
            x = 2.0 * b - x;
        } else {
            return (x, lo_push, hi_push);
        }
    }
}

#[inline]
fn coefficients(spec: &DiffusionSpec, x: f64) -> Result<(f64, f64)> {
    let m = spec.drift(x);
    let s = spec.diffusion(x);
    if !m.is_finite() || !s.is_finite() {
        return Err(domain(alloc::format!("coefficients not finite at x = {x}")));
    }
    Ok((m, s))
}

fn check_start(spec: &DiffusionSpec, x0: f64) -> Result<()> {
    if !(spec.a <= x0 && x0 <= spec.b) {
        return Err(domain(alloc::format!(
            "x0 = {x0} outside [{}, {}]",
            spec.a,
            spec.b
        )));
    }
    Ok(())
}

/// Simulates one path up to the horizon with the stream of path 0.
pub fn simulate_reflected_path(
    spec: &DiffusionSpec,
    x0: f64,
    cfg: &SimConfig,
) -> Result<ReflectedPath> {
    cfg.validate()?;
    let mut rng = path_rng(cfg.seed, 0);
    let n = cfg.steps();
    let normals: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    simulate_with_normals(spec, x0, cfg.dt, &normals)
}

/// Simulates a path driven by the given standard normal draws, one per step.
pub fn simulate_with_normals(
    spec: &DiffusionSpec,
    x0: f64,
    dt: f64,
    normals: &[f64],
) -> Result<ReflectedPath> {
    check_start(spec, x0)?;
    let sq = libm::sqrt(dt);
    let mut states = Vec::with_capacity(normals.len() + 1);
    let mut lower_pushes = Vec::with_capacity(normals.len());
    let mut upper_pushes = Vec::with_capacity(normals.len());
    let mut x = x0;
    states.push(x);
    for &z in normals {
        let (m, s) = coefficients(spec, x)?;
        let (y, lo, hi) = fold(x + m * dt + s * sq * z, spec.a, spec.b);
        x = y;
        states.push(x);
        lower_pushes.push(lo);
        upper_pushes.push(hi);
    }
    Ok(ReflectedPath {
        dt,
        states,
        lower_pushes,
        upper_pushes,
    })
}

/// BM reflected at `a` only, by the one-sided Skorokhod map applied to the
/// discrete path `x0 + Σ √dt Z`: `X = W + sup (a − W)⁺`.
pub fn skorokhod_lower(x0: f64, a: f64, dt: f64, normals: &[f64]) -> Vec<f64> {
    let sq = libm::sqrt(dt);
    let mut w = x0;
    let mut push = (a - w).max(0.0);
    let mut out = Vec::with_capacity(normals.len() + 1);
    out.push(w + push);
    for &z in normals {
        w += sq * z;
        push = push.max(a - w);
        out.push(w + push);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathOutcome {
    Hit(f64),
    Censored,
}

/// Hitting times of one run, in path order.
#[derive(Debug, Clone, PartialEq)]
pub struct FptSampleSet {
    pub outcomes: Vec<PathOutcome>,
    pub config: SimConfig,
    pub description: String,
}

impl FptSampleSet {
    pub fn n_paths(&self) -> usize {
        self.outcomes.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.outcomes
            .iter()
            .filter_map(|o| match o {
                PathOutcome::Hit(t) => Some(*t),
                PathOutcome::Censored => None,
            })
            .collect()
    }

    pub fn censored_count(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o, PathOutcome::Censored))
            .count()
    }

    /// True when more than `CENSORING_WARN_FRACTION` of the paths were censored.
    pub fn excessive_censoring(&self) -> bool {
        self.censored_count() as f64 > CENSORING_WARN_FRACTION * self.n_paths() as f64
    }

    /// Sample mean of the observed times and its standard error.
    pub fn mean_with_se(&self) -> (f64, f64) {
        let t = self.times();
        let (m, v) = mean_var(&t);
        (m, libm::sqrt(v / t.len() as f64))
    }

    /// Sample variance of the observed times and its standard error, from
    /// the fourth central moment.
    pub fn variance_with_se(&self) -> (f64, f64) {
        let t = self.times();
        let n = t.len() as f64;
        let (m, v) = mean_var(&t);
        let m4 = t
            .iter()
            .map(|x| {
                let d = (x - m) * (x - m);
                d * d
            })
            .sum::<f64>()
            / n;
        (v, libm::sqrt(((m4 - v * v) / n).max(0.0)))
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = x.iter().sum::<f64>() / n;
    let v = if x.len() > 1 {
        x.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

/// One hitting-time problem: diffusion, start law, barrier, and an optional
/// exponential killing rate.
#[derive(Debug, Clone)]
pub struct FptProblem {
    pub spec: DiffusionSpec,
    pub init: InitialLaw,
    pub s: f64,
    pub catastrophe_rate: Option<f64>,
}

impl FptProblem {
    pub fn new(spec: DiffusionSpec, init: InitialLaw, s: f64) -> Result<Self> {
        let (lo, hi) = init.support();
        if !(spec.a <= lo && hi <= s && s <= spec.b) {
            return Err(domain(alloc::format!(
                "start law on [{lo}, {hi}] and barrier {s} must lie in [{}, {}] with support below S",
                spec.a,
                spec.b
            )));
        }
        Ok(Self {
            spec,
            init,
            s,
            catastrophe_rate: None,
        })
    }

    pub fn with_catastrophe(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain(alloc::format!(
                "catastrophe rate must be positive, got {lambda}"
            )));
        }
        self.catastrophe_rate = Some(lambda);
        Ok(self)
    }

    /// Runs path `index` of the sample set described by `cfg`.
    pub fn run_path(&self, cfg: &SimConfig, index: u64) -> Result<PathOutcome> {
        let mut rng = path_rng(cfg.seed, index);
        let clock = match self.catastrophe_rate {
            Some(l) => {
                let e: f64 = rng.sample(Exp1);
                e / l
            }
            None => f64::INFINITY,
        };
        let mut x = self.init.sample(&mut rng);
        if x >= self.s {
            return Ok(PathOutcome::Hit(0.0));
        }
        let (a, b, s, dt) = (self.spec.a, self.spec.b, self.s, cfg.dt);
        let sq = libm::sqrt(dt);
        let limit = clock.min(cfg.horizon);
        let mut t = 0.0;
        let mut k: u64 = 0;
        loop {
            if t + dt > limit {
                break;
            }
            let (m, sg) = coefficients(&self.spec, x)?;
            let z: f64 = rng.sample(StandardNormal);
            let raw = x + m * dt + sg * sq * z;
            if raw >= s {
                let w = (s - x) / (raw - x);
                return Ok(PathOutcome::Hit(t + w * dt));
            }
            if cfg.bridge_correction {
                let var = sg * sg * dt;
                if var > 0.0 {
                    let e = 2.0 * (s - x) * (s - raw) / var;
                    if e < 40.0 {
                        let p = libm::exp(-e);
                        let u: f64 = rng.random();
                        if u < p {
                            return Ok(PathOutcome::Hit(t + 0.5 * dt));
                        }
                    }
                }
            }
            x = fold(raw, a, b).0;
            k += 1;
            t = k as f64 * dt;
        }
        if clock <= cfg.horizon {
            Ok(PathOutcome::Hit(clock))
        } else {
            Ok(PathOutcome::Censored)
        }
    }
}

/// Runs paths `0..n_paths` one after another.
pub fn sample_fpt_serial(
    problem: &FptProblem,
    cfg: &SimConfig,
    description: &str,
) -> Result<FptSampleSet> {
    cfg.validate()?;
    let outcomes = (0..cfg.n_paths as u64)
        .map(|i| problem.run_path(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(FptSampleSet {
        outcomes,
        config: *cfg,
        description: description.into(),
    })
}

/// Hitting times of `s` for `spec` started from `init`.
pub fn sample_fpt(
    spec: &DiffusionSpec,
    init: &InitialLaw,
    s: f64,
    cfg: &SimConfig,
) -> Result<FptSampleSet> {
    let p = FptProblem::new(spec.clone(), init.clone(), s)?;
    sample_fpt_serial(&p, cfg, "reflected diffusion")
}

/// As [`sample_fpt`], with each path killed at an independent Exp(λ) time.
pub fn sample_fpt_with_catastrophe(
    lambda: f64,
    spec: &DiffusionSpec,
    init: &InitialLaw,
    s: f64,
    cfg: &SimConfig,
) -> Result<FptSampleSet> {
    let p = FptProblem::new(spec.clone(), init.clone(), s)?.with_catastrophe(lambda)?;
    sample_fpt_serial(&p, cfg, "reflected diffusion with catastrophes")
}

/// `sup |F_n − F|` where `F_n` is the empirical CDF over all paths; censored
/// paths sit at `+∞`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &FptSampleSet, target_cdf: F) -> f64 {
    ks_from_times(&samples.times(), samples.n_paths(), target_cdf)
}

/// As [`ks_statistic`] for raw observations out of `n` total.
pub fn ks_from_times<F: Fn(f64) -> f64>(times: &[f64], n: usize, target_cdf: F) -> f64 {
    let mut t = times.to_vec();
    t.sort_by(f64::total_cmp);
    let n = n as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < t.len() {
        let v = t[i];
        let mut j = i;
        while j < t.len() && t[j] == v {
            j += 1;
        }
        let before = i as f64 / n;
        let after = j as f64 / n;
        d = d.max(libm::fabs(after - target_cdf(v)));
        d = d.max(libm::fabs(before - target_cdf(v.next_down())));
        i = j;
    }
    if t.len() < n as usize || t.is_empty() {
        // the gap between the last observation and the target's limit
        d = d.max(libm::fabs(t.len() as f64 / n - target_cdf(f64::MAX)));
    }
    d
}

/// 95% Dvoretzky–Kiefer–Wolfowitz band half-width for `n` samples.
pub fn dkw_bound(n: usize) -> f64 {
    libm::sqrt(libm::log(2.0 / 0.05) / (2.0 * n as f64))
}
