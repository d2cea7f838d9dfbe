//! Diffusions turned into regulated BM by an increasing change of variable
//! `V`: if `dX = ½σσ′(X)dt + σ(X)dB` (reflected on `[a, b]`) and
//! `V′ = 1/σ`, then `Y = V(X)` is regulated BM on `[V(a), V(b)]`.
//! First-passage problems for `X` through `S` are the same problems for `Y`
//! through `V(S)`, and start densities map as `g(x) = g̃(V(x))V′(x)`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::analytic_bm::ReflectedBmSpec;
use crate::bvp::DiffusionSpec;
use crate::error::domain;
use crate::ifpt::{solve_symmetric, Direction, IfptProblem, IfptSolution};
use crate::{DensityOnInterval, Error, Result, TransformFn};

/// The maps available by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogEntry {
    /// `dX = ⅓X^{1/3}dt + X^{2/3}dB`, `V = 3x^{1/3}`.
    CubicPower,
    /// `dX = (3c²/8)X^{1/2}dt + cX^{3/4}dB`, `V = (4/c)x^{1/4}`.
    QuarticPower {
        c: f64,
    },
    /// `dX = ¼dt + √X dB`, `V = 2√x`.
    CirFeller,
    /// `dX = (¼ − ½X)dt + √(X(1−X)) dB`, `V = 2 arcsin √x`.
    WrightFisher,
    /// `dX = rX dt + σX dB`, `V = ln(x)/σ`; `Y` has drift `(r − σ²/2)/σ`.
    Gbm {
        r: f64,
        sigma: f64,
    },
    Identity,
}

impl CatalogEntry {
    pub fn name(&self) -> String {
        match self {
            Self::CubicPower => "cubic_power".into(),
            Self::QuarticPower { c } => alloc::format!("quartic_power({c})"),
            Self::CirFeller => "cir_feller".into(),
            Self::WrightFisher => "wright_fisher".into(),
            Self::Gbm { r, sigma } => alloc::format!("gbm({r},{sigma})"),
            Self::Identity => "identity".into(),
        }
    }
}

type Map = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An increasing map `V` with derivative and inverse on `domain`, together
/// with the diffusion it conjugates to regulated BM.
#[derive(Clone)]
pub struct ConjugationMap {
    entry: CatalogEntry,
    v: Map,
    vprime: Map,
    vinv: Map,
    drift: Map,
    sigma: Map,
    domain: (f64, f64),
    induced_drift: f64,
}

impl fmt::Debug for ConjugationMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConjugationMap")
            .field("entry", &self.entry)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

fn arc<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Map {
    Arc::new(f)
}

/// Looks up a map by its identifier: `cubic_power`, `quartic_power(c)`,
/// `cir_feller`, `wright_fisher`, `gbm(r,sigma)` or `identity`.
pub fn catalog(name: &str) -> Result<ConjugationMap> {
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(i) if name.ends_with(')') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
        Some(_) => return Err(Error::UnknownCatalog(name.to_string())),
        None => (name, None),
    };
    let parse = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::UnknownCatalog(name.to_string()))
            })
            .collect()
    };
    let entry = match (head, args) {
        ("cubic_power", None) => CatalogEntry::CubicPower,
        ("quartic_power", Some(a)) => match parse(a)?.as_slice() {
            [c] => CatalogEntry::QuarticPower { c: *c },
            _ => return Err(Error::UnknownCatalog(name.to_string())),
        },
        ("cir_feller", None) => CatalogEntry::CirFeller,
        ("wright_fisher", None) => CatalogEntry::WrightFisher,
        ("gbm", Some(a)) => match parse(a)?.as_slice() {
            [r, s] => CatalogEntry::Gbm { r: *r, sigma: *s },
            _ => return Err(Error::UnknownCatalog(name.to_string())),
        },
        ("identity", None) => CatalogEntry::Identity,
        _ => return Err(Error::UnknownCatalog(name.to_string())),
    };
    catalog_entry(entry)
}

pub fn catalog_entry(entry: CatalogEntry) -> Result<ConjugationMap> {
    let inf = f64::INFINITY;
    let m = match entry {
        CatalogEntry::CubicPower => ConjugationMap {
            entry,
            v: arc(|x| 3.0 * libm::cbrt(x)),
            vprime: arc(|x| 1.0 / libm::cbrt(x * x)),
            vinv: arc(|y| {
                let t = y / 3.0;
                t * t * t
            }),
            drift: arc(|x| libm::cbrt(x) / 3.0),
            sigma: arc(|x| libm::cbrt(x * x)),
            domain: (0.0, inf),
            induced_drift: 0.0,
        },
        CatalogEntry::QuarticPower { c } => {
            if !(c > 0.0) || !c.is_finite() {
                return Err(domain("quartic_power needs c > 0"));
            }
            ConjugationMap {
                entry,
                v: arc(move |x| 4.0 / c * libm::sqrt(libm::sqrt(x))),
                vprime: arc(move |x| 1.0 / (c * libm::pow(x, 0.75))),
                vinv: arc(move |y| {
                    let t = c * y / 4.0;
                    t * t * t * t
                }),
                drift: arc(move |x| 3.0 * c * c / 8.0 * libm::sqrt(x)),
                sigma: arc(move |x| c * libm::pow(x, 0.75)),
                domain: (0.0, inf),
                induced_drift: 0.0,
            }
        }
        CatalogEntry::CirFeller => ConjugationMap {
            entry,
            v: arc(|x| 2.0 * libm::sqrt(x)),
            vprime: arc(|x| 1.0 / libm::sqrt(x)),
            vinv: arc(|y| y * y / 4.0),
            drift: arc(|_| 0.25),
            sigma: arc(libm::sqrt),
            domain: (0.0, inf),
            induced_drift: 0.0,
        },
        CatalogEntry::WrightFisher => ConjugationMap {
            entry,
            v: arc(|x| 2.0 * libm::asin(libm::sqrt(x))),
            vprime: arc(|x| 1.0 / libm::sqrt(x * (1.0 - x))),
            vinv: arc(|y| {
                let s = libm::sin(0.5 * y);
                s * s
            }),
            drift: arc(|x| 0.25 - 0.5 * x),
            sigma: arc(|x| libm::sqrt((x * (1.0 - x)).max(0.0))),
            domain: (0.0, 1.0),
            induced_drift: 0.0,
        },
        CatalogEntry::Gbm { r, sigma } => {
            if !(sigma > 0.0) || !sigma.is_finite() || !r.is_finite() {
                return Err(domain("gbm needs finite r and sigma > 0"));
            }
            ConjugationMap {
                entry,
                v: arc(move |x| libm::log(x) / sigma),
                vprime: arc(move |x| 1.0 / (sigma * x)),
                vinv: arc(move |y| libm::exp(sigma * y)),
                drift: arc(move |x| r * x),
                sigma: arc(move |x| sigma * x),
                domain: (0.0, inf),
                induced_drift: (r - 0.5 * sigma * sigma) / sigma,
            }
        }
        CatalogEntry::Identity => ConjugationMap {
            entry,
            v: arc(|x| x),
            vprime: arc(|_| 1.0),
            vinv: arc(|y| y),
            drift: arc(|_| 0.0),
            sigma: arc(|_| 1.0),
            domain: (-inf, inf),
            induced_drift: 0.0,
        },
    };
    Ok(m)
}

impl ConjugationMap {
    pub fn entry(&self) -> CatalogEntry {
        self.entry
    }

    pub fn name(&self) -> String {
        self.entry.name()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Drift of `Y = V(X)`; zero except for `gbm`.
    pub fn induced_drift(&self) -> f64 {
        self.induced_drift
    }

    fn check(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        let open_lo = matches!(self.entry, CatalogEntry::Gbm { .. });
        let ok = if open_lo {
            x > lo && x <= hi
        } else {
            x >= lo && x <= hi
        };
        if !ok || x.is_nan() {
            return Err(domain(alloc::format!(
                "x = {x} outside the domain of {}",
                self.name()
            )));
        }
        Ok(())
    }

    pub fn v(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok((self.v)(x))
    }

    pub fn vprime(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok((self.vprime)(x))
    }

    pub fn vinv(&self, y: f64) -> Result<f64> {
        let x = (self.vinv)(y);
        if let CatalogEntry::WrightFisher = self.entry {
            if !(0.0..=PI).contains(&y) {
                return Err(domain(alloc::format!("y = {y} outside [0, π]")));
            }
        }
        if matches!(
            self.entry,
            CatalogEntry::CubicPower | CatalogEntry::QuarticPower { .. } | CatalogEntry::CirFeller
        ) && y < 0.0
        {
            return Err(domain(alloc::format!("y = {y} must be >= 0")));
        }
        Ok(x)
    }

    /// The reflected diffusion on `[a, b]` that this map conjugates.
    pub fn diffusion(&self, a: f64, b: f64) -> Result<DiffusionSpec> {
        self.check(a)?;
        self.check(b)?;
        let drift = self.drift.clone();
        let sigma = self.sigma.clone();
        DiffusionSpec::new(move |x| drift(x), move |x| sigma(x), a, b)
    }

    /// Regulated BM `Y = V(X)` on `[V(a), V(b)]`.
    pub fn image_bm(&self, a: f64, b: f64) -> Result<ReflectedBmSpec> {
        ReflectedBmSpec::new(self.induced_drift, self.v(a)?, self.v(b)?)
    }
}

/// `g(x) = g̃(V(x))V′(x)` on `[V⁻¹(lo), V⁻¹(hi)]` for `g̃` on `[lo, hi]`.
pub fn map_solution_back(
    gtilde: &DensityOnInterval,
    map: &ConjugationMap,
) -> Result<DensityOnInterval> {
    let (lo, hi) = gtilde.support();
    let a = map.vinv(lo).map_err(|_| {
        Error::Support(alloc::format!(
            "[{lo}, {hi}] is not inside the image of {}",
            map.name()
        ))
    })?;
    let s = map.vinv(hi).map_err(|_| {
        Error::Support(alloc::format!(
            "[{lo}, {hi}] is not inside the image of {}",
            map.name()
        ))
    })?;
    map.check(a)
        .map_err(|e| Error::Support(alloc::format!("{e}")))?;
    map.check(s)
        .map_err(|e| Error::Support(alloc::format!("{e}")))?;
    let g = gtilde.clone();
    let v = map.v.clone();
    let vp = map.vprime.clone();
    Ok(DensityOnInterval::new(a, s, move |x| g.eval(v(x)) * vp(x)))
}

/// A symmetric solution in `V` coordinates and its image on `[a, S]`.
#[derive(Debug, Clone)]
pub struct ConjugatedSolution {
    pub map_name: String,
    pub a: f64,
    pub s: f64,
    /// The solution for regulated BM on `[V(a), V(S)]`.
    pub transformed: IfptSolution,
    /// `g(x) = g̃(V(x))V′(x)` on `[a, S]`.
    pub density: DensityOnInterval,
    /// Check points on `[a, S]` and the density there.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl ConjugatedSolution {
    pub fn is_valid(&self) -> bool {
        self.transformed.is_valid()
    }
}

/// Solves the problem for `X` through `S` with a start law symmetric in `V`
/// coordinates, then maps the density back.
pub fn solve_conjugated_symmetric(
    map: &ConjugationMap,
    a: f64,
    s: f64,
    fhat: &TransformFn,
) -> Result<ConjugatedSolution> {
    if map.induced_drift() != 0.0 {
        return Err(domain(
            "the symmetric solution needs a driftless image process",
        ));
    }
    if !(a < s) {
        return Err(domain(alloc::format!("need a < S, got {a}, {s}")));
    }
    let (va, vs) = (map.v(a)?, map.v(s)?);
    let bm = ReflectedBmSpec::new(0.0, va, vs)?;
    let problem = IfptProblem::new(bm, vs, fhat.clone(), Direction::FromBelow)?;
    let transformed = solve_symmetric(&problem)?;
    let density = map_solution_back(&transformed.density, map)?;
    let grid: Vec<f64> = transformed
        .grid
        .iter()
        .map(|&y| map.vinv(y).map(|x| x.clamp(a, s)))
        .collect::<Result<_>>()?;
    let values = grid
        .iter()
        .zip(&transformed.values)
        .map(|(&x, &gv)| gv * (map.vprime)(x))
        .collect();
    Ok(ConjugatedSolution {
        map_name: map.name(),
        a,
        s,
        transformed,
        density,
        grid,
        values,
    })
}

/// Largest deviations from the conjugation identities on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugationResiduals {
    /// `max |μ − ½σσ′ − m σ|` with `m` the induced drift.
    pub drift: f64,
    /// `max |V′ − 1/σ|`.
    pub vprime: f64,
}

/// Checks `μ = ½σσ′ (+ mσ)` and `V′ = 1/σ` for `spec` on 201 points of
/// `[lo, hi]`, with `σ′` by a fourth-order central difference.
pub fn verify_conjugation(
    map: &ConjugationMap,
    spec: &DiffusionSpec,
    lo: f64,
    hi: f64,
) -> Result<ConjugationResiduals> {
    if !(lo < hi) {
        return Err(domain("need lo < hi"));
    }
    map.check(lo)?;
    map.check(hi)?;
    let mut drift = 0.0f64;
    let mut vprime = 0.0f64;
    let m = map.induced_drift();
    for i in 0..201 {
        let x = lo + (hi - lo) * i as f64 / 200.0;
        let h = 1e-3 * x.abs().clamp(1e-2, 1.0);
        let s = |y: f64| spec.diffusion(y);
        let ds = (-s(x + 2.0 * h) + 8.0 * s(x + h) - 8.0 * s(x - h) + s(x - 2.0 * h)) / (12.0 * h);
        let sx = s(x);
        drift = drift.max(libm::fabs(spec.drift(x) - 0.5 * sx * ds - m * sx));
        vprime = vprime.max(libm::fabs((map.vprime)(x) - 1.0 / sx));
    }
    Ok(ConjugationResiduals { drift, vprime })
}
