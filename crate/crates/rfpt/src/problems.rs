//! Turns config entries into core objects: diffusions and target laws.

use std::sync::Arc;

use rfpt_core::analytic_bm::ReflectedBmSpec;
use rfpt_core::bvp::DiffusionSpec;
use rfpt_core::conjugation::{catalog, ConjugationMap};
use rfpt_core::presets::*;
use rfpt_core::{Complex64, DensityOnInterval, TransformFn};

use crate::config::{Geometry, Target};
use crate::CliError;

/// The process named by `geometry.process`.
#[derive(Clone)]
pub enum Process {
    /// Brownian motion with constant drift.
    Bm(ReflectedBmSpec),
    /// `dX = −k X dt + dB`.
    Ou { k: f64, spec: DiffusionSpec },
    /// A diffusion from the conjugation catalog.
    Conjugated {
        map: ConjugationMap,
        spec: DiffusionSpec,
    },
}

impl Process {
    pub fn from_geometry(g: &Geometry) -> Result<Self, CliError> {
        let name = g.process.trim();
        if name == "bm" {
            return Ok(Self::Bm(ReflectedBmSpec::new(g.mu, g.a, g.b)?));
        }
        if name == "ou" || name.starts_with("ou(") {
            let k = if name == "ou" {
                1.0
            } else {
                name.strip_prefix("ou(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.trim().parse::<f64>().ok())
                    .ok_or_else(|| CliError::Config(format!("cannot parse process `{name}`")))?
            };
            let spec = DiffusionSpec::new(move |x| -k * x, |_| 1.0, g.a, g.b)?;
            return Ok(Self::Ou { k, spec });
        }
        if g.mu != 0.0 {
            return Err(CliError::Config(
                "`mu` only applies to process = \"bm\"".into(),
            ));
        }
        let map = catalog(name)?;
        let spec = map.diffusion(g.a, g.b)?;
        Ok(Self::Conjugated { map, spec })
    }

    pub fn spec(&self) -> DiffusionSpec {
        match self {
            Self::Bm(bm) => DiffusionSpec::from_bm(bm),
            Self::Ou { spec, .. } | Self::Conjugated { spec, .. } => spec.clone(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Bm(_) => "bm".into(),
            Self::Ou { k, .. } => format!("ou({k})"),
            Self::Conjugated { map, .. } => map.name(),
        }
    }
}

/// A target law with whatever closed forms are known for it.
#[derive(Clone)]
pub struct ResolvedTarget {
    pub label: String,
    pub fhat: TransformFn,
    pub exact_density: Option<DensityOnInterval>,
    /// Catastrophe rate, for the jump problem.
    pub lambda: Option<f64>,
}

fn need_unit(a: f64, s: f64, what: &str) -> Result<(), CliError> {
    if a != 0.0 || s != 1.0 {
        return Err(CliError::Config(format!(
            "{what} is defined on [0, 1]; set a = 0, s = 1"
        )));
    }
    Ok(())
}

fn polynomial(c: &[f64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &v| acc * z + v)
}

/// Resolves `target` for a first-passage problem on `[a, s]`.
pub fn resolve_target(target: &Target, a: f64, s: f64) -> Result<ResolvedTarget, CliError> {
    let r = |label: &str, fhat, exact, lambda| ResolvedTarget {
        label: label.into(),
        fhat,
        exact_density: exact,
        lambda,
    };
    Ok(match target {
        Target::Example1 {} => r(
            "example1",
            example1_fhat(a, s),
            Some(example1_density(a, s)),
            None,
        ),
        Target::Example2 {} => {
            if a != 0.0 {
                return Err(CliError::Config("example2 needs a = 0".into()));
            }
            r(
                "example2",
                example2_fhat(s),
                Some(example2_density(s)),
                None,
            )
        }
        Target::Example3 {} => {
            need_unit(a, s, "example3")?;
            r("example3", example3_fhat(), Some(example3_density()), None)
        }
        Target::Example4 {} => {
            need_unit(a, s, "example4")?;
            r("example4", example4_fhat(), Some(example4_density()), None)
        }
        Target::Example5 { lambda } => {
            if a != 0.0 || !(*lambda > 0.0) {
                return Err(CliError::Config(
                    "example5 needs a = 0 and lambda > 0".into(),
                ));
            }
            r(
                "example5",
                example5_fbar_hat(*lambda, s),
                Some(example1_density(0.0, s)),
                Some(*lambda),
            )
        }
        Target::Gamma { alpha, lambda } => {
            if !(*alpha > 0.0 && *lambda > 0.0) {
                return Err(CliError::Config(
                    "gamma needs alpha > 0 and lambda > 0".into(),
                ));
            }
            r(
                &format!("gamma({alpha},{lambda})"),
                gamma_fhat(*alpha, *lambda),
                None,
                None,
            )
        }
        Target::G2k { k } => {
            need_unit(a, s, "g2k")?;
            r(
                &format!("g2k({k})"),
                g2k_fhat(*k)?,
                Some(g2k_density(*k)?),
                None,
            )
        }
        Target::Rational {
            numerator,
            denominator,
        } => {
            if numerator.is_empty() || denominator.is_empty() {
                return Err(CliError::Config(
                    "rational target needs coefficients".into(),
                ));
            }
            let (p, q) = (Arc::new(numerator.clone()), Arc::new(denominator.clone()));
            let f = TransformFn::analytic(move |z| polynomial(&p, z) / polynomial(&q, z));
            r("rational", f, None, None)
        }
        Target::Immediate {} => r("immediate", immediate_fhat(), None, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn processes() {
        let mut g = Geometry::default();
        assert!(matches!(
            Process::from_geometry(&g).unwrap(),
            Process::Bm(_)
        ));
        g.process = "ou(2)".into();
        let p = Process::from_geometry(&g).unwrap();
        assert_eq!(p.spec().drift(0.5), -1.0);
        g.process = "cir_feller".into();
        assert_eq!(Process::from_geometry(&g).unwrap().name(), "cir_feller");
        g.process = "heston".into();
        assert!(Process::from_geometry(&g).is_err());
    }

    #[test]
    fn rational_target() {
        let t = Target::Rational {
            numerator: vec![2.0],
            denominator: vec![2.0, 1.0],
        };
        let r = resolve_target(&t, 0.0, 1.0).unwrap();
        assert!((r.fhat.eval(2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_interval_targets_check_geometry() {
        assert!(resolve_target(&Target::Example3 {}, 0.0, 2.0).is_err());
        assert!(resolve_target(&Target::G2k { k: 0 }, 0.0, 1.0).is_err());
        assert!(resolve_target(&Target::Example2 {}, 0.5, 1.0).is_err());
    }
}
