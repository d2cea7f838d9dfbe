//! Experiment files: a TOML document with a `kind`, the geometry, an optional
//! target law and numeric overrides. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Direct,
    Ifpt,
    IfptJump,
    Conjugated,
    MontecarloVerify,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Direct => "direct",
            Kind::Ifpt => "ifpt",
            Kind::IfptJump => "ifpt_jump",
            Kind::Conjugated => "conjugated",
            Kind::MontecarloVerify => "montecarlo_verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Name of the verification matrix for `montecarlo_verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    #[serde(default)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    /// `bm`, `ou` / `ou(k)` for drift `−k·x`, or a conjugation catalog name.
    pub process: String,
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub mu: f64,
    /// Starting point for direct problems and Monte Carlo checks.
    pub x: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            process: "bm".into(),
            a: 0.0,
            b: 2.0,
            s: 1.0,
            mu: 0.0,
            x: 0.0,
        }
    }
}

/// Target first-passage law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    /// Uniform start on `[a, S]`.
    Example1 {},
    /// Sine start on `[0, S]`.
    Example2 {},
    /// Triangular start on `[0, 1]`.
    Example3 {},
    /// Beta(2, 2) start on `[0, 1]`.
    Example4 {},
    /// Uniform start with catastrophes at rate `lambda`.
    Example5 {
        lambda: f64,
    },
    Gamma {
        #[serde(default = "one")]
        alpha: f64,
        lambda: f64,
    },
    G2k {
        k: u32,
    },
    /// `f̂(θ) = P(θ)/Q(θ)` with coefficients in increasing powers of `θ`.
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
    /// `τ = 0` almost surely.
    Immediate {},
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Monte Carlo horizon; defaults to a multiple of the mean hitting time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub theta_grid: Vec<f64>,
    pub t_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub x_points: usize,
    pub bvp_nodes: usize,
    pub harmonics: usize,
    /// Cross-check direct results against Monte Carlo.
    pub mc_check: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            n_paths: 10_000,
            seed: 20_240_617,
            horizon: None,
            theta_grid: vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
            t_points: 200,
            t_max: None,
            x_points: 21,
            bvp_nodes: 2001,
            harmonics: 2048,
            mc_check: false,
        }
    }
}

/// Command-line overrides applied after loading.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(s) = o.seed {
            self.numerics.seed = s;
        }
        if let Some(n) = o.paths {
            self.numerics.n_paths = n;
        }
        if let Some(dt) = o.dt {
            self.numerics.dt = dt;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.geometry;
        let n = &self.numerics;
        let bad = |m: String| Err(CliError::Config(m));
        if ![g.a, g.b, g.s, g.mu, g.x].iter().all(|v| v.is_finite()) {
            return bad("geometry values must be finite".into());
        }
        if !(g.a < g.s && g.s <= g.b) {
            return bad(format!(
                "need a < S <= b, got a = {}, S = {}, b = {}",
                g.a, g.s, g.b
            ));
        }
        if !(n.dt > 0.0) || !n.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", n.dt));
        }
        if n.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if n.theta_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return bad("theta_grid entries must be finite and >= 0".into());
        }
        if n.t_points < 2 || n.x_points < 2 || n.bvp_nodes < 5 || n.harmonics == 0 {
            return bad("grid sizes too small".into());
        }
        if let Some(h) = n.horizon {
            if !(h >= n.dt) {
                return bad(format!("horizon must be at least dt, got {h}"));
            }
        }
        match self.kind {
            Kind::MontecarloVerify if self.check.is_none() => {
                return bad("montecarlo_verify needs a `check` name".into());
            }
            Kind::Ifpt | Kind::IfptJump | Kind::Conjugated if self.target.is_none() => {
                return bad(format!(
                    "kind {} needs a [target] table",
                    self.kind.as_str()
                ));
            }
            _ => {}
        }
        if self.kind != Kind::MontecarloVerify && self.check.is_some() {
            return bad("`check` is only used by montecarlo_verify".into());
        }
        Ok(())
    }

    /// Resolved config as compact JSON, embedded in every output file.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn base(kind: Kind) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        check: None,
        geometry: Geometry::default(),
        target: None,
        numerics: Numerics::default(),
    }
}

fn parse_k(name: &str) -> Option<u32> {
    name.strip_prefix("g2k(")?
        .strip_suffix(')')?
        .trim()
        .parse()
        .ok()
}

/// Built-in experiment for `kind` called `name`.
pub fn preset(kind: Kind, name: &str) -> Result<ExperimentConfig, CliError> {
    let mut c = base(kind);
    let unknown = || CliError::Config(format!("unknown {} preset `{name}`", kind.as_str()));
    match kind {
        Kind::Direct => match name {
            "reflected_bm" => {}
            "reflected_bm_drift" => c.geometry.mu = 1.0,
            "reflected_ou" => {
                c.geometry.process = "ou".into();
                c.geometry.x = 0.2;
                c.numerics.mc_check = true;
            }
            _ => return Err(unknown()),
        },
        Kind::Ifpt => {
            c.target = Some(match name {
                "example1" => Target::Example1 {},
                "example2" => Target::Example2 {},
                "example3" => Target::Example3 {},
                "example4" => Target::Example4 {},
                "gamma_counterexample" => Target::Gamma {
                    alpha: 1.0,
                    lambda: 1.0,
                },
                _ => match parse_k(name) {
                    Some(k) => Target::G2k { k },
                    None => return Err(unknown()),
                },
            })
        }
        Kind::IfptJump => match name {
            "example5" => c.target = Some(Target::Example5 { lambda: 0.5 }),
            _ => return Err(unknown()),
        },
        Kind::Conjugated => {
            c.target = Some(Target::Example1 {});
            match name {
                "cir_conjugation" => {
                    c.geometry.process = "cir_feller".into();
                    c.geometry.b = 4.0;
                    c.geometry.x = 0.25;
                }
                "wright_fisher_conjugation" => {
                    c.geometry.process = "wright_fisher".into();
                    c.geometry.s = 0.5;
                    c.geometry.b = 1.0;
                    c.geometry.x = 0.1;
                }
                _ => return Err(unknown()),
            }
        }
        Kind::MontecarloVerify => {
            c.check = Some(name.into());
            match name {
                "example1" | "bm_moments" | "analytic_vs_bvp" => {}
                "example5" => c.target = Some(Target::Example5 { lambda: 0.5 }),
                "trivial_point_mass" => c.geometry.x = c.geometry.s,
                "cir_conjugation" | "wright_fisher_conjugation" => {
                    let conj = preset(Kind::Conjugated, name)?;
                    c.geometry = conj.geometry;
                }
                "reflected_ou" => {
                    c.geometry.process = "ou".into();
                    c.geometry.x = 0.2;
                }
                _ => return Err(unknown()),
            }
        }
    }
    c.validate()?;
    Ok(c)
}

pub const DIRECT_PRESETS: &[&str] = &["reflected_bm", "reflected_bm_drift", "reflected_ou"];
pub const IFPT_PRESETS: &[&str] = &[
    "example1",
    "example2",
    "example3",
    "example4",
    "gamma_counterexample",
    "g2k(1)",
    "g2k(2)",
    "g2k(3)",
];
pub const VERIFY_PRESETS: &[&str] = &[
    "example1",
    "example5",
    "trivial_point_mass",
    "bm_moments",
    "analytic_vs_bvp",
    "cir_conjugation",
    "wright_fisher_conjugation",
    "reflected_ou",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let text = r#"
kind = "ifpt"

[geometry]
a = 0.0
s = 1.0

[target]
preset = "g2k"
k = 2

[numerics]
seed = 7
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.target, Some(Target::G2k { k: 2 }));
        assert_eq!(c.numerics.seed, 7);
        assert_eq!(c.numerics.n_paths, 10_000);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("kind = \"direct\"\nfoo = 1").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"direct\"\n[geometry]\nsigma = 1").is_err());
        assert!(ExperimentConfig::from_toml(
            "kind = \"ifpt\"\n[target]\npreset = \"example1\"\nk = 1"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml("kind = \"warp\"").is_err());
    }

    #[test]
    fn semantic_checks() {
        assert!(ExperimentConfig::from_toml("kind = \"ifpt\"").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"direct\"\n[geometry]\ns = 3.0").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"direct\"\n[numerics]\ndt = -1.0").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"montecarlo_verify\"").is_err());
    }

    #[test]
    fn rational_target_and_round_trip() {
        let text = "kind = \"ifpt\"\n[target]\npreset = \"rational\"\nnumerator = [1.0]\ndenominator = [1.0, 1.0]\n";
        let c = ExperimentConfig::from_toml(text).unwrap();
        let back: ExperimentConfig = toml::from_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn all_presets_resolve() {
        for p in DIRECT_PRESETS {
            preset(Kind::Direct, p).unwrap();
        }
        for p in IFPT_PRESETS {
            preset(Kind::Ifpt, p).unwrap();
        }
        for p in VERIFY_PRESETS {
            preset(Kind::MontecarloVerify, p).unwrap();
        }
        preset(Kind::IfptJump, "example5").unwrap();
        assert!(preset(Kind::Ifpt, "example9").is_err());
        assert_eq!(
            preset(Kind::Ifpt, "g2k(3)").unwrap().target,
            Some(Target::G2k { k: 3 })
        );
    }

    #[test]
    fn overrides() {
        let mut c = preset(Kind::MontecarloVerify, "example1").unwrap();
        c.apply(&Overrides {
            seed: Some(1),
            paths: Some(10),
            dt: Some(1e-3),
        })
        .unwrap();
        assert_eq!(
            (c.numerics.seed, c.numerics.n_paths, c.numerics.dt),
            (1, 10, 1e-3)
        );
        assert!(c
            .apply(&Overrides {
                paths: Some(0),
                ..Default::default()
            })
            .is_err());
    }
}
