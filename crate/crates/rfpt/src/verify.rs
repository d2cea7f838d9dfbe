//! Verification matrices: closed forms against the ODE solver and against
//! Monte Carlo.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use rfpt_core::analytic_bm::{
    fpt_cdf_driftless, laplace_fpt_below, mean_fpt, second_moment_fpt, ReflectedBmSpec,
};
use rfpt_core::bvp::{laplace_solution_below, moment_solutions, BvpConfig, DiffusionSpec};
use rfpt_core::conjugation::{verify_conjugation, ConjugationMap};
use rfpt_core::montecarlo::{ks_statistic, FptProblem, FptSampleSet, InitialLaw};
use rfpt_core::presets::{example1_cdf, example5_cdf};

use crate::commands::{conjugated_parts, conjugated_uniform_mass, sim_config, Outcome};
use crate::config::{ExperimentConfig, Target};
use crate::problems::Process;
use crate::report::{num, ReportWriter};
use crate::sampling::{par_sample, sample_table};
use crate::CliError;

/// Largest accepted Kolmogorov–Smirnov distance.
pub const KS_TOLERANCE: f64 = 0.02;
/// Largest accepted gap between closed form and ODE solution.
pub const BVP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "ser_num")]
    pub value: f64,
    #[serde(serialize_with = "ser_num")]
    pub threshold: f64,
    pub pass: bool,
}

fn ser_num<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    num(*v).serialize(s)
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

struct Run {
    checks: Vec<Check>,
    samples: Vec<(String, FptSampleSet)>,
}

fn bm_of(cfg: &ExperimentConfig) -> Result<ReflectedBmSpec, CliError> {
    match Process::from_geometry(&cfg.geometry)? {
        Process::Bm(bm) => Ok(bm),
        _ => Err(CliError::Config("this check needs process = \"bm\"".into())),
    }
}

fn mean_check(name: &str, set: &FptSampleSet, expected: f64) -> Check {
    let (m, se) = set.mean_with_se();
    Check::at_most(name, (m - expected).abs(), 3.0 * se)
}

fn uniform_start(cfg: &ExperimentConfig, with_catastrophe: bool) -> Result<Run, CliError> {
    let g = &cfg.geometry;
    let bm = bm_of(cfg)?;
    if bm.mu != 0.0 {
        return Err(CliError::Config(
            "the uniform-start check is driftless".into(),
        ));
    }
    let l2 = (g.s - g.a) * (g.s - g.a);
    let mut problem = FptProblem::new(
        DiffusionSpec::from_bm(&bm),
        InitialLaw::Uniform { lo: g.a, hi: g.s },
        g.s,
    )?;
    let sc = sim_config(cfg, 2.0 / 3.0 * l2)?;
    let mut checks = Vec::new();
    let set = if with_catastrophe {
        let lambda = match &cfg.target {
            Some(Target::Example5 { lambda }) => *lambda,
            _ => {
                return Err(CliError::Config(
                    "example5 check needs target example5".into(),
                ))
            }
        };
        if g.a != 0.0 {
            return Err(CliError::Config("example5 check is set on [0, S]".into()));
        }
        problem = problem.with_catastrophe(lambda)?;
        let set = par_sample(&problem, &sc, "uniform start with catastrophes")?;
        checks.push(Check::at_most(
            "ks_catastrophe_vs_closed_form",
            ks_statistic(&set, |t| example5_cdf(lambda, g.s, t)),
            KS_TOLERANCE,
        ));
        set
    } else {
        let set = par_sample(&problem, &sc, "uniform start")?;
        checks.push(Check::at_most(
            "ks_vs_closed_form",
            ks_statistic(&set, |t| example1_cdf(g.a, g.s, t)),
            KS_TOLERANCE,
        ));
        checks.push(mean_check("mean_within_3_se", &set, 2.0 / 3.0 * l2));
        set
    };
    Ok(Run {
        checks,
        samples: vec![("samples.csv".into(), set)],
    })
}

fn point_mass(cfg: &ExperimentConfig) -> Result<Run, CliError> {
    let g = &cfg.geometry;
    let bm = bm_of(cfg)?;
    let problem = FptProblem::new(DiffusionSpec::from_bm(&bm), InitialLaw::Point(g.x), g.s)?;
    let set = par_sample(&problem, &sim_config(cfg, 1.0)?, "start at the barrier")?;
    let max_time = set.times().iter().fold(0.0f64, |m, &t| m.max(t));
    let ks = ks_statistic(&set, |t| if t >= 0.0 { 1.0 } else { 0.0 });
    Ok(Run {
        checks: vec![
            Check::at_most("max_fpt", max_time + set.censored_count() as f64, 0.0),
            Check::at_most("ks_vs_point_mass", ks, 0.0),
        ],
        samples: vec![("samples.csv".into(), set)],
    })
}

fn bm_moments(cfg: &ExperimentConfig) -> Result<Run, CliError> {
    let g = &cfg.geometry;
    let bm = bm_of(cfg)?;
    let t1 = mean_fpt(&bm, g.x, g.s)?;
    let t2 = second_moment_fpt(&bm, g.x, g.s)?;
    let problem = FptProblem::new(DiffusionSpec::from_bm(&bm), InitialLaw::Point(g.x), g.s)?;
    let set = par_sample(&problem, &sim_config(cfg, t1)?, "point start")?;
    let (v, se_v) = set.variance_with_se();
    Ok(Run {
        checks: vec![
            mean_check("mean_within_3_se", &set, t1),
            Check::at_most(
                "variance_within_3_se",
                (v - (t2 - t1 * t1)).abs(),
                3.0 * se_v,
            ),
        ],
        samples: vec![("samples.csv".into(), set)],
    })
}

/// Max gap between the closed-form transform and the ODE solution over
/// the drift, start and `θ` grid used for acceptance.
pub fn analytic_vs_bvp_gap(nodes: usize) -> Result<f64, CliError> {
    let bc = BvpConfig {
        nodes,
        richardson: true,
    };
    let mut worst = 0.0f64;
    for &mu in &[-1.0, 0.0, 0.5, 1.0, 2.0] {
        let bm = ReflectedBmSpec::new(mu, 0.0, 2.0)?;
        let spec = DiffusionSpec::from_bm(&bm);
        for &th in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            let sol = laplace_solution_below(&spec, 1.0, th, &bc)?;
            for &x in &[0.0, 0.2, 0.5, 0.8, 0.95] {
                let gap = (sol.ratio_at(x) - laplace_fpt_below(&bm, x, 1.0, th)?).abs();
                worst = worst.max(gap);
            }
        }
    }
    Ok(worst)
}

/// KS distance between hitting times of the original diffusion and the
/// closed-form law of driftless reflected BM started at `V(x)`.
pub fn conjugation_ks(
    cfg: &ExperimentConfig,
    map: &ConjugationMap,
    spec: &DiffusionSpec,
) -> Result<(f64, FptSampleSet), CliError> {
    let g = &cfg.geometry;
    let (va, vs, vx) = (map.v(g.a)?, map.v(g.s)?, map.v(g.x)?);
    let mean = (vs - va).powi(2) - (vx - va).powi(2);
    let problem = FptProblem::new(spec.clone(), InitialLaw::Point(g.x), g.s)?;
    let set = par_sample(&problem, &sim_config(cfg, mean)?, "original diffusion")?;
    let ks = ks_statistic(&set, |t| {
        fpt_cdf_driftless(va, vs, vx, t).unwrap_or(f64::NAN)
    });
    Ok((ks, set))
}

fn conjugation(cfg: &ExperimentConfig) -> Result<Run, CliError> {
    let g = &cfg.geometry;
    let (map, spec) = conjugated_parts(cfg)?;
    let (ks, set) = conjugation_ks(cfg, &map, &spec)?;
    let mass = conjugated_uniform_mass(&map, g.a, g.s)?;
    let res = verify_conjugation(&map, &spec, g.a + 0.01 * (g.s - g.a), g.s)?;
    Ok(Run {
        checks: vec![
            Check::at_most("ks_original_vs_image_bm", ks, KS_TOLERANCE),
            Check::at_most("uniform_image_mass_error", (mass - 1.0).abs(), 1e-8),
            Check::at_most("drift_identity_residual", res.drift, 1e-6),
            Check::at_most("vprime_identity_residual", res.vprime, 1e-6),
        ],
        samples: vec![("samples.csv".into(), set)],
    })
}

fn reflected_ou(cfg: &ExperimentConfig) -> Result<Run, CliError> {
    let g = &cfg.geometry;
    let spec = Process::from_geometry(g)?.spec();
    let bc = BvpConfig {
        nodes: cfg.numerics.bvp_nodes,
        richardson: true,
    };
    let t1 = moment_solutions(&spec, g.s, 1, true, &bc)?[0].value_at(g.x);
    let problem = FptProblem::new(spec, InitialLaw::Point(g.x), g.s)?;
    let set = par_sample(&problem, &sim_config(cfg, t1)?, "point start")?;
    Ok(Run {
        checks: vec![mean_check("bvp_mean_within_3_se", &set, t1)],
        samples: vec![("samples.csv".into(), set)],
    })
}

/// Runs the named verification matrix, writes `verify.json` and the sample
/// tables, and passes only if every check does.
pub fn cmd_verify(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let name = cfg.check.as_deref().expect("validated");
    let start = Instant::now();
    let run = match name {
        "example1" => uniform_start(cfg, false)?,
        "example5" => uniform_start(cfg, true)?,
        "trivial_point_mass" => point_mass(cfg)?,
        "bm_moments" => bm_moments(cfg)?,
        "analytic_vs_bvp" => Run {
            checks: vec![Check::at_most(
                "max_transform_gap",
                analytic_vs_bvp_gap(cfg.numerics.bvp_nodes)?,
                BVP_TOLERANCE,
            )],
            samples: vec![],
        },
        "cir_conjugation" | "wright_fisher_conjugation" => conjugation(cfg)?,
        "reflected_ou" => reflected_ou(cfg)?,
        other => return Err(CliError::Config(format!("unknown check `{other}`"))),
    };
    eprintln!("verify {name}: {:.2} s", start.elapsed().as_secs_f64());
    let mut w = ReportWriter::new(out, "verify")?;
    for (file, set) in &run.samples {
        w.csv(file, &sample_table(set), cfg)?;
    }
    let passed = run.checks.iter().all(|c| c.pass);
    let summary = json!({
        "check": name,
        "pass": passed,
        "checks": run.checks,
        "samples": run.samples.iter().map(|(f, s)| json!({
            "file": f,
            "n_paths": s.n_paths(),
            "censored": s.censored_count(),
        })).collect::<Vec<Value>>(),
    });
    w.json("verify.json", summary.clone(), cfg)?;
    Ok(Outcome {
        files: w.written,
        summary,
        passed,
    })
}
