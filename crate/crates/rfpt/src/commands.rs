//! The `direct`, `ifpt`, `jump` and `conjugated` commands.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use rfpt_core::analytic_bm::{
    laplace_below_complex, laplace_fpt_below, mean_fpt, second_moment_fpt, spectral_density,
};
use rfpt_core::bvp::{laplace_via_bvp_below_with, moment_solutions, BvpConfig, DiffusionSpec};
use rfpt_core::conjugation::{solve_conjugated_symmetric, verify_conjugation, ConjugationMap};
use rfpt_core::ifpt::{
    forward_fhat, jump_forward, jump_solve_symmetric_with, solve_symmetric_with, CompatReport,
    Direction, IfptProblem, IfptSolution, RecoveryConfig, Verdict,
};
use rfpt_core::laplace::{invert, InversionConfig};
use rfpt_core::montecarlo::{FptProblem, InitialLaw, SimConfig};
use rfpt_core::quadrature::integrate;
use rfpt_core::TransformFn;

use crate::config::{ExperimentConfig, Kind};
use crate::problems::{resolve_target, Process, ResolvedTarget};
use crate::report::{num, Cell, ReportWriter, Table};
use crate::sampling::{par_sample, sample_table};
use crate::CliError;

/// Files written by a command and its JSON summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Value,
    /// False when a check inside the command failed.
    pub passed: bool,
}

/// Stehfest order used on transforms computed by the ODE solver; larger
/// orders amplify the discretization error.
const BVP_STEHFEST_ORDER: usize = 10;

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    match cfg.kind {
        Kind::Direct => cmd_direct(cfg, out),
        Kind::Ifpt => cmd_ifpt(cfg, out),
        Kind::IfptJump => cmd_jump(cfg, out),
        Kind::Conjugated => cmd_conjugated(cfg, out),
        Kind::MontecarloVerify => crate::verify::cmd_verify(cfg, out),
    }
}

fn bvp_config(cfg: &ExperimentConfig) -> BvpConfig {
    BvpConfig {
        nodes: cfg.numerics.bvp_nodes,
        richardson: true,
    }
}

pub(crate) fn sim_config(cfg: &ExperimentConfig, mean_fpt: f64) -> Result<SimConfig, CliError> {
    let n = &cfg.numerics;
    let sc = match n.horizon {
        Some(h) => SimConfig::new(n.dt, h, n.n_paths, n.seed)?,
        None => SimConfig::for_mean(n.dt, mean_fpt.max(n.dt), n.n_paths, n.seed)?,
    };
    Ok(sc)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Transform, density and moment tables for one starting point.
pub fn cmd_direct(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let g = &cfg.geometry;
    let n = &cfg.numerics;
    if !(g.a <= g.x && g.x <= g.s) {
        return Err(CliError::Config(format!(
            "need a <= x <= S, got x = {}",
            g.x
        )));
    }
    let process = Process::from_geometry(g)?;
    let spec = process.spec();
    let bc = bvp_config(cfg);
    let mut w = ReportWriter::new(out, "direct")?;
    let at_barrier = g.x == g.s;

    // transform
    let mut engines = serde_json::Map::new();
    let bm = match &process {
        Process::Bm(bm) => Some(*bm),
        _ => None,
    };
    let mut table = if bm.is_some() {
        Table::new(&["theta", "fhat_analytic", "fhat_bvp"])
    } else {
        Table::new(&["theta", "fhat_bvp"])
    };
    for &th in &n.theta_grid {
        let via_bvp = laplace_via_bvp_below_with(&spec, g.s, th, g.x, &bc)?;
        match &bm {
            Some(bm) => table.push_reals(&[th, laplace_fpt_below(bm, g.x, g.s, th)?, via_bvp]),
            None => table.push_reals(&[th, via_bvp]),
        }
    }
    engines.insert("fhat_analytic".into(), json!(bm.map(|_| "closed form")));
    engines.insert("fhat_bvp".into(), json!("finite differences"));
    w.csv("transform.csv", &table, cfg)?;

    // moments on a grid of starting points
    let xs = grid(g.a, g.s, n.x_points);
    let mut mt = Table::new(&["x", "T1", "T2", "variance"]);
    let (t1, t2) = match &bm {
        Some(bm) => {
            for &x in &xs {
                let m1 = mean_fpt(bm, x, g.s)?;
                let m2 = second_moment_fpt(bm, x, g.s)?;
                mt.push_reals(&[x, m1, m2, (m2 - m1 * m1).max(0.0)]);
            }
            engines.insert("moments".into(), json!("closed form"));
            (mean_fpt(bm, g.x, g.s)?, second_moment_fpt(bm, g.x, g.s)?)
        }
        None => {
            let sols = moment_solutions(&spec, g.s, 2, true, &bc)?;
            for &x in &xs {
                let (m1, m2) = (sols[0].value_at(x), sols[1].value_at(x));
                mt.push_reals(&[x, m1, m2, (m2 - m1 * m1).max(0.0)]);
            }
            engines.insert("moments".into(), json!("finite differences"));
            (sols[0].value_at(g.x), sols[1].value_at(g.x))
        }
    };
    w.csv("moments.csv", &mt, cfg)?;

    // density of the hitting time
    let t_max = n.t_max.unwrap_or(if t1 > 0.0 { 4.0 * t1 } else { 1.0 });
    let mut dt = Table::new(&["t", "density"]);
    let density_engine = match &bm {
        _ if at_barrier => "point mass at 0",
        Some(bm) if bm.mu == 0.0 => "eigenfunction series",
        Some(_) => "Talbot inversion of the closed form",
        None => "Stehfest inversion of the finite-difference transform",
    };
    let inverse: Option<(TransformFn, InversionConfig)> = match &bm {
        _ if at_barrier => None,
        Some(bm) if bm.mu == 0.0 => None,
        Some(bm) => {
            let (bm, x, s) = (*bm, g.x, g.s);
            Some((
                TransformFn::analytic(move |z| laplace_below_complex(&bm, x, s, z)),
                InversionConfig::talbot(rfpt_core::laplace::DEFAULT_TALBOT_NODES),
            ))
        }
        None => {
            let (sp, x, s) = (spec.clone(), g.x, g.s);
            Some((
                TransformFn::real(
                    move |th| laplace_via_bvp_below_with(&sp, s, th, x, &bc).unwrap_or(f64::NAN),
                    0.0,
                ),
                InversionConfig::stehfest(BVP_STEHFEST_ORDER),
            ))
        }
    };
    for i in 1..=n.t_points {
        let t = t_max * i as f64 / n.t_points as f64;
        let v = if at_barrier {
            0.0
        } else if let Some((f, ic)) = &inverse {
            invert(f, t, ic)?
        } else {
            spectral_density(g.x - g.a, g.s - g.a, t)?.value
        };
        dt.push_reals(&[t, v]);
    }
    engines.insert("density".into(), json!(density_engine));
    w.csv("density.csv", &dt, cfg)?;

    let variance = (t2 - t1 * t1).max(0.0);
    let mut summary = json!({
        "process": process.name(),
        "x": g.x,
        "mean": num(t1),
        "second_moment": num(t2),
        "variance": num(variance),
        "engines": Value::Object(engines),
    });
    let mut passed = true;
    if n.mc_check {
        let problem = FptProblem::new(spec.clone(), InitialLaw::Point(g.x), g.s)?;
        let set = par_sample(&problem, &sim_config(cfg, t1)?, "direct cross-check")?;
        let (m, se) = set.mean_with_se();
        let agree = at_barrier && m == 0.0 || (m - t1).abs() <= 3.0 * se;
        passed &= agree;
        summary["monte_carlo"] = json!({
            "n_paths": set.n_paths(),
            "censored": set.censored_count(),
            "mean": num(m),
            "standard_error": num(se),
            "within_3_se": agree,
        });
        w.csv("samples.csv", &sample_table(&set), cfg)?;
    }
    w.json("summary.json", summary.clone(), cfg)?;
    Ok(Outcome {
        files: w.written,
        summary,
        passed,
    })
}

fn recovery_config(cfg: &ExperimentConfig) -> RecoveryConfig {
    RecoveryConfig {
        harmonics: cfg.numerics.harmonics,
        ..RecoveryConfig::default()
    }
}

fn compat_json(c: &CompatReport) -> Value {
    json!({
        "mean_tau": num(c.mean_tau),
        "mean_eta": num(c.mean_eta),
        "second_moment_eta": num(c.second_moment_eta),
        "exp_moment_eta": num(c.exp_moment_eta),
        "mean_nonnegative": c.mean_nonnegative,
        "drift_upper_bound": c.drift_upper_bound,
        "drift_lower_bound": c.drift_lower_bound,
        "driftless_condition": c.driftless_condition,
        "indeterminate": c.indeterminate,
        "all_hold": c.all_hold(),
    })
}

/// Diagnostics of a solution as JSON.
pub fn diagnostics_json(sol: &IfptSolution) -> Value {
    let d = &sol.diagnostics;
    let (verdict, reasons) = match &d.verdict {
        Verdict::Valid => ("valid", Vec::new()),
        Verdict::NoSolution(rs) => (
            "no_solution",
            rs.iter()
                .map(|r| json!({"code": r.code(), "message": r.to_string()}))
                .collect(),
        ),
    };
    json!({
        "verdict": verdict,
        "reasons": reasons,
        "mass_error": num(d.mass_error),
        "min_density": num(d.min_density),
        "symmetry_residual": num(d.symmetry_residual),
        "transform_residual": num(d.transform_residual),
        "moments_of_start": d.moment_table.iter().map(|(k, v)| json!({"order": k, "value": num(*v)})).collect::<Vec<_>>(),
        "compatibility": compat_json(&d.compatibility),
    })
}

fn write_solution<F>(
    w: &mut ReportWriter,
    cfg: &ExperimentConfig,
    sol: &IfptSolution,
    target: &ResolvedTarget,
    forward: F,
) -> Result<Value, CliError>
where
    F: Fn(f64) -> f64,
{
    let mut gt = Table::new(&["theta", "ghat", "fhat_target", "fhat_forward"]);
    let mut round_trip = 0.0f64;
    for &th in &cfg.numerics.theta_grid {
        let f = target.fhat.eval(th);
        let back = forward(th);
        round_trip = round_trip.max((back - f).abs());
        gt.push_reals(&[th, sol.ghat.eval(th), f, back]);
    }
    w.csv("ghat.csv", &gt, cfg)?;

    let mut dt = match target.exact_density {
        Some(_) => Table::new(&["x", "density", "exact"]),
        None => Table::new(&["x", "density"]),
    };
    let mut max_err = 0.0f64;
    let last = sol.grid.len().saturating_sub(1);
    for (i, (&x, &v)) in sol.grid.iter().zip(&sol.values).enumerate() {
        match &target.exact_density {
            Some(e) => {
                let ev = e.eval(x);
                if i > 0 && i < last {
                    max_err = max_err.max((v - ev).abs());
                }
                dt.push_reals(&[x, v, ev]);
            }
            None => dt.push_reals(&[x, v]),
        }
    }
    w.csv("density.csv", &dt, cfg)?;
    let mut diag = diagnostics_json(sol);
    diag["target"] = json!(target.label);
    diag["round_trip_error"] = num(round_trip);
    if target.exact_density.is_some() {
        diag["max_interior_error"] = num(max_err);
    }
    w.json("diagnostics.json", diag.clone(), cfg)?;
    Ok(diag)
}

fn driftless_bm(
    cfg: &ExperimentConfig,
) -> Result<rfpt_core::analytic_bm::ReflectedBmSpec, CliError> {
    match Process::from_geometry(&cfg.geometry)? {
        Process::Bm(bm) if bm.mu == 0.0 => Ok(bm),
        _ => Err(CliError::Config(
            "the inverse problem is solved for driftless Brownian motion (process = \"bm\", mu = 0)".into(),
        )),
    }
}

/// Solves for the symmetric starting law that produces the target.
pub fn cmd_ifpt(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let bm = driftless_bm(cfg)?;
    let s = cfg.geometry.s;
    let target = resolve_target(cfg.target.as_ref().expect("validated"), bm.a, s)?;
    if target.lambda.is_some() {
        return Err(CliError::Config(
            "catastrophe targets belong to the `jump` command".into(),
        ));
    }
    let problem = IfptProblem::new(bm, s, target.fhat.clone(), Direction::FromBelow)?;
    let sol = solve_symmetric_with(&problem, &recovery_config(cfg))?;
    let mut w = ReportWriter::new(out, "ifpt")?;
    let ghat = sol.ghat.clone();
    let summary = write_solution(&mut w, cfg, &sol, &target, |th| {
        forward_fhat(&ghat, &bm, s, th).unwrap_or(f64::NAN)
    })?;
    Ok(Outcome {
        files: w.written,
        summary,
        passed: true,
    })
}

/// The inverse problem with catastrophes.
pub fn cmd_jump(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let bm = driftless_bm(cfg)?;
    if bm.a != 0.0 {
        return Err(CliError::Config(
            "the catastrophe problem is set on [0, S]".into(),
        ));
    }
    let s = cfg.geometry.s;
    let target = resolve_target(cfg.target.as_ref().expect("validated"), 0.0, s)?;
    let lambda = target.lambda.ok_or_else(|| {
        CliError::Config("the jump command needs a catastrophe target (example5)".into())
    })?;
    let sol = jump_solve_symmetric_with(&target.fhat, lambda, s, &recovery_config(cfg))?;
    let mut w = ReportWriter::new(out, "jump")?;
    let ghat = sol.ghat.clone();
    let mut summary = write_solution(&mut w, cfg, &sol, &target, |th| {
        jump_forward(&ghat, lambda, s, th).unwrap_or(f64::NAN)
    })?;
    summary["lambda"] = json!(lambda);
    Ok(Outcome {
        files: w.written,
        summary,
        passed: true,
    })
}

/// `∫ f` over `[lo, hi]` after `x = end ± (mid − end)u²` on both halves,
/// which removes inverse square-root singularities at the ends.
pub fn integrate_endpoint_singular<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, CliError> {
    let mid = 0.5 * (lo + hi);
    let h = mid - lo;
    let left = integrate(|u| f(lo + h * u * u) * 2.0 * h * u, 0.0, 1.0, tol)?;
    let right = integrate(|u| f(hi - h * u * u) * 2.0 * h * u, 0.0, 1.0, tol)?;
    Ok(left.value + right.value)
}

pub(crate) fn conjugated_parts(
    cfg: &ExperimentConfig,
) -> Result<(ConjugationMap, DiffusionSpec), CliError> {
    match Process::from_geometry(&cfg.geometry)? {
        Process::Conjugated { map, spec } => Ok((map, spec)),
        _ => Err(CliError::Config(
            "conjugated problems need a catalog process".into(),
        )),
    }
}

/// Closed-form conjugated uniform density `V′(x)/(V(S) − V(a))` and its mass.
pub(crate) fn conjugated_uniform_mass(
    map: &ConjugationMap,
    a: f64,
    s: f64,
) -> Result<f64, CliError> {
    let (va, vs) = (map.v(a)?, map.v(s)?);
    integrate_endpoint_singular(
        |x| map.vprime(x).unwrap_or(f64::NAN) / (vs - va),
        a,
        s,
        1e-13,
    )
}

/// Solves in `V` coordinates and maps the starting law back.
pub fn cmd_conjugated(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let g = &cfg.geometry;
    let (map, spec) = conjugated_parts(cfg)?;
    let (va, vs) = (map.v(g.a)?, map.v(g.s)?);
    let target = resolve_target(cfg.target.as_ref().expect("validated"), va, vs)?;
    let sol = solve_conjugated_symmetric(&map, g.a, g.s, &target.fhat)?;
    let mut w = ReportWriter::new(out, "conjugated")?;

    let exact = target.exact_density.clone().map(|e| {
        let m = map.clone();
        move |x: f64| e.eval(m.v(x).unwrap_or(f64::NAN)) * m.vprime(x).unwrap_or(f64::NAN)
    });
    let mut dt = match exact {
        Some(_) => Table::new(&["x", "y", "density", "exact"]),
        None => Table::new(&["x", "y", "density"]),
    };
    let mut max_rel = 0.0f64;
    let last = sol.grid.len() - 1;
    for (i, (&x, &v)) in sol.grid.iter().zip(&sol.values).enumerate() {
        let y = map.v(x)?;
        match &exact {
            Some(e) => {
                let ev = e(x);
                if i > 0 && i < last {
                    max_rel = max_rel.max(((v - ev) / ev).abs());
                }
                dt.push(vec![
                    Cell::Real(x),
                    Cell::Real(y),
                    Cell::Real(v),
                    Cell::Real(ev),
                ]);
            }
            None => dt.push(vec![Cell::Real(x), Cell::Real(y), Cell::Real(v)]),
        }
    }
    w.csv("density.csv", &dt, cfg)?;

    let lo = g.a + 0.01 * (g.s - g.a);
    let res = verify_conjugation(&map, &spec, lo, g.s)?;
    let mut summary = json!({
        "process": map.name(),
        "image_interval": [va, vs],
        "transformed": diagnostics_json(&sol.transformed),
        "conjugation_residuals": {"drift": num(res.drift), "vprime": num(res.vprime)},
    });
    if exact.is_some() {
        summary["max_interior_relative_error"] = num(max_rel);
    }
    if target.exact_density.is_some() && target.label == "example1" {
        summary["uniform_image_mass"] = num(conjugated_uniform_mass(&map, g.a, g.s)?);
    }
    let mut passed = true;
    if cfg.numerics.mc_check {
        let r = crate::verify::conjugation_ks(cfg, &map, &spec)?;
        passed &= r.0 <= crate::verify::KS_TOLERANCE;
        summary["monte_carlo_ks"] = num(r.0);
        w.csv("samples.csv", &sample_table(&r.1), cfg)?;
    }
    w.json("summary.json", summary.clone(), cfg)?;
    Ok(Outcome {
        files: w.written,
        summary,
        passed,
    })
}
