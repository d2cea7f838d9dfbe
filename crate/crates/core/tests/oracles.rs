//! Cross-checks between independent engines: closed forms, the ODE solver
//! and Monte Carlo.

use rfpt_core::analytic_bm::{fpt_moment_pair, laplace_fpt_below, ReflectedBmSpec};
use rfpt_core::bvp::{laplace_via_bvp_below, moments_via_bvp, DiffusionSpec};
use rfpt_core::conjugation::catalog;
use rfpt_core::laplace::{invert, InversionConfig};
use rfpt_core::montecarlo::{ks_statistic, sample_fpt, InitialLaw, SimConfig};
use rfpt_core::presets::{example1_cdf, example1_fhat};
use rfpt_core::TransformFn;

#[test]
fn drifted_mean_against_monte_carlo() {
    let bm = ReflectedBmSpec::new(1.0, 0.0, 2.0).unwrap();
    let (mean, _) = fpt_moment_pair(&bm, 0.0, 1.0).unwrap();
    assert!((mean - ((-2.0f64).exp() - 1.0) / 2.0 - 1.0).abs() < 1e-14);
    let cfg = SimConfig::for_mean(1e-4, mean, 4000, 31).unwrap();
    let set = sample_fpt(
        &DiffusionSpec::from_bm(&bm),
        &InitialLaw::Point(0.0),
        1.0,
        &cfg,
    )
    .unwrap();
    let (m, se) = set.mean_with_se();
    assert!((m - mean).abs() < 3.0 * se, "{m} ± {se} vs {mean}");
}

#[test]
fn transform_against_monte_carlo() {
    let bm = ReflectedBmSpec::new(0.5, 0.0, 2.0).unwrap();
    let th = 0.8;
    let exact = laplace_fpt_below(&bm, 0.2, 1.0, th).unwrap();
    let bvp = laplace_via_bvp_below(&DiffusionSpec::from_bm(&bm), 1.0, th, 0.2).unwrap();
    assert!((exact - bvp).abs() < 1e-6);
    let cfg = SimConfig::for_mean(1e-4, 1.5, 4000, 32).unwrap();
    let set = sample_fpt(
        &DiffusionSpec::from_bm(&bm),
        &InitialLaw::Point(0.2),
        1.0,
        &cfg,
    )
    .unwrap();
    let vals: Vec<f64> = set.times().iter().map(|t| (-th * t).exp()).collect();
    let n = vals.len() as f64;
    let m = vals.iter().sum::<f64>() / n;
    let sd = (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((m - exact).abs() < 3.0 * sd / n.sqrt(), "{m} vs {exact}");
}

#[test]
fn second_moment_bvp_against_closed_form() {
    let bm = ReflectedBmSpec::new(1.0, 0.0, 2.0).unwrap();
    let spec = DiffusionSpec::from_bm(&bm);
    let (t1, var) = fpt_moment_pair(&bm, 0.0, 1.0).unwrap();
    let t2 = moments_via_bvp(&spec, 1.0, 2, 0.0, true).unwrap();
    assert!((t2 - (var + t1 * t1)).abs() < 1e-5);
}

#[test]
fn inverted_transform_matches_cdf() {
    // the CDF has transform f̂(θ)/θ
    let f = example1_fhat(0.0, 1.0);
    let cdf_hat = TransformFn::analytic(move |z| f.eval_complex(z).unwrap() / z);
    for &t in &[0.2, 0.6, 1.5] {
        let v = invert(&cdf_hat, t, &InversionConfig::talbot(32)).unwrap();
        assert!((v - example1_cdf(0.0, 1.0, t)).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn cir_hitting_time_matches_image_bm() {
    let map = catalog("cir_feller").unwrap();
    let spec = map.diffusion(0.0, 4.0).unwrap();
    let cfg = SimConfig::for_mean(1e-3, 3.0, 2000, 33).unwrap();
    let set = sample_fpt(&spec, &InitialLaw::Point(0.25), 1.0, &cfg).unwrap();
    let ks = ks_statistic(&set, |t| {
        rfpt_core::analytic_bm::fpt_cdf_driftless(0.0, 2.0, 1.0, t).unwrap()
    });
    assert!(ks < 0.04, "{ks}");
}
