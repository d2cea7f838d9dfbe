use proptest::prelude::*;

use rfpt_core::analytic_bm::{laplace_fpt_below, mean_fpt, ReflectedBmSpec};
use rfpt_core::bvp::DiffusionSpec;
use rfpt_core::conjugation::catalog;
use rfpt_core::ifpt::{forward_fhat, symmetric_ghat};
use rfpt_core::montecarlo::{ks_from_times, simulate_reflected_path, SimConfig};
use rfpt_core::presets::{example1_fhat, example4_fhat};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_is_a_probability_transform(
        mu in -3.0f64..3.0,
        u in 0.0f64..1.0,
        th in 0.0f64..20.0,
    ) {
        let bm = ReflectedBmSpec::new(mu, 0.0, 2.0).unwrap();
        let v = laplace_fpt_below(&bm, u, 1.0, th).unwrap();
        prop_assert!(v > 0.0 && v <= 1.0 + 1e-15);
        // closer starts and smaller θ give larger values
        let closer = laplace_fpt_below(&bm, u + 0.5 * (1.0 - u), 1.0, th).unwrap();
        prop_assert!(closer >= v - 1e-14);
        let slower = laplace_fpt_below(&bm, u, 1.0, th + 0.5).unwrap();
        prop_assert!(slower <= v + 1e-14);
    }

    #[test]
    fn translation_invariance(mu in -2.0f64..2.0, shift in -5.0f64..5.0, u in 0.0f64..1.0) {
        let base = ReflectedBmSpec::new(mu, 0.0, 2.0).unwrap();
        let moved = ReflectedBmSpec::new(mu, shift, shift + 2.0).unwrap();
        let a = laplace_fpt_below(&base, u, 1.0, 0.7).unwrap();
        let b = laplace_fpt_below(&moved, u + shift, 1.0 + shift, 0.7).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let ma = mean_fpt(&base, u, 1.0).unwrap();
        let mb = mean_fpt(&moved, u + shift, 1.0 + shift).unwrap();
        prop_assert!((ma - mb).abs() < 1e-10 * (1.0 + ma));
    }

    #[test]
    fn symmetric_solutions_round_trip(th in 0.0f64..30.0, beta in any::<bool>()) {
        let fhat = if beta { example4_fhat() } else { example1_fhat(0.0, 1.0) };
        let bm = ReflectedBmSpec::new(0.0, 0.0, 1.0).unwrap();
        let ghat = symmetric_ghat(0.0, 1.0, &fhat).unwrap();
        let back = forward_fhat(&ghat, &bm, 1.0, th).unwrap();
        prop_assert!((back - fhat.eval(th)).abs() < 1e-12);
    }

    #[test]
    fn paths_stay_in_the_interval(mu in -20.0f64..20.0, sigma in 0.0f64..5.0, seed in any::<u64>(), x0 in 0.0f64..1.0) {
        let spec = DiffusionSpec::new(move |_| mu, move |_| sigma, -0.5, 0.5).unwrap();
        let cfg = SimConfig::new(0.01, 5.0, 1, seed).unwrap();
        let p = simulate_reflected_path(&spec, x0 - 0.5, &cfg).unwrap();
        prop_assert!(p.states.iter().all(|&x| (-0.5..=0.5).contains(&x)));
    }

    #[test]
    fn conjugation_maps_invert(x in 0.001f64..0.999) {
        for name in ["cubic_power", "quartic_power(2)", "cir_feller", "wright_fisher", "gbm(0.1,0.4)"] {
            let m = catalog(name).unwrap();
            let y = m.v(x).unwrap();
            prop_assert!((m.vinv(y).unwrap() - x).abs() < 1e-12);
            prop_assert!(m.vprime(x).unwrap() > 0.0);
        }
    }

    #[test]
    fn ks_distance_is_bounded(xs in prop::collection::vec(-1.0f64..2.0, 1..200), extra in 0usize..10) {
        let n = xs.len() + extra;
        let d = ks_from_times(&xs, n, |t| t.clamp(0.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
