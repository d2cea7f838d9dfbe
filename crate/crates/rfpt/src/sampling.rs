//! Parallel Monte Carlo on top of the core sampler.

use rayon::prelude::*;
use rfpt_core::montecarlo::{FptProblem, FptSampleSet, PathOutcome, SimConfig};

use crate::report::{Cell, Table};
use crate::CliError;

/// Runs every path of `cfg` on the rayon pool. Paths carry their own random
/// streams and results are collected in path order, so the sample set equals
/// the serial one.
pub fn par_sample(
    problem: &FptProblem,
    cfg: &SimConfig,
    description: &str,
) -> Result<FptSampleSet, CliError> {
    cfg.validate()?;
    let outcomes = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| problem.run_path(cfg, i))
        .collect::<Result<Vec<_>, _>>()?;
    let set = FptSampleSet {
        outcomes,
        config: *cfg,
        description: description.into(),
    };
    if set.excessive_censoring() {
        eprintln!(
            "warning: {} of {} paths censored at horizon {} ({description})",
            set.censored_count(),
            set.n_paths(),
            cfg.horizon
        );
    }
    Ok(set)
}

/// `path_index, fpt, censored` rows; censored paths get the horizon.
pub fn sample_table(set: &FptSampleSet) -> Table {
    let mut t = Table::new(&["path_index", "fpt", "censored"]);
    for (i, o) in set.outcomes.iter().enumerate() {
        let (v, c) = match o {
            PathOutcome::Hit(t) => (*t, false),
            PathOutcome::Censored => (set.config.horizon, true),
        };
        t.push(vec![Cell::Int(i as u64), Cell::Real(v), Cell::Flag(c)]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rfpt_core::analytic_bm::ReflectedBmSpec;
    use rfpt_core::bvp::DiffusionSpec;
    use rfpt_core::montecarlo::{sample_fpt_serial, InitialLaw};

    #[test]
    fn parallel_equals_serial() {
        let spec = DiffusionSpec::from_bm(&ReflectedBmSpec::new(0.3, 0.0, 2.0).unwrap());
        let p = FptProblem::new(spec, InitialLaw::Uniform { lo: 0.0, hi: 1.0 }, 1.0).unwrap();
        let cfg = SimConfig::new(1e-3, 30.0, 64, 5).unwrap();
        let a = par_sample(&p, &cfg, "x").unwrap();
        let b = sample_fpt_serial(&p, &cfg, "x").unwrap();
        assert_eq!(a, b);
        assert_eq!(sample_table(&a).rows.len(), 64);
    }
}
