use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use rfpt::config::{DIRECT_PRESETS, IFPT_PRESETS, VERIFY_PRESETS};
use rfpt::{preset, run, ExperimentConfig, Kind, Overrides};

#[derive(Parser)]
#[command(
    name = "rfpt",
    version,
    about = "First-passage experiments for reflected diffusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform, density and moments of the hitting time.
    Direct(Common),
    /// Recover the starting law from a target hitting-time law.
    Ifpt(Common),
    /// The inverse problem with catastrophes.
    Jump(Common),
    /// The inverse problem for a conjugated diffusion.
    Conjugated(Common),
    /// Run a verification matrix; exits nonzero if any check fails.
    Verify(Common),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, env = "RFPT_OUT_DIR", default_value = "rfpt-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
}

fn execute(kind: Kind, args: Common) -> anyhow::Result<bool> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(kind, name)?,
        (None, None) => bail!("give --config <file> or --preset <name>"),
    };
    if cfg.kind != kind {
        bail!(
            "config kind `{}` does not match the `{}` command",
            cfg.kind.as_str(),
            kind.as_str()
        );
    }
    cfg.apply(&Overrides {
        seed: args.seed,
        paths: args.paths,
        dt: args.dt,
    })?;
    let outcome = run(&cfg, &args.out).with_context(|| format!("{} failed", kind.as_str()))?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = match cli.command {
        Command::Presets => {
            println!("direct:      {}", DIRECT_PRESETS.join(", "));
            println!("ifpt:        {}", IFPT_PRESETS.join(", "));
            println!("jump:        example5");
            println!("conjugated:  cir_conjugation, wright_fisher_conjugation");
            println!("verify:      {}", VERIFY_PRESETS.join(", "));
            return ExitCode::SUCCESS;
        }
        Command::Direct(a) => (Kind::Direct, a),
        Command::Ifpt(a) => (Kind::Ifpt, a),
        Command::Jump(a) => (Kind::IfptJump, a),
        Command::Conjugated(a) => (Kind::Conjugated, a),
        Command::Verify(a) => (Kind::MontecarloVerify, a),
    };
    match execute(kind.0, kind.1) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
