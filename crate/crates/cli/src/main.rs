//! `fracdo`: run operator checks and Dirichlet experiments from a JSON
//! config and write a report tree.
//!
//! Exit status: 0 when every verdict passes, 1 on a failed verdict or a
//! numerical breakdown, 2 on a configuration error.

mod commands;
mod config;
mod list;
mod output;

use clap::{Args, Parser, Subcommand};
use fracdo::quantize::{DEFAULT_MAX_FLOPS, MAX_FLOPS_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracdo", version, about = "Fractional-order operator checks and Dirichlet solves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set grid.N=2048`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory for manifest.json, reports/ and data/.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// μ-transmission conditions of a symbol at boundary samples.
    CheckTransmission(RunArgs),
    /// Even or odd parity of the homogeneous terms.
    CheckParity(RunArgs),
    /// Reduce an (x,y)-form amplitude to x-form plus remainder.
    ReduceXform(RunArgs),
    /// Transform a symbol under a boundary-flattening map.
    TransformSymbol(RunArgs),
    /// Normalised boundary norms under rescaling.
    ScalingStudy(RunArgs),
    /// Order-reducing operators: identities and support leakage.
    OrderReduceDemo(RunArgs),
    /// Solve the homogeneous Dirichlet problem.
    SolveDirichlet(RunArgs),
    /// Boundary exponent, weighted trace and Hölder diagnostics of a solution.
    VerifyRegularity(RunArgs),
    /// Compare boundary behaviour across symbols and refinements.
    Universality(RunArgs),
    /// Print the symbol registry, domains and config schema.
    List {
        /// Emit a JSON schema document.
        #[arg(long)]
        json: bool,
    },
}

/// Anything that stops a run before all verdicts are in.
pub enum CmdError {
    Config(config::ConfigError),
    Core(fracdo::Error),
}

impl From<config::ConfigError> for CmdError {
    fn from(e: config::ConfigError) -> Self {
        CmdError::Config(e)
    }
}

impl From<fracdo::Error> for CmdError {
    fn from(e: fracdo::Error) -> Self {
        CmdError::Core(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Core(e.into())
    }
}

/// Errors that mean the experiment as configured cannot run are exit 2;
/// numerical breakdowns count as failed verdicts.
fn core_exit(e: &fracdo::Error) -> u8 {
    use fracdo::Error::*;
    match e {
        NearKernel { .. } | Singularity(_) | Regime(_) | Geometry(_) => 1,
        Capability(_) | Argument(_) | GridMismatch(_) | Budget { .. } | Hypothesis(_) | Format(_) | Io(_) => 2,
    }
}

fn max_flops() -> Result<f64, config::ConfigError> {
    match std::env::var(MAX_FLOPS_ENV) {
        Err(_) => Ok(DEFAULT_MAX_FLOPS),
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
            _ => Err(config::ConfigError(format!("{MAX_FLOPS_ENV}={v}: expected a positive number"))),
        },
    }
}

type Runner = fn(&mut commands::Ctx) -> Result<(), CmdError>;

fn run(name: &str, args: &RunArgs, runner: Runner) -> u8 {
    let fail = |e: CmdError| match e {
        CmdError::Config(e) => {
            eprintln!("fracdo {name}: config error: {e}");
            2
        }
        CmdError::Core(e) => {
            eprintln!("fracdo {name}: {e}");
            core_exit(&e)
        }
    };
    let setup = || -> Result<(config::Config, f64), CmdError> {
        let cfg = config::load(&args.config, &args.set)?;
        if let Some(c) = &cfg.command {
            if c != name {
                return Err(config::ConfigError(format!("command: config is for `{c}`, invoked as `{name}`")).into());
            }
        }
        Ok((cfg, max_flops()?))
    };
    let (cfg, flops) = match setup() {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let mut out = match output::Output::create(&args.out) {
        Ok(o) => o,
        Err(e) => return fail(CmdError::Core(e.into())),
    };
    let start = std::time::Instant::now();
    let mut cx = commands::Ctx {
        cfg: &cfg,
        out: &mut out,
        max_flops: flops,
        command: name,
    };
    if let Err(e) = runner(&mut cx) {
        return fail(e);
    }
    let resolved = serde_json::to_value(&cfg).expect("config serializes");
    match out.finish(name, &resolved, flops) {
        Ok(passed) => {
            eprintln!(
                "fracdo {name}: {} in {:.2} s, results in {}",
                if passed { "PASS" } else { "FAIL" },
                start.elapsed().as_secs_f64(),
                args.out.display()
            );
            u8::from(!passed)
        }
        Err(e) => fail(CmdError::Core(e.into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::CheckTransmission(a) => run("check-transmission", a, commands::check_transmission),
        Command::CheckParity(a) => run("check-parity", a, commands::check_parity_cmd),
        Command::ReduceXform(a) => run("reduce-xform", a, commands::reduce_xform),
        Command::TransformSymbol(a) => run("transform-symbol", a, commands::transform_symbol_cmd),
        Command::ScalingStudy(a) => run("scaling-study", a, commands::scaling_study),
        Command::OrderReduceDemo(a) => run("order-reduce-demo", a, commands::order_reduce_demo),
        Command::SolveDirichlet(a) => run("solve-dirichlet", a, commands::solve_dirichlet),
        Command::VerifyRegularity(a) => run("verify-regularity", a, commands::verify_regularity),
        Command::Universality(a) => run("universality", a, commands::universality),
        Command::List { json } => {
            print!("{}", if *json { list::json() } else { list::text() });
            0
        }
    };
    ExitCode::from(code)
}
