use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entflow::FlowVariant;
use entflow_cli::commands::{self, CommandError, CommandResult};
use entflow_cli::{ExitStatus, Overrides, RunConfig};

/// Entropy flow of locally convex plane curves in support-function form.
#[derive(Parser)]
#[command(name = "entflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of grid nodes.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// unscaled, rescaled_chainrule or rescaled_paper.
    #[arg(long)]
    variant: Option<FlowVariant>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial curve and check the monitors.
    Simulate(Common),
    /// Evolve a rescaled variant and fit decay rates.
    Rescaled(Common),
    /// Residuals of the graph-parametrization formulas.
    Crosscheck {
        #[command(flatten)]
        common: Common,
        /// Number of random graph functions.
        #[arg(long, default_value_t = 10)]
        draws: usize,
    },
    /// Run an acceptance suite: circle, identities, monotone, rescaled, appendix, convergence or all.
    Verify {
        suite: String,
        /// Directory for a JSON copy of the results.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a gnuplot script over the diagnostics CSV of a run directory.
    Plot {
        /// Run output directory.
        dir: PathBuf,
    },
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CommandError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).map_err(CommandError::setup)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            output_dir: self.out.clone(),
            seed: self.seed,
            n: self.n,
            t_end: self.t_end,
            variant: self.variant,
        });
        Ok(cfg)
    }
}

fn dispatch(cmd: Command) -> CommandResult {
    match cmd {
        Command::Simulate(c) => commands::simulate(&c.resolve()?),
        Command::Rescaled(c) => commands::rescaled(&c.resolve()?),
        Command::Crosscheck { common, draws } => commands::crosscheck(&common.resolve()?, draws),
        Command::Verify { suite, out } => commands::verify(&suite, out.as_deref(), |o| println!("{}", o.report())),
        Command::Plot { dir } => commands::plot(&dir).map(|p| commands::Outcome {
            status: ExitStatus::Success,
            summary: format!("wrote {}", p.display()),
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.status.code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status.code())
        }
    }
}
