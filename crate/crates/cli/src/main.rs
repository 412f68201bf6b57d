//! `tunnelnav`: dataset generation, surrogate training, inverse solve, drop
//! planning and simulation for landmark-aided tunnel navigation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tunnelnav_cli::commands::{self, SimOptions, SolveMethod, Stagger};
use tunnelnav_cli::config::ScenarioConfig;
use tunnelnav_cli::error::CliError;

#[derive(Parser)]
#[command(name = "tunnelnav", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON.
    #[arg(long)]
    config: PathBuf,
    /// Directory holding the artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Milp,
    Exact,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum StaggerArg {
    None,
    Half,
    Angled,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum, default_value = "none")]
    stagger: StaggerArg,
    /// Wall-sensor rate in Hz, or `off`. Defaults to the config.
    #[arg(long, value_parser = parse_wall_rate)]
    wall_updates: Option<WallRate>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy)]
struct WallRate(Option<f64>);

fn parse_wall_rate(s: &str) -> Result<WallRate, String> {
    if s == "off" {
        return Ok(WallRate(None));
    }
    match s.parse::<f64>() {
        Ok(r) if r > 0.0 && r.is_finite() => Ok(WallRate(Some(r))),
        _ => Err(format!("expected `off` or a positive rate in Hz, got `{s}`")),
    }
}

impl SimArgs {
    fn options(&self) -> SimOptions {
        SimOptions {
            stagger: match self.stagger {
                StaggerArg::None => Stagger::None,
                StaggerArg::Half => Stagger::Half,
                StaggerArg::Angled => Stagger::Angled,
            },
            wall_updates: self.wall_updates.map(|w| w.0),
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate straight-tunnel missions over the input domains.
    GenData {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the uncertainty surrogate to the dataset.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Find the overlap factor and drop distance meeting the uncertainty target.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "milp")]
        method: MethodArg,
    },
    /// Build the drop schedule for the configured information level.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Use this drop distance instead of the one in solve.json.
        #[arg(long)]
        d_star: Option<f64>,
    },
    /// Run one mission and write its trace.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run a batch of missions and write aggregate statistics.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 50)]
        runs: usize,
    },
}

fn load(common: &Common) -> Result<(ScenarioConfig, &Path), CliError> {
    Ok((ScenarioConfig::load(&common.config)?, common.out.as_path()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenData { common, n, seed } => {
            let (cfg, out) = load(&common)?;
            let path = commands::gen_data(&cfg, n, seed, out)?;
            println!("wrote {n} samples to {}", path.display());
        }
        Command::Train { common } => {
            let (cfg, out) = load(&common)?;
            let (path, nrmse) = commands::cmd_train(&cfg, out)?;
            println!("wrote {} (test nrmse {nrmse:.4})", path.display());
        }
        Command::Solve { common, method } => {
            let (cfg, out) = load(&common)?;
            let method = match method {
                MethodArg::Milp => SolveMethod::Milp,
                MethodArg::Exact => SolveMethod::Exact,
                MethodArg::Grid => SolveMethod::Grid,
            };
            let s = commands::cmd_solve(&cfg, method, out)?;
            println!(
                "lambda* = {:.4}, d* = {:.2} m, predicted p_max = {:.4} m ({} nodes)",
                s.lambda_star, s.d_star, s.p_max_pred, s.nodes
            );
        }
        Command::Plan { common, d_star } => {
            let (cfg, out) = load(&common)?;
            let f = commands::cmd_plan(&cfg, d_star, out)?;
            let c = f.counts;
            println!(
                "{} events, counts straight {} turns {} full {} additional {}",
                f.events.len(),
                c.straight,
                c.turns,
                c.full,
                c.additional
            );
        }
        Command::Simulate { common, sim } => {
            let (cfg, out) = load(&common)?;
            let tr = commands::cmd_simulate(&cfg, &sim.options(), out)?;
            println!(
                "p_max {:.4} m, terminal error {:.3} m, min visible {}",
                tr.p_max(),
                tr.terminal.position,
                tr.min_visible
            );
        }
        Command::Montecarlo { common, sim, runs } => {
            let (cfg, out) = load(&common)?;
            let agg = commands::cmd_montecarlo(&cfg, &sim.options(), runs, out)?;
            println!(
                "{} runs, median p_max {:.4} m, median |x error| {:.3} m",
                agg.runs, agg.p_max.median, agg.terminal_error.x.median
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
