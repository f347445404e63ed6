use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use distrl::baselines::BaseCaseResult;
use distrl::runner::{self, RunConfig, RunError};

/// Train and evaluate a soft actor-critic agent that synthesizes
/// distillation sequences.
#[derive(Parser)]
#[command(name = "distrl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file (.toml or .json) or preset name (standard, best_average).
    #[arg(long, default_value = "standard")]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long)]
    updates_per_episode: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, RunError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.episodes {
            cfg.episodes = n;
        }
        if let Some(n) = self.updates_per_episode {
            cfg.updates_per_episode = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent, writing metrics, step logs and checkpoints.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "runs/train")]
        out: PathBuf,
        /// Resume from this checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run the deterministic policy of a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tune and cost the linear and tree reference sequences.
    BaseCase {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniform random actions, logged like training (500 episodes unless given).
    RandomAgent {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "runs/random")]
        out: PathBuf,
    },
    /// Aggregate a run directory into statistics and plot data.
    Report {
        /// Run directory written by train or random-agent.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the resolved configuration as TOML.
    ShowConfig {
        #[command(flatten)]
        common: Common,
    },
}

fn print_base_case(r: &BaseCaseResult) {
    println!("{} sequence", r.topology.as_str());
    println!("  col  LK/HK                 N   NF  P/bar     RR      BR     D/F      TAC");
    for c in &r.columns {
        println!(
            "  {:>3}  {:<20} {:>3} {:>4} {:>6.2} {:>7.3} {:>7.3} {:>7.3} {:>8.2}",
            c.index,
            format!("{}/{}", c.light_key, c.heavy_key),
            c.spec.n_stages,
            c.spec.feed_stage,
            c.spec.condenser_pressure,
            c.spec.reflux_ratio,
            c.spec.boilup_ratio,
            c.distillate_fraction,
            c.evaluation.tac(),
        );
    }
    println!(
        "  revenue {:.1}  TAC {:.2}  penalty {:.1}  profit {:.1} M EUR/yr  ({} products on spec)",
        r.revenue, r.tac, r.penalty, r.profit, r.products_on_spec
    );
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Train {
            common,
            out,
            checkpoint,
        } => {
            let cfg = common.resolve()?;
            let s = runner::cmd_train(&cfg, &out, checkpoint.as_deref())?;
            println!(
                "{} episodes in {:.1} s, final moving average {:.1}, mean return {:.1}",
                s.episodes, s.wall_clock_seconds, s.final_moving_average, s.mean_return
            );
            println!("artifacts in {}", out.display());
        }
        Command::Eval {
            checkpoint,
            episodes,
            out,
        } => {
            let r = runner::cmd_eval(&checkpoint, episodes, out.as_deref())?;
            println!("checkpoint episode {}", r.checkpoint_episode);
            println!("  step  feed kmol/h  N   NF  P/bar     RR      BR   status                 TAC  penalty");
            for c in &r.columns {
                if c.separate {
                    println!(
                        "  {:>4} {:>12.1} {:>3} {:>4} {:>6.2} {:>7.3} {:>7.3}  {:<22} {:>6.2} {:>7.1}",
                        c.step,
                        c.feed_flow,
                        c.n_stages,
                        c.feed_stage,
                        c.pressure,
                        c.reflux_ratio,
                        c.boilup_ratio,
                        c.status,
                        c.tac,
                        c.penalty
                    );
                } else {
                    println!("  {:>4} {:>12.1}  no separation", c.step, c.feed_flow);
                }
            }
            println!(
                "  revenue {:.1}  TAC {:.2}  penalty {:.1}  profit {:.1} M EUR/yr",
                r.revenue, r.tac, r.penalty, r.profit
            );
        }
        Command::BaseCase { common, out } => {
            let cfg = common.resolve()?;
            for r in runner::cmd_base_case(&cfg, out.as_deref())? {
                print_base_case(&r);
            }
        }
        Command::RandomAgent { common, out } => {
            let mut cfg = common.resolve()?;
            if common.episodes.is_none() {
                cfg.episodes = 500;
            }
            let s = runner::cmd_random_agent(&cfg, &out)?;
            println!(
                "{} random episodes, mean return {:.1}",
                s.episodes, s.mean_return
            );
        }
        Command::Report { out } => {
            let stats = runner::cmd_report(&out)?;
            print!("{}", stats.to_markdown());
            println!("data files in {}", out.join("report").display());
        }
        Command::ShowConfig { common } => {
            print!("{}", common.resolve()?.to_toml_string());
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
