//! `telepathy`: every experiment as a seeded subcommand.
//!
//! Exit codes: 0 when every check of the experiment holds, 1 when a check
//! fails or the experiment errors, 2 for usage errors.

mod experiments;
mod games;
mod network;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use telepathy_core::games::chsh::ChshMode;
use telepathy_core::games::Role;

use crate::report::{ExperimentReport, SCHEMA_VERSION};

#[derive(Parser, Debug)]
#[command(name = "telepathy", version, about = "Single-query quantum algorithms and pseudo-telepathy games")]
struct Cli {
    /// Print one JSON document instead of tables.
    #[arg(long, global = true)]
    json: bool,

    /// Write the per-case detail rows to this CSV file.
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Deutsch's problem on the four one-bit functions, cycled over the runs.
    Deutsch {
        #[arg(long, value_enum, default_value_t = DeutschVariant::Original)]
        variant: DeutschVariant,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Deutsch-Jozsa: exhaustive for n ≤ 2, random promised oracles above.
    DeutschJozsa {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Inner products and projector checks for the constant and balanced planes.
    Planes,
    /// Factor an odd semiprime through the period reduction.
    Shor {
        #[arg(long = "N", value_name = "N")]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play a two-party game in-process.
    Game {
        #[command(subcommand)]
        game: GameCommand,
    },
    /// Search for a colouring of the distance-n/2 graph on n-bit strings.
    Coloring {
        #[arg(long)]
        n: usize,
        /// Colours allowed; defaults to n.
        #[arg(long)]
        colors: Option<usize>,
        #[arg(long, default_value_t = 10.0)]
        budget_secs: f64,
    },
    /// Run the networked referee.
    Referee {
        #[command(subcommand)]
        action: RefereeCommand,
    },
    /// Run one networked player.
    Player {
        #[command(subcommand)]
        action: PlayerCommand,
    },
}

#[derive(Subcommand, Debug)]
enum GameCommand {
    Dj {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        rounds: u64,
        #[arg(long, value_enum, default_value_t = DjStrategyName::Quantum)]
        strategy: DjStrategyName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability that a round has x = y.
        #[arg(long, default_value_t = 0.5)]
        equal_probability: f64,
        /// Time allowed for the colouring search.
        #[arg(long, default_value_t = games::DEFAULT_COLORING_BUDGET_SECS)]
        budget_secs: f64,
    },
    Chsh {
        #[arg(long, value_enum, default_value_t = ChshModeArg::Analytic)]
        mode: ChshModeArg,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum RefereeCommand {
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// 0 picks a free port, announced on stderr.
        #[arg(long, default_value_t = 7878)]
        port: u16,
        /// Session config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's log path.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum PlayerCommand {
    Join {
        #[arg(long, value_parser = parse_role)]
        role: Role,
        #[arg(long, env = "TELEPATHY_ENDPOINT", default_value = "127.0.0.1:7878")]
        endpoint: String,
        #[arg(long, value_enum)]
        strategy: PlayerStrategyName,
        /// Seed of the pre-agreed shared random string; both players must match.
        #[arg(long)]
        shared_seed: Option<u64>,
        #[arg(long, default_value_t = games::DEFAULT_COLORING_BUDGET_SECS)]
        budget_secs: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DeutschVariant {
    Original,
    Cleve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DjStrategyName {
    Quantum,
    Parity,
    SharedRandom,
    Coloring,
}

impl DjStrategyName {
    pub fn as_str(self) -> &'static str {
        match self {
            DjStrategyName::Quantum => "quantum",
            DjStrategyName::Parity => "parity",
            DjStrategyName::SharedRandom => "shared-random",
            DjStrategyName::Coloring => "coloring",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlayerStrategyName {
    Quantum,
    Parity,
    SharedRandom,
    Coloring,
    Constant,
}

impl PlayerStrategyName {
    pub fn as_str(self) -> &'static str {
        match self {
            PlayerStrategyName::Quantum => "quantum",
            PlayerStrategyName::Parity => "parity",
            PlayerStrategyName::SharedRandom => "shared-random",
            PlayerStrategyName::Coloring => "coloring",
            PlayerStrategyName::Constant => "constant",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ChshModeArg {
    Analytic,
    Sample,
}

fn parse_role(s: &str) -> Result<Role, telepathy_core::Error> {
    s.parse()
}

fn budget(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs).map_err(|_| anyhow::anyhow!("invalid budget {secs} s"))
}

fn experiment_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Deutsch { .. } => "deutsch",
        Command::DeutschJozsa { .. } => "deutsch-jozsa",
        Command::Planes => "planes",
        Command::Shor { .. } => "shor",
        Command::Game { game: GameCommand::Dj { .. } } => "game-dj",
        Command::Game { game: GameCommand::Chsh { .. } } => "game-chsh",
        Command::Coloring { .. } => "coloring",
        Command::Referee { .. } => "referee-serve",
        Command::Player { .. } => "player-join",
    }
}

fn dispatch(cmd: Command) -> Result<ExperimentReport> {
    match cmd {
        Command::Deutsch { variant, runs, seed } => experiments::deutsch(variant, runs, seed),
        Command::DeutschJozsa { n, trials, seed } => experiments::deutsch_jozsa_experiment(n, trials, seed),
        Command::Planes => experiments::planes(),
        Command::Shor { n, seed } => experiments::shor(n, seed),
        Command::Game { game: GameCommand::Dj { m, rounds, strategy, seed, equal_probability, budget_secs } } => {
            games::game_dj(&games::DjRun {
                m,
                rounds,
                strategy,
                seed,
                equal_probability,
                budget: budget(budget_secs)?,
            })
        }
        Command::Game { game: GameCommand::Chsh { mode, rounds, seed } } => {
            let mode = match mode {
                ChshModeArg::Analytic => ChshMode::Analytic,
                ChshModeArg::Sample => ChshMode::Sample,
            };
            games::game_chsh(mode, rounds, seed)
        }
        Command::Coloring { n, colors, budget_secs } => games::coloring(n, colors, budget(budget_secs)?),
        Command::Referee { action: RefereeCommand::Serve { host, port, config, log } } => {
            network::referee_serve(&host, port, &config, log)
        }
        Command::Player { action: PlayerCommand::Join { role, endpoint, strategy, shared_seed, budget_secs } } => {
            network::player(role, &endpoint, strategy, shared_seed, budget(budget_secs)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let name = experiment_name(&cli.command);
    let started = Instant::now();
    let result = dispatch(cli.command).and_then(|mut rep| {
        rep.wall_clock_ms = started.elapsed().as_millis() as u64;
        if let Some(path) = &cli.csv {
            rep.write_csv(path)?;
        }
        Ok(rep)
    });
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match result {
        Ok(rep) => {
            let printed = if cli.json {
                rep.print_json(&mut out)
            } else {
                rep.print_text(&mut out)
            };
            if let Err(e) = printed {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            ExitCode::from(if rep.passed() { 0 } else { 1 })
        }
        Err(e) => {
            if cli.json {
                let doc = serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "experiment": name,
                    "error": { "message": format!("{e:#}") },
                });
                let _ = writeln!(out, "{doc:#}");
            }
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
