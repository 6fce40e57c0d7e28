use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ghostcde::harness::ModelKind;
use ghostcde::pipeline::{error_report, run, Command, RunConfig};
use ghostcde::Result;

/// Ghost-defender evaluation of nearest-defender positioning at the catch.
#[derive(Parser, Debug)]
#[command(name = "ghostcde", version)]
struct Cli {
    /// TOML run configuration; defaults are used for anything it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug, Clone)]
enum Cmd {
    /// Load tracking, plays and games files and report rejects and exclusions.
    Ingest,
    /// Build the per-play feature table and rosters.
    Features,
    /// Train the yards-after-catch forest.
    TrainYac,
    /// Train the ghost-location forest.
    TrainGhost,
    /// Ghost evaluation of one play.
    EvalPlay {
        #[arg(long)]
        game: u64,
        #[arg(long)]
        play: u64,
    },
    /// Ghost evaluation of every play plus leaderboards.
    EvalSeason,
    /// Leave-one-week-out cross validation of the candidate feature sets.
    Cv {
        #[arg(long, default_value = "yac")]
        kind: ModelKind,
    },
    /// Training-week sweep tested on the final week.
    Sweep {
        #[arg(long, default_value = "yac")]
        kind: ModelKind,
    },
    /// Re-aggregate season results into leaderboards and correlations.
    Report,
    /// Generate a synthetic season into the data directory.
    Synth,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Ingest => Command::Ingest,
            Cmd::Features => Command::Features,
            Cmd::TrainYac => Command::TrainYac,
            Cmd::TrainGhost => Command::TrainGhost,
            Cmd::EvalPlay { game, play } => Command::EvalPlay {
                game_id: game,
                play_id: play,
            },
            Cmd::EvalSeason => Command::EvalSeason,
            Cmd::Cv { kind } => Command::Cv { kind },
            Cmd::Sweep { kind } => Command::Sweep { kind },
            Cmd::Report => Command::Report,
            Cmd::Synth => Command::Synth,
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply_env(|k| std::env::var(k).ok());
    if let Some(w) = cli.workers {
        config.workers = w;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(out) = &cli.out {
        config.paths.out = out.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command: Command = cli.command.clone().into();
    let result = load_config(&cli).and_then(|config| run(&command, &config));
    match result {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", error_report(command.name(), &e));
            ExitCode::FAILURE
        }
    }
}
