use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ipse::env::CallMeter;
use ipse::features::NUM_FEATURES;
use ipse::harness::{evaluate_policy, output, run_experiment, ExperimentConfig, DEFAULT_STEP_CAP};
use ipse::lfd::{run_lfd, LfdConfig, LfdError};
use ipse::rollout::RolloutConfig;
use ipse::tetris::{parse_board, placement_feature_vector, ActionPlacement, BoardState, Piece, Tetris};

#[derive(Parser)]
#[command(name = "ipse", version, about = "Feature-direction and policy-space-expansion learners for 10x10 Tetris")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment and write CSV results.
    Run {
        /// Flat `key = value` config file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replications: Option<u32>,
        /// Maximum replications running at once.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Evaluate a fixed linear policy by greedy play.
    Eval {
        /// File holding one CSV row of 8 weights in canonical feature order.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 30)]
        games: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Learn feature directions and print them as directions.csv.
    Lfd {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the 8 features of one placement as a CSV row.
    Features {
        /// Board file: 10 rows of `.` and `#`, top row first.
        #[arg(long)]
        board: PathBuf,
        #[arg(long)]
        piece: Piece,
        #[arg(long)]
        rotation: u8,
        #[arg(long)]
        column: u8,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            replications,
            parallel,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            cfg.output_dir = out;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(r) = replications {
                cfg.replications = r;
            }
            if let Some(p) = parallel {
                cfg.parallelism = p;
            }
            let outcome = run_experiment(&cfg)?;
            eprintln!(
                "wrote {} replications to {}",
                outcome.results.len(),
                cfg.output_dir.display()
            );
            if !outcome.aborted.is_empty() {
                for (v, r) in &outcome.aborted {
                    eprintln!("aborted: {} replication {r}", v.as_str());
                }
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { weights, games, seed } => {
            if games == 0 {
                bail!("--games must be at least 1");
            }
            let w = read_weights(&weights)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = evaluate_policy(&w, games, &mut rng, DEFAULT_STEP_CAP);
            println!("mean_score,std_score,games,capped_games");
            println!("{},{},{},{}", r.mean_score, r.std_score, r.games, r.capped_games);
            Ok(ExitCode::SUCCESS)
        }
        Command::Lfd { alpha, seed } => {
            let lfd = LfdConfig {
                alpha,
                ..LfdConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut meter = CallMeter::new();
            let (state, complete) = match run_lfd(&Tetris::new(), &RolloutConfig::default(), &lfd, &mut rng, &mut meter) {
                Ok(run) => (run.state, true),
                Err(LfdError::IterationCap(run)) => (run.state, false),
                Err(e) => return Err(e.into()),
            };
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(output::DIRECTIONS_HEADER)?;
            output::write_direction_rows(&mut w, "lfd", 0, &state)?;
            w.flush()?;
            if !complete {
                eprintln!("iteration cap reached with undecided directions");
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Features {
            board,
            piece,
            rotation,
            column,
        } => {
            let text = std::fs::read_to_string(&board)
                .with_context(|| format!("reading {}", board.display()))?;
            let parsed = parse_board(&text)?;
            let state = BoardState::new(parsed.board, piece);
            let f = placement_feature_vector(&state, ActionPlacement::new(rotation, column))?;
            println!("{f}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// First CSV record made of exactly 8 numbers; a header line is skipped.
fn read_weights(path: &PathBuf) -> Result<[f64; NUM_FEATURES]> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    for record in reader.records() {
        let record = record?;
        let values: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        if let Ok(v) = values {
            if v.len() != NUM_FEATURES {
                bail!("expected {NUM_FEATURES} weights, found {}", v.len());
            }
            let mut w = [0.0; NUM_FEATURES];
            w.copy_from_slice(&v);
            return Ok(w);
        }
    }
    bail!("{} holds no row of {NUM_FEATURES} numeric weights", path.display())
}
