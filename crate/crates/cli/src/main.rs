use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gameqd::env::read_replay_csv;
use gameqd::experiment::{
    measure_matrices, render, write_tables, Experiment, ExperimentPlan, TournamentMode,
};
use gameqd::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "gameqd",
    version,
    about = "Adversarial quality-diversity experiments"
)]
struct Cli {
    /// Experiment plan (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the plan's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root; defaults to the plan's `output`, then `out/<plan name>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for duels and runs (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Continue interrupted runs from their last finished generation.
    #[arg(long, global = true)]
    resume: bool,
    /// Overwrite existing runs.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    FinalTasks,
    ReselectRanking,
    All,
}

impl Mode {
    fn modes(self) -> Vec<TournamentMode> {
        match self {
            Mode::FinalTasks => vec![TournamentMode::FinalTasks],
            Mode::ReselectRanking => vec![TournamentMode::ReselectRanking],
            Mode::All => TournamentMode::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs every strategy and replication of the plan.
    Run,
    /// Plays the inter-variant round robin over the runs' task sets.
    Tournament {
        #[arg(long, value_enum, default_value = "final-tasks")]
        mode: Mode,
    },
    /// Computes the measure tables of the tournaments.
    Measures {
        /// Explicit matrix files instead of the plan's tournaments; tables are
        /// written next to each file.
        #[arg(long, num_args = 1..)]
        matrix: Vec<PathBuf>,
    },
    /// Draws a replay CSV, or the archive-size curves of selected runs.
    Render {
        /// `all`, `<strategy>` or `<strategy>/rep_<i>`.
        #[arg(long)]
        run: Option<String>,
        #[arg(long, conflicts_with = "run")]
        replay: Option<PathBuf>,
        /// Output SVG file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-simulates one tournament duel and writes its replay CSV.
    Replay {
        #[arg(long, value_enum, default_value = "final-tasks")]
        mode: Mode,
        #[arg(long)]
        row: usize,
        #[arg(long)]
        col: usize,
        #[arg(long, default_value_t = 0)]
        rep: usize,
        /// Output CSV file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn experiment(cli: &Cli) -> Result<Experiment> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::usage("this command needs --config <plan.toml>"))?;
    let mut plan = ExperimentPlan::load(path)?;
    if let Some(seed) = cli.seed {
        plan.master_seed = seed;
    }
    let root = match (&cli.out, &plan.output) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => o.clone(),
        (None, None) => Path::new("out").join(path.file_stem().unwrap_or_default()),
    };
    Ok(Experiment::new(plan, root))
}

fn single_mode(mode: Mode) -> Result<TournamentMode> {
    match mode.modes().as_slice() {
        [m] => Ok(*m),
        _ => Err(Error::usage("choose one tournament mode")),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::usage("--workers must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::usage(format!("cannot set up workers: {e}")))?;
    }
    match &cli.command {
        Command::Run => {
            let exp = experiment(cli)?;
            let report = exp.run(cli.force, cli.resume)?;
            for r in &report.runs {
                match &r.outcome {
                    Ok(n) => println!("ok      {} ({n} evaluations)", r.dir.display()),
                    Err(e) => println!("failed  {}: {e}", r.dir.display()),
                }
            }
            let failed = report.failures().count();
            if let Some(e) = report.runs.into_iter().find_map(|r| r.outcome.err()) {
                eprintln!("{failed} replication(s) failed");
                return Err(e);
            }
        }
        Command::Tournament { mode } => {
            let exp = experiment(cli)?;
            for m in mode.modes() {
                let matrix = exp.tournament(m)?;
                println!(
                    "{m}: {}x{} matrix in {}",
                    matrix.rows.len(),
                    matrix.cols.len(),
                    exp.tournament_dir(m).display()
                );
            }
        }
        Command::Measures { matrix } if !matrix.is_empty() => {
            let tables = measure_matrices(matrix)?;
            for (path, table) in matrix.iter().zip(&tables) {
                let dir = path.parent().unwrap_or(Path::new("."));
                write_tables(dir, table)?;
                println!("{}", path.display());
                print!("{}", table.to_text());
            }
        }
        Command::Measures { .. } => {
            let exp = experiment(cli)?;
            for (mode, table) in exp.measures()? {
                println!("== {mode} ({})", exp.measures_dir(mode).display());
                print!("{}", table.to_text());
            }
        }
        Command::Render {
            run,
            replay,
            output,
        } => {
            if let Some(path) = replay {
                let r = read_replay_csv(path)?;
                let out = output.clone().unwrap_or_else(|| path.with_extension("svg"));
                gameqd::io::write_atomic(&out, render::replay_svg(&r).as_bytes())?;
                println!("{}", out.display());
            } else {
                let exp = experiment(cli)?;
                let selector = run.as_deref().unwrap_or("");
                let name: String = selector
                    .chars()
                    .map(|c| {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            c
                        } else {
                            '-'
                        }
                    })
                    .collect();
                let out = output
                    .clone()
                    .unwrap_or_else(|| exp.render_dir().join(format!("archive_sizes_{name}.svg")));
                exp.render_runs(selector, &out)?;
                println!("{}", out.display());
            }
        }
        Command::Replay {
            mode,
            row,
            col,
            rep,
            output,
        } => {
            let exp = experiment(cli)?;
            let mode = single_mode(*mode)?;
            let out = output.clone().unwrap_or_else(|| {
                exp.root()
                    .join("replays")
                    .join(format!("{mode}_r{row}_c{col}_k{rep}.csv"))
            });
            let f = exp.replay(mode, *row, *col, *rep, &out)?;
            println!("{} (red fitness {f})", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
