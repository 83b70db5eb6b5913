//! The outer loop: alternate sides, evolve against the current tasks, select
//! the next tasks and carry the selection tournament into the next
//! generation as bootstrap.

mod store;

pub use store::{ArchiveFile, RunDir};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::model::{ctx, derive_seed, rng_from_seed, Genome, RunConfig, Side, Strategy};
use crate::mtmb::{run_mtmb, BootstrapRecord, EvalRecord, MtmbStats, TaskArchive, TaskSet};
use crate::scalar::Scalar;
use crate::selection::{select_tasks, EliteId, SelectionReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Side evolved in 1-based generation `generation`: Red on odd generations.
pub fn generation_side(generation: usize) -> Side {
    if generation % 2 == 1 {
        Side::Red
    } else {
        Side::Blue
    }
}

/// Evaluations per generation every strategy ends up spending:
/// `n_budget + n_task² · n_cell`.
pub fn evaluations_per_generation(cfg: &RunConfig) -> usize {
    cfg.n_budget + cfg.n_task * cfg.n_task * cfg.n_cell
}

/// Main-loop budget of `strategy`. Tournament-informed strategies spend
/// `n_task² · n_cell` duels selecting; the others only `n_task²` on the
/// bootstrap tournament and get the difference as extra loop evaluations.
pub fn equalized_budget(cfg: &RunConfig, strategy: Strategy) -> usize {
    if strategy.is_tournament_informed() {
        cfg.n_budget
    } else {
        let t2 = cfg.n_task * cfg.n_task;
        cfg.n_budget + t2 * cfg.n_cell - t2
    }
}

/// Generation-0 opponents: `n_task` random Blue genomes.
pub fn initial_tasks<F: Scalar>(cfg: &RunConfig) -> TaskSet<F> {
    let tasks = (0..cfg.n_task)
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(cfg.master_seed, &[ctx::INIT_TASKS, i as u64]));
            Genome::random(cfg.env, Side::Blue, &mut rng)
        })
        .collect();
    TaskSet {
        generation: 1,
        side: Side::Blue,
        tasks,
    }
}

/// Short content digest of a genome (first 16 hex digits of SHA-256 over the
/// little-endian `f64` parameters).
pub fn genome_digest<F: Scalar>(g: &Genome<F>) -> String {
    let mut h = Sha256::new();
    h.update(g.env.as_str().as_bytes());
    h.update(g.side.as_str().as_bytes());
    for p in &g.params {
        h.update(p.to_f64_lossy().to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveSummary {
    pub cells: usize,
    pub best_fitness: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvaluationCounts {
    pub main_loop: usize,
    pub random_candidates: usize,
    pub mutated_candidates: usize,
    pub selection_tournament: usize,
    pub bootstrap_tournament: usize,
}

impl EvaluationCounts {
    pub fn total(&self) -> usize {
        self.main_loop + self.selection_tournament + self.bootstrap_tournament
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub evolving_side: Side,
    pub task_side: Side,
    pub budget: usize,
    pub bootstrap_records: usize,
    pub tasks_consumed: Vec<String>,
    pub archives: Vec<ArchiveSummary>,
    pub selected: Vec<EliteId>,
    pub padded: usize,
    pub next_tasks: Vec<String>,
    pub evaluations: EvaluationCounts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct FinalTasks<F> {
    pub red: TaskSet<F>,
    pub blue: TaskSet<F>,
}

impl<F: Scalar> FinalTasks<F> {
    pub fn get(&self, side: Side) -> &TaskSet<F> {
        match side {
            Side::Red => &self.red,
            Side::Blue => &self.blue,
        }
    }
}

/// Everything needed to replay a run, plus its lineage. Contains no
/// timestamps or paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RunManifest<F> {
    pub tool_version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub config: RunConfig,
    pub complete: bool,
    pub generations: Vec<GenerationRecord>,
    pub total_evaluations: usize,
    pub final_tasks: Option<FinalTasks<F>>,
}

/// Loop state between generations; enough to resume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RunState<F> {
    pub config_hash: String,
    pub completed: usize,
    pub tasks: TaskSet<F>,
    pub bootstrap: Vec<BootstrapRecord<F>>,
    pub latest_red: Option<TaskSet<F>>,
    pub latest_blue: TaskSet<F>,
    pub records: Vec<GenerationRecord>,
}

impl<F: Scalar> RunState<F> {
    pub fn fresh(cfg: &RunConfig) -> Self {
        let tasks = initial_tasks(cfg);
        Self {
            config_hash: cfg.config_hash(),
            completed: 0,
            latest_blue: tasks.clone(),
            tasks,
            bootstrap: Vec::new(),
            latest_red: None,
            records: Vec::new(),
        }
    }

    pub fn manifest(&self, cfg: &RunConfig) -> RunManifest<F> {
        let complete = self.completed == cfg.n_gen;
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: self.config_hash.clone(),
            master_seed: cfg.master_seed,
            config: cfg.clone(),
            complete,
            total_evaluations: self.records.iter().map(|r| r.evaluations.total()).sum(),
            generations: self.records.clone(),
            final_tasks: match (&self.latest_red, complete) {
                (Some(red), true) => Some(FinalTasks {
                    red: red.clone(),
                    blue: self.latest_blue.clone(),
                }),
                _ => None,
            },
        }
    }
}

/// What one generation produced.
#[derive(Clone, Debug)]
pub struct GenerationArtifacts<F: Scalar> {
    pub record: GenerationRecord,
    pub archives: Vec<TaskArchive<F>>,
    pub log: Vec<EvalRecord>,
    pub selection: SelectionReport,
}

/// Receives every finished generation before the next one starts.
pub trait RunObserver<F: Scalar> {
    fn on_generation(
        &mut self,
        artifacts: &GenerationArtifacts<F>,
        state: &RunState<F>,
    ) -> Result<()>;
}

impl<F: Scalar> RunObserver<F> for () {
    fn on_generation(&mut self, _: &GenerationArtifacts<F>, _: &RunState<F>) -> Result<()> {
        Ok(())
    }
}

/// Runs one generation and advances `state`.
pub fn step_generation<F: Scalar>(
    cfg: &RunConfig,
    state: &mut RunState<F>,
) -> Result<GenerationArtifacts<F>> {
    let generation = state.completed + 1;
    let side = generation_side(generation);
    let budget = equalized_budget(cfg, cfg.strategy);
    let mut tasks = state.tasks.clone();
    tasks.generation = generation;

    let out = run_mtmb(cfg, side, &tasks, &state.bootstrap, budget)?;
    let sel = select_tasks(cfg, generation, side, &out.archives, &tasks)?;
    let MtmbStats {
        evaluations,
        random,
        mutated,
        ..
    } = out.stats;
    if sel.report.pool_size < cfg.n_task * cfg.n_cell {
        log::warn!(
            "generation {generation}: {} elites instead of {}; selection tournament is smaller than budgeted",
            sel.report.pool_size,
            cfg.n_task * cfg.n_cell
        );
    }
    let record = GenerationRecord {
        generation,
        evolving_side: side,
        task_side: tasks.side,
        budget,
        bootstrap_records: state.bootstrap.len(),
        tasks_consumed: tasks.tasks.iter().map(genome_digest).collect(),
        archives: out
            .archives
            .iter()
            .map(|a| ArchiveSummary {
                cells: a.len(),
                best_fitness: a.best_fitness().map(|f| f.to_f64_lossy()),
            })
            .collect(),
        selected: sel.report.selected.clone(),
        padded: sel.report.padded,
        next_tasks: sel.tasks.tasks.iter().map(genome_digest).collect(),
        evaluations: EvaluationCounts {
            main_loop: evaluations,
            random_candidates: random,
            mutated_candidates: mutated,
            selection_tournament: sel.report.tournament_evaluations,
            bootstrap_tournament: sel.report.bootstrap_evaluations,
        },
    };
    log::info!(
        "generation {generation}/{} ({side}, {}): {} evaluations",
        cfg.n_gen,
        cfg.strategy,
        record.evaluations.total()
    );

    match side {
        Side::Red => state.latest_red = Some(sel.tasks.clone()),
        Side::Blue => state.latest_blue = sel.tasks.clone(),
    }
    state.tasks = sel.tasks;
    state.bootstrap = sel.bootstrap;
    state.completed = generation;
    state.records.push(record.clone());
    Ok(GenerationArtifacts {
        record,
        archives: out.archives,
        log: out.log,
        selection: sel.report,
    })
}

/// Continues `state` up to `cfg.n_gen` generations.
pub fn continue_game<F: Scalar>(
    cfg: &RunConfig,
    state: RunState<F>,
    observer: &mut dyn RunObserver<F>,
) -> Result<RunState<F>> {
    advance_game(cfg, state, observer, cfg.n_gen)
}

/// Continues `state` up to generation `until` (capped at `cfg.n_gen`).
pub fn advance_game<F: Scalar>(
    cfg: &RunConfig,
    mut state: RunState<F>,
    observer: &mut dyn RunObserver<F>,
    until: usize,
) -> Result<RunState<F>> {
    cfg.validate()?;
    while state.completed < until.min(cfg.n_gen) {
        let art = step_generation(cfg, &mut state)?;
        observer.on_generation(&art, &state)?;
    }
    Ok(state)
}

/// Final archives of each side, as left by the last generation of that side.
#[derive(Clone, Debug)]
pub struct FinalArchives<F: Scalar> {
    pub red: Option<Vec<TaskArchive<F>>>,
    pub blue: Option<Vec<TaskArchive<F>>>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome<F: Scalar> {
    pub manifest: RunManifest<F>,
    pub final_archives: FinalArchives<F>,
    pub selections: Vec<SelectionReport>,
}

struct Collect<F: Scalar> {
    archives: FinalArchives<F>,
    selections: Vec<SelectionReport>,
}

impl<F: Scalar> RunObserver<F> for Collect<F> {
    fn on_generation(&mut self, a: &GenerationArtifacts<F>, _: &RunState<F>) -> Result<()> {
        match a.record.evolving_side {
            Side::Red => self.archives.red = Some(a.archives.clone()),
            Side::Blue => self.archives.blue = Some(a.archives.clone()),
        }
        self.selections.push(a.selection.clone());
        Ok(())
    }
}

/// Runs a whole GAME run in memory.
pub fn run_game<F: Scalar>(cfg: &RunConfig) -> Result<RunOutcome<F>> {
    let mut collect = Collect {
        archives: FinalArchives {
            red: None,
            blue: None,
        },
        selections: Vec::new(),
    };
    let state = continue_game(cfg, RunState::fresh(cfg), &mut collect)?;
    Ok(RunOutcome {
        manifest: state.manifest(cfg),
        final_archives: collect.archives,
        selections: collect.selections,
    })
}
