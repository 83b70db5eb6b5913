//! Desk-scale experiments: every strategy of a plan over seeded replications,
//! the inter-variant tournament over their final tasks, the measure tables,
//! duel replays and plots.
//!
//! ```text
//! <root>/experiment.json                     plan hash and tool version
//! <root>/plan.toml
//! <root>/runs/<strategy>/rep_<i>/            one run directory each
//! <root>/tournament/<mode>/matrix.{json,csv}
//! <root>/tournament/<mode>/participants.json
//! <root>/measures/<mode>/{summary.csv,replications.csv,table.txt,measures.json}
//! <root>/render/*.svg
//! ```

mod plan;
pub mod render;

pub use plan::{ExperimentPlan, RunTemplate};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{evaluate_duel, write_replay_csv};
use crate::error::{Error, Result};
use crate::io::{read_json, write_atomic, write_json, write_json_compact};
use crate::measures::{round_robin, EloParams, FitnessMatrix, Label, MeasureTable};
use crate::model::{ctx, derive_seed, Genome, RunConfig, Side, Strategy};
use crate::mtmb::TaskSet;
use crate::runner::{RunDir, RunManifest, TOOL_VERSION};
use crate::selection::{elite_pool, pad_selection, ranking_pick, run_tournament, EliteId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TournamentMode {
    /// Each run's last selected task sets.
    FinalTasks,
    /// Ranking selection re-applied to each run's final archives.
    ReselectRanking,
}

impl TournamentMode {
    pub const ALL: [TournamentMode; 2] =
        [TournamentMode::FinalTasks, TournamentMode::ReselectRanking];

    pub fn as_str(self) -> &'static str {
        match self {
            TournamentMode::FinalTasks => "final_tasks",
            TournamentMode::ReselectRanking => "reselect_ranking",
        }
    }
}

impl fmt::Display for TournamentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TournamentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::usage(format!(
                    "unknown tournament mode `{s}` (final_tasks, reselect_ranking)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ExperimentStamp {
    tool_version: String,
    plan_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RunStamp {
    tool_version: String,
    plan_hash: String,
    strategy: Strategy,
    replication: usize,
}

/// The genomes that entered a tournament, in matrix order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Participants {
    pub tool_version: String,
    pub plan_hash: String,
    pub mode: TournamentMode,
    pub red: Vec<(Label, Genome<f64>)>,
    pub blue: Vec<(Label, Genome<f64>)>,
}

/// Outcome of one (strategy, replication) run.
#[derive(Debug)]
pub struct RunResult {
    pub strategy: Strategy,
    pub replication: usize,
    pub dir: PathBuf,
    pub outcome: Result<usize>,
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub runs: Vec<RunResult>,
}

impl RunReport {
    pub fn failures(&self) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter(|r| r.outcome.is_err())
    }

    /// The first failure's error, for the exit status.
    pub fn first_error(&self) -> Option<&Error> {
        self.runs.iter().find_map(|r| r.outcome.as_ref().err())
    }
}

/// A plan bound to its output root.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub plan: ExperimentPlan,
    root: PathBuf,
}

impl Experiment {
    pub fn new(plan: ExperimentPlan, root: impl Into<PathBuf>) -> Self {
        Self {
            plan,
            root: root.into(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn run_dir(&self, strategy: Strategy, rep: usize) -> RunDir {
        RunDir::new(
            self.root
                .join("runs")
                .join(strategy.as_str())
                .join(format!("rep_{rep}")),
        )
    }

    pub fn run_name(strategy: Strategy, rep: usize) -> String {
        format!("{strategy}/rep_{rep}")
    }

    pub fn tournament_dir(&self, mode: TournamentMode) -> PathBuf {
        self.root.join("tournament").join(mode.as_str())
    }

    pub fn measures_dir(&self, mode: TournamentMode) -> PathBuf {
        self.root.join("measures").join(mode.as_str())
    }

    pub fn render_dir(&self) -> PathBuf {
        self.root.join("render")
    }

    fn stamp_path(&self) -> PathBuf {
        self.root.join("experiment.json")
    }

    /// Refuses an output root that belongs to another plan.
    fn check_stamp(&self) -> Result<()> {
        let path = self.stamp_path();
        if !path.exists() {
            return Ok(());
        }
        let stamp: ExperimentStamp = read_json(&path)?;
        if stamp.plan_hash != self.plan.plan_hash() {
            return Err(Error::integrity(format!(
                "{} holds results of a different plan ({})",
                self.root.display(),
                stamp.plan_hash
            )));
        }
        Ok(())
    }

    /// Runs every (strategy, replication) pair in parallel. A failing
    /// replication does not stop the others; see [`RunReport::failures`].
    pub fn run(&self, force: bool, resume: bool) -> Result<RunReport> {
        if !force {
            self.check_stamp()?;
        }
        let plan_hash = self.plan.plan_hash();
        write_json(
            &self.stamp_path(),
            &ExperimentStamp {
                tool_version: TOOL_VERSION.to_string(),
                plan_hash: plan_hash.clone(),
            },
        )?;
        write_atomic(
            &self.root.join("plan.toml"),
            self.plan.to_toml_string().as_bytes(),
        )?;

        let runs = self
            .plan
            .jobs()
            .into_par_iter()
            .map(|(strategy, rep)| {
                let dir = self.run_dir(strategy, rep);
                let cfg = self.plan.run_config(strategy, rep);
                let outcome = dir.run::<f64>(&cfg, force, resume).and_then(|m| {
                    write_json(
                        &dir.root().join("plan.json"),
                        &RunStamp {
                            tool_version: TOOL_VERSION.to_string(),
                            plan_hash: plan_hash.clone(),
                            strategy,
                            replication: rep,
                        },
                    )?;
                    Ok(m.total_evaluations)
                });
                match &outcome {
                    Ok(n) => log::info!("{}: {n} evaluations", Self::run_name(strategy, rep)),
                    Err(e) => log::error!("{}: {e}", Self::run_name(strategy, rep)),
                }
                RunResult {
                    strategy,
                    replication: rep,
                    dir: dir.root().to_path_buf(),
                    outcome,
                }
            })
            .collect();
        Ok(RunReport { runs })
    }

    /// Complete runs of this plan, or an integrity error naming every
    /// missing, incomplete or foreign one.
    pub fn completed_runs(
        &self,
    ) -> Result<Vec<(Strategy, usize, RunDir, RunConfig, RunManifest<f64>)>> {
        self.check_stamp()?;
        let mut found = Vec::new();
        let mut absent = Vec::new();
        for (strategy, rep) in self.plan.jobs() {
            let dir = self.run_dir(strategy, rep);
            let cfg = self.plan.run_config(strategy, rep);
            let name = Self::run_name(strategy, rep);
            match dir.load_manifest::<f64>() {
                Err(_) => absent.push(format!("{name} (missing)")),
                Ok(m) if m.config_hash != cfg.config_hash() => {
                    absent.push(format!("{name} (different configuration)"))
                }
                Ok(m) if !m.complete => absent.push(format!("{name} (incomplete)")),
                Ok(m) => found.push((strategy, rep, dir, cfg, m)),
            }
        }
        if !absent.is_empty() {
            return Err(Error::integrity(format!(
                "runs not available: {}",
                absent.join(", ")
            )));
        }
        Ok(found)
    }

    /// Gathers the competing task sets of every run and plays the round robin.
    pub fn tournament(&self, mode: TournamentMode) -> Result<FitnessMatrix> {
        let runs = self.completed_runs()?;
        let plan_hash = self.plan.plan_hash();
        let sets: Vec<(Vec<(Label, Genome<f64>)>, Vec<(Label, Genome<f64>)>)> = runs
            .par_iter()
            .map(|(strategy, rep, dir, cfg, manifest)| {
                let mut per_side = [Side::Red, Side::Blue].into_iter().map(|side| {
                    let tasks = match mode {
                        TournamentMode::FinalTasks => manifest
                            .final_tasks
                            .as_ref()
                            .expect("complete manifest has final tasks")
                            .get(side)
                            .clone(),
                        TournamentMode::ReselectRanking => {
                            reselect_ranking(dir, cfg, manifest, side)?
                        }
                    };
                    Ok(tasks
                        .tasks
                        .into_iter()
                        .enumerate()
                        .map(|(i, g)| {
                            let label = Label {
                                variant: strategy.as_str().to_string(),
                                replication: *rep,
                                index: i,
                            };
                            (label, g)
                        })
                        .collect::<Vec<_>>())
                });
                let red = per_side.next().unwrap()?;
                let blue = per_side.next().unwrap()?;
                Ok((red, blue))
            })
            .collect::<Result<_>>()?;
        let (mut red, mut blue) = (Vec::new(), Vec::new());
        for (r, b) in sets {
            red.extend(r);
            blue.extend(b);
        }
        let participants = Participants {
            tool_version: TOOL_VERSION.to_string(),
            plan_hash: plan_hash.clone(),
            mode,
            red,
            blue,
        };
        let r: Vec<(Label, &Genome<f64>)> = participants
            .red
            .iter()
            .map(|(l, g)| (l.clone(), g))
            .collect();
        let b: Vec<(Label, &Genome<f64>)> = participants
            .blue
            .iter()
            .map(|(l, g)| (l.clone(), g))
            .collect();
        let mut matrix = round_robin(
            self.plan.env,
            &self.plan.run.physics,
            &r,
            &b,
            self.plan.tournament_reps,
            self.plan.master_seed,
        )?;
        matrix.plan_hash = plan_hash;

        let dir = self.tournament_dir(mode);
        write_json_compact(&dir.join("participants.json"), &participants)?;
        matrix.write_json(&dir.join("matrix.json"))?;
        write_atomic(&dir.join("matrix.csv"), matrix.to_csv().as_bytes())?;
        Ok(matrix)
    }

    /// Measure tables of every tournament present, written next to each
    /// other under `measures/`.
    pub fn measures(&self) -> Result<Vec<(TournamentMode, MeasureTable)>> {
        self.check_stamp()?;
        let present: Vec<(TournamentMode, PathBuf)> = TournamentMode::ALL
            .into_iter()
            .map(|m| (m, self.tournament_dir(m).join("matrix.json")))
            .filter(|(_, p)| p.exists())
            .collect();
        if present.is_empty() {
            return Err(Error::usage(format!(
                "no tournament results under {}; run `tournament` first",
                self.root.display()
            )));
        }
        let paths: Vec<PathBuf> = present.iter().map(|(_, p)| p.clone()).collect();
        let tables = measure_matrices(&paths)?;
        let want = self.plan.plan_hash();
        if let Some(t) = tables.iter().find(|t| t.plan_hash != want) {
            return Err(Error::integrity(format!(
                "tournament results come from plan {}, not {want}",
                t.plan_hash
            )));
        }
        let mut out = Vec::new();
        for ((mode, _), table) in present.into_iter().zip(tables) {
            write_tables(&self.measures_dir(mode), &table)?;
            out.push((mode, table));
        }
        Ok(out)
    }

    /// Re-simulates tournament duel (`row`, `col`, `rep`), checks it against
    /// the recorded fitness and writes its replay CSV.
    pub fn replay(
        &self,
        mode: TournamentMode,
        row: usize,
        col: usize,
        rep: usize,
        out: &Path,
    ) -> Result<f64> {
        let dir = self.tournament_dir(mode);
        let matrix = FitnessMatrix::read_json(&dir.join("matrix.json"))?;
        let parts: Participants = read_json(&dir.join("participants.json"))?;
        if parts.plan_hash != matrix.plan_hash
            || parts.red.len() != matrix.rows.len()
            || parts.blue.len() != matrix.cols.len()
        {
            return Err(Error::integrity(format!(
                "{}: participants do not match the matrix",
                dir.display()
            )));
        }
        if row >= matrix.rows.len() || col >= matrix.cols.len() || rep >= matrix.reps {
            return Err(Error::usage(format!(
                "duel ({row}, {col}, {rep}) outside the {}x{}x{} tournament",
                matrix.rows.len(),
                matrix.cols.len(),
                matrix.reps
            )));
        }
        let seed = derive_seed(
            matrix.seed,
            &[ctx::ROUND_ROBIN, row as u64, col as u64, rep as u64],
        );
        let duel = evaluate_duel(
            matrix.env,
            &self.plan.run.physics,
            &parts.red[row].1,
            &parts.blue[col].1,
            seed,
        )?;
        if duel.fitness.red != matrix.duels[row][col][rep] {
            return Err(Error::integrity(format!(
                "replayed fitness {} differs from the recorded {}",
                duel.fitness.red, matrix.duels[row][col][rep]
            )));
        }
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_replay_csv(out, &duel.trajectory, seed, &matrix.plan_hash)?;
        Ok(duel.fitness.red)
    }

    /// Runs matching `selector`: `all`, `<strategy>` or `<strategy>/rep_<i>`.
    /// An empty or unmatched selector is a usage error listing what exists.
    pub fn select_runs(&self, selector: &str) -> Result<Vec<(String, RunDir)>> {
        let available: Vec<(String, RunDir)> = self
            .plan
            .jobs()
            .into_iter()
            .map(|(s, r)| (Self::run_name(s, r), self.run_dir(s, r)))
            .filter(|(_, d)| d.exists())
            .collect();
        let sel = selector.trim();
        let chosen: Vec<(String, RunDir)> = available
            .iter()
            .filter(|(name, _)| {
                !sel.is_empty()
                    && (sel == "all" || name == sel || name.split('/').next() == Some(sel))
            })
            .cloned()
            .collect();
        if chosen.is_empty() {
            let names: Vec<&str> = available.iter().map(|(n, _)| n.as_str()).collect();
            return Err(Error::usage(format!(
                "selector `{selector}` matches no run; available: {}",
                if names.is_empty() {
                    "(none)".to_string()
                } else {
                    names.join(", ")
                }
            )));
        }
        Ok(chosen)
    }

    /// Archive-size curves of the selected runs, as one SVG.
    pub fn render_runs(&self, selector: &str, out: &Path) -> Result<()> {
        let runs = self.select_runs(selector)?;
        let curves = runs
            .into_iter()
            .map(|(name, dir)| Ok((name, dir.load_manifest::<f64>()?)))
            .collect::<Result<Vec<_>>>()?;
        let svg = render::archive_size_svg(&curves, &self.plan.plan_hash());
        write_atomic(out, svg.as_bytes())
    }
}

/// Ranking selection over the final archives of `side`, against the tasks
/// those archives were evolved on. Seeds come from the run's own seed under
/// a dedicated context, so the original selection is not repeated.
pub fn reselect_ranking(
    dir: &RunDir,
    cfg: &RunConfig,
    manifest: &RunManifest<f64>,
    side: Side,
) -> Result<TaskSet<f64>> {
    let file = dir.final_archives(manifest, side)?;
    let old = dir.tasks_consumed::<f64>(cfg, file.generation)?;
    let pool = elite_pool(&file.archives);
    let rows: Vec<(EliteId, &Genome<f64>)> =
        pool.iter().map(|(id, e)| (*id, &e.solution)).collect();
    let log = run_tournament(cfg, file.generation, ctx::RESELECT, &rows, &old)?;
    let seed = derive_seed(cfg.master_seed, &[ctx::RESELECT, file.generation as u64]);
    let (mut sel, _) = ranking_pick(&log.fitness_matrix(), cfg.n_task, seed)?;
    pad_selection(
        &mut sel,
        pool.len(),
        cfg.n_task,
        derive_seed(seed, &[ctx::PAD]),
    );
    TaskSet::new(
        file.generation + 1,
        side,
        sel.iter().map(|&i| pool[i].1.solution.clone()).collect(),
    )
}

/// Measure tables of the given matrices. The coverage cluster count is the
/// size of the largest (variant, replication) set, i.e. the runs' task count.
/// Matrices from different plans are refused.
pub fn measure_matrices(paths: &[PathBuf]) -> Result<Vec<MeasureTable>> {
    let matrices = paths
        .iter()
        .map(|p| FitnessMatrix::read_json(p))
        .collect::<Result<Vec<_>>>()?;
    if let Some(m) = matrices
        .iter()
        .find(|m| m.plan_hash != matrices[0].plan_hash)
    {
        return Err(Error::integrity(format!(
            "refusing to mix results of plans {} and {}",
            matrices[0].plan_hash, m.plan_hash
        )));
    }
    matrices
        .iter()
        .map(|m| MeasureTable::build(m, set_size(m), &EloParams::default(), m.seed))
        .collect()
}

fn set_size(m: &FitnessMatrix) -> usize {
    let mut best = 0;
    for labels in [&m.rows, &m.cols] {
        for l in labels.iter() {
            let n = labels
                .iter()
                .filter(|o| o.variant == l.variant && o.replication == l.replication)
                .count();
            best = best.max(n);
        }
    }
    best
}

pub fn write_tables(dir: &Path, table: &MeasureTable) -> Result<()> {
    write_atomic(&dir.join("summary.csv"), table.summary_csv().as_bytes())?;
    write_atomic(
        &dir.join("replications.csv"),
        table.replications_csv().as_bytes(),
    )?;
    write_atomic(&dir.join("table.txt"), table.to_text().as_bytes())?;
    write_json(&dir.join("measures.json"), table)
}
