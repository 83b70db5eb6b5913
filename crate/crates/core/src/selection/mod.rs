//! Task selection: picking the next generation's opponents from the elites
//! of all task archives, and building the bootstrap set that seeds the next
//! generation's archives.

mod kmeans;
mod nsga3;
mod ranking;

pub use kmeans::{kmeans, KMeans, MAX_ITERATIONS};
pub use nsga3::{
    dominates, non_dominated_fronts, nsga3_select, nsga3_select_with, simplex_directions,
    Nsga3Selection,
};
pub use ranking::ranking_vector;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::Entry;
use crate::env::{descriptor_dim, evaluate_duel};
use crate::error::{Error, Result};
use crate::model::{
    ctx, derive_seed, rng_from_seed, BehaviorDescriptor, Genome, RunConfig, Side, Strategy,
};
use crate::mtmb::{BootstrapRecord, TaskArchive, TaskSet};
use crate::scalar::Scalar;

/// Position of an elite: its task archive and cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EliteId {
    pub task: usize,
    pub cell: usize,
}

/// All elites of all archives, task-major.
pub fn elite_pool<F: Scalar>(archives: &[TaskArchive<F>]) -> Vec<(EliteId, &Entry<Genome<F>, F>)> {
    archives
        .iter()
        .enumerate()
        .flat_map(|(task, a)| {
            a.elites()
                .iter()
                .enumerate()
                .map(move |(cell, e)| (EliteId { task, cell }, e))
        })
        .collect()
}

/// One duel of a selection tournament: the evolving side's fitness and the
/// opponent's fitness and (sparse) behavior.
#[derive(Clone, Debug, PartialEq)]
pub struct DuelRecord<F> {
    pub fitness: F,
    pub opponent_fitness: F,
    pub opponent_behavior: Vec<(u32, F)>,
}

/// Fitness of every (row genome, old task) pair; rows are elites or newly
/// selected tasks depending on the strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct TournamentLog<F> {
    pub rows: Vec<EliteId>,
    pub records: Vec<Vec<DuelRecord<F>>>,
}

impl<F: Scalar> TournamentLog<F> {
    pub fn fitness_matrix(&self) -> Vec<Vec<F>> {
        self.records
            .iter()
            .map(|r| r.iter().map(|d| d.fitness).collect())
            .collect()
    }

    pub fn evaluations(&self) -> usize {
        self.records.iter().map(Vec::len).sum()
    }
}

fn duel<F: Scalar>(
    cfg: &RunConfig,
    own: &Genome<F>,
    old: &Genome<F>,
    seed: u64,
) -> Result<DuelRecord<F>> {
    let side = own.side;
    let (red, blue) = match side {
        Side::Red => (own, old),
        Side::Blue => (old, own),
    };
    let out = evaluate_duel(cfg.env, &cfg.physics, red, blue, seed)?;
    let opp = out.behavior(side.opponent());
    Ok(DuelRecord {
        fitness: out.fitness.get(side),
        opponent_fitness: out.fitness.get(side.opponent()),
        opponent_behavior: opp
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != F::zero())
            .map(|(i, &x)| (i as u32, x))
            .collect(),
    })
}

/// Plays every row genome against every old task, in parallel. Duel seeds are
/// `(tag, generation, row, old task)`.
pub fn run_tournament<F: Scalar>(
    cfg: &RunConfig,
    generation: usize,
    tag: u64,
    rows: &[(EliteId, &Genome<F>)],
    old_tasks: &TaskSet<F>,
) -> Result<TournamentLog<F>> {
    let n_old = old_tasks.len();
    let flat: Vec<DuelRecord<F>> = (0..rows.len() * n_old)
        .into_par_iter()
        .map(|p| {
            let (r, t) = (p / n_old, p % n_old);
            let seed = derive_seed(
                cfg.master_seed,
                &[tag, generation as u64, r as u64, t as u64],
            );
            duel(cfg, rows[r].1, &old_tasks.tasks[t], seed)
        })
        .collect::<Result<_>>()?;
    let mut it = flat.into_iter();
    let records = (0..rows.len())
        .map(|_| it.by_ref().take(n_old).collect())
        .collect();
    Ok(TournamentLog {
        rows: rows.iter().map(|r| r.0).collect(),
        records,
    })
}

/// Bootstrap records for the next generation: for each selected row `j` and
/// old task `t`, the old task genome with its own fitness and behavior in that
/// duel, filed under new task `j`.
fn bootstrap_from<F: Scalar>(
    log: &TournamentLog<F>,
    rows: &[usize],
    old_tasks: &TaskSet<F>,
    dim: usize,
) -> Vec<BootstrapRecord<F>> {
    let mut out = Vec::with_capacity(rows.len() * old_tasks.len());
    for (j, &r) in rows.iter().enumerate() {
        for (t, d) in log.records[r].iter().enumerate() {
            let mut b = vec![F::zero(); dim];
            for &(i, x) in &d.opponent_behavior {
                b[i as usize] = x;
            }
            out.push(BootstrapRecord {
                task: j,
                genome: old_tasks.tasks[t].clone(),
                fitness: d.opponent_fitness,
                behavior: BehaviorDescriptor(b),
            });
        }
    }
    out
}

/// For each non-empty cluster (in cluster order) the member with the highest
/// quality, lowest index on ties.
pub fn pick_per_cluster<F: Scalar>(assignments: &[usize], k: usize, quality: &[F]) -> Vec<usize> {
    let mut best: Vec<Option<usize>> = vec![None; k];
    for (i, &c) in assignments.iter().enumerate() {
        if best[c].is_none_or(|b| quality[i] > quality[b]) {
            best[c] = Some(i);
        }
    }
    best.into_iter().flatten().collect()
}

/// Pads `selected` to `k` entries with uniform draws (with replacement) from
/// `0..pool`. Returns the number of padded entries.
pub fn pad_selection(selected: &mut Vec<usize>, pool: usize, k: usize, seed: u64) -> usize {
    let missing = k.saturating_sub(selected.len());
    if missing > 0 {
        log::warn!(
            "only {} distinct tasks for {k} slots; padding {missing} from {pool} elites",
            selected.len()
        );
        let mut rng = rng_from_seed(seed);
        for _ in 0..missing {
            selected.push(rng.random_range(0..pool));
        }
    }
    missing
}

/// Random selection kernel: `min(k, pool)` distinct indices, uniformly.
pub fn random_pick(pool: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_from_seed(seed);
    index::sample(&mut rng, pool, k.min(pool)).into_vec()
}

/// Behavior selection kernel: cluster behaviors and keep the fittest per cluster.
pub fn behavior_pick<F: Scalar, P: AsRef<[F]>>(
    behaviors: &[P],
    fitness: &[F],
    k: usize,
    seed: u64,
) -> Result<(Vec<usize>, Option<KMeans<F>>)> {
    if behaviors.len() <= k {
        return Ok(((0..behaviors.len()).collect(), None));
    }
    let km = kmeans(behaviors, k, seed)?;
    Ok((pick_per_cluster(&km.assignments, k, fitness), Some(km)))
}

/// Ranking selection kernel: cluster ranking vectors of the tournament rows
/// and keep, per cluster, the row with the highest mean fitness.
pub fn ranking_pick<F: Scalar>(
    fitness: &[Vec<F>],
    k: usize,
    seed: u64,
) -> Result<(Vec<usize>, Option<KMeans<F>>)> {
    if fitness.len() <= k {
        return Ok(((0..fitness.len()).collect(), None));
    }
    let ranks: Vec<Vec<F>> = fitness
        .iter()
        .map(|f| ranking_vector(f))
        .collect::<Result<_>>()?;
    let means: Vec<F> = fitness
        .iter()
        .map(|f| f.iter().copied().sum::<F>() / F::from_usize(f.len()).unwrap())
        .collect();
    let km = kmeans(&ranks, k, seed)?;
    Ok((pick_per_cluster(&km.assignments, k, &means), Some(km)))
}

/// Per-generation record of what a selector did.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub generation: usize,
    pub strategy: Strategy,
    pub evolving_side: Side,
    pub pool_size: usize,
    pub selected: Vec<EliteId>,
    pub padded: usize,
    pub cluster_sizes: Vec<usize>,
    pub kmeans_objective: Vec<f64>,
    pub front_sizes: Vec<usize>,
    pub tournament_evaluations: usize,
    pub bootstrap_evaluations: usize,
    /// Elite-versus-old-task fitness (evolving side), ranking and Pareto only.
    pub tournament_fitness: Vec<Vec<f64>>,
    /// New-task-versus-old-task fitness (evolving side) behind the bootstrap set.
    pub bootstrap_fitness: Vec<Vec<f64>>,
}

impl SelectionReport {
    pub fn evaluations(&self) -> usize {
        self.tournament_evaluations + self.bootstrap_evaluations
    }
}

#[derive(Clone, Debug)]
pub struct SelectionOutcome<F: Scalar> {
    pub tasks: TaskSet<F>,
    pub bootstrap: Vec<BootstrapRecord<F>>,
    pub report: SelectionReport,
}

fn to_f64<F: Scalar>(m: &[Vec<F>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|r| r.iter().map(|x| x.to_f64_lossy()).collect())
        .collect()
}

/// Runs the configured strategy after generation `generation`, in which
/// `side` was evolved against `old_tasks`.
pub fn select_tasks<F: Scalar>(
    cfg: &RunConfig,
    generation: usize,
    side: Side,
    archives: &[TaskArchive<F>],
    old_tasks: &TaskSet<F>,
) -> Result<SelectionOutcome<F>> {
    let pool = elite_pool(archives);
    if pool.is_empty() {
        return Err(Error::usage("task selection on empty archives"));
    }
    let k = cfg.n_task;
    let seed = derive_seed(cfg.master_seed, &[ctx::SELECT, generation as u64]);
    let pad_seed = derive_seed(cfg.master_seed, &[ctx::PAD, generation as u64]);
    let dim = descriptor_dim(cfg.env, &cfg.physics);
    let mut report = SelectionReport {
        generation,
        strategy: cfg.strategy,
        evolving_side: side,
        pool_size: pool.len(),
        selected: Vec::new(),
        padded: 0,
        cluster_sizes: Vec::new(),
        kmeans_objective: Vec::new(),
        front_sizes: Vec::new(),
        tournament_evaluations: 0,
        bootstrap_evaluations: 0,
        tournament_fitness: Vec::new(),
        bootstrap_fitness: Vec::new(),
    };

    let (selected, tournament) = match cfg.strategy {
        Strategy::Behavior => {
            let behaviors: Vec<&[F]> = pool.iter().map(|(_, e)| e.behavior.as_slice()).collect();
            let fitness: Vec<F> = pool.iter().map(|(_, e)| e.fitness).collect();
            let (mut sel, km) = behavior_pick(&behaviors, &fitness, k, seed)?;
            if let Some(km) = km {
                report.cluster_sizes = km.cluster_sizes();
                report.kmeans_objective = km.objective.iter().map(|x| x.to_f64_lossy()).collect();
            }
            report.padded = pad_selection(&mut sel, pool.len(), k, pad_seed);
            (sel, None)
        }
        Strategy::Random => {
            let mut sel = random_pick(pool.len(), k, seed);
            report.padded = pad_selection(&mut sel, pool.len(), k, pad_seed);
            (sel, None)
        }
        Strategy::Ranking | Strategy::Pareto => {
            let rows: Vec<(EliteId, &Genome<F>)> =
                pool.iter().map(|(id, e)| (*id, &e.solution)).collect();
            let log = run_tournament(cfg, generation, ctx::SELECT_DUEL, &rows, old_tasks)?;
            let fit = log.fitness_matrix();
            report.tournament_evaluations = log.evaluations();
            report.tournament_fitness = to_f64(&fit);
            let mut sel = if cfg.strategy == Strategy::Ranking {
                let (sel, km) = ranking_pick(&fit, k, seed)?;
                if let Some(km) = km {
                    report.cluster_sizes = km.cluster_sizes();
                    report.kmeans_objective =
                        km.objective.iter().map(|x| x.to_f64_lossy()).collect();
                }
                sel
            } else if fit.len() <= k {
                (0..fit.len()).collect()
            } else {
                let s = nsga3_select(&fit, k, seed)?;
                report.front_sizes = s.fronts.iter().map(Vec::len).collect();
                s.selected
            };
            report.padded = pad_selection(&mut sel, pool.len(), k, pad_seed);
            (sel, Some(log))
        }
    };

    report.selected = selected.iter().map(|&i| pool[i].0).collect();
    let tasks = TaskSet::new(
        generation + 1,
        side,
        selected
            .iter()
            .map(|&i| pool[i].1.solution.clone())
            .collect(),
    )?;

    let (boot_log, boot_rows) = match tournament {
        Some(log) => (log, selected.clone()),
        None => {
            let rows: Vec<(EliteId, &Genome<F>)> = selected
                .iter()
                .map(|&i| (pool[i].0, &pool[i].1.solution))
                .collect();
            let log = run_tournament(cfg, generation, ctx::BOOT_DUEL, &rows, old_tasks)?;
            report.bootstrap_evaluations = log.evaluations();
            (log, (0..selected.len()).collect())
        }
    };
    report.bootstrap_fitness = boot_rows
        .iter()
        .map(|&r| {
            boot_log.records[r]
                .iter()
                .map(|d| d.fitness.to_f64_lossy())
                .collect()
        })
        .collect();
    let bootstrap = bootstrap_from(&boot_log, &boot_rows, old_tasks, dim);
    Ok(SelectionOutcome {
        tasks,
        bootstrap,
        report,
    })
}
