//! Multi-task multi-behavior MAP-Elites: one archive per task, a shared
//! variation pool made of every elite of every archive.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::GrowingArchive;
use crate::env::evaluate_duel;
use crate::error::{Error, Result};
use crate::model::{ctx, derive_seed, rng_from_seed, BehaviorDescriptor, Genome, RunConfig, Side};
use crate::scalar::Scalar;

pub type TaskArchive<F> = GrowingArchive<Genome<F>, F>;

/// The opponents of one generation. All genomes belong to `side`, the side
/// that is *not* being evolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct TaskSet<F> {
    pub generation: usize,
    pub side: Side,
    pub tasks: Vec<Genome<F>>,
}

impl<F: Scalar> TaskSet<F> {
    pub fn new(generation: usize, side: Side, tasks: Vec<Genome<F>>) -> Result<Self> {
        if let Some(g) = tasks.iter().find(|g| g.side != side) {
            return Err(Error::usage(format!(
                "task set of {side} genomes contains a {} genome",
                g.side
            )));
        }
        Ok(Self {
            generation,
            side,
            tasks,
        })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

/// A pre-evaluated solution inserted before the main loop. Fitness and
/// behavior are from the perspective of the evolving side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct BootstrapRecord<F> {
    pub task: usize,
    pub genome: Genome<F>,
    pub fitness: F,
    pub behavior: BehaviorDescriptor<F>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Random,
    Mutation {
        parent_task: usize,
        parent_cell: usize,
    },
}

/// One line of the evaluation log. The behavior is stored sparsely as
/// `(index, value)` pairs of its non-zero entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub gen: usize,
    pub iter: usize,
    pub task_id: usize,
    pub candidate_provenance: Provenance,
    pub duel_seed: u64,
    pub fitness: f64,
    pub behavior: Vec<(u32, f64)>,
}

impl EvalRecord {
    pub fn dense_behavior(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for &(i, x) in &self.behavior {
            v[i as usize] = x;
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MtmbStats {
    pub evaluations: usize,
    pub random: usize,
    pub mutated: usize,
    pub bootstrap_applied: usize,
}

#[derive(Clone, Debug)]
pub struct MtmbOutput<F: Scalar> {
    pub archives: Vec<TaskArchive<F>>,
    pub log: Vec<EvalRecord>,
    pub stats: MtmbStats,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mutation {
    pub rate: f64,
    pub sigma: f64,
}

impl Mutation {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            rate: cfg.mutation_rate,
            sigma: cfg.mutation_sigma,
        }
    }

    /// Number of perturbed parameters for a genome of length `len`.
    pub fn count(&self, len: usize) -> usize {
        ((self.rate * len as f64).round() as usize).min(len)
    }
}

/// Adds N(0, sigma) noise to `round(rate * len)` distinct parameters.
pub fn mutate<F: Scalar, R: Rng + ?Sized>(
    parent: &Genome<F>,
    m: &Mutation,
    rng: &mut R,
) -> Genome<F> {
    let mut child = parent.clone();
    let k = m.count(child.params.len());
    if k == 0 {
        return child;
    }
    let noise = Normal::new(0.0, m.sigma).expect("validated sigma");
    for i in index::sample(rng, child.params.len(), k) {
        child.params[i] += F::lit(noise.sample(rng));
    }
    child
}

pub fn mutate_seeded<F: Scalar>(parent: &Genome<F>, m: &Mutation, seed: u64) -> Genome<F> {
    mutate(parent, m, &mut rng_from_seed(seed))
}

/// Plays `candidate` (on the evolving side) against `task` and returns the
/// evolving side's fitness and behavior.
pub fn evaluate_against<F: Scalar>(
    cfg: &RunConfig,
    candidate: &Genome<F>,
    task: &Genome<F>,
    duel_seed: u64,
) -> Result<(F, BehaviorDescriptor<F>)> {
    let side = candidate.side;
    let (red, blue) = match side {
        Side::Red => (candidate, task),
        Side::Blue => (task, candidate),
    };
    let out = evaluate_duel(cfg.env, &cfg.physics, red, blue, duel_seed)?;
    let behavior = match side {
        Side::Red => out.behavior_red,
        Side::Blue => out.behavior_blue,
    };
    Ok((out.fitness.get(side), behavior))
}

/// A candidate before evaluation.
#[derive(Clone, Debug)]
pub struct Proposal<F> {
    pub iter: usize,
    pub task: usize,
    pub genome: Genome<F>,
    pub provenance: Provenance,
    pub duel_seed: u64,
}

fn propose<F: Scalar>(
    cfg: &RunConfig,
    gen: usize,
    iter: usize,
    side: Side,
    n_task: usize,
    archives: &[TaskArchive<F>],
    elite_count: usize,
) -> Proposal<F> {
    let mut rng = rng_from_seed(derive_seed(
        cfg.master_seed,
        &[ctx::MTMB, gen as u64, iter as u64],
    ));
    let task = rng.random_range(0..n_task);
    let (genome, provenance) = if elite_count < cfg.effective_n_init() {
        (Genome::random(cfg.env, side, &mut rng), Provenance::Random)
    } else {
        let mut pick = rng.random_range(0..elite_count);
        let mut found = None;
        for (t, a) in archives.iter().enumerate() {
            if pick < a.len() {
                found = Some((t, pick));
                break;
            }
            pick -= a.len();
        }
        let (parent_task, parent_cell) = found.expect("pick within elite count");
        let parent = &archives[parent_task].elites()[parent_cell].solution;
        (
            mutate(parent, &Mutation::from_config(cfg), &mut rng),
            Provenance::Mutation {
                parent_task,
                parent_cell,
            },
        )
    };
    Proposal {
        iter,
        task,
        genome,
        provenance,
        duel_seed: derive_seed(cfg.master_seed, &[ctx::DUEL, gen as u64, iter as u64]),
    }
}

/// Runs one generation of the inner loop for `side` against `tasks`.
///
/// Each batch of `cfg.batch_size` candidates is proposed from the same
/// archive snapshot, evaluated in parallel and inserted in iteration order;
/// the result depends only on the configuration, seeds and batch size.
pub fn run_mtmb<F: Scalar>(
    cfg: &RunConfig,
    side: Side,
    tasks: &TaskSet<F>,
    bootstrap: &[BootstrapRecord<F>],
    budget: usize,
) -> Result<MtmbOutput<F>> {
    run_mtmb_observed(cfg, side, tasks, bootstrap, budget, &mut |_, _| {})
}

/// [`run_mtmb`] with a hook that sees every proposal together with the
/// archives it was proposed from.
pub fn run_mtmb_observed<F: Scalar>(
    cfg: &RunConfig,
    side: Side,
    tasks: &TaskSet<F>,
    bootstrap: &[BootstrapRecord<F>],
    budget: usize,
    observer: &mut dyn FnMut(&[TaskArchive<F>], &Proposal<F>),
) -> Result<MtmbOutput<F>> {
    if tasks.side == side {
        return Err(Error::usage("tasks must belong to the opposing side"));
    }
    let n_task = tasks.len();
    if n_task == 0 {
        return Err(Error::usage("empty task set"));
    }
    let gen = tasks.generation;
    let mut archives: Vec<TaskArchive<F>> = (0..n_task)
        .map(|_| GrowingArchive::new(cfg.n_cell, cfg.backup_cap))
        .collect();
    let mut stats = MtmbStats::default();

    for r in bootstrap {
        if r.task >= n_task {
            return Err(Error::usage(format!(
                "bootstrap record targets task {} of {n_task}",
                r.task
            )));
        }
        archives[r.task].update(r.genome.clone(), r.fitness, r.behavior.clone());
        stats.bootstrap_applied += 1;
    }

    let mut log = Vec::with_capacity(budget);
    let mut iter = 0;
    while iter < budget {
        let batch = cfg.batch_size.min(budget - iter);
        let elite_count: usize = archives.iter().map(|a| a.len()).sum();
        let candidates: Vec<Proposal<F>> = (iter..iter + batch)
            .map(|i| propose(cfg, gen, i, side, n_task, &archives, elite_count))
            .collect();
        for c in &candidates {
            observer(&archives, c);
        }
        let results: Vec<Result<(F, BehaviorDescriptor<F>)>> = candidates
            .par_iter()
            .map(|c| evaluate_against(cfg, &c.genome, &tasks.tasks[c.task], c.duel_seed))
            .collect();
        for (c, res) in candidates.into_iter().zip(results) {
            let (fitness, behavior) = res.map_err(|e| replay_report(e, gen, &c))?;
            match c.provenance {
                Provenance::Random => stats.random += 1,
                Provenance::Mutation { .. } => stats.mutated += 1,
            }
            stats.evaluations += 1;
            log.push(EvalRecord {
                gen,
                iter: c.iter,
                task_id: c.task,
                candidate_provenance: c.provenance,
                duel_seed: c.duel_seed,
                fitness: fitness.to_f64_lossy(),
                behavior: sparse(&behavior),
            });
            archives[c.task].update(c.genome, fitness, behavior);
        }
        iter += batch;
    }
    log::debug!(
        "generation {gen} ({side}): {} evaluations, {} random, {} mutated",
        stats.evaluations,
        stats.random,
        stats.mutated
    );
    Ok(MtmbOutput {
        archives,
        log,
        stats,
    })
}

fn replay_report<F>(e: Error, gen: usize, c: &Proposal<F>) -> Error {
    match e {
        Error::Evaluation { env, step, message } => Error::Evaluation {
            env,
            step,
            message: format!(
                "{message} (generation {gen}, iteration {}, task {}, duel seed {})",
                c.iter, c.task, c.duel_seed
            ),
        },
        other => other,
    }
}

fn sparse<F: Scalar>(b: &BehaviorDescriptor<F>) -> Vec<(u32, f64)> {
    b.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != F::zero())
        .map(|(i, x)| (i as u32, x.to_f64_lossy()))
        .collect()
}

/// Writes the log as JSON lines.
pub fn write_eval_log<W: std::io::Write>(log: &[EvalRecord], mut w: W) -> std::io::Result<()> {
    for r in log {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_eval_log<R: std::io::BufRead>(r: R) -> Result<Vec<EvalRecord>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line =
            line.map_err(|e| Error::integrity(format!("evaluation log line {}: {e}", n + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::integrity(format!("evaluation log line {}: {e}", n + 1)))?,
        );
    }
    Ok(out)
}
