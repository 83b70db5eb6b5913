use gameqd::model::{EnvId, RunConfig, Side, Strategy};
use gameqd::runner::{
    evaluations_per_generation, run_game, step_generation, RunDir, RunManifest, RunState,
};
use gameqd::Error;

fn tiny(strategy: Strategy, seed: u64) -> RunConfig {
    let mut c = RunConfig::new(EnvId::CatMouse, strategy, seed);
    c.n_gen = 2;
    c.n_task = 3;
    c.n_cell = 2;
    c.n_budget = 40;
    c.physics.cat_mouse.steps = 40;
    c
}

#[test]
fn single_generation_is_red_against_random_blue() {
    let mut c = tiny(Strategy::Behavior, 3);
    c.n_gen = 1;
    let out = run_game::<f64>(&c).unwrap();
    let m = &out.manifest;
    assert!(m.complete);
    assert_eq!(m.generations.len(), 1);
    assert_eq!(m.generations[0].evolving_side, Side::Red);
    assert_eq!(m.generations[0].task_side, Side::Blue);
    assert_eq!(m.generations[0].bootstrap_records, 0);
    let fin = m.final_tasks.as_ref().unwrap();
    assert_eq!(fin.red.side, Side::Red);
    assert_eq!(fin.blue.side, Side::Blue);
}

#[test]
fn manifests_are_byte_identical() {
    let c = tiny(Strategy::Pareto, 17);
    let a = serde_json::to_string(&run_game::<f64>(&c).unwrap().manifest).unwrap();
    let b = serde_json::to_string(&run_game::<f64>(&c).unwrap().manifest).unwrap();
    assert_eq!(a, b);
    assert!(!a.contains("time"));
}

#[test]
fn bootstrap_flips_perspective() {
    let c = tiny(Strategy::Random, 5);
    let mut state = RunState::<f64>::fresh(&c);
    let g1 = step_generation(&c, &mut state).unwrap();
    assert_eq!(state.bootstrap.len(), c.n_task * c.n_task);
    for (n, rec) in state.bootstrap.iter().enumerate() {
        let red_view = g1.selection.bootstrap_fitness[n / c.n_task][n % c.n_task];
        assert_eq!(rec.fitness, 1.0 - red_view);
        assert_eq!(rec.genome.side, Side::Blue);
        assert_eq!(rec.task, n / c.n_task);
    }
    let g2 = step_generation(&c, &mut state).unwrap();
    assert_eq!(g2.record.bootstrap_records, c.n_task * c.n_task);
    assert_eq!(g2.record.evolving_side, Side::Blue);
    assert_eq!(g2.record.task_side, Side::Red);
}

#[test]
fn strategies_spend_identical_totals() {
    let mut totals = Vec::new();
    for s in Strategy::ALL {
        let c = tiny(s, 23);
        let m = run_game::<f64>(&c).unwrap().manifest;
        for r in &m.generations {
            assert_eq!(r.evaluations.total(), evaluations_per_generation(&c), "{s}");
        }
        totals.push(m.total_evaluations);
    }
    assert!(totals.iter().all(|&t| t == totals[0]), "{totals:?}");
}

#[test]
fn f32_runs_too() {
    let mut c = tiny(Strategy::Ranking, 2);
    c.n_gen = 1;
    let m = run_game::<f32>(&c).unwrap().manifest;
    assert!(m.complete);
}

#[test]
fn resume_reproduces_uninterrupted_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = tiny(Strategy::Ranking, 31);
    c.n_gen = 3;
    let full = RunDir::new(tmp.path().join("full"));
    full.run::<f64>(&c, false, false).unwrap();

    let cut = RunDir::new(tmp.path().join("cut"));
    let partial: RunManifest<f64> = cut.run_until(&c, false, false, 1).unwrap();
    assert!(!partial.complete);
    assert_eq!(partial.generations.len(), 1);
    // plain rerun refuses to touch the directory
    assert!(matches!(
        cut.run::<f64>(&c, false, false),
        Err(Error::Usage(_))
    ));
    cut.run::<f64>(&c, false, true).unwrap();

    let read = |d: &RunDir, f: &str| std::fs::read(d.root().join(f)).unwrap();
    assert_eq!(read(&full, "manifest.json"), read(&cut, "manifest.json"));
    for g in ["gen_001", "gen_002", "gen_003"] {
        for f in ["archives.json", "evals.jsonl", "selection.json"] {
            let p = format!("{g}/{f}");
            assert_eq!(read(&full, &p), read(&cut, &p), "{p}");
        }
    }
    let m: RunManifest<f64> = cut.load_manifest().unwrap();
    assert!(m.complete);
    let red = cut.final_archives(&m, Side::Red).unwrap();
    assert_eq!(red.generation, 3);
    assert_eq!(cut.load_eval_log(2).unwrap().len(), c.n_budget);

    // a different configuration cannot resume this directory
    let mut other = c.clone();
    other.master_seed += 1;
    assert!(matches!(
        cut.load_state::<f64>(&other),
        Err(Error::Integrity(_))
    ));
    // --force starts over
    cut.run::<f64>(&c, true, false).unwrap();
    assert_eq!(read(&full, "manifest.json"), read(&cut, "manifest.json"));
}
