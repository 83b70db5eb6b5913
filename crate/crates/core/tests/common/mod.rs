//! Straight-line reference interpreter of the growing archive update,
//! written independently of the library (plain vectors, no helpers).
#![allow(dead_code)]

use gameqd::archive::{GrowingArchive, UpdateOutcome};
use gameqd::model::BehaviorDescriptor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub id: u32,
    pub f: f64,
    pub b: Vec<f64>,
}

pub struct Reference {
    pub cap: usize,
    pub backup_cap: usize,
    pub c: Vec<Vec<f64>>,
    pub e: Vec<Item>,
    pub bk: Vec<Vec<Item>>,
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

pub fn closest(c: &[Vec<f64>], b: &[f64]) -> usize {
    let mut arg = 0;
    for i in 1..c.len() {
        if euclid(&c[i], b) < euclid(&c[arg], b) {
            arg = i;
        }
    }
    arg
}

impl Reference {
    pub fn insert(&mut self, it: Item) {
        if self.c.is_empty() {
            self.c.push(it.b.clone());
            self.e.push(it.clone());
            self.bk.push(vec![it]);
            return;
        }
        let id = closest(&self.c, &it.b);
        let d = euclid(&self.c[id], &it.b);
        if self.c.len() < self.cap && d > 0.0 {
            self.c.push(it.b.clone());
            self.e.push(it.clone());
            self.bk.push(vec![it]);
            self.repair();
            return;
        }
        if self.c.len() == self.cap && self.cap >= 2 {
            let mut dmin = f64::INFINITY;
            let (mut j, mut k) = (0, 0);
            for a in 0..self.c.len() {
                for b in a + 1..self.c.len() {
                    let dd = euclid(&self.c[a], &self.c[b]);
                    if dd < dmin {
                        dmin = dd;
                        j = a;
                        k = b;
                    }
                }
            }
            if d > dmin {
                let mut dj = f64::INFINITY;
                let mut dk = f64::INFINITY;
                for o in 0..self.c.len() {
                    if o != j {
                        dj = dj.min(euclid(&self.c[o], &self.c[j]));
                    }
                    if o != k {
                        dk = dk.min(euclid(&self.c[o], &self.c[k]));
                    }
                }
                let slot = if dj < dk { j } else { k };
                self.c[slot] = it.b.clone();
                self.e[slot] = it.clone();
                self.bk[slot] = vec![it];
                self.repair();
                return;
            }
        }
        if it.f > self.e[id].f {
            self.e[id] = it.clone();
            self.bk[id].push(it);
            if self.bk[id].len() > self.backup_cap {
                let n = self.bk[id].len();
                let mut worst = 1;
                for x in 1..n - 1 {
                    if self.bk[id][x].f < self.bk[id][worst].f {
                        worst = x;
                    }
                }
                self.bk[id].remove(worst);
            }
        }
    }

    fn repair(&mut self) {
        for i in 0..self.c.len() {
            if closest(&self.c, &self.e[i].b) != i {
                let mut pick: Option<Item> = None;
                for cand in &self.bk[i] {
                    if closest(&self.c, &cand.b) == i
                        && pick.as_ref().map_or(true, |p| cand.f > p.f)
                    {
                        pick = Some(cand.clone());
                    }
                }
                if let Some(p) = pick {
                    self.e[i] = p;
                }
            }
        }
    }
}

pub fn draw(rng: &mut ChaCha8Rng, dim: usize, quantized: bool) -> (f64, Vec<f64>) {
    if quantized {
        // coarse values provoke exact duplicates and distance ties
        let f = rng.random_range(0..5) as f64 / 4.0;
        let b = (0..dim)
            .map(|_| rng.random_range(0..4) as f64 / 3.0)
            .collect();
        (f, b)
    } else {
        let f = rng.random::<f64>();
        let b = (0..dim).map(|_| rng.random::<f64>()).collect();
        (f, b)
    }
}

pub fn snapshot(a: &GrowingArchive<u32, f64>) -> (Vec<Vec<f64>>, Vec<Item>, Vec<Vec<Item>>) {
    let conv = |e: &gameqd::archive::Entry<u32, f64>| Item {
        id: e.solution,
        f: e.fitness,
        b: e.behavior.0.clone(),
    };
    (
        a.centroids().iter().map(|c| c.0.clone()).collect(),
        a.elites().iter().map(conv).collect(),
        (0..a.len())
            .map(|i| a.backups(i).iter().map(conv).collect())
            .collect(),
    )
}

pub fn run_sequence(seed: u64, backup_cap: usize) {
    let (n_cell, dim, len) = (10, 4, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quantized = seed % 2 == 0;
    let mut lib = GrowingArchive::<u32, f64>::new(n_cell, backup_cap);
    let mut oracle = Reference {
        cap: n_cell,
        backup_cap,
        c: vec![],
        e: vec![],
        bk: vec![],
    };
    for id in 0..len {
        let (f, b) = draw(&mut rng, dim, quantized);
        let before = lib.elites().iter().map(|e| e.fitness).collect::<Vec<_>>();
        let full = lib.len() == n_cell;
        let growth_expected = full && {
            let (_, near) = {
                let c = &oracle.c;
                let i = closest(c, &b);
                (i, euclid(&c[i], &b))
            };
            let mut dmin = f64::INFINITY;
            for x in 0..oracle.c.len() {
                for y in x + 1..oracle.c.len() {
                    dmin = dmin.min(euclid(&oracle.c[x], &oracle.c[y]));
                }
            }
            near > dmin
        };

        let out = lib.update(id, f, BehaviorDescriptor(b.clone()));
        oracle.insert(Item { id, f, b });

        assert!(lib.len() <= n_cell);
        lib.check_invariants()
            .unwrap_or_else(|e| panic!("seed {seed} step {id}: {e}"));
        assert_eq!(
            matches!(out, UpdateOutcome::Grew { .. }),
            growth_expected,
            "seed {seed} step {id}: growth condition"
        );
        if !out.changed_centroids() {
            for (old, new) in before.iter().zip(lib.elites()) {
                assert!(
                    new.fitness >= *old,
                    "seed {seed} step {id}: fitness decreased"
                );
            }
        }
        let (c, e, bk) = snapshot(&lib);
        assert_eq!(c, oracle.c, "seed {seed} step {id}: centroids");
        assert_eq!(e, oracle.e, "seed {seed} step {id}: elites");
        assert_eq!(bk, oracle.bk, "seed {seed} step {id}: backups");
    }
}
