//! Growing unstructured archive: a CVT-like set of at most `capacity` cells
//! whose centroids are taken from observed behaviors.
//!
//! Update rule for a candidate `(s, f, b)`:
//!
//! 1. Not full: `b` becomes the centroid of a new cell holding `(s, f, b)`.
//!    A `b` identical to an existing centroid never opens a duplicate cell
//!    (it could never own a behavior); it competes for that cell instead.
//! 2. Full: with `d_min` the smallest centroid pair distance and `d` the
//!    distance from `b` to its nearest centroid, `d > d_min` replaces one
//!    member of the closest pair by a fresh cell for `b`.
//! 3. Otherwise `(s, f, b)` replaces the elite of its cell when `f` is
//!    strictly larger and is appended to that cell's backups.
//!
//! After any centroid change, every elite that no longer maps to its own
//! cell is replaced by the fittest backup of that cell that does.
//!
//! Distances are Euclidean; ties in nearest-centroid queries go to the lowest
//! index and ties between pairs to the lexicographically lowest pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BehaviorDescriptor;
use crate::scalar::{dist, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize, F: Scalar",
    deserialize = "S: Deserialize<'de>, F: Scalar"
))]
pub struct Entry<S, F> {
    pub solution: S,
    pub fitness: F,
    pub behavior: BehaviorDescriptor<F>,
}

/// What an update did to the archive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateOutcome {
    /// A new cell was appended at this index.
    Appended(usize),
    /// The archive was full and a novel behavior replaced one member of the
    /// closest centroid pair.
    Grew { cell: usize, pair: (usize, usize) },
    /// The candidate became the elite of this cell.
    Improved(usize),
    /// The candidate was discarded; this is the cell it mapped to.
    Rejected(usize),
}

impl UpdateOutcome {
    pub fn changed_centroids(self) -> bool {
        matches!(
            self,
            UpdateOutcome::Appended(_) | UpdateOutcome::Grew { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize, F: Scalar",
    deserialize = "S: Deserialize<'de>, F: Scalar"
))]
pub struct GrowingArchive<S, F> {
    capacity: usize,
    backup_cap: usize,
    centroids: Vec<BehaviorDescriptor<F>>,
    elites: Vec<Entry<S, F>>,
    backups: Vec<Vec<Entry<S, F>>>,
}

/// Index of the centroid closest to `b`, lowest index on ties.
pub fn find_cell<F: Scalar, C: AsRef<[F]>>(centroids: &[C], b: &[F]) -> Result<usize> {
    if centroids.is_empty() {
        return Err(Error::usage("find_cell on an empty centroid list"));
    }
    let mut best = 0;
    let mut best_d = dist(centroids[0].as_ref(), b);
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = dist(c.as_ref(), b);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    Ok(best)
}

/// Smallest pairwise centroid distance and its lexicographically lowest pair.
pub fn min_pairwise_distance<F: Scalar, C: AsRef<[F]>>(
    centroids: &[C],
) -> Result<(F, (usize, usize))> {
    if centroids.len() < 2 {
        return Err(Error::usage(
            "min_pairwise_distance needs at least two centroids",
        ));
    }
    let mut best = (dist(centroids[0].as_ref(), centroids[1].as_ref()), (0, 1));
    for i in 0..centroids.len() {
        for j in i + 1..centroids.len() {
            let d = dist(centroids[i].as_ref(), centroids[j].as_ref());
            if d < best.0 {
                best = (d, (i, j));
            }
        }
    }
    Ok(best)
}

fn nearest_other<F: Scalar>(centroids: &[BehaviorDescriptor<F>], i: usize) -> F {
    centroids
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, c)| dist(c.as_slice(), centroids[i].as_slice()))
        .fold(F::infinity(), F::min)
}

impl<S: Clone, F: Scalar> GrowingArchive<S, F> {
    pub fn new(capacity: usize, backup_cap: usize) -> Self {
        assert!(capacity >= 1, "archive capacity must be positive");
        assert!(backup_cap >= 2, "backup lists must hold founder and elite");
        Self {
            capacity,
            backup_cap,
            centroids: Vec::new(),
            elites: Vec::new(),
            backups: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn centroids(&self) -> &[BehaviorDescriptor<F>] {
        &self.centroids
    }

    pub fn elites(&self) -> &[Entry<S, F>] {
        &self.elites
    }

    pub fn backups(&self, cell: usize) -> &[Entry<S, F>] {
        &self.backups[cell]
    }

    pub fn best_fitness(&self) -> Option<F> {
        self.elites.iter().map(|e| e.fitness).reduce(F::max)
    }

    pub fn update(
        &mut self,
        solution: S,
        fitness: F,
        behavior: BehaviorDescriptor<F>,
    ) -> UpdateOutcome {
        let entry = Entry {
            solution,
            fitness,
            behavior,
        };
        let b = entry.behavior.as_slice();

        if self.centroids.is_empty() {
            return self.append(entry);
        }

        let id = find_cell(&self.centroids, b).expect("non-empty");
        if self.len() < self.capacity {
            if dist(self.centroids[id].as_slice(), b) > F::zero() {
                let outcome = self.append(entry);
                self.repair_holes();
                return outcome;
            }
            return self.compete(id, entry);
        }
        if self.capacity < 2 {
            return self.compete(id, entry);
        }

        let (d_min, (j, k)) = min_pairwise_distance(&self.centroids).expect("full archive");
        let d = dist(self.centroids[id].as_slice(), b);
        if d > d_min {
            let d_j = nearest_other(&self.centroids, j);
            let d_k = nearest_other(&self.centroids, k);
            let slot = if d_j < d_k { j } else { k };
            self.centroids[slot] = entry.behavior.clone();
            self.elites[slot] = entry.clone();
            self.backups[slot] = vec![entry];
            self.repair_holes();
            UpdateOutcome::Grew {
                cell: slot,
                pair: (j, k),
            }
        } else {
            self.compete(id, entry)
        }
    }

    fn append(&mut self, entry: Entry<S, F>) -> UpdateOutcome {
        let i = self.len();
        self.centroids.push(entry.behavior.clone());
        self.elites.push(entry.clone());
        self.backups.push(vec![entry]);
        UpdateOutcome::Appended(i)
    }

    fn compete(&mut self, id: usize, entry: Entry<S, F>) -> UpdateOutcome {
        if entry.fitness > self.elites[id].fitness {
            self.elites[id] = entry.clone();
            let list = &mut self.backups[id];
            list.push(entry);
            if list.len() > self.backup_cap {
                // never drop the founder (index 0) nor the new elite (last)
                let last = list.len() - 1;
                let mut drop = 1;
                for i in 2..last {
                    if list[i].fitness < list[drop].fitness {
                        drop = i;
                    }
                }
                list.remove(drop);
            }
            UpdateOutcome::Improved(id)
        } else {
            UpdateOutcome::Rejected(id)
        }
    }

    fn repair_holes(&mut self) {
        for i in 0..self.len() {
            let owner = find_cell(&self.centroids, self.elites[i].behavior.as_slice()).unwrap();
            if owner == i {
                continue;
            }
            let mut best: Option<&Entry<S, F>> = None;
            for e in &self.backups[i] {
                if find_cell(&self.centroids, e.behavior.as_slice()).unwrap() == i
                    && best.is_none_or(|b| e.fitness > b.fitness)
                {
                    best = Some(e);
                }
            }
            if let Some(e) = best {
                self.elites[i] = e.clone();
            }
        }
    }

    /// Checks capacity, alignment, self-consistency and backup membership.
    pub fn check_invariants(&self) -> std::result::Result<(), String>
    where
        S: PartialEq,
    {
        let n = self.len();
        if n > self.capacity {
            return Err(format!("size {n} exceeds capacity {}", self.capacity));
        }
        if self.elites.len() != n || self.backups.len() != n {
            return Err("centroids, elites and backups are misaligned".into());
        }
        for (i, e) in self.elites.iter().enumerate() {
            let owner = find_cell(&self.centroids, e.behavior.as_slice()).unwrap();
            if owner != i {
                return Err(format!("elite of cell {i} maps to cell {owner}"));
            }
            if !self.backups[i].contains(e) {
                return Err(format!("backups of cell {i} miss its elite"));
            }
            if self.backups[i].len() > self.backup_cap {
                return Err(format!("backups of cell {i} exceed the cap"));
            }
        }
        Ok(())
    }
}
