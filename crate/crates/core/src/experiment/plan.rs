use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::EnvParams;
use crate::error::{Error, Result};
use crate::model::config::{
    default_backup_cap, default_batch_size, default_mutation_rate, default_mutation_sigma,
};
use crate::model::{ctx, derive_seed, EnvId, RunConfig, Strategy};

/// Run parameters shared by every strategy and replication of a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunTemplate {
    pub n_gen: usize,
    pub n_task: usize,
    pub n_cell: usize,
    pub n_budget: usize,
    #[serde(default)]
    pub n_init: Option<usize>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_mutation_rate")]
    pub mutation_rate: f64,
    #[serde(default = "default_mutation_sigma")]
    pub mutation_sigma: f64,
    #[serde(default = "default_backup_cap")]
    pub backup_cap: usize,
    #[serde(default)]
    pub physics: EnvParams,
}

/// A comparison of strategies over seeded replications, followed by the
/// inter-variant tournament.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub env: EnvId,
    pub strategies: Vec<Strategy>,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default = "one")]
    pub tournament_reps: usize,
    /// Output root; not part of the plan hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub run: RunTemplate,
}

fn one() -> usize {
    1
}

impl ExperimentPlan {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let plan: Self =
            toml::from_str(text).map_err(|e| Error::config(format!("bad plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("plan serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::config("plan lists no strategies"));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return Err(Error::config(format!("strategy {s} listed twice")));
            }
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be positive"));
        }
        if self.tournament_reps == 0 {
            return Err(Error::config("tournament_reps must be positive"));
        }
        self.run_config(self.strategies[0], 0).validate()
    }

    /// SHA-256 over the canonical JSON of everything but the output root.
    pub fn plan_hash(&self) -> String {
        let mut p = self.clone();
        p.output = None;
        let json = serde_json::to_vec(&p).expect("plan serializes to JSON");
        hex::encode(Sha256::digest(&json))
    }

    /// Seed of replication `rep`; every strategy sees the same seed for the
    /// same replication.
    pub fn replication_seed(&self, rep: usize) -> u64 {
        derive_seed(self.master_seed, &[ctx::REPLICATION, rep as u64])
    }

    pub fn run_config(&self, strategy: Strategy, rep: usize) -> RunConfig {
        let t = &self.run;
        RunConfig {
            env: self.env,
            strategy,
            n_gen: t.n_gen,
            n_task: t.n_task,
            n_cell: t.n_cell,
            n_budget: t.n_budget,
            n_init: t.n_init,
            master_seed: self.replication_seed(rep),
            batch_size: t.batch_size,
            mutation_rate: t.mutation_rate,
            mutation_sigma: t.mutation_sigma,
            backup_cap: t.backup_cap,
            physics: t.physics.clone(),
        }
    }

    /// Every (strategy, replication) pair, strategy-major.
    pub fn jobs(&self) -> Vec<(Strategy, usize)> {
        self.strategies
            .iter()
            .flat_map(|&s| (0..self.replications).map(move |r| (s, r)))
            .collect()
    }
}
