use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::EnvParams;
use crate::error::{Error, Result};

use super::EnvId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Behavior,
    Random,
    Ranking,
    Pareto,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Ranking,
        Strategy::Pareto,
        Strategy::Behavior,
        Strategy::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Behavior => "behavior",
            Strategy::Random => "random",
            Strategy::Ranking => "ranking",
            Strategy::Pareto => "pareto",
        }
    }

    /// Whether selection runs the full elites-versus-old-tasks tournament.
    pub fn is_tournament_informed(self) -> bool {
        matches!(self, Strategy::Ranking | Strategy::Pareto)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "behavior" | "behaviour" => Ok(Strategy::Behavior),
            "random" => Ok(Strategy::Random),
            "ranking" => Ok(Strategy::Ranking),
            "pareto" => Ok(Strategy::Pareto),
            other => Err(Error::config(format!("unknown strategy `{other}`"))),
        }
    }
}

pub(crate) fn default_batch_size() -> usize {
    1
}
pub(crate) fn default_mutation_rate() -> f64 {
    0.3
}
pub(crate) fn default_mutation_sigma() -> f64 {
    0.1
}
pub(crate) fn default_backup_cap() -> usize {
    32
}

/// Configuration of one GAME run.
///
/// Loaded from TOML. `master_seed` has no default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvId,
    pub strategy: Strategy,
    pub n_gen: usize,
    pub n_task: usize,
    pub n_cell: usize,
    /// Per-generation main-loop budget of the tournament-informed strategies;
    /// see [`crate::runner::equalized_budget`].
    pub n_budget: usize,
    /// Random-search phase length; `10 * n_task` when absent.
    #[serde(default)]
    pub n_init: Option<usize>,
    pub master_seed: u64,
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

impl RunConfig {
    /// Small defaults suitable for tests; callers override what they need.
    pub fn new(env: EnvId, strategy: Strategy, master_seed: u64) -> Self {
        Self {
            env,
            strategy,
            n_gen: 4,
            n_task: 8,
            n_cell: 5,
            n_budget: 2000,
            n_init: None,
            master_seed,
            batch_size: default_batch_size(),
            mutation_rate: default_mutation_rate(),
            mutation_sigma: default_mutation_sigma(),
            backup_cap: default_backup_cap(),
            physics: EnvParams::default(),
        }
    }

    pub fn n_init(&self) -> usize {
        self.n_init.unwrap_or(10 * self.n_task)
    }

    /// The random-search guard actually applied: the archives of one
    /// generation hold at most `n_task * n_cell` elites, so a larger `n_init`
    /// would never let mutation start.
    pub fn effective_n_init(&self) -> usize {
        self.n_init().min(self.n_task * self.n_cell)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_task < 2 {
            return Err(Error::config("n_task must be at least 2"));
        }
        if self.n_cell < 2 {
            return Err(Error::config("n_cell must be at least 2"));
        }
        if self.n_budget < self.n_init() {
            return Err(Error::config(format!(
                "n_budget ({}) must be at least n_init ({})",
                self.n_budget,
                self.n_init()
            )));
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate <= 1.0) {
            return Err(Error::config("mutation_rate must lie in (0, 1]"));
        }
        if !(self.mutation_sigma > 0.0 && self.mutation_sigma.is_finite()) {
            return Err(Error::config("mutation_sigma must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        if self.backup_cap < 2 {
            return Err(Error::config("backup_cap must be at least 2"));
        }
        self.physics.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("bad run config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("run config serializes to JSON");
        hex::encode(Sha256::digest(&json))
    }
}
