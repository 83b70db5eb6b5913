//! Shared domain types: sides, environments, genomes, fitness pairs and
//! behavior descriptors.

pub(crate) mod config;
mod mlp;
mod seed;

pub use config::{RunConfig, Strategy};
pub use mlp::{genome_dim, mlp_forward, Mlp, HIDDEN_LAYERS};
pub use seed::{ctx, derive_seed, rng_from_seed, splitmix64};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Red,
    Blue,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::Red => Side::Blue,
            Side::Blue => Side::Red,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Red => "red",
            Side::Blue => "blue",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvId {
    Pong,
    CatMouse,
    Pursuit,
}

impl EnvId {
    pub const ALL: [EnvId; 3] = [EnvId::Pong, EnvId::CatMouse, EnvId::Pursuit];

    /// Observation size fed to a side's policy.
    pub fn input_dim(self, _side: Side) -> usize {
        match self {
            EnvId::Pong => 6,
            EnvId::CatMouse => 5,
            EnvId::Pursuit => 11,
        }
    }

    /// Action size produced by a side's policy.
    pub fn action_dim(self, _side: Side) -> usize {
        1
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnvId::Pong => "pong",
            EnvId::CatMouse => "cat_mouse",
            EnvId::Pursuit => "pursuit",
        }
    }

    /// Human names of the two sides, used in reports.
    pub fn side_name(self, side: Side) -> &'static str {
        match (self, side) {
            (EnvId::Pong, Side::Red) => "left",
            (EnvId::Pong, Side::Blue) => "right",
            (EnvId::CatMouse, Side::Red) => "cat",
            (EnvId::CatMouse, Side::Blue) => "mouse",
            (EnvId::Pursuit, Side::Red) => "pursuers",
            (EnvId::Pursuit, Side::Blue) => "evaders",
        }
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "pong" => Ok(EnvId::Pong),
            "cat_mouse" | "catmouse" | "cat_and_mouse" => Ok(EnvId::CatMouse),
            "pursuit" | "pursuers_evaders" | "pursuers_and_evaders" => Ok(EnvId::Pursuit),
            other => Err(Error::config(format!("unknown environment `{other}`"))),
        }
    }
}

/// Flat parameter vector of a fixed-topology MLP policy for one side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Genome<F> {
    pub side: Side,
    pub env: EnvId,
    pub params: Vec<F>,
}

impl<F: Scalar> Genome<F> {
    /// Validates length and finiteness.
    pub fn new(env: EnvId, side: Side, params: Vec<F>) -> Result<Self> {
        let expected = genome_dim(env, side);
        if params.len() != expected {
            return Err(Error::config(format!(
                "{env} {side} genome needs {expected} parameters, got {}",
                params.len()
            )));
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::config(format!("genome parameter {i} is not finite")));
        }
        Ok(Self { side, env, params })
    }

    pub fn zeros(env: EnvId, side: Side) -> Self {
        Self {
            side,
            env,
            params: vec![F::zero(); genome_dim(env, side)],
        }
    }

    /// Every parameter i.i.d. uniform in [-1, 1].
    pub fn random<R: Rng + ?Sized>(env: EnvId, side: Side, rng: &mut R) -> Self {
        let params = (0..genome_dim(env, side))
            .map(|_| F::lit(rng.random_range(-1.0..=1.0)))
            .collect();
        Self { side, env, params }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }
}

/// Fitness of both sides of a duel; the two values always sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct FitnessPair<F> {
    pub red: F,
    pub blue: F,
}

impl<F: Scalar> FitnessPair<F> {
    /// Builds the pair from the red value, clamping to [0, 1].
    pub fn from_red(red: F) -> Self {
        let red = red.max(F::zero()).min(F::one());
        Self {
            red,
            blue: F::one() - red,
        }
    }

    pub fn from_side(side: Side, value: F) -> Self {
        match side {
            Side::Red => Self::from_red(value),
            Side::Blue => Self::from_red(F::one() - value),
        }
    }

    pub fn get(&self, side: Side) -> F {
        match side {
            Side::Red => self.red,
            Side::Blue => self.blue,
        }
    }

    pub fn tie() -> Self {
        Self::from_red(F::half())
    }
}

/// Fixed-length behavior vector with entries in [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar", transparent)]
pub struct BehaviorDescriptor<F>(pub Vec<F>);

impl<F: Scalar> BehaviorDescriptor<F> {
    pub fn as_slice(&self) -> &[F] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl<F> From<Vec<F>> for BehaviorDescriptor<F> {
    fn from(v: Vec<F>) -> Self {
        Self(v)
    }
}

impl<F> AsRef<[F]> for BehaviorDescriptor<F> {
    fn as_ref(&self) -> &[F] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn fitness_pair_complement() {
        for x in [0.0, 0.1, 0.3333, 0.5, 0.999, 1.0] {
            let p = FitnessPair::<f64>::from_red(x);
            assert!((p.red + p.blue - 1.0).abs() < 1e-12);
            let q = FitnessPair::<f64>::from_side(Side::Blue, x);
            assert_eq!(q.blue, 1.0 - (1.0 - x));
        }
        let clamped = FitnessPair::<f64>::from_red(1.5);
        assert_eq!(clamped.red, 1.0);
        assert_eq!(clamped.blue, 0.0);
    }

    #[test]
    fn genome_rejects_wrong_length_and_nan() {
        assert!(Genome::<f64>::new(EnvId::Pong, Side::Red, vec![0.0; 3]).is_err());
        let mut p = vec![0.0; genome_dim(EnvId::Pong, Side::Red)];
        p[5] = f64::NAN;
        assert!(Genome::new(EnvId::Pong, Side::Red, p).is_err());
    }

    #[test]
    fn random_genome_in_unit_box() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = Genome::<f64>::random(EnvId::Pursuit, Side::Blue, &mut rng);
        assert_eq!(g.len(), 929);
        assert!(g.params.iter().all(|p| (-1.0..=1.0).contains(p)));
    }

    #[test]
    fn env_parsing() {
        assert_eq!("cat-mouse".parse::<EnvId>().unwrap(), EnvId::CatMouse);
        assert_eq!("Pong".parse::<EnvId>().unwrap(), EnvId::Pong);
        assert!("chess".parse::<EnvId>().is_err());
    }
}
