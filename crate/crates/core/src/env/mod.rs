//! Headless, deterministic two-sided games and duel evaluation.

mod cat_mouse;
mod fitness;
mod params;
mod pong;
mod pursuit;
mod raster;
mod replay;

pub use fitness::{cat_mouse_fitness, pong_fitness, pursuit_fitness};
pub use params::{CatMouseParams, EnvParams, PongParams, PursuitParams};
pub use raster::behavior_descriptor;
pub use replay::{read_replay_csv, write_replay_csv, Replay};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BehaviorDescriptor, EnvId, FitnessPair, Genome, Mlp, Side};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub enum EventKind<F> {
    /// A point was scored by `scorer`.
    Point { scorer: Side },
    /// Successful paddle rebound; `speed` is the ball speed after it.
    Rebound { side: Side, speed: F },
    /// Entity (index into `Trajectory::entities`) was caught.
    Capture { entity: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Event<F> {
    pub step: usize,
    pub kind: EventKind<F>,
}

/// Square region rasterized into `grid x grid` cells for the descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RasterWindow<F> {
    pub min: [F; 2],
    pub max: [F; 2],
    pub grid: usize,
}

/// Entity positions after every simulation step, plus discrete events.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Trajectory<F> {
    pub env: EnvId,
    pub entities: Vec<String>,
    /// Duration of one step (1 for Pong, whose clock is in steps).
    pub dt: F,
    /// Row-major `steps x entities`.
    pub positions: Vec<[F; 2]>,
    pub events: Vec<Event<F>>,
    pub window: RasterWindow<F>,
}

impl<F: Scalar> Trajectory<F> {
    pub fn new(
        env: EnvId,
        entities: &[&str],
        dt: F,
        window: RasterWindow<F>,
        steps: usize,
    ) -> Self {
        Self {
            env,
            entities: entities.iter().map(|s| s.to_string()).collect(),
            dt,
            positions: Vec::with_capacity(steps * entities.len()),
            events: Vec::new(),
            window,
        }
    }

    pub fn steps(&self) -> usize {
        if self.entities.is_empty() {
            0
        } else {
            self.positions.len() / self.entities.len()
        }
    }

    pub fn row(&self, step: usize) -> &[[F; 2]] {
        let n = self.entities.len();
        &self.positions[step * n..(step + 1) * n]
    }

    pub fn entity_path(&self, entity: usize) -> impl Iterator<Item = [F; 2]> + '_ {
        let n = self.entities.len();
        self.positions.iter().skip(entity).step_by(n).copied()
    }

    fn push_row(&mut self, row: &[[F; 2]], step: usize) -> Result<()> {
        if row.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Evaluation {
                env: self.env.to_string(),
                step,
                message: "non-finite entity position".into(),
            });
        }
        self.positions.extend_from_slice(row);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct DuelOutcome<F> {
    pub fitness: FitnessPair<F>,
    pub behavior_red: BehaviorDescriptor<F>,
    pub behavior_blue: BehaviorDescriptor<F>,
    pub trajectory: Trajectory<F>,
    pub duel_seed: u64,
}

impl<F: Scalar> DuelOutcome<F> {
    pub fn behavior(&self, side: Side) -> &BehaviorDescriptor<F> {
        match side {
            Side::Red => &self.behavior_red,
            Side::Blue => &self.behavior_blue,
        }
    }
}

/// A genome bound to its network with reusable buffers.
pub(crate) struct Policy<'a, F> {
    net: Mlp,
    params: &'a [F],
    out: Vec<F>,
    scratch: Vec<F>,
}

impl<'a, F: Scalar> Policy<'a, F> {
    pub(crate) fn new(genome: &'a Genome<F>) -> Self {
        Self {
            net: Mlp::for_env(genome.env, genome.side),
            params: &genome.params,
            out: Vec::with_capacity(32),
            scratch: Vec::with_capacity(32),
        }
    }

    /// Single squashed action in (-1, 1).
    pub(crate) fn act(&mut self, obs: &[F]) -> Result<F> {
        self.net
            .forward_into(self.params, obs, &mut self.out, &mut self.scratch)?;
        Ok(self.out[0])
    }
}

fn check_pair<F: Scalar>(env: EnvId, red: &Genome<F>, blue: &Genome<F>) -> Result<()> {
    for (g, side) in [(red, Side::Red), (blue, Side::Blue)] {
        if g.env != env || g.side != side {
            return Err(Error::config(format!(
                "expected a {env} {side} genome, got {} {}",
                g.env, g.side
            )));
        }
        let expected = crate::model::genome_dim(env, side);
        if g.params.len() != expected {
            return Err(Error::config(format!(
                "{env} {side} genome has {} parameters, expected {expected}",
                g.params.len()
            )));
        }
    }
    Ok(())
}

/// Plays one duel. A pure function of its arguments.
pub fn evaluate_duel<F: Scalar>(
    env: EnvId,
    params: &EnvParams,
    red: &Genome<F>,
    blue: &Genome<F>,
    duel_seed: u64,
) -> Result<DuelOutcome<F>> {
    check_pair(env, red, blue)?;
    let (trajectory, fitness) = match env {
        EnvId::Pong => pong::simulate(&params.pong, params.raster_grid, red, blue, duel_seed)?,
        EnvId::CatMouse => {
            cat_mouse::simulate(&params.cat_mouse, params.raster_grid, red, blue, duel_seed)?
        }
        EnvId::Pursuit => {
            pursuit::simulate(&params.pursuit, params.raster_grid, red, blue, duel_seed)?
        }
    };
    let behavior_red = behavior_descriptor(&trajectory, Side::Red);
    let behavior_blue = behavior_descriptor(&trajectory, Side::Blue);
    Ok(DuelOutcome {
        fitness,
        behavior_red,
        behavior_blue,
        trajectory,
        duel_seed,
    })
}

/// Behavior descriptor length of an environment.
pub fn descriptor_dim(env: EnvId, params: &EnvParams) -> usize {
    let entities = match env {
        EnvId::Pong => 3,
        EnvId::CatMouse => 2,
        EnvId::Pursuit => 4,
    };
    entities * params.raster_grid * params.raster_grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rng_from_seed;

    #[test]
    fn duels_are_deterministic() {
        let params = EnvParams::default();
        let mut rng = rng_from_seed(5);
        for env in EnvId::ALL {
            let red = Genome::<f64>::random(env, Side::Red, &mut rng);
            let blue = Genome::<f64>::random(env, Side::Blue, &mut rng);
            let a = evaluate_duel(env, &params, &red, &blue, 77).unwrap();
            let b = evaluate_duel(env, &params, &red, &blue, 77).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.behavior_red.len(), descriptor_dim(env, &params));
            assert_eq!(a.behavior_red, a.behavior_blue);
            assert!((a.fitness.red + a.fitness.blue - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sides_are_checked() {
        let params = EnvParams::default();
        let red = Genome::<f64>::zeros(EnvId::Pong, Side::Red);
        assert!(matches!(
            evaluate_duel(EnvId::Pong, &params, &red, &red, 1),
            Err(Error::Config(_))
        ));
        let blue = Genome::<f64>::zeros(EnvId::CatMouse, Side::Blue);
        assert!(evaluate_duel(EnvId::Pong, &params, &red, &blue, 1).is_err());
    }

    #[test]
    fn non_finite_genome_reports_env_and_step() {
        let params = EnvParams::default();
        let mut red = Genome::<f64>::zeros(EnvId::CatMouse, Side::Red);
        let blue = Genome::<f64>::zeros(EnvId::CatMouse, Side::Blue);
        // output bias of the cat network
        let n = red.params.len();
        red.params[n - 1] = f64::NAN;
        match evaluate_duel(EnvId::CatMouse, &params, &red, &blue, 3) {
            Err(Error::Evaluation { env, step, .. }) => {
                assert_eq!(env, "cat_mouse");
                assert_eq!(step, 0);
            }
            other => panic!("expected evaluation error, got {other:?}"),
        }
    }
}
