//! Physical constants of the three games. All of them are surfaced in the run
//! config under `[physics]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    /// Cells per axis of each entity's occupancy raster.
    pub raster_grid: usize,
    pub pong: PongParams,
    pub cat_mouse: CatMouseParams,
    pub pursuit: PursuitParams,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            raster_grid: 16,
            pong: PongParams::default(),
            cat_mouse: CatMouseParams::default(),
            pursuit: PursuitParams::default(),
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<()> {
        if self.raster_grid == 0 {
            return Err(Error::config("raster_grid must be positive"));
        }
        self.pong.validate()?;
        self.cat_mouse.validate()?;
        self.pursuit.validate()
    }
}

/// Unit-square arena; lengths in arena heights, speeds per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PongParams {
    pub steps: usize,
    pub paddle_height: f64,
    pub left_paddle_x: f64,
    pub right_paddle_x: f64,
    pub ball_radius: f64,
    pub ball_speed: f64,
    pub paddle_speed: f64,
    /// Speed multiplier applied on every successful rebound.
    pub rebound_speedup: f64,
    /// Serves leave the center at a uniform angle within +/- this value (radians).
    pub serve_half_angle: f64,
}

impl Default for PongParams {
    fn default() -> Self {
        Self {
            steps: 1000,
            paddle_height: 0.2,
            left_paddle_x: 0.02,
            right_paddle_x: 0.98,
            ball_radius: 0.01,
            ball_speed: 0.01,
            paddle_speed: 0.02,
            rebound_speedup: 1.05,
            serve_half_angle: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl PongParams {
    fn validate(&self) -> Result<()> {
        let ok = self.steps > 0
            && self.paddle_height > 0.0
            && self.paddle_height < 1.0
            && self.ball_radius > 0.0
            && self.left_paddle_x > self.ball_radius
            && self.right_paddle_x < 1.0 - self.ball_radius
            && self.left_paddle_x < self.right_paddle_x
            && self.ball_speed > 0.0
            && self.paddle_speed >= 0.0
            && self.rebound_speedup >= 1.0
            && (0.0..std::f64::consts::FRAC_PI_2).contains(&self.serve_half_angle);
        if ok {
            Ok(())
        } else {
            Err(Error::config("invalid pong parameters"))
        }
    }
}

/// Homicidal-chauffeur style chase on an unbounded plane, SI units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatMouseParams {
    pub steps: usize,
    pub dt: f64,
    pub cat_speed: f64,
    pub mouse_speed: f64,
    /// Maximum cat angular velocity (rad/s), i.e. cat speed over minimal turn radius.
    pub cat_turn_rate: f64,
    pub capture_radius: f64,
    pub initial_distance: f64,
    /// Positions are divided by this before entering the policies.
    pub position_scale: f64,
    /// Half-width of the square window rasterized for the behavior descriptor.
    pub raster_extent: f64,
    /// Fixed polar angle of the mouse start; seeded uniform when absent.
    pub mouse_start_angle: Option<f64>,
}

impl Default for CatMouseParams {
    fn default() -> Self {
        Self {
            steps: 500,
            dt: 0.01,
            cat_speed: 2.0,
            mouse_speed: 1.0,
            cat_turn_rate: 2.0,
            capture_radius: 0.2,
            initial_distance: 2.0,
            position_scale: 5.0,
            raster_extent: 5.0,
            mouse_start_angle: None,
        }
    }
}

impl CatMouseParams {
    pub fn t_max(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    fn validate(&self) -> Result<()> {
        if self.initial_distance <= self.capture_radius {
            return Err(Error::config(
                "cat_mouse.initial_distance must exceed the capture radius",
            ));
        }
        let ok = self.steps > 0
            && self.dt > 0.0
            && self.cat_speed >= 0.0
            && self.mouse_speed >= 0.0
            && self.cat_turn_rate >= 0.0
            && self.capture_radius > 0.0
            && self.position_scale > 0.0
            && self.raster_extent > 0.0
            && self.mouse_start_angle.is_none_or(f64::is_finite);
        if ok {
            Ok(())
        } else {
            Err(Error::config("invalid cat_mouse parameters"))
        }
    }
}

/// Two pursuers versus two evaders in a walled square with a central obstacle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PursuitParams {
    pub steps: usize,
    pub dt: f64,
    pub speed: f64,
    pub capture_radius: f64,
    /// Arena is `[-arena_half, arena_half]^2`.
    pub arena_half: f64,
    pub disc_radius: f64,
    pub pursuer_starts: [[f64; 2]; 2],
    pub evader_starts: [[f64; 2]; 2],
    /// Each start coordinate is jittered uniformly within +/- this value.
    pub start_jitter: f64,
}

impl Default for PursuitParams {
    fn default() -> Self {
        Self {
            steps: 500,
            dt: 0.01,
            speed: 1.0,
            capture_radius: 0.15,
            arena_half: 1.0,
            disc_radius: 0.3,
            pursuer_starts: [[-0.8, 0.4], [-0.8, -0.4]],
            evader_starts: [[0.8, 0.4], [0.8, -0.4]],
            start_jitter: 0.1,
        }
    }
}

impl PursuitParams {
    pub fn t_max(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    fn validate(&self) -> Result<()> {
        let ok = self.steps > 0
            && self.dt > 0.0
            && self.speed >= 0.0
            && self.capture_radius > 0.0
            && self.arena_half > 0.0
            && self.disc_radius >= 0.0
            && self.disc_radius < self.arena_half
            && self.start_jitter >= 0.0;
        if !ok {
            return Err(Error::config("invalid pursuit parameters"));
        }
        let lim = self.arena_half - self.start_jitter;
        let clearance = self.disc_radius + self.start_jitter * std::f64::consts::SQRT_2;
        for s in self.pursuer_starts.iter().chain(&self.evader_starts) {
            if s[0].abs() > lim || s[1].abs() > lim || s[0].hypot(s[1]) < clearance {
                return Err(Error::config(
                    "pursuit start positions must stay inside the arena and off the disc",
                ));
            }
        }
        // worst case jitter brings a pursuer and an evader 2*sqrt(2)*jitter closer
        let min_gap = self.capture_radius + 2.0 * std::f64::consts::SQRT_2 * self.start_jitter;
        for p in &self.pursuer_starts {
            for e in &self.evader_starts {
                if (p[0] - e[0]).hypot(p[1] - e[1]) <= min_gap {
                    return Err(Error::config(
                        "pursuit evaders must start farther than the capture radius",
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert!(EnvParams::default().validate().is_ok());
    }

    #[test]
    fn capture_radius_above_start_distance_rejected() {
        let mut p = EnvParams::default();
        p.cat_mouse.initial_distance = 0.2;
        assert!(matches!(p.validate(), Err(Error::Config(_))));
        let mut p = EnvParams::default();
        p.pursuit.evader_starts = [[-0.7, 0.4], [0.8, -0.4]];
        assert!(p.validate().is_err());
    }
}
