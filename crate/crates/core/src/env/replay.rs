//! Replay export: one CSV per duel, one row per timestep.
//!
//! ```text
//! # gameqd <version> env=<env> duel_seed=<seed> config_hash=<hash>
//! step,t,<entity>_x,<entity>_y,...,events
//! ```
//!
//! `events` is a `;`-separated list of `point:<side>`, `rebound:<side>` or
//! `capture:<entity>` tokens for events that happened during that step.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{EnvId, Side};
use crate::scalar::Scalar;

use super::{EventKind, Trajectory};

/// Parsed replay file.
#[derive(Clone, Debug, PartialEq)]
pub struct Replay {
    pub env: EnvId,
    pub header: String,
    pub entities: Vec<String>,
    pub times: Vec<f64>,
    /// `steps x entities`.
    pub positions: Vec<Vec<[f64; 2]>>,
    pub events: Vec<Vec<String>>,
}

pub fn write_replay_csv<F: Scalar>(
    path: &Path,
    traj: &Trajectory<F>,
    duel_seed: u64,
    config_hash: &str,
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# gameqd {} env={} duel_seed={} config_hash={}",
        env!("CARGO_PKG_VERSION"),
        traj.env,
        duel_seed,
        config_hash
    );
    out.push_str("step,t");
    for e in &traj.entities {
        let _ = write!(out, ",{e}_x,{e}_y");
    }
    out.push_str(",events\n");

    let mut per_step: Vec<Vec<String>> = vec![Vec::new(); traj.steps()];
    for ev in &traj.events {
        let token = match &ev.kind {
            EventKind::Point { scorer } => format!("point:{scorer}"),
            EventKind::Rebound { side, .. } => format!("rebound:{side}"),
            EventKind::Capture { entity } => format!("capture:{}", traj.entities[*entity]),
        };
        if let Some(v) = per_step.get_mut(ev.step) {
            v.push(token);
        }
    }

    for step in 0..traj.steps() {
        let t = F::lit((step + 1) as f64) * traj.dt;
        let _ = write!(out, "{step},{t}");
        for p in traj.row(step) {
            let _ = write!(out, ",{},{}", p[0], p[1]);
        }
        let _ = writeln!(out, ",{}", per_step[step].join(";"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_replay_csv(path: &Path) -> Result<Replay> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::integrity(format!("{}: {msg}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty replay"))?.to_string();
    let env: EnvId = header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix("env="))
        .ok_or_else(|| bad("missing env in header"))?
        .parse()?;
    let columns: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("missing column row"))?
        .split(',')
        .collect();
    if columns.len() < 5
        || columns[0] != "step"
        || columns[1] != "t"
        || columns.last() != Some(&"events")
    {
        return Err(bad("unexpected columns"));
    }
    let entities: Vec<String> = columns[2..columns.len() - 1]
        .chunks(2)
        .map(|c| c[0].trim_end_matches("_x").to_string())
        .collect();

    let (mut times, mut positions, mut events) = (Vec::new(), Vec::new(), Vec::new());
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(bad("ragged row"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        times.push(num(fields[1])?);
        let mut row = Vec::with_capacity(entities.len());
        for pair in fields[2..fields.len() - 1].chunks(2) {
            row.push([num(pair[0])?, num(pair[1])?]);
        }
        positions.push(row);
        let ev = fields[fields.len() - 1];
        events.push(if ev.is_empty() {
            Vec::new()
        } else {
            ev.split(';').map(str::to_string).collect()
        });
    }
    Ok(Replay {
        env,
        header,
        entities,
        times,
        positions,
        events,
    })
}

impl Replay {
    /// Step indices at which a point was scored, with the scorer.
    pub fn points(&self) -> Vec<(usize, Side)> {
        let mut out = Vec::new();
        for (step, evs) in self.events.iter().enumerate() {
            for e in evs {
                match e.as_str() {
                    "point:red" => out.push((step, Side::Red)),
                    "point:blue" => out.push((step, Side::Blue)),
                    _ => {}
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{evaluate_duel, EnvParams};
    use crate::model::{rng_from_seed, Genome};

    #[test]
    fn replay_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let params = EnvParams::default();
        let mut rng = rng_from_seed(4);
        for env in EnvId::ALL {
            let red = Genome::<f64>::random(env, Side::Red, &mut rng);
            let blue = Genome::<f64>::random(env, Side::Blue, &mut rng);
            let out = evaluate_duel(env, &params, &red, &blue, 9).unwrap();
            let path = dir.path().join(format!("{env}.csv"));
            write_replay_csv(&path, &out.trajectory, 9, "abc").unwrap();
            let replay = read_replay_csv(&path).unwrap();
            assert_eq!(replay.env, env);
            assert_eq!(replay.entities, out.trajectory.entities);
            assert_eq!(replay.positions.len(), out.trajectory.steps());
            for (s, row) in replay.positions.iter().enumerate() {
                assert_eq!(row.as_slice(), out.trajectory.row(s));
            }
            let n_events: usize = replay.events.iter().map(Vec::len).sum();
            assert_eq!(n_events, out.trajectory.events.len());
        }
    }
}
