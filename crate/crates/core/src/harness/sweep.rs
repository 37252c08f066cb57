//! One-axis parameter sweeps over paired seeds.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::Reflector;
use crate::error::{Error, Result};
use crate::geometry::{Vec3, WalkParams};

use super::config::{ScenarioConfig, TrajectoryConfig};
use super::run::{run_scenario, ExperimentSummary};

/// Half side of the walk box when the client motion axis adds a walk.
pub const DEFAULT_WALK_HALF_EXTENT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// UAV speed, m/s.
    Velocity,
    /// Horizontal distance of every client from the flight center, m.
    Distance,
    /// CSI reading rate, Hz.
    CsiRate,
    /// Path-ratio multiplier `k` of one extra reflector with `rho = -1`; 0 removes it.
    Reflectors,
    /// Client walk speed cap, m/s; 0 keeps clients fixed.
    ClientMotion,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] =
        [SweepAxis::Velocity, SweepAxis::Distance, SweepAxis::CsiRate, SweepAxis::Reflectors, SweepAxis::ClientMotion];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Velocity => "velocity",
            SweepAxis::Distance => "distance",
            SweepAxis::CsiRate => "csi_rate",
            SweepAxis::Reflectors => "reflectors",
            SweepAxis::ClientMotion => "client_motion",
        }
    }

    /// Copy of `base` with the axis set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        if !value.is_finite() {
            return Err(Error::Config(format!("{self} value must be finite")));
        }
        let mut cfg = base.clone();
        match self {
            SweepAxis::Velocity => match &mut cfg.trajectory {
                TrajectoryConfig::Shuttle { speed, .. } => {
                    if value < 0.0 {
                        return Err(Error::Config(format!("velocity must be >= 0, got {value}")));
                    }
                    *speed = value;
                }
                _ => return Err(Error::Config("velocity sweeps need a shuttle trajectory".into())),
            },
            SweepAxis::Distance => {
                if !(value > 0.0) {
                    return Err(Error::Config(format!("distance must be > 0, got {value}")));
                }
                let center = cfg.trajectory.center();
                for c in cfg.clients.iter_mut() {
                    let off = Vec3::new(c.position.x - center.x, c.position.y - center.y, 0.0);
                    let n = off.norm();
                    let dir = if n > 0.0 { off * (1.0 / n) } else { Vec3::new(0.0, 1.0, 0.0) };
                    c.position = Vec3::new(center.x + dir.x * value, center.y + dir.y * value, c.position.z);
                }
            }
            SweepAxis::CsiRate => {
                if !(value > 0.0) {
                    return Err(Error::Config(format!("csi_rate must be > 0, got {value}")));
                }
                cfg.f_r = value;
            }
            SweepAxis::Reflectors => {
                cfg.reflectors = if value == 0.0 { Vec::new() } else { vec![Reflector { k: value, rho: -1.0 }] };
            }
            SweepAxis::ClientMotion => {
                for c in cfg.clients.iter_mut() {
                    c.walk = if value == 0.0 {
                        None
                    } else {
                        let half_extent = c.walk.map_or(DEFAULT_WALK_HALF_EXTENT, |w| w.half_extent);
                        Some(WalkParams { half_extent, max_speed: value })
                    };
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep axis `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: Option<SweepAxis>,
    pub value: f64,
    pub seed: u64,
    pub summary: ExperimentSummary,
}

/// Runs every (value, seed) pair on `jobs` threads. Rows come back in
/// value-major, seed-minor order whatever the thread count.
pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[f64], seeds: &[u64], jobs: usize) -> Result<Vec<SweepRow>> {
    if values.is_empty() || seeds.is_empty() {
        return Err(Error::Config("a sweep needs at least one value and one seed".into()));
    }
    let mut cfgs = Vec::with_capacity(values.len() * seeds.len());
    for &v in values {
        let cfg = axis.apply(base, v)?;
        for &s in seeds {
            cfgs.push((v, s, ScenarioConfig { seed: s, ..cfg.clone() }));
        }
    }
    let job = |(v, s, cfg): &(f64, u64, ScenarioConfig)| -> Result<SweepRow> {
        let out = run_scenario(cfg)?;
        Ok(SweepRow { axis: Some(axis), value: *v, seed: *s, summary: out.summary().clone() })
    };
    if jobs <= 1 {
        return cfgs.iter().map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::Internal(e.to_string()))?;
    pool.install(|| cfgs.par_iter().map(job).collect())
}
