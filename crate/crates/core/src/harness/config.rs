//! Scenario configuration: a TOML document with defaults for every field.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::{AntennaArray, MovingClient, RadioParams, Reflector};
use crate::error::{Error, Result};
use crate::geometry::{random_waypoint, ClientSite, Leg, Trajectory, Vec3, WalkParams, DEFAULT_NLOS_PENALTY_DB};
use crate::mumimo::{DecodeMode, BACKOFF_THRESHOLD_DB};
use crate::policies::{PolicyKind, PolicyParams};
use crate::prediction::PredictorConfig;
use crate::rates::{PacketModel, RateEntry, RateTable};

use super::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    /// Back and forth between two points; speed 0 hovers at the midpoint.
    Shuttle { from: Vec3, to: Vec3, speed: f64 },
    Hover { position: Vec3 },
    /// Explicit legs, padded with a hover at the end to cover the run.
    Waypoints { start: Vec3, legs: Vec<Leg> },
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig::Shuttle { from: Vec3::new(-15.0, 0.0, 10.0), to: Vec3::new(15.0, 0.0, 10.0), speed: 5.0 }
    }
}

impl TrajectoryConfig {
    /// Horizontal point the scenario is laid out around.
    pub fn center(&self) -> Vec3 {
        match self {
            TrajectoryConfig::Shuttle { from, to, .. } => (*from + *to) * 0.5,
            TrajectoryConfig::Hover { position } => *position,
            TrajectoryConfig::Waypoints { start, .. } => *start,
        }
    }

    pub fn build(&self, duration: f64) -> Result<Trajectory> {
        match self {
            TrajectoryConfig::Shuttle { from, to, speed } => {
                if *speed > 0.0 {
                    Trajectory::shuttle(*from, *to, *speed, duration)
                } else {
                    Trajectory::hover(self.center(), duration)
                }
            }
            TrajectoryConfig::Hover { position } => Trajectory::hover(*position, duration),
            TrajectoryConfig::Waypoints { start, legs } => {
                let t = Trajectory::new(*start, legs.clone())?;
                if t.duration() >= duration {
                    return Ok(t);
                }
                let mut legs = legs.clone();
                legs.push(Leg::Hover { hover: duration - t.duration() });
                Trajectory::new(*start, legs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientConfig {
    pub position: Vec3,
    #[serde(default)]
    pub nlos: bool,
    #[serde(default = "default_penalty")]
    pub nlos_penalty_db: f64,
    /// Random-waypoint walk around `position`; absent for a fixed client.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkParams>,
}

fn default_penalty() -> f64 {
    DEFAULT_NLOS_PENALTY_DB
}

impl ClientConfig {
    pub fn fixed(position: Vec3) -> Self {
        ClientConfig { position, nlos: false, nlos_penalty_db: DEFAULT_NLOS_PENALTY_DB, walk: None }
    }

    pub fn site(&self) -> ClientSite {
        ClientSite { position: self.position, nlos: self.nlos, nlos_penalty_db: self.nlos_penalty_db }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub elements: usize,
    /// Element spacing in wavelengths along the body x-axis.
    pub spacing: f64,
    /// Explicit offsets in meters; overrides `elements` and `spacing`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<Vec3>>,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig { elements: 2, spacing: 0.5, offsets: None }
    }
}

impl ArrayConfig {
    pub fn build(&self, wavelength: f64) -> AntennaArray {
        if let Some(o) = &self.offsets {
            return AntennaArray { offsets: o.clone() };
        }
        let d = self.spacing * wavelength;
        let mid = (self.elements as f64 - 1.0) / 2.0;
        AntennaArray { offsets: (0..self.elements).map(|i| Vec3::new((i as f64 - mid) * d, 0.0, 0.0)).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Broadcast position error, meters.
    pub sigma_pos: f64,
    /// Broadcast velocity error, m/s.
    pub sigma_vel: f64,
    /// Gaussian error on CSI readings, dB.
    pub snr_jitter_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub packet_bits: u32,
    pub backoff_threshold_db: f64,
    pub entries: Vec<RateEntry>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig {
            packet_bits: PacketModel::default().bits,
            backoff_threshold_db: BACKOFF_THRESHOLD_DB,
            entries: RateTable::default().entries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Per-round, per-arm, per-client rows.
    pub records: bool,
    /// Per-round predictor log.
    pub predictions: bool,
    /// Per-broadcast fading forecasts.
    pub forecasts: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), records: false, predictions: false, forecasts: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    /// Simulated seconds.
    pub duration: f64,
    /// Channel synthesis rate, Hz.
    pub f_s: f64,
    /// CSI reading rate, Hz.
    pub f_r: f64,
    /// Sensor broadcast rate, Hz; follows `f_r` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_b: Option<f64>,
    /// Round duration, seconds.
    pub t_pkt: f64,
    /// Seconds of readings before the first round.
    pub warmup: f64,
    pub v_max: f64,
    pub arms: Vec<PolicyKind>,
    pub decode_mode: DecodeMode,
    pub radio: RadioParams,
    pub array: ArrayConfig,
    pub trajectory: TrajectoryConfig,
    pub clients: Vec<ClientConfig>,
    pub reflectors: Vec<Reflector>,
    pub noise: NoiseConfig,
    pub predictor: PredictorConfig,
    pub rates: RatesConfig,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "default".into(),
            seed: 42,
            duration: 60.0,
            f_s: 1000.0,
            f_r: 50.0,
            f_b: None,
            t_pkt: 0.002,
            warmup: 1.0,
            v_max: crate::geometry::DEFAULT_V_MAX,
            arms: PolicyKind::ALL.to_vec(),
            decode_mode: DecodeMode::Expectation,
            radio: RadioParams::default(),
            array: ArrayConfig::default(),
            trajectory: TrajectoryConfig::default(),
            clients: vec![ClientConfig::fixed(Vec3::new(-12.0, 4.0, 1.0)), ClientConfig::fixed(Vec3::new(12.0, -4.0, 1.0))],
            reflectors: Vec::new(),
            noise: NoiseConfig::default(),
            predictor: PredictorConfig::default(),
            rates: RatesConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(one_line(&e.to_string())))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Reads a config and applies `key=value` overrides (dotted keys, TOML
    /// values; bare words are taken as strings).
    pub fn load(path: Option<&std::path::Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| Error::Config(one_line(&e.to_string())))?
            }
            None => toml::Table::new(),
        };
        let defaults = toml::Table::try_from(ScenarioConfig::default()).expect("config serializes");
        for o in overrides {
            apply_override(&mut table, &defaults, o)?;
        }
        let cfg: ScenarioConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(one_line(&e.to_string())))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn broadcast_rate(&self) -> f64 {
        self.f_b.unwrap_or(self.f_r)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.duration >= 0.0 && self.duration.is_finite(), || format!("duration must be >= 0, got {}", self.duration))?;
        check(self.f_s > 0.0 && self.f_s.is_finite(), || format!("f_s must be > 0, got {}", self.f_s))?;
        check(self.f_r > 0.0 && self.f_r <= self.f_s, || format!("f_r must lie in (0, f_s], got {}", self.f_r))?;
        let f_b = self.broadcast_rate();
        check(f_b > 0.0 && f_b.is_finite(), || format!("f_b must be > 0, got {f_b}"))?;
        check(self.t_pkt > 0.0 && self.t_pkt.is_finite(), || format!("t_pkt must be > 0, got {}", self.t_pkt))?;
        check(self.warmup >= 0.0, || format!("warmup must be >= 0, got {}", self.warmup))?;
        check(self.v_max > 0.0, || format!("v_max must be > 0, got {}", self.v_max))?;
        check(!self.arms.is_empty(), || "arms must not be empty".into())?;
        let mut seen = self.arms.clone();
        seen.sort();
        seen.dedup();
        check(seen.len() == self.arms.len(), || "arms must not repeat".into())?;
        check(!self.clients.is_empty(), || "at least one client is required".into())?;
        self.radio.validate()?;
        for r in &self.reflectors {
            r.validate()?;
        }
        check(self.array.spacing > 0.0, || "array.spacing must be > 0".into())?;
        self.array.build(self.radio.wavelength).validate(self.radio.wavelength)?;
        let n = &self.noise;
        check(n.sigma_pos >= 0.0 && n.sigma_vel >= 0.0 && n.snr_jitter_db >= 0.0, || "noise terms must be >= 0".into())?;
        let p = &self.predictor;
        check(p.hysteresis_db >= 0.0 && p.window >= 1 && p.min_points >= 2, || {
            "predictor needs hysteresis_db >= 0, window >= 1, min_points >= 2".into()
        })?;
        check(self.rates.packet_bits >= 1, || "rates.packet_bits must be >= 1".into())?;
        RateTable { entries: self.rates.entries.clone() }.validate()?;
        if let TrajectoryConfig::Shuttle { speed, .. } = self.trajectory {
            check(speed >= 0.0 && speed.is_finite(), || format!("shuttle speed must be >= 0, got {speed}"))?;
        }
        let traj = self.trajectory.build(self.duration.max(1e-3))?;
        traj.check_flight(self.v_max)?;
        for c in &self.clients {
            c.site().validate()?;
            if let Some(w) = &c.walk {
                w.validate()?;
            }
        }
        Ok(())
    }

    pub fn policy_params(&self) -> PolicyParams {
        PolicyParams {
            table: RateTable { entries: self.rates.entries.clone() },
            packet: PacketModel { bits: self.rates.packet_bits },
            backoff_threshold_db: self.rates.backoff_threshold_db,
            max_streams: self.array.build(self.radio.wavelength).len(),
        }
    }

    /// Clients with their walks drawn from the scenario seed.
    pub fn moving_clients(&self) -> Result<Vec<MovingClient>> {
        self.clients
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let path = match c.walk {
                    Some(w) if w.max_speed > 0.0 => {
                        Some(random_waypoint(c.position, w, self.duration, seeds::derive(self.seed, seeds::WALK + i as u64))?)
                    }
                    _ => None,
                };
                Ok(MovingClient { site: c.site(), path })
            })
            .collect()
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Sets a dotted key in a TOML table from `key=value`. Missing parent
/// tables are copied from `defaults` so a single field can be changed.
pub fn apply_override(table: &mut toml::Table, defaults: &toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{spec}` has an empty key")));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    let mut def = Some(defaults);
    for p in &parts[..parts.len() - 1] {
        let fallback = def.and_then(|d| d.get(*p)).and_then(toml::Value::as_table);
        def = fallback;
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(fallback.cloned().unwrap_or_default()));
        cur = entry.as_table_mut().ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Every configurable field as `dotted.key = default`, for help output.
pub fn field_defaults() -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &toml::Value, out: &mut Vec<(String, String)>) {
        match v {
            toml::Value::Table(t) => {
                for (k, v) in t {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            _ => out.push((prefix.to_string(), v.to_string())),
        }
    }
    let cfg = ScenarioConfig::default();
    let value = toml::Value::try_from(&cfg).expect("config serializes");
    let mut out = Vec::new();
    walk("", &value, &mut out);
    out.push(("f_b".into(), "f_r".into()));
    out.push(("array.offsets".into(), "derived from elements and spacing".into()));
    out.push(("clients[].walk".into(), "none; {half_extent, max_speed <= 1.5}".into()));
    out.push(("trajectory.kind".into(), "shuttle | hover {position} | waypoints {start, legs}".into()));
    out.sort();
    out
}
