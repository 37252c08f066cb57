//! Flight paths, client placement and the sensor broadcast heard by clients.
//!
//! Positions are in meters with `z` as altitude above ground. A trajectory is
//! a start point followed by legs flown at constant speed, or hovers. Velocity
//! is right-continuous: at a leg junction the later leg's velocity applies.

use std::ops::{Add, Mul, Neg, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_V_MAX: f64 = 10.0;
pub const MIN_ALTITUDE: f64 = 2.0;
pub const MAX_ALTITUDE: f64 = 120.0;

/// Broadcast payload: 3D position and velocity, 4 bytes each.
pub const BROADCAST_PAYLOAD_BYTES: u32 = 24;
/// Basic rate used for the broadcast, bits per microsecond.
pub const BROADCAST_RATE_BITS_PER_US: f64 = 6.0;
pub const PLCP_US: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Length of the ground-plane projection.
    pub fn horizontal_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Mirror image below the ground plane.
    pub fn ground_image(self) -> Vec3 {
        Vec3::new(self.x, self.y, -self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// UAV state at one instant; also the payload of a sensor broadcast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightState {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Leg {
    Move { to: Vec3, speed: f64 },
    Hover { hover: f64 },
}

#[derive(Debug, Clone)]
struct Span {
    t0: f64,
    t1: f64,
    from: Vec3,
    velocity: Vec3,
}

/// Piecewise-linear constant-speed path.
#[derive(Debug, Clone)]
pub struct Trajectory {
    start: Vec3,
    legs: Vec<Leg>,
    spans: Vec<Span>,
}

impl Trajectory {
    pub fn new(start: Vec3, legs: Vec<Leg>) -> Result<Self> {
        if legs.is_empty() {
            return Err(Error::config("trajectory needs at least two waypoints"));
        }
        if !start.is_finite() {
            return Err(Error::config("trajectory start is not finite"));
        }
        let mut spans = Vec::with_capacity(legs.len());
        let mut t = 0.0;
        let mut at = start;
        for leg in &legs {
            match *leg {
                Leg::Move { to, speed } => {
                    if !(speed > 0.0 && speed.is_finite()) {
                        return Err(Error::config(format!("leg speed must be > 0, got {speed}")));
                    }
                    if !to.is_finite() {
                        return Err(Error::config("waypoint is not finite"));
                    }
                    let delta = to - at;
                    let len = delta.norm();
                    let dt = len / speed;
                    let velocity = if len > 0.0 { delta * (speed / len) } else { Vec3::ZERO };
                    spans.push(Span { t0: t, t1: t + dt, from: at, velocity });
                    t += dt;
                    at = to;
                }
                Leg::Hover { hover } => {
                    if !(hover >= 0.0 && hover.is_finite()) {
                        return Err(Error::config(format!("hover duration must be >= 0, got {hover}")));
                    }
                    spans.push(Span { t0: t, t1: t + hover, from: at, velocity: Vec3::ZERO });
                    t += hover;
                }
            }
        }
        Ok(Trajectory { start, legs, spans })
    }

    /// Stationary UAV.
    pub fn hover(position: Vec3, duration: f64) -> Result<Self> {
        Trajectory::new(position, vec![Leg::Hover { hover: duration }])
    }

    /// Back-and-forth flight between `a` and `b`, long enough to cover `duration`.
    pub fn shuttle(a: Vec3, b: Vec3, speed: f64, duration: f64) -> Result<Self> {
        if !(speed > 0.0) {
            return Trajectory::hover(a, duration);
        }
        let len = (b - a).norm();
        if len <= 0.0 {
            return Err(Error::config("shuttle endpoints coincide"));
        }
        let passes = ((duration * speed / len).ceil() as usize).max(1);
        let legs = (0..passes)
            .map(|i| Leg::Move { to: if i % 2 == 0 { b } else { a }, speed })
            .collect();
        Trajectory::new(a, legs)
    }

    pub fn start(&self) -> Vec3 {
        self.start
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn duration(&self) -> f64 {
        self.spans.last().map_or(0.0, |s| s.t1)
    }

    /// Checks altitude bounds and the speed cap for a UAV path.
    pub fn check_flight(&self, v_max: f64) -> Result<()> {
        let mut pts = vec![self.start];
        for leg in &self.legs {
            match *leg {
                Leg::Move { to, speed } => {
                    if speed > v_max {
                        return Err(Error::config(format!("leg speed {speed} m/s exceeds v_max {v_max} m/s")));
                    }
                    pts.push(to);
                }
                Leg::Hover { .. } => {}
            }
        }
        for p in pts {
            if !(MIN_ALTITUDE..=MAX_ALTITUDE).contains(&p.z) {
                return Err(Error::config(format!(
                    "altitude {} m outside [{MIN_ALTITUDE}, {MAX_ALTITUDE}] m",
                    p.z
                )));
            }
        }
        Ok(())
    }

    /// Largest speed along the path.
    pub fn max_speed(&self) -> f64 {
        self.spans.iter().map(|s| s.velocity.norm()).fold(0.0, f64::max)
    }

    /// State at time `t`, with right-continuous velocity at junctions.
    pub fn sample(&self, t: f64) -> Result<FlightState> {
        let duration = self.duration();
        if !(t >= 0.0 && t <= duration) {
            return Err(Error::OutOfRange { t, duration });
        }
        // first span whose start is after t, minus one; zero-length spans are skipped over
        let idx = self.spans.partition_point(|s| s.t0 <= t).saturating_sub(1);
        let idx = if t >= duration { self.last_nonempty() } else { idx };
        let s = &self.spans[idx];
        let position = if t >= s.t1 { s.from + s.velocity * (s.t1 - s.t0) } else { s.from + s.velocity * (t - s.t0) };
        Ok(FlightState { t, position, velocity: s.velocity })
    }

    fn last_nonempty(&self) -> usize {
        self.spans.iter().rposition(|s| s.t1 > s.t0).unwrap_or(self.spans.len() - 1)
    }
}

pub fn sample_flight(traj: &Trajectory, t: f64) -> Result<FlightState> {
    traj.sample(t)
}

pub const DEFAULT_NLOS_PENALTY_DB: f64 = 25.0;

/// Single-antenna ground client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientSite {
    pub position: Vec3,
    #[serde(default)]
    pub nlos: bool,
    #[serde(default = "default_nlos_penalty")]
    pub nlos_penalty_db: f64,
}

fn default_nlos_penalty() -> f64 {
    DEFAULT_NLOS_PENALTY_DB
}

impl ClientSite {
    pub fn new(position: Vec3) -> Self {
        ClientSite { position, nlos: false, nlos_penalty_db: DEFAULT_NLOS_PENALTY_DB }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() || self.position.z <= 0.0 {
            return Err(Error::config("client height must be > 0"));
        }
        if !(20.0..=30.0).contains(&self.nlos_penalty_db) {
            return Err(Error::config(format!(
                "nlos_penalty_db must lie in [20, 30], got {}",
                self.nlos_penalty_db
            )));
        }
        Ok(())
    }

    /// Extra loss in dB, zero for line-of-sight clients.
    pub fn penalty_db(&self) -> f64 {
        if self.nlos {
            self.nlos_penalty_db
        } else {
            0.0
        }
    }

    pub fn at(&self, position: Vec3) -> ClientSite {
        ClientSite { position, ..self.clone() }
    }
}

/// Relative motion of the UAV with respect to a client.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeState {
    /// UAV speed.
    pub v: f64,
    /// UAV position minus client position.
    pub p: Vec3,
    /// Angle between the UAV velocity and the UAV to client direction.
    pub alpha: f64,
    pub d_d: f64,
}

impl RelativeState {
    /// Speed along the direct path, v|cos α|.
    pub fn radial_speed(&self) -> f64 {
        self.v * self.alpha.cos().abs()
    }
}

pub fn relative_state(u: &FlightState, c: &ClientSite) -> RelativeState {
    let p = u.position - c.position;
    let d_d = p.norm();
    let v = u.velocity.norm();
    let alpha = if v > 0.0 && d_d > 0.0 {
        let cos = (u.velocity.dot(-p) / (v * d_d)).clamp(-1.0, 1.0);
        cos.acos()
    } else {
        std::f64::consts::FRAC_PI_2
    };
    RelativeState { v, p, alpha, d_d }
}

/// Optional zero-mean Gaussian error on broadcast fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BroadcastNoise {
    #[serde(default)]
    pub sigma_pos: f64,
    #[serde(default)]
    pub sigma_vel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorBroadcast {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl SensorBroadcast {
    pub fn state(&self) -> FlightState {
        FlightState { t: self.t, position: self.position, velocity: self.velocity }
    }
}

/// Broadcast instants `k / f_b` strictly inside `[0, duration)`.
pub fn tick_times(rate: f64, duration: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 / rate;
        if t >= duration - 1e-12 {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

pub fn broadcast_stream(
    traj: &Trajectory,
    f_b: f64,
    noise: BroadcastNoise,
    seed: u64,
) -> Result<Vec<SensorBroadcast>> {
    if !(f_b > 0.0 && f_b.is_finite()) {
        return Err(Error::config(format!("broadcast rate must be > 0, got {f_b}")));
    }
    if noise.sigma_pos < 0.0 || noise.sigma_vel < 0.0 {
        return Err(Error::config("noise sigmas must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos_n = Normal::new(0.0, noise.sigma_pos).map_err(|e| Error::config(e.to_string()))?;
    let vel_n = Normal::new(0.0, noise.sigma_vel).map_err(|e| Error::config(e.to_string()))?;
    let mut jitter = |n: &Normal<f64>, sigma: f64| {
        if sigma > 0.0 {
            Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng))
        } else {
            Vec3::ZERO
        }
    };
    tick_times(f_b, traj.duration())
        .into_iter()
        .map(|t| {
            let s = traj.sample(t)?;
            let dp = jitter(&pos_n, noise.sigma_pos);
            let dv = jitter(&vel_n, noise.sigma_vel);
            Ok(SensorBroadcast { t, position: s.position + dp, velocity: s.velocity + dv })
        })
        .collect()
}

/// Microseconds of airtime per second consumed by broadcasts at `f_b`.
pub fn broadcast_airtime_us(f_b: f64) -> f64 {
    let per = (BROADCAST_PAYLOAD_BYTES * 8) as f64 / BROADCAST_RATE_BITS_PER_US + PLCP_US;
    per * f_b
}

/// Fraction of airtime consumed by broadcasts at `f_b`.
pub fn broadcast_airtime_fraction(f_b: f64) -> f64 {
    broadcast_airtime_us(f_b) * 1e-6
}

/// Random-waypoint walk for a moving client inside a square box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkParams {
    /// Half side of the box centered at the client's nominal position.
    pub half_extent: f64,
    pub max_speed: f64,
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_extent > 0.0) || !(self.max_speed >= 0.0 && self.max_speed <= 1.5) {
            return Err(Error::config("walk needs half_extent > 0 and max_speed in [0, 1.5] m/s"));
        }
        Ok(())
    }
}

/// Piecewise-linear walk; speeds drawn uniformly from `[max/3, max]`.
pub fn random_waypoint(center: Vec3, walk: WalkParams, duration: f64, seed: u64) -> Result<Trajectory> {
    walk.validate()?;
    if walk.max_speed == 0.0 {
        return Trajectory::hover(center, duration);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = Uniform::new_inclusive(-walk.half_extent, walk.half_extent).map_err(|e| Error::config(e.to_string()))?;
    let speed = Uniform::new_inclusive(walk.max_speed / 3.0, walk.max_speed).map_err(|e| Error::config(e.to_string()))?;
    let mut legs = Vec::new();
    let mut at = center;
    let mut t = 0.0;
    while t < duration {
        let to = Vec3::new(center.x + offset.sample(&mut rng), center.y + offset.sample(&mut rng), center.z);
        let v = speed.sample(&mut rng);
        let len = (to - at).norm();
        if len < 1e-6 {
            continue;
        }
        t += len / v;
        legs.push(Leg::Move { to, speed: v });
        at = to;
    }
    Trajectory::new(center, legs)
}
