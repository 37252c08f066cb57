//! Canned scenarios for the experiments and acceptance checks.

use crate::channel::{synthesize_csi, AntennaArray, MovingClient, RadioParams, SynthOptions};
use crate::error::Result;
use crate::geometry::{broadcast_stream, BroadcastNoise, ClientSite, Leg, Trajectory, Vec3};
use crate::policies::PolicyKind;

use super::config::{ClientConfig, ScenarioConfig, TrajectoryConfig};
use super::run::{client_forecasts, fade_interval_pairs, mean_relative_error, RoundRecord};

/// Two clients 10 to 20 m from a UAV shuttling at altitude 10 m.
pub fn ordering(speed: f64, f_r: f64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        name: format!("ordering_v{speed}_fr{f_r}"),
        seed,
        f_r,
        trajectory: TrajectoryConfig::Shuttle { from: Vec3::new(-15.0, 0.0, 10.0), to: Vec3::new(15.0, 0.0, 10.0), speed },
        ..ScenarioConfig::default()
    }
}

/// Hovering UAV with two clients whose channel directions are nearly
/// orthogonal and strong.
pub fn static_orthogonal(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        name: "static_orthogonal".into(),
        seed,
        duration: 2.0,
        warmup: 0.2,
        trajectory: TrajectoryConfig::Hover { position: Vec3::new(0.0, 0.0, 10.0) },
        clients: vec![ClientConfig::fixed(Vec3::new(-6.0, 0.0, 1.0)), ClientConfig::fixed(Vec3::new(6.0, 0.0, 1.0))],
        ..ScenarioConfig::default()
    }
}

/// One pass from above one client toward the other at 1.3 m/s.
pub fn trajectory2(seed: u64) -> ScenarioConfig {
    let start = Vec3::new(-10.0, 2.0, 10.0);
    let end = Vec3::new(10.0, 2.0, 10.0);
    let speed = 1.3;
    ScenarioConfig {
        name: "trajectory2".into(),
        seed,
        duration: (end - start).norm() / speed,
        warmup: 0.5,
        trajectory: TrajectoryConfig::Waypoints { start, legs: vec![Leg::Move { to: end, speed }] },
        clients: vec![ClientConfig::fixed(Vec3::new(-12.0, 0.0, 1.0)), ClientConfig::fixed(Vec3::new(12.0, 0.0, 1.0))],
        ..ScenarioConfig::default()
    }
}

/// Per-client throughput of one arm in `bins` equal time bins.
pub fn client_curves(records: &[RoundRecord], arm: PolicyKind, clients: usize, bins: usize) -> Vec<Vec<f64>> {
    let mut sum = vec![vec![0.0; bins]; clients];
    let mut count = vec![0usize; bins];
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return sum;
    };
    let span = (last.t - first.t).max(f64::MIN_POSITIVE);
    for r in records {
        let b = (((r.t - first.t) / span * bins as f64) as usize).min(bins - 1);
        count[b] += 1;
        if let Some(a) = r.arms.iter().find(|a| a.kind == arm) {
            for c in &a.clients {
                sum[c.client][b] += c.rate * c.delivered;
            }
        }
    }
    for row in sum.iter_mut() {
        for (x, n) in row.iter_mut().zip(&count) {
            if *n > 0 {
                *x /= *n as f64;
            }
        }
    }
    sum
}

/// Fade spacing along a straight radial flight away from one client.
#[derive(Debug, Clone, PartialEq)]
pub struct FadeStudy {
    /// (ground truth, forecast) seconds.
    pub pairs: Vec<(f64, f64)>,
}

impl FadeStudy {
    pub fn mean_relative_error(&self) -> f64 {
        mean_relative_error(&self.pairs)
    }

    pub fn mean_forecast(&self) -> f64 {
        self.pairs.iter().map(|p| p.1).sum::<f64>() / self.pairs.len().max(1) as f64
    }

    pub fn mean_truth(&self) -> f64 {
        self.pairs.iter().map(|p| p.0).sum::<f64>() / self.pairs.len().max(1) as f64
    }
}

/// Horizontal flight at altitude `altitude` moving away from a client at
/// height 1 m, covering horizontal distances `distance ± half_span`.
pub fn fade_study(speed: f64, distance: f64, half_span: f64, altitude: f64, f_b: f64) -> Result<FadeStudy> {
    let params = RadioParams::default();
    let client = MovingClient::fixed(ClientSite::new(Vec3::new(0.0, 0.0, 1.0)));
    let start = Vec3::new(distance - half_span, 0.0, altitude);
    let end = Vec3::new(distance + half_span, 0.0, altitude);
    let traj = Trajectory::new(start, vec![Leg::Move { to: end, speed }])?;
    let array = AntennaArray::linear(2, params.wavelength);
    let clients = [client];
    let truth = synthesize_csi(&traj, &clients, &array, &params, &SynthOptions { f_s: 2000.0, ..SynthOptions::default() })?;
    let broadcasts = broadcast_stream(&traj, f_b, BroadcastNoise::default(), 0)?;
    let forecasts = client_forecasts(&broadcasts, &clients, params.wavelength);
    Ok(FadeStudy { pairs: fade_interval_pairs(&truth, &forecasts, &traj, &clients) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canned_configs_validate() {
        ordering(5.0, 50.0, 1).validate().unwrap();
        ordering(0.0, 25.0, 1).validate().unwrap();
        static_orthogonal(1).validate().unwrap();
        trajectory2(1).validate().unwrap();
    }

    #[test]
    fn fade_study_tracks_truth() {
        let s = fade_study(3.0, 15.0, 2.5, 10.0, 50.0).unwrap();
        assert!(s.pairs.len() >= 3, "{:?}", s.pairs);
        assert!(s.mean_relative_error() < 0.15, "{}", s.mean_relative_error());
    }
}
