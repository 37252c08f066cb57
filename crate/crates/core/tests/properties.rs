use airrate::channel::{two_ray_gain, ChannelSample, RadioParams};
use airrate::geometry::{broadcast_airtime_fraction, random_waypoint, Leg, Trajectory, Vec3, WalkParams};
use airrate::harness::{run_scenario, ScenarioConfig};
use airrate::mumimo::{cos_sq_theta, project_snr};
use airrate::prediction::{PredictorConfig, PredictorState};
use airrate::rates::{error_propagation, error_propagation_product, rate_objective, select_rate, PacketModel, RateTable};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vector(m: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), m).prop_filter("non-zero", |v| v.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6)
}

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = Vec3> {
    (lo..hi, lo..hi, lo..hi).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #[test]
    fn projection_never_gains(d in vector(3), other in vector(3), snr in 0.0f64..50.0) {
        let c = cos_sq_theta(&d, &[&other]).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        let p = project_snr(snr, c);
        prop_assert!(p.delta_db() >= 0.0);
    }

    #[test]
    fn propagation_forms_agree(p in prop::collection::vec(0.0f64..=1.0, 1..6)) {
        prop_assert!((error_propagation(&p) - error_propagation_product(&p)).abs() <= 1e-12);
        let v = error_propagation(&p);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn selected_rate_is_optimal(snr in -5.0f64..50.0, k in 1usize..4) {
        let table = RateTable::default();
        let packet = PacketModel::default();
        let choice = select_rate(snr, k, &table, &packet);
        let best = rate_objective(snr, k, &table.entries[choice.index], &packet);
        for e in &table.entries {
            prop_assert!(rate_objective(snr, k, e, &packet) <= best);
        }
    }

    #[test]
    fn two_ray_gain_is_bounded(d in 1.0f64..100.0, extra in 0.0f64..5.0) {
        let params = RadioParams::default();
        let h = two_ray_gain(d, d + extra, &params).norm();
        let bound = 1.0 / d + params.rho.abs() / (d + extra);
        prop_assert!(h <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn flights_are_continuous(start in vec3(-20.0, 20.0), ends in prop::collection::vec((vec3(-20.0, 20.0), 0.5f64..10.0), 1..4)) {
        let legs: Vec<Leg> = ends.iter().map(|&(to, speed)| Leg::Move { to, speed }).collect();
        let traj = Trajectory::new(start, legs).unwrap();
        let v_max = traj.max_speed();
        let dt = 1e-2;
        let mut prev = traj.sample(0.0).unwrap();
        let n = (traj.duration() / dt) as usize;
        for i in 1..=n {
            let s = traj.sample(i as f64 * dt).unwrap();
            prop_assert!((s.position - prev.position).norm() <= v_max * dt + 1e-9);
            prop_assert!(s.velocity.norm() <= v_max + 1e-9);
            prev = s;
        }
    }

    #[test]
    fn walks_stay_in_their_box(seed in any::<u64>(), half in 0.5f64..5.0, speed in 0.1f64..1.5) {
        let c = Vec3::new(3.0, -2.0, 1.0);
        let walk = random_waypoint(c, WalkParams { half_extent: half, max_speed: speed }, 20.0, seed).unwrap();
        prop_assert!(walk.duration() >= 20.0);
        for i in 0..=200 {
            let p = walk.sample(i as f64 * 0.1).unwrap().position;
            prop_assert!((p.x - c.x).abs() <= half + 1e-9 && (p.y - c.y).abs() <= half + 1e-9);
            prop_assert!((p.z - c.z).abs() < 1e-12);
        }
        prop_assert!(walk.max_speed() <= speed + 1e-12);
    }

    #[test]
    fn airtime_is_linear(f_b in 1.0f64..500.0) {
        let a = broadcast_airtime_fraction(f_b);
        prop_assert!((a - f_b * 132e-6).abs() < 1e-15);
        prop_assert!(broadcast_airtime_fraction(2.0 * f_b) > a);
    }

    #[test]
    fn predictor_output_stays_finite(xs in prop::collection::vec((0.0f64..40.0, 0.0f64..40.0, -3.0f64..3.0), 1..120), horizon in 0.0f64..0.02) {
        let params = RadioParams::default();
        let mut p = PredictorState::new(2, PredictorConfig::default());
        for (i, (a, b, dphi)) in xs.iter().enumerate() {
            let t = i as f64 * 0.02;
            let gains = vec![
                Complex64::from_polar(10f64.powf((a - params.ref_snr_db) / 20.0), 0.0),
                Complex64::from_polar(10f64.powf((b - params.ref_snr_db) / 20.0), *dphi),
            ];
            p.ingest(&ChannelSample { t, snr_db: vec![*a, *b], dphi: vec![0.0, *dphi], gains }, None);
            let pr = p.predict(t + horizon);
            prop_assert!(pr.snr_db.iter().all(|s| s.is_finite()));
            prop_assert!(pr.direction.is_finite());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn runs_repeat_exactly(seed in any::<u64>(), speed in 0.0f64..9.0) {
        let mut cfg = ScenarioConfig { seed, duration: 1.0, warmup: 0.3, ..ScenarioConfig::default() };
        cfg = airrate::harness::SweepAxis::Velocity.apply(&cfg, speed).unwrap();
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        prop_assert_eq!(a.summary(), b.summary());
        for arm in &a.summary().arms {
            prop_assert!(arm.mean_throughput_mbps >= 0.0 && arm.mean_throughput_mbps.is_finite());
        }
    }

    #[test]
    fn config_roundtrips(seed in any::<u64>(), f_r in 1.0f64..500.0, duration in 0.0f64..100.0) {
        let cfg = ScenarioConfig { seed, f_r, duration, ..ScenarioConfig::default() };
        prop_assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
