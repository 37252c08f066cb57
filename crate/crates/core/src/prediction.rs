//! Client-side channel prediction.
//!
//! Each antenna's SNR (dB) is tracked with a parabola in time whose vertex is
//! pinned half a fading interval after the last fade minimum, so only the
//! curvature and offset are fitted. Predictions are anchored on the latest
//! reading and extrapolate the fitted change. Phase differences are held
//! outside fades and extrapolated linearly while exactly one of the two
//! antennas involved is fading.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{combined_snr_db, ChannelSample};
use crate::fading::FadingForecast;

/// Direction `(1, h_2/h_1, ..., h_M/h_1)` of a client's channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDirection {
    pub ratios: Vec<Complex64>,
}

impl ChannelDirection {
    pub fn from_gains(gains: &[Complex64]) -> Self {
        let h1 = gains[0];
        let ratios = gains
            .iter()
            .enumerate()
            .map(|(m, h)| if m == 0 { Complex64::new(1.0, 0.0) } else { h / h1 })
            .collect();
        ChannelDirection { ratios }
    }

    /// From per-antenna amplitude ratios `|h_m|/|h_1|` and phase differences.
    pub fn from_amp_phase(amps: &[f64], dphi: &[f64]) -> Self {
        let ratios = amps
            .iter()
            .zip(dphi)
            .enumerate()
            .map(|(m, (a, p))| if m == 0 { Complex64::new(1.0, 0.0) } else { Complex64::from_polar(*a, *p) })
            .collect();
        ChannelDirection { ratios }
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.ratios.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Angle in degrees between the two directions' complex lines.
    pub fn angle_deg(&self, other: &ChannelDirection) -> f64 {
        let dot: Complex64 = self.ratios.iter().zip(&other.ratios).map(|(a, b)| a.conj() * b).sum();
        let na: f64 = self.ratios.iter().map(|c| c.norm_sqr()).sum();
        let nb: f64 = other.ratios.iter().map(|c| c.norm_sqr()).sum();
        let c = (dot.norm() / (na * nb).sqrt()).clamp(0.0, 1.0);
        c.acos().to_degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictorConfig {
    pub hysteresis_db: f64,
    /// Fades remembered for the threshold median.
    pub window: usize,
    /// Fewer buffered points than this falls back to holding the last value.
    pub min_points: usize,
    /// Refine the fade-minimum time by a parabola through three samples.
    pub refine_minimum: bool,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig { hysteresis_db: 0.5, window: 3, min_points: 3, refine_minimum: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadeEvent {
    Enter,
    Exit,
}

/// Least squares of `x ~ a (t - tv)^2 + c`.
pub fn fit_pinned_quadratic(points: &[(f64, f64)], tv: f64) -> (f64, f64) {
    let n = points.len() as f64;
    let (mut su, mut suu, mut sx, mut sux) = (0.0, 0.0, 0.0, 0.0);
    for &(t, x) in points {
        let u = (t - tv) * (t - tv);
        su += u;
        suu += u * u;
        sx += x;
        sux += u * x;
    }
    let det = n * suu - su * su;
    if det.abs() <= 1e-12 * (n * suu).max(1e-300) {
        return (0.0, sx / n);
    }
    let a = (n * sux - su * sx) / det;
    let c = (sx - a * su) / n;
    (a, c)
}

/// Ordinary least-squares line `x ~ slope * t + intercept`.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let t0 = points[0].0;
    let (mut st, mut stt, mut sx, mut stx) = (0.0, 0.0, 0.0, 0.0);
    for &(t, x) in points {
        let t = t - t0;
        st += t;
        stt += t * t;
        sx += x;
        stx += t * x;
    }
    let det = n * stt - st * st;
    if det.abs() <= 1e-300 {
        return (0.0, sx / n);
    }
    let slope = (n * stx - st * sx) / det;
    let intercept = (sx - slope * st) / n - slope * t0;
    (slope, intercept)
}

/// SNR tracker and fade detector for one antenna.
#[derive(Debug, Clone)]
pub struct AntennaTrack {
    cfg: PredictorConfig,
    buf: Vec<(f64, f64)>,
    in_fade: bool,
    threshold: f64,
    run_max: f64,
    run_min: f64,
    /// (in-fade minimum, fluctuation range) of completed fades.
    fades: Vec<(f64, f64)>,
    peak: f64,
    fade_min: f64,
    fade_min_t: f64,
    min_confirmed: bool,
    fade_buf: Vec<(f64, f64)>,
    last_min: Option<f64>,
}

impl AntennaTrack {
    pub fn new(cfg: PredictorConfig) -> Self {
        AntennaTrack {
            cfg,
            buf: Vec::new(),
            in_fade: false,
            threshold: f64::NAN,
            run_max: f64::NEG_INFINITY,
            run_min: f64::INFINITY,
            fades: Vec::new(),
            peak: f64::NEG_INFINITY,
            fade_min: f64::INFINITY,
            fade_min_t: 0.0,
            min_confirmed: false,
            fade_buf: Vec::new(),
            last_min: None,
        }
    }

    pub fn in_fade(&self) -> bool {
        self.in_fade
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn last_minimum(&self) -> Option<f64> {
        self.last_min
    }

    pub fn fades_seen(&self) -> usize {
        self.fades.len()
    }

    pub fn buffer(&self) -> &[(f64, f64)] {
        &self.buf
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        self.buf.last().copied()
    }

    fn update_threshold(&mut self, x: f64) {
        let w = self.cfg.window.max(1);
        if self.fades.len() < w {
            self.run_max = self.run_max.max(x);
            self.run_min = self.run_min.min(x);
            self.threshold = 0.5 * (self.run_max + self.run_min);
        } else {
            let mut levels: Vec<f64> = self.fades[self.fades.len() - w..].iter().map(|(m, r)| m + r / 2.0).collect();
            levels.sort_by(f64::total_cmp);
            let mid = levels.len() / 2;
            self.threshold = if levels.len() % 2 == 1 { levels[mid] } else { 0.5 * (levels[mid - 1] + levels[mid]) };
        }
    }

    fn confirm_minimum(&mut self) {
        self.min_confirmed = true;
        let (j, _) = self
            .fade_buf
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .expect("fade buffer holds the minimum");
        let t_j = self.fade_buf[j].0;
        let mut tm = t_j;
        if self.cfg.refine_minimum && j > 0 && j + 1 < self.fade_buf.len() {
            let lin = |o: usize| 10f64.powf(self.fade_buf[o].1 / 10.0);
            let (y0, y1, y2) = (lin(j - 1), lin(j), lin(j + 1));
            let den = y0 - 2.0 * y1 + y2;
            let dt = self.fade_buf[j + 1].0 - t_j;
            if den > 0.0 && (t_j - self.fade_buf[j - 1].0 - dt).abs() < 1e-9 {
                tm = t_j + 0.5 * (y0 - y2) / den * dt;
            }
        }
        self.last_min = Some(tm);
        self.buf.retain(|p| p.0 >= t_j);
    }

    /// Adds a reading and returns a fade transition if one happened.
    pub fn observe(&mut self, t: f64, x: f64) -> Option<FadeEvent> {
        let prev = self.buf.last().copied();
        self.buf.push((t, x));
        self.update_threshold(x);
        let h = self.cfg.hysteresis_db;
        let mut event = None;
        if !self.in_fade {
            self.peak = self.peak.max(x);
            if x < self.threshold - h / 2.0 {
                self.in_fade = true;
                self.fade_min = x;
                self.fade_min_t = t;
                self.min_confirmed = false;
                self.fade_buf = prev.into_iter().collect();
                event = Some(FadeEvent::Enter);
            }
        }
        if self.in_fade {
            self.fade_buf.push((t, x));
            if !self.min_confirmed {
                if x < self.fade_min {
                    self.fade_min = x;
                    self.fade_min_t = t;
                } else if x > self.fade_min + h {
                    self.confirm_minimum();
                }
            }
            if event.is_none() && x > self.threshold + h / 2.0 {
                self.in_fade = false;
                self.fades.push((self.fade_min, self.peak - self.fade_min));
                self.peak = x;
                if !self.min_confirmed {
                    let t_min = self.fade_min_t;
                    self.last_min = Some(t_min);
                    self.buf.retain(|p| p.0 >= t_min);
                }
                event = Some(FadeEvent::Exit);
            }
        }
        event
    }

    /// Predicted SNR at `t`, and whether the fallback hold was used.
    pub fn predict(&self, t: f64, t_fading: f64) -> (f64, bool) {
        let Some((tl, xl)) = self.last() else {
            return (f64::NAN, true);
        };
        let Some(t_min) = self.last_min else {
            return (xl, true);
        };
        if !t_fading.is_finite() || self.buf.len() < self.cfg.min_points.max(2) {
            return (xl, true);
        }
        let tv = t_min + t_fading / 2.0;
        let (a, _) = fit_pinned_quadratic(&self.buf, tv);
        // past the next expected minimum the parabola repeats
        let q = |s: f64| {
            let s = if s > t_min + t_fading { t_min + (s - t_min).rem_euclid(t_fading) } else { s };
            a * (s - tv) * (s - tv)
        };
        let y = xl + q(t) - q(tl);
        if y.is_finite() {
            (y, false)
        } else {
            (xl, true)
        }
    }
}

/// Phase-difference tracker for one antenna `m > 1`.
#[derive(Debug, Clone, Default)]
pub struct PhaseTrack {
    buf: Vec<(f64, f64)>,
    last: Option<f64>,
}

impl PhaseTrack {
    pub fn observe(&mut self, t: f64, dphi: f64, active: bool) {
        self.last = Some(dphi);
        if active {
            self.buf.push((t, dphi));
        } else {
            self.buf.clear();
        }
    }

    pub fn predict(&self, t: f64) -> f64 {
        let last = self.last.unwrap_or(0.0);
        if self.buf.len() < 2 {
            return last;
        }
        let (slope, intercept) = fit_line(&self.buf);
        let y = slope * t + intercept;
        if y.is_finite() {
            y
        } else {
            last
        }
    }

    pub fn buffer(&self) -> &[(f64, f64)] {
        &self.buf
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPrediction {
    pub t_target: f64,
    pub snr_db: Vec<f64>,
    pub direction: ChannelDirection,
    /// Set when any antenna fell back to holding its last reading.
    pub fallback: bool,
}

impl ChannelPrediction {
    /// Best-antenna aggregate.
    pub fn aggregate_snr_db(&self) -> f64 {
        self.snr_db.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn combined_snr_db(&self) -> f64 {
        combined_snr_db(&self.snr_db)
    }
}

/// Predictor state for one client.
#[derive(Debug, Clone)]
pub struct PredictorState {
    pub antennas: Vec<AntennaTrack>,
    pub phases: Vec<PhaseTrack>,
    pub forecast: Option<FadingForecast>,
    last_t: Option<f64>,
}

impl PredictorState {
    pub fn new(m: usize, cfg: PredictorConfig) -> Self {
        PredictorState {
            antennas: (0..m).map(|_| AntennaTrack::new(cfg)).collect(),
            phases: (0..m).map(|_| PhaseTrack::default()).collect(),
            forecast: None,
            last_t: None,
        }
    }

    pub fn last_time(&self) -> Option<f64> {
        self.last_t
    }

    pub fn set_forecast(&mut self, f: FadingForecast) {
        self.forecast = Some(f);
    }

    /// Feeds one reading; returns per-antenna fade transitions.
    pub fn ingest(&mut self, sample: &ChannelSample, forecast: Option<FadingForecast>) -> Vec<Option<FadeEvent>> {
        if let Some(f) = forecast {
            self.forecast = Some(f);
        }
        let events = self.detect_fade(sample);
        let f1 = self.antennas[0].in_fade();
        for m in 1..self.phases.len() {
            let active = f1 != self.antennas[m].in_fade();
            self.phases[m].observe(sample.t, sample.dphi[m], active);
        }
        self.last_t = Some(sample.t);
        events
    }

    /// Runs fade detection on a reading, updating the SNR trackers.
    pub fn detect_fade(&mut self, sample: &ChannelSample) -> Vec<Option<FadeEvent>> {
        self.antennas.iter_mut().zip(&sample.snr_db).map(|(a, x)| a.observe(sample.t, *x)).collect()
    }

    pub fn predict(&self, t_target: f64) -> ChannelPrediction {
        let t_fading = self.forecast.map_or(f64::INFINITY, |f| f.t_fading);
        let mut fallback = false;
        let snr_db: Vec<f64> = self
            .antennas
            .iter()
            .map(|a| {
                let (y, fb) = a.predict(t_target, t_fading);
                fallback |= fb;
                y
            })
            .collect();
        let amps: Vec<f64> = snr_db.iter().map(|s| 10f64.powf((s - snr_db[0]) / 20.0)).collect();
        let dphi: Vec<f64> = self.phases.iter().enumerate().map(|(m, p)| if m == 0 { 0.0 } else { p.predict(t_target) }).collect();
        ChannelPrediction { t_target, snr_db, direction: ChannelDirection::from_amp_phase(&amps, &dphi), fallback }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RadioParams;
    use approx::assert_relative_eq;

    fn sample(t: f64, snr: &[f64], dphi: &[f64]) -> ChannelSample {
        let params = RadioParams::default();
        let gains: Vec<Complex64> = snr
            .iter()
            .zip(dphi)
            .map(|(s, p)| Complex64::from_polar(10f64.powf((s - params.ref_snr_db) / 20.0), *p))
            .collect();
        ChannelSample { t, snr_db: snr.to_vec(), dphi: dphi.to_vec(), gains }
    }

    #[test]
    fn pinned_quadratic_exact() {
        let tv = 0.7;
        let pts: Vec<(f64, f64)> = [0.1, 0.3, 0.45].iter().map(|&t| (t, -3.5 * (t - tv) * (t - tv) + 20.0)).collect();
        let (a, c) = fit_pinned_quadratic(&pts, tv);
        assert_relative_eq!(a, -3.5, epsilon = 1e-9);
        assert_relative_eq!(c, 20.0, epsilon = 1e-9);
    }

    #[test]
    fn line_fit_exact() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (10.0 + i as f64 * 0.02, 0.3 - 4.0 * i as f64 * 0.02)).collect();
        let (s, b) = fit_line(&pts);
        assert_relative_eq!(s, -4.0, epsilon = 1e-9);
        assert_relative_eq!(s * 10.0 + b, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn constant_stream_holds() {
        let mut p = PredictorState::new(2, PredictorConfig::default());
        for i in 0..50 {
            p.ingest(&sample(i as f64 * 0.02, &[30.0, 28.0], &[0.0, 1.2]), None);
        }
        let pr = p.predict(1.0);
        assert_eq!(pr.snr_db, vec![30.0, 28.0]);
        assert_relative_eq!(pr.direction.ratios[1].arg(), 1.2, epsilon = 1e-12);
        assert!(pr.fallback);
        assert!(!p.antennas[0].in_fade());
    }

    #[test]
    fn monotone_drop_enters_once() {
        let mut a = AntennaTrack::new(PredictorConfig::default());
        a.observe(0.0, 30.0);
        let mut enters = 0;
        for i in 0..40 {
            if a.observe(0.02 + i as f64 * 0.02, 29.5 - i as f64 * 0.5) == Some(FadeEvent::Enter) {
                enters += 1;
            }
        }
        assert_eq!(enters, 1);
    }

    #[test]
    fn small_dip_is_ignored() {
        let mut a = AntennaTrack::new(PredictorConfig::default());
        a.observe(0.0, 30.0);
        assert_eq!(a.observe(0.02, 10.0), Some(FadeEvent::Enter));
        assert_eq!(a.observe(0.04, 25.0), Some(FadeEvent::Exit));
        assert_eq!(a.threshold(), 20.0);
        assert_eq!(a.observe(0.06, 19.9), None);
        assert_eq!(a.observe(0.08, 25.0), None);
        assert_eq!(a.observe(0.10, 19.7), Some(FadeEvent::Enter));
    }

    #[test]
    fn threshold_median_after_window() {
        let mut a = AntennaTrack::new(PredictorConfig::default());
        let mut t = 0.0;
        let mut feed = |a: &mut AntennaTrack, x: f64| {
            a.observe(t, x);
            t += 0.02;
        };
        // three fades with (peak, min) = (30, 10), (30, 14), (30, 6)
        feed(&mut a, 30.0);
        for lo in [10.0, 14.0, 6.0] {
            feed(&mut a, lo);
            feed(&mut a, lo + 0.1);
            feed(&mut a, 30.0);
        }
        assert_eq!(a.fades_seen(), 3);
        feed(&mut a, 30.0);
        // levels min + range/2 = 20, 22, 18 -> median 20
        assert_eq!(a.threshold(), 20.0);
    }

    #[test]
    fn zero_horizon_returns_last_reading() {
        let mut p = PredictorState::new(2, PredictorConfig::default());
        let f = FadingForecast { t: 0.0, t_fading: 0.5, delta_dd: 1.0, v_radial: 2.0, axis: crate::fading::ForecastAxis::Horizontal };
        let mut t = 0.0;
        for i in 0..60 {
            let x = 30.0 - 12.0 * ((i as f64) * 0.02 * 2.0 * std::f64::consts::PI / 0.5).cos().abs();
            p.ingest(&sample(t, &[x, x - 1.0], &[0.0, 0.4]), Some(f));
            t += 0.02;
        }
        let last = p.antennas[0].last().unwrap();
        let pr = p.predict(last.0);
        assert_relative_eq!(pr.snr_db[0], last.1, epsilon = 1e-12);
        assert!(pr.snr_db.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn prediction_turns_up_after_expected_minimum() {
        // dB parabola lobes with minima every 0.5 s
        let period = 0.5;
        let lobe = |t: f64| 30.0 - 40.0 * ((t.rem_euclid(period) - period / 2.0) / (period / 2.0)).powi(2);
        let f = FadingForecast { t: 0.0, t_fading: period, delta_dd: 1.0, v_radial: 2.0, axis: crate::fading::ForecastAxis::Horizontal };
        let mut p = PredictorState::new(1, PredictorConfig::default());
        for i in 0..=124 {
            let t = 0.01 + i as f64 * 0.02;
            p.ingest(&sample(t, &[lobe(t)], &[0.0]), Some(f));
        }
        let (tl, xl) = p.antennas[0].last().unwrap();
        assert_relative_eq!(tl, 2.49, epsilon = 1e-9);
        let pr = p.predict(2.51);
        assert!(!pr.fallback);
        assert!((pr.snr_db[0] - xl).abs() < 1.5, "{} vs {xl}", pr.snr_db[0]);
    }

    #[test]
    fn phase_held_outside_fades_and_ramped_inside() {
        let mut ph = PhaseTrack::default();
        ph.observe(0.0, 0.5, false);
        assert_eq!(ph.predict(0.1), 0.5);
        ph.observe(0.02, 0.6, true);
        ph.observe(0.04, 0.8, true);
        assert_relative_eq!(ph.predict(0.06), 1.0, epsilon = 1e-12);
        ph.observe(0.06, 1.1, false);
        assert_eq!(ph.predict(0.08), 1.1);
    }

    #[test]
    fn direction_angle() {
        let a = ChannelDirection { ratios: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)] };
        let b = ChannelDirection { ratios: vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)] };
        assert_relative_eq!(a.angle_deg(&b), 45.0, epsilon = 1e-9);
        assert_relative_eq!(b.angle_deg(&b), 0.0, epsilon = 1e-6);
    }
}
