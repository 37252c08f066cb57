//! Closed-form fading analysis for the two-ray channel.
//!
//! The ground ray's excess length `e(d_d) = d_d (gamma - 1)` fixes where
//! fades occur: destructive where `e = beta * lambda`, constructive where
//! `e = (beta + 1/2) * lambda`. Two flight directions are modeled. In
//! horizontal flight the UAV altitude `d_U` is fixed and `e` shrinks with
//! distance; in vertical flight the horizontal offset `d_H` is fixed and `e`
//! grows toward `2 d_c`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{relative_state, ClientSite, SensorBroadcast};

/// Tolerance on fade-position roots, meters.
pub const ROOT_TOL: f64 = 1e-9;
/// `|cos|` above which motion counts as aligned with an axis.
pub const AXIS_ALIGNMENT: f64 = 0.95;
const FAR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightAxis {
    Horizontal,
    Vertical,
}

/// Fixed parameters of the path-ratio law for one flight direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadeGeometry {
    Horizontal { d_u: f64, d_c: f64 },
    Vertical { d_h: f64, d_c: f64 },
}

impl FadeGeometry {
    pub fn axis(&self) -> FlightAxis {
        match self {
            FadeGeometry::Horizontal { .. } => FlightAxis::Horizontal,
            FadeGeometry::Vertical { .. } => FlightAxis::Vertical,
        }
    }

    /// Smallest physical direct distance (UAV directly above the client, or
    /// level with it).
    pub fn d_min(&self) -> f64 {
        match *self {
            FadeGeometry::Horizontal { d_u, d_c } => (d_u - d_c).abs(),
            FadeGeometry::Vertical { d_h, .. } => d_h,
        }
    }

    pub fn gamma(&self, d_d: f64) -> f64 {
        match *self {
            FadeGeometry::Horizontal { d_u, d_c } => (d_d * d_d + 4.0 * d_u * d_c).sqrt() / d_d,
            FadeGeometry::Vertical { d_h, d_c } => {
                let s = (d_d * d_d - d_h * d_h).max(0.0).sqrt();
                (d_d * d_d + 4.0 * d_c * d_c + 4.0 * d_c * s).sqrt() / d_d
            }
        }
    }

    pub fn gamma_prime(&self, d_d: f64) -> f64 {
        match *self {
            FadeGeometry::Horizontal { d_u, d_c } => {
                let c = 4.0 * d_u * d_c;
                -c / (d_d * d_d * (d_d * d_d + c).sqrt())
            }
            FadeGeometry::Vertical { d_h, d_c } => {
                let s = (d_d * d_d - d_h * d_h).max(0.0).sqrt();
                let q = d_d * d_d + 4.0 * d_c * d_c + 4.0 * d_c * s;
                let dq = 2.0 * d_d + 4.0 * d_c * d_d / s;
                (dq * d_d - 2.0 * q) / (2.0 * d_d * d_d * q.sqrt())
            }
        }
    }

    /// Excess length of the ground ray, `d_d (gamma - 1)`.
    pub fn excess(&self, d_d: f64) -> f64 {
        match *self {
            FadeGeometry::Horizontal { d_u, d_c } => {
                // stable form of sqrt(d^2 + c) - d
                let c = 4.0 * d_u * d_c;
                c / ((d_d * d_d + c).sqrt() + d_d)
            }
            FadeGeometry::Vertical { .. } => d_d * (self.gamma(d_d) - 1.0),
        }
    }

    /// Derivative of the excess length, `a_0 = gamma' d_d + gamma - 1`.
    pub fn a0(&self, d_d: f64) -> f64 {
        self.gamma_prime(d_d) * d_d + self.gamma(d_d) - 1.0
    }

    /// Direct distance where the excess equals `target`, if any.
    pub fn solve(&self, target: f64) -> Option<f64> {
        let lo = self.d_min().max(1e-9);
        let (e_lo, e_hi) = (self.excess(lo), self.excess(FAR));
        let (min, max) = if e_lo < e_hi { (e_lo, e_hi) } else { (e_hi, e_lo) };
        if !(target > min && target < max) {
            return None;
        }
        let increasing = e_hi > e_lo;
        let (mut a, mut b) = (lo, FAR);
        while b - a > ROOT_TOL * b.max(1.0) {
            let mid = 0.5 * (a + b);
            if (self.excess(mid) < target) == increasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadeKind {
    Destructive,
    Constructive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadePoint {
    /// Integer order for destructive points, half-integer for constructive.
    pub beta: f64,
    pub d_d: f64,
}

/// Fade positions ordered by increasing `d_d`. In horizontal flight the
/// order `beta` falls as `d_d` grows; in vertical flight it rises.
#[derive(Debug, Clone, PartialEq)]
pub struct FadeSeries {
    pub axis: FlightAxis,
    pub kind: FadeKind,
    pub points: Vec<FadePoint>,
    /// Orders with no root in the physical range.
    pub skipped: Vec<u32>,
}

impl FadeSeries {
    pub fn distances(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.d_d).collect()
    }
}

pub fn fade_positions(geom: FadeGeometry, wavelength: f64, betas: std::ops::RangeInclusive<u32>, kind: FadeKind) -> FadeSeries {
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for b in betas {
        let order = match kind {
            FadeKind::Destructive => b as f64,
            FadeKind::Constructive => b as f64 + 0.5,
        };
        match (order > 0.0).then(|| geom.solve(order * wavelength)).flatten() {
            Some(d_d) => points.push(FadePoint { beta: order, d_d }),
            None => skipped.push(b),
        }
    }
    points.sort_by(|a, b| a.d_d.total_cmp(&b.d_d));
    FadeSeries { axis: geom.axis(), kind, points, skipped }
}

fn phase_arg(d_d: f64, geom: &FadeGeometry, wavelength: f64, rho: f64) -> (f64, f64, f64) {
    let g = geom.gamma(d_d);
    let x = 2.0 * PI * (g - 1.0) * d_d / wavelength;
    (g, x, rho / g)
}

/// Phase of the two-ray gain as a function of `d_d`.
pub fn phase(d_d: f64, geom: &FadeGeometry, wavelength: f64, rho: f64) -> f64 {
    let (_, x, r) = phase_arg(d_d, geom, wavelength, rho);
    -2.0 * PI * d_d / wavelength - (r * x.sin() / (1.0 + r * x.cos())).atan()
}

/// Exact derivative of [`phase`] with respect to `d_d`.
pub fn phase_derivative(d_d: f64, geom: &FadeGeometry, wavelength: f64, rho: f64) -> f64 {
    let (g, x, r) = phase_arg(d_d, geom, wavelength, rho);
    let gp = geom.gamma_prime(d_d);
    let a0 = gp * d_d + g - 1.0;
    let k = PI / wavelength;
    let num = -(rho * gp / (g * g)) * x.sin() + k * (r * r - 1.0) * a0;
    let den = 1.0 + r * r + 2.0 * r * x.cos();
    -2.0 * k - k * a0 - num / den
}

/// Phase slope at a destructive point.
pub fn phase_derivative_destructive(d_d: f64, geom: &FadeGeometry, wavelength: f64, rho: f64) -> f64 {
    let g = geom.gamma(d_d);
    -(2.0 * PI / wavelength) * (1.0 + geom.a0(d_d) / (1.0 + g / rho))
}

/// Phase slope at a constructive point.
pub fn phase_derivative_constructive(d_d: f64, geom: &FadeGeometry, wavelength: f64, rho: f64) -> f64 {
    let g = geom.gamma(d_d);
    -(2.0 * PI / wavelength) * (1.0 + geom.a0(d_d) / (1.0 - g / rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastAxis {
    Horizontal,
    Vertical,
    MinOfBoth,
    None,
}

/// Predicted time between fades for one client.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingForecast {
    pub t: f64,
    /// Infinite when no fading is expected.
    pub t_fading: f64,
    pub delta_dd: f64,
    pub v_radial: f64,
    pub axis: ForecastAxis,
}

impl FadingForecast {
    pub fn none(t: f64) -> Self {
        FadingForecast { t, t_fading: f64::INFINITY, delta_dd: f64::INFINITY, v_radial: 0.0, axis: ForecastAxis::None }
    }

    pub fn expects_fading(&self) -> bool {
        self.t_fading.is_finite()
    }
}

/// Width of the destructive-fade bracket containing `d_d`.
pub fn bracket_width(geom: &FadeGeometry, d_d: f64, wavelength: f64) -> f64 {
    let b = geom.excess(d_d) / wavelength;
    let lo = b.floor();
    if lo < 1.0 {
        return f64::INFINITY;
    }
    match (geom.solve(lo * wavelength), geom.solve((lo + 1.0) * wavelength)) {
        (Some(a), Some(c)) => (a - c).abs(),
        _ => f64::INFINITY,
    }
}

/// Fading interval from one sensor broadcast and the client's position.
pub fn predict_fading_interval(b: &SensorBroadcast, client: &ClientSite, wavelength: f64) -> FadingForecast {
    let rel = relative_state(&b.state(), client);
    let v_radial = rel.radial_speed();
    if !(v_radial > 1e-9) || rel.d_d <= 0.0 {
        return FadingForecast::none(b.t);
    }
    let d_c = client.position.z;
    let horiz = FadeGeometry::Horizontal { d_u: b.position.z, d_c };
    let vert = FadeGeometry::Vertical { d_h: rel.p.horizontal_norm(), d_c };
    let vz = (b.velocity.z / rel.v).abs();
    let vh = b.velocity.horizontal_norm() / rel.v;
    let (delta, axis) = if vh > AXIS_ALIGNMENT {
        (bracket_width(&horiz, rel.d_d, wavelength), ForecastAxis::Horizontal)
    } else if vz > AXIS_ALIGNMENT {
        (bracket_width(&vert, rel.d_d, wavelength), ForecastAxis::Vertical)
    } else {
        let h = bracket_width(&horiz, rel.d_d, wavelength);
        let v = bracket_width(&vert, rel.d_d, wavelength);
        (h.min(v), ForecastAxis::MinOfBoth)
    };
    if !delta.is_finite() {
        return FadingForecast::none(b.t);
    }
    FadingForecast { t: b.t, t_fading: delta / v_radial, delta_dd: delta, v_radial, axis }
}

/// Local minima of a series with at least `prominence_db` of prominence,
/// optionally restricted to values below `threshold_db`. Returns indices.
pub fn extract_minima(values: &[f64], prominence_db: f64, threshold_db: Option<f64>) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let v = values[i];
        if !(v < values[i - 1]) {
            i += 1;
            continue;
        }
        // plateau handling: walk to the end of equal values
        let mut j = i;
        while j + 1 < n && values[j + 1] == v {
            j += 1;
        }
        if j + 1 >= n || !(values[j + 1] > v) {
            i = j + 1;
            continue;
        }
        if threshold_db.is_some_and(|thr| v >= thr) {
            i = j + 1;
            continue;
        }
        let mut left = v;
        let mut k = i;
        while k > 0 {
            k -= 1;
            if values[k] < v {
                break;
            }
            left = left.max(values[k]);
        }
        let mut right = v;
        let mut k = j;
        while k + 1 < n {
            k += 1;
            if values[k] < v {
                break;
            }
            right = right.max(values[k]);
        }
        if left.min(right) - v >= prominence_db {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use approx::assert_relative_eq;

    const LAM: f64 = 0.06;

    fn h10() -> FadeGeometry {
        FadeGeometry::Horizontal { d_u: 10.0, d_c: 1.0 }
    }

    #[test]
    fn horizontal_root_matches_closed_form() {
        // d_d = (4 d_U d_c - (beta lambda)^2) / (2 beta lambda)
        let s = fade_positions(h10(), LAM, 16..=16, FadeKind::Destructive);
        let bl = 16.0 * LAM;
        let closed = (40.0 - bl * bl) / (2.0 * bl);
        assert_relative_eq!(s.points[0].d_d, closed, epsilon = 1e-6);
        assert_relative_eq!(s.points[0].d_d, 20.3533, epsilon = 1e-4);
    }

    #[test]
    fn series_satisfies_fade_equation() {
        let s = fade_positions(h10(), LAM, 1..=60, FadeKind::Destructive);
        for p in &s.points {
            assert!((p.d_d * (h10().gamma(p.d_d) - 1.0) - p.beta * LAM).abs() < 1e-8);
        }
        assert!(s.points.windows(2).all(|w| w[0].d_d < w[1].d_d));
        assert!(s.points.windows(2).all(|w| w[0].beta > w[1].beta));
        // excess at the overhead point is 4*10/(9+11) = 2 m, so beta <= 33
        assert_eq!(s.skipped, (34..=60).collect::<Vec<_>>());
    }

    #[test]
    fn constructive_interleaves() {
        let d = fade_positions(h10(), LAM, 1..=30, FadeKind::Destructive);
        let c = fade_positions(h10(), LAM, 1..=30, FadeKind::Constructive);
        for w in d.points.windows(2) {
            let between = c.points.iter().filter(|p| p.d_d > w[0].d_d && p.d_d < w[1].d_d).count();
            assert_eq!(between, 1);
        }
    }

    #[test]
    fn higher_uav_pushes_fades_out() {
        let at = |d_u| fade_positions(FadeGeometry::Horizontal { d_u, d_c: 1.0 }, LAM, 5..=8, FadeKind::Destructive);
        let (a, b, c) = (at(5.0), at(10.0), at(20.0));
        for i in 0..a.points.len() {
            assert!(a.points[i].d_d < b.points[i].d_d && b.points[i].d_d < c.points[i].d_d);
        }
    }

    #[test]
    fn vertical_series_rises_with_beta() {
        let g = FadeGeometry::Vertical { d_h: 5.0, d_c: 1.0 };
        let s = fade_positions(g, LAM, 1..=40, FadeKind::Destructive);
        assert!(!s.points.is_empty());
        assert!(s.points.windows(2).all(|w| w[0].beta < w[1].beta));
        assert!(s.skipped.contains(&40));
    }

    #[test]
    fn vertical_gamma_matches_image_method() {
        let g = FadeGeometry::Vertical { d_h: 6.0, d_c: 1.5 };
        let d_u = 12.0;
        let d_d = (36.0f64 + (d_u - 1.5) * (d_u - 1.5)).sqrt();
        let d_r = (36.0f64 + (d_u + 1.5) * (d_u + 1.5)).sqrt();
        assert_relative_eq!(g.gamma(d_d), d_r / d_d, epsilon = 1e-12);
    }

    #[test]
    fn derivative_branches_at_roots() {
        let g = h10();
        for p in fade_positions(g, LAM, 2..=30, FadeKind::Destructive).points {
            let full = phase_derivative(p.d_d, &g, LAM, -0.95);
            let br = phase_derivative_destructive(p.d_d, &g, LAM, -0.95);
            assert_relative_eq!(full, br, max_relative = 1e-6);
            assert!(full < -2.0 * PI / LAM);
        }
        for p in fade_positions(g, LAM, 2..=30, FadeKind::Constructive).points {
            let full = phase_derivative(p.d_d, &g, LAM, -0.95);
            let br = phase_derivative_constructive(p.d_d, &g, LAM, -0.95);
            assert_relative_eq!(full, br, max_relative = 1e-6);
            let lo = -2.0 * PI / LAM;
            assert!(full > lo && full < lo * (1.0 - 1.0 / 11.0));
        }
    }

    #[test]
    fn forecast_constant_velocity() {
        let c = ClientSite::new(Vec3::new(0.0, 0.0, 1.0));
        let b = SensorBroadcast { t: 0.0, position: Vec3::new(15.0, 0.0, 10.0), velocity: Vec3::new(2.0, 0.0, 0.0) };
        let f = predict_fading_interval(&b, &c, LAM);
        assert_eq!(f.axis, ForecastAxis::Horizontal);
        let rel = relative_state(&b.state(), &c);
        assert_relative_eq!(f.t_fading, f.delta_dd / rel.radial_speed(), epsilon = 1e-12);
        let fast = SensorBroadcast { velocity: Vec3::new(4.0, 0.0, 0.0), ..b };
        assert_relative_eq!(predict_fading_interval(&fast, &c, LAM).t_fading * 2.0, f.t_fading, epsilon = 1e-12);
        let still = SensorBroadcast { velocity: Vec3::ZERO, ..b };
        assert!(!predict_fading_interval(&still, &c, LAM).expects_fading());
    }

    #[test]
    fn oblique_takes_minimum() {
        let c = ClientSite::new(Vec3::new(0.0, 0.0, 1.0));
        let b = SensorBroadcast { t: 0.0, position: Vec3::new(12.0, 0.0, 9.0), velocity: Vec3::new(2.0, 0.0, 2.0) };
        let f = predict_fading_interval(&b, &c, LAM);
        assert_eq!(f.axis, ForecastAxis::MinOfBoth);
        let rel = relative_state(&b.state(), &c);
        let h = bracket_width(&FadeGeometry::Horizontal { d_u: 9.0, d_c: 1.0 }, rel.d_d, LAM);
        let v = bracket_width(&FadeGeometry::Vertical { d_h: 12.0, d_c: 1.0 }, rel.d_d, LAM);
        assert_eq!(f.delta_dd, h.min(v));
    }

    #[test]
    fn minima_with_prominence() {
        let v = [0.0, -1.0, 0.0, -5.0, -6.0, -5.0, 0.0, -2.0, -2.0, 0.0];
        assert_eq!(extract_minima(&v, 3.0, None), vec![4]);
        assert_eq!(extract_minima(&v, 1.5, None), vec![4, 7]);
        assert_eq!(extract_minima(&v, 0.5, Some(-1.5)), vec![4, 7]);
    }
}
