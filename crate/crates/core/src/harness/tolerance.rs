//! Environment tolerance: how far extra reflectors push the received power
//! away from the two-ray curve the predictor assumes.
//!
//! Each extra reflector has path ratio `k_i * gamma_0` and coefficient -1.
//! The statistic is the mean of `|D_N|` over a sweep of direct distances;
//! below [`DN_THRESHOLD_DB`] the environment counts as tolerated.

use serde::Serialize;

use crate::channel::{d_n_db, RadioParams, Reflector};
use crate::error::Result;
use crate::fading::FadeGeometry;

pub const DN_THRESHOLD_DB: f64 = 3.0;
pub const REFLECTOR_RHO: f64 = -1.0;

/// Published tolerance thresholds `k_i`, one row per reflector count.
pub const TABLE2: [&[f64]; 4] = [&[1.4], &[1.5, 2.4], &[1.7, 2.3, 3.4], &[1.8, 2.6, 2.9, 3.7]];

/// Ground-ray path ratios over a distance sweep.
#[derive(Debug, Clone)]
pub struct DnSweep {
    pub d_d: Vec<f64>,
    pub gamma0: Vec<f64>,
    pub params: RadioParams,
}

impl DnSweep {
    /// Horizontal-flight geometry over `[from, to]` at `step` meters.
    pub fn horizontal(d_u: f64, d_c: f64, from: f64, to: f64, step: f64, params: RadioParams) -> Self {
        let geom = FadeGeometry::Horizontal { d_u, d_c };
        let n = ((to - from) / step).round() as usize + 1;
        let d_d: Vec<f64> = (0..n).map(|i| from + i as f64 * step).collect();
        let gamma0 = d_d.iter().map(|&d| geom.gamma(d)).collect();
        DnSweep { d_d, gamma0, params }
    }

    /// Default sweep: `d_U = 10`, `d_c = 1`, 5 to 45 m at 1 mm, ground `rho = -0.95`.
    pub fn standard() -> Self {
        DnSweep::horizontal(10.0, 1.0, 5.0, 45.0, 1e-3, RadioParams::default())
    }

    pub fn mean_abs_dn(&self, ks: &[f64]) -> Result<f64> {
        let refl: Vec<Reflector> = ks.iter().map(|&k| Reflector { k, rho: REFLECTOR_RHO }).collect();
        let mut sum = 0.0;
        for (&d, &g) in self.d_d.iter().zip(&self.gamma0) {
            sum += d_n_db(d, g, &refl, &self.params)?.abs();
        }
        Ok(sum / self.d_d.len() as f64)
    }

    /// Smallest `k` on `[lo, hi]` (step `step`) with one reflector where the
    /// statistic drops below the threshold.
    pub fn crossing_single(&self, lo: f64, hi: f64, step: f64) -> Result<Option<f64>> {
        let n = ((hi - lo) / step).round() as usize;
        for i in 0..=n {
            let k = lo + i as f64 * step;
            if self.mean_abs_dn(&[k])? < DN_THRESHOLD_DB {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Smallest common shift `s` in `[lo, hi]` such that `base + s` drops
    /// below the threshold. Multi-reflector rows are searched along this
    /// diagonal since the published pairs are joint thresholds.
    pub fn crossing_shift(&self, base: &[f64], lo: f64, hi: f64, step: f64) -> Result<Option<f64>> {
        let n = ((hi - lo) / step).round() as usize;
        for i in 0..=n {
            let s = lo + i as f64 * step;
            let ks: Vec<f64> = base.iter().map(|k| k + s).collect();
            if self.mean_abs_dn(&ks)? < DN_THRESHOLD_DB {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceRow {
    pub reflectors: usize,
    pub published: Vec<f64>,
    pub mean_abs_dn_at_published: f64,
    /// Crossing `k_1` for one reflector; the diagonal shift otherwise.
    pub crossing: Option<f64>,
}

/// Every published row against the sweep.
pub fn table2(sweep: &DnSweep) -> Result<Vec<ToleranceRow>> {
    TABLE2
        .iter()
        .map(|ks| {
            let crossing = if ks.len() == 1 {
                sweep.crossing_single(1.01, 4.0, 0.01)?
            } else {
                sweep.crossing_shift(ks, -0.5, 1.5, 0.01)?
            };
            Ok(ToleranceRow {
                reflectors: ks.len(),
                published: ks.to_vec(),
                mean_abs_dn_at_published: sweep.mean_abs_dn(ks)?,
                crossing,
            })
        })
        .collect()
}
