//! Rate table, bit error model, throughput and per-client rate selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEntry {
    /// Mbps.
    pub rate: f64,
    /// SNR in dB where the bit error rate reaches 0.25.
    pub snr50: f64,
    /// Logistic slope, 1/dB.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTable {
    pub entries: Vec<RateEntry>,
}

impl Default for RateTable {
    fn default() -> Self {
        let rates = [6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0];
        let snr50 = [5.0, 7.0, 9.0, 12.0, 16.0, 20.0, 23.0, 25.0];
        RateTable {
            entries: rates.iter().zip(snr50).map(|(&rate, snr50)| RateEntry { rate, snr50, slope: 2.0 }).collect(),
        }
    }
}

impl RateTable {
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::config("rate table is empty"));
        }
        for w in self.entries.windows(2) {
            if !(w[1].rate > w[0].rate) || !(w[1].snr50 > w[0].snr50) {
                return Err(Error::config("rates and snr50 must be strictly increasing"));
            }
        }
        if self.entries.iter().any(|e| !(e.rate > 0.0 && e.slope > 0.0 && e.snr50.is_finite())) {
            return Err(Error::config("rate entries need rate > 0, slope > 0 and finite snr50"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rate(&self, i: usize) -> f64 {
        self.entries[i].rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketModel {
    pub bits: u32,
}

impl Default for PacketModel {
    fn default() -> Self {
        PacketModel { bits: 12000 }
    }
}

impl PacketModel {
    /// Probability that all bits survive a per-bit error rate `p`.
    pub fn success(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return 0.0;
        }
        (self.bits as f64 * (-p).ln_1p()).exp()
    }
}

/// Logistic waterfall: 0.25 at `snr50`, vanishing at high SNR.
pub fn ber(snr_db: f64, e: &RateEntry) -> f64 {
    if snr_db == f64::NEG_INFINITY {
        return 0.5;
    }
    0.5 / (1.0 + (e.slope * (snr_db - e.snr50)).exp())
}

/// Combined error after decoding steps `K..k`, applied recursively.
pub fn error_propagation(p_e: &[f64]) -> f64 {
    p_e.iter().fold(0.0, |p, &pe| p + (1.0 - p) * pe)
}

/// Same quantity in product form, `1 - prod(1 - p_e)`.
pub fn error_propagation_product(p_e: &[f64]) -> f64 {
    1.0 - p_e.iter().map(|p| 1.0 - p).product::<f64>()
}

/// Expected goodput in Mbps.
pub fn throughput(rate: f64, p: f64, packet: &PacketModel) -> f64 {
    rate * packet.success(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateChoice {
    pub index: usize,
    pub rate: f64,
    pub objective: f64,
    /// Every candidate's objective was effectively zero.
    pub starved: bool,
}

/// Objective maximized by the `k`-th joiner: `R * sum_{j=1..k} q^j` with
/// `q` the packet success probability at this rate.
pub fn rate_objective(snr_proj_db: f64, k: usize, e: &RateEntry, packet: &PacketModel) -> f64 {
    let q = packet.success(ber(snr_proj_db, e));
    let mut sum = 0.0;
    let mut qp = 1.0;
    for _ in 0..k {
        qp *= q;
        sum += qp;
    }
    e.rate * sum
}

pub fn select_rate(snr_proj_db: f64, k: usize, table: &RateTable, packet: &PacketModel) -> RateChoice {
    let k = k.max(1);
    let mut best = RateChoice { index: 0, rate: table.rate(0), objective: 0.0, starved: true };
    let mut best_val = f64::NEG_INFINITY;
    for (i, e) in table.entries.iter().enumerate() {
        let v = rate_objective(snr_proj_db, k, e, packet);
        if v > best_val {
            best_val = v;
            best = RateChoice { index: i, rate: e.rate, objective: v, starved: false };
        }
    }
    if !(best_val > 1e-9) {
        return RateChoice { index: 0, rate: table.rate(0), objective: best_val.max(0.0), starved: true };
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ber_shape() {
        let t = RateTable::default();
        assert_eq!(ber(5.0, &t.entries[0]), 0.25);
        assert!(ber(80.0, &t.entries[0]) < 1e-30);
        assert_eq!(ber(f64::NEG_INFINITY, &t.entries[0]), 0.5);
        // away from the saturated tails where f64 cannot separate entries
        for s in [8.0, 14.0, 20.0] {
            for w in t.entries.windows(2) {
                assert!(ber(s, &w[0]) < ber(s, &w[1]));
            }
            assert!(ber(s + 0.1, &t.entries[3]) < ber(s, &t.entries[3]));
        }
    }

    #[test]
    fn propagation_values() {
        assert_eq!(error_propagation(&[0.0, 0.0, 0.0]), 0.0);
        assert_relative_eq!(error_propagation(&[0.1, 0.2]), 0.28, epsilon = 1e-15);
        assert_eq!(error_propagation(&[0.3, 1.0, 0.2]), 1.0);
        assert_relative_eq!(error_propagation(&[0.1, 0.2, 0.05]), error_propagation_product(&[0.1, 0.2, 0.05]), epsilon = 1e-15);
    }

    #[test]
    fn throughput_values() {
        let pm = PacketModel::default();
        assert_eq!(throughput(54.0, 0.0, &pm), 54.0);
        assert_eq!(throughput(54.0, 1.0, &pm), 0.0);
        assert_relative_eq!(throughput(54.0, 1e-5, &pm), 54.0 * (1.0f64 - 1e-5).powi(12000), epsilon = 1e-9);
        assert_relative_eq!(throughput(54.0, 1e-5, &pm), 47.9, epsilon = 0.05);
    }

    #[test]
    fn high_snr_picks_top_rate() {
        let t = RateTable::default();
        for k in 1..=3 {
            assert_eq!(select_rate(40.0, k, &t, &PacketModel::default()).rate, 54.0);
        }
    }

    #[test]
    fn starvation_flag() {
        let c = select_rate(-20.0, 1, &RateTable::default(), &PacketModel::default());
        assert!(c.starved);
        assert_eq!(c.index, 0);
    }

    #[test]
    fn table_validation() {
        assert!(RateTable::default().validate().is_ok());
        let mut t = RateTable::default();
        t.entries[3].snr50 = 1.0;
        assert!(t.validate().is_err());
        assert!(RateTable { entries: vec![] }.validate().is_err());
    }
}
