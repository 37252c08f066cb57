//! Rate-adaptation policies.
//!
//! The three multi-user arms share one join pipeline and differ only in what
//! they believe about each client's channel: a sensor-assisted prediction,
//! the last reading, or the true channel. The single-user arm serves one
//! client per round in round-robin order.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{combined_snr_db, ChannelSample};
use crate::geometry::broadcast_airtime_fraction;
use crate::mumimo::{
    contention_gate, cos_sq_theta, power_backoff, project_snr, sic_decode_outcomes, ConcurrentSet, DecodeMode, Stream,
    BACKOFF_THRESHOLD_DB,
};
use crate::prediction::{ChannelDirection, ChannelPrediction, PredictorState};
use crate::rates::{select_rate, PacketModel, RateTable};

/// Airtime lost to announcing channel directions on multi-user arms.
pub const DIRECTION_OVERHEAD: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    #[serde(rename = "sensrate")]
    SensRate,
    StaleCsi,
    SingleUser,
    Oracle,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::SensRate, PolicyKind::StaleCsi, PolicyKind::SingleUser, PolicyKind::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::SensRate => "sensrate",
            PolicyKind::StaleCsi => "stale_csi",
            PolicyKind::SingleUser => "single_user",
            PolicyKind::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<PolicyKind> {
        PolicyKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_multi_user(self) -> bool {
        !matches!(self, PolicyKind::SingleUser)
    }

    pub fn uses_broadcasts(self) -> bool {
        matches!(self, PolicyKind::SensRate)
    }

    /// Fraction of airtime left for data after signaling overheads.
    pub fn airtime_factor(self, f_b: f64) -> f64 {
        let mut f = 1.0;
        if self.is_multi_user() {
            f *= 1.0 - DIRECTION_OVERHEAD;
        }
        if self.uses_broadcasts() {
            f *= 1.0 - broadcast_airtime_fraction(f_b);
        }
        f
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What an arm believes about one client's channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientView {
    pub snr_db: Vec<f64>,
    pub direction: ChannelDirection,
    pub fallback: bool,
}

impl ClientView {
    pub fn from_sample(s: &ChannelSample) -> Self {
        ClientView { snr_db: s.snr_db.clone(), direction: s.direction(), fallback: false }
    }

    pub fn from_prediction(p: &ChannelPrediction) -> Self {
        ClientView { snr_db: p.snr_db.clone(), direction: p.direction.clone(), fallback: p.fallback }
    }

    pub fn aggregate_snr_db(&self) -> f64 {
        self.snr_db.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn combined_snr_db(&self) -> f64 {
        combined_snr_db(&self.snr_db)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub table: RateTable,
    pub packet: PacketModel,
    pub backoff_threshold_db: f64,
    /// Receive antennas at the UAV; caps concurrent streams.
    pub max_streams: usize,
}

impl PolicyParams {
    pub fn new(max_streams: usize) -> Self {
        PolicyParams {
            table: RateTable::default(),
            packet: PacketModel::default(),
            backoff_threshold_db: BACKOFF_THRESHOLD_DB,
            max_streams,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientDecision {
    pub client: usize,
    pub join: bool,
    pub direction: ChannelDirection,
    pub rate_index: usize,
    pub rate: f64,
    pub backoff_db: f64,
    /// The arm's own estimate of its projected SNR.
    pub snr_proj_est: f64,
    pub starved: bool,
}

/// Decisions in join-attempt order.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundDecision {
    pub kind: PolicyKind,
    pub entries: Vec<ClientDecision>,
}

impl RoundDecision {
    pub fn joined(&self) -> impl Iterator<Item = &ClientDecision> {
        self.entries.iter().filter(|e| e.join)
    }
}

/// Shared join pipeline of the multi-user arms.
pub fn mu_decide(kind: PolicyKind, views: &[ClientView], order: &[usize], params: &PolicyParams) -> RoundDecision {
    let mut announced: Vec<Vec<Complex64>> = Vec::new();
    let mut entries = Vec::with_capacity(order.len());
    for &c in order {
        let v = &views[c];
        let k = announced.len() + 1;
        let backoff_db = power_backoff(v.aggregate_snr_db(), k, params.backoff_threshold_db);
        let cos2 = if !v.direction.is_finite() {
            1.0
        } else if announced.is_empty() {
            0.0
        } else {
            let sub: Vec<&[Complex64]> = announced.iter().map(Vec::as_slice).collect();
            cos_sq_theta(&v.direction.ratios, &sub).unwrap_or(1.0)
        };
        let snr_proj_est = project_snr(v.combined_snr_db() + backoff_db, cos2).snr_proj;
        let room = announced.len() < params.max_streams;
        let eligible = room && snr_proj_est.is_finite() && contention_gate(snr_proj_est);
        let choice = select_rate(if eligible { snr_proj_est } else { f64::NEG_INFINITY }, k, &params.table, &params.packet);
        // a stream no rate can carry would only drag down the streams decoded after it
        let join = eligible && !choice.starved;
        if join {
            announced.push(v.direction.ratios.clone());
        }
        entries.push(ClientDecision {
            client: c,
            join,
            direction: v.direction.clone(),
            rate_index: choice.index,
            rate: choice.rate,
            backoff_db: if join { backoff_db } else { 0.0 },
            snr_proj_est,
            starved: choice.starved,
        });
    }
    RoundDecision { kind, entries }
}

pub fn sensrate_decide(predictors: &[PredictorState], order: &[usize], t_round: f64, params: &PolicyParams) -> RoundDecision {
    let views: Vec<ClientView> = predictors.iter().map(|p| ClientView::from_prediction(&p.predict(t_round))).collect();
    mu_decide(PolicyKind::SensRate, &views, order, params)
}

pub fn stale_csi_decide(last: &[ChannelSample], order: &[usize], params: &PolicyParams) -> RoundDecision {
    let views: Vec<ClientView> = last.iter().map(ClientView::from_sample).collect();
    mu_decide(PolicyKind::StaleCsi, &views, order, params)
}

pub fn oracle_decide(truth: &[ChannelSample], order: &[usize], params: &PolicyParams) -> RoundDecision {
    let views: Vec<ClientView> = truth.iter().map(ClientView::from_sample).collect();
    mu_decide(PolicyKind::Oracle, &views, order, params)
}

/// Round-robin single-user transmission; `slot` counts rounds.
pub fn single_user_decide(last: &[ChannelSample], slot: usize, params: &PolicyParams) -> RoundDecision {
    let n = last.len();
    let chosen = slot % n.max(1);
    let entries = last
        .iter()
        .enumerate()
        .map(|(c, s)| {
            let snr = s.combined_snr_db();
            let choice = select_rate(snr, 1, &params.table, &params.packet);
            ClientDecision {
                client: c,
                join: c == chosen,
                direction: s.direction(),
                rate_index: choice.index,
                rate: choice.rate,
                backoff_db: 0.0,
                snr_proj_est: snr,
                starved: choice.starved,
            }
        })
        .collect();
    RoundDecision { kind: PolicyKind::SingleUser, entries }
}

/// Result of one client's transmission in a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClientOutcome {
    pub client: usize,
    pub joined: bool,
    pub rate: f64,
    pub snr_proj_est: f64,
    pub snr_proj_true: f64,
    pub success_prob: f64,
    /// Expected or sampled fraction of `rate * t_pkt` delivered.
    pub delivered: f64,
}

/// Channel vector whose squared norm is the combined linear SNR.
pub fn snr_scaled_channel(s: &ChannelSample) -> Vec<Complex64> {
    s.gains.iter().zip(&s.snr_db).map(|(h, snr)| Complex64::from_polar(10f64.powf(snr / 20.0), h.arg())).collect()
}

/// Decodes a round against the true channels at transmission time.
/// Outcomes are indexed by client.
pub fn evaluate_round<R: Rng + ?Sized>(
    decision: &RoundDecision,
    truth: &[ChannelSample],
    params: &PolicyParams,
    mode: DecodeMode,
    rng: &mut R,
) -> Vec<ClientOutcome> {
    let mut out: Vec<ClientOutcome> = (0..truth.len())
        .map(|c| ClientOutcome {
            client: c,
            joined: false,
            rate: 0.0,
            snr_proj_est: f64::NAN,
            snr_proj_true: f64::NAN,
            success_prob: 0.0,
            delivered: 0.0,
        })
        .collect();
    let joined: Vec<&ClientDecision> = decision.joined().collect();
    let set = ConcurrentSet {
        streams: joined
            .iter()
            .map(|d| Stream {
                client: d.client,
                channel: snr_scaled_channel(&truth[d.client]),
                backoff_db: d.backoff_db,
                rate_index: d.rate_index,
            })
            .collect(),
    };
    for (d, o) in joined.iter().zip(sic_decode_outcomes(&set, &params.table, &params.packet, mode, rng)) {
        let delivered = match o.delivered {
            Some(ok) => f64::from(u8::from(ok)),
            None => o.success_prob,
        };
        out[d.client] = ClientOutcome {
            client: d.client,
            joined: true,
            rate: d.rate,
            snr_proj_est: d.snr_proj_est,
            snr_proj_true: o.snr_proj_db,
            success_prob: o.success_prob,
            delivered,
        };
    }
    out
}

/// Expected throughput of a round in Mbps, before airtime discounts.
pub fn round_throughput(outcomes: &[ClientOutcome]) -> f64 {
    outcomes.iter().map(|o| o.rate * o.delivered).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RadioParams;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(gains: &[Complex64]) -> ChannelSample {
        ChannelSample::new(0.0, gains.to_vec(), &RadioParams::default(), None)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_joiner_uses_own_snr() {
        let s = [sample(&[c(0.01, 0.0), c(0.0, 0.01)])];
        let p = PolicyParams::new(2);
        let d = stale_csi_decide(&s, &[0], &p);
        let e = &d.entries[0];
        assert!(e.join);
        assert_eq!(e.backoff_db, 0.0);
        assert_relative_eq!(e.snr_proj_est, s[0].combined_snr_db(), epsilon = 1e-12);
        assert_eq!(e.rate, select_rate(e.snr_proj_est, 1, &p.table, &p.packet).rate);
    }

    #[test]
    fn aligned_weak_client_stays_out() {
        // second client is 8 degrees off the first and weak
        let a = sample(&[c(0.1, 0.0), c(0.0, 0.0)]);
        let th = 8f64.to_radians();
        let amp = 10f64.powf((10.0 - 55.0) / 20.0);
        let b = sample(&[c(amp * th.cos(), 0.0), c(amp * th.sin(), 0.0)]);
        let d = stale_csi_decide(&[a, b], &[0, 1], &PolicyParams::new(2));
        assert!(d.entries[0].join);
        assert!(!d.entries[1].join);
        assert!(d.entries[1].snr_proj_est < 4.0);
    }

    #[test]
    fn strong_second_joiner_backs_off() {
        let a = sample(&[c(0.1, 0.0), c(0.1, 0.0)]);
        let b = sample(&[c(0.1, 0.0), c(-0.1, 0.0)]);
        let d = stale_csi_decide(&[a, b], &[0, 1], &PolicyParams::new(2));
        assert_eq!(d.entries[0].backoff_db, 0.0);
        assert_relative_eq!(d.entries[1].backoff_db, 26.0 - 35.0, epsilon = 1e-9);
    }

    #[test]
    fn hopeless_client_passing_gate_stays_out() {
        // orthogonal to the first client, a little above the gate, far below the lowest rate
        let a = sample(&[c(0.1, 0.0), c(0.1, 0.0)]);
        let amp = 10f64.powf((4.3 - 55.0) / 20.0) / 2f64.sqrt();
        let b = sample(&[c(amp, 0.0), c(-amp, 0.0)]);
        let d = oracle_decide(&[a, b], &[0, 1], &PolicyParams::new(2));
        let e = &d.entries[1];
        assert!(contention_gate(e.snr_proj_est), "{}", e.snr_proj_est);
        assert!(e.starved);
        assert!(!e.join);
        assert_eq!(d.joined().count(), 1);
    }

    #[test]
    fn stream_cap() {
        let s: Vec<ChannelSample> = (0..3).map(|i| sample(&[c(0.1, 0.0), c(0.0, 0.05 * (i + 1) as f64)])).collect();
        let d = oracle_decide(&s, &[2, 0, 1], &PolicyParams::new(2));
        assert_eq!(d.joined().count(), 2);
        assert!(!d.entries[2].join);
    }

    #[test]
    fn single_user_round_robin() {
        let s = vec![sample(&[c(0.01, 0.0), c(0.01, 0.0)]), sample(&[c(0.01, 0.0), c(0.0, 0.01)])];
        let p = PolicyParams::new(2);
        let picks: Vec<usize> = (0..4).map(|r| single_user_decide(&s, r, &p).joined().next().unwrap().client).collect();
        assert_eq!(picks, vec![0, 1, 0, 1]);
        assert_relative_eq!(s[0].combined_snr_db(), s[0].snr_db[0] + 10.0 * 2f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn oracle_orthogonal_high_snr_hits_top_rate() {
        let s = vec![sample(&[c(0.1, 0.0), c(0.1, 0.0)]), sample(&[c(0.1, 0.0), c(-0.1, 0.0)])];
        let p = PolicyParams::new(2);
        let d = oracle_decide(&s, &[1, 0], &p);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let o = evaluate_round(&d, &s, &p, DecodeMode::Expectation, &mut rng);
        assert!(o.iter().all(|x| x.joined));
        // first joiner at 38 dB takes the top rate; the second is backed off
        // to 26 dB per antenna, 29 dB combined
        assert_eq!(o[1].rate, 54.0);
        let second = select_rate(26.0 + 10.0 * 2f64.log10(), 2, &p.table, &p.packet);
        assert_eq!(o[0].rate, second.rate);
        let q1 = p.packet.success(crate::rates::ber(38.0 + 0.0, &p.table.entries[7]));
        let q0 = p.packet.success(crate::rates::ber(26.0 + 10.0 * 2f64.log10(), &p.table.entries[second.index]));
        // the last joiner decodes first; its errors propagate to the first joiner
        assert_relative_eq!(round_throughput(&o), 54.0 * q1 * q0 + second.rate * q0, max_relative = 1e-9);
    }

    #[test]
    fn airtime_factors() {
        assert_eq!(PolicyKind::SingleUser.airtime_factor(50.0), 1.0);
        assert_eq!(PolicyKind::Oracle.airtime_factor(50.0), 0.96);
        assert_relative_eq!(PolicyKind::SensRate.airtime_factor(50.0), 0.96 * (1.0 - 0.0066), epsilon = 1e-15);
        assert_eq!(PolicyKind::parse("stale_csi"), Some(PolicyKind::StaleCsi));
    }
}
