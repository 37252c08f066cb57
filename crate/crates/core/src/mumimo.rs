//! Inter-user interference: subspace angles, SNR projection, power backoff,
//! the contention floor and ZF-SIC decoding outcomes.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{ber, error_propagation, PacketModel, RateTable};

pub const BACKOFF_THRESHOLD_DB: f64 = 26.0;
pub const CONTENTION_FLOOR_DB: f64 = 4.0;
const RANK_TOL: f64 = 1e-10;

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum()
}

/// Orthonormal basis of the span, one entry per input (`None` when the
/// input is dependent on the earlier ones).
fn gram_schmidt(vs: &[&[Complex64]]) -> Vec<Option<Vec<Complex64>>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut out = Vec::with_capacity(vs.len());
    for v in vs {
        let n0 = norm_sqr(v).sqrt();
        let mut r: Vec<Complex64> = v.to_vec();
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        let n = norm_sqr(&r).sqrt();
        if !(n0 > 0.0) || n <= RANK_TOL * n0 {
            out.push(None);
            continue;
        }
        let q: Vec<Complex64> = r.iter().map(|c| c / n).collect();
        basis.push(q.clone());
        out.push(Some(q));
    }
    out
}

fn projection_cos2(d: &[Complex64], basis: &[Vec<Complex64>]) -> f64 {
    let nd = norm_sqr(d);
    let p: f64 = basis.iter().map(|q| inner(q, d).norm_sqr()).sum();
    (p / nd).clamp(0.0, 1.0)
}

/// Squared cosine of the angle between `d` and the span of `subspace`.
pub fn cos_sq_theta(d: &[Complex64], subspace: &[&[Complex64]]) -> Result<f64> {
    let nd = norm_sqr(d);
    if !(nd > 0.0 && nd.is_finite()) {
        return Err(Error::InvalidDirection);
    }
    let mut basis = Vec::with_capacity(subspace.len());
    for q in gram_schmidt(subspace) {
        basis.push(q.ok_or(Error::DegenerateSubspace)?);
    }
    Ok(projection_cos2(d, &basis))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedSnr {
    pub snr_orig: f64,
    pub theta: f64,
    /// `-inf` when fully aligned.
    pub snr_proj: f64,
}

impl ProjectedSnr {
    pub fn delta_db(&self) -> f64 {
        self.snr_orig - self.snr_proj
    }

    pub fn fully_aligned(&self) -> bool {
        self.snr_proj == f64::NEG_INFINITY
    }
}

pub fn delta_snr_db(cos2: f64) -> f64 {
    -10.0 * (1.0 - cos2).log10()
}

pub fn project_snr(snr_orig_db: f64, cos2: f64) -> ProjectedSnr {
    let cos2 = cos2.clamp(0.0, 1.0);
    let snr_proj = if cos2 >= 1.0 { f64::NEG_INFINITY } else { snr_orig_db - delta_snr_db(cos2) };
    ProjectedSnr { snr_orig: snr_orig_db, theta: cos2.sqrt().acos(), snr_proj }
}

/// Transmit power change in dB (zero or negative) for the `k`-th joiner.
pub fn power_backoff(snr_orig_db: f64, k: usize, threshold_db: f64) -> f64 {
    if k <= 1 || snr_orig_db <= threshold_db {
        0.0
    } else {
        threshold_db - snr_orig_db
    }
}

pub fn contention_gate(snr_proj_db: f64) -> bool {
    snr_proj_db >= CONTENTION_FLOOR_DB
}

/// One concurrent stream as seen by the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub client: usize,
    /// True channel vector at transmission time, scaled so that
    /// `|h|^2` is the combined linear SNR at full power.
    pub channel: Vec<Complex64>,
    pub backoff_db: f64,
    pub rate_index: usize,
}

/// Streams in join order; decoding runs in reverse.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConcurrentSet {
    pub streams: Vec<Stream>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    #[default]
    Expectation,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOutcome {
    pub client: usize,
    pub snr_proj_db: f64,
    pub p_e: f64,
    /// Combined error after propagation from earlier decode steps.
    pub p_k: f64,
    pub success_prob: f64,
    /// Sampled outcome, `None` in expectation mode.
    pub delivered: Option<bool>,
}

/// Per-stream outcomes in join order.
pub fn sic_decode_outcomes<R: Rng + ?Sized>(
    set: &ConcurrentSet,
    table: &RateTable,
    packet: &PacketModel,
    mode: DecodeMode,
    rng: &mut R,
) -> Vec<StreamOutcome> {
    let k = set.streams.len();
    let chans: Vec<&[Complex64]> = set.streams.iter().map(|s| s.channel.as_slice()).collect();
    let basis = gram_schmidt(&chans);
    let mut snr = Vec::with_capacity(k);
    let mut p_e = Vec::with_capacity(k);
    for (j, s) in set.streams.iter().enumerate() {
        // stream j is decoded against the span of streams that joined before it
        let dependent = basis[j].is_none();
        let prior: Vec<Vec<Complex64>> = basis[..j].iter().flatten().cloned().collect();
        let power = norm_sqr(&s.channel);
        let sp = if dependent || !(power > 0.0) {
            f64::NEG_INFINITY
        } else {
            let c2 = projection_cos2(&s.channel, &prior);
            project_snr(10.0 * power.log10() + s.backoff_db, c2).snr_proj
        };
        snr.push(sp);
        p_e.push(if dependent { 1.0 } else { ber(sp, &table.entries[s.rate_index]) });
    }
    let mut out = vec![
        StreamOutcome { client: 0, snr_proj_db: 0.0, p_e: 0.0, p_k: 0.0, success_prob: 0.0, delivered: None };
        k
    ];
    let mut chain_ok = true;
    for j in (0..k).rev() {
        let p_k = error_propagation(&p_e[j..]);
        let success_prob = packet.success(p_k);
        let delivered = match mode {
            DecodeMode::Expectation => None,
            DecodeMode::Sampled => {
                let own = packet.success(p_e[j]);
                chain_ok &= rng.random::<f64>() < own;
                Some(chain_ok)
            }
        };
        out[j] = StreamOutcome { client: set.streams[j].client, snr_proj_db: snr[j], p_e: p_e[j], p_k, success_prob, delivered };
    }
    out
}
