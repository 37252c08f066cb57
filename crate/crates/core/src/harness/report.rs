//! CSV and plain-text reports.
//!
//! `summary.csv` has one row per arm, sweep value and seed:
//!
//! | column | meaning |
//! |---|---|
//! | `schema_version` | [`SCHEMA_VERSION`] |
//! | `scenario` | config name |
//! | `axis`, `value` | sweep axis and value, empty for single runs |
//! | `seed` | scenario seed, shared by every arm of the run |
//! | `arm` | `sensrate`, `stale_csi`, `single_user` or `oracle` |
//! | `mean_throughput_mbps` | mean over rounds, after airtime discounts |
//! | `client_throughput_mbps` | per-client means joined with `;` |
//! | `gain_vs_stale`, `gain_vs_single_user` | arm mean over baseline mean, same seed |
//! | `snr_rmse_db`, `angle_rmse_deg` | error of the channel the arm acted on |
//! | `fade_interval_error_pct` | forecast error of fade spacing |
//! | `join_fraction` | joined client slots over all client slots |
//! | `rounds`, `data_airtime_s`, `broadcast_airtime_s` | airtime accounting |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::PolicyKind;

use super::run::{ArmSummary, ExperimentSummary, ForecastRecord, PredictionRecord, RoundRecord};
use super::sweep::SweepRow;

pub const SCHEMA_VERSION: u32 = 1;

pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const RECORDS_CSV: &str = "records.csv";
pub const PREDICTIONS_CSV: &str = "predictions.csv";
pub const FORECASTS_CSV: &str = "forecasts.csv";

#[derive(Debug, Serialize, Deserialize)]
struct SummaryRow {
    schema_version: u32,
    scenario: String,
    axis: String,
    value: Option<f64>,
    seed: u64,
    arm: String,
    mean_throughput_mbps: f64,
    client_throughput_mbps: String,
    gain_vs_stale: Option<f64>,
    gain_vs_single_user: Option<f64>,
    snr_rmse_db: f64,
    angle_rmse_deg: f64,
    fade_interval_error_pct: Option<f64>,
    join_fraction: f64,
    rounds: usize,
    data_airtime_s: f64,
    broadcast_airtime_s: f64,
}

/// Output files, checked for writability before any simulation runs.
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub dir: PathBuf,
}

impl OutputPaths {
    /// Creates `dir` and touches every file that will be written.
    pub fn prepare(dir: &Path, extra: &[&str]) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for name in [SUMMARY_CSV, SUMMARY_TXT].iter().chain(extra) {
            let p = dir.join(name);
            File::create(&p).map_err(|e| io_err(&p, e))?;
        }
        Ok(OutputPaths { dir: dir.to_path_buf() })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

fn io_err(p: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        for a in &r.summary.arms {
            wr.serialize(SummaryRow {
                schema_version: SCHEMA_VERSION,
                scenario: r.summary.name.clone(),
                axis: r.axis.map_or("", |a| a.name()).to_string(),
                value: r.axis.map(|_| r.value),
                seed: r.seed,
                arm: a.kind.name().to_string(),
                mean_throughput_mbps: a.mean_throughput_mbps,
                client_throughput_mbps: join_floats(&a.client_throughput_mbps),
                gain_vs_stale: a.gain_vs_stale,
                gain_vs_single_user: a.gain_vs_single_user,
                snr_rmse_db: a.snr_rmse_db,
                angle_rmse_deg: a.angle_rmse_deg,
                fade_interval_error_pct: a.fade_interval_error_pct,
                join_fraction: a.join_fraction,
                rounds: r.summary.rounds,
                data_airtime_s: a.data_airtime_s,
                broadcast_airtime_s: a.broadcast_airtime_s,
            })?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Reads `summary.csv` back into rows, one per (value, seed). Fields the
/// CSV does not carry (duration, fade interval count) are zero.
pub fn read_summary_csv<R: std::io::Read>(r: R) -> Result<Vec<SweepRow>> {
    let bad = |e: String| Error::Trace(format!("summary: {e}"));
    let mut rd = csv::Reader::from_reader(r);
    let mut rows: Vec<SweepRow> = Vec::new();
    for rec in rd.deserialize::<SummaryRow>() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("schema version {} is not {SCHEMA_VERSION}", rec.schema_version)));
        }
        let axis = if rec.axis.is_empty() { None } else { Some(rec.axis.parse().map_err(|e: Error| bad(e.to_string()))?) };
        let value = rec.value.unwrap_or(0.0);
        let kind = PolicyKind::parse(&rec.arm).ok_or_else(|| bad(format!("unknown arm `{}`", rec.arm)))?;
        let clients = if rec.client_throughput_mbps.is_empty() {
            Vec::new()
        } else {
            rec.client_throughput_mbps
                .split(';')
                .map(|x| x.parse::<f64>().map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<f64>>>()?
        };
        let arm = ArmSummary {
            kind,
            mean_throughput_mbps: rec.mean_throughput_mbps,
            client_throughput_mbps: clients,
            snr_rmse_db: rec.snr_rmse_db,
            angle_rmse_deg: rec.angle_rmse_deg,
            fade_interval_error_pct: rec.fade_interval_error_pct,
            join_fraction: rec.join_fraction,
            data_airtime_s: rec.data_airtime_s,
            broadcast_airtime_s: rec.broadcast_airtime_s,
            gain_vs_stale: rec.gain_vs_stale,
            gain_vs_single_user: rec.gain_vs_single_user,
        };
        match rows.last_mut() {
            Some(last) if last.axis == axis && last.value == value && last.seed == rec.seed && last.summary.name == rec.scenario => {
                last.summary.arms.push(arm)
            }
            _ => rows.push(SweepRow {
                axis,
                value,
                seed: rec.seed,
                summary: ExperimentSummary {
                    name: rec.scenario,
                    seed: rec.seed,
                    duration: 0.0,
                    rounds: rec.rounds,
                    fade_intervals: 0,
                    arms: vec![arm],
                },
            }),
        }
    }
    Ok(rows)
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn fmt_opt(x: Option<f64>, prec: usize) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.prec$}"))
}

/// Per value and arm: means over seeds, gains as the mean of per-seed ratios.
pub fn summary_text(rows: &[SweepRow]) -> String {
    let mut groups: BTreeMap<(u64, PolicyKind), Vec<&SweepRow>> = BTreeMap::new();
    let mut values: Vec<f64> = Vec::new();
    let mut arms: Vec<PolicyKind> = Vec::new();
    for r in rows {
        if !values.contains(&r.value) {
            values.push(r.value);
        }
        for a in &r.summary.arms {
            if !arms.contains(&a.kind) {
                arms.push(a.kind);
            }
            groups.entry((r.value.to_bits(), a.kind)).or_default().push(r);
        }
    }
    let mut s = String::new();
    let name = rows.first().map_or("", |r| r.summary.name.as_str());
    let axis = rows.first().and_then(|r| r.axis).map_or("-", |a| a.name());
    let seeds = rows.iter().filter(|r| r.value == rows[0].value).count();
    let _ = writeln!(s, "scenario {name}  axis {axis}  seeds {seeds}  schema {SCHEMA_VERSION}");
    let _ = writeln!(
        s,
        "{:>10} {:>12} {:>10} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "value", "arm", "mbps", "vs_stale", "vs_su", "rmse_db", "angle", "fade_pct"
    );
    for v in &values {
        for k in &arms {
            let Some(g) = groups.get(&(v.to_bits(), *k)) else { continue };
            let pick = |f: &dyn Fn(&ArmSummary) -> Option<f64>| -> Vec<f64> {
                g.iter().filter_map(|r| r.summary.arm(*k).and_then(f)).collect()
            };
            let value = if axis == "-" { "-".to_string() } else { v.to_string() };
            let _ = writeln!(
                s,
                "{:>10} {:>12} {:>10} {:>9} {:>9} {:>9} {:>9} {:>9}",
                value,
                k.name(),
                fmt_opt(mean(&pick(&|a| Some(a.mean_throughput_mbps))), 3),
                fmt_opt(mean(&pick(&|a| a.gain_vs_stale)), 4),
                fmt_opt(mean(&pick(&|a| a.gain_vs_single_user)), 4),
                fmt_opt(mean(&pick(&|a| Some(a.snr_rmse_db))), 3),
                fmt_opt(mean(&pick(&|a| Some(a.angle_rmse_deg))), 2),
                fmt_opt(mean(&pick(&|a| a.fade_interval_error_pct)), 1),
            );
        }
    }
    s
}

/// Writes `summary.csv` and `summary.txt`.
pub fn emit_reports(paths: &OutputPaths, rows: &[SweepRow]) -> Result<()> {
    let p = paths.file(SUMMARY_CSV);
    let f = File::create(&p).map_err(|e| io_err(&p, e))?;
    write_summary_csv(BufWriter::new(f), rows)?;
    let p = paths.file(SUMMARY_TXT);
    std::fs::write(&p, summary_text(rows)).map_err(|e| io_err(&p, e))?;
    Ok(())
}

#[derive(Serialize)]
struct RecordRow<'a> {
    round: usize,
    t: f64,
    arm: &'a str,
    client: usize,
    joined: bool,
    rate: f64,
    snr_proj_true: f64,
    snr_proj_pred: f64,
    success_prob: f64,
    delivered: f64,
    bits: f64,
}

pub fn write_records<W: Write>(w: W, records: &[RoundRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        for a in &r.arms {
            for c in &a.clients {
                wr.serialize(RecordRow {
                    round: r.round,
                    t: r.t,
                    arm: a.kind.name(),
                    client: c.client,
                    joined: c.joined,
                    rate: c.rate,
                    snr_proj_true: c.snr_proj_true,
                    snr_proj_pred: c.snr_proj_pred,
                    success_prob: c.success_prob,
                    delivered: c.delivered,
                    bits: c.bits,
                })?;
            }
        }
    }
    wr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PredictionRow {
    t: f64,
    client: usize,
    antenna: usize,
    horizon: f64,
    predicted_snr: f64,
    stale_snr: f64,
    actual_snr: f64,
    angle_err_pred: f64,
    angle_err_stale: f64,
    fallback: bool,
}

pub fn write_predictions<W: Write>(w: W, rows: &[PredictionRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        for m in 0..r.actual_snr.len() {
            wr.serialize(PredictionRow {
                t: r.t,
                client: r.client,
                antenna: m,
                horizon: r.horizon,
                predicted_snr: r.predicted_snr[m],
                stale_snr: r.stale_snr[m],
                actual_snr: r.actual_snr[m],
                angle_err_pred: r.angle_err_pred,
                angle_err_stale: r.angle_err_stale,
                fallback: r.fallback,
            })?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ForecastRow {
    t: f64,
    client: usize,
    d_d: f64,
    axis: crate::fading::ForecastAxis,
    v_radial: f64,
    delta_dd: Option<f64>,
    t_fading: Option<f64>,
}

pub fn write_forecasts<W: Write>(w: W, rows: &[ForecastRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        let f = r.forecast;
        wr.serialize(ForecastRow {
            t: f.t,
            client: r.client,
            d_d: r.d_d,
            axis: f.axis,
            v_radial: f.v_radial,
            delta_dd: f.delta_dd.is_finite().then_some(f.delta_dd),
            t_fading: f.t_fading.is_finite().then_some(f.t_fading),
        })?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes whichever detail files the run kept.
pub fn emit_details(paths: &OutputPaths, out: &super::run::RunOutput, cfg: &super::config::OutputConfig) -> Result<()> {
    let open = |name: &str| -> Result<BufWriter<File>> {
        let p = paths.file(name);
        Ok(BufWriter::new(File::create(&p).map_err(|e| io_err(&p, e))?))
    };
    if cfg.records {
        write_records(open(RECORDS_CSV)?, &out.records)?;
    }
    if cfg.predictions {
        write_predictions(open(PREDICTIONS_CSV)?, &out.predictions)?;
    }
    if cfg.forecasts {
        write_forecasts(open(FORECASTS_CSV)?, &out.forecasts)?;
    }
    Ok(())
}

/// Detail file names switched on in `cfg`.
pub fn detail_files(cfg: &super::config::OutputConfig) -> Vec<&'static str> {
    let mut v = Vec::new();
    if cfg.records {
        v.push(RECORDS_CSV);
    }
    if cfg.predictions {
        v.push(PREDICTIONS_CSV);
    }
    if cfg.forecasts {
        v.push(FORECASTS_CSV);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run::{ArmSummary, ExperimentSummary};
    use crate::harness::sweep::SweepAxis;

    fn row(value: f64, seed: u64, tp: [f64; 2]) -> SweepRow {
        let arm = |kind, t: f64| ArmSummary {
            kind,
            mean_throughput_mbps: t,
            client_throughput_mbps: vec![t / 2.0, t / 2.0],
            snr_rmse_db: 1.0,
            angle_rmse_deg: 2.0,
            fade_interval_error_pct: None,
            join_fraction: 1.0,
            data_airtime_s: 1.0,
            broadcast_airtime_s: 0.0,
            gain_vs_stale: Some(t / tp[1]),
            gain_vs_single_user: None,
        };
        SweepRow {
            axis: Some(SweepAxis::Velocity),
            value,
            seed,
            summary: ExperimentSummary {
                name: "t".into(),
                seed,
                duration: 1.0,
                rounds: 10,
                fade_intervals: 0,
                arms: vec![arm(PolicyKind::SensRate, tp[0]), arm(PolicyKind::StaleCsi, tp[1])],
            },
        }
    }

    #[test]
    fn one_row_per_arm_value_seed() {
        let rows: Vec<SweepRow> =
            [1.0, 2.0, 3.0].iter().flat_map(|&v| [1, 2].map(|s| row(v, s, [60.0, 50.0]))).collect();
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 12);
        assert!(text.lines().next().unwrap().starts_with("schema_version,scenario,axis,value,seed,arm"));
        assert!(text.contains("25;25"));
    }

    #[test]
    fn gains_are_mean_of_ratios() {
        let rows = vec![row(1.0, 1, [60.0, 50.0]), row(1.0, 2, [30.0, 10.0])];
        let text = summary_text(&rows);
        // (1.2 + 3.0) / 2, not 90 / 60
        assert!(text.contains("2.1000"), "{text}");
    }

    #[test]
    fn summary_csv_reads_back() {
        let rows: Vec<SweepRow> = [1.0, 2.0].iter().flat_map(|&v| [1, 2].map(|s| row(v, s, [60.0 + v, 50.0]))).collect();
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows).unwrap();
        let back = read_summary_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 4);
        assert_eq!(summary_text(&back), summary_text(&rows));
        assert!(read_summary_csv("schema_version,scenario\n9,x\n".as_bytes()).is_err());
    }

    #[test]
    fn unwritable_dir_fails_up_front() {
        let tmp = tempfile::tempdir().unwrap();
        let blocker = tmp.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        assert!(OutputPaths::prepare(&blocker.join("sub"), &[]).is_err());
        assert!(OutputPaths::prepare(&tmp.path().join("ok"), &[RECORDS_CSV]).is_ok());
    }
}
