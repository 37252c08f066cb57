//! `airrate` command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use airrate::channel::{read_trace_file, write_trace, write_trace_file};
use airrate::error::Error;
use airrate::harness::config::{field_defaults, TrajectoryConfig};
use airrate::harness::report::{detail_files, emit_details, emit_reports, read_summary_csv, summary_text, OutputPaths};
use airrate::harness::{analyze_trace, run_scenario, sweep, synth_trace, ScenarioConfig, SweepAxis, SweepRow};
use clap::{Args, Parser, Subcommand};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid config, flag or argument
  3  trace or input/output file error
  4  internal invariant violation";

#[derive(Parser)]
#[command(name = "airrate", version, about = "Sensor-assisted rate adaptation simulator for UAV multi-user MIMO links")]
#[command(after_long_help = long_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config without running it; prints OK.
    #[command(after_long_help = long_help())]
    Validate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Print the resolved config as TOML instead of OK.
        #[arg(long)]
        print: bool,
    },
    /// Run one scenario and write reports to the output directory.
    #[command(after_long_help = long_help())]
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run a scenario over a range of values of one axis and several seeds.
    #[command(after_long_help = long_help())]
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// velocity | distance | csi_rate | reflectors | client_motion
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        /// Comma-separated seeds or an inclusive range such as 1-5 (default: the config seed).
        #[arg(long)]
        seeds: Option<String>,
        /// Worker threads; results do not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write the synthesized channel of a scenario as a trace CSV.
    #[command(after_long_help = long_help())]
    SynthTrace {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Trace file, `-` for standard output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a trace through the predictor and print its error next to holding the last reading.
    #[command(after_long_help = long_help())]
    AnalyzeTrace {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Trace CSV with columns t,client,antenna,re,im,snr_db.
        #[arg(long)]
        trace: PathBuf,
    },
    /// Rebuild the plain-text summary from a summary.csv.
    Report {
        /// summary.csv written by `run` or `sweep`.
        #[arg(long)]
        input: PathBuf,
        /// Write the text here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Config file, overrides and shortcuts; later sources win.
#[derive(Args)]
struct ConfigArgs {
    /// Scenario TOML file; defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override any field as dotted.key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// CSI reading rate, Hz.
    #[arg(long)]
    f_r: Option<f64>,
    /// Shuttle speed, m/s.
    #[arg(long)]
    speed: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write records.csv.
    #[arg(long)]
    records: bool,
    /// Also write predictions.csv.
    #[arg(long)]
    predictions: bool,
    /// Also write forecasts.csv.
    #[arg(long)]
    forecasts: bool,
}

impl ConfigArgs {
    fn load(&self) -> Result<ScenarioConfig, Failure> {
        let mut cfg = ScenarioConfig::load(self.config.as_deref(), &self.set)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = self.duration {
            cfg.duration = d;
        }
        if let Some(f) = self.f_r {
            cfg.f_r = f;
        }
        if let Some(v) = self.speed {
            match &mut cfg.trajectory {
                TrajectoryConfig::Shuttle { speed, .. } => *speed = v,
                _ => return Err(Failure::config("--speed needs a shuttle trajectory")),
            }
        }
        if let Some(d) = &self.out_dir {
            cfg.output.dir = d.clone();
        }
        cfg.output.records |= self.records;
        cfg.output.predictions |= self.predictions;
        cfg.output.forecasts |= self.forecasts;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn long_help() -> String {
    let fields = field_defaults();
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config fields (set with --set key=value, or in the TOML file) and defaults:\n");
    for (k, v) in fields {
        s.push_str(&format!("  {k:<width$}  {v}\n"));
    }
    s.push('\n');
    s.push_str(EXIT_CODES);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Config,
    Io,
    Internal,
}

impl Kind {
    fn code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Io => 3,
            Kind::Internal => 4,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Io => "io",
            Kind::Internal => "internal",
        }
    }
}

#[derive(Debug)]
struct Failure {
    kind: Kind,
    msg: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { kind: Kind::Config, msg: msg.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure { kind: Kind::Io, msg: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Config(_) | Error::Sampling { .. } => Kind::Config,
            Error::Trace(_) | Error::Io(_) | Error::Csv(_) => Kind::Io,
            Error::OutOfRange { .. } | Error::InvalidDirection | Error::DegenerateSubspace | Error::Internal(_) => {
                Kind::Internal
            }
        };
        Failure { kind, msg: e.to_string() }
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::config(format!("--seeds `{s}` is not a list like 1,2,3 or a range like 1-5"));
    if let Some((a, b)) = s.split_once('-') {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn single_row(out: &airrate::harness::RunOutput, cfg: &ScenarioConfig) -> SweepRow {
    SweepRow { axis: None, value: 0.0, seed: cfg.seed, summary: out.summary().clone() }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Validate { cfg, print } => {
            let c = cfg.load()?;
            if print {
                print!("{}", c.to_toml());
            } else {
                println!("OK");
            }
        }
        Command::Run { cfg } => {
            let c = cfg.load()?;
            let paths = OutputPaths::prepare(&c.output.dir, &detail_files(&c.output))?;
            eprintln!("running {} (seed {}, {} s)", c.name, c.seed, c.duration);
            let out = run_scenario(&c)?;
            let rows = [single_row(&out, &c)];
            emit_reports(&paths, &rows)?;
            emit_details(&paths, &out, &c.output)?;
            eprintln!("wrote {}", paths.dir.display());
            print!("{}", summary_text(&rows));
        }
        Command::Sweep { cfg, axis, values, seeds, jobs } => {
            let c = cfg.load()?;
            let seeds = match seeds {
                Some(s) => parse_seeds(&s)?,
                None => vec![c.seed],
            };
            if jobs == 0 {
                return Err(Failure::config("--jobs must be >= 1"));
            }
            let paths = OutputPaths::prepare(&c.output.dir, &[])?;
            eprintln!("sweeping {} over {} values x {} seeds on {jobs} thread(s)", axis, values.len(), seeds.len());
            let rows = sweep(&c, axis, &values, &seeds, jobs)?;
            emit_reports(&paths, &rows)?;
            eprintln!("wrote {}", paths.dir.display());
            print!("{}", summary_text(&rows));
        }
        Command::SynthTrace { cfg, out } => {
            let c = cfg.load()?;
            eprintln!("synthesizing {} s at {} Hz", c.duration, c.f_s);
            let trace = synth_trace(&c)?;
            if out.as_os_str() == "-" {
                let stdout = std::io::stdout();
                write_trace(stdout.lock(), &trace)?;
            } else {
                write_trace_file(&out, &trace).map_err(|e| Failure::io(&out, e))?;
                eprintln!("wrote {}", out.display());
            }
        }
        Command::AnalyzeTrace { cfg, trace } => {
            let c = cfg.load()?;
            let series = read_trace_file(&trace)?;
            eprintln!("replaying {} client(s) at {} Hz readings", series.len(), c.f_r);
            let a = analyze_trace(&c, &series)?;
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            let line = |w: &mut dyn Write, s: String| writeln!(w, "{s}").map_err(|e| Failure { kind: Kind::Io, msg: e.to_string() });
            line(&mut w, "samples,pred_rmse_db,stale_rmse_db,pred_angle_rmse_deg,stale_angle_rmse_deg".into())?;
            line(
                &mut w,
                format!(
                    "{},{},{},{},{}",
                    a.samples, a.pred_rmse_db, a.stale_rmse_db, a.pred_angle_rmse_deg, a.stale_angle_rmse_deg
                ),
            )?;
        }
        Command::Report { input, out } => {
            let f = File::open(&input).map_err(|e| Failure::io(&input, e))?;
            let rows = read_summary_csv(std::io::BufReader::new(f)).map_err(|e| Failure::io(&input, e))?;
            let text = summary_text(&rows);
            match out {
                Some(p) => {
                    let mut w = BufWriter::new(File::create(&p).map_err(|e| Failure::io(&p, e))?);
                    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| Failure::io(&p, e))?;
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error kind=usage code=2 msg={first:?}");
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = f.msg.split_whitespace().collect::<Vec<_>>().join(" ");
            eprintln!("error kind={} code={} msg={msg:?}", f.kind.name(), f.kind.code());
            ExitCode::from(f.kind.code())
        }
    }
}
