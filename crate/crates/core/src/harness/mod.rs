//! Scenario runner, sweeps, reports and canned experiments.

pub mod config;
pub mod report;
pub mod run;
pub mod scenarios;
pub mod sweep;
pub mod tolerance;

pub use config::ScenarioConfig;
pub use run::{analyze_trace, run_scenario, synth_trace, ExperimentSummary, RoundRecord, RunOutput, TraceAnalysis};
pub use sweep::{sweep, SweepAxis, SweepRow};

/// Independent random streams derived from one scenario seed.
pub mod seeds {
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub const SYNTH: u64 = 1;
    pub const BROADCAST: u64 = 2;
    pub const READINGS: u64 = 3;
    pub const ORDER: u64 = 4;
    /// Plus the arm's position in the config.
    pub const DECODE: u64 = 16;
    /// Plus the client index.
    pub const WALK: u64 = 64;

    pub fn rng(seed: u64, tag: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(tag);
        r
    }

    pub fn derive(seed: u64, tag: u64) -> u64 {
        rng(seed, tag).next_u64()
    }
}
