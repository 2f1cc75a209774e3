//! Run configuration: a TOML (or manifest JSON) file overlaid by flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::CliError;

macro_rules! overlay {
    ($dst:expr, $src:expr, $($field:ident),+ $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )+
    };
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestOpts {
    /// Interval price CSV (`date,time,price[,bid,ask]`)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Calendar file with `holiday`/`halfday`/`range` lines
    #[arg(long)]
    pub calendar: Option<PathBuf>,
    /// Contract preset: ftse100, long_gilt or sterling
    #[arg(long)]
    pub contract: Option<String>,
    /// Intervals per day (overrides the preset)
    #[arg(long)]
    pub intervals: Option<usize>,
    #[arg(long)]
    pub interval_minutes: Option<u32>,
    /// Time of the first grid slot, HH:MM:SS
    #[arg(long)]
    pub session_open: Option<String>,
    /// midquote_then_previous, previous_only or fail_on_gap
    #[arg(long)]
    pub fill: Option<String>,
}

impl IngestOpts {
    fn overlay(&mut self, o: &Self) {
        overlay!(
            self,
            o,
            input,
            calendar,
            contract,
            intervals,
            interval_minutes,
            session_open,
            fill
        );
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsOpts {
    /// Realized measures to compute, e.g. sum_abs,ln_realized_std
    #[arg(long, value_delimiter = ',')]
    pub measures: Option<Vec<String>>,
    /// Percentile probabilities for the summary block
    #[arg(long, value_delimiter = ',')]
    pub percentiles: Option<Vec<f64>>,
}

impl StatsOpts {
    fn overlay(&mut self, o: &Self) {
        overlay!(self, o, measures, percentiles);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryOpts {
    /// Bandwidth exponent for the log-periodogram regression
    #[arg(long)]
    pub delta: Option<f64>,
    /// Largest aggregation level for the scaling law
    #[arg(long)]
    pub tmax: Option<usize>,
    /// paper or theoretical
    #[arg(long)]
    pub convention: Option<String>,
    #[arg(long)]
    pub lb_lags: Option<usize>,
    #[arg(long)]
    pub acf_lags: Option<usize>,
}

impl MemoryOpts {
    fn overlay(&mut self, o: &Self) {
        overlay!(self, o, delta, tmax, convention, lb_lags, acf_lags);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapitalOpts {
    /// Comma-separated probabilities, e.g. 0.90,0.95,0.99,0.995
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[arg(long)]
    pub window: Option<usize>,
    /// linear or exp
    #[arg(long)]
    pub gaussian_form: Option<String>,
    /// Holding period in days for variance scaling
    #[arg(long)]
    pub horizon: Option<u32>,
    /// Memory parameter used for horizon scaling
    #[arg(long)]
    pub horizon_d: Option<f64>,
}

impl CapitalOpts {
    fn overlay(&mut self, o: &Self) {
        overlay!(self, o, probs, window, gaussian_form, horizon, horizon_d);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateOpts {
    /// constant_vol, ou_sv or fractional_noise
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// OU factors as rate:vol_of_vol pairs, comma-separated
    #[arg(long, value_delimiter = ',')]
    pub ou_factors: Option<Vec<String>>,
}

impl SimulateOpts {
    fn overlay(&mut self, o: &Self) {
        overlay!(self, o, kind, sigma, d, days, seed, ou_factors);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputOpts {
    /// Price grid CSV written by `ingest`
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Daily series CSV (`date,value`)
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Daily return series CSV
    #[arg(long)]
    pub returns: Option<PathBuf>,
    /// Realized standard deviation series CSV
    #[arg(long)]
    pub rstd: Option<PathBuf>,
}

impl InputOpts {
    fn overlay(&mut self, o: &Self) {
        overlay!(self, o, grid, series, returns, rstd);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOpts {
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output directory for commands that write several files
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// text, csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Extra CSV with the scaling-law scatter (log T, log variance)
    #[arg(long)]
    pub scatter_out: Option<PathBuf>,
}

impl OutputOpts {
    fn overlay(&mut self, o: &Self) {
        overlay!(self, o, out, out_dir, format, scatter_out);
    }
}

/// Everything a run needs. Serialized into each manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ingest: IngestOpts,
    pub inputs: InputOpts,
    pub stats: StatsOpts,
    pub memory: MemoryOpts,
    pub capital: CapitalOpts,
    pub simulate: SimulateOpts,
    pub output: OutputOpts,
}

#[derive(Deserialize)]
struct ManifestConfig {
    config: RunConfig,
}

impl RunConfig {
    /// Reads a TOML config, or the `config` object of a JSON manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str::<ManifestConfig>(&text)
                .map(|m| m.config)
                .map_err(|e| CliError::usage("config.invalid", format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::usage("config.invalid", format!("{}: {e}", path.display())))
        }
    }

    /// Flags win over file values.
    pub fn overlay(&mut self, flags: &RunConfig) {
        self.ingest.overlay(&flags.ingest);
        self.inputs.overlay(&flags.inputs);
        self.stats.overlay(&flags.stats);
        self.memory.overlay(&flags.memory);
        self.capital.overlay(&flags.capital);
        self.simulate.overlay(&flags.simulate);
        self.output.overlay(&flags.output);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win() {
        let mut file: RunConfig =
            toml::from_str("[capital]\nwindow = 10\nprobs = [0.9]\n[memory]\ndelta = 0.7\n").unwrap();
        let mut flags = RunConfig::default();
        flags.capital.window = Some(30);
        file.overlay(&flags);
        assert_eq!(file.capital.window, Some(30));
        assert_eq!(file.capital.probs, Some(vec![0.9]));
        assert_eq!(file.memory.delta, Some(0.7));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[capital]\nwindw = 10\n").is_err());
    }
}
