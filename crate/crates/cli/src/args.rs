use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qcpd_core::experiments::DEFAULT_OVERLAP_GRID;
use qcpd_core::Strategy;

#[derive(Debug, Parser)]
#[command(name = "qcpd", version, about = "Quantum change point detection experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for Monte Carlo trials (0 = all cores). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output directory.
    #[arg(long, global = true, env = "QCPD_OUT_DIR", default_value = ".")]
    pub out: PathBuf,

    /// Data file format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Single run with its prior trajectory.
    Trial(TrialArgs),
    /// Success probability for each change point k.
    SweepK(SweepKArgs),
    /// k-averaged success against the overlap c².
    SweepOverlap(OverlapArgs),
    /// k-averaged BI and BL success against the sequence length.
    SweepN(SweepNArgs),
    /// BI improvement over BL and gap to the global bound.
    Distances(DistanceArgs),
    /// Time-tagged event streams.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay {
        /// Manifest written next to an earlier output.
        manifest: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trial(_) => "trial",
            Command::SweepK(_) => "sweep-k",
            Command::SweepOverlap(_) => "sweep-overlap",
            Command::SweepN(_) => "sweep-n",
            Command::Distances(_) => "distances",
            Command::Pipeline(PipelineCommand::Generate(_)) => "pipeline-generate",
            Command::Pipeline(PipelineCommand::Postselect(_)) => "pipeline-postselect",
            Command::Pipeline(PipelineCommand::Run(_)) => "pipeline-run",
            Command::Replay { .. } => "replay",
        }
    }

    pub fn master_seed(&self) -> Option<u64> {
        match self {
            Command::Trial(a) => Some(a.seed),
            Command::SweepK(a) => Some(a.mc.seed),
            Command::SweepOverlap(a) => Some(a.mc.seed),
            Command::SweepN(a) => Some(a.mc.seed),
            Command::Distances(a) => Some(a.mc.seed),
            Command::Pipeline(PipelineCommand::Generate(a)) => Some(a.seed),
            Command::Pipeline(PipelineCommand::Run(a)) => Some(a.seed),
            Command::Pipeline(PipelineCommand::Postselect(_)) | Command::Replay { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineCommand {
    /// Write a synthetic event file.
    Generate(GenerateArgs),
    /// Postselect bin outcomes from an event file.
    Postselect(PostselectArgs),
    /// Run detectors end to end on generated streams.
    Run(StreamRunArgs),
}

fn parse_c2(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("c² must lie in [0, 1], got {v}"))
    }
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("noise level must lie in [0, 1], got {v}"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// `default` or a comma-separated list of c² values.
fn parse_grid(s: &str) -> Result<Grid, String> {
    if s.eq_ignore_ascii_case("default") {
        return Ok(Grid(DEFAULT_OVERLAP_GRID.to_vec()));
    }
    s.split(',').map(|v| parse_c2(v.trim())).collect::<Result<Vec<_>, _>>().map(Grid)
}

fn parse_lengths(s: &str) -> Result<Lengths, String> {
    s.split(',').map(|v| parse_positive(v.trim())).collect::<Result<Vec<_>, _>>().map(Lengths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lengths(pub Vec<usize>);

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MonteCarloArgs {
    /// Trials per estimate (per k for sweep-k).
    #[arg(long, default_value_t = 20_000, value_parser = parse_positive)]
    pub trials: usize,
    /// Probability that a recorded outcome is flipped.
    #[arg(long, default_value_t = 0.0, value_parser = parse_epsilon)]
    pub epsilon: f64,
    /// Master seed; every estimate derives its own stream from it.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Replace binomial errors with a bootstrap over this many resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrialArgs {
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    pub n: usize,
    #[arg(long, default_value_t = 0.604, value_parser = parse_c2)]
    pub c2: f64,
    /// True change point, 1..=n.
    #[arg(long, default_value_t = 5, value_parser = parse_positive)]
    pub k: usize,
    #[arg(long, default_value = "BI")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 0.0, value_parser = parse_epsilon)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepKArgs {
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    pub n: usize,
    #[arg(long, default_value_t = 0.604, value_parser = parse_c2)]
    pub c2: f64,
    /// Comma-separated strategies.
    #[arg(long, value_delimiter = ',', default_value = "BL,BI")]
    pub strategies: Vec<Strategy>,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OverlapArgs {
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    pub n: usize,
    /// `default` (0.01, 0.05, 0.10, ..., 0.95, 0.99) or comma-separated c² values.
    #[arg(long, default_value = "default", value_parser = parse_grid)]
    pub grid: Grid,
    #[arg(long, value_delimiter = ',', default_value = "BL,BI")]
    pub strategies: Vec<Strategy>,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepNArgs {
    /// Comma-separated sequence lengths.
    #[arg(long, default_value = "2,5,10,15,20,25,30,35,40", value_parser = parse_lengths)]
    pub n: Lengths,
    #[arg(long, default_value_t = 0.883, value_parser = parse_c2)]
    pub c2: f64,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DistanceArgs {
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    pub n: usize,
    #[arg(long, default_value = "default", value_parser = parse_grid)]
    pub grid: Grid,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

/// Frame timing in nanoseconds.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TimingArgs {
    #[arg(long, default_value_t = 100_000_000)]
    pub trigger_interval: u64,
    #[arg(long, default_value_t = 5_000_000)]
    pub chopper_period: u64,
    #[arg(long, default_value_t = 2_500_000)]
    pub bin_width: u64,
    #[arg(long, default_value_t = 3)]
    pub window: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RateArgs {
    /// Mean heralded pairs per time bin.
    #[arg(long, default_value_t = 1.0)]
    pub pairs_per_bin: f64,
    /// Uncorrelated singles per channel per millisecond.
    #[arg(long, default_value_t = 0.0)]
    pub background: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    pub n: usize,
    #[arg(long, default_value_t = 0.604, value_parser = parse_c2)]
    pub c2: f64,
    #[arg(long, default_value_t = 5, value_parser = parse_positive)]
    pub k: usize,
    /// Number of trigger frames.
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    pub frames: usize,
    /// Polarization angle (degrees) of the basis state giving outcome 0.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub basis_angle: f64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[command(flatten)]
    pub timing: TimingArgs,
    #[command(flatten)]
    pub rates: RateArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PostselectArgs {
    /// Event file (`channel,timestamp_ns`).
    pub input: PathBuf,
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    pub n: usize,
    #[command(flatten)]
    pub timing: TimingArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StreamRunArgs {
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    pub n: usize,
    #[arg(long, default_value_t = 0.604, value_parser = parse_c2)]
    pub c2: f64,
    /// Fixed change point; averaged over k when omitted.
    #[arg(long, value_parser = parse_positive)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "BL,BI")]
    pub strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 2000, value_parser = parse_positive)]
    pub trials: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[command(flatten)]
    pub timing: TimingArgs,
    #[command(flatten)]
    pub rates: RateArgs,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn grids_and_lengths() {
        assert_eq!(parse_grid("default").unwrap().0.len(), 21);
        assert_eq!(parse_grid("0.1, 0.5").unwrap(), Grid(vec![0.1, 0.5]));
        assert!(parse_grid("0.1,2").is_err());
        assert_eq!(parse_lengths("2,10").unwrap(), Lengths(vec![2, 10]));
        assert!(parse_lengths("0").is_err());
    }

    #[test]
    fn commands_round_trip_through_json() {
        let cli =
            Cli::try_parse_from(["qcpd", "sweep-overlap", "--grid", "0.2,0.4", "--trials", "10"]).unwrap();
        let text = serde_json::to_string(&cli.command).unwrap();
        let back: Command = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert_eq!(back.master_seed(), Some(2024));
    }
}
