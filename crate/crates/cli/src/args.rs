use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "bbtoolkit",
    version,
    about = "Estimate, simulate and compare round-based balls-into-bins algorithms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the expected remaining balls and load distribution.
    Estimate(EstimateArgs),
    /// Run Monte Carlo trials of an algorithm.
    Simulate(SimulateArgs),
    /// Regenerate the first-round reference tables.
    Tables(TablesArgs),
    /// Run named scenarios and baselines side by side.
    Compare(CompareArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Simulate(_) => "simulate",
            Command::Tables(_) => "tables",
            Command::Compare(_) => "compare",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Estimate(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Tables(a) => &a.common,
            Command::Compare(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }

    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Number of bins.
    #[arg(long, value_parser = parse_count)]
    pub n: Option<u64>,
    /// Number of balls (defaults to n).
    #[arg(long, value_parser = parse_count)]
    pub balls: Option<u64>,
    /// Messages per ball, one entry per round (a single entry is repeated).
    #[arg(long = "M", alias = "messages", value_delimiter = ',', value_parser = parse_u32)]
    pub messages: Option<Vec<u32>>,
    /// Accepted load per round, non-decreasing (a single entry is repeated).
    #[arg(long = "L", alias = "capacities", value_delimiter = ',', value_parser = parse_u32)]
    pub capacities: Option<Vec<u32>>,
    #[arg(long, conflicts_with = "unranked")]
    pub ranked: bool,
    #[arg(long)]
    pub unranked: bool,
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub seed: Option<u64>,
    /// Output directory [env: BBTOOLKIT_OUT_DIR, default: bbtoolkit-out].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML (or JSON) config file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Poisson tail mass dropped by the estimator.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Absolute cap on Poisson summation indices.
    #[arg(long, value_parser = parse_count)]
    pub hard_cap: Option<u64>,
}

impl Common {
    pub fn ranked_flag(&self) -> Option<bool> {
        match (self.ranked, self.unranked) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[command(flatten)]
    pub common: Common,
    /// 1, 2, 3, 4 or all.
    #[arg(long, value_parser = parse_which)]
    pub which: Option<Which>,
    /// Message count used for the limit rows.
    #[arg(long, value_parser = parse_count)]
    pub limit_proxy: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Every scenario and baseline.
    #[arg(long, conflicts_with = "only")]
    pub all: bool,
    /// Comma-separated scenario or baseline names.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<String>>,
    /// Load cap for the baselines (both 2 and 3 when unset).
    #[arg(long, value_parser = parse_u32)]
    pub cap: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Which {
    One(u8),
    All(AllTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllTag {
    All,
}

impl Which {
    pub fn tables(self) -> Vec<u8> {
        match self {
            Which::One(t) => vec![t],
            Which::All(_) => vec![1, 2, 3, 4],
        }
    }
}

pub fn parse_which(s: &str) -> Result<Which, String> {
    match s.trim() {
        "all" => Ok(Which::All(AllTag::All)),
        t => match t.parse::<u8>() {
            Ok(n @ 1..=4) => Ok(Which::One(n)),
            _ => Err(format!("expected 1, 2, 3, 4 or all, got {s:?}")),
        },
    }
}

/// Parses a non-negative integer written plainly or in scientific notation
/// (`1e6`, `2.5E5`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = t.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 {
        return Err(format!("expected a non-negative integer, got {s:?}"));
    }
    if v >= 2f64.powi(53) {
        return Err(format!(
            "{s:?} is too large to be exact; write it out in full"
        ));
    }
    Ok(v as u64)
}

pub fn parse_u32(s: &str) -> Result<u32, String> {
    let v = parse_count(s)?;
    u32::try_from(v).map_err(|_| format!("{s:?} exceeds {}", u32::MAX))
}
