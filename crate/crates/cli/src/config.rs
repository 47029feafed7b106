//! Layered configuration: flags, then the `--config` file, then defaults.
//!
//! The resolved [`Config`] has every field the command uses filled in and is
//! itself a valid config file, which is what the run manifest records.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use bbtoolkit::{AlgorithmSpec, PoissonTruncation, PopulationSpec};
use serde::{Deserialize, Deserializer, Serialize};

use crate::args::{parse_count, Common, Format, Which};

pub const OUT_DIR_ENV: &str = "BBTOOLKIT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "bbtoolkit-out";
pub const DEFAULT_N: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

/// Bad user input; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Population::is_empty")]
    pub population: Population,
    #[serde(skip_serializing_if = "Algorithm::is_empty")]
    pub algorithm: Algorithm,
    pub run: Run,
    #[serde(skip_serializing_if = "Truncation::is_empty")]
    pub truncation: Truncation,
    #[serde(skip_serializing_if = "TablesSection::is_empty")]
    pub tables: TablesSection,
    #[serde(skip_serializing_if = "CompareSection::is_empty")]
    pub compare: CompareSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Population {
    #[serde(deserialize_with = "count", skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(deserialize_with = "count", skip_serializing_if = "Option::is_none")]
    pub balls: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Algorithm {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub messages: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacities: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranked: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Run {
    #[serde(deserialize_with = "count", skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(deserialize_with = "count", skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Where files go, not what they contain; left out of manifests.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(deserialize_with = "count", skip_serializing_if = "Option::is_none")]
    pub hard_cap: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TablesSection {
    #[serde(deserialize_with = "which", skip_serializing_if = "Option::is_none")]
    pub which: Option<Which>,
    #[serde(deserialize_with = "count", skip_serializing_if = "Option::is_none")]
    pub limit_proxy: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub only: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u32>,
}

macro_rules! is_empty {
    ($($t:ty),*) => {$(
        impl $t {
            fn is_empty(&self) -> bool {
                *self == Self::default()
            }
        }
    )*};
}
is_empty!(
    Population,
    Algorithm,
    Truncation,
    TablesSection,
    CompareSection
);

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Int(u64),
    Float(f64),
    Text(String),
}

fn count<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
    let v = match Number::deserialize(d)? {
        Number::Int(v) => return Ok(Some(v)),
        Number::Float(v) => parse_count(&v.to_string()),
        Number::Text(s) => parse_count(&s),
    };
    v.map(Some).map_err(serde::de::Error::custom)
}

fn which<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Which>, D::Error> {
    let s = match Number::deserialize(d)? {
        Number::Int(v) => v.to_string(),
        Number::Float(v) => v.to_string(),
        Number::Text(s) => s,
    };
    crate::args::parse_which(&s)
        .map(Some)
        .map_err(serde::de::Error::custom)
}

/// Reads a TOML file, or JSON when the extension is `.json`.
pub fn load(path: &Path) -> anyhow::Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| config_error(format!("invalid config {}: {e}", path.display())))
}

/// What a command needs from the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    Estimate,
    Simulate,
    Tables,
    Compare,
}

impl Needs {
    fn default_trials(self) -> u64 {
        match self {
            Needs::Compare => 20,
            _ => 100,
        }
    }
}

/// Fills every field `needs` uses: flags over `file` over defaults. Fields the
/// command does not use are left empty.
pub fn resolve(flags: &Common, file: Config, needs: Needs) -> Config {
    let uses_algorithm = matches!(needs, Needs::Estimate | Needs::Simulate);
    let uses_trials = needs != Needs::Estimate;
    let n = flags.n.or(file.population.n).unwrap_or(DEFAULT_N);
    let population = Population {
        n: Some(n),
        balls: if uses_algorithm {
            Some(flags.balls.or(file.population.balls).unwrap_or(n))
        } else {
            None
        },
    };
    let algorithm = if uses_algorithm {
        Algorithm {
            messages: Some(
                flags
                    .messages
                    .clone()
                    .or(file.algorithm.messages)
                    .unwrap_or(vec![2]),
            ),
            capacities: Some(
                flags
                    .capacities
                    .clone()
                    .or(file.algorithm.capacities)
                    .unwrap_or(vec![2]),
            ),
            ranked: Some(
                flags
                    .ranked_flag()
                    .or(file.algorithm.ranked)
                    .unwrap_or(false),
            ),
        }
    } else {
        Algorithm::default()
    };
    let out_dir = flags
        .out_dir
        .clone()
        .or(file.run.out_dir)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let run = Run {
        trials: uses_trials.then(|| {
            flags
                .trials
                .or(file.run.trials)
                .unwrap_or(needs.default_trials())
        }),
        seed: uses_trials.then(|| flags.seed.or(file.run.seed).unwrap_or(DEFAULT_SEED)),
        out_dir: Some(out_dir),
        format: Some(flags.format.or(file.run.format).unwrap_or(Format::Both)),
    };
    let uses_truncation = needs != Needs::Simulate;
    let truncation = if uses_truncation {
        Truncation {
            epsilon: Some(
                flags
                    .epsilon
                    .or(file.truncation.epsilon)
                    .unwrap_or(PoissonTruncation::default().epsilon),
            ),
            hard_cap: flags.hard_cap.or(file.truncation.hard_cap),
        }
    } else {
        Truncation::default()
    };
    Config {
        population,
        algorithm,
        run,
        truncation,
        tables: if needs == Needs::Tables {
            file.tables
        } else {
            TablesSection::default()
        },
        compare: if needs == Needs::Compare {
            file.compare
        } else {
            CompareSection::default()
        },
    }
}

impl Config {
    pub fn n(&self) -> u64 {
        self.population.n.unwrap_or(DEFAULT_N)
    }

    pub fn seed(&self) -> Option<u64> {
        self.run.seed
    }

    pub fn trials(&self) -> anyhow::Result<usize> {
        let t = self.run.trials.unwrap_or(0);
        usize::try_from(t).map_err(|_| config_error(format!("trials = {t} is too large")))
    }

    pub fn out_dir(&self) -> &Path {
        self.run
            .out_dir
            .as_deref()
            .unwrap_or(Path::new(DEFAULT_OUT_DIR))
    }

    pub fn format(&self) -> Format {
        self.run.format.unwrap_or(Format::Both)
    }

    pub fn truncation(&self) -> anyhow::Result<PoissonTruncation> {
        let epsilon = self
            .truncation
            .epsilon
            .unwrap_or(PoissonTruncation::default().epsilon);
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(config_error(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let hard_cap = match self.truncation.hard_cap {
            Some(0) => return Err(config_error("hard-cap must be at least 1")),
            Some(c) => Some(usize::try_from(c).context("hard-cap too large")?),
            None => None,
        };
        Ok(PoissonTruncation { epsilon, hard_cap })
    }

    pub fn population(&self) -> anyhow::Result<PopulationSpec> {
        let n = self.n();
        let balls = self.population.balls.unwrap_or(n);
        PopulationSpec::new(n, balls).map_err(|e| config_error(format!("invalid population: {e}")))
    }

    /// Repeats single-entry lists to the number of rounds.
    pub fn spec(&self) -> anyhow::Result<AlgorithmSpec> {
        let messages = self.algorithm.messages.clone().unwrap_or_default();
        let capacities = self.algorithm.capacities.clone().unwrap_or_default();
        if messages.is_empty() || capacities.is_empty() {
            return Err(config_error("both --M and --L need at least one entry"));
        }
        let rounds = messages.len().max(capacities.len());
        let widen = |v: Vec<u32>, what: &str| -> anyhow::Result<Vec<u32>> {
            match v.len() {
                1 => Ok(vec![v[0]; rounds]),
                len if len == rounds => Ok(v),
                len => Err(config_error(format!(
                    "{what} has {len} entries but the algorithm has {rounds} rounds"
                ))),
            }
        };
        let spec = AlgorithmSpec::new(
            widen(messages, "--M")?,
            widen(capacities, "--L")?,
            self.algorithm.ranked.unwrap_or(false),
        );
        spec.map_err(|e| config_error(format!("invalid algorithm: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_numbers_in_any_notation() {
        let c: Config = toml::from_str(
            "[population]\nn = 1e6\nballs = \"2.5e5\"\n[run]\nseed = 7\n[tables]\nwhich = 3\n",
        )
        .unwrap();
        assert_eq!(c.population.n, Some(1_000_000));
        assert_eq!(c.population.balls, Some(250_000));
        assert_eq!(c.run.seed, Some(7));
        assert_eq!(c.tables.which, Some(Which::One(3)));
        assert!(toml::from_str::<Config>("[population]\nbins = 3\n").is_err());
    }

    #[test]
    fn flags_override_file_and_defaults_fill_the_rest() {
        let file: Config = toml::from_str(
            "[population]\nn = 500\n[algorithm]\nmessages = [1, 2]\nranked = true\n",
        )
        .unwrap();
        let flags = Common {
            n: Some(100),
            unranked: true,
            ..Common::default()
        };
        let c = resolve(&flags, file, Needs::Simulate);
        assert_eq!(c.population.n, Some(100));
        assert_eq!(c.population.balls, Some(100));
        assert_eq!(c.algorithm.messages, Some(vec![1, 2]));
        assert_eq!(c.algorithm.ranked, Some(false));
        assert_eq!(c.run.trials, Some(100));
        let spec = c.spec().unwrap();
        assert_eq!(spec.capacity_per_round, vec![2, 2]);
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut c = resolve(&Common::default(), Config::default(), Needs::Estimate);
        assert!(c.run.out_dir.is_some());
        c.run.out_dir = None;
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<Config>(&text).unwrap(), c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Config>(&json).unwrap(), c);
    }

    #[test]
    fn list_lengths_must_agree() {
        let mut c = resolve(&Common::default(), Config::default(), Needs::Estimate);
        c.algorithm.messages = Some(vec![1, 2, 3]);
        c.algorithm.capacities = Some(vec![2, 3]);
        assert!(c
            .spec()
            .unwrap_err()
            .downcast_ref::<ConfigError>()
            .is_some());
    }
}
