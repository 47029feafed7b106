//! Named parameter sets used for comparisons.

use crate::baselines::{Baseline, BaselineConfig};
use crate::model::AlgorithmSpec;

/// A ranked three-or-fewer-round configuration with a short name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub messages: &'static [u32],
    pub capacities: &'static [u32],
}

impl Scenario {
    pub fn spec(&self) -> AlgorithmSpec {
        AlgorithmSpec::ranked(self.messages, self.capacities).expect("built-in scenario is valid")
    }
}

pub const SCENARIOS: [Scenario; 4] = [
    Scenario {
        name: "min-load",
        summary: "three rounds with maximal load 2",
        messages: &[2, 5, 5],
        capacities: &[2, 2, 2],
    },
    Scenario {
        name: "min-rounds",
        summary: "two rounds, load 3 allowed in the second",
        messages: &[2, 5],
        capacities: &[2, 3],
    },
    Scenario {
        name: "min-comm",
        summary: "at most two messages per ball and round",
        messages: &[1, 2, 2],
        capacities: &[2, 3, 3],
    },
    Scenario {
        name: "max-terminate",
        summary: "termination with high probability at moderate traffic",
        messages: &[1, 4, 5],
        capacities: &[2, 2, 3],
    },
];

pub fn scenario(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

/// Anything `compare` can run.
#[derive(Debug, Clone, PartialEq)]
pub enum Contender {
    Primary(&'static Scenario),
    Baseline(BaselineConfig),
}

impl Contender {
    pub fn label(&self) -> String {
        match self {
            Contender::Primary(s) => s.name.to_string(),
            Contender::Baseline(c) => match c.load_cap {
                Some(cap) => format!("{}-cap{cap}", c.algorithm),
                None => c.algorithm.to_string(),
            },
        }
    }
}

/// Resolves comparison entries by name.
///
/// A primary scenario name yields that scenario. A baseline name yields the
/// baseline with `cap` as its load cap, or with both caps 2 and 3 when `cap`
/// is `None` (multi-round Greedy is always uncapped). `"all"` expands to every
/// scenario and baseline. Returns the first unknown name on failure.
pub fn resolve(
    names: &[String],
    n: u64,
    cap: Option<u32>,
    seed: u64,
) -> Result<Vec<Contender>, String> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(SCENARIOS.iter().map(Contender::Primary));
            for b in Baseline::ALL {
                push_baseline(&mut out, b, n, cap, seed);
            }
        } else if let Some(s) = scenario(name) {
            out.push(Contender::Primary(s));
        } else if let Some(b) = Baseline::from_name(name) {
            push_baseline(&mut out, b, n, cap, seed);
        } else {
            return Err(name.clone());
        }
    }
    Ok(out)
}

fn push_baseline(out: &mut Vec<Contender>, b: Baseline, n: u64, cap: Option<u32>, seed: u64) {
    if b == Baseline::GreedyMultiRound {
        let mut cfg = BaselineConfig::preset(b, n, 0, seed);
        cfg.load_cap = cap;
        out.push(Contender::Baseline(cfg));
        return;
    }
    match cap {
        Some(c) => out.push(Contender::Baseline(BaselineConfig::preset(b, n, c, seed))),
        None => {
            for c in [2, 3] {
                out.push(Contender::Baseline(BaselineConfig::preset(b, n, c, seed)));
            }
        }
    }
}
