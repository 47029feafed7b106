//! Monte Carlo simulation of the algorithm family with exact message accounting.
//!
//! Generator identity: every trial uses `Xoshiro256PlusPlus` seeded with
//! `seed_from_u64`, and the seed of trial `i` is [`trial_seed`]`(master, i)`.

mod rng;
mod round;
mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{AlgorithmSpec, PopulationSpec, RoundCounts, SimOutcome};

pub use rng::{trial_seed, SimRng};
pub use stats::{RoundStats, SimStats, Summary};

pub(crate) use round::{choose_subset, Buckets};

/// A batch of independent trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub spec: AlgorithmSpec,
    pub pop: PopulationSpec,
    pub seed: u64,
    pub trials: usize,
}

/// Runs one trial of the configured algorithm.
///
/// Destinations are drawn uniformly with replacement. A bin of load `l`
/// answers up to `L_i - l` of its messages: a uniform subset when unranked,
/// otherwise lowest ranks first with uniform tie-breaking inside a rank. A
/// ball with at least one answer commits to a uniformly chosen answering
/// message's bin (unranked) or to the bin of its smallest answered rank.
pub fn simulate_run(spec: &AlgorithmSpec, pop: &PopulationSpec, seed: u64) -> SimOutcome {
    let mut rng = SimRng::new(seed);
    let n = pop.bins as usize;
    let mut loads = vec![0u32; n];
    let mut pending: Vec<u32> = (0..pop.balls as u32).collect();
    let mut per_round = Vec::with_capacity(spec.rounds);
    let mut scratch = round::Scratch::default();

    for r in 1..=spec.rounds {
        let (messages, capacity) = spec.round(r);
        let counts = round::play_round(
            &mut rng,
            &mut loads,
            &mut pending,
            messages,
            capacity,
            spec.ranked,
            &mut scratch,
        );
        per_round.push(RoundCounts {
            balls_remaining: pending.len() as u64,
            load_histogram: histogram(&loads, capacity as usize),
            requests_sent: counts.requests,
            responses_sent: counts.responses,
            commits: counts.commits,
            withdrawals_sent: 0,
        });
    }
    let commits_total = per_round.iter().map(|c| c.commits).sum();
    let messages_total = per_round
        .iter()
        .map(|c| c.requests_sent + c.responses_sent + c.commits)
        .sum();
    SimOutcome {
        bins: pop.bins,
        balls: pop.balls,
        per_round,
        commits_total,
        messages_total,
    }
}

/// Bins per load value, with at least `min_len + 1` entries.
pub(crate) fn histogram(loads: &[u32], min_len: usize) -> Vec<u64> {
    let max = loads.iter().copied().max().unwrap_or(0) as usize;
    let mut h = vec![0u64; max.max(min_len) + 1];
    for &l in loads {
        h[l as usize] += 1;
    }
    h
}

/// Runs all trials (in parallel when threads are available) and aggregates
/// them in trial order, so the result depends only on `cfg`.
pub fn simulate_many(cfg: &TrialConfig) -> SimStats {
    let outcomes = run_trials(cfg);
    SimStats::from_outcomes(&outcomes)
}

/// The individual outcomes behind [`simulate_many`], in trial order.
pub fn run_trials(cfg: &TrialConfig) -> Vec<SimOutcome> {
    assert!(cfg.trials >= 1, "at least one trial");
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| simulate_run(&cfg.spec, &cfg.pop, trial_seed(cfg.seed, i)))
        .collect()
}
