use serde::{Deserialize, Serialize};

use crate::model::SimOutcome;

/// Mean, extremes and sample standard deviation of one metric across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 for a single trial.
    pub std_dev: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        assert!(!values.is_empty(), "summary of no values");
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let std_dev = if count > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        // rounding in the mean can leave it a hair outside [min, max]
        Summary {
            mean: mean.clamp(min, max),
            min,
            max,
            std_dev,
            count,
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.count as f64).sqrt()
    }

    /// `std_dev / mean`, or 0 when the mean is 0.
    pub fn relative_std_dev(&self) -> f64 {
        if self.mean == 0.0 {
            0.0
        } else {
            self.std_dev / self.mean
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    /// Unplaced balls divided by the number of bins.
    pub remaining_fraction: Summary,
    /// Fraction of bins at each load value.
    pub load_fractions: Vec<Summary>,
    pub requests: Summary,
    pub responses: Summary,
    pub commits: Summary,
}

/// Aggregate of many [`SimOutcome`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub trials: usize,
    pub bins: u64,
    pub balls: u64,
    pub per_round: Vec<RoundStats>,
    pub messages_total: Summary,
    pub commits_total: Summary,
}

impl SimStats {
    pub fn from_outcomes(outcomes: &[SimOutcome]) -> SimStats {
        let first = &outcomes[0];
        let n = first.bins as f64;
        let rounds = first.per_round.len();
        let per_round = (0..rounds)
            .map(|r| {
                let metric = |f: &dyn Fn(&SimOutcome) -> f64| {
                    Summary::of(&outcomes.iter().map(f).collect::<Vec<_>>())
                };
                let width = outcomes
                    .iter()
                    .map(|o| o.per_round[r].load_histogram.len())
                    .max()
                    .unwrap_or(0);
                let load_fractions = (0..width)
                    .map(|l| {
                        metric(&|o| {
                            o.per_round[r].load_histogram.get(l).copied().unwrap_or(0) as f64 / n
                        })
                    })
                    .collect();
                RoundStats {
                    remaining_fraction: metric(&|o| o.per_round[r].balls_remaining as f64 / n),
                    load_fractions,
                    requests: metric(&|o| o.per_round[r].requests_sent as f64),
                    responses: metric(&|o| o.per_round[r].responses_sent as f64),
                    commits: metric(&|o| o.per_round[r].commits as f64),
                }
            })
            .collect();
        let messages: Vec<f64> = outcomes.iter().map(|o| o.messages_total as f64).collect();
        let commits: Vec<f64> = outcomes.iter().map(|o| o.commits_total as f64).collect();
        SimStats {
            trials: outcomes.len(),
            bins: first.bins,
            balls: first.balls,
            per_round,
            messages_total: Summary::of(&messages),
            commits_total: Summary::of(&commits),
        }
    }

    pub fn final_round(&self) -> &RoundStats {
        self.per_round.last().expect("at least one round")
    }
}
