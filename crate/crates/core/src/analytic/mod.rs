//! Iterative expected-value estimates for the algorithm family.
//!
//! Message arrivals at a bin are Poissonized with rate `alpha = M_r * E[n_r] / n`.
//! Every probability that ends up multiplied into a survivor fraction is
//! carried together with its directly summed complement.

mod engine;
pub mod poisson;
mod ranked;
mod unranked;

use serde::{Deserialize, Serialize};

pub use engine::{advance_round, run_estimate};
pub use poisson::{poisson_weight, PoissonTruncation};
pub use ranked::{commit_prob_ranked, load_update_ranked, rank_response_prob, rank_response_probs};
pub use unranked::{
    choose_prob_unranked, commit_prob_unranked, load_update_unranked, round_response_prob,
};

use poisson::{poisson_lower_sum, poisson_series_from};

/// A probability and its complement, each summed from positive terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseProbability {
    pub hit: f64,
    pub miss: f64,
}

impl ResponseProbability {
    /// Builds the pair from `hit` alone; only for inputs that are not tiny complements.
    pub fn from_hit(hit: f64) -> Self {
        ResponseProbability {
            hit,
            miss: 1.0 - hit,
        }
    }
}

/// Outcome of one round for a single ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommitProbability {
    pub commit: f64,
    /// Probability of staying unplaced, formed as a product of complements.
    pub survivor: f64,
}

/// Probability that one message to a bin with `capacity` free slots is
/// answered when the other arrivals are Poisson(`alpha`):
/// `sum_m P(m) * min(1, capacity / (m + 1))`.
pub fn single_response_prob(alpha: f64, capacity: u64, trunc: &PoissonTruncation) -> f64 {
    if capacity == 0 {
        return 0.0;
    }
    let c = capacity as f64;
    poisson_lower_sum(alpha, capacity)
        + poisson_series_from(alpha, capacity, trunc, |m| c / (m + 1) as f64)
}

/// Complement of [`single_response_prob`], summed directly:
/// `sum_{m >= capacity} P(m) * (m + 1 - capacity) / (m + 1)`.
pub fn single_nonresponse_prob(alpha: f64, capacity: u64, trunc: &PoissonTruncation) -> f64 {
    if capacity == 0 {
        return 1.0;
    }
    poisson_series_from(alpha, capacity, trunc, |m| {
        (m + 1 - capacity) as f64 / (m + 1) as f64
    })
}
