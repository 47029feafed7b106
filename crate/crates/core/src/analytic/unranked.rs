use crate::error::EstimateError;
use crate::model::{LoadDistribution, RoundState};

use super::poisson::{binomial_pmf, poisson_upper_tail, poisson_weight, PoissonTruncation};
use super::{
    single_nonresponse_prob, single_response_prob, CommitProbability, ResponseProbability,
};

/// Round-level `p_s`: a bin of carried load `l` has `capacity - l` free slots.
pub fn round_response_prob(
    loads: &LoadDistribution,
    alpha: f64,
    capacity: u32,
    trunc: &PoissonTruncation,
) -> ResponseProbability {
    let mut hit = 0.0;
    let mut miss = 0.0;
    for (l, &y) in loads.fractions.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        let free = (capacity as u64).saturating_sub(l as u64);
        hit += y * single_response_prob(alpha, free, trunc);
        miss += y * single_nonresponse_prob(alpha, free, trunc);
    }
    ResponseProbability { hit, miss }
}

/// `p = 1 - (1 - p_s)^M`, with the survivor taken as a power of the summed miss probability.
pub fn commit_prob_unranked(response: ResponseProbability, messages: u32) -> CommitProbability {
    let survivor = response.miss.powi(messages as i32);
    let commit = if response.miss <= 0.0 {
        1.0
    } else {
        -(messages as f64 * ln_miss(response)).exp_m1()
    };
    CommitProbability { commit, survivor }
}

fn ln_miss(response: ResponseProbability) -> f64 {
    if response.hit < 0.5 {
        (-response.hit).ln_1p()
    } else {
        response.miss.ln()
    }
}

/// Probability that an answered ball picks this particular bin:
/// `(1 - (1 - p_s)^M) / (p_s M)`, with limit 1 as `p_s -> 0`.
pub fn choose_prob_unranked(response: ResponseProbability, messages: u32) -> f64 {
    if messages == 1 || response.hit <= 0.0 {
        return 1.0;
    }
    let commit = commit_prob_unranked(response, messages).commit;
    (commit / (response.hit * messages as f64)).min(1.0)
}

/// Load distribution after an unranked round.
///
/// A bin carrying load `l` behaves like an empty bin accepting `capacity - l`
/// balls: it answers `min(m, capacity - l)` of its `m ~ Poisson(alpha)`
/// messages and each answered ball commits to it independently with
/// probability `choose`.
pub fn load_update_unranked(
    state: &RoundState,
    messages: u32,
    capacity: u32,
    choose: f64,
    trunc: &PoissonTruncation,
) -> Result<LoadDistribution, EstimateError> {
    check_capacity(state, capacity)?;
    let alpha = messages as f64 * state.remaining_fraction;
    let cap = capacity as usize;
    let mut out = vec![0.0; cap + 1];
    for (l, &y) in state.loads.fractions.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        let free = cap - l;
        for answered in 0..=free {
            let w = if answered < free {
                poisson_weight(alpha, answered as u64)
            } else {
                poisson_upper_tail(alpha, free as u64, trunc)
            };
            if w == 0.0 {
                continue;
            }
            for k in 0..=answered {
                out[l + k] += y * w * binomial_pmf(answered, k, choose);
            }
        }
    }
    Ok(LoadDistribution { fractions: out })
}

pub(super) fn check_capacity(state: &RoundState, capacity: u32) -> Result<(), EstimateError> {
    let max_load = state.loads.max_load();
    if (capacity as usize) < max_load {
        return Err(EstimateError::CapacityRegression {
            round: state.round_index,
            capacity,
            max_load,
        });
    }
    Ok(())
}
