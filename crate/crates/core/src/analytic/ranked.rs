use crate::error::EstimateError;
use crate::model::{LoadDistribution, RoundState};

use super::poisson::{binomial_pmf, poisson_upper_tail, poisson_weight, PoissonTruncation};
use super::unranked::check_capacity;
use super::{
    single_nonresponse_prob, single_response_prob, CommitProbability, ResponseProbability,
};

/// Response probability `p_i` of a rank-`rank` message.
///
/// Each ball sends one message of every rank, so a bin sees
/// `Poisson((rank - 1) * alpha_1)` messages of smaller rank and
/// `Poisson(alpha_1)` other messages of the same rank, with
/// `alpha_1 = E[n_r] / n`. Larger ranks never displace it.
pub fn rank_response_prob(
    rank: u32,
    state: &RoundState,
    capacity: u32,
    trunc: &PoissonTruncation,
) -> ResponseProbability {
    assert!(rank >= 1, "ranks start at 1");
    let alpha = state.remaining_fraction;
    let lower_rate = (rank - 1) as f64 * alpha;
    let mut hit = 0.0;
    let mut miss = 0.0;
    for (l, &y) in state.loads.fractions.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        let free = (capacity as u64).saturating_sub(l as u64);
        let mut h = 0.0;
        // all free slots taken by smaller ranks
        let mut g = poisson_upper_tail(lower_rate, free, trunc);
        for before in 0..free {
            let w = poisson_weight(lower_rate, before);
            if w == 0.0 {
                continue;
            }
            h += w * single_response_prob(alpha, free - before, trunc);
            g += w * single_nonresponse_prob(alpha, free - before, trunc);
        }
        hit += y * h;
        miss += y * g;
    }
    ResponseProbability { hit, miss }
}

/// `p_1, ..., p_M` for a round with `messages` ranks.
pub fn rank_response_probs(
    state: &RoundState,
    messages: u32,
    capacity: u32,
    trunc: &PoissonTruncation,
) -> Vec<ResponseProbability> {
    (1..=messages)
        .map(|i| rank_response_prob(i, state, capacity, trunc))
        .collect()
}

/// `p_ranked = 1 - prod_i (1 - p_i)`; the survivor is the product of the
/// directly summed misses.
pub fn commit_prob_ranked(rank_probs: &[ResponseProbability]) -> CommitProbability {
    let survivor: f64 = rank_probs.iter().map(|p| p.miss).product();
    CommitProbability {
        commit: 1.0 - survivor,
        survivor,
    }
}

/// `p_c(i) = prod_{j < i} (1 - p_j)`: an answered rank-`i` message becomes a
/// commit only if every smaller rank went unanswered.
pub(crate) fn rank_choose_probs(rank_probs: &[ResponseProbability]) -> Vec<f64> {
    let mut acc = 1.0;
    rank_probs
        .iter()
        .map(|p| {
            let c = acc;
            acc *= p.miss;
            c
        })
        .collect()
}

/// Load distribution after a ranked round.
///
/// For a bin with `free` slots the ranks are processed in order while
/// tracking the residual capacity and the commits so far. Rank `i` brings
/// `m_i ~ Poisson(alpha_1)` messages; the bin answers `min(m_i, residual)` of
/// them and each answer commits with probability `p_c(i)`. Arrivals at or
/// above the residual are one aggregated bucket weighted by the Poisson upper
/// tail, after which the residual is zero and later ranks change nothing.
pub fn load_update_ranked(
    state: &RoundState,
    messages: u32,
    capacity: u32,
    rank_probs: &[ResponseProbability],
    trunc: &PoissonTruncation,
) -> Result<LoadDistribution, EstimateError> {
    check_capacity(state, capacity)?;
    if rank_probs.len() != messages as usize {
        return Err(EstimateError::RankCount {
            expected: messages as usize,
            actual: rank_probs.len(),
        });
    }
    let alpha = state.remaining_fraction;
    let cap = capacity as usize;
    let choose = rank_choose_probs(rank_probs);

    // P(Poisson(alpha) = m) for m < cap, and the upper tail from each residual
    let weights: Vec<f64> = (0..cap).map(|m| poisson_weight(alpha, m as u64)).collect();
    let tails: Vec<f64> = (0..=cap)
        .map(|r| poisson_upper_tail(alpha, r as u64, trunc))
        .collect();

    let mut out = vec![0.0; cap + 1];
    for (l, &y) in state.loads.fractions.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        let free = cap - l;
        // dist[residual][committed]
        let mut dist = vec![vec![0.0; free + 1]; free + 1];
        dist[free][0] = 1.0;
        for &pc in &choose {
            if dist[1..].iter().all(|row| row.iter().all(|&w| w == 0.0)) {
                break;
            }
            let mut next = vec![vec![0.0; free + 1]; free + 1];
            next[0].copy_from_slice(&dist[0]);
            for residual in 1..=free {
                for committed in 0..=(free - residual) {
                    let w = dist[residual][committed];
                    if w == 0.0 {
                        continue;
                    }
                    for arrived in 0..=residual {
                        let pm = if arrived < residual {
                            weights[arrived]
                        } else {
                            tails[residual]
                        };
                        if pm == 0.0 {
                            continue;
                        }
                        for k in 0..=arrived {
                            next[residual - arrived][committed + k] +=
                                w * pm * binomial_pmf(arrived, k, pc);
                        }
                    }
                }
            }
            dist = next;
        }
        for row in &dist {
            for (committed, &w) in row.iter().enumerate() {
                out[l + committed] += y * w;
            }
        }
    }
    Ok(LoadDistribution { fractions: out })
}
