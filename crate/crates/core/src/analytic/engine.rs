use crate::error::EstimateError;
use crate::model::{
    initial_state, AlgorithmSpec, EstimateReport, PopulationSpec, RoundRecord, RoundState,
};

use super::poisson::PoissonTruncation;
use super::ranked::{commit_prob_ranked, load_update_ranked, rank_response_probs};
use super::unranked::{
    choose_prob_unranked, commit_prob_unranked, load_update_unranked, round_response_prob,
};

const NORMALIZATION_TOL: f64 = 1e-9;
const CONSERVATION_TOL: f64 = 1e-9;

/// Advances the expected state through one round with `messages` (`M_r`) per
/// ball and accepted load `capacity` (`L_r`).
///
/// The committed mass implied by the new load distribution is checked against
/// `remaining * commit_probability`; the two are computed along different
/// paths and must agree.
pub fn advance_round(
    state: &RoundState,
    messages: u32,
    capacity: u32,
    ranked: bool,
    trunc: &PoissonTruncation,
) -> Result<(RoundState, RoundRecord), EstimateError> {
    let remaining = state.remaining_fraction;
    let alpha = messages as f64 * remaining;

    let (commit, response_probability, rank_probabilities, loads) = if ranked {
        let probs = rank_response_probs(state, messages, capacity, trunc);
        let commit = commit_prob_ranked(&probs);
        let loads = load_update_ranked(state, messages, capacity, &probs, trunc)?;
        (
            commit,
            None,
            Some(probs.iter().map(|p| p.hit).collect()),
            loads,
        )
    } else {
        let response = round_response_prob(&state.loads, alpha, capacity, trunc);
        let commit = commit_prob_unranked(response, messages);
        let choose = choose_prob_unranked(response, messages);
        let loads = load_update_unranked(state, messages, capacity, choose, trunc)?;
        (commit, Some(response.hit), None, loads)
    };

    if !loads.is_normalized(NORMALIZATION_TOL) {
        return Err(EstimateError::Invariant {
            round: state.round_index,
            detail: format!("load distribution sums to {}", loads.total()),
        });
    }
    let placed = loads.mean_load() - state.loads.mean_load();
    let expected = remaining * commit.commit;
    if (placed - expected).abs() > CONSERVATION_TOL {
        return Err(EstimateError::Invariant {
            round: state.round_index,
            detail: format!("placed {placed} balls per bin, commit probability implies {expected}"),
        });
    }

    let next = RoundState {
        remaining_fraction: remaining * commit.survivor,
        loads,
        requests_so_far: state.requests_so_far + alpha,
        round_index: state.round_index + 1,
    };
    let record = RoundRecord {
        state_before: state.clone(),
        alpha,
        response_probability,
        commit_probability: commit.commit,
        survivor_probability: commit.survivor,
        rank_probabilities,
        state_after: next.clone(),
        end_game: false,
    };
    Ok((next, record))
}

/// Runs every configured round from the initial state and assembles the report.
pub fn run_estimate(
    spec: &AlgorithmSpec,
    pop: &PopulationSpec,
    trunc: &PoissonTruncation,
) -> Result<EstimateReport, EstimateError> {
    spec.validate()?;
    let mut state = initial_state(pop)?;
    let balls_per_bin = pop.balls_per_bin();
    let n = pop.bins as f64;
    let end_game_below = n.ln().powi(3);

    let mut per_round = Vec::with_capacity(spec.rounds);
    for round in 1..=spec.rounds {
        let (messages, capacity) = spec.round(round);
        let (next, mut record) = advance_round(&state, messages, capacity, spec.ranked, trunc)?;
        record.end_game = n * state.remaining_fraction < end_game_below;
        if !next.conserves_mass(balls_per_bin, CONSERVATION_TOL * balls_per_bin.max(1.0)) {
            return Err(EstimateError::Invariant {
                round,
                detail: format!(
                    "mass {} per bin, expected {balls_per_bin}",
                    next.total_balls_per_bin()
                ),
            });
        }
        per_round.push(record);
        state = next;
    }

    let final_remaining_expected = n * state.remaining_fraction;
    let failure_probability_bound =
        (final_remaining_expected < 1.0).then_some(final_remaining_expected);
    let total_requests = n * state.requests_so_far;
    let placed = pop.balls as f64 - final_remaining_expected;
    let end_game_warning = per_round.iter().any(|r| r.end_game);
    Ok(EstimateReport {
        spec: spec.clone(),
        population: *pop,
        per_round,
        final_remaining_expected,
        failure_probability_bound,
        total_messages_upper_bound: placed + 2.0 * total_requests,
        total_requests,
        end_game_warning,
    })
}
