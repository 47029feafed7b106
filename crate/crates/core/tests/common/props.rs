//! Property checks shared by the proptest suite and the acceptance runner.

use bbtoolkit::analytic::advance_round;
use bbtoolkit::baselines::{run_baseline, Baseline, BaselineConfig};
use bbtoolkit::{
    run_estimate, simulate_run, AlgorithmSpec, PoissonTruncation, PopulationSpec, RoundState,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const MASS_TOL: f64 = 1e-9;
pub const RANKED_UNRANKED_TOL: f64 = 1e-12;
pub const TRUNCATION_TOL: f64 = 1e-9;

/// Up to four rounds with non-decreasing capacities.
pub fn spec_strategy(max_messages: u32, max_capacity: u32) -> impl Strategy<Value = AlgorithmSpec> {
    (1usize..=4)
        .prop_flat_map(move |rounds| {
            (
                prop::collection::vec(1..=max_messages, rounds),
                prop::collection::vec(0..=2u32, rounds),
                1..=max_capacity,
                any::<bool>(),
            )
        })
        .prop_map(|(messages, steps, first, ranked)| {
            let mut cap = first;
            let capacities = steps
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    if i > 0 {
                        cap += s;
                    }
                    cap
                })
                .collect();
            AlgorithmSpec::new(messages, capacities, ranked).unwrap()
        })
}

pub fn population_strategy(max_bins: u64) -> impl Strategy<Value = PopulationSpec> {
    (1..=max_bins, 1u64..=4).prop_map(|(bins, ratio)| {
        // balls between bins / 2 and 2 * bins
        let balls = (bins * ratio / 2).max(1);
        PopulationSpec::new(bins, balls).unwrap()
    })
}

pub fn check_mass(spec: &AlgorithmSpec, pop: &PopulationSpec) -> Result<(), TestCaseError> {
    let report = run_estimate(spec, pop, &PoissonTruncation::default())
        .map_err(|e| TestCaseError::fail(format!("{spec:?}: {e}")))?;
    let per_bin = pop.balls_per_bin();
    for rec in &report.per_round {
        let s = &rec.state_after;
        prop_assert!(
            (s.loads.total() - 1.0).abs() <= MASS_TOL,
            "round {}: loads sum to {}",
            rec.state_before.round_index,
            s.loads.total()
        );
        prop_assert!(
            (s.total_balls_per_bin() - per_bin).abs() <= MASS_TOL * per_bin.max(1.0),
            "round {}: {} balls per bin, expected {per_bin}",
            rec.state_before.round_index,
            s.total_balls_per_bin()
        );
        prop_assert!(s.remaining_fraction >= 0.0);
        prop_assert!(s.loads.fractions.iter().all(|&y| y >= -MASS_TOL));
    }
    Ok(())
}

/// With one message per ball and round, ranks carry no information.
pub fn check_single_message_ranks(capacities: &[u32], balls: u64) -> Result<(), TestCaseError> {
    let ones = vec![1; capacities.len()];
    let pop = PopulationSpec::new(1_000_000, balls).unwrap();
    let t = PoissonTruncation::default();
    let ranked =
        run_estimate(&AlgorithmSpec::ranked(&ones, capacities).unwrap(), &pop, &t).unwrap();
    let plain = run_estimate(
        &AlgorithmSpec::unranked(&ones, capacities).unwrap(),
        &pop,
        &t,
    )
    .unwrap();
    for (a, b) in ranked.per_round.iter().zip(&plain.per_round) {
        let (sa, sb) = (&a.state_after, &b.state_after);
        prop_assert!((sa.remaining_fraction - sb.remaining_fraction).abs() <= RANKED_UNRANKED_TOL);
        for (x, y) in sa.loads.fractions.iter().zip(&sb.loads.fractions) {
            prop_assert!((x - y).abs() <= RANKED_UNRANKED_TOL, "{x} vs {y}");
        }
    }
    Ok(())
}

/// An extra ranked message never raises a ball's chance of staying unplaced.
pub fn check_ranked_survivor_monotone(
    first: &AlgorithmSpec,
    capacity: u32,
    max_messages: u32,
) -> Result<(), TestCaseError> {
    let pop = PopulationSpec::square(1_000_000).unwrap();
    let t = PoissonTruncation::default();
    let report = run_estimate(first, &pop, &t).unwrap();
    let state: RoundState = report.final_state().clone();
    let capacity = capacity.max(first.max_capacity());
    let mut previous = f64::INFINITY;
    for m in 1..=max_messages {
        let (_, rec) = advance_round(&state, m, capacity, true, &t).unwrap();
        prop_assert!(
            rec.survivor_probability <= previous * (1.0 + 1e-12),
            "M = {m}: {} after {previous}",
            rec.survivor_probability
        );
        previous = rec.survivor_probability;
    }
    Ok(())
}

pub fn check_sim_invariants(
    spec: &AlgorithmSpec,
    pop: &PopulationSpec,
    seed: u64,
) -> Result<(), TestCaseError> {
    let out = simulate_run(spec, pop, seed);
    out.check_invariants(Some(&spec.capacity_per_round))
        .map_err(|e| TestCaseError::fail(format!("{spec:?} {pop:?} seed {seed}: {e}")))?;
    let mut entering = pop.balls;
    for (r, c) in out.per_round.iter().enumerate() {
        prop_assert_eq!(
            c.requests_sent,
            spec.messages_per_round[r] as u64 * entering
        );
        prop_assert!(c.responses_sent <= c.requests_sent);
        prop_assert!(c.commits <= c.responses_sent.min(entering));
        entering = c.balls_remaining;
    }
    Ok(())
}

pub fn baseline_strategy() -> impl Strategy<Value = BaselineConfig> {
    (
        prop::sample::select(Baseline::ALL.to_vec()),
        1u64..=1000,
        1u32..=5,
        prop::option::of(1u32..=4),
        1usize..=4,
        any::<u64>(),
    )
        .prop_map(|(algorithm, n, d, load_cap, rounds, seed)| BaselineConfig {
            algorithm,
            n,
            d,
            load_cap,
            rounds: if algorithm == Baseline::GreedyOneShot {
                1
            } else {
                rounds
            },
            seed,
        })
}

pub fn check_baseline_invariants(cfg: &BaselineConfig) -> Result<(), TestCaseError> {
    let out = run_baseline(cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let caps = cfg.load_cap.map(|c| vec![c; out.per_round.len()]);
    out.check_invariants(caps.as_deref())
        .map_err(|e| TestCaseError::fail(format!("{cfg:?}: {e}")))?;
    Ok(())
}

pub fn check_determinism(
    spec: &AlgorithmSpec,
    pop: &PopulationSpec,
    seed: u64,
) -> Result<(), TestCaseError> {
    prop_assert_eq!(simulate_run(spec, pop, seed), simulate_run(spec, pop, seed));
    let t = PoissonTruncation::default();
    prop_assert_eq!(run_estimate(spec, pop, &t), run_estimate(spec, pop, &t));
    Ok(())
}

/// Halving the truncation epsilon or doubling the hard cap moves nothing by
/// more than `TRUNCATION_TOL`.
pub fn check_truncation(spec: &AlgorithmSpec) -> Result<(), TestCaseError> {
    let pop = PopulationSpec::square(1_000_000).unwrap();
    let base_t = PoissonTruncation::default();
    let base = run_estimate(spec, &pop, &base_t).unwrap();
    let halved = PoissonTruncation::with_epsilon(base_t.epsilon / 2.0);
    let max_alpha = spec.messages_per_round.iter().copied().max().unwrap() as f64;
    let doubled = PoissonTruncation {
        hard_cap: Some(2 * base_t.cap_for(max_alpha, 1)),
        ..base_t
    };
    for t in [halved, doubled] {
        let other = run_estimate(spec, &pop, &t).unwrap();
        for (a, b) in base.per_round.iter().zip(&other.per_round) {
            let (sa, sb) = (&a.state_after, &b.state_after);
            prop_assert!((sa.remaining_fraction - sb.remaining_fraction).abs() <= TRUNCATION_TOL);
            for (x, y) in sa.loads.fractions.iter().zip(&sb.loads.fractions) {
                prop_assert!((x - y).abs() <= TRUNCATION_TOL);
            }
        }
    }
    Ok(())
}
