mod common;

use bbtoolkit::AlgorithmSpec;
use common::props::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn estimates_conserve_mass(spec in spec_strategy(30, 6), pop in population_strategy(10_000_000)) {
        check_mass(&spec, &pop)?;
    }

    #[test]
    fn single_message_ranks_match_unranked(
        caps in prop::collection::vec(1u32..=5, 1..=4),
        balls in 100_000u64..=2_000_000,
    ) {
        let mut caps = caps;
        caps.sort_unstable();
        check_single_message_ranks(&caps, balls)?;
    }

    #[test]
    fn ranked_survivor_shrinks_with_more_messages(
        first in spec_strategy(6, 3),
        extra in 0u32..=2,
    ) {
        let cap = first.max_capacity() + extra;
        check_ranked_survivor_monotone(&first, cap, 12)?;
    }

    #[test]
    fn truncation_is_converged(spec in spec_strategy(20, 5)) {
        check_truncation(&spec)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simulation_respects_caps_and_ledger(
        spec in spec_strategy(8, 4),
        pop in population_strategy(1000),
        seed in any::<u64>(),
    ) {
        check_sim_invariants(&spec, &pop, seed)?;
    }

    #[test]
    fn baselines_respect_caps_and_ledger(cfg in baseline_strategy()) {
        check_baseline_invariants(&cfg)?;
    }

    #[test]
    fn runs_are_reproducible(
        spec in spec_strategy(5, 4),
        pop in population_strategy(500),
        seed in any::<u64>(),
    ) {
        check_determinism(&spec, &pop, seed)?;
    }
}

#[test]
fn first_round_survivor_is_monotone_in_messages() {
    let start = AlgorithmSpec::ranked(&[1], &[1]).unwrap();
    for cap in 1..=4 {
        check_ranked_survivor_monotone(&start, cap, 40).unwrap();
    }
}
