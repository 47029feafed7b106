use bbtoolkit::{run_estimate, AlgorithmSpec, PoissonTruncation, PopulationSpec};

fn first_round(m: u32, l: u32, ranked: bool, n: u64) -> bbtoolkit::RoundState {
    let spec = AlgorithmSpec::new(vec![m], vec![l], ranked).unwrap();
    let pop = PopulationSpec::square(n).unwrap();
    run_estimate(&spec, &pop, &PoissonTruncation::default())
        .unwrap()
        .final_state()
        .clone()
}

fn binomial(k: u32, j: u32, p: f64) -> f64 {
    let choose = (0..j).fold(1.0, |c, i| c * (k - i) as f64 / (i + 1) as f64);
    choose * p.powi(j as i32) * (1.0 - p).powi((k - j) as i32)
}

// With unboundedly many messages every bin fills to L unless fewer than L
// balls pick it first, so the load of a bin tends to Binomial(L, (1 - e^-L) / L)
// and the remainder to e^-L.
#[test]
fn many_messages_approach_the_closed_form_limit() {
    for l in [2u32, 3] {
        let s = first_round(5000, l, false, 1_000_000);
        let expected = (-(l as f64)).exp();
        assert!(
            (s.remaining_fraction - expected).abs() < 1e-4,
            "L = {l}: {}",
            s.remaining_fraction
        );
        let p = (1.0 - expected) / l as f64;
        for j in 0..=l {
            let y = s.loads.fractions[j as usize];
            assert!(
                (y - binomial(l, j, p)).abs() < 5e-4,
                "L = {l}, load {j}: {y}"
            );
        }
    }
}

#[test]
fn the_limit_is_approached_from_below() {
    let mut previous = 0.0;
    for m in [20, 200, 1000, 5000] {
        let r = first_round(m, 2, false, 1_000_000).remaining_fraction;
        assert!(r > previous && r < (-2f64).exp(), "M = {m}: {r}");
        previous = r;
    }
}

#[test]
fn first_round_estimates_do_not_depend_on_n() {
    for (m, l, ranked) in [(1, 2, false), (3, 2, true), (10, 3, false), (20, 3, true)] {
        let small = first_round(m, l, ranked, 10_000);
        let large = first_round(m, l, ranked, 1_000_000);
        assert!((small.remaining_fraction - large.remaining_fraction).abs() < 1e-15);
        for (a, b) in small.loads.fractions.iter().zip(&large.loads.fractions) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn ranked_messages_help_from_two_on() {
    for l in [2, 3] {
        for m in [2, 3, 4, 5, 10, 20] {
            let ranked = first_round(m, l, true, 1_000_000).remaining_fraction;
            let plain = first_round(m, l, false, 1_000_000).remaining_fraction;
            assert!(ranked < plain, "M = {m}, L = {l}: {ranked} vs {plain}");
        }
    }
}

#[test]
fn more_balls_than_bins_leave_more_behind() {
    let spec = AlgorithmSpec::ranked(&[2, 3], &[2, 3]).unwrap();
    let t = PoissonTruncation::default();
    let even = run_estimate(&spec, &PopulationSpec::square(100_000).unwrap(), &t).unwrap();
    let heavy = run_estimate(&spec, &PopulationSpec::new(100_000, 150_000).unwrap(), &t).unwrap();
    assert!(heavy.final_remaining_fraction() > even.final_remaining_fraction());
    let mean = heavy.final_state().total_balls_per_bin();
    assert!((mean - 1.5).abs() < 1e-9);
}
