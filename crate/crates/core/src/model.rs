//! Domain types shared by the estimator, the simulator and the baselines.
//!
//! Loads and ball counts are carried per bin (divided by `n`), so everything
//! except report generation is independent of the number of bins.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// One algorithm of the family: messages per round, accepted load per round,
/// and whether a ball's messages carry ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAlgorithmSpec")]
pub struct AlgorithmSpec {
    pub rounds: usize,
    /// `M_i`: messages each uncommitted ball sends in round `i`.
    pub messages_per_round: Vec<u32>,
    /// `L_i`: total load a bin accepts up to and including round `i`.
    pub capacity_per_round: Vec<u32>,
    pub ranked: bool,
}

#[derive(Deserialize)]
struct RawAlgorithmSpec {
    rounds: usize,
    messages_per_round: Vec<u32>,
    capacity_per_round: Vec<u32>,
    ranked: bool,
}

impl TryFrom<RawAlgorithmSpec> for AlgorithmSpec {
    type Error = ModelError;

    fn try_from(raw: RawAlgorithmSpec) -> Result<Self, Self::Error> {
        validate_spec(AlgorithmSpec {
            rounds: raw.rounds,
            messages_per_round: raw.messages_per_round,
            capacity_per_round: raw.capacity_per_round,
            ranked: raw.ranked,
        })
    }
}

impl AlgorithmSpec {
    /// Builds and validates a spec; the number of rounds is the length of the
    /// message sequence.
    pub fn new(messages: Vec<u32>, capacities: Vec<u32>, ranked: bool) -> Result<Self, ModelError> {
        validate_spec(AlgorithmSpec {
            rounds: messages.len(),
            messages_per_round: messages,
            capacity_per_round: capacities,
            ranked,
        })
    }

    pub fn unranked(messages: &[u32], capacities: &[u32]) -> Result<Self, ModelError> {
        Self::new(messages.to_vec(), capacities.to_vec(), false)
    }

    pub fn ranked(messages: &[u32], capacities: &[u32]) -> Result<Self, ModelError> {
        Self::new(messages.to_vec(), capacities.to_vec(), true)
    }

    /// `(M_i, L_i)` for round `i` (1-based).
    pub fn round(&self, round: usize) -> (u32, u32) {
        (
            self.messages_per_round[round - 1],
            self.capacity_per_round[round - 1],
        )
    }

    pub fn max_capacity(&self) -> u32 {
        self.capacity_per_round.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.rounds == 0 {
            return Err(ModelError::ZeroParameter {
                what: "rounds".into(),
            });
        }
        if self.messages_per_round.len() != self.rounds {
            return Err(ModelError::LengthMismatch {
                what: "messages_per_round",
                expected: self.rounds,
                actual: self.messages_per_round.len(),
            });
        }
        if self.capacity_per_round.len() != self.rounds {
            return Err(ModelError::LengthMismatch {
                what: "capacity_per_round",
                expected: self.rounds,
                actual: self.capacity_per_round.len(),
            });
        }
        for (i, (&m, &l)) in self
            .messages_per_round
            .iter()
            .zip(&self.capacity_per_round)
            .enumerate()
        {
            if m == 0 {
                return Err(ModelError::ZeroParameter {
                    what: format!("M_{}", i + 1),
                });
            }
            if l == 0 {
                return Err(ModelError::ZeroParameter {
                    what: format!("L_{}", i + 1),
                });
            }
        }
        for (i, w) in self.capacity_per_round.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(ModelError::NonMonotoneCapacity {
                    round: i + 1,
                    previous: w[0],
                    next: w[1],
                });
            }
        }
        Ok(())
    }
}

/// Returns the spec unchanged iff every structural constraint holds.
pub fn validate_spec(spec: AlgorithmSpec) -> Result<AlgorithmSpec, ModelError> {
    spec.validate()?;
    Ok(spec)
}

/// Number of bins `n` and balls `n_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub bins: u64,
    pub balls: u64,
}

impl PopulationSpec {
    pub fn new(bins: u64, balls: u64) -> Result<Self, ModelError> {
        let pop = PopulationSpec { bins, balls };
        pop.validate()?;
        Ok(pop)
    }

    /// `n` balls into `n` bins.
    pub fn square(n: u64) -> Result<Self, ModelError> {
        Self::new(n, n)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.bins == 0 {
            return Err(ModelError::ZeroParameter {
                what: "bins".into(),
            });
        }
        if self.balls == 0 {
            return Err(ModelError::ZeroParameter {
                what: "balls".into(),
            });
        }
        Ok(())
    }

    pub fn balls_per_bin(&self) -> f64 {
        self.balls as f64 / self.bins as f64
    }
}

/// Expected fraction of bins holding each load value, indexed by load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadDistribution {
    pub fractions: Vec<f64>,
}

impl LoadDistribution {
    /// Every bin empty.
    pub fn empty_bins() -> Self {
        LoadDistribution {
            fractions: vec![1.0],
        }
    }

    /// Largest load index that carries mass.
    pub fn max_load(&self) -> usize {
        self.fractions.iter().rposition(|&f| f > 0.0).unwrap_or(0)
    }

    pub fn total(&self) -> f64 {
        self.fractions.iter().sum()
    }

    /// Expected load per bin, `sum_l l * Y_l / n`.
    pub fn mean_load(&self) -> f64 {
        self.fractions
            .iter()
            .enumerate()
            .map(|(l, &f)| l as f64 * f)
            .sum()
    }

    /// Extends the vector with zeros so that it has `capacity + 1` entries.
    pub fn padded_to(&self, capacity: usize) -> Self {
        let mut fractions = self.fractions.clone();
        if fractions.len() < capacity + 1 {
            fractions.resize(capacity + 1, 0.0);
        }
        LoadDistribution { fractions }
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.fractions.iter().all(|&f| (0.0..=1.0).contains(&f))
            && (self.total() - 1.0).abs() <= tol
    }
}

/// Expected state entering a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundState {
    /// `E[n_r] / n`; exceeds 1 when there are more balls than bins.
    pub remaining_fraction: f64,
    pub loads: LoadDistribution,
    /// `E[R] / n`, requests sent so far.
    pub requests_so_far: f64,
    pub round_index: usize,
}

impl RoundState {
    /// Unplaced balls plus placed balls, per bin.
    pub fn total_balls_per_bin(&self) -> f64 {
        self.remaining_fraction + self.loads.mean_load()
    }

    pub fn conserves_mass(&self, balls_per_bin: f64, tol: f64) -> bool {
        (self.total_balls_per_bin() - balls_per_bin).abs() <= tol
    }
}

/// State before round 1: all balls unplaced, all bins empty.
pub fn initial_state(pop: &PopulationSpec) -> Result<RoundState, ModelError> {
    pop.validate()?;
    Ok(RoundState {
        remaining_fraction: pop.balls_per_bin(),
        loads: LoadDistribution::empty_bins(),
        requests_so_far: 0.0,
        round_index: 1,
    })
}

/// Analytic outputs for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub state_before: RoundState,
    /// `alpha = M_r * E[n_r] / n`, expected messages per bin.
    pub alpha: f64,
    /// Probability that a single unranked message is answered (`p_s`); `None` for ranked rounds.
    pub response_probability: Option<f64>,
    /// Probability that a ball commits this round (`p` or `p_ranked`).
    pub commit_probability: f64,
    /// Probability that a ball stays unplaced this round, computed without
    /// forming `1 - commit_probability`.
    pub survivor_probability: f64,
    /// Per-rank response probabilities `p_i` (ranked rounds only).
    pub rank_probabilities: Option<Vec<f64>>,
    pub state_after: RoundState,
    /// Fewer than `ln(n)^3` balls entered this round, so the expectation-based
    /// estimate carries a larger relative error.
    pub end_game: bool,
}

/// Complete analytic estimate for an algorithm and population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub spec: AlgorithmSpec,
    pub population: PopulationSpec,
    pub per_round: Vec<RoundRecord>,
    /// `n * E[n_{r+1}] / n`, expected unplaced balls after the last round.
    pub final_remaining_expected: f64,
    /// Markov bound on the probability that some ball stays unplaced; `None`
    /// when at least one ball is expected to remain ("not terminated").
    pub failure_probability_bound: Option<f64>,
    /// Placed balls (one commit message each) plus a request and a response
    /// per request: at most `n + 2R`.
    pub total_messages_upper_bound: f64,
    /// Expected requests in absolute terms, `R`.
    pub total_requests: f64,
    pub end_game_warning: bool,
}

impl EstimateReport {
    pub fn final_state(&self) -> &RoundState {
        &self
            .per_round
            .last()
            .expect("at least one round")
            .state_after
    }

    pub fn final_remaining_fraction(&self) -> f64 {
        self.final_state().remaining_fraction
    }

    /// Remaining fraction after `round` (1-based).
    pub fn remaining_after(&self, round: usize) -> f64 {
        self.per_round[round - 1].state_after.remaining_fraction
    }

    /// `R / n`.
    pub fn requests_per_bin(&self) -> f64 {
        self.final_state().requests_so_far
    }
}

/// Measured counts of one simulated round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounts {
    pub balls_remaining: u64,
    /// Bins per load value at the end of the round; sums to `n`.
    pub load_histogram: Vec<u64>,
    pub requests_sent: u64,
    pub responses_sent: u64,
    pub commits: u64,
    /// Protocol-specific extra messages (Stemann's "will not commit" notices).
    pub withdrawals_sent: u64,
}

/// Measured counterpart of an [`EstimateReport`] for a single trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub bins: u64,
    pub balls: u64,
    pub per_round: Vec<RoundCounts>,
    pub commits_total: u64,
    /// Requests, responses, commits and any withdrawals.
    pub messages_total: u64,
}

impl SimOutcome {
    pub fn final_remaining(&self) -> u64 {
        self.per_round
            .last()
            .map_or(self.balls, |r| r.balls_remaining)
    }

    pub fn remaining_fraction_after(&self, round: usize) -> f64 {
        self.per_round[round - 1].balls_remaining as f64 / self.balls as f64
    }

    pub fn requests_total(&self) -> u64 {
        self.per_round.iter().map(|r| r.requests_sent).sum()
    }

    pub fn responses_total(&self) -> u64 {
        self.per_round.iter().map(|r| r.responses_sent).sum()
    }

    pub fn final_histogram(&self) -> &[u64] {
        self.per_round
            .last()
            .map_or(&[][..], |r| r.load_histogram.as_slice())
    }

    /// Checks histogram normalization, ball conservation and, when
    /// `capacities` is given, that no bin exceeds the round's capacity.
    pub fn check_invariants(&self, capacities: Option<&[u32]>) -> Result<(), String> {
        for (i, r) in self.per_round.iter().enumerate() {
            let bins: u64 = r.load_histogram.iter().sum();
            if bins != self.bins {
                return Err(format!("round {}: histogram covers {bins} bins", i + 1));
            }
            let placed: u64 = r
                .load_histogram
                .iter()
                .enumerate()
                .map(|(l, &c)| l as u64 * c)
                .sum();
            if placed + r.balls_remaining != self.balls {
                return Err(format!(
                    "round {}: {placed} placed + {} remaining != {} balls",
                    i + 1,
                    r.balls_remaining,
                    self.balls
                ));
            }
            if let Some(caps) = capacities {
                let cap = caps[i] as usize;
                if let Some(l) = r.load_histogram.iter().rposition(|&c| c > 0) {
                    if l > cap {
                        return Err(format!("round {}: a bin holds {l} > {cap}", i + 1));
                    }
                }
            }
        }
        let commits: u64 = self.per_round.iter().map(|r| r.commits).sum();
        if commits != self.commits_total || commits + self.final_remaining() != self.balls {
            return Err(format!(
                "commit ledger mismatch: {commits} vs {}",
                self.commits_total
            ));
        }
        let messages: u64 = self
            .per_round
            .iter()
            .map(|r| r.requests_sent + r.responses_sent + r.commits + r.withdrawals_sent)
            .sum();
        if messages != self.messages_total {
            return Err(format!(
                "message ledger mismatch: {messages} vs {}",
                self.messages_total
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_scenario_configurations() {
        assert!(AlgorithmSpec::ranked(&[2, 5, 5], &[2, 2, 2]).is_ok());
        assert!(AlgorithmSpec::unranked(&[1], &[1]).is_ok());
        assert!(AlgorithmSpec::unranked(&[2, 2], &[1, 2]).is_ok());
    }

    #[test]
    fn rejects_decreasing_capacity() {
        let err = AlgorithmSpec::unranked(&[1, 1], &[3, 2]).unwrap_err();
        assert_eq!(
            err,
            ModelError::NonMonotoneCapacity {
                round: 1,
                previous: 3,
                next: 2
            }
        );
    }

    #[test]
    fn rejects_zero_parameters() {
        assert!(matches!(
            AlgorithmSpec::unranked(&[0], &[1]),
            Err(ModelError::ZeroParameter { .. })
        ));
        assert!(matches!(
            AlgorithmSpec::unranked(&[1], &[0]),
            Err(ModelError::ZeroParameter { .. })
        ));
        assert!(matches!(
            AlgorithmSpec::unranked(&[], &[]),
            Err(ModelError::ZeroParameter { .. })
        ));
        assert!(matches!(
            AlgorithmSpec::unranked(&[1, 2], &[2]),
            Err(ModelError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn validate_spec_returns_input_unchanged() {
        let spec = AlgorithmSpec {
            rounds: 3,
            messages_per_round: vec![2, 5, 5],
            capacity_per_round: vec![2, 2, 2],
            ranked: true,
        };
        assert_eq!(validate_spec(spec.clone()).unwrap(), spec);
    }

    #[test]
    fn deserialization_validates() {
        let bad =
            r#"{"rounds":2,"messages_per_round":[1,1],"capacity_per_round":[3,2],"ranked":false}"#;
        assert!(serde_json::from_str::<AlgorithmSpec>(bad).is_err());
        let good =
            r#"{"rounds":1,"messages_per_round":[1],"capacity_per_round":[2],"ranked":true}"#;
        assert_eq!(
            serde_json::from_str::<AlgorithmSpec>(good).unwrap(),
            AlgorithmSpec::ranked(&[1], &[2]).unwrap()
        );
    }

    #[test]
    fn initial_state_is_point_mass() {
        let s = initial_state(&PopulationSpec::square(1_000_000).unwrap()).unwrap();
        assert_eq!(s.remaining_fraction, 1.0);
        assert_eq!(s.loads.fractions, vec![1.0]);
        assert_eq!(s.requests_so_far, 0.0);
        assert_eq!(s.round_index, 1);

        let s = initial_state(&PopulationSpec::new(1_000_000, 2_000_000).unwrap()).unwrap();
        assert_eq!(s.remaining_fraction, 2.0);
        assert!(s.conserves_mass(2.0, 1e-12));
    }

    #[test]
    fn initial_state_rejects_zero_balls() {
        let pop = PopulationSpec { bins: 10, balls: 0 };
        assert!(matches!(
            initial_state(&pop),
            Err(ModelError::ZeroParameter { .. })
        ));
    }

    #[test]
    fn padding_preserves_mass() {
        let d = LoadDistribution {
            fractions: vec![0.5, 0.5],
        };
        let p = d.padded_to(3);
        assert_eq!(p.fractions, vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(p.max_load(), 1);
        assert_eq!(p.mean_load(), 0.5);
    }
}
