//! Expected-value estimates, Monte Carlo simulation and baseline protocols for
//! round-based distributed balls-into-bins algorithms.
//!
//! An algorithm is a sequence of per-round message counts `M_i`, a
//! non-decreasing sequence of accepted loads `L_i`, and a flag saying whether
//! a ball's messages are ranked. [`analytic::run_estimate`] iterates the
//! expected remaining balls and bin-load distribution round by round;
//! [`sim::simulate_many`] measures the same quantities by simulation.

pub mod analytic;
pub mod baselines;
pub mod error;
pub mod model;
pub mod scenarios;
pub mod sim;
pub mod tables;

pub use analytic::{run_estimate, PoissonTruncation};
pub use baselines::{run_baseline, run_baseline_trials, Baseline, BaselineConfig};
pub use error::{BaselineError, EstimateError, ModelError};
pub use model::{
    initial_state, validate_spec, AlgorithmSpec, EstimateReport, LoadDistribution, PopulationSpec,
    RoundCounts, RoundRecord, RoundState, SimOutcome,
};
pub use scenarios::{Contender, Scenario, SCENARIOS};
pub use sim::{simulate_many, simulate_run, SimStats, Summary, TrialConfig};
pub use tables::{Table, TableBuilder, TableLayout, TableRow, TableSettings};
