//! Comparison algorithms: one-shot and multi-round Greedy, H-retry and
//! Stemann's collision protocol, simulated with the same message ledger as
//! the main simulator.
//!
//! Every ball sends its own requests; the ledger counts requests, bin replies,
//! commits and withdrawals as separate messages. Contacted bins are drawn
//! uniformly with replacement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::BaselineError;
use crate::model::{RoundCounts, SimOutcome};
use crate::sim::{choose_subset, histogram, trial_seed, Buckets, SimRng, SimStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    GreedyOneShot,
    GreedyMultiRound,
    HRetry,
    Stemann,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [
        Baseline::GreedyOneShot,
        Baseline::GreedyMultiRound,
        Baseline::HRetry,
        Baseline::Stemann,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::GreedyOneShot => "greedy-oneshot",
            Baseline::GreedyMultiRound => "greedy-multiround",
            Baseline::HRetry => "h-retry",
            Baseline::Stemann => "stemann",
        }
    }

    pub fn from_name(name: &str) -> Option<Baseline> {
        Baseline::ALL.into_iter().find(|b| b.name() == name)
    }
}

impl std::fmt::Display for Baseline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One baseline run with `n` balls and `n` bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub algorithm: Baseline,
    pub n: u64,
    /// Bins contacted per ball (per contact phase for H-retry).
    pub d: u32,
    /// `None` leaves loads unbounded.
    pub load_cap: Option<u32>,
    pub rounds: usize,
    pub seed: u64,
}

impl BaselineConfig {
    /// Standard parameters for comparisons: `d = 5` for Greedy, `d = 2` otherwise.
    pub fn preset(algorithm: Baseline, n: u64, load_cap: u32, seed: u64) -> BaselineConfig {
        let (d, rounds) = match algorithm {
            Baseline::GreedyOneShot => (5, 1),
            Baseline::GreedyMultiRound => (5, 3),
            Baseline::HRetry => (2, 3),
            Baseline::Stemann => (2, 3),
        };
        let load_cap = match algorithm {
            Baseline::GreedyMultiRound => None,
            _ => Some(load_cap),
        };
        BaselineConfig {
            algorithm,
            n,
            d,
            load_cap,
            rounds,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.n == 0 {
            return Err(BaselineError::ZeroParameter { what: "n" });
        }
        if self.d == 0 {
            return Err(BaselineError::ZeroParameter { what: "d" });
        }
        if self.load_cap == Some(0) {
            return Err(BaselineError::ZeroParameter { what: "load cap" });
        }
        if self.rounds == 0 {
            return Err(BaselineError::ZeroParameter { what: "rounds" });
        }
        if self.algorithm == Baseline::GreedyOneShot && self.rounds != 1 {
            return Err(BaselineError::Unsupported {
                algorithm: "greedy-oneshot",
                requirement: "exactly one round",
            });
        }
        let contacts = if self.algorithm == Baseline::HRetry {
            2
        } else {
            1
        };
        if self.n.saturating_mul(self.d as u64 * contacts) >= u32::MAX as u64 {
            return Err(BaselineError::Unsupported {
                algorithm: self.algorithm.name(),
                requirement: "fewer than 2^32 contacts in total",
            });
        }
        Ok(())
    }

    fn cap_or_max(&self) -> u32 {
        self.load_cap.unwrap_or(u32::MAX)
    }
}

/// Dispatches on `cfg.algorithm`.
pub fn run_baseline(cfg: &BaselineConfig) -> Result<SimOutcome, BaselineError> {
    match cfg.algorithm {
        Baseline::GreedyOneShot => greedy_oneshot(cfg),
        Baseline::GreedyMultiRound => greedy_multiround(cfg),
        Baseline::HRetry => h_retry(cfg),
        Baseline::Stemann => stemann(cfg),
    }
}

/// `trials` independent runs seeded with [`trial_seed`]`(cfg.seed, i)`.
pub fn run_baseline_trials(cfg: &BaselineConfig, trials: usize) -> Result<SimStats, BaselineError> {
    Ok(SimStats::from_outcomes(&baseline_outcomes(cfg, trials)?))
}

/// The individual outcomes behind [`run_baseline_trials`], in trial order.
pub fn baseline_outcomes(
    cfg: &BaselineConfig,
    trials: usize,
) -> Result<Vec<SimOutcome>, BaselineError> {
    cfg.validate()?;
    assert!(trials >= 1, "at least one trial");
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.seed = trial_seed(cfg.seed, i);
            run_baseline(&c)
        })
        .collect()
}

fn expect(cfg: &BaselineConfig, algorithm: Baseline) -> Result<(), BaselineError> {
    assert_eq!(
        cfg.algorithm, algorithm,
        "configuration is for {}",
        cfg.algorithm
    );
    cfg.validate()
}

fn outcome(n: u64, per_round: Vec<RoundCounts>) -> SimOutcome {
    let commits_total = per_round.iter().map(|r| r.commits).sum();
    let messages_total = per_round
        .iter()
        .map(|r| r.requests_sent + r.responses_sent + r.commits + r.withdrawals_sent)
        .sum();
    SimOutcome {
        bins: n,
        balls: n,
        per_round,
        commits_total,
        messages_total,
    }
}

/// One-shot parallel Greedy.
///
/// Every ball sends `d` requests. Each bin orders the requests it received
/// uniformly at random and replies with each request's position; a ball joins
/// the contacted bin where it stands earliest, ties broken uniformly. A bin
/// keeps the first `load_cap` balls that joined it; the rest remain.
pub fn greedy_oneshot(cfg: &BaselineConfig) -> Result<SimOutcome, BaselineError> {
    expect(cfg, Baseline::GreedyOneShot)?;
    let mut rng = SimRng::new(cfg.seed);
    let n = cfg.n as usize;
    let d = cfg.d as usize;
    let dest: Vec<u32> = (0..n * d).map(|_| rng.below_u32(n as u32)).collect();
    let mut buckets = Buckets::default();
    buckets.fill(&dest, n);

    let mut position = vec![0u32; n * d];
    let mut order = Vec::new();
    for bin in 0..n {
        order.clear();
        order.extend_from_slice(buckets.of(bin));
        let len = order.len();
        choose_subset(&mut rng, &mut order, len);
        for (p, &req) in order.iter().enumerate() {
            position[req as usize] = p as u32;
        }
    }

    let mut joined = vec![0u64; n];
    for ball in 0..n {
        let mut best = u32::MAX;
        let mut ties = 0;
        let mut pick = 0;
        for j in 0..d {
            let p = position[ball * d + j];
            if p < best {
                best = p;
                ties = 1;
                pick = dest[ball * d + j];
            } else if p == best {
                ties += 1;
                if rng.below_u32(ties) == 0 {
                    pick = dest[ball * d + j];
                }
            }
        }
        joined[pick as usize] += 1;
    }

    let cap = cfg.cap_or_max() as u64;
    let loads: Vec<u32> = joined.iter().map(|&j| j.min(cap) as u32).collect();
    let placed: u64 = loads.iter().map(|&l| l as u64).sum();
    let requests = (n * d) as u64;
    let round = RoundCounts {
        balls_remaining: cfg.n - placed,
        load_histogram: histogram(&loads, cfg.load_cap.unwrap_or(0) as usize),
        requests_sent: requests,
        responses_sent: requests,
        commits: placed,
        withdrawals_sent: 0,
    };
    Ok(outcome(cfg.n, vec![round]))
}

/// Reusable state for rounds in which bins accept a limited number of their
/// requesters and each accepted ball commits to one accepting bin.
struct AcceptRound {
    dest: Vec<u32>,
    buckets: Buckets,
    accepts: Vec<u32>,
    choice: Vec<u32>,
    inbox: Vec<u32>,
}

impl AcceptRound {
    fn new() -> Self {
        AcceptRound {
            dest: Vec::new(),
            buckets: Buckets::default(),
            accepts: Vec::new(),
            choice: Vec::new(),
            inbox: Vec::new(),
        }
    }

    /// Every pending ball requests `contacts[ball * stride..][..used]`. A bin
    /// of load `l` accepts a uniform subset of `limit(l)` requests (one reply
    /// per request); a ball with accepted requests commits to one of them
    /// uniformly.
    #[allow(clippy::too_many_arguments)]
    fn play(
        &mut self,
        rng: &mut SimRng,
        loads: &mut [u32],
        pending: &mut Vec<u32>,
        contacts: &[u32],
        stride: usize,
        used: usize,
        cap: u32,
        limit: impl Fn(u32) -> usize,
    ) -> RoundCounts {
        let bins = loads.len();
        self.dest.clear();
        for &ball in pending.iter() {
            let at = ball as usize * stride;
            self.dest.extend_from_slice(&contacts[at..at + used]);
        }
        self.buckets.fill(&self.dest, bins);
        self.accepts.clear();
        self.accepts.resize(pending.len(), 0);
        self.choice.clear();
        self.choice.resize(pending.len(), u32::MAX);

        #[allow(clippy::needless_range_loop)] // `bin` also indexes the buckets
        for bin in 0..bins {
            let received = self.buckets.of(bin);
            let free = limit(loads[bin]).min(cap.saturating_sub(loads[bin]) as usize);
            if received.is_empty() || free == 0 {
                continue;
            }
            let accepted: &[u32] = if received.len() <= free {
                received
            } else {
                self.inbox.clear();
                self.inbox.extend_from_slice(received);
                choose_subset(rng, &mut self.inbox, free);
                &self.inbox[..free]
            };
            for &req in accepted {
                let slot = req as usize / used;
                self.accepts[slot] += 1;
                let a = self.accepts[slot];
                if a == 1 || rng.below_u32(a) == 0 {
                    self.choice[slot] = bin as u32;
                }
            }
        }

        let requests = self.dest.len() as u64;
        let mut commits = 0;
        let mut still = Vec::new();
        for (slot, &ball) in pending.iter().enumerate() {
            match self.choice[slot] {
                u32::MAX => still.push(ball),
                bin => {
                    loads[bin as usize] += 1;
                    assert!(loads[bin as usize] <= cap, "bin {bin} exceeds its cap");
                    commits += 1;
                }
            }
        }
        *pending = still;
        RoundCounts {
            balls_remaining: pending.len() as u64,
            load_histogram: Vec::new(),
            requests_sent: requests,
            responses_sent: requests,
            commits,
            withdrawals_sent: 0,
        }
    }
}

fn draw_contacts(rng: &mut SimRng, n: usize, per_ball: usize) -> Vec<u32> {
    (0..n * per_ball).map(|_| rng.below_u32(n as u32)).collect()
}

/// Non-adaptive multi-round Greedy: each ball fixes `d` bins up front and
/// requests all of them in every round until it commits; each bin accepts at
/// most one requester per round, chosen uniformly.
pub fn greedy_multiround(cfg: &BaselineConfig) -> Result<SimOutcome, BaselineError> {
    expect(cfg, Baseline::GreedyMultiRound)?;
    let mut rng = SimRng::new(cfg.seed);
    let n = cfg.n as usize;
    let d = cfg.d as usize;
    let contacts = draw_contacts(&mut rng, n, d);
    let cap = cfg.cap_or_max();
    let mut loads = vec![0u32; n];
    let mut pending: Vec<u32> = (0..n as u32).collect();
    let mut step = AcceptRound::new();
    let mut per_round = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let mut r = step.play(
            &mut rng,
            &mut loads,
            &mut pending,
            &contacts,
            d,
            d,
            cap,
            |_| 1,
        );
        r.load_histogram = histogram(&loads, 0);
        per_round.push(r);
    }
    Ok(outcome(cfg.n, per_round))
}

/// H-retry: a multi-round Greedy step on `d` bins (one acceptance per bin),
/// then a conflict-resolution round on the same bins in which bins accept up
/// to their remaining capacity, then rounds in which unplaced balls add `d`
/// fresh bins and request all `2d`. Without a load cap every bin accepts
/// every request.
pub fn h_retry(cfg: &BaselineConfig) -> Result<SimOutcome, BaselineError> {
    expect(cfg, Baseline::HRetry)?;
    let mut rng = SimRng::new(cfg.seed);
    let n = cfg.n as usize;
    let d = cfg.d as usize;
    let contacts = draw_contacts(&mut rng, n, 2 * d);
    let cap = cfg.cap_or_max();
    let mut loads = vec![0u32; n];
    let mut pending: Vec<u32> = (0..n as u32).collect();
    let mut step = AcceptRound::new();
    let mut per_round = Vec::with_capacity(cfg.rounds);
    for round in 1..=cfg.rounds {
        let used = if round <= 2 { d } else { 2 * d };
        let first = round == 1 && cfg.load_cap.is_some();
        let limit = |_| if first { 1 } else { usize::MAX };
        let mut r = step.play(
            &mut rng,
            &mut loads,
            &mut pending,
            &contacts,
            2 * d,
            used,
            cap,
            limit,
        );
        r.load_histogram = histogram(&loads, cfg.load_cap.unwrap_or(0) as usize);
        per_round.push(r);
    }
    Ok(outcome(cfg.n, per_round))
}

/// Stemann's collision protocol with `d` contacts per ball (2 in the
/// original).
///
/// Each ball contacts its bins once. In every round, a bin whose load plus
/// number of uncommitted contacting balls is at most the cap invites all of
/// them. An invited ball commits to one inviting bin, chosen uniformly, and
/// sends "will not commit" only to contacted bins that did not invite it in
/// the same round. Committed balls are never invited again.
pub fn stemann(cfg: &BaselineConfig) -> Result<SimOutcome, BaselineError> {
    expect(cfg, Baseline::Stemann)?;
    let mut rng = SimRng::new(cfg.seed);
    let n = cfg.n as usize;
    let d = cfg.d as usize;
    let cap = cfg.cap_or_max();
    let mut contacts = draw_contacts(&mut rng, n, d);

    // distinct bins per ball, packed to the front of its slice
    let mut distinct = vec![0u8; n];
    let mut waiting = vec![0u32; n];
    for ball in 0..n {
        let c = &mut contacts[ball * d..(ball + 1) * d];
        let mut k = 0;
        for j in 0..d {
            if !c[..k].contains(&c[j]) {
                c.swap(k, j);
                k += 1;
            }
        }
        distinct[ball] = k as u8;
        for &b in &c[..k] {
            waiting[b as usize] += 1;
        }
    }

    let mut loads = vec![0u32; n];
    let mut pending: Vec<u32> = (0..n as u32).collect();
    let mut invites = vec![false; n];
    let mut inviting = Vec::with_capacity(d);
    let mut per_round = Vec::with_capacity(cfg.rounds);
    for round in 1..=cfg.rounds {
        for bin in 0..n {
            invites[bin] =
                waiting[bin] > 0 && loads[bin] as u64 + waiting[bin] as u64 <= cap as u64;
        }
        let mut counts = RoundCounts {
            balls_remaining: 0,
            load_histogram: Vec::new(),
            requests_sent: if round == 1 { (n * d) as u64 } else { 0 },
            responses_sent: 0,
            commits: 0,
            withdrawals_sent: 0,
        };
        let mut still = Vec::with_capacity(pending.len());
        for &ball in &pending {
            let b = ball as usize;
            let mine = &contacts[b * d..b * d + distinct[b] as usize];
            inviting.clear();
            inviting.extend(mine.iter().copied().filter(|&x| invites[x as usize]));
            if inviting.is_empty() {
                still.push(ball);
                continue;
            }
            counts.responses_sent += inviting.len() as u64;
            let target = inviting[rng.below(inviting.len())];
            loads[target as usize] += 1;
            counts.commits += 1;
            counts.withdrawals_sent += (mine.len() - inviting.len()) as u64;
            for &x in mine {
                waiting[x as usize] -= 1;
            }
        }
        pending = still;
        counts.balls_remaining = pending.len() as u64;
        counts.load_histogram = histogram(&loads, cfg.load_cap.unwrap_or(0) as usize);
        per_round.push(counts);
    }
    Ok(outcome(cfg.n, per_round))
}
