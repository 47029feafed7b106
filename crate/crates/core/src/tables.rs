//! First-round tables: remaining balls and load fractions for a single round
//! with `M` messages per ball and accepted load `L`, estimated and simulated.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::analytic::{run_estimate, PoissonTruncation};
use crate::error::EstimateError;
use crate::model::{AlgorithmSpec, EstimateReport, PopulationSpec};
use crate::sim::{simulate_many, SimStats, TrialConfig};

/// Message counts of the finite rows.
pub const ROW_MESSAGES: [u32; 7] = [1, 2, 3, 4, 5, 10, 20];
/// Accepted loads of the two halves of every table.
pub const ROW_CAPACITIES: [u32; 2] = [2, 3];
/// Message count standing in for the `M -> infinity` row. Remaining balls
/// change by less than 1e-4 percentage points beyond it.
pub const LIMIT_PROXY_MESSAGES: u32 = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Remaining,
    Loads,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableLayout {
    pub number: u8,
    pub kind: TableKind,
    pub ranked: bool,
    pub limit_row: bool,
}

impl TableLayout {
    pub fn get(number: u8) -> Option<TableLayout> {
        let (kind, ranked, limit_row) = match number {
            1 => (TableKind::Remaining, false, true),
            2 => (TableKind::Loads, false, true),
            3 => (TableKind::Remaining, true, true),
            4 => (TableKind::Loads, true, false),
            _ => return None,
        };
        Some(TableLayout {
            number,
            kind,
            ranked,
            limit_row,
        })
    }

    pub fn all() -> impl Iterator<Item = TableLayout> {
        (1..=4).filter_map(TableLayout::get)
    }

    pub fn title(&self) -> String {
        let what = match self.kind {
            TableKind::Remaining => "remaining balls after round one",
            TableKind::Loads => "bin loads after round one",
        };
        let ranks = if self.ranked { "ranked" } else { "unranked" };
        format!("Table {}: {what}, {ranks}", self.number)
    }
}

/// One table line. Fractions are in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub capacity: u32,
    /// Messages per ball; the limit row carries the proxy count.
    pub messages: u32,
    pub limit: bool,
    /// Load value for load tables.
    pub load: Option<usize>,
    pub estimated: f64,
    pub avg: Option<f64>,
    pub max: Option<f64>,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub layout: TableLayout,
    pub bins: u64,
    pub trials: usize,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn rows_for(&self, capacity: u32) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(move |r| r.capacity == capacity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSettings {
    pub n: u64,
    /// 0 skips simulation.
    pub trials: usize,
    /// Every configuration is simulated with this master seed.
    pub seed: u64,
    pub truncation: PoissonTruncation,
    pub limit_proxy: u32,
}

impl TableSettings {
    pub fn new(n: u64, trials: usize, seed: u64) -> Self {
        TableSettings {
            n,
            trials,
            seed,
            truncation: PoissonTruncation::default(),
            limit_proxy: LIMIT_PROXY_MESSAGES,
        }
    }
}

type Key = (bool, u32, u32);

/// Builds tables, sharing estimates and simulations between tables that use
/// the same configurations.
pub struct TableBuilder {
    settings: TableSettings,
    estimates: HashMap<Key, EstimateReport>,
    sims: HashMap<Key, SimStats>,
}

impl TableBuilder {
    pub fn new(settings: TableSettings) -> Self {
        TableBuilder {
            settings,
            estimates: HashMap::new(),
            sims: HashMap::new(),
        }
    }

    pub fn settings(&self) -> &TableSettings {
        &self.settings
    }

    fn estimate(&mut self, key: Key) -> Result<&EstimateReport, EstimateError> {
        if !self.estimates.contains_key(&key) {
            let (ranked, capacity, messages) = key;
            let spec = AlgorithmSpec::new(vec![messages], vec![capacity], ranked)?;
            let pop = PopulationSpec::square(self.settings.n)?;
            let report = run_estimate(&spec, &pop, &self.settings.truncation)?;
            self.estimates.insert(key, report);
        }
        Ok(&self.estimates[&key])
    }

    fn simulate(&mut self, key: Key) -> Result<Option<&SimStats>, EstimateError> {
        if self.settings.trials == 0 {
            return Ok(None);
        }
        if !self.sims.contains_key(&key) {
            let (ranked, capacity, messages) = key;
            let cfg = TrialConfig {
                spec: AlgorithmSpec::new(vec![messages], vec![capacity], ranked)?,
                pop: PopulationSpec::square(self.settings.n)?,
                seed: self.settings.seed,
                trials: self.settings.trials,
            };
            self.sims.insert(key, simulate_many(&cfg));
        }
        Ok(self.sims.get(&key))
    }

    pub fn build(&mut self, layout: TableLayout) -> Result<Table, EstimateError> {
        let mut rows = Vec::new();
        for capacity in ROW_CAPACITIES {
            let mut messages: Vec<(u32, bool)> = ROW_MESSAGES.iter().map(|&m| (m, false)).collect();
            if layout.limit_row {
                messages.push((self.settings.limit_proxy, true));
            }
            for (m, limit) in messages {
                let key = (layout.ranked, capacity, m);
                let state = self.estimate(key)?.final_state().clone();
                let sim = if limit {
                    None
                } else {
                    self.simulate(key)?.cloned()
                };
                let round = sim.as_ref().map(|s| &s.per_round[0]);
                match layout.kind {
                    TableKind::Remaining => {
                        let s = round.map(|r| r.remaining_fraction);
                        rows.push(TableRow {
                            capacity,
                            messages: m,
                            limit,
                            load: None,
                            estimated: state.remaining_fraction,
                            avg: s.map(|s| s.mean),
                            max: s.map(|s| s.max),
                            std_error: s.map(|s| s.std_error()),
                        });
                    }
                    TableKind::Loads => {
                        let loads = state.loads.padded_to(capacity as usize);
                        for (load, &y) in loads.fractions.iter().enumerate() {
                            let s = round.and_then(|r| r.load_fractions.get(load).copied());
                            rows.push(TableRow {
                                capacity,
                                messages: m,
                                limit,
                                load: Some(load),
                                estimated: y,
                                avg: round.map(|_| s.map_or(0.0, |s| s.mean)),
                                max: round.map(|_| s.map_or(0.0, |s| s.max)),
                                std_error: round.map(|_| s.map_or(0.0, |s| s.std_error())),
                            });
                        }
                    }
                }
            }
        }
        Ok(Table {
            layout,
            bins: self.settings.n,
            trials: self.settings.trials,
            rows,
        })
    }
}
