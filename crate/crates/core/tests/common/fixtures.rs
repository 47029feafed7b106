//! Reference values for the first-round tables, in percent. `None` as message count marks the
//! `M -> infinity` row.

pub struct RemainingRow {
    pub capacity: u32,
    pub messages: Option<u32>,
    pub estimated: f64,
    pub avg: Option<f64>,
}

pub struct LoadBlock {
    pub capacity: u32,
    pub messages: Option<u32>,
    pub estimated: &'static [f64],
    pub avg: &'static [f64],
}

const fn rem(capacity: u32, messages: u32, estimated: f64, avg: f64) -> RemainingRow {
    RemainingRow {
        capacity,
        messages: Some(messages),
        estimated,
        avg: Some(avg),
    }
}

const fn rem_limit(capacity: u32, estimated: f64) -> RemainingRow {
    RemainingRow {
        capacity,
        messages: None,
        estimated,
        avg: None,
    }
}

const fn block(
    capacity: u32,
    messages: u32,
    estimated: &'static [f64],
    avg: &'static [f64],
) -> LoadBlock {
    LoadBlock {
        capacity,
        messages: Some(messages),
        estimated,
        avg,
    }
}

const fn block_limit(capacity: u32, estimated: &'static [f64]) -> LoadBlock {
    LoadBlock {
        capacity,
        messages: None,
        estimated,
        avg: &[],
    }
}

/// Remaining balls, unranked.
pub const TABLE_1: [RemainingRow; 16] = [
    rem(2, 1, 10.364, 10.364),
    rem(2, 2, 7.333, 7.346),
    rem(2, 3, 7.222, 7.218),
    rem(2, 4, 7.774, 7.740),
    rem(2, 5, 8.407, 8.413),
    rem(2, 10, 10.745, 10.732),
    rem(2, 20, 12.158, 12.177),
    rem_limit(2, 13.536),
    rem(3, 1, 2.334, 2.333),
    rem(3, 2, 1.188, 1.182),
    rem(3, 3, 1.125, 1.131),
    rem(3, 4, 1.290, 1.288),
    rem(3, 5, 1.546, 1.549),
    rem(3, 10, 2.838, 2.848),
    rem(3, 20, 3.876, 3.878),
    rem_limit(3, 4.978),
];

/// Load fractions, unranked.
pub const TABLE_2: [LoadBlock; 16] = [
    block(2, 1, &[36.788, 36.788, 26.424], &[36.785, 36.792, 26.423]),
    block(2, 2, &[31.303, 44.720, 23.977], &[31.310, 44.710, 23.981]),
    block(2, 3, &[29.701, 47.814, 22.485], &[29.715, 47.791, 22.494]),
    block(2, 4, &[29.384, 48.971, 21.644], &[29.385, 48.976, 21.639]),
    block(2, 5, &[29.516, 49.375, 21.109], &[29.521, 49.366, 21.112]),
    block(2, 10, &[30.662, 49.421, 19.917], &[30.662, 49.414, 19.923]),
    block(2, 20, &[31.448, 49.261, 19.291], &[31.454, 49.251, 19.295]),
    block_limit(2, &[32.203, 49.089, 18.708]),
    block(
        3,
        1,
        &[36.788, 36.788, 18.394, 8.030],
        &[36.779, 36.807, 18.386, 8.029],
    ),
    block(
        3,
        2,
        &[33.822, 39.056, 21.609, 5.513],
        &[33.814, 39.067, 21.606, 5.513],
    ),
    block(
        3,
        3,
        &[32.439, 42.664, 22.776, 4.611],
        &[31.968, 41.615, 21.998, 4.419],
    ),
    block(
        3,
        4,
        &[31.057, 43.105, 21.910, 3.993],
        &[31.055, 43.122, 21.881, 3.942],
    ),
    block(
        3,
        5,
        &[30.791, 43.993, 21.846, 3.707],
        &[30.696, 43.848, 21.761, 3.695],
    ),
    block(
        3,
        10,
        &[30.913, 44.411, 21.277, 3.399],
        &[30.919, 44.395, 21.289, 3.396],
    ),
    block(
        3,
        20,
        &[31.386, 44.394, 20.931, 3.290],
        &[31.383, 44.391, 20.937, 3.289],
    ),
    block_limit(3, &[31.883, 44.362, 20.575, 3.181]),
];

/// Remaining balls, ranked.
pub const TABLE_3: [RemainingRow; 16] = [
    rem(2, 1, 10.364, 10.372),
    rem(2, 2, 4.536, 4.542),
    rem(2, 3, 3.210, 3.212),
    rem(2, 4, 2.764, 2.760),
    rem(2, 5, 2.590, 2.593),
    rem(2, 10, 2.471, 2.471),
    rem(2, 20, 2.470, 2.474),
    rem_limit(2, 2.470),
    rem(3, 1, 2.334, 2.340),
    rem(3, 2, 0.454, 0.455),
    rem(3, 3, 0.206, 0.205),
    rem(3, 4, 0.139, 0.139),
    rem(3, 5, 0.115, 0.115),
    // the reference averages of the next two rows are off by a factor 10
    rem(3, 10, 0.097, 0.984),
    rem(3, 20, 0.096, 0.974),
    rem_limit(3, 0.096),
];

/// Load fractions, ranked.
pub const TABLE_4: [LoadBlock; 14] = [
    block(2, 1, &[36.788, 36.788, 26.424], &[36.794, 36.771, 26.435]),
    block(2, 2, &[33.475, 37.585, 28.939], &[33.484, 35.576, 28.940]),
    block(2, 3, &[32.584, 38.042, 29.374], &[32.578, 38.045, 29.377]),
    block(2, 4, &[32.255, 38.253, 29.492], &[32.239, 38.279, 29.482]),
    block(2, 5, &[32.112, 38.350, 29.530], &[32.112, 38.357, 29.531]),
    block(2, 10, &[32.022, 38.427, 29.551], &[32.026, 38.418, 29.556]),
    block(2, 20, &[32.021, 38.428, 29.551], &[32.037, 38.394, 29.569]),
    block(
        3,
        1,
        &[36.788, 36.788, 18.394, 8.030],
        &[36.783, 36.792, 18.392, 8.032],
    ),
    block(
        3,
        2,
        &[35.958, 36.845, 18.890, 8.307],
        &[35.957, 36.843, 18.898, 8.301],
    ),
    block(
        3,
        3,
        &[35.826, 36.882, 18.965, 8.327],
        &[35.820, 36.891, 18.965, 8.324],
    ),
    block(
        3,
        4,
        &[35.785, 36.900, 18.984, 8.330],
        &[35.790, 36.894, 18.982, 8.335],
    ),
    block(
        3,
        5,
        &[36.769, 36.909, 18.991, 8.332],
        &[35.778, 36.903, 18.973, 8.346],
    ),
    block(
        3,
        10,
        &[35.755, 36.918, 18.995, 8.332],
        &[35.747, 36.934, 18.986, 8.333],
    ),
    block(
        3,
        20,
        &[37.755, 36.919, 18.995, 8.332],
        &[35.743, 36.935, 18.996, 8.326],
    ),
];

/// Expectations for the named multi-round configurations.
pub struct ScenarioExpectation {
    pub name: &'static str,
    pub remaining: f64,
    pub requests_per_ball: f64,
    /// Final load distribution in percent.
    pub loads: &'static [f64],
}

pub const SCENARIOS: [ScenarioExpectation; 4] = [
    ScenarioExpectation {
        name: "min-load",
        remaining: 5.45e-7,
        requests_per_ball: 2.23,
        loads: &[31.4, 37.3, 31.4],
    },
    ScenarioExpectation {
        name: "min-rounds",
        remaining: 5.7e-10,
        requests_per_ball: 2.23,
        loads: &[31.98, 37.37, 29.32, 1.33],
    },
    ScenarioExpectation {
        name: "min-comm",
        remaining: 4.88e-8,
        requests_per_ball: 1.21,
        loads: &[33.12, 36.60, 27.45, 2.83],
    },
    ScenarioExpectation {
        name: "max-terminate",
        remaining: 5.9e-19,
        requests_per_ball: 1.41,
        loads: &[31.759, 36.524, 31.675, 0.042],
    },
];
