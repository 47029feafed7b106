use std::fmt::{self, Write as _};

use bbtoolkit::baselines::baseline_outcomes;
use bbtoolkit::scenarios::{resolve as resolve_contenders, Contender, SCENARIOS};
use bbtoolkit::sim::run_trials;
use bbtoolkit::tables::{TableKind, LIMIT_PROXY_MESSAGES};
use bbtoolkit::{
    run_estimate, Baseline, EstimateError, EstimateReport, PopulationSpec, SimOutcome, SimStats,
    Summary, Table, TableBuilder, TableLayout, TableSettings, TrialConfig,
};
use serde::Serialize;

use crate::args::{CompareArgs, TablesArgs, Which};
use crate::config::{config_error, Config};
use crate::output::{full, percent, CsvTable, RunManifest, Sink};

/// A conservation or normalization check failed; exits with status 3.
#[derive(Debug)]
pub struct InvariantError(pub String);

impl fmt::Display for InvariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant violated: {}", self.0)
    }
}

impl std::error::Error for InvariantError {}

/// Human-readable output; a closed stdout is not an error.
fn show(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn estimate_error(e: EstimateError) -> anyhow::Error {
    match e {
        EstimateError::Invariant { .. } => InvariantError(e.to_string()).into(),
        other => config_error(other.to_string()),
    }
}

fn check_outcomes(outcomes: &[SimOutcome], caps: Option<&[u32]>, what: &str) -> anyhow::Result<()> {
    for (i, o) in outcomes.iter().enumerate() {
        o.check_invariants(caps)
            .map_err(|e| InvariantError(format!("{what}, trial {i}: {e}")))?;
    }
    Ok(())
}

fn trials(config: &Config) -> anyhow::Result<usize> {
    let t = config.trials()?;
    if t == 0 {
        return Err(config_error("trials must be at least 1"));
    }
    Ok(t)
}

pub fn estimate(config: &Config, manifest: RunManifest) -> anyhow::Result<Sink> {
    let spec = config.spec()?;
    let pop = config.population()?;
    let report = run_estimate(&spec, &pop, &config.truncation()?).map_err(estimate_error)?;

    let mut sink = Sink::new(config.out_dir(), manifest)?;
    let human = estimate_text(&report);
    show(&human);
    let format = config.format();
    if format.csv() {
        sink.csv("estimate.csv", &estimate_csv(&report))?;
    }
    if format.json() {
        #[derive(Serialize)]
        struct Body<'a> {
            report: &'a EstimateReport,
        }
        sink.json("estimate.json", &Body { report: &report })?;
    }
    sink.text("estimate.txt", &human)?;
    Ok(sink)
}

fn estimate_csv(report: &EstimateReport) -> CsvTable {
    let mut t = CsvTable::new(&["round", "quantity", "load", "value"]);
    let mut push = |round: String, quantity: &str, load: String, value: String| {
        t.push(vec![round, quantity.to_string(), load, value]);
    };
    for (r, rec) in report.per_round.iter().enumerate() {
        let round = (r + 1).to_string();
        let (m, l) = report.spec.round(r + 1);
        let s = &rec.state_after;
        push(round.clone(), "messages", String::new(), m.to_string());
        push(round.clone(), "capacity", String::new(), l.to_string());
        push(round.clone(), "alpha", String::new(), full(rec.alpha));
        if let Some(p) = rec.response_probability {
            push(
                round.clone(),
                "response_probability",
                String::new(),
                full(p),
            );
        }
        push(
            round.clone(),
            "commit_probability",
            String::new(),
            full(rec.commit_probability),
        );
        push(
            round.clone(),
            "survivor_probability",
            String::new(),
            full(rec.survivor_probability),
        );
        push(
            round.clone(),
            "remaining_fraction",
            String::new(),
            full(s.remaining_fraction),
        );
        push(
            round.clone(),
            "requests_so_far",
            String::new(),
            full(s.requests_so_far),
        );
        for (load, &y) in s.loads.fractions.iter().enumerate() {
            push(round.clone(), "load_fraction", load.to_string(), full(y));
        }
        push(round, "end_game", String::new(), rec.end_game.to_string());
    }
    push(
        String::new(),
        "final_remaining_expected",
        String::new(),
        full(report.final_remaining_expected),
    );
    if let Some(b) = report.failure_probability_bound {
        push(
            String::new(),
            "failure_probability_bound",
            String::new(),
            full(b),
        );
    }
    push(
        String::new(),
        "total_requests",
        String::new(),
        full(report.total_requests),
    );
    push(
        String::new(),
        "total_messages_upper_bound",
        String::new(),
        full(report.total_messages_upper_bound),
    );
    push(
        String::new(),
        "end_game_warning",
        String::new(),
        report.end_game_warning.to_string(),
    );
    t
}

fn estimate_text(report: &EstimateReport) -> String {
    let spec = &report.spec;
    let width = spec.max_capacity() as usize + 1;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} algorithm, M = {:?}, L = {:?}, {} bins, {} balls",
        if spec.ranked { "ranked" } else { "unranked" },
        spec.messages_per_round,
        spec.capacity_per_round,
        report.population.bins,
        report.population.balls
    );
    let _ = write!(
        out,
        "{:>5} {:>3} {:>3} {:>13} {:>11}",
        "round", "M", "L", "remaining %", "requests/n"
    );
    for l in 0..width {
        let _ = write!(out, " {:>8}", format!("load {l}"));
    }
    out.push('\n');
    for (r, rec) in report.per_round.iter().enumerate() {
        let (m, l) = spec.round(r + 1);
        let s = &rec.state_after;
        let _ = write!(
            out,
            "{:>5} {m:>3} {l:>3} {:>13} {:>11.4}",
            r + 1,
            percent(s.remaining_fraction),
            s.requests_so_far
        );
        for load in 0..width {
            let y = s.loads.fractions.get(load).copied().unwrap_or(0.0);
            let _ = write!(out, " {:>8}", percent(y));
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "remaining after round {}: {:.4e} of n, {:.4e} balls expected",
        report.per_round.len(),
        report.final_remaining_fraction(),
        report.final_remaining_expected
    );
    match report.failure_probability_bound {
        Some(b) => {
            let _ = writeln!(out, "P(some ball unplaced) <= {b:.3e}");
        }
        None => {
            let _ = writeln!(
                out,
                "expected remainder is at least one ball; no termination bound"
            );
        }
    }
    let n = report.population.bins as f64;
    let _ = writeln!(
        out,
        "requests: {:.4} n, messages at most {:.4} n",
        report.total_requests / n,
        report.total_messages_upper_bound / n
    );
    if report.end_game_warning {
        let _ = writeln!(
            out,
            "warning: fewer than ln(n)^3 balls remain; expectations are loose in this range"
        );
    }
    out
}

pub fn simulate(config: &Config, manifest: RunManifest) -> anyhow::Result<Sink> {
    let spec = config.spec()?;
    let pop = config.population()?;
    let cfg = TrialConfig {
        spec,
        pop,
        seed: config.seed().unwrap_or_default(),
        trials: trials(config)?,
    };
    let outcomes = run_trials(&cfg);
    check_outcomes(&outcomes, Some(&cfg.spec.capacity_per_round), "simulation")?;
    let stats = SimStats::from_outcomes(&outcomes);

    let mut sink = Sink::new(config.out_dir(), manifest)?;
    let human = stats_text(&stats);
    show(&human);
    let format = config.format();
    if format.csv() {
        let mut t = CsvTable::new(&STATS_HEADER);
        stats_rows(&stats, &mut |row| t.push(row));
        sink.csv("simulate.csv", &t)?;
    }
    if format.json() {
        #[derive(Serialize)]
        struct Body<'a> {
            stats: &'a SimStats,
        }
        sink.json("simulate.json", &Body { stats: &stats })?;
    }
    sink.text("simulate.txt", &human)?;
    Ok(sink)
}

const STATS_HEADER: [&str; 8] = [
    "round", "metric", "load", "mean", "min", "max", "std_dev", "count",
];

fn summary_row(round: String, metric: &str, load: String, s: &Summary) -> Vec<String> {
    vec![
        round,
        metric.to_string(),
        load,
        full(s.mean),
        full(s.min),
        full(s.max),
        full(s.std_dev),
        s.count.to_string(),
    ]
}

fn stats_rows(stats: &SimStats, emit: &mut dyn FnMut(Vec<String>)) {
    for (r, rs) in stats.per_round.iter().enumerate() {
        let round = (r + 1).to_string();
        emit(summary_row(
            round.clone(),
            "remaining_fraction",
            String::new(),
            &rs.remaining_fraction,
        ));
        for (load, s) in rs.load_fractions.iter().enumerate() {
            emit(summary_row(
                round.clone(),
                "load_fraction",
                load.to_string(),
                s,
            ));
        }
        emit(summary_row(
            round.clone(),
            "requests",
            String::new(),
            &rs.requests,
        ));
        emit(summary_row(
            round.clone(),
            "responses",
            String::new(),
            &rs.responses,
        ));
        emit(summary_row(round, "commits", String::new(), &rs.commits));
    }
    emit(summary_row(
        String::new(),
        "messages_total",
        String::new(),
        &stats.messages_total,
    ));
    emit(summary_row(
        String::new(),
        "commits_total",
        String::new(),
        &stats.commits_total,
    ));
}

fn stats_text(stats: &SimStats) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} trials, {} bins, {} balls",
        stats.trials, stats.bins, stats.balls
    );
    let _ = writeln!(
        out,
        "{:>5} {:>11} {:>11} {:>11} {:>11}",
        "round", "avg %", "min %", "max %", "std dev %"
    );
    for (r, rs) in stats.per_round.iter().enumerate() {
        let s = &rs.remaining_fraction;
        let _ = writeln!(
            out,
            "{:>5} {:>11} {:>11} {:>11} {:>11}",
            r + 1,
            percent(s.mean),
            percent(s.min),
            percent(s.max),
            percent(s.std_dev)
        );
    }
    let last = stats.final_round();
    let _ = write!(out, "final loads %:");
    for (l, s) in last.load_fractions.iter().enumerate() {
        let _ = write!(out, " {l}: {}", percent(s.mean));
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "messages: {:.4} n",
        stats.messages_total.mean / stats.bins as f64
    );
    out
}

pub fn tables(
    args: &TablesArgs,
    config: &mut Config,
) -> anyhow::Result<(Vec<Table>, TableSettings)> {
    let which = args
        .which
        .or(config.tables.which)
        .unwrap_or(Which::All(crate::args::AllTag::All));
    let limit_proxy = args
        .limit_proxy
        .or(config.tables.limit_proxy)
        .unwrap_or(LIMIT_PROXY_MESSAGES as u64);
    let limit_proxy = u32::try_from(limit_proxy)
        .ok()
        .filter(|&m| m > 0)
        .ok_or_else(|| config_error(format!("limit-proxy must lie in 1..={}", u32::MAX)))?;
    config.tables.which = Some(which);
    config.tables.limit_proxy = Some(limit_proxy as u64);
    let n = config.n();
    PopulationSpec::square(n).map_err(|e| config_error(format!("invalid population: {e}")))?;

    let settings = TableSettings {
        n,
        trials: config.trials()?,
        seed: config.seed().unwrap_or_default(),
        truncation: config.truncation()?,
        limit_proxy,
    };
    let mut builder = TableBuilder::new(settings.clone());
    let mut out = Vec::new();
    for number in which.tables() {
        let layout = TableLayout::get(number).expect("validated table number");
        out.push(builder.build(layout).map_err(estimate_error)?);
    }
    Ok((out, settings))
}

pub fn write_tables(
    tables: &[Table],
    config: &Config,
    manifest: RunManifest,
) -> anyhow::Result<Sink> {
    let mut sink = Sink::new(config.out_dir(), manifest)?;
    let format = config.format();
    for table in tables {
        let number = table.layout.number;
        let human = table_text(table);
        show(&human);
        if format.csv() {
            let mut t = CsvTable::new(&[
                "capacity",
                "messages",
                "limit",
                "load",
                "estimated",
                "avg",
                "max",
                "std_error",
            ]);
            let opt = |x: Option<f64>| x.map(full).unwrap_or_default();
            for r in &table.rows {
                t.push(vec![
                    r.capacity.to_string(),
                    r.messages.to_string(),
                    r.limit.to_string(),
                    r.load.map(|l| l.to_string()).unwrap_or_default(),
                    full(r.estimated),
                    opt(r.avg),
                    opt(r.max),
                    opt(r.std_error),
                ]);
            }
            sink.csv(&format!("table{number}.csv"), &t)?;
        }
        if format.json() {
            #[derive(Serialize)]
            struct Body<'a> {
                table: &'a Table,
            }
            sink.json(&format!("table{number}.json"), &Body { table })?;
        }
        sink.text(&format!("table{number}.txt"), &human)?;
    }
    Ok(sink)
}

fn table_text(table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", table.layout.title());
    let simulated = table.trials > 0;
    let _ = writeln!(
        out,
        "n = {}, {} trials, values in percent",
        table.bins, table.trials
    );
    let m_label = |r: &bbtoolkit::TableRow| {
        if r.limit {
            format!("inf ({})", r.messages)
        } else {
            r.messages.to_string()
        }
    };
    let cell = |x: Option<f64>| x.map(percent).unwrap_or_else(|| "-".to_string());
    for cap in bbtoolkit::tables::ROW_CAPACITIES {
        let _ = writeln!(out, "L = {cap}");
        match table.layout.kind {
            TableKind::Remaining => {
                let _ = write!(out, "{:>12} {:>10}", "M", "estimated");
                if simulated {
                    let _ = write!(out, " {:>10} {:>10}", "avg", "max");
                }
                out.push('\n');
                for r in table.rows_for(cap) {
                    let _ = write!(out, "{:>12} {:>10}", m_label(r), percent(r.estimated));
                    if simulated {
                        let _ = write!(out, " {:>10} {:>10}", cell(r.avg), cell(r.max));
                    }
                    out.push('\n');
                }
            }
            TableKind::Loads => {
                let _ = write!(out, "{:>12} {:>5} {:>10}", "M", "load", "estimated");
                if simulated {
                    let _ = write!(out, " {:>10} {:>10}", "avg", "max");
                }
                out.push('\n');
                for r in table.rows_for(cap) {
                    let _ = write!(
                        out,
                        "{:>12} {:>5} {:>10}",
                        m_label(r),
                        r.load.unwrap_or_default(),
                        percent(r.estimated)
                    );
                    if simulated {
                        let _ = write!(out, " {:>10} {:>10}", cell(r.avg), cell(r.max));
                    }
                    out.push('\n');
                }
            }
        }
    }
    if table.layout.limit_row {
        let _ = writeln!(
            out,
            "inf: evaluated at the message count in parentheses; within 1e-4 points of the limit"
        );
    }
    out.push('\n');
    out
}

/// One contender's results.
#[derive(Debug, Serialize)]
pub struct ComparisonEntry {
    pub label: String,
    pub kind: &'static str,
    pub messages: Vec<u32>,
    pub capacities: Vec<u32>,
    pub ranked: bool,
    pub stats: SimStats,
    /// Analytic remaining fraction after each round (primary scenarios only).
    pub estimated_remaining: Option<Vec<f64>>,
    pub estimated_final_loads: Option<Vec<f64>>,
}

pub fn compare_names(args: &CompareArgs, config: &mut Config) -> anyhow::Result<Vec<String>> {
    let names = if args.all {
        vec!["all".to_string()]
    } else {
        args.only
            .clone()
            .or(config.compare.only.clone())
            .unwrap_or_default()
    };
    let names: Vec<String> = names
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        let known: Vec<&str> = SCENARIOS
            .iter()
            .map(|s| s.name)
            .chain(Baseline::ALL.iter().map(|b| b.name()))
            .collect();
        return Err(config_error(format!(
            "no scenarios selected; use --all or --only with any of: {}",
            known.join(", ")
        )));
    }
    config.compare.only = Some(names.clone());
    config.compare.cap = args.cap.or(config.compare.cap);
    Ok(names)
}

pub fn compare(names: &[String], config: &Config) -> anyhow::Result<Vec<ComparisonEntry>> {
    let n = config.n();
    let pop =
        PopulationSpec::square(n).map_err(|e| config_error(format!("invalid population: {e}")))?;
    let seed = config.seed().unwrap_or_default();
    let trials = trials(config)?;
    if config.compare.cap == Some(0) {
        return Err(config_error("cap must be at least 1"));
    }
    let contenders = resolve_contenders(names, n, config.compare.cap, seed)
        .map_err(|name| config_error(format!("unknown scenario {name:?}")))?;
    let truncation = config.truncation()?;
    let mut out = Vec::new();
    for c in contenders {
        let label = c.label();
        let entry = match c {
            Contender::Primary(s) => {
                let spec = s.spec();
                let cfg = TrialConfig {
                    spec: spec.clone(),
                    pop,
                    seed,
                    trials,
                };
                let outcomes = run_trials(&cfg);
                check_outcomes(&outcomes, Some(&spec.capacity_per_round), &label)?;
                let report = run_estimate(&spec, &pop, &truncation).map_err(estimate_error)?;
                ComparisonEntry {
                    label,
                    kind: "scenario",
                    messages: spec.messages_per_round.clone(),
                    capacities: spec.capacity_per_round.clone(),
                    ranked: true,
                    stats: SimStats::from_outcomes(&outcomes),
                    estimated_remaining: Some(
                        report
                            .per_round
                            .iter()
                            .map(|r| r.state_after.remaining_fraction)
                            .collect(),
                    ),
                    estimated_final_loads: Some(report.final_state().loads.fractions.clone()),
                }
            }
            Contender::Baseline(cfg) => {
                let outcomes = baseline_outcomes(&cfg, trials)
                    .map_err(|e| config_error(format!("{label}: {e}")))?;
                let caps = cfg.load_cap.map(|c| vec![c; cfg.rounds]);
                check_outcomes(&outcomes, caps.as_deref(), &label)?;
                ComparisonEntry {
                    label,
                    kind: "baseline",
                    messages: vec![cfg.d; cfg.rounds],
                    capacities: caps.unwrap_or_default(),
                    ranked: false,
                    stats: SimStats::from_outcomes(&outcomes),
                    estimated_remaining: None,
                    estimated_final_loads: None,
                }
            }
        };
        out.push(entry);
    }
    Ok(out)
}

pub fn write_compare(
    entries: &[ComparisonEntry],
    config: &Config,
    manifest: RunManifest,
) -> anyhow::Result<Sink> {
    let mut sink = Sink::new(config.out_dir(), manifest)?;
    let human = compare_text(entries);
    show(&human);
    let format = config.format();
    if format.csv() {
        let mut header = vec!["contender", "kind"];
        header.extend(STATS_HEADER);
        header.push("estimated");
        let mut t = CsvTable::new(&header);
        for e in entries {
            let last = e.stats.per_round.len();
            stats_rows(&e.stats, &mut |row| {
                let estimated = compare_estimate(e, &row, last);
                // only the final round's load histogram is reported
                if row[1] == "load_fraction" && row[0] != last.to_string() {
                    return;
                }
                let mut full_row = vec![e.label.clone(), e.kind.to_string()];
                full_row.extend(row);
                full_row.push(estimated.map(full).unwrap_or_default());
                t.push(full_row);
            });
        }
        sink.csv("compare.csv", &t)?;
    }
    if format.json() {
        #[derive(Serialize)]
        struct Body<'a> {
            contenders: &'a [ComparisonEntry],
        }
        sink.json(
            "compare.json",
            &Body {
                contenders: entries,
            },
        )?;
    }
    sink.text("compare.txt", &human)?;
    Ok(sink)
}

fn compare_estimate(e: &ComparisonEntry, row: &[String], last: usize) -> Option<f64> {
    let round: usize = row[0].parse().ok()?;
    match row[1].as_str() {
        "remaining_fraction" => e.estimated_remaining.as_ref()?.get(round - 1).copied(),
        "load_fraction" if round == last => {
            let load: usize = row[2].parse().ok()?;
            Some(
                e.estimated_final_loads
                    .as_ref()?
                    .get(load)
                    .copied()
                    .unwrap_or(0.0),
            )
        }
        _ => None,
    }
}

fn compare_text(entries: &[ComparisonEntry]) -> String {
    let mut out = String::new();
    let rounds = entries
        .iter()
        .map(|e| e.stats.per_round.len())
        .max()
        .unwrap_or(0);
    let _ = write!(out, "{:<22}", "contender");
    for r in 1..=rounds {
        let _ = write!(out, " {:>12}", format!("after {r} %"));
    }
    let _ = writeln!(out, " {:>11} {:>8}", "messages/n", "max load");
    for e in entries {
        let _ = write!(out, "{:<22}", e.label);
        for r in 0..rounds {
            let cell = e
                .stats
                .per_round
                .get(r)
                .map(|s| percent(s.remaining_fraction.mean))
                .unwrap_or_else(|| "-".to_string());
            let _ = write!(out, " {cell:>12}");
        }
        let loads = &e.stats.final_round().load_fractions;
        let max_load = loads.iter().rposition(|s| s.max > 0.0).unwrap_or(0);
        let _ = writeln!(
            out,
            " {:>11.4} {max_load:>8}",
            e.stats.messages_total.mean / e.stats.bins as f64
        );
    }
    out
}
