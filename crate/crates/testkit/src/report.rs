//! Results files, latency tables and the campaign's pass/fail properties.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use vied_core::protection::FunctionId;

use crate::campaign::{CampaignOutcome, LatencyRecord, ScenarioResult};
use crate::oracle::CAMPAIGN_FUNCTIONS;
use crate::stats::LatencyStats;
use crate::Error;

pub const RESULTS_HEADER: &str = "scenario_id,function,repeat,t_operate_s,t_expected_s,t_excess_s,operated";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// The results file, one line per record in campaign order.
pub fn results_csv(records: impl IntoIterator<Item = impl std::borrow::Borrow<LatencyRecord>>) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let r = r.borrow();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scenario_id,
            r.function,
            r.repeat,
            opt(r.t_operate_s),
            opt(r.t_expected_s),
            opt(r.t_excess_s),
            r.operated
        );
    }
    out
}

/// Resistance key that sorts numerically; resistances are finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Ohm(f64);

impl Eq for Ohm {}

impl Ord for Ohm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// One row of a per-function table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub resistance_ohm: f64,
    /// Excess latency statistics in seconds over operated records; `None`
    /// when no scenario at this resistance operated.
    pub stats: Option<LatencyStats>,
    /// Scenarios at this resistance that did not operate.
    pub no_operation: Vec<String>,
}

/// Excess-latency tables per function, rows by ascending resistance.
pub fn latency_tables(results: &[ScenarioResult]) -> BTreeMap<FunctionId, Vec<TableRow>> {
    let mut tables = BTreeMap::new();
    for f in CAMPAIGN_FUNCTIONS {
        let mut by_r: BTreeMap<Ohm, (Vec<f64>, Vec<String>)> = BTreeMap::new();
        for res in results {
            let cell = by_r.entry(Ohm(res.scenario.resistance_ohm)).or_default();
            let recs: Vec<&LatencyRecord> = res.records.iter().filter(|r| r.function == f).collect();
            cell.0.extend(recs.iter().filter_map(|r| r.t_excess_s));
            if recs.iter().all(|r| !r.operated) {
                cell.1.push(res.scenario_id.clone());
            }
        }
        let rows = by_r
            .into_iter()
            .map(|(r, (xs, no_operation))| TableRow {
                resistance_ohm: r.0,
                stats: LatencyStats::from_samples(&xs),
                no_operation,
            })
            .collect();
        tables.insert(f, rows);
    }
    tables
}

fn title(f: FunctionId) -> &'static str {
    match f {
        FunctionId::Pioc => "instantaneous overcurrent",
        FunctionId::Ptoc => "inverse-time overcurrent",
        FunctionId::Pdis => "distance",
        FunctionId::Ptuv => "undervoltage",
        FunctionId::Pdir => "directional overcurrent",
        FunctionId::Ptov => "overvoltage",
    }
}

/// Human-readable tables: minimum, mean, maximum and standard deviation
/// of excess latency in milliseconds per fault resistance.
pub fn render_tables(tables: &BTreeMap<FunctionId, Vec<TableRow>>) -> String {
    let mut out = String::new();
    for (f, rows) in tables {
        let _ = writeln!(out, "Timing latency of the {f} ({}) function, excess over expected operate time", title(*f));
        let _ = writeln!(
            out,
            "{:>10} | {:>12} | {:>12} | {:>12} | {:>12} | {:>5}",
            "Rf", "Minimum", "Mean", "Maximum", "Std. dev.", "n"
        );
        let _ = writeln!(out, "{}", "-".repeat(79));
        for row in rows {
            let r = format!("{} Ω", row.resistance_ohm);
            match &row.stats {
                Some(s) => {
                    let ms = |x: f64| format!("{:.4} ms", x * 1e3);
                    let _ = writeln!(
                        out,
                        "{:>10} | {:>12} | {:>12} | {:>12} | {:>12} | {:>5}",
                        r,
                        ms(s.min),
                        ms(s.mean),
                        ms(s.max),
                        ms(s.std),
                        s.n
                    );
                }
                None => {
                    let _ = writeln!(out, "{r:>10} | no operation");
                }
            }
            if row.stats.is_some() && !row.no_operation.is_empty() {
                let _ = writeln!(out, "{:>10}   no operation: {}", "", row.no_operation.join(", "));
            }
        }
        out.push('\n');
    }
    out
}

/// Per scenario × function: oracle expectation against observed outcome.
pub fn operate_matrix_csv(results: &[ScenarioResult]) -> String {
    let mut out = String::from("scenario_id,function,expected,operated_repeats,repeats,agrees,margin\n");
    for res in results {
        for e in &res.expectations {
            let recs: Vec<&LatencyRecord> = res.records.iter().filter(|r| r.function == e.function).collect();
            let operated = recs.iter().filter(|r| r.operated).count();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                res.scenario_id,
                e.function,
                e.operates,
                operated,
                recs.len(),
                matrix_agrees(res, e.function),
                e.margin
            );
        }
    }
    out
}

/// Every repeat did what the oracle predicts.
pub fn matrix_agrees(res: &ScenarioResult, f: FunctionId) -> bool {
    let Some(e) = res.expectation(f) else { return false };
    let recs: Vec<&LatencyRecord> = res.records.iter().filter(|r| r.function == f).collect();
    !recs.is_empty() && recs.iter().all(|r| r.operated == e.operates)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Property {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn property(name: &str, passed: bool, detail: String) -> Property {
    Property {
        name: name.into(),
        passed,
        detail,
    }
}

/// Means over the resistances where the function operated, ascending.
pub fn mean_trend(tables: &BTreeMap<FunctionId, Vec<TableRow>>, f: FunctionId) -> Vec<(f64, f64)> {
    tables
        .get(&f)
        .into_iter()
        .flatten()
        .filter_map(|row| row.stats.map(|s| (row.resistance_ohm, s.mean)))
        .collect()
}

fn trend_property(name: &str, trend: &[(f64, f64)]) -> Property {
    let passed = trend.len() >= 2 && trend.windows(2).all(|w| w[1].1 >= w[0].1);
    let detail = trend
        .iter()
        .map(|(r, m)| format!("{r} Ω: {:.4} ms", m * 1e3))
        .collect::<Vec<_>>()
        .join(", ");
    property(name, passed, detail)
}

/// Properties that decide the campaign's exit status.
pub fn evaluate(outcome: &CampaignOutcome, expected_scenarios: usize, repeats: usize) -> Vec<Property> {
    let results = &outcome.results;
    let tables = latency_tables(results);
    let per_scenario = repeats * CAMPAIGN_FUNCTIONS.len();
    let short: Vec<&str> = results
        .iter()
        .filter(|r| r.records.len() != per_scenario)
        .map(|r| r.scenario_id.as_str())
        .collect();
    let mut props = vec![property(
        "structure",
        results.len() == expected_scenarios && short.is_empty(),
        format!(
            "{} scenarios (expected {expected_scenarios}), {} records, {repeats} repeats per function{}",
            results.len(),
            outcome.records().count(),
            if short.is_empty() { String::new() } else { format!("; incomplete: {}", short.join(", ")) }
        ),
    )];

    let mismatches: Vec<String> = results
        .iter()
        .flat_map(|r| {
            CAMPAIGN_FUNCTIONS
                .into_iter()
                .filter(|&f| !matrix_agrees(r, f))
                .map(move |f| format!("{}/{f}", r.scenario_id))
        })
        .collect();
    props.push(property(
        "operate-matrix",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} cells agree with the oracle", results.len() * CAMPAIGN_FUNCTIONS.len())
        } else {
            format!("disagreeing cells: {}", mismatches.join(", "))
        },
    ));
    props.push(trend_property("pioc-trend", &mean_trend(&tables, FunctionId::Pioc)));
    props.push(trend_property("pdis-trend", &mean_trend(&tables, FunctionId::Pdis)));

    let insane: Vec<String> = tables
        .iter()
        .flat_map(|(f, rows)| {
            rows.iter()
                .filter(|r| r.stats.is_some_and(|s| !s.is_sane()))
                .map(move |r| format!("{f} {} Ω", r.resistance_ohm))
        })
        .collect();
    props.push(property("stats-sanity", insane.is_empty(), insane.join(", ")));

    let violations: Vec<String> = results
        .iter()
        .flat_map(|r| r.violations.iter().map(move |v| format!("{}: {v:?}", r.scenario_id)))
        .collect();
    props.push(property(
        "protocol",
        violations.is_empty(),
        if violations.is_empty() {
            "no st_num regressions, false trips, decode failures or event-order violations".into()
        } else {
            violations.join("; ")
        },
    ));
    props
}

#[derive(Serialize)]
struct Summary<'a> {
    scenarios: usize,
    records: usize,
    samples: u64,
    elapsed_s: f64,
    resumed_scenarios: usize,
    passed: bool,
    properties: &'a [Property],
    tables: &'a BTreeMap<FunctionId, Vec<TableRow>>,
}

/// Writes `results.csv`, `operate_matrix.csv`, `tables.txt` and
/// `summary.json` into `dir` and returns the evaluated properties.
pub fn write_bundle(dir: &Path, outcome: &CampaignOutcome, expected_scenarios: usize, repeats: usize) -> Result<Vec<Property>, Error> {
    fs::create_dir_all(dir)?;
    let tables = latency_tables(&outcome.results);
    let props = evaluate(outcome, expected_scenarios, repeats);
    fs::write(dir.join("results.csv"), results_csv(outcome.records()))?;
    fs::write(dir.join("operate_matrix.csv"), operate_matrix_csv(&outcome.results))?;
    fs::write(dir.join("tables.txt"), render_tables(&tables))?;
    let summary = Summary {
        scenarios: outcome.results.len(),
        records: outcome.records().count(),
        samples: outcome.samples(),
        elapsed_s: outcome.elapsed_s,
        resumed_scenarios: outcome.resumed,
        passed: props.iter().all(|p| p.passed),
        properties: &props,
        tables: &tables,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(props)
}
