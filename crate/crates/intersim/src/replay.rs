//! Reading traces back and checking them against the geometry and the
//! simulator.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use intersim_core::geometry::{Arm, Maneuver};
use intersim_core::kinematics::{Configuration, Scene, Status, VehicleDims, VehicleId, VehicleSpec};
use intersim_core::sim::{congested_pairs, detect_collision};
use intersim_core::{Case, NavigationPath, SimConfig};

use crate::batch::{run_one, BatchSpec};
use crate::config::parse_config;
use crate::output::{trace_records, TraceRecord};

#[derive(Clone, Debug, PartialEq)]
pub struct TraceFile {
    pub case: Case,
    pub master_seed: u64,
    pub run: u64,
    pub config: SimConfig,
    pub records: Vec<TraceRecord>,
}

fn header_value<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.split_whitespace()
        .find_map(|part| part.strip_prefix(key)?.strip_prefix('='))
        .ok_or_else(|| anyhow!("trace header lacks `{key}=`"))
}

pub fn parse_trace(text: &str) -> Result<TraceFile> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| anyhow!("empty trace"))?;
    let header = first.strip_prefix('#').ok_or_else(|| anyhow!("trace must start with a `#` header"))?;
    let case = Case::parse(header_value(header, "case")?)?;
    let master_seed: u64 = header_value(header, "seed")?.parse().context("bad seed")?;
    let run: u64 = header_value(header, "run")?.parse().context("bad run index")?;

    let mut config_text = String::new();
    let mut body = String::new();
    for line in lines {
        if let Some(c) = line.strip_prefix("#|") {
            config_text.push_str(c.strip_prefix(' ').unwrap_or(c));
            config_text.push('\n');
        } else if !line.starts_with('#') {
            body.push_str(line);
            body.push('\n');
        }
    }
    let config = parse_config(&config_text).context("embedded configuration")?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let records = reader
        .deserialize()
        .collect::<Result<Vec<TraceRecord>, _>>()
        .context("malformed trace row")?;
    if records.is_empty() {
        bail!("trace has no rows");
    }
    Ok(TraceFile {
        case,
        master_seed,
        run,
        config,
        records,
    })
}

pub fn load_trace(path: &Path) -> Result<TraceFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_trace(&text).with_context(|| format!("in {}", path.display()))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplayReport {
    pub steps: usize,
    pub vehicles: usize,
    pub recorded_collisions: usize,
    pub recomputed_collisions: usize,
    pub recorded_congestions: usize,
    pub recomputed_congestions: usize,
    /// Whether a fresh run from the recorded seed reproduces every row.
    pub rerun_matches: bool,
    pub issues: Vec<String>,
}

impl ReplayReport {
    pub fn is_consistent(&self) -> bool {
        self.issues.is_empty() && self.rerun_matches
    }
}

type Pair = (u32, u32);

fn ordered(a: u32, b: u32) -> Pair {
    (a.min(b), a.max(b))
}

/// Pairs recorded for `kind` at each step, read from the per-row event lists.
fn recorded_pairs(records: &[TraceRecord], kind: &str) -> BTreeSet<(usize, Pair)> {
    let mut out = BTreeSet::new();
    for r in records {
        for item in r.events.split(';').filter(|e| !e.is_empty()) {
            let Some(rest) = item.strip_prefix(kind).and_then(|x| x.strip_prefix(':')) else {
                continue;
            };
            for other in rest.split(',').filter_map(|o| o.parse::<u32>().ok()) {
                out.insert((r.step, ordered(r.id, other)));
            }
        }
    }
    out
}

fn spec_of(r: &TraceRecord, config: &SimConfig) -> Result<VehicleSpec> {
    let arm = Arm::parse(&r.arm).ok_or_else(|| anyhow!("unknown arm {:?}", r.arm))?;
    let maneuver = Maneuver::parse(&r.maneuver).ok_or_else(|| anyhow!("unknown maneuver {:?}", r.maneuver))?;
    Ok(VehicleSpec {
        id: VehicleId(r.id),
        dims: VehicleDims::new(r.length, r.width)?,
        path: NavigationPath::new(arm, maneuver, &config.layout),
    })
}

fn config_of(r: &TraceRecord) -> Result<Configuration> {
    Ok(Configuration {
        s: r.s,
        x: r.x,
        y: r.y,
        heading: r.heading,
        v: r.v,
        a: r.a,
        status: Status::parse(&r.status).ok_or_else(|| anyhow!("unknown status {:?}", r.status))?,
    })
}

/// Recomputes collisions and congestion from the recorded positions, then
/// re-runs the simulation from the recorded seed and compares row by row.
pub fn replay(trace: &TraceFile) -> Result<ReplayReport> {
    let records = &trace.records;
    let last = records.iter().map(|r| r.step).max().unwrap_or(0);
    let mut report = ReplayReport {
        steps: last,
        vehicles: records.iter().map(|r| r.id).collect::<BTreeSet<_>>().len(),
        ..Default::default()
    };

    let mut found_collisions = BTreeSet::new();
    let mut found_congestions = BTreeSet::new();
    for step in 1..=last {
        // Vehicles take part in a step if they had not departed before it.
        let mut specs = Vec::new();
        let mut configs = Vec::new();
        for prev in records.iter().filter(|r| r.step == step - 1 && !r.departed) {
            let now = records
                .iter()
                .find(|r| r.step == step && r.id == prev.id)
                .ok_or_else(|| anyhow!("vehicle {} has no row at step {step}", prev.id))?;
            specs.push(spec_of(now, &trace.config)?);
            configs.push(config_of(now)?);
        }
        let scene = Scene::new(&specs, &configs, &trace.config.layout);
        for (a, b) in detect_collision(&scene) {
            found_collisions.insert((step, ordered(a.0, b.0)));
        }
        for (a, b) in congested_pairs(&scene) {
            found_congestions.insert((step, ordered(a.0, b.0)));
        }
    }
    let recorded_collisions = recorded_pairs(records, "collision");
    let recorded_congestions = recorded_pairs(records, "congestion");
    report.recorded_collisions = recorded_collisions.len();
    report.recomputed_collisions = found_collisions.len();
    report.recorded_congestions = recorded_congestions.len();
    report.recomputed_congestions = found_congestions.len();
    for (step, (a, b)) in found_collisions.symmetric_difference(&recorded_collisions) {
        report.issues.push(format!(
            "collision of {a} and {b} at step {step} is {}",
            if recorded_collisions.contains(&(*step, (*a, *b))) { "recorded but not found" } else { "found but not recorded" }
        ));
    }
    for (step, (a, b)) in found_congestions.symmetric_difference(&recorded_congestions) {
        report.issues.push(format!("congestion of {a} and {b} at step {step} disagrees with the record"));
    }

    let spec = BatchSpec {
        case: trace.case,
        runs: trace.run + 1,
        master_seed: trace.master_seed,
        config: trace.config.clone(),
    };
    let fresh = trace_records(&run_one(&spec, trace.run, true)?);
    report.rerun_matches = fresh == *records;
    if !report.rerun_matches {
        let at = fresh.iter().zip(records).position(|(a, b)| a != b).unwrap_or(fresh.len().min(records.len()));
        report.issues.push(format!("re-run diverges from the trace at row {at}"));
    }
    Ok(report)
}
