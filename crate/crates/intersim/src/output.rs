//! Result files: run summaries, Table-1 style statistics, traces and plots.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::Result;
use intersim_core::kinematics::VehicleId;
use intersim_core::sim::{Event, EventKind, TraceRow};
use intersim_core::{AggregateStats, NavigationPath, SimConfig, SimResult};
use serde::{Deserialize, Serialize};

use crate::batch::Batch;
use crate::config::serialize_config;

/// Header of the statistics file, one row per case.
pub const STATS_HEADER: [&str; 6] = [
    "case",
    "collision_rate_pct",
    "congestion_rate_pct",
    "avg_total_steps",
    "timeout_count",
    "runs",
];

fn fixed(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.2}")
    }
}

pub fn write_stats<W: Write>(w: W, batches: &[Batch]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(STATS_HEADER)?;
    for b in batches {
        let s = &b.stats;
        out.write_record([
            b.case.name(),
            fixed(s.collision_rate_pct()),
            fixed(s.congestion_rate_pct()),
            fixed(s.avg_total_steps()),
            s.timeouts.to_string(),
            s.runs.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Human-readable results table, one row per case.
pub fn table_report(batches: &[Batch], dt: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<5} {:>18} {:>19} {:>22} {:>9} {:>6}",
        "case", "collision rate (%)", "congestion rate (%)", "avg total time steps", "timeouts", "runs"
    );
    for b in batches {
        let st: &AggregateStats = &b.stats;
        let avg = st.avg_total_steps();
        let steps = if avg.is_nan() {
            "-".to_string()
        } else {
            format!("{avg:.2} ({:.3}s)", avg * dt)
        };
        let _ = writeln!(
            s,
            "{:<5} {:>18.2} {:>19.2} {:>22} {:>9} {:>6}",
            b.case.name(),
            st.collision_rate_pct(),
            st.congestion_rate_pct(),
            steps,
            st.timeouts,
            st.runs
        );
    }
    s
}

#[derive(Serialize)]
struct SummaryRow {
    case: String,
    run: u64,
    seed: u64,
    collided: bool,
    congested: bool,
    timed_out: bool,
    total_steps: Option<usize>,
    steps_run: usize,
    mean_leaving_step: Option<f64>,
    collisions: String,
    games_solved: usize,
}

fn pairs(events: &[Event], kind: EventKind) -> String {
    events
        .iter()
        .filter(|e| e.kind == kind)
        .map(|e| {
            let ids: Vec<String> = e.vehicles.iter().map(|v| v.0.to_string()).collect();
            format!("{}@{}", ids.join("-"), e.step)
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// One line per run.
pub fn write_summary<W: Write>(w: W, results: &[SimResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in results {
        out.serialize(SummaryRow {
            case: r.case.map(|c| c.name()).unwrap_or_default(),
            run: r.run_index,
            seed: r.seed,
            collided: r.collided,
            congested: r.congested,
            timed_out: r.timed_out,
            total_steps: r.total_steps,
            steps_run: r.steps_run,
            mean_leaving_step: r.mean_leaving_step(),
            collisions: pairs(&r.events, EventKind::Collision),
            games_solved: r.games_solved,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// One trace row as written to files. Floats use the shortest form that
/// reads back to the same value, so replays see the exact positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub id: u32,
    pub kind: String,
    pub arm: String,
    pub maneuver: String,
    pub length: f64,
    pub width: f64,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    pub a: f64,
    pub status: String,
    /// Priority order as vehicle ids, highest priority first; `-` if none.
    pub order: String,
    pub deadlock_flag: bool,
    pub departed: bool,
    /// `kind` or `kind:other` entries separated by `;`.
    pub events: String,
}

fn row_events(events: &[Event], step: usize, id: VehicleId) -> String {
    let mut out = Vec::new();
    for e in events.iter().filter(|e| e.step == step) {
        if e.vehicles.is_empty() {
            out.push(e.kind.name().to_string());
        } else if e.vehicles.contains(&id) {
            let others: Vec<String> = e.vehicles.iter().filter(|v| **v != id).map(|v| v.0.to_string()).collect();
            if others.is_empty() {
                out.push(e.kind.name().to_string());
            } else {
                out.push(format!("{}:{}", e.kind.name(), others.join(",")));
            }
        }
    }
    out.join(";")
}

pub fn order_digits(order: &Option<Vec<VehicleId>>) -> String {
    match order {
        None => "-".to_string(),
        Some(o) => o.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(" "),
    }
}

pub fn trace_records(result: &SimResult) -> Vec<TraceRecord> {
    result
        .trace
        .iter()
        .map(|r: &TraceRow| TraceRecord {
            step: r.step,
            id: r.id.0,
            kind: r.kind.name().to_string(),
            arm: r.arm.name().to_string(),
            maneuver: r.maneuver.name().to_string(),
            length: r.length,
            width: r.width,
            s: r.s,
            x: r.x,
            y: r.y,
            heading: r.heading,
            v: r.v,
            a: r.a,
            status: r.status.name().to_string(),
            order: order_digits(&r.order),
            deadlock_flag: r.deadlock_flag,
            departed: r.departed,
            events: row_events(&result.events, r.step, r.id),
        })
        .collect()
}

/// Delimited trace: a `# case= seed= run=` line, the configuration as `#|`
/// lines, then one row per vehicle and step.
pub fn write_trace_csv<W: Write>(mut w: W, result: &SimResult, master_seed: u64, config: &SimConfig) -> Result<()> {
    let case = result.case.map(|c| c.name()).unwrap_or_else(|| "custom".to_string());
    writeln!(w, "# case={case} seed={master_seed} run={}", result.run_index)?;
    for line in serialize_config(config)?.lines() {
        writeln!(w, "#| {line}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    for rec in trace_records(result) {
        out.serialize(rec)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonHeader<'a> {
    case: &'a str,
    seed: u64,
    run: u64,
    collided: bool,
    congested: bool,
    total_steps: Option<usize>,
}

/// Structured trace: a header object, then one object per row.
pub fn write_trace_jsonl<W: Write>(mut w: W, result: &SimResult, master_seed: u64) -> Result<()> {
    let case = result.case.map(|c| c.name()).unwrap_or_else(|| "custom".to_string());
    let header = JsonHeader {
        case: &case,
        seed: master_seed,
        run: result.run_index,
        collided: result.collided,
        congested: result.congested,
        total_steps: result.total_steps,
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    for rec in trace_records(result) {
        writeln!(w, "{}", serde_json::to_string(&rec)?)?;
    }
    Ok(())
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Top view of one run: roads, the conflict box, every navigation path and
/// the vehicle centers at each step. Collisions are marked with a cross.
pub fn plot_svg(result: &SimResult, config: &SimConfig) -> String {
    let layout = config.layout;
    let reach = layout.box_half_width + layout.arm_length + 6.0;
    let scale = 12.0;
    let size = 2.0 * reach * scale;
    let px = |x: f64| (x + reach) * scale;
    let py = |y: f64| (reach - y) * scale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{h:.0}" viewBox="0 0 {size:.0} {h:.0}">"#,
        h = size + 70.0
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{size:.0}" height="{:.0}" fill="#eef3e8"/>"##, size + 70.0);
    let road = 2.0 * layout.box_half_width * scale;
    let _ = writeln!(
        s,
        r##"<rect x="{:.2}" y="0" width="{road:.2}" height="{size:.2}" fill="#c8c8c8"/>"##,
        px(-layout.box_half_width)
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="{:.2}" width="{size:.2}" height="{road:.2}" fill="#c8c8c8"/>"##,
        py(layout.box_half_width)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{0:.2}" y="{0:.2}" width="{road:.2}" height="{road:.2}" fill="#f4c7c3" stroke="#c0392b" stroke-width="1"/>"##,
        px(-layout.box_half_width)
    );

    let mut ids: Vec<VehicleId> = result.trace.iter().map(|r| r.id).collect();
    ids.sort();
    ids.dedup();
    for (n, id) in ids.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let rows: Vec<&TraceRow> = result.trace.iter().filter(|r| r.id == *id).collect();
        let Some(first) = rows.first() else { continue };
        let path = NavigationPath::new(first.arm, first.maneuver, &layout);
        let samples = 120;
        let points: Vec<String> = (0..=samples)
            .map(|i| {
                let p = path.pose_at(path.total_length() * i as f64 / samples as f64);
                format!("{:.2},{:.2}", px(p.x), py(p.y))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
            points.join(" ")
        );
        for r in rows.iter().filter(|r| !r.departed) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}" fill-opacity="0.7"><title>vehicle {} step {} v={:.2}</title></circle>"#,
                px(r.x),
                py(r.y),
                id.0,
                r.step,
                r.v
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="10" y="{:.0}" font-family="sans-serif" font-size="13" fill="{color}">vehicle {}: {} from {}, {}</text>"#,
            size + 16.0 + 13.0 * n as f64,
            id.0,
            first.kind.name(),
            first.arm.name(),
            first.maneuver.name()
        );
    }
    for e in result.events.iter().filter(|e| e.kind == EventKind::Collision) {
        for id in &e.vehicles {
            if let Some(r) = result.trace.iter().find(|r| r.step == e.step && r.id == *id) {
                let (x, y) = (px(r.x), py(r.y));
                let _ = writeln!(
                    s,
                    r#"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="black" stroke-width="2"/>"#,
                    x - 6.0,
                    y - 6.0,
                    x + 6.0,
                    y + 6.0,
                    x - 6.0,
                    y + 6.0,
                    x + 6.0,
                    y - 6.0
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
