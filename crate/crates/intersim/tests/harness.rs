use intersim::batch::{run_batch, run_one, BatchOptions, BatchSpec};
use intersim::config::{parse_config, serialize_config};
use intersim::output::{trace_records, write_stats, write_trace_csv, STATS_HEADER};
use intersim::replay::{parse_trace, replay};
use intersim_core::{AggregateStats, Case, SimConfig};
use proptest::prelude::*;

fn spec(case: &str, runs: u64, seed: u64) -> BatchSpec {
    BatchSpec {
        case: Case::parse(case).unwrap(),
        runs,
        master_seed: seed,
        config: SimConfig::default(),
    }
}

#[test]
fn parallel_and_serial_batches_agree() {
    let s = spec("3'", 24, 5);
    let par = run_batch(&s, BatchOptions { record_traces: false, parallel: true }).unwrap();
    let ser = run_batch(&s, BatchOptions { record_traces: false, parallel: false }).unwrap();
    assert_eq!(par.results, ser.results);
    assert_eq!(par.stats, ser.stats);
}

#[test]
fn stats_of_two_halves_merge_to_the_whole() {
    let s = spec("4", 20, 11);
    let whole = run_batch(&s, BatchOptions::default()).unwrap();
    let first: AggregateStats = whole.results[..9].iter().collect();
    let second: AggregateStats = whole.results[9..].iter().collect();
    assert_eq!(first.merge(second), whole.stats);
    assert_eq!(whole.stats.runs, 20);
}

#[test]
fn runs_depend_only_on_seed_and_index() {
    let a = run_one(&spec("2", 3, 9), 2, false).unwrap();
    let b = run_batch(&spec("2", 5, 9), BatchOptions::default()).unwrap();
    assert_eq!(a, b.results[2]);
    let c = run_one(&spec("2", 3, 10), 2, false).unwrap();
    assert_ne!(a.seed, c.seed);
}

#[test]
fn stats_file_has_the_fixed_header() {
    let b = run_batch(&spec("1", 4, 1), BatchOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_stats(&mut buf, &[b]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), STATS_HEADER.join(","));
    assert!(lines.next().unwrap().starts_with("1,0.00,"));
}

fn traced(case: &str, run: u64, seed: u64) -> (String, intersim_core::SimResult) {
    let s = spec(case, run + 1, seed);
    let r = run_one(&s, run, true).unwrap();
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &r, seed, &s.config).unwrap();
    (String::from_utf8(buf).unwrap(), r)
}

#[test]
fn traces_replay_consistently() {
    // Case 4 under this seed includes collisions, so both branches are covered.
    let mut collisions = 0;
    for run in 0..8 {
        let (text, r) = traced("4", run, 42);
        let t = parse_trace(&text).unwrap();
        assert_eq!(t.records, trace_records(&r));
        let report = replay(&t).unwrap();
        assert!(report.is_consistent(), "run {run}: {:?}", report.issues);
        assert_eq!(report.recorded_collisions, r.events_of(intersim_core::sim::EventKind::Collision).count());
        collisions += report.recorded_collisions;
    }
    assert!(collisions > 0);
}

#[test]
fn tampered_traces_are_flagged() {
    let (text, _) = traced("1", 0, 3);
    let mut t = parse_trace(&text).unwrap();
    // Move one vehicle onto another early in the run.
    let rows: Vec<usize> = (0..t.records.len()).filter(|&i| t.records[i].step == 5).collect();
    let (a, b) = (rows[0], rows[1]);
    let (x, y) = (t.records[a].x, t.records[a].y);
    t.records[b].x = x;
    t.records[b].y = y;
    let report = replay(&t).unwrap();
    assert!(!report.is_consistent());
    assert!(!report.rerun_matches);
    assert!(report.issues.iter().any(|i| i.contains("found but not recorded")));
}

#[test]
fn embedded_configuration_is_used_on_replay() {
    let mut s = spec("3", 1, 8);
    s.config.unlock_probability = 0.5;
    s.config.cost.leaving_cedes_priority = false;
    let r = run_one(&s, 0, true).unwrap();
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &r, 8, &s.config).unwrap();
    let t = parse_trace(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(t.config, s.config);
    assert!(replay(&t).unwrap().is_consistent());
}

fn arb_config() -> impl Strategy<Value = SimConfig> {
    (
        (2.5f64..4.5, 0.0f64..3.0, 10.0f64..40.0),
        (1.0f64..100.0, 5.0f64..40.0, 0.1f64..1.0, 0.0f64..=1.0),
        (0.0f64..=1.0, 0.0f64..=1.0, 1usize..2000, any::<[bool; 3]>()),
        prop::collection::vec(prop::collection::vec(-60.0f64..30.0, 3), 1..6),
    )
        .prop_map(|((lane, extra, arm), (cn, safe, disc, unlock), (fit, tol, cap, [clears, cedes, inside]), patterns)| {
            let mut c = SimConfig::default();
            c.layout.lane_width = lane;
            c.layout.box_half_width = lane + extra;
            c.layout.arm_length = arm;
            c.cost.c_normal = cn;
            c.cost.safe_distance = safe;
            c.cost.discount = disc;
            c.cost.leaving_clears_conflict = clears;
            c.cost.leaving_cedes_priority = cedes;
            c.cost.inside_holds_priority = inside;
            c.unlock_probability = unlock;
            c.fit_acceptance = fit;
            c.prediction_tolerance = tol * 1e-3;
            c.step_cap = cap;
            c.patterns = intersim_core::PatternSet::new(patterns).unwrap();
            c
        })
        .prop_filter("valid", |c| c.validate().is_ok())
}

proptest! {
    #[test]
    fn config_files_round_trip(c in arb_config()) {
        let text = serialize_config(&c).unwrap();
        prop_assert_eq!(parse_config(&text).unwrap(), c);
    }
}
