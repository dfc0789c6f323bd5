//! Hand-computed values for geometry, kinematics, cost and game examples,
//! checked to 1e-9 relative tolerance.

use intersim_core::cost::{accumulated_cost, pair_penalty, priority_holder, safety_feature, step_cost, velocity_feature};
use intersim_core::game::{build_decision_game, exhaustive_solve, solve_backward_induction, TableGame, DEFAULT_ENUMERATION_LIMIT};
use intersim_core::geometry::{disk_set_distance, left_of, occupancy_disks, DiskSet, Pose, Vec2};
use intersim_core::kinematics::{infer_acceleration, next_config, Scene};
use intersim_core::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

macro_rules! assert_close {
    ($a:expr, $b:expr) => {{
        let (a, b) = ($a, $b);
        assert!(close(a, b), "{} != {}", a, b);
    }};
}

fn spec(id: u32, arm: Arm, m: Maneuver, length: f64, width: f64) -> VehicleSpec {
    VehicleSpec {
        id: VehicleId(id),
        dims: VehicleDims::new(length, width).unwrap(),
        path: NavigationPath::new(arm, m, &IntersectionLayout::default()),
    }
}

#[test]
fn covering_disks_of_a_standard_car() {
    let d = occupancy_disks(Pose::new(0.0, 0.0, 0.0), 4.5, 1.8).unwrap();
    let expect = [Vec2::new(-1.5, 0.0), Vec2::new(0.0, 0.0), Vec2::new(1.5, 0.0)];
    for (c, e) in d.centers.iter().zip(expect) {
        assert!((c.x - e.x).abs() < 1e-12 && (c.y - e.y).abs() < 1e-12);
    }
    assert_close!(d.radius, (0.75f64 * 0.75 + 0.9 * 0.9).sqrt());
    assert!((d.radius - 1.1716).abs() < 1e-4);
    // every corner and edge sample is covered
    for i in 0..=40 {
        for j in 0..=8 {
            let p = Vec2::new(-2.25 + 4.5 * i as f64 / 40.0, -0.9 + 1.8 * j as f64 / 8.0);
            assert!(d.contains(p), "{p:?} uncovered");
        }
    }
}

#[test]
fn length_three_widths_gives_w_over_root_two() {
    for (w, heading) in [(1.0, 0.3), (1.8, -2.0), (2.1, 1.0)] {
        let d = occupancy_disks(Pose::new(3.0, -4.0, heading), 3.0 * w, w).unwrap();
        assert_close!(d.radius, w / 2f64.sqrt());
    }
}

#[test]
fn distance_between_unit_disk_sets() {
    let a = DiskSet {
        centers: [Vec2::new(0.0, 0.0); 3],
        radius: 1.0,
    };
    let b = DiskSet {
        centers: [Vec2::new(5.0, 0.0); 3],
        radius: 1.0,
    };
    assert_close!(disk_set_distance(&a, &b), 3.0);
}

#[test]
fn west_is_left_of_south() {
    assert!(left_of(Arm::West, Arm::South).unwrap());
}

#[test]
fn constant_acceleration_step() {
    let v = spec(0, Arm::South, Maneuver::Straight, 4.5, 1.8);
    let layout = IntersectionLayout::default();
    let c = Configuration::place(5.0, 2.0, &v.path, &v.dims, &layout);
    let n = next_config(&c, 10.0, 0.1, &v.path, &v.dims, &layout);
    assert_close!(n.v, 3.0);
    assert_close!(n.s - c.s, 0.25);
}

#[test]
fn stopping_profile_and_its_inference() {
    let v = spec(0, Arm::South, Maneuver::Straight, 4.5, 1.8);
    let layout = IntersectionLayout::default();
    let c = Configuration::place(5.0, 2.0, &v.path, &v.dims, &layout);
    let n = next_config(&c, -50.0, 0.1, &v.path, &v.dims, &layout);
    assert_eq!(n.v, 0.0);
    // stops after 0.04 s having covered 2 * 0.04 / 2
    assert_close!(n.s - c.s, 0.04);
    assert_close!(infer_acceleration(&c, &n, 0.1), -50.0);
}

#[test]
fn just_past_the_exit_is_leaving() {
    let v = spec(0, Arm::East, Maneuver::TurnLeft, 4.5, 1.8);
    let layout = IntersectionLayout::default();
    let c = Configuration::place(v.path.box_exit_s() + 0.1, 0.0, &v.path, &v.dims, &layout);
    assert_eq!(c.status, Status::Leaving);
}

#[test]
fn cost_examples() {
    let p = CostParams::default();
    assert_close!(pair_penalty(Status::Inside, true, 10.0, false, &p), 4500.0);
    assert_close!(velocity_feature(0.0, &p), 278.89);
    assert_close!(velocity_feature(17.7, &p), 1000.0);
    assert_eq!(velocity_feature(16.7, &p), 0.0);
}

/// A North vehicle with two opponents placed so both gaps are exactly 10 m.
#[test]
fn two_opponents_add_up() {
    let layout = IntersectionLayout::default();
    let me = spec(0, Arm::South, Maneuver::Straight, 3.0, 1.0);
    let west = spec(1, Arm::West, Maneuver::Straight, 3.0, 1.0);
    let east = spec(2, Arm::East, Maneuver::Straight, 3.0, 1.0);
    let c0 = Configuration::place(me.path.box_entry_s() + 1.0, 16.7, &me.path, &me.dims, &layout);
    let disks0 = me.disks(&c0);
    // slide each opponent along its path until the gap is 10 m
    let find = |s: &VehicleSpec| {
        let (mut lo, mut hi) = (0.0, s.path.box_entry_s() + 7.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let c = Configuration::place(mid, 0.0, &s.path, &s.dims, &layout);
            if disk_set_distance(&disks0, &s.disks(&c)) > 10.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Configuration::place(0.5 * (lo + hi), 0.0, &s.path, &s.dims, &layout)
    };
    let specs = [me, west, east];
    let configs = [c0, find(&west), find(&east)];
    let scene = Scene::new(&specs, &configs, &layout);
    for k in 1..3 {
        assert!((disk_set_distance(&disks0, &specs[k].disks(&configs[k])) - 10.0).abs() < 1e-9);
    }
    let order = PriorityOrder::new(vec![VehicleId(1), VehicleId(0), VehicleId(2)]).unwrap();
    // Vehicle 0 is inside the box; the order alone must name the holder here.
    let p = CostParams {
        inside_holds_priority: false,
        ..CostParams::default()
    };
    let holder = priority_holder(&scene, &order, &p);
    assert_eq!(holder, Some(VehicleId(1)));
    let safety = safety_feature(0, &scene, holder, &p);
    assert!((safety - 9000.0).abs() < 1e-5, "{safety}");
    // moving at the limit, the step cost is the safety term alone
    assert_eq!(step_cost(0, &scene, holder, &p), safety);
}

#[test]
fn leaving_vehicle_step_costs() {
    let layout = IntersectionLayout::default();
    let v = spec(0, Arm::North, Maneuver::Straight, 4.5, 1.8);
    let s = v.path.box_exit_s() + 2.0;
    let order = PriorityOrder::new(vec![VehicleId(0)]).unwrap();
    let p = CostParams::default();
    for (speed, want) in [(16.7, 0.0f64), (0.0, 278.89)] {
        let specs = [v];
        let configs = [Configuration::place(s, speed, &v.path, &v.dims, &layout)];
        let scene = Scene::new(&specs, &configs, &layout);
        assert_close!(step_cost(0, &scene, priority_holder(&scene, &order, &p), &p), want);
    }
}

#[test]
fn discounted_unit_costs_sum_to_2_44() {
    // c_under = 1 and a speed 1 m/s under the limit give a step cost of 1.
    let layout = IntersectionLayout::default();
    let v = spec(0, Arm::North, Maneuver::Straight, 4.5, 1.8);
    let specs = [v];
    let configs = [Configuration::place(3.0, 15.7, &v.path, &v.dims, &layout)];
    let scene = Scene::new(&specs, &configs, &layout);
    let order = PriorityOrder::new(vec![VehicleId(0)]).unwrap();
    let zero: &[f64] = &[0.0, 0.0, 0.0];
    let k = accumulated_cost(0, &scene, &order, &[zero], &CostParams::default()).unwrap();
    assert_close!(k, 2.44);
    assert_close!(k, 1.0 + 0.8 + 0.64);
}

#[test]
fn two_player_sequential_example() {
    // strategies A = 0, B = 1; player 0 leads
    let h1 = |p: &[usize]| match (p[0], p[1]) {
        (0, 0) => 5.0,
        (0, 1) => 0.0,
        (1, 0) => 1.0,
        _ => 4.0,
    };
    let h2 = |p: &[usize]| match (p[0], p[1]) {
        (0, 0) => 1.0,
        (0, 1) => 2.0,
        (1, 0) => 0.0,
        _ => 3.0,
    };
    let g = TableGame::from_fn(vec![0, 1], 2, |j, p| if j == 0 { h1(p) } else { h2(p) }).unwrap();
    assert_eq!(solve_backward_induction(&g), vec![1, 0]);
    assert_eq!(exhaustive_solve(&g, DEFAULT_ENUMERATION_LIMIT).unwrap(), vec![1, 0]);
}

#[test]
fn lone_vehicle_picks_strong_acceleration() {
    let layout = IntersectionLayout::default();
    let v = spec(0, Arm::West, Maneuver::TurnRight, 4.5, 1.8);
    let specs = [v];
    let configs = [Configuration::place(2.25, 0.0, &v.path, &v.dims, &layout)];
    let scene = Scene::new(&specs, &configs, &layout);
    let order = PriorityOrder::new(vec![VehicleId(0)]).unwrap();
    let patterns = PatternSet::standard();
    let g = build_decision_game(&scene, &order, &CostParams::default(), &patterns).unwrap();
    let profile = solve_backward_induction(&g);
    assert_eq!(patterns.get(profile[0]), &[20.0, 0.0, 0.0][..]);
    // the hand rollout of the four patterns
    let costs: Vec<f64> = (0..patterns.len())
        .map(|i| accumulated_cost(0, &scene, &order, &[patterns.get(i)], &CostParams::default()).unwrap())
        .collect();
    // braking at rest is standing still
    assert!(costs[3] < costs[2] && costs[2] < costs[1]);
    assert_eq!(costs[0], costs[1]);
    // [0,0,0] at rest: 278.89 * 2.44
    assert_close!(costs[1], 278.89 * 2.44);
    // [20,0,0]: speeds 0, 2, 2
    let expect = 278.89 + (0.8 + 0.64) * (16.7f64 - 2.0).powi(2);
    assert_close!(costs[3], expect);
}
