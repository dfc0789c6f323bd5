//! World stepping, incident detection and run results.

use alloc::vec;
use alloc::vec::Vec;

use crate::agent::{AgentState, DriverKind};
use crate::config::SimConfig;
use crate::error::Error;
use crate::game::EquilibriumCache;
use crate::geometry::{disk_set_distance, routes_conflict, Arm, Maneuver, NavigationPath};
use crate::kinematics::{infer_acceleration_with, next_config, Configuration, Scene, Status, VehicleId, VehicleSpec};
use crate::priority::{init_angelic, init_selfish, right_of_way_changed, PriorityOrder};
use crate::rng::stream;
use crate::scenario::{agent_stream, Case, Scenario};
use crate::Result;

#[derive(Clone, Debug)]
pub struct Vehicle {
    pub spec: VehicleSpec,
    pub kind: DriverKind,
    pub config: Configuration,
    pub agent: AgentState,
    /// Reached the end of its path; takes no further part.
    pub departed: bool,
    pub leaving_step: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Collision,
    Congestion,
    Deadlock,
    Unlock,
    Inside,
    Leaving,
    Departed,
    Timeout,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::Collision,
        EventKind::Congestion,
        EventKind::Deadlock,
        EventKind::Unlock,
        EventKind::Inside,
        EventKind::Leaving,
        EventKind::Departed,
        EventKind::Timeout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Collision => "collision",
            EventKind::Congestion => "congestion",
            EventKind::Deadlock => "deadlock",
            EventKind::Unlock => "unlock",
            EventKind::Inside => "inside",
            EventKind::Leaving => "leaving",
            EventKind::Departed => "departed",
            EventKind::Timeout => "timeout",
        }
    }

    pub fn parse(s: &str) -> Option<EventKind> {
        EventKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub step: usize,
    pub kind: EventKind,
    pub vehicles: Vec<VehicleId>,
}

/// One vehicle's state after `step` steps (step 0 is the initial state).
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub id: VehicleId,
    pub kind: DriverKind,
    pub arm: Arm,
    pub maneuver: Maneuver,
    pub length: f64,
    pub width: f64,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    /// Acceleration applied during the step that led here.
    pub a: f64,
    pub status: Status,
    pub order: Option<Vec<VehicleId>>,
    pub deadlock_flag: bool,
    pub departed: bool,
}

#[derive(Clone, Debug)]
pub struct World {
    pub t: usize,
    pub vehicles: Vec<Vehicle>,
    pub config: SimConfig,
    pub games_solved: usize,
    pub last_mover_violations: usize,
}

/// Pairs whose occupancy disks touch or overlap.
pub fn detect_collision(scene: &Scene<'_>) -> Vec<(VehicleId, VehicleId)> {
    let disks: Vec<_> = scene.specs.iter().zip(scene.configs).map(|(s, c)| s.disks(c)).collect();
    let mut out = Vec::new();
    for i in 0..scene.len() {
        for k in i + 1..scene.len() {
            if disk_set_distance(&disks[i], &disks[k]) == 0.0 {
                out.push((scene.specs[i].id, scene.specs[k].id));
            }
        }
    }
    out
}

/// Pairs inside the box at the same time on conflicting paths.
pub fn congested_pairs(scene: &Scene<'_>) -> Vec<(VehicleId, VehicleId)> {
    let mut out = Vec::new();
    for i in 0..scene.len() {
        for k in i + 1..scene.len() {
            let inside = scene.configs[i].status == Status::Inside && scene.configs[k].status == Status::Inside;
            if inside && routes_conflict(scene.specs[i].path.route(), scene.specs[k].path.route()) {
                out.push((scene.specs[i].id, scene.specs[k].id));
            }
        }
    }
    out
}

pub fn detect_congestion(scene: &Scene<'_>) -> bool {
    !congested_pairs(scene).is_empty()
}

impl World {
    pub fn new(scenario: &Scenario, seed: u64) -> Result<World> {
        scenario.validate()?;
        let config = scenario.config.clone();
        let layout = config.layout;
        let specs: Vec<VehicleSpec> = scenario
            .vehicles
            .iter()
            .map(|v| VehicleSpec {
                id: v.id,
                dims: v.dims,
                path: NavigationPath::new(v.arm, v.maneuver, &layout),
            })
            .collect();
        let mut configs = Vec::with_capacity(specs.len());
        for (v, spec) in scenario.vehicles.iter().zip(&specs) {
            let s = v.initial_s.unwrap_or(v.dims.length / 2.0);
            if !(0.0..=spec.path.total_length()).contains(&s) {
                return Err(Error::InvalidScenario("initial position lies off the path".into()));
            }
            configs.push(Configuration::place(s, v.initial_speed, &spec.path, &spec.dims, &layout));
        }
        let scene = Scene::new(&specs, &configs, &layout);
        let ids: Vec<VehicleId> = scene.ids().collect();

        let mut vehicles = Vec::with_capacity(specs.len());
        for ((v, spec), c) in scenario.vehicles.iter().zip(&specs).zip(&configs) {
            let mut rng = stream(seed, agent_stream(v.id));
            let order = match (&v.initial_order, v.kind) {
                (_, DriverKind::Irrational) => None,
                (Some(given), _) => {
                    let o = PriorityOrder::new(given.clone())?;
                    if !o.covers(&ids) {
                        return Err(Error::InvalidScenario("initial orders must rank every vehicle".into()));
                    }
                    Some(o)
                }
                (None, DriverKind::Angelic) => Some(init_angelic(&scene, config.closer_margin, &mut rng)?),
                (None, _) => Some(init_selfish(v.id, &ids, &mut rng)?),
            };
            vehicles.push(Vehicle {
                spec: *spec,
                kind: v.kind,
                config: *c,
                agent: AgentState::new(v.kind, v.id, order, rng)?,
                departed: false,
                leaving_step: (c.status == Status::Leaving).then_some(0),
            });
        }
        Ok(World {
            t: 0,
            vehicles,
            config,
            games_solved: 0,
            last_mover_violations: 0,
        })
    }

    fn active(&self) -> Vec<usize> {
        (0..self.vehicles.len()).filter(|&i| !self.vehicles[i].departed).collect()
    }

    /// Whether every vehicle has reached the leaving part of its path.
    pub fn all_leaving(&self) -> bool {
        self.vehicles.iter().all(|v| v.config.status == Status::Leaving)
    }

    pub fn trace_rows(&self) -> Vec<TraceRow> {
        self.vehicles
            .iter()
            .map(|v| TraceRow {
                step: self.t,
                id: v.spec.id,
                kind: v.kind,
                arm: v.spec.path.entry_arm,
                maneuver: v.spec.path.maneuver,
                length: v.spec.dims.length,
                width: v.spec.dims.width,
                s: v.config.s,
                x: v.config.x,
                y: v.config.y,
                heading: v.config.heading,
                v: v.config.v,
                a: v.config.a,
                status: v.config.status,
                order: v.agent.order.as_ref().map(|o| o.ids().to_vec()),
                deadlock_flag: v.agent.deadlock_flag,
                departed: v.departed,
            })
            .collect()
    }

    /// Advance the world by one decision period and report what happened.
    pub fn step(&mut self) -> Result<Vec<Event>> {
        let config = &self.config;
        let layout = config.layout;
        let dt = config.cost.dt;
        let active = self.active();
        let specs: Vec<VehicleSpec> = active.iter().map(|&i| self.vehicles[i].spec).collect();
        let before: Vec<Configuration> = active.iter().map(|&i| self.vehicles[i].config).collect();
        let mut cache = EquilibriumCache::new(&Scene::new(&specs, &before, &layout), &config.cost, &config.patterns);
        let step = self.t + 1;
        let mut events = Vec::new();

        let mut accelerations = Vec::with_capacity(active.len());
        let mut deadlocked = Vec::new();
        for &i in &active {
            let v = &mut self.vehicles[i];
            let d = v.agent.decide(&mut cache, config)?;
            if d.deadlock {
                deadlocked.push(v.spec.id);
            }
            if d.unlocked {
                events.push(Event {
                    step,
                    kind: EventKind::Unlock,
                    vehicles: vec![v.spec.id],
                });
            }
            accelerations.push(d.acceleration);
        }
        if !deadlocked.is_empty() {
            events.push(Event {
                step,
                kind: EventKind::Deadlock,
                vehicles: deadlocked,
            });
        }

        let after: Vec<Configuration> = specs
            .iter()
            .zip(&before)
            .zip(&accelerations)
            .map(|((s, c), a)| next_config(c, *a, dt, &s.path, &s.dims, &layout))
            .collect();
        let observed: Vec<f64> = before
            .iter()
            .zip(&after)
            .map(|(b, a)| infer_acceleration_with(b, a, dt, config.stopping_deceleration))
            .collect();

        for (k, &i) in active.iter().enumerate() {
            let v = &mut self.vehicles[i];
            let (old, new) = (before[k].status, after[k].status);
            if old != new {
                let kind = if new == Status::Inside { EventKind::Inside } else { EventKind::Leaving };
                events.push(Event {
                    step,
                    kind,
                    vehicles: vec![v.spec.id],
                });
                if new == Status::Leaving {
                    v.leaving_step = Some(step);
                }
            }
            v.config = after[k];
            if after[k].s >= v.spec.path.total_length() {
                v.departed = true;
                events.push(Event {
                    step,
                    kind: EventKind::Departed,
                    vehicles: vec![v.spec.id],
                });
            }
        }

        let all_now = Scene::new(&specs, &after, &layout);
        for (a, b) in detect_collision(&all_now) {
            events.push(Event {
                step,
                kind: EventKind::Collision,
                vehicles: vec![a, b],
            });
        }
        for (a, b) in congested_pairs(&all_now) {
            events.push(Event {
                step,
                kind: EventKind::Congestion,
                vehicles: vec![a, b],
            });
        }

        let remaining: Vec<usize> = (0..active.len()).filter(|&k| !self.vehicles[active[k]].departed).collect();
        let cur_specs: Vec<VehicleSpec> = remaining.iter().map(|&k| specs[k]).collect();
        let cur_configs: Vec<Configuration> = remaining.iter().map(|&k| after[k]).collect();
        let current = Scene::new(&cur_specs, &cur_configs, &layout);
        let changed = right_of_way_changed(&Scene::new(&specs, &before, &layout), &current);
        for &k in &remaining {
            let v = &mut self.vehicles[active[k]];
            v.agent.observe(&mut cache, &observed, &current, changed, config)?;
        }

        self.games_solved += cache.games_solved();
        self.last_mover_violations += cache.last_mover_violations();
        self.t = step;
        Ok(events)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub record_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { record_trace: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub case: Option<Case>,
    pub run_index: u64,
    pub seed: u64,
    pub collided: bool,
    pub congested: bool,
    pub timed_out: bool,
    /// Steps until the last vehicle started leaving; only for runs that
    /// neither collided nor timed out.
    pub total_steps: Option<usize>,
    pub steps_run: usize,
    pub kinds: Vec<(VehicleId, DriverKind)>,
    pub leaving_steps: Vec<(VehicleId, Option<usize>)>,
    pub events: Vec<Event>,
    /// Empty unless requested.
    pub trace: Vec<TraceRow>,
    pub games_solved: usize,
    pub last_mover_violations: usize,
}

impl SimResult {
    /// Average step at which a vehicle started leaving, over completed runs.
    pub fn mean_leaving_step(&self) -> Option<f64> {
        self.total_steps?;
        let n = self.leaving_steps.len();
        let sum: usize = self.leaving_steps.iter().filter_map(|(_, s)| *s).sum();
        (n > 0).then(|| sum as f64 / n as f64)
    }

    pub fn kind_of(&self, id: VehicleId) -> Option<DriverKind> {
        self.kinds.iter().find(|(v, _)| *v == id).map(|(_, k)| *k)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Collision events in which no vehicle of `kind` took part.
    pub fn collisions_without(&self, kind: DriverKind) -> usize {
        self.events_of(EventKind::Collision)
            .filter(|e| e.vehicles.iter().all(|id| self.kind_of(*id) != Some(kind)))
            .count()
    }
}

pub fn run(scenario: &Scenario, seed: u64) -> Result<SimResult> {
    run_with(scenario, seed, RunOptions::default())
}

/// Simulate until every vehicle is leaving, a collision happens, or the step
/// cap is reached.
pub fn run_with(scenario: &Scenario, seed: u64, options: RunOptions) -> Result<SimResult> {
    let mut world = World::new(scenario, seed)?;
    let mut trace = Vec::new();
    let mut events = Vec::new();
    if options.record_trace {
        trace.extend(world.trace_rows());
    }
    let (mut collided, mut congested, mut timed_out) = (false, false, false);
    loop {
        if world.all_leaving() {
            break;
        }
        if world.t >= world.config.step_cap {
            timed_out = true;
            events.push(Event {
                step: world.t,
                kind: EventKind::Timeout,
                vehicles: Vec::new(),
            });
            break;
        }
        let new = world.step()?;
        if options.record_trace {
            trace.extend(world.trace_rows());
        }
        collided |= new.iter().any(|e| e.kind == EventKind::Collision);
        congested |= new.iter().any(|e| e.kind == EventKind::Congestion);
        events.extend(new);
        if collided {
            break;
        }
    }
    Ok(SimResult {
        case: scenario.case,
        run_index: scenario.run_index,
        seed,
        collided,
        congested,
        timed_out,
        total_steps: (!collided && !timed_out).then_some(world.t),
        steps_run: world.t,
        kinds: world.vehicles.iter().map(|v| (v.spec.id, v.kind)).collect(),
        leaving_steps: world.vehicles.iter().map(|v| (v.spec.id, v.leaving_step)).collect(),
        events,
        trace,
        games_solved: world.games_solved,
        last_mover_violations: world.last_mover_violations,
    })
}
