//! Priority orders: each rational vehicle's private belief about who goes
//! first, how it is initialised and how it is revised.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agent::DriverKind;
use crate::error::Error;
use crate::game::EquilibriumCache;
use crate::geometry::left_of;
use crate::kinematics::{infer_acceleration_with, next_config, Scene, Status, VehicleId};
use crate::Result;

/// Largest vehicle count for which orders are enumerated exhaustively.
pub const MAX_ENUMERATED_VEHICLES: usize = 6;

/// A strict total order over vehicles; the first entry has the highest
/// priority (it is the minimal element).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PriorityOrder(Vec<VehicleId>);

impl PriorityOrder {
    pub fn new(ids: Vec<VehicleId>) -> Result<Self> {
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(Error::invalid(alloc::format!("vehicle {id} appears twice in an order")));
            }
        }
        Ok(PriorityOrder(ids))
    }

    pub fn ids(&self) -> &[VehicleId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn minimal(&self) -> Option<VehicleId> {
        self.0.first().copied()
    }

    pub fn position(&self, id: VehicleId) -> Option<usize> {
        self.0.iter().position(|x| *x == id)
    }

    /// Whether `a` has priority over `b`.
    pub fn precedes(&self, a: VehicleId, b: VehicleId) -> bool {
        match (self.position(a), self.position(b)) {
            (Some(x), Some(y)) => x < y,
            _ => false,
        }
    }

    /// Same relative order restricted to the vehicles `keep` accepts.
    pub fn retain(&mut self, mut keep: impl FnMut(VehicleId) -> bool) {
        self.0.retain(|id| keep(*id));
    }

    /// Whether this order ranks exactly the vehicles in `ids`.
    pub fn covers(&self, ids: &[VehicleId]) -> bool {
        self.0.len() == ids.len() && ids.iter().all(|id| self.0.contains(id))
    }
}

/// Every total order over `ids`, in lexicographic order of the id sequence.
pub fn all_orders(ids: &[VehicleId]) -> Vec<PriorityOrder> {
    let mut perm = ids.to_vec();
    perm.sort();
    perm.dedup();
    let mut out = Vec::new();
    loop {
        out.push(PriorityOrder(perm.clone()));
        if !next_permutation(&mut perm) {
            return out;
        }
    }
}

fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tier {
    /// Already engaged in the intersection (and departed vehicles last).
    Engaged,
    /// Coming from the left-hand side.
    Left,
    /// Significantly closer to the center.
    Closer,
}

/// `before` must precede `after`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub before: VehicleId,
    pub after: VehicleId,
    pub tier: Tier,
}

fn engagement_rank(status: Status) -> u8 {
    match status {
        Status::Inside => 0,
        Status::Entering => 1,
        Status::Leaving => 2,
    }
}

/// Right-of-way constraints in force for the scene, most important tier
/// first, with any closer-to-center constraint that would close a cycle
/// dropped (weakest margin dropped first).
///
/// Vehicles that have left the box are ranked after everyone else and take
/// no part in the left-hand or distance rules; the left-hand rule counts only
/// the vehicles still approaching or inside.
pub fn right_of_way_constraints(scene: &Scene<'_>, closer_margin: f64) -> Vec<Constraint> {
    let n = scene.len();
    let status = |i: usize| scene.configs[i].status;
    let active = (0..n).filter(|&i| status(i) != Status::Leaving).count();
    let mut graph = vec![false; n * n];
    let mut out = Vec::new();
    let mut closer = Vec::new();

    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let (rj, rk) = (engagement_rank(status(j)), engagement_rank(status(k)));
            if rj < rk {
                graph[j * n + k] = true;
                out.push(Constraint {
                    before: scene.specs[j].id,
                    after: scene.specs[k].id,
                    tier: Tier::Engaged,
                });
                continue;
            }
            if rj != rk || status(j) == Status::Leaving {
                continue;
            }
            let (aj, ak) = (scene.specs[j].path.entry_arm, scene.specs[k].path.entry_arm);
            let left_related = active < 4 && aj != ak && aj.opposite() != ak;
            if left_related {
                if left_of(aj, ak).unwrap_or(false) {
                    graph[j * n + k] = true;
                    out.push(Constraint {
                        before: scene.specs[j].id,
                        after: scene.specs[k].id,
                        tier: Tier::Left,
                    });
                }
                continue;
            }
            let margin = scene.configs[k].distance_to_center() - scene.configs[j].distance_to_center();
            if margin > closer_margin {
                closer.push((margin, j, k));
            }
        }
    }

    closer.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (_, j, k) in closer {
        if reaches(&graph, n, k, j) {
            continue;
        }
        graph[j * n + k] = true;
        out.push(Constraint {
            before: scene.specs[j].id,
            after: scene.specs[k].id,
            tier: Tier::Closer,
        });
    }
    out
}

fn reaches(graph: &[bool], n: usize, from: usize, to: usize) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        if u == to {
            return true;
        }
        if core::mem::replace(&mut seen[u], true) {
            continue;
        }
        stack.extend((0..n).filter(|&w| graph[u * n + w] && !seen[w]));
    }
    false
}

pub fn satisfies(order: &PriorityOrder, constraints: &[Constraint]) -> bool {
    constraints.iter().all(|c| order.precedes(c.before, c.after))
}

/// A uniformly random order among those respecting the right of way.
pub fn init_angelic<R: Rng + ?Sized>(scene: &Scene<'_>, closer_margin: f64, rng: &mut R) -> Result<PriorityOrder> {
    if scene.len() > 8 {
        return Err(Error::TooManyVehicles {
            count: scene.len(),
            limit: 8,
        });
    }
    let constraints = right_of_way_constraints(scene, closer_margin);
    let ids: Vec<VehicleId> = scene.ids().collect();
    let mut valid: Vec<PriorityOrder> = all_orders(&ids)
        .into_iter()
        .filter(|o| satisfies(o, &constraints))
        .collect();
    // The retained constraints are acyclic, so at least one order survives.
    let pick = rng.gen_range(0..valid.len());
    Ok(valid.swap_remove(pick))
}

/// A uniformly random order with `self_id` first.
pub fn init_selfish<R: Rng + ?Sized>(self_id: VehicleId, ids: &[VehicleId], rng: &mut R) -> Result<PriorityOrder> {
    if !ids.contains(&self_id) {
        return Err(Error::invalid("the vehicle itself must be among the ordered vehicles"));
    }
    let mut rest: Vec<VehicleId> = ids.iter().copied().filter(|id| *id != self_id).collect();
    rest.shuffle(rng);
    let mut all = vec![self_id];
    all.extend(rest);
    PriorityOrder::new(all)
}

/// Whether some vehicle present in both snapshots changed status.
pub fn right_of_way_changed(prev: &Scene<'_>, cur: &Scene<'_>) -> bool {
    cur.specs.iter().zip(cur.configs).any(|(spec, c)| {
        prev.index_of(spec.id)
            .map(|i| prev.configs[i].status != c.status)
            .unwrap_or(false)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitSettings {
    /// Accelerations closer than this (m/s^2) count as equal.
    pub tolerance: f64,
    /// Chance of adopting a better-fitting order that makes the vehicle bolder.
    pub bolder_acceptance: f64,
    pub stopping_deceleration: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            tolerance: 1e-6,
            bolder_acceptance: 0.25,
            stopping_deceleration: crate::kinematics::DEFAULT_STOPPING_DECELERATION,
        }
    }
}

/// Acceleration an observer would infer if vehicle `j` applied `a` from its
/// configuration in the scene. Braking at rest, for instance, shows as zero.
pub fn observable_acceleration(scene: &Scene<'_>, j: usize, a: f64, dt: f64, stopping: f64) -> f64 {
    let spec = &scene.specs[j];
    let c = &scene.configs[j];
    let next = next_config(c, a, dt, &spec.path, &spec.dims, scene.layout);
    infer_acceleration_with(c, &next, dt, stopping)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOutcome {
    /// The order held after the update.
    pub order: PriorityOrder,
    /// The best-explaining order that was considered.
    pub candidate: PriorityOrder,
    pub adopted: bool,
    /// Whether adoption was forced (the candidate is no bolder than the current order).
    pub deterministic: bool,
    pub candidate_score: f64,
    pub current_score: f64,
    /// Whether the order held afterwards explains the observations as well as any order.
    pub best_explained: bool,
}

/// Revise `current` towards the order whose equilibrium best explains the
/// accelerations observed from the cached snapshot.
///
/// `observed[j]` is the acceleration seen for scene index `j` of the cache.
/// Among equally good explanations the one giving this vehicle the smallest
/// own acceleration wins (then the current order, then the lexicographically
/// smallest). A candidate that would make the vehicle bolder than its current
/// order is only adopted with probability `bolder_acceptance`.
pub fn fit_order<R: Rng + ?Sized>(
    cache: &mut EquilibriumCache,
    observed: &[f64],
    current: &PriorityOrder,
    self_id: VehicleId,
    settings: &FitSettings,
    rng: &mut R,
) -> Result<FitOutcome> {
    let scene = cache.scene();
    let n = scene.len();
    if n > MAX_ENUMERATED_VEHICLES {
        return Err(Error::TooManyVehicles {
            count: n,
            limit: MAX_ENUMERATED_VEHICLES,
        });
    }
    if observed.len() != n {
        return Err(Error::invalid("one observed acceleration per vehicle is required"));
    }
    let ids: Vec<VehicleId> = scene.ids().collect();
    if !current.covers(&ids) {
        return Err(Error::invalid("current order must cover the observed vehicles"));
    }
    let me = scene
        .index_of(self_id)
        .ok_or_else(|| Error::invalid("the vehicle itself must be in the snapshot"))?;

    let dt = cache.params().dt;
    let m = cache.patterns().len();
    let mut visible = Vec::with_capacity(n * m);
    for j in 0..n {
        for p in 0..m {
            let a = cache.patterns().head(p);
            visible.push(observable_acceleration(&scene, j, a, dt, settings.stopping_deceleration));
        }
    }

    let orders = all_orders(&ids);
    let mut scored = Vec::with_capacity(orders.len());
    for order in orders {
        let eq = cache.solve(&order)?;
        let mut score = 0.0;
        for j in 0..n {
            score += (visible[j * m + eq.profile[j]] - observed[j]).abs();
        }
        let own = eq.heads[me];
        scored.push((order, score, own));
    }

    let best = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let explains = |score: f64| score <= best + settings.tolerance;
    let calmest = scored
        .iter()
        .filter(|s| explains(s.1))
        .map(|s| s.2)
        .fold(f64::INFINITY, f64::min);
    let shortlist: Vec<&(PriorityOrder, f64, f64)> = scored
        .iter()
        .filter(|s| explains(s.1) && s.2 <= calmest + settings.tolerance)
        .collect();
    let chosen = shortlist
        .iter()
        .find(|s| s.0 == *current)
        .unwrap_or(&shortlist[0]);
    let current_entry = scored
        .iter()
        .find(|s| s.0 == *current)
        .expect("current order is among the enumerated orders");

    let deterministic = chosen.2 <= current_entry.2 + settings.tolerance;
    let adopted = deterministic || rng.gen_bool(settings.bolder_acceptance.clamp(0.0, 1.0));
    let (order, score) = if adopted {
        (chosen.0.clone(), chosen.1)
    } else {
        (current.clone(), current_entry.1)
    };
    Ok(FitOutcome {
        order,
        candidate: chosen.0.clone(),
        adopted,
        deterministic,
        candidate_score: chosen.1,
        current_score: current_entry.1,
        best_explained: explains(score),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Update {
    Kept,
    RightOfWay,
    Fitted(FitOutcome),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Maintained {
    pub order: PriorityOrder,
    pub update: Update,
}

impl Maintained {
    pub fn best_explained(&self) -> bool {
        matches!(&self.update, Update::Fitted(f) if f.best_explained)
    }
}

/// What a vehicle knows when it revises its order after a step.
pub struct Observation<'a> {
    /// Snapshot the last decisions were made from, with its solved games.
    pub previous: &'a mut EquilibriumCache,
    /// Acceleration seen for each vehicle of `previous`.
    pub observed: &'a [f64],
    /// The vehicles still present now.
    pub current: Scene<'a>,
    pub right_of_way_changed: bool,
    /// Whether the vehicle's predictions of the others missed.
    pub mispredicted: bool,
}

/// Update dispatch by driver kind. Demonic vehicles never revise their order;
/// angelic ones re-apply the right of way when it changes and otherwise fit;
/// intermediate ones only fit. Irrational vehicles hold no order.
pub fn maintain<R: Rng + ?Sized>(
    kind: DriverKind,
    self_id: VehicleId,
    order: &PriorityOrder,
    obs: Observation<'_>,
    closer_margin: f64,
    settings: &FitSettings,
    rng: &mut R,
) -> Result<Option<Maintained>> {
    let kept = || Maintained {
        order: order.clone(),
        update: Update::Kept,
    };
    match kind {
        DriverKind::Irrational => Ok(None),
        DriverKind::Demonic => Ok(Some(kept())),
        DriverKind::Angelic if obs.right_of_way_changed => Ok(Some(Maintained {
            order: init_angelic(&obs.current, closer_margin, rng)?,
            update: Update::RightOfWay,
        })),
        DriverKind::Angelic | DriverKind::Intermediate => {
            if !obs.mispredicted {
                return Ok(Some(kept()));
            }
            let fit = fit_order(obs.previous, obs.observed, order, self_id, settings, rng)?;
            Ok(Some(Maintained {
                order: fit.order.clone(),
                update: Update::Fitted(fit),
            }))
        }
    }
}
