//! Step costs (safety + velocity) and their discounted sum over the horizon.

use alloc::vec::Vec;

use crate::error::Error;
use crate::geometry::{disk_set_distance, routes_conflict};
use crate::kinematics::{Scene, Status, VehicleId, VehicleSpec};
use crate::priority::PriorityOrder;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostParams {
    /// Weight of the proximity penalty for a vehicle without priority.
    pub c_normal: f64,
    /// Weight of the proximity penalty inside the danger distance.
    pub c_danger: f64,
    /// Weight of driving under the speed limit.
    pub c_under: f64,
    /// Weight of driving over the speed limit.
    pub c_over: f64,
    /// Distance beyond which another vehicle is ignored (m).
    pub safe_distance: f64,
    /// Distance at or below which another vehicle is dangerous (m).
    pub danger_distance: f64,
    /// m/s
    pub speed_limit: f64,
    pub discount: f64,
    /// Prediction horizon in steps.
    pub horizon: usize,
    /// Step length (s).
    pub dt: f64,
    /// Whether a pair stops interacting once either vehicle is leaving the
    /// box, unless both exit onto the same arm. When off, a leaving vehicle
    /// ignores everyone and is itself avoided like any other.
    pub leaving_clears_conflict: bool,
    /// Whether priority passes from a leaving vehicle to the next vehicle
    /// in the order that has not started leaving.
    pub leaving_cedes_priority: bool,
    /// Whether a vehicle inside the box holds priority over every vehicle
    /// that is not, whatever the order says.
    pub inside_holds_priority: bool,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            c_normal: 20.0,
            c_danger: 1e300,
            c_under: 1.0,
            c_over: 1000.0,
            safe_distance: 25.0,
            danger_distance: 0.5,
            speed_limit: 16.7,
            discount: 0.8,
            horizon: 3,
            dt: 0.1,
            leaving_clears_conflict: true,
            leaving_cedes_priority: true,
            inside_holds_priority: true,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_normal", self.c_normal),
            ("c_danger", self.c_danger),
            ("c_under", self.c_under),
            ("c_over", self.c_over),
            ("danger_distance", self.danger_distance),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::invalid(alloc::format!("{name} must be positive and finite")));
            }
        }
        if !(self.c_normal < self.c_danger) || !(self.c_under < self.c_over) {
            return Err(Error::invalid("need c_normal < c_danger and c_under < c_over"));
        }
        if !(self.danger_distance < self.safe_distance) || !self.safe_distance.is_finite() {
            return Err(Error::invalid("need 0 < danger_distance < safe_distance"));
        }
        if !(self.speed_limit >= 0.0) {
            return Err(Error::invalid("speed_limit must be non-negative"));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::invalid("discount must lie in (0, 1]"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least one step"));
        }
        Ok(())
    }

    /// Weight of the `s`-th predicted step (`0^0 = 1`).
    pub fn weight(&self, s: usize) -> f64 {
        libm::pow(self.discount, s as f64)
    }
}

/// Penalty felt by vehicle i because of one other vehicle at gap `d`, given
/// the facts the piecewise rule inspects; the first matching case wins.
pub fn pair_penalty(
    status_i: Status,
    paths_conflict: bool,
    d: f64,
    i_is_minimal: bool,
    params: &CostParams,
) -> f64 {
    let exempt = status_i == Status::Leaving && !params.leaving_clears_conflict;
    if exempt || !paths_conflict || d >= params.safe_distance {
        return 0.0;
    }
    let slack = params.safe_distance - d;
    if d <= params.danger_distance {
        params.c_danger * slack * slack
    } else if i_is_minimal {
        0.0
    } else {
        params.c_normal * slack * slack
    }
}

/// Whether the safety rule relates vehicles `i` and `k`: their routes cross
/// and, when leaving clears conflicts, neither has started leaving unless
/// both exit onto the same arm.
pub fn pair_conflicts(
    i: &VehicleSpec,
    status_i: Status,
    k: &VehicleSpec,
    status_k: Status,
    params: &CostParams,
) -> bool {
    if !routes_conflict(i.path.route(), k.path.route()) {
        return false;
    }
    let leaving = status_i == Status::Leaving || status_k == Status::Leaving;
    !(params.leaving_clears_conflict && leaving && i.path.exit_arm() != k.path.exit_arm())
}

/// The vehicle treated as minimal by the safety rule, judged on the
/// statuses of `scene`.
pub fn priority_holder(scene: &Scene<'_>, order: &PriorityOrder, params: &CostParams) -> Option<VehicleId> {
    let first_with = |pred: &dyn Fn(Status) -> bool| {
        order
            .ids()
            .iter()
            .copied()
            .find(|id| scene.index_of(*id).is_some_and(|j| pred(scene.configs[j].status)))
    };
    if params.inside_holds_priority {
        if let Some(id) = first_with(&|s| s == Status::Inside) {
            return Some(id);
        }
    }
    if params.leaving_cedes_priority {
        if let Some(id) = first_with(&|s| s != Status::Leaving) {
            return Some(id);
        }
    }
    order.minimal()
}

/// Safety penalty of vehicle `i` with respect to vehicle `k` (scene
/// indices), where `holder` is the vehicle with priority.
pub fn safety_pair(i: usize, k: usize, scene: &Scene<'_>, holder: Option<VehicleId>, params: &CostParams) -> f64 {
    let (si, sk) = (&scene.specs[i], &scene.specs[k]);
    let (ci, ck) = (&scene.configs[i], &scene.configs[k]);
    let d = disk_set_distance(&si.disks(ci), &sk.disks(ck));
    let conflict = pair_conflicts(si, ci.status, sk, ck.status, params);
    pair_penalty(ci.status, conflict, d, holder == Some(si.id), params)
}

pub fn safety_feature(i: usize, scene: &Scene<'_>, holder: Option<VehicleId>, params: &CostParams) -> f64 {
    let mut total = 0.0;
    for k in 0..scene.len() {
        if k != i {
            total += safety_pair(i, k, scene, holder, params);
        }
    }
    total
}

pub fn velocity_feature(v: f64, params: &CostParams) -> f64 {
    let gap = params.speed_limit - v;
    if v <= params.speed_limit {
        params.c_under * gap * gap
    } else {
        params.c_over * gap * gap
    }
}

pub fn step_cost(i: usize, scene: &Scene<'_>, holder: Option<VehicleId>, params: &CostParams) -> f64 {
    safety_feature(i, scene, holder, params) + velocity_feature(scene.configs[i].v, params)
}

/// Discounted step costs of vehicle `j` over the horizon when every vehicle
/// follows its own acceleration sequence. Priority is settled on `scene`
/// and held fixed.
pub fn accumulated_cost(
    j: usize,
    scene: &Scene<'_>,
    order: &PriorityOrder,
    profile: &[&[f64]],
    params: &CostParams,
) -> Result<f64> {
    if profile.len() != scene.len() {
        return Err(Error::invalid("profile must give one pattern per vehicle"));
    }
    if profile.iter().any(|p| p.len() < params.horizon) {
        return Err(Error::invalid("every pattern must cover the horizon"));
    }
    let holder = priority_holder(scene, order, params);
    let mut configs: Vec<_> = scene.configs.to_vec();
    let mut total = 0.0;
    for s in 0..params.horizon {
        if s > 0 {
            let accs: Vec<f64> = profile.iter().map(|p| p[s - 1]).collect();
            configs = scene.with_configs(&configs).advance(&accs, params.dt);
        }
        let view = scene.with_configs(&configs);
        total += params.weight(s) * step_cost(j, &view, holder, params);
    }
    Ok(total)
}
