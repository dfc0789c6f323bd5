//! Per-vehicle controllers.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cost::priority_holder;
use crate::config::SimConfig;
use crate::error::Error;
use crate::game::EquilibriumCache;
use crate::kinematics::{infer_acceleration_with, next_config, Configuration, Scene, VehicleId};
use crate::priority::{maintain, FitSettings, Maintained, Observation, PriorityOrder, Update};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DriverKind {
    Angelic,
    Intermediate,
    Demonic,
    Irrational,
}

impl DriverKind {
    pub const ALL: [DriverKind; 4] = [
        DriverKind::Angelic,
        DriverKind::Intermediate,
        DriverKind::Demonic,
        DriverKind::Irrational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DriverKind::Angelic => "angelic",
            DriverKind::Intermediate => "intermediate",
            DriverKind::Demonic => "demonic",
            DriverKind::Irrational => "irrational",
        }
    }

    pub fn parse(s: &str) -> Option<DriverKind> {
        DriverKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    /// Whether the driver plays the decision game.
    pub fn is_rational(self) -> bool {
        self != DriverKind::Irrational
    }
}

impl core::fmt::Display for DriverKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// What a vehicle expected the others to do during the current step.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub ids: Vec<VehicleId>,
    /// Equilibrium first accelerations, indexed like `ids`.
    pub accelerations: Vec<f64>,
    /// Configurations those accelerations lead to.
    pub configs: Vec<Configuration>,
    /// Accelerations an observer would infer from `configs`.
    pub observable: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub acceleration: f64,
    /// A deadlock was detected from this vehicle's point of view.
    pub deadlock: bool,
    /// The acceleration is the unlock override.
    pub unlocked: bool,
}

#[derive(Clone, Debug)]
pub struct AgentState {
    pub kind: DriverKind,
    pub id: VehicleId,
    /// `None` exactly for irrational drivers.
    pub order: Option<PriorityOrder>,
    pub predictions: Option<Predictions>,
    /// A deadlock was detected at the previous step.
    pub deadlock_flag: bool,
    /// The last predictions matched every observation.
    pub predictions_exact: bool,
    /// The order held after the last fitting update explains the
    /// observations as well as any order does.
    pub best_explained: bool,
    pub rng: ChaCha8Rng,
}

/// Uniform draw from `choices`; depends on nothing but the random stream.
pub fn irrational_decide<R: Rng + ?Sized>(rng: &mut R, choices: &[f64]) -> f64 {
    choices[rng.gen_range(0..choices.len())]
}

/// A deadlock holds when every vehicle stands still and the vehicle's view of
/// the others is consistent with what they did.
pub fn detect_deadlock(scene: &Scene<'_>, consistent: bool) -> bool {
    consistent && scene.configs.iter().all(|c| c.v == 0.0)
}

/// Override acceleration, drawn only when the vehicle is eligible.
pub fn unlock<R: Rng + ?Sized>(eligible: bool, probability: f64, acceleration: f64, rng: &mut R) -> Option<f64> {
    if eligible && rng.gen_bool(probability) {
        Some(acceleration)
    } else {
        None
    }
}

impl AgentState {
    pub fn new(kind: DriverKind, id: VehicleId, order: Option<PriorityOrder>, rng: ChaCha8Rng) -> Result<Self> {
        if kind.is_rational() != order.is_some() {
            return Err(Error::invalid("rational drivers need an order and irrational ones have none"));
        }
        if let Some(o) = &order {
            if o.position(id).is_none() {
                return Err(Error::invalid("a driver's order must rank the driver itself"));
            }
        }
        Ok(AgentState {
            kind,
            id,
            order,
            predictions: None,
            deadlock_flag: false,
            predictions_exact: false,
            best_explained: false,
            rng,
        })
    }

    /// Control input for the snapshot held by `cache`.
    pub fn decide(&mut self, cache: &mut EquilibriumCache, config: &SimConfig) -> Result<Decision> {
        let Some(order) = &self.order else {
            return Ok(Decision {
                acceleration: irrational_decide(&mut self.rng, &config.irrational_choices),
                deadlock: false,
                unlocked: false,
            });
        };
        let me = cache
            .scene()
            .index_of(self.id)
            .ok_or_else(|| Error::invalid("deciding vehicle is missing from the snapshot"))?;
        let heads = cache.solve(order)?.heads.clone();
        let scene = cache.scene();
        let dt = cache.params().dt;

        let mut predictions = Predictions {
            ids: scene.ids().collect(),
            accelerations: heads.clone(),
            configs: Vec::with_capacity(scene.len()),
            observable: Vec::with_capacity(scene.len()),
        };
        for (j, a) in heads.iter().enumerate() {
            let (spec, c) = (&scene.specs[j], &scene.configs[j]);
            let next = next_config(c, *a, dt, &spec.path, &spec.dims, scene.layout);
            predictions
                .observable
                .push(infer_acceleration_with(c, &next, dt, config.stopping_deceleration));
            predictions.configs.push(next);
        }
        self.predictions = Some(predictions);

        let deadlock = detect_deadlock(&scene, self.predictions_exact || self.best_explained);
        let minimal = priority_holder(&scene, order, cache.params()) == Some(self.id);
        let eligible = (deadlock && minimal) || self.deadlock_flag;
        self.deadlock_flag = deadlock;
        let over = unlock(eligible, config.unlock_probability, config.unlock_acceleration, &mut self.rng);
        Ok(Decision {
            acceleration: over.unwrap_or(heads[me]),
            deadlock,
            unlocked: over.is_some(),
        })
    }

    /// Whether the stored predictions of the other vehicles match `observed`
    /// (indexed like `ids`) within `tolerance`.
    pub fn predictions_match(&self, ids: &[VehicleId], observed: &[f64], tolerance: f64) -> bool {
        let Some(p) = &self.predictions else {
            return false;
        };
        ids.iter().zip(observed).all(|(id, a)| {
            *id == self.id
                || p.ids
                    .iter()
                    .position(|x| x == id)
                    .map(|j| (p.observable[j] - a).abs() <= tolerance)
                    .unwrap_or(false)
        })
    }

    /// Priority bookkeeping once the step has been observed.
    ///
    /// `previous` is the snapshot decided from, `observed[j]` the acceleration
    /// seen for its vehicle `j` and `current` the vehicles still present.
    pub fn observe(
        &mut self,
        previous: &mut EquilibriumCache,
        observed: &[f64],
        current: &Scene<'_>,
        right_of_way_changed: bool,
        config: &SimConfig,
    ) -> Result<Option<Maintained>> {
        let ids: Vec<VehicleId> = previous.scene().ids().collect();
        self.predictions_exact = self.predictions_match(&ids, observed, config.prediction_tolerance);
        let Some(order) = self.order.clone() else {
            return Ok(None);
        };
        let settings = FitSettings {
            tolerance: config.prediction_tolerance,
            bolder_acceptance: config.fit_acceptance,
            stopping_deceleration: config.stopping_deceleration,
        };
        let outcome = maintain(
            self.kind,
            self.id,
            &order,
            Observation {
                previous,
                observed,
                current: *current,
                right_of_way_changed,
                mispredicted: !self.predictions_exact,
            },
            config.closer_margin,
            &settings,
            &mut self.rng,
        )?;
        if let Some(m) = &outcome {
            if let Update::Fitted(_) = m.update {
                self.best_explained = m.best_explained();
            } else if m.update == Update::RightOfWay {
                self.best_explained = false;
            }
            let mut next = m.order.clone();
            next.retain(|id| current.index_of(id).is_some());
            self.order = Some(next);
        }
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Arm, IntersectionLayout, Maneuver, NavigationPath};
    use crate::kinematics::{Status, VehicleDims, VehicleSpec};
    use crate::rng::stream;
    use rand::SeedableRng;

    fn lone(arm: Arm, m: Maneuver, s_from_end: Option<f64>, v: f64) -> (Vec<VehicleSpec>, Vec<Configuration>, IntersectionLayout) {
        let layout = IntersectionLayout::default();
        let spec = VehicleSpec {
            id: VehicleId(0),
            dims: VehicleDims::new(4.0, 1.8).unwrap(),
            path: NavigationPath::new(arm, m, &layout),
        };
        let s = match s_from_end {
            Some(back) => spec.path.total_length() - back,
            None => 2.0,
        };
        let c = Configuration::place(s, v, &spec.path, &spec.dims, &layout);
        (alloc::vec![spec], alloc::vec![c], layout)
    }

    fn agent(kind: DriverKind, ids: &[u32], me: u32) -> AgentState {
        let order = PriorityOrder::new(ids.iter().map(|&i| VehicleId(i)).collect()).unwrap();
        AgentState::new(kind, VehicleId(me), Some(order), stream(1, me as u64)).unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in DriverKind::ALL {
            assert_eq!(DriverKind::parse(k.name()), Some(k));
        }
        assert_eq!(DriverKind::parse("saint"), None);
    }

    #[test]
    fn lone_vehicle_at_rest_accelerates_hard() {
        let (specs, configs, layout) = lone(Arm::South, Maneuver::Straight, None, 0.0);
        let config = SimConfig::default();
        let mut cache = EquilibriumCache::new(&Scene::new(&specs, &configs, &layout), &config.cost, &config.patterns);
        let mut a = agent(DriverKind::Angelic, &[0], 0);
        let d = a.decide(&mut cache, &config).unwrap();
        assert_eq!(d.acceleration, 20.0);
        assert!(!d.unlocked);
    }

    #[test]
    fn leaving_vehicle_at_the_limit_cruises() {
        let (specs, configs, layout) = lone(Arm::West, Maneuver::TurnLeft, Some(10.0), 16.7);
        assert_eq!(configs[0].status, Status::Leaving);
        let config = SimConfig::default();
        let mut cache = EquilibriumCache::new(&Scene::new(&specs, &configs, &layout), &config.cost, &config.patterns);
        let mut a = agent(DriverKind::Demonic, &[0], 0);
        assert_eq!(a.decide(&mut cache, &config).unwrap().acceleration, 0.0);
    }

    #[test]
    fn predictions_follow_the_equilibrium() {
        let layout = IntersectionLayout::default();
        let specs: Vec<VehicleSpec> = [(0, Arm::South), (1, Arm::West)]
            .iter()
            .map(|&(i, arm)| VehicleSpec {
                id: VehicleId(i),
                dims: VehicleDims::new(4.5, 1.8).unwrap(),
                path: NavigationPath::new(arm, Maneuver::Straight, &layout),
            })
            .collect();
        let configs: Vec<Configuration> = specs
            .iter()
            .map(|s| Configuration::place(s.path.box_entry_s() - 6.0, 5.0, &s.path, &s.dims, &layout))
            .collect();
        let scene = Scene::new(&specs, &configs, &layout);
        let config = SimConfig::default();
        let mut cache = EquilibriumCache::new(&scene, &config.cost, &config.patterns);
        let mut a = agent(DriverKind::Intermediate, &[0, 1], 0);
        let d = a.decide(&mut cache, &config).unwrap();
        let order = a.order.clone().unwrap();
        let eq = cache.solve(&order).unwrap().clone();
        let p = a.predictions.as_ref().unwrap();
        assert_eq!(p.accelerations, eq.heads);
        assert_eq!(d.acceleration, eq.heads[0]);
        for j in 0..2 {
            let expect = next_config(&configs[j], eq.heads[j], 0.1, &specs[j].path, &specs[j].dims, &layout);
            assert_eq!(p.configs[j], expect);
        }
        assert!(config.patterns.iter().any(|pat| pat[0] == d.acceleration));
    }

    #[test]
    fn irrational_draws_are_uniform_and_reproducible() {
        let choices = [-50.0, 0.0, 10.0, 20.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            let a = irrational_decide(&mut rng, &choices);
            counts[choices.iter().position(|c| *c == a).unwrap()] += 1;
        }
        let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * 0.25).abs() <= 3.0 * sigma, "{counts:?}");
        }
        let mut x = ChaCha8Rng::seed_from_u64(9);
        let mut y = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            assert_eq!(irrational_decide(&mut x, &choices), irrational_decide(&mut y, &choices));
        }
    }

    #[test]
    fn deadlock_conditions() {
        let (specs, mut configs, layout) = lone(Arm::North, Maneuver::Straight, None, 0.0);
        assert!(detect_deadlock(&Scene::new(&specs, &configs, &layout), true));
        assert!(!detect_deadlock(&Scene::new(&specs, &configs, &layout), false));
        configs[0].v = 0.1;
        assert!(!detect_deadlock(&Scene::new(&specs, &configs, &layout), true));
    }

    #[test]
    fn unlock_frequency_and_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            assert_eq!(unlock(false, 0.25, 10.0, &mut rng), None);
        }
        let trials = 10_000;
        let mut hits = 0;
        for _ in 0..trials {
            if let Some(a) = unlock(true, 0.25, 10.0, &mut rng) {
                assert_eq!(a, 10.0);
                hits += 1;
            }
        }
        let sigma = (trials as f64 * 0.25 * 0.75).sqrt();
        assert!((hits as f64 - trials as f64 * 0.25).abs() <= 3.0 * sigma, "{hits}");
    }

    #[test]
    fn misprediction_is_detected() {
        let (specs, configs, layout) = lone(Arm::North, Maneuver::Straight, None, 0.0);
        let config = SimConfig::default();
        let mut cache = EquilibriumCache::new(&Scene::new(&specs, &configs, &layout), &config.cost, &config.patterns);
        let mut a = agent(DriverKind::Angelic, &[0], 0);
        assert!(!a.predictions_match(&[VehicleId(0)], &[0.0], 1e-6));
        a.decide(&mut cache, &config).unwrap();
        // Own acceleration never counts as a misprediction.
        assert!(a.predictions_match(&[VehicleId(0)], &[-3.0], 1e-6));
        let mut other = a.clone();
        other.id = VehicleId(7);
        assert!(!other.predictions_match(&[VehicleId(0)], &[-3.0], 1e-6));
        assert!(other.predictions_match(&[VehicleId(0)], &[20.0], 1e-6));
    }

    #[test]
    fn orders_are_required_for_rational_drivers() {
        assert!(AgentState::new(DriverKind::Angelic, VehicleId(0), None, stream(0, 0)).is_err());
        let o = PriorityOrder::new(alloc::vec![VehicleId(0)]).unwrap();
        assert!(AgentState::new(DriverKind::Irrational, VehicleId(0), Some(o.clone()), stream(0, 0)).is_err());
        assert!(AgentState::new(DriverKind::Demonic, VehicleId(1), Some(o), stream(0, 0)).is_err());
    }
}

