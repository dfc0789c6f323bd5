use alloc::vec::Vec;

use crate::cost::CostParams;
use crate::error::Error;
use crate::game::PatternSet;
use crate::geometry::IntersectionLayout;
use crate::kinematics::DEFAULT_STOPPING_DECELERATION;
use crate::Result;

/// Every tunable constant of a simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub layout: IntersectionLayout,
    pub cost: CostParams,
    pub patterns: PatternSet,
    /// Two accelerations closer than this (m/s^2) are equal.
    pub prediction_tolerance: f64,
    pub unlock_probability: f64,
    /// m/s^2 applied by a vehicle breaking a deadlock.
    pub unlock_acceleration: f64,
    /// Chance of adopting a fitted order that makes the vehicle bolder.
    pub fit_acceptance: f64,
    pub step_cap: usize,
    /// Distance margin (m) of the closer-to-center rule.
    pub closer_margin: f64,
    pub stopping_deceleration: f64,
    /// Accelerations drawn uniformly by irrational drivers.
    pub irrational_choices: Vec<f64>,
    /// Upper bound of the random initial speed of demonic and irrational drivers.
    pub malicious_max_speed: f64,
    /// Upper bound of the random initial speed of angelic and intermediate drivers.
    pub cautious_max_speed: f64,
    /// Vehicle length range (m).
    pub length_range: (f64, f64),
    /// Vehicle width range (m).
    pub width_range: (f64, f64),
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            layout: IntersectionLayout::default(),
            cost: CostParams::default(),
            patterns: PatternSet::standard(),
            prediction_tolerance: 1e-6,
            unlock_probability: 0.25,
            unlock_acceleration: 10.0,
            fit_acceptance: 0.25,
            step_cap: 600,
            closer_margin: 2.0,
            stopping_deceleration: DEFAULT_STOPPING_DECELERATION,
            irrational_choices: alloc::vec![-50.0, 0.0, 10.0, 20.0],
            malicious_max_speed: 16.7,
            cautious_max_speed: 6.0,
            length_range: (3.5, 5.5),
            width_range: (1.5, 2.1),
        }
    }
}

fn probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("{name} must lie in [0, 1]")))
    }
}

fn range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if lo > 0.0 && lo < hi && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("{name} must be a positive, non-empty range")))
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        self.cost.validate()?;
        if self.patterns.horizon() < self.cost.horizon {
            return Err(Error::invalid("patterns are shorter than the horizon"));
        }
        probability("unlock_probability", self.unlock_probability)?;
        probability("fit_acceptance", self.fit_acceptance)?;
        if !(self.prediction_tolerance >= 0.0) {
            return Err(Error::invalid("prediction_tolerance must be non-negative"));
        }
        if self.step_cap == 0 {
            return Err(Error::invalid("step_cap must be positive"));
        }
        if !(self.closer_margin >= 0.0) {
            return Err(Error::invalid("closer_margin must be non-negative"));
        }
        if !(self.stopping_deceleration > 0.0) {
            return Err(Error::invalid("stopping_deceleration must be positive"));
        }
        if self.irrational_choices.is_empty() || self.irrational_choices.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("irrational_choices must be finite and non-empty"));
        }
        if !(self.malicious_max_speed >= 0.0) || !(self.cautious_max_speed >= 0.0) {
            return Err(Error::invalid("initial speed bounds must be non-negative"));
        }
        range("length_range", self.length_range)?;
        range("width_range", self.width_range)?;
        Ok(())
    }
}
