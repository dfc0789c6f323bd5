//! Flat key-value configuration files (TOML) mirroring [`SimConfig`].
//!
//! Every key is optional; missing keys keep their default value. Unknown
//! keys are rejected so that typos do not silently fall back to defaults.

use std::path::Path;

use anyhow::{Context, Result};
use intersim_core::game::PatternSet;
use intersim_core::{CostParams, IntersectionLayout, SimConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatConfig {
    pub lane_width: f64,
    pub box_half_width: f64,
    pub arm_length: f64,

    pub c_normal: f64,
    pub c_danger: f64,
    pub c_under: f64,
    pub c_over: f64,
    pub safe_distance: f64,
    pub danger_distance: f64,
    pub speed_limit: f64,
    pub discount: f64,
    pub horizon: usize,
    pub dt: f64,
    pub leaving_clears_conflict: bool,
    pub leaving_cedes_priority: bool,
    pub inside_holds_priority: bool,

    pub patterns: Vec<Vec<f64>>,

    pub prediction_tolerance: f64,
    pub unlock_probability: f64,
    pub unlock_acceleration: f64,
    pub fit_acceptance: f64,
    pub step_cap: usize,
    pub closer_margin: f64,
    pub stopping_deceleration: f64,
    pub irrational_choices: Vec<f64>,
    pub malicious_max_speed: f64,
    pub cautious_max_speed: f64,
    pub length_min: f64,
    pub length_max: f64,
    pub width_min: f64,
    pub width_max: f64,
}

impl Default for FlatConfig {
    fn default() -> Self {
        FlatConfig::from(&SimConfig::default())
    }
}

impl From<&SimConfig> for FlatConfig {
    fn from(c: &SimConfig) -> Self {
        FlatConfig {
            lane_width: c.layout.lane_width,
            box_half_width: c.layout.box_half_width,
            arm_length: c.layout.arm_length,
            c_normal: c.cost.c_normal,
            c_danger: c.cost.c_danger,
            c_under: c.cost.c_under,
            c_over: c.cost.c_over,
            safe_distance: c.cost.safe_distance,
            danger_distance: c.cost.danger_distance,
            speed_limit: c.cost.speed_limit,
            discount: c.cost.discount,
            horizon: c.cost.horizon,
            dt: c.cost.dt,
            leaving_clears_conflict: c.cost.leaving_clears_conflict,
            leaving_cedes_priority: c.cost.leaving_cedes_priority,
            inside_holds_priority: c.cost.inside_holds_priority,
            patterns: c.patterns.iter().map(<[f64]>::to_vec).collect(),
            prediction_tolerance: c.prediction_tolerance,
            unlock_probability: c.unlock_probability,
            unlock_acceleration: c.unlock_acceleration,
            fit_acceptance: c.fit_acceptance,
            step_cap: c.step_cap,
            closer_margin: c.closer_margin,
            stopping_deceleration: c.stopping_deceleration,
            irrational_choices: c.irrational_choices.clone(),
            malicious_max_speed: c.malicious_max_speed,
            cautious_max_speed: c.cautious_max_speed,
            length_min: c.length_range.0,
            length_max: c.length_range.1,
            width_min: c.width_range.0,
            width_max: c.width_range.1,
        }
    }
}

impl FlatConfig {
    /// The validated simulation configuration.
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        let config = SimConfig {
            layout: IntersectionLayout {
                lane_width: self.lane_width,
                box_half_width: self.box_half_width,
                arm_length: self.arm_length,
            },
            cost: CostParams {
                c_normal: self.c_normal,
                c_danger: self.c_danger,
                c_under: self.c_under,
                c_over: self.c_over,
                safe_distance: self.safe_distance,
                danger_distance: self.danger_distance,
                speed_limit: self.speed_limit,
                discount: self.discount,
                horizon: self.horizon,
                dt: self.dt,
                leaving_clears_conflict: self.leaving_clears_conflict,
                leaving_cedes_priority: self.leaving_cedes_priority,
                inside_holds_priority: self.inside_holds_priority,
            },
            patterns: PatternSet::new(self.patterns.clone())?,
            prediction_tolerance: self.prediction_tolerance,
            unlock_probability: self.unlock_probability,
            unlock_acceleration: self.unlock_acceleration,
            fit_acceptance: self.fit_acceptance,
            step_cap: self.step_cap,
            closer_margin: self.closer_margin,
            stopping_deceleration: self.stopping_deceleration,
            irrational_choices: self.irrational_choices.clone(),
            malicious_max_speed: self.malicious_max_speed,
            cautious_max_speed: self.cautious_max_speed,
            length_range: (self.length_min, self.length_max),
            width_range: (self.width_min, self.width_max),
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let flat: FlatConfig = toml::from_str(text).context("malformed configuration")?;
    flat.to_sim_config()
}

pub fn serialize_config(config: &SimConfig) -> Result<String> {
    Ok(toml::to_string(&FlatConfig::from(config))?)
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}
