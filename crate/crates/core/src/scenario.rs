//! Run setups: the eight benchmark cases and hand-built scenes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agent::DriverKind;
use crate::config::SimConfig;
use crate::error::Error;
use crate::geometry::{Arm, Maneuver};
use crate::kinematics::{VehicleDims, VehicleId};
use crate::rng::{run_seed, stream, SCENARIO_STREAM};
use crate::Result;

/// One of the eight benchmark cases. Primed cases start with random speeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Case {
    number: u8,
    primed: bool,
}

impl Case {
    pub const ALL: [Case; 8] = [
        Case::new_unchecked(1, false),
        Case::new_unchecked(2, false),
        Case::new_unchecked(3, false),
        Case::new_unchecked(4, false),
        Case::new_unchecked(1, true),
        Case::new_unchecked(2, true),
        Case::new_unchecked(3, true),
        Case::new_unchecked(4, true),
    ];

    const fn new_unchecked(number: u8, primed: bool) -> Case {
        Case { number, primed }
    }

    pub fn new(number: u8, primed: bool) -> Result<Case> {
        if (1..=4).contains(&number) {
            Ok(Case { number, primed })
        } else {
            Err(Error::UnknownCase(alloc::format!("{number}")))
        }
    }

    /// Accepts `1`..`4`, optionally followed by `'` or `p`.
    pub fn parse(s: &str) -> Result<Case> {
        let t = s.trim();
        let (digits, primed) = match t.strip_suffix('\'').or_else(|| t.strip_suffix('p')) {
            Some(d) => (d, true),
            None => (t, false),
        };
        match digits {
            "1" | "2" | "3" | "4" => Case::new(digits.as_bytes()[0] - b'0', primed),
            _ => Err(Error::UnknownCase(s.to_string())),
        }
    }

    pub fn number(self) -> u8 {
        self.number
    }

    pub fn primed(self) -> bool {
        self.primed
    }

    pub fn name(self) -> String {
        if self.primed {
            alloc::format!("{}'", self.number)
        } else {
            alloc::format!("{}", self.number)
        }
    }

    /// Driver kinds, rational ones first.
    pub fn kinds(self) -> [DriverKind; 4] {
        use DriverKind::*;
        match self.number {
            1 => [Angelic; 4],
            2 => [Angelic, Angelic, Angelic, Demonic],
            3 => [Intermediate; 4],
            _ => [Intermediate, Intermediate, Intermediate, Irrational],
        }
    }
}

impl core::fmt::Display for Case {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VehicleSetup {
    pub id: VehicleId,
    pub kind: DriverKind,
    pub arm: Arm,
    pub maneuver: Maneuver,
    pub dims: VehicleDims,
    pub initial_speed: f64,
    /// Initial arc position; by default the rear sits at the start of the path.
    pub initial_s: Option<f64>,
    /// Initial priority order; by default drawn from the driver kind's rule.
    pub initial_order: Option<Vec<VehicleId>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub case: Option<Case>,
    pub run_index: u64,
    /// Seed of the run's agent streams.
    pub seed: u64,
    pub vehicles: Vec<VehicleSetup>,
    pub config: SimConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.vehicles.is_empty() || self.vehicles.len() > 4 {
            return Err(Error::InvalidScenario("between one and four vehicles are required".into()));
        }
        for (i, v) in self.vehicles.iter().enumerate() {
            for w in &self.vehicles[..i] {
                if w.arm == v.arm {
                    return Err(Error::InvalidScenario(alloc::format!("two vehicles enter from {}", v.arm.name())));
                }
                if w.id == v.id {
                    return Err(Error::InvalidScenario(alloc::format!("vehicle id {} is used twice", v.id)));
                }
            }
            if !(v.initial_speed >= 0.0) || !v.initial_speed.is_finite() {
                return Err(Error::InvalidScenario("initial speeds must be finite and non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Stream of a vehicle's setup draws.
pub fn setup_stream(id: VehicleId) -> u64 {
    2 * id.0 as u64
}

/// Stream of a vehicle's decisions.
pub fn agent_stream(id: VehicleId) -> u64 {
    2 * id.0 as u64 + 1
}

/// Setup of run `run_index` of `case`. Vehicle ids follow the case's kind
/// list; arms are shuffled so any kind may use any entrance.
pub fn generate_scenario(case: Case, run_index: u64, master_seed: u64, config: &SimConfig) -> Result<Scenario> {
    config.validate()?;
    let seed = run_seed(master_seed, run_index);
    let mut arms = Arm::ALL;
    arms.shuffle(&mut stream(seed, SCENARIO_STREAM));

    let vehicles = case
        .kinds()
        .iter()
        .zip(arms)
        .enumerate()
        .map(|(i, (&kind, arm))| {
            let id = VehicleId(i as u32);
            let mut rng = stream(seed, setup_stream(id));
            let length = rng.gen_range(config.length_range.0..config.length_range.1);
            let width = rng.gen_range(config.width_range.0..config.width_range.1);
            let maneuver = Maneuver::ALL[rng.gen_range(0..Maneuver::ALL.len())];
            let top = match kind {
                DriverKind::Demonic | DriverKind::Irrational => config.malicious_max_speed,
                DriverKind::Angelic | DriverKind::Intermediate => config.cautious_max_speed,
            };
            let initial_speed = if case.primed && top > 0.0 { rng.gen_range(0.0..=top) } else { 0.0 };
            Ok(VehicleSetup {
                id,
                kind,
                arm,
                maneuver,
                dims: VehicleDims::new(length, width)?,
                initial_speed,
                initial_s: None,
                initial_order: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Scenario {
        case: Some(case),
        run_index,
        seed,
        vehicles,
        config: config.clone(),
    })
}
