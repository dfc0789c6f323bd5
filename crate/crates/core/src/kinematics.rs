//! Vehicle configurations and the one-step transition along a fixed path.

use core::fmt;

use crate::error::Error;
use crate::geometry::{
    rectangle_meets_box, DiskSet, IntersectionLayout, NavigationPath, Pose,
};
use crate::Result;

/// Deceleration assumed when a vehicle is seen braking to a halt within a step.
pub const DEFAULT_STOPPING_DECELERATION: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VehicleId(pub u32);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleDims {
    pub length: f64,
    pub width: f64,
}

impl VehicleDims {
    pub fn new(length: f64, width: f64) -> Result<Self> {
        if !(length > 0.0) || !(width > 0.0) {
            return Err(Error::invalid("vehicle dimensions must be positive"));
        }
        Ok(VehicleDims { length, width })
    }
}

/// Where a vehicle is relative to the conflict area. Ordered so that a
/// vehicle only ever moves up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Entering,
    Inside,
    Leaving,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Entering => "entering",
            Status::Inside => "inside",
            Status::Leaving => "leaving",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        match s {
            "entering" => Some(Status::Entering),
            "inside" => Some(Status::Inside),
            "leaving" => Some(Status::Leaving),
            _ => None,
        }
    }
}

/// Static description of a vehicle: identity, footprint and route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleSpec {
    pub id: VehicleId,
    pub dims: VehicleDims,
    pub path: NavigationPath,
}

impl VehicleSpec {
    pub fn disks(&self, c: &Configuration) -> DiskSet {
        DiskSet::covering(c.pose(), self.dims.length, self.dims.width)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Configuration {
    /// Arc position of the vehicle center along its own path.
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    /// Last applied acceleration.
    pub a: f64,
    pub status: Status,
}

impl Configuration {
    /// A configuration at arc position `s`, with status derived from scratch.
    pub fn place(
        s: f64,
        v: f64,
        path: &NavigationPath,
        dims: &VehicleDims,
        layout: &IntersectionLayout,
    ) -> Self {
        let pose = path.pose_at(s);
        let mut c = Configuration {
            s,
            x: pose.x,
            y: pose.y,
            heading: pose.heading,
            v,
            a: 0.0,
            status: Status::Entering,
        };
        c.status = update_status(&c, path, dims, layout);
        c
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.heading)
    }

    pub fn distance_to_center(&self) -> f64 {
        libm::hypot(self.x, self.y)
    }
}

/// Advance one step under constant acceleration `a`. Speed never drops below
/// zero: a vehicle that would reverse stops part-way through the step.
pub fn next_config(
    c: &Configuration,
    a: f64,
    dt: f64,
    path: &NavigationPath,
    dims: &VehicleDims,
    layout: &IntersectionLayout,
) -> Configuration {
    let (ds, v) = if c.v + a * dt >= 0.0 {
        (c.v * dt + a * dt * dt / 2.0, c.v + a * dt)
    } else {
        let t_stop = c.v / -a;
        (c.v * t_stop + a * t_stop * t_stop / 2.0, 0.0)
    };
    let s = (c.s + ds).min(path.total_length());
    let pose = path.pose_at(s);
    let mut next = Configuration {
        s,
        x: pose.x,
        y: pose.y,
        heading: pose.heading,
        v,
        a,
        status: c.status,
    };
    next.status = update_status(&next, path, dims, layout);
    next
}

/// Status from the position, never earlier than the status already held.
///
/// Leaving once the center has passed the box exit (a proxy for "more than
/// half outside"); entering while the rectangle has not touched the box.
pub fn update_status(
    c: &Configuration,
    path: &NavigationPath,
    dims: &VehicleDims,
    layout: &IntersectionLayout,
) -> Status {
    let raw = if c.s > path.box_exit_s() {
        Status::Leaving
    } else if rectangle_meets_box(c.pose(), dims.length, dims.width, layout.box_half_width) {
        Status::Inside
    } else {
        Status::Entering
    };
    raw.max(c.status)
}

/// Joint configuration of the vehicles taking part in a decision, borrowed
/// alongside their static descriptions. `specs[i]` describes `configs[i]`.
#[derive(Clone, Copy, Debug)]
pub struct Scene<'a> {
    pub specs: &'a [VehicleSpec],
    pub configs: &'a [Configuration],
    pub layout: &'a IntersectionLayout,
}

impl<'a> Scene<'a> {
    pub fn new(
        specs: &'a [VehicleSpec],
        configs: &'a [Configuration],
        layout: &'a IntersectionLayout,
    ) -> Self {
        debug_assert_eq!(specs.len(), configs.len());
        Scene {
            specs,
            configs,
            layout,
        }
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn index_of(&self, id: VehicleId) -> Option<usize> {
        self.specs.iter().position(|s| s.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = VehicleId> + '_ {
        self.specs.iter().map(|s| s.id)
    }

    /// Configurations after every vehicle applies its own acceleration.
    pub fn advance(&self, accelerations: &[f64], dt: f64) -> alloc::vec::Vec<Configuration> {
        self.specs
            .iter()
            .zip(self.configs)
            .zip(accelerations)
            .map(|((spec, c), a)| next_config(c, *a, dt, &spec.path, &spec.dims, self.layout))
            .collect()
    }

    pub fn with_configs<'b>(&self, configs: &'b [Configuration]) -> Scene<'b>
    where
        'a: 'b,
    {
        Scene::new(self.specs, configs, self.layout)
    }
}

pub fn infer_acceleration(prev: &Configuration, cur: &Configuration, dt: f64) -> f64 {
    infer_acceleration_with(prev, cur, dt, DEFAULT_STOPPING_DECELERATION)
}

/// Acceleration that explains `prev -> cur`. A vehicle that came to rest
/// within the step along the profile of a `stopping` deceleration reports
/// `-stopping`, since the speed difference alone under-reports it.
pub fn infer_acceleration_with(
    prev: &Configuration,
    cur: &Configuration,
    dt: f64,
    stopping: f64,
) -> f64 {
    let quotient = (cur.v - prev.v) / dt;
    if cur.v == 0.0 && prev.v > 0.0 && stopping > 0.0 && prev.v / stopping <= dt * (1.0 + 1e-12) {
        let expected = prev.v * prev.v / (2.0 * stopping);
        let ds = cur.s - prev.s;
        if (ds - expected).abs() <= 1e-9 * (1.0 + expected) {
            return -stopping;
        }
    }
    quotient
}
