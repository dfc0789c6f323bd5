//! Intersection layout, navigation paths and the three-disk occupancy model.
//!
//! Coordinates are in meters with the intersection center at the origin,
//! north along +y and east along +x. Traffic drives on the left.

use core::f64::consts::{FRAC_PI_2, PI};
use core::ops::{Add, Mul, Neg, Sub};

use libm::{atan2, cos, hypot, sin, sqrt};

use crate::error::Error;
use crate::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(cos(theta), sin(theta))
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        hypot(self.x, self.y)
    }

    /// Rotation by +90 degrees (towards the left of a vehicle facing `self`).
    pub fn left(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        atan2(self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Position and heading (radians, counterclockwise from +x).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose { x, y, heading }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntersectionLayout {
    pub lane_width: f64,
    /// Half side of the square conflict area.
    pub box_half_width: f64,
    /// Distance from the box edge to the start of every navigation path.
    pub arm_length: f64,
}

impl Default for IntersectionLayout {
    fn default() -> Self {
        IntersectionLayout {
            lane_width: 3.5,
            box_half_width: 7.0,
            arm_length: 20.0,
        }
    }
}

impl IntersectionLayout {
    pub fn new(lane_width: f64, box_half_width: f64, arm_length: f64) -> Result<Self> {
        let layout = IntersectionLayout {
            lane_width,
            box_half_width,
            arm_length,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lane_width > 0.0) {
            return Err(Error::invalid("lane_width must be positive"));
        }
        if !(self.box_half_width >= self.lane_width) {
            return Err(Error::invalid("box_half_width must be at least lane_width"));
        }
        if !(self.arm_length > 0.0) {
            return Err(Error::invalid("arm_length must be positive"));
        }
        Ok(())
    }

    /// Whether a point lies in the (closed) conflict area.
    pub fn in_box(&self, p: Vec2) -> bool {
        p.x.abs() <= self.box_half_width && p.y.abs() <= self.box_half_width
    }
}

/// The road a vehicle enters from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    North,
    East,
    South,
    West,
}

impl Arm {
    /// Clockwise as seen from above.
    pub const ALL: [Arm; 4] = [Arm::North, Arm::East, Arm::South, Arm::West];

    pub fn index(self) -> usize {
        match self {
            Arm::North => 0,
            Arm::East => 1,
            Arm::South => 2,
            Arm::West => 3,
        }
    }

    pub fn opposite(self) -> Arm {
        Arm::ALL[(self.index() + 2) % 4]
    }

    /// Next arm clockwise. For a vehicle entering from `self` this is the arm
    /// on its left-hand side.
    pub fn clockwise(self) -> Arm {
        Arm::ALL[(self.index() + 1) % 4]
    }

    /// Unit vector pointing from the intersection center out along the arm.
    pub fn outward(self) -> Vec2 {
        match self {
            Arm::North => Vec2::new(0.0, 1.0),
            Arm::East => Vec2::new(1.0, 0.0),
            Arm::South => Vec2::new(0.0, -1.0),
            Arm::West => Vec2::new(-1.0, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Arm::North => "N",
            Arm::East => "E",
            Arm::South => "S",
            Arm::West => "W",
        }
    }

    pub fn parse(s: &str) -> Option<Arm> {
        match s {
            "N" | "North" => Some(Arm::North),
            "E" | "East" => Some(Arm::East),
            "S" | "South" => Some(Arm::South),
            "W" | "West" => Some(Arm::West),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Maneuver {
    Straight,
    TurnLeft,
    TurnRight,
}

impl Maneuver {
    pub const ALL: [Maneuver; 3] = [Maneuver::Straight, Maneuver::TurnLeft, Maneuver::TurnRight];

    pub fn name(self) -> &'static str {
        match self {
            Maneuver::Straight => "straight",
            Maneuver::TurnLeft => "left",
            Maneuver::TurnRight => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Maneuver> {
        match s {
            "straight" | "Straight" => Some(Maneuver::Straight),
            "left" | "TurnLeft" => Some(Maneuver::TurnLeft),
            "right" | "TurnRight" => Some(Maneuver::TurnRight),
            _ => None,
        }
    }
}

/// Whether a vehicle entering from `j_arm` is on the left-hand side of one
/// entering from `k_arm`.
pub fn left_of(j_arm: Arm, k_arm: Arm) -> Result<bool> {
    if j_arm == k_arm {
        return Err(Error::invalid("left_of needs two distinct arms"));
    }
    Ok(j_arm == k_arm.clockwise())
}

/// Two routes can only share road space unless they come from opposite arms
/// and neither turns right (the right turn crosses oncoming traffic).
pub fn paths_conflict(p: (Arm, Maneuver), q: (Arm, Maneuver)) -> Result<bool> {
    if p.0 == q.0 {
        return Err(Error::invalid("paths_conflict needs distinct entry arms"));
    }
    Ok(routes_conflict(p, q))
}

pub(crate) fn routes_conflict(p: (Arm, Maneuver), q: (Arm, Maneuver)) -> bool {
    let passes = |m: Maneuver| matches!(m, Maneuver::Straight | Maneuver::TurnLeft);
    !(p.0.opposite() == q.0 && passes(p.1) && passes(q.1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Inner {
    Line {
        start: Vec2,
        dir: Vec2,
    },
    /// `sense` is +1 for counterclockwise travel, -1 for clockwise.
    Arc {
        center: Vec2,
        radius: f64,
        start_angle: f64,
        sense: f64,
    },
}

/// A fixed route: straight entry lane, a line or quarter circle through the
/// box, and a straight exit lane, parameterized by arc length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavigationPath {
    pub entry_arm: Arm,
    pub maneuver: Maneuver,
    start: Vec2,
    entry_dir: Vec2,
    entry_len: f64,
    inner: Inner,
    inner_len: f64,
    exit_start: Vec2,
    exit_dir: Vec2,
    exit_len: f64,
}

impl NavigationPath {
    pub fn new(entry_arm: Arm, maneuver: Maneuver, layout: &IntersectionLayout) -> Self {
        let b = layout.box_half_width;
        let half_lane = layout.lane_width / 2.0;
        let out = entry_arm.outward();
        let heading = -out;
        let lane_offset = heading.left() * half_lane;
        let start = out * (b + layout.arm_length) + lane_offset;
        let box_entry = out * b + lane_offset;

        let exit_dir = match maneuver {
            Maneuver::Straight => heading,
            Maneuver::TurnLeft => heading.left(),
            Maneuver::TurnRight => -heading.left(),
        };
        let exit_start = exit_dir * b + exit_dir.left() * half_lane;

        let (inner, inner_len) = match maneuver {
            Maneuver::Straight => (
                Inner::Line {
                    start: box_entry,
                    dir: heading,
                },
                2.0 * b,
            ),
            Maneuver::TurnLeft | Maneuver::TurnRight => {
                let sense = if maneuver == Maneuver::TurnLeft { 1.0 } else { -1.0 };
                // The arc is centered on the box corner between the entry and exit arms.
                let center = out * b + heading.left() * (sense * b);
                let radius = b - sense * half_lane;
                let start_angle = (box_entry - center).angle();
                (
                    Inner::Arc {
                        center,
                        radius,
                        start_angle,
                        sense,
                    },
                    radius * FRAC_PI_2,
                )
            }
        };

        NavigationPath {
            entry_arm,
            maneuver,
            start,
            entry_dir: heading,
            entry_len: layout.arm_length,
            inner,
            inner_len,
            exit_start,
            exit_dir,
            exit_len: layout.arm_length,
        }
    }

    pub fn total_length(&self) -> f64 {
        self.entry_len + self.inner_len + self.exit_len
    }

    /// Arc position where the path crosses into the box.
    pub fn box_entry_s(&self) -> f64 {
        self.entry_len
    }

    /// Arc position where the path crosses out of the box.
    pub fn box_exit_s(&self) -> f64 {
        self.entry_len + self.inner_len
    }

    pub fn exit_arm(&self) -> Arm {
        Arm::ALL
            .into_iter()
            .find(|a| a.outward() == self.exit_dir)
            .unwrap_or(self.entry_arm)
    }

    pub fn route(&self) -> (Arm, Maneuver) {
        (self.entry_arm, self.maneuver)
    }

    /// Pose at arc position `s`, clamped to `[0, total_length]`.
    pub fn pose_at(&self, s: f64) -> Pose {
        let s = s.clamp(0.0, self.total_length());
        if s <= self.entry_len {
            let p = self.start + self.entry_dir * s;
            return Pose::new(p.x, p.y, self.entry_dir.angle());
        }
        let local = s - self.entry_len;
        if local <= self.inner_len {
            return match self.inner {
                Inner::Line { start, dir } => {
                    let p = start + dir * local;
                    Pose::new(p.x, p.y, dir.angle())
                }
                Inner::Arc {
                    center,
                    radius,
                    start_angle,
                    sense,
                } => {
                    let phi = start_angle + sense * local / radius;
                    let p = center + Vec2::from_angle(phi) * radius;
                    Pose::new(p.x, p.y, wrap_angle(phi + sense * FRAC_PI_2))
                }
            };
        }
        let local = s - self.entry_len - self.inner_len;
        let p = self.exit_start + self.exit_dir * local;
        Pose::new(p.x, p.y, self.exit_dir.angle())
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta;
    while t > PI {
        t -= 2.0 * PI;
    }
    while t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Three equal disks whose union covers a vehicle rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskSet {
    pub centers: [Vec2; 3],
    pub radius: f64,
}

impl DiskSet {
    /// Covering disks for a rectangle with positive dimensions.
    pub fn covering(pose: Pose, length: f64, width: f64) -> Self {
        let axis = Vec2::from_angle(pose.heading);
        let c = pose.position();
        let step = axis * (length / 3.0);
        let half_seg = length / 6.0;
        let half_w = width / 2.0;
        DiskSet {
            centers: [c - step, c, c + step],
            radius: sqrt(half_seg * half_seg + half_w * half_w),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.centers.iter().any(|c| (p - *c).norm() <= self.radius)
    }
}

pub fn occupancy_disks(pose: Pose, length: f64, width: f64) -> Result<DiskSet> {
    if !(length > 0.0) || !(width > 0.0) {
        return Err(Error::invalid("vehicle dimensions must be positive"));
    }
    Ok(DiskSet::covering(pose, length, width))
}

/// Gap between two disk unions; zero when they touch or overlap.
pub fn disk_set_distance(a: &DiskSet, b: &DiskSet) -> f64 {
    let reach = a.radius + b.radius;
    let mut best = f64::INFINITY;
    for ca in &a.centers {
        for cb in &b.centers {
            let gap = (*ca - *cb).norm() - reach;
            if gap < best {
                best = gap;
            }
        }
    }
    if best > 0.0 {
        best
    } else {
        0.0
    }
}

/// Corners of a vehicle rectangle centered on `pose`.
pub fn rectangle_corners(pose: Pose, length: f64, width: f64) -> [Vec2; 4] {
    let fwd = Vec2::from_angle(pose.heading);
    let side = fwd.left();
    let c = pose.position();
    let f = fwd * (length / 2.0);
    let s = side * (width / 2.0);
    [c + f + s, c + f - s, c - f - s, c - f + s]
}

/// Separating-axis test between a vehicle rectangle and the square box.
/// Touching counts as overlapping.
pub fn rectangle_meets_box(pose: Pose, length: f64, width: f64, half: f64) -> bool {
    let corners = rectangle_corners(pose, length, width);
    let fwd = Vec2::from_angle(pose.heading);
    let axes = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), fwd, fwd.left()];
    let box_corners = [
        Vec2::new(half, half),
        Vec2::new(half, -half),
        Vec2::new(-half, -half),
        Vec2::new(-half, half),
    ];
    axes.iter().all(|axis| {
        let (rmin, rmax) = project(&corners, *axis);
        let (bmin, bmax) = project(&box_corners, *axis);
        rmax >= bmin && bmax >= rmin
    })
}

fn project(points: &[Vec2; 4], axis: Vec2) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let t = p.dot(axis);
        (lo.min(t), hi.max(t))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + b.abs())
    }

    #[test]
    fn occupancy_disks_axis_aligned() {
        let d = occupancy_disks(Pose::new(0.0, 0.0, 0.0), 4.5, 1.8).unwrap();
        assert!(close(d.centers[0].x, -1.5) && close(d.centers[0].y, 0.0));
        assert!(close(d.centers[1].x, 0.0));
        assert!(close(d.centers[2].x, 1.5));
        // sqrt(0.75^2 + 0.9^2)
        assert!(close(d.radius, 1.171_537_451_386_3));
    }

    #[test]
    fn occupancy_disks_rotated_quarter_turn() {
        let d = occupancy_disks(Pose::new(0.0, 0.0, FRAC_PI_2), 4.5, 1.8).unwrap();
        assert!(d.centers[0].x.abs() < 1e-12 && close(d.centers[0].y, -1.5));
        assert!(d.centers[2].x.abs() < 1e-12 && close(d.centers[2].y, 1.5));
        let flat = occupancy_disks(Pose::new(0.0, 0.0, 0.0), 4.5, 1.8).unwrap();
        assert_eq!(d.radius, flat.radius);
    }

    #[test]
    fn occupancy_radius_when_length_is_three_widths() {
        let w = 1.7;
        let d = occupancy_disks(Pose::new(3.0, -2.0, 0.4), 3.0 * w, w).unwrap();
        assert!(close(d.radius, w / core::f64::consts::SQRT_2));
    }

    #[test]
    fn occupancy_rejects_bad_dimensions() {
        assert!(occupancy_disks(Pose::default(), 0.0, 1.0).is_err());
        assert!(occupancy_disks(Pose::default(), 4.0, -1.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let a = DiskSet {
            centers: [Vec2::new(0.0, 0.0); 3],
            radius: 1.0,
        };
        let b = DiskSet {
            centers: [Vec2::new(5.0, 0.0); 3],
            radius: 1.0,
        };
        assert!(close(disk_set_distance(&a, &b), 3.0));
        assert_eq!(disk_set_distance(&a, &a), 0.0);
        let c = DiskSet {
            centers: [Vec2::new(1.5, 0.0); 3],
            radius: 1.0,
        };
        assert_eq!(disk_set_distance(&a, &c), 0.0);
    }

    #[test]
    fn conflict_examples() {
        use Arm::*;
        use Maneuver::*;
        assert!(!paths_conflict((North, Straight), (South, TurnLeft)).unwrap());
        assert!(paths_conflict((North, Straight), (East, Straight)).unwrap());
        assert!(paths_conflict((North, TurnRight), (South, Straight)).unwrap());
        assert!(!paths_conflict((East, TurnLeft), (West, TurnLeft)).unwrap());
        assert!(paths_conflict((North, Straight), (North, TurnLeft)).is_err());
    }

    #[test]
    fn conflict_is_symmetric() {
        for a in Arm::ALL {
            for b in Arm::ALL {
                if a == b {
                    continue;
                }
                for m in Maneuver::ALL {
                    for n in Maneuver::ALL {
                        assert_eq!(
                            paths_conflict((a, m), (b, n)).unwrap(),
                            paths_conflict((b, n), (a, m)).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn left_of_examples() {
        assert!(left_of(Arm::West, Arm::South).unwrap());
        assert!(!left_of(Arm::South, Arm::West).unwrap());
        assert!(!left_of(Arm::North, Arm::South).unwrap());
        assert!(left_of(Arm::East, Arm::East).is_err());
    }

    #[test]
    fn left_of_matches_vehicle_frame() {
        // The arm on k's left is where k's left-hand normal points.
        for k in Arm::ALL {
            let heading = -k.outward();
            for j in Arm::ALL {
                if j == k {
                    continue;
                }
                let geometric = j.outward() == heading.left();
                assert_eq!(left_of(j, k).unwrap(), geometric, "{j:?} vs {k:?}");
            }
        }
    }

    #[test]
    fn left_of_exactly_one_direction_unless_opposite() {
        for j in Arm::ALL {
            for k in Arm::ALL {
                if j == k {
                    continue;
                }
                let n = left_of(j, k).unwrap() as u8 + left_of(k, j).unwrap() as u8;
                if j.opposite() == k {
                    assert_eq!(n, 0);
                } else {
                    assert_eq!(n, 1);
                }
            }
        }
    }

    #[test]
    fn paths_drive_on_the_left_and_reach_the_right_arm() {
        let layout = IntersectionLayout::default();
        let p = NavigationPath::new(Arm::South, Maneuver::Straight, &layout);
        let start = p.pose_at(0.0);
        assert!(close(start.x, -1.75) && close(start.y, -27.0));
        assert!(close(start.heading, FRAC_PI_2));
        let end = p.pose_at(p.total_length());
        assert!(close(end.x, -1.75) && close(end.y, 27.0));

        let left = NavigationPath::new(Arm::South, Maneuver::TurnLeft, &layout);
        assert_eq!(left.exit_arm(), Arm::West);
        let out = left.pose_at(left.box_exit_s());
        assert!(close(out.x, -7.0) && close(out.y, -1.75));
        assert!(close(out.heading.abs(), PI));

        let right = NavigationPath::new(Arm::South, Maneuver::TurnRight, &layout);
        assert_eq!(right.exit_arm(), Arm::East);
        let out = right.pose_at(right.box_exit_s());
        assert!(close(out.x, 7.0) && close(out.y, 1.75));
        assert!(out.heading.abs() < 1e-9);
    }

    #[test]
    fn box_meeting_test() {
        assert!(rectangle_meets_box(Pose::new(0.0, 0.0, 0.3), 4.0, 2.0, 7.0));
        assert!(!rectangle_meets_box(Pose::new(-1.75, -14.0, FRAC_PI_2), 4.0, 2.0, 7.0));
        assert!(rectangle_meets_box(Pose::new(-1.75, -8.9, FRAC_PI_2), 4.0, 2.0, 7.0));
    }

    fn arm_strategy() -> impl Strategy<Value = Arm> {
        (0usize..4).prop_map(|i| Arm::ALL[i])
    }

    fn maneuver_strategy() -> impl Strategy<Value = Maneuver> {
        (0usize..3).prop_map(|i| Maneuver::ALL[i])
    }

    proptest! {
        #[test]
        fn disks_cover_rectangle(
            x in -50.0f64..50.0, y in -50.0f64..50.0, h in -PI..PI,
            l in 0.5f64..8.0, w in 0.5f64..3.0,
        ) {
            let pose = Pose::new(x, y, h);
            let d = occupancy_disks(pose, l, w).unwrap();
            for c in rectangle_corners(pose, l, w) {
                // allow rounding on the boundary
                let inside = d.centers.iter().any(|k| (c - *k).norm() <= d.radius * (1.0 + 1e-12));
                prop_assert!(inside);
            }
        }

        #[test]
        fn distance_symmetric_and_zero_iff_touching(
            ax in -10.0f64..10.0, ay in -10.0f64..10.0, ah in -PI..PI,
            bx in -10.0f64..10.0, by in -10.0f64..10.0, bh in -PI..PI,
        ) {
            let a = DiskSet::covering(Pose::new(ax, ay, ah), 4.5, 1.8);
            let b = DiskSet::covering(Pose::new(bx, by, bh), 4.0, 2.0);
            let d = disk_set_distance(&a, &b);
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, disk_set_distance(&b, &a));
            let touching = a.centers.iter().any(|ca| b.centers.iter()
                .any(|cb| (*ca - *cb).norm() <= a.radius + b.radius));
            prop_assert_eq!(d == 0.0, touching);
        }

        #[test]
        fn path_is_arc_length_parameterized(
            arm in arm_strategy(), m in maneuver_strategy(), frac in 0.0f64..0.999,
        ) {
            let layout = IntersectionLayout::default();
            let p = NavigationPath::new(arm, m, &layout);
            let s = frac * (p.total_length() - 1e-3);
            let eps = 1e-6;
            let a = p.pose_at(s);
            let b = p.pose_at(s + eps);
            let speed = (b.position() - a.position()).norm() / eps;
            prop_assert!((speed - 1.0).abs() < 1e-6, "speed {}", speed);
            // heading is the tangent direction
            let tangent = (b.position() - a.position()) * (1.0 / eps);
            let dir = Vec2::from_angle(a.heading);
            prop_assert!((tangent.dot(dir) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn path_is_continuous_across_segments() {
        let layout = IntersectionLayout::default();
        for arm in Arm::ALL {
            for m in Maneuver::ALL {
                let p = NavigationPath::new(arm, m, &layout);
                for s in [p.box_entry_s(), p.box_exit_s()] {
                    let a = p.pose_at(s - 1e-9);
                    let b = p.pose_at(s + 1e-9);
                    assert!((a.position() - b.position()).norm() < 1e-7);
                    let da = Vec2::from_angle(a.heading);
                    let db = Vec2::from_angle(b.heading);
                    assert!(da.dot(db) > 1.0 - 1e-9);
                }
            }
        }
    }
}
