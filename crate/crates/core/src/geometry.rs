//! Small geometric primitives shared by the rig model and the coverage analysis.
//!
//! All coordinates live in the vehicle frame: origin at the ground projection
//! of the rear-axle center, x forward, y left, z up, metres.

use nalgebra::{Matrix4, Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

/// A plane angle.
///
/// Stored in degrees, the unit the configuration documents use, so that a
/// document survives a parse/serialize cycle bit for bit. Geometry code reads
/// it through [`Angle::radians`].
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const FULL_TURN: Angle = Angle(360.0);

    pub const fn from_degrees(deg: f64) -> Self {
        Angle(deg)
    }

    pub fn from_radians(rad: f64) -> Self {
        Angle(rad.to_degrees())
    }

    pub const fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// Half of this angle, in radians. Frustum tests compare against it.
    pub fn half_radians(self) -> f64 {
        self.radians() * 0.5
    }
}

impl std::ops::Neg for Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        Angle(-self.0)
    }
}

/// Rigid mounting pose of a sensor.
///
/// The orientation is intrinsic yaw-pitch-roll: the sensor-to-vehicle
/// rotation is `Rz(yaw) * Ry(pitch) * Rx(roll)`. A sensor with zero angles
/// looks along +x with +y to its left.
#[derive(Clone, Debug, PartialEq)]
pub struct Pose {
    pub position: Point3<f64>,
    pub yaw: Angle,
    pub pitch: Angle,
    pub roll: Angle,
}

impl Pose {
    pub fn new(position: [f64; 3], yaw: Angle, pitch: Angle, roll: Angle) -> Self {
        Pose {
            position: Point3::from(position),
            yaw,
            pitch,
            roll,
        }
    }

    pub fn at(position: [f64; 3]) -> Self {
        Self::new(position, Angle::ZERO, Angle::ZERO, Angle::ZERO)
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll.radians(), self.pitch.radians(), self.yaw.radians())
    }

    /// Expresses a vehicle-frame point in the sensor frame.
    pub fn to_local(&self, point: &Point3<f64>) -> Vector3<f64> {
        self.rotation().inverse_transform_vector(&(point - self.position))
    }

    /// Maps a sensor-frame vector back into the vehicle frame.
    pub fn to_vehicle(&self, local: &Vector3<f64>) -> Point3<f64> {
        self.position + self.rotation() * local
    }

    /// Sensor-to-vehicle homogeneous transform.
    pub fn homogeneous(&self) -> Matrix4<f64> {
        let mut m = self.rotation().to_homogeneous();
        m[(0, 3)] = self.position.x;
        m[(1, 3)] = self.position.y;
        m[(2, 3)] = self.position.z;
        m
    }
}

/// Box rotated about the vertical axis. Used as the occlusion proxy for the
/// vehicle body.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedBox {
    pub center: Point3<f64>,
    pub half_extents: Vector3<f64>,
    pub yaw: Angle,
}

impl OrientedBox {
    pub fn new(center: [f64; 3], half_extents: [f64; 3], yaw: Angle) -> Self {
        OrientedBox {
            center: Point3::from(center),
            half_extents: Vector3::from(half_extents),
            yaw,
        }
    }

    /// Point in the box frame (axes aligned with the box edges, origin at the center).
    pub fn to_local(&self, p: &Point3<f64>) -> Vector3<f64> {
        let (s, c) = self.yaw.radians().sin_cos();
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        Vector3::new(c * dx + s * dy, -s * dx + c * dy, p.z - self.center.z)
    }

    /// Whether `p` lies in the closed box grown by `margin` on every side.
    pub fn contains_within(&self, p: &Point3<f64>, margin: f64) -> bool {
        let l = self.to_local(p);
        (0..3).all(|a| l[a].abs() <= self.half_extents[a] + margin)
    }

    /// Whether the ground projection of the box covers `(x, y)`.
    pub fn footprint_contains(&self, x: f64, y: f64) -> bool {
        let l = self.to_local(&Point3::new(x, y, self.center.z));
        l.x.abs() <= self.half_extents.x && l.y.abs() <= self.half_extents.y
    }

    /// Slab test of the open segment `(a, b)` against the closed box.
    ///
    /// Touching the box only at an endpoint does not count as an intersection;
    /// running along a face does.
    pub fn blocks_segment(&self, a: &Point3<f64>, b: &Point3<f64>) -> bool {
        let la = self.to_local(a);
        let d = self.to_local(b) - la;
        let mut t_min = f64::NEG_INFINITY;
        let mut t_max = f64::INFINITY;
        for axis in 0..3 {
            let h = self.half_extents[axis];
            let o = la[axis];
            if d[axis] == 0.0 {
                if o.abs() > h {
                    return false;
                }
                continue;
            }
            let t1 = (-h - o) / d[axis];
            let t2 = (h - o) / d[axis];
            t_min = t_min.max(t1.min(t2));
            t_max = t_max.min(t1.max(t2));
        }
        t_min <= t_max && t_min < 1.0 && t_max > 0.0
    }

    /// The same box reflected across the x-z plane.
    pub fn mirrored(&self) -> Self {
        OrientedBox {
            center: Point3::new(self.center.x, -self.center.y, self.center.z),
            half_extents: self.half_extents,
            yaw: -self.yaw,
        }
    }
}
