//! Small random rigs for oracle and property checks.

use rand::Rng;
use rigplan::geometry::{Angle, OrientedBox, Pose};
use rigplan::rig::FieldOfView;
use rigplan::{Modality, Sensor};

pub fn sensor<R: Rng>(rng: &mut R, id: String) -> Sensor {
    let azimuth = if rng.random_bool(0.25) {
        360.0
    } else {
        rng.random_range(10.0..359.0)
    };
    let pose = Pose::new(
        [
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(0.1..2.5),
        ],
        Angle::from_degrees(rng.random_range(-180.0..180.0)),
        Angle::from_degrees(rng.random_range(-40.0..40.0)),
        Angle::from_degrees(rng.random_range(-15.0..15.0)),
    );
    Sensor::new(
        id,
        Modality::Camera,
        pose,
        FieldOfView {
            azimuth: Angle::from_degrees(azimuth),
            elevation: Angle::from_degrees(rng.random_range(5.0..175.0)),
            max_range_m: rng.random_range(1.0..14.0),
        },
    )
}

pub fn occluder<R: Rng>(rng: &mut R) -> OrientedBox {
    OrientedBox::new(
        [
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(0.0..1.8),
        ],
        [
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..1.0),
        ],
        Angle::from_degrees(rng.random_range(-180.0..180.0)),
    )
}

pub struct Scene {
    pub sensors: Vec<Sensor>,
    pub occluders: Vec<OrientedBox>,
    pub height_m: f64,
}

pub fn scene<R: Rng>(rng: &mut R, max_sensors: usize, max_occluders: usize) -> Scene {
    let ns = rng.random_range(0..=max_sensors);
    let no = rng.random_range(0..=max_occluders);
    Scene {
        sensors: (0..ns).map(|i| sensor(rng, format!("s{i}"))).collect(),
        occluders: (0..no).map(|_| occluder(rng)).collect(),
        height_m: rng.random_range(0.0..2.0),
    }
}
