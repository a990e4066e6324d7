//! Planning and checking of instrumented research-vehicle sensor rigs.
//!
//! A rig is a declarative description of the vehicle body, its sensors, the
//! on-board network and the power system ([`rig`]). On top of it sit the
//! ground-level coverage analysis ([`coverage`]), the network feasibility
//! checks ([`netplan`]) and the battery simulation ([`power`]). [`report`]
//! runs all of them at once.

pub mod coverage;
pub mod geometry;
pub mod netplan;
pub mod power;
pub mod report;
pub mod rig;

pub use nalgebra::{Point3, Vector3};
pub use rig::{bundled_rig, parse_rig, validate_rig, Modality, RigSpec, Sensor};
