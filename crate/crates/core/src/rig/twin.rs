//! Simulator-facing parameter bundle: per-sensor extrinsics and intrinsics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate_rig, Modality, Resolution, RigSpec, ValidationReport};

#[derive(Debug, Error)]
pub enum TwinError {
    #[error("rig has {} validation error(s)", .0.errors.len())]
    Invalid(ValidationReport),
    #[error("twin document: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwinDocument {
    pub name: String,
    /// Occluder boxes as `[cx, cy, cz, hx, hy, hz, yaw_deg]`.
    pub body_boxes: Vec<[f64; 7]>,
    pub sensors: Vec<TwinSensor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwinSensor {
    pub id: String,
    pub modality: Modality,
    /// Sensor-to-vehicle transform, row-major 4x4.
    pub extrinsic: [f64; 16],
    pub intrinsic: Intrinsics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intrinsics {
    pub azimuth_fov_deg: f64,
    pub elevation_fov_deg: f64,
    pub max_range_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lines: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_px: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_px: Option<u32>,
}

impl TwinDocument {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("twin documents always serialize")
    }

    pub fn from_text(text: &str) -> Result<Self, TwinError> {
        toml::from_str(text).map_err(|e| TwinError::Format(e.message().to_owned()))
    }

    pub fn sensor(&self, id: &str) -> Option<&TwinSensor> {
        self.sensors.iter().find(|s| s.id == id)
    }
}

impl TwinSensor {
    pub fn extrinsic_at(&self, row: usize, col: usize) -> f64 {
        self.extrinsic[row * 4 + col]
    }
}

/// Builds the twin bundle. Sensors without a field of view carry no optical
/// parameters and are left out.
pub fn export_twin(rig: &RigSpec) -> Result<TwinDocument, TwinError> {
    let report = validate_rig(rig);
    if !report.is_accepted() {
        return Err(TwinError::Invalid(report));
    }
    let sensors = rig
        .sensors
        .iter()
        .filter_map(|s| {
            let fov = s.fov?;
            let m = s.pose.homogeneous();
            let mut extrinsic = [0.0; 16];
            for r in 0..4 {
                for c in 0..4 {
                    extrinsic[r * 4 + c] = m[(r, c)];
                }
            }
            let (lines, width_px, height_px) = match s.resolution {
                Some(Resolution::Lines(l)) => (Some(l), None, None),
                Some(Resolution::Pixels { width, height }) => (None, Some(width), Some(height)),
                None => (None, None, None),
            };
            Some(TwinSensor {
                id: s.id.clone(),
                modality: s.modality,
                extrinsic,
                intrinsic: Intrinsics {
                    azimuth_fov_deg: fov.azimuth.degrees(),
                    elevation_fov_deg: fov.elevation.degrees(),
                    max_range_m: fov.max_range_m,
                    frame_rate_hz: s.frame_rate_hz,
                    lines,
                    width_px,
                    height_px,
                },
            })
        })
        .collect();
    Ok(TwinDocument {
        name: rig.name.clone(),
        body_boxes: rig
            .vehicle
            .occluders
            .iter()
            .map(|b| {
                [
                    b.center.x,
                    b.center.y,
                    b.center.z,
                    b.half_extents.x,
                    b.half_extents.y,
                    b.half_extents.z,
                    b.yaw.degrees(),
                ]
            })
            .collect(),
        sensors,
    })
}
