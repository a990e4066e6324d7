//! Declarative description of a sensor rig: vehicle body, sensors, network
//! and power system.
//!
//! [`parse_rig`] reads the text document, [`validate_rig`] checks it and
//! [`export_twin`] turns an accepted rig into a simulator parameter bundle.

mod doc;
mod twin;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{Angle, OrientedBox, Pose};
use crate::power::PowerSystem;

pub use doc::{parse_rig, serialize_rig, ParseError};
pub use twin::{export_twin, Intrinsics, TwinDocument, TwinError, TwinSensor};
pub use validate::{validate_rig, Finding, FindingCode, ValidationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    LidarMidRange,
    LidarLongRange,
    #[serde(rename = "lidar_4d")]
    Lidar4d,
    Camera,
    Radar,
    Gnss,
    V2x,
}

impl Modality {
    pub const ALL: [Modality; 7] = [
        Modality::LidarMidRange,
        Modality::LidarLongRange,
        Modality::Lidar4d,
        Modality::Camera,
        Modality::Radar,
        Modality::Gnss,
        Modality::V2x,
    ];

    /// The groups whose ground-level coverage is expected to close a full circle.
    pub const SURROUND_GROUPS: [Modality; 4] = [
        Modality::LidarMidRange,
        Modality::LidarLongRange,
        Modality::Lidar4d,
        Modality::Camera,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::LidarMidRange => "lidar_mid_range",
            Modality::LidarLongRange => "lidar_long_range",
            Modality::Lidar4d => "lidar_4d",
            Modality::Camera => "camera",
            Modality::Radar => "radar",
            Modality::Gnss => "gnss",
            Modality::V2x => "v2x",
        }
    }

    /// Communication-only nodes have no field of view.
    pub fn has_frustum(self) -> bool {
        self != Modality::V2x
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Modality::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown modality `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution {
    /// Scan lines of a LiDAR.
    Lines(u32),
    /// Image size of a camera.
    Pixels { width: u32, height: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldOfView {
    pub azimuth: Angle,
    pub elevation: Angle,
    pub max_range_m: f64,
}

impl FieldOfView {
    /// Spinning LiDARs see the full horizon.
    pub fn is_full_azimuth(&self) -> bool {
        self.azimuth.degrees() >= 360.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sensor {
    pub id: String,
    pub modality: Modality,
    pub provenance: Option<String>,
    pub pose: Pose,
    /// `None` only for communication nodes.
    pub fov: Option<FieldOfView>,
    pub resolution: Option<Resolution>,
    pub frame_rate_hz: Option<f64>,
    /// Switch port the device is cabled to; `None` when unconnected.
    pub port: Option<u32>,
    pub net_demand_bps: u64,
    /// 1000BASE-T1 devices reach the switch through a media converter.
    pub automotive_ethernet: bool,
    /// Power drawn from the switch over PoE, 0 when not PoE powered.
    pub poe_w: f64,
    pub time_sensitive: bool,
    pub grandmaster: bool,
}

impl Sensor {
    /// A sensor with a frustum and no network attachment. Mostly useful for tests
    /// and programmatic rigs.
    pub fn new(id: impl Into<String>, modality: Modality, pose: Pose, fov: FieldOfView) -> Self {
        Sensor {
            id: id.into(),
            modality,
            provenance: None,
            pose,
            fov: Some(fov),
            resolution: None,
            frame_rate_hz: None,
            port: None,
            net_demand_bps: 0,
            automotive_ethernet: false,
            poe_w: 0.0,
            time_sensitive: modality != Modality::V2x,
            grandmaster: false,
        }
    }

    pub fn is_networked(&self) -> bool {
        self.port.is_some()
    }

    /// The same sensor reflected across the vehicle's x-z plane.
    pub fn mirrored(&self) -> Self {
        let mut s = self.clone();
        s.pose.position.y = -s.pose.position.y;
        s.pose.yaw = -s.pose.yaw;
        s.pose.roll = -s.pose.roll;
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VehicleBody {
    pub occluders: Vec<OrientedBox>,
}

impl VehicleBody {
    pub fn footprint_contains(&self, x: f64, y: f64) -> bool {
        self.occluders.iter().any(|b| b.footprint_contains(x, y))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouterConfig {
    pub port: u32,
    pub vlan: u16,
    pub link_bps: u64,
    pub uplink_bps: u64,
    /// Whether any uplink (cellular or wired) is currently up.
    pub available: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetConfig {
    pub switch_ports: u32,
    pub device_link_bps: u64,
    pub sfp_ports: u32,
    pub bond_members: u32,
    pub bond_member_bps: u64,
    pub disk_write_bps: u64,
    pub poe_budget_w: f64,
    pub vlans: BTreeMap<Modality, u16>,
    /// VLANs tagged on the server's bonded uplink.
    pub trunk_vlans: Vec<u16>,
    pub router: Option<RouterConfig>,
}

impl NetConfig {
    pub fn vlan_of(&self, modality: Modality) -> u16 {
        self.vlans[&modality]
    }
}

impl Default for NetConfig {
    fn default() -> Self {
        let vlans: BTreeMap<Modality, u16> = Modality::ALL
            .into_iter()
            .map(|m| (m, default_vlan(m)))
            .collect();
        let mut trunk_vlans: Vec<u16> = vlans.values().copied().collect();
        trunk_vlans.sort_unstable();
        NetConfig {
            switch_ports: 52,
            device_link_bps: 1_000_000_000,
            sfp_ports: 4,
            bond_members: 4,
            bond_member_bps: 10_000_000_000,
            disk_write_bps: 33_400_000_000,
            poe_budget_w: 740.0,
            vlans,
            trunk_vlans,
            router: None,
        }
    }
}

pub(crate) fn default_vlan(m: Modality) -> u16 {
    match m {
        Modality::Lidar4d => 10,
        Modality::LidarMidRange => 11,
        Modality::LidarLongRange => 12,
        Modality::Camera => 20,
        Modality::Radar => 30,
        Modality::Gnss => 40,
        Modality::V2x => 50,
    }
}

/// A complete platform description. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct RigSpec {
    pub name: String,
    pub provenance: Option<String>,
    pub vehicle: VehicleBody,
    pub sensors: Vec<Sensor>,
    pub network: NetConfig,
    pub power: PowerSystem,
}

impl RigSpec {
    pub fn sensor(&self, id: &str) -> Option<&Sensor> {
        self.sensors.iter().find(|s| s.id == id)
    }

    pub fn group(&self, modality: Modality) -> impl Iterator<Item = &Sensor> + '_ {
        self.sensors.iter().filter(move |s| s.modality == modality)
    }

    /// Same rig reflected across the x-z plane.
    pub fn mirrored(&self) -> Self {
        let mut r = self.clone();
        r.sensors = self.sensors.iter().map(Sensor::mirrored).collect();
        r.vehicle.occluders = self.vehicle.occluders.iter().map(OrientedBox::mirrored).collect();
        r
    }
}

const BUNDLED_RIG: &str = include_str!("../../data/cocar-nextgen.toml");

/// Source text of the bundled reference rig.
pub fn bundled_rig_source() -> &'static str {
    BUNDLED_RIG
}

/// The bundled reference rig, parsed.
pub fn bundled_rig() -> RigSpec {
    parse_rig(BUNDLED_RIG).expect("bundled rig parses")
}
