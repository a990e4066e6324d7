use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Modality, Resolution, RigSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FindingCode {
    DuplicateId,
    InvalidId,
    RangeNonpositive,
    AzimuthFovInvalid,
    ElevationFovInvalid,
    MissingFov,
    PoseNonfinite,
    FrameRateNonpositive,
    ResolutionMismatch,
    NoOccluder,
    HalfExtentNonpositive,
    PortOutOfRange,
    PortConflict,
    DemandExceedsLink,
    VlanInvalid,
    BondInvalid,
    UnknownRail,
    DuplicateRail,
    EfficiencyOutOfRange,
    CapacityNonpositive,
    UnknownRegularGroup,
    SensorUnconnected,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        use FindingCode::*;
        match self {
            DuplicateId => "DUPLICATE_ID",
            InvalidId => "INVALID_ID",
            RangeNonpositive => "RANGE_NONPOSITIVE",
            AzimuthFovInvalid => "AZIMUTH_FOV_INVALID",
            ElevationFovInvalid => "ELEVATION_FOV_INVALID",
            MissingFov => "MISSING_FOV",
            PoseNonfinite => "POSE_NONFINITE",
            FrameRateNonpositive => "FRAME_RATE_NONPOSITIVE",
            ResolutionMismatch => "RESOLUTION_MISMATCH",
            NoOccluder => "NO_OCCLUDER",
            HalfExtentNonpositive => "HALF_EXTENT_NONPOSITIVE",
            PortOutOfRange => "PORT_OUT_OF_RANGE",
            PortConflict => "PORT_CONFLICT",
            DemandExceedsLink => "DEMAND_EXCEEDS_LINK",
            VlanInvalid => "VLAN_INVALID",
            BondInvalid => "BOND_INVALID",
            UnknownRail => "UNKNOWN_RAIL",
            DuplicateRail => "DUPLICATE_RAIL",
            EfficiencyOutOfRange => "EFFICIENCY_OUT_OF_RANGE",
            CapacityNonpositive => "CAPACITY_NONPOSITIVE",
            UnknownRegularGroup => "UNKNOWN_REGULAR_GROUP",
            SensorUnconnected => "SENSOR_UNCONNECTED",
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub code: FindingCode,
    pub message: String,
    pub path: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_error(&self, code: FindingCode) -> bool {
        self.errors.iter().any(|f| f.code == code)
    }

    fn error(&mut self, code: FindingCode, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Finding {
            code,
            message: message.into(),
            path: path.into(),
        });
    }

    fn warn(&mut self, code: FindingCode, path: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Finding {
            code,
            message: message.into(),
            path: path.into(),
        });
    }

    /// Structured-text rendering; one finding per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "accepted = {}\nerrors = {}\nwarnings = {}\n",
            self.is_accepted(),
            self.errors.len(),
            self.warnings.len()
        ));
        for f in &self.errors {
            out.push_str(&format!("error {f}\n"));
        }
        for f in &self.warnings {
            out.push_str(&format!("warning {f}\n"));
        }
        out
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Checks type invariants and cross references. Findings come out in a fixed
/// order: vehicle, sensors (document order), network, power.
pub fn validate_rig(rig: &RigSpec) -> ValidationReport {
    use FindingCode::*;
    let mut r = ValidationReport::default();

    if rig.vehicle.occluders.is_empty() {
        r.error(NoOccluder, "vehicle.occluders", "at least the body shell is required");
    }
    for (i, b) in rig.vehicle.occluders.iter().enumerate() {
        if b.half_extents.iter().any(|h| !(*h > 0.0)) {
            r.error(
                HalfExtentNonpositive,
                format!("vehicle.occluders[{i}].half_extents"),
                "half extents must be strictly positive",
            );
        }
    }

    let net = &rig.network;
    let mut seen_ids: BTreeSet<&str> = BTreeSet::new();
    let mut ports: BTreeMap<u32, String> = BTreeMap::new();
    if let Some(router) = &net.router {
        ports.insert(router.port, "router".to_owned());
        if router.port == 0 || router.port > net.switch_ports {
            r.error(
                PortOutOfRange,
                "network.router.port",
                format!("port {} outside 1..={}", router.port, net.switch_ports),
            );
        }
    }
    for (i, s) in rig.sensors.iter().enumerate() {
        let p = format!("sensors[{i}]");
        if !valid_id(&s.id) {
            r.error(InvalidId, format!("{p}.id"), format!("`{}` is not a valid identifier", s.id));
        }
        if !seen_ids.insert(&s.id) {
            r.error(DuplicateId, format!("{p}.id"), format!("`{}` is used twice", s.id));
        }
        let pos = s.pose.position;
        if !(pos.iter().all(|c| c.is_finite())
            && s.pose.yaw.degrees().is_finite()
            && s.pose.pitch.degrees().is_finite()
            && s.pose.roll.degrees().is_finite())
        {
            r.error(PoseNonfinite, format!("{p}.position_m"), "pose must be finite");
        }
        match s.fov {
            Some(fov) => {
                let az = fov.azimuth.degrees();
                if !(az > 0.0 && az <= 360.0) {
                    r.error(
                        AzimuthFovInvalid,
                        format!("{p}.azimuth_fov_deg"),
                        format!("{az} outside (0, 360]"),
                    );
                }
                let el = fov.elevation.degrees();
                if !(el > 0.0 && el < 180.0) {
                    r.error(
                        ElevationFovInvalid,
                        format!("{p}.elevation_fov_deg"),
                        format!("{el} outside (0, 180)"),
                    );
                }
                if !(fov.max_range_m > 0.0) || !fov.max_range_m.is_finite() {
                    r.error(
                        RangeNonpositive,
                        format!("{p}.max_range_m"),
                        format!("range {} must be positive", fov.max_range_m),
                    );
                }
            }
            None if s.modality.has_frustum() => {
                r.error(MissingFov, p.clone(), format!("{} sensors need a field of view", s.modality));
            }
            None => {}
        }
        if let Some(f) = s.frame_rate_hz {
            if !(f > 0.0) {
                r.error(FrameRateNonpositive, format!("{p}.frame_rate_hz"), "frame rate must be positive");
            }
        }
        let res_ok = match (s.modality, s.resolution) {
            (_, None) => true,
            (Modality::Camera, Some(Resolution::Pixels { width, height })) => width > 0 && height > 0,
            (Modality::Camera, Some(Resolution::Lines(_))) => false,
            (_, Some(Resolution::Pixels { .. })) => false,
            (_, Some(Resolution::Lines(l))) => l > 0,
        };
        if !res_ok {
            r.error(
                ResolutionMismatch,
                format!("{p}.resolution"),
                format!("resolution does not fit a {} sensor", s.modality),
            );
        }
        match s.port {
            Some(port) => {
                if port == 0 || port > net.switch_ports {
                    r.error(
                        PortOutOfRange,
                        format!("{p}.port"),
                        format!("port {port} outside 1..={}", net.switch_ports),
                    );
                }
                if let Some(other) = ports.insert(port, s.id.clone()) {
                    r.error(
                        PortConflict,
                        format!("{p}.port"),
                        format!("port {port} already used by `{other}`"),
                    );
                }
                if s.net_demand_bps > net.device_link_bps {
                    r.warn(
                        DemandExceedsLink,
                        format!("{p}.net_demand_bps"),
                        format!(
                            "demand {} exceeds the {} bit/s access link",
                            s.net_demand_bps, net.device_link_bps
                        ),
                    );
                }
            }
            None => r.warn(SensorUnconnected, format!("{p}.port"), "not attached to the network"),
        }
    }

    for (m, id) in &net.vlans {
        if *id == 0 || *id > 4094 {
            r.error(VlanInvalid, format!("network.vlans.{m}"), format!("VLAN id {id} outside 1..=4094"));
        }
    }
    if net.bond_members == 0 || net.bond_members > net.sfp_ports {
        r.error(
            BondInvalid,
            "network.bond_members",
            format!("{} members on {} uplink ports", net.bond_members, net.sfp_ports),
        );
    }

    let power = &rig.power;
    if !(power.battery.capacity_wh > 0.0) {
        r.error(CapacityNonpositive, "power.battery.capacity_wh", "capacity must be positive");
    }
    let mut rail_names = BTreeSet::new();
    for (i, rail) in power.rails.iter().enumerate() {
        if !rail_names.insert(rail.name.as_str()) {
            r.error(DuplicateRail, format!("power.rails[{i}].name"), format!("`{}` declared twice", rail.name));
        }
        if !(rail.efficiency > 0.0 && rail.efficiency <= 1.0) {
            r.error(
                EfficiencyOutOfRange,
                format!("power.rails[{i}].efficiency"),
                format!("{} outside (0, 1]", rail.efficiency),
            );
        }
    }
    for (i, load) in power.loads.iter().enumerate() {
        if !rail_names.contains(load.rail.as_str()) {
            r.error(
                UnknownRail,
                format!("power.loads[{i}].rail"),
                format!("`{}` is not a declared rail", load.rail),
            );
        }
    }
    let groups = power.groups();
    for (i, g) in power.regular_groups.iter().enumerate() {
        if !groups.contains(g.as_str()) {
            r.error(
                UnknownRegularGroup,
                format!("power.regular_groups[{i}]"),
                format!("`{g}` owns no load"),
            );
        }
    }
    r
}
