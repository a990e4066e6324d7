//! Text form of a rig (TOML).
//!
//! Angles are degrees, lengths metres, rates bit/s, power watts. Parsing fills
//! in every default so the resulting [`RigSpec`] is complete, and
//! [`serialize_rig`] writes every field back explicitly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    default_vlan, FieldOfView, Modality, NetConfig, Resolution, RigSpec, RouterConfig, Sensor,
    VehicleBody,
};
use crate::geometry::{Angle, OrientedBox, Pose};
use crate::power::{
    Battery, Boosters, Load, PowerSystem, Rail, RailKind, ShorePower, DEFAULT_DCDC_EFFICIENCY,
    DEFAULT_INVERTER_EFFICIENCY,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown field at line {line}, column {column}: {message}")]
    UnknownField {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unit violation at `{path}`: {message}")]
    Unit { path: String, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RigDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    vehicle: VehicleDoc,
    #[serde(default)]
    sensors: Vec<SensorDoc>,
    #[serde(default)]
    network: NetworkDoc,
    #[serde(default)]
    power: PowerDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleDoc {
    #[serde(default)]
    occluders: Vec<OccluderDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OccluderDoc {
    center: [f64; 3],
    half_extents: [f64; 3],
    #[serde(default)]
    yaw_deg: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorDoc {
    id: String,
    modality: Modality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    position_m: [f64; 3],
    #[serde(default)]
    yaw_deg: f64,
    #[serde(default)]
    pitch_deg: f64,
    #[serde(default)]
    roll_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    azimuth_fov_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elevation_fov_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_range_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    port: Option<PortDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    net_demand_bps: Option<u64>,
    #[serde(default)]
    automotive_ethernet: bool,
    #[serde(default)]
    poe_w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time_sensitive: Option<bool>,
    #[serde(default)]
    grandmaster: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resolution: Option<ResolutionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResolutionDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lines: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    height: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PortDoc {
    Number(u32),
    Word(String),
}

const UNCONNECTED: &str = "unconnected";

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    switch_ports: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    device_link_bps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sfp_ports: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bond_members: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bond_member_bps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disk_write_bps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poe_budget_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trunk_vlans: Option<Vec<u16>>,
    #[serde(default)]
    vlans: BTreeMap<String, u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    router: Option<RouterDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouterDoc {
    port: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vlan: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    link_bps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uplink_bps: Option<u64>,
    #[serde(default = "yes")]
    available: bool,
}

fn yes() -> bool {
    true
}

const DEFAULT_ROUTER_VLAN: u16 = 99;

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    regular_groups: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    battery: Option<BatteryDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boosters: Option<BoostersDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shore: Option<ShoreDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rails: Option<Vec<RailDoc>>,
    #[serde(default)]
    loads: Vec<LoadDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatteryDoc {
    capacity_wh: f64,
    nominal_voltage_v: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoostersDoc {
    count: u32,
    unit_w: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShoreDoc {
    charger_max_w: f64,
    passthrough_max_w: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RailDoc {
    name: String,
    kind: RailKind,
    voltage_v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    efficiency: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadDoc {
    name: String,
    group: String,
    rail: String,
    draw_w: f64,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses a rig document and resolves all defaults.
pub fn parse_rig(text: &str) -> Result<RigSpec, ParseError> {
    let located = |e: &toml::de::Error| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        (line, column, e.message().trim().to_owned())
    };
    if let Err(e) = text.parse::<toml::Table>() {
        let (line, column, message) = located(&e);
        return Err(ParseError::Syntax {
            line,
            column,
            message,
        });
    }
    let doc: RigDoc = toml::from_str(text).map_err(|e| {
        let (line, column, message) = located(&e);
        if message.contains("unknown field") {
            ParseError::UnknownField {
                line,
                column,
                message,
            }
        } else {
            ParseError::Schema {
                line,
                column,
                message,
            }
        }
    })?;
    doc.into_rig()
}

/// Writes a rig as a document that [`parse_rig`] reads back to an equal value.
pub fn serialize_rig(rig: &RigSpec) -> String {
    toml::to_string(&RigDoc::from_rig(rig)).expect("rig documents always serialize")
}

fn unit(path: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Unit {
        path: path.into(),
        message: message.into(),
    }
}

/// Magnitudes may be zero (validation decides) but never negative or non-finite.
fn magnitude(path: &str, v: f64) -> Result<f64, ParseError> {
    if !v.is_finite() {
        return Err(unit(path, format!("{v} is not a finite number")));
    }
    if v < 0.0 {
        return Err(unit(path, format!("negative value {v}")));
    }
    Ok(v)
}

fn finite(path: &str, v: f64) -> Result<f64, ParseError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(unit(path, format!("{v} is not a finite number")))
    }
}

fn finite3(path: &str, v: [f64; 3]) -> Result<[f64; 3], ParseError> {
    for (i, c) in v.iter().enumerate() {
        finite(&format!("{path}[{i}]"), *c)?;
    }
    Ok(v)
}

impl RigDoc {
    fn into_rig(self) -> Result<RigSpec, ParseError> {
        let occluders = self
            .vehicle
            .occluders
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let p = format!("vehicle.occluders[{i}]");
                let center = finite3(&format!("{p}.center"), o.center)?;
                let half = finite3(&format!("{p}.half_extents"), o.half_extents)?;
                for (a, h) in half.iter().enumerate() {
                    magnitude(&format!("{p}.half_extents[{a}]"), *h)?;
                }
                let yaw = finite(&format!("{p}.yaw_deg"), o.yaw_deg)?;
                Ok(OrientedBox::new(center, half, Angle::from_degrees(yaw)))
            })
            .collect::<Result<Vec<_>, ParseError>>()?;

        let network = self.network.into_config()?;
        let sensors = self
            .sensors
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.into_sensor(i, &network))
            .collect::<Result<Vec<_>, _>>()?;
        let power = self.power.into_system()?;
        Ok(RigSpec {
            name: self.name,
            provenance: self.provenance,
            vehicle: VehicleBody { occluders },
            sensors,
            network,
            power,
        })
    }

    fn from_rig(rig: &RigSpec) -> Self {
        RigDoc {
            name: rig.name.clone(),
            provenance: rig.provenance.clone(),
            vehicle: VehicleDoc {
                occluders: rig
                    .vehicle
                    .occluders
                    .iter()
                    .map(|b| OccluderDoc {
                        center: b.center.coords.into(),
                        half_extents: b.half_extents.into(),
                        yaw_deg: b.yaw.degrees(),
                    })
                    .collect(),
            },
            sensors: rig.sensors.iter().map(SensorDoc::from_sensor).collect(),
            network: NetworkDoc::from_config(&rig.network),
            power: PowerDoc::from_system(&rig.power),
        }
    }
}

impl SensorDoc {
    fn into_sensor(self, index: usize, net: &NetConfig) -> Result<Sensor, ParseError> {
        let p = format!("sensors[{index}]");
        let position = finite3(&format!("{p}.position_m"), self.position_m)?;
        let yaw = finite(&format!("{p}.yaw_deg"), self.yaw_deg)?;
        let pitch = finite(&format!("{p}.pitch_deg"), self.pitch_deg)?;
        let roll = finite(&format!("{p}.roll_deg"), self.roll_deg)?;

        let fov = match (self.azimuth_fov_deg, self.elevation_fov_deg, self.max_range_m) {
            (None, None, None) => None,
            (Some(az), Some(el), Some(range)) => Some(FieldOfView {
                azimuth: Angle::from_degrees(magnitude(&format!("{p}.azimuth_fov_deg"), az)?),
                elevation: Angle::from_degrees(magnitude(&format!("{p}.elevation_fov_deg"), el)?),
                max_range_m: magnitude(&format!("{p}.max_range_m"), range)?,
            }),
            _ => {
                return Err(unit(
                    p,
                    "azimuth_fov_deg, elevation_fov_deg and max_range_m must be given together",
                ))
            }
        };

        let resolution = match self.resolution {
            None => None,
            Some(ResolutionDoc {
                lines: Some(l),
                width: None,
                height: None,
            }) => Some(Resolution::Lines(l)),
            Some(ResolutionDoc {
                lines: None,
                width: Some(width),
                height: Some(height),
            }) => Some(Resolution::Pixels { width, height }),
            Some(_) => {
                return Err(unit(
                    format!("{p}.resolution"),
                    "expected either `lines` or both `width` and `height`",
                ))
            }
        };

        let frame_rate_hz = self
            .frame_rate_hz
            .map(|f| magnitude(&format!("{p}.frame_rate_hz"), f))
            .transpose()?;

        let port = match self.port {
            None => None,
            Some(PortDoc::Number(n)) => Some(n),
            Some(PortDoc::Word(w)) if w == UNCONNECTED => None,
            Some(PortDoc::Word(w)) => {
                return Err(unit(
                    format!("{p}.port"),
                    format!("expected a port number or \"{UNCONNECTED}\", got \"{w}\""),
                ))
            }
        };
        let default_demand = if port.is_some() {
            net.device_link_bps
        } else {
            0
        };

        Ok(Sensor {
            id: self.id,
            modality: self.modality,
            provenance: self.provenance,
            pose: Pose::new(
                position,
                Angle::from_degrees(yaw),
                Angle::from_degrees(pitch),
                Angle::from_degrees(roll),
            ),
            fov,
            resolution,
            frame_rate_hz,
            port,
            net_demand_bps: self.net_demand_bps.unwrap_or(default_demand),
            automotive_ethernet: self.automotive_ethernet,
            poe_w: magnitude(&format!("{p}.poe_w"), self.poe_w)?,
            time_sensitive: self
                .time_sensitive
                .unwrap_or(self.modality != Modality::V2x),
            grandmaster: self.grandmaster,
        })
    }

    fn from_sensor(s: &Sensor) -> Self {
        SensorDoc {
            id: s.id.clone(),
            modality: s.modality,
            provenance: s.provenance.clone(),
            position_m: s.pose.position.coords.into(),
            yaw_deg: s.pose.yaw.degrees(),
            pitch_deg: s.pose.pitch.degrees(),
            roll_deg: s.pose.roll.degrees(),
            azimuth_fov_deg: s.fov.map(|f| f.azimuth.degrees()),
            elevation_fov_deg: s.fov.map(|f| f.elevation.degrees()),
            max_range_m: s.fov.map(|f| f.max_range_m),
            frame_rate_hz: s.frame_rate_hz,
            port: Some(match s.port {
                Some(n) => PortDoc::Number(n),
                None => PortDoc::Word(UNCONNECTED.into()),
            }),
            net_demand_bps: Some(s.net_demand_bps),
            automotive_ethernet: s.automotive_ethernet,
            poe_w: s.poe_w,
            time_sensitive: Some(s.time_sensitive),
            grandmaster: s.grandmaster,
            resolution: s.resolution.map(|r| match r {
                Resolution::Lines(l) => ResolutionDoc {
                    lines: Some(l),
                    width: None,
                    height: None,
                },
                Resolution::Pixels { width, height } => ResolutionDoc {
                    lines: None,
                    width: Some(width),
                    height: Some(height),
                },
            }),
        }
    }
}

impl NetworkDoc {
    fn into_config(self) -> Result<NetConfig, ParseError> {
        let d = NetConfig::default();
        let mut vlans: BTreeMap<Modality, u16> =
            Modality::ALL.into_iter().map(|m| (m, default_vlan(m))).collect();
        for (key, id) in self.vlans {
            let m: Modality = key
                .parse()
                .map_err(|e: String| unit(format!("network.vlans.{key}"), e))?;
            vlans.insert(m, id);
        }
        let device_link_bps = self.device_link_bps.unwrap_or(d.device_link_bps);
        let router = self.router.map(|r| RouterConfig {
            port: r.port,
            vlan: r.vlan.unwrap_or(DEFAULT_ROUTER_VLAN),
            link_bps: r.link_bps.unwrap_or(device_link_bps),
            uplink_bps: r.uplink_bps.unwrap_or(device_link_bps),
            available: r.available,
        });
        let trunk_vlans = match self.trunk_vlans {
            Some(mut t) => {
                t.sort_unstable();
                t.dedup();
                t
            }
            None => {
                let mut t: Vec<u16> = vlans.values().copied().collect();
                t.extend(router.as_ref().map(|r| r.vlan));
                t.sort_unstable();
                t.dedup();
                t
            }
        };
        Ok(NetConfig {
            switch_ports: self.switch_ports.unwrap_or(d.switch_ports),
            device_link_bps,
            sfp_ports: self.sfp_ports.unwrap_or(d.sfp_ports),
            bond_members: self.bond_members.unwrap_or(d.bond_members),
            bond_member_bps: self.bond_member_bps.unwrap_or(d.bond_member_bps),
            disk_write_bps: self.disk_write_bps.unwrap_or(d.disk_write_bps),
            poe_budget_w: magnitude(
                "network.poe_budget_w",
                self.poe_budget_w.unwrap_or(d.poe_budget_w),
            )?,
            vlans,
            trunk_vlans,
            router,
        })
    }

    fn from_config(c: &NetConfig) -> Self {
        NetworkDoc {
            switch_ports: Some(c.switch_ports),
            device_link_bps: Some(c.device_link_bps),
            sfp_ports: Some(c.sfp_ports),
            bond_members: Some(c.bond_members),
            bond_member_bps: Some(c.bond_member_bps),
            disk_write_bps: Some(c.disk_write_bps),
            poe_budget_w: Some(c.poe_budget_w),
            trunk_vlans: Some(c.trunk_vlans.clone()),
            vlans: c
                .vlans
                .iter()
                .map(|(m, id)| (m.as_str().to_owned(), *id))
                .collect(),
            router: c.router.as_ref().map(|r| RouterDoc {
                port: r.port,
                vlan: Some(r.vlan),
                link_bps: Some(r.link_bps),
                uplink_bps: Some(r.uplink_bps),
                available: r.available,
            }),
        }
    }
}

impl PowerDoc {
    fn into_system(self) -> Result<PowerSystem, ParseError> {
        let d = PowerSystem::default();
        let battery = match self.battery {
            Some(b) => Battery {
                capacity_wh: magnitude("power.battery.capacity_wh", b.capacity_wh)?,
                nominal_voltage_v: magnitude("power.battery.nominal_voltage_v", b.nominal_voltage_v)?,
            },
            None => d.battery,
        };
        let rails = match self.rails {
            Some(rails) => rails
                .into_iter()
                .enumerate()
                .map(|(i, r)| {
                    let p = format!("power.rails[{i}]");
                    let voltage_v = magnitude(&format!("{p}.voltage_v"), r.voltage_v)?;
                    let efficiency = match r.efficiency {
                        Some(e) => magnitude(&format!("{p}.efficiency"), e)?,
                        None => match r.kind {
                            RailKind::Ac => DEFAULT_INVERTER_EFFICIENCY,
                            RailKind::Dc if voltage_v == battery.nominal_voltage_v => 1.0,
                            RailKind::Dc => DEFAULT_DCDC_EFFICIENCY,
                        },
                    };
                    Ok(Rail {
                        name: r.name,
                        kind: r.kind,
                        voltage_v,
                        efficiency,
                    })
                })
                .collect::<Result<Vec<_>, ParseError>>()?,
            None => d.rails,
        };
        let loads = self
            .loads
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                Ok(Load {
                    draw_w: magnitude(&format!("power.loads[{i}].draw_w"), l.draw_w)?,
                    name: l.name,
                    group: l.group,
                    rail: l.rail,
                })
            })
            .collect::<Result<Vec<_>, ParseError>>()?;
        let boosters = match self.boosters {
            Some(b) => Boosters {
                count: b.count,
                unit_w: magnitude("power.boosters.unit_w", b.unit_w)?,
            },
            None => d.boosters,
        };
        let shore = match self.shore {
            Some(s) => ShorePower {
                charger_max_w: magnitude("power.shore.charger_max_w", s.charger_max_w)?,
                passthrough_max_w: magnitude("power.shore.passthrough_max_w", s.passthrough_max_w)?,
            },
            None => d.shore,
        };
        Ok(PowerSystem {
            battery,
            rails,
            loads,
            boosters,
            shore,
            regular_groups: self.regular_groups.unwrap_or_default(),
        })
    }

    fn from_system(p: &PowerSystem) -> Self {
        PowerDoc {
            regular_groups: Some(p.regular_groups.clone()),
            battery: Some(BatteryDoc {
                capacity_wh: p.battery.capacity_wh,
                nominal_voltage_v: p.battery.nominal_voltage_v,
            }),
            boosters: Some(BoostersDoc {
                count: p.boosters.count,
                unit_w: p.boosters.unit_w,
            }),
            shore: Some(ShoreDoc {
                charger_max_w: p.shore.charger_max_w,
                passthrough_max_w: p.shore.passthrough_max_w,
            }),
            rails: Some(
                p.rails
                    .iter()
                    .map(|r| RailDoc {
                        name: r.name.clone(),
                        kind: r.kind,
                        voltage_v: r.voltage_v,
                        efficiency: Some(r.efficiency),
                    })
                    .collect(),
            ),
            loads: p
                .loads
                .iter()
                .map(|l| LoadDoc {
                    name: l.name.clone(),
                    group: l.group.clone(),
                    rail: l.rail.clone(),
                    draw_w: l.draw_w,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_CAMERA: &str = r#"
name = "minimal"

[[vehicle.occluders]]
center = [1.4, 0.0, 0.7]
half_extents = [2.4, 0.95, 0.7]

[[sensors]]
id = "front_wide"
modality = "camera"
position_m = [1.8, 0.0, 1.7]
azimuth_fov_deg = 120.0
elevation_fov_deg = 90.0
max_range_m = 150.0
resolution = { width = 2590, height = 2048 }
frame_rate_hz = 20.0
"#;

    #[test]
    fn minimal_camera_document() {
        let rig = parse_rig(MINIMAL_CAMERA).unwrap();
        assert_eq!(rig.sensors.len(), 1);
        let s = &rig.sensors[0];
        assert_eq!(s.modality, Modality::Camera);
        let fov = s.fov.unwrap();
        assert_eq!(fov.azimuth.degrees(), 120.0);
        assert!((fov.azimuth.radians() - 2.0 * std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert_eq!(fov.elevation.degrees(), 90.0);
        assert_eq!(
            s.resolution,
            Some(Resolution::Pixels {
                width: 2590,
                height: 2048
            })
        );
        assert_eq!(s.frame_rate_hz, Some(20.0));
        // unconnected: no demand, defaults resolved
        assert_eq!(s.port, None);
        assert_eq!(s.net_demand_bps, 0);
        assert!(s.time_sensitive);
        assert_eq!(rig.network.switch_ports, 52);
        assert_eq!(rig.power.battery.capacity_wh, 10_000.0);
    }

    #[test]
    fn empty_sensor_list() {
        let rig = parse_rig(
            "name = \"shell\"\n[[vehicle.occluders]]\ncenter = [0.0, 0.0, 0.5]\nhalf_extents = [1.0, 1.0, 0.5]\n",
        )
        .unwrap();
        assert!(rig.sensors.is_empty());
        assert_eq!(rig.vehicle.occluders.len(), 1);
    }

    #[test]
    fn connected_sensor_defaults_to_link_capacity() {
        let text = MINIMAL_CAMERA.replace("frame_rate_hz = 20.0", "frame_rate_hz = 20.0\nport = 3");
        let rig = parse_rig(&text).unwrap();
        assert_eq!(rig.sensors[0].port, Some(3));
        assert_eq!(rig.sensors[0].net_demand_bps, 1_000_000_000);
        let text = MINIMAL_CAMERA.replace("frame_rate_hz = 20.0", "port = \"unconnected\"");
        assert_eq!(parse_rig(&text).unwrap().sensors[0].port, None);
    }

    #[test]
    fn syntax_error_reports_position() {
        let text = "name = \"x\"\n[vehicle\n";
        match parse_rig(text) {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = MINIMAL_CAMERA.replace("frame_rate_hz", "framerate_hz");
        match parse_rig(&text) {
            Err(ParseError::UnknownField { line, message, .. }) => {
                assert_eq!(line, 16);
                assert!(message.contains("framerate_hz"), "{message}");
            }
            other => panic!("expected unknown field, got {other:?}"),
        }
    }

    #[test]
    fn negative_range_is_a_unit_violation() {
        let text = MINIMAL_CAMERA.replace("max_range_m = 150.0", "max_range_m = -5.0");
        match parse_rig(&text) {
            Err(ParseError::Unit { path, .. }) => assert_eq!(path, "sensors[0].max_range_m"),
            other => panic!("expected unit violation, got {other:?}"),
        }
        // zero parses; validation rejects it
        let text = MINIMAL_CAMERA.replace("max_range_m = 150.0", "max_range_m = 0.0");
        assert!(parse_rig(&text).is_ok());
    }

    #[test]
    fn partial_fov_and_bad_port_are_rejected() {
        let text = MINIMAL_CAMERA.replace("max_range_m = 150.0\n", "");
        assert!(matches!(parse_rig(&text), Err(ParseError::Unit { .. })));
        let text = MINIMAL_CAMERA.replace("frame_rate_hz = 20.0", "port = \"eth0\"");
        assert!(matches!(parse_rig(&text), Err(ParseError::Unit { .. })));
    }

    #[test]
    fn bundled_document_round_trips() {
        let rig = super::super::bundled_rig();
        let text = serialize_rig(&rig);
        assert_eq!(parse_rig(&text).unwrap(), rig);
        assert_eq!(serialize_rig(&parse_rig(&text).unwrap()), text);
    }
}
