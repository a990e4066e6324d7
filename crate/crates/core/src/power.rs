//! On-board power system: battery, converter rails, switched load groups and
//! external sources (12 V boosters, shore charger, shore AC pass-through).
//!
//! Loads are given at their rail. The battery sees `draw / efficiency` of the
//! rail's converter. Shore AC pass-through feeds AC loads before the inverter
//! draws on the battery. Boosters and the shore charger offset the discharge.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PowerError {
    #[error("unknown switch group `{0}`")]
    UnknownGroup(String),
    #[error("load `{load}` references unknown rail `{rail}`")]
    UnknownRail { load: String, rail: String },
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("segment {index} has non-positive duration {duration_s}")]
    InvalidDuration { index: usize, duration_s: f64 },
    #[error("initial state of charge {0} Wh outside [0, capacity]")]
    InvalidInitialSoc(f64),
    #[error("profile: {0}")]
    Profile(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RailKind {
    Dc,
    Ac,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rail {
    pub name: String,
    pub kind: RailKind,
    pub voltage_v: f64,
    /// Converter efficiency between battery and rail, in (0, 1].
    pub efficiency: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Load {
    pub name: String,
    pub group: String,
    pub rail: String,
    pub draw_w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Battery {
    pub capacity_wh: f64,
    pub nominal_voltage_v: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Boosters {
    pub count: u32,
    pub unit_w: f64,
}

impl Boosters {
    pub fn total_w(&self) -> f64 {
        f64::from(self.count) * self.unit_w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShorePower {
    pub charger_max_w: f64,
    pub passthrough_max_w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSystem {
    pub battery: Battery,
    pub rails: Vec<Rail>,
    pub loads: Vec<Load>,
    pub boosters: Boosters,
    pub shore: ShorePower,
    /// Groups switched on during regular operation; every group is on under full demand.
    pub regular_groups: Vec<String>,
}

pub const DEFAULT_INVERTER_EFFICIENCY: f64 = 0.92;
pub const DEFAULT_DCDC_EFFICIENCY: f64 = 0.95;

impl Default for PowerSystem {
    fn default() -> Self {
        PowerSystem {
            battery: Battery {
                capacity_wh: 10_000.0,
                nominal_voltage_v: 24.0,
            },
            rails: vec![
                Rail {
                    name: "dc24".into(),
                    kind: RailKind::Dc,
                    voltage_v: 24.0,
                    efficiency: 1.0,
                },
                Rail {
                    name: "dc12".into(),
                    kind: RailKind::Dc,
                    voltage_v: 12.0,
                    efficiency: DEFAULT_DCDC_EFFICIENCY,
                },
                Rail {
                    name: "ac230".into(),
                    kind: RailKind::Ac,
                    voltage_v: 230.0,
                    efficiency: DEFAULT_INVERTER_EFFICIENCY,
                },
            ],
            loads: Vec::new(),
            boosters: Boosters {
                count: 2,
                unit_w: 600.0,
            },
            shore: ShorePower {
                charger_max_w: 3000.0,
                passthrough_max_w: 3680.0,
            },
            regular_groups: Vec::new(),
        }
    }
}

impl PowerSystem {
    pub fn rail(&self, name: &str) -> Option<&Rail> {
        self.rails.iter().find(|r| r.name == name)
    }

    /// All switch groups that own at least one load, sorted.
    pub fn groups(&self) -> BTreeSet<&str> {
        self.loads.iter().map(|l| l.group.as_str()).collect()
    }
}

/// Which load groups are switched on.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SwitchStates {
    on: BTreeSet<String>,
}

impl SwitchStates {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn all(system: &PowerSystem) -> Self {
        Self::with(system.groups())
    }

    pub fn regular(system: &PowerSystem) -> Self {
        Self::with(system.regular_groups.iter())
    }

    pub fn with<I, S>(groups: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        SwitchStates {
            on: groups.into_iter().map(|g| g.as_ref().to_owned()).collect(),
        }
    }

    pub fn is_on(&self, group: &str) -> bool {
        self.on.contains(group)
    }

    pub fn set(&mut self, group: &str, on: bool) {
        if on {
            self.on.insert(group.to_owned());
        } else {
            self.on.remove(group);
        }
    }

    pub fn groups(&self) -> impl Iterator<Item = &str> {
        self.on.iter().map(String::as_str)
    }
}

/// Availability of external energy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SourceStates {
    /// Vehicle 12 V network available to the boosters (engine or hybrid battery on).
    pub boosters: bool,
    /// Power offered at the charger connector.
    pub shore_charger_w: f64,
    /// Power offered at the AC pass-through connector.
    pub shore_passthrough_w: f64,
}

impl SourceStates {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn boosters() -> Self {
        SourceStates {
            boosters: true,
            ..Self::default()
        }
    }

    pub fn shore_charger(w: f64) -> Self {
        SourceStates {
            shore_charger_w: w,
            ..Self::default()
        }
    }
}

fn check_groups(system: &PowerSystem, switches: &SwitchStates) -> Result<(), PowerError> {
    let known = system.groups();
    match switches.groups().find(|g| !known.contains(g)) {
        Some(g) => Err(PowerError::UnknownGroup(g.to_owned())),
        None => Ok(()),
    }
}

fn external_supply_w(system: &PowerSystem, sources: &SourceStates) -> f64 {
    let boosters = if sources.boosters {
        system.boosters.total_w()
    } else {
        0.0
    };
    boosters + sources.shore_charger_w.clamp(0.0, system.shore.charger_max_w)
}

/// Battery-side power, positive while discharging.
pub fn net_battery_power(
    system: &PowerSystem,
    switches: &SwitchStates,
    sources: &SourceStates,
) -> Result<f64, PowerError> {
    check_groups(system, switches)?;
    let mut passthrough = sources
        .shore_passthrough_w
        .clamp(0.0, system.shore.passthrough_max_w);
    let mut discharge = 0.0;
    for rail in &system.rails {
        let draw: f64 = system
            .loads
            .iter()
            .filter(|l| l.rail == rail.name && switches.is_on(&l.group))
            .map(|l| l.draw_w)
            .sum();
        let from_battery = match rail.kind {
            RailKind::Dc => draw,
            RailKind::Ac => {
                let covered = draw.min(passthrough);
                passthrough -= covered;
                draw - covered
            }
        };
        discharge += from_battery / rail.efficiency;
    }
    if let Some(l) = system.loads.iter().find(|l| system.rail(&l.rail).is_none()) {
        return Err(PowerError::UnknownRail {
            load: l.name.clone(),
            rail: l.rail.clone(),
        });
    }
    Ok(discharge - external_supply_w(system, sources))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Runtime {
    Finite { hours: f64 },
    Indefinite,
}

impl Runtime {
    fn from_net(capacity_wh: f64, net_w: f64) -> Self {
        if net_w <= 0.0 {
            Runtime::Indefinite
        } else {
            Runtime::Finite {
                hours: capacity_wh / net_w,
            }
        }
    }

    pub fn hours(self) -> Option<f64> {
        match self {
            Runtime::Finite { hours } => Some(hours),
            Runtime::Indefinite => None,
        }
    }
}

/// Hours from a full battery under a constant battery-side load.
pub fn runtime_to_empty(system: &PowerSystem, load_w: f64, sources: &SourceStates) -> Runtime {
    let net = load_w - external_supply_w(system, sources);
    Runtime::from_net(system.battery.capacity_wh, net)
}

/// Hours from a full battery with the given groups and sources.
pub fn runtime_for_states(
    system: &PowerSystem,
    switches: &SwitchStates,
    sources: &SourceStates,
) -> Result<Runtime, PowerError> {
    let net = net_battery_power(system, switches, sources)?;
    Ok(Runtime::from_net(system.battery.capacity_wh, net))
}

pub fn indefinite_operation(
    system: &PowerSystem,
    switches: &SwitchStates,
    sources: &SourceStates,
) -> Result<bool, PowerError> {
    Ok(net_battery_power(system, switches, sources)? <= 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub duration_s: f64,
    pub switches: SwitchStates,
    pub sources: SourceStates,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SocSample {
    pub t_s: f64,
    pub soc_wh: f64,
    /// Battery-side power over the step that ends at `t_s`.
    pub net_w: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerEventKind {
    Depleted,
    Full,
    SourcesChanged,
    SwitchesChanged,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerEvent {
    pub t_s: f64,
    pub kind: PowerEventKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SocTrace {
    pub capacity_wh: f64,
    pub samples: Vec<SocSample>,
    pub events: Vec<PowerEvent>,
}

impl SocTrace {
    pub fn final_sample(&self) -> SocSample {
        *self.samples.last().expect("trace has an initial sample")
    }

    pub fn depleted_at(&self) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.kind == PowerEventKind::Depleted)
            .map(|e| e.t_s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,soc_wh,net_w\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", s.t_s, s.soc_wh, s.net_w);
        }
        out
    }
}

/// Forward-Euler state-of-charge integration over a piecewise-constant profile.
///
/// Steps never straddle a segment boundary, so boundary samples carry the
/// exact piecewise-linear value up to rounding. Depletion truncates the trace
/// at the interpolated crossing time; charging saturates at capacity.
pub fn simulate_soc(
    system: &PowerSystem,
    profile: &[Segment],
    dt_s: f64,
    initial_soc_wh: f64,
) -> Result<SocTrace, PowerError> {
    if !(dt_s > 0.0) || !dt_s.is_finite() {
        return Err(PowerError::InvalidStep(dt_s));
    }
    let capacity = system.battery.capacity_wh;
    if !(0.0..=capacity).contains(&initial_soc_wh) {
        return Err(PowerError::InvalidInitialSoc(initial_soc_wh));
    }
    // resolve every segment up front so a bad profile fails before integrating
    let mut powers = Vec::with_capacity(profile.len());
    for (index, seg) in profile.iter().enumerate() {
        if !(seg.duration_s > 0.0) || !seg.duration_s.is_finite() {
            return Err(PowerError::InvalidDuration {
                index,
                duration_s: seg.duration_s,
            });
        }
        powers.push(net_battery_power(system, &seg.switches, &seg.sources)?);
    }

    let mut trace = SocTrace {
        capacity_wh: capacity,
        samples: vec![SocSample {
            t_s: 0.0,
            soc_wh: initial_soc_wh,
            net_w: powers.first().copied().unwrap_or(0.0),
        }],
        events: Vec::new(),
    };
    let mut soc = initial_soc_wh;
    let mut seg_start = 0.0;
    for (i, (seg, &p)) in profile.iter().zip(&powers).enumerate() {
        if i > 0 {
            let prev = &profile[i - 1];
            if prev.sources != seg.sources {
                trace.events.push(PowerEvent {
                    t_s: seg_start,
                    kind: PowerEventKind::SourcesChanged,
                });
            }
            if prev.switches != seg.switches {
                trace.events.push(PowerEvent {
                    t_s: seg_start,
                    kind: PowerEventKind::SwitchesChanged,
                });
            }
        }
        let steps = (seg.duration_s / dt_s).ceil() as u64;
        let mut t = seg_start;
        for k in 1..=steps {
            let t_next = if k == steps {
                seg_start + seg.duration_s
            } else {
                seg_start + k as f64 * dt_s
            };
            let h = t_next - t;
            let next = soc - p * h / 3600.0;
            if p > 0.0 && next <= 0.0 {
                let t_empty = t + soc * 3600.0 / p;
                trace.samples.push(SocSample {
                    t_s: t_empty,
                    soc_wh: 0.0,
                    net_w: p,
                });
                trace.events.push(PowerEvent {
                    t_s: t_empty,
                    kind: PowerEventKind::Depleted,
                });
                return Ok(trace);
            }
            if next >= capacity && p < 0.0 {
                if soc < capacity {
                    trace.events.push(PowerEvent {
                        t_s: t + (capacity - soc) * 3600.0 / -p,
                        kind: PowerEventKind::Full,
                    });
                }
                soc = capacity;
            } else {
                soc = next;
            }
            t = t_next;
            trace.samples.push(SocSample {
                t_s: t,
                soc_wh: soc,
                net_w: p,
            });
        }
        seg_start += seg.duration_s;
    }
    Ok(trace)
}

/// Load profile file: a list of segments with the groups switched on and the
/// sources available during each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadProfile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_soc_wh: Option<f64>,
    pub segments: Vec<ProfileSegment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSegment {
    pub duration_s: f64,
    #[serde(default)]
    pub groups_on: Vec<String>,
    #[serde(default)]
    pub boosters: bool,
    #[serde(default)]
    pub shore_w: f64,
    #[serde(default)]
    pub passthrough_w: f64,
}

impl LoadProfile {
    pub fn parse(text: &str) -> Result<Self, PowerError> {
        toml::from_str(text).map_err(|e| PowerError::Profile(e.message().to_owned()))
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.segments
            .iter()
            .map(|s| Segment {
                duration_s: s.duration_s,
                switches: SwitchStates::with(&s.groups_on),
                sources: SourceStates {
                    boosters: s.boosters,
                    shore_charger_w: s.shore_w,
                    shore_passthrough_w: s.passthrough_w,
                },
            })
            .collect()
    }
}

/// Profiles shipped with the bundled rig, by name.
pub const BUNDLED_PROFILES: [(&str, &str); 3] = [
    ("regular", include_str!("../data/profiles/regular.toml")),
    ("full-shore", include_str!("../data/profiles/full-shore.toml")),
    ("drive-then-charge", include_str!("../data/profiles/drive-then-charge.toml")),
];

pub fn bundled_profile(name: &str) -> Option<&'static str> {
    BUNDLED_PROFILES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
