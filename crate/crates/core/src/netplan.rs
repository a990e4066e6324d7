//! Vehicle network: devices on one switch, a bonded trunk to the compute
//! server, VLANs per modality and a PTP tree rooted at the grandmaster.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::rig::{Modality, RigSpec};

pub const SWITCH_ID: &str = "switch";
pub const SERVER_ID: &str = "server";
pub const ROUTER_ID: &str = "router";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("CONFIG_PORTS_EXCEEDED: {devices} devices need ports but the switch has {ports}")]
    PortsExceeded { devices: usize, ports: u32 },
    #[error("bond of {members} members does not fit {sfp} SFP ports")]
    BondExceedsSfp { members: u32, sfp: u32 },
    #[error("no bonded uplink to the server")]
    NoBond,
    #[error("node id `{0}` is used twice")]
    IdClash(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("`{0}` is not a device")]
    NotADevice(String),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

impl NetError {
    pub fn code(&self) -> &'static str {
        match self {
            NetError::PortsExceeded { .. } => "CONFIG_PORTS_EXCEEDED",
            NetError::BondExceedsSfp { .. } => "CONFIG_SFP_EXCEEDED",
            NetError::NoBond => "CONFIG_NO_BOND",
            NetError::IdClash(_) => "CONFIG_ID_CLASH",
            NetError::UnknownNode(_) => "UNKNOWN_NODE",
            NetError::NotADevice(_) => "NOT_A_DEVICE",
            NetError::NonPositive(_) => "NONPOSITIVE_ARGUMENT",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRole {
    Device,
    Switch,
    Server,
    Router,
    Converter,
}

impl NodeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeRole::Device => "device",
            NodeRole::Switch => "switch",
            NodeRole::Server => "server",
            NodeRole::Router => "router",
            NodeRole::Converter => "converter",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: String,
    pub role: NodeRole,
    /// Access VLAN. `None` for trunk nodes (switch, server).
    pub vlan: Option<u16>,
    pub modality: Option<Modality>,
    pub time_sensitive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub a: String,
    pub b: String,
    pub capacity_bps: u64,
    pub poe_w: f64,
    /// Carries tagged frames for several VLANs.
    pub trunk: bool,
}

impl Link {
    pub fn poe(&self) -> bool {
        self.poe_w > 0.0
    }

    fn other(&self, n: &str) -> Option<&str> {
        if self.a == n {
            Some(&self.b)
        } else if self.b == n {
            Some(&self.a)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bond {
    /// Indices into [`NetTopology::links`].
    pub members: Vec<usize>,
    pub owner: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetTopology {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub bonds: Vec<Bond>,
    pub vlans: BTreeMap<u16, Vec<String>>,
    /// VLANs tagged on the server trunk.
    pub trunk_vlans: BTreeSet<u16>,
    pub grandmasters: Vec<String>,
    pub poe_budget_w: f64,
}

impl NetTopology {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    fn require(&self, id: &str) -> Result<&Node, NetError> {
        self.node(id).ok_or_else(|| NetError::UnknownNode(id.to_owned()))
    }

    pub fn devices(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| n.role == NodeRole::Device)
    }

    pub fn server_bond(&self) -> Option<&Bond> {
        self.bonds.iter().find(|b| b.owner == SERVER_ID)
    }

    pub fn bond_capacity_bps(&self) -> u64 {
        self.server_bond()
            .map_or(0, |b| b.members.iter().map(|&l| self.links[l].capacity_bps).sum())
    }

    /// The single link joining `a` and `b`, ignoring bond members.
    fn link_between(&self, a: &str, b: &str) -> Option<usize> {
        self.links
            .iter()
            .position(|l| (l.a == a && l.b == b) || (l.a == b && l.b == a))
    }

    fn neighbours<'a>(&'a self, n: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.links.iter().filter_map(move |l| l.other(n))
    }

    /// Path from a device to the switch, device first.
    fn access_path(&self, device: &str) -> Vec<String> {
        let mut path = vec![device.to_owned()];
        let mut cur = device.to_owned();
        while cur != SWITCH_ID {
            let next = self
                .neighbours(&cur)
                .find(|n| !path.iter().any(|p| p == n))
                .map(str::to_owned);
            match next {
                Some(n) => {
                    path.push(n.clone());
                    cur = n;
                }
                None => break,
            }
        }
        path
    }
}

/// Builds the network graph of a rig. Automotive-ethernet devices get a media
/// converter between them and the switch.
pub fn build_topology(rig: &RigSpec) -> Result<NetTopology, NetError> {
    let net = &rig.network;
    let attached: Vec<_> = rig.sensors.iter().filter(|s| s.is_networked()).collect();
    let ports_needed = attached.len() + usize::from(net.router.is_some());
    if ports_needed > net.switch_ports as usize {
        return Err(NetError::PortsExceeded {
            devices: ports_needed,
            ports: net.switch_ports,
        });
    }
    if net.bond_members > net.sfp_ports {
        return Err(NetError::BondExceedsSfp {
            members: net.bond_members,
            sfp: net.sfp_ports,
        });
    }

    let mut nodes = vec![
        Node {
            id: SWITCH_ID.into(),
            role: NodeRole::Switch,
            vlan: None,
            modality: None,
            time_sensitive: false,
        },
        Node {
            id: SERVER_ID.into(),
            role: NodeRole::Server,
            vlan: None,
            modality: None,
            time_sensitive: false,
        },
    ];
    let mut links = Vec::new();
    let mut vlans: BTreeMap<u16, Vec<String>> = BTreeMap::new();

    for s in &attached {
        let vlan = net.vlan_of(s.modality);
        nodes.push(Node {
            id: s.id.clone(),
            role: NodeRole::Device,
            vlan: Some(vlan),
            modality: Some(s.modality),
            time_sensitive: s.time_sensitive,
        });
        vlans.entry(vlan).or_default().push(s.id.clone());
        let mut upstream = s.id.clone();
        if s.automotive_ethernet {
            let conv = format!("{}.converter", s.id);
            nodes.push(Node {
                id: conv.clone(),
                role: NodeRole::Converter,
                vlan: Some(vlan),
                modality: None,
                time_sensitive: false,
            });
            links.push(Link {
                a: s.id.clone(),
                b: conv.clone(),
                capacity_bps: net.device_link_bps,
                poe_w: 0.0,
                trunk: false,
            });
            upstream = conv;
        }
        links.push(Link {
            a: upstream,
            b: SWITCH_ID.into(),
            capacity_bps: net.device_link_bps,
            poe_w: if s.automotive_ethernet { 0.0 } else { s.poe_w },
            trunk: false,
        });
    }

    if let Some(r) = &net.router {
        nodes.push(Node {
            id: ROUTER_ID.into(),
            role: NodeRole::Router,
            vlan: Some(r.vlan),
            modality: None,
            time_sensitive: false,
        });
        vlans.entry(r.vlan).or_default().push(ROUTER_ID.into());
        links.push(Link {
            a: ROUTER_ID.into(),
            b: SWITCH_ID.into(),
            capacity_bps: r.link_bps,
            poe_w: 0.0,
            trunk: false,
        });
    }

    let mut seen = BTreeSet::new();
    for n in &nodes {
        if !seen.insert(n.id.as_str()) {
            return Err(NetError::IdClash(n.id.clone()));
        }
    }

    let first = links.len();
    for _ in 0..net.bond_members {
        links.push(Link {
            a: SWITCH_ID.into(),
            b: SERVER_ID.into(),
            capacity_bps: net.bond_member_bps,
            poe_w: 0.0,
            trunk: true,
        });
    }
    let bonds = if net.bond_members > 0 {
        vec![Bond {
            members: (first..links.len()).collect(),
            owner: SERVER_ID.into(),
        }]
    } else {
        Vec::new()
    };

    let mut grandmasters: Vec<String> = attached
        .iter()
        .filter(|s| s.grandmaster)
        .map(|s| s.id.clone())
        .collect();
    grandmasters.sort();

    Ok(NetTopology {
        nodes,
        links,
        bonds,
        vlans,
        trunk_vlans: net.trunk_vlans.iter().copied().collect(),
        grandmasters,
        poe_budget_w: net.poe_budget_w,
    })
}

/// Per-device demands as configured in the rig.
pub fn rig_demands(rig: &RigSpec) -> BTreeMap<String, u64> {
    rig.sensors
        .iter()
        .filter(|s| s.is_networked())
        .map(|s| (s.id.clone(), s.net_demand_bps))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Flow {
    pub device: String,
    pub demand_bps: u64,
    /// Nodes from the device to the server.
    pub nodes: Vec<String>,
    /// Links in travel order, one fewer than `nodes`.
    pub links: Vec<usize>,
    /// Position of the chosen member within the bond.
    pub bond_member: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowAssignment {
    /// Sorted by device id.
    pub flows: Vec<Flow>,
    /// Load per link, indexed like [`NetTopology::links`].
    pub link_load_bps: Vec<u64>,
}

impl FlowAssignment {
    pub fn total_demand_bps(&self) -> u64 {
        self.flows.iter().map(|f| f.demand_bps).sum()
    }
}

/// Rank of each device id among all devices of the topology, in byte order.
fn device_ranks(topology: &NetTopology) -> BTreeMap<&str, usize> {
    let mut ids: Vec<&str> = topology.devices().map(|n| n.id.as_str()).collect();
    ids.sort_unstable();
    ids.into_iter().enumerate().map(|(i, id)| (id, i)).collect()
}

/// Routes every demand device -> switch -> server. The bond member is the
/// device's id rank modulo the member count, so a flow never splits.
pub fn assign_flows(
    topology: &NetTopology,
    demands: &BTreeMap<String, u64>,
) -> Result<FlowAssignment, NetError> {
    let bond = topology.server_bond().ok_or(NetError::NoBond)?;
    let ranks = device_ranks(topology);
    let mut load = vec![0u64; topology.links.len()];
    let mut flows = Vec::with_capacity(demands.len());
    for (device, &demand) in demands {
        let node = topology.require(device)?;
        if node.role != NodeRole::Device {
            return Err(NetError::NotADevice(device.clone()));
        }
        let mut nodes = topology.access_path(device);
        let mut links: Vec<usize> = nodes
            .windows(2)
            .map(|w| topology.link_between(&w[0], &w[1]).expect("access path follows links"))
            .collect();
        let member = ranks[device.as_str()] % bond.members.len();
        links.push(bond.members[member]);
        nodes.push(SERVER_ID.into());
        for &l in &links {
            load[l] += demand;
        }
        flows.push(Flow {
            device: device.clone(),
            demand_bps: demand,
            nodes,
            links,
            bond_member: member,
        });
    }
    Ok(FlowAssignment {
        flows,
        link_load_bps: load,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkUtilization {
    pub link: usize,
    pub a: String,
    pub b: String,
    pub load_bps: u64,
    pub capacity_bps: u64,
    pub utilization: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityReport {
    pub links: Vec<LinkUtilization>,
    /// Links with utilization above 1.
    pub overloaded: Vec<usize>,
    pub bond_load_bps: u64,
    pub bond_capacity_bps: u64,
    pub bond_utilization: f64,
}

impl CapacityReport {
    pub fn is_ok(&self) -> bool {
        self.overloaded.is_empty()
    }
}

fn ratio(load: u64, capacity: u64) -> f64 {
    if capacity == 0 {
        if load == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        load as f64 / capacity as f64
    }
}

pub fn check_capacity(assignment: &FlowAssignment, topology: &NetTopology) -> CapacityReport {
    let links: Vec<LinkUtilization> = topology
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let load_bps = assignment.link_load_bps.get(i).copied().unwrap_or(0);
            LinkUtilization {
                link: i,
                a: l.a.clone(),
                b: l.b.clone(),
                load_bps,
                capacity_bps: l.capacity_bps,
                utilization: ratio(load_bps, l.capacity_bps),
            }
        })
        .collect();
    let overloaded = links.iter().filter(|u| u.utilization > 1.0).map(|u| u.link).collect();
    let bond_load_bps = topology
        .server_bond()
        .map_or(0, |b| b.members.iter().map(|&l| links[l].load_bps).sum());
    let bond_capacity_bps = topology.bond_capacity_bps();
    CapacityReport {
        links,
        overloaded,
        bond_load_bps,
        bond_capacity_bps,
        bond_utilization: ratio(bond_load_bps, bond_capacity_bps),
    }
}

/// VLANs a node can exchange frames on.
fn vlan_set(topology: &NetTopology, node: &Node) -> BTreeSet<u16> {
    match (node.role, node.vlan) {
        (_, Some(v)) => BTreeSet::from([v]),
        (NodeRole::Server, None) => topology.trunk_vlans.clone(),
        // the switch carries every configured VLAN
        _ => topology
            .vlans
            .keys()
            .chain(topology.trunk_vlans.iter())
            .copied()
            .collect(),
    }
}

/// Whether `a` and `b` share a VLAN. Trunk nodes see every VLAN tagged on
/// their trunk, so a device reaches the server only if its VLAN is trunked.
pub fn vlan_reachable(topology: &NetTopology, a: &str, b: &str) -> Result<bool, NetError> {
    let na = topology.require(a)?;
    let nb = topology.require(b)?;
    if a == b {
        return Ok(true);
    }
    Ok(!vlan_set(topology, na).is_disjoint(&vlan_set(topology, nb)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PtpCode {
    NoGrandmaster,
    MultipleGrandmasters,
    GrandmasterUnreachable,
    Unreachable,
}

impl PtpCode {
    pub fn as_str(self) -> &'static str {
        match self {
            PtpCode::NoGrandmaster => "PTP_NO_GM",
            PtpCode::MultipleGrandmasters => "PTP_MULTIPLE_GM",
            PtpCode::GrandmasterUnreachable => "PTP_GM_UNREACHABLE",
            PtpCode::Unreachable => "PTP_UNREACHABLE",
        }
    }
}

impl fmt::Display for PtpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtpFinding {
    pub code: PtpCode,
    pub node: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtpReport {
    pub grandmaster: Option<String>,
    pub findings: Vec<PtpFinding>,
    /// Clock hops from the server to each time-sensitive device. Media
    /// converters forward sync messages transparently and are not counted.
    pub depths: BTreeMap<String, usize>,
}

impl PtpReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.depths.values().copied().max().unwrap_or(0)
    }
}

/// Hop counts from `start` over physical links, skipping converters in the count.
fn clock_hops(topology: &NetTopology, start: &str) -> BTreeMap<String, usize> {
    let mut dist = BTreeMap::from([(start.to_owned(), 0usize)]);
    let mut queue = VecDeque::from([start.to_owned()]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        for n in topology.neighbours(&cur) {
            if dist.contains_key(n) {
                continue;
            }
            let step = match topology.node(n).map(|x| x.role) {
                Some(NodeRole::Converter) => 0,
                _ => 1,
            };
            dist.insert(n.to_owned(), d + step);
            queue.push_back(n.to_owned());
        }
    }
    dist
}

/// Structural check of the clock tree: one grandmaster, reachable from the
/// server, and every time-sensitive device reachable from the server.
pub fn validate_ptp(topology: &NetTopology) -> PtpReport {
    let mut findings = Vec::new();
    let grandmaster = match topology.grandmasters.as_slice() {
        [] => {
            findings.push(PtpFinding {
                code: PtpCode::NoGrandmaster,
                node: None,
                message: "no grandmaster clock configured".into(),
            });
            None
        }
        [gm] => Some(gm.clone()),
        many => {
            findings.push(PtpFinding {
                code: PtpCode::MultipleGrandmasters,
                node: None,
                message: format!("{} grandmasters: {}", many.len(), many.join(", ")),
            });
            None
        }
    };

    let hops = clock_hops(topology, SERVER_ID);
    let reaches = |id: &str| hops.contains_key(id) && vlan_reachable(topology, SERVER_ID, id).unwrap_or(false);

    for gm in &topology.grandmasters {
        if !reaches(gm) {
            findings.push(PtpFinding {
                code: PtpCode::GrandmasterUnreachable,
                node: Some(gm.clone()),
                message: format!("server cannot reach grandmaster `{gm}`"),
            });
        }
    }

    let mut depths = BTreeMap::new();
    for n in topology.devices().filter(|n| n.time_sensitive) {
        if reaches(&n.id) {
            depths.insert(n.id.clone(), hops[&n.id]);
        } else {
            findings.push(PtpFinding {
                code: PtpCode::Unreachable,
                node: Some(n.id.clone()),
                message: format!("time-sensitive device `{}` is not reachable from the server", n.id),
            });
        }
    }
    PtpReport {
        grandmaster,
        findings,
        depths,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Headroom {
    pub disk: f64,
    pub uplink: f64,
}

impl Headroom {
    pub fn passes(&self) -> bool {
        self.disk >= 1.0 && self.uplink >= 1.0
    }
}

pub fn recording_headroom(
    total_demand_bps: f64,
    disk_write_bps: f64,
    uplink_capacity_bps: f64,
) -> Result<Headroom, NetError> {
    for (name, v) in [
        ("total demand", total_demand_bps),
        ("disk bandwidth", disk_write_bps),
        ("uplink capacity", uplink_capacity_bps),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(NetError::NonPositive(name));
        }
    }
    Ok(Headroom {
        disk: disk_write_bps / total_demand_bps,
        uplink: uplink_capacity_bps / total_demand_bps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoeBudget {
    pub draw_w: f64,
    pub budget_w: f64,
}

impl PoeBudget {
    pub fn passes(&self) -> bool {
        self.draw_w <= self.budget_w
    }
}

pub fn poe_budget(topology: &NetTopology) -> PoeBudget {
    PoeBudget {
        draw_w: topology.links.iter().map(|l| l.poe_w).sum(),
        budget_w: topology.poe_budget_w,
    }
}
