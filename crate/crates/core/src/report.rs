//! Consolidated checks over a whole rig and their text and CSV renderings.

use std::fmt::Write as _;

use crate::coverage::{
    azimuthal_coverage, blind_spot_area, coverage_grid, AzimuthalCoverage, CoverageError,
    CoverageSummary, GridSpec,
};
use crate::netplan::{
    assign_flows, build_topology, check_capacity, poe_budget, recording_headroom, rig_demands,
    validate_ptp, vlan_reachable, CapacityReport, Headroom, NetError, NetTopology, PoeBudget,
    PtpReport, SERVER_ID,
};
use crate::power::{
    indefinite_operation, runtime_for_states, PowerError, Runtime, SourceStates, SwitchStates,
};
use crate::rig::{validate_rig, Modality, RigSpec, ValidationReport};

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageOptions {
    pub radius_m: f64,
    pub height_m: f64,
    pub step_deg: f64,
    /// Grid used for the blind-area figures; its extent must reach `radius_m`.
    pub grid: GridSpec,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        CoverageOptions {
            radius_m: 10.0,
            height_m: 1.0,
            step_deg: 0.5,
            grid: GridSpec {
                query_height_m: 1.0,
                extent_m: 10.0,
                cell_m: 0.1,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupCoverage {
    pub group: Modality,
    pub sensors: usize,
    pub azimuthal: AzimuthalCoverage,
    pub area: CoverageSummary,
}

impl GroupCoverage {
    pub fn passes(&self) -> bool {
        self.azimuthal.is_complete()
    }
}

pub fn group_coverage(
    rig: &RigSpec,
    group: Modality,
    opts: &CoverageOptions,
) -> Result<GroupCoverage, CoverageError> {
    let azimuthal = azimuthal_coverage(
        rig,
        group,
        opts.radius_m,
        opts.height_m,
        opts.step_deg.to_radians(),
    )?;
    let grid = coverage_grid(rig, group, &opts.grid)?;
    let area = blind_spot_area(&grid, opts.radius_m)?;
    Ok(GroupCoverage {
        group,
        sensors: rig.group(group).count(),
        azimuthal,
        area,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkCheck {
    pub topology: NetTopology,
    pub capacity: CapacityReport,
    pub ptp: PtpReport,
    pub total_demand_bps: f64,
    pub headroom: Headroom,
    pub poe: PoeBudget,
}

impl NetworkCheck {
    pub fn passes(&self) -> bool {
        self.capacity.is_ok() && self.ptp.is_valid() && self.headroom.passes() && self.poe.passes()
    }

    /// Link table, VLAN matrix and PTP findings.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.capacity;
        let _ = writeln!(out, "bond_capacity_bps = {}", c.bond_capacity_bps);
        let _ = writeln!(out, "total_demand_bps = {}", self.total_demand_bps);
        let _ = writeln!(out, "bond_load_bps = {}", c.bond_load_bps);
        let _ = writeln!(out, "bond_utilization = {:.4}", c.bond_utilization);
        let _ = writeln!(out, "disk_headroom = {:.4}", self.headroom.disk);
        let _ = writeln!(out, "uplink_headroom = {:.4}", self.headroom.uplink);
        let _ = writeln!(out, "poe_draw_w = {} of {}", self.poe.draw_w, self.poe.budget_w);
        let _ = writeln!(out, "overloaded_links = {}", c.overloaded.len());
        let _ = writeln!(out, "\nlinks:");
        let _ = writeln!(out, "  {:>3}  {:<28} {:<8} {:>14} {:>14} {:>7}", "id", "from", "to", "load_bps", "capacity_bps", "util");
        for l in &c.links {
            let flag = if l.utilization > 1.0 { "  OVERLOADED" } else { "" };
            let _ = writeln!(
                out,
                "  {:>3}  {:<28} {:<8} {:>14} {:>14} {:>7.4}{flag}",
                l.link, l.a, l.b, l.load_bps, l.capacity_bps, l.utilization
            );
        }
        let _ = writeln!(out, "\nvlans:");
        let t = &self.topology;
        let reps: Vec<(u16, &str)> = t
            .vlans
            .iter()
            .filter_map(|(v, m)| m.first().map(|id| (*v, id.as_str())))
            .collect();
        let _ = write!(out, "  {:>6}", "");
        for (v, _) in &reps {
            let _ = write!(out, " {v:>4}");
        }
        let _ = writeln!(out, " server");
        for (va, a) in &reps {
            let _ = write!(out, "  {va:>6}");
            for (_, b) in &reps {
                let mark = if vlan_reachable(t, a, b).unwrap_or(false) { "x" } else { "." };
                let _ = write!(out, " {mark:>4}");
            }
            let s = if vlan_reachable(t, a, SERVER_ID).unwrap_or(false) { "x" } else { "." };
            let _ = writeln!(out, " {s:>6}");
        }
        let _ = writeln!(out, "\nptp:");
        let _ = writeln!(out, "  grandmaster = {}", self.ptp.grandmaster.as_deref().unwrap_or("none"));
        let _ = writeln!(out, "  max_depth = {}", self.ptp.max_depth());
        for f in &self.ptp.findings {
            let _ = writeln!(out, "  {} {}", f.code, f.message);
        }
        out
    }
}

/// Runs the network checks. `total_demand_bps` overrides the aggregate used
/// for the recording headroom; link loads always come from per-device demands.
pub fn network_check(rig: &RigSpec, total_demand_bps: Option<f64>) -> Result<NetworkCheck, NetError> {
    let topology = build_topology(rig)?;
    let assignment = assign_flows(&topology, &rig_demands(rig))?;
    let capacity = check_capacity(&assignment, &topology);
    let ptp = validate_ptp(&topology);
    let total = total_demand_bps.unwrap_or(assignment.total_demand_bps() as f64);
    let headroom = recording_headroom(
        total,
        rig.network.disk_write_bps as f64,
        topology.bond_capacity_bps() as f64,
    )?;
    let poe = poe_budget(&topology);
    Ok(NetworkCheck {
        topology,
        capacity,
        ptp,
        total_demand_bps: total,
        headroom,
        poe,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerCheck {
    pub regular: Runtime,
    pub full: Runtime,
    pub full_with_boosters: Runtime,
    pub full_on_shore_indefinite: bool,
}

impl PowerCheck {
    pub fn passes(&self) -> bool {
        self.full_on_shore_indefinite
    }
}

pub fn power_check(rig: &RigSpec) -> Result<PowerCheck, PowerError> {
    let sys = &rig.power;
    let full = SwitchStates::all(sys);
    Ok(PowerCheck {
        regular: runtime_for_states(sys, &SwitchStates::regular(sys), &SourceStates::none())?,
        full: runtime_for_states(sys, &full, &SourceStates::none())?,
        full_with_boosters: runtime_for_states(sys, &full, &SourceStates::boosters())?,
        full_on_shore_indefinite: indefinite_operation(
            sys,
            &full,
            &SourceStates::shore_charger(sys.shore.charger_max_w),
        )?,
    })
}

pub fn runtime_text(r: Runtime) -> String {
    match r {
        Runtime::Finite { hours } => format!("{hours:.3} h"),
        Runtime::Indefinite => "indefinite".into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigReport {
    pub name: String,
    pub validation: ValidationReport,
    pub coverage: Result<Vec<GroupCoverage>, String>,
    pub network: Result<NetworkCheck, String>,
    pub power: Result<PowerCheck, String>,
}

impl RigReport {
    pub fn validation_passes(&self) -> bool {
        self.validation.is_accepted()
    }

    pub fn coverage_passes(&self) -> bool {
        self.coverage.as_ref().is_ok_and(|g| g.iter().all(GroupCoverage::passes))
    }

    pub fn network_passes(&self) -> bool {
        self.network.as_ref().is_ok_and(NetworkCheck::passes)
    }

    pub fn power_passes(&self) -> bool {
        self.power.as_ref().is_ok_and(PowerCheck::passes)
    }

    pub fn passes(&self) -> bool {
        self.validation_passes() && self.coverage_passes() && self.network_passes() && self.power_passes()
    }

    /// Human-readable document. The timestamp line is omitted when `None`.
    pub fn to_text(&self, timestamp: Option<&str>) -> String {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut out = String::new();
        let _ = writeln!(out, "rig report: {}", self.name);
        if let Some(ts) = timestamp {
            let _ = writeln!(out, "generated: {ts}");
        }
        let _ = writeln!(out, "overall: {}", verdict(self.passes()));

        let _ = writeln!(out, "\n[validation] {}", verdict(self.validation_passes()));
        out.push_str(&self.validation.render());

        let _ = writeln!(out, "\n[coverage] {}", verdict(self.coverage_passes()));
        match &self.coverage {
            Ok(groups) => {
                for g in groups {
                    let a = &g.azimuthal;
                    let _ = writeln!(
                        out,
                        "{:<17} {}  sensors={} fraction={:.4} gaps={} gap_deg={:.1} blind_m2={:.2} covered_m2={:.2} (r={} m, h={} m)",
                        g.group.as_str(),
                        verdict(g.passes()),
                        g.sensors,
                        a.fraction,
                        a.gaps.len(),
                        a.gap_rad().to_degrees(),
                        g.area.blind_area_m2,
                        g.area.covered_area_m2,
                        a.radius_m,
                        a.query_height_m,
                    );
                }
            }
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
            }
        }

        let _ = writeln!(out, "\n[network] {}", verdict(self.network_passes()));
        match &self.network {
            Ok(n) => out.push_str(&n.to_text()),
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
            }
        }

        let _ = writeln!(out, "\n[power] {}", verdict(self.power_passes()));
        match &self.power {
            Ok(p) => {
                let _ = writeln!(out, "regular_runtime = {}", runtime_text(p.regular));
                let _ = writeln!(out, "full_runtime = {}", runtime_text(p.full));
                let _ = writeln!(out, "full_with_boosters_runtime = {}", runtime_text(p.full_with_boosters));
                let _ = writeln!(out, "full_on_shore_indefinite = {}", p.full_on_shore_indefinite);
            }
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
            }
        }
        out
    }

    /// `section,item,key,value` rows with no time-dependent content.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,item,key,value\n");
        let mut row = |s: &str, i: &str, k: &str, v: String| {
            let _ = writeln!(out, "{s},{i},{k},{v}");
        };
        row("summary", &self.name, "pass", self.passes().to_string());
        row("validation", "", "pass", self.validation_passes().to_string());
        row("validation", "", "errors", self.validation.errors.len().to_string());
        row("validation", "", "warnings", self.validation.warnings.len().to_string());
        for f in self.validation.errors.iter().chain(&self.validation.warnings) {
            row("validation", &f.path, "finding", f.code.as_str().to_owned());
        }
        match &self.coverage {
            Ok(groups) => {
                for g in groups {
                    let item = g.group.as_str();
                    row("coverage", item, "pass", g.passes().to_string());
                    row("coverage", item, "fraction", g.azimuthal.fraction.to_string());
                    row("coverage", item, "gaps", g.azimuthal.gaps.len().to_string());
                    row("coverage", item, "blind_area_m2", format!("{:.4}", g.area.blind_area_m2));
                    row("coverage", item, "covered_area_m2", format!("{:.4}", g.area.covered_area_m2));
                }
            }
            Err(e) => row("coverage", "", "error", csv_text(e)),
        }
        match &self.network {
            Ok(n) => {
                row("network", "", "pass", n.passes().to_string());
                row("network", "bond", "capacity_bps", n.capacity.bond_capacity_bps.to_string());
                row("network", "bond", "load_bps", n.capacity.bond_load_bps.to_string());
                row("network", "bond", "utilization", n.capacity.bond_utilization.to_string());
                row("network", "", "total_demand_bps", n.total_demand_bps.to_string());
                row("network", "", "disk_headroom", n.headroom.disk.to_string());
                row("network", "", "uplink_headroom", n.headroom.uplink.to_string());
                row("network", "", "poe_draw_w", n.poe.draw_w.to_string());
                for l in &n.capacity.links {
                    row("network", &format!("{}-{}#{}", l.a, l.b, l.link), "utilization", l.utilization.to_string());
                }
                row("network", "ptp", "grandmaster", n.ptp.grandmaster.clone().unwrap_or_default());
                row("network", "ptp", "max_depth", n.ptp.max_depth().to_string());
                for f in &n.ptp.findings {
                    row("network", "ptp", "finding", f.code.as_str().to_owned());
                }
            }
            Err(e) => row("network", "", "error", csv_text(e)),
        }
        match &self.power {
            Ok(p) => {
                let h = |r: Runtime| r.hours().map_or("inf".to_owned(), |h| h.to_string());
                row("power", "", "pass", p.passes().to_string());
                row("power", "regular", "runtime_h", h(p.regular));
                row("power", "full", "runtime_h", h(p.full));
                row("power", "full_boosters", "runtime_h", h(p.full_with_boosters));
                row("power", "full_shore", "indefinite", p.full_on_shore_indefinite.to_string());
            }
            Err(e) => row("power", "", "error", csv_text(e)),
        }
        out
    }
}

fn csv_text(e: &impl ToString) -> String {
    format!("\"{}\"", e.to_string().replace('"', "\"\""))
}

/// Runs every check on the rig.
pub fn build_report(rig: &RigSpec, opts: &CoverageOptions) -> RigReport {
    let coverage = Modality::SURROUND_GROUPS
        .iter()
        .map(|&g| group_coverage(rig, g, opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string());
    RigReport {
        name: rig.name.clone(),
        validation: validate_rig(rig),
        coverage,
        network: network_check(rig, None).map_err(|e| e.to_string()),
        power: power_check(rig).map_err(|e| e.to_string()),
    }
}
