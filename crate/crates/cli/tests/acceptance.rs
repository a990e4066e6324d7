//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any of them fails. Run with `--nocapture` to see the lines.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigplan::coverage::{azimuthal_coverage, coverage_grid_of, project_point, unproject_pixel, GridSpec};
use rigplan::geometry::{Angle, Pose};
use rigplan::netplan::{assign_flows, build_topology, rig_demands, vlan_reachable, NodeRole, SERVER_ID};
use rigplan::power::{
    indefinite_operation, net_battery_power, runtime_to_empty, simulate_soc, Runtime, Segment, SourceStates,
    SwitchStates,
};
use rigplan::report::network_check;
use rigplan::rig::{FieldOfView, Resolution};
use rigplan::{bundled_rig, Modality, RigSpec, Sensor, Vector3};
use support::{oracle, random_rig};

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn surround_coverage() -> Verdict {
    let rig = bundled_rig();
    let start = Instant::now();
    let mut parts = Vec::new();
    for g in Modality::SURROUND_GROUPS {
        let sweep = azimuthal_coverage(&rig, g, 10.0, 1.0, 0.5f64.to_radians()).map_err(|e| e.to_string())?;
        ensure(sweep.fraction == 1.0 && sweep.gaps.is_empty(), || {
            format!("{g}: fraction {} with {} gaps", sweep.fraction, sweep.gaps.len())
        })?;
        parts.push(format!("{g}=1.0"));
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, 5.0)?;
    Ok(format!("{} in {:.3} s", parts.join(" "), elapsed.as_secs_f64()))
}

fn network_budget() -> Verdict {
    let rig = bundled_rig();
    let start = Instant::now();
    let n = network_check(&rig, None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let c = &n.capacity;
    ensure(c.bond_capacity_bps == 40_000_000_000, || format!("bond {}", c.bond_capacity_bps))?;
    ensure(n.total_demand_bps == 20e9, || format!("demand {}", n.total_demand_bps))?;
    ensure((n.headroom.disk - 1.67).abs() <= 0.01, || format!("disk headroom {}", n.headroom.disk))?;
    ensure(c.overloaded.is_empty(), || format!("{} overloaded links", c.overloaded.len()))?;
    ensure(n.ptp.is_valid(), || format!("ptp findings {:?}", n.ptp.findings))?;
    let gm = n.ptp.grandmaster.clone().unwrap_or_default();
    let gm_is_gnss = rig.sensor(&gm).is_some_and(|s| s.modality == Modality::Gnss);
    ensure(gm_is_gnss, || format!("grandmaster `{gm}` is not the GNSS receiver"))?;
    within_budget(elapsed, 1.0)?;
    Ok(format!(
        "bond 40G, demand 20G, headroom {:.3}, gm {gm}, {:.3} s",
        n.headroom.disk,
        elapsed.as_secs_f64()
    ))
}

fn power_runtimes() -> Verdict {
    let sys = bundled_rig().power;
    ensure(sys.battery.capacity_wh == 10_000.0, || format!("capacity {}", sys.battery.capacity_wh))?;
    let hours = |w: f64| runtime_to_empty(&sys, w, &SourceStates::none()).hours().unwrap_or(f64::NAN);
    let (regular, full) = (hours(1300.0), hours(2300.0));
    ensure((regular - 7.692).abs() <= 0.001, || format!("regular {regular}"))?;
    ensure((full - 4.348).abs() <= 0.001, || format!("full {full}"))?;

    // the rig's own load groups must land on the same figures
    let none = SourceStates::none();
    let p_regular = net_battery_power(&sys, &SwitchStates::regular(&sys), &none).map_err(|e| e.to_string())?;
    let p_full = net_battery_power(&sys, &SwitchStates::all(&sys), &none).map_err(|e| e.to_string())?;
    ensure((p_regular - 1300.0).abs() < 1e-6 && (p_full - 2300.0).abs() < 1e-6, || {
        format!("group draws {p_regular} W and {p_full} W")
    })?;

    let shore = SourceStates::shore_charger(3000.0);
    let on_shore = runtime_to_empty(&sys, 2300.0, &shore);
    ensure(on_shore == Runtime::Indefinite, || format!("2.3 kW on 3 kW shore: {on_shore:?}"))?;
    let indefinite = indefinite_operation(&sys, &SwitchStates::all(&sys), &shore).map_err(|e| e.to_string())?;
    ensure(indefinite, || "full load on shore power is not indefinite".into())?;
    Ok(format!("regular {regular:.3} h, full {full:.3} h, shore indefinite"))
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x00ac_ce97);
    let start = Instant::now();
    let mut cells = 0usize;
    for case in 0..1000 {
        let scene = random_rig::scene(&mut rng, 4, 3);
        let spec = GridSpec {
            query_height_m: scene.height_m,
            extent_m: 8.0,
            cell_m: 0.5,
        };
        let refs: Vec<&Sensor> = scene.sensors.iter().collect();
        let grid = coverage_grid_of(&refs, &scene.occluders, &spec).map_err(|e| e.to_string())?;
        ensure(grid.width == 32 && grid.height == 32, || format!("grid {}x{}", grid.width, grid.height))?;
        let expected = oracle::grid(&scene.sensors, &scene.occluders, 32, spec.cell_m, spec.query_height_m);
        for idx in 0..grid.cells.len() {
            let got: Vec<&str> = grid.sensors_at(idx);
            ensure(got == expected.cells[idx], || {
                format!("case {case} cell {idx}: {got:?} vs {:?}", expected.cells[idx])
            })?;
            ensure(grid.interior[idx] == expected.interior[idx], || format!("case {case} cell {idx} interior"))?;
            cells += 1;
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, 30.0)?;
    Ok(format!("1000 rigs, {cells} cells identical, {:.2} s", elapsed.as_secs_f64()))
}

fn coverage_monotonicity(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..500 {
        let mut scene = random_rig::scene(rng, 3, 3);
        let spec = GridSpec {
            query_height_m: scene.height_m,
            extent_m: 6.0,
            cell_m: 0.5,
        };
        let extra = random_rig::sensor(rng, "extra".into());
        let base: Vec<&Sensor> = scene.sensors.iter().collect();
        let mut more = base.clone();
        more.push(&extra);
        let a = coverage_grid_of(&base, &scene.occluders, &spec).map_err(|e| e.to_string())?;
        let b = coverage_grid_of(&more, &scene.occluders, &spec).map_err(|e| e.to_string())?;
        ensure(a.cells.iter().zip(&b.cells).all(|(x, y)| x & y == *x), || {
            format!("case {case}: adding a sensor lost coverage")
        })?;

        if scene.occluders.is_empty() {
            scene.occluders.push(random_rig::occluder(rng));
        }
        let drop = rng.random_range(0..scene.occluders.len());
        let mut fewer = scene.occluders.clone();
        fewer.remove(drop);
        let with = coverage_grid_of(&base, &scene.occluders, &spec).map_err(|e| e.to_string())?;
        let without = coverage_grid_of(&base, &fewer, &spec).map_err(|e| e.to_string())?;
        ensure(with.cells.iter().zip(&without.cells).all(|(x, y)| x & y == *x), || {
            format!("case {case}: removing an occluder lost coverage")
        })?;
    }
    Ok(())
}

fn mirror_symmetry(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..500 {
        let scene = random_rig::scene(rng, 4, 3);
        let spec = GridSpec {
            query_height_m: scene.height_m,
            extent_m: 6.0,
            cell_m: 0.5,
        };
        let mirrored: Vec<Sensor> = scene.sensors.iter().map(Sensor::mirrored).collect();
        let boxes: Vec<_> = scene.occluders.iter().map(|b| b.mirrored()).collect();
        let a = coverage_grid_of(&scene.sensors.iter().collect::<Vec<_>>(), &scene.occluders, &spec)
            .map_err(|e| e.to_string())?;
        let b = coverage_grid_of(&mirrored.iter().collect::<Vec<_>>(), &boxes, &spec).map_err(|e| e.to_string())?;
        let n = a.width;
        for j in 0..n {
            for i in 0..n {
                let (p, q) = (a.index(i, j), b.index(i, n - 1 - j));
                ensure(a.cells[p] == b.cells[q] && a.interior[p] == b.interior[q], || {
                    format!("case {case}: cell ({i}, {j}) differs from its mirror")
                })?;
            }
        }
    }
    Ok(())
}

fn random_network(rng: &mut ChaCha8Rng) -> RigSpec {
    let mut rig = bundled_rig();
    let n = rng.random_range(0..45);
    rig.sensors = (0..n)
        .map(|i| {
            let modality = Modality::ALL[rng.random_range(0..Modality::ALL.len())];
            let mut s = Sensor::new(
                format!("d{:02}_{}", rng.random_range(0..100), i),
                modality,
                Pose::at([0.0; 3]),
                FieldOfView {
                    azimuth: Angle::from_degrees(90.0),
                    elevation: Angle::from_degrees(30.0),
                    max_range_m: 50.0,
                },
            );
            s.port = Some(i as u32 + 1);
            s.net_demand_bps = rng.random_range(0..900_000_000);
            s.automotive_ethernet = rng.random_bool(0.2);
            s
        })
        .collect();
    rig
}

fn network_properties(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..200 {
        let rig = random_network(rng);
        let t = build_topology(&rig).map_err(|e| e.to_string())?;
        let demands = rig_demands(&rig);
        let a = assign_flows(&t, &demands).map_err(|e| e.to_string())?;

        // conservation: every transit node forwards exactly what it receives
        let mut balance: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        let mut load = vec![0u64; t.links.len()];
        for f in &a.flows {
            ensure(f.nodes.last().map(String::as_str) == Some(SERVER_ID), || {
                format!("case {case}: flow from {} does not end at the server", f.device)
            })?;
            for (k, l) in f.links.iter().enumerate() {
                load[*l] += f.demand_bps;
                balance.entry(&f.nodes[k]).or_default().1 += f.demand_bps;
                balance.entry(&f.nodes[k + 1]).or_default().0 += f.demand_bps;
            }
        }
        ensure(load == a.link_load_bps, || format!("case {case}: link loads differ from flow sums"))?;
        for (node, (inflow, outflow)) in balance {
            let ok = match t.node(node).map(|n| n.role) {
                Some(NodeRole::Device) => inflow == 0,
                Some(NodeRole::Server) => outflow == 0,
                _ => inflow == outflow,
            };
            ensure(ok, || format!("case {case}: imbalance at {node}: in {inflow}, out {outflow}"))?;
        }

        // hash stability: same members on repeat and after reordering the rig
        let again = assign_flows(&t, &demands).map_err(|e| e.to_string())?;
        let mut shuffled = rig.clone();
        shuffled.sensors.shuffle(rng);
        let t2 = build_topology(&shuffled).map_err(|e| e.to_string())?;
        let reordered = assign_flows(&t2, &rig_demands(&shuffled)).map_err(|e| e.to_string())?;
        let members = |a: &rigplan::netplan::FlowAssignment| -> BTreeMap<String, usize> {
            a.flows.iter().map(|f| (f.device.clone(), f.bond_member)).collect()
        };
        ensure(members(&a) == members(&again) && members(&a) == members(&reordered), || {
            format!("case {case}: bond member choice is not stable")
        })?;

        // VLAN reachability is symmetric and never crosses access VLANs
        let ids: Vec<&str> = t.nodes.iter().map(|n| n.id.as_str()).collect();
        for x in &ids {
            for y in &ids {
                let xy = vlan_reachable(&t, x, y).map_err(|e| e.to_string())?;
                let yx = vlan_reachable(&t, y, x).map_err(|e| e.to_string())?;
                ensure(xy == yx, || format!("case {case}: {x} -> {y} is not symmetric"))?;
                let (nx, ny) = (t.node(x).unwrap(), t.node(y).unwrap());
                if xy && nx.vlan.is_some() && ny.vlan.is_some() {
                    ensure(nx.vlan == ny.vlan, || format!("case {case}: {x} reaches {y} across VLANs"))?;
                }
            }
        }
    }
    Ok(())
}

fn soc_energy_balance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    const GROUPS: [&str; 10] = [
        "lidar_4d",
        "lidar_mid_range",
        "lidar_long_range",
        "camera",
        "radar",
        "gnss_v2x",
        "network",
        "hmi",
        "compute",
        "compute_full",
    ];
    let sys = bundled_rig().power;
    let cap = sys.battery.capacity_wh;
    for case in 0..300 {
        let profile: Vec<Segment> = (0..rng.random_range(1..6))
            .map(|_| Segment {
                duration_s: rng.random_range(60.0..7200.0),
                switches: SwitchStates::with(GROUPS.iter().copied().filter(|_| rng.random_bool(0.6))),
                sources: SourceStates {
                    boosters: rng.random_bool(0.3),
                    shore_charger_w: if rng.random_bool(0.3) { rng.random_range(0.0..3000.0) } else { 0.0 },
                    shore_passthrough_w: if rng.random_bool(0.3) { rng.random_range(0.0..1500.0) } else { 0.0 },
                },
            })
            .collect();
        let soc0 = rng.random_range(0.0..=1.0) * cap;
        let dt = [1.0, 7.5, 60.0, 300.0][rng.random_range(0..4)];
        let trace = simulate_soc(&sys, &profile, dt, soc0).map_err(|e| e.to_string())?;

        // piecewise-linear solution at each segment boundary
        let (mut t, mut soc) = (0.0, soc0);
        let mut expected = vec![(t, soc)];
        for seg in &profile {
            let p = net_battery_power(&sys, &seg.switches, &seg.sources).map_err(|e| e.to_string())?;
            let next = soc - p * seg.duration_s / 3600.0;
            if next <= 0.0 && p > 0.0 {
                expected.push((t + soc * 3600.0 / p, 0.0));
                break;
            }
            soc = next.min(cap);
            t += seg.duration_s;
            expected.push((t, soc));
        }
        for (t, soc) in expected {
            let sample = trace.samples.iter().find(|s| (s.t_s - t).abs() <= 1e-9 * t.max(1.0));
            let got = sample.map(|s| s.soc_wh).ok_or_else(|| format!("case {case}: no sample at {t} s"))?;
            ensure((got - soc).abs() <= 1e-9 * cap, || format!("case {case}: t {t} soc {got} vs {soc}"))?;
        }
    }
    Ok(())
}

fn projection_round_trip(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let (az, el) = (rng.random_range(20.0..150.0), rng.random_range(15.0..120.0));
        let mut cam = Sensor::new(
            "cam",
            Modality::Camera,
            Pose::new(
                [rng.random_range(-2.0..4.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)],
                Angle::from_degrees(rng.random_range(-180.0..180.0)),
                Angle::from_degrees(rng.random_range(-30.0..30.0)),
                Angle::from_degrees(rng.random_range(-10.0..10.0)),
            ),
            FieldOfView {
                azimuth: Angle::from_degrees(az),
                elevation: Angle::from_degrees(el),
                max_range_m: 500.0,
            },
        );
        cam.resolution = Some(Resolution::Pixels { width: 1920, height: 1200 });
        let depth: f64 = rng.random_range(0.5..80.0);
        let y = rng.random_range(-0.95..0.95) * depth * (az.to_radians() / 2.0).tan();
        let z = rng.random_range(-0.95..0.95) * depth * (el.to_radians() / 2.0).tan();
        let p = cam.pose.to_vehicle(&Vector3::new(depth, y, z));
        let Some(px) = project_point(&cam, &p).map_err(|e| e.to_string())? else {
            return Err(format!("in-frustum point {p:?} did not project"));
        };
        let back = unproject_pixel(&cam, px, depth).map_err(|e| e.to_string())?;
        worst = worst.max((back - p).norm());
    }
    ensure(worst < 1e-9, || format!("round-trip error {worst:e} m"))?;
    Ok(worst)
}

fn property_suites() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e0f_5eed);
    coverage_monotonicity(&mut rng)?;
    mirror_symmetry(&mut rng)?;
    network_properties(&mut rng)?;
    soc_energy_balance(&mut rng)?;
    let worst = projection_round_trip(&mut rng)?;
    Ok(format!(
        "monotonicity 500, mirror 500, network 200, soc 300, projection 2000 (max {worst:.1e} m)"
    ))
}

fn csv_report(threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rigplan"));
    cmd.args(["report", "--format", "csv"]);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("report exited with {}", out.status))?;
    Ok(out.stdout)
}

fn deterministic_report() -> Verdict {
    let first = csv_report(None)?;
    for run in 1..5 {
        ensure(csv_report(None)? == first, || format!("run {} differs", run + 1))?;
    }
    for threads in ["1", "4"] {
        ensure(csv_report(Some(threads))? == first, || format!("output differs with {threads} threads"))?;
    }
    Ok(format!("{} bytes, identical over 5 runs and 1/4 threads", first.len()))
}

type Criterion = (&'static str, fn() -> Verdict);

#[test]
fn acceptance() {
    let criteria: [Criterion; 6] = [
        ("surround coverage at 10 m", surround_coverage),
        ("network budget", network_budget),
        ("power runtimes", power_runtimes),
        ("coverage oracle equivalence", oracle_equivalence),
        ("property suites", property_suites),
        ("report determinism", deterministic_report),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
