use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rigplan::geometry::{Angle, Pose};
use rigplan::netplan::{
    assign_flows, build_topology, rig_demands, vlan_reachable, FlowAssignment, NetTopology, NodeRole,
    SERVER_ID,
};
use rigplan::rig::FieldOfView;
use rigplan::{bundled_rig, Modality, RigSpec, Sensor};

const G: u64 = 1_000_000_000;

fn rig_with(devices: &[(String, Modality, bool)]) -> RigSpec {
    let mut rig = bundled_rig();
    rig.sensors = devices
        .iter()
        .enumerate()
        .map(|(i, (id, m, ae))| {
            let mut s = Sensor::new(
                id.clone(),
                *m,
                Pose::at([0.0; 3]),
                FieldOfView {
                    azimuth: Angle::from_degrees(90.0),
                    elevation: Angle::from_degrees(30.0),
                    max_range_m: 50.0,
                },
            );
            s.port = Some(i as u32 + 1);
            s.net_demand_bps = G / 2 + (i as u64 % 7) * G / 20;
            s.automotive_ethernet = *ae;
            s
        })
        .collect();
    rig
}

fn devices() -> impl Strategy<Value = Vec<(String, Modality, bool)>> {
    let modality = prop::sample::select(Modality::ALL.to_vec());
    prop::collection::btree_map("[a-z][a-z0-9_]{0,6}", (modality, any::<bool>()), 0..40)
        .prop_map(|m| m.into_iter().map(|(id, (md, ae))| (id, md, ae)).collect())
}

/// Demand entering and leaving every transit node, walked along each flow.
fn node_balance(t: &NetTopology, flows: &FlowAssignment) -> BTreeMap<String, (u64, u64)> {
    let mut bal: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for f in &flows.flows {
        for (k, link) in f.links.iter().enumerate() {
            let l = &t.links[*link];
            let (from, to) = (&f.nodes[k], &f.nodes[k + 1]);
            assert!((l.a == *from && l.b == *to) || (l.a == *to && l.b == *from));
            bal.entry(from.clone()).or_default().1 += f.demand_bps;
            bal.entry(to.clone()).or_default().0 += f.demand_bps;
        }
    }
    bal
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flow_is_conserved_at_transit_nodes(devs in devices()) {
        let rig = rig_with(&devs);
        let t = build_topology(&rig).unwrap();
        let a = assign_flows(&t, &rig_demands(&rig)).unwrap();
        for (node, (inflow, outflow)) in node_balance(&t, &a) {
            match t.node(&node).unwrap().role {
                NodeRole::Device => prop_assert_eq!(inflow, 0),
                NodeRole::Server => prop_assert_eq!(outflow, 0),
                _ => prop_assert_eq!(inflow, outflow, "node {}", node),
            }
        }
        // link loads are the sum of the demands crossing them
        let mut load = vec![0u64; t.links.len()];
        for f in &a.flows {
            prop_assert_eq!(f.nodes.last().map(String::as_str), Some(SERVER_ID));
            for l in &f.links {
                load[*l] += f.demand_bps;
            }
        }
        prop_assert_eq!(load, a.link_load_bps);
    }

    #[test]
    fn assignment_ignores_input_order(devs in devices(), seed in any::<u64>()) {
        let rig = rig_with(&devs);
        let t = build_topology(&rig).unwrap();
        let demands = rig_demands(&rig);
        let reference = assign_flows(&t, &demands).unwrap();

        let mut shuffled_devs = devs.clone();
        shuffled_devs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut rig2 = rig_with(&shuffled_devs);
        // keep each device's demand; only the order changes
        for s in &mut rig2.sensors {
            s.net_demand_bps = demands[&s.id];
        }
        let t2 = build_topology(&rig2).unwrap();
        let mut pairs: Vec<(String, u64)> = demands.clone().into_iter().collect();
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let again = assign_flows(&t2, &pairs.into_iter().collect()).unwrap();
        let members = |a: &FlowAssignment| -> BTreeMap<String, usize> {
            a.flows.iter().map(|f| (f.device.clone(), f.bond_member)).collect()
        };
        prop_assert_eq!(members(&reference), members(&again));
    }

    #[test]
    fn equal_flows_are_balanced(n in 0usize..52, members in 1u32..=4) {
        let devs: Vec<_> = (0..n).map(|i| (format!("dev{i:03}"), Modality::Camera, false)).collect();
        let mut rig = rig_with(&devs);
        rig.network.bond_members = members;
        rig.network.router = None;
        let t = build_topology(&rig).unwrap();
        let demands: BTreeMap<String, u64> = devs.iter().map(|(id, _, _)| (id.clone(), G)).collect();
        let a = assign_flows(&t, &demands).unwrap();
        let bound = n.div_ceil(members as usize) as u64 * G;
        for &m in &t.server_bond().unwrap().members {
            prop_assert!(a.link_load_bps[m] <= bound);
        }
    }

    #[test]
    fn vlan_reachability_is_symmetric_and_isolating(devs in devices()) {
        let rig = rig_with(&devs);
        let t = build_topology(&rig).unwrap();
        let ids: Vec<&str> = t.nodes.iter().map(|n| n.id.as_str()).collect();
        for a in &ids {
            for b in &ids {
                let ab = vlan_reachable(&t, a, b).unwrap();
                prop_assert_eq!(ab, vlan_reachable(&t, b, a).unwrap());
                let (na, nb) = (t.node(a).unwrap(), t.node(b).unwrap());
                if ab && na.vlan.is_some() && nb.vlan.is_some() {
                    prop_assert_eq!(na.vlan, nb.vlan, "{} {}", a, b);
                }
            }
        }
    }
}
