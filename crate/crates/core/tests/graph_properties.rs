//! Snapshot and routing invariants checked against independent brute-force
//! constructions.

use std::collections::BTreeSet;

use owsn_core::constellation::{Constellation, ConstellationConfig};
use owsn_core::experiment::builtin_scenarios;
use owsn_core::geo::{self, GeodeticPoint, Vec3};
use owsn_core::routing::{enumerate_paths_oracle, shortest_path, PathOutcome};
use owsn_core::topology::{self, build_snapshot, neighbor_census, Link, LinkClass, NodeRef, SnapshotGraph, TopologyParams};
use owsn_core::PhysicalConstants;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn consts() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn shell(cfg: ConstellationConfig) -> Constellation {
    Constellation::new(cfg, &consts()).unwrap()
}

fn stations() -> Vec<GeodeticPoint> {
    builtin_scenarios().into_iter().flat_map(|s| [s.src, s.dst]).collect()
}

/// Satellite pairs by all-pairs scan, as sorted id-string pairs.
fn brute_force_pairs(c: &Constellation, t: f64, range: f64, occlusion: bool) -> BTreeSet<(String, String)> {
    let sats = c.satellites();
    let pos: Vec<Vec3> = sats.iter().map(|s| c.position_at(s, t)).collect();
    let mut out = BTreeSet::new();
    for i in 0..sats.len() {
        for j in i + 1..sats.len() {
            let d = pos[i].distance(pos[j]);
            if d > 0.0 && d <= range && (!occlusion || geo::line_of_sight_clear(pos[i], pos[j], 6378.0)) {
                out.insert((sats[i].id.to_string(), sats[j].id.to_string()));
            }
        }
    }
    out
}

fn sat_pairs(g: &SnapshotGraph) -> BTreeSet<(String, String)> {
    g.links()
        .filter(|(i, j, _)| !g.node(*i).is_ground() && !g.node(*j).is_ground())
        .map(|(i, j, _)| (g.node(i).to_string(), g.node(j).to_string()))
        .collect()
}

#[test]
fn pruned_builder_matches_all_pairs_on_small_shell() {
    let cfg = ConstellationConfig { num_planes: 4, sats_per_plane: 6, phase_factor: 1, ..Default::default() };
    let c = shell(cfg);
    // Ranges chosen to straddle the 6-per-plane chord lengths.
    for range in [3000.0, 6928.0, 8000.0, 12000.0, 14000.0] {
        for occlusion in [true, false] {
            let params = TopologyParams { lisl_range_km: range, occlusion_check: occlusion, ..Default::default() };
            for t in [0.0, 137.0, 1999.5, 3600.0] {
                let g = build_snapshot(&c, &[], 1, t, &params, &consts()).unwrap();
                assert_eq!(sat_pairs(&g), brute_force_pairs(&c, t, range, occlusion), "range {range} t {t}");
            }
        }
    }
}

#[test]
fn pruned_builder_matches_all_pairs_on_starlink() {
    let c = shell(ConstellationConfig::default());
    let params = TopologyParams::default();
    for t in [0.0, 1800.0] {
        let g = build_snapshot(&c, &[], 1, t, &params, &consts()).unwrap();
        assert_eq!(sat_pairs(&g), brute_force_pairs(&c, t, 1500.0, true));
    }
}

#[test]
fn adjacent_plane_neighbour_away_from_extremes() {
    let c = shell(ConstellationConfig::default());
    let g = build_snapshot(&c, &[], 1, 0.0, &TopologyParams::default(), &consts()).unwrap();
    let census = neighbor_census(&g);
    let mut checked = 0;
    for (i, node) in g.nodes().iter().enumerate() {
        let NodeRef::Satellite(id) = node else { continue };
        let lat = (g.position(i).unwrap().z / 6928.0).asin().to_degrees();
        if lat.abs() <= 45.0 {
            assert!(census[id].adjacent_plane >= 1, "{id} at latitude {lat:.1}");
            checked += 1;
        }
        assert_eq!(census[id].degree(), g.neighbors(i).len());
    }
    assert!(checked > 1000);
}

#[test]
fn six_hundred_km_range_keeps_no_in_plane_links() {
    let c = shell(ConstellationConfig::default());
    let params = TopologyParams { lisl_range_km: 600.0, ..Default::default() };
    for t in [0.0, 900.0, 2700.0] {
        let g = build_snapshot(&c, &[], 1, t, &params, &consts()).unwrap();
        assert!(g.links().all(|(_, _, e)| e.class != LinkClass::IntraPlane));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn snapshot_symmetry_and_range_law(t in 0.0f64..3600.0, range in 700.0f64..2500.0) {
        let c = shell(ConstellationConfig::default());
        let params = TopologyParams { lisl_range_km: range, ..Default::default() };
        let g = build_snapshot(&c, &stations(), 1, t, &params, &consts()).unwrap();
        for i in 0..g.node_count() {
            let mut prev = None;
            for e in g.neighbors(i) {
                prop_assert!(e.to != i);
                prop_assert!(prev.is_none_or(|p| p < e.to));
                prev = Some(e.to);
                let back = g.edge(e.to, i).expect("reverse edge");
                prop_assert_eq!(back.distance_km, e.distance_km);
                prop_assert_eq!(back.latency_s, e.latency_s);
                prop_assert!(e.latency_s > 0.0);
                if e.class != LinkClass::Ground {
                    prop_assert!(e.distance_km <= range);
                }
                let d = g.position(i).unwrap().distance(g.position(e.to).unwrap());
                prop_assert!((d - e.distance_km).abs() < 1e-9);
            }
        }
        // Ground-ground links never exist.
        for (i, j, _) in g.links() {
            prop_assert!(!(g.node(i).is_ground() && g.node(j).is_ground()));
        }
    }

    #[test]
    fn edge_sets_grow_with_range(t in 0.0f64..3600.0, r1 in 500.0f64..2000.0, extra in 0.0f64..1000.0) {
        let c = shell(ConstellationConfig::default());
        let small = TopologyParams { lisl_range_km: r1, ..Default::default() };
        let large = TopologyParams { lisl_range_km: r1 + extra, ..Default::default() };
        let a = build_snapshot(&c, &stations(), 1, t, &small, &consts()).unwrap();
        let b = build_snapshot(&c, &stations(), 1, t, &large, &consts()).unwrap();
        prop_assert!(sat_pairs(&a).is_subset(&sat_pairs(&b)));
    }
}

fn random_graph(rng: &mut ChaCha8Rng) -> SnapshotGraph {
    let n = rng.gen_range(2..=10);
    let names: Vec<NodeRef> = (0..n).map(|i| NodeRef::ground(format!("N{i}"))).collect();
    let m = rng.gen_range(0..=20);
    let mut seen = BTreeSet::new();
    let mut links = Vec::new();
    for _ in 0..m {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        // Integer weights half the time so equal-cost ties are common.
        let ms: f64 = if rng.gen_bool(0.5) { rng.gen_range(1..4) as f64 } else { rng.gen_range(0.05..5.0) };
        links.push(Link {
            a: names[a].clone(),
            b: names[b].clone(),
            distance_km: ms * 299.792458,
            latency_s: ms / 1000.0,
            class: LinkClass::Ground,
        });
    }
    SnapshotGraph::from_links(0, 0.0, names, &links).unwrap()
}

#[test]
fn dijkstra_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..1000 {
        let g = random_graph(&mut rng);
        let src = g.node(0).clone();
        let dst = g.node(g.node_count() - 1).clone();
        let oracle = enumerate_paths_oracle(&g, &src, &dst, 12).unwrap();
        match (shortest_path(&g, &src, &dst).unwrap(), oracle) {
            (PathOutcome::Unreachable, None) => {}
            (PathOutcome::Found(r), Some(best)) => {
                assert!((r.total_latency_s() - best).abs() <= 1e-12 * best, "trial {trial}");
                let nodes = r.nodes();
                assert_eq!(nodes.first(), Some(&src));
                assert_eq!(nodes.last(), Some(&dst));
                let unique: BTreeSet<_> = nodes.iter().collect();
                assert_eq!(unique.len(), nodes.len(), "trial {trial}: repeated node");
                for (w, hop) in nodes.windows(2).zip(r.hop_latencies_s()) {
                    let e = g.edge(g.index_of(&w[0]).unwrap(), g.index_of(&w[1]).unwrap()).unwrap();
                    assert_eq!(e.latency_s, *hop);
                }
            }
            (got, want) => panic!("trial {trial}: dijkstra {got:?} vs oracle {want:?}"),
        }
    }
}

#[test]
fn dijkstra_beats_random_walks() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let c = shell(ConstellationConfig::default());
    let g = build_snapshot(&c, &stations(), 1, 321.0, &TopologyParams::default(), &consts()).unwrap();
    let s = &builtin_scenarios()[0];
    let (src, dst) = (g.index_of(&s.src_node()).unwrap(), g.index_of(&s.dst_node()).unwrap());
    let best = shortest_path(&g, &s.src_node(), &s.dst_node()).unwrap();
    let best = best.route().unwrap().total_latency_s();
    let mut completed = 0;
    for _ in 0..2000 {
        // Walk biased toward the destination so some walks arrive.
        let target = g.position(dst).unwrap();
        let (mut at, mut cost) = (src, 0.0);
        for _ in 0..60 {
            let options: Vec<_> = g.neighbors(at).iter().filter(|e| g.can_relay(e.to) || e.to == dst).collect();
            if options.is_empty() {
                break;
            }
            let e = if rng.gen_bool(0.7) {
                *options
                    .iter()
                    .min_by(|a, b| {
                        let da = g.position(a.to).unwrap().distance(target);
                        let db = g.position(b.to).unwrap().distance(target);
                        da.total_cmp(&db)
                    })
                    .unwrap()
            } else {
                options[rng.gen_range(0..options.len())]
            };
            cost += e.latency_s;
            at = e.to;
            if at == dst {
                break;
            }
        }
        if at == dst {
            completed += 1;
            assert!(best <= cost + 1e-15);
        }
    }
    assert!(completed > 0);
}

#[test]
fn routes_are_identical_across_thread_counts() {
    let c = shell(ConstellationConfig::default());
    let params = TopologyParams::default();
    let scenarios = builtin_scenarios();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            owsn_core::experiment::run_scenarios(&scenarios, &c, &params, &consts(), 40, 1).unwrap()
        })
    };
    let (a, b) = (run(1), run(4));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.slots, y.slots);
        assert_eq!(x.summary, y.summary);
    }
}

#[test]
fn topology_helpers_agree_with_builder() {
    let c = shell(ConstellationConfig::default());
    let pos = c.positions_at(77.0);
    let pairs = topology::satellite_links(&pos, &TopologyParams::default(), &consts());
    let g = build_snapshot(&c, &[], 1, 77.0, &TopologyParams::default(), &consts()).unwrap();
    assert_eq!(pairs.len(), g.link_count());
}
