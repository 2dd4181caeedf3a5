//! Per-slot snapshot graphs: laser links between satellites in range plus
//! ground up/down links above the elevation mask.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::constellation::{Constellation, ConstellationConfig, SatId};
use crate::error::{Error, Result};
use crate::geo::{self, GeodeticPoint, Vec3};
use crate::grid::SpatialGrid;

/// A graph node. Ground stations sort before satellites; ground stations by
/// label, satellites by id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Ground(String),
    Satellite(SatId),
}

impl NodeRef {
    pub fn ground(label: impl Into<String>) -> Self {
        NodeRef::Ground(label.into())
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, NodeRef::Ground(_))
    }

    pub fn satellite(&self) -> Option<SatId> {
        match self {
            NodeRef::Satellite(id) => Some(*id),
            NodeRef::Ground(_) => None,
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Ground(label) => f.write_str(label),
            NodeRef::Satellite(id) => id.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkClass {
    IntraPlane,
    AdjacentPlane,
    CrossingPlane,
    Ground,
}

impl LinkClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkClass::IntraPlane => "intra_plane",
            LinkClass::AdjacentPlane => "adjacent_plane",
            LinkClass::CrossingPlane => "crossing_plane",
            LinkClass::Ground => "ground",
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies a satellite pair by the relation of their orbital planes.
pub fn classify_link(a: SatId, b: SatId, cfg: &ConstellationConfig) -> Result<LinkClass> {
    if a == b {
        return Err(Error::InvalidInput(format!("cannot classify a link from {a} to itself")));
    }
    let n = cfg.num_planes;
    let diff = (a.plane() + n - b.plane()) % n;
    Ok(if diff == 0 {
        LinkClass::IntraPlane
    } else if diff == 1 || diff == n - 1 {
        LinkClass::AdjacentPlane
    } else {
        LinkClass::CrossingPlane
    })
}

/// Link rules for a snapshot. The 30 degree default mask is the value that,
/// together with phasing factor 10, reproduces the reference averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyParams {
    pub lisl_range_km: f64,
    pub min_elevation_deg: f64,
    pub occlusion_check: bool,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self { lisl_range_km: 1500.0, min_elevation_deg: 30.0, occlusion_check: true }
    }
}

impl TopologyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lisl_range_km.is_finite() && self.lisl_range_km > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lisl_range_km must be positive, got {}",
                self.lisl_range_km
            )));
        }
        if !(0.0..90.0).contains(&self.min_elevation_deg) {
            return Err(Error::InvalidConfig(format!(
                "min_elevation_deg {} outside [0, 90)",
                self.min_elevation_deg
            )));
        }
        Ok(())
    }
}

/// An undirected link as seen from one endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub distance_km: f64,
    pub latency_s: f64,
    pub class: LinkClass,
}

/// An undirected link between two named nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub a: NodeRef,
    pub b: NodeRef,
    pub distance_km: f64,
    pub latency_s: f64,
    pub class: LinkClass,
}

impl Link {
    /// Link with latency derived from `distance_km` at the vacuum speed of light.
    pub fn with_distance(
        a: NodeRef,
        b: NodeRef,
        distance_km: f64,
        class: LinkClass,
        consts: &PhysicalConstants,
    ) -> Self {
        Self { a, b, distance_km, latency_s: distance_km * 1000.0 / consts.c_vacuum_m_s, class }
    }
}

/// Immutable weighted graph for one time slot.
///
/// Nodes are stored sorted by their [`NodeRef`] order, so node indices
/// compare the same way the nodes do.
///
/// In snapshots built from a constellation ground stations are route
/// endpoints only; routes never relay through a third station. Graphs built
/// with [`SnapshotGraph::from_links`] relay through any node.
#[derive(Debug, Clone)]
pub struct SnapshotGraph {
    slot_index: usize,
    time_s: f64,
    nodes: Vec<NodeRef>,
    positions: Option<Vec<Vec3>>,
    adjacency: Vec<Vec<Edge>>,
    ground_transit: bool,
}

impl SnapshotGraph {
    /// Builds a graph from explicit links. Rejects self-loops, duplicate
    /// links, unknown endpoints and non-positive latencies.
    pub fn from_links(
        slot_index: usize,
        time_s: f64,
        mut nodes: Vec<NodeRef>,
        links: &[Link],
    ) -> Result<Self> {
        nodes.sort();
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate node in graph".into()));
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let lookup = |n: &NodeRef| {
            nodes
                .binary_search(n)
                .map_err(|_| Error::InvalidInput(format!("link endpoint {n} is not a node")))
        };
        for link in links {
            let (i, j) = (lookup(&link.a)?, lookup(&link.b)?);
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at {}", link.a)));
            }
            if !(link.latency_s.is_finite() && link.latency_s > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "link {}-{} has non-positive latency",
                    link.a, link.b
                )));
            }
            let edge = |to| Edge {
                to,
                distance_km: link.distance_km,
                latency_s: link.latency_s,
                class: link.class,
            };
            adjacency[i].push(edge(j));
            adjacency[j].push(edge(i));
        }
        for list in &mut adjacency {
            list.sort_by_key(|e| e.to);
            if list.windows(2).any(|w| w[0].to == w[1].to) {
                return Err(Error::InvalidInput("duplicate link in graph".into()));
            }
        }
        Ok(Self { slot_index, time_s, nodes, positions: None, adjacency, ground_transit: true })
    }

    pub fn slot_index(&self) -> usize {
        self.slot_index
    }

    pub fn time_s(&self) -> f64 {
        self.time_s
    }

    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, index: usize) -> &NodeRef {
        &self.nodes[index]
    }

    pub fn index_of(&self, node: &NodeRef) -> Option<usize> {
        self.nodes.binary_search(node).ok()
    }

    /// Inertial position of a node, when the graph was built from geometry.
    pub fn position(&self, index: usize) -> Option<Vec3> {
        self.positions.as_ref().map(|p| p[index])
    }

    /// Whether a route may pass through `index` without ending there.
    pub fn can_relay(&self, index: usize) -> bool {
        self.ground_transit || !self.nodes[index].is_ground()
    }

    pub fn neighbors(&self, index: usize) -> &[Edge] {
        &self.adjacency[index]
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge> {
        let list = &self.adjacency[a];
        list.binary_search_by_key(&b, |e| e.to).ok().map(|k| &list[k])
    }

    pub fn link_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Each undirected link once, as `(lower index, higher index, edge)`.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize, &Edge)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |e| e.to > i).map(move |e| (i, e.to, e)))
    }

    /// Edge list as CSV: `slot,node_a,node_b,class,distance_km,latency_ms`.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv write failed: {e}"));
        w.write_record(["slot", "node_a", "node_b", "class", "distance_km", "latency_ms"])
            .map_err(csv_err)?;
        for (i, j, e) in self.links() {
            w.write_record([
                self.slot_index.to_string(),
                self.nodes[i].to_string(),
                self.nodes[j].to_string(),
                e.class.to_string(),
                format!("{:.4}", e.distance_km),
                format!("{:.4}", e.latency_s * 1000.0),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Laser links among `positions`: every pair within `lisl_range_km`, and with
/// a clear line of sight when `occlusion_check` is on. Coincident satellites
/// get no link. Returns `(i, j, km)` with `i < j`, sorted.
pub fn satellite_links(
    positions: &[Vec3],
    params: &TopologyParams,
    consts: &PhysicalConstants,
) -> Vec<(usize, usize, f64)> {
    let mut pairs = SpatialGrid::new(positions, params.lisl_range_km).pairs_within(params.lisl_range_km);
    pairs.retain(|&(_, _, d)| d > 0.0);
    if params.occlusion_check {
        pairs.retain(|&(i, j, _)| {
            geo::line_of_sight_clear(positions[i], positions[j], consts.earth_radius_km)
        });
    }
    pairs
}

/// Snapshot of `constellation` plus `stations` at `time_s`.
///
/// Stations sharing a label must share coordinates; they collapse to one node.
pub fn build_snapshot(
    constellation: &Constellation,
    stations: &[GeodeticPoint],
    slot_index: usize,
    time_s: f64,
    params: &TopologyParams,
    consts: &PhysicalConstants,
) -> Result<SnapshotGraph> {
    let mut unique: Vec<&GeodeticPoint> = stations.iter().collect();
    unique.sort_by(|a, b| a.label().cmp(b.label()));
    unique.dedup_by(|a, b| a.label() == b.label() && a == b);
    if unique.windows(2).any(|w| w[0].label() == w[1].label()) {
        return Err(Error::InvalidInput(
            "two ground stations share a label but not coordinates".into(),
        ));
    }

    let ground = unique.len();
    let sats = constellation.satellites();
    let mut nodes: Vec<NodeRef> = unique.iter().map(|s| NodeRef::ground(s.label())).collect();
    nodes.extend(sats.iter().map(|s| NodeRef::Satellite(s.id)));

    let mut positions: Vec<Vec3> =
        unique.iter().map(|s| geo::geodetic_to_inertial(s, time_s, consts)).collect();
    positions.extend(constellation.positions_at(time_s));

    let mut adjacency: Vec<Vec<Edge>> = vec![Vec::new(); nodes.len()];
    let latency = |d: f64| d * 1000.0 / consts.c_vacuum_m_s;

    for (g, gs) in positions[..ground].iter().enumerate() {
        for (k, sat) in positions[ground..].iter().enumerate() {
            if geo::elevation_angle(*gs, *sat)? >= params.min_elevation_deg {
                let d = gs.distance(*sat);
                let to = ground + k;
                let e = Edge { to, distance_km: d, latency_s: latency(d), class: LinkClass::Ground };
                adjacency[g].push(e);
                adjacency[to].push(Edge { to: g, ..e });
            }
        }
    }

    let cfg = constellation.config();
    for (i, j, d) in satellite_links(&positions[ground..], params, consts) {
        let class = classify_link(sats[i].id, sats[j].id, cfg)?;
        let (a, b) = (ground + i, ground + j);
        let e = Edge { to: b, distance_km: d, latency_s: latency(d), class };
        adjacency[a].push(e);
        adjacency[b].push(Edge { to: a, ..e });
    }
    for list in &mut adjacency {
        list.sort_by_key(|e| e.to);
    }

    Ok(SnapshotGraph {
        slot_index,
        time_s,
        nodes,
        positions: Some(positions),
        adjacency,
        ground_transit: false,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub intra_plane: usize,
    pub adjacent_plane: usize,
    pub crossing_plane: usize,
    pub ground: usize,
}

impl ClassCounts {
    pub fn degree(&self) -> usize {
        self.intra_plane + self.adjacent_plane + self.crossing_plane + self.ground
    }

    fn add(&mut self, class: LinkClass) {
        match class {
            LinkClass::IntraPlane => self.intra_plane += 1,
            LinkClass::AdjacentPlane => self.adjacent_plane += 1,
            LinkClass::CrossingPlane => self.crossing_plane += 1,
            LinkClass::Ground => self.ground += 1,
        }
    }
}

/// Per-satellite link counts by class.
pub fn neighbor_census(graph: &SnapshotGraph) -> BTreeMap<SatId, ClassCounts> {
    let mut census = BTreeMap::new();
    for (i, node) in graph.nodes().iter().enumerate() {
        if let NodeRef::Satellite(id) = node {
            let mut counts = ClassCounts::default();
            for e in graph.neighbors(i) {
                counts.add(e.class);
            }
            census.insert(*id, counts);
        }
    }
    census
}
