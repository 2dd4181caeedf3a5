//! Minimum-latency routing over a snapshot graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::topology::{NodeRef, SnapshotGraph};

/// Largest graph the exhaustive oracle accepts.
pub const ORACLE_NODE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    nodes: Vec<NodeRef>,
    hop_latencies_s: Vec<f64>,
    total_latency_s: f64,
}

impl Route {
    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }

    pub fn hop_latencies_s(&self) -> &[f64] {
        &self.hop_latencies_s
    }

    pub fn total_latency_s(&self) -> f64 {
        self.total_latency_s
    }

    pub fn latency_ms(&self) -> f64 {
        self.total_latency_s * 1000.0
    }

    pub fn satellite_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_ground()).count()
    }

    /// Node labels joined with `|`.
    pub fn path_label(&self) -> String {
        self.nodes.iter().map(ToString::to_string).collect::<Vec<_>>().join("|")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathOutcome {
    Found(Route),
    Unreachable,
}

impl PathOutcome {
    pub fn route(&self) -> Option<&Route> {
        match self {
            PathOutcome::Found(r) => Some(r),
            PathOutcome::Unreachable => None,
        }
    }
}

#[derive(Clone, Copy)]
struct Queued {
    cost: f64,
    node: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl Ord for Queued {
    // Min-heap on cost, then on node index.
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-latency route from `src` to `dst`.
///
/// Among routes of equal latency the lexicographically smallest node
/// sequence wins, using the [`NodeRef`] order.
pub fn shortest_path(graph: &SnapshotGraph, src: &NodeRef, dst: &NodeRef) -> Result<PathOutcome> {
    let lookup = |n: &NodeRef| {
        graph.index_of(n).ok_or_else(|| Error::InvalidInput(format!("node {n} is not in the graph")))
    };
    let (s, d) = (lookup(src)?, lookup(dst)?);
    if s == d {
        return Err(Error::InvalidInput(format!("source and destination are both {src}")));
    }
    Ok(match shortest_path_indices(graph, s, d) {
        Some((path, total)) => {
            let hop_latencies_s = path
                .windows(2)
                .map(|w| graph.edge(w[0], w[1]).expect("route follows graph edges").latency_s)
                .collect();
            PathOutcome::Found(Route {
                nodes: path.iter().map(|&i| graph.node(i).clone()).collect(),
                hop_latencies_s,
                total_latency_s: total,
            })
        }
        None => PathOutcome::Unreachable,
    })
}

/// Index-level Dijkstra with early exit at `dst`. Returns the node path and
/// its total latency in seconds.
pub fn shortest_path_indices(graph: &SnapshotGraph, src: usize, dst: usize) -> Option<(Vec<usize>, f64)> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    // Settle position of each node; usize::MAX while unsettled.
    let mut rank = vec![usize::MAX; n];
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Queued { cost: 0.0, node: src });

    while let Some(Queued { cost, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        rank[node] = order.len();
        order.push(node);
        if node == dst {
            break;
        }
        if node != src && !graph.can_relay(node) {
            continue;
        }
        for e in graph.neighbors(node) {
            let next = cost + e.latency_s;
            if !settled[e.to] && next < dist[e.to] {
                dist[e.to] = next;
                heap.push(Queued { cost: next, node: e.to });
            }
        }
    }
    if !settled[dst] {
        return None;
    }

    // Tight edges (dist[u] + w == dist[v]) that point forward in settle order
    // form the DAG of every shortest path. The order constraint keeps it
    // acyclic even when a near-zero link vanishes in the addition. Mark the
    // nodes that reach dst through it, then walk greedily from src taking the
    // smallest-index usable successor.
    let tight = |u: usize, v: usize, w: f64| {
        settled[v] && rank[v] > rank[u] && dist[u] + w == dist[v]
    };
    let mut reaches = vec![false; n];
    reaches[dst] = true;
    for &u in order.iter().rev() {
        if u != dst && (u == src || graph.can_relay(u)) {
            reaches[u] = graph.neighbors(u).iter().any(|e| reaches[e.to] && tight(u, e.to, e.latency_s));
        }
    }
    let mut path = vec![src];
    let mut cur = src;
    while cur != dst {
        cur = graph
            .neighbors(cur)
            .iter()
            .find(|e| reaches[e.to] && tight(cur, e.to, e.latency_s))
            .map(|e| e.to)
            .expect("src reaches dst through tight edges");
        path.push(cur);
    }
    Some((path, dist[dst]))
}

/// Exact optimum over all simple paths by exhaustive search. Test oracle for
/// graphs of at most `max_nodes` (itself capped at [`ORACLE_NODE_CAP`]) nodes.
pub fn enumerate_paths_oracle(
    graph: &SnapshotGraph,
    src: &NodeRef,
    dst: &NodeRef,
    max_nodes: usize,
) -> Result<Option<f64>> {
    let cap = max_nodes.min(ORACLE_NODE_CAP);
    if graph.node_count() > cap {
        return Err(Error::InvalidInput(format!(
            "oracle limited to {cap} nodes, graph has {}",
            graph.node_count()
        )));
    }
    let s = graph.index_of(src).ok_or_else(|| Error::InvalidInput(format!("{src} not in graph")))?;
    let d = graph.index_of(dst).ok_or_else(|| Error::InvalidInput(format!("{dst} not in graph")))?;
    if s == d {
        return Err(Error::InvalidInput("source equals destination".into()));
    }

    struct Search<'g> {
        graph: &'g SnapshotGraph,
        src: usize,
        dst: usize,
        seen: Vec<bool>,
        best: Option<f64>,
    }

    fn dfs(s: &mut Search<'_>, at: usize, cost: f64) {
        if at == s.dst {
            s.best = Some(s.best.map_or(cost, |b| b.min(cost)));
            return;
        }
        if at != s.src && !s.graph.can_relay(at) {
            return;
        }
        for e in s.graph.neighbors(at) {
            if !s.seen[e.to] {
                s.seen[e.to] = true;
                dfs(s, e.to, cost + e.latency_s);
                s.seen[e.to] = false;
            }
        }
    }

    let mut search = Search { graph, src: s, dst: d, seen: vec![false; graph.node_count()], best: None };
    search.seen[s] = true;
    dfs(&mut search, s, 0.0);
    Ok(search.best)
}
