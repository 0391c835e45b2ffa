//! Undirected weighted road graph and shortest-path queries.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::time::TimeUnits;

/// Node ids are 1-based throughout the crate, matching the file formats.
pub type NodeId = usize;

/// Unordered node pair with `u < v`.
pub type EdgeKey = (NodeId, NodeId);

pub fn edge_key(a: NodeId, b: NodeId) -> EdgeKey {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: TimeUnits,
}

#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, TimeUnits)>>,
    index: HashMap<EdgeKey, usize>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.node_count == other.node_count && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph and checks that it is simple, positively weighted and
    /// connected. Edge endpoints are stored in the order given.
    pub fn new(node_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Instance("graph has no nodes".into()));
        }
        let mut adjacency = vec![Vec::new(); node_count + 1];
        let mut index = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if e.u == e.v {
                return Err(Error::Instance(format!("self-loop on node {}", e.u)));
            }
            for n in [e.u, e.v] {
                if n == 0 || n > node_count {
                    return Err(Error::Instance(format!(
                        "edge ({}, {}) references node {n} outside 1..={node_count}",
                        e.u, e.v
                    )));
                }
            }
            if e.weight <= TimeUnits::ZERO {
                return Err(Error::Instance(format!("edge ({}, {}) has non-positive weight {}", e.u, e.v, e.weight)));
            }
            if index.insert(edge_key(e.u, e.v), i).is_some() {
                return Err(Error::Instance(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = Graph { node_count, edges, adjacency, index };
        if !graph.is_connected() {
            return Err(Error::Instance("graph disconnected".into()));
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.node_count
    }

    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, TimeUnits)] {
        &self.adjacency[n]
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        n >= 1 && n <= self.node_count
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.index.contains_key(&edge_key(a, b))
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<TimeUnits> {
        self.index.get(&edge_key(a, b)).map(|&i| self.edges[i].weight)
    }

    pub fn max_weight(&self) -> TimeUnits {
        self.edges.iter().map(|e| e.weight).max().unwrap_or_default()
    }

    pub fn total_weight(&self) -> TimeUnits {
        self.edges.iter().map(|e| e.weight).sum()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count + 1];
        let mut stack = vec![1];
        seen[1] = true;
        let mut count = 1;
        while let Some(n) = stack.pop() {
            for &(m, _) in &self.adjacency[n] {
                if !seen[m] {
                    seen[m] = true;
                    count += 1;
                    stack.push(m);
                }
            }
        }
        count == self.node_count
    }

    /// Single-source Dijkstra. Returns distances and predecessors indexed by
    /// node id (index 0 unused).
    pub fn dijkstra(&self, source: NodeId) -> (Vec<TimeUnits>, Vec<NodeId>) {
        let n = self.node_count;
        let unreachable = TimeUnits::from_millis(i64::MAX);
        let mut dist = vec![unreachable; n + 1];
        let mut pred = vec![0; n + 1];
        let mut heap = BinaryHeap::new();
        dist[source] = TimeUnits::ZERO;
        heap.push(Reverse((TimeUnits::ZERO, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = u;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        (dist, pred)
    }

    /// Minimum-time walk from `from` to `to` and the node sequence realising it.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> (TimeUnits, Vec<NodeId>) {
        let (dist, pred) = self.dijkstra(from);
        (dist[to], unwind(&pred, from, to))
    }

    pub fn all_pairs(&self) -> ShortestPaths {
        ShortestPaths::new(self)
    }

    /// Largest shortest-path time over all node pairs.
    pub fn diameter(&self) -> TimeUnits {
        self.all_pairs().diameter()
    }
}

fn unwind(pred: &[NodeId], from: NodeId, to: NodeId) -> Vec<NodeId> {
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = pred[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// All-pairs shortest-path table, built once per instance and shared by the
/// planner, depot-route builder and auction.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    dist: Vec<Vec<TimeUnits>>,
    pred: Vec<Vec<NodeId>>,
}

impl ShortestPaths {
    pub fn new(graph: &Graph) -> Self {
        let mut dist = vec![Vec::new()];
        let mut pred = vec![Vec::new()];
        for s in graph.nodes() {
            let (d, p) = graph.dijkstra(s);
            dist.push(d);
            pred.push(p);
        }
        ShortestPaths { dist, pred }
    }

    pub fn dist(&self, a: NodeId, b: NodeId) -> TimeUnits {
        self.dist[a][b]
    }

    pub fn path(&self, a: NodeId, b: NodeId) -> Vec<NodeId> {
        unwind(&self.pred[a], a, b)
    }

    pub fn diameter(&self) -> TimeUnits {
        self.dist.iter().skip(1).flat_map(|row| row.iter().skip(1).copied()).max().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(x: i64) -> TimeUnits {
        TimeUnits::from_units(x)
    }

    fn e(a: NodeId, b: NodeId, w: i64) -> Edge {
        Edge { u: a, v: b, weight: u(w) }
    }

    #[test]
    fn zero_self_distance() {
        let g = Graph::new(3, vec![e(1, 2, 1), e(2, 3, 1)]).unwrap();
        assert_eq!(g.shortest_path(3, 3), (TimeUnits::ZERO, vec![3]));
    }

    #[test]
    fn triangle_prefers_two_cheap_edges() {
        // a=1, b=2, c=3: (a,b)=1, (b,c)=1, (a,c)=3. Simple paths a->c are
        // [a,c] with cost 3 and [a,b,c] with cost 2.
        let g = Graph::new(3, vec![e(1, 2, 1), e(2, 3, 1), e(1, 3, 3)]).unwrap();
        assert_eq!(g.shortest_path(1, 3), (u(2), vec![1, 2, 3]));
    }

    #[test]
    fn path_graph() {
        let g = Graph::new(3, vec![e(1, 2, 1), e(2, 3, 1)]).unwrap();
        assert_eq!(g.shortest_path(1, 3), (u(2), vec![1, 2, 3]));
        assert_eq!(g.diameter(), u(2));
    }

    #[test]
    fn single_edge_diameter() {
        let g = Graph::new(2, vec![e(1, 2, 5)]).unwrap();
        assert_eq!(g.diameter(), u(5));
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(Graph::new(2, vec![e(1, 1, 1)]).is_err());
        assert!(Graph::new(2, vec![e(1, 2, 1), e(2, 1, 3)]).is_err());
        assert!(Graph::new(3, vec![e(1, 2, 1)]).is_err());
        assert!(Graph::new(2, vec![e(1, 3, 1)]).is_err());
        assert!(Graph::new(2, vec![e(1, 2, 0)]).is_err());
    }
}
