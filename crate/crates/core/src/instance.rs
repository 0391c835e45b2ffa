//! Problem instances and their line-oriented text format.
//!
//! ```text
//! # comment
//! NAME example
//! NODES 8
//! DEPOTS 1 5
//! START 1            # optional, one depot per vehicle
//! EDGES 2
//! 1 3 3.0
//! 3 5 3.2
//! REQUIRED 1
//! 7 8
//! VEHICLES 1
//! CAPACITY 7
//! RECHARGE 1.1
//! SPEED 1            # optional
//! MAXTRIPS 4         # optional
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::graph::{edge_key, Edge, EdgeKey, Graph, NodeId};
use crate::time::TimeUnits;

/// Vehicle speed as a fixed-point decimal (millis). Stored for completeness;
/// edge weights are already traversal times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Speed(i64);

impl Speed {
    pub const ONE: Speed = Speed(1000);

    pub fn millis(self) -> i64 {
        self.0
    }
}

impl Default for Speed {
    fn default() -> Self {
        Speed::ONE
    }
}

impl fmt::Display for Speed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        TimeUnits::from_millis(self.0).fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub graph: Graph,
    /// Depot nodes, sorted ascending.
    pub depots: Vec<NodeId>,
    /// Required edges as normalised `(u, v)` with `u < v`, in file order.
    pub required: Vec<EdgeKey>,
    pub vehicle_count: usize,
    pub capacity: TimeUnits,
    pub recharge: TimeUnits,
    pub speed: Speed,
    pub max_trips: usize,
    /// Start depot of each vehicle, indexed by vehicle (0-based).
    pub start_depots: Vec<NodeId>,
}

/// Fields not yet checked against each other; `build` runs the full
/// validation.
#[derive(Debug, Clone, Default)]
pub struct InstanceBuilder {
    pub name: String,
    pub node_count: usize,
    pub edges: Vec<Edge>,
    pub depots: Vec<NodeId>,
    pub required: Vec<(NodeId, NodeId)>,
    pub vehicle_count: usize,
    pub capacity: TimeUnits,
    pub recharge: TimeUnits,
    pub speed: Option<Speed>,
    pub max_trips: Option<usize>,
    pub start_depots: Option<Vec<NodeId>>,
}

impl InstanceBuilder {
    pub fn build(self) -> Result<Instance> {
        for &(a, b) in &self.required {
            if a == b {
                return Err(Error::Instance(format!("self-loop in required edge ({a}, {b})")));
            }
        }
        let graph = Graph::new(self.node_count, self.edges)?;

        let mut depots = self.depots.clone();
        depots.sort_unstable();
        depots.dedup();
        if depots.is_empty() {
            return Err(Error::Instance("no depots".into()));
        }
        if let Some(&d) = depots.iter().find(|&&d| !graph.contains_node(d)) {
            return Err(Error::Instance(format!("depot {d} is not a node")));
        }

        if self.required.is_empty() {
            return Err(Error::Instance("no required edges".into()));
        }
        let mut required = Vec::with_capacity(self.required.len());
        let mut seen = BTreeSet::new();
        for &(a, b) in &self.required {
            let key = edge_key(a, b);
            if !graph.has_edge(a, b) {
                return Err(Error::Instance(format!("required edge not in edge set: ({a}, {b})")));
            }
            if !seen.insert(key) {
                return Err(Error::Instance(format!("duplicate required edge ({a}, {b})")));
            }
            required.push(key);
        }

        if self.vehicle_count == 0 {
            return Err(Error::Instance("vehicle count must be positive".into()));
        }
        if self.capacity <= TimeUnits::ZERO {
            return Err(Error::Instance("capacity must be positive".into()));
        }
        if self.recharge.is_negative() {
            return Err(Error::Instance("recharge time must be non-negative".into()));
        }
        for &(a, b) in &required {
            let w = graph.weight(a, b).expect("checked above");
            if w > self.capacity {
                return Err(Error::Instance(format!(
                    "required edge ({a}, {b}) weight {w} exceeds capacity {}",
                    self.capacity
                )));
            }
        }
        let speed = self.speed.unwrap_or_default();
        if speed.0 <= 0 {
            return Err(Error::Instance("speed must be positive".into()));
        }

        let start_depots = match self.start_depots {
            Some(s) => s,
            None => (0..self.vehicle_count).map(|k| depots[k % depots.len()]).collect(),
        };
        if start_depots.len() != self.vehicle_count {
            return Err(Error::Instance(format!(
                "{} start depots given for {} vehicles",
                start_depots.len(),
                self.vehicle_count
            )));
        }
        if let Some(&d) = start_depots.iter().find(|d| depots.binary_search(d).is_err()) {
            return Err(Error::Instance(format!("start node {d} is not a depot")));
        }

        let max_trips = match self.max_trips {
            Some(0) => return Err(Error::Instance("MAXTRIPS must be positive".into())),
            Some(f) => f,
            None => default_max_trips(&graph, self.capacity, required.len()),
        };

        Ok(Instance {
            name: self.name,
            graph,
            depots,
            required,
            vehicle_count: self.vehicle_count,
            capacity: self.capacity,
            recharge: self.recharge,
            speed,
            max_trips,
            start_depots,
        })
    }
}

/// ceil(total edge weight / C) + |E_u|.
pub fn default_max_trips(graph: &Graph, capacity: TimeUnits, required: usize) -> usize {
    let total = graph.total_weight().millis();
    let c = capacity.millis();
    ((total + c - 1) / c) as usize + required
}

impl Instance {
    pub fn is_depot(&self, n: NodeId) -> bool {
        self.depots.binary_search(&n).is_ok()
    }

    pub fn required_index(&self, key: EdgeKey) -> Option<usize> {
        self.required.iter().position(|&r| r == key)
    }

    pub fn is_required(&self, a: NodeId, b: NodeId) -> bool {
        self.required_index(edge_key(a, b)).is_some()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME {}", self.name);
        let _ = writeln!(out, "NODES {}", self.graph.node_count());
        let _ = writeln!(out, "DEPOTS {}", join(&self.depots));
        let _ = writeln!(out, "START {}", join(&self.start_depots));
        let _ = writeln!(out, "EDGES {}", self.graph.edges().len());
        for e in self.graph.edges() {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
        }
        let _ = writeln!(out, "REQUIRED {}", self.required.len());
        for (a, b) in &self.required {
            let _ = writeln!(out, "{a} {b}");
        }
        let _ = writeln!(out, "VEHICLES {}", self.vehicle_count);
        let _ = writeln!(out, "CAPACITY {}", self.capacity);
        let _ = writeln!(out, "RECHARGE {}", self.recharge);
        if self.speed != Speed::ONE {
            let _ = writeln!(out, "SPEED {}", self.speed);
        }
        if self.max_trips != default_max_trips(&self.graph, self.capacity, self.required.len()) {
            let _ = writeln!(out, "MAXTRIPS {}", self.max_trips);
        }
        out
    }
}

fn join(ids: &[NodeId]) -> String {
    ids.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut b = InstanceBuilder::default();
    let mut seen = BTreeSet::new();
    let mut have_nodes = false;
    while let Some((ln, line)) = lines.next() {
        let mut tok = line.split_whitespace();
        let key = tok.next().expect("non-empty line").to_ascii_uppercase();
        let rest: Vec<&str> = tok.collect();
        if !seen.insert(key.clone()) {
            return Err(Error::parse(ln, format!("duplicate section {key}")));
        }
        match key.as_str() {
            "NAME" => b.name = rest.join(" "),
            "NODES" => {
                b.node_count = single(ln, &rest)?;
                have_nodes = true;
            }
            "DEPOTS" => b.depots = ints(ln, &rest)?,
            "START" => b.start_depots = Some(ints(ln, &rest)?),
            "VEHICLES" => b.vehicle_count = single(ln, &rest)?,
            "CAPACITY" => b.capacity = duration(ln, &rest)?,
            "RECHARGE" => b.recharge = duration(ln, &rest)?,
            "SPEED" => b.speed = Some(Speed(duration(ln, &rest)?.millis())),
            "MAXTRIPS" => b.max_trips = Some(single(ln, &rest)?),
            "EDGES" => {
                let m: usize = single(ln, &rest)?;
                for _ in 0..m {
                    let (eln, eline) =
                        lines.next().ok_or_else(|| Error::parse(ln, "unexpected end of file in EDGES"))?;
                    let f: Vec<&str> = eline.split_whitespace().collect();
                    if f.len() != 3 {
                        return Err(Error::parse(eln, "expected `<u> <v> <weight>`"));
                    }
                    b.edges.push(Edge { u: int(eln, f[0])?, v: int(eln, f[1])?, weight: duration(eln, &f[2..])? });
                }
            }
            "REQUIRED" => {
                let r: usize = single(ln, &rest)?;
                for _ in 0..r {
                    let (rln, rline) =
                        lines.next().ok_or_else(|| Error::parse(ln, "unexpected end of file in REQUIRED"))?;
                    let f: Vec<&str> = rline.split_whitespace().collect();
                    if f.len() != 2 {
                        return Err(Error::parse(rln, "expected `<u> <v>`"));
                    }
                    b.required.push((int(rln, f[0])?, int(rln, f[1])?));
                }
            }
            other => return Err(Error::parse(ln, format!("unknown section {other}"))),
        }
    }
    for required in ["NODES", "DEPOTS", "EDGES", "REQUIRED", "VEHICLES", "CAPACITY", "RECHARGE"] {
        if !seen.contains(required) {
            return Err(Error::parse(0, format!("missing section {required}")));
        }
    }
    debug_assert!(have_nodes);
    b.build()
}

fn int(ln: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::parse(ln, format!("expected a non-negative integer, got {s:?}")))
}

fn ints(ln: usize, rest: &[&str]) -> Result<Vec<usize>> {
    rest.iter().map(|s| int(ln, s)).collect()
}

fn single(ln: usize, rest: &[&str]) -> Result<usize> {
    match rest {
        [s] => int(ln, s),
        _ => Err(Error::parse(ln, "expected exactly one integer")),
    }
}

fn duration(ln: usize, rest: &[&str]) -> Result<TimeUnits> {
    match rest {
        [s] => {
            let t: TimeUnits = s.parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?;
            if t.is_negative() {
                return Err(Error::parse(ln, format!("negative time {s}")));
            }
            Ok(t)
        }
        _ => Err(Error::parse(ln, "expected exactly one decimal value")),
    }
}
