//! CARP benchmark ingestion (gdb / val / egl header + edge-list layout) and
//! conversion into multi-depot instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use log::warn;
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{edge_key, Edge, NodeId};
use crate::instance::{Instance, InstanceBuilder};
use crate::time::TimeUnits;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarpEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub cost: TimeUnits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarpFile {
    pub name: String,
    pub node_count: usize,
    pub edges: Vec<CarpEdge>,
    pub metadata: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "NOMBRE",
    "COMENTARIO",
    "VERTICES",
    "ARISTAS_REQ",
    "ARISTAS_NOREQ",
    "VEHICULOS",
    "CAPACIDAD",
    "TIPO_COSTES_ARISTAS",
    "COSTE_TOTAL_REQUERIDAS",
    "DEPOSITO",
];

pub fn parse_carp(text: &str) -> Result<CarpFile> {
    let mut metadata = BTreeMap::new();
    let mut edges = Vec::new();
    let mut saw_edge_section = false;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.eq_ignore_ascii_case("END") {
            continue;
        }
        if line.starts_with('(') {
            if !saw_edge_section {
                return Err(Error::parse(ln, "edge line outside an edge list"));
            }
            edges.push(parse_edge_line(ln, line)?);
            continue;
        }
        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim().to_ascii_uppercase(), v.trim().to_string()),
            None => {
                warn!("line {ln}: ignoring unrecognised line {line:?}");
                continue;
            }
        };
        if key.starts_with("LISTA_ARISTAS") {
            saw_edge_section = true;
            continue;
        }
        if !KNOWN_KEYS.contains(&key.as_str()) {
            warn!("line {ln}: unknown header key {key}");
        }
        metadata.insert(key, value);
    }
    if !saw_edge_section || edges.is_empty() {
        return Err(Error::parse(0, "missing edge section"));
    }
    let node_count = match metadata.get("VERTICES") {
        Some(v) => v.parse().map_err(|_| Error::parse(0, format!("bad VERTICES value {v:?}")))?,
        None => edges.iter().map(|e: &CarpEdge| e.u.max(e.v)).max().unwrap_or(0),
    };
    if let Some(e) = edges.iter().find(|e| e.u > node_count || e.v > node_count) {
        return Err(Error::parse(0, format!("edge ({}, {}) exceeds VERTICES = {node_count}", e.u, e.v)));
    }
    Ok(CarpFile { name: metadata.get("NOMBRE").cloned().unwrap_or_default(), node_count, edges, metadata })
}

/// `( u, v) coste c demanda d`: demand and anything after the cost is
/// dropped.
fn parse_edge_line(ln: usize, line: &str) -> Result<CarpEdge> {
    let close = line.find(')').ok_or_else(|| Error::parse(ln, "unclosed `(`"))?;
    let pair: Vec<&str> = line[1..close].split(',').map(str::trim).collect();
    if pair.len() != 2 {
        return Err(Error::parse(ln, "expected `(u, v)`"));
    }
    let node = |s: &str| -> Result<NodeId> {
        let n: NodeId = s.parse().map_err(|_| Error::parse(ln, format!("bad node id {s:?}")))?;
        if n == 0 {
            return Err(Error::parse(ln, "node ids are 1-based"));
        }
        Ok(n)
    };
    let (u, v) = (node(pair[0])?, node(pair[1])?);
    let tokens: Vec<&str> = line[close + 1..].split_whitespace().collect();
    let cost_tok = match tokens.iter().position(|t| t.eq_ignore_ascii_case("coste")) {
        Some(p) => tokens.get(p + 1).copied(),
        None => tokens.first().copied(),
    }
    .ok_or_else(|| Error::parse(ln, "missing edge cost"))?;
    let cost: TimeUnits = cost_tok.parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?;
    Ok(CarpEdge { u, v, cost })
}

impl CarpFile {
    /// Writes the gdb layout with every edge in the required list and zero
    /// demand.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NOMBRE : {}", self.name);
        let _ = writeln!(out, "VERTICES : {}", self.node_count);
        let _ = writeln!(out, "ARISTAS_REQ : {}", self.edges.len());
        let _ = writeln!(out, "ARISTAS_NOREQ : 0");
        let _ = writeln!(out, "LISTA_ARISTAS_REQ :");
        for e in &self.edges {
            let _ = writeln!(out, " ( {}, {}) coste {} demanda 0", e.u, e.v, e.cost);
        }
        let _ = writeln!(out, "DEPOSITO : 1");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConversionParams {
    pub depot_ratio: Ratio<i64>,
    pub required_ratio: Ratio<i64>,
}

impl Default for ConversionParams {
    fn default() -> Self {
        ConversionParams { depot_ratio: Ratio::new(1, 5), required_ratio: Ratio::new(1, 3) }
    }
}

/// Accepts `1/5`, `0.2` or `1`.
pub fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    let bad = || Error::Instance(format!("bad ratio {s:?}"));
    let r = if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ratio::new(n, d)
    } else {
        let t = TimeUnits::parse_decimal(s.trim()).map_err(|_| bad())?;
        Ratio::new(t.millis(), 1000)
    };
    if r <= Ratio::from_integer(0) || r > Ratio::from_integer(1) {
        return Err(bad());
    }
    Ok(r)
}

fn round_half_up(r: Ratio<i64>) -> usize {
    (r + Ratio::new(1, 2)).floor().to_integer() as usize
}

/// Turns a CARP graph into an instance: a random fifth of the nodes become
/// depots, a random third of the edges become required, the fleet is half the
/// required-edge count, capacity is twice the heaviest edge and recharging
/// takes twice the capacity. Demands are discarded. Deterministic in `seed`.
pub fn convert_to_instance(c: &CarpFile, seed: u64, params: ConversionParams) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = c.node_count;

    // parallel edges collapse to the cheapest copy
    let mut by_key: BTreeMap<(NodeId, NodeId), (usize, TimeUnits)> = BTreeMap::new();
    for (i, e) in c.edges.iter().enumerate() {
        let key = edge_key(e.u, e.v);
        match by_key.get_mut(&key) {
            Some(slot) => {
                warn!("duplicate edge ({}, {}); keeping the cheaper copy", e.u, e.v);
                if e.cost < slot.1 {
                    slot.1 = e.cost;
                }
            }
            None => {
                by_key.insert(key, (i, e.cost));
            }
        }
    }
    let mut kept: Vec<(usize, NodeId, NodeId, TimeUnits)> =
        by_key.into_iter().map(|((u, v), (i, w))| (i, u, v, w)).collect();
    kept.sort_unstable_by_key(|k| k.0);
    let edges: Vec<Edge> = kept.iter().map(|&(_, u, v, w)| Edge { u, v, weight: w }).collect();

    let depot_count = round_half_up(params.depot_ratio * n as i64).max(2).min(n);
    let required_count = round_half_up(params.required_ratio * edges.len() as i64).max(1).min(edges.len());

    let mut depots: Vec<NodeId> = sample(&mut rng, n, depot_count).into_iter().map(|i| i + 1).collect();
    depots.sort_unstable();
    let mut req_idx: Vec<usize> = sample(&mut rng, edges.len(), required_count).into_vec();
    req_idx.sort_unstable();
    let required = req_idx.iter().map(|&i| (edges[i].u, edges[i].v)).collect();

    let max_w = edges.iter().map(|e| e.weight).max().unwrap_or_default();
    let capacity = max_w * 2;
    InstanceBuilder {
        name: if c.name.is_empty() { format!("carp-{seed}") } else { c.name.clone() },
        node_count: n,
        edges,
        depots,
        required,
        vehicle_count: (required_count / 2).max(1),
        capacity,
        recharge: capacity * 2,
        ..Default::default()
    }
    .build()
}

/// Random connected graph in CARP form: a random spanning tree plus extra
/// distinct edges, integer costs in `1..=max_cost`. Used for randomized
/// testing and benchmarking.
pub fn synthetic_carp(seed: u64, nodes: usize, edges: usize, max_cost: i64) -> CarpFile {
    assert!(nodes >= 2, "need at least two nodes");
    let max_edges = nodes * (nodes - 1) / 2;
    let edges = edges.clamp(nodes - 1, max_edges);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    let mut list = Vec::with_capacity(edges);
    let mut add = |u: NodeId, v: NodeId, rng: &mut ChaCha8Rng, list: &mut Vec<CarpEdge>| {
        if set.insert(edge_key(u, v)) {
            list.push(CarpEdge { u, v, cost: TimeUnits::from_units(rng.gen_range(1..=max_cost)) });
        }
    };
    for v in 2..=nodes {
        let u = rng.gen_range(1..v);
        add(u, v, &mut rng, &mut list);
    }
    while list.len() < edges {
        let u = rng.gen_range(1..=nodes);
        let v = rng.gen_range(1..=nodes);
        if u != v {
            add(u, v, &mut rng, &mut list);
        }
    }
    CarpFile { name: format!("synthetic-{seed}"), node_count: nodes, edges: list, metadata: BTreeMap::new() }
}
