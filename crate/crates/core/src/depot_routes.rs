//! Depot-to-depot connection table.
//!
//! For every pair of depots the table holds the fastest capacity-feasible way
//! to move an empty vehicle between them: a single trip when the shortest path
//! fits in one charge, otherwise a chain of single-trip hops between depots
//! with a recharge at every intermediate depot. Only the upper triangle is
//! stored; reverse lookups reverse the stored chain and self lookups are
//! empty.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{NodeId, ShortestPaths};
use crate::instance::Instance;
use crate::routing::Trip;
use crate::time::TimeUnits;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepotConnection {
    /// Sum of trip durations plus a recharge between consecutive trips.
    pub time: TimeUnits,
    pub trips: Vec<Trip>,
}

impl DepotConnection {
    fn reversed(&self) -> DepotConnection {
        DepotConnection { time: self.time, trips: self.trips.iter().rev().map(Trip::reversed).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepotRouteTable {
    depots: Vec<NodeId>,
    /// Upper triangle, row-major; `None` marks an unreachable pair.
    entries: Vec<Option<DepotConnection>>,
}

impl DepotRouteTable {
    pub fn depots(&self) -> &[NodeId] {
        &self.depots
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        let n = self.depots.len();
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    fn position(&self, d: NodeId) -> Option<usize> {
        self.depots.binary_search(&d).ok()
    }

    /// Number of materialised entries: `|N_d| (|N_d| - 1) / 2`.
    pub fn unique_entries(&self) -> usize {
        self.entries.len()
    }

    /// Fastest connection from `from` to `to`, or `None` when either id is not
    /// a depot or the pair cannot be joined within capacity.
    pub fn lookup(&self, from: NodeId, to: NodeId) -> Option<DepotConnection> {
        let i = self.position(from)?;
        let j = self.position(to)?;
        if i == j {
            return Some(DepotConnection { time: TimeUnits::ZERO, trips: Vec::new() });
        }
        if i < j {
            self.entries[self.slot(i, j)].clone()
        } else {
            self.entries[self.slot(j, i)].as_ref().map(DepotConnection::reversed)
        }
    }

    /// Connection time only; avoids cloning trips.
    pub fn time(&self, from: NodeId, to: NodeId) -> Option<TimeUnits> {
        let i = self.position(from)?;
        let j = self.position(to)?;
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Some(TimeUnits::ZERO),
            std::cmp::Ordering::Less => self.entries[self.slot(i, j)].as_ref().map(|c| c.time),
            std::cmp::Ordering::Greater => self.entries[self.slot(j, i)].as_ref().map(|c| c.time),
        }
    }

    /// Connection time and trip count, without cloning trips.
    pub fn hops(&self, from: NodeId, to: NodeId) -> Option<(TimeUnits, usize)> {
        let i = self.position(from)?;
        let j = self.position(to)?;
        if i == j {
            return Some((TimeUnits::ZERO, 0));
        }
        let slot = self.slot(i.min(j), i.max(j));
        self.entries[slot].as_ref().map(|c| (c.time, c.trips.len()))
    }

    /// True when every depot can reach every other within capacity limits.
    pub fn is_connected(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    /// True when every depot pair is joined by a single trip.
    pub fn is_single_trip_complete(&self) -> bool {
        self.entries.iter().all(|e| matches!(e, Some(c) if c.trips.len() == 1))
    }

    /// Cache format: one line per stored pair, `d1 d2 time (trip)(trip)...`,
    /// or `d1 d2 inf` for an unreachable pair.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let n = self.depots.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (self.depots[i], self.depots[j]);
                match &self.entries[self.slot(i, j)] {
                    None => {
                        let _ = writeln!(out, "{a} {b} inf");
                    }
                    Some(c) => {
                        let _ = write!(out, "{a} {b} {} ", c.time);
                        for t in &c.trips {
                            let _ = write!(out, "{t}");
                        }
                        out.push('\n');
                    }
                }
            }
        }
        out
    }

    pub fn from_text(inst: &Instance, text: &str) -> Result<Self> {
        let depots = inst.depots.clone();
        let n = depots.len();
        let mut table = DepotRouteTable { depots, entries: vec![None; n * (n.saturating_sub(1)) / 2] };
        let mut filled = vec![false; table.entries.len()];
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(4, char::is_whitespace);
            let depot = |s: Option<&str>| {
                s.and_then(|s| s.parse::<NodeId>().ok())
                    .and_then(|d| table.position(d))
                    .ok_or_else(|| Error::parse(ln, "expected a depot id"))
            };
            let (a, b) = (depot(parts.next())?, depot(parts.next())?);
            if a >= b {
                return Err(Error::parse(ln, "pairs must be listed with d1 < d2"));
            }
            let slot = table.slot(a, b);
            filled[slot] = true;
            let time = parts.next().ok_or_else(|| Error::parse(ln, "missing time"))?;
            if time == "inf" {
                continue;
            }
            let time: TimeUnits = time.parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?;
            let mut trips = Vec::new();
            for chunk in parts.next().unwrap_or("").split(')') {
                let chunk = chunk.trim();
                if chunk.is_empty() {
                    continue;
                }
                let nodes = chunk
                    .strip_prefix('(')
                    .ok_or_else(|| Error::parse(ln, "expected `(`"))?
                    .split_whitespace()
                    .map(|s| s.parse().map_err(|_| Error::parse(ln, format!("bad node {s:?}"))))
                    .collect::<Result<Vec<NodeId>>>()?;
                trips.push(Trip::new(&inst.graph, nodes).map_err(|e| Error::parse(ln, e.to_string()))?);
            }
            let expect: TimeUnits =
                trips.iter().map(Trip::duration).sum::<TimeUnits>() + inst.recharge * (trips.len() as i64 - 1).max(0);
            if expect != time {
                return Err(Error::parse(ln, format!("time {time} does not match trips ({expect})")));
            }
            table.entries[slot] = Some(DepotConnection { time, trips });
        }
        if filled.iter().any(|f| !f) {
            return Err(Error::parse(0, "depot route cache is missing pairs"));
        }
        Ok(table)
    }
}

/// Label for the meta-graph search: total time, hop count, depot sequence
/// (as indices into the sorted depot list). Compared lexicographically, which
/// encodes the tie-break toward fewer trips and then the smaller sequence.
type Label = (TimeUnits, usize, Vec<usize>);

pub fn build_depot_routes(inst: &Instance, sp: &ShortestPaths) -> DepotRouteTable {
    let depots = inst.depots.clone();
    let n = depots.len();
    let cap = inst.capacity;
    let rt = inst.recharge;

    // single-trip hops over the depot meta-graph
    let hop = |a: usize, b: usize| -> Option<TimeUnits> {
        let d = sp.dist(depots[a], depots[b]);
        (a != b && d <= cap).then_some(d)
    };

    let mut entries = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for s in 0..n {
        // Dijkstra from s; every hop after the first adds a recharge.
        let mut best: Vec<Option<Label>> = vec![None; n];
        let mut done = vec![false; n];
        best[s] = Some((TimeUnits::ZERO, 0, vec![s]));
        loop {
            let next = (0..n).filter(|&v| !done[v] && best[v].is_some()).min_by(|&a, &b| best[a].cmp(&best[b]));
            let Some(u) = next else { break };
            done[u] = true;
            let (cost, hops, seq) = best[u].clone().expect("selected labels exist");
            for v in 0..n {
                if done[v] {
                    continue;
                }
                if let Some(w) = hop(u, v) {
                    let extra = if hops == 0 { w } else { w + rt };
                    let mut nseq = seq.clone();
                    nseq.push(v);
                    let cand = (cost + extra, hops + 1, nseq);
                    if best[v].as_ref().is_none_or(|cur| cand < *cur) {
                        best[v] = Some(cand);
                    }
                }
            }
        }
        for t in s + 1..n {
            entries.push(best[t].as_ref().map(|(time, _, seq)| {
                DepotConnection {
                    time: *time,
                    trips: seq
                        .windows(2)
                        .map(|w| {
                            Trip::new(&inst.graph, sp.path(depots[w[0]], depots[w[1]]))
                                .expect("shortest paths follow graph edges")
                        })
                        .collect(),
                }
            }));
        }
    }
    DepotRouteTable { depots, entries }
}
