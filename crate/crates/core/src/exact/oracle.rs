//! Exhaustive optimum for tiny instances.
//!
//! Three layers, each exact:
//! 1. For every depot, a label-setting search over `(node, covered required
//!    edges)` finds the fastest walk to every other depot for every covered
//!    set, pruned at capacity. Walks may repeat edges freely.
//! 2. Per vehicle, a shortest-path search over `(depot, covered set, started)`
//!    chains those trips into routes, giving the fastest route covering each
//!    set. A failed vehicle's routes must finish by its failure time.
//! 3. Every assignment of required edges to vehicles is scored by makespan.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::failures::FailureScenario;
use crate::graph::NodeId;
use crate::network::Network;
use crate::routing::{FleetPlan, Route, Trip};
use crate::time::TimeUnits;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_required: usize,
    pub max_vehicles: usize,
    /// Cap on trip-search labels across all source depots.
    pub max_labels: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_required: 4, max_vehicles: 3, max_labels: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleStats {
    /// Labels pushed while enumerating candidate trips.
    pub labels: usize,
    /// Route-search states settled across all vehicles.
    pub route_states: usize,
    pub assignments: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub beta: TimeUnits,
    pub plan: FleetPlan,
    pub stats: OracleStats,
}

impl OracleResult {
    pub fn to_text(&self) -> String {
        format!(
            "BETA {}\nLABELS {}\nROUTE_STATES {}\nASSIGNMENTS {}\nPLAN\n{}",
            self.beta,
            self.stats.labels,
            self.stats.route_states,
            self.stats.assignments,
            self.plan.to_text()
        )
    }
}

const INF: TimeUnits = TimeUnits::from_millis(i64::MAX / 4);

/// Fastest walks from one source depot, per `(node, mask)`.
struct WalkTable {
    dist: Vec<TimeUnits>,
    pred: Vec<usize>,
    masks: usize,
}

impl WalkTable {
    fn state(&self, node: NodeId, mask: usize) -> usize {
        node * self.masks + mask
    }

    fn walk(&self, source: NodeId, node: NodeId, mask: usize) -> Vec<NodeId> {
        let mut s = self.state(node, mask);
        let start = self.state(source, 0);
        let mut nodes = vec![node];
        while s != start {
            s = self.pred[s];
            nodes.push(s / self.masks);
        }
        nodes.reverse();
        nodes
    }
}

fn walk_search(net: &Network, source: NodeId, labels: &mut usize, limit: usize) -> Result<WalkTable> {
    let inst = &net.inst;
    let masks = 1usize << inst.required.len();
    let n = inst.graph.node_count() + 1;
    let mut t = WalkTable { dist: vec![INF; n * masks], pred: vec![usize::MAX; n * masks], masks };
    let start = t.state(source, 0);
    t.dist[start] = TimeUnits::ZERO;
    let mut heap = BinaryHeap::from([Reverse((TimeUnits::ZERO, start))]);
    while let Some(Reverse((d, s))) = heap.pop() {
        if d > t.dist[s] {
            continue;
        }
        let (u, mask) = (s / masks, s % masks);
        for &(v, w) in inst.graph.neighbors(u) {
            let nd = d + w;
            if nd > inst.capacity {
                continue;
            }
            let bit = inst.required_index(crate::graph::edge_key(u, v)).map_or(0, |i| 1 << i);
            let ns = t.state(v, mask | bit);
            if nd < t.dist[ns] {
                t.dist[ns] = nd;
                t.pred[ns] = s;
                heap.push(Reverse((nd, ns)));
                *labels += 1;
                if *labels > limit {
                    return Err(Error::OracleBudget(format!("more than {limit} trip labels")));
                }
            }
        }
    }
    Ok(t)
}

/// Route-search state: depot index, covered mask, whether a trip was made.
#[derive(Clone, Copy)]
struct RouteLabel {
    time: TimeUnits,
    /// Previous state and the depot index the trip ended at.
    prev: Option<(usize, usize)>,
}

struct VehicleRoutes {
    /// Fastest route time per covered-at-least mask, with the final state.
    best: Vec<(TimeUnits, usize)>,
    labels: Vec<RouteLabel>,
    trip_mask: Vec<usize>,
}

fn route_search(
    net: &Network,
    walks: &[WalkTable],
    start: NodeId,
    deadline: Option<TimeUnits>,
    settled: &mut usize,
) -> VehicleRoutes {
    let inst = &net.inst;
    let depots = &inst.depots;
    let nd = depots.len();
    let masks = 1usize << inst.required.len();
    // state = ((depot * masks) + mask) * 2 + started
    let idx = |d: usize, m: usize, st: usize| (d * masks + m) * 2 + st;
    let total = nd * masks * 2;
    let mut labels = vec![RouteLabel { time: INF, prev: None }; total];
    let mut trip_mask = vec![0usize; total];
    let mut done = vec![false; total];
    let s0 = idx(depots.binary_search(&start).expect("start is a depot"), 0, 0);
    labels[s0].time = TimeUnits::ZERO;
    let mut heap = BinaryHeap::from([Reverse((TimeUnits::ZERO, s0))]);
    let cap = deadline.unwrap_or(INF);
    while let Some(Reverse((time, s))) = heap.pop() {
        if done[s] {
            continue;
        }
        done[s] = true;
        *settled += 1;
        let (di, m, st) = (s / 2 / masks, (s / 2) % masks, s % 2);
        let pause = if st == 1 { inst.recharge } else { TimeUnits::ZERO };
        let from = &walks[di];
        for (ei, &e) in depots.iter().enumerate() {
            for tm in 0..masks {
                let w = from.dist[from.state(e, tm)];
                if w >= INF || (ei == di && tm == 0) {
                    continue;
                }
                let nt = time + pause + w;
                if nt > cap {
                    continue;
                }
                let ns = idx(ei, m | tm, 1);
                if !done[ns] && nt < labels[ns].time {
                    labels[ns] = RouteLabel { time: nt, prev: Some((s, ei)) };
                    trip_mask[ns] = tm;
                    heap.push(Reverse((nt, ns)));
                }
            }
        }
    }
    let mut best = vec![(INF, usize::MAX); masks];
    for s in 0..total {
        let m = (s / 2) % masks;
        if labels[s].time < INF && done[s] {
            for (need, slot) in best.iter_mut().enumerate() {
                if need & m == need && (labels[s].time, s) < *slot {
                    *slot = (labels[s].time, s);
                }
            }
        }
    }
    VehicleRoutes { best, labels, trip_mask }
}

fn rebuild(net: &Network, walks: &[WalkTable], vr: &VehicleRoutes, end: usize) -> Vec<Trip> {
    let inst = &net.inst;
    let masks = 1usize << inst.required.len();
    let mut trips = Vec::new();
    let mut s = end;
    while let Some((prev, ei)) = vr.labels[s].prev {
        let di = prev / 2 / masks;
        let walk = walks[di].walk(inst.depots[di], inst.depots[ei], vr.trip_mask[s]);
        trips.push(Trip::new(&inst.graph, walk).expect("walks follow edges"));
        s = prev;
    }
    trips.reverse();
    trips
}

/// Minimum makespan over all plans covering every required edge, where each
/// failed vehicle must finish its route by its failure time.
pub fn exact_optimum(net: &Network, scenario: Option<&FailureScenario>, limits: &OracleLimits) -> Result<OracleResult> {
    let inst = &net.inst;
    let r = inst.required.len();
    let k = inst.vehicle_count;
    if r > limits.max_required || k > limits.max_vehicles {
        return Err(Error::OracleBudget(format!(
            "{r} required edges and {k} vehicles exceed the limits ({} and {})",
            limits.max_required, limits.max_vehicles
        )));
    }
    let mut stats = OracleStats::default();
    let walks = inst
        .depots
        .iter()
        .map(|&d| walk_search(net, d, &mut stats.labels, limits.max_labels))
        .collect::<Result<Vec<_>>>()?;
    let per_vehicle: Vec<VehicleRoutes> = (0..k)
        .map(|v| {
            let deadline = scenario.and_then(|s| s.failures.get(&v).copied());
            route_search(net, &walks, inst.start_depots[v], deadline, &mut stats.route_states)
        })
        .collect();

    let full = (1usize << r) - 1;
    let mut best: Option<(TimeUnits, Vec<usize>)> = None;
    let mut assign = vec![0usize; r];
    let combos = k.pow(r as u32);
    for code in 0..combos {
        let mut c = code;
        for a in assign.iter_mut() {
            *a = c % k;
            c /= k;
        }
        stats.assignments += 1;
        let mut need = vec![0usize; k];
        for (e, &v) in assign.iter().enumerate() {
            need[v] |= 1 << e;
        }
        let span = need.iter().enumerate().map(|(v, &m)| per_vehicle[v].best[m].0).max().unwrap_or_default();
        if span < INF && best.as_ref().is_none_or(|(b, _)| span < *b) {
            best = Some((span, need));
        }
    }
    let (beta, need) =
        best.ok_or_else(|| Error::Infeasible(format!("no plan covers all {r} required edges (full mask {full:b})")))?;
    let mut plan = FleetPlan::empty(inst);
    for (v, &m) in need.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let end = per_vehicle[v].best[m].1;
        let trips = rebuild(net, &walks, &per_vehicle[v], end);
        plan.routes[v] = Route::with_trips(v, inst.start_depots[v], trips);
    }
    debug_assert_eq!(plan.mission_time(), beta);
    Ok(OracleResult { beta, plan, stats })
}
