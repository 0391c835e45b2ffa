//! Trips, routes and fleet plans, with all of the time accounting built on
//! them.
//!
//! A route is a chain of depot-to-depot trips. Between consecutive trips the
//! vehicle recharges in place for `R_T`. A trip may also carry a release time
//! (`not_before`): trips handed to a vehicle that was already idle cannot
//! start before the instant they were assigned. Plans produced by the planner
//! never carry release times, so for them
//! `route_time = sum(trip durations) + (trips - 1) * R_T` holds exactly.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::graph::{edge_key, EdgeKey, Graph, NodeId};
use crate::instance::Instance;
use crate::time::TimeUnits;

/// A walk between two depots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trip {
    nodes: Vec<NodeId>,
    duration: TimeUnits,
}

impl Trip {
    pub fn new(graph: &Graph, nodes: Vec<NodeId>) -> Result<Self> {
        let duration = trip_time(graph, &nodes)?;
        Ok(Trip { nodes, duration })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn duration(&self) -> TimeUnits {
        self.duration
    }

    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn end(&self) -> NodeId {
        *self.nodes.last().expect("trips are non-empty")
    }

    pub fn reversed(&self) -> Trip {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Trip { nodes, duration: self.duration }
    }

    /// Traversed edges in walk order, normalised.
    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.nodes.windows(2).map(|w| edge_key(w[0], w[1]))
    }
}

impl fmt::Display for Trip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('(')?;
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_char(' ')?;
            }
            write!(f, "{n}")?;
        }
        f.write_char(')')
    }
}

/// Sum of edge weights along a walk. A single-node walk takes no time.
pub fn trip_time(graph: &Graph, nodes: &[NodeId]) -> Result<TimeUnits> {
    if nodes.is_empty() {
        return Err(Error::Trip("empty node list".into()));
    }
    if let Some(&n) = nodes.iter().find(|&&n| !graph.contains_node(n)) {
        return Err(Error::Trip(format!("unknown node {n}")));
    }
    nodes
        .windows(2)
        .map(|w| {
            graph.weight(w[0], w[1]).ok_or_else(|| Error::Trip(format!("nodes {} and {} are not adjacent", w[0], w[1])))
        })
        .sum()
}

/// Required edges traversed by `trip`, in either orientation.
pub fn required_edges_of_trip(required: &[EdgeKey], trip: &Trip) -> BTreeSet<EdgeKey> {
    trip.edges().filter(|e| required.contains(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leg {
    pub trip: Trip,
    pub not_before: TimeUnits,
}

impl Leg {
    pub fn new(trip: Trip) -> Self {
        Leg { trip, not_before: TimeUnits::ZERO }
    }
}

/// Start and end instant of one trip on a route's timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: TimeUnits,
    pub end: TimeUnits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    /// Vehicle index (0-based; printed as `V{owner + 1}`).
    pub owner: usize,
    pub start_depot: NodeId,
    legs: Vec<Leg>,
}

impl Route {
    pub fn new(owner: usize, start_depot: NodeId) -> Self {
        Route { owner, start_depot, legs: Vec::new() }
    }

    pub fn with_trips(owner: usize, start_depot: NodeId, trips: Vec<Trip>) -> Self {
        Route { owner, start_depot, legs: trips.into_iter().map(Leg::new).collect() }
    }

    pub fn len(&self) -> usize {
        self.legs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.legs.is_empty()
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn trip(&self, j: usize) -> &Trip {
        &self.legs[j].trip
    }

    pub fn trips(&self) -> impl Iterator<Item = &Trip> + '_ {
        self.legs.iter().map(|l| &l.trip)
    }

    /// Depot where the vehicle sits once its route is done.
    pub fn end_depot(&self) -> NodeId {
        self.legs.last().map_or(self.start_depot, |l| l.trip.end())
    }

    pub fn push(&mut self, trip: Trip) {
        self.legs.push(Leg::new(trip));
    }

    pub fn push_leg(&mut self, leg: Leg) {
        self.legs.push(leg);
    }

    /// Inserts `legs` so that the first one lands at position `at`.
    pub fn insert_legs(&mut self, at: usize, legs: Vec<Leg>) {
        self.legs.splice(at..at, legs);
    }

    pub fn truncate(&mut self, len: usize) -> Vec<Leg> {
        self.legs.split_off(len.min(self.legs.len()))
    }

    /// Start/end instant of every trip.
    pub fn timeline(&self, recharge: TimeUnits) -> Vec<Window> {
        let mut out = Vec::with_capacity(self.legs.len());
        let mut ready = TimeUnits::ZERO;
        for (j, leg) in self.legs.iter().enumerate() {
            let natural = if j == 0 { ready } else { ready + recharge };
            let start = natural.max(leg.not_before);
            let end = start + leg.trip.duration();
            out.push(Window { start, end });
            ready = end;
        }
        out
    }

    /// Completion time of the last trip; the recharge after it is not
    /// counted. An empty route takes no time.
    pub fn route_time(&self, recharge: TimeUnits) -> TimeUnits {
        self.timeline(recharge).last().map_or(TimeUnits::ZERO, |w| w.end)
    }

    /// Index of the trip whose trip-plus-following-recharge window contains
    /// `t`. During a recharge this is the trip just completed.
    pub fn trip_index(&self, recharge: TimeUnits, t: TimeUnits) -> Result<usize> {
        let tl = self.timeline(recharge);
        let completion = tl.last().map_or(TimeUnits::ZERO, |w| w.end);
        if tl.is_empty() || t > completion {
            return Err(Error::VehicleIdle { t, completion });
        }
        let last = tl.len() - 1;
        Ok((0..=last)
            .find(|&i| {
                let window_end = if i < last { tl[i + 1].start } else { tl[i].end };
                t <= window_end
            })
            .expect("t <= completion"))
    }

    /// Number of trips that finish at or before `t`.
    pub fn completed_by(&self, recharge: TimeUnits, t: TimeUnits) -> usize {
        self.timeline(recharge).iter().take_while(|w| w.end <= t).count()
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}:", self.owner + 1)?;
        if !self.legs.is_empty() {
            f.write_char(' ')?;
        }
        for leg in &self.legs {
            if leg.not_before > TimeUnits::ZERO {
                write!(f, "@{}", leg.not_before)?;
            }
            write!(f, "{}", leg.trip)?;
        }
        Ok(())
    }
}

pub fn route_time(route: &Route, recharge: TimeUnits) -> TimeUnits {
    route.route_time(recharge)
}

pub fn trip_index(route: &Route, recharge: TimeUnits, t: TimeUnits) -> Result<usize> {
    route.trip_index(recharge, t)
}

/// Routes for the whole fleet plus vehicle statuses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FleetPlan {
    pub routes: Vec<Route>,
    /// `true` while the vehicle is operational.
    pub active: Vec<bool>,
    pub recharge: TimeUnits,
}

impl FleetPlan {
    /// Empty routes for every vehicle, all active.
    pub fn empty(inst: &Instance) -> Self {
        FleetPlan {
            routes: inst.start_depots.iter().enumerate().map(|(k, &d)| Route::new(k, d)).collect(),
            active: vec![true; inst.vehicle_count],
            recharge: inst.recharge,
        }
    }

    pub fn vehicle_count(&self) -> usize {
        self.routes.len()
    }

    pub fn route_time(&self, k: usize) -> TimeUnits {
        self.routes[k].route_time(self.recharge)
    }

    /// `y_k` for every vehicle.
    pub fn completion_times(&self) -> Vec<TimeUnits> {
        self.routes.iter().map(|r| r.route_time(self.recharge)).collect()
    }

    pub fn mission_time(&self) -> TimeUnits {
        self.completion_times().into_iter().max().unwrap_or_default()
    }

    pub fn active_vehicles(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter(|(_, &a)| a).map(|(k, _)| k)
    }

    /// Required edges of `inst` that no trip of this plan traverses.
    pub fn uncovered(&self, inst: &Instance) -> Vec<EdgeKey> {
        let covered: BTreeSet<EdgeKey> = self.routes.iter().flat_map(|r| r.trips()).flat_map(|t| t.edges()).collect();
        inst.required.iter().copied().filter(|e| !covered.contains(e)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.routes {
            let _ = writeln!(out, "{r}");
        }
        out
    }
}

pub fn mission_time(plan: &FleetPlan) -> TimeUnits {
    plan.mission_time()
}

/// Checks every structural invariant of a plan: trips are depot-to-depot walks
/// over graph edges within capacity, routes start at their vehicle's start
/// depot and chain at depots.
pub fn validate_plan(inst: &Instance, plan: &FleetPlan) -> Result<()> {
    if plan.routes.len() != inst.vehicle_count || plan.active.len() != inst.vehicle_count {
        return Err(Error::Plan(format!("plan has {} routes for {} vehicles", plan.routes.len(), inst.vehicle_count)));
    }
    if plan.recharge != inst.recharge {
        return Err(Error::Plan("plan recharge time differs from instance".into()));
    }
    for (k, route) in plan.routes.iter().enumerate() {
        let v = k + 1;
        if route.owner != k {
            return Err(Error::Plan(format!("route {v} is owned by V{}", route.owner + 1)));
        }
        if route.start_depot != inst.start_depots[k] {
            return Err(Error::Plan(format!("V{v} does not start at its start depot")));
        }
        let mut at = route.start_depot;
        for (j, trip) in route.trips().enumerate() {
            let actual = trip_time(&inst.graph, trip.nodes())?;
            if actual != trip.duration() {
                return Err(Error::Plan(format!("V{v} trip {j}: cached duration is stale")));
            }
            if !inst.is_depot(trip.start()) || !inst.is_depot(trip.end()) {
                return Err(Error::Plan(format!("V{v} trip {j} {trip} does not join two depots")));
            }
            if trip.duration() > inst.capacity {
                return Err(Error::Plan(format!(
                    "V{v} trip {j} takes {} > capacity {}",
                    trip.duration(),
                    inst.capacity
                )));
            }
            if trip.start() != at {
                return Err(Error::Plan(format!(
                    "V{v} trip {j} starts at {} but the vehicle is at {at}",
                    trip.start()
                )));
            }
            at = trip.end();
        }
    }
    Ok(())
}

/// Parses the one-line-per-vehicle plan format, e.g. `V1: (1 3 5)(5 7 8 5)`.
/// Vehicles without a line get an empty route.
pub fn parse_plan(inst: &Instance, text: &str) -> Result<FleetPlan> {
    let mut plan = FleetPlan::empty(inst);
    let mut seen = vec![false; inst.vehicle_count];
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, body) = line.split_once(':').ok_or_else(|| Error::parse(ln, "expected `V<k>: (...)`"))?;
        let k: usize = head
            .trim()
            .strip_prefix('V')
            .and_then(|s| s.parse().ok())
            .filter(|&k| k >= 1 && k <= inst.vehicle_count)
            .ok_or_else(|| Error::parse(ln, format!("bad vehicle label {head:?}")))?;
        if std::mem::replace(&mut seen[k - 1], true) {
            return Err(Error::parse(ln, format!("V{k} listed twice")));
        }
        let route = &mut plan.routes[k - 1];
        let mut rest = body.trim();
        while !rest.is_empty() {
            let mut not_before = TimeUnits::ZERO;
            if let Some(r) = rest.strip_prefix('@') {
                let open = r.find('(').ok_or_else(|| Error::parse(ln, "release without trip"))?;
                not_before = r[..open].trim().parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?;
                rest = &r[open..];
            }
            let inner = rest.strip_prefix('(').ok_or_else(|| Error::parse(ln, format!("expected `(` at {rest:?}")))?;
            let close = inner.find(')').ok_or_else(|| Error::parse(ln, "unclosed trip"))?;
            let nodes = inner[..close]
                .split_whitespace()
                .map(|s| s.parse::<NodeId>().map_err(|_| Error::parse(ln, format!("bad node {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let trip = Trip::new(&inst.graph, nodes).map_err(|e| Error::parse(ln, e.to_string()))?;
            route.push_leg(Leg { trip, not_before });
            rest = inner[close + 1..].trim_start();
        }
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    pub(crate) const WORKED: &str = include_str!("../fixtures/worked_example.inst");

    fn t(s: &str) -> TimeUnits {
        s.parse().unwrap()
    }

    fn worked_route(inst: &Instance) -> Route {
        let a = Trip::new(&inst.graph, vec![1, 3, 5]).unwrap();
        let b = Trip::new(&inst.graph, vec![5, 7, 8, 5]).unwrap();
        Route::with_trips(0, 1, vec![a, b])
    }

    #[test]
    fn worked_example_trip_times() {
        let inst = parse_instance(WORKED).unwrap();
        let r = worked_route(&inst);
        assert_eq!(r.trip(0).duration(), t("6.2"));
        assert_eq!(r.trip(1).duration(), t("4.5"));
        assert_eq!(trip_time(&inst.graph, &[5]).unwrap(), TimeUnits::ZERO);
        assert_eq!(route_time(&r, inst.recharge), t("11.8"));
    }

    #[test]
    fn non_adjacent_nodes_are_an_error() {
        let inst = parse_instance(WORKED).unwrap();
        assert!(trip_time(&inst.graph, &[1, 5]).is_err());
    }

    #[test]
    fn route_time_examples() {
        let inst = parse_instance(WORKED).unwrap();
        let single = Route::with_trips(0, 1, vec![Trip::new(&inst.graph, vec![1, 2, 1]).unwrap()]);
        assert_eq!(single.route_time(t("99")), t("5"));
        assert_eq!(Route::new(0, 1).route_time(t("1")), TimeUnits::ZERO);
        // three trips of one unit each (2-3 has weight 1), R_T = 10: 3 + 2 * 10
        let unit = Trip::new(&inst.graph, vec![2, 3]).unwrap();
        let r = Route::with_trips(0, 2, vec![unit.clone(), unit.reversed(), unit]);
        assert_eq!(r.route_time(t("10")), t("23"));
    }

    #[test]
    fn trip_index_traces() {
        let inst = parse_instance(WORKED).unwrap();
        let r = worked_route(&inst);
        let rt = inst.recharge;
        assert_eq!(r.trip_index(rt, TimeUnits::ZERO).unwrap(), 0);
        assert_eq!(r.trip_index(rt, t("3")).unwrap(), 0);
        assert_eq!(r.trip_index(rt, t("6.5")).unwrap(), 0);
        assert_eq!(r.trip_index(rt, t("7.3")).unwrap(), 0);
        assert_eq!(r.trip_index(rt, t("8")).unwrap(), 1);
        assert_eq!(r.trip_index(rt, t("11.8")).unwrap(), 1);
        assert!(matches!(r.trip_index(rt, t("11.801")), Err(Error::VehicleIdle { .. })));
    }

    #[test]
    fn release_times_delay_trips() {
        let inst = parse_instance(WORKED).unwrap();
        let mut r = worked_route(&inst);
        r.push_leg(Leg { trip: Trip::new(&inst.graph, vec![5, 8, 5]).unwrap(), not_before: t("20") });
        let tl = r.timeline(inst.recharge);
        assert_eq!(tl[2], Window { start: t("20"), end: t("23") });
        assert_eq!(r.trip_index(inst.recharge, t("15")).unwrap(), 1);
    }

    #[test]
    fn required_extraction() {
        let inst = parse_instance(WORKED).unwrap();
        let r = worked_route(&inst);
        assert_eq!(required_edges_of_trip(&inst.required, r.trip(1)), BTreeSet::from([(7, 8)]));
        assert!(required_edges_of_trip(&inst.required, r.trip(0)).is_empty());
        let back = Trip::new(&inst.graph, vec![5, 8, 7, 5]).unwrap();
        assert_eq!(required_edges_of_trip(&[(7, 8)], &back), BTreeSet::from([(7, 8)]));
    }

    #[test]
    fn mission_time_is_max_route_time() {
        let inst = parse_instance(WORKED).unwrap();
        let mut plan = FleetPlan::empty(&inst);
        assert_eq!(plan.mission_time(), TimeUnits::ZERO);
        plan.routes[0] = worked_route(&inst);
        assert_eq!(mission_time(&plan), t("11.8"));
        validate_plan(&inst, &plan).unwrap();
        assert!(plan.uncovered(&inst).is_empty());
    }

    #[test]
    fn plan_text_round_trip() {
        let inst = parse_instance(WORKED).unwrap();
        let mut plan = FleetPlan::empty(&inst);
        plan.routes[0] = worked_route(&inst);
        plan.routes[0].push_leg(Leg { trip: Trip::new(&inst.graph, vec![5, 8, 5]).unwrap(), not_before: t("20.5") });
        let text = plan.to_text();
        assert_eq!(text, "V1: (1 3 5)(5 7 8 5)@20.5(5 8 5)\n");
        assert_eq!(parse_plan(&inst, &text).unwrap(), plan);
    }

    #[test]
    fn validator_catches_broken_chains_and_capacity() {
        let inst = parse_instance(WORKED).unwrap();
        let mut plan = FleetPlan::empty(&inst);
        plan.routes[0] = Route::with_trips(0, 1, vec![Trip::new(&inst.graph, vec![5, 7, 8, 5]).unwrap()]);
        assert!(validate_plan(&inst, &plan).is_err());
        plan.routes[0] = Route::with_trips(0, 1, vec![Trip::new(&inst.graph, vec![1, 3, 5, 7, 5]).unwrap()]);
        assert!(validate_plan(&inst, &plan).is_err());
    }
}
