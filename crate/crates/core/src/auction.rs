//! Centralized auction for the required trips left behind by failed
//! vehicles.
//!
//! Each round recomputes the mission time, asks every pooled trip for bids
//! from active vehicles inside a growing search radius, and commits the single
//! cheapest (trip, vehicle) pair. A bid is the route time the vehicle would
//! have after splicing the trip in at its best anchor, minus the mission time.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{EdgeKey, NodeId};
use crate::network::Network;
use crate::routing::{FleetPlan, Leg, Route, Trip};
use crate::time::TimeUnits;

/// Failed required trips awaiting reassignment, in arrival order. Identical
/// node lists are pooled once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailedTripPool {
    entries: Vec<(Trip, BTreeSet<EdgeKey>)>,
}

impl FailedTripPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `trip` if it covers at least one required edge. Returns whether
    /// the pool changed.
    pub fn add(&mut self, trip: Trip, required: BTreeSet<EdgeKey>) -> bool {
        if required.is_empty() || self.entries.iter().any(|(t, _)| t.nodes() == trip.nodes()) {
            return false;
        }
        self.entries.push((trip, required));
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Trip, BTreeSet<EdgeKey>)] {
        &self.entries
    }

    pub fn remove(&mut self, i: usize) -> (Trip, BTreeSet<EdgeKey>) {
        self.entries.remove(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuctionConfig {
    pub initial_radius: TimeUnits,
    pub radius_step: TimeUnits,
}

impl AuctionConfig {
    /// Both radius parameters default to the vehicle capacity.
    pub fn for_capacity(capacity: TimeUnits) -> Self {
        AuctionConfig { initial_radius: capacity, radius_step: capacity }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_radius <= TimeUnits::ZERO || self.radius_step <= TimeUnits::ZERO {
            return Err(Error::Instance("search radius parameters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bid {
    pub vehicle: usize,
    pub trip: Trip,
    /// Trip position the insertion follows; `None` for a vehicle with an empty
    /// route.
    pub anchor: Option<usize>,
    pub anchor_depot: NodeId,
    pub value: TimeUnits,
    pub candidate_route: Route,
}

/// Depots where vehicle `k` can still be found from time `t` on: both ends of
/// every trip not yet finished, or the parking depot of an idle vehicle.
fn reachable_depots(plan: &FleetPlan, k: usize, t: TimeUnits) -> Vec<NodeId> {
    let route = &plan.routes[k];
    match route.trip_index(plan.recharge, t) {
        Ok(i) => route.trips().skip(i).flat_map(|tr| [tr.start(), tr.end()]).collect(),
        Err(_) => vec![route.end_depot()],
    }
}

/// Active vehicles with a current or future depot within `radius` of either
/// end of `trip`.
pub fn search_nearby(net: &Network, plan: &FleetPlan, trip: &Trip, radius: TimeUnits, t: TimeUnits) -> Vec<usize> {
    plan.active_vehicles()
        .filter(|&k| {
            reachable_depots(plan, k, t)
                .iter()
                .any(|&d| net.sp.dist(d, trip.start()).min(net.sp.dist(d, trip.end())) <= radius)
        })
        .collect()
}

fn legs(trips: impl IntoIterator<Item = Trip>, not_before: TimeUnits) -> Vec<Leg> {
    trips.into_iter().map(|trip| Leg { trip, not_before }).collect()
}

/// Splices `trip` into `route` after position `anchor` (or into an empty
/// route when `anchor` is `None`). Mid-route, the vehicle detours from the
/// anchor depot to the trip and back. At the end of the route, the trip is
/// appended in whichever orientation has the cheaper connection, with no
/// return leg. Inserted trips are released at `t`. Returns `None` when a
/// needed connection is infeasible.
pub fn insert_trip(net: &Network, route: &Route, anchor: Option<usize>, trip: &Trip, t: TimeUnits) -> Option<Route> {
    let d_r = anchor.map_or(route.start_depot, |j| route.trip(j).end());
    let at_end = anchor.is_none_or(|j| j + 1 == route.len());
    let mut out = route.clone();
    if at_end {
        let fwd = net.table.lookup(d_r, trip.start());
        let rev = net.table.lookup(d_r, trip.end());
        let (conn, t_f) = match (fwd, rev) {
            (Some(a), Some(b)) if b.time < a.time => (b, trip.reversed()),
            (Some(a), _) => (a, trip.clone()),
            (None, Some(b)) => (b, trip.reversed()),
            (None, None) => return None,
        };
        for leg in legs(conn.trips.into_iter().chain([t_f]), t) {
            out.push_leg(leg);
        }
    } else {
        let j = anchor.expect("mid-route insertion has an anchor");
        let to = net.table.lookup(d_r, trip.start())?;
        let back = net.table.lookup(trip.end(), d_r)?;
        let seq = to.trips.into_iter().chain([trip.clone()]).chain(back.trips);
        out.insert_legs(j + 1, legs(seq, t));
    }
    Some(out)
}

/// Insertion anchors for vehicle `k` at time `t`: the current trip and every
/// later one, only the last trip for an idle vehicle, or the start depot for
/// an empty route.
pub fn anchors(plan: &FleetPlan, k: usize, t: TimeUnits) -> Vec<Option<usize>> {
    let route = &plan.routes[k];
    if route.is_empty() {
        return vec![None];
    }
    match route.trip_index(plan.recharge, t) {
        Ok(i) => (i..route.len()).map(Some).collect(),
        Err(_) => vec![Some(route.len() - 1)],
    }
}

/// Every feasible insertion for vehicle `k`, in anchor order, with its value
/// relative to `t_m`.
pub fn evaluate_insertions(
    net: &Network,
    plan: &FleetPlan,
    trip: &Trip,
    k: usize,
    t: TimeUnits,
    t_m: TimeUnits,
) -> Vec<Bid> {
    let route = &plan.routes[k];
    anchors(plan, k, t)
        .into_iter()
        .filter_map(|a| {
            let cand = insert_trip(net, route, a, trip, t)?;
            Some(Bid {
                vehicle: k,
                trip: trip.clone(),
                anchor: a,
                anchor_depot: a.map_or(route.start_depot, |j| route.trip(j).end()),
                value: cand.route_time(plan.recharge) - t_m,
                candidate_route: cand,
            })
        })
        .collect()
}

/// Best insertion for vehicle `k`; among equal route times the earlier
/// anchor wins. `None` when no anchor admits a feasible insertion.
pub fn calc_bid(net: &Network, plan: &FleetPlan, trip: &Trip, k: usize, t: TimeUnits, t_m: TimeUnits) -> Option<Bid> {
    evaluate_insertions(net, plan, trip, k, t, t_m).into_iter().min_by_key(|b| (b.value, b.anchor))
}

/// Global ordering of bids: value, vehicle, anchor, then trip node list.
pub fn bid_key(b: &Bid) -> (TimeUnits, usize, Option<usize>, &[NodeId]) {
    (b.value, b.vehicle, b.anchor, b.trip.nodes())
}

/// One (trip, vehicle, anchor) triple considered during a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluated {
    pub pool_index: usize,
    pub vehicle: usize,
    pub anchor: Option<usize>,
    pub value: TimeUnits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuctionRound {
    pub mission_time: TimeUnits,
    pub pool_index: usize,
    pub winner: Bid,
    pub radius: TimeUnits,
    /// Radius used per pooled trip.
    pub radii: Vec<TimeUnits>,
    /// Vehicles found nearby per pooled trip at its final radius.
    pub nearby: Vec<Vec<usize>>,
    pub evaluated: Vec<Evaluated>,
}

/// Runs one auction round without committing it.
pub fn auction_step(
    net: &Network,
    plan: &FleetPlan,
    pool: &FailedTripPool,
    t: TimeUnits,
    cfg: &AuctionConfig,
) -> Result<AuctionRound> {
    if pool.is_empty() {
        return Err(Error::Plan("auction called with an empty pool".into()));
    }
    if plan.active_vehicles().next().is_none() {
        return Err(Error::AllVehiclesFailed);
    }
    let t_m = plan.mission_time();
    let mut best: Option<(usize, TimeUnits, Bid)> = None;
    let mut radii = Vec::with_capacity(pool.len());
    let mut nearby_all = Vec::with_capacity(pool.len());
    let mut evaluated = Vec::new();
    for (p, (trip, _)) in pool.entries().iter().enumerate() {
        let mut iter = 0i64;
        loop {
            let r = cfg.initial_radius + cfg.radius_step * iter;
            let nearby = search_nearby(net, plan, trip, r, t);
            let mut bids = Vec::new();
            for &k in &nearby {
                let all = evaluate_insertions(net, plan, trip, k, t, t_m);
                evaluated.extend(all.iter().map(|b| Evaluated {
                    pool_index: p,
                    vehicle: k,
                    anchor: b.anchor,
                    value: b.value,
                }));
                if let Some(b) = all.into_iter().min_by_key(|b| (b.value, b.anchor)) {
                    bids.push(b);
                }
            }
            if let Some(b) = bids.into_iter().min_by(|a, b| bid_key(a).cmp(&bid_key(b))) {
                radii.push(r);
                nearby_all.push(nearby);
                let better = best.as_ref().is_none_or(|(_, _, cur)| bid_key(&b) < bid_key(cur));
                if better {
                    best = Some((p, r, b));
                }
                break;
            }
            if r >= net.diameter {
                return Err(Error::UnassignableTrip { trip: trip.to_string(), radius: r });
            }
            iter += 1;
        }
    }
    let (pool_index, radius, winner) = best.expect("every pooled trip produced a bid");
    Ok(AuctionRound { mission_time: t_m, pool_index, winner, radius, radii, nearby: nearby_all, evaluated })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuctionLogEntry {
    pub iteration: usize,
    pub trip: Trip,
    pub winner: usize,
    pub anchor_depot: NodeId,
    pub value: TimeUnits,
    pub radius: TimeUnits,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuctionLog {
    pub entries: Vec<AuctionLogEntry>,
}

impl AuctionLog {
    pub const CSV_HEADER: &'static str = "iteration,trip,winner,anchor_depot,bid_value,radius";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        self.write_rows(&mut out, None);
        out
    }

    /// Appends rows, optionally prefixed with an extra leading column.
    pub fn write_rows(&self, out: &mut String, prefix: Option<&str>) {
        for e in &self.entries {
            if let Some(p) = prefix {
                let _ = write!(out, "{p},");
            }
            let _ = writeln!(
                out,
                "{},{},V{},{},{},{}",
                e.iteration,
                e.trip,
                e.winner + 1,
                e.anchor_depot,
                e.value,
                e.radius
            );
        }
    }
}

/// Auctions every pooled trip, one committed assignment per round, and
/// returns the updated plan with the round-by-round log.
pub fn auction(
    net: &Network,
    plan: &FleetPlan,
    mut pool: FailedTripPool,
    t: TimeUnits,
    cfg: &AuctionConfig,
) -> Result<(FleetPlan, AuctionLog)> {
    cfg.validate()?;
    let mut plan = plan.clone();
    let mut log = AuctionLog::default();
    let mut iteration = 0;
    while !pool.is_empty() {
        let round = auction_step(net, &plan, &pool, t, cfg)?;
        iteration += 1;
        let w = round.winner;
        log.entries.push(AuctionLogEntry {
            iteration,
            trip: w.trip.clone(),
            winner: w.vehicle,
            anchor_depot: w.anchor_depot,
            value: w.value,
            radius: round.radius,
        });
        plan.routes[w.vehicle] = w.candidate_route;
        pool.remove(round.pool_index);
    }
    Ok((plan, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::routing::validate_plan;

    fn t(s: &str) -> TimeUnits {
        s.parse().unwrap()
    }

    /// Square of depots 1-2-3-4 (unit-2 sides) with a spur 2-5-3 that holds
    /// the required edge (2,5).
    fn square() -> Network {
        Network::new(
            parse_instance(
                "NODES 5\nDEPOTS 1 2 3 4\nEDGES 6\n1 2 2\n2 3 2\n3 4 2\n4 1 2\n2 5 1\n5 3 1\n\
                 REQUIRED 2\n2 5\n3 4\nVEHICLES 2\nSTART 1 4\nCAPACITY 8\nRECHARGE 1\n",
            )
            .unwrap(),
        )
    }

    fn trip(net: &Network, nodes: &[NodeId]) -> Trip {
        Trip::new(&net.inst.graph, nodes.to_vec()).unwrap()
    }

    #[test]
    fn mid_route_insertion_is_a_detour() {
        let net = square();
        let route = Route::with_trips(0, 1, vec![trip(&net, &[1, 2]), trip(&net, &[2, 1])]);
        let tau = trip(&net, &[2, 5, 3]);
        let out = insert_trip(&net, &route, Some(0), &tau, TimeUnits::ZERO).unwrap();
        let nodes: Vec<_> = out.trips().map(|t| t.nodes().to_vec()).collect();
        assert_eq!(nodes, vec![vec![1, 2], vec![2, 5, 3], vec![3, 2], vec![2, 1]]);
    }

    #[test]
    fn end_of_route_picks_cheaper_orientation() {
        let net = square();
        // vehicle ends at 3, which is the end of tau: reversed tau, no connection
        let route = Route::with_trips(0, 1, vec![trip(&net, &[1, 2, 3])]);
        let tau = trip(&net, &[2, 5, 3]);
        let out = insert_trip(&net, &route, Some(0), &tau, TimeUnits::ZERO).unwrap();
        let nodes: Vec<_> = out.trips().map(|t| t.nodes().to_vec()).collect();
        assert_eq!(nodes, vec![vec![1, 2, 3], vec![3, 5, 2]]);
        assert_eq!(out.route_time(net.inst.recharge), t("4") + t("1") + t("2"));
    }

    #[test]
    fn empty_route_inserts_from_start_depot() {
        let net = square();
        let route = Route::new(1, 4);
        let tau = trip(&net, &[2, 5, 3]);
        let out = insert_trip(&net, &route, None, &tau, t("5")).unwrap();
        // 4 -> 3 (2) then reversed tau from 3
        let nodes: Vec<_> = out.trips().map(|t| t.nodes().to_vec()).collect();
        assert_eq!(nodes, vec![vec![4, 3], vec![3, 5, 2]]);
        assert_eq!(out.route_time(net.inst.recharge), t("5") + t("2") + t("1") + t("2"));
    }

    #[test]
    fn single_bidder_wins_and_plan_stays_valid() {
        let net = square();
        let mut plan = FleetPlan::empty(&net.inst);
        plan.routes[0] = Route::with_trips(0, 1, vec![trip(&net, &[1, 2, 5, 3, 4, 1])]);
        plan.active[1] = false;
        let mut pool = FailedTripPool::new();
        pool.add(trip(&net, &[4, 3]), BTreeSet::from([(3, 4)]));
        let cfg = AuctionConfig::for_capacity(net.inst.capacity);
        let (out, log) = auction(&net, &plan, pool, t("1"), &cfg).unwrap();
        assert_eq!(log.entries.len(), 1);
        assert_eq!(log.entries[0].winner, 0);
        validate_plan(&net.inst, &out).unwrap();
        assert!(out.mission_time() >= plan.mission_time());
        assert!(log.to_csv().starts_with(AuctionLog::CSV_HEADER));
    }

    #[test]
    fn negative_bids_are_legal() {
        let net = square();
        let mut plan = FleetPlan::empty(&net.inst);
        plan.routes[0] = Route::with_trips(0, 1, vec![trip(&net, &[1, 2, 5, 3, 4, 1])]);
        let b = calc_bid(&net, &plan, &trip(&net, &[4, 3]), 1, TimeUnits::ZERO, plan.mission_time()).unwrap();
        assert!(b.value.is_negative());
    }

    #[test]
    fn no_active_vehicle_is_an_error() {
        let net = square();
        let mut plan = FleetPlan::empty(&net.inst);
        plan.active = vec![false, false];
        let mut pool = FailedTripPool::new();
        pool.add(trip(&net, &[4, 3]), BTreeSet::from([(3, 4)]));
        let cfg = AuctionConfig::for_capacity(net.inst.capacity);
        assert!(matches!(auction(&net, &plan, pool, t("1"), &cfg), Err(Error::AllVehiclesFailed)));
    }

    #[test]
    fn pool_skips_non_required_and_duplicates() {
        let net = square();
        let mut pool = FailedTripPool::new();
        assert!(!pool.add(trip(&net, &[1, 2]), BTreeSet::new()));
        assert!(pool.add(trip(&net, &[4, 3]), BTreeSet::from([(3, 4)])));
        assert!(!pool.add(trip(&net, &[4, 3]), BTreeSet::from([(3, 4)])));
        assert_eq!(pool.len(), 1);
    }
}
