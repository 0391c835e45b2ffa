//! Independent enumeration of every (pooled trip, nearby vehicle, anchor)
//! insertion, used to check each auction round.

use rrv_core::auction::FailedTripPool;
use rrv_core::network::Network;
use rrv_core::routing::{required_edges_of_trip, FleetPlan, Route, Trip};
use rrv_core::TimeUnits;

/// (duration, release) per leg, chained with recharges.
fn finish_time(legs: &[(TimeUnits, TimeUnits)], recharge: TimeUnits) -> TimeUnits {
    let mut end = TimeUnits::ZERO;
    for (j, &(d, rel)) in legs.iter().enumerate() {
        let ready = if j == 0 { end } else { end + recharge };
        end = ready.max(rel) + d;
    }
    end
}

fn legs_of(r: &Route) -> Vec<(TimeUnits, TimeUnits)> {
    r.legs().iter().map(|l| (l.trip.duration(), l.not_before)).collect()
}

/// Index of the trip in progress (or recharging after) at `t`; `None` once
/// the route is done.
fn current(r: &Route, recharge: TimeUnits, t: TimeUnits) -> Option<usize> {
    let legs = legs_of(r);
    let mut ends = Vec::new();
    let mut starts = Vec::new();
    for j in 0..legs.len() {
        let e = finish_time(&legs[..=j], recharge);
        starts.push(e - legs[j].0);
        ends.push(e);
    }
    (0..legs.len()).find(|&i| t <= if i + 1 < legs.len() { starts[i + 1] } else { ends[i] })
}

pub struct Triple {
    pub pool_index: usize,
    pub vehicle: usize,
    pub anchor: Option<usize>,
    pub value: TimeUnits,
}

pub fn enumerate(
    net: &Network,
    plan: &FleetPlan,
    pool: &FailedTripPool,
    radii: &[TimeUnits],
    t: TimeUnits,
) -> Vec<Triple> {
    let rc = plan.recharge;
    let t_m = plan.routes.iter().map(|r| finish_time(&legs_of(r), rc)).max().unwrap();
    let mut out = Vec::new();
    for (p, (trip, _)) in pool.entries().iter().enumerate() {
        for k in (0..plan.routes.len()).filter(|&k| plan.active[k]) {
            let route = &plan.routes[k];
            let cur = current(route, rc, t);
            let depots: Vec<usize> = match cur {
                Some(i) => route.trips().skip(i).flat_map(|tr| [tr.start(), tr.end()]).collect(),
                None => vec![route.trips().last().map_or(route.start_depot, Trip::end)],
            };
            let near = depots.iter().any(|&d| net.sp.dist(d, trip.start()).min(net.sp.dist(d, trip.end())) <= radii[p]);
            if !near {
                continue;
            }
            let anchors: Vec<Option<usize>> = if route.is_empty() {
                vec![None]
            } else {
                match cur {
                    Some(i) => (i..route.len()).map(Some).collect(),
                    None => vec![Some(route.len() - 1)],
                }
            };
            for a in anchors {
                let d_r = a.map_or(route.start_depot, |j| route.trip(j).end());
                let mut legs = legs_of(route);
                let conn = |x, y| {
                    net.table.lookup(x, y).map(|c| c.trips.iter().map(|tr| (tr.duration(), t)).collect::<Vec<_>>())
                };
                if a.map_or(true, |j| j + 1 == route.len()) {
                    let f = net.table.time(d_r, trip.start());
                    let b = net.table.time(d_r, trip.end());
                    let from = match (f, b) {
                        (Some(x), Some(y)) if y < x => trip.end(),
                        (None, Some(_)) => trip.end(),
                        (None, None) => continue,
                        _ => trip.start(),
                    };
                    let mut s = conn(d_r, from).unwrap();
                    s.push((trip.duration(), t));
                    legs.extend(s);
                } else {
                    let (Some(mut s), Some(back)) = (conn(d_r, trip.start()), conn(trip.end(), d_r)) else { continue };
                    s.push((trip.duration(), t));
                    s.extend(back);
                    let j = a.unwrap();
                    legs.splice(j + 1..j + 1, s);
                }
                out.push(Triple { pool_index: p, vehicle: k, anchor: a, value: finish_time(&legs, rc) - t_m });
            }
        }
    }
    out
}

pub type Case = (Network, FleetPlan, FailedTripPool, TimeUnits);

fn pool_failures(net: &Network, plan: &FleetPlan, failures: &[(TimeUnits, usize)]) -> Case {
    let mut plan = plan.clone();
    let mut pool = FailedTripPool::new();
    let mut t = TimeUnits::ZERO;
    for &(f, k) in failures {
        plan.active[k] = false;
        let done = plan.routes[k].completed_by(plan.recharge, f);
        for leg in plan.routes[k].truncate(done) {
            let req = required_edges_of_trip(&net.inst.required, &leg.trip);
            pool.add(leg.trip, req);
        }
        t = f;
    }
    (net.clone(), plan, pool, t)
}

/// Auction inputs from every scenario of `small_case(seed)`: the drawn
/// failures, and the same vehicles failing at the first instant (which pools
/// all of their required trips). Kept when the pool has 1..=`max_pool`
/// entries and at most three vehicles remain active.
pub fn failure_cases(seed: u64, max_pool: usize) -> Vec<Case> {
    let (net, plan, scenarios) = super::small_case(seed);
    let mut out = Vec::new();
    for s in scenarios {
        let drawn = s.chronological();
        let early: Vec<_> = drawn.iter().map(|&(_, k)| (TimeUnits::from_millis(1), k)).collect();
        for failures in [drawn, early] {
            let case = pool_failures(&net, &plan, &failures);
            let active = case.1.active.iter().filter(|&&a| a).count();
            if !case.2.is_empty() && case.2.len() <= max_pool && active <= 3 {
                out.push(case);
            }
        }
    }
    out
}
