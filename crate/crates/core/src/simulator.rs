//! Mission simulation under vehicle failures.
//!
//! Failures are processed in time order. A failed vehicle keeps the trips it
//! finished at or before its failure instant; its unfinished required trips
//! (including the one in progress) go to the pool. The pool is auctioned when
//! its wait window closes: at once, after a fixed delay, or after the last
//! failure.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::auction::{auction, AuctionConfig, AuctionLog, FailedTripPool};
use crate::error::{Error, Result};
use crate::failures::{normalize_failure_time, FailureScenario};
use crate::graph::EdgeKey;
use crate::instance::Instance;
use crate::network::Network;
use crate::routing::{required_edges_of_trip, FleetPlan};
use crate::time::TimeUnits;

/// Delay between the first pooled failure and the auction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaitTime {
    After(TimeUnits),
    /// Wait until every failure of the scenario has happened.
    End,
}

impl WaitTime {
    pub const IMMEDIATE: WaitTime = WaitTime::After(TimeUnits::ZERO);
}

impl fmt::Display for WaitTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaitTime::After(t) => t.fmt(f),
            WaitTime::End => f.write_str("end"),
        }
    }
}

impl std::str::FromStr for WaitTime {
    type Err = Error;

    /// `end`, or a time in instance units.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("end") {
            return Ok(WaitTime::End);
        }
        let t: TimeUnits = s.parse()?;
        if t.is_negative() {
            return Err(Error::Time(format!("negative wait time {s}")));
        }
        Ok(WaitTime::After(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub wait: WaitTime,
    pub auction: AuctionConfig,
}

impl SimConfig {
    pub fn new(inst: &Instance, wait: WaitTime) -> Self {
        SimConfig { wait, auction: AuctionConfig::for_capacity(inst.capacity) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Failure { vehicle: usize, pooled: usize },
    Auction { pool: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: TimeUnits,
    pub kind: EventKind,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EventKind::Failure { vehicle, pooled } => {
                write!(f, "{} failure V{} pooled {pooled}", self.time, vehicle + 1)
            }
            EventKind::Auction { pool } => write!(f, "{} auction trips {pool}", self.time),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuctionRecord {
    pub time: TimeUnits,
    pub log: AuctionLog,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationReport {
    pub final_plan: FleetPlan,
    /// Mission time of the input plan.
    pub beta_initial: TimeUnits,
    pub beta_ca: TimeUnits,
    pub auctions: Vec<AuctionRecord>,
    pub covered: bool,
    pub events: Vec<Event>,
    /// Failure instant of every failed vehicle, after normalisation.
    pub failure_times: BTreeMap<usize, TimeUnits>,
    /// Distinct failure instants at which the pool gained trips.
    pub pool_trigger_events: usize,
}

impl SimulationReport {
    pub fn auction_count(&self) -> usize {
        self.auctions.len()
    }

    pub fn auction_csv(&self) -> String {
        let mut out = format!("time,{}\n", AuctionLog::CSV_HEADER);
        for a in &self.auctions {
            a.log.write_rows(&mut out, Some(&a.time.to_string()));
        }
        out
    }
}

/// Mutable state shared by both drivers.
struct Mission<'a> {
    net: &'a Network,
    cfg: SimConfig,
    plan: FleetPlan,
    pool: FailedTripPool,
    pending: VecDeque<(TimeUnits, usize)>,
    last_failure: TimeUnits,
    window_close: Option<TimeUnits>,
    last_trigger: Option<TimeUnits>,
    report: SimulationReport,
}

impl<'a> Mission<'a> {
    fn new(net: &'a Network, plan: &FleetPlan, scenario: &FailureScenario, cfg: SimConfig) -> Result<Self> {
        cfg.auction.validate()?;
        let k = plan.vehicle_count();
        if let Some(&v) = scenario.failures.keys().find(|&&v| v >= k) {
            return Err(Error::Scenario(format!("{}: unknown vehicle V{}", scenario.name, v + 1)));
        }
        if k > 0 && scenario.failures.len() >= k {
            return Err(Error::AllVehiclesFailed);
        }
        let mut pending: Vec<(TimeUnits, usize)> =
            scenario.failures.iter().map(|(&v, &f)| (normalize_failure_time(plan, v, f), v)).collect();
        pending.sort_unstable();
        let beta = plan.mission_time();
        Ok(Mission {
            net,
            cfg,
            plan: plan.clone(),
            pool: FailedTripPool::new(),
            last_failure: pending.last().map_or(TimeUnits::ZERO, |p| p.0),
            pending: pending.into(),
            window_close: None,
            last_trigger: None,
            report: SimulationReport {
                final_plan: plan.clone(),
                beta_initial: beta,
                beta_ca: beta,
                auctions: Vec::new(),
                covered: true,
                events: Vec::new(),
                failure_times: BTreeMap::new(),
                pool_trigger_events: 0,
            },
        })
    }

    fn fail(&mut self, f: TimeUnits, k: usize) {
        self.plan.active[k] = false;
        let route = &mut self.plan.routes[k];
        let done = route.completed_by(self.plan.recharge, f);
        let mut pooled = 0;
        for leg in route.truncate(done) {
            let req = required_edges_of_trip(&self.net.inst.required, &leg.trip);
            if self.pool.add(leg.trip, req) {
                pooled += 1;
            }
        }
        self.report.failure_times.insert(k, f);
        self.report.events.push(Event { time: f, kind: EventKind::Failure { vehicle: k, pooled } });
        if pooled > 0 {
            if self.last_trigger != Some(f) {
                self.report.pool_trigger_events += 1;
                self.last_trigger = Some(f);
            }
            if self.window_close.is_none() {
                self.window_close = Some(match self.cfg.wait {
                    WaitTime::After(w) => f + w,
                    WaitTime::End => self.last_failure,
                });
            }
        }
    }

    fn run_auction(&mut self, t: TimeUnits) -> Result<()> {
        self.window_close = None;
        let pool = std::mem::take(&mut self.pool);
        self.report.events.push(Event { time: t, kind: EventKind::Auction { pool: pool.len() } });
        let (plan, log) = auction(self.net, &self.plan, pool, t, &self.cfg.auction)?;
        self.plan = plan;
        self.report.auctions.push(AuctionRecord { time: t, log });
        Ok(())
    }

    fn finish(mut self) -> SimulationReport {
        self.report.beta_ca = self.plan.mission_time();
        self.report.covered = coverage_of(&self.net.inst, &self.plan, &self.report.failure_times).is_empty();
        self.report.final_plan = self.plan;
        self.report
    }
}

/// Event-driven simulation of `plan` under `scenario`.
pub fn simulate(
    net: &Network,
    plan: &FleetPlan,
    scenario: &FailureScenario,
    cfg: SimConfig,
) -> Result<SimulationReport> {
    let mut m = Mission::new(net, plan, scenario, cfg)?;
    loop {
        let next = m.pending.front().copied();
        if let Some(close) = m.window_close {
            if next.is_none_or(|(f, _)| f > close) {
                m.run_auction(close)?;
                continue;
            }
        }
        let Some((f, k)) = next else { break };
        m.pending.pop_front();
        m.fail(f, k);
    }
    Ok(m.finish())
}

/// Reference driver that advances a clock in fixed increments of `step` and
/// handles whatever is due at each tick. Equivalent to [`simulate`] whenever
/// all failure and window-close instants lie on the step grid.
pub fn simulate_stepped(
    net: &Network,
    plan: &FleetPlan,
    scenario: &FailureScenario,
    cfg: SimConfig,
    step: TimeUnits,
) -> Result<SimulationReport> {
    assert!(step > TimeUnits::ZERO, "step must be positive");
    let mut m = Mission::new(net, plan, scenario, cfg)?;
    let mut t = TimeUnits::ZERO;
    while !m.pending.is_empty() || !m.pool.is_empty() {
        while let Some(&(f, k)) = m.pending.front() {
            if f > t {
                break;
            }
            m.pending.pop_front();
            m.fail(f, k);
        }
        if m.window_close.is_some_and(|c| c <= t) {
            m.run_auction(t)?;
        }
        t += step;
    }
    Ok(m.finish())
}

/// Required edges that no completed trip traverses. Completed trips are all
/// trips of active vehicles plus trips of failed vehicles that end at or
/// before the failure.
pub fn coverage_of(inst: &Instance, plan: &FleetPlan, failure_times: &BTreeMap<usize, TimeUnits>) -> Vec<EdgeKey> {
    let mut covered = BTreeSet::new();
    for (k, route) in plan.routes.iter().enumerate() {
        let windows = route.timeline(plan.recharge);
        for (trip, w) in route.trips().zip(windows) {
            let done = match failure_times.get(&k) {
                Some(&f) => w.end <= f,
                None => true,
            };
            if done {
                covered.extend(trip.edges());
            }
        }
    }
    inst.required.iter().copied().filter(|e| !covered.contains(e)).collect()
}

pub fn coverage_check(inst: &Instance, report: &SimulationReport) -> bool {
    coverage_of(inst, &report.final_plan, &report.failure_times).is_empty()
}
