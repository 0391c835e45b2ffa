//! Failure-free fleet planning by simulated annealing.
//!
//! A solution is a per-vehicle sequence of service tasks, one per required
//! edge. A greedy decoder turns each sequence into depot-to-depot trips: it
//! keeps extending the open trip while the vehicle can still reach a depot
//! within capacity, then closes it at a depot and launches the next trip,
//! repositioning through the depot route table when needed. Task flags let
//! the search force a trip break, pick the closing depot or pick the launch
//! depot, so the annealer can reach any trip structure.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::network::Network;
use crate::routing::{FleetPlan, Route, Trip};
use crate::time::TimeUnits;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaConfig {
    /// Starting temperature in time units; `None` uses 0.3 x the initial
    /// makespan.
    pub initial_temperature: Option<f64>,
    pub cooling_rate: f64,
    pub iterations_per_temperature: usize,
    /// `None` uses 1e-3 x the starting temperature.
    pub min_temperature: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            initial_temperature: None,
            cooling_rate: 0.95,
            iterations_per_temperature: 200,
            min_temperature: None,
            restarts: 10,
            seed: 0,
        }
    }
}

impl SaConfig {
    pub fn with_seed(seed: u64) -> Self {
        SaConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: Option<f64>| x.is_none_or(|v| v.is_finite() && v > 0.0);
        if !positive(self.initial_temperature)
            || !positive(self.min_temperature)
            || !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0)
            || self.iterations_per_temperature == 0
            || self.restarts == 0
        {
            return Err(Error::Instance(format!("invalid annealing configuration {self:?}")));
        }
        Ok(())
    }
}

/// Service of one required edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Task {
    edge: usize,
    forward: bool,
    /// Start a fresh trip for this task even if the open one could take it.
    split: bool,
    /// Preferred depot to end the trip that finishes with this task.
    close_at: Option<NodeId>,
    /// Preferred depot to launch from when this task opens a trip.
    launch_from: Option<NodeId>,
}

impl Task {
    fn plain(edge: usize, forward: bool, split: bool) -> Self {
        Task { edge, forward, split, close_at: None, launch_from: None }
    }
}

struct OpenTrip {
    last: NodeId,
    duration: TimeUnits,
    nodes: Vec<NodeId>,
    close_hint: Option<NodeId>,
}

struct Decoder<'a> {
    net: &'a Network,
    build: bool,
    at: NodeId,
    total: TimeUnits,
    trip_count: usize,
    trips: Vec<Vec<NodeId>>,
}

impl<'a> Decoder<'a> {
    fn extend_path(&self, nodes: &mut Vec<NodeId>, from: NodeId, to: NodeId) {
        if self.build && from != to {
            nodes.extend(self.net.sp.path(from, to).into_iter().skip(1));
        }
    }

    fn close(&mut self, mut open: OpenTrip) {
        let sp = &self.net.sp;
        let cap = self.net.inst.capacity;
        let end = open
            .close_hint
            .filter(|&h| open.duration + sp.dist(open.last, h) <= cap)
            .unwrap_or_else(|| self.net.nearest_depot(open.last).0);
        open.duration += sp.dist(open.last, end);
        let mut nodes = std::mem::take(&mut open.nodes);
        self.extend_path(&mut nodes, open.last, end);
        if self.build {
            self.trips.push(nodes);
        }
        self.total += open.duration;
        self.trip_count += 1;
        self.at = end;
    }

    fn reposition(&mut self, to: NodeId) -> Option<()> {
        if to == self.at {
            return Some(());
        }
        let table = &self.net.table;
        if self.build {
            let conn = table.lookup(self.at, to)?;
            self.trip_count += conn.trips.len();
            self.total += conn.time;
            self.trips.extend(conn.trips.into_iter().map(|t| t.nodes().to_vec()));
        } else {
            let conn = table.hops(self.at, to)?;
            self.trip_count += conn.1;
            self.total += conn.0;
        }
        self.at = to;
        Some(())
    }

    fn route_time(&self) -> TimeUnits {
        if self.trip_count == 0 {
            TimeUnits::ZERO
        } else {
            self.total + self.net.inst.recharge * (self.trip_count as i64 - 1)
        }
    }
}

/// Runs the greedy decoder for one vehicle. Returns the route time and, when
/// `build` is set, the trips' node lists. `None` if some task cannot be
/// served.
fn decode(net: &Network, start: NodeId, tasks: &[Task], build: bool) -> Option<(TimeUnits, Vec<Vec<NodeId>>)> {
    let inst = &net.inst;
    let sp = &net.sp;
    let cap = inst.capacity;
    let rt = inst.recharge;
    let mut dec = Decoder { net, build, at: start, total: TimeUnits::ZERO, trip_count: 0, trips: Vec::new() };
    let mut open: Option<OpenTrip> = None;
    for task in tasks {
        let (u, v) = inst.required[task.edge];
        let (a, b) = if task.forward { (u, v) } else { (v, u) };
        let w = inst.graph.weight(u, v).expect("required edges exist");
        let tail = net.nearest_depot(b).1;
        if let (Some(o), false) = (open.as_mut(), task.split) {
            let dur = o.duration + sp.dist(o.last, a) + w;
            if dur + tail <= cap {
                let last = o.last;
                let mut nodes = std::mem::take(&mut o.nodes);
                dec.extend_path(&mut nodes, last, a);
                if build {
                    nodes.push(b);
                }
                *o = OpenTrip { last: b, duration: dur, nodes, close_hint: task.close_at };
                continue;
            }
        }
        if let Some(o) = open.take() {
            dec.close(o);
        }
        let fits = |d: NodeId| sp.dist(d, a) + w + tail <= cap;
        let launch = if task.launch_from.is_none() && fits(dec.at) {
            dec.at
        } else {
            let reachable = |d: NodeId| fits(d) && net.table.time(dec.at, d).is_some();
            match task.launch_from.filter(|&h| reachable(h)) {
                Some(h) => h,
                None => inst.depots.iter().copied().filter(|&d| reachable(d)).min_by_key(|&d| {
                    let hop = net.table.time(dec.at, d).expect("filtered");
                    let pause = if d == dec.at { TimeUnits::ZERO } else { rt };
                    (hop + pause + sp.dist(d, a), d)
                })?,
            }
        };
        dec.reposition(launch)?;
        let mut nodes = if build { vec![launch] } else { Vec::new() };
        dec.extend_path(&mut nodes, launch, a);
        if build {
            nodes.push(b);
        }
        open = Some(OpenTrip { last: b, duration: sp.dist(launch, a) + w, nodes, close_hint: task.close_at });
    }
    if let Some(o) = open.take() {
        dec.close(o);
    }
    Some((dec.route_time(), dec.trips))
}

/// Makespan and total route time; compared lexicographically.
type Score = (TimeUnits, TimeUnits);

#[derive(Clone)]
struct State {
    tasks: Vec<Vec<Task>>,
    times: Vec<TimeUnits>,
}

impl State {
    fn score(&self) -> Score {
        score_of(&self.times)
    }
}

fn score_of(times: &[TimeUnits]) -> Score {
    (times.iter().copied().max().unwrap_or_default(), times.iter().copied().sum())
}

fn energy(s: Score) -> f64 {
    s.0.millis() as f64 + 0.01 * s.1.millis() as f64
}

/// Result of a planning run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanOutcome {
    pub plan: FleetPlan,
    pub beta: TimeUnits,
    /// Restart that produced the plan.
    pub restart: usize,
    /// Best makespan of that restart after each temperature level, starting
    /// with the constructed solution.
    pub best_history: Vec<TimeUnits>,
}

/// Rejects instances with a required edge that no trip can serve.
pub fn check_coverable(net: &Network) -> Result<()> {
    let inst = &net.inst;
    for (i, &(u, v)) in inst.required.iter().enumerate() {
        let w = inst.graph.weight(u, v).expect("required edges exist");
        let servable = [(u, v), (v, u)]
            .into_iter()
            .any(|(a, b)| inst.depots.iter().any(|&d| net.sp.dist(d, a) + w + net.nearest_depot(b).1 <= inst.capacity));
        if !servable {
            return Err(Error::Infeasible(format!(
                "required edge ({u}, {v}) cannot be served within capacity {} from any depot",
                inst.capacity
            )));
        }
        let reachable = inst.start_depots.iter().any(|&s| {
            let task = Task::plain(i, true, true);
            let rev = Task::plain(i, false, true);
            decode(net, s, &[task], false).is_some() || decode(net, s, &[rev], false).is_some()
        });
        if !reachable {
            return Err(Error::Infeasible(format!("required edge ({u}, {v}) is unreachable from every start depot")));
        }
    }
    Ok(())
}

fn construct(net: &Network, rng: &mut ChaCha8Rng) -> Result<State> {
    let inst = &net.inst;
    let k = inst.vehicle_count;
    let mut order: Vec<usize> = (0..inst.required.len()).collect();
    order.shuffle(rng);
    let mut state = State { tasks: vec![Vec::new(); k], times: vec![TimeUnits::ZERO; k] };
    for e in order {
        let mut best: Option<(Score, usize, Task, TimeUnits)> = None;
        for v in 0..k {
            for (forward, split) in [(true, false), (false, false), (true, true), (false, true)] {
                let task = Task::plain(e, forward, split);
                state.tasks[v].push(task);
                let decoded = decode(net, inst.start_depots[v], &state.tasks[v], false);
                state.tasks[v].pop();
                let Some((time, _)) = decoded else { continue };
                let mut times = state.times.clone();
                times[v] = time;
                let s = score_of(&times);
                if best.as_ref().is_none_or(|b| s < b.0) {
                    best = Some((s, v, task, time));
                }
            }
        }
        let (_, v, task, time) = best.ok_or_else(|| {
            let (a, b) = inst.required[e];
            Error::Infeasible(format!("no vehicle can serve required edge ({a}, {b})"))
        })?;
        state.tasks[v].push(task);
        state.times[v] = time;
    }
    Ok(state)
}

/// Proposes a neighbour: the changed vehicles with their new task lists.
fn propose(net: &Network, state: &State, rng: &mut ChaCha8Rng) -> Vec<(usize, Vec<Task>)> {
    let k = state.tasks.len();
    let loaded: Vec<usize> = (0..k).filter(|&v| !state.tasks[v].is_empty()).collect();
    let v = loaded[rng.gen_range(0..loaded.len())];
    let i = rng.gen_range(0..state.tasks[v].len());
    let depots = &net.inst.depots;
    let roll: f64 = rng.gen();
    if roll < 0.35 {
        // relocate
        let to = rng.gen_range(0..k);
        let mut src = state.tasks[v].clone();
        let task = src.remove(i);
        if to == v {
            let at = rng.gen_range(0..=src.len());
            src.insert(at, task);
            vec![(v, src)]
        } else {
            let mut dst = state.tasks[to].clone();
            let at = rng.gen_range(0..=dst.len());
            dst.insert(at, task);
            vec![(v, src), (to, dst)]
        }
    } else if roll < 0.6 {
        // swap with any other task
        let w = rng.gen_range(0..k);
        if state.tasks[w].is_empty() {
            return Vec::new();
        }
        let j = rng.gen_range(0..state.tasks[w].len());
        if w == v {
            let mut list = state.tasks[v].clone();
            list.swap(i, j);
            vec![(v, list)]
        } else {
            let mut a = state.tasks[v].clone();
            let mut b = state.tasks[w].clone();
            std::mem::swap(&mut a[i], &mut b[j]);
            vec![(v, a), (w, b)]
        }
    } else if roll < 0.8 {
        let mut list = state.tasks[v].clone();
        list[i].forward = !list[i].forward;
        vec![(v, list)]
    } else {
        // re-splice through another depot or break the trip
        let mut list = state.tasks[v].clone();
        let pick = |rng: &mut ChaCha8Rng| {
            let j = rng.gen_range(0..=depots.len());
            depots.get(j).copied()
        };
        match rng.gen_range(0..3) {
            0 => list[i].split = !list[i].split,
            1 => list[i].close_at = pick(rng),
            _ => list[i].launch_from = pick(rng),
        }
        vec![(v, list)]
    }
}

struct RestartResult {
    best: State,
    history: Vec<TimeUnits>,
}

fn anneal(net: &Network, cfg: &SaConfig, restart: usize) -> Result<RestartResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut cur = construct(net, &mut rng)?;
    let mut best = cur.clone();
    let mut history = vec![best.score().0];
    let start = cur.score().0.as_units_f64();
    let t0 = cfg.initial_temperature.unwrap_or(0.3 * start).max(1e-9);
    let t_min = cfg.min_temperature.unwrap_or(1e-3 * t0);
    let starts = &net.inst.start_depots;
    let mut temp = t0;
    while temp > t_min {
        for _ in 0..cfg.iterations_per_temperature {
            let changes = propose(net, &cur, &mut rng);
            if changes.is_empty() {
                continue;
            }
            let mut times = cur.times.clone();
            let mut ok = true;
            for (v, list) in &changes {
                match decode(net, starts[*v], list, false) {
                    Some((t, _)) => times[*v] = t,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let new_score = score_of(&times);
            // energy is in millis; temperature in time units
            let delta = (energy(new_score) - energy(cur.score())) / 1000.0;
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                for (v, list) in changes {
                    cur.tasks[v] = list;
                }
                cur.times = times;
                if cur.score() < best.score() {
                    best = cur.clone();
                }
            }
        }
        history.push(best.score().0);
        temp *= cfg.cooling_rate;
    }
    Ok(RestartResult { best, history })
}

fn to_plan(net: &Network, state: &State) -> FleetPlan {
    let inst = &net.inst;
    let mut plan = FleetPlan::empty(inst);
    for (v, tasks) in state.tasks.iter().enumerate() {
        let (_, trips) = decode(net, inst.start_depots[v], tasks, true).expect("state was decodable");
        let trips =
            trips.into_iter().map(|nodes| Trip::new(&inst.graph, nodes).expect("decoder walks graph edges")).collect();
        plan.routes[v] = Route::with_trips(v, inst.start_depots[v], trips);
    }
    plan
}

/// Plans the failure-free mission. Restarts run in parallel, each on its own
/// random stream; the lowest (makespan, total time) wins, ties to the lower
/// restart index.
pub fn generate_initial_plan(net: &Network, cfg: &SaConfig) -> Result<PlanOutcome> {
    cfg.validate()?;
    check_coverable(net)?;
    let results: Vec<Result<RestartResult>> = (0..cfg.restarts).into_par_iter().map(|r| anneal(net, cfg, r)).collect();
    let mut best: Option<(usize, RestartResult)> = None;
    for (r, res) in results.into_iter().enumerate() {
        let res = res?;
        if best.as_ref().is_none_or(|(_, b)| res.best.score() < b.best.score()) {
            best = Some((r, res));
        }
    }
    let (restart, res) = best.expect("at least one restart");
    let plan = to_plan(net, &res.best);
    debug_assert_eq!(plan.mission_time(), res.best.score().0);
    Ok(PlanOutcome { beta: plan.mission_time(), plan, restart, best_history: res.history })
}

pub fn plan_cost(plan: &FleetPlan) -> TimeUnits {
    plan.mission_time()
}
