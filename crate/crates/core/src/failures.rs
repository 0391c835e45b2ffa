//! Vehicle failure scenarios: data model, text format, and random
//! generation against a reference plan.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::network::Network;
use crate::planner::{generate_initial_plan, SaConfig};
use crate::routing::FleetPlan;
use crate::time::TimeUnits;

/// Failed vehicles (0-based ids) and the instant each one stops working.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailureScenario {
    pub name: String,
    pub failures: BTreeMap<usize, TimeUnits>,
}

impl FailureScenario {
    pub fn new(name: impl Into<String>) -> Self {
        FailureScenario { name: name.into(), failures: BTreeMap::new() }
    }

    pub fn with_failure(mut self, vehicle: usize, at: TimeUnits) -> Self {
        self.failures.insert(vehicle, at);
        self
    }

    pub fn len(&self) -> usize {
        self.failures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.failures.is_empty()
    }

    /// Failures ordered by time, then vehicle id.
    pub fn chronological(&self) -> Vec<(TimeUnits, usize)> {
        let mut v: Vec<_> = self.failures.iter().map(|(&k, &f)| (f, k)).collect();
        v.sort_unstable();
        v
    }

    /// Checks the scenario against a fleet of `k` vehicles and the reference
    /// completion times: `1 <= |F| <= K-1` and `0 < f_k <= y_k`.
    pub fn validate(&self, plan: &FleetPlan) -> Result<()> {
        let k = plan.vehicle_count();
        if self.failures.is_empty() || self.failures.len() > k.saturating_sub(1) {
            return Err(Error::Scenario(format!(
                "{}: {} failures for {k} vehicles (need 1..={})",
                self.name,
                self.failures.len(),
                k.saturating_sub(1)
            )));
        }
        for (&v, &f) in &self.failures {
            if v >= k {
                return Err(Error::Scenario(format!("{}: unknown vehicle V{}", self.name, v + 1)));
            }
            let y = plan.route_time(v);
            if f <= TimeUnits::ZERO || f > y {
                return Err(Error::Scenario(format!("{}: V{} fails at {f}, outside (0, {y}]", self.name, v + 1)));
            }
        }
        Ok(())
    }
}

/// Moves a failure time that falls strictly inside a gap between two trips
/// (a recharge, or waiting for a release) to the start of the next trip.
pub fn normalize_failure_time(plan: &FleetPlan, k: usize, f: TimeUnits) -> TimeUnits {
    let tl = plan.routes[k].timeline(plan.recharge);
    for w in tl.windows(2) {
        if w[0].end < f && f < w[1].start {
            return w[1].start;
        }
    }
    f
}

/// Coarsest step in {1, 0.1, 0.01, 0.001} that divides every time in the
/// instance. Route times are sums of these, so they lie on the same grid.
pub fn time_grid(inst: &Instance) -> i64 {
    let all = inst.graph.edges().iter().map(|e| e.weight).chain([inst.capacity, inst.recharge]);
    let mut step = 1000;
    for t in all {
        while t.millis() % step != 0 {
            step /= 10;
        }
    }
    step
}

/// Random failure scenarios against a reference plan. The scenario count is
/// uniform in `1..=K-1`; scenario `j` draws `j` vehicles with non-empty routes
/// (repeats collapse), each failing at a uniform time on the instance's time
/// grid in `(0, y_k]`, normalised out of recharge windows.
pub fn create_failure_scenarios(inst: &Instance, plan: &FleetPlan, seed: u64) -> Result<Vec<FailureScenario>> {
    check_fleet(inst, plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..inst.vehicle_count);
    Ok((1..=count).map(|j| draw_scenario(inst, plan, j, &mut rng)).collect())
}

/// Like [`create_failure_scenarios`], but plans the mission afresh for every
/// scenario (annealing seeded from `cfg.seed + j`) and draws that scenario's
/// failures against its own plan.
pub fn create_failure_scenarios_replanned(
    net: &Network,
    cfg: &SaConfig,
    seed: u64,
) -> Result<Vec<(FailureScenario, FleetPlan)>> {
    let inst = &net.inst;
    if inst.vehicle_count < 2 {
        return Err(single_vehicle());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..inst.vehicle_count);
    let mut out = Vec::with_capacity(count);
    for j in 1..=count {
        let sa = SaConfig { seed: cfg.seed.wrapping_add(j as u64), ..*cfg };
        let plan = generate_initial_plan(net, &sa)?.plan;
        check_fleet(inst, &plan)?;
        out.push((draw_scenario(inst, &plan, j, &mut rng), plan));
    }
    Ok(out)
}

fn single_vehicle() -> Error {
    Error::CannotCreateScenario("a single vehicle leaves no survivor to take over failed trips".into())
}

fn check_fleet(inst: &Instance, plan: &FleetPlan) -> Result<()> {
    if inst.vehicle_count < 2 {
        return Err(single_vehicle());
    }
    if plan.completion_times().iter().all(|&y| y <= TimeUnits::ZERO) {
        return Err(Error::CannotCreateScenario("every route is empty".into()));
    }
    Ok(())
}

/// Scenario `j`: `j` draws over vehicles with non-empty routes, repeats
/// collapsed, each failing at a grid instant in `(0, y_k]`.
fn draw_scenario(inst: &Instance, plan: &FleetPlan, j: usize, rng: &mut ChaCha8Rng) -> FailureScenario {
    let y = plan.completion_times();
    let eligible: Vec<usize> = (0..inst.vehicle_count).filter(|&v| y[v] > TimeUnits::ZERO).collect();
    let grid = time_grid(inst);
    let chosen: BTreeSet<usize> = (0..j).map(|_| eligible[rng.gen_range(0..eligible.len())]).collect();
    let mut s = FailureScenario::new(format!("{}-s{j}", inst.name));
    for v in chosen {
        let steps = y[v].millis() / grid;
        let f = TimeUnits::from_millis(rng.gen_range(1..=steps) * grid);
        s.failures.insert(v, normalize_failure_time(plan, v, f));
    }
    s
}

pub fn scenarios_to_text(scenarios: &[FailureScenario]) -> String {
    let mut out = String::new();
    for s in scenarios {
        let _ = writeln!(out, "SCENARIO {}", s.name);
        let _ = writeln!(out, "FAILURES {}", s.failures.len());
        for (v, f) in &s.failures {
            let _ = writeln!(out, "{} {f}", v + 1);
        }
    }
    out
}

/// Parses one or more `SCENARIO` blocks. Vehicle ids are 1-based in the file.
pub fn parse_scenarios(text: &str) -> Result<Vec<FailureScenario>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut out = Vec::new();
    while let Some((ln, line)) = lines.next() {
        let name = line
            .strip_prefix("SCENARIO")
            .map(str::trim)
            .ok_or_else(|| Error::parse(ln, "expected `SCENARIO <name>`"))?;
        let (cln, cline) = lines.next().ok_or_else(|| Error::parse(ln, "missing FAILURES line"))?;
        let count: usize = cline
            .strip_prefix("FAILURES")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parse(cln, "expected `FAILURES <count>`"))?;
        let mut s = FailureScenario::new(name);
        for _ in 0..count {
            let (fln, fline) = lines.next().ok_or_else(|| Error::parse(cln, "unexpected end of failure list"))?;
            let f: Vec<&str> = fline.split_whitespace().collect();
            let [v, t] = f[..] else {
                return Err(Error::parse(fln, "expected `<vehicle> <time>`"));
            };
            let v: usize = v
                .parse()
                .ok()
                .filter(|&v: &usize| v >= 1)
                .ok_or_else(|| Error::parse(fln, format!("bad vehicle id {v:?}")))?;
            let t: TimeUnits = t.parse().map_err(|e: Error| Error::parse(fln, e.to_string()))?;
            if t.is_negative() {
                return Err(Error::parse(fln, "negative failure time"));
            }
            if s.failures.insert(v - 1, t).is_some() {
                return Err(Error::parse(fln, format!("V{v} fails twice")));
            }
        }
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::routing::{Route, Trip};

    fn t(s: &str) -> TimeUnits {
        s.parse().unwrap()
    }

    fn worked_plan() -> (Instance, FleetPlan) {
        let inst = parse_instance(include_str!("../fixtures/worked_example.inst")).unwrap();
        let mut plan = FleetPlan::empty(&inst);
        plan.routes[0] = Route::with_trips(
            0,
            1,
            vec![Trip::new(&inst.graph, vec![1, 3, 5]).unwrap(), Trip::new(&inst.graph, vec![5, 7, 8, 5]).unwrap()],
        );
        (inst, plan)
    }

    #[test]
    fn normalization_moves_recharge_draws_only() {
        let (_, plan) = worked_plan();
        assert_eq!(normalize_failure_time(&plan, 0, t("6.5")), t("7.3"));
        assert_eq!(normalize_failure_time(&plan, 0, t("3")), t("3"));
        assert_eq!(normalize_failure_time(&plan, 0, t("6.2")), t("6.2"));
        assert_eq!(normalize_failure_time(&plan, 0, t("7.3")), t("7.3"));
    }

    #[test]
    fn single_vehicle_cannot_fail() {
        let (inst, plan) = worked_plan();
        assert!(matches!(create_failure_scenarios(&inst, &plan, 1), Err(Error::CannotCreateScenario(_))));
    }

    fn two_vehicle() -> (Instance, FleetPlan) {
        let inst = parse_instance(
            "NAME pair\nNODES 3\nDEPOTS 1 3\nEDGES 2\n1 2 2\n2 3 2\nREQUIRED 2\n1 2\n2 3\n\
             VEHICLES 2\nCAPACITY 8\nRECHARGE 3\n",
        )
        .unwrap();
        let mut plan = FleetPlan::empty(&inst);
        plan.routes[0] = Route::with_trips(0, 1, vec![Trip::new(&inst.graph, vec![1, 2, 1]).unwrap()]);
        plan.routes[1] = Route::with_trips(1, 3, vec![Trip::new(&inst.graph, vec![3, 2, 3]).unwrap()]);
        (inst, plan)
    }

    #[test]
    fn two_vehicles_give_one_single_failure_scenario() {
        let (inst, plan) = two_vehicle();
        for seed in 0..20 {
            let s = create_failure_scenarios(&inst, &plan, seed).unwrap();
            assert_eq!(s.len(), 1);
            assert_eq!(s[0].len(), 1);
            s[0].validate(&plan).unwrap();
            // integer instance: failures land on whole units
            assert!(s[0].failures.values().all(|f| f.millis() % 1000 == 0));
        }
    }

    #[test]
    fn empty_routes_are_never_drawn() {
        let (inst, mut plan) = two_vehicle();
        plan.routes[1] = Route::new(1, 3);
        for seed in 0..20 {
            let s = create_failure_scenarios(&inst, &plan, seed).unwrap();
            assert_eq!(s[0].failures.keys().copied().collect::<Vec<_>>(), vec![0]);
        }
    }

    #[test]
    fn grid_detection() {
        let (inst, _) = worked_plan();
        assert_eq!(time_grid(&inst), 100);
        let (inst, _) = two_vehicle();
        assert_eq!(time_grid(&inst), 1000);
    }

    #[test]
    fn text_round_trip() {
        let scenarios = vec![
            FailureScenario::new("a").with_failure(1, t("10")),
            FailureScenario::new("b").with_failure(0, t("2.5")).with_failure(2, t("7")),
        ];
        let text = scenarios_to_text(&scenarios);
        assert!(text.starts_with("SCENARIO a\nFAILURES 1\n2 10\n"));
        assert_eq!(parse_scenarios(&text).unwrap(), scenarios);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_scenarios("SCENARIO x\nFAILURES 1\n0 3\n").is_err());
        assert!(parse_scenarios("SCENARIO x\nFAILURES 2\n1 3\n").is_err());
        assert!(parse_scenarios("FAILURES 1\n1 3\n").is_err());
    }

    #[test]
    fn replanned_scenarios_validate_against_their_own_plans() {
        let (inst, _) = two_vehicle();
        let net = Network::new(inst);
        let cfg = SaConfig { restarts: 2, iterations_per_temperature: 20, ..SaConfig::with_seed(3) };
        let a = create_failure_scenarios_replanned(&net, &cfg, 9).unwrap();
        assert_eq!(a, create_failure_scenarios_replanned(&net, &cfg, 9).unwrap());
        for (s, plan) in &a {
            s.validate(plan).unwrap();
            assert!(plan.uncovered(&net.inst).is_empty());
        }
    }
}
