//! End-to-end evaluation of one instance: plan, draw failure scenarios,
//! simulate each with the auction, and (when small enough) compare against
//! the exact optimum with and without known failures.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::exact::{exact_optimum, OracleLimits, OracleResult};
use crate::failures::{create_failure_scenarios, FailureScenario};
use crate::metrics::{scenario_bound, InstanceStats, ScenarioMetrics};
use crate::network::Network;
use crate::planner::{generate_initial_plan, PlanOutcome, SaConfig};
use crate::simulator::{simulate, SimConfig, SimulationReport, WaitTime};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub sa: SaConfig,
    pub scenario_seed: u64,
    pub wait: WaitTime,
    /// `None` skips the oracle entirely.
    pub oracle: Option<OracleLimits>,
}

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        PipelineConfig {
            sa: SaConfig::with_seed(seed),
            scenario_seed: seed,
            wait: WaitTime::IMMEDIATE,
            oracle: Some(OracleLimits::default()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub scenario: FailureScenario,
    pub report: SimulationReport,
    pub opt_f: Option<OracleResult>,
    pub metrics: ScenarioMetrics,
}

#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub plan: PlanOutcome,
    pub opt: Option<OracleResult>,
    /// Failure-free row: instance statistics, SA and oracle makespans.
    pub baseline: ScenarioMetrics,
    pub scenarios: Vec<ScenarioOutcome>,
}

impl InstanceOutcome {
    /// One report row per scenario, or the failure-free row when the fleet
    /// is too small to fail.
    pub fn rows(&self) -> Vec<ScenarioMetrics> {
        if self.scenarios.is_empty() {
            vec![self.baseline.clone()]
        } else {
            self.scenarios.iter().map(|s| s.metrics.clone()).collect()
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64())
}

/// Oracle result, or `None` when the instance is over the oracle's limits.
fn oracle(
    net: &Network,
    s: Option<&FailureScenario>,
    limits: Option<&OracleLimits>,
) -> Result<Option<(OracleResult, f64)>> {
    let Some(limits) = limits else { return Ok(None) };
    let (res, secs) = timed(|| exact_optimum(net, s, limits));
    match res {
        Ok(r) => Ok(Some((r, secs))),
        Err(Error::OracleBudget(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn evaluate_instance(net: &Network, cfg: &PipelineConfig) -> Result<InstanceOutcome> {
    let inst = &net.inst;
    let (plan, et_sa) = timed(|| generate_initial_plan(net, &cfg.sa));
    let plan = plan?;
    let opt = oracle(net, None, cfg.oracle.as_ref())?;
    // a lone vehicle cannot fail without violating the fleet assumptions
    let scenarios = if inst.vehicle_count < 2 {
        Vec::new()
    } else {
        create_failure_scenarios(inst, &plan.plan, cfg.scenario_seed)?
    };
    let stats = InstanceStats::of(inst);
    let mut baseline = ScenarioMetrics::new(inst.name.clone(), stats, 0);
    baseline.beta_sa = Some(plan.beta);
    baseline.times.sa = Some(et_sa);
    if let Some((o, secs)) = &opt {
        baseline.beta_opt = Some(o.beta);
        baseline.times.opt = Some(*secs);
    }
    let sim_cfg = SimConfig::new(inst, cfg.wait);

    let mut out = Vec::with_capacity(scenarios.len());
    for scenario in scenarios {
        let (report, et_ca) = timed(|| simulate(net, &plan.plan, &scenario, sim_cfg));
        let report = report?;
        let opt_f = oracle(net, Some(&scenario), cfg.oracle.as_ref())?;

        let mut m = ScenarioMetrics { scenario: scenario.name.clone(), failures: scenario.len(), ..baseline.clone() };
        m.beta_ca = Some(report.beta_ca);
        m.times.ca = Some(et_ca);
        if let Some((o, secs)) = &opt_f {
            m.beta_opt_f = Some(o.beta);
            m.times.opt_f = Some(*secs);
            m.rho_bound = Some(scenario_bound(inst, &net.table, &plan.plan, o.beta));
        }
        out.push(ScenarioOutcome { scenario, report, opt_f: opt_f.map(|(o, _)| o), metrics: m });
    }
    Ok(InstanceOutcome { plan, opt: opt.map(|(o, _)| o), baseline, scenarios: out })
}
