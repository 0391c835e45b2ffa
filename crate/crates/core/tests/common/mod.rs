#![allow(dead_code)]

pub mod auction_enum;

use rrv_core::failures::{create_failure_scenarios, FailureScenario};
use rrv_core::generate::{random_network, Shape};
use rrv_core::network::Network;
use rrv_core::planner::{generate_initial_plan, SaConfig};
use rrv_core::routing::FleetPlan;

pub fn quick_sa(seed: u64) -> SaConfig {
    SaConfig { restarts: 2, iterations_per_temperature: 40, ..SaConfig::with_seed(seed) }
}

/// A small random instance with 2-4 vehicles, its plan and failure scenarios.
pub fn small_case(seed: u64) -> (Network, FleetPlan, Vec<FailureScenario>) {
    let nodes = 5 + (seed % 5) as usize;
    let shape = Shape { vehicles: Some(2 + (seed % 3) as usize), ..Shape::new(nodes, nodes + 3, 9) };
    let net = random_network(seed, &shape).unwrap();
    let plan = generate_initial_plan(&net, &quick_sa(seed)).unwrap().plan;
    let scenarios = create_failure_scenarios(&net.inst, &plan, seed).unwrap();
    (net, plan, scenarios)
}
