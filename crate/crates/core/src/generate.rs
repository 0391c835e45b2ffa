//! Seeded random instances: a synthetic CARP graph pushed through the usual
//! conversion, optionally with the required set or fleet size overridden.

use crate::carp::{convert_to_instance, synthetic_carp, ConversionParams};
use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceBuilder};
use crate::network::Network;
use crate::planner::check_coverable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub nodes: usize,
    pub edges: usize,
    pub max_cost: i64,
    /// Keep at most this many required edges.
    pub max_required: Option<usize>,
    /// Fleet size instead of the converted default.
    pub vehicles: Option<usize>,
    pub params: ConversionParams,
}

impl Shape {
    pub fn new(nodes: usize, edges: usize, max_cost: i64) -> Self {
        Shape { nodes, edges, max_cost, max_required: None, vehicles: None, params: ConversionParams::default() }
    }

    /// Small enough for the exact oracle: at most 4 required edges, 2-3 vehicles.
    pub fn desk(nodes: usize, edges: usize, vehicles: usize) -> Self {
        Shape { max_required: Some(4), vehicles: Some(vehicles), ..Shape::new(nodes, edges, 9) }
    }
}

const MAX_ATTEMPTS: u64 = 1000;

fn attempt_seed(seed: u64, attempt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(attempt)
}

fn reshape(inst: Instance, shape: &Shape) -> Result<Instance> {
    if shape.max_required.is_none() && shape.vehicles.is_none() {
        return Ok(inst);
    }
    let mut required = inst.required.clone();
    if let Some(m) = shape.max_required {
        required.truncate(m.max(1));
    }
    InstanceBuilder {
        name: inst.name.clone(),
        node_count: inst.graph.node_count(),
        edges: inst.graph.edges().to_vec(),
        depots: inst.depots.clone(),
        required,
        vehicle_count: shape.vehicles.unwrap_or(inst.vehicle_count),
        capacity: inst.capacity,
        recharge: inst.recharge,
        ..Default::default()
    }
    .build()
}

/// First usable instance drawn from `seed`. Draws are skipped when some
/// required edge cannot be served within one charge, or when some depot pair
/// cannot be joined (failed trips could then become unassignable).
pub fn random_network(seed: u64, shape: &Shape) -> Result<Network> {
    for attempt in 0..MAX_ATTEMPTS {
        let s = attempt_seed(seed, attempt);
        let mut carp = synthetic_carp(s, shape.nodes, shape.edges, shape.max_cost);
        carp.name = format!("rand-{seed}");
        let inst = reshape(convert_to_instance(&carp, s, shape.params)?, shape)?;
        let net = Network::new(inst);
        if net.table.is_connected() && check_coverable(&net).is_ok() {
            return Ok(net);
        }
    }
    Err(Error::Infeasible(format!("no coverable instance in {MAX_ATTEMPTS} draws")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_shape_respects_overrides() {
        for seed in 0..10 {
            let net = random_network(seed, &Shape::desk(6, 9, 3)).unwrap();
            assert!(net.inst.required.len() <= 4);
            assert_eq!(net.inst.vehicle_count, 3);
            assert_eq!(net.inst.start_depots.len(), 3);
        }
    }

    #[test]
    fn reproducible() {
        let a = random_network(5, &Shape::new(8, 12, 9)).unwrap();
        let b = random_network(5, &Shape::new(8, 12, 9)).unwrap();
        assert_eq!(a.inst, b.inst);
    }
}
