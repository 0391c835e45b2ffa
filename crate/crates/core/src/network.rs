use crate::depot_routes::{build_depot_routes, DepotRouteTable};
use crate::graph::ShortestPaths;
use crate::instance::Instance;
use crate::time::TimeUnits;

/// An instance bundled with the tables every stage reads: all-pairs shortest
/// paths, the depot route table and the graph diameter.
#[derive(Debug, Clone)]
pub struct Network {
    pub inst: Instance,
    pub sp: ShortestPaths,
    pub table: DepotRouteTable,
    pub diameter: TimeUnits,
    nearest: Vec<(usize, TimeUnits)>,
}

impl Network {
    pub fn new(inst: Instance) -> Self {
        let sp = inst.graph.all_pairs();
        let table = build_depot_routes(&inst, &sp);
        Self::assemble(inst, sp, table)
    }

    /// Uses a previously built (e.g. cached) depot route table.
    pub fn with_table(inst: Instance, table: DepotRouteTable) -> Self {
        let sp = inst.graph.all_pairs();
        Self::assemble(inst, sp, table)
    }

    fn assemble(inst: Instance, sp: ShortestPaths, table: DepotRouteTable) -> Self {
        let diameter = sp.diameter();
        let nearest = std::iter::once((0, TimeUnits::ZERO))
            .chain(inst.graph.nodes().map(|n| {
                inst.depots
                    .iter()
                    .map(|&d| (d, sp.dist(n, d)))
                    .min_by_key(|&(d, t)| (t, d))
                    .expect("instances have at least one depot")
            }))
            .collect();
        Network { inst, sp, table, diameter, nearest }
    }

    /// Closest depot to `n` (lowest id on ties) and its distance.
    pub fn nearest_depot(&self, n: usize) -> (usize, TimeUnits) {
        self.nearest[n]
    }
}
