//! Writer for the mixed-integer model in the plain LP text format.
//!
//! Every undirected edge yields two arcs. Variables are `x_k_f_i_j` (vehicle
//! `k` uses arc `i -> j` on trip `f`), `y_k_f_d` (trip `f` ends at depot `d`),
//! `z_k_f` (trip `f` is used) and the continuous makespan `beta`. The route
//! time rows are written as
//! `sum t x + R_T * sum_{f >= 2} z <= beta` (or `<= f_k` for failed vehicles),
//! which equals the `(sum z - 1) R_T` form whenever the first trip is used and
//! is trivially satisfied otherwise.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::failures::FailureScenario;
use crate::graph::NodeId;
use crate::instance::Instance;
use crate::time::TimeUnits;

/// Subtour rows are enumerated over subsets of non-depot nodes only up to
/// this many nodes.
pub const SUBTOUR_NODE_LIMIT: usize = 12;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MilpModel {
    pub text: String,
    pub rows: usize,
    /// Rows per constraint family, index 0 for family (1).
    pub family_rows: [usize; 13],
    pub binaries: usize,
    pub big_m: usize,
}

fn x(k: usize, f: usize, i: NodeId, j: NodeId) -> String {
    format!("x_{k}_{f}_{i}_{j}")
}

fn y(k: usize, f: usize, d: NodeId) -> String {
    format!("y_{k}_{f}_{d}")
}

fn z(k: usize, f: usize) -> String {
    format!("z_{k}_{f}")
}

struct Writer {
    out: String,
    model: MilpModel,
}

impl Writer {
    /// Writes `name: terms sense rhs`, wrapping long expressions. Terms with
    /// a zero coefficient are dropped; an empty row is skipped.
    fn row(&mut self, family: usize, name: String, terms: &[(TimeUnits, String)], sense: &str, rhs: TimeUnits) {
        let terms: Vec<_> = terms.iter().filter(|(c, _)| *c != TimeUnits::ZERO).collect();
        if terms.is_empty() {
            return;
        }
        let _ = write!(self.out, " {name}:");
        for (n, (c, v)) in terms.iter().enumerate() {
            if n > 0 && n % 8 == 0 {
                self.out.push_str("\n   ");
            }
            let sign = if c.is_negative() { '-' } else { '+' };
            let mag = if c.is_negative() { -*c } else { *c };
            if mag == TimeUnits::from_units(1) {
                let _ = write!(self.out, " {sign} {v}");
            } else {
                let _ = write!(self.out, " {sign} {mag} {v}");
            }
        }
        let _ = writeln!(self.out, " {sense} {rhs}");
        self.model.rows += 1;
        self.model.family_rows[family - 1] += 1;
    }
}

fn one() -> TimeUnits {
    TimeUnits::from_units(1)
}

fn units(n: i64) -> TimeUnits {
    TimeUnits::from_units(n)
}

/// Emits the model for `inst`, with one failure-time row per failed vehicle
/// when a scenario is given.
pub fn emit_milp(inst: &Instance, scenario: Option<&FailureScenario>) -> Result<MilpModel> {
    let free: Vec<NodeId> = inst.graph.nodes().filter(|&n| !inst.is_depot(n)).collect();
    if free.len() > SUBTOUR_NODE_LIMIT {
        return Err(Error::SubtourBound { non_depots: free.len(), limit: SUBTOUR_NODE_LIMIT });
    }
    if let Some(s) = scenario {
        if let Some(&v) = s.failures.keys().find(|&&v| v >= inst.vehicle_count) {
            return Err(Error::Scenario(format!("unknown vehicle V{}", v + 1)));
        }
    }
    let kk = inst.vehicle_count;
    let ff = inst.max_trips;
    let rt = inst.recharge;
    let arcs: Vec<(NodeId, NodeId, TimeUnits)> =
        inst.graph.edges().iter().flat_map(|e| [(e.u, e.v, e.weight), (e.v, e.u, e.weight)]).collect();
    let big_m = arcs.len() + 1;
    let mut w = Writer { out: String::new(), model: MilpModel { big_m, ..Default::default() } };

    let _ = writeln!(w.out, "\\ {}: {} vehicles, {} trips each", inst.name, kk, ff);
    w.out.push_str("Minimize\n obj: beta\nSubject To\n");

    let route_time = |k: usize| -> Vec<(TimeUnits, String)> {
        let mut t: Vec<_> = (1..=ff).flat_map(|f| arcs.iter().map(move |&(i, j, c)| (c, x(k, f, i, j)))).collect();
        t.extend((2..=ff).map(|f| (rt, z(k, f))));
        t
    };

    for k in 1..=kk {
        let b = inst.start_depots[k - 1];
        let mut t: Vec<_> = arcs.iter().filter(|a| a.0 == b).map(|&(i, j, _)| (one(), x(k, 1, i, j))).collect();
        t.push((-one(), z(k, 1)));
        w.row(1, format!("c1_{k}"), &t, "=", TimeUnits::ZERO);
    }
    for k in 1..=kk {
        for f in 1..ff {
            w.row(2, format!("c2_{k}_{f}"), &[(one(), z(k, f)), (-one(), z(k, f + 1))], ">=", TimeUnits::ZERO);
        }
    }
    for k in 1..=kk {
        for f in 1..=ff {
            for &d in &inst.depots {
                let mut t: Vec<_> = arcs.iter().filter(|a| a.1 == d).map(|&(i, j, _)| (one(), x(k, f, i, j))).collect();
                t.push((-one(), y(k, f, d)));
                w.row(3, format!("c3_{k}_{f}_{d}"), &t, "=", TimeUnits::ZERO);
            }
        }
    }
    for k in 1..=kk {
        for f in 2..=ff {
            for &d in &inst.depots {
                let mut t = vec![(one(), y(k, f - 1, d))];
                t.extend(arcs.iter().filter(|a| a.0 == d).map(|&(i, j, _)| (-one(), x(k, f, i, j))));
                w.row(4, format!("c4_{k}_{f}_{d}"), &t, ">=", TimeUnits::ZERO);
            }
        }
    }
    for k in 1..=kk {
        for f in 1..=ff {
            let mut t = vec![(one(), z(k, f))];
            t.extend(inst.depots.iter().map(|&d| (-one(), y(k, f, d))));
            w.row(5, format!("c5_{k}_{f}"), &t, "=", TimeUnits::ZERO);
        }
    }
    for k in 1..=kk {
        let mut t = route_time(k);
        t.push((-one(), "beta".to_string()));
        w.row(6, format!("c6_{k}"), &t, "<=", TimeUnits::ZERO);
    }
    for k in 1..=kk {
        for f in 1..=ff {
            let t: Vec<_> = arcs.iter().map(|&(i, j, c)| (c, x(k, f, i, j))).collect();
            w.row(7, format!("c7_{k}_{f}"), &t, "<=", inst.capacity);
        }
    }
    for k in 1..=kk {
        for f in 1..=ff {
            let t: Vec<_> = arcs
                .iter()
                .map(|&(i, j, _)| {
                    let c = i64::from(inst.is_depot(i)) - i64::from(inst.is_depot(j));
                    (units(c), x(k, f, i, j))
                })
                .collect();
            w.row(8, format!("c8_{k}_{f}"), &t, "=", TimeUnits::ZERO);
        }
    }
    for k in 1..=kk {
        for f in 1..=ff {
            for &n in &free {
                let mut t: Vec<_> = arcs.iter().filter(|a| a.0 == n).map(|&(i, j, _)| (one(), x(k, f, i, j))).collect();
                t.extend(arcs.iter().filter(|a| a.1 == n).map(|&(i, j, _)| (-one(), x(k, f, i, j))));
                w.row(9, format!("c9_{k}_{f}_{n}"), &t, "=", TimeUnits::ZERO);
            }
        }
    }
    for &(u, v) in &inst.required {
        let t: Vec<_> = (1..=kk)
            .flat_map(|k| (1..=ff).flat_map(move |f| [(one(), x(k, f, u, v)), (one(), x(k, f, v, u))]))
            .collect();
        w.row(10, format!("c10_{u}_{v}"), &t, ">=", one());
    }
    for k in 1..=kk {
        for f in 1..=ff {
            let mut t: Vec<_> = arcs.iter().map(|&(i, j, _)| (one(), x(k, f, i, j))).collect();
            t.push((-units(big_m as i64), z(k, f)));
            w.row(11, format!("c11_{k}_{f}"), &t, "<=", TimeUnits::ZERO);
        }
    }
    for mask in 1u32..(1u32 << free.len()) {
        let in_s = |n: NodeId| free.iter().position(|&m| m == n).is_some_and(|p| mask & (1 << p) != 0);
        let inner: Vec<_> = arcs.iter().filter(|a| in_s(a.0) && in_s(a.1)).collect();
        if inner.is_empty() {
            continue;
        }
        let cut: Vec<_> = arcs.iter().filter(|a| in_s(a.0) != in_s(a.1)).collect();
        for k in 1..=kk {
            for f in 1..=ff {
                for &&(p, q, _) in &inner {
                    let mut t: Vec<_> = cut.iter().map(|&&(i, j, _)| (one(), x(k, f, i, j))).collect();
                    t.push((-units(2), x(k, f, p, q)));
                    w.row(12, format!("c12_{k}_{f}_s{mask}_{p}_{q}"), &t, ">=", TimeUnits::ZERO);
                }
            }
        }
    }
    if let Some(s) = scenario {
        for (&v, &f_k) in &s.failures {
            let k = v + 1;
            w.row(13, format!("c13_{k}"), &route_time(k), "<=", f_k);
        }
    }

    w.out.push_str("Bounds\n beta >= 0\nBinary\n");
    let mut names = Vec::new();
    for k in 1..=kk {
        for f in 1..=ff {
            names.extend(arcs.iter().map(|&(i, j, _)| x(k, f, i, j)));
            names.extend(inst.depots.iter().map(|&d| y(k, f, d)));
            names.push(z(k, f));
        }
    }
    for chunk in names.chunks(8) {
        let _ = writeln!(w.out, " {}", chunk.join(" "));
    }
    w.model.binaries = names.len();
    w.out.push_str("End\n");
    w.model.text = w.out;
    Ok(w.model)
}
