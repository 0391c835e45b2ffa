//! Percent increases, competitive ratios, the worst-case ratio bound and the
//! per-scenario report table.
//!
//! All arithmetic is exact on millisecond counts; values are only rounded
//! (half away from zero, two decimals) when displayed.

use std::fmt;

use num_rational::Ratio;

use crate::depot_routes::DepotRouteTable;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::routing::FleetPlan;
use crate::time::TimeUnits;

pub type Exact = Ratio<i64>;

/// Renders `r` with exactly two decimals, rounding halves away from zero.
pub fn format2(r: Exact) -> String {
    let hundredths = (r * Exact::from_integer(100)).round().to_integer();
    let sign = if hundredths < 0 { "-" } else { "" };
    let a = hundredths.unsigned_abs();
    format!("{sign}{}.{:02}", a / 100, a % 100)
}

/// `(new - base) / base * 100`.
pub fn percent_increase(base: TimeUnits, new: TimeUnits) -> Result<Exact> {
    if base.millis() <= 0 {
        return Err(Error::ZeroDenominator("percent increase over a non-positive base"));
    }
    Ok(Exact::new((new - base).millis() * 100, base.millis()))
}

/// `beta_ca / beta_opt_f`.
pub fn competitive_ratio(beta_ca: TimeUnits, beta_opt_f: TimeUnits) -> Result<Exact> {
    if beta_opt_f.millis() <= 0 {
        return Err(Error::ZeroDenominator("competitive ratio over a non-positive optimum"));
    }
    Ok(Exact::new(beta_ca.millis(), beta_opt_f.millis()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundInputs {
    /// Trip count of the most utilized vehicle in the failure-free plan.
    pub n_trips_mu: usize,
    pub vehicles: usize,
    pub capacity: TimeUnits,
    pub recharge: TimeUnits,
    pub beta_opt_f: TimeUnits,
}

impl BoundInputs {
    /// Worst-case extra time per reassigned trip.
    pub fn t_plus(&self) -> TimeUnits {
        (self.capacity + self.recharge) * 3
    }

    /// Worst-case number of reassigned trips.
    pub fn n_fail(&self) -> usize {
        self.n_trips_mu * self.vehicles.saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Value(Exact),
    NotApplicable(String),
}

impl Bound {
    pub fn value(&self) -> Option<Exact> {
        match self {
            Bound::Value(v) => Some(*v),
            Bound::NotApplicable(_) => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Value(v) => f.write_str(&format2(*v)),
            Bound::NotApplicable(_) => f.write_str("n/a"),
        }
    }
}

/// `1 + N_t (K - 1) 3 (C + R_T) / beta_opt_f`. The depot precondition is
/// checked by [`scenario_bound`]; this only guards the arithmetic.
pub fn theoretical_bound(b: &BoundInputs) -> Bound {
    if b.n_trips_mu == 0 {
        return Bound::NotApplicable("most utilized vehicle has no trips".into());
    }
    if b.beta_opt_f.millis() <= 0 {
        return Bound::NotApplicable("non-positive optimum".into());
    }
    let num = b.n_fail() as i64 * b.t_plus().millis();
    Bound::Value(Exact::from_integer(1) + Exact::new(num, b.beta_opt_f.millis()))
}

/// Vehicle with the largest failure-free completion time (lowest index on
/// ties) and its trip count.
pub fn most_utilized_vehicle(plan: &FleetPlan, recharge: TimeUnits) -> (usize, usize) {
    let k = (0..plan.routes.len())
        .max_by_key(|&k| (plan.routes[k].route_time(recharge), std::cmp::Reverse(k)))
        .unwrap_or(0);
    (k, plan.routes.get(k).map_or(0, |r| r.len()))
}

/// The bound for one scenario, from the failure-free plan and the offline
/// optimum with known failures. Not applicable unless every depot pair is
/// joined by a single feasible trip.
pub fn scenario_bound(
    inst: &Instance,
    table: &DepotRouteTable,
    failure_free: &FleetPlan,
    beta_opt_f: TimeUnits,
) -> Bound {
    if !table.is_single_trip_complete() {
        return Bound::NotApplicable("depot graph is not single-trip complete".into());
    }
    let (_, n_t) = most_utilized_vehicle(failure_free, inst.recharge);
    theoretical_bound(&BoundInputs {
        n_trips_mu: n_t,
        vehicles: inst.vehicle_count,
        capacity: inst.capacity,
        recharge: inst.recharge,
        beta_opt_f,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InstanceStats {
    pub nodes: usize,
    pub edges: usize,
    pub required: usize,
    pub capacity: TimeUnits,
    pub recharge: TimeUnits,
    pub vehicles: usize,
    pub depots: usize,
}

impl InstanceStats {
    pub fn of(inst: &Instance) -> Self {
        InstanceStats {
            nodes: inst.graph.node_count(),
            edges: inst.graph.edges().len(),
            required: inst.required.len(),
            capacity: inst.capacity,
            recharge: inst.recharge,
            vehicles: inst.vehicle_count,
            depots: inst.depots.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    pub opt: Option<f64>,
    pub opt_f: Option<f64>,
    pub sa: Option<f64>,
    pub ca: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMetrics {
    pub scenario: String,
    pub stats: InstanceStats,
    pub failures: usize,
    pub beta_opt: Option<TimeUnits>,
    pub beta_opt_f: Option<TimeUnits>,
    pub beta_sa: Option<TimeUnits>,
    pub beta_ca: Option<TimeUnits>,
    pub rho_bound: Option<Bound>,
    /// Wall-clock seconds per stage.
    pub times: StageTimes,
}

impl ScenarioMetrics {
    pub fn new(scenario: impl Into<String>, stats: InstanceStats, failures: usize) -> Self {
        ScenarioMetrics {
            scenario: scenario.into(),
            stats,
            failures,
            beta_opt: None,
            beta_opt_f: None,
            beta_sa: None,
            beta_ca: None,
            rho_bound: None,
            times: StageTimes::default(),
        }
    }

    pub fn pct_opt_f(&self) -> Option<Exact> {
        percent_increase(self.beta_opt?, self.beta_opt_f?).ok()
    }

    pub fn pct_ca(&self) -> Option<Exact> {
        percent_increase(self.beta_opt?, self.beta_ca?).ok()
    }

    pub fn rho(&self) -> Option<Exact> {
        competitive_ratio(self.beta_ca?, self.beta_opt_f?).ok()
    }
}

pub const REPORT_HEADER: &str = "scenario,|N|,|E|,|E_u|,C,R_T,K,|N_d|,|F|,beta_opt,et_opt,beta_opt_f,pct_opt_f,et_opt_f,beta_sa,et_sa,beta_ca,pct_ca,rho,rho_bound,et_ca";

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map_or_else(|| "-".to_string(), f)
}

/// CSV table, one line per row. Execution times are printed only when
/// `timings` is set, so that untimed reports are reproducible byte for byte.
pub fn report(rows: &[ScenarioMetrics], timings: bool) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    let secs = |t: Option<f64>| if timings { opt(t, |s| format!("{s:.2}")) } else { "-".into() };
    for r in rows {
        let s = &r.stats;
        let cells = [
            r.scenario.clone(),
            s.nodes.to_string(),
            s.edges.to_string(),
            s.required.to_string(),
            s.capacity.to_string(),
            s.recharge.to_string(),
            s.vehicles.to_string(),
            s.depots.to_string(),
            r.failures.to_string(),
            opt(r.beta_opt, |b| b.to_string()),
            secs(r.times.opt),
            opt(r.beta_opt_f, |b| b.to_string()),
            opt(r.pct_opt_f(), format2),
            secs(r.times.opt_f),
            opt(r.beta_sa, |b| b.to_string()),
            secs(r.times.sa),
            opt(r.beta_ca, |b| b.to_string()),
            opt(r.pct_ca(), format2),
            opt(r.rho(), format2),
            opt(r.rho_bound.as_ref().and_then(Bound::value), format2),
            secs(r.times.ca),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: i64) -> TimeUnits {
        TimeUnits::from_units(n)
    }

    #[test]
    fn published_examples() {
        assert_eq!(format2(percent_increase(u(148), u(364)).unwrap()), "145.95");
        assert_eq!(format2(percent_increase(u(148), u(251)).unwrap()), "69.59");
        assert_eq!(format2(percent_increase(u(7), u(7)).unwrap()), "0.00");
        assert_eq!(format2(competitive_ratio(u(364), u(251)).unwrap()), "1.45");
        assert_eq!(format2(competitive_ratio(u(485), u(48)).unwrap()), "10.10");
        assert_eq!(format2(competitive_ratio(u(9), u(9)).unwrap()), "1.00");
    }

    #[test]
    fn zero_denominators() {
        assert!(percent_increase(TimeUnits::ZERO, u(1)).is_err());
        assert!(competitive_ratio(u(1), TimeUnits::ZERO).is_err());
    }

    #[test]
    fn halves_round_away_from_zero() {
        assert_eq!(format2(Exact::new(1, 200)), "0.01");
        assert_eq!(format2(Exact::new(-1, 200)), "-0.01");
        assert_eq!(format2(Exact::new(1, 201)), "0.00");
        assert_eq!(format2(Exact::new(-3, 2)), "-1.50");
    }

    #[test]
    fn bound_substitution() {
        let b = BoundInputs { n_trips_mu: 2, vehicles: 3, capacity: u(10), recharge: u(20), beta_opt_f: u(100) };
        assert_eq!(theoretical_bound(&b), Bound::Value(Exact::new(23, 5)));
        let single = BoundInputs { vehicles: 1, ..b };
        assert_eq!(theoretical_bound(&single), Bound::Value(Exact::from_integer(1)));
        assert!(matches!(theoretical_bound(&BoundInputs { n_trips_mu: 0, ..b }), Bound::NotApplicable(_)));
    }

    #[test]
    fn report_shapes() {
        assert_eq!(report(&[], false), format!("{REPORT_HEADER}\n"));
        let mut row = ScenarioMetrics::new("a", InstanceStats::default(), 1);
        row.beta_opt = Some(u(148));
        row.beta_ca = Some(u(364));
        row.times.ca = Some(1.234);
        let rows = vec![row.clone(), row.clone(), row];
        let text = report(&rows, false);
        assert_eq!(text.lines().count(), 4);
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line.split(',').count(), REPORT_HEADER.split(',').count());
        assert!(line.contains(",364,145.95,-,-,-"), "{line}");
        assert!(report(&rows, true).lines().nth(1).unwrap().ends_with(",1.23"));
    }
}
