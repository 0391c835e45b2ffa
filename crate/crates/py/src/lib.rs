//! Python bindings. Times cross the boundary as floats and are converted
//! through their shortest decimal form, so `6.2` stays exactly 6.2.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rrv_core::exact::{emit_milp, exact_optimum, OracleLimits};
use rrv_core::failures::{create_failure_scenarios, FailureScenario};
use rrv_core::instance::parse_instance;
use rrv_core::metrics::{competitive_ratio, percent_increase};
use rrv_core::network::Network;
use rrv_core::planner::{generate_initial_plan, SaConfig};
use rrv_core::routing::{parse_plan, FleetPlan};
use rrv_core::simulator::{simulate as run_simulation, SimConfig, WaitTime};
use rrv_core::TimeUnits;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn time(x: f64) -> PyResult<TimeUnits> {
    format!("{x}").parse().map_err(err)
}

fn ratio_f64(r: num_rational::Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A parsed instance together with its shortest paths and depot route table.
#[pyclass(frozen)]
struct Instance {
    net: Network,
}

#[pymethods]
impl Instance {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Instance { net: Network::new(parse_instance(text).map_err(err)?) })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Self::from_text(&std::fs::read_to_string(path).map_err(err)?)
    }

    fn to_text(&self) -> String {
        self.net.inst.to_text()
    }

    #[getter]
    fn name(&self) -> String {
        self.net.inst.name.clone()
    }

    #[getter]
    fn vehicles(&self) -> usize {
        self.net.inst.vehicle_count
    }

    #[getter]
    fn capacity(&self) -> f64 {
        self.net.inst.capacity.as_units_f64()
    }

    #[getter]
    fn recharge(&self) -> f64 {
        self.net.inst.recharge.as_units_f64()
    }

    #[getter]
    fn depots(&self) -> Vec<usize> {
        self.net.inst.depots.clone()
    }

    #[getter]
    fn required(&self) -> Vec<(usize, usize)> {
        self.net.inst.required.clone()
    }

    /// Exact optimum, optionally with known failures `{vehicle: time}`
    /// (1-based vehicles). Raises when the instance is over the oracle limits.
    #[pyo3(signature = (failures=None))]
    fn exact_optimum(&self, failures: Option<BTreeMap<usize, f64>>) -> PyResult<f64> {
        let scenario = failures.map(|f| to_scenario("oracle", f)).transpose()?;
        let r = exact_optimum(&self.net, scenario.as_ref(), &OracleLimits::default()).map_err(err)?;
        Ok(r.beta.as_units_f64())
    }

    /// LP-format model text.
    fn emit_milp(&self) -> PyResult<String> {
        Ok(emit_milp(&self.net.inst, None).map_err(err)?.text)
    }
}

#[pyclass(frozen)]
struct Plan {
    plan: FleetPlan,
}

#[pymethods]
impl Plan {
    #[staticmethod]
    fn from_text(instance: &Instance, text: &str) -> PyResult<Self> {
        Ok(Plan { plan: parse_plan(&instance.net.inst, text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.plan.to_text()
    }

    #[getter]
    fn mission_time(&self) -> f64 {
        self.plan.mission_time().as_units_f64()
    }

    #[getter]
    fn completion_times(&self) -> Vec<f64> {
        self.plan.completion_times().iter().map(|t| t.as_units_f64()).collect()
    }

    /// Node lists of every trip, per vehicle.
    #[getter]
    fn routes(&self) -> Vec<Vec<Vec<usize>>> {
        self.plan.routes.iter().map(|r| r.trips().map(|t| t.nodes().to_vec()).collect()).collect()
    }
}

fn to_scenario(name: &str, failures: BTreeMap<usize, f64>) -> PyResult<FailureScenario> {
    let mut s = FailureScenario::new(name);
    for (v, f) in failures {
        if v == 0 {
            return Err(PyValueError::new_err("vehicle ids are 1-based"));
        }
        s.failures.insert(v - 1, time(f)?);
    }
    Ok(s)
}

/// Failure-free plan by simulated annealing.
#[pyfunction]
#[pyo3(signature = (instance, seed, restarts=None, iterations=None))]
fn plan(instance: &Instance, seed: u64, restarts: Option<usize>, iterations: Option<usize>) -> PyResult<Plan> {
    let d = SaConfig::with_seed(seed);
    let cfg = SaConfig {
        restarts: restarts.unwrap_or(d.restarts),
        iterations_per_temperature: iterations.unwrap_or(d.iterations_per_temperature),
        ..d
    };
    Ok(Plan { plan: generate_initial_plan(&instance.net, &cfg).map_err(err)?.plan })
}

/// Random failure scenarios as `(name, {vehicle: time})` pairs.
#[pyfunction]
fn failure_scenarios(instance: &Instance, plan: &Plan, seed: u64) -> PyResult<Vec<(String, BTreeMap<usize, f64>)>> {
    let scenarios = create_failure_scenarios(&instance.net.inst, &plan.plan, seed).map_err(err)?;
    Ok(scenarios
        .into_iter()
        .map(|s| (s.name, s.failures.into_iter().map(|(v, f)| (v + 1, f.as_units_f64())).collect()))
        .collect())
}

/// Simulates `plan` under the given failures; `wait` is a time or `"end"`.
#[pyfunction]
#[pyo3(signature = (instance, plan, failures, wait="0"))]
fn simulate<'py>(
    py: Python<'py>,
    instance: &Instance,
    plan: &Plan,
    failures: BTreeMap<usize, f64>,
    wait: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let wait: WaitTime = wait.parse().map_err(err)?;
    let s = to_scenario("python", failures)?;
    let r = run_simulation(&instance.net, &plan.plan, &s, SimConfig::new(&instance.net.inst, wait)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("beta_initial", r.beta_initial.as_units_f64())?;
    out.set_item("beta_ca", r.beta_ca.as_units_f64())?;
    out.set_item("auctions", r.auction_count())?;
    out.set_item("pool_trigger_events", r.pool_trigger_events)?;
    out.set_item("covered", r.covered)?;
    out.set_item("final_plan", Plan { plan: r.final_plan })?;
    Ok(out)
}

/// Percentage increase of `new` over `base`.
#[pyfunction(name = "percent_increase")]
fn py_percent_increase(base: f64, new: f64) -> PyResult<f64> {
    Ok(ratio_f64(percent_increase(time(base)?, time(new)?).map_err(err)?))
}

/// Online makespan over offline optimum.
#[pyfunction(name = "competitive_ratio")]
fn py_competitive_ratio(beta_ca: f64, beta_opt_f: f64) -> PyResult<f64> {
    Ok(ratio_f64(competitive_ratio(time(beta_ca)?, time(beta_opt_f)?).map_err(err)?))
}

#[pymodule]
fn rrv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Plan>()?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(failure_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(py_percent_increase, m)?)?;
    m.add_function(wrap_pyfunction!(py_competitive_ratio, m)?)?;
    Ok(())
}
