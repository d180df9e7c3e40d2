//! Python bindings for `more_sched`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use more_sched::checks;
use more_sched::harness::{self, PipelineParams};
use more_sched::{
    BudgetAccounting, ChargerSpec, ExperimentConfig, ScenarioParams, SchedError, Scheme, Sweep,
};

fn py_err(e: SchedError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_scheme(name: &str) -> PyResult<Scheme> {
    name.parse::<Scheme>()
        .map_err(|_| PyValueError::new_err(format!("unknown scheme `{name}`")))
}

/// Charger model: `alpha / (d + beta)^2` within `range_d` metres.
#[pyclass(name = "ChargerSpec", module = "more_sched_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyChargerSpec {
    inner: ChargerSpec,
}

#[pymethods]
impl PyChargerSpec {
    #[new]
    #[pyo3(signature = (alpha = 100.0, beta = 10.0, range_d = 6.0, speed_v = 1.0))]
    fn new(alpha: f64, beta: f64, range_d: f64, speed_v: f64) -> PyResult<Self> {
        let defaults = ChargerSpec::default();
        let inner =
            ChargerSpec::new(alpha, beta, range_d, speed_v, defaults.depot).map_err(py_err)?;
        Ok(PyChargerSpec { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn range_d(&self) -> f64 {
        self.inner.range_d
    }

    #[getter]
    fn speed_v(&self) -> f64 {
        self.inner.speed_v
    }

    /// Received power (W) at distance `d` metres.
    fn power(&self, d: f64) -> PyResult<f64> {
        more_sched::model::power_at_distance(d, &self.inner).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ChargerSpec(alpha={}, beta={}, range_d={}, speed_v={})",
            self.inner.alpha, self.inner.beta, self.inner.range_d, self.inner.speed_v
        )
    }
}

/// A field of sensor nodes with deadlines.
#[pyclass(
    name = "Scenario",
    module = "more_sched_py",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
pub struct PyScenario {
    inner: more_sched::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Random scenario; fully determined by `seed`.
    #[staticmethod]
    #[pyo3(signature = (seed = 0, nodes = 40, plane = 50.0, charger = None))]
    fn generate(
        seed: u64,
        nodes: usize,
        plane: f64,
        charger: Option<PyChargerSpec>,
    ) -> PyResult<Self> {
        let params = ScenarioParams {
            plane_side: plane,
            node_count: nodes,
            charger: charger.map(|c| c.inner).unwrap_or_default(),
            seed,
            ..ScenarioParams::default()
        };
        let inner = harness::generate_scenario(&params).map_err(py_err)?;
        Ok(PyScenario { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = harness::scenario_from_json(text).map_err(py_err)?;
        Ok(PyScenario { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        harness::scenario_to_json(&self.inner).map_err(py_err)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.nodes.len()
    }

    #[getter]
    fn budget(&self) -> f64 {
        self.inner.budget_t
    }

    #[getter]
    fn plane_side(&self) -> f64 {
        self.inner.plane_side()
    }

    /// `(id, x, y, demand, deadline)` per node.
    fn nodes(&self) -> Vec<(u32, f64, f64, f64, f64)> {
        self.inner
            .nodes
            .iter()
            .map(|n| (n.id, n.position.x, n.position.y, n.demand, n.deadline))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.nodes.len()
    }
}

/// Largest cell side keeping the per-cell power error within `lambda`.
#[pyfunction]
#[pyo3(signature = (lambda_, beta = 10.0))]
fn max_side_for_error(lambda_: f64, beta: f64) -> PyResult<f64> {
    more_sched::discretize::max_side_for_error(lambda_, beta).map_err(py_err)
}

/// `min(q / demand, 1)`.
#[pyfunction]
fn utility(q: f64, demand: f64) -> PyResult<f64> {
    more_sched::model::utility(q, demand).map_err(py_err)
}

/// Runs one scheme on a scenario. Returns a dict with the result row, the
/// slot assignment (cell id or None per slot) and the final tour.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (scenario, scheme = "more", lambda_ = 0.15, dt = 30.0, sigma = None, seed = 0, travel_only = false))]
fn run_pipeline<'py>(
    py: Python<'py>,
    scenario: &PyScenario,
    scheme: &str,
    lambda_: f64,
    dt: f64,
    sigma: Option<f64>,
    seed: u64,
    travel_only: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let scheme = parse_scheme(scheme)?;
    let params = PipelineParams {
        lambda: lambda_,
        dt,
        sigma,
        accounting: if travel_only {
            BudgetAccounting::TravelOnly
        } else {
            BudgetAccounting::TravelAndDwell
        },
        prune: false,
    };
    let sc = &scenario.inner;
    let run = harness::run_pipeline_detailed(sc, &params, scheme, seed).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("scheme", scheme.name())?;
    out.set_item("delta", run.delta)?;
    out.set_item("gamma", run.gridmap.len())?;
    out.set_item("slots", run.slots.count)?;
    out.set_item("utility_morer", run.schedule.total_utility)?;
    out.set_item("utility_travel", run.evaluation.total_utility)?;
    out.set_item("stop_grids", run.planned_tour.stops.len())?;
    out.set_item("tour_len_m", run.tour.length)?;
    let ids: Vec<Option<usize>> = run
        .schedule
        .assignment
        .entries()
        .iter()
        .map(|e| e.map(|k| run.gridmap.cells[k].id))
        .collect();
    out.set_item("assignment", ids)?;
    out.set_item("per_node_utility", run.evaluation.per_node_utility.clone())?;
    let tour = serde_json::to_string(&run.tour.export(&sc.charger))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    out.set_item("tour_json", tour)?;
    Ok(out)
}

/// Sweeps `lambda` or `dt` over seeds and schemes and returns the per-run
/// CSV text.
#[pyfunction]
#[pyo3(signature = (sweep, values, seeds, schemes = vec!["more".to_string(), "edf".to_string(), "random".to_string()], threads = 1))]
fn run_sweep(
    py: Python<'_>,
    sweep: &str,
    values: Vec<f64>,
    seeds: Vec<u64>,
    schemes: Vec<String>,
    threads: usize,
) -> PyResult<String> {
    let sweep = match sweep {
        "lambda" => Sweep::Lambda(values),
        "dt" => Sweep::Dt(values),
        other => return Err(PyValueError::new_err(format!("unknown sweep `{other}`"))),
    };
    let config = ExperimentConfig {
        schemes: schemes
            .iter()
            .map(|s| parse_scheme(s))
            .collect::<PyResult<_>>()?,
        sweep,
        seeds,
        threads: threads.max(1),
        ..ExperimentConfig::default()
    };
    let output = py
        .detach(|| harness::run_experiment(&config))
        .map_err(py_err)?;
    let bytes = harness::to_csv(&output.records).map_err(py_err)?;
    String::from_utf8(bytes).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs the brute-force oracle suites; returns `(name, passed, detail)`.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn oracle_check(py: Python<'_>, seed: u64) -> PyResult<Vec<(String, bool, String)>> {
    let reports = py
        .detach(|| checks::run_all(seed, more_sched::oracle::EXHAUSTIVE_LIMIT))
        .map_err(py_err)?;
    Ok(reports
        .into_iter()
        .map(|r| (r.name.to_string(), r.passed(), r.detail.clone()))
        .collect())
}

#[pymodule]
pub fn more_sched_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChargerSpec>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(max_side_for_error, m)?)?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_check, m)?)?;
    Ok(())
}
