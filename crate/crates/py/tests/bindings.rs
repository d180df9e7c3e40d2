use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn with_module<R>(f: impl FnOnce(Python<'_>, &Bound<'_, PyModule>) -> PyResult<R>) -> R {
    Python::attach(|py| {
        let m = wrap_pymodule!(more_sched_py::more_sched_py)(py);
        f(py, m.bind(py)).expect("python call")
    })
}

#[test]
fn scalar_helpers() {
    with_module(|_, m| {
        let u: f64 = m.getattr("utility")?.call1((30.0, 60.0))?.extract()?;
        assert_eq!(u, 0.5);
        let d: f64 = m.getattr("max_side_for_error")?.call1((0.75,))?.extract()?;
        assert!((d - 7.0710678118654755).abs() < 1e-12);
        assert!(m.getattr("utility")?.call1((1.0, 0.0)).is_err());
        Ok(())
    });
}

#[test]
fn pipeline_round_trip() {
    with_module(|py, m| {
        let scenario =
            m.getattr("Scenario")?
                .call_method("generate", (5u64, 10usize, 25.0), None)?;
        let kwargs = PyDict::new(py);
        kwargs.set_item("scheme", "more")?;
        let out = m
            .getattr("run_pipeline")?
            .call((scenario,), Some(&kwargs))?;
        let morer: f64 = out.get_item("utility_morer")?.extract()?;
        let travel: f64 = out.get_item("utility_travel")?.extract()?;
        assert!(travel <= morer + 1e-9);
        assert!(morer > 0.0);
        assert!(m
            .getattr("run_pipeline")?
            .call((out.get_item("scheme")?,), None)
            .is_err());
        Ok(())
    });
}
