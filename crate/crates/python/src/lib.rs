//! Python bindings for `mri-lk`.
//!
//! Complex arrays cross the boundary as lists of Python `complex`; images are
//! flattened row-major (`row·p_hor + col`). Reports come back as JSON strings
//! or plain dicts.

use std::path::PathBuf;

use mri_lk::forward::{cone_probe, JointCone, LinearCone, ProductModel};
use mri_lk::phantom::{synthesize, Instance, InstanceSpec};
use mri_lk::solver::{run_joint, run_linear, IterationTrace, Method, SolverConfig};
use mri_lk::transform::DftPlan;
use mri_lk::{io, Complex64, ComplexImage, GridShape};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(mri_lk_py, MriError, PyException);

fn err(e: mri_lk::Error) -> PyErr {
    MriError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| MriError::new_err(e.to_string()))
}

/// A synthetic or loaded problem instance.
#[pyclass(name = "Instance", module = "mri_lk_py")]
struct PyInstance {
    inner: Instance,
}

#[pymethods]
impl PyInstance {
    /// Synthesizes an instance from a JSON spec (defaults when omitted).
    #[staticmethod]
    #[pyo3(signature = (spec_json = None))]
    fn generate(spec_json: Option<&str>) -> PyResult<Self> {
        let spec: InstanceSpec = match spec_json {
            Some(s) => serde_json::from_str(s).map_err(|e| MriError::new_err(format!("spec: {e}")))?,
            None => InstanceSpec::default(),
        };
        Ok(Self { inner: synthesize(&spec).map_err(err)? })
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: io::read_instance(&dir).map_err(err)? })
    }

    /// Writes the instance directory; returns the files written.
    fn save(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        std::fs::create_dir_all(&dir).map_err(|e| MriError::new_err(e.to_string()))?;
        io::write_instance(&self.inner, &dir).map_err(err)
    }

    /// `(p_hor, p_ver)`
    #[getter]
    fn shape(&self) -> (usize, usize) {
        let s = self.inner.shape();
        (s.p_hor(), s.p_ver())
    }

    #[getter]
    fn r_num(&self) -> usize {
        self.inner.r_num()
    }

    #[getter]
    fn noise_levels(&self) -> Vec<f64> {
        self.inner.noisy.noise_levels().to_vec()
    }

    #[getter]
    fn mask(&self) -> Vec<usize> {
        self.inner.mask.indices().to_vec()
    }

    #[getter]
    fn truth(&self) -> Vec<Complex64> {
        self.inner.truth.image.values().to_vec()
    }

    #[getter]
    fn initial_image(&self) -> Vec<Complex64> {
        self.inner.truth.initial_image.values().to_vec()
    }

    #[getter]
    fn coefficients(&self) -> Vec<Vec<Complex64>> {
        self.inner.truth.coefficients.clone()
    }

    #[pyo3(signature = (receiver, noisy = true))]
    fn measurements(&self, receiver: usize, noisy: bool) -> PyResult<Vec<Complex64>> {
        let set = if noisy {
            self.inner.noisy.clone()
        } else {
            self.inner.exact_data().map_err(err)?
        };
        set.data()
            .get(receiver)
            .map(|m| m.values().to_vec())
            .ok_or_else(|| MriError::new_err(format!("no receiver {receiver}")))
    }

    /// Runs lLK (`"llk"`) or lSDK (`"lsdk"`) on the image problem, or on the
    /// joint problem when `joint` is set. lLK rescales the operators first.
    #[pyo3(signature = (method = "lsdk", tau = None, max_cycles = None, joint = false, start_at_truth = false))]
    fn reconstruct<'py>(
        &self,
        py: Python<'py>,
        method: &str,
        tau: Option<f64>,
        max_cycles: Option<usize>,
        joint: bool,
        start_at_truth: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let method: Method = method.parse().map_err(err)?;
        let mut cfg = SolverConfig::new(method);
        if let Some(t) = tau {
            cfg.tau = t;
        }
        if let Some(m) = max_cycles {
            cfg.max_cycles = m;
        }
        let inst = &self.inner;
        let out = PyDict::new(py);
        let (trace, residuals) = if joint {
            let problem = inst.joint_problem().map_err(err)?;
            let truth = inst.truth.joint_solution();
            let start = if start_at_truth { truth.clone() } else { inst.truth.joint_initial() };
            let res = py.detach(|| run_joint(&problem, &cfg, start, Some(&truth))).map_err(err)?;
            out.set_item("solution", res.solution.image.values().to_vec())?;
            out.set_item("coefficients", res.solution.coefficients.clone())?;
            out.set_item("termination", json(&res.termination)?.trim_matches('"'))?;
            out.set_item("experimental", res.experimental)?;
            (res.trace, problem.residual_norms(&res.solution).map_err(err)?)
        } else {
            let mut problem = inst.linear_problem().map_err(err)?;
            if method == Method::Landweber {
                let report = problem.rescale_to_unit().map_err(err)?;
                out.set_item("scaling_factors", report.factors)?;
            }
            let truth = &inst.truth.image;
            let start = if start_at_truth { truth.clone() } else { inst.truth.initial_image.clone() };
            let res = py.detach(|| run_linear(&problem, &cfg, start, Some(truth))).map_err(err)?;
            out.set_item("solution", res.solution.values().to_vec())?;
            out.set_item("termination", json(&res.termination)?.trim_matches('"'))?;
            out.set_item("experimental", res.experimental)?;
            (res.trace, problem.residual_norms(&res.solution).map_err(err)?)
        };
        out.set_item("stopping_index", trace.stopping_index)?;
        out.set_item("steps", trace.records.len())?;
        out.set_item("final_error", trace.final_error)?;
        out.set_item("residuals", residuals)?;
        out.set_item("thresholds", inst.noisy.noise_levels().iter().map(|d| cfg.tau * d).collect::<Vec<_>>())?;
        out.set_item("trace", trace_rows(&trace))?;
        Ok(out)
    }

    /// Cone-condition probe around the exact solution; returns a JSON list
    /// with one report per receiver.
    #[pyo3(signature = (samples = 1000, radius = 0.1, seed = 0, joint = false))]
    fn probe_cone(&self, samples: usize, radius: f64, seed: u64, joint: bool) -> PyResult<String> {
        let mut reports = Vec::new();
        if joint {
            let center = self.inner.truth.joint_solution().to_flat();
            for op in self.inner.joint_ops().map_err(err)? {
                reports.push(cone_probe(&JointCone::new(&op), &center, radius, samples, seed).map_err(err)?);
            }
        } else {
            let center = self.inner.truth.image.values().to_vec();
            for op in self.inner.linear_ops().map_err(err)? {
                reports.push(cone_probe(&LinearCone(&op), &center, radius, samples, seed).map_err(err)?);
            }
        }
        reports.iter_mut().for_each(|r| r.pairs.clear());
        json(&reports)
    }

    fn __repr__(&self) -> String {
        let (h, v) = self.shape();
        format!("Instance({h}x{v}, r_num={}, sampled={})", self.r_num(), self.inner.mask.indices().len())
    }
}

type TraceRow = (usize, usize, u8, f64, f64, Option<f64>);

/// `(k, receiver, omega, alpha, residual, error_to_truth)` per step.
fn trace_rows(trace: &IterationTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| (r.k, r.receiver, r.omega, r.alpha, r.residual, r.error))
        .collect()
}

fn plan_for(values: &[Complex64]) -> PyResult<(DftPlan, ComplexImage)> {
    let shape = GridShape::new(values.len().max(1), 1).map_err(err)?;
    let plan = DftPlan::auto(values.len()).map_err(err)?;
    let image = ComplexImage::new(shape, values.to_vec()).map_err(err)?;
    Ok((plan, image))
}

/// Unnormalized DFT `Σₙ f[n] exp(−2πi kn/p)`.
#[pyfunction]
fn dft(py: Python<'_>, values: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let (plan, image) = plan_for(&values)?;
    py.detach(|| plan.forward(&image)).map(|g| g.values().to_vec()).map_err(err)
}

/// Inverse DFT (`ℱ*/p`).
#[pyfunction]
fn idft(py: Python<'_>, values: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let (plan, image) = plan_for(&values)?;
    py.detach(|| plan.inverse(&image)).map(|g| g.values().to_vec()).map_err(err)
}

/// Cone probe of the scalar model `f(x, y) = xy` around the origin (JSON).
#[pyfunction]
#[pyo3(signature = (samples = 1000, radius = 0.1, seed = 0))]
fn probe_scalar_cone(samples: usize, radius: f64, seed: u64) -> PyResult<String> {
    let origin = [Complex64::new(0.0, 0.0); 2];
    let mut report = cone_probe(&ProductModel, &origin, radius, samples, seed).map_err(err)?;
    report.pairs.clear();
    json(&report)
}

#[pymodule]
fn mri_lk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MriError", m.py().get_type::<MriError>())?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(idft, m)?)?;
    m.add_function(wrap_pyfunction!(probe_scalar_cone, m)?)?;
    Ok(())
}
