//! Python bindings for `gibbs_info`.

use std::path::PathBuf;

use gibbs_info::asymptotics::{fit_limit_tail, verify_claims, DEFAULT_CLAIM_TOL, DEFAULT_TAIL_WINDOW};
use gibbs_info::bounds::{
    bound_gamma_over_2n, bound_subgaussian, bound_theorem6, compare_bounds, BoundParams,
    BoundSettings,
};
use gibbs_info::engine::{DiscreteEngine, TypeClass};
use gibbs_info::gaussian::{
    gaussian_closed_forms, gaussian_joint_covariance, gaussian_skl_trace, jensen_gap_coefficients,
    GaussianProblem,
};
use gibbs_info::mc::{estimate_gen_mc, GaussianMeanProblem, GridConfig};
use gibbs_info::{Error, GibbsParams, ProblemSpec};
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

pyo3::create_exception!(pygibbs, BoundViolation, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Resource { .. } => PyMemoryError::new_err(e.to_string()),
        Error::BoundViolation { .. } => BoundViolation::new_err(e.to_string()),
        Error::Coverage { .. } | Error::NotPositiveDefinite { .. } | Error::Io(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn params(gamma: f64, n: usize) -> PyResult<GibbsParams> {
    GibbsParams::new(gamma, n).map_err(to_py)
}

/// Information measures in nats plus the expected generalization error.
#[pyclass(frozen, skip_from_py_object, module = "pygibbs")]
#[derive(Clone, Copy)]
struct InfoReport {
    #[pyo3(get)]
    n: usize,
    #[pyo3(get)]
    gamma: f64,
    #[pyo3(get)]
    mutual: f64,
    #[pyo3(get)]
    lautum: f64,
    #[pyo3(get)]
    skl: f64,
    #[pyo3(get)]
    chi2: f64,
    #[pyo3(get)]
    gen: f64,
}

impl From<gibbs_info::InfoReport> for InfoReport {
    fn from(r: gibbs_info::InfoReport) -> Self {
        Self {
            n: r.n,
            gamma: r.gamma,
            mutual: r.mutual,
            lautum: r.lautum,
            skl: r.skl,
            chi2: r.chi2,
            gen: r.gen,
        }
    }
}

#[pymethods]
impl InfoReport {
    fn __repr__(&self) -> String {
        format!(
            "InfoReport(n={}, gamma={}, mutual={}, lautum={}, skl={}, chi2={}, gen={})",
            self.n, self.gamma, self.mutual, self.lautum, self.skl, self.chi2, self.gen
        )
    }
}

/// Finite learning problem: loss table, prior over hypotheses, data distribution.
#[pyclass(frozen, module = "pygibbs")]
struct DiscreteProblem {
    inner: gibbs_info::DiscreteProblem,
}

#[pymethods]
impl DiscreteProblem {
    #[new]
    fn new(
        hypotheses: Vec<String>,
        instances: Vec<String>,
        loss: Vec<Vec<f64>>,
        prior: Vec<f64>,
        mu: Vec<f64>,
    ) -> PyResult<Self> {
        let spec = ProblemSpec {
            hypotheses,
            instances,
            loss,
            prior,
            mu,
        };
        let inner = gibbs_info::DiscreteProblem::new(spec).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (p = 0.5))]
    fn coin_toss(p: f64) -> PyResult<Self> {
        let inner = gibbs_info::DiscreteProblem::coin_toss(p).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn random(seed: u64, num_hypotheses: usize, num_instances: usize) -> PyResult<Self> {
        let inner =
            gibbs_info::DiscreteProblem::random(seed, num_hypotheses, num_instances).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Loads a TOML or JSON problem file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = gibbs_info::cli::load_problem(&path).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn num_hypotheses(&self) -> usize {
        self.inner.num_hypotheses()
    }

    #[getter]
    fn num_instances(&self) -> usize {
        self.inner.num_instances()
    }

    #[getter]
    fn loss(&self) -> Vec<Vec<f64>> {
        self.inner.spec().loss.clone()
    }

    #[getter]
    fn prior(&self) -> Vec<f64> {
        self.inner.prior().values().to_vec()
    }

    #[getter]
    fn mu(&self) -> Vec<f64> {
        self.inner.mu().values().to_vec()
    }

    /// Posterior over hypotheses for a dataset given by its label counts.
    fn gibbs_posterior(&self, gamma: f64, counts: Vec<u32>) -> PyResult<Vec<f64>> {
        let t = TypeClass::from_counts(counts);
        let engine = DiscreteEngine::new(&self.inner);
        let post = engine.gibbs_posterior(params(gamma, t.n().max(1))?, &t).map_err(to_py)?;
        Ok(post.values().to_vec())
    }

    fn limiting_posterior(&self, gamma: f64) -> PyResult<Vec<f64>> {
        let lim = DiscreteEngine::new(&self.inner)
            .limiting_posterior(gamma)
            .map_err(to_py)?;
        Ok(lim.dist.values().to_vec())
    }

    /// Measures between the hypothesis and the whole dataset.
    fn joint_measures(&self, py: Python<'_>, gamma: f64, n: usize) -> PyResult<InfoReport> {
        let p = params(gamma, n)?;
        let r = py.detach(|| DiscreteEngine::new(&self.inner).joint_measures(p));
        r.map(Into::into).map_err(to_py)
    }

    /// Measures between the hypothesis and a single sample.
    fn individual_measures(&self, py: Python<'_>, gamma: f64, n: usize) -> PyResult<InfoReport> {
        let p = params(gamma, n)?;
        let r = py.detach(|| DiscreteEngine::new(&self.inner).individual_measures(p));
        r.map(Into::into).map_err(to_py)
    }

    /// `gap[w][z]`
    fn jensen_gap_table(&self, gamma: f64, n: usize) -> PyResult<Vec<Vec<f64>>> {
        let t = DiscreteEngine::new(&self.inner)
            .jensen_gap_table(params(gamma, n)?)
            .map_err(to_py)?;
        Ok(t.gap)
    }

    /// Residual of the exact gap identity.
    fn verify_theorem1(&self, gamma: f64, n: usize) -> PyResult<f64> {
        DiscreteEngine::new(&self.inner)
            .verify_theorem1(params(gamma, n)?)
            .map_err(to_py)
    }

    fn asymptotic_constant(&self, gamma: f64) -> PyResult<f64> {
        DiscreteEngine::new(&self.inner)
            .asymptotic_constant(gamma)
            .map_err(to_py)
    }

    /// Claim name -> (status, measured, target).
    #[pyo3(signature = (gamma, n_list, tol = DEFAULT_CLAIM_TOL))]
    fn verify_claims<'py>(
        &self,
        py: Python<'py>,
        gamma: f64,
        n_list: Vec<usize>,
        tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let report = py
            .detach(|| verify_claims(&self.inner, gamma, &n_list, tol))
            .map_err(to_py)?;
        let out = PyDict::new(py);
        for c in &report.claims {
            let status = match c.status {
                gibbs_info::asymptotics::ClaimStatus::Pass => "pass",
                gibbs_info::asymptotics::ClaimStatus::Fail => "fail",
                gibbs_info::asymptotics::ClaimStatus::Indeterminate => "indeterminate",
            };
            out.set_item(c.name, (status, c.measured, c.target))?;
        }
        Ok(out)
    }

    /// One dict per n with the exact gen and each bound.
    #[pyo3(signature = (gamma, n_list, delta = 0.5, sigma = None, ce = 0.0))]
    fn compare_bounds<'py>(
        &self,
        py: Python<'py>,
        gamma: f64,
        n_list: Vec<usize>,
        delta: f64,
        sigma: Option<f64>,
        ce: f64,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let settings = BoundSettings { delta, sigma, ce };
        let cmp = compare_bounds(&self.inner, gamma, &n_list, settings).map_err(to_py)?;
        cmp.rows
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("n", r.n)?;
                d.set_item("gen", r.gen)?;
                d.set_item("gamma_over_2n", r.gamma_over_2n)?;
                d.set_item("theorem6", r.theorem6)?;
                d.set_item("subgaussian", r.subgaussian)?;
                d.set_item("theorem6_holds", r.theorem6_holds)?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "DiscreteProblem(num_hypotheses={}, num_instances={})",
            self.inner.num_hypotheses(),
            self.inner.num_instances()
        )
    }
}

/// Closed-form measures of the Gaussian mean-estimation example.
#[pyfunction]
fn gaussian_report<'py>(py: Python<'py>, beta: f64, gamma: f64, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let p = GaussianProblem::new(beta, gamma, n).map_err(to_py)?;
    let r = gaussian_closed_forms(&p);
    let c = jensen_gap_coefficients(&p);
    let d = PyDict::new(py);
    d.set_item("skl_joint", r.skl_joint)?;
    d.set_item("skl_individual", r.skl_individual)?;
    d.set_item("mutual_joint", r.mutual_joint)?;
    d.set_item("mutual_individual", r.mutual_individual)?;
    d.set_item("gap", r.gap)?;
    d.set_item("gen", r.gen)?;
    d.set_item("jensen_gap_coefficients", (c.constant, c.w2, c.wz, c.z2))?;
    Ok(d)
}

/// `(joint, individual)` symmetrized KL information from the covariance trace.
#[pyfunction]
fn gaussian_trace(beta: f64, gamma: f64, n: usize) -> PyResult<(f64, f64)> {
    let p = GaussianProblem::new(beta, gamma, n).map_err(to_py)?;
    let cov = gaussian_joint_covariance(&p).map_err(to_py)?;
    let pair = cov.marginal(&[0, 1], 1).map_err(to_py)?;
    Ok((
        gaussian_skl_trace(&cov).map_err(to_py)?,
        gaussian_skl_trace(&pair).map_err(to_py)?,
    ))
}

/// Extrapolated limit of `n^power * a_n`; returns (limit, correction, slope).
#[pyfunction]
#[pyo3(signature = (ns, values, power = 1.0, window = DEFAULT_TAIL_WINDOW))]
fn fit_limit(ns: Vec<usize>, values: Vec<f64>, power: f64, window: usize) -> PyResult<(f64, f64, f64)> {
    if ns.len() != values.len() {
        return Err(PyValueError::new_err("ns and values differ in length"));
    }
    let seq: Vec<(usize, f64)> = ns.into_iter().zip(values).collect();
    let fit = fit_limit_tail(&seq, power, window).map_err(to_py)?;
    Ok((fit.limit_estimate, fit.correction, fit.slope_estimate))
}

#[pyfunction]
fn gamma_over_2n(gamma: f64, n: usize) -> f64 {
    bound_gamma_over_2n(gamma, n)
}

#[pyfunction]
#[pyo3(signature = (gamma, n, delta = 0.5, loss_lower = 0.0, loss_upper = 1.0))]
fn theorem6_bound(gamma: f64, n: usize, delta: f64, loss_lower: f64, loss_upper: f64) -> PyResult<f64> {
    let sigma = 0.5 * (loss_upper - loss_lower);
    let p = BoundParams::new(loss_lower, loss_upper, sigma, 0.0, delta, gamma, n).map_err(to_py)?;
    bound_theorem6(&p).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (gamma, n, sigma, ce = 0.0))]
fn subgaussian_bound(gamma: f64, n: usize, sigma: f64, ce: f64) -> PyResult<f64> {
    let p = BoundParams::new(0.0, 0.0, sigma, ce, 0.5, gamma, n).map_err(to_py)?;
    Ok(bound_subgaussian(&p))
}

/// Monte-Carlo gen for the Gaussian example; returns (estimate, std_error).
#[pyfunction]
#[pyo3(signature = (beta, gamma, n, num_datasets, seed, grid_points = 2048))]
fn estimate_gaussian_gen(
    py: Python<'_>,
    beta: f64,
    gamma: f64,
    n: usize,
    num_datasets: usize,
    seed: u64,
    grid_points: usize,
) -> PyResult<(f64, f64)> {
    let problem = GaussianMeanProblem::new(beta).map_err(to_py)?;
    let config = GridConfig {
        points: grid_points,
        ..GridConfig::default()
    };
    let est = py
        .detach(|| estimate_gen_mc(&problem, gamma, n, num_datasets, seed, &config))
        .map_err(to_py)?;
    Ok((est.value, est.std_error))
}

#[pymodule]
fn pygibbs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<DiscreteProblem>()?;
    m.add_class::<InfoReport>()?;
    m.add_function(wrap_pyfunction!(gaussian_report, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_trace, m)?)?;
    m.add_function(wrap_pyfunction!(fit_limit, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_over_2n, m)?)?;
    m.add_function(wrap_pyfunction!(theorem6_bound, m)?)?;
    m.add_function(wrap_pyfunction!(subgaussian_bound, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gaussian_gen, m)?)?;
    m.add("BoundViolation", m.py().get_type::<BoundViolation>())?;
    Ok(())
}
