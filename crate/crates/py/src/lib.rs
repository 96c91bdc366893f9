//! Python bindings. Scalars cross the boundary as rational strings (`"3/4"`);
//! inputs accept anything whose `str()` parses as a rational, including
//! `int`, `fractions.Fraction` and decimal `float`s.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::{json, Value};

use gmnf_core::bp::{self, BeliefConvention, BpConfig, BpResult, MessageInit, Stopping, TieRule};
use gmnf_core::certify::{certify, CertifyStatus, MAX_CERTIFY_ITERATIONS};
use gmnf_core::generate::{generate_instance, CoefficientMode, GeneratorConfig};
use gmnf_core::io::{instance_from_json, instance_to_json};
use gmnf_core::oracle::{solve_exact, OracleResult, OracleStatus};
use gmnf_core::residual::{build_residual, cost_profile};
use gmnf_core::scalar::{format_rational, parse_rational};
use gmnf_core::tree::{check_tree_agreement, check_tree_agreement_all};
use gmnf_core::{ConvexPwl, Error, GmnfInstance, Rational, Scalar, SizeCaps};

create_exception!(gmnf_bp, GmnfError, PyException);
create_exception!(gmnf_bp, SizeCapError, GmnfError);

fn err(e: Error) -> PyErr {
    match e {
        Error::SizeCap { .. } => SizeCapError::new_err(e.to_string()),
        Error::Usage(_) | Error::Parse(_) => PyValueError::new_err(e.to_string()),
        _ => GmnfError::new_err(e.to_string()),
    }
}

fn rat(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(obj.str()?.to_str()?).map_err(err)
}

fn rats(objs: &[Bound<'_, PyAny>]) -> PyResult<Vec<Rational>> {
    objs.iter().map(rat).collect()
}

fn show(r: &Rational) -> String {
    format_rational(r)
}

fn shows(v: &[Rational]) -> Vec<String> {
    v.iter().map(show).collect()
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn oracle_json(res: &OracleResult) -> Value {
    json!({
        "status": if res.status == OracleStatus::Optimal { "optimal" } else { "infeasible" },
        "value": res.value.as_ref().map(show),
        "unique": res.unique,
        "solutions": res.solutions.iter().map(|s| shows(s)).collect::<Vec<_>>(),
    })
}

fn bp_json<S: Scalar>(result: &BpResult<S>, fmt: impl Fn(&S) -> Value) -> Value {
    json!({
        "flow": result.flow.as_ref().map(|f| f.iter().map(&fmt).collect::<Vec<_>>()),
        "iterations": result.iterations,
        "converged": result.converged,
        "infeasible": result.infeasible,
        "infeasible_edges": result.infeasible_edges,
        "ties": result.ties,
    })
}

/// Generalized min-cost flow instance with exact rational data.
#[pyclass(name = "Instance", module = "gmnf_bp", frozen)]
struct PyInstance {
    inner: GmnfInstance<Rational>,
}

#[pymethods]
impl PyInstance {
    /// Parses the JSON instance format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: instance_from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Self::from_json(&text)
    }

    /// Random ratio-balanced instance, deterministic in `seed`.
    #[staticmethod]
    #[pyo3(signature = (vertices, edges, seed=0, capacity=(2, 4), cost=(-5, 5), unique=false, unit=false, acyclic=false))]
    #[allow(clippy::too_many_arguments)]
    fn generate(
        vertices: usize,
        edges: usize,
        seed: u64,
        capacity: (i64, i64),
        cost: (i64, i64),
        unique: bool,
        unit: bool,
        acyclic: bool,
    ) -> PyResult<Self> {
        let config = GeneratorConfig {
            vertices,
            edges,
            capacity,
            cost,
            seed,
            coefficients: if unit { CoefficientMode::Unit } else { CoefficientMode::Gauge },
            unique,
            acyclic,
            ..Default::default()
        };
        Ok(PyInstance { inner: generate_instance(&config).map_err(err)? })
    }

    fn to_json(&self) -> String {
        instance_to_json(&self.inner)
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// `(tail, head)` pairs in edge-id order.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.graph.edges().to_vec()
    }

    fn objective(&self, flow: Vec<Bound<'_, PyAny>>) -> PyResult<String> {
        let flow = self.flow(&flow)?;
        Ok(show(&self.inner.objective(&flow)))
    }

    fn is_feasible(&self, flow: Vec<Bound<'_, PyAny>>) -> PyResult<bool> {
        let flow = self.flow(&flow)?;
        Ok(self.inner.is_feasible(&flow))
    }

    /// Structural checks and ratio-balance, with the gauge or a violating cycle.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = self.inner.validate();
        let value = json!({
            "errors": report.errors,
            "ratio_balanced": report.ratio_balanced,
            "certificate": report.certificate.as_ref().map(|c| json!({"node": shows(&c.node), "edge": shows(&c.edge)})),
            "violating_cycle": report.violating_cycle.as_ref().map(|c| json!({"vertices": c.vertices, "edges": c.edges})),
        });
        to_py(py, &value)
    }

    /// Min-sum BP. Fixed `iterations`, or stop when the decoded flow is stable
    /// for `window` iterations (default: vertex count).
    #[pyo3(signature = (iterations=None, window=None, max_iterations=1000, tie="midpoint", init="edge-cost", belief="default", numeric="rational"))]
    #[allow(clippy::too_many_arguments)]
    fn solve_bp<'py>(
        &self,
        py: Python<'py>,
        iterations: Option<usize>,
        window: Option<usize>,
        max_iterations: usize,
        tie: &str,
        init: &str,
        belief: &str,
        numeric: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let config = BpConfig {
            tie: match tie {
                "midpoint" => TieRule::Midpoint,
                "lower" => TieRule::Lower,
                "upper" => TieRule::Upper,
                _ => return Err(PyValueError::new_err(format!("unknown tie rule `{tie}`"))),
            },
            init: match init {
                "edge-cost" => MessageInit::EdgeCost,
                "zero" => MessageInit::Zero,
                _ => return Err(PyValueError::new_err(format!("unknown init `{init}`"))),
            },
            belief: match belief {
                "default" => BeliefConvention::Single,
                "paper" => BeliefConvention::Paper,
                _ => return Err(PyValueError::new_err(format!("unknown belief convention `{belief}`"))),
            },
            ..Default::default()
        };
        let stopping = match iterations {
            Some(n) => Stopping::Fixed(n),
            None => Stopping::StableArgmin { window: window.unwrap_or(self.inner.vertex_count()), max_iterations },
        };
        let value = match numeric {
            "rational" => bp_json(&bp::run(&self.inner, stopping, &config).map_err(err)?, |x| json!(show(x))),
            "float" => bp_json(&bp::run(&self.inner.to_float(), stopping, &config).map_err(err)?, |x| json!(x)),
            _ => return Err(PyValueError::new_err(format!("unknown numeric mode `{numeric}`"))),
        };
        to_py(py, &value)
    }

    /// Exact optimum by vertex enumeration.
    fn oracle<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let res = solve_exact(&self.inner).map_err(err)?;
        to_py(py, &oracle_json(&res))
    }

    /// Residual-network quantities at `flow` (the unique optimum when omitted).
    #[pyo3(signature = (flow=None))]
    fn analyze<'py>(&self, py: Python<'py>, flow: Option<Vec<Bound<'py, PyAny>>>) -> PyResult<Bound<'py, PyAny>> {
        let flow = match flow {
            Some(f) => self.flow(&f)?,
            None => solve_exact(&self.inner)
                .map_err(err)?
                .unique_solution()
                .map(<[Rational]>::to_vec)
                .ok_or_else(|| PyValueError::new_err("no unique optimum"))?,
        };
        let net = build_residual(&self.inner, &flow).map_err(err)?;
        let profile = cost_profile(&net, SizeCaps::global()).map_err(err)?;
        let bound = profile.bound(self.inner.vertex_count()).map_err(err)?;
        let value = json!({
            "flow": shows(&flow),
            "sigma": profile.sigma.as_ref().map(|s| show(&s.value)),
            "sigma_cycle": profile.sigma.as_ref().map(|s| s.cycle.clone()),
            "l_max": show(&profile.l_max),
            "t_min": show(&profile.t_min),
            "cycle_count": profile.cycle_count,
            "path_count": profile.path_count,
            "bound": bound,
        });
        to_py(py, &value)
    }

    /// Oracle optimum, iteration bound, then BP run for exactly that bound.
    #[pyo3(signature = (max_iterations=MAX_CERTIFY_ITERATIONS))]
    fn certify<'py>(&self, py: Python<'py>, max_iterations: u64) -> PyResult<Bound<'py, PyAny>> {
        let cert = certify(&self.inner, &BpConfig::default(), SizeCaps::global(), max_iterations).map_err(err)?;
        let status = match cert.status {
            CertifyStatus::Certified => "certified",
            CertifyStatus::Mismatch => "mismatch",
            CertifyStatus::NotUnique => "not-unique",
            CertifyStatus::Infeasible => "infeasible",
        };
        let value = json!({
            "status": status,
            "oracle": oracle_json(&cert.oracle),
            "bound": cert.bound,
            "bp": cert.bp.as_ref().map(|r| bp_json(r, |x| json!(show(x)))),
            "mismatched_edges": cert.mismatched_edges,
        });
        to_py(py, &value)
    }

    /// BP value against the computation-tree argmin on one or every edge.
    #[pyo3(signature = (depth, edge=None))]
    fn tree_check<'py>(&self, py: Python<'py>, depth: usize, edge: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
        let caps = SizeCaps::global();
        let config = BpConfig::default();
        let checks = match edge {
            Some(e) => vec![check_tree_agreement(&self.inner, e, depth, &config, caps).map_err(err)?],
            None => check_tree_agreement_all(&self.inner, depth, &config, caps).map_err(err)?,
        };
        let value: Vec<Value> = checks
            .iter()
            .map(|c| {
                json!({
                    "edge": c.edge,
                    "depth": c.depth,
                    "bp_value": c.bp_value.as_ref().map(show),
                    "interval": c.interval.as_ref().map(|(lo, hi)| [show(lo), show(hi)]),
                    "holds": c.holds,
                })
            })
            .collect();
        to_py(py, &Value::from(value))
    }

    fn __repr__(&self) -> String {
        format!("Instance(vertices={}, edges={})", self.inner.vertex_count(), self.inner.edge_count())
    }
}

impl PyInstance {
    fn flow(&self, flow: &[Bound<'_, PyAny>]) -> PyResult<Vec<Rational>> {
        let flow = rats(flow)?;
        if flow.len() != self.inner.edge_count() {
            return Err(PyValueError::new_err(format!("flow has {} entries, expected {}", flow.len(), self.inner.edge_count())));
        }
        Ok(flow)
    }
}

/// Exact convex piecewise-linear function on a closed interval.
#[pyclass(name = "Pwl", module = "gmnf_bp", frozen)]
struct PyPwl {
    inner: ConvexPwl<Rational>,
}

#[pymethods]
impl PyPwl {
    /// From `(x, y)` breakpoints with increasing `x` and non-decreasing slopes.
    #[new]
    fn new(points: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let points = points.iter().map(|(x, y)| Ok((rat(x)?, rat(y)?))).collect::<PyResult<Vec<_>>>()?;
        Ok(PyPwl { inner: ConvexPwl::from_breakpoints(points).map_err(err)? })
    }

    fn breakpoints(&self) -> Vec<(String, String)> {
        self.inner.breakpoints().iter().map(|(x, y)| (show(x), show(y))).collect()
    }

    fn domain(&self) -> Option<(String, String)> {
        self.inner.domain().map(|(lo, hi)| (show(&lo), show(&hi)))
    }

    /// Value at `z`, or `None` outside the domain.
    fn eval(&self, z: Bound<'_, PyAny>) -> PyResult<Option<String>> {
        Ok(self.inner.eval(&rat(&z)?).as_ref().map(show))
    }

    fn add(&self, other: &PyPwl) -> PyResult<PyPwl> {
        Ok(PyPwl { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn inf_convolve(&self, other: &PyPwl) -> PyResult<PyPwl> {
        Ok(PyPwl { inner: self.inner.inf_convolve(&other.inner).map_err(err)? })
    }

    /// `z -> f(p z + q)`.
    fn affine_precompose(&self, p: Bound<'_, PyAny>, q: Bound<'_, PyAny>) -> PyResult<PyPwl> {
        Ok(PyPwl { inner: self.inner.affine_precompose(&rat(&p)?, &rat(&q)?).map_err(err)? })
    }

    fn normalize(&self) -> PyPwl {
        PyPwl { inner: self.inner.normalize() }
    }

    /// `(value, lo, hi)` with `[lo, hi]` the argmin interval.
    fn minimum(&self) -> Option<(String, String, String)> {
        self.inner.minimum().map(|m| (show(&m.value), show(&m.lo), show(&m.hi)))
    }

    /// Optimal split of `total` across `parts` for their infimal convolution.
    #[staticmethod]
    fn split_sum(parts: Vec<PyRef<'_, PyPwl>>, total: Bound<'_, PyAny>) -> PyResult<Option<Vec<String>>> {
        let parts: Vec<ConvexPwl<Rational>> = parts.iter().map(|p| p.inner.clone()).collect();
        Ok(ConvexPwl::split_sum(&parts, &rat(&total)?).map(|v| shows(&v)))
    }

    fn __repr__(&self) -> String {
        let pts: Vec<String> = self.inner.breakpoints().iter().map(|(x, y)| format!("({}, {})", show(x), show(y))).collect();
        format!("Pwl([{}])", pts.join(", "))
    }

    fn __eq__(&self, other: &PyPwl) -> bool {
        self.inner == other.inner
    }
}

#[pymodule]
fn gmnf_bp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyPwl>()?;
    m.add("GmnfError", m.py().get_type::<GmnfError>())?;
    m.add("SizeCapError", m.py().get_type::<SizeCapError>())?;
    Ok(())
}
