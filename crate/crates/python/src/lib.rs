//! Python bindings. Matrices cross the boundary as lists of rows.

use std::path::PathBuf;

use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ssl_cc::classifiers as cls;
use ssl_cc::eval::{self, ExperimentConfig, Method};
use ssl_cc::graph::{compute_multiset_features, compute_proportion_features};
use ssl_cc::inference::{wvrn_rl, WvrnConfig};
use ssl_cc::synth::{generate, SyntheticParams};
use ssl_cc::{ClassifierKind, ClassifierSpec, DataGraph, Error, LabelState};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Contract(m) => PyRuntimeError::new_err(format!("contract violation: {m}")),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<Array2<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(Array2::from_shape_vec((rows.len(), d), rows.concat()).expect("shape checked"))
}

fn count_matrix(rows: &[Vec<u32>]) -> PyResult<Array2<u32>> {
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(Array2::from_shape_vec((rows.len(), d), rows.concat()).expect("shape checked"))
}

fn rows<T: Clone>(a: &Array2<T>) -> Vec<Vec<T>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn complete_state(labels: &[usize]) -> PyResult<LabelState> {
    let mut s = LabelState::unset(labels.len());
    for (i, &c) in labels.iter().enumerate() {
        s.set_predicted(i, c).map_err(py_err)?;
    }
    Ok(s)
}

/// Attributed undirected graph with an optional set of known labels.
#[pyclass(name = "Graph", module = "sslcc_py", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: DataGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (attributes, edges, label_domain, known=None))]
    fn new(
        attributes: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        label_domain: Vec<String>,
        known: Option<Vec<Option<usize>>>,
    ) -> PyResult<Self> {
        let x = matrix(&attributes)?;
        let known = known.unwrap_or_else(|| vec![None; x.nrows()]);
        let inner = DataGraph::new(x, &edges, label_domain, known).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn with_known(&self, known: Vec<Option<usize>>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_known(known).map_err(py_err)? })
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn neighbors(&self, node: usize) -> PyResult<Vec<usize>> {
        Ok(self.inner.neighbors(node).map_err(py_err)?.to_vec())
    }

    fn known_nodes(&self) -> Vec<usize> {
        self.inner.known_nodes()
    }

    fn unknown_nodes(&self) -> Vec<usize> {
        self.inner.unknown_nodes()
    }

    fn attributes(&self) -> Vec<Vec<f64>> {
        rows(self.inner.attributes())
    }

    /// Neighbor label proportions under a complete labeling.
    fn proportion_features(&self, labels: Vec<usize>) -> PyResult<Vec<Vec<f64>>> {
        let s = complete_state(&labels)?;
        Ok(rows(&compute_proportion_features(&self.inner, &s).map_err(py_err)?))
    }

    /// Neighbor label counts under a complete labeling.
    fn multiset_features(&self, labels: Vec<usize>) -> PyResult<Vec<Vec<u32>>> {
        let s = complete_state(&labels)?;
        Ok(rows(&compute_multiset_features(&self.inner, &s).map_err(py_err)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, edges={}, classes={}, known={})",
            self.inner.node_count(),
            self.inner.edge_count(),
            self.inner.num_classes(),
            self.inner.known_nodes().len()
        )
    }
}

#[pyclass(name = "LrModel", module = "sslcc_py")]
struct PyLrModel {
    inner: cls::LrModel,
}

#[pymethods]
impl PyLrModel {
    fn predict_proba(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.predict_proba(ndarray::ArrayView1::from(&x)).map_err(py_err)
    }

    /// Parameters as K rows of `d + 1` values; the last column is the bias.
    fn theta(&self) -> Vec<Vec<f64>> {
        rows(self.inner.theta())
    }

    fn iterations(&self) -> Option<usize> {
        self.inner.diagnostics.as_ref().map(|d| d.iterations)
    }
}

#[pyclass(name = "NbModel", module = "sslcc_py")]
struct PyNbModel {
    inner: cls::NbRelationalModel,
}

#[pymethods]
impl PyNbModel {
    fn predict(&self, counts: Vec<u32>) -> PyResult<Vec<f64>> {
        self.inner.predict(ndarray::ArrayView1::from(&counts)).map_err(py_err)
    }

    fn class_prior(&self) -> Vec<f64> {
        self.inner.class_prior().to_vec()
    }

    fn neighbor_table(&self) -> Vec<Vec<f64>> {
        rows(self.inner.neighbor_table())
    }
}

#[pyfunction]
fn lr_train(features: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize, sigma_sq: f64) -> PyResult<PyLrModel> {
    let x = matrix(&features)?;
    Ok(PyLrModel { inner: cls::lr_train(x.view(), &labels, num_classes, sigma_sq).map_err(py_err)? })
}

#[pyfunction]
fn nb_train(counts: Vec<Vec<u32>>, labels: Vec<usize>, num_classes: usize, alpha: f64) -> PyResult<PyNbModel> {
    let c = count_matrix(&counts)?;
    Ok(PyNbModel { inner: cls::nb_relational_train(c.view(), &labels, num_classes, alpha).map_err(py_err)? })
}

#[pyfunction]
fn hybrid_combine(p_attr: Vec<f64>, p_rel: Vec<f64>, prior: Vec<f64>) -> PyResult<Vec<f64>> {
    cls::hybrid_combine(&p_attr, &p_rel, &prior).map_err(py_err)
}

#[pyfunction]
fn kl_penalty(target: Vec<f64>, empirical: Vec<f64>) -> f64 {
    cls::kl_penalty(&target, &empirical)
}

#[pyfunction]
fn label_reg_gradient(
    model: &PyLrModel,
    unlabeled_features: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
    target: Vec<f64>,
) -> PyResult<Vec<Vec<f64>>> {
    let x = matrix(&unlabeled_features)?;
    let b = matrix(&beta)?;
    Ok(rows(&cls::label_reg_gradient(&model.inner, x.view(), b.view(), &target).map_err(py_err)?))
}

/// Weighted-vote relational neighbor with relaxation labeling.
#[pyfunction]
fn wvrn(graph: &PyGraph) -> PyResult<Vec<usize>> {
    Ok(wvrn_rl(&graph.inner, WvrnConfig::default()).map_err(py_err)?.labels().to_vec())
}

/// Runs a method by name (e.g. "ALL-EM", "NO-SSL") with a classifier such
/// as "LR+NB+Reg" and returns the final label of every node.
#[pyfunction]
#[pyo3(signature = (graph, method="ALL-EM", classifier="LR+NB+Reg", sigma_sq=1.0, nb_alpha=1.0))]
fn ssl_learn(graph: &PyGraph, method: &str, classifier: &str, sigma_sq: f64, nb_alpha: f64) -> PyResult<Vec<usize>> {
    let m: Method = method.parse().map_err(py_err)?;
    let k: ClassifierKind = classifier.parse().map_err(py_err)?;
    let spec = ClassifierSpec::new(k, sigma_sq, nb_alpha);
    Ok(m.run(&graph.inner, &spec).map_err(py_err)?.labels().to_vec())
}

/// Returns `(graph, truth)` for a synthetic homophilous dataset.
#[pyfunction]
#[pyo3(signature = (nodes=500, classes=2, homophily=0.8, attr_noise=1.0, seed=0, attrs=10, links_per_node=2))]
fn generate_synthetic(
    nodes: usize,
    classes: usize,
    homophily: f64,
    attr_noise: f64,
    seed: u64,
    attrs: usize,
    links_per_node: usize,
) -> PyResult<(PyGraph, Vec<usize>)> {
    let p = SyntheticParams { nodes, classes, homophily, attr_noise, attrs, links_per_node, class_weights: None, seed };
    let ds = generate(&p).map_err(py_err)?;
    Ok((PyGraph { inner: ds.graph }, ds.truth))
}

#[pyfunction]
fn sample_known(n: usize, density: f64, seed: u64) -> PyResult<Vec<usize>> {
    eval::sample_known(n, density, seed).map_err(py_err)
}

/// Two-sided paired t-test; returns `(t, p, significant)`.
#[pyfunction]
#[pyo3(signature = (a, b, level=0.05))]
fn paired_t_test(a: Vec<f64>, b: Vec<f64>, level: f64) -> PyResult<(f64, f64, bool)> {
    let o = eval::paired_t_test(&a, &b, level).map_err(py_err)?;
    Ok((o.t, o.p, o.significant))
}

/// Runs an experiment config file and returns the number of trials that
/// completed and failed.
#[pyfunction]
fn run_experiment(config: PathBuf) -> PyResult<(usize, usize)> {
    let cfg = ExperimentConfig::from_file(&config).map_err(py_err)?;
    let res = eval::run_experiment(&cfg).map_err(py_err)?;
    let failed = res.iter().filter(|r| r.error.is_some()).count();
    Ok((res.len() - failed, failed))
}

#[pymodule]
fn sslcc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyLrModel>()?;
    m.add_class::<PyNbModel>()?;
    m.add_function(wrap_pyfunction!(lr_train, m)?)?;
    m.add_function(wrap_pyfunction!(nb_train, m)?)?;
    m.add_function(wrap_pyfunction!(hybrid_combine, m)?)?;
    m.add_function(wrap_pyfunction!(kl_penalty, m)?)?;
    m.add_function(wrap_pyfunction!(label_reg_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(wvrn, m)?)?;
    m.add_function(wrap_pyfunction!(ssl_learn, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(sample_known, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
