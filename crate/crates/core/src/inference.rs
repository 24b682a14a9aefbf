//! Collective inference: ICA with hard labels, and the wvRN+RL baseline.

use ndarray::Array2;

use crate::classifiers::{argmax, LrModel, NodeModel};
use crate::error::{Error, Result};
use crate::graph::{class_prior, compute_multiset_features, compute_proportion_features, DataGraph, LabelState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IcaConfig {
    pub iterations: usize,
}

impl Default for IcaConfig {
    fn default() -> Self {
        Self { iterations: 10 }
    }
}

/// Labels V^U with the attribute-only model, then repeatedly recomputes
/// relational features from the full labeling and re-predicts every unknown
/// node (synchronously, ascending node order). Known labels never change.
pub fn ica(graph: &DataGraph, bootstrap: &LrModel, node_model: &NodeModel, config: IcaConfig) -> Result<LabelState> {
    let mut history = ica_with_history(graph, bootstrap, node_model, config)?;
    Ok(history.pop().expect("at least the bootstrap state"))
}

/// Like [`ica`] but returns the bootstrap labeling followed by the labeling
/// after each iteration.
pub fn ica_with_history(
    graph: &DataGraph,
    bootstrap: &LrModel,
    node_model: &NodeModel,
    config: IcaConfig,
) -> Result<Vec<LabelState>> {
    if config.iterations == 0 {
        return Err(Error::Config("ICA needs at least one iteration".into()));
    }
    let unknown = graph.unknown_nodes();
    let mut state = bootstrap_labels(graph, bootstrap)?;
    let mut history = Vec::with_capacity(config.iterations + 1);
    history.push(state.clone());
    for _ in 0..config.iterations {
        let prop = compute_proportion_features(graph, &state)?;
        let counts = compute_multiset_features(graph, &state)?;
        let mut next = state.clone();
        for &i in &unknown {
            let p = node_model.predict(graph.attribute_row(i), prop.row(i), counts.row(i))?;
            next.set_predicted(i, argmax(&p))?;
        }
        state = next;
        history.push(state.clone());
    }
    Ok(history)
}

/// Attribute-only argmax for every unknown node.
pub fn bootstrap_labels(graph: &DataGraph, model: &LrModel) -> Result<LabelState> {
    let mut state = graph.initial_state();
    for i in graph.unknown_nodes() {
        let p = model.predict_proba(graph.attribute_row(i))?;
        state.set_predicted(i, argmax(&p))?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WvrnInit {
    ClassPrior,
    Uniform,
}

/// Simulated-annealing weight schedule: the weight on the freshly averaged
/// distribution starts at `beta0` and is multiplied by `decay` each sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annealing {
    pub beta0: f64,
    pub decay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WvrnConfig {
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub init: WvrnInit,
    pub annealing: Option<Annealing>,
}

impl Default for WvrnConfig {
    fn default() -> Self {
        Self { max_iterations: 100, convergence_tol: 1e-4, init: WvrnInit::ClassPrior, annealing: None }
    }
}

/// Relaxation labeling with the weighted-vote relational neighbor rule.
/// Returns per-node class distributions and the number of sweeps run.
pub fn wvrn_distributions(graph: &DataGraph, config: WvrnConfig) -> Result<(Array2<f64>, usize)> {
    if !(config.convergence_tol > 0.0) {
        return Err(Error::Config("convergence_tol must be positive".into()));
    }
    let known = graph.known_labels();
    if known.iter().all(Option::is_none) {
        return Err(Error::Config("wvRN needs at least one known label".into()));
    }
    let k = graph.num_classes();
    let n = graph.node_count();
    let init = match config.init {
        WvrnInit::ClassPrior => class_prior(graph, &graph.initial_state(), true, 1.0)?,
        WvrnInit::Uniform => vec![1.0 / k as f64; k],
    };
    let mut dist = Array2::zeros((n, k));
    for i in 0..n {
        match known[i] {
            Some(c) => dist[[i, c]] = 1.0,
            None => dist.row_mut(i).assign(&ndarray::ArrayView1::from(&init)),
        }
    }
    let unknown = graph.unknown_nodes();
    let mut weight = config.annealing.map(|a| a.beta0);
    let mut sweeps = 0;
    while sweeps < config.max_iterations {
        sweeps += 1;
        let mut next = dist.clone();
        let mut max_change: f64 = 0.0;
        for &i in &unknown {
            let nbrs = graph.nbrs(i);
            let mut avg = vec![0.0; k];
            for &j in nbrs {
                for c in 0..k {
                    avg[c] += dist[[j, c]];
                }
            }
            let deg = nbrs.len() as f64;
            for c in 0..k {
                let fresh = avg[c] / deg;
                let v = match weight {
                    Some(b) => b * fresh + (1.0 - b) * dist[[i, c]],
                    None => fresh,
                };
                max_change = max_change.max((v - dist[[i, c]]).abs());
                next[[i, c]] = v;
            }
        }
        dist = next;
        if let (Some(w), Some(a)) = (weight.as_mut(), config.annealing) {
            *w *= a.decay;
        }
        if max_change < config.convergence_tol {
            break;
        }
    }
    Ok((dist, sweeps))
}

pub fn wvrn_rl(graph: &DataGraph, config: WvrnConfig) -> Result<LabelState> {
    let (dist, _) = wvrn_distributions(graph, config)?;
    let mut state = graph.initial_state();
    for i in graph.unknown_nodes() {
        let row = dist.row(i);
        state.set_predicted(i, argmax(row.as_slice().expect("contiguous row")))?;
    }
    Ok(state)
}
