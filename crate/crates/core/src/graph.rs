//! Graph representation, label bookkeeping and relational feature construction.

use std::sync::Arc;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Undirected attributed graph with a known/unknown label partition.
///
/// Topology and attributes sit behind `Arc` so that a per-trial view with a
/// different known set (see [`DataGraph::with_known`]) is cheap to build and
/// the heavy parts stay shared across concurrent trials.
#[derive(Debug, Clone)]
pub struct DataGraph {
    adjacency: Arc<Vec<Vec<usize>>>,
    attributes: Arc<Array2<f64>>,
    label_domain: Arc<Vec<String>>,
    known: Vec<Option<usize>>,
}

impl DataGraph {
    /// Builds a graph from an edge list. Edges are symmetrized and
    /// deduplicated; self-loops are dropped. Every node must end up with
    /// degree at least one.
    pub fn new(
        attributes: Array2<f64>,
        edges: &[(usize, usize)],
        label_domain: Vec<String>,
        known: Vec<Option<usize>>,
    ) -> Result<Self> {
        let n = attributes.nrows();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Usage(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in adjacency.iter_mut() {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        Self::from_adjacency(adjacency, attributes, label_domain, known)
    }

    fn from_adjacency(
        adjacency: Vec<Vec<usize>>,
        attributes: Array2<f64>,
        label_domain: Vec<String>,
        known: Vec<Option<usize>>,
    ) -> Result<Self> {
        let n = attributes.nrows();
        if label_domain.len() < 2 {
            return Err(Error::Data(format!(
                "label domain needs at least 2 classes, got {}",
                label_domain.len()
            )));
        }
        if known.len() != n {
            return Err(Error::Usage(format!("known labels cover {} nodes, graph has {n}", known.len())));
        }
        if let Some(i) = adjacency.iter().position(|a| a.is_empty()) {
            return Err(Error::Data(format!("node {i} has no links")));
        }
        if let Some(c) = known.iter().flatten().find(|&&c| c >= label_domain.len()) {
            return Err(Error::Usage(format!("known class index {c} out of range")));
        }
        Ok(Self {
            adjacency: Arc::new(adjacency),
            attributes: Arc::new(attributes),
            label_domain: Arc::new(label_domain),
            known,
        })
    }

    /// Same topology and attributes, different known set.
    pub fn with_known(&self, known: Vec<Option<usize>>) -> Result<Self> {
        if known.len() != self.node_count() {
            return Err(Error::Usage(format!(
                "known labels cover {} nodes, graph has {}",
                known.len(),
                self.node_count()
            )));
        }
        if let Some(c) = known.iter().flatten().find(|&&c| c >= self.num_classes()) {
            return Err(Error::Usage(format!("known class index {c} out of range")));
        }
        Ok(Self { known, ..self.clone() })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_classes(&self) -> usize {
        self.label_domain.len()
    }

    pub fn label_domain(&self) -> &[String] {
        &self.label_domain
    }

    pub fn attributes(&self) -> &Array2<f64> {
        &self.attributes
    }

    pub fn attribute_dim(&self) -> usize {
        self.attributes.ncols()
    }

    pub fn attribute_row(&self, node: usize) -> ArrayView1<'_, f64> {
        self.attributes.row(node)
    }

    /// Sorted, deduplicated neighbor list.
    pub fn neighbors(&self, node: usize) -> Result<&[usize]> {
        self.adjacency
            .get(node)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Usage(format!("node {node} out of range ({} nodes)", self.node_count())))
    }

    pub(crate) fn nbrs(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn known_labels(&self) -> &[Option<usize>] {
        &self.known
    }

    pub fn is_known(&self, node: usize) -> bool {
        self.known[node].is_some()
    }

    /// Indices of V^K in ascending order.
    pub fn known_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.known[i].is_some()).collect()
    }

    /// Indices of V^U in ascending order.
    pub fn unknown_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.known[i].is_none()).collect()
    }

    /// Fresh state with V^K filled in and every other node unset.
    pub fn initial_state(&self) -> LabelState {
        let mut state = LabelState::unset(self.node_count());
        for (i, k) in self.known.iter().enumerate() {
            if let Some(c) = *k {
                state.labels[i] = c;
                state.provenance[i] = Provenance::Known;
            }
        }
        state
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Known,
    Predicted,
    Unset,
}

/// Current hard label of every node (the working set Y^K ∪ Y^U).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelState {
    labels: Vec<usize>,
    provenance: Vec<Provenance>,
}

impl LabelState {
    pub fn unset(n: usize) -> Self {
        Self { labels: vec![0; n], provenance: vec![Provenance::Unset; n] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, node: usize) -> Option<usize> {
        match self.provenance[node] {
            Provenance::Unset => None,
            _ => Some(self.labels[node]),
        }
    }

    pub fn provenance(&self, node: usize) -> Provenance {
        self.provenance[node]
    }

    /// Raw label vector; entries of unset nodes are meaningless.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Assigns a predicted label. Known nodes are never overwritten.
    pub fn set_predicted(&mut self, node: usize, class: usize) -> Result<()> {
        if self.provenance[node] == Provenance::Known {
            return Err(Error::Contract(format!("attempt to overwrite known node {node}")));
        }
        self.labels[node] = class;
        self.provenance[node] = Provenance::Predicted;
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        !self.provenance.contains(&Provenance::Unset)
    }

    fn require_complete(&self) -> Result<()> {
        match self.provenance.iter().position(|p| *p == Provenance::Unset) {
            Some(i) => Err(Error::Contract(format!("node {i} has no label"))),
            None => Ok(()),
        }
    }
}

/// Fraction of each node's neighbors carrying each class (N × |C|).
pub type ProportionFeatures = Array2<f64>;
/// Count of each node's neighbors carrying each class (N × |C|).
pub type MultisetFeatures = Array2<u32>;

pub fn compute_proportion_features(graph: &DataGraph, state: &LabelState) -> Result<ProportionFeatures> {
    let counts = compute_multiset_features(graph, state)?;
    let mut out = counts.mapv(f64::from);
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let deg = graph.degree(i) as f64;
        row.mapv_inplace(|c| c / deg);
    }
    Ok(out)
}

pub fn compute_multiset_features(graph: &DataGraph, state: &LabelState) -> Result<MultisetFeatures> {
    check_state(graph, state)?;
    state.require_complete()?;
    let mut out = Array2::zeros((graph.node_count(), graph.num_classes()));
    for i in 0..graph.node_count() {
        for &j in graph.nbrs(i) {
            out[[i, state.labels[j]]] += 1;
        }
    }
    Ok(out)
}

/// Relational features that only look at neighbors in V^K. Nodes without a
/// known neighbor get an all-zero row in both forms.
pub fn compute_known_only_features(graph: &DataGraph) -> (ProportionFeatures, MultisetFeatures) {
    let n = graph.node_count();
    let k = graph.num_classes();
    let mut counts = Array2::<u32>::zeros((n, k));
    for i in 0..n {
        for &j in graph.nbrs(i) {
            if let Some(c) = graph.known[j] {
                counts[[i, c]] += 1;
            }
        }
    }
    let mut props = counts.mapv(f64::from);
    for mut row in props.rows_mut() {
        let total: f64 = row.sum();
        if total > 0.0 {
            row.mapv_inplace(|c| c / total);
        }
    }
    (props, counts)
}

fn check_state(graph: &DataGraph, state: &LabelState) -> Result<()> {
    if state.len() != graph.node_count() {
        return Err(Error::Usage(format!(
            "label state covers {} nodes, graph has {}",
            state.len(),
            graph.node_count()
        )));
    }
    Ok(())
}

/// Smoothed class distribution over either V^K (`known_only`) or every
/// labeled node in `state`: `(count_c + s) / (N + |C| s)`.
pub fn class_prior(graph: &DataGraph, state: &LabelState, known_only: bool, smoothing: f64) -> Result<Vec<f64>> {
    check_state(graph, state)?;
    if !(smoothing >= 0.0) || !smoothing.is_finite() {
        return Err(Error::Config(format!("smoothing must be >= 0, got {smoothing}")));
    }
    let labels = (0..state.len()).filter_map(|i| match state.provenance(i) {
        Provenance::Known => Some(state.labels[i]),
        Provenance::Predicted if !known_only => Some(state.labels[i]),
        _ => None,
    });
    prior_from_labels(labels, graph.num_classes(), smoothing)
}

pub(crate) fn prior_from_labels(
    labels: impl IntoIterator<Item = usize>,
    num_classes: usize,
    smoothing: f64,
) -> Result<Vec<f64>> {
    let mut counts = vec![0.0; num_classes];
    let mut total = 0.0;
    for c in labels {
        counts[c] += 1.0;
        total += 1.0;
    }
    if total == 0.0 {
        return Err(Error::Config("class prior needs at least one known label".into()));
    }
    let denom = total + num_classes as f64 * smoothing;
    Ok(counts.into_iter().map(|c| (c + smoothing) / denom).collect())
}
