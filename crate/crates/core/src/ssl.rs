//! Semi-supervised learning loop for collective classification and the
//! learning baselines that go with it.
//!
//! [`ssl_learn`] trains an attribute-only bootstrap model on V^K, labels V^U
//! with it, and then `n` times: recomputes relational features from the
//! current labeling, retrains the node model (on all nodes or on V^K only)
//! and relabels V^U with ICA.

use std::fmt;
use std::str::FromStr;

use log::debug;
use ndarray::{concatenate, Array2, Axis};

use crate::classifiers::{
    lr_train, lr_train_label_reg, nb_relational_train, relational_beta, HybridModel, LabelRegConfig,
    LabelRegProblem, LrModel, NodeModel, RelationalMember,
};
use crate::error::{Error, Result};
use crate::graph::{
    class_prior, compute_known_only_features, compute_multiset_features, compute_proportion_features, DataGraph,
    LabelState,
};
use crate::inference::{bootstrap_labels, ica, wvrn_rl, IcaConfig, WvrnConfig};

/// Which nodes the node model learns from, and how many learn/infer rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SslVariant {
    pub learn_from_all: bool,
    pub n_iterations: usize,
}

impl SslVariant {
    pub const ALL_EM: Self = Self { learn_from_all: true, n_iterations: 10 };
    pub const ALL_ONEPASS: Self = Self { learn_from_all: true, n_iterations: 1 };
    pub const KNOWN_EM: Self = Self { learn_from_all: false, n_iterations: 10 };
    pub const KNOWN_ONEPASS: Self = Self { learn_from_all: false, n_iterations: 1 };

    pub fn new(learn_from_all: bool, n_iterations: usize) -> Result<Self> {
        if n_iterations == 0 {
            return Err(Error::Config("SSL variant needs n_iterations >= 1".into()));
        }
        Ok(Self { learn_from_all, n_iterations })
    }
}

impl fmt::Display for SslVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let who = if self.learn_from_all { "ALL" } else { "KNOWN" };
        match self.n_iterations {
            1 => write!(f, "{who}-ONEPASS"),
            10 => write!(f, "{who}-EM"),
            n => write!(f, "{who}-EM{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    Lr,
    LrLr,
    LrLrReg,
    LrNb,
    LrNbReg,
}

impl ClassifierKind {
    pub const ALL: [Self; 5] = [Self::Lr, Self::LrLr, Self::LrLrReg, Self::LrNb, Self::LrNbReg];

    pub fn uses_nb(self) -> bool {
        matches!(self, Self::LrNb | Self::LrNbReg)
    }

    pub fn uses_label_reg(self) -> bool {
        matches!(self, Self::LrLrReg | Self::LrNbReg)
    }

    /// Same classifier with label regularization switched off.
    pub fn without_reg(self) -> Self {
        match self {
            Self::LrLrReg => Self::LrLr,
            Self::LrNbReg => Self::LrNb,
            k => k,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lr => "LR",
            Self::LrLr => "LR+LR",
            Self::LrLrReg => "LR+LR+Reg",
            Self::LrNb => "LR+NB",
            Self::LrNbReg => "LR+NB+Reg",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown classifier '{s}'")))
    }
}

/// Tunables of label regularization that do not depend on the trial's data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRegSettings {
    /// `lambda = lambda_per_known * |V^K|`.
    pub lambda_per_known: f64,
    pub epsilon_floor: f64,
    pub weighted_likelihood: bool,
}

impl Default for LabelRegSettings {
    fn default() -> Self {
        Self { lambda_per_known: 10.0, epsilon_floor: 1e-10, weighted_likelihood: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub sigma_sq: f64,
    pub nb_alpha: f64,
    pub label_reg: Option<LabelRegSettings>,
    /// Laplace smoothing for the hybrid prior and the label-regularization target.
    pub prior_smoothing: f64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, sigma_sq: f64, nb_alpha: f64) -> Self {
        Self {
            kind,
            sigma_sq,
            nb_alpha,
            label_reg: kind.uses_label_reg().then(LabelRegSettings::default),
            prior_smoothing: 1.0,
        }
    }

    pub fn without_reg(&self) -> Self {
        Self { kind: self.kind.without_reg(), label_reg: None, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if self.kind.uses_label_reg() != self.label_reg.is_some() {
            return Err(Error::Config(format!("{} label-regularization settings inconsistent", self.kind)));
        }
        if !(self.sigma_sq > 0.0) {
            return Err(Error::Config(format!("sigma_sq must be positive, got {}", self.sigma_sq)));
        }
        if self.kind.uses_nb() && !(self.nb_alpha > 0.0) {
            return Err(Error::Config(format!("nb_alpha must be positive, got {}", self.nb_alpha)));
        }
        Ok(())
    }
}

/// Outcome of one learning run.
#[derive(Debug, Clone)]
pub struct SslRun {
    pub state: LabelState,
    /// Number of rows the node model was trained on, per outer iteration.
    pub training_rows: Vec<usize>,
    pub diagnostics: Vec<String>,
}

fn rows_of(m: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    m.select(Axis(0), rows)
}

fn known_training(graph: &DataGraph) -> Result<(Vec<usize>, Vec<usize>)> {
    let rows = graph.known_nodes();
    if rows.is_empty() {
        return Err(Error::Config("learning needs at least one known label".into()));
    }
    let labels = rows.iter().map(|&i| graph.known_labels()[i].expect("known")).collect();
    Ok((rows, labels))
}

/// Attribute-only bootstrap model `M_A`, trained on V^K.
pub fn train_bootstrap(graph: &DataGraph, sigma_sq: f64) -> Result<LrModel> {
    let (rows, labels) = known_training(graph)?;
    lr_train(rows_of(graph.attributes(), &rows).view(), &labels, graph.num_classes(), sigma_sq)
}

/// Relational features and a training view for the node model.
pub struct TrainingView<'a> {
    pub rows: &'a [usize],
    pub labels: &'a [usize],
    pub proportion: &'a Array2<f64>,
    pub counts: &'a Array2<u32>,
}

/// Trains `M_AR` on the given rows. For hybrid kinds the members are trained
/// separately; with label regularization the relational member is trained
/// first and frozen into per-node weights for the attribute member.
pub fn train_node_model(graph: &DataGraph, view: &TrainingView, spec: &ClassifierSpec) -> Result<NodeModel> {
    spec.validate()?;
    let k = graph.num_classes();
    let attrs = rows_of(graph.attributes(), view.rows);
    let prop = rows_of(view.proportion, view.rows);
    if spec.kind == ClassifierKind::Lr {
        let x = concatenate(Axis(1), &[attrs.view(), prop.view()]).expect("row counts match");
        return Ok(NodeModel::Lr(lr_train(x.view(), view.labels, k, spec.sigma_sq)?));
    }

    let relational = if spec.kind.uses_nb() {
        let counts = view.counts.select(Axis(0), view.rows);
        RelationalMember::Nb(nb_relational_train(counts.view(), view.labels, k, spec.nb_alpha)?)
    } else {
        RelationalMember::Lr(lr_train(prop.view(), view.labels, k, spec.sigma_sq)?)
    };
    let prior = class_prior(graph, &graph.initial_state(), true, spec.prior_smoothing)?;

    let attribute = match spec.label_reg {
        None => lr_train(attrs.view(), view.labels, k, spec.sigma_sq)?,
        Some(settings) => {
            let beta_of = |nodes: &[usize]| -> Result<Array2<f64>> {
                let mut b = Array2::zeros((nodes.len(), k));
                for (r, &i) in nodes.iter().enumerate() {
                    let p_rel = relational.predict(view.proportion.row(i), view.counts.row(i))?;
                    let beta = relational_beta(&p_rel, &prior)?;
                    b.row_mut(r).assign(&ndarray::ArrayView1::from(&beta));
                }
                Ok(b)
            };
            let pool = graph.unknown_nodes();
            let known_beta = beta_of(view.rows)?;
            let pool_beta = beta_of(&pool)?;
            let pool_attrs = rows_of(graph.attributes(), &pool);
            let config = LabelRegConfig {
                target_dist: prior.clone(),
                lambda: settings.lambda_per_known * graph.known_nodes().len() as f64,
                epsilon_floor: settings.epsilon_floor,
                weighted_likelihood: settings.weighted_likelihood,
            };
            let problem = LabelRegProblem {
                known_features: attrs.view(),
                known_labels: view.labels,
                known_beta: known_beta.view(),
                unlabeled_features: pool_attrs.view(),
                unlabeled_beta: pool_beta.view(),
            };
            lr_train_label_reg(problem, &config, k, spec.sigma_sq)?
        }
    };
    Ok(NodeModel::Hybrid(HybridModel { attribute, relational, prior }))
}

fn missing_classes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut seen = vec![false; k];
    labels.iter().for_each(|&c| seen[c] = true);
    (0..k).filter(|&c| !seen[c]).collect()
}

/// Runs the generic semi-supervised learning loop with ICA inference.
pub fn ssl_learn(graph: &DataGraph, variant: SslVariant, spec: &ClassifierSpec) -> Result<SslRun> {
    ssl_learn_with(graph, variant, spec, IcaConfig::default())
}

pub fn ssl_learn_with(graph: &DataGraph, variant: SslVariant, spec: &ClassifierSpec, ica_config: IcaConfig) -> Result<SslRun> {
    if variant.n_iterations == 0 {
        return Err(Error::Config("SSL variant needs n_iterations >= 1".into()));
    }
    spec.validate()?;
    let k = graph.num_classes();
    let bootstrap = train_bootstrap(graph, spec.sigma_sq)?;
    let mut state = bootstrap_labels(graph, &bootstrap)?;
    let all: Vec<usize> = (0..graph.node_count()).collect();
    let known = graph.known_nodes();
    let mut run = SslRun { state: state.clone(), training_rows: Vec::new(), diagnostics: Vec::new() };

    for iter in 0..variant.n_iterations {
        let proportion = compute_proportion_features(graph, &state)?;
        let counts = compute_multiset_features(graph, &state)?;
        let rows = if variant.learn_from_all { &all } else { &known };
        let labels: Vec<usize> = rows.iter().map(|&i| state.labels()[i]).collect();
        let missing = missing_classes(&labels, k);
        if !missing.is_empty() {
            let msg = format!("iteration {iter}: classes {missing:?} absent from training labels");
            debug!("{msg}");
            run.diagnostics.push(msg);
        }
        let view = TrainingView { rows, labels: &labels, proportion: &proportion, counts: &counts };
        let node_model = train_node_model(graph, &view, spec)?;
        run.training_rows.push(rows.len());
        state = ica(graph, &bootstrap, &node_model, ica_config)?;
    }
    run.state = state;
    Ok(run)
}

/// Node model learned from V^K alone, with relational features that only see
/// known neighbors; ICA is then run once. Never label-regularized.
pub fn no_ssl(graph: &DataGraph, spec: &ClassifierSpec) -> Result<SslRun> {
    let spec = spec.without_reg();
    spec.validate()?;
    let bootstrap = train_bootstrap(graph, spec.sigma_sq)?;
    let (rows, labels) = known_training(graph)?;
    let (proportion, counts) = compute_known_only_features(graph);
    let view = TrainingView { rows: &rows, labels: &labels, proportion: &proportion, counts: &counts };
    let node_model = train_node_model(graph, &view, &spec)?;
    let state = ica(graph, &bootstrap, &node_model, IcaConfig::default())?;
    Ok(SslRun { state, training_rows: vec![rows.len()], diagnostics: Vec::new() })
}

/// One-shot attribute-only prediction.
pub fn attr_only(graph: &DataGraph, sigma_sq: f64) -> Result<LabelState> {
    let model = train_bootstrap(graph, sigma_sq)?;
    bootstrap_labels(graph, &model)
}

/// Learning-free wvRN+RL baseline.
pub fn relat_only(graph: &DataGraph) -> Result<LabelState> {
    wvrn_rl(graph, WvrnConfig::default())
}
