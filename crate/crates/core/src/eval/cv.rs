//! Cross-validated choice of the Gaussian-prior variance and the NB
//! Dirichlet concentration, using only the known labels.

use log::warn;
use rand::seq::SliceRandom;

use super::sampling::rng_for;
use super::Method;
use crate::error::{Error, Result};
use crate::graph::DataGraph;
use crate::ssl::{ClassifierKind, ClassifierSpec, SslVariant};

#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub sigma_sq: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Self { sigma_sq: vec![0.01, 0.1, 1.0, 10.0, 100.0], alpha: vec![0.1, 1.0, 10.0] }
    }
}

impl Grids {
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("sigma_grid", &self.sigma_sq), ("alpha_grid", &self.alpha)] {
            if g.is_empty() || g.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::Config(format!("{name} must be a non-empty list of positive values")));
            }
        }
        Ok(())
    }

    fn sorted(g: &[f64]) -> Vec<f64> {
        let mut v = g.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn midpoint(g: &[f64]) -> f64 {
        let v = Self::sorted(g);
        v[v.len() / 2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvChoice {
    pub sigma_sq: f64,
    pub nb_alpha: f64,
    pub warnings: Vec<String>,
}

/// Splits V^K into folds, spreading each class across folds where its
/// count allows.
pub fn stratified_folds(graph: &DataGraph, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = rng_for(seed);
    let mut by_class = vec![Vec::new(); graph.num_classes()];
    for i in graph.known_nodes() {
        by_class[graph.known_labels()[i].expect("known")].push(i);
    }
    let mut out = vec![Vec::new(); folds];
    let mut pos = 0;
    for mut members in by_class {
        members.shuffle(&mut rng);
        for i in members {
            out[pos % folds].push(i);
            pos += 1;
        }
    }
    for f in out.iter_mut() {
        f.sort_unstable();
    }
    out
}

/// Options controlling how much work each CV evaluation does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvOptions {
    pub folds: usize,
    /// Caps the outer iteration count of EM variants during CV.
    pub max_em_iterations: Option<usize>,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { folds: 5, max_em_iterations: None }
    }
}

fn cv_method(method: Method, opts: &CvOptions) -> Method {
    match (method, opts.max_em_iterations) {
        (Method::Ssl(v), Some(cap)) if v.n_iterations > cap => {
            Method::Ssl(SslVariant { n_iterations: cap.max(1), ..v })
        }
        (m, _) => m,
    }
}

/// Held-out accuracy pooled over usable folds, or `None` if none was usable.
fn score(graph: &DataGraph, folds: &[Vec<usize>], method: Method, spec: &ClassifierSpec) -> Result<Option<f64>> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for fold in folds {
        if fold.is_empty() {
            continue;
        }
        let mut known = graph.known_labels().to_vec();
        for &i in fold {
            known[i] = None;
        }
        if known.iter().all(Option::is_none) {
            continue;
        }
        let g = graph.with_known(known)?;
        let pred = method.run(&g, spec)?;
        for &i in fold {
            total += 1;
            if pred.label(i) == graph.known_labels()[i] {
                correct += 1;
            }
        }
    }
    Ok((total > 0).then(|| correct as f64 / total as f64))
}

/// Picks the grid value with the best held-out accuracy; ties go to the
/// smaller value. Returns `None` when no fold was usable.
fn search(
    grid: &[f64],
    mut eval: impl FnMut(f64) -> Result<Option<f64>>,
) -> Result<Option<f64>> {
    let grid = Grids::sorted(grid);
    if grid.len() == 1 {
        return Ok(Some(grid[0]));
    }
    let mut best: Option<(f64, f64)> = None;
    for v in grid {
        match eval(v)? {
            Some(acc) if best.is_none_or(|(_, b)| acc > b) => best = Some((v, acc)),
            Some(_) => {}
            None => return Ok(None),
        }
    }
    Ok(best.map(|(v, _)| v))
}

/// Sequential search: sigma^2 first (NB alpha held at the grid midpoint),
/// then alpha with the chosen sigma^2. Training in each fold treats the
/// held-out known nodes as unlabeled, so learning still sees them.
pub fn cross_validate_hyperparams(
    graph: &DataGraph,
    method: Method,
    kind: ClassifierKind,
    grids: &Grids,
    opts: CvOptions,
    seed: u64,
) -> Result<CvChoice> {
    grids.validate()?;
    if opts.folds < 2 {
        return Err(Error::Config("cv_folds must be at least 2".into()));
    }
    let mut choice = CvChoice {
        sigma_sq: Grids::midpoint(&grids.sigma_sq),
        nb_alpha: Grids::midpoint(&grids.alpha),
        warnings: Vec::new(),
    };
    if method == Method::RelatOnly {
        return Ok(choice);
    }
    let folds = stratified_folds(graph, opts.folds, seed);
    let m = cv_method(method, &opts);

    let alpha0 = choice.nb_alpha;
    match search(&grids.sigma_sq, |s| score(graph, &folds, m, &ClassifierSpec::new(kind, s, alpha0)))? {
        Some(s) => choice.sigma_sq = s,
        None => {
            let msg = format!("no usable CV folds for {} known nodes; using grid midpoints", graph.known_nodes().len());
            warn!("{msg}");
            choice.warnings.push(msg);
            return Ok(choice);
        }
    }
    if method.uses_classifier() && kind.uses_nb() {
        let s = choice.sigma_sq;
        if let Some(a) = search(&grids.alpha, |a| score(graph, &folds, m, &ClassifierSpec::new(kind, s, a)))? {
            choice.nb_alpha = a;
        }
    }
    Ok(choice)
}
