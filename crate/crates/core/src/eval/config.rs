//! Experiment configuration in `key = value` text form.
//!
//! ```text
//! # paths are relative to the config file
//! nodes = cora/nodes.tsv
//! edges = cora/edges.tsv
//! out_dir = results
//! densities = 0.01, 0.03, 0.05, 0.09
//! trials = 15
//! methods = ALL-EM, KNOWN-ONEPASS, NO-SSL, ATTR-ONLY, RELAT-ONLY
//! classifiers = LR+NB+Reg, LR
//! master_seed = 1
//! cv_folds = 5
//! sigma_grid = 0.01, 0.1, 1, 10, 100
//! alpha_grid = 0.1, 1, 10
//! pca_components = 100
//! normalize = zscore
//! cv_em_iterations = 1
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::cv::Grids;
use super::Method;
use crate::data::{NormalizeMode, PrepOptions};
use crate::error::{Error, Result};
use crate::ssl::ClassifierKind;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub out_dir: PathBuf,
    pub densities: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub classifiers: Vec<ClassifierKind>,
    pub master_seed: u64,
    pub cv_folds: usize,
    pub grids: Grids,
    pub prep: PrepOptions,
    /// Outer-loop cap for EM variants while cross-validating; `None` runs
    /// the full variant.
    pub cv_em_iterations: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nodes: PathBuf::from("nodes.tsv"),
            edges: PathBuf::from("edges.tsv"),
            out_dir: PathBuf::from("results"),
            densities: vec![0.01, 0.03, 0.05, 0.09],
            trials: 15,
            methods: vec![Method::Ssl(crate::ssl::SslVariant::ALL_EM)],
            classifiers: vec![ClassifierKind::LrNbReg],
            master_seed: 0,
            cv_folds: 5,
            grids: Grids::default(),
            prep: PrepOptions::default(),
            cv_em_iterations: None,
        }
    }
}

const KEYS: &[&str] = &[
    "nodes",
    "edges",
    "out_dir",
    "densities",
    "trials",
    "methods",
    "classifiers",
    "master_seed",
    "cv_folds",
    "sigma_grid",
    "alpha_grid",
    "pca_components",
    "normalize",
    "cv_em_iterations",
];

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'"))))
        .collect()
}

fn scalar<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key '{k}'", n + 1)));
            }
            if kv.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", n + 1)));
            }
        }
        let mut cfg = Self::default();
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() { p } else { base.join(p) }
        };
        for (k, v) in &kv {
            match k.as_str() {
                "nodes" => cfg.nodes = path(v),
                "edges" => cfg.edges = path(v),
                "out_dir" => cfg.out_dir = path(v),
                "densities" => cfg.densities = list(k, v)?,
                "trials" => cfg.trials = scalar(k, v)?,
                "methods" => cfg.methods = list(k, v)?,
                "classifiers" => cfg.classifiers = list(k, v)?,
                "master_seed" => cfg.master_seed = scalar(k, v)?,
                "cv_folds" => cfg.cv_folds = scalar(k, v)?,
                "sigma_grid" => cfg.grids.sigma_sq = list(k, v)?,
                "alpha_grid" => cfg.grids.alpha = list(k, v)?,
                "pca_components" => {
                    let n: usize = scalar(k, v)?;
                    cfg.prep.pca_components = (n > 0).then_some(n);
                }
                "normalize" => cfg.prep.normalize = v.parse::<NormalizeMode>()?,
                "cv_em_iterations" => {
                    let n: usize = scalar(k, v)?;
                    cfg.cv_em_iterations = (n > 0).then_some(n);
                }
                _ => unreachable!("key list checked above"),
            }
        }
        for required in ["nodes", "edges"] {
            if !kv.contains_key(required) {
                return Err(Error::Config(format!("missing required key '{required}'")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.densities.is_empty() || self.densities.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(Error::Config("densities must be non-empty and strictly between 0 and 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.classifiers.is_empty() && self.methods.iter().any(|m| m.uses_classifier()) {
            return Err(Error::Config("at least one classifier is required".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be >= 2".into()));
        }
        self.grids.validate()
    }
}
