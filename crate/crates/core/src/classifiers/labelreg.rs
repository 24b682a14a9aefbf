//! Label regularization for the attribute member of a hybrid classifier.
//!
//! The relational member is trained first and frozen; its output enters the
//! attribute model as per-node class weights `beta_y = p(y|x_R) / p(y)`
//! (up to a per-node constant). The attribute LR is then trained with an
//! extra `-lambda * KL(p_tilde || p_hat)` term, where `p_hat` is the mean
//! weighted posterior over the unlabeled pool.

use ndarray::{Array2, ArrayView2};

use super::lr::{
    check_finite, fit, kl_and_gradient, kl_floored, log_beta_matrix, validate_training, weighted_posteriors,
    LrModel, Objective, RegTerm,
};
use super::optim::AscentOptions;
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRegConfig {
    /// Expected label distribution `p_tilde`.
    pub target_dist: Vec<f64>,
    pub lambda: f64,
    pub epsilon_floor: f64,
    /// When false, known-node likelihood uses plain softmax instead of the
    /// beta-weighted model.
    pub weighted_likelihood: bool,
}

impl LabelRegConfig {
    /// `lambda = 10 * |V^K|`.
    pub fn new(target_dist: Vec<f64>, known_count: usize) -> Result<Self> {
        let cfg = Self {
            target_dist,
            lambda: 10.0 * known_count as f64,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
            weighted_likelihood: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.target_dist.iter().sum();
        if self.target_dist.iter().any(|p| !(*p > 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "target distribution must be strictly positive and sum to 1: {:?}",
                self.target_dist
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.epsilon_floor > 0.0) {
            return Err(Error::Config("epsilon_floor must be positive".into()));
        }
        Ok(())
    }
}

fn check_pool(model: &LrModel, features: ArrayView2<f64>, beta: ArrayView2<f64>) -> Result<Array2<f64>> {
    if features.nrows() == 0 {
        return Err(Error::Config("unlabeled set is empty".into()));
    }
    if features.ncols() != model.feature_dim() {
        return Err(Error::Usage(format!(
            "features have {} columns, model expects {}",
            features.ncols(),
            model.feature_dim()
        )));
    }
    if beta.nrows() != features.nrows() {
        return Err(Error::Usage("beta rows must match feature rows".into()));
    }
    check_finite(features, "unlabeled features")?;
    log_beta_matrix(beta, model.num_classes())
}

/// Mean weighted posterior `p_hat(y)` over the unlabeled pool.
pub fn empirical_label_distribution(
    model: &LrModel,
    unlabeled_features: ArrayView2<f64>,
    beta: ArrayView2<f64>,
) -> Result<Vec<f64>> {
    let log_beta = check_pool(model, unlabeled_features, beta)?;
    let post = weighted_posteriors(model.theta().view(), unlabeled_features, &log_beta);
    let n = post.nrows() as f64;
    Ok(post.columns().into_iter().map(|c| c.sum() / n).collect())
}

/// `sum_y target(y) ln(target(y) / empirical(y))`, with `empirical` floored.
pub fn kl_penalty(target: &[f64], empirical: &[f64]) -> f64 {
    kl_floored(target, empirical, DEFAULT_EPSILON_FLOOR)
}

/// Gradient of [`kl_penalty`] with respect to every parameter, bias column
/// included.
pub fn label_reg_gradient(
    model: &LrModel,
    unlabeled_features: ArrayView2<f64>,
    beta: ArrayView2<f64>,
    target: &[f64],
) -> Result<Array2<f64>> {
    let log_beta = check_pool(model, unlabeled_features, beta)?;
    if target.len() != model.num_classes() {
        return Err(Error::Usage("target length must equal class count".into()));
    }
    let (_, g) =
        kl_and_gradient(model.theta().view(), unlabeled_features, &log_beta, target, DEFAULT_EPSILON_FLOOR);
    Ok(g)
}

/// Inputs to [`lr_train_label_reg`]. Beta matrices are frozen for the run.
#[derive(Debug, Clone, Copy)]
pub struct LabelRegProblem<'a> {
    pub known_features: ArrayView2<'a, f64>,
    pub known_labels: &'a [usize],
    pub known_beta: ArrayView2<'a, f64>,
    pub unlabeled_features: ArrayView2<'a, f64>,
    pub unlabeled_beta: ArrayView2<'a, f64>,
}

pub fn lr_train_label_reg(
    problem: LabelRegProblem,
    config: &LabelRegConfig,
    num_classes: usize,
    sigma_sq: f64,
) -> Result<LrModel> {
    config.validate()?;
    validate_training(problem.known_features, problem.known_labels, num_classes, sigma_sq)?;
    if config.target_dist.len() != num_classes {
        return Err(Error::Config("target distribution length must equal class count".into()));
    }
    if problem.known_beta.nrows() != problem.known_features.nrows() {
        return Err(Error::Usage("known beta rows must match known feature rows".into()));
    }
    if problem.unlabeled_features.nrows() > 0 && problem.unlabeled_features.ncols() != problem.known_features.ncols()
    {
        return Err(Error::Usage("known and unlabeled feature widths differ".into()));
    }
    if problem.unlabeled_beta.nrows() != problem.unlabeled_features.nrows() {
        return Err(Error::Usage("unlabeled beta rows must match unlabeled feature rows".into()));
    }
    check_finite(problem.unlabeled_features, "unlabeled features")?;

    let log_beta = if config.weighted_likelihood {
        Some(log_beta_matrix(problem.known_beta, num_classes)?)
    } else {
        None
    };
    let reg = RegTerm {
        features: problem.unlabeled_features,
        log_beta: log_beta_matrix(problem.unlabeled_beta, num_classes)?,
        target: &config.target_dist,
        lambda: config.lambda,
        floor: config.epsilon_floor,
    };
    let obj = Objective {
        features: problem.known_features,
        labels: problem.known_labels,
        log_beta,
        num_classes,
        sigma_sq,
        reg: Some(reg),
    };
    fit(&obj, AscentOptions::default())
}
