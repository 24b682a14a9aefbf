//! Multinomial logistic regression with a Gaussian prior on the weights.
//!
//! Parameters are stored as a `|C| x (d + 1)` matrix; the last column is the
//! bias, which is treated as a constant-1 feature and left out of the prior.
//! Training optionally takes per-row class weights `beta` (the hybrid form
//! `p(y|x) = beta_y exp(x.theta_y) / Z`) and an optional label-regularization
//! term over an unlabeled pool.

use log::warn;
use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};

use super::optim::{maximize, AscentOptions, FitDiagnostics};
use super::{log_normalize, log_sum_exp};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LrModel {
    theta: Array2<f64>,
    sigma_sq: f64,
    pub diagnostics: Option<FitDiagnostics>,
}

impl LrModel {
    pub fn from_theta(theta: Array2<f64>, sigma_sq: f64) -> Result<Self> {
        if theta.nrows() < 2 || theta.ncols() < 1 {
            return Err(Error::Usage(format!("theta shape {:?} invalid", theta.dim())));
        }
        check_sigma(sigma_sq)?;
        Ok(Self { theta, sigma_sq, diagnostics: None })
    }

    pub fn zeros(num_classes: usize, feature_dim: usize, sigma_sq: f64) -> Result<Self> {
        Self::from_theta(Array2::zeros((num_classes, feature_dim + 1)), sigma_sq)
    }

    pub fn theta(&self) -> &Array2<f64> {
        &self.theta
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn num_classes(&self) -> usize {
        self.theta.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.theta.ncols() - 1
    }

    /// `x . theta_y + bias_y` for every class.
    pub fn scores(&self, x: ArrayView1<f64>) -> Result<Vec<f64>> {
        if x.len() != self.feature_dim() {
            return Err(Error::Usage(format!(
                "feature vector has length {}, model expects {}",
                x.len(),
                self.feature_dim()
            )));
        }
        Ok(scores_unchecked(&self.theta, x))
    }

    pub fn predict_proba(&self, x: ArrayView1<f64>) -> Result<Vec<f64>> {
        let mut s = self.scores(x)?;
        log_normalize(&mut s);
        Ok(s)
    }

    /// `beta_y exp(x . theta_y) / Z`.
    pub fn predict_proba_weighted(&self, x: ArrayView1<f64>, beta: &[f64]) -> Result<Vec<f64>> {
        let mut s = self.scores(x)?;
        if beta.len() != s.len() {
            return Err(Error::Usage(format!("beta has {} entries for {} classes", beta.len(), s.len())));
        }
        for (si, b) in s.iter_mut().zip(beta) {
            *si += b.ln();
        }
        log_normalize(&mut s);
        Ok(s)
    }
}

pub fn lr_predict_proba(model: &LrModel, x: ArrayView1<f64>) -> Result<Vec<f64>> {
    model.predict_proba(x)
}

pub(crate) fn scores_unchecked(theta: &Array2<f64>, x: ArrayView1<f64>) -> Vec<f64> {
    let d = x.len();
    theta
        .rows()
        .into_iter()
        .map(|row| {
            let mut s = row[d];
            for k in 0..d {
                s += row[k] * x[k];
            }
            s
        })
        .collect()
}

fn check_sigma(sigma_sq: f64) -> Result<()> {
    if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
        return Err(Error::Config(format!("sigma_sq must be positive, got {sigma_sq}")));
    }
    Ok(())
}

pub(crate) fn check_finite(x: ArrayView2<f64>, what: &str) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("{what} contain non-finite values")));
    }
    Ok(())
}

/// Label-regularization term of the training objective.
pub(crate) struct RegTerm<'a> {
    pub features: ArrayView2<'a, f64>,
    pub log_beta: Array2<f64>,
    pub target: &'a [f64],
    pub lambda: f64,
    pub floor: f64,
}

/// Everything the penalized log-likelihood needs.
pub(crate) struct Objective<'a> {
    pub features: ArrayView2<'a, f64>,
    pub labels: &'a [usize],
    /// Per-row `ln beta`; `None` means plain softmax.
    pub log_beta: Option<Array2<f64>>,
    pub num_classes: usize,
    pub sigma_sq: f64,
    pub reg: Option<RegTerm<'a>>,
}

impl Objective<'_> {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Log-likelihood minus Gaussian penalty minus `lambda * KL`, with gradient.
    pub fn value_and_grad(&self, flat: &[f64]) -> (f64, Vec<f64>) {
        let k = self.num_classes;
        let d = self.dim();
        let w = d + 1;
        let theta = ArrayView2::from_shape((k, w), flat).expect("theta shape");

        let mut s = linear_scores(theta, self.features);
        if let Some(lb) = &self.log_beta {
            s += lb;
        }
        // s becomes the residual onehot(y) - p(y|x)
        let mut value = 0.0;
        for (mut row, &yi) in s.rows_mut().into_iter().zip(self.labels) {
            let r = row.as_slice_mut().expect("standard layout");
            let lse = log_sum_exp(r);
            value += r[yi] - lse;
            for v in r.iter_mut() {
                *v = -(*v - lse).exp();
            }
            r[yi] += 1.0;
        }
        let mut grad = linear_grad(s.view(), self.features);

        let inv = 1.0 / self.sigma_sq;
        for c in 0..k {
            for j in 0..d {
                let t = theta[[c, j]];
                value -= 0.5 * inv * t * t;
                grad[[c, j]] -= inv * t;
            }
        }

        if let Some(reg) = &self.reg {
            if reg.lambda > 0.0 && reg.features.nrows() > 0 {
                let (delta, dgrad) =
                    kl_and_gradient(theta, reg.features, &reg.log_beta, reg.target, reg.floor);
                value -= reg.lambda * delta;
                grad.scaled_add(-reg.lambda, &dgrad);
            }
        }
        (value, grad.into_raw_vec_and_offset().0)
    }
}

/// `x · W^T + b` for every row, where `theta = [W | b]`.
fn linear_scores(theta: ArrayView2<f64>, x: ArrayView2<f64>) -> Array2<f64> {
    let d = x.ncols();
    let mut s = Array2::zeros((x.nrows(), theta.nrows()));
    general_mat_mul(1.0, &x, &theta.slice(s![.., ..d]).t(), 0.0, &mut s);
    s += &theta.column(d);
    s
}

/// `coef^T · [x | 1]`: the parameter gradient for per-row, per-class coefficients.
fn linear_grad(coef: ArrayView2<f64>, x: ArrayView2<f64>) -> Array2<f64> {
    let (k, d) = (coef.ncols(), x.ncols());
    let mut g = Array2::zeros((k, d + 1));
    g.slice_mut(s![.., ..d]).assign(&coef.t().dot(&x));
    g.column_mut(d).assign(&coef.sum_axis(Axis(0)));
    g
}

/// Per-row weighted posteriors `p_theta(y|x)` over an unlabeled pool.
pub(crate) fn weighted_posteriors(
    theta: ArrayView2<f64>,
    features: ArrayView2<f64>,
    log_beta: &Array2<f64>,
) -> Array2<f64> {
    let mut s = linear_scores(theta, features);
    s += log_beta;
    for mut row in s.rows_mut() {
        log_normalize(row.as_slice_mut().expect("standard layout"));
    }
    s
}

/// KL(target || p_hat) and its gradient with respect to theta, following
/// dKL/dtheta_{y,k} = sum_x x_k p(y|x)/|X^U| [ sum_y' (t_y'/p_hat_y') p(y'|x) - t_y/p_hat_y ].
pub(crate) fn kl_and_gradient(
    theta: ArrayView2<f64>,
    features: ArrayView2<f64>,
    log_beta: &Array2<f64>,
    target: &[f64],
    floor: f64,
) -> (f64, Array2<f64>) {
    let k = theta.nrows();
    let n = features.nrows() as f64;
    let mut post = weighted_posteriors(theta, features, log_beta);
    let p_hat: Vec<f64> = (0..k).map(|c| (post.column(c).sum() / n).max(floor)).collect();
    let delta = kl_floored(target, &p_hat, floor);
    let ratio: Vec<f64> = (0..k).map(|c| target[c] / p_hat[c]).collect();

    // post becomes the per-row coefficient p(c|x) (mix - ratio_c) / n
    for mut row in post.rows_mut() {
        let mix: f64 = row.iter().zip(&ratio).map(|(p, r)| p * r).sum();
        for (p, r) in row.iter_mut().zip(&ratio) {
            *p *= (mix - r) / n;
        }
    }
    (delta, linear_grad(post.view(), features))
}

pub(crate) fn kl_floored(target: &[f64], empirical: &[f64], floor: f64) -> f64 {
    target
        .iter()
        .zip(empirical)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, e)| t * (t / e.max(floor)).ln())
        .sum::<f64>()
        .max(0.0)
}

pub(crate) fn log_beta_matrix(beta: ArrayView2<f64>, num_classes: usize) -> Result<Array2<f64>> {
    if beta.ncols() != num_classes {
        return Err(Error::Usage(format!("beta has {} columns for {num_classes} classes", beta.ncols())));
    }
    if beta.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::Input("beta entries must be strictly positive and finite".into()));
    }
    Ok(beta.mapv(f64::ln))
}

pub(crate) fn fit(objective: &Objective, opts: AscentOptions) -> Result<LrModel> {
    let k = objective.num_classes;
    let w = objective.dim() + 1;
    let (flat, diag) = maximize(|t| objective.value_and_grad(t), vec![0.0; k * w], opts);
    if !diag.converged {
        warn!(
            "logistic regression did not converge in {} iterations (objective {:.6})",
            diag.iterations, diag.objective
        );
    }
    let theta = Array2::from_shape_vec((k, w), flat).expect("theta shape");
    let mut model = LrModel::from_theta(theta, objective.sigma_sq)?;
    model.diagnostics = Some(diag);
    Ok(model)
}

pub(crate) fn validate_training(
    features: ArrayView2<f64>,
    labels: &[usize],
    num_classes: usize,
    sigma_sq: f64,
) -> Result<()> {
    if features.nrows() == 0 {
        return Err(Error::Usage("training set is empty".into()));
    }
    if features.nrows() != labels.len() {
        return Err(Error::Usage(format!("{} feature rows but {} labels", features.nrows(), labels.len())));
    }
    if num_classes < 2 {
        return Err(Error::Usage("need at least 2 classes".into()));
    }
    if let Some(c) = labels.iter().find(|&&c| c >= num_classes) {
        return Err(Error::Usage(format!("label {c} out of range for {num_classes} classes")));
    }
    check_sigma(sigma_sq)?;
    check_finite(features, "features")
}

/// Fits plain softmax regression by maximizing penalized log-likelihood.
pub fn lr_train(
    features: ArrayView2<f64>,
    labels: &[usize],
    num_classes: usize,
    sigma_sq: f64,
) -> Result<LrModel> {
    validate_training(features, labels, num_classes, sigma_sq)?;
    let obj = Objective { features, labels, log_beta: None, num_classes, sigma_sq, reg: None };
    fit(&obj, AscentOptions::default())
}

/// Like [`lr_train`] but each row's likelihood uses the `beta`-weighted model.
pub fn lr_train_weighted(
    features: ArrayView2<f64>,
    labels: &[usize],
    beta: ArrayView2<f64>,
    num_classes: usize,
    sigma_sq: f64,
) -> Result<LrModel> {
    validate_training(features, labels, num_classes, sigma_sq)?;
    if beta.nrows() != features.nrows() {
        return Err(Error::Usage("beta rows must match feature rows".into()));
    }
    let log_beta = Some(log_beta_matrix(beta, num_classes)?);
    let obj = Objective { features, labels, log_beta, num_classes, sigma_sq, reg: None };
    fit(&obj, AscentOptions::default())
}
