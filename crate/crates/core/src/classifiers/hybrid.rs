//! Product-rule combination of an attribute model and a relational model:
//! `p(y|x_A, x_R) ∝ p(y|x_A) p(y|x_R) / p(y)`.

use ndarray::ArrayView1;

use super::lr::LrModel;
use super::nb::NbRelationalModel;
use super::log_normalize;
use crate::error::{Error, Result};

pub fn hybrid_combine(p_attr: &[f64], p_rel: &[f64], prior: &[f64]) -> Result<Vec<f64>> {
    let k = prior.len();
    if p_attr.len() != k || p_rel.len() != k {
        return Err(Error::Usage("hybrid inputs must have equal length".into()));
    }
    if prior.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Contract(format!("prior must be strictly positive: {prior:?}")));
    }
    let mut logp: Vec<f64> = (0..k).map(|y| p_attr[y].ln() + p_rel[y].ln() - prior[y].ln()).collect();
    if logp.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::Contract("attribute and relational members have disjoint support".into()));
    }
    log_normalize(&mut logp);
    Ok(logp)
}

/// Relational half of a hybrid classifier.
#[derive(Debug, Clone)]
pub enum RelationalMember {
    /// LR over proportion features.
    Lr(LrModel),
    /// Naive Bayes over multiset features.
    Nb(NbRelationalModel),
}

impl RelationalMember {
    pub fn predict(&self, proportion: ArrayView1<f64>, counts: ArrayView1<u32>) -> Result<Vec<f64>> {
        match self {
            Self::Lr(m) => m.predict_proba(proportion),
            Self::Nb(m) => m.predict(counts),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HybridModel {
    pub attribute: LrModel,
    pub relational: RelationalMember,
    pub prior: Vec<f64>,
}

impl HybridModel {
    pub fn predict(
        &self,
        attrs: ArrayView1<f64>,
        proportion: ArrayView1<f64>,
        counts: ArrayView1<u32>,
    ) -> Result<Vec<f64>> {
        let pa = self.attribute.predict_proba(attrs)?;
        let pr = self.relational.predict(proportion, counts)?;
        hybrid_combine(&pa, &pr, &self.prior)
    }
}

/// Per-class weights `p(y|x_R) / p(y)`, rescaled to sum to one. The scale is
/// irrelevant to the weighted posterior; rescaling keeps logs well-conditioned.
pub fn relational_beta(p_rel: &[f64], prior: &[f64]) -> Result<Vec<f64>> {
    if prior.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Contract("prior must be strictly positive".into()));
    }
    let mut b: Vec<f64> = p_rel.iter().zip(prior).map(|(r, p)| (r / p).max(f64::MIN_POSITIVE)).collect();
    let s: f64 = b.iter().sum();
    b.iter_mut().for_each(|v| *v /= s);
    Ok(b)
}
