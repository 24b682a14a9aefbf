//! Probabilistic node classifiers.

pub mod hybrid;
pub mod labelreg;
pub mod lr;
pub mod nb;
pub mod optim;

use ndarray::{ArrayView1, Axis};

pub use hybrid::{hybrid_combine, relational_beta, HybridModel, RelationalMember};
pub use labelreg::{
    empirical_label_distribution, kl_penalty, label_reg_gradient, lr_train_label_reg, LabelRegConfig,
    LabelRegProblem,
};
pub use lr::{lr_predict_proba, lr_train, lr_train_weighted, LrModel};
pub use nb::{nb_relational_predict, nb_relational_train, NbRelationalModel};
pub use optim::{AscentOptions, FitDiagnostics};

use crate::error::Result;

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Turns log-scores into a probability distribution in place.
pub(crate) fn log_normalize(v: &mut [f64]) {
    let lse = log_sum_exp(v);
    for x in v.iter_mut() {
        *x = (*x - lse).exp();
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// The node classifier `M_AR` used inside collective inference.
#[derive(Debug, Clone)]
pub enum NodeModel {
    /// Single LR over `[attributes | proportion features]`.
    Lr(LrModel),
    Hybrid(HybridModel),
}

impl NodeModel {
    pub fn predict(
        &self,
        attrs: ArrayView1<f64>,
        proportion: ArrayView1<f64>,
        counts: ArrayView1<u32>,
    ) -> Result<Vec<f64>> {
        match self {
            Self::Lr(m) => {
                let x = ndarray::concatenate(Axis(0), &[attrs, proportion]).expect("1-D concat");
                m.predict_proba(x.view())
            }
            Self::Hybrid(h) => h.predict(attrs, proportion, counts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.1, 0.2, 0.7]), 2);
    }

    #[test]
    fn lse_handles_large_values() {
        let v = [1000.0, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
