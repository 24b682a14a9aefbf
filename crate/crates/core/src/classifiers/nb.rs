//! Naive Bayes over count vectors with Dirichlet smoothing.
//!
//! Used for multiset relational features, where column `c` counts the
//! neighbors labeled `c` and each neighbor label is treated as an independent
//! draw from the node class's row of the table.

use log::debug;
use ndarray::{Array2, ArrayView1, ArrayView2};

use super::log_normalize;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NbRelationalModel {
    class_prior: Vec<f64>,
    neighbor_table: Array2<f64>,
    log_table: Array2<f64>,
    alpha: f64,
    /// Classes with no training rows; their table row is uniform.
    pub empty_classes: Vec<usize>,
}

impl NbRelationalModel {
    pub fn from_parts(class_prior: Vec<f64>, neighbor_table: Array2<f64>, alpha: f64) -> Result<Self> {
        if class_prior.len() != neighbor_table.nrows() {
            return Err(Error::Usage("prior length must equal table rows".into()));
        }
        if neighbor_table.iter().any(|p| !(*p > 0.0)) || class_prior.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::Usage("NB probabilities must be strictly positive".into()));
        }
        let log_table = neighbor_table.mapv(f64::ln);
        Ok(Self { class_prior, neighbor_table, log_table, alpha, empty_classes: Vec::new() })
    }

    pub fn class_prior(&self) -> &[f64] {
        &self.class_prior
    }

    pub fn neighbor_table(&self) -> &Array2<f64> {
        &self.neighbor_table
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_classes(&self) -> usize {
        self.class_prior.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.neighbor_table.ncols()
    }

    /// `normalize_y(prior_y * prod_c table[y][c]^counts[c])`, in log space.
    pub fn predict(&self, counts: ArrayView1<u32>) -> Result<Vec<f64>> {
        if counts.len() != self.feature_dim() {
            return Err(Error::Usage(format!(
                "count vector has length {}, model expects {}",
                counts.len(),
                self.feature_dim()
            )));
        }
        let mut logp: Vec<f64> = self.class_prior.iter().map(|p| p.ln()).collect();
        for (y, lp) in logp.iter_mut().enumerate() {
            for (c, &n) in counts.iter().enumerate() {
                if n > 0 {
                    *lp += f64::from(n) * self.log_table[[y, c]];
                }
            }
        }
        log_normalize(&mut logp);
        Ok(logp)
    }
}

/// `table[y][c] = (sum_{i: y_i = y} counts[i][c] + alpha) / (sum_{i: y_i = y} |counts[i]| + m alpha)`
/// with prior `(n_y + alpha) / (N + |C| alpha)`.
pub fn nb_relational_train(
    counts: ArrayView2<u32>,
    labels: &[usize],
    num_classes: usize,
    alpha: f64,
) -> Result<NbRelationalModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    if labels.is_empty() {
        return Err(Error::Usage("training set is empty".into()));
    }
    if counts.nrows() != labels.len() {
        return Err(Error::Usage(format!("{} count rows but {} labels", counts.nrows(), labels.len())));
    }
    if let Some(c) = labels.iter().find(|&&c| c >= num_classes) {
        return Err(Error::Usage(format!("label {c} out of range for {num_classes} classes")));
    }
    let m = counts.ncols();
    let mut sums = Array2::<f64>::zeros((num_classes, m));
    let mut class_n = vec![0.0; num_classes];
    for (row, &y) in counts.rows().into_iter().zip(labels) {
        class_n[y] += 1.0;
        for (c, &n) in row.iter().enumerate() {
            sums[[y, c]] += f64::from(n);
        }
    }
    let mut table = Array2::zeros((num_classes, m));
    for y in 0..num_classes {
        let total: f64 = sums.row(y).sum();
        let denom = total + m as f64 * alpha;
        for c in 0..m {
            table[[y, c]] = (sums[[y, c]] + alpha) / denom;
        }
    }
    let n = labels.len() as f64;
    let k = num_classes as f64;
    let prior = class_n.iter().map(|&c| (c + alpha) / (n + k * alpha)).collect();
    let mut model = NbRelationalModel::from_parts(prior, table, alpha)?;
    model.empty_classes = (0..num_classes).filter(|&y| class_n[y] == 0.0).collect();
    if !model.empty_classes.is_empty() {
        debug!("NB classes without training rows: {:?}", model.empty_classes);
    }
    Ok(model)
}

pub fn nb_relational_predict(model: &NbRelationalModel, counts: ArrayView1<u32>) -> Result<Vec<f64>> {
    model.predict(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_node_table_row() {
        let counts = array![[2u32, 0]];
        let m = nb_relational_train(counts.view(), &[0], 2, 1.0).unwrap();
        assert!((m.neighbor_table()[[0, 0]] - 0.75).abs() < 1e-15);
        assert!((m.neighbor_table()[[0, 1]] - 0.25).abs() < 1e-15);
        // class 1 unseen: uniform fallback, flagged
        assert_eq!(m.neighbor_table().row(1).to_vec(), vec![0.5, 0.5]);
        assert_eq!(m.empty_classes, vec![1]);
    }

    #[test]
    fn large_alpha_flattens_rows() {
        let counts = array![[5u32, 0, 1], [0, 3, 0], [2, 2, 9]];
        let m = nb_relational_train(counts.view(), &[0, 1, 2], 3, 1e6).unwrap();
        for v in m.neighbor_table().iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-3);
        }
    }

    #[test]
    fn zero_counts_return_prior() {
        let m = NbRelationalModel::from_parts(vec![0.2, 0.8], array![[0.9, 0.1], [0.3, 0.7]], 1.0).unwrap();
        let p = m.predict(array![0u32, 0].view()).unwrap();
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn uniform_rows_return_prior() {
        let m = NbRelationalModel::from_parts(vec![0.3, 0.7], array![[0.5, 0.5], [0.5, 0.5]], 1.0).unwrap();
        let p = m.predict(array![7u32, 2].view()).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn one_factor_bayes() {
        let m = NbRelationalModel::from_parts(vec![0.5, 0.5], array![[0.9, 0.1], [0.1, 0.9]], 1.0).unwrap();
        let p = nb_relational_predict(&m, array![1u32, 0].view()).unwrap();
        assert!((p[0] - 0.9).abs() < 1e-14 && (p[1] - 0.1).abs() < 1e-14);
    }

    #[test]
    fn many_neighbors_no_underflow() {
        let m = NbRelationalModel::from_parts(vec![0.5, 0.5], array![[0.9, 0.1], [0.1, 0.9]], 1.0).unwrap();
        let p = m.predict(array![2000u32, 1999].view()).unwrap();
        assert!((p[0] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn bad_alpha() {
        assert!(matches!(nb_relational_train(array![[1u32]].view(), &[0], 2, 0.0), Err(Error::Config(_))));
    }
}
