//! Synthetic homophilous graphs with noisy class-dependent attributes.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};

use crate::data::{prepare, AttrValue, ColumnKind, Dataset, PrepOptions, RawDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub nodes: usize,
    pub classes: usize,
    /// Probability that a generated link joins two nodes of the same class.
    pub homophily: f64,
    /// Standard deviation of the Gaussian attribute noise.
    pub attr_noise: f64,
    pub attrs: usize,
    /// Links started by each node; average degree is about twice this.
    pub links_per_node: usize,
    /// Relative class frequencies; uniform when `None`.
    pub class_weights: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            nodes: 500,
            classes: 2,
            homophily: 0.8,
            attr_noise: 1.0,
            attrs: 10,
            links_per_node: 2,
            class_weights: None,
            seed: 0,
        }
    }
}

/// Class `c`'s mean has a 1 in every attribute `j` with `j % classes == c`.
pub fn generate_raw(p: &SyntheticParams) -> Result<RawDataset> {
    if p.nodes < 2 || p.classes < 2 || p.attrs == 0 || p.links_per_node == 0 {
        return Err(Error::Config("synthetic graph needs >= 2 nodes, >= 2 classes, >= 1 attribute and link".into()));
    }
    if !(0.0..=1.0).contains(&p.homophily) || !(p.attr_noise >= 0.0) {
        return Err(Error::Config("homophily must be in [0,1] and attr_noise >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let weights = p.class_weights.clone().unwrap_or_else(|| vec![1.0; p.classes]);
    if weights.len() != p.classes {
        return Err(Error::Config("class_weights length must equal classes".into()));
    }
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::Config(format!("class weights: {e}")))?;
    let labels: Vec<usize> = (0..p.nodes).map(|_| pick.sample(&mut rng)).collect();

    let mut by_class = vec![Vec::new(); p.classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..p.nodes {
        for _ in 0..p.links_per_node {
            let same = rng.random_bool(p.homophily);
            let pool: Vec<usize> = if same {
                by_class[labels[i]].iter().copied().filter(|&j| j != i).collect()
            } else {
                (0..p.nodes).filter(|&j| labels[j] != labels[i]).collect()
            };
            let j = match pool.choose(&mut rng) {
                Some(&j) => j,
                // class too small (or only one class drawn): link anywhere
                None => {
                    let j = rng.random_range(0..p.nodes - 1);
                    if j >= i { j + 1 } else { j }
                }
            };
            edges.insert((i.min(j), i.max(j)));
        }
    }

    let noise = Normal::new(0.0, p.attr_noise.max(f64::MIN_POSITIVE)).expect("valid normal");
    let values = labels
        .iter()
        .map(|&c| {
            (0..p.attrs)
                .map(|j| {
                    let mean = if j % p.classes == c { 1.0 } else { 0.0 };
                    let e = if p.attr_noise > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                    AttrValue::Real(mean + e)
                })
                .collect()
        })
        .collect();

    Ok(RawDataset {
        ids: (0..p.nodes).map(|i| format!("n{i}")).collect(),
        labels: labels.iter().map(|c| format!("c{c}")).collect(),
        schema: vec![ColumnKind::Real; p.attrs],
        values,
        edges: edges.into_iter().collect(),
    })
}

/// Generates and preprocesses (z-scored attributes) in one step.
pub fn generate(p: &SyntheticParams) -> Result<Dataset> {
    prepare(&generate_raw(p)?, PrepOptions::default())
}
