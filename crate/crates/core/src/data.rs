//! Dataset loading and preprocessing.
//!
//! Node file (tab-separated, `#` comment lines ignored):
//!
//! ```text
//! node_id	label	real	real	cat
//! n1	Theory	0.25	1.5	red
//! ```
//!
//! The header's first two fields are column names; every following field
//! declares an attribute column as `real` or `cat` (optionally `name:real`).
//! The edge file holds one `src_id<TAB>dst_id` pair per row.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::graph::DataGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Real,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Real(f64),
    Cat(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub ids: Vec<String>,
    pub labels: Vec<String>,
    pub schema: Vec<ColumnKind>,
    pub values: Vec<Vec<AttrValue>>,
    /// Undirected edges as `(a, b)` with `a < b`, sorted and unique.
    pub edges: Vec<(usize, usize)>,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_schema(token: &str, line: usize) -> Result<ColumnKind> {
    let kind = token.rsplit(':').next().unwrap_or(token).trim();
    match kind {
        "real" => Ok(ColumnKind::Real),
        "cat" => Ok(ColumnKind::Categorical),
        other => Err(Error::Load { line, msg: format!("unknown column type '{other}' (expected real or cat)") }),
    }
}

pub fn parse_nodes(text: &str) -> Result<(Vec<String>, Vec<String>, Vec<ColumnKind>, Vec<Vec<AttrValue>>)> {
    let mut lines = data_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Load { line: 0, msg: "node file is empty".into() })?;
    let htoks: Vec<&str> = header.split('\t').collect();
    if htoks.len() < 2 {
        return Err(Error::Load { line: hline, msg: "header needs node_id and label columns".into() });
    }
    let schema = htoks[2..].iter().map(|t| parse_schema(t, hline)).collect::<Result<Vec<_>>>()?;

    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut seen = HashMap::new();
    for (line, row) in lines {
        let toks: Vec<&str> = row.split('\t').collect();
        if toks.len() != schema.len() + 2 {
            return Err(Error::Load {
                line,
                msg: format!("malformed row: expected {} fields, found {}", schema.len() + 2, toks.len()),
            });
        }
        let id = toks[0].to_string();
        if seen.insert(id.clone(), line).is_some() {
            return Err(Error::Load { line, msg: format!("duplicate node id '{id}'") });
        }
        let mut row_vals = Vec::with_capacity(schema.len());
        for (tok, kind) in toks[2..].iter().zip(&schema) {
            row_vals.push(match kind {
                ColumnKind::Real => {
                    let v: f64 = tok
                        .trim()
                        .parse()
                        .map_err(|_| Error::Load { line, msg: format!("malformed real value '{tok}'") })?;
                    if !v.is_finite() {
                        return Err(Error::Load { line, msg: format!("non-finite value '{tok}'") });
                    }
                    AttrValue::Real(v)
                }
                ColumnKind::Categorical => AttrValue::Cat(tok.trim().to_string()),
            });
        }
        ids.push(id);
        labels.push(toks[1].trim().to_string());
        values.push(row_vals);
    }
    Ok((ids, labels, schema, values))
}

/// Parses an edge list against known ids; direction is dropped and
/// duplicates collapse. Self-loops are discarded.
pub fn parse_edges(text: &str, ids: &[String]) -> Result<Vec<(usize, usize)>> {
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut edges = BTreeSet::new();
    for (line, row) in data_lines(text) {
        let toks: Vec<&str> = row.split('\t').collect();
        if toks.len() != 2 {
            return Err(Error::Load { line, msg: format!("malformed edge row: expected 2 fields, found {}", toks.len()) });
        }
        let mut ends = [0usize; 2];
        for (e, tok) in ends.iter_mut().zip(&toks) {
            *e = *index
                .get(tok.trim())
                .ok_or_else(|| Error::Load { line, msg: format!("unknown node id '{}'", tok.trim()) })?;
        }
        let [a, b] = ends;
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    Ok(edges.into_iter().collect())
}

pub fn load_dataset(node_path: &Path, edge_path: &Path) -> Result<RawDataset> {
    let node_text = fs::read_to_string(node_path)?;
    let (ids, labels, schema, values) = parse_nodes(&node_text)?;
    let edge_text = fs::read_to_string(edge_path)?;
    let edges = parse_edges(&edge_text, &ids)?;
    Ok(RawDataset { ids, labels, schema, values, edges })
}

/// Writes a real-valued dataset in the node/edge file format.
pub fn write_dataset(raw: &RawDataset, node_path: &Path, edge_path: &Path) -> Result<()> {
    let mut out = String::from("node_id\tlabel");
    for k in &raw.schema {
        out.push_str(match k {
            ColumnKind::Real => "\treal",
            ColumnKind::Categorical => "\tcat",
        });
    }
    out.push('\n');
    for i in 0..raw.ids.len() {
        out.push_str(&raw.ids[i]);
        out.push('\t');
        out.push_str(&raw.labels[i]);
        for v in &raw.values[i] {
            out.push('\t');
            match v {
                AttrValue::Real(x) => out.push_str(&format!("{x}")),
                AttrValue::Cat(s) => out.push_str(s),
            }
        }
        out.push('\n');
    }
    fs::File::create(node_path)?.write_all(out.as_bytes())?;
    let mut e = String::new();
    for &(a, b) in &raw.edges {
        e.push_str(&format!("{}\t{}\n", raw.ids[a], raw.ids[b]));
    }
    fs::File::create(edge_path)?.write_all(e.as_bytes())?;
    Ok(())
}

/// Drops nodes without links and reindexes the edge list.
pub fn remove_isolated(raw: &RawDataset) -> Result<RawDataset> {
    let n = raw.ids.len();
    let mut deg = vec![0usize; n];
    for &(a, b) in &raw.edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| deg[i] > 0).collect();
    if keep.is_empty() {
        return Err(Error::Data("no nodes remain after removing isolated nodes".into()));
    }
    let mut remap = vec![usize::MAX; n];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = new;
    }
    Ok(RawDataset {
        ids: keep.iter().map(|&i| raw.ids[i].clone()).collect(),
        labels: keep.iter().map(|&i| raw.labels[i].clone()).collect(),
        schema: raw.schema.clone(),
        values: keep.iter().map(|&i| raw.values[i].clone()).collect(),
        edges: raw.edges.iter().map(|&(a, b)| (remap[a], remap[b])).collect(),
    })
}

/// One-hot expands every categorical column; categories are ordered
/// lexicographically.
pub fn binarize_categorical(raw: &RawDataset) -> RawDataset {
    let mut categories: Vec<Vec<String>> = vec![Vec::new(); raw.schema.len()];
    for (j, kind) in raw.schema.iter().enumerate() {
        if *kind == ColumnKind::Categorical {
            let set: BTreeSet<&str> = raw
                .values
                .iter()
                .filter_map(|r| match &r[j] {
                    AttrValue::Cat(s) => Some(s.as_str()),
                    AttrValue::Real(_) => None,
                })
                .collect();
            categories[j] = set.into_iter().map(String::from).collect();
        }
    }
    let mut schema = Vec::new();
    for (j, kind) in raw.schema.iter().enumerate() {
        match kind {
            ColumnKind::Real => schema.push(ColumnKind::Real),
            ColumnKind::Categorical => schema.extend(std::iter::repeat_n(ColumnKind::Real, categories[j].len())),
        }
    }
    let values = raw
        .values
        .iter()
        .map(|row| {
            let mut out = Vec::with_capacity(schema.len());
            for (j, v) in row.iter().enumerate() {
                match v {
                    AttrValue::Real(x) => out.push(AttrValue::Real(*x)),
                    AttrValue::Cat(s) => {
                        out.extend(categories[j].iter().map(|c| AttrValue::Real(if c == s { 1.0 } else { 0.0 })))
                    }
                }
            }
            out
        })
        .collect();
    RawDataset { schema, values, ..raw.clone() }
}

fn real_matrix(raw: &RawDataset) -> Result<Array2<f64>> {
    let d = raw.schema.len();
    let mut m = Array2::zeros((raw.ids.len(), d));
    for (i, row) in raw.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[[i, j]] = match v {
                AttrValue::Real(x) => *x,
                AttrValue::Cat(_) => return Err(Error::Data("categorical column left unbinarized".into())),
            };
        }
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct PcaTransform {
    pub mean: Array1<f64>,
    /// `d x k`, orthonormal columns in descending eigenvalue order.
    pub components: Array2<f64>,
    pub eigenvalues: Vec<f64>,
}

impl PcaTransform {
    pub fn k(&self) -> usize {
        self.components.ncols()
    }

    pub fn transform(&self, x: &Array2<f64>) -> Array2<f64> {
        (x - &self.mean.view().insert_axis(Axis(0))).dot(&self.components)
    }
}

/// Mean-centred projection onto the top-`k` eigenvectors of the sample
/// covariance. Each component's largest-magnitude entry is made positive.
pub fn pca_fit_transform(x: &Array2<f64>, k: usize) -> Result<(PcaTransform, Array2<f64>)> {
    let (n, d) = x.dim();
    if k == 0 || k > n.min(d) {
        return Err(Error::Usage(format!("PCA with k = {k} needs 1 <= k <= min({n}, {d})")));
    }
    let mean = x.mean_axis(Axis(0)).expect("n > 0");
    let centred = x - &mean.view().insert_axis(Axis(0));
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let cov = centred.t().dot(&centred) / denom;
    let cov = DMatrix::from_fn(d, d, |i, j| 0.5 * (cov[[i, j]] + cov[[j, i]]));
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut components = Array2::zeros((d, k));
    let mut eigenvalues = Vec::with_capacity(k);
    for (col, &src) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for i in 1..d {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            components[[i, col]] = sign * v[i];
        }
        eigenvalues.push(eig.eigenvalues[src]);
    }
    let t = PcaTransform { mean, components, eigenvalues };
    let projected = centred.dot(&t.components);
    Ok((t, projected))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizeMode {
    #[default]
    ZScore,
    MinMax,
    None,
}

impl std::str::FromStr for NormalizeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zscore" => Ok(Self::ZScore),
            "minmax" => Ok(Self::MinMax),
            "none" => Ok(Self::None),
            o => Err(Error::Config(format!("unknown normalization '{o}'"))),
        }
    }
}

/// Per-column scaling over all nodes. Constant columns become all-zero.
pub fn normalize_features(x: &Array2<f64>, mode: NormalizeMode) -> Array2<f64> {
    let mut out = x.clone();
    for mut col in out.columns_mut() {
        let n = col.len() as f64;
        match mode {
            NormalizeMode::ZScore => {
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    let sd = var.sqrt();
                    col.mapv_inplace(|v| (v - mean) / sd);
                } else {
                    col.fill(0.0);
                }
            }
            NormalizeMode::MinMax => {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    col.mapv_inplace(|v| (v - lo) / (hi - lo));
                } else {
                    col.fill(0.0);
                }
            }
            NormalizeMode::None => {}
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PrepOptions {
    pub pca_components: Option<usize>,
    pub normalize: NormalizeMode,
}

/// Preprocessed graph plus ground truth, with no labels marked known.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: DataGraph,
    pub truth: Vec<usize>,
    pub node_ids: Vec<String>,
}

/// isolated-node removal, binarization, optional PCA, normalization.
pub fn prepare(raw: &RawDataset, opts: PrepOptions) -> Result<Dataset> {
    let raw = remove_isolated(raw)?;
    let raw = binarize_categorical(&raw);
    let mut x = real_matrix(&raw)?;
    if let Some(k) = opts.pca_components {
        let k = k.min(x.ncols()).min(x.nrows());
        x = pca_fit_transform(&x, k)?.1;
    }
    let x = normalize_features(&x, opts.normalize);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("attributes overflow to non-finite values during preprocessing".into()));
    }
    let domain: Vec<String> = raw.labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let index: BTreeMap<&str, usize> = domain.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let truth = raw.labels.iter().map(|l| index[l.as_str()]).collect();
    let n = raw.ids.len();
    let graph = DataGraph::new(x, &raw.edges, domain, vec![None; n])?;
    Ok(Dataset { graph, truth, node_ids: raw.ids })
}
