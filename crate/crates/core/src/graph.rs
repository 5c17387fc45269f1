//! Graph datasets: text loaders, the random-walk transition matrix, and
//! stratified train/validation/test splits.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, DenseMatrix};

/// Which split a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

/// Node features, labels, adjacency, and split masks for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub adjacency: CsrMatrix,
    pub features: DenseMatrix,
    /// `None` marks an unlabeled node.
    pub labels: Vec<Option<usize>>,
    pub n_classes: usize,
    pub train_mask: Vec<bool>,
    pub valid_mask: Vec<bool>,
    pub test_mask: Vec<bool>,
}

impl GraphDataset {
    /// Assembles a dataset with empty split masks after checking shapes.
    pub fn new(
        adjacency: CsrMatrix,
        features: DenseMatrix,
        labels: Vec<Option<usize>>,
        n_classes: usize,
    ) -> Result<Self> {
        let n = features.n_rows();
        if !adjacency.is_square() || adjacency.n_rows() != n {
            return Err(Error::input(format!(
                "adjacency is {}x{} but there are {n} feature rows",
                adjacency.n_rows(),
                adjacency.n_cols()
            )));
        }
        if labels.len() != n {
            return Err(Error::input(format!(
                "{} labels for {n} nodes",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().flatten().find(|&&y| y >= n_classes) {
            return Err(Error::input(format!(
                "label {bad} outside [0, {n_classes})"
            )));
        }
        if adjacency.values().iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::input("adjacency weights must be finite and non-negative"));
        }
        Ok(Self {
            adjacency,
            features,
            labels,
            n_classes,
            train_mask: vec![false; n],
            valid_mask: vec![false; n],
            test_mask: vec![false; n],
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn mask(&self, split: Split) -> &[bool] {
        match split {
            Split::Train => &self.train_mask,
            Split::Valid => &self.valid_mask,
            Split::Test => &self.test_mask,
        }
    }

    /// Random-walk transition matrix of this graph's adjacency.
    pub fn transition_matrix(&self) -> Result<CsrMatrix> {
        transition_matrix(&self.adjacency)
    }

    /// Smallest out-degree (number of stored edges) over all nodes.
    pub fn min_degree(&self) -> usize {
        (0..self.n_nodes())
            .map(|i| self.adjacency.row_nnz(i))
            .min()
            .unwrap_or(0)
    }

    /// Scales every feature row to unit L1 norm; all-zero rows stay zero.
    pub fn row_normalize_features(&mut self) {
        for i in 0..self.features.n_rows() {
            let row = self.features.row_mut(i);
            let norm: f64 = row.iter().map(|v| v.abs()).sum();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }
}

/// Divides each row by its weighted out-degree. Rows with zero degree stay
/// empty, so an isolated node only ever sees its own features.
pub fn transition_matrix(adjacency: &CsrMatrix) -> Result<CsrMatrix> {
    if !adjacency.is_square() {
        return Err(Error::input("adjacency must be square"));
    }
    if adjacency.values().iter().any(|w| *w < 0.0) {
        return Err(Error::input("negative edge weight in adjacency"));
    }
    let degrees = adjacency.row_sums();
    Ok(adjacency.map_values(|i, _, w| w / degrees[i]))
}

/// Fractions and seed for stratified splitting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.6,
            valid_fraction: 0.2,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_fraction, self.valid_fraction, self.test_fraction];
        if fracs.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(Error::config(format!(
                "split fractions must lie in (0, 1), got {fracs:?}"
            )));
        }
        if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "split fractions must sum to 1, got {fracs:?}"
            )));
        }
        Ok(())
    }
}

/// Assigns every labeled node to exactly one split, stratified by class and
/// deterministic in `config.seed`.
pub fn make_splits(mut dataset: GraphDataset, config: &SplitConfig) -> Result<GraphDataset> {
    config.validate()?;
    let n = dataset.n_nodes();
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (node, label) in dataset.labels.iter().enumerate() {
        if let Some(y) = label {
            by_class.entry(*y).or_default().push(node);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut train = vec![false; n];
    let mut valid = vec![false; n];
    let mut test = vec![false; n];
    for (class, mut nodes) in by_class {
        nodes.shuffle(&mut rng);
        let count = nodes.len();
        let n_train = (config.train_fraction * count as f64).round() as usize;
        if n_train == 0 {
            return Err(Error::config(format!(
                "class {class} has {count} labeled node(s) and gets no training members"
            )));
        }
        let n_train = n_train.min(count);
        let n_valid = ((config.valid_fraction * count as f64).round() as usize).min(count - n_train);
        for (pos, &node) in nodes.iter().enumerate() {
            if pos < n_train {
                train[node] = true;
            } else if pos < n_train + n_valid {
                valid[node] = true;
            } else {
                test[node] = true;
            }
        }
    }
    dataset.train_mask = train;
    dataset.valid_mask = valid;
    dataset.test_mask = test;
    Ok(dataset)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| {
        Error::input(format!(
            "{}:{line}: cannot parse {what} from {field:?}",
            path.display()
        ))
    })
}

/// Paths for the three text files making up a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
}

/// Reads a dataset from text files.
///
/// * edges: `src dst [weight]` per line, `#` starts a comment.
/// * features: `node_id f1 ... fF`; every id in `0..N` must appear once.
/// * labels: `node_id class_id`; absent nodes are unlabeled.
///
/// Undirected graphs are symmetrised. A coordinate listed more than once
/// (including both directions of an undirected edge) is accepted only when
/// the weights agree.
pub fn load_dataset(paths: &DatasetPaths, directed: bool) -> Result<GraphDataset> {
    let features = load_features(&paths.features)?;
    let n = features.n_rows();
    let adjacency = load_edges(&paths.edges, n, directed)?;
    let labels = load_labels(&paths.labels, n)?;
    let n_classes = labels.iter().flatten().max().map_or(0, |m| m + 1);
    GraphDataset::new(adjacency, features, labels, n_classes)
}

fn load_features(path: &Path) -> Result<DenseMatrix> {
    let text = read_text(path)?;
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut width = None;
    for (line, fields) in data_lines(&text) {
        let id: usize = parse_field(path, line, fields[0], "node id")?;
        let values = fields[1..]
            .iter()
            .map(|f| parse_field::<f64>(path, line, f, "feature value"))
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "{}:{line}: non-finite feature",
                path.display()
            )));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::input(format!(
                    "{}:{line}: expected {w} features, found {}",
                    path.display(),
                    values.len()
                )))
            }
            _ => {}
        }
        if rows.insert(id, values).is_some() {
            return Err(Error::input(format!(
                "{}:{line}: duplicate feature row for node {id}",
                path.display()
            )));
        }
    }
    let n = rows.keys().next_back().map_or(0, |m| m + 1);
    if let Some(missing) = (0..n).find(|i| !rows.contains_key(i)) {
        return Err(Error::input(format!(
            "{}: missing feature row for node {missing}",
            path.display()
        )));
    }
    let rows: Vec<Vec<f64>> = rows.into_values().collect();
    DenseMatrix::from_rows(&rows)
}

fn load_edges(path: &Path, n: usize, directed: bool) -> Result<CsrMatrix> {
    let text = read_text(path)?;
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut insert = |src: usize, dst: usize, w: f64, line: usize| -> Result<()> {
        match edges.insert((src, dst), w) {
            Some(prev) if prev != w => Err(Error::input(format!(
                "{}:{line}: edge ({src}, {dst}) listed with weights {prev} and {w}",
                path.display()
            ))),
            _ => Ok(()),
        }
    };
    for (line, fields) in data_lines(&text) {
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::input(format!(
                "{}:{line}: expected `src dst [weight]`",
                path.display()
            )));
        }
        let src: usize = parse_field(path, line, fields[0], "source node")?;
        let dst: usize = parse_field(path, line, fields[1], "target node")?;
        let w: f64 = match fields.get(2) {
            Some(f) => parse_field(path, line, f, "edge weight")?,
            None => 1.0,
        };
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::input(format!(
                "{}:{line}: edge weight must be finite and non-negative",
                path.display()
            )));
        }
        for id in [src, dst] {
            if id >= n {
                return Err(Error::input(format!(
                    "{}:{line}: unknown node id {id} (graph has {n} nodes)",
                    path.display()
                )));
            }
        }
        insert(src, dst, w, line)?;
        if !directed && src != dst {
            insert(dst, src, w, line)?;
        }
    }
    let triplets: Vec<(usize, usize, f64)> = edges.into_iter().map(|((r, c), w)| (r, c, w)).collect();
    CsrMatrix::from_triplets(&triplets, n, n)
}

fn load_labels(path: &Path, n: usize) -> Result<Vec<Option<usize>>> {
    let text = read_text(path)?;
    let mut labels = vec![None; n];
    for (line, fields) in data_lines(&text) {
        if fields.len() != 2 {
            return Err(Error::input(format!(
                "{}:{line}: expected `node_id class_id`",
                path.display()
            )));
        }
        let id: usize = parse_field(path, line, fields[0], "node id")?;
        let class: usize = parse_field(path, line, fields[1], "integer class label")?;
        if id >= n {
            return Err(Error::input(format!(
                "{}:{line}: unknown node id {id}",
                path.display()
            )));
        }
        if labels[id].replace(class).is_some() {
            return Err(Error::input(format!(
                "{}:{line}: node {id} labeled twice",
                path.display()
            )));
        }
    }
    Ok(labels)
}

/// Writes a dataset in the loader's text formats (edges are written as
/// stored, i.e. both directions of an undirected edge).
pub fn write_dataset(dataset: &GraphDataset, paths: &DatasetPaths) -> Result<()> {
    use std::fmt::Write as _;
    let write = |path: &Path, body: String| {
        fs::write(path, body).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    let mut edges = String::new();
    for (i, j, w) in dataset.adjacency.iter() {
        if w == 1.0 {
            let _ = writeln!(edges, "{i} {j}");
        } else {
            let _ = writeln!(edges, "{i} {j} {w}");
        }
    }
    let mut feats = String::new();
    for i in 0..dataset.n_nodes() {
        let _ = write!(feats, "{i}");
        for v in dataset.features.row(i) {
            let _ = write!(feats, " {v}");
        }
        feats.push('\n');
    }
    let mut labels = String::new();
    for (i, y) in dataset.labels.iter().enumerate() {
        if let Some(y) = y {
            let _ = writeln!(labels, "{i} {y}");
        }
    }
    write(&paths.edges, edges)?;
    write(&paths.features, feats)?;
    write(&paths.labels, labels)
}
