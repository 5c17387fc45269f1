//! Seeded synthetic graphs used as small stand-ins for citation datasets.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::GraphDataset;
use crate::sparse::{CsrMatrix, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Stochastic block model; labels are block ids.
    Sbm,
    Path,
    Complete,
    /// Barabási–Albert preferential attachment.
    ScaleFree,
}

/// Parameters of a synthetic dataset. Fields not used by `kind` are ignored.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n: usize,
    /// SBM block count.
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Edges added per node in the scale-free model.
    pub attach: usize,
    /// SBM nodes left below this degree get extra edges inside their block.
    pub min_degree: usize,
    /// Label count for non-SBM graphs (`label = node % classes`).
    pub classes: usize,
    /// Zero gives a single feature holding `node + 1`.
    pub feature_dim: usize,
    /// Offset added to the feature assigned to a node's class.
    pub feature_signal: f64,
    /// Standard deviation of Gaussian feature noise.
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            kind: SynthKind::Sbm,
            n: 100,
            blocks: 2,
            p_in: 0.3,
            p_out: 0.01,
            attach: 2,
            min_degree: 0,
            classes: 2,
            feature_dim: 0,
            feature_signal: 0.0,
            feature_noise: 0.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn path(n: usize) -> Self {
        Self {
            kind: SynthKind::Path,
            n,
            ..Self::default()
        }
    }

    pub fn complete(n: usize) -> Self {
        Self {
            kind: SynthKind::Complete,
            n,
            ..Self::default()
        }
    }

    pub fn sbm(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Self {
        Self {
            kind: SynthKind::Sbm,
            n,
            blocks,
            p_in,
            p_out,
            seed,
            ..Self::default()
        }
    }

    pub fn with_min_degree(mut self, min_degree: usize) -> Self {
        self.min_degree = min_degree;
        self
    }

    pub fn with_features(mut self, dim: usize, signal: f64, noise: f64) -> Self {
        self.feature_dim = dim;
        self.feature_signal = signal;
        self.feature_noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::input(msg));
        if self.n == 0 {
            return bad("synthetic graph needs n >= 1".into());
        }
        let n_classes = self.n_classes();
        if n_classes == 0 || n_classes > self.n {
            return bad(format!("need 1 <= classes <= n, got {n_classes}"));
        }
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if self.kind == SynthKind::Sbm && !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be a probability, got {p}"));
            }
        }
        if self.kind == SynthKind::ScaleFree && (self.attach == 0 || self.attach >= self.n) {
            return bad(format!(
                "scale-free attach must be in [1, n), got {}",
                self.attach
            ));
        }
        if !(self.feature_noise >= 0.0) || !self.feature_signal.is_finite() {
            return bad("feature noise must be >= 0 and signal finite".into());
        }
        Ok(())
    }

    fn n_classes(&self) -> usize {
        match self.kind {
            SynthKind::Sbm => self.blocks,
            _ => self.classes,
        }
    }
}

/// Builds the dataset described by `spec`. Split masks are left empty.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<GraphDataset> {
    spec.validate()?;
    let n = spec.n;
    let n_classes = spec.n_classes();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels: Vec<usize> = match spec.kind {
        SynthKind::Sbm => (0..n).map(|i| i * n_classes / n).collect(),
        _ => (0..n).map(|i| i % n_classes).collect(),
    };

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    match spec.kind {
        SynthKind::Path => edges.extend((1..n).map(|i| (i - 1, i))),
        SynthKind::Complete => {
            for i in 0..n {
                edges.extend((i + 1..n).map(|j| (i, j)));
            }
        }
        SynthKind::Sbm => {
            for i in 0..n {
                for j in i + 1..n {
                    let p = if labels[i] == labels[j] { spec.p_in } else { spec.p_out };
                    if rng.random::<f64>() < p {
                        edges.insert((i, j));
                    }
                }
            }
            top_up_degrees(&mut edges, &labels, spec.min_degree, &mut rng)?;
        }
        SynthKind::ScaleFree => {
            let m = spec.attach;
            // endpoints list: each node appears once per incident edge
            let mut endpoints = Vec::new();
            for i in 0..=m {
                for j in i + 1..=m {
                    edges.insert((i, j));
                    endpoints.extend([i, j]);
                }
            }
            for new in m + 1..n {
                let mut targets = BTreeSet::new();
                while targets.len() < m {
                    targets.insert(endpoints[rng.random_range(0..endpoints.len())]);
                }
                for t in targets {
                    edges.insert((t, new));
                    endpoints.extend([t, new]);
                }
            }
        }
    }
    let triplets: Vec<(usize, usize, f64)> = edges
        .iter()
        .flat_map(|&(i, j)| [(i, j, 1.0), (j, i, 1.0)])
        .collect();
    let adjacency = CsrMatrix::from_triplets(&triplets, n, n)?;

    let features = if spec.feature_dim == 0 {
        DenseMatrix::from_vec(n, 1, (1..=n).map(|i| i as f64).collect())?
    } else {
        let f = spec.feature_dim;
        let mut x = DenseMatrix::zeros(n, f);
        for (i, &y) in labels.iter().enumerate() {
            for (k, v) in x.row_mut(i).iter_mut().enumerate() {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let signal = if k % n_classes == y { spec.feature_signal } else { 0.0 };
                *v = signal + spec.feature_noise * noise;
            }
        }
        x
    };
    GraphDataset::new(
        adjacency,
        features,
        labels.into_iter().map(Some).collect(),
        n_classes,
    )
}

/// Adds uniformly chosen same-label partners to every node whose degree is
/// below `min_degree`, visiting nodes in index order.
fn top_up_degrees(
    edges: &mut BTreeSet<(usize, usize)>,
    labels: &[usize],
    min_degree: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    if min_degree == 0 {
        return Ok(());
    }
    let n = labels.len();
    let mut degree = vec![0usize; n];
    for &(i, j) in edges.iter() {
        degree[i] += 1;
        degree[j] += 1;
    }
    for i in 0..n {
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&j| j != i && labels[j] == labels[i] && !edges.contains(&(i.min(j), i.max(j))))
            .collect();
        if degree[i] + candidates.len() < min_degree {
            return Err(Error::input(format!(
                "block of node {i} is too small for min_degree {min_degree}"
            )));
        }
        while degree[i] < min_degree {
            let j = candidates.swap_remove(rng.random_range(0..candidates.len()));
            edges.insert((i.min(j), i.max(j)));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_fixture() {
        let ds = generate_synthetic(&SynthSpec::path(3)).unwrap();
        assert_eq!(ds.adjacency.nnz(), 4);
        assert_eq!(ds.features.values(), &[1.0, 2.0, 3.0]);
        let p = ds.transition_matrix().unwrap();
        assert_eq!(p.get(1, 0), 0.5);
        assert_eq!(p.get(0, 1), 1.0);
    }

    #[test]
    fn complete_graph_transition() {
        let ds = generate_synthetic(&SynthSpec::complete(4)).unwrap();
        let p = ds.transition_matrix().unwrap();
        assert_eq!(p.nnz(), 12);
        assert!(p.iter().all(|(i, j, v)| i != j && v == 1.0 / 3.0));
    }

    #[test]
    fn sbm_is_deterministic_and_symmetric() {
        let spec = SynthSpec::sbm(60, 3, 0.3, 0.02, 9).with_features(4, 1.0, 0.5);
        let a = generate_synthetic(&spec).unwrap();
        assert_eq!(a, generate_synthetic(&spec).unwrap());
        assert_eq!(a.adjacency, a.adjacency.transpose());
        assert_eq!(a.n_classes, 3);
        assert_eq!(a.labels.iter().filter(|y| **y == Some(2)).count(), 20);
    }

    #[test]
    fn min_degree_top_up() {
        let sparse = SynthSpec::sbm(80, 2, 0.01, 0.0, 4);
        assert!(generate_synthetic(&sparse).unwrap().min_degree() < 2);
        let ds = generate_synthetic(&sparse.with_min_degree(3)).unwrap();
        assert!(ds.min_degree() >= 3);
        assert_eq!(ds.adjacency, ds.adjacency.transpose());
        assert!(generate_synthetic(&SynthSpec::sbm(4, 2, 0.0, 0.0, 0).with_min_degree(2)).is_err());
    }

    #[test]
    fn scale_free_edge_count() {
        let spec = SynthSpec {
            kind: SynthKind::ScaleFree,
            n: 50,
            attach: 2,
            ..SynthSpec::default()
        };
        let ds = generate_synthetic(&spec).unwrap();
        // initial triangle plus two edges per later node, stored both ways
        assert_eq!(ds.adjacency.nnz(), 2 * (3 + 2 * 47));
        assert!(ds.min_degree() >= 2);
    }

    #[test]
    fn invalid_params() {
        assert!(generate_synthetic(&SynthSpec::sbm(10, 2, 1.5, 0.0, 0)).is_err());
        assert!(generate_synthetic(&SynthSpec::sbm(0, 2, 0.5, 0.0, 0)).is_err());
        assert!(generate_synthetic(&SynthSpec::sbm(3, 5, 0.5, 0.0, 0)).is_err());
        let sf = SynthSpec {
            kind: SynthKind::ScaleFree,
            n: 3,
            attach: 3,
            ..SynthSpec::default()
        };
        assert!(generate_synthetic(&sf).is_err());
    }
}
