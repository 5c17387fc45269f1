//! Experiment configuration: a TOML file with one section per concern.
//!
//! ```toml
//! [synthetic]          # or [data] with edges/features/labels paths
//! kind = "sbm"
//! n = 300
//!
//! [split]
//! train_fraction = 0.6
//! valid_fraction = 0.2
//! test_fraction = 0.2
//!
//! [train]
//! n_hops = 2
//! threshold_mode = "pre"
//! threshold = 0.05
//!
//! [sweep]
//! thresholds = [0.0, 0.05, 0.1]
//! hops = [2, 5]
//!
//! [output]
//! dir = "results"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use sdcnn::{
    generate_synthetic, load_dataset, make_splits, DatasetPaths, Error, GraphDataset, Result,
    SplitConfig, SynthSpec, ThresholdKind, TrainConfig,
};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFiles {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
    #[serde(default)]
    pub directed: bool,
    #[serde(default)]
    pub normalize_features: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub thresholds: Vec<f64>,
    pub mode: ThresholdKind,
    /// Hop counts for the density command; empty means `train.n_hops`.
    pub hops: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            thresholds: vec![0.0, 0.02, 0.05, 0.1, 0.3, 0.5, 0.7],
            mode: ThresholdKind::Pre,
            hops: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<DataFiles>,
    pub synthetic: Option<SynthSpec>,
    pub split: SplitConfig,
    pub train: TrainConfig,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path`; relative data and output paths resolve against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(files) = &mut config.data {
            for p in [&mut files.edges, &mut files.features, &mut files.labels] {
                *p = base.join(&*p);
            }
        }
        config.output.dir = base.join(&config.output.dir);
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.data, &self.synthetic) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either [data] or [synthetic], not both".into(),
                ))
            }
            (None, None) => return Err(Error::Config("missing [data] or [synthetic]".into())),
            _ => {}
        }
        self.split.validate()?;
        self.train.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical serialisation, hex encoded. The output
    /// directory is excluded: it does not affect results.
    pub fn hash(&self) -> String {
        let canonical = Self {
            output: OutputSection::default(),
            ..self.clone()
        };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    /// Hop counts for density curves.
    pub fn density_hops(&self) -> Vec<usize> {
        if self.sweep.hops.is_empty() {
            vec![self.train.n_hops]
        } else {
            self.sweep.hops.clone()
        }
    }

    /// Loads or generates the graph and applies the split.
    pub fn dataset(&self) -> Result<GraphDataset> {
        let raw = match (&self.data, &self.synthetic) {
            (Some(files), _) => {
                let paths = DatasetPaths {
                    edges: files.edges.clone(),
                    features: files.features.clone(),
                    labels: files.labels.clone(),
                };
                let mut ds = load_dataset(&paths, files.directed)?;
                if files.normalize_features {
                    ds.row_normalize_features();
                }
                ds
            }
            (None, Some(spec)) => generate_synthetic(spec)?,
            (None, None) => return Err(Error::Config("missing [data] or [synthetic]".into())),
        };
        make_splits(raw, &self.split)
    }
}
